//! Net system representation, parsing and the token-game firing rule.

use crate::bitset::BitSet;
use serde::Deserialize;
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

/// Dense index into a net's place table.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PlaceId(pub usize);

/// Dense index into a net's transition table.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct TransitionId(pub usize);

#[derive(Clone, Debug)]
pub struct Place {
    pub name: String,
    pub observable: bool,
    /// True for places added by net extension (regions that are not extensions
    /// of an original place).
    pub implicit: bool,
}

#[derive(Clone, Debug)]
pub struct Transition {
    pub name: String,
    pub pre: BitSet,
    pub post: BitSet,
    pub controllable: bool,
}

/// A 1-safe marking: a subset of the net's places.
pub type Marking = BitSet;

#[derive(Error, Debug)]
pub enum NetError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("duplicate {kind} name `{name}`")]
    DuplicateName { kind: &'static str, name: String },
    #[error("transition `{0}` has an empty pre-set")]
    EmptyPre(String),
    #[error("transition `{0}` has an empty post-set")]
    EmptyPost(String),
    #[error("preplace `{place}` of controllable transition `{transition}` is not observable")]
    UnobservablePre { transition: String, place: String },
    #[error("unknown place `{0}`")]
    UnknownPlace(String),
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum FireError {
    #[error("transition `{0}` is not enabled")]
    NotEnabled(String),
    #[error("firing `{transition}` would put a second token on `{place}`")]
    SafetyViolation { transition: String, place: String },
}

/// An immutable net system: places, transitions with pre/post sets, an
/// initial marking, and the controllable/observable annotations.
#[derive(Clone, Debug)]
pub struct NetSystem {
    places: Vec<Place>,
    transitions: Vec<Transition>,
    initial: Marking,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NetDoc {
    places: Vec<String>,
    transitions: Vec<TransitionDoc>,
    initial: Vec<String>,
    observable: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionDoc {
    name: String,
    pre: Vec<String>,
    post: Vec<String>,
    #[serde(default)]
    controllable: bool,
}

/// Parse and validate a net from its JSON document form.
pub fn parse_net(text: &str) -> Result<NetSystem, NetError> {
    let doc: NetDoc = serde_json::from_str(text).map_err(|e| NetError::Syntax(e.to_string()))?;

    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, name) in doc.places.iter().enumerate() {
        if index.insert(name, i).is_some() {
            return Err(NetError::DuplicateName {
                kind: "place",
                name: name.clone(),
            });
        }
    }
    let resolve = |name: &str| -> Result<usize, NetError> {
        index
            .get(name)
            .copied()
            .ok_or_else(|| NetError::UnknownPlace(name.to_string()))
    };

    let width = doc.places.len();
    let mut observable = BitSet::new(width);
    for name in &doc.observable {
        observable.insert(resolve(name)?);
    }
    let places: Vec<Place> = doc
        .places
        .iter()
        .enumerate()
        .map(|(i, name)| Place {
            name: name.clone(),
            observable: observable.contains(i),
            implicit: false,
        })
        .collect();

    let mut seen_t: HashMap<&str, ()> = HashMap::new();
    let mut transitions = Vec::with_capacity(doc.transitions.len());
    for t in &doc.transitions {
        if seen_t.insert(&t.name, ()).is_some() {
            return Err(NetError::DuplicateName {
                kind: "transition",
                name: t.name.clone(),
            });
        }
        let mut pre = BitSet::new(width);
        for p in &t.pre {
            pre.insert(resolve(p)?);
        }
        let mut post = BitSet::new(width);
        for p in &t.post {
            post.insert(resolve(p)?);
        }
        transitions.push(Transition {
            name: t.name.clone(),
            pre,
            post,
            controllable: t.controllable,
        });
    }

    let mut initial = BitSet::new(width);
    for p in &doc.initial {
        initial.insert(resolve(p)?);
    }

    NetSystem::new(places, transitions, initial)
}

impl NetSystem {
    /// Validates the structural invariants: non-empty pre/post sets and
    /// observability of every preplace of a controllable transition.
    pub fn new(
        places: Vec<Place>,
        transitions: Vec<Transition>,
        initial: Marking,
    ) -> Result<Self, NetError> {
        for t in &transitions {
            if t.pre.is_empty() {
                return Err(NetError::EmptyPre(t.name.clone()));
            }
            if t.post.is_empty() {
                return Err(NetError::EmptyPost(t.name.clone()));
            }
            if t.controllable {
                for p in t.pre.iter() {
                    if !places[p].observable {
                        return Err(NetError::UnobservablePre {
                            transition: t.name.clone(),
                            place: places[p].name.clone(),
                        });
                    }
                }
            }
        }
        debug_assert_eq!(initial.width(), places.len());
        Ok(NetSystem {
            places,
            transitions,
            initial,
        })
    }

    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn place(&self, p: PlaceId) -> &Place {
        &self.places[p.0]
    }

    pub fn places(&self) -> impl Iterator<Item = (PlaceId, &Place)> {
        self.places.iter().enumerate().map(|(i, p)| (PlaceId(i), p))
    }

    pub fn transition(&self, t: TransitionId) -> &Transition {
        &self.transitions[t.0]
    }

    pub fn transitions(&self) -> impl Iterator<Item = (TransitionId, &Transition)> {
        self.transitions
            .iter()
            .enumerate()
            .map(|(i, t)| (TransitionId(i), t))
    }

    pub fn initial(&self) -> &Marking {
        &self.initial
    }

    pub fn place_id(&self, name: &str) -> Option<PlaceId> {
        self.places.iter().position(|p| p.name == name).map(PlaceId)
    }

    pub fn transition_id(&self, name: &str) -> Option<TransitionId> {
        self.transitions
            .iter()
            .position(|t| t.name == name)
            .map(TransitionId)
    }

    /// Set of places observable by the user.
    pub fn observable_set(&self) -> BitSet {
        BitSet::from_indices(
            self.places.len(),
            self.places
                .iter()
                .enumerate()
                .filter(|(_, p)| p.observable)
                .map(|(i, _)| i),
        )
    }

    pub fn env_transitions(&self) -> impl Iterator<Item = TransitionId> + '_ {
        self.transitions
            .iter()
            .enumerate()
            .filter(|(_, t)| !t.controllable)
            .map(|(i, _)| TransitionId(i))
    }

    pub fn controllable_transitions(&self) -> impl Iterator<Item = TransitionId> + '_ {
        self.transitions
            .iter()
            .enumerate()
            .filter(|(_, t)| t.controllable)
            .map(|(i, _)| TransitionId(i))
    }

    pub fn marking_names(&self, m: &Marking) -> Vec<String> {
        m.iter().map(|p| self.places[p].name.clone()).collect()
    }

    pub fn display_marking(&self, m: &Marking) -> String {
        let mut s = String::from("{");
        for (k, p) in m.iter().enumerate() {
            if k > 0 {
                s.push(',');
            }
            s.push_str(&self.places[p].name);
        }
        s.push('}');
        s
    }
}

/// Transitions enabled at `m`: those whose pre-set is contained in `m`.
pub fn enabled_at(net: &NetSystem, m: &Marking) -> Vec<TransitionId> {
    net.transitions()
        .filter(|(_, t)| t.pre.is_subset(m))
        .map(|(id, _)| id)
        .collect()
}

pub fn is_enabled(net: &NetSystem, m: &Marking, t: TransitionId) -> bool {
    net.transition(t).pre.is_subset(m)
}

/// Fire `t` at `m`, producing `(m \ pre(t)) ∪ post(t)`.
///
/// Fails with `NotEnabled` when the pre-set is not marked, and with
/// `SafetyViolation` when a place outside the pre-set would receive a second
/// token.
pub fn fire(net: &NetSystem, m: &Marking, t: TransitionId) -> Result<Marking, FireError> {
    let tr = net.transition(t);
    if !tr.pre.is_subset(m) {
        return Err(FireError::NotEnabled(tr.name.clone()));
    }
    let fresh = tr.post.difference(&tr.pre);
    let clash = fresh.intersection(m);
    if let Some(p) = clash.iter().next() {
        return Err(FireError::SafetyViolation {
            transition: tr.name.clone(),
            place: net.places[p].name.clone(),
        });
    }
    Ok(m.difference(&tr.pre).union(&tr.post))
}

impl fmt::Display for NetSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "places: {}",
            self.places
                .iter()
                .map(|p| p.name.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        )?;
        for t in &self.transitions {
            writeln!(
                f,
                "  {}{}: {} -> {}",
                t.name,
                if t.controllable { " (ctrl)" } else { "" },
                self.display_marking(&t.pre),
                self.display_marking(&t.post),
            )?;
        }
        write!(f, "initial: {}", self.display_marking(&self.initial))
    }
}
