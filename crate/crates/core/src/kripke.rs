//! The strategy-pruned, fairness-annotated Kripke model built from a game
//! structure and a strategy.
//!
//! Propositions are the Σ′ places, one atom per environment transition, and
//! the scheduler atoms `u` and `env`. Every kept game edge is split by an
//! intermediate state carrying the fairness atoms; states where both players
//! can only idle get a partner state forming a fair 2-cycle.

use crate::bitset::BitSet;
use crate::game::{sharp, GameStructure};
use crate::net::{NetSystem, TransitionId};
use crate::strategy::{Selection, Strategy};
use thiserror::Error;

#[derive(Error, Debug)]
pub enum EncodeError {
    #[error(
        "strategy selects `{transition}` in class {class}, which is not enabled in its observation"
    )]
    StrategySelectsDisabled { class: usize, transition: String },
    #[error("strategy selects the uncontrollable transition `{0}`")]
    NotControllable(String),
}

/// Where a Kripke state came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    /// An original game state.
    State(usize),
    /// The intermediate state splitting a kept game edge.
    Intermediate {
        from: usize,
        fired: TransitionId,
        to: usize,
    },
    /// The deadlock partner of a game state.
    Partner(usize),
}

/// A proposition-labelled graph with the fairness propositions baked in.
pub struct KripkeModel {
    props: Vec<String>,
    place_props: usize,
    labels: Vec<BitSet>,
    succ: Vec<Vec<usize>>,
    initial: usize,
    origins: Vec<Origin>,
}

impl KripkeModel {
    /// A bare model (used by tests and the model-checking oracle); all
    /// propositions count as place propositions.
    pub fn new(
        props: Vec<String>,
        labels: Vec<BitSet>,
        succ: Vec<Vec<usize>>,
        initial: usize,
    ) -> KripkeModel {
        let n = labels.len();
        assert_eq!(succ.len(), n);
        let place_props = props.len();
        KripkeModel {
            props,
            place_props,
            labels,
            succ,
            initial,
            origins: (0..n).map(Origin::State).collect(),
        }
    }

    pub fn state_count(&self) -> usize {
        self.labels.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn props(&self) -> &[String] {
        &self.props
    }

    pub fn prop_index(&self, name: &str) -> Option<usize> {
        self.props.iter().position(|p| p == name)
    }

    /// Indices of the propositions beyond P′: the environment-transition
    /// atoms and `u`, `env`.
    pub fn fairness_props(&self) -> Vec<usize> {
        (self.place_props..self.props.len()).collect()
    }

    pub fn place_props(&self) -> usize {
        self.place_props
    }

    pub fn label(&self, state: usize) -> &BitSet {
        &self.labels[state]
    }

    pub fn successors(&self, state: usize) -> &[usize] {
        &self.succ[state]
    }

    pub fn origin(&self, state: usize) -> &Origin {
        &self.origins[state]
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(|s| s.len()).sum()
    }
}

/// Build K(G, f).
pub fn encode(
    net: &NetSystem,
    game: &GameStructure,
    f: &Strategy,
) -> Result<KripkeModel, EncodeError> {
    // validate the strategy against the class observations
    for (class, sel) in f.selections() {
        if let Selection::Fire(t) = sel {
            let tr = net.transition(t);
            if !tr.controllable {
                return Err(EncodeError::NotControllable(tr.name.clone()));
            }
            if !game.selectable(class).contains(&t) {
                return Err(EncodeError::StrategySelectsDisabled {
                    class,
                    transition: tr.name.clone(),
                });
            }
        }
    }

    let env_list: Vec<TransitionId> = game.fairness().env_transitions.clone();
    let place_props = net.place_count();
    let width = place_props + env_list.len() + 2;
    let mut props: Vec<String> = net.places().map(|(_, p)| p.name.clone()).collect();
    for &t in &env_list {
        props.push(net.transition(t).name.clone());
    }
    props.push("u".to_string());
    props.push("env".to_string());
    let env_atom: std::collections::HashMap<TransitionId, usize> = env_list
        .iter()
        .enumerate()
        .map(|(k, &t)| (t, place_props + k))
        .collect();
    let u_prop = width - 2;
    let env_prop = width - 1;

    let n = game.state_count();
    let mut labels: Vec<BitSet> = Vec::with_capacity(2 * n);
    let mut succ: Vec<Vec<usize>> = Vec::with_capacity(2 * n);
    let mut origins: Vec<Origin> = Vec::with_capacity(2 * n);

    let widen = |m: &BitSet| -> BitSet {
        let mut l = BitSet::new(width);
        for p in m.iter() {
            l.insert(p);
        }
        l
    };

    // original states first, so game state s is Kripke state s
    for s in 0..n {
        labels.push(widen(game.marking(s)));
        succ.push(Vec::new());
        origins.push(Origin::State(s));
    }

    for s in 0..n {
        let sel = f.get(game.class_of(s));
        let no_env = game.env_moves(s).is_empty();
        let disabled_atoms: Vec<usize> = env_list
            .iter()
            .filter(|&&t| !net.transition(t).pre.is_subset(game.marking(s)))
            .map(|t| env_atom[t])
            .collect();

        let mut kept: Vec<(TransitionId, usize)> = Vec::new();
        for &(t, d) in game.successors(s) {
            if net.transition(t).controllable {
                if sel == Selection::Fire(t) {
                    kept.push((t, d));
                }
            } else {
                kept.push((t, d));
            }
        }

        for (t, d) in kept {
            let mut label = labels[s].clone();
            for &a in &disabled_atoms {
                label.insert(a);
            }
            let controllable = net.transition(t).controllable;
            if !controllable {
                for c in sharp(net, game, t, s).expect("kept env edge") {
                    label.insert(env_atom[&c]);
                }
            }
            if controllable || sel == Selection::Idle {
                label.insert(u_prop);
            }
            // the environment took this turn, or it can only idle here;
            // mirrors the u rule — without the first disjunct, runs with
            // infinitely many environment moves would never count as fair
            if !controllable || no_env {
                label.insert(env_prop);
            }
            let l = labels.len();
            labels.push(label);
            succ.push(vec![d]);
            origins.push(Origin::Intermediate {
                from: s,
                fired: t,
                to: d,
            });
            succ[s].push(l);
        }

        if no_env && sel == Selection::Idle {
            let mut label = labels[s].clone();
            for k in place_props..width {
                label.insert(k);
            }
            let l = labels.len();
            labels.push(label);
            succ.push(vec![s]);
            origins.push(Origin::Partner(s));
            succ[s].push(l);
        }
    }

    Ok(KripkeModel {
        props,
        place_props,
        labels,
        succ,
        initial: game.initial(),
        origins,
    })
}
