//! Region algebra over the marking graph: place extensions, complements,
//! compatible unions, the observable closure, and net extension by implicit
//! places.

use crate::bitset::BitSet;
use crate::marking_graph::{is_region, region_boundary, MarkingGraph, StateSet};
use crate::net::{Marking, NetSystem, Place, PlaceId, Transition};
use std::collections::HashMap;
use thiserror::Error;

/// Default cap on the number of distinct regions produced by the observable
/// closure.
pub const DEFAULT_CLOSURE_CAP: usize = 1 << 14;

#[derive(Error, Debug)]
pub enum RegionError {
    #[error("regions are not compatible")]
    NotCompatible,
    #[error("observable closure exceeds the region cap {0}")]
    ClosureCapExceeded(usize),
}

/// How a region was formed; display metadata only.
#[derive(Clone, Debug)]
pub enum RegionOrigin {
    Extension(PlaceId),
    ComplementOf(String),
    UnionOf(String, String),
    Other,
}

/// A set of marking-graph states satisfying uniform crossing.
///
/// Identity is the state set: two regions with equal state sets are the same
/// region; names are generated hints.
#[derive(Clone, Debug)]
pub struct Region {
    pub states: StateSet,
    pub name: String,
    pub origin: RegionOrigin,
}

impl PartialEq for Region {
    fn eq(&self, other: &Self) -> bool {
        self.states == other.states
    }
}
impl Eq for Region {}

impl Region {
    /// Wrap an arbitrary state set, verifying uniform crossing.
    pub fn from_state_set(
        mg: &MarkingGraph,
        states: StateSet,
        name: impl Into<String>,
    ) -> Option<Region> {
        if is_region(mg, &states) {
            Some(Region {
                states,
                name: name.into(),
                origin: RegionOrigin::Other,
            })
        } else {
            None
        }
    }
}

fn complement_name(name: &str) -> String {
    if let Some(stripped) = name.strip_suffix("^c") {
        let stripped = stripped
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .unwrap_or(stripped);
        stripped.to_string()
    } else if name.contains('|') {
        format!("({name})^c")
    } else {
        format!("{name}^c")
    }
}

/// Extension of a place: the states whose marking contains it.
pub fn place_extension(mg: &MarkingGraph, net: &NetSystem, p: PlaceId) -> Region {
    let states = StateSet::from_indices(
        mg.state_count(),
        mg.states().filter(|(_, m)| m.contains(p.0)).map(|(i, _)| i),
    );
    Region {
        states,
        name: net.place(p).name.clone(),
        origin: RegionOrigin::Extension(p),
    }
}

/// Complement region over the same state universe.
pub fn complement(mg: &MarkingGraph, r: &Region) -> Region {
    let states = r.states.complement();
    debug_assert!(is_region(mg, &states));
    Region {
        states,
        name: complement_name(&r.name),
        origin: RegionOrigin::ComplementOf(r.name.clone()),
    }
}

/// Two regions are compatible when `r1\r2`, `r1∩r2` and `r2\r1` are all
/// regions. Any witness triple of the definitional formulation is forced to
/// equal these three sets.
pub fn compatible(mg: &MarkingGraph, r1: &Region, r2: &Region) -> bool {
    is_region(mg, &r1.states.difference(&r2.states))
        && is_region(mg, &r1.states.intersection(&r2.states))
        && is_region(mg, &r2.states.difference(&r1.states))
}

/// Union of compatible regions.
pub fn union_compatible(
    mg: &MarkingGraph,
    r1: &Region,
    r2: &Region,
) -> Result<Region, RegionError> {
    if !compatible(mg, r1, r2) {
        return Err(RegionError::NotCompatible);
    }
    let states = r1.states.union(&r2.states);
    debug_assert!(is_region(mg, &states));
    Ok(Region {
        states,
        name: format!("{}|{}", r1.name, r2.name),
        origin: RegionOrigin::UnionOf(r1.name.clone(), r2.name.clone()),
    })
}

/// Least fixpoint of the observable place extensions under complement and
/// compatible union. The trivial regions (empty and full) are excluded, and
/// regions are deduplicated by state set.
pub fn observable_closure(
    mg: &MarkingGraph,
    net: &NetSystem,
    observable: &[PlaceId],
) -> Result<Vec<Region>, RegionError> {
    observable_closure_capped(mg, net, observable, DEFAULT_CLOSURE_CAP)
}

pub fn observable_closure_capped(
    mg: &MarkingGraph,
    net: &NetSystem,
    observable: &[PlaceId],
    cap: usize,
) -> Result<Vec<Region>, RegionError> {
    let full = mg.full_state_set();
    let mut regions: Vec<Region> = Vec::new();
    let mut seen: HashMap<StateSet, ()> = HashMap::new();

    let push = |regions: &mut Vec<Region>,
                seen: &mut HashMap<StateSet, ()>,
                r: Region|
     -> Result<(), RegionError> {
        if r.states.is_empty() || r.states == full {
            return Ok(());
        }
        if seen.contains_key(&r.states) {
            return Ok(());
        }
        if regions.len() >= cap {
            return Err(RegionError::ClosureCapExceeded(cap));
        }
        seen.insert(r.states.clone(), ());
        regions.push(r);
        Ok(())
    };

    for &p in observable {
        push(&mut regions, &mut seen, place_extension(mg, net, p))?;
    }

    let mut i = 0;
    while i < regions.len() {
        let c = complement(mg, &regions[i]);
        push(&mut regions, &mut seen, c)?;
        for j in 0..i {
            if compatible(mg, &regions[i], &regions[j]) {
                let u = union_compatible(mg, &regions[j], &regions[i]).expect("checked compatible");
                push(&mut regions, &mut seen, u)?;
            }
        }
        i += 1;
    }
    Ok(regions)
}

/// The extension Σ′ of a net: one implicit place per closure region that is
/// not the extension of an existing place, with arcs given by the region
/// boundary.
#[derive(Clone, Debug)]
pub struct ExtendedNet {
    base: NetSystem,
    net: NetSystem,
    implicit: Vec<(PlaceId, Region)>,
}

impl ExtendedNet {
    /// The extended net Σ′.
    pub fn net(&self) -> &NetSystem {
        &self.net
    }

    /// The original net Σ.
    pub fn base(&self) -> &NetSystem {
        &self.base
    }

    pub fn implicit_places(&self) -> &[(PlaceId, Region)] {
        &self.implicit
    }

    pub fn base_place_count(&self) -> usize {
        self.base.place_count()
    }

    /// Drop implicit places from a Σ′ marking.
    pub fn project(&self, m: &Marking) -> Marking {
        m.truncated(self.base.place_count())
    }
}

/// Build Σ′ from a closure of regions. The marking graph of the result is
/// isomorphic to `mg` under `project`.
pub fn extend_net(net: &NetSystem, mg: &MarkingGraph, closure: &[Region]) -> ExtendedNet {
    // extensions of existing places, for the implicit-place test
    let mut extensions: HashMap<StateSet, PlaceId> = HashMap::new();
    for (p, _) in net.places() {
        extensions.insert(place_extension(mg, net, p).states.clone(), p);
    }

    let fresh: Vec<&Region> = closure
        .iter()
        .filter(|r| !extensions.contains_key(&r.states))
        .collect();

    let width = net.place_count() + fresh.len();
    let mut names: HashMap<String, ()> = net.places().map(|(_, p)| (p.name.clone(), ())).collect();
    let mut places: Vec<Place> = net.places().map(|(_, p)| p.clone()).collect();
    let mut implicit = Vec::new();
    for (k, r) in fresh.iter().enumerate() {
        let mut name = r.name.clone();
        while names.contains_key(&name) {
            name.push('\'');
        }
        names.insert(name.clone(), ());
        places.push(Place {
            name,
            observable: true,
            implicit: true,
        });
        implicit.push((PlaceId(net.place_count() + k), (*r).clone()));
    }

    let mut transitions: Vec<Transition> = net
        .transitions()
        .map(|(_, t)| {
            let mut pre = BitSet::new(width);
            for p in t.pre.iter() {
                pre.insert(p);
            }
            let mut post = BitSet::new(width);
            for p in t.post.iter() {
                post.insert(p);
            }
            Transition {
                name: t.name.clone(),
                pre,
                post,
                controllable: t.controllable,
            }
        })
        .collect();

    for (pid, r) in &implicit {
        let (entering, exiting) =
            region_boundary(mg, &r.states).expect("closure regions are regions");
        for t in entering {
            transitions[t.0].post.insert(pid.0);
        }
        for t in exiting {
            transitions[t.0].pre.insert(pid.0);
        }
    }

    let mut initial = BitSet::new(width);
    for p in net.initial().iter() {
        initial.insert(p);
    }
    for (pid, r) in &implicit {
        if r.states.contains(mg.initial()) {
            initial.insert(pid.0);
        }
    }

    let extended =
        NetSystem::new(places, transitions, initial).expect("extension preserves invariants");
    ExtendedNet {
        base: net.clone(),
        net: extended,
        implicit,
    }
}

/// Convenience: closure over the net's declared observable places.
pub fn extend_with_observable_closure(
    net: &NetSystem,
    mg: &MarkingGraph,
    cap: usize,
) -> Result<ExtendedNet, RegionError> {
    let observable: Vec<PlaceId> = net
        .places()
        .filter(|(_, p)| p.observable)
        .map(|(id, _)| id)
        .collect();
    let closure = observable_closure_capped(mg, net, &observable, cap)?;
    Ok(extend_net(net, mg, &closure))
}
