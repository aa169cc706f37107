//! Stable parts of markings, user observations, and the observation-class
//! partition over the extended marking graph.

use crate::bitset::BitSet;
use crate::marking_graph::MarkingGraph;
use crate::net::{enabled_at, fire, Marking, NetSystem};
use crate::regions::ExtendedNet;
use std::collections::HashMap;

/// The observable stable part of a marking: a subset of the observable
/// places of Σ′, as a bit set over all Σ′ places.
pub type Observation = BitSet;

pub type ClassId = usize;

/// Partition of marking-graph states by equal observation.
#[derive(Clone, Debug)]
pub struct ObservationPartition {
    class_of: Vec<ClassId>,
    observations: Vec<Observation>,
    members: Vec<Vec<usize>>,
}

impl ObservationPartition {
    pub fn class_of(&self, state: usize) -> ClassId {
        self.class_of[state]
    }

    pub fn observation(&self, class: ClassId) -> &Observation {
        &self.observations[class]
    }

    pub fn members(&self, class: ClassId) -> &[usize] {
        &self.members[class]
    }

    pub fn class_count(&self) -> usize {
        self.observations.len()
    }
}

/// All markings reachable from `m` by firing only environment transitions
/// (`m` included).
pub fn env_closure(extnet: &ExtendedNet, m: &Marking) -> Vec<Marking> {
    let net = extnet.net();
    let mut out = vec![m.clone()];
    let mut seen: HashMap<Marking, ()> = HashMap::new();
    seen.insert(m.clone(), ());
    let mut head = 0;
    while head < out.len() {
        let cur = out[head].clone();
        for t in net.env_transitions() {
            if net.transition(t).pre.is_subset(&cur) {
                let next = fire(net, &cur, t).expect("reachable markings stay 1-safe");
                if !seen.contains_key(&next) {
                    seen.insert(next.clone(), ());
                    out.push(next);
                }
            }
        }
        head += 1;
    }
    out
}

/// The stable part `m^s`: places of `m` that no environment-only firing
/// sequence can bring to the brink of consumption. A place is unstable when
/// some marking in the environment closure of `m` enables an environment
/// transition consuming it.
pub fn stable_part(extnet: &ExtendedNet, m: &Marking) -> Marking {
    let net = extnet.net();
    let mut unstable = BitSet::new(net.place_count());
    for n in env_closure(extnet, m) {
        for t in net.env_transitions() {
            if net.transition(t).pre.is_subset(&n) {
                unstable.union_in_place(&net.transition(t).pre);
            }
        }
    }
    m.difference(&unstable)
}

/// `o(m^s)`: the stable part restricted to the observable places of Σ′.
pub fn observation(extnet: &ExtendedNet, m: &Marking) -> Observation {
    stable_part(extnet, m).intersection(&extnet.net().observable_set())
}

/// Per-state stability data over a marking graph of Σ′, computed once.
#[derive(Clone, Debug)]
pub struct StabilityTable {
    stable: Vec<Marking>,
    observations: Vec<Observation>,
}

impl StabilityTable {
    pub fn stable(&self, state: usize) -> &Marking {
        &self.stable[state]
    }

    pub fn observation(&self, state: usize) -> &Observation {
        &self.observations[state]
    }
}

/// Batch computation of stable parts over all states of `mg`, via a
/// fixpoint on the environment-edge subgraph.
pub fn stability_table(extnet: &ExtendedNet, mg: &MarkingGraph) -> StabilityTable {
    let net = extnet.net();
    let n = mg.state_count();

    // locally unstable places: presets of enabled environment transitions
    let mut unstable: Vec<BitSet> = (0..n)
        .map(|s| {
            let mut u = BitSet::new(net.place_count());
            for t in net.env_transitions() {
                if net.transition(t).pre.is_subset(mg.marking(s)) {
                    u.union_in_place(&net.transition(t).pre);
                }
            }
            u
        })
        .collect();

    // propagate backwards along environment edges until stable
    let env_edges: Vec<(usize, usize)> = mg
        .edges()
        .iter()
        .filter(|(_, t, _)| !net.transition(*t).controllable)
        .map(|&(s, _, d)| (s, d))
        .collect();
    let mut changed = true;
    while changed {
        changed = false;
        for &(s, d) in &env_edges {
            if !unstable[d].is_subset(&unstable[s]) {
                let merged = unstable[s].union(&unstable[d]);
                unstable[s] = merged;
                changed = true;
            }
        }
    }

    let observable = net.observable_set();
    let stable: Vec<Marking> = (0..n)
        .map(|s| mg.marking(s).difference(&unstable[s]))
        .collect();
    let observations: Vec<Observation> =
        stable.iter().map(|m| m.intersection(&observable)).collect();
    StabilityTable {
        stable,
        observations,
    }
}

/// Partition the states of `mg` by equal observation. Class ids are assigned
/// in order of first state occurrence.
pub fn observation_partition(extnet: &ExtendedNet, mg: &MarkingGraph) -> ObservationPartition {
    let table = stability_table(extnet, mg);
    partition_from_table(&table, mg.state_count())
}

pub fn partition_from_table(table: &StabilityTable, n_states: usize) -> ObservationPartition {
    let mut by_obs: HashMap<Observation, ClassId> = HashMap::new();
    let mut class_of = Vec::with_capacity(n_states);
    let mut observations = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for s in 0..n_states {
        let obs = table.observation(s).clone();
        let class = *by_obs.entry(obs.clone()).or_insert_with(|| {
            observations.push(obs);
            members.push(Vec::new());
            observations.len() - 1
        });
        class_of.push(class);
        members[class].push(s);
    }
    ObservationPartition {
        class_of,
        observations,
        members,
    }
}

/// Locate the Σ′ state whose base projection equals `base`.
pub fn state_of_base(extnet: &ExtendedNet, mg: &MarkingGraph, base: &Marking) -> Option<usize> {
    mg.states()
        .find(|(_, m)| &extnet.project(m) == base)
        .map(|(i, _)| i)
}

/// True when the marking enables no transition at all.
pub fn is_deadlock(net: &NetSystem, m: &Marking) -> bool {
    enabled_at(net, m).is_empty()
}
