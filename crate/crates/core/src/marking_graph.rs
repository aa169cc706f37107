//! The sequential marking graph and the uniform-crossing (region) predicate
//! over its state sets.

use crate::bitset::BitSet;
use crate::net::{fire, FireError, Marking, NetSystem, TransitionId};
use std::collections::HashMap;
use thiserror::Error;

/// Default cap on the number of explored markings; the marking graph can be
/// exponential in the net size.
pub const DEFAULT_STATE_CAP: usize = 1 << 20;

/// A set of marking-graph state indices.
pub type StateSet = BitSet;

#[derive(Error, Debug)]
pub enum BuildError {
    #[error("net is not 1-safe: {0}")]
    SafetyViolation(FireError),
    #[error("reachable markings exceed the state cap {0}")]
    StateCapExceeded(usize),
}

#[derive(Error, Debug)]
#[error("state set is not a region")]
pub struct NotARegion;

/// Reachability graph of a net system. State 0 is the initial marking; every
/// state is reachable; edges are deterministic per (state, transition).
#[derive(Clone, Debug)]
pub struct MarkingGraph {
    states: Vec<Marking>,
    edges: Vec<(usize, TransitionId, usize)>,
    succ: Vec<Vec<(TransitionId, usize)>>,
    index: HashMap<Marking, usize>,
}

impl MarkingGraph {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn initial(&self) -> usize {
        0
    }

    pub fn marking(&self, state: usize) -> &Marking {
        &self.states[state]
    }

    pub fn states(&self) -> impl Iterator<Item = (usize, &Marking)> {
        self.states.iter().enumerate()
    }

    pub fn edges(&self) -> &[(usize, TransitionId, usize)] {
        &self.edges
    }

    pub fn successors(&self, state: usize) -> &[(TransitionId, usize)] {
        &self.succ[state]
    }

    pub fn state_of(&self, m: &Marking) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn full_state_set(&self) -> StateSet {
        StateSet::with_all(self.states.len())
    }
}

/// Breadth-first closure of `fire` over `enabled_at` from the initial
/// marking. 1-safety is enforced during exploration.
pub fn build_marking_graph(net: &NetSystem) -> Result<MarkingGraph, BuildError> {
    build_marking_graph_capped(net, DEFAULT_STATE_CAP)
}

pub fn build_marking_graph_capped(net: &NetSystem, cap: usize) -> Result<MarkingGraph, BuildError> {
    let mut states = vec![net.initial().clone()];
    let mut index = HashMap::new();
    index.insert(net.initial().clone(), 0usize);
    let mut edges = Vec::new();
    let mut succ: Vec<Vec<(TransitionId, usize)>> = vec![Vec::new()];

    let mut head = 0;
    while head < states.len() {
        let m = states[head].clone();
        for (t, tr) in net.transitions() {
            if !tr.pre.is_subset(&m) {
                continue;
            }
            let m2 = fire(net, &m, t).map_err(BuildError::SafetyViolation)?;
            let target = match index.get(&m2) {
                Some(&s) => s,
                None => {
                    let s = states.len();
                    if s >= cap {
                        return Err(BuildError::StateCapExceeded(cap));
                    }
                    states.push(m2.clone());
                    succ.push(Vec::new());
                    index.insert(m2, s);
                    s
                }
            };
            edges.push((head, t, target));
            succ[head].push((t, target));
        }
        head += 1;
    }
    Ok(MarkingGraph {
        states,
        edges,
        succ,
        index,
    })
}

/// Uniform crossing: for every transition label, either all of its edges
/// enter `s`, or all of them leave `s`, or none of them cross its boundary.
pub fn is_region(mg: &MarkingGraph, s: &StateSet) -> bool {
    // per-label counters: (entering, exiting, non-crossing)
    let mut counts: HashMap<TransitionId, (u32, u32, u32)> = HashMap::new();
    for &(src, t, dst) in &mg.edges {
        let c = counts.entry(t).or_insert((0, 0, 0));
        match (s.contains(src), s.contains(dst)) {
            (false, true) => c.0 += 1,
            (true, false) => c.1 += 1,
            _ => c.2 += 1,
        }
    }
    counts.values().all(|&(enter, exit, other)| {
        (enter == 0 || (exit == 0 && other == 0)) && (exit == 0 || (enter == 0 && other == 0))
    })
}

/// Entering and exiting labels of a region: `(•r, r•)`.
pub fn region_boundary(
    mg: &MarkingGraph,
    s: &StateSet,
) -> Result<(Vec<TransitionId>, Vec<TransitionId>), NotARegion> {
    if !is_region(mg, s) {
        return Err(NotARegion);
    }
    let mut entering = Vec::new();
    let mut exiting = Vec::new();
    for &(src, t, dst) in &mg.edges {
        match (s.contains(src), s.contains(dst)) {
            (false, true) => {
                if !entering.contains(&t) {
                    entering.push(t);
                }
            }
            (true, false) => {
                if !exiting.contains(&t) {
                    exiting.push(t);
                }
            }
            _ => {}
        }
    }
    entering.sort();
    exiting.sort();
    Ok((entering, exiting))
}
