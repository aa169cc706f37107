//! The derived turn-based asynchronous game structure: pruned state space,
//! per-state user/environment moves, and weak-fairness constraint data.

use crate::marking_graph::MarkingGraph;
use crate::net::{Marking, NetSystem, TransitionId};
use crate::regions::ExtendedNet;
use crate::stability::{ClassId, Observation, ObservationPartition};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Error, Debug)]
#[error("transition `{0}` is not an environment transition")]
pub struct NotEnvironment(pub String);

/// Weak-fairness constraint data: one constraint per environment transition.
/// The two scheduler constraints (user and environment selected infinitely
/// often) are realized as the `u`/`env` propositions of the Kripke encoding.
#[derive(Clone, Debug)]
pub struct FairnessSpec {
    pub env_transitions: Vec<TransitionId>,
}

/// The derived game structure: the reachable states left after unstable-choice
/// pruning, per-state moves, the transition function, and the observation
/// partition restricted to the kept states.
#[derive(Clone, Debug)]
pub struct GameStructure {
    markings: Vec<Marking>,
    d_user: Vec<Vec<TransitionId>>,
    d_env: Vec<Vec<TransitionId>>,
    succ: Vec<Vec<(TransitionId, usize)>>,
    class_of: Vec<ClassId>,
    observations: Vec<Observation>,
    class_members: Vec<Vec<usize>>,
    class_selectable: Vec<Vec<TransitionId>>,
    fairness: FairnessSpec,
    pruned: Vec<(Marking, TransitionId)>,
}

impl GameStructure {
    pub fn state_count(&self) -> usize {
        self.markings.len()
    }

    pub fn initial(&self) -> usize {
        0
    }

    pub fn marking(&self, state: usize) -> &Marking {
        &self.markings[state]
    }

    pub fn states(&self) -> impl Iterator<Item = (usize, &Marking)> {
        self.markings.iter().enumerate()
    }

    /// Controllable moves that survived pruning at this state. The idle move
    /// ε is always additionally available to the user.
    pub fn user_moves(&self, state: usize) -> &[TransitionId] {
        &self.d_user[state]
    }

    /// Environment moves; empty means the environment can only idle.
    pub fn env_moves(&self, state: usize) -> &[TransitionId] {
        &self.d_env[state]
    }

    /// Kept outgoing edges, environment and controllable alike.
    pub fn successors(&self, state: usize) -> &[(TransitionId, usize)] {
        &self.succ[state]
    }

    /// The transition function τ on kept (state, transition) pairs.
    pub fn tau(&self, state: usize, t: TransitionId) -> Option<usize> {
        self.succ[state]
            .iter()
            .find(|(tt, _)| *tt == t)
            .map(|&(_, d)| d)
    }

    pub fn class_of(&self, state: usize) -> ClassId {
        self.class_of[state]
    }

    pub fn class_count(&self) -> usize {
        self.observations.len()
    }

    pub fn observation(&self, class: ClassId) -> &Observation {
        &self.observations[class]
    }

    pub fn class_members(&self, class: ClassId) -> &[usize] {
        &self.class_members[class]
    }

    /// Controllable transitions a strategy may select in this class:
    /// `•t ⊆ o(m^s)` with the pre-set taken in Σ′.
    pub fn selectable(&self, class: ClassId) -> &[TransitionId] {
        &self.class_selectable[class]
    }

    pub fn fairness(&self) -> &FairnessSpec {
        &self.fairness
    }

    /// Marking-graph edges removed by step-4 pruning, with their source
    /// markings.
    pub fn pruned_edges(&self) -> &[(Marking, TransitionId)] {
        &self.pruned
    }
}

/// Prune controllable transitions that are enabled in a marking but not in
/// its observed stable part, restrict to the states still reachable, and
/// assemble moves, τ and the restricted partition.
pub fn derive_game(
    extnet: &ExtendedNet,
    mg: &MarkingGraph,
    partition: &ObservationPartition,
) -> GameStructure {
    let net = extnet.net();

    // step 4: drop controllable edges not enabled in the observation
    let keep = |state: usize, t: TransitionId| -> bool {
        let tr = net.transition(t);
        !tr.controllable
            || tr
                .pre
                .is_subset(partition.observation(partition.class_of(state)))
    };

    let mut pruned = Vec::new();
    for &(s, t, _) in mg.edges() {
        if !keep(s, t) {
            pruned.push((mg.marking(s).clone(), t));
        }
    }

    // restrict to states reachable over kept edges, re-indexed in BFS order
    let mut old_to_new: HashMap<usize, usize> = HashMap::new();
    let mut order = vec![mg.initial()];
    old_to_new.insert(mg.initial(), 0);
    let mut head = 0;
    while head < order.len() {
        let s = order[head];
        for &(t, d) in mg.successors(s) {
            if keep(s, t) && !old_to_new.contains_key(&d) {
                old_to_new.insert(d, order.len());
                order.push(d);
            }
        }
        head += 1;
    }

    let markings: Vec<Marking> = order.iter().map(|&s| mg.marking(s).clone()).collect();
    let mut d_user = vec![Vec::new(); order.len()];
    let mut d_env = vec![Vec::new(); order.len()];
    let mut succ = vec![Vec::new(); order.len()];
    for (new, &old) in order.iter().enumerate() {
        for &(t, d) in mg.successors(old) {
            if !keep(old, t) {
                continue;
            }
            let nd = old_to_new[&d];
            succ[new].push((t, nd));
            if net.transition(t).controllable {
                d_user[new].push(t);
            } else {
                d_env[new].push(t);
            }
        }
    }

    // partition restricted to the kept states, classes renumbered by first
    // occurrence
    let mut class_map: HashMap<ClassId, ClassId> = HashMap::new();
    let mut class_of = Vec::with_capacity(order.len());
    let mut observations = Vec::new();
    let mut class_members: Vec<Vec<usize>> = Vec::new();
    for (new, &old) in order.iter().enumerate() {
        let orig = partition.class_of(old);
        let cid = *class_map.entry(orig).or_insert_with(|| {
            observations.push(partition.observation(orig).clone());
            class_members.push(Vec::new());
            observations.len() - 1
        });
        class_of.push(cid);
        class_members[cid].push(new);
    }

    let class_selectable: Vec<Vec<TransitionId>> = observations
        .iter()
        .map(|obs| {
            net.controllable_transitions()
                .filter(|&t| net.transition(t).pre.is_subset(obs))
                .collect()
        })
        .collect();

    // consistency: the surviving user moves at each state are exactly the
    // class-selectable transitions
    debug_assert!((0..order.len()).all(|s| {
        d_user[s]
            .iter()
            .all(|t| class_selectable[class_of[s]].contains(t))
    }));

    GameStructure {
        markings,
        d_user,
        d_env,
        succ,
        class_of,
        observations,
        class_members,
        class_selectable,
        fairness: FairnessSpec {
            env_transitions: net.env_transitions().collect(),
        },
        pruned,
    }
}

/// `#t(m)`: the moves that discharge the weak-fairness obligation of the
/// environment transition `t` at state `m` — empty when `t` is disabled,
/// otherwise `t` together with the enabled environment transitions in
/// conflict with it (shared preplace in Σ′).
pub fn sharp(
    net: &NetSystem,
    game: &GameStructure,
    t: TransitionId,
    state: usize,
) -> Result<Vec<TransitionId>, NotEnvironment> {
    let tr = net.transition(t);
    if tr.controllable {
        return Err(NotEnvironment(tr.name.clone()));
    }
    let m = game.marking(state);
    if !tr.pre.is_subset(m) {
        return Ok(Vec::new());
    }
    let mut out = vec![t];
    for ti in net.env_transitions() {
        if ti == t {
            continue;
        }
        let tri = net.transition(ti);
        if tri.pre.is_subset(m) && !tri.pre.is_disjoint(&tr.pre) {
            out.push(ti);
        }
    }
    out.sort();
    Ok(out)
}
