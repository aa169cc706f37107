//! Shared test support: a seeded generator, random nets / formulas / Kripke
//! models, and the independent brute-force oracles the acceptance criteria
//! compare against. Nothing here calls into the automaton or product code
//! paths it is used to check.

#![allow(dead_code)]

use petrigame::bitset::BitSet;
use petrigame::kripke::KripkeModel;
use petrigame::ltl::buchi::GeneralizedBuchi;
use petrigame::ltl::eval::{eval_lasso, LassoWord};
use petrigame::ltl::formula::Formula;
use petrigame::marking_graph::{build_marking_graph_capped, MarkingGraph, StateSet};
use petrigame::net::{Marking, NetSystem, Place, Transition};
use std::collections::HashMap;

/// splitmix64; deterministic across platforms.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0);
        (self.next_u64() % n as u64) as usize
    }

    pub fn chance(&mut self, num: u64, den: u64) -> bool {
        self.next_u64() % den < num
    }
}

// ---------------------------------------------------------------- nets

/// A random 1-safe net: rejection-sampled until the marking graph builds
/// within `max_states`.
pub fn random_safe_net(
    rng: &mut Rng,
    max_places: usize,
    max_transitions: usize,
    all_controllable: bool,
    max_states: usize,
) -> (NetSystem, MarkingGraph) {
    loop {
        let n_places = 2 + rng.below(max_places - 1);
        let n_transitions = 1 + rng.below(max_transitions);
        let places: Vec<Place> = (0..n_places)
            .map(|i| Place {
                name: format!("q{i}"),
                observable: true,
                implicit: false,
            })
            .collect();
        let mut transitions = Vec::new();
        for i in 0..n_transitions {
            let pre_size = 1 + rng.below(2.min(n_places));
            let post_size = 1 + rng.below(2.min(n_places));
            let mut pre = BitSet::new(n_places);
            while pre.len() < pre_size {
                pre.insert(rng.below(n_places));
            }
            let mut post = BitSet::new(n_places);
            while post.len() < post_size {
                post.insert(rng.below(n_places));
            }
            let controllable = all_controllable || rng.chance(1, 2);
            transitions.push(Transition {
                name: format!("t{i}"),
                pre,
                post,
                controllable,
            });
        }
        let mut initial = BitSet::new(n_places);
        let tokens = 1 + rng.below(n_places.min(3));
        while initial.len() < tokens {
            initial.insert(rng.below(n_places));
        }
        let net = match NetSystem::new(places, transitions, initial) {
            Ok(net) => net,
            Err(_) => continue,
        };
        match build_marking_graph_capped(&net, max_states) {
            Ok(mg) => return (net, mg),
            Err(_) => continue,
        }
    }
}

pub fn random_marking(rng: &mut Rng, net: &NetSystem) -> Marking {
    let mut m = Marking::new(net.place_count());
    for p in 0..net.place_count() {
        if rng.chance(1, 2) {
            m.insert(p);
        }
    }
    m
}

/// A random 1-safe net with an acyclic marking graph, mixed controllable and
/// environment transitions, and partial observability (every preplace of a
/// controllable transition stays observable, as required).
pub fn random_acyclic_partial_net(rng: &mut Rng, max_states: usize) -> (NetSystem, MarkingGraph) {
    'outer: loop {
        let (net, mg) = random_safe_net(rng, 5, 5, false, max_states);
        // acyclicity: no state reaches itself
        for (s, _) in mg.states() {
            let mut seen = vec![false; mg.state_count()];
            let mut stack: Vec<usize> = mg.successors(s).iter().map(|&(_, d)| d).collect();
            while let Some(v) = stack.pop() {
                if v == s {
                    continue 'outer;
                }
                if !seen[v] {
                    seen[v] = true;
                    stack.extend(mg.successors(v).iter().map(|&(_, d)| d));
                }
            }
        }
        // hide a random subset of places not feeding controllable transitions
        let mut required = BitSet::new(net.place_count());
        for (_, t) in net.transitions() {
            if t.controllable {
                required.union_in_place(&t.pre);
            }
        }
        let places: Vec<Place> = net
            .places()
            .map(|(id, p)| Place {
                name: p.name.clone(),
                observable: required.contains(id.0) || rng.chance(3, 5),
                implicit: false,
            })
            .collect();
        let transitions: Vec<Transition> = net.transitions().map(|(_, t)| t.clone()).collect();
        let net = NetSystem::new(places, transitions, net.initial().clone())
            .expect("observability preserved");
        return (net, mg);
    }
}

// ---------------------------------------------------------------- formulas

/// Random LTL-without-X formula of the given depth.
pub fn random_formula(rng: &mut Rng, atoms: &[&str], depth: usize) -> Formula {
    if depth == 0 {
        return match rng.below(8) {
            0 => Formula::True,
            1 => Formula::False,
            _ => Formula::atom(atoms[rng.below(atoms.len())]),
        };
    }
    match rng.below(9) {
        0 => Formula::not(random_formula(rng, atoms, depth - 1)),
        1 => Formula::and(
            random_formula(rng, atoms, depth - 1),
            random_formula(rng, atoms, depth - 1),
        ),
        2 => Formula::or(
            random_formula(rng, atoms, depth - 1),
            random_formula(rng, atoms, depth - 1),
        ),
        3 => Formula::Implies(
            Box::new(random_formula(rng, atoms, depth - 1)),
            Box::new(random_formula(rng, atoms, depth - 1)),
        ),
        4 => Formula::Until(
            Box::new(random_formula(rng, atoms, depth - 1)),
            Box::new(random_formula(rng, atoms, depth - 1)),
        ),
        5 => Formula::Release(
            Box::new(random_formula(rng, atoms, depth - 1)),
            Box::new(random_formula(rng, atoms, depth - 1)),
        ),
        6 | 7 => Formula::finally(random_formula(rng, atoms, depth - 1)),
        _ => Formula::globally(random_formula(rng, atoms, depth - 1)),
    }
}

// ---------------------------------------------------------------- models

/// Random sparse Kripke model over the given atoms.
pub fn random_kripke(rng: &mut Rng, max_states: usize, atoms: &[&str]) -> KripkeModel {
    let n = 1 + rng.below(max_states);
    let labels: Vec<BitSet> = (0..n)
        .map(|_| {
            let mut l = BitSet::new(atoms.len());
            for a in 0..atoms.len() {
                if rng.chance(1, 2) {
                    l.insert(a);
                }
            }
            l
        })
        .collect();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    let extra = rng.below(n / 2 + 1);
    for _ in 0..(n + extra) {
        let s = rng.below(n);
        let d = rng.below(n);
        if !succ[s].contains(&d) {
            succ[s].push(d);
        }
    }
    KripkeModel::new(
        atoms.iter().map(|s| s.to_string()).collect(),
        labels,
        succ,
        0,
    )
}

/// Every Kripke model with `n` states over `atoms`, all edge subsets and
/// labelings; state 0 initial. Only sensible for very small `n`.
pub fn exhaustive_kripke(n: usize, atoms: &[&str]) -> Vec<KripkeModel> {
    let n_atoms = atoms.len();
    let labelings = 1usize << (n * n_atoms);
    let edge_sets = 1usize << (n * n);
    let mut out = Vec::new();
    for lab in 0..labelings {
        let labels: Vec<BitSet> = (0..n)
            .map(|s| {
                let mut l = BitSet::new(n_atoms);
                for a in 0..n_atoms {
                    if lab >> (s * n_atoms + a) & 1 == 1 {
                        l.insert(a);
                    }
                }
                l
            })
            .collect();
        for es in 0..edge_sets {
            let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
            for s in 0..n {
                for d in 0..n {
                    if es >> (s * n + d) & 1 == 1 {
                        succ[s].push(d);
                    }
                }
            }
            out.push(KripkeModel::new(
                atoms.iter().map(|s| s.to_string()).collect(),
                labels.clone(),
                succ,
                0,
            ));
        }
    }
    out
}

// ------------------------------------------------- independent graph tools

/// Kosaraju strongly connected components (independent of the Tarjan used
/// inside the checker).
pub fn kosaraju_sccs(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        // iterative post-order
        let mut stack = vec![(start, 0usize)];
        seen[start] = true;
        while let Some(&mut (v, ref mut i)) = stack.last_mut() {
            if *i < adj[v].len() {
                let w = adj[v][*i];
                *i += 1;
                if !seen[w] {
                    seen[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(v);
                stack.pop();
            }
        }
    }
    let mut radj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (v, out) in adj.iter().enumerate() {
        for &w in out {
            radj[w].push(v);
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for &v in order.iter().rev() {
        if comp[v] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut members = vec![v];
        comp[v] = id;
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            for &w in &radj[x] {
                if comp[w] == usize::MAX {
                    comp[w] = id;
                    members.push(w);
                    stack.push(w);
                }
            }
        }
        comps.push(members);
    }
    comps
}

fn reachable(adj: &[Vec<usize>], from: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

/// All simple cycles, as node sequences (edge from last back to first).
fn simple_cycles(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut cycles = Vec::new();
    for start in 0..n {
        // DFS through nodes >= start only; cycle closes at start
        let mut path = vec![start];
        let mut on_path = vec![false; n];
        on_path[start] = true;
        let mut iters: Vec<usize> = vec![0];
        while !path.is_empty() {
            let v = *path.last().unwrap();
            let i = *iters.last().unwrap();
            if i < adj[v].len() {
                *iters.last_mut().unwrap() += 1;
                let w = adj[v][i];
                if w == start {
                    cycles.push(path.clone());
                } else if w > start && !on_path[w] {
                    on_path[w] = true;
                    path.push(w);
                    iters.push(0);
                }
            } else {
                on_path[v] = false;
                path.pop();
                iters.pop();
            }
        }
    }
    cycles
}

/// Shortest path `from -> to` within the allowed node set, as the node list
/// excluding `from`, or None.
fn path_within(adj: &[Vec<usize>], allowed: &[bool], from: usize, to: usize) -> Option<Vec<usize>> {
    if from == to {
        return Some(Vec::new());
    }
    let mut parent: HashMap<usize, usize> = HashMap::new();
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(from);
    let mut seen = vec![false; adj.len()];
    seen[from] = true;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !allowed[w] || seen[w] {
                continue;
            }
            seen[w] = true;
            parent.insert(w, v);
            if w == to {
                let mut path = vec![w];
                let mut cur = w;
                while let Some(&p) = parent.get(&cur) {
                    if p == from {
                        break;
                    }
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            queue.push_back(w);
        }
    }
    None
}

fn rotate_to(cycle: &[usize], node: usize) -> Vec<usize> {
    let k = cycle.iter().position(|&v| v == node).unwrap();
    let mut out = Vec::with_capacity(cycle.len());
    out.extend(&cycle[k..]);
    out.extend(&cycle[..k]);
    out
}

/// Join two closed walks lying in the same SCC into one closed walk through
/// both, gluing with shortest connecting paths when they share no node.
fn join_walks(
    adj: &[Vec<usize>],
    allowed: &[bool],
    a: &[usize],
    b: &[usize],
) -> Option<Vec<usize>> {
    if let Some(&shared) = a.iter().find(|v| b.contains(v)) {
        let mut out = rotate_to(a, shared);
        out.extend(rotate_to(b, shared));
        return Some(out);
    }
    // traverse a completely, walk to b, traverse b, walk back:
    //   a0..alast  a0  (path to b0)  b1..blast  b0  (path back, before a0)
    let to_b = path_within(adj, allowed, a[0], b[0])?;
    let mut back = path_within(adj, allowed, b[0], a[0])?;
    back.pop();
    let mut out = a.to_vec();
    out.push(a[0]);
    out.extend(to_b);
    out.extend(&b[1..]);
    out.push(b[0]);
    out.extend(back);
    Some(out)
}

/// Candidate lasso cycles: simple cycles plus joins of up to `depth` of them
/// within one SCC.
fn candidate_cycles(
    adj: &[Vec<usize>],
    depth: usize,
    max_len: usize,
    cap: usize,
) -> Vec<Vec<usize>> {
    let comps = kosaraju_sccs(adj);
    let mut comp_of = vec![0usize; adj.len()];
    for (i, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of[v] = i;
        }
    }
    let simple = simple_cycles(adj);
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut seen: std::collections::HashSet<Vec<usize>> = std::collections::HashSet::new();
    let push = |out: &mut Vec<Vec<usize>>,
                seen: &mut std::collections::HashSet<Vec<usize>>,
                w: Vec<usize>| {
        if w.len() <= max_len && out.len() < cap && seen.insert(w.clone()) {
            out.push(w);
        }
    };
    for c in &simple {
        push(&mut out, &mut seen, c.clone());
    }
    let mut frontier: Vec<Vec<usize>> = simple.clone();
    for _ in 1..depth {
        let mut next = Vec::new();
        for w in &frontier {
            let cid = comp_of[w[0]];
            let allowed: Vec<bool> = (0..adj.len()).map(|v| comp_of[v] == cid).collect();
            for c in &simple {
                if comp_of[c[0]] != cid {
                    continue;
                }
                if let Some(j) = join_walks(adj, &allowed, w, c) {
                    if j.len() <= max_len && out.len() < cap {
                        if seen.insert(j.clone()) {
                            out.push(j.clone());
                            next.push(j);
                        }
                    }
                }
            }
        }
        if next.is_empty() || out.len() >= cap {
            break;
        }
        frontier = next;
    }
    out
}

/// All simple paths from `from`, grouped by endpoint; each path includes the
/// endpoint but the empty path to `from` is represented as an empty vec.
fn simple_paths_from(adj: &[Vec<usize>], from: usize, cap: usize) -> Vec<Vec<Vec<usize>>> {
    let n = adj.len();
    let mut by_end: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n];
    by_end[from].push(Vec::new());
    let mut path: Vec<usize> = Vec::new();
    let mut on_path = vec![false; n];
    on_path[from] = true;
    let mut iters = vec![0usize];
    let mut nodes = vec![from];
    let mut total = 1usize;
    while !nodes.is_empty() {
        let v = *nodes.last().unwrap();
        let i = *iters.last().unwrap();
        if i < adj[v].len() && total < cap {
            *iters.last_mut().unwrap() += 1;
            let w = adj[v][i];
            if !on_path[w] {
                on_path[w] = true;
                path.push(w);
                nodes.push(w);
                iters.push(0);
                by_end[w].push(path.clone());
                total += 1;
            }
        } else {
            if nodes.len() > 1 {
                on_path[v] = false;
                path.pop();
            }
            nodes.pop();
            iters.pop();
        }
    }
    by_end
}

// ---------------------------------------------------- the lasso oracle

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleVerdict {
    Holds,
    Fails,
    Vacuous,
}

/// Brute-force fair checking by lasso enumeration: stems are simple paths
/// from the initial state; cycles are simple cycles and bounded joins of
/// them. A lasso is fair when its cycle carries every fairness atom; the
/// goal is evaluated by direct semantics on the lasso word.
pub fn lasso_oracle(k: &KripkeModel, goal: &Formula, fairness: &[usize]) -> OracleVerdict {
    let n = k.state_count();
    let adj: Vec<Vec<usize>> = (0..n).map(|s| k.successors(s).to_vec()).collect();
    let reach = reachable(&adj, k.initial());
    let cycles = candidate_cycles(&adj, 3, 48, 20_000);
    let stems = simple_paths_from(&adj, k.initial(), 100_000);
    let resolve = |name: &str| k.prop_index(name);

    let mut any_fair = false;
    let mut violated = false;
    for cycle in &cycles {
        if !reach[cycle[0]] {
            continue;
        }
        if !fairness
            .iter()
            .all(|&a| cycle.iter().any(|&s| k.label(s).contains(a)))
        {
            continue;
        }
        // rotations matter: the stem determines where the cycle is entered
        let mut rotation_starts: Vec<usize> = cycle.clone();
        rotation_starts.sort_unstable();
        rotation_starts.dedup();
        for &rot_start in &rotation_starts {
            if stems[rot_start].is_empty() {
                continue;
            }
            let rot = rotate_to(cycle, rot_start);
            for stem in &stems[rot_start] {
                any_fair = true;
                // stem paths exclude the initial state and include their
                // endpoint; the word needs the initial state first and the
                // endpoint only once (the cycle starts with it)
                let mut states: Vec<usize> = Vec::with_capacity(stem.len() + rot.len() + 1);
                if !stem.is_empty() {
                    states.push(k.initial());
                    states.extend(stem[..stem.len() - 1].iter().copied());
                }
                let loop_start = states.len();
                states.extend(rot.iter().copied());
                let labels: Vec<BitSet> = states.iter().map(|&s| k.label(s).clone()).collect();
                let word = LassoWord {
                    labels: &labels,
                    loop_start,
                };
                if !eval_lasso(goal, &word, &resolve).expect("atoms resolve") {
                    violated = true;
                    break;
                }
            }
            if violated {
                break;
            }
        }
        if violated {
            break;
        }
    }
    if violated {
        OracleVerdict::Fails
    } else if any_fair {
        OracleVerdict::Holds
    } else {
        OracleVerdict::Vacuous
    }
}

/// Work estimate used to redraw models whose enumeration would be too large.
pub fn lasso_oracle_cost(k: &KripkeModel) -> usize {
    let n = k.state_count();
    let adj: Vec<Vec<usize>> = (0..n).map(|s| k.successors(s).to_vec()).collect();
    let cycles = candidate_cycles(&adj, 3, 48, 20_000);
    let stems = simple_paths_from(&adj, k.initial(), 100_000);
    let stem_count: usize = stems.iter().map(|v| v.len()).sum();
    cycles.len().saturating_mul(stem_count.max(1))
}

// --------------------------------------- independent region predicates

/// Uniform crossing, written directly from the two-implication definition.
pub fn uniform_crossing(mg: &MarkingGraph, s: &StateSet) -> bool {
    for &(q1, t, q2) in mg.edges() {
        for &(q3, _, q4) in mg.edges().iter().filter(|(_, t2, _)| *t2 == t) {
            if s.contains(q1) && !s.contains(q2) && !(s.contains(q3) && !s.contains(q4)) {
                return false;
            }
            if !s.contains(q1) && s.contains(q2) && !(!s.contains(q3) && s.contains(q4)) {
                return false;
            }
        }
    }
    true
}

/// All regions of a small marking graph, by filtering every state subset
/// through the definitional predicate.
pub fn all_regions(mg: &MarkingGraph) -> std::collections::HashSet<StateSet> {
    let n = mg.state_count();
    assert!(n <= 12, "exhaustive region enumeration needs a small graph");
    let mut out = std::collections::HashSet::new();
    for mask in 0u32..(1u32 << n) {
        let s = StateSet::from_indices(n, (0..n).filter(|i| mask >> i & 1 == 1));
        if uniform_crossing(mg, &s) {
            out.insert(s);
        }
    }
    out
}

/// Definitional compatibility: search for pairwise disjoint regions
/// `u1, u2, u3` with `r1 = u1 ∪ u2` and `r2 = u2 ∪ u3`, enumerating all
/// subsets of `r1 ∩ r2` as candidates for `u2` against a precomputed region
/// table.
pub fn compatible_by_witness(
    regions: &std::collections::HashSet<StateSet>,
    width: usize,
    r1: &StateSet,
    r2: &StateSet,
) -> bool {
    let inter = r1.intersection(r2);
    let bits: Vec<usize> = inter.iter().collect();
    assert!(
        bits.len() <= 20,
        "witness search needs a small intersection"
    );
    for mask in 0..(1u32 << bits.len()) {
        let mut u2 = StateSet::new(width);
        for (i, &b) in bits.iter().enumerate() {
            if mask >> i & 1 == 1 {
                u2.insert(b);
            }
        }
        let u1 = r1.difference(&u2);
        let u3 = r2.difference(&u2);
        if u1.is_disjoint(&u2)
            && u2.is_disjoint(&u3)
            && u1.is_disjoint(&u3)
            && regions.contains(&u1)
            && regions.contains(&u2)
            && regions.contains(&u3)
        {
            return true;
        }
    }
    false
}

// ------------------------------------------------- GNBA word acceptance

/// Does the automaton accept the ultimately periodic word? Searched on the
/// product of word positions and automaton states.
pub fn gnba_accepts(gnba: &GeneralizedBuchi, labels: &[BitSet], loop_start: usize) -> bool {
    let total = labels.len();
    let next = |i: usize| if i + 1 < total { i + 1 } else { loop_start };
    let nq = gnba.states.len();
    let node = |i: usize, q: usize| i * nq + q;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); total * nq];
    for i in 0..total {
        for q in 0..nq {
            for (guard, q2) in &gnba.edges[q] {
                if guard.matches(&labels[i]) {
                    adj[node(i, q)].push(node(next(i), *q2));
                }
            }
        }
    }
    let reach = reachable(&adj, node(0, gnba.initial));
    for comp in kosaraju_sccs(&adj) {
        if !reach[comp[0]] {
            continue;
        }
        let nontrivial = comp.len() > 1 || adj[comp[0]].contains(&comp[0]);
        if !nontrivial {
            continue;
        }
        if !comp.iter().all(|&v| reach[v]) {
            continue;
        }
        let ok =
            (0..gnba.acceptance.len()).all(|k| comp.iter().any(|&v| gnba.acceptance[k][v % nq]));
        if ok {
            return true;
        }
    }
    false
}

// --------------------------------------------------------- conveniences

pub fn model_labels(k: &KripkeModel, states: &[usize]) -> Vec<BitSet> {
    states.iter().map(|&s| k.label(s).clone()).collect()
}

pub fn extension_set(mg: &MarkingGraph, place: usize) -> StateSet {
    StateSet::from_indices(
        mg.state_count(),
        mg.states()
            .filter(|(_, m)| m.contains(place))
            .map(|(i, _)| i),
    )
}
