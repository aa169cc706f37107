//! Fair LTL model checking: product with the Büchi automaton of the negated
//! goal, with one extra acceptance set per fairness atom, and SCC-based
//! emptiness.

use crate::kripke::KripkeModel;
use crate::ltl::buchi::{to_buchi, NnfArena};
use crate::ltl::eval::UnknownAtom;
use crate::ltl::formula::Formula;
use std::collections::HashMap;

/// Outcome of a fair check. `Fails` carries a concrete lasso of model
/// states; `Vacuous` means the model has no fair infinite path at all.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails(Lasso),
    Vacuous,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lasso {
    pub stem: Vec<usize>,
    pub cycle: Vec<usize>,
}

/// Iterative Tarjan; returns the strongly connected components of the nodes
/// `0..n` in reverse topological discovery order.
pub(crate) fn tarjan(n: usize, adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    #[derive(Clone, Copy)]
    struct NodeData {
        index: u32,
        lowlink: u32,
        on_stack: bool,
        visited: bool,
    }
    let mut data = vec![
        NodeData {
            index: 0,
            lowlink: 0,
            on_stack: false,
            visited: false
        };
        n
    ];
    let mut counter: u32 = 0;
    let mut stack: Vec<usize> = Vec::new();
    let mut sccs: Vec<Vec<usize>> = Vec::new();
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if data[root].visited {
            continue;
        }
        call.push((root, 0));
        while let Some(&mut (v, ref mut edge)) = call.last_mut() {
            if *edge == 0 {
                data[v].visited = true;
                data[v].index = counter;
                data[v].lowlink = counter;
                counter += 1;
                stack.push(v);
                data[v].on_stack = true;
            }
            if *edge < adj[v].len() {
                let w = adj[v][*edge];
                *edge += 1;
                if !data[w].visited {
                    call.push((w, 0));
                } else if data[w].on_stack {
                    data[v].lowlink = data[v].lowlink.min(data[w].index);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    let low = data[v].lowlink;
                    data[parent].lowlink = data[parent].lowlink.min(low);
                }
                if data[v].lowlink == data[v].index {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        data[w].on_stack = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    sccs.push(comp);
                }
            }
        }
    }
    sccs
}

fn reachable_from(initial: usize, adj: &[Vec<usize>]) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![initial];
    seen[initial] = true;
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

fn nontrivial(comp: &[usize], adj: &[Vec<usize>]) -> bool {
    comp.len() > 1 || adj[comp[0]].contains(&comp[0])
}

/// True when some reachable nontrivial SCC contains, for every fairness
/// proposition, a state labelled with it.
pub fn exists_fair_path(model: &KripkeModel, fairness: &[usize]) -> bool {
    let adj: Vec<Vec<usize>> = (0..model.state_count())
        .map(|s| model.successors(s).to_vec())
        .collect();
    let reach = reachable_from(model.initial(), &adj);
    for comp in tarjan(model.state_count(), &adj) {
        if !reach[comp[0]] || !nontrivial(&comp, &adj) {
            continue;
        }
        if fairness
            .iter()
            .all(|&a| comp.iter().any(|&s| model.label(s).contains(a)))
        {
            return true;
        }
    }
    false
}

/// Check that every infinite path from the initial state satisfying
/// `GF a` for each fairness proposition `a` also satisfies `goal`.
/// Returns `Vacuous` when no fair path exists at all.
pub fn check_fair(
    model: &KripkeModel,
    goal: &Formula,
    fairness: &[usize],
) -> Result<Verdict, UnknownAtom> {
    // resolve goal atoms up front so unknown atoms are reported even on
    // vacuous models
    for atom in goal.atoms() {
        if model.prop_index(atom).is_none() {
            return Err(UnknownAtom(atom.to_string()));
        }
    }
    if !exists_fair_path(model, fairness) {
        return Ok(Verdict::Vacuous);
    }

    let mut arena = NnfArena::new();
    let resolve = |name: &str| model.prop_index(name);
    let root = arena.nnf(goal, true, &resolve)?;
    let gnba = to_buchi(&arena, root, model.props().len());

    // product of the model with the automaton of the negated goal
    let mut nodes: Vec<(usize, usize)> = Vec::new();
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut adj: Vec<Vec<usize>> = Vec::new();
    let start = (model.initial(), gnba.initial);
    nodes.push(start);
    index.insert(start, 0);
    adj.push(Vec::new());
    let mut head = 0;
    while head < nodes.len() {
        let (m, q) = nodes[head];
        let mut out = Vec::new();
        for (guard, q2) in &gnba.edges[q] {
            if !guard.matches(model.label(m)) {
                continue;
            }
            for &m2 in model.successors(m) {
                let key = (m2, *q2);
                let target = *index.entry(key).or_insert_with(|| {
                    nodes.push(key);
                    adj.push(Vec::new());
                    nodes.len() - 1
                });
                if !out.contains(&target) {
                    out.push(target);
                }
            }
        }
        adj[head] = out;
        head += 1;
    }

    // acceptance sets lifted to the product
    let in_until_set = |k: usize, node: usize| gnba.acceptance[k][nodes[node].1];
    let in_fair_set = |a: usize, node: usize| model.label(nodes[node].0).contains(a);

    for comp in tarjan(nodes.len(), &adj) {
        if !nontrivial(&comp, &adj) {
            continue;
        }
        let all_until =
            (0..gnba.acceptance.len()).all(|k| comp.iter().any(|&v| in_until_set(k, v)));
        let all_fair = fairness
            .iter()
            .all(|&a| comp.iter().any(|&v| in_fair_set(a, v)));
        if all_until && all_fair {
            return Ok(Verdict::Fails(extract_lasso(
                model, &nodes, &adj, &comp, &gnba, fairness,
            )));
        }
    }
    Ok(Verdict::Holds)
}

fn bfs_path(
    adj: &[Vec<usize>],
    allowed: Option<&[bool]>,
    from: usize,
    accept: &dyn Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    // shortest path from `from` to a node satisfying `accept`; includes both
    // endpoints; `from` itself is not tested (paths have ≥ 1 edge)
    let mut parent: HashMap<usize, usize> = HashMap::new();
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(from);
    let mut seen = vec![false; adj.len()];
    seen[from] = true;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if let Some(mask) = allowed {
                if !mask[w] {
                    continue;
                }
            }
            if accept(w) {
                let mut path = vec![w, v];
                let mut cur = v;
                while let Some(&p) = parent.get(&cur) {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            if !seen[w] {
                seen[w] = true;
                parent.insert(w, v);
                queue.push_back(w);
            }
        }
    }
    None
}

fn extract_lasso(
    model: &KripkeModel,
    nodes: &[(usize, usize)],
    adj: &[Vec<usize>],
    comp: &[usize],
    gnba: &crate::ltl::buchi::GeneralizedBuchi,
    fairness: &[usize],
) -> Lasso {
    let mut in_comp = vec![false; nodes.len()];
    for &v in comp {
        in_comp[v] = true;
    }

    // stem from the product initial node to the component
    let entry;
    let mut stem_nodes: Vec<usize>;
    if in_comp[0] {
        entry = 0;
        stem_nodes = vec![];
    } else {
        let path = bfs_path(adj, None, 0, &|v| in_comp[v]).expect("component is reachable");
        entry = *path.last().unwrap();
        stem_nodes = path;
        stem_nodes.pop();
    }

    // cycle inside the component visiting every acceptance set
    let mut cycle_nodes: Vec<usize> = vec![entry];
    let mut cur = entry;
    let mut targets: Vec<Box<dyn Fn(usize) -> bool + '_>> = Vec::new();
    for k in 0..gnba.acceptance.len() {
        targets.push(Box::new(move |v: usize| gnba.acceptance[k][nodes[v].1]));
    }
    for &a in fairness {
        targets.push(Box::new(move |v: usize| {
            model.label(nodes[v].0).contains(a)
        }));
    }
    for accept in &targets {
        if accept(cur) {
            continue;
        }
        let path = bfs_path(adj, Some(&in_comp), cur, accept)
            .expect("acceptance set intersects component");
        cycle_nodes.extend(&path[1..]);
        cur = *path.last().unwrap();
    }
    if cycle_nodes.len() > 1 && cur == entry {
        // an acceptance walk already returned to the entry; the wrap-around
        // edge supplies the final occurrence
        cycle_nodes.pop();
    } else {
        // close the cycle (covers the single-node case via its self-loop or
        // a round trip within the component)
        let path = bfs_path(adj, Some(&in_comp), cur, &|v| v == entry)
            .expect("component is strongly connected");
        cycle_nodes.extend(&path[1..]);
        cycle_nodes.pop();
    }

    Lasso {
        stem: stem_nodes.into_iter().map(|v| nodes[v].0).collect(),
        cycle: cycle_nodes.into_iter().map(|v| nodes[v].0).collect(),
    }
}
