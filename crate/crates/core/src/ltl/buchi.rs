//! Declarative tableau translation from negation normal form to generalized
//! Büchi automata.

use crate::bitset::BitSet;
use crate::ltl::eval::UnknownAtom;
use crate::ltl::formula::Formula;
use std::collections::{BTreeSet, HashMap};

pub type NnfId = usize;

/// Negation normal form over interned nodes: negations only on atoms,
/// `F`/`G` normalized into `U`/`R`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum NnfNode {
    True,
    False,
    Pos(usize),
    Neg(usize),
    And(NnfId, NnfId),
    Or(NnfId, NnfId),
    Until(NnfId, NnfId),
    Release(NnfId, NnfId),
}

#[derive(Default)]
pub struct NnfArena {
    nodes: Vec<NnfNode>,
    intern: HashMap<NnfNode, NnfId>,
}

impl NnfArena {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&self, id: NnfId) -> &NnfNode {
        &self.nodes[id]
    }

    fn mk(&mut self, node: NnfNode) -> NnfId {
        if let Some(&id) = self.intern.get(&node) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(node.clone());
        self.intern.insert(node, id);
        id
    }

    /// Build the NNF of `f` (or of `¬f` when `negated`), resolving atom
    /// names to proposition indices.
    pub fn nnf(
        &mut self,
        f: &Formula,
        negated: bool,
        resolve: &dyn Fn(&str) -> Option<usize>,
    ) -> Result<NnfId, UnknownAtom> {
        Ok(match f {
            Formula::True => self.mk(if negated {
                NnfNode::False
            } else {
                NnfNode::True
            }),
            Formula::False => self.mk(if negated {
                NnfNode::True
            } else {
                NnfNode::False
            }),
            Formula::Atom(a) => {
                let p = resolve(a).ok_or_else(|| UnknownAtom(a.clone()))?;
                self.mk(if negated {
                    NnfNode::Neg(p)
                } else {
                    NnfNode::Pos(p)
                })
            }
            Formula::Not(x) => self.nnf(x, !negated, resolve)?,
            Formula::And(a, b) => {
                let na = self.nnf(a, negated, resolve)?;
                let nb = self.nnf(b, negated, resolve)?;
                self.mk(if negated {
                    NnfNode::Or(na, nb)
                } else {
                    NnfNode::And(na, nb)
                })
            }
            Formula::Or(a, b) => {
                let na = self.nnf(a, negated, resolve)?;
                let nb = self.nnf(b, negated, resolve)?;
                self.mk(if negated {
                    NnfNode::And(na, nb)
                } else {
                    NnfNode::Or(na, nb)
                })
            }
            Formula::Implies(a, b) => {
                let na = self.nnf(a, !negated, resolve)?;
                let nb = self.nnf(b, negated, resolve)?;
                self.mk(if negated {
                    NnfNode::And(na, nb)
                } else {
                    NnfNode::Or(na, nb)
                })
            }
            Formula::Until(a, b) => {
                let na = self.nnf(a, negated, resolve)?;
                let nb = self.nnf(b, negated, resolve)?;
                self.mk(if negated {
                    NnfNode::Release(na, nb)
                } else {
                    NnfNode::Until(na, nb)
                })
            }
            Formula::Release(a, b) => {
                let na = self.nnf(a, negated, resolve)?;
                let nb = self.nnf(b, negated, resolve)?;
                self.mk(if negated {
                    NnfNode::Until(na, nb)
                } else {
                    NnfNode::Release(na, nb)
                })
            }
            Formula::Finally(x) => {
                let nx = self.nnf(x, negated, resolve)?;
                if negated {
                    let false_id = self.mk(NnfNode::False);
                    self.mk(NnfNode::Release(false_id, nx))
                } else {
                    let true_id = self.mk(NnfNode::True);
                    self.mk(NnfNode::Until(true_id, nx))
                }
            }
            Formula::Globally(x) => {
                let nx = self.nnf(x, negated, resolve)?;
                if negated {
                    let true_id = self.mk(NnfNode::True);
                    self.mk(NnfNode::Until(true_id, nx))
                } else {
                    let false_id = self.mk(NnfNode::False);
                    self.mk(NnfNode::Release(false_id, nx))
                }
            }
        })
    }

    fn until_subformulas(&self, root: NnfId) -> Vec<NnfId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![root];
        let mut out = Vec::new();
        while let Some(id) = stack.pop() {
            if seen[id] {
                continue;
            }
            seen[id] = true;
            match self.nodes[id] {
                NnfNode::And(a, b) | NnfNode::Or(a, b) | NnfNode::Release(a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
                NnfNode::Until(a, b) => {
                    out.push(id);
                    stack.push(a);
                    stack.push(b);
                }
                _ => {}
            }
        }
        out.sort();
        out
    }
}

/// A compressed set of proposition valuations: every valuation containing
/// all of `pos` and none of `neg`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Guard {
    pub pos: BitSet,
    pub neg: BitSet,
}

impl Guard {
    pub fn matches(&self, label: &BitSet) -> bool {
        self.pos.is_subset(label) && self.neg.is_disjoint(label)
    }
}

/// A generalized Büchi automaton over proposition valuations. A run is
/// accepting when it visits every acceptance set infinitely often.
pub struct GeneralizedBuchi {
    pub prop_width: usize,
    /// Obligation sets; state 0 is the initial state.
    pub states: Vec<Vec<NnfId>>,
    pub initial: usize,
    pub edges: Vec<Vec<(Guard, usize)>>,
    /// One set per until-subformula: `acceptance[k][s]` is true when state
    /// `s` carries no pending obligation for that until.
    pub acceptance: Vec<Vec<bool>>,
}

#[derive(Clone, PartialEq, Eq)]
struct Alt {
    pos: BitSet,
    neg: BitSet,
    next: BTreeSet<NnfId>,
}

fn expand_one(arena: &NnfArena, id: NnfId, alt: Alt) -> Vec<Alt> {
    match *arena.node(id) {
        NnfNode::True => vec![alt],
        NnfNode::False => vec![],
        NnfNode::Pos(p) => {
            if alt.neg.contains(p) {
                vec![]
            } else {
                let mut a = alt;
                a.pos.insert(p);
                vec![a]
            }
        }
        NnfNode::Neg(p) => {
            if alt.pos.contains(p) {
                vec![]
            } else {
                let mut a = alt;
                a.neg.insert(p);
                vec![a]
            }
        }
        NnfNode::And(x, y) => expand_one(arena, x, alt)
            .into_iter()
            .flat_map(|a| expand_one(arena, y, a))
            .collect(),
        NnfNode::Or(x, y) => {
            let mut out = expand_one(arena, x, alt.clone());
            out.extend(expand_one(arena, y, alt));
            out
        }
        NnfNode::Until(x, y) => {
            // satisfy now, or defer: hold x and keep the obligation
            let mut out = expand_one(arena, y, alt.clone());
            for mut a in expand_one(arena, x, alt) {
                a.next.insert(id);
                out.push(a);
            }
            out
        }
        NnfNode::Release(x, y) => {
            // release now (x and y hold), or keep y and the obligation
            let both: Vec<Alt> = expand_one(arena, y, alt.clone())
                .into_iter()
                .flat_map(|a| expand_one(arena, x, a))
                .collect();
            let mut out = both;
            for mut a in expand_one(arena, y, alt) {
                a.next.insert(id);
                out.push(a);
            }
            out
        }
    }
}

fn expand(arena: &NnfArena, obligations: &[NnfId], width: usize) -> Vec<Alt> {
    let mut alts = vec![Alt {
        pos: BitSet::new(width),
        neg: BitSet::new(width),
        next: BTreeSet::new(),
    }];
    for &ob in obligations {
        let mut next_alts = Vec::new();
        for alt in alts {
            next_alts.extend(expand_one(arena, ob, alt));
        }
        alts = next_alts;
    }
    let mut dedup = Vec::new();
    for a in alts {
        if !dedup.contains(&a) {
            dedup.push(a);
        }
    }
    dedup
}

/// Translate an NNF formula into a generalized Büchi automaton whose
/// language is exactly the set of its models.
pub fn to_buchi(arena: &NnfArena, root: NnfId, prop_width: usize) -> GeneralizedBuchi {
    let mut states: Vec<Vec<NnfId>> = vec![vec![root]];
    let mut index: HashMap<Vec<NnfId>, usize> = HashMap::new();
    index.insert(states[0].clone(), 0);
    let mut edges: Vec<Vec<(Guard, usize)>> = Vec::new();

    let mut head = 0;
    while head < states.len() {
        let obligations = states[head].clone();
        let mut out = Vec::new();
        for alt in expand(arena, &obligations, prop_width) {
            let key: Vec<NnfId> = alt.next.iter().copied().collect();
            let target = *index.entry(key.clone()).or_insert_with(|| {
                states.push(key);
                states.len() - 1
            });
            let edge = (
                Guard {
                    pos: alt.pos,
                    neg: alt.neg,
                },
                target,
            );
            if !out.contains(&edge) {
                out.push(edge);
            }
        }
        edges.push(out);
        head += 1;
    }

    let acceptance = arena
        .until_subformulas(root)
        .into_iter()
        .map(|theta| states.iter().map(|s| !s.contains(&theta)).collect())
        .collect();

    GeneralizedBuchi {
        prop_width,
        states,
        initial: 0,
        edges,
        acceptance,
    }
}
