//! Strategy enumeration with equivalence pruning, per-candidate fair LTL
//! checking, and the top-level synthesis loop.

use crate::game::{derive_game, GameStructure};
use crate::kripke::{encode, EncodeError};
use crate::ltl::check::{check_fair, Verdict};
use crate::ltl::eval::UnknownAtom;
use crate::ltl::formula::Formula;
use crate::marking_graph::{
    build_marking_graph_capped, BuildError, MarkingGraph, DEFAULT_STATE_CAP,
};
use crate::net::{Marking, NetSystem};
use crate::regions::{
    extend_with_observable_closure, ExtendedNet, RegionError, DEFAULT_CLOSURE_CAP,
};
use crate::stability::{
    partition_from_table, stability_table, ObservationPartition, StabilityTable,
};
use crate::strategy::{Selection, Strategy};
use serde::{Deserialize, Serialize};
use std::time::Instant;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum SynthesisError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Regions(#[from] RegionError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    UnknownAtom(#[from] UnknownAtom),
    #[error("goal atom `{0}` is not a place of the net")]
    GoalAtomNotAPlace(String),
    #[error("unknown place `{0}` in strategy")]
    UnknownStrategyPlace(String),
    #[error("unknown transition `{0}` in strategy")]
    UnknownStrategyTransition(String),
    #[error("strategy observation {{{}}} does not match any observation class", .0.join(","))]
    UnresolvableObservation(Vec<String>),
    #[error("strategy has conflicting entries for one observation class")]
    ConflictingEntries,
}

/// Exploration caps, overridable from the CLI.
#[derive(Clone, Copy, Debug)]
pub struct Caps {
    pub state_cap: usize,
    pub closure_cap: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            state_cap: DEFAULT_STATE_CAP,
            closure_cap: DEFAULT_CLOSURE_CAP,
        }
    }
}

/// Everything the pipeline derives from a net before strategies come in.
pub struct Derived {
    pub extnet: ExtendedNet,
    pub mg: MarkingGraph,
    pub mg_prime: MarkingGraph,
    pub table: StabilityTable,
    pub partition: ObservationPartition,
    pub game: GameStructure,
}

/// marking graph → observable closure → Σ′ → stability → game structure
pub fn derive_pipeline(net: &NetSystem, caps: &Caps) -> Result<Derived, SynthesisError> {
    let mg = build_marking_graph_capped(net, caps.state_cap)?;
    let extnet = extend_with_observable_closure(net, &mg, caps.closure_cap)?;
    let mg_prime = build_marking_graph_capped(extnet.net(), caps.state_cap)?;
    let table = stability_table(&extnet, &mg_prime);
    let partition = partition_from_table(&table, mg_prime.state_count());
    let game = derive_game(&extnet, &mg_prime, &partition);
    Ok(Derived {
        extnet,
        mg,
        mg_prime,
        table,
        partition,
        game,
    })
}

/// Lazy depth-first enumeration of candidate strategies. Observation classes
/// are assigned in reachability order under the partial assignment, so
/// strategies differing only on unreachable classes are emitted once.
pub struct CandidateStrategies<'g> {
    game: &'g GameStructure,
    assignment: Vec<Option<Selection>>,
    stack: Vec<Frame>,
    started: bool,
    done: bool,
    pruned: u64,
    conflict: Option<Vec<usize>>,
}

struct Frame {
    class: usize,
    options: Vec<Selection>,
    chosen: usize,
}

pub fn candidate_strategies(game: &GameStructure) -> CandidateStrategies<'_> {
    CandidateStrategies {
        game,
        assignment: vec![None; game.class_count()],
        stack: Vec::new(),
        started: false,
        done: false,
        pruned: 0,
        conflict: None,
    }
}

impl<'g> CandidateStrategies<'g> {
    /// First unassigned class reachable under the current partial
    /// assignment, in BFS state order.
    fn frontier(&self) -> Option<usize> {
        let game = self.game;
        let mut seen = vec![false; game.state_count()];
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(game.initial());
        seen[game.initial()] = true;
        while let Some(s) = queue.pop_front() {
            let class = game.class_of(s);
            match self.assignment[class] {
                None => return Some(class),
                Some(sel) => {
                    for &(t, d) in game.successors(s) {
                        let keep = if game.env_moves(s).contains(&t) {
                            true
                        } else {
                            sel == Selection::Fire(t)
                        };
                        if keep && !seen[d] {
                            seen[d] = true;
                            queue.push_back(d);
                        }
                    }
                }
            }
        }
        None
    }

    fn options(&self, class: usize) -> Vec<Selection> {
        let mut opts: Vec<Selection> = self
            .game
            .selectable(class)
            .iter()
            .map(|&t| Selection::Fire(t))
            .collect();
        opts.push(Selection::Idle);
        opts
    }

    fn advance(&mut self) {
        while let Some(top) = self.stack.last_mut() {
            top.chosen += 1;
            if top.chosen < top.options.len() {
                let (class, sel) = (top.class, top.options[top.chosen]);
                self.assignment[class] = Some(sel);
                return;
            }
            self.assignment[top.class] = None;
            self.stack.pop();
        }
        self.done = true;
    }

    /// Strategies skipped so far because they differ from an emitted
    /// candidate only on classes unreachable under it.
    pub fn pruned_equivalent(&self) -> u64 {
        self.pruned
    }

    /// Record that the candidate just emitted fails because of its choices
    /// in the given classes. Every not-yet-emitted candidate that agrees
    /// with it on those classes admits the same counterexample (edge
    /// presence and fairness labels along a lasso depend only on the
    /// selections at the classes it traverses), so the enumeration jumps
    /// back to the deepest conflicting class instead of advancing the last
    /// frame.
    pub fn note_conflict(&mut self, classes: &[usize]) {
        self.conflict = Some(classes.to_vec());
    }
}

impl<'g> Iterator for CandidateStrategies<'g> {
    type Item = Strategy;

    fn next(&mut self) -> Option<Strategy> {
        if self.done {
            return None;
        }
        if self.started {
            match self.conflict.take() {
                Some(classes) => {
                    while let Some(top) = self.stack.last() {
                        if classes.contains(&top.class) {
                            break;
                        }
                        self.assignment[top.class] = None;
                        self.stack.pop();
                    }
                    self.advance();
                }
                None => self.advance(),
            }
        }
        self.started = true;
        loop {
            if self.done {
                return None;
            }
            match self.frontier() {
                Some(class) => {
                    let options = self.options(class);
                    self.assignment[class] = Some(options[0]);
                    self.stack.push(Frame {
                        class,
                        options,
                        chosen: 0,
                    });
                }
                None => {
                    let mut f = Strategy::idle(self.game.class_count());
                    let mut equivalents: u64 = 1;
                    for (c, sel) in self.assignment.iter().enumerate() {
                        match sel {
                            Some(sel) => f.set(c, *sel),
                            None => {
                                let choices = (self.game.selectable(c).len() + 1) as u64;
                                equivalents = equivalents.saturating_mul(choices);
                            }
                        }
                    }
                    self.pruned = self.pruned.saturating_add(equivalents - 1);
                    return Some(f);
                }
            }
        }
    }
}

/// Size of the raw strategy type space `(|T_u| + 1) ^ |classes|`, ignoring
/// both enabledness and reachability.
pub fn naive_strategy_count(game: &GameStructure, controllable: usize) -> u64 {
    let mut total: u64 = 1;
    for _ in 0..game.class_count() {
        total = total.saturating_mul((controllable + 1) as u64);
    }
    total
}

/// Product over all classes of the per-class valid choice count; each
/// emitted candidate represents the valid strategies agreeing with it on the
/// classes it reaches, so these counts sum to this product.
pub fn valid_strategy_count(game: &GameStructure) -> u64 {
    let mut total: u64 = 1;
    for c in 0..game.class_count() {
        total = total.saturating_mul((game.selectable(c).len() + 1) as u64);
    }
    total
}

/// Encode the strategy and run the fair check; `Holds` requires a fair path
/// to exist (`Vacuous` is not winning). Goal atoms must be original places
/// of the net, not implicit places or fairness atoms.
pub fn check_strategy(
    sigma: &NetSystem,
    game: &GameStructure,
    f: &Strategy,
    goal: &Formula,
) -> Result<Verdict, SynthesisError> {
    for atom in goal.atoms() {
        match sigma.place_id(atom) {
            Some(p) if !sigma.place(p).implicit => {}
            _ => return Err(SynthesisError::GoalAtomNotAPlace(atom.to_string())),
        }
    }
    let k = encode(sigma, game, f)?;
    let fairness = k.fairness_props();
    Ok(check_fair(&k, goal, &fairness)?)
}

/// A strategy over observations of Σ′, in the external JSON shape.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct NetStrategy {
    pub observations: Vec<NetStrategyEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct NetStrategyEntry {
    pub observe: Vec<String>,
    pub fire: Option<String>,
}

/// Convert a game-level strategy to the net-level strategy over the classes
/// reachable when the user follows it.
pub fn strategy_to_net(sigma: &NetSystem, game: &GameStructure, f: &Strategy) -> NetStrategy {
    let mut reachable_class = vec![false; game.class_count()];
    let mut seen = vec![false; game.state_count()];
    let mut stack = vec![game.initial()];
    seen[game.initial()] = true;
    while let Some(s) = stack.pop() {
        reachable_class[game.class_of(s)] = true;
        for &(t, d) in game.successors(s) {
            let keep = if sigma.transition(t).controllable {
                f.get(game.class_of(s)) == Selection::Fire(t)
            } else {
                true
            };
            if keep && !seen[d] {
                seen[d] = true;
                stack.push(d);
            }
        }
    }
    let observations = (0..game.class_count())
        .filter(|&c| reachable_class[c])
        .map(|c| NetStrategyEntry {
            observe: game
                .observation(c)
                .iter()
                .map(|p| sigma.place(crate::net::PlaceId(p)).name.clone())
                .collect(),
            fire: match f.get(c) {
                Selection::Idle => None,
                Selection::Fire(t) => Some(sigma.transition(t).name.clone()),
            },
        })
        .collect();
    NetStrategy { observations }
}

/// Resolve a net-level strategy against the computed observation classes.
/// Observations match by exact set equality on Σ′ place names; classes
/// without an entry idle.
pub fn resolve_net_strategy(
    doc: &NetStrategy,
    sigma: &NetSystem,
    game: &GameStructure,
) -> Result<Strategy, SynthesisError> {
    let mut f = Strategy::idle(game.class_count());
    let mut assigned = vec![false; game.class_count()];
    for entry in &doc.observations {
        let mut obs = crate::bitset::BitSet::new(sigma.place_count());
        for name in &entry.observe {
            let p = sigma
                .place_id(name)
                .ok_or_else(|| SynthesisError::UnknownStrategyPlace(name.clone()))?;
            obs.insert(p.0);
        }
        let class = (0..game.class_count())
            .find(|&c| game.observation(c) == &obs)
            .ok_or_else(|| SynthesisError::UnresolvableObservation(entry.observe.clone()))?;
        let sel = match &entry.fire {
            None => Selection::Idle,
            Some(name) => {
                let t = sigma
                    .transition_id(name)
                    .ok_or_else(|| SynthesisError::UnknownStrategyTransition(name.clone()))?;
                Selection::Fire(t)
            }
        };
        if assigned[class] && f.get(class) != sel {
            return Err(SynthesisError::ConflictingEntries);
        }
        assigned[class] = true;
        f.set(class, sel);
    }
    Ok(f)
}

/// The reachability goal `F(⋀_{p∈m} p ∧ ⋀_{p∉m} ¬p)` over the base places.
pub fn reachability_goal(net: &NetSystem, target: &Marking) -> Formula {
    let mut conj: Option<Formula> = None;
    for (p, place) in net.places() {
        let lit = if target.contains(p.0) {
            Formula::atom(&place.name)
        } else {
            Formula::not(Formula::atom(&place.name))
        };
        conj = Some(match conj {
            None => lit,
            Some(acc) => Formula::and(acc, lit),
        });
    }
    Formula::finally(conj.unwrap_or(Formula::True))
}

#[derive(Clone, Debug, Serialize)]
pub struct SynthesisStats {
    pub strategies_examined: u64,
    pub pruned_equivalent: u64,
    pub wall_ms: u128,
}

/// A failed candidate with its counterexample lasso (markings of Σ′).
#[derive(Clone, Debug, Serialize)]
pub struct CandidateFailure {
    pub candidate: u64,
    pub vacuous: bool,
    pub stem: Vec<Vec<String>>,
    pub cycle: Vec<Vec<String>>,
}

/// Number of per-candidate counterexamples kept in an Unrealizable result.
pub const FAILURE_KEEP: usize = 32;

#[derive(Debug, Serialize)]
#[serde(tag = "result", rename_all = "lowercase")]
pub enum SynthesisOutcome {
    Realizable { strategy: NetStrategy },
    Unrealizable { failures: Vec<CandidateFailure> },
}

#[derive(Debug, Serialize)]
pub struct SynthesisResult {
    #[serde(flatten)]
    pub outcome: SynthesisOutcome,
    pub stats: SynthesisStats,
}

impl SynthesisResult {
    pub fn is_realizable(&self) -> bool {
        matches!(self.outcome, SynthesisOutcome::Realizable { .. })
    }

    pub fn strategy(&self) -> Option<&NetStrategy> {
        match &self.outcome {
            SynthesisOutcome::Realizable { strategy } => Some(strategy),
            SynthesisOutcome::Unrealizable { .. } => None,
        }
    }
}

fn lasso_markings(
    sigma: &NetSystem,
    k: &crate::kripke::KripkeModel,
    states: &[usize],
) -> Vec<Vec<String>> {
    states
        .iter()
        .map(|&s| {
            let m = k.label(s).truncated(sigma.place_count());
            sigma.marking_names(&m)
        })
        .collect()
}

pub fn synthesize(
    net: &NetSystem,
    goal: &Formula,
    caps: &Caps,
) -> Result<SynthesisResult, SynthesisError> {
    synthesize_jobs(net, goal, caps, 1)
}

/// Run the full pipeline and search candidates in deterministic order; the
/// first winning strategy (lowest candidate index) is returned. With
/// `jobs > 1`, candidates are checked in parallel batches without changing
/// the reported winner.
pub fn synthesize_jobs(
    net: &NetSystem,
    goal: &Formula,
    caps: &Caps,
    jobs: usize,
) -> Result<SynthesisResult, SynthesisError> {
    for atom in goal.atoms() {
        if net.place_id(atom).is_none() {
            return Err(SynthesisError::GoalAtomNotAPlace(atom.to_string()));
        }
    }
    let start = Instant::now();
    let derived = derive_pipeline(net, caps)?;
    let sigma = derived.extnet.net();
    let game = &derived.game;

    let mut examined: u64 = 0;
    let mut failures: Vec<CandidateFailure> = Vec::new();
    let mut winner: Option<Strategy> = None;

    let mut candidates = candidate_strategies(game);
    if jobs <= 1 {
        // serial search with conflict-driven skipping: a failing lasso rules
        // out every candidate that agrees on the classes it traverses
        while let Some(f) = candidates.next() {
            let idx = examined;
            examined += 1;
            let k = encode(sigma, game, &f).expect("enumerated strategies are well-formed");
            match check_fair(&k, goal, &k.fairness_props()).expect("goal atoms validated") {
                Verdict::Holds => {
                    winner = Some(f);
                    break;
                }
                Verdict::Fails(lasso) => {
                    let mut classes: Vec<usize> = lasso
                        .stem
                        .iter()
                        .chain(&lasso.cycle)
                        .map(|&s| match *k.origin(s) {
                            crate::kripke::Origin::State(g) => game.class_of(g),
                            crate::kripke::Origin::Intermediate { from, .. } => game.class_of(from),
                            crate::kripke::Origin::Partner(g) => game.class_of(g),
                        })
                        .collect();
                    classes.sort_unstable();
                    classes.dedup();
                    candidates.note_conflict(&classes);
                    if failures.len() < FAILURE_KEEP {
                        failures.push(CandidateFailure {
                            candidate: idx,
                            vacuous: false,
                            stem: lasso_markings(sigma, &k, &lasso.stem),
                            cycle: lasso_markings(sigma, &k, &lasso.cycle),
                        });
                    }
                }
                Verdict::Vacuous => {
                    if failures.len() < FAILURE_KEEP {
                        failures.push(CandidateFailure {
                            candidate: idx,
                            vacuous: true,
                            stem: Vec::new(),
                            cycle: Vec::new(),
                        });
                    }
                }
            }
        }
        let stats = SynthesisStats {
            strategies_examined: examined,
            pruned_equivalent: candidates.pruned_equivalent(),
            wall_ms: start.elapsed().as_millis(),
        };
        return Ok(SynthesisResult {
            outcome: match winner {
                Some(f) => SynthesisOutcome::Realizable {
                    strategy: strategy_to_net(sigma, game, &f),
                },
                None => SynthesisOutcome::Unrealizable { failures },
            },
            stats,
        });
    }

    let batch_size = jobs * 4;
    'search: loop {
        let batch: Vec<(u64, Strategy)> = (&mut candidates)
            .map(|f| {
                let idx = examined;
                examined += 1;
                (idx, f)
            })
            .take(batch_size)
            .collect();
        if batch.is_empty() {
            break;
        }
        let verdicts: Vec<(u64, Strategy, Verdict)> = {
            let chunks: Vec<Vec<(u64, Strategy)>> = {
                let mut cs: Vec<Vec<(u64, Strategy)>> = (0..jobs).map(|_| Vec::new()).collect();
                for (i, item) in batch.into_iter().enumerate() {
                    cs[i % jobs].push(item);
                }
                cs
            };
            let mut all: Vec<(u64, Strategy, Verdict)> = std::thread::scope(|scope| {
                let handles: Vec<_> = chunks
                    .into_iter()
                    .map(|chunk| {
                        scope.spawn(move || {
                            chunk
                                .into_iter()
                                .map(|(idx, f)| {
                                    let k = encode(sigma, game, &f)
                                        .expect("enumerated strategies are well-formed");
                                    let v = check_fair(&k, goal, &k.fairness_props())
                                        .expect("goal atoms validated");
                                    (idx, f, v)
                                })
                                .collect::<Vec<_>>()
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .flat_map(|h| h.join().expect("worker panicked"))
                    .collect()
            });
            all.sort_by_key(|(idx, _, _)| *idx);
            all
        };

        for (idx, f, v) in verdicts {
            match v {
                Verdict::Holds => {
                    examined = idx + 1;
                    winner = Some(f);
                    break 'search;
                }
                Verdict::Fails(lasso) => {
                    if failures.len() < FAILURE_KEEP {
                        let k = encode(sigma, game, &f).expect("re-encode");
                        failures.push(CandidateFailure {
                            candidate: idx,
                            vacuous: false,
                            stem: lasso_markings(sigma, &k, &lasso.stem),
                            cycle: lasso_markings(sigma, &k, &lasso.cycle),
                        });
                    }
                }
                Verdict::Vacuous => {
                    if failures.len() < FAILURE_KEEP {
                        failures.push(CandidateFailure {
                            candidate: idx,
                            vacuous: true,
                            stem: Vec::new(),
                            cycle: Vec::new(),
                        });
                    }
                }
            }
        }
    }

    let stats = SynthesisStats {
        strategies_examined: examined,
        pruned_equivalent: candidates.pruned_equivalent(),
        wall_ms: start.elapsed().as_millis(),
    };

    Ok(SynthesisResult {
        outcome: match winner {
            Some(f) => SynthesisOutcome::Realizable {
                strategy: strategy_to_net(sigma, game, &f),
            },
            None => SynthesisOutcome::Unrealizable { failures },
        },
        stats,
    })
}
