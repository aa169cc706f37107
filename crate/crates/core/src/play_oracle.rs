//! Independent validation layer: enumerate fair, strategy-consistent maximal
//! interleavings of the net and evaluate goals on them directly, as a
//! cross-check of the model-checking pipeline.

use crate::game::GameStructure;
use crate::ltl::eval::{eval_lasso, eval_prefix, LassoWord};
use crate::ltl::formula::Formula;
use crate::net::{enabled_at, Marking, NetSystem, TransitionId};
use crate::strategy::{Selection, Strategy};
use thiserror::Error;

#[derive(Error, Debug)]
pub enum OracleError {
    #[error("trace bound must be positive")]
    InvalidBound,
    #[error(transparent)]
    UnknownAtom(#[from] crate::ltl::eval::UnknownAtom),
}

/// Why a trace stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceStatus {
    /// No transition of any kind is enabled at the final marking.
    Deadlocked,
    /// No environment transition is enabled and the strategy idles; enabled
    /// but unselected controllable transitions may remain.
    Quiescent,
    /// The step bound was reached with moves still available.
    Truncated,
}

/// A finite interleaving: alternating markings and fired transitions from
/// the extended initial marking.
#[derive(Clone, Debug)]
pub struct PlayTrace {
    pub markings: Vec<Marking>,
    pub fired: Vec<TransitionId>,
    /// Per fired transition: did the user fire it (controllable)?
    pub controllable: Vec<bool>,
    pub status: TraceStatus,
}

impl PlayTrace {
    /// Complete traces extend to an infinite stutter of the final marking;
    /// truncated traces do not decide anything beyond their prefix.
    pub fn is_complete(&self) -> bool {
        !matches!(self.status, TraceStatus::Truncated)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceVerdict {
    Sat,
    Viol,
    Unknown,
}

/// All interleavings up to `bound` steps in which controllable transitions
/// fire only when selected by the strategy at the current observation class,
/// and which stop only at deadlock, at user-idle quiescence, or at the bound.
///
/// A state with no enabled environment transition but a selected (and hence
/// enabled) controllable transition is never terminal: the user is not
/// finally postponed, so the selection must eventually fire.
pub fn fair_maximal_traces(
    net: &NetSystem,
    game: &GameStructure,
    f: &Strategy,
    bound: usize,
) -> Result<Vec<PlayTrace>, OracleError> {
    if bound == 0 {
        return Err(OracleError::InvalidBound);
    }
    let mut out = Vec::new();
    let mut markings = vec![game.marking(game.initial()).clone()];
    let mut fired = Vec::new();
    let mut ctrl = Vec::new();
    walk(
        net,
        game,
        f,
        bound,
        game.initial(),
        &mut markings,
        &mut fired,
        &mut ctrl,
        &mut out,
    );
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn walk(
    net: &NetSystem,
    game: &GameStructure,
    f: &Strategy,
    bound: usize,
    state: usize,
    markings: &mut Vec<Marking>,
    fired: &mut Vec<TransitionId>,
    ctrl: &mut Vec<bool>,
    out: &mut Vec<PlayTrace>,
) {
    let sel = f.get(game.class_of(state));
    let mut moves: Vec<TransitionId> = game.env_moves(state).to_vec();
    if let Selection::Fire(t) = sel {
        debug_assert!(game.user_moves(state).contains(&t));
        moves.push(t);
    }

    if moves.is_empty() {
        let status = if enabled_at(net, game.marking(state)).is_empty() {
            TraceStatus::Deadlocked
        } else {
            TraceStatus::Quiescent
        };
        out.push(PlayTrace {
            markings: markings.clone(),
            fired: fired.clone(),
            controllable: ctrl.clone(),
            status,
        });
        return;
    }

    if fired.len() == bound {
        out.push(PlayTrace {
            markings: markings.clone(),
            fired: fired.clone(),
            controllable: ctrl.clone(),
            status: TraceStatus::Truncated,
        });
        return;
    }

    for t in moves {
        let next = game.tau(state, t).expect("kept move");
        markings.push(game.marking(next).clone());
        fired.push(t);
        ctrl.push(net.transition(t).controllable);
        walk(net, game, f, bound, next, markings, fired, ctrl, out);
        markings.pop();
        fired.pop();
        ctrl.pop();
    }
}

/// Evaluate a goal over base places on one trace. Complete traces are judged
/// exactly on the marking sequence extended by infinite repetition of the
/// final marking; truncated traces use three-valued bounded semantics.
pub fn verdict_on_trace(
    net: &NetSystem,
    trace: &PlayTrace,
    goal: &Formula,
) -> Result<TraceVerdict, OracleError> {
    let resolve = |name: &str| net.place_id(name).map(|p| p.0);
    if trace.is_complete() {
        let word = LassoWord {
            labels: &trace.markings,
            loop_start: trace.markings.len() - 1,
        };
        Ok(if eval_lasso(goal, &word, &resolve)? {
            TraceVerdict::Sat
        } else {
            TraceVerdict::Viol
        })
    } else {
        Ok(match eval_prefix(goal, &trace.markings, &resolve)? {
            Some(true) => TraceVerdict::Sat,
            Some(false) => TraceVerdict::Viol,
            None => TraceVerdict::Unknown,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::ltl::formula::parse_formula;
    use crate::marking_graph::build_marking_graph;
    use crate::regions::{extend_with_observable_closure, ExtendedNet, DEFAULT_CLOSURE_CAP};
    use crate::stability::observation_partition;

    fn derive(net: &NetSystem) -> (ExtendedNet, GameStructure) {
        let mg = build_marking_graph(net).unwrap();
        let extnet = extend_with_observable_closure(net, &mg, DEFAULT_CLOSURE_CAP).unwrap();
        let mgp = build_marking_graph(extnet.net()).unwrap();
        let partition = observation_partition(&extnet, &mgp);
        let game = crate::game::derive_game(&extnet, &mgp, &partition);
        (extnet, game)
    }

    /// SAT strategy: idle initially, fire t4 once the region place p3|p7 is
    /// observed, fire t3 once p4 is observed.
    pub(crate) fn sat_winning_strategy(extnet: &ExtendedNet, game: &GameStructure) -> Strategy {
        let sigma = extnet.net();
        let t3 = sigma.transition_id("t3").unwrap();
        let t4 = sigma.transition_id("t4").unwrap();
        let mut f = Strategy::idle(game.class_count());
        for c in 0..game.class_count() {
            let obs = game.observation(c);
            let has = |n: &str| obs.contains(sigma.place_id(n).unwrap().0);
            if has("p2") && has("p3|p7") {
                f.set(c, Selection::Fire(t4));
            } else if has("p2") && has("p4") {
                f.set(c, Selection::Fire(t3));
            }
        }
        f
    }

    #[test]
    fn env_fixture_fires_by_weak_fairness() {
        let net = fixtures::env_only();
        let (extnet, game) = derive(&net);
        let f = Strategy::idle(game.class_count());
        let traces = fair_maximal_traces(extnet.net(), &game, &f, 5).unwrap();
        assert_eq!(traces.len(), 1);
        assert_eq!(traces[0].fired.len(), 1);
        assert_eq!(traces[0].status, TraceStatus::Deadlocked);
        assert_eq!(traces[0].controllable, vec![false]);
    }

    #[test]
    fn stalled_user_trace_is_quiescent() {
        let net = fixtures::triv();
        let (extnet, game) = derive(&net);
        let f = Strategy::idle(game.class_count());
        let traces = fair_maximal_traces(extnet.net(), &game, &f, 5).unwrap();
        assert_eq!(traces.len(), 1);
        assert!(traces[0].fired.is_empty());
        assert_eq!(traces[0].status, TraceStatus::Quiescent);
    }

    #[test]
    fn selected_transition_must_eventually_fire() {
        let net = fixtures::triv();
        let (extnet, game) = derive(&net);
        let t = extnet.net().transition_id("t").unwrap();
        let mut f = Strategy::idle(game.class_count());
        f.set(game.class_of(game.initial()), Selection::Fire(t));
        let traces = fair_maximal_traces(extnet.net(), &game, &f, 5).unwrap();
        // the only maximal trace fires t, then deadlocks
        assert_eq!(traces.len(), 1);
        assert_eq!(traces[0].fired, vec![t]);
        assert_eq!(traces[0].status, TraceStatus::Deadlocked);
    }

    #[test]
    fn sat_winning_strategy_reaches_goal_on_every_trace() {
        let net = fixtures::sat();
        let (extnet, game) = derive(&net);
        let f = sat_winning_strategy(&extnet, &game);
        let goal = parse_formula(fixtures::SAT_GOAL).unwrap();
        let bound = net.transition_count() + 1;
        let traces = fair_maximal_traces(extnet.net(), &game, &f, bound).unwrap();
        assert!(!traces.is_empty());
        for tr in &traces {
            assert!(tr.is_complete(), "acyclic net, bound covers all traces");
            assert_eq!(
                verdict_on_trace(extnet.net(), tr, &goal).unwrap(),
                TraceVerdict::Sat
            );
        }
    }

    #[test]
    fn no_unselected_controllable_firing() {
        let net = fixtures::sat();
        let (extnet, game) = derive(&net);
        let f = sat_winning_strategy(&extnet, &game);
        let traces = fair_maximal_traces(extnet.net(), &game, &f, 10).unwrap();
        for tr in &traces {
            let mut state = game.initial();
            for (k, &t) in tr.fired.iter().enumerate() {
                if tr.controllable[k] {
                    assert_eq!(f.get(game.class_of(state)), Selection::Fire(t));
                }
                state = game.tau(state, t).unwrap();
            }
        }
    }

    #[test]
    fn interleaving_closure_under_independent_swaps() {
        // swapping adjacent independent firings yields another enumerated
        // trace whenever the swap stays consistent with the strategy (a
        // controllable firing may only move to a point where its class still
        // selects it)
        let net = fixtures::sat();
        let (extnet, game) = derive(&net);
        let f = sat_winning_strategy(&extnet, &game);
        let traces = fair_maximal_traces(extnet.net(), &game, &f, 10).unwrap();
        let sigma = extnet.net();
        let words: Vec<Vec<TransitionId>> = traces.iter().map(|t| t.fired.clone()).collect();
        let consistent = |w: &[TransitionId]| -> bool {
            let mut state = game.initial();
            for &t in w {
                if sigma.transition(t).controllable
                    && f.get(game.class_of(state)) != Selection::Fire(t)
                {
                    return false;
                }
                match game.tau(state, t) {
                    Some(next) => state = next,
                    None => return false,
                }
            }
            true
        };
        let mut swaps = 0;
        for w in &words {
            for i in 0..w.len().saturating_sub(1) {
                let (a, b) = (sigma.transition(w[i]), sigma.transition(w[i + 1]));
                let touched_a = a.pre.union(&a.post);
                let touched_b = b.pre.union(&b.post);
                if touched_a.is_disjoint(&touched_b) {
                    let mut swapped = w.clone();
                    swapped.swap(i, i + 1);
                    if consistent(&swapped) {
                        swaps += 1;
                        assert!(
                            words.contains(&swapped),
                            "swap of independent steps enumerated"
                        );
                    }
                }
            }
        }
        assert!(
            swaps > 0,
            "the fixture exercises at least one independent swap"
        );
    }

    #[test]
    fn truncation_reports_unknown_for_undecided_goals() {
        // a cycle: a -> b -> a under the environment
        let net = crate::net::parse_net(
            r#"{"places":["a","b","w"],
                "transitions":[{"name":"t1","pre":["a"],"post":["b"]},
                               {"name":"t2","pre":["b"],"post":["a"]}],
                "initial":["a"],"observable":["a","b","w"]}"#,
        )
        .unwrap();
        let (extnet, game) = derive(&net);
        let f = Strategy::idle(game.class_count());
        let traces = fair_maximal_traces(extnet.net(), &game, &f, 4).unwrap();
        assert!(traces.iter().all(|t| t.status == TraceStatus::Truncated));
        let goal = parse_formula("F w").unwrap();
        for t in &traces {
            assert_eq!(
                verdict_on_trace(extnet.net(), t, &goal).unwrap(),
                TraceVerdict::Unknown
            );
        }
        // G true is satisfied even on deadlocked traces
        let triv = fixtures::triv();
        let (e2, g2) = derive(&triv);
        let t = e2.net().transition_id("t").unwrap();
        let mut f2 = Strategy::idle(g2.class_count());
        f2.set(g2.class_of(g2.initial()), Selection::Fire(t));
        let traces2 = fair_maximal_traces(e2.net(), &g2, &f2, 5).unwrap();
        let tautology = parse_formula("G true").unwrap();
        assert_eq!(
            verdict_on_trace(e2.net(), &traces2[0], &tautology).unwrap(),
            TraceVerdict::Sat
        );
    }

    #[test]
    fn zero_bound_is_rejected() {
        let net = fixtures::triv();
        let (extnet, game) = derive(&net);
        let f = Strategy::idle(game.class_count());
        assert!(matches!(
            fair_maximal_traces(extnet.net(), &game, &f, 0),
            Err(OracleError::InvalidBound)
        ));
    }

    #[test]
    fn sat_trace_verdict_example() {
        // {p1,p2} -t2-> {p2,p4} -t3-> {p4,p5}, deadlocked: first disjunct holds
        let net = fixtures::sat();
        let (extnet, game) = derive(&net);
        let sigma = extnet.net();
        let t2 = sigma.transition_id("t2").unwrap();
        let t3 = sigma.transition_id("t3").unwrap();
        let s0 = game.initial();
        let s1 = game.tau(s0, t2).unwrap();
        let s2 = game.tau(s1, t3).unwrap();
        let trace = PlayTrace {
            markings: vec![
                game.marking(s0).clone(),
                game.marking(s1).clone(),
                game.marking(s2).clone(),
            ],
            fired: vec![t2, t3],
            controllable: vec![false, true],
            status: TraceStatus::Deadlocked,
        };
        let goal = parse_formula(fixtures::SAT_GOAL).unwrap();
        assert_eq!(
            verdict_on_trace(sigma, &trace, &goal).unwrap(),
            TraceVerdict::Sat
        );
    }
}
