//! Controller synthesis for 1-safe Petri nets under partial observability.
//!
//! A user controls a subset of transitions and observes a subset of places;
//! the rest belongs to the environment, which is weakly fair. The toolkit
//! decides whether the user has a memoryless winning strategy for an
//! LTL-without-X goal, and produces the strategy when one exists.
//!
//! The pipeline: build the marking graph, close the observable places under
//! complement and compatible union (adding implicit region places), compute
//! stable parts and observation classes, derive the pruned game structure,
//! then enumerate candidate strategies and check each one on a
//! fairness-annotated Kripke encoding with an explicit-state LTL model
//! checker.

pub mod bitset;
pub mod fixtures;
pub mod game;
pub mod kripke;
pub mod ltl;
pub mod marking_graph;
pub mod net;
pub mod play_oracle;
pub mod regions;
pub mod stability;
pub mod strategy;
pub mod synthesis;

pub use game::{derive_game, sharp, GameStructure};
pub use kripke::{encode, KripkeModel};
pub use ltl::check::{check_fair, exists_fair_path, Verdict};
pub use ltl::formula::{parse_formula, Formula};
pub use marking_graph::{build_marking_graph, is_region, region_boundary, MarkingGraph, StateSet};
pub use net::{enabled_at, fire, parse_net, Marking, NetSystem, PlaceId, TransitionId};
pub use play_oracle::{fair_maximal_traces, verdict_on_trace, PlayTrace, TraceVerdict};
pub use regions::{
    compatible, complement, extend_net, observable_closure, place_extension, union_compatible,
    ExtendedNet, Region,
};
pub use stability::{env_closure, observation, observation_partition, stable_part, Observation};
pub use strategy::{Selection, Strategy};
pub use synthesis::{
    candidate_strategies, check_strategy, derive_pipeline, reachability_goal, resolve_net_strategy,
    strategy_to_net, synthesize, synthesize_jobs, Caps, Derived, NetStrategy, SynthesisResult,
};
