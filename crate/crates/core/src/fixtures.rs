//! Small nets used throughout the tests and the documentation.

use crate::net::{parse_net, Marking, NetSystem};

/// Two places, one controllable transition `t: {a} -> {b}`.
pub const TRIV_JSON: &str = r#"{
  "places": ["a", "b"],
  "transitions": [
    {"name": "t", "pre": ["a"], "post": ["b"], "controllable": true}
  ],
  "initial": ["a"],
  "observable": ["a", "b"]
}"#;

/// Seven places and five transitions. One token moves over
/// `p1 -> p3 -> p7` or `p1 -> p4` under environment control, the other over
/// `p2 -> p5` or `p2 -> p6` under user control.
pub const SAT_JSON: &str = r#"{
  "places": ["p1", "p2", "p3", "p4", "p5", "p6", "p7"],
  "transitions": [
    {"name": "t1", "pre": ["p1"], "post": ["p3"]},
    {"name": "t2", "pre": ["p1"], "post": ["p4"]},
    {"name": "t3", "pre": ["p2"], "post": ["p5"], "controllable": true},
    {"name": "t4", "pre": ["p2"], "post": ["p6"], "controllable": true},
    {"name": "t5", "pre": ["p3"], "post": ["p7"]}
  ],
  "initial": ["p1", "p2"],
  "observable": ["p1", "p2", "p3", "p4", "p5", "p6", "p7"]
}"#;

/// SAT with observability restricted to `{p1, p2, p5, p6}`.
pub const SAT_RESTRICTED_JSON: &str = r#"{
  "places": ["p1", "p2", "p3", "p4", "p5", "p6", "p7"],
  "transitions": [
    {"name": "t1", "pre": ["p1"], "post": ["p3"]},
    {"name": "t2", "pre": ["p1"], "post": ["p4"]},
    {"name": "t3", "pre": ["p2"], "post": ["p5"], "controllable": true},
    {"name": "t4", "pre": ["p2"], "post": ["p6"], "controllable": true},
    {"name": "t5", "pre": ["p3"], "post": ["p7"]}
  ],
  "initial": ["p1", "p2"],
  "observable": ["p1", "p2", "p5", "p6"]
}"#;

/// A single environment transition `t: {a} -> {b}`.
pub const ENV_JSON: &str = r#"{
  "places": ["a", "b"],
  "transitions": [
    {"name": "t", "pre": ["a"], "post": ["b"]}
  ],
  "initial": ["a"],
  "observable": ["a", "b"]
}"#;

/// The goal used with the SAT net: `F(p4 & p5) | F((p3 | p7) & p6)`.
pub const SAT_GOAL: &str = "F(p4 & p5) | F((p3 | p7) & p6)";

pub fn triv() -> NetSystem {
    parse_net(TRIV_JSON).unwrap()
}

pub fn sat() -> NetSystem {
    parse_net(SAT_JSON).unwrap()
}

pub fn sat_restricted() -> NetSystem {
    parse_net(SAT_RESTRICTED_JSON).unwrap()
}

pub fn env_only() -> NetSystem {
    parse_net(ENV_JSON).unwrap()
}

/// Marking of `net` containing exactly the named places.
pub fn marking(net: &NetSystem, names: &[&str]) -> Marking {
    let mut m = Marking::new(net.place_count());
    for n in names {
        m.insert(net.place_id(n).unwrap_or_else(|| panic!("no place {n}")).0);
    }
    m
}
