//! JSON and DOT renderings of pipeline artifacts.

use petrigame::kripke::Origin;
use petrigame::marking_graph::{region_boundary, MarkingGraph};
use petrigame::net::{NetSystem, PlaceId};
use petrigame::stability::StabilityTable;
use petrigame::synthesis::Derived;
use petrigame::{sharp, GameStructure, KripkeModel};
use serde_json::{json, Value};

fn names(net: &NetSystem, m: &petrigame::Marking) -> Vec<String> {
    net.marking_names(m)
}

pub fn regions_json(d: &Derived, closure_cap: usize) -> Value {
    let base = d.extnet.base();
    let observable: Vec<PlaceId> = base
        .places()
        .filter(|(_, p)| p.observable)
        .map(|(id, _)| id)
        .collect();
    let closure =
        petrigame::regions::observable_closure_capped(&d.mg, base, &observable, closure_cap)
            .expect("closure already computed once");
    let regions: Vec<Value> = closure
        .iter()
        .map(|r| region_json(d, base, r.name.clone(), r))
        .collect();
    let implicit: Vec<String> = d
        .extnet
        .implicit_places()
        .iter()
        .map(|(pid, _)| d.extnet.net().place(*pid).name.clone())
        .collect();
    json!({ "closure": regions, "implicit_places": implicit })
}

fn region_json(d: &Derived, base: &NetSystem, name: String, region: &petrigame::Region) -> Value {
    let (entering, exiting) = region_boundary(&d.mg, &region.states).expect("closure region");
    let markings: Vec<Vec<String>> = region
        .states
        .iter()
        .map(|s| names(base, d.mg.marking(s)))
        .collect();
    json!({
        "name": name,
        "markings": markings,
        "entering": entering.iter().map(|t| base.transition(*t).name.clone()).collect::<Vec<_>>(),
        "exiting": exiting.iter().map(|t| base.transition(*t).name.clone()).collect::<Vec<_>>(),
    })
}

pub fn stable_json(d: &Derived, table: &StabilityTable) -> Value {
    let sigma = d.extnet.net();
    let rows: Vec<Value> = d
        .mg_prime
        .states()
        .map(|(s, m)| {
            json!({
                "state": s,
                "marking": names(sigma, m),
                "stable": names(sigma, table.stable(s)),
                "observation": names(sigma, table.observation(s)),
                "class": d.partition.class_of(s),
            })
        })
        .collect();
    json!({ "states": rows })
}

pub fn game_json(d: &Derived) -> Value {
    let sigma = d.extnet.net();
    let game = &d.game;
    let states: Vec<Value> = game
        .states()
        .map(|(s, m)| {
            json!({
                "id": s,
                "marking": names(sigma, m),
                "class": game.class_of(s),
                "user_moves": game.user_moves(s).iter().map(|t| sigma.transition(*t).name.clone()).collect::<Vec<_>>(),
                "env_moves": game.env_moves(s).iter().map(|t| sigma.transition(*t).name.clone()).collect::<Vec<_>>(),
                "successors": game.successors(s).iter()
                    .map(|(t, d2)| json!({"transition": sigma.transition(*t).name, "target": d2}))
                    .collect::<Vec<_>>(),
            })
        })
        .collect();
    let classes: Vec<Value> = (0..game.class_count())
        .map(|c| {
            json!({
                "id": c,
                "observation": names(sigma, game.observation(c)),
                "selectable": game.selectable(c).iter().map(|t| sigma.transition(*t).name.clone()).collect::<Vec<_>>(),
                "members": game.class_members(c),
            })
        })
        .collect();
    let pruned: Vec<Value> = game
        .pruned_edges()
        .iter()
        .map(|(m, t)| json!({"marking": names(sigma, m), "transition": sigma.transition(*t).name}))
        .collect();
    let sharps: Vec<Value> = game
        .states()
        .flat_map(|(s, _)| {
            game.fairness()
                .env_transitions
                .iter()
                .filter_map(move |&t| {
                    let set = sharp(sigma, game, t, s).expect("env transition");
                    if set.is_empty() {
                        None
                    } else {
                        Some(json!({
                            "state": s,
                            "transition": sigma.transition(t).name,
                            "sharp": set.iter().map(|x| sigma.transition(*x).name.clone()).collect::<Vec<_>>(),
                        }))
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    json!({ "states": states, "classes": classes, "pruned_edges": pruned, "sharp": sharps })
}

fn dot_escape(s: &str) -> String {
    s.replace('"', "\\\"")
}

pub fn dot_marking_graph(net: &NetSystem, mg: &MarkingGraph) -> String {
    let mut out = String::from("digraph marking_graph {\n  rankdir=LR;\n  node [shape=box];\n");
    for (s, m) in mg.states() {
        out.push_str(&format!(
            "  {} [label=\"{}\"];\n",
            s,
            dot_escape(&net.display_marking(m))
        ));
    }
    for &(s, t, d) in mg.edges() {
        out.push_str(&format!(
            "  {} -> {} [label=\"{}\"];\n",
            s,
            d,
            dot_escape(&net.transition(t).name)
        ));
    }
    out.push_str("}\n");
    out
}

pub fn dot_game(sigma: &NetSystem, game: &GameStructure) -> String {
    let mut out = String::from("digraph game {\n  rankdir=LR;\n  node [shape=box];\n");
    for (s, m) in game.states() {
        out.push_str(&format!(
            "  {} [label=\"{}\\nclass {}\"];\n",
            s,
            dot_escape(&sigma.display_marking(m)),
            game.class_of(s)
        ));
    }
    for (s, _) in game.states() {
        for &(t, d) in game.successors(s) {
            let style = if sigma.transition(t).controllable {
                "solid"
            } else {
                "dashed"
            };
            out.push_str(&format!(
                "  {} -> {} [label=\"{}\", style={}];\n",
                s,
                d,
                dot_escape(&sigma.transition(t).name),
                style
            ));
        }
    }
    out.push_str("}\n");
    out
}

fn prop_names(k: &KripkeModel, state: usize) -> Vec<String> {
    k.label(state)
        .iter()
        .map(|p| k.props()[p].clone())
        .collect()
}

pub fn dot_kripke(k: &KripkeModel) -> String {
    let mut out = String::from("digraph kripke {\n  rankdir=LR;\n");
    for s in 0..k.state_count() {
        let shape = match k.origin(s) {
            Origin::State(_) => "box",
            Origin::Intermediate { .. } => "ellipse",
            Origin::Partner(_) => "diamond",
        };
        out.push_str(&format!(
            "  {} [shape={}, label=\"{}\"];\n",
            s,
            shape,
            dot_escape(&prop_names(k, s).join(","))
        ));
    }
    for s in 0..k.state_count() {
        for &d in k.successors(s) {
            out.push_str(&format!("  {} -> {};\n", s, d));
        }
    }
    out.push_str("}\n");
    out
}

pub fn kripke_json(k: &KripkeModel) -> Value {
    let states: Vec<Value> = (0..k.state_count())
        .map(|s| {
            let origin = match k.origin(s) {
                Origin::State(g) => json!({"kind": "state", "game_state": g}),
                Origin::Intermediate { from, to, .. } => {
                    json!({"kind": "intermediate", "from": from, "to": to})
                }
                Origin::Partner(g) => json!({"kind": "partner", "game_state": g}),
            };
            json!({ "id": s, "props": prop_names(k, s), "origin": origin })
        })
        .collect();
    let edges: Vec<Value> = (0..k.state_count())
        .flat_map(|s| k.successors(s).iter().map(move |&d| json!([s, d])))
        .collect();
    json!({ "initial": k.initial(), "states": states, "edges": edges })
}

pub fn marking_graph_json(net: &NetSystem, mg: &MarkingGraph) -> Value {
    let states: Vec<Value> = mg
        .states()
        .map(|(s, m)| json!({"id": s, "marking": names(net, m)}))
        .collect();
    let edges: Vec<Value> = mg
        .edges()
        .iter()
        .map(|&(s, t, d)| json!({"source": s, "transition": net.transition(t).name, "target": d}))
        .collect();
    json!({ "states": states, "edges": edges })
}
