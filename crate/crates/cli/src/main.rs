mod render;

use clap::{Args, Parser, Subcommand};
use petrigame::ltl::check::Verdict;
use petrigame::marking_graph::DEFAULT_STATE_CAP;
use petrigame::play_oracle::TraceVerdict;
use petrigame::regions::DEFAULT_CLOSURE_CAP;
use petrigame::synthesis::{
    check_strategy, derive_pipeline, resolve_net_strategy, synthesize_jobs, Caps, Derived,
    NetStrategy,
};
use petrigame::{
    fair_maximal_traces, parse_formula, parse_net, verdict_on_trace, Formula, NetSystem,
};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "petrigame",
    version,
    about = "Memoryless controller synthesis on 1-safe Petri nets with partial observability and LTL-without-X goals",
    after_help = "GOAL GRAMMAR:\n    atoms are place names; operators: ! & | -> U R F G, plus `true`, `false`\n    and parentheses. Unary operators bind tightest, then U/R (right-assoc),\n    then &, |, ->. The next-step operator X is rejected.\n\nNET FORMAT:\n    {\"places\":[..], \"transitions\":[{\"name\":..,\"pre\":[..],\"post\":[..],\n    \"controllable\":bool}], \"initial\":[..], \"observable\":[..]}"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CapArgs {
    /// Cap on reachable markings explored per graph
    #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
    state_cap: usize,
    /// Cap on distinct regions in the observable closure
    #[arg(long, default_value_t = DEFAULT_CLOSURE_CAP)]
    closure_cap: usize,
}

impl CapArgs {
    fn caps(&self) -> Caps {
        Caps {
            state_cap: self.state_cap,
            closure_cap: self.closure_cap,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Search for a winning strategy; exit 0 when realizable, 1 when not
    Synthesize {
        /// Net description (JSON)
        #[arg(long)]
        net: PathBuf,
        /// Goal formula over the net's places
        #[arg(long)]
        goal: String,
        /// Parallel strategy-checking workers
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Check a given strategy; exit 0 when it wins, 1 otherwise
    Check {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        goal: String,
        /// Strategy file (JSON, as produced by synthesize)
        #[arg(long)]
        strategy: PathBuf,
        /// Structured JSON output instead of text
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Dump intermediate artifacts of the pipeline
    Explain {
        #[arg(long)]
        net: PathBuf,
        /// Region closure as JSON (name, markings, entering, exiting)
        #[arg(long)]
        regions: bool,
        /// Per-state stable part, observation and class as JSON
        #[arg(long)]
        stable: bool,
        /// Game structure (moves, pruned edges, conflict tables) as JSON
        #[arg(long)]
        game: bool,
        /// Marking graph of the input net as JSON
        #[arg(long)]
        mg: bool,
        /// Marking graph of the input net in DOT format
        #[arg(long)]
        dot_mg: bool,
        /// Game graph in DOT format
        #[arg(long)]
        dot_game: bool,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Build the Kripke encoding of a strategy and dump it
    Encode {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        strategy: PathBuf,
        /// DOT output instead of JSON
        #[arg(long)]
        dot: bool,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Compare the bounded trace oracle against the model checker
    Oracle {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        goal: String,
        #[arg(long)]
        strategy: PathBuf,
        /// Trace step bound (default: number of transitions + 1)
        #[arg(long)]
        bound: Option<usize>,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        caps: CapArgs,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn load_net(path: &Path) -> Result<NetSystem, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_net(&text).map_err(|e| e.to_string())
}

fn load_goal(goal: &str) -> Result<Formula, String> {
    parse_formula(goal).map_err(|e| e.to_string())
}

fn load_strategy(path: &Path) -> Result<NetStrategy, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("strategy {}: {e}", path.display()))
}

fn derive(net: &NetSystem, caps: &CapArgs) -> Result<Derived, String> {
    derive_pipeline(net, &caps.caps()).map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Synthesize {
            net,
            goal,
            jobs,
            caps,
        } => {
            let net = load_net(&net)?;
            let goal = load_goal(&goal)?;
            let result = synthesize_jobs(&net, &goal, &caps.caps(), jobs.max(1))
                .map_err(|e| e.to_string())?;
            println!(
                "{}",
                serde_json::to_string_pretty(&result).map_err(|e| e.to_string())?
            );
            Ok(ExitCode::from(if result.is_realizable() { 0 } else { 1 }))
        }

        Command::Check {
            net,
            goal,
            strategy,
            json,
            caps,
        } => {
            let net = load_net(&net)?;
            let goal = load_goal(&goal)?;
            let doc = load_strategy(&strategy)?;
            let d = derive(&net, &caps)?;
            let sigma = d.extnet.net();
            let f = resolve_net_strategy(&doc, sigma, &d.game).map_err(|e| e.to_string())?;
            let verdict = check_strategy(sigma, &d.game, &f, &goal).map_err(|e| e.to_string())?;
            let code = match &verdict {
                Verdict::Holds => 0,
                Verdict::Fails(_) | Verdict::Vacuous => 1,
            };
            if json {
                let value = match &verdict {
                    Verdict::Holds => json!({"verdict": "holds"}),
                    Verdict::Vacuous => json!({"verdict": "vacuous"}),
                    Verdict::Fails(lasso) => {
                        let k = petrigame::encode(sigma, &d.game, &f).map_err(|e| e.to_string())?;
                        let show = |states: &[usize]| -> Vec<Vec<String>> {
                            states
                                .iter()
                                .map(|&s| {
                                    sigma.marking_names(&k.label(s).truncated(sigma.place_count()))
                                })
                                .collect()
                        };
                        json!({"verdict": "fails", "counterexample": {"stem": show(&lasso.stem), "cycle": show(&lasso.cycle)}})
                    }
                };
                println!(
                    "{}",
                    serde_json::to_string_pretty(&value).map_err(|e| e.to_string())?
                );
            } else {
                match &verdict {
                    Verdict::Holds => println!("holds: the strategy is winning"),
                    Verdict::Vacuous => {
                        println!("vacuous: no fair play is consistent with the strategy")
                    }
                    Verdict::Fails(lasso) => {
                        let k = petrigame::encode(sigma, &d.game, &f).map_err(|e| e.to_string())?;
                        println!("fails: counterexample lasso");
                        let show = |s: usize| {
                            sigma.display_marking(&k.label(s).truncated(sigma.place_count()))
                        };
                        for &s in &lasso.stem {
                            println!("  stem  {}", show(s));
                        }
                        for &s in &lasso.cycle {
                            println!("  cycle {}", show(s));
                        }
                    }
                }
            }
            Ok(ExitCode::from(code))
        }

        Command::Explain {
            net,
            regions,
            stable,
            game,
            mg,
            dot_mg,
            dot_game,
            caps,
        } => {
            let net = load_net(&net)?;
            let d = derive(&net, &caps)?;
            let mut printed = false;
            if dot_mg {
                print!("{}", render::dot_marking_graph(d.extnet.base(), &d.mg));
                printed = true;
            }
            if dot_game {
                print!("{}", render::dot_game(d.extnet.net(), &d.game));
                printed = true;
            }
            let mut sections = serde_json::Map::new();
            if mg {
                sections.insert(
                    "marking_graph".into(),
                    render::marking_graph_json(d.extnet.base(), &d.mg),
                );
            }
            if regions {
                sections.insert("regions".into(), render::regions_json(&d, caps.closure_cap));
            }
            if stable {
                sections.insert("stable".into(), render::stable_json(&d, &d.table));
            }
            if game {
                sections.insert("game".into(), render::game_json(&d));
            }
            if !sections.is_empty() {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&serde_json::Value::Object(sections))
                        .map_err(|e| e.to_string())?
                );
                printed = true;
            }
            if !printed {
                return Err("nothing to explain: pass --regions, --stable, --game, --mg, --dot-mg or --dot-game".into());
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Encode {
            net,
            strategy,
            dot,
            caps,
        } => {
            let net = load_net(&net)?;
            let doc = load_strategy(&strategy)?;
            let d = derive(&net, &caps)?;
            let sigma = d.extnet.net();
            let f = resolve_net_strategy(&doc, sigma, &d.game).map_err(|e| e.to_string())?;
            let k = petrigame::encode(sigma, &d.game, &f).map_err(|e| e.to_string())?;
            if dot {
                print!("{}", render::dot_kripke(&k));
            } else {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&render::kripke_json(&k))
                        .map_err(|e| e.to_string())?
                );
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Oracle {
            net,
            goal,
            strategy,
            bound,
            json,
            caps,
        } => {
            let net = load_net(&net)?;
            let goal = load_goal(&goal)?;
            let doc = load_strategy(&strategy)?;
            let d = derive(&net, &caps)?;
            let sigma = d.extnet.net();
            let f = resolve_net_strategy(&doc, sigma, &d.game).map_err(|e| e.to_string())?;
            let bound = bound.unwrap_or(net.transition_count() + 1);

            let verdict = check_strategy(sigma, &d.game, &f, &goal).map_err(|e| e.to_string())?;
            let traces =
                fair_maximal_traces(sigma, &d.game, &f, bound).map_err(|e| e.to_string())?;
            let mut sat = 0usize;
            let mut viol = 0usize;
            let mut unknown = 0usize;
            for t in &traces {
                match verdict_on_trace(sigma, t, &goal).map_err(|e| e.to_string())? {
                    TraceVerdict::Sat => sat += 1,
                    TraceVerdict::Viol => viol += 1,
                    TraceVerdict::Unknown => unknown += 1,
                }
            }
            let holds = matches!(verdict, Verdict::Holds);
            // conclusive agreement: a winning verdict must see only satisfied
            // traces; a losing one must be witnessed by a violating trace
            let agreement = if holds && viol == 0 && unknown == 0 {
                Some(true)
            } else if !holds && viol > 0 {
                Some(true)
            } else if unknown > 0 {
                None
            } else {
                Some(false)
            };
            let verdict_name = match verdict {
                Verdict::Holds => "holds",
                Verdict::Fails(_) => "fails",
                Verdict::Vacuous => "vacuous",
            };
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "checker": verdict_name,
                        "bound": bound,
                        "traces": traces.len(),
                        "sat": sat, "viol": viol, "unknown": unknown,
                        "agreement": agreement,
                    }))
                    .map_err(|e| e.to_string())?
                );
            } else {
                println!("checker: {verdict_name}");
                println!(
                    "traces (bound {bound}): {} total, {sat} sat, {viol} viol, {unknown} unknown",
                    traces.len()
                );
                match agreement {
                    Some(true) => println!("agreement: yes"),
                    Some(false) => println!("agreement: NO"),
                    None => println!("agreement: inconclusive (raise --bound)"),
                }
            }
            Ok(ExitCode::from(match agreement {
                Some(true) | None => 0,
                Some(false) => 1,
            }))
        }
    }
}
