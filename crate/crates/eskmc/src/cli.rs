//! Command-line front end. Verdicts double as exit codes so shell harnesses
//! can chain runs: `check` exits 0 when the formula holds, 1 when it does
//! not, and 2 or higher on any error. Data goes to stdout, diagnostics and
//! timings to stderr; with `--json` the stdout payload is a JSON report
//! carrying the command echo, input digests and the verdict, and is
//! byte-identical across repeated runs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::checker::{self, Checker};
use crate::dataset;
use crate::ids::WorldId;
use crate::model::WeightedModel;
use crate::reductions::kripke::{kripke_check, KripkeModel, KripkeSemantics};
use crate::reductions::{rewrite, Rewriting};
use crate::syntax::{self, length, parse};
use crate::ueg::{self, UegGraph};

#[derive(Parser, Debug)]
#[command(
    name = "eskmc",
    version,
    about = "Model checking for epistemic logics with skill-weighted models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a formula at a world of a model (weighted, or Kripke when the
    /// file has a "relations" key).
    Check {
        /// Path to the model JSON file.
        model: PathBuf,
        /// World to evaluate at.
        world: String,
        /// Formula text.
        formula: String,
        /// Print all satisfying worlds instead of a single verdict.
        #[arg(long)]
        truth_set: bool,
        /// Emit a JSON report on stdout.
        #[arg(long)]
        json: bool,
        /// Also run the slow reference evaluator and insist it agrees.
        #[arg(long)]
        oracle: bool,
        /// Evaluate truth-set membership of different worlds in parallel.
        #[arg(long)]
        parallel: bool,
        /// Semantics for Kripke-model files: kdn, s5c2 or ku2.
        #[arg(long, default_value = "kdn")]
        semantics: String,
    },
    /// Validate a model file and list violations.
    Validate {
        model: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Solve an undirected edge geography game and cross-check the induced
    /// formula on the induced model.
    Ueg {
        graph: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Apply a satisfiability-preserving rewriting to a formula.
    /// Kinds: d-to-kdn, def-to-d, cdefu-to-cu, s5c2-to-c, cu-to-cpdl,
    /// ku2-to-lu.
    Reduce {
        kind: String,
        formula: String,
        #[arg(long)]
        json: bool,
    },
    /// Abstract a weighted model from an attribute CSV, optionally
    /// overlaying capabilities and a valuation.
    Abstract {
        csv: PathBuf,
        #[arg(long)]
        overlay: Option<PathBuf>,
    },
    /// Run the built-in smoke suite.
    Selftest,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn read_input(path: &Path) -> Result<(String, String), String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let digest = sha256_hex(text.as_bytes());
    Ok((text, digest))
}

/// The JSON report emitted with `--json`: command echo, input digests and
/// the command's verdict data. Timing goes to stderr so repeated runs stay
/// byte-identical on stdout.
fn report(command: &str, inputs: BTreeMap<String, String>, body: Value) -> Value {
    json!({
        "command": command,
        "inputs": inputs,
        "result": body,
        "version": env!("CARGO_PKG_VERSION"),
    })
}

pub fn run(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, String> {
    match cli.command {
        Command::Check {
            model,
            world,
            formula,
            truth_set,
            json,
            oracle,
            parallel,
            semantics,
        } => cmd_check(
            &model, &world, &formula, truth_set, json, oracle, parallel, &semantics,
        ),
        Command::Validate { model, json } => cmd_validate(&model, json),
        Command::Ueg { graph, json } => cmd_ueg(&graph, json),
        Command::Reduce { kind, formula, json } => cmd_reduce(&kind, &formula, json),
        Command::Abstract { csv, overlay } => cmd_abstract(&csv, overlay.as_deref()),
        Command::Selftest => Ok(selftest()),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_check(
    model_path: &Path,
    world: &str,
    formula: &str,
    truth_set: bool,
    json: bool,
    oracle: bool,
    parallel: bool,
    semantics: &str,
) -> Result<i32, String> {
    let (text, digest) = read_input(model_path)?;
    let f = parse(formula).map_err(|e| e.to_string())?;
    let w = WorldId::new(world);
    let started = Instant::now();

    let raw: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let is_kripke = raw.get("relations").is_some();

    let (verdict, sat_worlds): (bool, Vec<String>) = if is_kripke {
        let sem = match semantics {
            "kdn" => KripkeSemantics::KDn,
            "s5c2" => KripkeSemantics::S5C2,
            "ku2" => KripkeSemantics::KU2,
            other => return Err(format!("unknown semantics {other:?} (kdn, s5c2, ku2)")),
        };
        let n = KripkeModel::from_json_str(&text).map_err(|e| e.to_string())?;
        if n.world_index(w).is_none() {
            return Err(format!("unknown world {world}"));
        }
        let verdict = kripke_check(&n, w, &f, sem).map_err(|e| e.to_string())?;
        let mut sats = Vec::new();
        if truth_set {
            for u in n.worlds() {
                if kripke_check(&n, *u, &f, sem).map_err(|e| e.to_string())? {
                    sats.push(u.as_str().to_owned());
                }
            }
            sats.sort();
        }
        (verdict, sats)
    } else {
        let m = WeightedModel::from_json_str(&text).map_err(|e| e.to_string())?;
        if m.world_index(w).is_none() {
            return Err(format!("unknown world {world}"));
        }
        let mut ck = Checker::new(&m).map_err(|e| e.to_string())?;
        let verdict = ck.check(w, &f).map_err(|e| e.to_string())?;
        if oracle {
            let slow = checker::oracle::check_naive(&m, w, &f).map_err(|e| e.to_string())?;
            if slow != verdict {
                eprintln!(
                    "oracle disagreement at {world}: checker={verdict} oracle={slow}"
                );
                return Ok(3);
            }
        }
        let mut sats = Vec::new();
        if truth_set {
            if parallel {
                let worlds = m.worlds().to_vec();
                let results: Vec<(WorldId, bool)> = std::thread::scope(|scope| {
                    let handles: Vec<_> = worlds
                        .iter()
                        .map(|u| {
                            let m = &m;
                            let f = &f;
                            scope.spawn(move || {
                                let v = checker::check(m, *u, f).map_err(|e| e.to_string());
                                (*u, v)
                            })
                        })
                        .collect();
                    handles
                        .into_iter()
                        .map(|h| {
                            let (u, v) = h.join().expect("checker thread panicked");
                            v.map(|v| (u, v))
                        })
                        .collect::<Result<Vec<_>, String>>()
                })?;
                for (u, v) in results {
                    if v {
                        sats.push(u.as_str().to_owned());
                    }
                }
            } else {
                let ts = ck.truth_set(&f).map_err(|e| e.to_string())?;
                sats = ts.worlds.iter().map(|u| u.as_str().to_owned()).collect();
            }
            sats.sort();
            if oracle {
                for u in m.worlds() {
                    let slow =
                        checker::oracle::check_naive(&m, *u, &f).map_err(|e| e.to_string())?;
                    if slow != sats.binary_search(&u.as_str().to_owned()).is_ok() {
                        eprintln!("oracle disagreement at {u}");
                        return Ok(3);
                    }
                }
            }
        }
        (verdict, sats)
    };

    eprintln!("time: {}us", started.elapsed().as_micros());
    let mut inputs = BTreeMap::new();
    inputs.insert(model_path.display().to_string(), digest);
    if json {
        let mut body = json!({ "world": world, "formula": formula, "verdict": verdict });
        if truth_set {
            body["truth_set"] = json!(sat_worlds);
        }
        println!("{}", report("check", inputs, body));
    } else if truth_set {
        println!("{}", sat_worlds.join(" "));
        println!("{}", if verdict { "true" } else { "false" });
    } else {
        println!("{}", if verdict { "true" } else { "false" });
    }
    Ok(if verdict { 0 } else { 1 })
}

fn cmd_validate(model_path: &Path, json: bool) -> Result<i32, String> {
    let (text, digest) = read_input(model_path)?;
    let m = WeightedModel::from_json_str(&text).map_err(|e| e.to_string())?;
    let violations = m.validate();
    let mut inputs = BTreeMap::new();
    inputs.insert(model_path.display().to_string(), digest);
    if json {
        let body = json!({
            "valid": violations.is_empty(),
            "violations": violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        });
        println!("{}", report("validate", inputs, body));
    } else if violations.is_empty() {
        println!("ok");
    } else {
        for v in &violations {
            println!("violation: {v}");
        }
    }
    Ok(if violations.is_empty() { 0 } else { 1 })
}

fn cmd_ueg(graph_path: &Path, json: bool) -> Result<i32, String> {
    let (text, digest) = read_input(graph_path)?;
    let g = UegGraph::from_json_str(&text).map_err(|e| e.to_string())?;
    let rep = ueg::equivalence_check(&g).map_err(|e| e.to_string())?;
    eprintln!(
        "time: solve {}us, check {}us",
        rep.solve_micros, rep.check_micros
    );
    let mut inputs = BTreeMap::new();
    inputs.insert(graph_path.display().to_string(), digest);
    if json {
        let body = json!({
            "winner": rep.winner.to_string(),
            "model_check": rep.model_check,
            "agree": rep.agree,
            "formula_length": rep.formula_length,
        });
        println!("{}", report("ueg", inputs, body));
    } else {
        println!(
            "winner: {}\nmodel-check: {}\nagree: {}\nformula-length: {}",
            rep.winner, rep.model_check, rep.agree, rep.formula_length
        );
    }
    Ok(if rep.agree { 0 } else { 1 })
}

fn cmd_reduce(kind: &str, formula: &str, json: bool) -> Result<i32, String> {
    let kind = Rewriting::from_name(kind).ok_or_else(|| {
        format!(
            "unknown rewriting {kind:?}; expected one of: {}",
            Rewriting::ALL
                .iter()
                .map(|k| k.name())
                .collect::<Vec<_>>()
                .join(", ")
        )
    })?;
    let f = parse(formula).map_err(|e| e.to_string())?;
    let out = rewrite(kind, &f).map_err(|e| e.to_string())?;
    let input_len = length(&syntax::desugar(&f));
    let output_len = out.length();
    if json {
        let body = json!({
            "kind": kind.name(),
            "input": formula,
            "input_length": input_len,
            "output": out.to_string(),
            "output_length": output_len,
        });
        println!("{}", report("reduce", BTreeMap::new(), body));
    } else {
        println!("{out}");
        println!("input-length: {input_len}");
        println!("output-length: {output_len}");
    }
    Ok(0)
}

fn cmd_abstract(csv_path: &Path, overlay_path: Option<&Path>) -> Result<i32, String> {
    let (text, _) = read_input(csv_path)?;
    let table = dataset::AttributeTable::from_csv_str(&text).map_err(|e| e.to_string())?;
    let frame = dataset::abstract_frame(&table).map_err(|e| e.to_string())?;
    let model = match overlay_path {
        Some(p) => {
            let (otext, _) = read_input(p)?;
            let ov = dataset::Overlay::from_json_str(&otext).map_err(|e| e.to_string())?;
            dataset::overlay(&frame, &ov).map_err(|e| e.to_string())?
        }
        None => frame,
    };
    println!("{}", serde_json::to_string_pretty(&model.to_json()).unwrap());
    Ok(0)
}

fn selftest() -> i32 {
    let mut failures = 0;
    let mut run = |name: &str, ok: bool| {
        println!("{} - {}", if ok { "ok" } else { "FAIL" }, name);
        if !ok {
            failures += 1;
        }
    };

    let solar = WeightedModel::from_json_str(include_str!("../fixtures/solar.json"));
    let fiveworld = WeightedModel::from_json_str(include_str!("../fixtures/fiveworld.json"));
    run("fixtures load", solar.is_ok() && fiveworld.is_ok());
    let (Ok(solar), Ok(fiveworld)) = (solar, fiveworld) else {
        return 1;
    };
    run(
        "fixtures validate",
        solar.validate().is_empty() && fiveworld.validate().is_empty(),
    );

    let holds = |m: &WeightedModel, w: &str, txt: &str| -> bool {
        parse(txt)
            .ok()
            .and_then(|f| checker::check(m, WorldId::new(w), &f).ok())
            .unwrap_or(false)
    };
    run(
        "solar knowledge sample",
        !holds(&solar, "e", "K[a] p")
            && holds(&solar, "e", "(K[b] p & K[c] p)")
            && holds(&solar, "e", "C[b,c] p"),
    );
    run(
        "fiveworld quantifier sample",
        holds(&fiveworld, "w5", "dp[a] K[a] p4") && !holds(&fiveworld, "w5", "K[a] dp[a] p4"),
    );
    run(
        "length convention",
        parse("(p -> C[a,b,c] q)").map(|f| length(&f)) == Ok(13),
    );
    let g = UegGraph::from_json_str(include_str!("../fixtures/g0.json"));
    run(
        "ueg equivalence on the example graph",
        g.ok()
            .and_then(|g| ueg::equivalence_check(&g).ok())
            .map(|r| r.agree)
            .unwrap_or(false),
    );
    run(
        "reduce smoke",
        parse("K[a] p")
            .map_err(|e| e.to_string())
            .and_then(|f| rewrite(Rewriting::CuToCpdl, &f).map_err(|e| e.to_string()))
            .map(|out| out.to_string().starts_with("([a] p"))
            .unwrap_or(false),
    );

    if failures == 0 {
        0
    } else {
        1
    }
}
