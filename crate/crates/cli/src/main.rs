//! Command-line surface over the allocation toolkit. All commands read and
//! write JSON documents: results go to standard output, diagnostics to
//! standard error. Exit codes: 0 success, 1 domain failure (still a JSON
//! payload on stdout), 2 usage or parse error.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use propalloc::{allocation, flow, instance, scaling, structure, twocap};
use propalloc::{Instance, RankedStrategy, TwoCapInstance, WeightVector};

#[derive(Parser)]
#[command(name = "propalloc", version, about = "Bipartite allocation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance and print it (optionally also to a file).
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        /// Side size for complete / cycle / random-mc / twocap-powers.
        #[arg(long)]
        n: Option<usize>,
        /// Extra random chords for random-mc.
        #[arg(long, default_value_t = 0)]
        extra_edges: usize,
        /// RNG seed for random-mc.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the document to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximum assignment value and whether it is perfect.
    Opt { instance: String },
    /// Matching-covered verdict with tight-set witness.
    CheckMc { instance: String },
    /// Scaling weights for a matching-covered instance.
    Weights {
        instance: String,
        #[arg(long, default_value_t = scaling::DEFAULT_TOLERANCE)]
        tol: f64,
        #[arg(long, default_value_t = scaling::DEFAULT_MAX_ITERATIONS)]
        max_iter: u64,
    },
    /// Rank-and-weight strategy that fills every capacity exactly.
    Strategy { instance: String },
    /// Allocate supply under a strategy file or a weights file.
    #[command(group(ArgGroup::new("how").required(true).args(["strategy", "weights"])))]
    Allocate {
        instance: String,
        /// Strategy JSON as produced by `strategy`.
        #[arg(long)]
        strategy: Option<String>,
        /// Weights JSON (or the literal `uniform`).
        #[arg(long)]
        weights: Option<String>,
    },
    /// Value of a stored allocation against an instance.
    Eval {
        instance: String,
        allocation: String,
    },
    /// Violation factors of proportional allocation on a two-capacity
    /// instance, over a weight batch.
    TwocapViolation {
        instance: String,
        /// Single weights JSON instead of the seeded batch.
        #[arg(long)]
        weights: Option<String>,
        /// Random vectors to draw when no weights file is given.
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Path3,
    Complete,
    Cycle,
    RandomMc,
    TwocapPowers,
}

enum CliError {
    /// Exit 2: bad arguments or malformed input.
    Usage(String),
    /// Exit 1: valid input, negative domain answer; payload goes to stdout.
    Domain(serde_json::Value),
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Usage(format!("parse error: {e}"))
    }
}

fn read_input(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| CliError::Usage(format!("cannot read stdin: {e}")))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {path}: {e}")))
    }
}

fn load_instance(path: &str) -> Result<Instance, CliError> {
    Ok(instance::parse(&read_input(path)?)?)
}

fn load_twocap(path: &str) -> Result<TwoCapInstance, CliError> {
    Ok(twocap::parse(&read_input(path)?)?)
}

fn domain(value: serde_json::Value) -> CliError {
    CliError::Domain(value)
}

#[derive(Serialize)]
struct OptOut {
    opt: i64,
    perfect: bool,
}

#[derive(Serialize)]
struct CheckMcOut {
    matching_covered: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    tight_set: Option<Vec<String>>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    disconnected: bool,
}

#[derive(Serialize)]
struct WeightsOut {
    weights: BTreeMap<String, f64>,
    iterations: u64,
    residual: f64,
}

#[derive(Serialize, Deserialize)]
struct StrategyDoc {
    ranks: BTreeMap<String, usize>,
    weights: BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct AllocationOut {
    x: Vec<(String, String, f64)>,
    value: f64,
}

#[derive(Deserialize)]
struct AllocationIn {
    x: Vec<(String, String, f64)>,
    #[serde(default)]
    #[allow(dead_code)]
    value: Option<f64>,
}

#[derive(Serialize)]
struct EvalOut {
    value: f64,
    opt: i64,
}

#[derive(Serialize)]
struct TwocapOut {
    min_factor_observed: f64,
    lower_bound: f64,
    bound_holds: bool,
}

/// Weight documents: either a bare id-to-weight map or an object with a
/// `weights` field (the shape `weights` itself prints).
fn load_weight_map(path: &str) -> Result<BTreeMap<String, f64>, CliError> {
    let value: serde_json::Value = serde_json::from_str(&read_input(path)?)?;
    let map = value.get("weights").unwrap_or(&value);
    Ok(serde_json::from_value(map.clone())?)
}

fn weights_for_instance(
    map: &BTreeMap<String, f64>,
    ids: Vec<String>,
) -> Result<WeightVector, CliError> {
    if map.len() != ids.len() {
        return Err(CliError::Usage(format!(
            "weights cover {} ids, instance has {}",
            map.len(),
            ids.len()
        )));
    }
    let mut alpha = Vec::with_capacity(map.len());
    for id in ids {
        match map.get(&id) {
            Some(&w) => alpha.push(w),
            None => return Err(CliError::Usage(format!("missing weight for {id:?}"))),
        }
    }
    WeightVector::new(alpha).map_err(|e| CliError::Usage(e.to_string()))
}

fn right_weight_map(inst: &Instance, weights: &WeightVector) -> BTreeMap<String, f64> {
    inst.right()
        .iter()
        .zip(weights.values())
        .map(|(node, &w)| (node.id.clone(), w))
        .collect()
}

fn allocation_out(inst: &Instance, alloc: &allocation::Allocation) -> AllocationOut {
    AllocationOut {
        x: inst
            .edges()
            .iter()
            .zip(&alloc.x)
            .map(|((l, r), &amount)| (l.clone(), r.clone(), amount))
            .collect(),
        value: allocation::value(inst, alloc),
    }
}

fn cmd_gen(
    kind: GenKind,
    n: Option<usize>,
    extra_edges: usize,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<String, CliError> {
    let need_n = || n.ok_or_else(|| CliError::Usage("--n is required for this kind".into()));
    let text = match kind {
        GenKind::Path3 => instance::gen_path3().to_json(),
        GenKind::Complete => instance::gen_complete(need_n()?)
            .map_err(|e| CliError::Usage(e.to_string()))?
            .to_json(),
        GenKind::Cycle => instance::gen_even_cycle(need_n()?)
            .map_err(|e| CliError::Usage(e.to_string()))?
            .to_json(),
        GenKind::RandomMc => instance::gen_random_mc(need_n()?, extra_edges, seed)
            .map_err(|e| CliError::Usage(e.to_string()))?
            .to_json(),
        GenKind::TwocapPowers => twocap::gen_powers(need_n()?)
            .map_err(|e| CliError::Usage(e.to_string()))?
            .to_json(),
    };
    if let Some(path) = out {
        std::fs::write(&path, format!("{text}\n"))
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(text)
}

fn cmd_opt(path: &str) -> Result<String, CliError> {
    let inst = load_instance(path)?;
    let res = flow::max_matching_value(&inst);
    let perfect =
        inst.total_supply() == inst.total_capacity() && res.value == inst.total_supply();
    Ok(serde_json::to_string(&OptOut {
        opt: res.value,
        perfect,
    })?)
}

fn cmd_check_mc(path: &str) -> Result<String, CliError> {
    let inst = load_instance(path)?;
    let verdict = structure::is_matching_covered(&inst)
        .map_err(|e| domain(serde_json::json!({ "error": e.to_string() })))?;
    Ok(serde_json::to_string(&CheckMcOut {
        matching_covered: verdict.covered,
        tight_set: verdict.tight_set,
        disconnected: verdict.disconnected,
    })?)
}

fn cmd_weights(path: &str, tol: f64, max_iter: u64) -> Result<String, CliError> {
    let inst = load_instance(path)?;
    let verdict = structure::is_matching_covered(&inst)
        .map_err(|e| domain(serde_json::json!({ "error": e.to_string() })))?;
    if !verdict.covered {
        let mut payload = serde_json::json!({ "error": "not matching covered" });
        if let Some(tight) = verdict.tight_set {
            payload["tight_set"] = serde_json::json!(tight);
        }
        if verdict.disconnected {
            payload["disconnected"] = serde_json::json!(true);
        }
        return Err(domain(payload));
    }
    let result = scaling::sinkhorn(&inst, tol, max_iter)
        .map_err(|e| domain(serde_json::json!({ "error": e.to_string() })))?;
    let weights = scaling::weights_from_scaling(&result)
        .map_err(|e| domain(serde_json::json!({ "error": e.to_string() })))?;
    Ok(serde_json::to_string(&WeightsOut {
        weights: right_weight_map(&inst, &weights),
        iterations: result.iterations,
        residual: result.residual,
    })?)
}

fn cmd_strategy(path: &str) -> Result<String, CliError> {
    let inst = load_instance(path)?;
    let strategy = allocation::perfect_strategy(&inst)
        .map_err(|e| domain(serde_json::json!({ "error": e.to_string() })))?;
    let ranks = inst
        .right()
        .iter()
        .zip(&strategy.ranks)
        .map(|(node, &r)| (node.id.clone(), r))
        .collect();
    Ok(serde_json::to_string(&StrategyDoc {
        ranks,
        weights: right_weight_map(&inst, &strategy.weights),
    })?)
}

fn cmd_allocate(
    path: &str,
    strategy: Option<&str>,
    weights: Option<&str>,
) -> Result<String, CliError> {
    let inst = load_instance(path)?;
    let right_ids: Vec<String> = inst.right().iter().map(|n| n.id.clone()).collect();
    let alloc = if let Some(strategy_path) = strategy {
        let doc: StrategyDoc = serde_json::from_str(&read_input(strategy_path)?)?;
        let weights = weights_for_instance(&doc.weights, right_ids.clone())?;
        if doc.ranks.len() != inst.n_right() {
            return Err(CliError::Usage(format!(
                "ranks cover {} ids, instance has {}",
                doc.ranks.len(),
                inst.n_right()
            )));
        }
        let mut ranks = Vec::with_capacity(inst.n_right());
        for id in &right_ids {
            match doc.ranks.get(id) {
                Some(&r) => ranks.push(r),
                None => return Err(CliError::Usage(format!("missing rank for {id:?}"))),
            }
        }
        allocation::ranked(&inst, &RankedStrategy { ranks, weights })
            .map_err(|e| domain(serde_json::json!({ "error": e.to_string() })))?
    } else {
        let spec = weights.expect("clap group guarantees one source");
        let weights = if spec == "uniform" {
            WeightVector::uniform(inst.n_right())
        } else {
            weights_for_instance(&load_weight_map(spec)?, right_ids)?
        };
        allocation::proportional(&inst, &weights)
            .map_err(|e| domain(serde_json::json!({ "error": e.to_string() })))?
    };
    Ok(serde_json::to_string(&allocation_out(&inst, &alloc))?)
}

fn cmd_eval(instance_path: &str, allocation_path: &str) -> Result<String, CliError> {
    let inst = load_instance(instance_path)?;
    let doc: AllocationIn = serde_json::from_str(&read_input(allocation_path)?)?;
    let mut x = vec![0.0; inst.n_edges()];
    for (l, r, amount) in &doc.x {
        match inst.edge_index_of(l, r) {
            Some(e) => x[e] = *amount,
            None => {
                return Err(CliError::Usage(format!(
                    "allocation uses unknown edge ({l:?}, {r:?})"
                )))
            }
        }
    }
    let alloc = allocation::Allocation { x };
    Ok(serde_json::to_string(&EvalOut {
        value: allocation::value(&inst, &alloc),
        opt: flow::max_matching_value(&inst).value,
    })?)
}

fn cmd_twocap_violation(
    path: &str,
    weights: Option<&str>,
    samples: u64,
    seed: u64,
) -> Result<String, CliError> {
    let inst = load_twocap(path)?;
    let n = inst.n_bins();
    let bound = twocap::lower_bound(n)
        .map_err(|e| domain(serde_json::json!({ "error": e.to_string() })))?;
    let batch: Vec<WeightVector> = if let Some(weights_path) = weights {
        let map = load_weight_map(weights_path)?;
        vec![weights_for_instance(
            &map,
            inst.bins().iter().map(|b| b.id.clone()).collect(),
        )?]
    } else {
        let mut batch = vec![
            WeightVector::uniform(n),
            WeightVector::new(inst.bins().iter().map(|b| b.weight_cap).collect())
                .expect("capacities are positive"),
            WeightVector::new(inst.bins().iter().map(|b| b.volume_cap).collect())
                .expect("capacities are positive"),
        ];
        batch.extend(twocap::seeded_weight_vectors(n, samples, seed));
        batch
    };
    let mut min_factor = f64::INFINITY;
    for wv in &batch {
        let report = twocap::violation_factor(&inst, wv)
            .map_err(|e| domain(serde_json::json!({ "error": e.to_string() })))?;
        min_factor = min_factor.min(report.factor);
    }
    Ok(serde_json::to_string(&TwocapOut {
        min_factor_observed: min_factor,
        lower_bound: bound,
        bound_holds: min_factor >= bound,
    })?)
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Gen {
            kind,
            n,
            extra_edges,
            seed,
            out,
        } => cmd_gen(kind, n, extra_edges, seed, out),
        Command::Opt { instance } => cmd_opt(&instance),
        Command::CheckMc { instance } => cmd_check_mc(&instance),
        Command::Weights {
            instance,
            tol,
            max_iter,
        } => cmd_weights(&instance, tol, max_iter),
        Command::Strategy { instance } => cmd_strategy(&instance),
        Command::Allocate {
            instance,
            strategy,
            weights,
        } => cmd_allocate(&instance, strategy.as_deref(), weights.as_deref()),
        Command::Eval {
            instance,
            allocation,
        } => cmd_eval(&instance, &allocation),
        Command::TwocapViolation {
            instance,
            weights,
            samples,
            seed,
        } => cmd_twocap_violation(&instance, weights.as_deref(), samples, seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(json) => {
            println!("{json}");
            ExitCode::SUCCESS
        }
        Err(CliError::Domain(payload)) => {
            println!("{payload}");
            eprintln!("domain failure: {payload}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
