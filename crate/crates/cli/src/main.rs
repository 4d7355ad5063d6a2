//! `dihg`: command-line front-end for the d-interval hypergraph tools.
//!
//! Every command prints one JSON report (to stdout or `--output`) and a short
//! human summary on stderr. Exit codes: 0 success, 2 verified negative
//! (premise fails, nothing found, failed family check), 1 error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use dihg_core::covering::{cover_bound, matching_bound};
use dihg_core::families::{self, FamilySpec};
use dihg_core::invariants::{atomize, exact_invariant, lp_fractional, Fractional, Invariant};
use dihg_core::io::{hypergraph_to_value, read_hypergraph};
use dihg_core::{
    balanced_point_search, exhaustive_partition_search, premise_check, theorem4_pipeline, theorem5_pipeline,
    BalanceConfig, CoverCertificate, DIntervalHypergraph, Error, PipelineOptions, PredicateMode, Rational,
    SearchLimits,
};

#[derive(Parser, Debug)]
#[command(name = "dihg", version, about = "Covering and matching certificates for d-interval hypergraphs")]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true, env = "DIHG_THREADS")]
    threads: Option<usize>,

    /// Write the JSON report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact ν, τ, ι, ρ with witnesses, optionally the fractional values.
    Invariants {
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long)]
        fractional: bool,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Decide whether every d×n-partition has a d-cell satisfying the mode.
    Premise {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Exact search for a partition witnessing the mode.
    FindPartition {
        #[command(flatten)]
        target: Target,
        /// For `contained`, minimize the number of distinct witness edges.
        #[arg(long)]
        minimize: bool,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Search for a point whose layer sums are balanced.
    Balance {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        balance: BalanceArgs,
    },
    /// Edge cover certificate from the contained-in premise.
    Cover {
        #[command(flatten)]
        instance: Instance,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Matching certificate from the contains premise.
    Match {
        #[command(flatten)]
        instance: Instance,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Generate a named family (as a hypergraph file) or verify its claims.
    Family {
        #[arg(value_enum)]
        name: FamilyName,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        /// Parts per copy for `dense-grid`.
        #[arg(long)]
        parts: Option<usize>,
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        limits: LimitArgs,
    },
}

#[derive(Args, Debug, Serialize)]
struct Instance {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    n: usize,
}

#[derive(Args, Debug, Serialize)]
struct Target {
    #[command(flatten)]
    #[serde(flatten)]
    instance: Instance,
    /// `contains` or `contained`.
    #[arg(long, short)]
    mode: PredicateMode,
}

#[derive(Args, Debug, Clone, Serialize)]
struct LimitArgs {
    /// Node budget for the exact branch and bound searches.
    #[arg(long, default_value_t = SearchLimits::default().max_nodes)]
    max_nodes: u64,
    /// Cap on cut configurations per copy in partition searches.
    #[arg(long, default_value_t = SearchLimits::default().max_configurations)]
    max_configurations: usize,
}

impl LimitArgs {
    fn limits(&self) -> SearchLimits {
        SearchLimits {
            max_nodes: self.max_nodes,
            max_configurations: self.max_configurations,
            ..SearchLimits::default()
        }
    }
}

#[derive(Args, Debug, Clone)]
struct BalanceArgs {
    /// Initial ε, as `p/q`.
    #[arg(long, default_value = "1/8")]
    eps: Rational,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Objective evaluations per start.
    #[arg(long, default_value_t = 100_000)]
    max_iters: usize,
    #[arg(long, default_value_t = 16)]
    starts: usize,
}

impl BalanceArgs {
    fn config(&self) -> Result<BalanceConfig, Error> {
        if !self.eps.is_positive() {
            return Err(Error::Invalid { field: "--eps".into(), message: "must be positive".into() });
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(Error::Invalid { field: "--tol".into(), message: "must be nonnegative".into() });
        }
        Ok(BalanceConfig {
            epsilon: self.eps.clone(),
            tol: self.tol,
            seed: self.seed,
            max_iters: self.max_iters,
            starts: self.starts.max(1),
            ..BalanceConfig::default()
        })
    }
}

#[derive(Args, Debug, Clone)]
struct PipelineArgs {
    #[command(flatten)]
    balance: BalanceArgs,
    /// Levels of the ε-halving loop.
    #[arg(long, default_value_t = 12)]
    k_max: usize,
    /// Fail instead of running the exact search when the numeric route fails.
    #[arg(long)]
    no_fallback: bool,
    #[command(flatten)]
    limits: LimitArgs,
}

impl PipelineArgs {
    fn options(&self) -> Result<PipelineOptions, Error> {
        Ok(PipelineOptions {
            balance: self.balance.config()?,
            k_max: self.k_max,
            limits: self.limits.limits(),
            allow_fallback: !self.no_fallback,
        })
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FamilyName {
    Obs3,
    Example1,
    Example2,
    DenseGrid,
}

impl FamilyName {
    fn spec(self, d: Option<usize>, n: Option<usize>, parts: Option<usize>) -> FamilySpec {
        match self {
            FamilyName::Obs3 => FamilySpec::Obs3 { d: d.unwrap_or(2), n: n.unwrap_or(1) },
            FamilyName::Example1 => FamilySpec::Example1 { n: n.unwrap_or(2) },
            FamilyName::Example2 => FamilySpec::Example2,
            FamilyName::DenseGrid => FamilySpec::DenseGrid { d: d.unwrap_or(2), parts: parts.unwrap_or(8) },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Status {
    Ok,
    Negative,
    Error,
}

impl Status {
    fn code(self) -> ExitCode {
        match self {
            Status::Ok => ExitCode::SUCCESS,
            Status::Negative => ExitCode::from(2),
            Status::Error => ExitCode::from(1),
        }
    }
}

/// What a command produced: the report body, its status and a one-line
/// summary for stderr. `raw` bodies are written without the envelope.
struct Outcome {
    status: Status,
    summary: String,
    body: Value,
    raw: bool,
}

impl Outcome {
    fn new(status: Status, summary: String, body: Value) -> Self {
        Outcome { status, summary, body, raw: false }
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn load(path: &Path) -> Result<DIntervalHypergraph, Error> {
    read_hypergraph(path).map_err(|e| match e {
        Error::Io(io) => Error::Invalid { field: path.display().to_string(), message: io.to_string() },
        other => other,
    })
}

fn describe(h: &DIntervalHypergraph) -> Value {
    json!({ "d": h.d(), "edges": h.len() })
}

fn invariants(input: &Path, fractional: bool, limits: &SearchLimits) -> Result<Outcome, Error> {
    let h = load(input)?;
    let atoms = atomize(&h);
    let f = &atoms.hypergraph;
    let mut integer = serde_json::Map::new();
    let mut summary = Vec::new();
    for which in Invariant::ALL {
        let res = exact_invariant(f, which, limits)?;
        // ν and ρ are witnessed by edges, τ and ι by points of atoms.
        let witness = match which {
            Invariant::Nu | Invariant::Rho => json!({ "edges": res.witness }),
            Invariant::Tau | Invariant::Iota => {
                let points: Vec<Value> = res
                    .witness
                    .iter()
                    .map(|&a| {
                        let (copy, at) = atoms.atoms[a].representative();
                        json!({ "atom": a, "copy": copy + 1, "point": at })
                    })
                    .collect();
                json!({ "points": points })
            }
        };
        summary.push(format!("{which}={}", res.value));
        integer.insert(which.to_string(), json!({ "value": res.value, "witness": witness }));
    }
    let mut body = json!({
        "hypergraph": describe(&h),
        "atoms": atoms.atoms,
        "integer": integer,
    });
    if fractional {
        let mut map = serde_json::Map::new();
        for kind in Fractional::ALL {
            let lp = lp_fractional(f, kind);
            let name = to_value(&kind).as_str().expect("unit variant").to_string();
            summary.push(format!("{name}={}", lp.value.as_ref().map_or("infinite".into(), |v| v.to_string())));
            map.insert(name, json!({ "value": lp.value, "weights": lp.primal }));
        }
        body["fractional"] = Value::Object(map);
    }
    Ok(Outcome::new(Status::Ok, summary.join(" "), body))
}

fn premise(target: &Target, limits: &SearchLimits) -> Result<Outcome, Error> {
    let h = load(&target.instance.input)?;
    let out = premise_check(&h, target.instance.n, target.mode, limits)?;
    let (status, summary) = match &out.counterexample {
        None => (Status::Ok, format!("premise holds for n={} ({})", target.instance.n, target.mode)),
        Some(c) => (Status::Negative, format!("premise fails; counterexample cuts {c}")),
    };
    Ok(Outcome::new(status, summary, json!({ "hypergraph": describe(&h), "premise": out })))
}

fn find_partition(target: &Target, minimize: bool, limits: &SearchLimits) -> Result<Outcome, Error> {
    let h = load(&target.instance.input)?;
    let found = exhaustive_partition_search(&h, target.instance.n, target.mode, minimize, limits)?;
    if let Some(cert) = &found {
        cert.verify(&h)?;
    }
    let (status, summary) = match &found {
        Some(c) => (
            Status::Ok,
            format!("{} d-cells witnessed by {} edges", c.assignment.len(), c.used_edges.len()),
        ),
        None => (Status::Negative, "no partition qualifies".to_string()),
    };
    Ok(Outcome::new(status, summary, json!({ "hypergraph": describe(&h), "certificate": found })))
}

fn balance(target: &Target, args: &BalanceArgs) -> Result<Outcome, Error> {
    let h = load(&target.instance.input)?;
    let config = args.config()?;
    let p = balanced_point_search(&h, target.instance.n, target.mode, &config, None)?;
    let summary = format!(
        "spread {} ({}converged) after {} evaluations",
        p.spread,
        if p.converged { "" } else { "not " },
        p.evaluations
    );
    // A point that did not balance is an inconclusive numeric failure.
    let status = if p.converged { Status::Ok } else { Status::Error };
    Ok(Outcome::new(status, summary, json!({ "hypergraph": describe(&h), "point": p })))
}

fn pipeline(instance: &Instance, args: &PipelineArgs, mode: PredicateMode) -> Result<Outcome, Error> {
    let h = load(&instance.input)?;
    let options = args.options()?;
    let result = match mode {
        PredicateMode::Contains => theorem4_pipeline(&h, instance.n, &options),
        PredicateMode::ContainedIn => theorem5_pipeline(&h, instance.n, &options),
    };
    let cert: CoverCertificate = match result {
        Ok(c) => c,
        Err(Error::PremiseFails { counterexample }) => {
            let summary = format!("premise fails; counterexample cuts {counterexample}");
            let body = json!({
                "hypergraph": describe(&h),
                "premise": { "holds": false, "counterexample": counterexample },
            });
            return Ok(Outcome::new(Status::Negative, summary, body));
        }
        Err(e) => return Err(e),
    };
    cert.verify(&h)?;
    let summary = match mode {
        PredicateMode::Contains => format!(
            "{} disjoint d-cells (bound {}), route {}",
            cert.chosen().len(),
            matching_bound(h.d(), instance.n),
            cert.route
        ),
        PredicateMode::ContainedIn => format!(
            "|H0| = {} (bound {}), route {}",
            cert.h0().len(),
            cover_bound(h.d(), instance.n),
            cert.route
        ),
    };
    Ok(Outcome::new(Status::Ok, summary, json!({ "hypergraph": describe(&h), "certificate": cert })))
}

fn family(spec: FamilySpec, verify: bool, limits: &SearchLimits) -> Result<Outcome, Error> {
    if !verify {
        let h = families::generate(&spec)?;
        let summary = format!("{spec}: {} edges", h.len());
        return Ok(Outcome { status: Status::Ok, summary, body: hypergraph_to_value(&h), raw: true });
    }
    let report = families::verify(&spec, limits)?;
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    let summary = format!("{spec}: {} checks, {failed} failed", report.checks.len());
    let status = if report.passed { Status::Ok } else { Status::Negative };
    Ok(Outcome::new(status, summary, json!({ "report": report })))
}

/// The command name and its configuration as echoed in the report.
fn echo(command: &Command) -> (&'static str, Value) {
    match command {
        Command::Invariants { input, fractional, limits } => {
            ("invariants", json!({ "input": input, "fractional": fractional, "limits": limits }))
        }
        Command::Premise { target, limits } => ("premise", json!({ "target": target, "limits": limits })),
        Command::FindPartition { target, minimize, limits } => (
            "find-partition",
            json!({ "target": target, "minimize": minimize, "limits": limits }),
        ),
        Command::Balance { target, balance } => (
            "balance",
            json!({ "target": target, "balance": balance.config().ok() }),
        ),
        Command::Cover { instance, pipeline } => ("cover", pipeline_echo(instance, pipeline)),
        Command::Match { instance, pipeline } => ("match", pipeline_echo(instance, pipeline)),
        Command::Family { name, d, n, parts, verify, limits } => (
            "family",
            json!({ "family": name.spec(*d, *n, *parts), "verify": verify, "limits": limits }),
        ),
    }
}

fn pipeline_echo(instance: &Instance, args: &PipelineArgs) -> Value {
    json!({ "instance": instance, "options": args.options().ok(), "limits": args.limits })
}

fn run(command: &Command) -> Result<Outcome, Error> {
    match command {
        Command::Invariants { input, fractional, limits } => invariants(input, *fractional, &limits.limits()),
        Command::Premise { target, limits } => premise(target, &limits.limits()),
        Command::FindPartition { target, minimize, limits } => find_partition(target, *minimize, &limits.limits()),
        Command::Balance { target, balance: args } => balance(target, args),
        Command::Cover { instance, pipeline: args } => pipeline(instance, args, PredicateMode::ContainedIn),
        Command::Match { instance, pipeline: args } => pipeline(instance, args, PredicateMode::Contains),
        Command::Family { name, d, n, parts, verify, limits } => {
            family(name.spec(*d, *n, *parts), *verify, &limits.limits())
        }
    }
}

fn error_body(e: &Error) -> Value {
    let mut body = json!({ "message": e.to_string() });
    match e {
        Error::Parse { line, column, .. } => {
            body["line"] = json!(line);
            body["column"] = json!(column);
        }
        Error::Invalid { field, .. } => body["field"] = json!(field),
        _ => {}
    }
    body
}

fn emit(text: &str, output: Option<&Path>) -> std::io::Result<()> {
    match output {
        Some(path) => fs::write(path, text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("dihg: cannot configure {threads} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let start = Instant::now();
    let (name, config) = echo(&cli.command);
    let outcome = run(&cli.command).unwrap_or_else(|e| Outcome::new(Status::Error, e.to_string(), json!({ "error": error_body(&e) })));
    let document = if outcome.raw {
        outcome.body
    } else {
        let mut doc = json!({
            "tool": "dihg",
            "version": env!("CARGO_PKG_VERSION"),
            "command": name,
            "config": config,
            "status": outcome.status,
        });
        if let (Value::Object(doc), Value::Object(body)) = (&mut doc, outcome.body) {
            doc.extend(body);
        }
        doc
    };
    let text = serde_json::to_string_pretty(&document).expect("JSON values serialize");
    if let Err(e) = emit(&text, cli.output.as_deref()) {
        eprintln!("dihg: cannot write report: {e}");
        return ExitCode::from(1);
    }
    eprintln!("dihg {name}: {} [{:.2?}]", outcome.summary, start.elapsed());
    outcome.status.code()
}
