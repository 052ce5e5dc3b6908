//! Batch front end: load problem bundles or arrangement files, run
//! verification or region enumeration, and emit JSON reports (CSV for bench).
//!
//! Exit codes: 0 = SAT / success, 1 = UNSAT, 2 = input or usage error,
//! 3 = internal invariant violation.

use clap::{Args, Parser, Subcommand};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use polyverify::arrangement::{region_count_bound, Arrangement, TraverseOptions};
use polyverify::error::Error;
use polyverify::formats::{ArrangementJson, ProblemJson, VerdictJson};
use polyverify::geometry::{LinearFunctional, Polytope, Tolerances};
use polyverify::network::{Layer, ReluNetwork, TllComponent, TllNetwork};
use polyverify::oracle;
use polyverify::verifier::{
    verify, ProblemNetwork, Status, VerificationProblem, VerifyOptions,
};
use polyverify::{geometry::AffineFunction, Context};

const EXIT_SAT: u8 = 0;
const EXIT_UNSAT: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_INVARIANT: u8 = 3;

#[derive(Parser)]
#[command(name = "polyverify", version, about = "Polytope-to-polytope verification of shallow and TLL ReLU networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the network maps the input polytope into the output polytope.
    Verify(VerifyArgs),
    /// Enumerate the regions of a hyperplane arrangement.
    Enumerate(EnumerateArgs),
    /// Random-instance scaling benchmark; emits CSV.
    Bench(BenchArgs),
    /// Cross-check the verifier against the brute-force oracle and sampler.
    Check(CheckArgs),
}

#[derive(Args, Clone)]
struct ProblemInput {
    /// Problem bundle (network + both polytopes in one JSON file).
    #[arg(long, conflicts_with_all = ["network", "input_polytope", "output_polytope"])]
    problem: Option<PathBuf>,
    /// Network JSON file (use with --input-polytope/--output-polytope).
    #[arg(long, requires_all = ["input_polytope", "output_polytope"])]
    network: Option<PathBuf>,
    #[arg(long)]
    input_polytope: Option<PathBuf>,
    #[arg(long)]
    output_polytope: Option<PathBuf>,
}

#[derive(Args, Clone, Copy)]
struct ToleranceArgs {
    /// Zero-gradient rejection threshold.
    #[arg(long)]
    eps_zero: Option<f64>,
    /// Feasibility tolerance.
    #[arg(long)]
    eps_feas: Option<f64>,
    /// Strict-interior margin for region witnesses.
    #[arg(long)]
    eps_int: Option<f64>,
    /// LP objective tolerance.
    #[arg(long)]
    eps_obj: Option<f64>,
}

impl ToleranceArgs {
    fn apply(&self) -> Tolerances {
        let mut tol = Tolerances::default();
        if let Some(v) = self.eps_zero {
            tol.eps_zero = v;
        }
        if let Some(v) = self.eps_feas {
            tol.eps_feas = v;
        }
        if let Some(v) = self.eps_int {
            tol.eps_int = v;
        }
        if let Some(v) = self.eps_obj {
            tol.eps_obj = v;
        }
        tol
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: ProblemInput,
    /// Collect every violating (region, constraint) pair instead of stopping early.
    #[arg(long)]
    exhaustive: bool,
    /// Also run the brute-force oracle and report agreement.
    #[arg(long)]
    check: bool,
    /// Sampling trials used with --check.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Worker threads (0 = all cores, 1 = serial).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Seed for check-mode sampling; falls back to POLYVERIFY_SEED.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    tol: ToleranceArgs,
    /// Also write the report to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EnumerateArgs {
    /// Arrangement JSON file.
    #[arg(long)]
    arrangement: PathBuf,
    /// Include one encoding + witness entry per region.
    #[arg(long)]
    trace: bool,
    /// Compare against brute-force enumeration.
    #[arg(long)]
    check: bool,
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[command(flatten)]
    tol: ToleranceArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Architecture to scale: "shallow" or "tll".
    #[arg(long)]
    arch: String,
    /// Comma-separated sizes (hidden neurons for shallow, local functions for TLL).
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    /// Input dimension.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Network outputs.
    #[arg(long, default_value_t = 1)]
    outputs: usize,
    /// Selector sets per TLL component.
    #[arg(long, default_value_t = 2)]
    terms: usize,
    /// Instances per size.
    #[arg(long, default_value_t = 1)]
    seeds: usize,
    /// Base seed; falls back to POLYVERIFY_SEED.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[command(flatten)]
    tol: ToleranceArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    input: ProblemInput,
    /// Sampling falsification trials.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[command(flatten)]
    tol: ToleranceArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Verify(args) => cmd_verify(args),
        Command::Enumerate(args) => cmd_enumerate(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Check(args) => cmd_check(args),
    };
    match code {
        Ok(c) => ExitCode::from(c),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(classify(&e))
        }
    }
}

fn classify(e: &Error) -> u8 {
    match e {
        Error::Invariant(_) | Error::IterationLimit { .. } => EXIT_INVARIANT,
        _ => EXIT_INPUT,
    }
}

fn seed_or_env(cli_seed: Option<u64>, default: u64) -> u64 {
    cli_seed
        .or_else(|| {
            std::env::var("POLYVERIFY_SEED")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or(default)
}

fn init_threads(threads: usize) {
    if threads > 0 {
        // Ignore failure: the global pool can only be set once.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        Error::Parse(format!(
            "{}: line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn load_problem(input: &ProblemInput, ctx: &Context) -> Result<VerificationProblem, Error> {
    match (&input.problem, &input.network) {
        (Some(bundle), None) => {
            let parsed: ProblemJson = read_json(bundle)?;
            parsed.to_problem(ctx)
        }
        (None, Some(net_path)) => {
            let network: polyverify::formats::NetworkJson = read_json(net_path)?;
            let px: polyverify::formats::PolytopeJson =
                read_json(input.input_polytope.as_ref().expect("clap enforces"))?;
            let py: polyverify::formats::PolytopeJson =
                read_json(input.output_polytope.as_ref().expect("clap enforces"))?;
            VerificationProblem::new(
                network.to_problem_network()?,
                px.to_polytope(&ctx.tol)?,
                py.to_polytope(&ctx.tol)?,
                ctx,
            )
        }
        _ => Err(Error::Parse(
            "provide exactly one input mode: --problem, or --network with both polytopes".into(),
        )),
    }
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), Error> {
    println!("{text}");
    if let Some(path) = out {
        std::fs::write(path, format!("{text}\n"))
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct VerifyReport {
    #[serde(flatten)]
    verdict: VerdictJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_agreed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_details: Option<String>,
}

fn cmd_verify(args: VerifyArgs) -> Result<u8, Error> {
    init_threads(args.threads);
    let ctx = Context::new(args.tol.apply());
    let problem = load_problem(&args.input, &ctx)?;
    let opts = VerifyOptions {
        exhaustive: args.exhaustive,
        parallel: args.threads != 1,
    };
    let verdict = verify(&problem, &opts, &ctx)?;
    let mut report = VerifyReport {
        verdict: VerdictJson::from_verdict(&verdict, &ctx.tol, args.exhaustive),
        oracle_agreed: None,
        oracle_details: None,
    };
    let mut oracle_disagreed = false;
    if args.check {
        let seed = seed_or_env(args.seed, oracle::DEFAULT_FALSIFY_SEED);
        let oracle_report = oracle::cross_check_problem(&problem, args.trials, seed, &ctx)?;
        oracle_disagreed = !oracle_report.agreed;
        report.oracle_agreed = Some(oracle_report.agreed);
        if !oracle_report.agreed {
            report.oracle_details = Some(oracle_report.details);
        }
    }
    emit(&serde_json::to_string_pretty(&report).unwrap(), &args.out)?;
    if oracle_disagreed {
        return Ok(EXIT_INVARIANT);
    }
    Ok(match verdict.status {
        Status::Sat => EXIT_SAT,
        Status::Unsat => EXIT_UNSAT,
    })
}

#[derive(Serialize)]
struct TraceEntry {
    encoding: String,
    witness: Vec<f64>,
}

#[derive(Serialize)]
struct EnumerateReport {
    dim: usize,
    hyperplanes: usize,
    regions: usize,
    per_level: Vec<usize>,
    bound: u128,
    wall_time_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    agreed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    details: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    trace: Vec<TraceEntry>,
}

fn cmd_enumerate(args: EnumerateArgs) -> Result<u8, Error> {
    init_threads(args.threads);
    let ctx = Context::new(args.tol.apply());
    let parsed: ArrangementJson = read_json(&args.arrangement)?;
    let functionals = parsed.to_functionals(&ctx.tol)?;
    let arrangement = Arrangement::build(functionals, &ctx)?;
    let started = std::time::Instant::now();
    let mut trace = Vec::new();
    let opts = TraverseOptions {
        parallel: args.threads != 1,
    };
    let summary = arrangement.visit_regions(&ctx, &opts, |geom| {
        if args.trace {
            trace.push(TraceEntry {
                encoding: geom.encoding.to_hex(),
                witness: geom.witness.to_vec(),
            });
        }
        ControlFlow::Continue(())
    })?;
    let bound = region_count_bound(arrangement.len(), arrangement.dim());
    if summary.regions as u128 > bound {
        return Err(Error::Invariant(format!(
            "{} regions exceed the combinatorial bound {bound}",
            summary.regions
        )));
    }
    let mut report = EnumerateReport {
        dim: arrangement.dim(),
        hyperplanes: arrangement.len(),
        regions: summary.regions,
        per_level: summary.per_level,
        bound,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
        agreed: None,
        details: None,
        trace,
    };
    let mut disagreed = false;
    if args.check {
        let oracle_report = oracle::compare_enumeration(&arrangement, &ctx)?;
        disagreed = !oracle_report.agreed;
        report.agreed = Some(oracle_report.agreed);
        if !oracle_report.agreed {
            report.details = Some(oracle_report.details);
        }
    }
    emit(&serde_json::to_string_pretty(&report).unwrap(), &args.out)?;
    Ok(if disagreed { EXIT_INVARIANT } else { EXIT_SAT })
}

/// Random instance generators for the scaling benchmark. The input polytope
/// is the unit box, the output polytope a wide box, so runs exercise the full
/// enumeration rather than early exits.
fn bench_shallow(seed: u64, hidden: usize, dim: usize, outputs: usize, ctx: &Context)
    -> Result<VerificationProblem, Error>
{
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let w1 = Array2::from_shape_fn((hidden, dim), |_| rng.sample::<f64, _>(StandardNormal));
    let b1 = Array1::from_shape_fn(hidden, |_| rng.sample::<f64, _>(StandardNormal));
    let w2 = Array2::from_shape_fn((outputs, hidden), |_| rng.sample::<f64, _>(StandardNormal));
    let b2 = Array1::from_shape_fn(outputs, |_| rng.sample::<f64, _>(StandardNormal));
    let net = ReluNetwork::new(vec![Layer::nonlinear(w1, b1)?, Layer::linear(w2, b2)?])?;
    let scale = 10.0 * (hidden as f64) * (dim as f64).sqrt() + 10.0;
    VerificationProblem::new(
        ProblemNetwork::Shallow(net),
        unit_box(dim, ctx)?,
        wide_box(outputs, scale, ctx)?,
        ctx,
    )
}

fn bench_tll(
    seed: u64,
    locals: usize,
    terms: usize,
    dim: usize,
    outputs: usize,
    ctx: &Context,
) -> Result<VerificationProblem, Error> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let components = (0..outputs)
        .map(|_| {
            let w = Array2::from_shape_fn((locals, dim), |_| rng.sample::<f64, _>(StandardNormal));
            let b = Array1::from_shape_fn(locals, |_| rng.sample::<f64, _>(StandardNormal));
            let selectors = (0..terms)
                .map(|_| {
                    let size = rng.gen_range(1..=locals);
                    let mut s: Vec<usize> = (0..locals).collect();
                    for i in (1..s.len()).rev() {
                        s.swap(i, rng.gen_range(0..=i));
                    }
                    s.truncate(size);
                    s
                })
                .collect();
            Ok(TllComponent {
                local: AffineFunction::new(w, b)?,
                selectors,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let scale = 10.0 * (locals as f64) * (dim as f64).sqrt() + 10.0;
    VerificationProblem::new(
        ProblemNetwork::Tll(TllNetwork::new(components)?),
        unit_box(dim, ctx)?,
        wide_box(outputs, scale, ctx)?,
        ctx,
    )
}

fn unit_box(dim: usize, ctx: &Context) -> Result<Polytope, Error> {
    box_polytope(dim, 1.0, ctx)
}

fn wide_box(dim: usize, half_width: f64, ctx: &Context) -> Result<Polytope, Error> {
    box_polytope(dim, half_width, ctx)
}

fn box_polytope(dim: usize, half_width: f64, ctx: &Context) -> Result<Polytope, Error> {
    let mut constraints = Vec::with_capacity(2 * dim);
    for d in 0..dim {
        for sign in [1.0, -1.0] {
            let mut w = vec![0.0; dim];
            w[d] = sign;
            constraints.push(LinearFunctional::from_slice(&w, -half_width, &ctx.tol)?);
        }
    }
    Polytope::new(dim, constraints, &ctx.tol)
}

fn cmd_bench(args: BenchArgs) -> Result<u8, Error> {
    init_threads(args.threads);
    let ctx = Context::new(args.tol.apply());
    if args.sizes.is_empty() {
        return Err(Error::Parse("--sizes must list at least one size".into()));
    }
    let base_seed = seed_or_env(args.seed, 0);
    let mut csv = String::from("arch,size,seed,regions,lp_calls,wall_ms\n");
    for &size in &args.sizes {
        for k in 0..args.seeds.max(1) {
            let seed = base_seed
                .wrapping_add(size as u64)
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .wrapping_add(k as u64);
            let problem = match args.arch.as_str() {
                "shallow" => bench_shallow(seed, size, args.dim, args.outputs, &ctx)?,
                "tll" => bench_tll(seed, size, args.terms, args.dim, args.outputs, &ctx)?,
                other => {
                    return Err(Error::Parse(format!(
                        "unknown arch {other:?}, expected \"shallow\" or \"tll\""
                    )))
                }
            };
            let opts = VerifyOptions {
                exhaustive: false,
                parallel: args.threads != 1,
            };
            let verdict = verify(&problem, &opts, &ctx)?;
            csv.push_str(&format!(
                "{},{},{},{},{},{:.3}\n",
                args.arch,
                size,
                seed,
                verdict.stats.regions_traversed,
                verdict.stats.lp_calls,
                verdict.stats.wall_time_ms
            ));
        }
    }
    print!("{csv}");
    if let Some(path) = &args.out {
        std::fs::write(path, &csv)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    }
    Ok(EXIT_SAT)
}

#[derive(Serialize)]
struct CheckReport {
    agreed: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    details: String,
    verdict: String,
}

fn cmd_check(args: CheckArgs) -> Result<u8, Error> {
    init_threads(args.threads);
    let ctx = Context::new(args.tol.apply());
    let problem = load_problem(&args.input, &ctx)?;
    let seed = seed_or_env(args.seed, oracle::DEFAULT_FALSIFY_SEED);
    let verdict = verify(&problem, &VerifyOptions::default(), &ctx)?;
    let report = oracle::cross_check_problem(&problem, args.trials, seed, &ctx)?;
    let out = CheckReport {
        agreed: report.agreed,
        details: report.details,
        verdict: match verdict.status {
            Status::Sat => "SAT".into(),
            Status::Unsat => "UNSAT".into(),
        },
    };
    println!("{}", serde_json::to_string_pretty(&out).unwrap());
    Ok(if report.agreed {
        EXIT_SAT
    } else {
        EXIT_INVARIANT
    })
}
