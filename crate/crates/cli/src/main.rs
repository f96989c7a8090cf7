mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use proxima_core::{
    check_lemma_cauchy, check_lemma_close, generate_converging_triple, iterate, multi_start_check,
    verify_cyclic, verify_orbital, verify_suzuki, ContractionVerdict, Error as CoreError,
    LemmaVerdict, MultiStartVerdict, Point, SolveOptions,
};

use config::{build_problem, ConfigFile, Problem, EXAMPLE_JSON};
use report::{write_trace_csv, Report};

#[derive(Parser)]
#[command(
    name = "proxima",
    version,
    about = "Locate and certify best proximity points of cyclic maps between two regions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check one contraction inequality over sampled point pairs.
    Verify(VerifyArgs),
    /// Iterate the map from a seed to a best proximity pair.
    Solve(SolveArgs),
    /// Compute the distance between the two regions.
    Dist(DistArgs),
    /// Print an orbit and confirm it alternates sides.
    Orbit(OrbitArgs),
    /// Generate a converging sequence triple and check both lemma forms.
    Lemmas(LemmasArgs),
}

/// Where the problem comes from: exactly one of a built-in name or a JSON
/// file.
#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Built-in problem name (available: example).
    #[arg(long)]
    problem: Option<String>,
    /// Path to a JSON problem description.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    Cyclic,
    Suzuki,
    Orbital,
}

impl ClassArg {
    fn name(self) -> &'static str {
        match self {
            ClassArg::Cyclic => "cyclic",
            ClassArg::Suzuki => "suzuki",
            ClassArg::Orbital => "orbital",
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    source: Source,
    /// Which inequality to test.
    #[arg(long, value_enum)]
    class: ClassArg,
    /// Contraction rate in (0, 1); falls back to options.eta.
    #[arg(long)]
    eta: Option<f64>,
    /// Samples per region side; falls back to options.density.
    #[arg(long)]
    density: Option<usize>,
    /// Orbit truncation depth for the orbital bound; falls back to
    /// options.depth.
    #[arg(long)]
    depth: Option<usize>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    source: Source,
    /// Index into options.seeds.
    #[arg(long, default_value_t = 0)]
    seed_index: usize,
    /// Solve from every seed in options.seeds and require agreement.
    #[arg(long)]
    multi: bool,
    /// Write the iterate trace to this CSV file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Also check the geometric decay envelope at this rate.
    #[arg(long)]
    eta_bound: Option<f64>,
    /// Iteration cap; falls back to options.max_iter.
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Args)]
struct DistArgs {
    #[command(flatten)]
    source: Source,
    /// Samples per region; falls back to options.dist_density.
    #[arg(long)]
    density: Option<usize>,
}

#[derive(Args)]
struct OrbitArgs {
    #[command(flatten)]
    source: Source,
    /// Index into options.seeds.
    #[arg(long, default_value_t = 0)]
    seed_index: usize,
    /// Orbit length; falls back to options.depth.
    #[arg(long)]
    depth: Option<usize>,
}

#[derive(Args)]
struct LemmasArgs {
    #[command(flatten)]
    source: Source,
    /// Number of terms per sequence.
    #[arg(long, default_value_t = 40)]
    length: usize,
    /// Geometric decay rate of the generated sequences.
    #[arg(long, default_value_t = 0.5)]
    decay: f64,
    /// Comma-separated epsilon schedule for the closeness form.
    #[arg(long, default_value = "0.1,0.01,0.001")]
    schedule: String,
    /// Epsilon for the even-index Cauchy form.
    #[arg(long, default_value_t = 0.05)]
    cauchy_eps: f64,
}

enum Failure {
    Usage(String),
    Config { path: String, err: serde_json::Error },
    Lib(CoreError),
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn report(self) -> ExitCode {
        match self {
            Failure::Usage(msg) => eprintln!("error: {msg}"),
            Failure::Config { path, err } => eprintln!("error: {path}: {err}"),
            Failure::Lib(e) => eprintln!("error: {e}"),
        }
        ExitCode::from(2)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = match cli.command {
        Command::Verify(args) => cmd_verify(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Dist(args) => cmd_dist(args),
        Command::Orbit(args) => cmd_orbit(args),
        Command::Lemmas(args) => cmd_lemmas(args),
    };
    match run {
        Ok(code) => code,
        Err(failure) => failure.report(),
    }
}

fn load_problem(source: &Source) -> Result<Problem, Failure> {
    let (text, name) = match (&source.problem, &source.config) {
        (Some(name), None) => {
            if name != "example" {
                return Err(Failure::Usage(format!(
                    "unknown problem {name:?}; available: example"
                )));
            }
            (EXAMPLE_JSON.to_string(), name.clone())
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Failure::Usage(format!("cannot read {}: {e}", path.display()))
            })?;
            (text, path.display().to_string())
        }
        _ => unreachable!("clap enforces exactly one source"),
    };
    let cfg: ConfigFile = serde_json::from_str(&text).map_err(|err| Failure::Config {
        path: name.clone(),
        err,
    })?;
    build_problem(&cfg, name).map_err(Failure::Usage)
}

fn pick_seed(problem: &Problem, index: usize) -> Result<&Point, Failure> {
    problem.seeds.get(index).ok_or_else(|| {
        Failure::Usage(format!(
            "seed index {index} out of range; the problem has {} seed(s)",
            problem.seeds.len()
        ))
    })
}

fn exit_flag(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, Failure> {
    let problem = load_problem(&args.source)?;
    let eta = args.eta.or(problem.eta).ok_or_else(|| {
        Failure::Usage("no contraction rate: pass --eta or set options.eta".into())
    })?;
    let density = args.density.unwrap_or(problem.density);
    let depth = args.depth.unwrap_or(problem.depth);
    let m = &problem.map;
    let verdict: ContractionVerdict = match args.class {
        ClassArg::Cyclic => verify_cyclic(m, eta, density)?,
        ClassArg::Suzuki => verify_suzuki(m, eta, density)?,
        ClassArg::Orbital => verify_orbital(m, eta, density, depth)?,
    };

    let mut human = format!(
        "class {} at rate {eta}: {} over {density}x{density} sampled pairs\n",
        args.class.name(),
        if verdict.holds { "holds" } else { "fails" },
    );
    human.push_str(&format!(
        "worst pair: {} / {} (margin {})\n",
        verdict.worst_pair.0, verdict.worst_pair.1, verdict.worst_margin
    ));
    match verdict.min_eta_estimate {
        Some(x) => human.push_str(&format!("smallest workable rate: {x}")),
        None => human.push_str("smallest workable rate: none below 1"),
    }

    let options = json!({
        "class": args.class.name(),
        "eta": eta,
        "density": density,
        "depth": depth,
    });
    let outcome = serde_json::to_value(&verdict).expect("verdicts are plain data");
    Report::new("verify", &problem.name, options, outcome).print(&human);
    Ok(exit_flag(verdict.holds))
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode, Failure> {
    let problem = load_problem(&args.source)?;
    let trace_path = args.trace.clone().or_else(|| problem.trace_path.clone());
    let opts = SolveOptions {
        max_iter: args.max_iter.unwrap_or(problem.max_iter),
        gap_tol: problem.gap_tol,
        pair_tol: problem.pair_tol,
        eta_for_bound: args.eta_bound,
        record_trace: trace_path.is_some(),
        dist_density: problem.dist_density,
    };
    let options = json!({
        "max_iter": opts.max_iter,
        "gap_tol": opts.gap_tol,
        "pair_tol": opts.pair_tol,
        "eta_for_bound": opts.eta_for_bound,
        "dist_density": opts.dist_density,
        "multi": args.multi,
    });

    if args.multi {
        if trace_path.is_some() {
            return Err(Failure::Usage(
                "--trace applies to single-seed solves; drop --multi or the trace".into(),
            ));
        }
        let out = multi_start_check(&problem.map, &problem.seeds, &opts)?;
        let mut human = format!("{} seeds solved\n", out.reports.len());
        let ok = match &out.verdict {
            MultiStartVerdict::Pass { limit } => {
                human.push_str(&format!("all starts agree: limit {limit}"));
                true
            }
            MultiStartVerdict::Fail { first, second } => {
                human.push_str(&format!("limits disagree: {first} vs {second}"));
                false
            }
            MultiStartVerdict::Indeterminate { seed } => {
                human.push_str(&format!("seed {seed} did not converge"));
                false
            }
        };
        let outcome = serde_json::to_value(&out).expect("reports are plain data");
        Report::new("solve", &problem.name, options, outcome).print(&human);
        return Ok(exit_flag(ok));
    }

    let seed = pick_seed(&problem, args.seed_index)?;
    let solved = iterate(&problem.map, seed, &opts)?;
    let mut human = format!(
        "seed {} on the {} side\nconverged: {} after {} iterations\n",
        solved.seed, solved.seed_side, solved.converged, solved.iterations
    );
    human.push_str(&format!(
        "best proximity pair: {} / {}\n",
        solved.bpp_omega, solved.bpp_delta
    ));
    human.push_str(&format!(
        "pair separation residual: {}\nreturn residual: {}\n",
        solved.residual_bpp, solved.residual_fp2
    ));
    if let (Some(eta), Some(ok)) = (opts.eta_for_bound, solved.envelope_ok) {
        human.push_str(&format!(
            "decay envelope at rate {eta}: {}\n",
            if ok { "holds" } else { "fails" }
        ));
    }
    if let Some(path) = &trace_path {
        let trace = solved
            .trace
            .as_ref()
            .expect("record_trace was set alongside the path");
        write_trace_csv(path, trace).map_err(|e| {
            Failure::Usage(format!("cannot write trace {}: {e}", path.display()))
        })?;
        human.push_str(&format!(
            "trace written to {} ({} rows)\n",
            path.display(),
            trace.len()
        ));
    }
    let outcome = serde_json::to_value(&solved).expect("reports are plain data");
    Report::new("solve", &problem.name, options, outcome).print(&human);
    Ok(exit_flag(solved.converged))
}

fn cmd_dist(args: DistArgs) -> Result<ExitCode, Failure> {
    let problem = load_problem(&args.source)?;
    let density = args.density.unwrap_or(problem.dist_density);
    let (d, pair) = problem
        .map
        .omega()
        .set_distance(problem.map.delta(), density)?;
    let human = format!(
        "set distance: {d}\nproximal pair: {} / {}",
        pair.a, pair.b
    );
    let options = json!({ "density": density });
    let outcome = json!({
        "distance": d,
        "pair": serde_json::to_value(&pair).expect("pairs are plain data"),
    });
    Report::new("dist", &problem.name, options, outcome).print(&human);
    Ok(ExitCode::SUCCESS)
}

fn cmd_orbit(args: OrbitArgs) -> Result<ExitCode, Failure> {
    let problem = load_problem(&args.source)?;
    let depth = args.depth.unwrap_or(problem.depth);
    let seed = pick_seed(&problem, args.seed_index)?;
    let options = json!({ "depth": depth, "seed_index": args.seed_index });
    match problem.map.orbit(seed, depth) {
        Ok(orbit) => {
            let mut human = String::new();
            let mut entries = Vec::with_capacity(orbit.entries.len());
            for (k, entry) in orbit.entries.iter().enumerate() {
                let side = orbit.side_of_entry(k);
                human.push_str(&format!("{k:>4}  {side:<5}  {entry}\n"));
                entries.push(json!({ "n": k, "side": side, "point": entry }));
            }
            let outcome = json!({ "seed": seed, "entries": entries, "holds": true });
            Report::new("orbit", &problem.name, options, outcome).print(&human);
            Ok(ExitCode::SUCCESS)
        }
        Err(CoreError::CyclicityViolation { index }) => {
            let human = format!("orbit leaves the expected side at step {index}");
            let outcome = json!({ "seed": seed, "holds": false, "violation_at": index });
            Report::new("orbit", &problem.name, options, outcome).print(&human);
            Ok(ExitCode::from(1))
        }
        Err(e) => Err(Failure::Lib(e)),
    }
}

fn describe_lemma(v: &LemmaVerdict) -> String {
    match v {
        LemmaVerdict::Pass {
            hypothesis_from,
            thresholds,
        } => {
            let parts: Vec<String> = thresholds
                .iter()
                .map(|t| format!("{} from index {}", t.epsilon, t.from_index))
                .collect();
            format!(
                "pass (hypothesis from index {hypothesis_from}; {})",
                parts.join(", ")
            )
        }
        LemmaVerdict::PreconditionFailed { reason } => {
            format!("precondition failed: {reason}")
        }
        LemmaVerdict::NotWithinHorizon { epsilon } => {
            format!("conclusion not certified within the horizon at epsilon {epsilon}")
        }
    }
}

fn cmd_lemmas(args: LemmasArgs) -> Result<ExitCode, Failure> {
    let problem = load_problem(&args.source)?;
    let schedule: Vec<f64> = args
        .schedule
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Usage(format!("bad epsilon {s:?} in --schedule")))
        })
        .collect::<Result<_, _>>()?;
    let seed = env_seed()?;
    let m = &problem.map;
    let (dist, pair) = m.omega().set_distance(m.delta(), problem.dist_density)?;
    let triple =
        generate_converging_triple(m.omega(), m.delta(), &pair, args.length, args.decay, seed)?;
    let close = check_lemma_close(&triple, dist, &schedule)?;
    let cauchy = check_lemma_cauchy(&triple, dist, args.cauchy_eps)?;

    let human = format!(
        "sequences of length {} at decay {} from seed {seed}\ncloseness form: {}\ncauchy form: {}",
        args.length,
        args.decay,
        describe_lemma(&close),
        describe_lemma(&cauchy)
    );
    let options = json!({
        "length": args.length,
        "decay": args.decay,
        "schedule": schedule,
        "cauchy_eps": args.cauchy_eps,
        "seed": seed,
    });
    let outcome = json!({
        "distance": dist,
        "close": serde_json::to_value(&close).expect("verdicts are plain data"),
        "cauchy": serde_json::to_value(&cauchy).expect("verdicts are plain data"),
    });
    Report::new("lemmas", &problem.name, options, outcome).print(&human);
    let ok = matches!(close, LemmaVerdict::Pass { .. })
        && matches!(cauchy, LemmaVerdict::Pass { .. });
    Ok(exit_flag(ok))
}

fn env_seed() -> Result<u64, Failure> {
    match std::env::var("PROXIMA_SEED") {
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(e) => Err(Failure::Usage(format!("PROXIMA_SEED: {e}"))),
        Ok(s) => s.trim().parse().map_err(|_| {
            Failure::Usage(format!(
                "PROXIMA_SEED must be an unsigned integer, got {s:?}"
            ))
        }),
    }
}
