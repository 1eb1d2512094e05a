use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use smcm_core::asp::{emit_program, parse_optimizer_output, AspOutcome, EmitOptions};
use smcm_core::constraints::{assign_weights, test_constraints};
use smcm_core::evaluation::{
    default_max_cond, run_oracle_experiment, run_sample_experiment, run_timing_experiment, score_solutions,
    OracleExperimentConfig, SampleExperimentConfig, TimingExperimentConfig, DEFAULT_ALPHAS, DEFAULT_LW_PRIORS,
};
use smcm_core::io;
use smcm_core::simulation::{generate_scm, sample_data};
use smcm_core::{
    solve, AssumptionMode, Confounding, ConstraintSet, ExperimentReport, GraphView, SchemeKind, SearchSpace,
    Smcm, SolverConfig, WeightScheme,
};

/// Environment variable naming an external ASP optimiser command.
const ASP_SOLVER_ENV: &str = "SMCM_ASP_SOLVER";

/// Causal discovery over semi-Markovian models under weakened faithfulness.
///
/// Every subcommand also accepts `--config <file>`: a flat `key=value` file
/// whose entries act as flags, overridden by flags given on the command line.
#[derive(Parser, Debug)]
#[command(name = "smcm", version, args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Generate a random linear Gaussian model and optionally sample data.
    Gen(GenArgs),
    /// Run conditional independence tests on a dataset.
    Test(TestArgs),
    /// Find graphs minimising the weighted violations of a constraint set.
    Solve(SolveArgs),
    /// Write the answer-set program for a constraint set.
    EmitAsp(EmitArgs),
    /// Solve exact separation oracles of random models under every mode.
    OracleRun(OracleArgs),
    /// Test, weight, solve and score finite-sample data over a parameter grid.
    SampleRun(SampleArgs),
    /// Time single-solution solves on finite-sample data.
    Bench(BenchArgs),
    /// Score solution graphs against a true graph.
    Eval(EvalArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
enum Space {
    Smcm,
    Mag,
}

impl From<Space> for SearchSpace {
    fn from(s: Space) -> Self {
        match s {
            Space::Smcm => SearchSpace::Smcm,
            Space::Mag => SearchSpace::Mag,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    /// Directed-edge endpoints per vertex.
    #[arg(long, default_value_t = 1.0)]
    avg_degree: f64,
    /// `paper-literal` or `sparse:<k>`; defaults to `sparse:<n/2>`.
    #[arg(long)]
    confounding: Option<Confounding>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rows of data to sample; 0 writes the model only.
    #[arg(long, default_value_t = 0)]
    samples: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct TestArgs {
    /// Headerless CSV, one row per sample.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Defaults to n - 2 up to seven variables, else 3.
    #[arg(long)]
    max_cond: Option<usize>,
    /// cw, hw or lw.
    #[arg(long, default_value = "cw")]
    scheme: SchemeKind,
    /// Prior independence probability for lw.
    #[arg(long, default_value_t = 0.5)]
    prior: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct ConstraintInput {
    /// Constraint CSV with columns x,y,cond,verdict,weight.
    #[arg(long)]
    constraints: PathBuf,
    /// Vertex count; inferred from the largest index when omitted.
    #[arg(long)]
    n: Option<usize>,
}

impl ConstraintInput {
    fn load(&self) -> Result<ConstraintSet> {
        io::read_constraints(&self.constraints, self.n, WeightScheme::Constant)
            .with_context(|| format!("reading {}", self.constraints.display()))
    }
}

#[derive(Args, Debug, Serialize)]
struct SolveArgs {
    #[command(flatten)]
    input: ConstraintInput,
    #[arg(long, default_value = "faithfulness")]
    mode: AssumptionMode,
    /// Return every optimal graph instead of one.
    #[arg(long, num_args = 0..=1, default_value_t = false, default_missing_value = "true")]
    all: bool,
    #[arg(long, value_enum, default_value_t = Space::Smcm)]
    space: Space,
    #[arg(long, default_value_t = 1000)]
    max_solutions: usize,
    /// Seconds.
    #[arg(long, default_value_t = 3600.0)]
    time_budget: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// VadjM: rank violations strictly before the vadj penalty.
    #[arg(long, num_args = 0..=1, default_value_t = false, default_missing_value = "true")]
    lexicographic: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct EmitArgs {
    #[command(flatten)]
    input: ConstraintInput,
    #[arg(long, default_value = "faithfulness")]
    mode: AssumptionMode,
    #[arg(long, num_args = 0..=1, default_value_t = false, default_missing_value = "true")]
    lexicographic: bool,
    /// VadjF: emit the rule with the literal `not vadj` polarity.
    #[arg(long, num_args = 0..=1, default_value_t = false, default_missing_value = "true")]
    printed_vadjf_rule: bool,
    /// External optimiser command; falls back to $SMCM_ASP_SOLVER. When set,
    /// the program is solved and compared against the native solver.
    #[arg(long)]
    solver: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct ExperimentCommon {
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    models: usize,
    #[arg(long, default_value_t = 1.0)]
    avg_degree: f64,
    #[arg(long)]
    confounding: Option<Confounding>,
    #[arg(long)]
    max_cond: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seconds per solve.
    #[arg(long, default_value_t = 600.0)]
    time_budget: f64,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct OracleArgs {
    #[command(flatten)]
    common: ExperimentCommon,
    #[arg(long, value_enum, default_value_t = Space::Mag)]
    space: Space,
    #[arg(long, default_value_t = 100_000)]
    max_solutions: usize,
}

#[derive(Args, Debug, Serialize)]
struct SampleArgs {
    #[command(flatten)]
    common: ExperimentCommon,
    #[arg(long, default_value_t = 5)]
    datasets: usize,
    #[arg(long, default_value_t = 500)]
    samples: usize,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_ALPHAS.to_vec())]
    alphas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LW_PRIORS.to_vec())]
    lw_priors: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "cw")]
    schemes: Vec<SchemeKind>,
    #[arg(long, value_delimiter = ',', default_value = "faithfulness,vadjf,vadjm,noimin")]
    modes: Vec<AssumptionMode>,
    /// Enumerate all optima for scoring (false scores one graph per run).
    #[arg(long, num_args = 0..=1, default_value_t = true, default_missing_value = "true")]
    enumerate: bool,
    #[arg(long, default_value_t = 1000)]
    max_solutions: usize,
    #[arg(long, num_args = 0..=1, default_value_t = false, default_missing_value = "true")]
    lexicographic: bool,
}

#[derive(Args, Debug, Serialize)]
struct BenchArgs {
    #[command(flatten)]
    common: ExperimentCommon,
    #[arg(long, default_value_t = 500)]
    samples: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value = "cw")]
    scheme: SchemeKind,
    #[arg(long, value_delimiter = ',', default_value = "faithfulness,vadjf,vadjm,noimin")]
    modes: Vec<AssumptionMode>,
    #[arg(long, num_args = 0..=1, default_value_t = false, default_missing_value = "true")]
    lexicographic: bool,
}

#[derive(Args, Debug, Serialize)]
struct EvalArgs {
    /// True graph file.
    #[arg(long)]
    truth: PathBuf,
    /// Directory of `solution_<k>.graph` files.
    #[arg(long)]
    solutions: PathBuf,
    #[arg(long)]
    max_cond: Option<usize>,
}

fn budget(secs: f64) -> Result<Duration> {
    if !(secs > 0.0 && secs.is_finite()) {
        bail!("time budget must be a positive number of seconds, got {secs}");
    }
    Ok(Duration::from_secs_f64(secs))
}

fn echo_config<T: Serialize>(path: &Path, command: &str, args: &T) -> Result<()> {
    #[derive(Serialize)]
    struct Echo<'a, T> {
        command: &'a str,
        version: &'a str,
        args: &'a T,
    }
    let echo = Echo { command, version: env!("CARGO_PKG_VERSION"), args };
    let mut text = serde_json::to_string_pretty(&echo)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Sibling path `<file>.config.json` for single-file outputs.
fn echo_path_for(file: &Path) -> PathBuf {
    let mut s = file.as_os_str().to_owned();
    s.push(".config.json");
    PathBuf::from(s)
}

fn cmd_gen(a: &GenArgs) -> Result<()> {
    let conf = a.confounding.unwrap_or_else(|| Confounding::default_for(a.n));
    let scm = generate_scm(a.n, a.avg_degree, conf, a.seed)?;
    fs::create_dir_all(&a.out)?;
    fs::write(a.out.join("model.graph"), io::format_graph(scm.graph()))?;
    io::write_matrix_csv(fs::File::create(a.out.join("B.csv"))?, scm.coefficients())?;
    io::write_matrix_csv(fs::File::create(a.out.join("omega.csv"))?, scm.error_covariance())?;
    if a.samples > 0 {
        let data = sample_data(&scm, a.samples, a.seed)?;
        io::write_dataset(&a.out.join("data.csv"), &data)?;
    }
    echo_config(&a.out.join("config.json"), "gen", a)?;
    println!(
        "model with {} directed and {} bidirected edges ({conf}) written to {}",
        scm.graph().graph().directed_edges().len(),
        scm.graph().graph().bidirected_edges().len(),
        a.out.display()
    );
    Ok(())
}

fn cmd_test(a: &TestArgs) -> Result<()> {
    let data = io::read_dataset(&a.data).with_context(|| format!("reading {}", a.data.display()))?;
    let n = data.variables();
    let max_cond = a.max_cond.unwrap_or_else(|| default_max_cond(n));
    let tested = test_constraints(&data, max_cond, a.alpha)?;
    let cs = match a.scheme {
        SchemeKind::Constant => tested,
        SchemeKind::HardDependencies => assign_weights(&tested, WeightScheme::HardDependencies, None)?,
        SchemeKind::Log => assign_weights(&tested, WeightScheme::Log { prior: a.prior }, Some(&data))?,
    };
    if let Some(dir) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    io::write_constraints_csv(fs::File::create(&a.out)?, &cs)?;
    echo_config(&echo_path_for(&a.out), "test", a)?;
    println!(
        "{} statements ({} independent) written to {}",
        cs.len(),
        cs.count(smcm_core::Verdict::Independent),
        a.out.display()
    );
    Ok(())
}

fn cmd_solve(a: &SolveArgs) -> Result<()> {
    let cs = a.input.load()?;
    let mut cfg = SolverConfig::new(a.mode).lexicographic(a.lexicographic);
    cfg.space = a.space.into();
    cfg.enumerate_all = a.all;
    cfg.max_solutions = a.max_solutions;
    cfg.time_budget = budget(a.time_budget)?;
    cfg.seed = a.seed;
    let res = solve(&cs, &cfg)?;
    io::write_solution_dir(&a.out, a.mode, &res)?;
    echo_config(&a.out.join("config.json"), "solve", a)?;
    let objective = if res.objective.is_finite() { res.objective.to_string() } else { "inf".into() };
    println!(
        "mode {}: objective {objective}, zero violation {}, {} optimal graph(s){}{}",
        a.mode,
        res.zero_violation,
        res.solution_count,
        if res.truncated { " (truncated)" } else { "" },
        if res.stats.timed_out { ", timed out" } else { "" },
    );
    Ok(())
}

fn run_external(command: &str, program: &Path) -> Result<AspOutcome> {
    let mut parts = command.split_whitespace();
    let Some(bin) = parts.next() else { bail!("empty solver command") };
    let out = Command::new(bin)
        .args(parts)
        .args(["--opt-mode=opt", "--quiet=1"])
        .arg(program)
        .output()
        .with_context(|| format!("running {command}"))?;
    let text = String::from_utf8_lossy(&out.stdout);
    parse_optimizer_output(&text).with_context(|| format!("no result in solver output:\n{text}"))
}

fn cmd_emit(a: &EmitArgs) -> Result<()> {
    let cs = a.input.load()?;
    let opts = EmitOptions { lexicographic: a.lexicographic, printed_vadjf_rule: a.printed_vadjf_rule };
    let prog = emit_program(&cs, a.mode, opts)?;
    if let Some(dir) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(&a.out, &prog.text)?;
    echo_config(&echo_path_for(&a.out), "emit-asp", a)?;
    println!("program written to {}", a.out.display());
    let solver = a.solver.clone().or_else(|| std::env::var(ASP_SOLVER_ENV).ok());
    let Some(solver) = solver.filter(|s| !s.trim().is_empty()) else {
        return Ok(());
    };
    let native = solve(&cs, &SolverConfig::new(a.mode).lexicographic(a.lexicographic))?;
    match run_external(&solver, &a.out)? {
        AspOutcome::Unsatisfiable => {
            println!("external: unsatisfiable; native objective {}", native.objective);
        }
        AspOutcome::Optimum(costs) => {
            let total: i64 = costs.iter().sum();
            let external = total as f64 / prog.weight_scale as f64;
            println!("external: costs {costs:?} (objective {external}); native objective {}", native.objective);
        }
    }
    Ok(())
}

fn finish_report(rep: &ExperimentReport, out: &Path, command: &str, args: &impl Serialize) -> Result<()> {
    rep.write_dir(out)?;
    echo_config(&out.join("config.json"), command, args)?;
    let mut modes: Vec<AssumptionMode> = rep.rows.iter().map(|r| r.mode).collect();
    modes.sort();
    modes.dedup();
    println!("{} rows, max_cond {}, confounding {}", rep.rows.len(), rep.max_cond, rep.confounding);
    for m in modes {
        let sat = rep.satisfiable_fraction(m, None).unwrap_or(0.0);
        let med = rep.time_quantile(m, 0.5).unwrap_or(0.0);
        println!("  {m:<12} zero-violation {sat:.3}  median {med:.4}s");
    }
    Ok(())
}

fn cmd_oracle(a: &OracleArgs) -> Result<()> {
    let c = &a.common;
    let cfg = OracleExperimentConfig {
        n: c.n,
        models: c.models,
        avg_degree: c.avg_degree,
        confounding: c.confounding,
        max_cond: c.max_cond,
        seed: c.seed,
        space: a.space.into(),
        max_solutions: a.max_solutions,
        time_budget: budget(c.time_budget)?,
        workers: c.workers,
        ..Default::default()
    };
    let rep = run_oracle_experiment(&cfg)?;
    finish_report(&rep, &c.out, "oracle-run", a)?;
    let disagree = rep.rows.iter().filter(|r| r.agrees_with_faithfulness == Some(false)).count();
    println!("  rows disagreeing with Faithfulness: {disagree}");
    Ok(())
}

fn cmd_sample(a: &SampleArgs) -> Result<()> {
    let c = &a.common;
    let cfg = SampleExperimentConfig {
        n: c.n,
        models: c.models,
        datasets: a.datasets,
        samples: a.samples,
        alphas: a.alphas.clone(),
        lw_priors: a.lw_priors.clone(),
        schemes: a.schemes.clone(),
        modes: a.modes.clone(),
        avg_degree: c.avg_degree,
        confounding: c.confounding,
        max_cond: c.max_cond,
        seed: c.seed,
        enumerate: a.enumerate,
        vadjm_lexicographic: a.lexicographic,
        max_solutions: a.max_solutions,
        time_budget: budget(c.time_budget)?,
        workers: c.workers,
    };
    let rep = run_sample_experiment(&cfg)?;
    finish_report(&rep, &c.out, "sample-run", a)
}

fn cmd_bench(a: &BenchArgs) -> Result<()> {
    let c = &a.common;
    let cfg = TimingExperimentConfig {
        n: c.n,
        models: c.models,
        samples: a.samples,
        alpha: a.alpha,
        scheme: a.scheme,
        modes: a.modes.clone(),
        avg_degree: c.avg_degree,
        confounding: c.confounding,
        max_cond: c.max_cond,
        seed: c.seed,
        vadjm_lexicographic: a.lexicographic,
        time_budget: budget(c.time_budget)?,
        workers: c.workers,
    };
    let rep = run_timing_experiment(&cfg)?;
    finish_report(&rep, &c.out, "bench", a)
}

fn cmd_eval(a: &EvalArgs) -> Result<()> {
    let truth = Smcm::new(io::read_graph(&a.truth).with_context(|| format!("reading {}", a.truth.display()))?)?;
    let mut files: Vec<PathBuf> = fs::read_dir(&a.solutions)
        .with_context(|| format!("reading {}", a.solutions.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "graph"))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no .graph files in {}", a.solutions.display());
    }
    let solutions = files
        .iter()
        .map(|p| Ok(Smcm::new(io::read_graph(p).with_context(|| format!("reading {}", p.display()))?)?))
        .collect::<Result<Vec<_>>>()?;
    let max_cond = a.max_cond.unwrap_or_else(|| default_max_cond(truth.n()));
    let c = score_solutions(&solutions, &truth, max_cond)?;
    println!("solutions {}  max_cond {max_cond}", solutions.len());
    println!("tp {}  fp {}  fn {}  tn {}  tpr {:.4}  fpr {:.4}", c.tp, c.fp, c.fn_, c.tn, c.tpr(), c.fpr());
    Ok(())
}

/// Pulls `--config <file>` out of `argv` and splices its entries in as
/// `--key=value` flags right after the subcommand, so that flags given on
/// the command line win.
fn expand_config(mut argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut file = None;
    let mut i = 1;
    while i < argv.len() {
        let arg = argv[i].to_string_lossy().into_owned();
        if arg == "--config" {
            if i + 1 >= argv.len() {
                bail!("--config needs a file");
            }
            file = Some(PathBuf::from(argv.remove(i + 1)));
            argv.remove(i);
        } else if let Some(path) = arg.strip_prefix("--config=") {
            file = Some(PathBuf::from(path));
            argv.remove(i);
        } else {
            i += 1;
        }
    }
    let Some(file) = file else { return Ok(argv) };
    let text = fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
    let mut injected = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("{}:{}: expected key=value", file.display(), k + 1);
        };
        let key = key.trim().replace('_', "-");
        injected.push(OsString::from(format!("--{key}={}", value.trim())));
    }
    let at = argv.len().min(2);
    argv.splice(at..at, injected);
    Ok(argv)
}

fn run() -> Result<()> {
    let argv = expand_config(std::env::args_os().collect())?;
    let cli = Cli::parse_from(argv);
    match &cli.command {
        Cmd::Gen(a) => cmd_gen(a),
        Cmd::Test(a) => cmd_test(a),
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::EmitAsp(a) => cmd_emit(a),
        Cmd::OracleRun(a) => cmd_oracle(a),
        Cmd::SampleRun(a) => cmd_sample(a),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::Eval(a) => cmd_eval(a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
