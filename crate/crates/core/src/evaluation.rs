//! Scoring solver output against ground truth and the three experiment
//! drivers: oracle inputs, finite-sample inputs and timing.
//!
//! Every row is an independent job run on a rayon pool; rows come back in
//! grid order, so reports do not depend on the worker count.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constraints::{assign_weights, oracle_constraints, test_constraints, ConstraintSet, WeightScheme};
use crate::error::{invalid, Error, Result};
use crate::graph::{GraphView, Smcm, VertexId, VertexSet};
use crate::projection::smcm_to_mag;
use crate::separation::{m_separated, statement_triples};
use crate::simulation::{generate_scm, sample_data, Confounding};
use crate::solver::{objective, solve, AssumptionMode, SearchSpace, SolverConfig, SolverResult};

/// Significance levels tried for the t-test.
pub const DEFAULT_ALPHAS: [f64; 10] = [0.0001, 0.0005, 0.001, 0.005, 0.01, 0.05, 0.1, 0.15, 0.2, 0.25];

/// Prior independence probabilities tried for log weights.
pub const DEFAULT_LW_PRIORS: [f64; 11] = [0.05, 0.09, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.9];

/// Largest conditioning-set size tested by default: everything up to seven
/// variables, then 3.
pub fn default_max_cond(n: usize) -> usize {
    if n <= 7 {
        n.saturating_sub(2)
    } else {
        3
    }
}

/// Weighting scheme without its parameter, which comes from the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemeKind {
    Constant,
    HardDependencies,
    Log,
}

impl SchemeKind {
    pub fn label(self) -> &'static str {
        match self {
            SchemeKind::Constant => "CW",
            SchemeKind::HardDependencies => "HW",
            SchemeKind::Log => "LW",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cw" | "constant" => Ok(SchemeKind::Constant),
            "hw" | "hard" | "hard-deps" => Ok(SchemeKind::HardDependencies),
            "lw" | "log" => Ok(SchemeKind::Log),
            other => invalid(format!("unknown weighting scheme {other:?}")),
        }
    }
}

/// The `(x, y, cond)` triples that are m-connected in a graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectionSet {
    pub n: usize,
    pub max_cond: usize,
    pub statements: BTreeSet<(VertexId, VertexId, VertexSet)>,
}

pub fn connection_statements<G: GraphView + ?Sized>(g: &G, max_cond: usize) -> Result<ConnectionSet> {
    let n = g.n();
    if max_cond > n.saturating_sub(2) {
        return invalid(format!("max_cond {max_cond} exceeds n - 2 = {}", n.saturating_sub(2)));
    }
    let mut statements = BTreeSet::new();
    for (x, y, cond) in statement_triples(n, max_cond) {
        if !m_separated(g, x, y, cond)? {
            statements.insert((x, y, cond));
        }
    }
    Ok(ConnectionSet { n, max_cond, statements })
}

/// Confusion counts with m-connection as the positive class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl Confusion {
    pub fn fpr(&self) -> f64 {
        ratio(self.fp, self.fp + self.tn)
    }

    pub fn tpr(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

impl std::ops::AddAssign for Confusion {
    fn add_assign(&mut self, o: Confusion) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
        self.tn += o.tn;
    }
}

/// Predicts the connections shared by every solution and scores them
/// against those of `truth`.
pub fn score_solutions(solutions: &[Smcm], truth: &Smcm, max_cond: usize) -> Result<Confusion> {
    let Some((first, rest)) = solutions.split_first() else {
        return invalid("cannot score an empty solution list");
    };
    let n = truth.n();
    if let Some(g) = solutions.iter().find(|g| g.n() != n) {
        return invalid(format!("solution has {} vertices, truth has {n}", g.n()));
    }
    let mut predicted = connection_statements(first, max_cond)?.statements;
    for g in rest {
        let c = connection_statements(g, max_cond)?.statements;
        predicted.retain(|t| c.contains(t));
    }
    let actual = connection_statements(truth, max_cond)?.statements;
    let total = statement_triples(n, max_cond).len() as u64;
    let tp = predicted.intersection(&actual).count() as u64;
    let fp = predicted.len() as u64 - tp;
    let fn_ = actual.len() as u64 - tp;
    Ok(Confusion { tp, fp, fn_, tn: total - tp - fp - fn_ })
}

/// One solver run. `report.csv` leaves out `elapsed` so that reports are
/// reproducible; timings go to `times.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub model: usize,
    pub dataset: usize,
    pub param: f64,
    pub mode: AssumptionMode,
    pub scheme: SchemeKind,
    /// No statement violated, within the time budget.
    pub satisfiable: bool,
    pub objective: f64,
    pub elapsed: Duration,
    pub timed_out: bool,
    pub solution_count: u64,
    pub truncated: bool,
    pub confusion: Option<Confusion>,
    /// Oracle runs: the solution set equals the Faithfulness one.
    pub agrees_with_faithfulness: Option<bool>,
    /// Oracle runs: the true graph (or its MAG) is among the solutions.
    pub contains_truth: Option<bool>,
    /// The reported objective matches a direct recount on a returned graph.
    pub objective_verified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RocPoint {
    pub mode: AssumptionMode,
    pub scheme: SchemeKind,
    pub param: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub max_cond: usize,
    pub confounding: Confounding,
    pub rows: Vec<ReportRow>,
    pub roc: Vec<RocPoint>,
}

impl ExperimentReport {
    fn rows_for(&self, mode: AssumptionMode, scheme: Option<SchemeKind>) -> impl Iterator<Item = &ReportRow> {
        self.rows
            .iter()
            .filter(move |r| r.mode == mode && scheme.is_none_or(|s| r.scheme == s))
    }

    /// Fraction of rows of `mode` (and `scheme`, if given) with no violation.
    pub fn satisfiable_fraction(&self, mode: AssumptionMode, scheme: Option<SchemeKind>) -> Option<f64> {
        let (mut ok, mut all) = (0usize, 0usize);
        for r in self.rows_for(mode, scheme) {
            all += 1;
            ok += r.satisfiable as usize;
        }
        (all > 0).then(|| ok as f64 / all as f64)
    }

    /// Solve times of `mode` in seconds, ascending.
    pub fn sorted_times(&self, mode: AssumptionMode) -> Vec<f64> {
        let mut t: Vec<f64> = self.rows_for(mode, None).map(|r| r.elapsed.as_secs_f64()).collect();
        t.sort_by(f64::total_cmp);
        t
    }

    /// Nearest-rank quantile of the solve times of `mode`.
    pub fn time_quantile(&self, mode: AssumptionMode, q: f64) -> Option<f64> {
        let t = self.sorted_times(mode);
        if t.is_empty() {
            return None;
        }
        let k = ((q.clamp(0.0, 1.0) * t.len() as f64).ceil() as usize).clamp(1, t.len());
        Some(t[k - 1])
    }

    pub fn write_report_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for r in &self.rows {
            wr.serialize(ReportRecord::from(r))?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn write_roc_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["mode", "scheme", "param", "fpr", "tpr"])?;
        for p in &self.roc {
            wr.write_record([
                p.mode.label().to_owned(),
                p.scheme.label().to_owned(),
                p.param.to_string(),
                p.fpr.to_string(),
                p.tpr.to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn write_times_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["mode", "rank", "seconds"])?;
        let mut modes: Vec<AssumptionMode> = self.rows.iter().map(|r| r.mode).collect();
        modes.sort();
        modes.dedup();
        for mode in modes {
            for (k, t) in self.sorted_times(mode).iter().enumerate() {
                wr.write_record([mode.label().to_owned(), (k + 1).to_string(), format!("{t:.6}")])?;
            }
        }
        wr.flush()?;
        Ok(())
    }

    /// Writes `report.csv`, `times.csv` and, when there are ROC points,
    /// `roc.csv` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        self.write_report_csv(fs::File::create(dir.join("report.csv"))?)?;
        self.write_times_csv(fs::File::create(dir.join("times.csv"))?)?;
        if !self.roc.is_empty() {
            self.write_roc_csv(fs::File::create(dir.join("roc.csv"))?)?;
        }
        Ok(())
    }
}

/// Flat CSV form of a row.
#[derive(Serialize)]
struct ReportRecord {
    model: usize,
    dataset: usize,
    param: f64,
    mode: &'static str,
    scheme: &'static str,
    satisfiable: bool,
    objective: String,
    timed_out: bool,
    solution_count: u64,
    truncated: bool,
    tp: Option<u64>,
    fp: Option<u64>,
    #[serde(rename = "fn")]
    fn_: Option<u64>,
    tn: Option<u64>,
    agrees_with_faithfulness: Option<bool>,
    contains_truth: Option<bool>,
    objective_verified: bool,
}

impl From<&ReportRow> for ReportRecord {
    fn from(r: &ReportRow) -> Self {
        ReportRecord {
            model: r.model,
            dataset: r.dataset,
            param: r.param,
            mode: r.mode.label(),
            scheme: r.scheme.label(),
            satisfiable: r.satisfiable,
            objective: if r.objective.is_finite() { format!("{}", r.objective) } else { "inf".into() },
            timed_out: r.timed_out,
            solution_count: r.solution_count,
            truncated: r.truncated,
            tp: r.confusion.map(|c| c.tp),
            fp: r.confusion.map(|c| c.fp),
            fn_: r.confusion.map(|c| c.fn_),
            tn: r.confusion.map(|c| c.tn),
            agrees_with_faithfulness: r.agrees_with_faithfulness,
            contains_truth: r.contains_truth,
            objective_verified: r.objective_verified,
        }
    }
}

/// Seed for a grid cell, mixed from the base seed with splitmix64.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut z = base;
    for &p in parts {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(p.wrapping_mul(0xbf58_476d_1ce4_e5b9));
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
    }
    z
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))
}

fn run_grid<J, F>(workers: usize, jobs: Vec<J>, f: F) -> Result<Vec<ReportRow>>
where
    J: Send + Sync,
    F: Fn(&J) -> Result<Vec<ReportRow>> + Send + Sync,
{
    let chunks = pool(workers)?.install(|| jobs.par_iter().map(&f).collect::<Result<Vec<_>>>())?;
    Ok(chunks.into_iter().flatten().collect())
}

fn resolve_max_cond(n: usize, max_cond: Option<usize>) -> Result<usize> {
    let k = max_cond.unwrap_or_else(|| default_max_cond(n));
    if k > n.saturating_sub(2) {
        return invalid(format!("max_cond {k} exceeds n - 2 = {}", n.saturating_sub(2)));
    }
    Ok(k)
}

fn row_from(
    (model, dataset, param): (usize, usize, f64),
    mode: AssumptionMode,
    scheme: SchemeKind,
    cs: &ConstraintSet,
    res: &SolverResult,
) -> Result<ReportRow> {
    let objective_verified = match res.graphs.first() {
        Some(g) => (objective(g, cs, mode)?.total() - res.objective).abs() <= 1e-6 * res.objective.abs().max(1.0)
            || (res.objective.is_infinite() && objective(g, cs, mode)?.total().is_infinite()),
        None => false,
    };
    Ok(ReportRow {
        model,
        dataset,
        param,
        mode,
        scheme,
        satisfiable: res.zero_violation && !res.stats.timed_out,
        objective: res.objective,
        elapsed: res.stats.elapsed,
        timed_out: res.stats.timed_out,
        solution_count: res.solution_count,
        truncated: res.truncated,
        confusion: None,
        agrees_with_faithfulness: None,
        contains_truth: None,
        objective_verified,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleExperimentConfig {
    pub n: usize,
    pub models: usize,
    pub avg_degree: f64,
    /// Defaults to [`Confounding::default_for`].
    pub confounding: Option<Confounding>,
    /// Defaults to `n - 2`, the full oracle.
    pub max_cond: Option<usize>,
    pub seed: u64,
    pub modes: Vec<AssumptionMode>,
    /// Space whose optimal sets are compared across modes.
    pub space: SearchSpace,
    pub vadjm_lexicographic: bool,
    pub max_solutions: usize,
    pub time_budget: Duration,
    /// 0 lets rayon choose.
    pub workers: usize,
}

impl Default for OracleExperimentConfig {
    fn default() -> Self {
        OracleExperimentConfig {
            n: 5,
            models: 100,
            avg_degree: 1.0,
            confounding: None,
            max_cond: None,
            seed: 0,
            modes: AssumptionMode::ALL.to_vec(),
            space: SearchSpace::Mag,
            vadjm_lexicographic: true,
            max_solutions: 100_000,
            time_budget: Duration::from_secs(600),
            workers: 0,
        }
    }
}

/// Solves the exact separation oracle of random models under every mode and
/// records whether the optimal sets coincide.
pub fn run_oracle_experiment(cfg: &OracleExperimentConfig) -> Result<ExperimentReport> {
    let n = cfg.n;
    let max_cond = cfg.max_cond.unwrap_or(n.saturating_sub(2));
    resolve_max_cond(n, Some(max_cond))?;
    let confounding = cfg.confounding.unwrap_or_else(|| Confounding::default_for(n));
    let jobs: Vec<usize> = (0..cfg.models).collect();
    let rows = run_grid(cfg.workers, jobs, |&model| {
        let scm = generate_scm(n, cfg.avg_degree, confounding, derive_seed(cfg.seed, &[0, model as u64]))?;
        let truth = scm.graph();
        let cs = oracle_constraints(truth, max_cond)?;
        let target = match cfg.space {
            SearchSpace::Smcm => truth.clone(),
            SearchSpace::Mag => smcm_to_mag(truth).into(),
        };
        let mut reference: Option<Vec<Smcm>> = None;
        let mut rows = Vec::new();
        for &mode in &cfg.modes {
            let mut sc = SolverConfig::new(mode).enumerate(cfg.space).lexicographic(cfg.vadjm_lexicographic);
            sc.max_solutions = cfg.max_solutions;
            sc.time_budget = cfg.time_budget;
            sc.seed = cfg.seed;
            let res = solve(&cs, &sc)?;
            let mut row = row_from((model, 0, f64::NAN), mode, SchemeKind::Constant, &cs, &res)?;
            if mode == AssumptionMode::Faithfulness {
                reference = Some(res.graphs.clone());
            }
            row.agrees_with_faithfulness = reference.as_ref().map(|r| *r == res.graphs);
            row.contains_truth = Some(res.graphs.contains(&target));
            if !res.graphs.is_empty() {
                row.confusion = Some(score_solutions(&res.graphs, truth, max_cond)?);
            }
            rows.push(row);
        }
        Ok(rows)
    })?;
    Ok(ExperimentReport { max_cond, confounding, rows, roc: Vec::new() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleExperimentConfig {
    pub n: usize,
    pub models: usize,
    pub datasets: usize,
    pub samples: usize,
    /// Test levels, the grid parameter for CW and HW.
    pub alphas: Vec<f64>,
    /// Prior independence probabilities, the grid parameter for LW.
    pub lw_priors: Vec<f64>,
    pub schemes: Vec<SchemeKind>,
    pub modes: Vec<AssumptionMode>,
    pub avg_degree: f64,
    pub confounding: Option<Confounding>,
    pub max_cond: Option<usize>,
    pub seed: u64,
    /// Enumerate all optima for scoring; otherwise score the single graph.
    pub enumerate: bool,
    pub vadjm_lexicographic: bool,
    pub max_solutions: usize,
    pub time_budget: Duration,
    pub workers: usize,
}

impl Default for SampleExperimentConfig {
    fn default() -> Self {
        SampleExperimentConfig {
            n: 5,
            models: 100,
            datasets: 5,
            samples: 500,
            alphas: DEFAULT_ALPHAS.to_vec(),
            lw_priors: DEFAULT_LW_PRIORS.to_vec(),
            schemes: vec![SchemeKind::Constant],
            modes: AssumptionMode::ALL.to_vec(),
            avg_degree: 1.0,
            confounding: None,
            max_cond: None,
            seed: 0,
            enumerate: true,
            vadjm_lexicographic: false,
            max_solutions: 1000,
            time_budget: Duration::from_secs(600),
            workers: 0,
        }
    }
}

/// Test, weight, solve and score over models × datasets × parameters for
/// every scheme and mode.
pub fn run_sample_experiment(cfg: &SampleExperimentConfig) -> Result<ExperimentReport> {
    let n = cfg.n;
    let max_cond = resolve_max_cond(n, cfg.max_cond)?;
    let confounding = cfg.confounding.unwrap_or_else(|| Confounding::default_for(n));
    if cfg.samples == 0 {
        return invalid("samples must be positive");
    }
    let jobs: Vec<(usize, usize)> = (0..cfg.models)
        .flat_map(|m| (0..cfg.datasets).map(move |d| (m, d)))
        .collect();
    let rows = run_grid(cfg.workers, jobs, |&(model, dataset)| {
        let scm = generate_scm(n, cfg.avg_degree, confounding, derive_seed(cfg.seed, &[0, model as u64]))?;
        let data = sample_data(&scm, cfg.samples, derive_seed(cfg.seed, &[1, model as u64, dataset as u64]))?;
        let truth = scm.graph();
        let mut rows = Vec::new();
        for &scheme in &cfg.schemes {
            let params = if scheme == SchemeKind::Log { &cfg.lw_priors } else { &cfg.alphas };
            for &param in params {
                let cs = match scheme {
                    SchemeKind::Constant => test_constraints(&data, max_cond, param)?,
                    SchemeKind::HardDependencies => assign_weights(
                        &test_constraints(&data, max_cond, param)?,
                        WeightScheme::HardDependencies,
                        None,
                    )?,
                    SchemeKind::Log => assign_weights(
                        &test_constraints(&data, max_cond, 0.05)?,
                        WeightScheme::Log { prior: param },
                        Some(&data),
                    )?,
                };
                for &mode in &cfg.modes {
                    let mut sc = SolverConfig::new(mode).lexicographic(cfg.vadjm_lexicographic);
                    if cfg.enumerate {
                        sc = sc.enumerate(SearchSpace::Mag);
                    }
                    sc.max_solutions = cfg.max_solutions;
                    sc.time_budget = cfg.time_budget;
                    sc.seed = cfg.seed;
                    let res = solve(&cs, &sc)?;
                    let mut row = row_from((model, dataset, param), mode, scheme, &cs, &res)?;
                    if !res.stats.timed_out && !res.graphs.is_empty() {
                        row.confusion = Some(score_solutions(&res.graphs, truth, max_cond)?);
                    }
                    rows.push(row);
                }
            }
        }
        Ok(rows)
    })?;
    let roc = roc_points(&rows);
    Ok(ExperimentReport { max_cond, confounding, rows, roc })
}

/// Pools the confusion counts of scored rows per (mode, scheme, param), in
/// order of first appearance.
fn roc_points(rows: &[ReportRow]) -> Vec<RocPoint> {
    let mut keys: Vec<(AssumptionMode, SchemeKind, f64)> = Vec::new();
    let mut sums: Vec<Confusion> = Vec::new();
    for r in rows {
        let Some(c) = r.confusion else { continue };
        let key = (r.mode, r.scheme, r.param);
        match keys.iter().position(|k| k.0 == key.0 && k.1 == key.1 && k.2.to_bits() == key.2.to_bits()) {
            Some(i) => sums[i] += c,
            None => {
                keys.push(key);
                sums.push(c);
            }
        }
    }
    keys.into_iter()
        .zip(sums)
        .map(|((mode, scheme, param), c)| RocPoint { mode, scheme, param, fpr: c.fpr(), tpr: c.tpr() })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingExperimentConfig {
    pub n: usize,
    pub models: usize,
    pub samples: usize,
    pub alpha: f64,
    pub scheme: SchemeKind,
    pub modes: Vec<AssumptionMode>,
    pub avg_degree: f64,
    pub confounding: Option<Confounding>,
    pub max_cond: Option<usize>,
    pub seed: u64,
    pub vadjm_lexicographic: bool,
    pub time_budget: Duration,
    pub workers: usize,
}

impl Default for TimingExperimentConfig {
    fn default() -> Self {
        TimingExperimentConfig {
            n: 7,
            models: 20,
            samples: 500,
            alpha: 0.05,
            scheme: SchemeKind::Constant,
            modes: AssumptionMode::ALL.to_vec(),
            avg_degree: 1.0,
            confounding: None,
            max_cond: None,
            seed: 0,
            vadjm_lexicographic: false,
            time_budget: Duration::from_secs(600),
            workers: 1,
        }
    }
}

/// One dataset per model, one optimal graph per mode, timed.
pub fn run_timing_experiment(cfg: &TimingExperimentConfig) -> Result<ExperimentReport> {
    let n = cfg.n;
    let max_cond = resolve_max_cond(n, cfg.max_cond)?;
    let confounding = cfg.confounding.unwrap_or_else(|| Confounding::default_for(n));
    let jobs: Vec<usize> = (0..cfg.models).collect();
    let rows = run_grid(cfg.workers, jobs, |&model| {
        let scm = generate_scm(n, cfg.avg_degree, confounding, derive_seed(cfg.seed, &[0, model as u64]))?;
        let data = sample_data(&scm, cfg.samples, derive_seed(cfg.seed, &[1, model as u64, 0]))?;
        let tested = test_constraints(&data, max_cond, cfg.alpha)?;
        let cs = match cfg.scheme {
            SchemeKind::Constant => tested,
            SchemeKind::HardDependencies => assign_weights(&tested, WeightScheme::HardDependencies, None)?,
            SchemeKind::Log => assign_weights(&tested, WeightScheme::Log { prior: 0.5 }, Some(&data))?,
        };
        let mut rows = Vec::new();
        for &mode in &cfg.modes {
            let mut sc = SolverConfig::new(mode).lexicographic(cfg.vadjm_lexicographic);
            sc.time_budget = cfg.time_budget;
            sc.seed = cfg.seed;
            let res = solve(&cs, &sc)?;
            rows.push(row_from((model, 0, cfg.alpha), mode, cfg.scheme, &cs, &res)?);
        }
        Ok(rows)
    })?;
    Ok(ExperimentReport { max_cond, confounding, rows, roc: Vec::new() })
}
