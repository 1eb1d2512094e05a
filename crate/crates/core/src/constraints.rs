//! Weighted conditional (in)dependence statements, from an oracle graph or
//! from data.

use std::collections::HashSet;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{invalid, Error, Result};
use crate::graph::{GraphView, VertexId, VertexSet};
use crate::separation::{m_separated_unchecked, statement_triples};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Independent,
    Dependent,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Independent => "indep",
            Verdict::Dependent => "dep",
        }
    }
}

/// Statement weight; infinite weights are hard constraints.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Weight {
    Finite(f64),
    Infinite,
}

impl Weight {
    pub const ONE: Weight = Weight::Finite(1.0);

    pub fn is_infinite(self) -> bool {
        matches!(self, Weight::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Weight::Finite(w) => Some(w),
            Weight::Infinite => None,
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Finite(w) => write!(f, "{w}"),
            Weight::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum WeightScheme {
    /// Every statement weighs 1.
    Constant,
    /// Dependencies are hard; independencies weigh 1.
    HardDependencies,
    /// Weight is the absolute posterior log-odds of the verdict, under a
    /// prior probability `prior` of independence.
    Log { prior: f64 },
}

impl WeightScheme {
    pub fn label(&self) -> &'static str {
        match self {
            WeightScheme::Constant => "CW",
            WeightScheme::HardDependencies => "HW",
            WeightScheme::Log { .. } => "LW",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CiStatement {
    pub x: VertexId,
    pub y: VertexId,
    pub cond: VertexSet,
    pub verdict: Verdict,
    pub weight: Weight,
}

impl CiStatement {
    pub fn new(x: VertexId, y: VertexId, cond: VertexSet, verdict: Verdict, weight: Weight) -> Self {
        let (x, y) = if x < y { (x, y) } else { (y, x) };
        CiStatement { x, y, cond, verdict, weight }
    }
}

/// The statements fed to the solver.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSet {
    n: usize,
    statements: Vec<CiStatement>,
    scheme: WeightScheme,
}

impl ConstraintSet {
    pub fn new(n: usize, statements: Vec<CiStatement>, scheme: WeightScheme) -> Result<Self> {
        let all = VertexSet::full(n);
        let mut seen = HashSet::new();
        let mut canon = Vec::with_capacity(statements.len());
        for s in statements {
            let s = CiStatement::new(s.x, s.y, s.cond, s.verdict, s.weight);
            if s.y >= n {
                return Err(Error::InvalidVertex { vertex: s.y, n });
            }
            if s.x == s.y {
                return invalid(format!("statement on ({}, {}) needs distinct vertices", s.x, s.y));
            }
            if !s.cond.is_subset(all) {
                return Err(Error::InvalidVertex { vertex: s.cond.max().unwrap_or(0), n });
            }
            if s.cond.contains(s.x) || s.cond.contains(s.y) {
                return invalid(format!("conditioning set {} overlaps ({}, {})", s.cond, s.x, s.y));
            }
            if let Weight::Finite(w) = s.weight {
                if !(w >= 0.0 && w.is_finite()) {
                    return invalid(format!("weight {w} must be finite and non-negative"));
                }
            }
            if !seen.insert((s.x, s.y, s.cond)) {
                return invalid(format!("duplicate statement for ({}, {} | {})", s.x, s.y, s.cond));
            }
            canon.push(s);
        }
        if let WeightScheme::Log { prior } = scheme {
            check_prior(prior)?;
        }
        Ok(ConstraintSet { n, statements: canon, scheme })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn statements(&self) -> &[CiStatement] {
        &self.statements
    }

    pub fn scheme(&self) -> WeightScheme {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    pub fn count(&self, verdict: Verdict) -> usize {
        self.statements.iter().filter(|s| s.verdict == verdict).count()
    }
}

fn check_prior(prior: f64) -> Result<()> {
    if prior > 0.0 && prior < 1.0 {
        Ok(())
    } else {
        invalid(format!("log-weight prior must lie in (0, 1), got {prior}"))
    }
}

/// Separation oracle of `g` as constant-weight statements.
pub fn oracle_constraints<G: GraphView + ?Sized>(g: &G, max_cond: usize) -> Result<ConstraintSet> {
    let n = g.n();
    if max_cond > n.saturating_sub(2) {
        return invalid(format!("max_cond {max_cond} exceeds n - 2 = {}", n.saturating_sub(2)));
    }
    let statements = statement_triples(n, max_cond)
        .into_iter()
        .map(|(x, y, cond)| {
            let verdict = if m_separated_unchecked(g, x, y, cond) {
                Verdict::Independent
            } else {
                Verdict::Dependent
            };
            CiStatement { x, y, cond, verdict, weight: Weight::ONE }
        })
        .collect();
    ConstraintSet::new(n, statements, WeightScheme::Constant)
}

/// `m` samples of `n` real variables, one row per sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    values: DMatrix<f64>,
}

impl Dataset {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return invalid("dataset must have at least one row and one column");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("dataset contains non-finite values");
        }
        Ok(Dataset { values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return invalid("ragged dataset rows");
        }
        Dataset::new(DMatrix::from_fn(m, n, |i, j| rows[i][j]))
    }

    pub fn samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn variables(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Unbiased sample covariance.
    pub fn covariance(&self) -> DMatrix<f64> {
        let m = self.samples();
        let n = self.variables();
        let means: Vec<f64> = (0..n).map(|j| self.values.column(j).mean()).collect();
        let centered = DMatrix::from_fn(m, n, |i, j| self.values[(i, j)] - means[j]);
        let denom = if m > 1 { (m - 1) as f64 } else { 1.0 };
        (centered.transpose() * &centered) / denom
    }
}

/// Partial correlation of `x` and `y` given `z`, from the inverse of the
/// covariance submatrix over `{x, y} ∪ z`.
pub fn partial_correlation(cov: &DMatrix<f64>, x: VertexId, y: VertexId, z: VertexSet) -> Result<f64> {
    let n = cov.nrows();
    if cov.ncols() != n {
        return invalid("covariance matrix must be square");
    }
    if x >= n || y >= n || !z.is_subset(VertexSet::full(n)) {
        return Err(Error::InvalidVertex { vertex: x.max(y).max(z.max().unwrap_or(0)), n });
    }
    if x == y || z.contains(x) || z.contains(y) {
        return invalid(format!("partial correlation needs distinct x, y outside {z}"));
    }
    let idx: Vec<usize> = [x, y].into_iter().chain(z.iter()).collect();
    let k = idx.len();
    let sub = DMatrix::from_fn(k, k, |i, j| cov[(idx[i], idx[j])]);
    let precision = sub
        .cholesky()
        .map(|c| c.inverse())
        .ok_or(Error::Singular { cond: z })?;
    let denom = (precision[(0, 0)] * precision[(1, 1)]).sqrt();
    if !(denom.is_finite() && denom > 0.0) {
        return Err(Error::Singular { cond: z });
    }
    let r = -precision[(0, 1)] / denom;
    Ok(r.clamp(-1.0, 1.0))
}

/// Outcome of one correlational t-test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CiTest {
    pub x: VertexId,
    pub y: VertexId,
    pub cond: VertexSet,
    pub r: f64,
    pub t: f64,
    pub dof: usize,
    pub p_value: f64,
    pub verdict: Verdict,
    /// `|r| = 1`: the test is undefined and the verdict is forced to dependent.
    pub degenerate: bool,
}

/// Runs t-tests against a dataset whose covariance is computed once.
#[derive(Clone, Debug)]
pub struct CiTester {
    cov: DMatrix<f64>,
    samples: usize,
}

impl CiTester {
    pub fn new(data: &Dataset) -> Self {
        CiTester { cov: data.covariance(), samples: data.samples() }
    }

    pub fn variables(&self) -> usize {
        self.cov.nrows()
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn partial_correlation(&self, x: VertexId, y: VertexId, z: VertexSet) -> Result<f64> {
        partial_correlation(&self.cov, x, y, z)
    }

    pub fn test(&self, x: VertexId, y: VertexId, z: VertexSet, alpha: f64) -> Result<CiTest> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return invalid(format!("alpha must lie in (0, 1), got {alpha}"));
        }
        let m = self.samples;
        if m <= z.len() + 2 {
            return invalid(format!(
                "{m} samples are too few for a test with {} conditioning variables",
                z.len()
            ));
        }
        let dof = m - z.len() - 2;
        let r = self.partial_correlation(x, y, z)?;
        let (x, y) = if x < y { (x, y) } else { (y, x) };
        if 1.0 - r.abs() < 1e-12 {
            return Ok(CiTest {
                x,
                y,
                cond: z,
                r,
                t: f64::INFINITY.copysign(r),
                dof,
                p_value: 0.0,
                verdict: Verdict::Dependent,
                degenerate: true,
            });
        }
        let t = r * (dof as f64 / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, dof as f64).expect("positive degrees of freedom");
        let p_value = (2.0 * dist.sf(t.abs())).min(1.0);
        let verdict = if p_value > alpha { Verdict::Independent } else { Verdict::Dependent };
        Ok(CiTest { x, y, cond: z, r, t, dof, p_value, verdict, degenerate: false })
    }
}

/// Single correlational t-test of `x ⫫ y | z` at level `alpha`.
pub fn ci_test(data: &Dataset, x: VertexId, y: VertexId, z: VertexSet, alpha: f64) -> Result<CiTest> {
    CiTester::new(data).test(x, y, z, alpha)
}

/// Tests every `(x, y, cond)` with `|cond| <= max_cond`; constant weights.
pub fn test_constraints(data: &Dataset, max_cond: usize, alpha: f64) -> Result<ConstraintSet> {
    let n = data.variables();
    if max_cond > n.saturating_sub(2) {
        return invalid(format!("max_cond {max_cond} exceeds n - 2 = {}", n.saturating_sub(2)));
    }
    let tester = CiTester::new(data);
    let statements = statement_triples(n, max_cond)
        .into_iter()
        .map(|(x, y, cond)| {
            let t = tester.test(x, y, cond, alpha)?;
            Ok(CiStatement { x, y, cond, verdict: t.verdict, weight: Weight::ONE })
        })
        .collect::<Result<Vec<_>>>()?;
    ConstraintSet::new(n, statements, WeightScheme::Constant)
}

/// Posterior log-odds of independence for a sample partial correlation `r`
/// from `samples` observations under prior independence probability `prior`.
///
/// The Bayes factor of dependence over independence is approximated by the
/// BIC difference of the two nested Gaussian regressions, which differ by one
/// coefficient: `ln BF = -(m/2) ln(1 - r^2) - (1/2) ln m`.
pub fn log_posterior_odds_independence(r: f64, samples: usize, prior: f64) -> f64 {
    let m = samples as f64;
    let one_minus = (1.0 - r * r).max(f64::MIN_POSITIVE);
    let log_bf_dep = -0.5 * m * one_minus.ln() - 0.5 * m.ln();
    (prior / (1.0 - prior)).ln() - log_bf_dep
}

/// Reweights `cs`. Log weights re-derive each verdict from `data` as the more
/// probable hypothesis.
pub fn assign_weights(cs: &ConstraintSet, scheme: WeightScheme, data: Option<&Dataset>) -> Result<ConstraintSet> {
    let statements = match scheme {
        WeightScheme::Constant => cs
            .statements
            .iter()
            .map(|s| CiStatement { weight: Weight::ONE, ..*s })
            .collect(),
        WeightScheme::HardDependencies => cs
            .statements
            .iter()
            .map(|s| CiStatement {
                weight: match s.verdict {
                    Verdict::Dependent => Weight::Infinite,
                    Verdict::Independent => Weight::ONE,
                },
                ..*s
            })
            .collect(),
        WeightScheme::Log { prior } => {
            check_prior(prior)?;
            let data = data.ok_or_else(|| {
                Error::InvalidArgument("log weights need the dataset the statements came from".into())
            })?;
            if data.variables() != cs.n {
                return invalid(format!(
                    "dataset has {} variables, constraint set has {}",
                    data.variables(),
                    cs.n
                ));
            }
            let tester = CiTester::new(data);
            cs.statements
                .iter()
                .map(|s| {
                    let r = tester.partial_correlation(s.x, s.y, s.cond)?;
                    let odds = log_posterior_odds_independence(r, tester.samples(), prior);
                    let verdict = if odds >= 0.0 { Verdict::Independent } else { Verdict::Dependent };
                    Ok(CiStatement { verdict, weight: Weight::Finite(odds.abs()), ..*s })
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    ConstraintSet::new(cs.n, statements, scheme)
}
