//! Random linear Gaussian models with latent confounding, their covariance,
//! and sampled data.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::constraints::Dataset;
use crate::error::{invalid, Error, Result};
use crate::graph::{pairs, GraphView, MixedGraph, Smcm};

/// Entries with smaller magnitude are treated as structural zeros.
pub const ZERO_TOL: f64 = 1e-12;

const COEF_MIN: f64 = 0.2;
const COEF_MAX: f64 = 0.8;
const ERROR_MEAN: f64 = 0.5;
const ERROR_SD: f64 = 0.1;

/// How the error covariance (and so the bidirected part) is generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Confounding {
    /// Omega is the covariance of an auxiliary linear DAG model built the
    /// same way; every pair joined by a trek in it is confounded.
    PaperLiteral,
    /// Exactly `k` random pairs are confounded.
    Sparse(usize),
}

impl Confounding {
    pub fn default_for(n: usize) -> Self {
        Confounding::Sparse(n / 2)
    }
}

impl fmt::Display for Confounding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Confounding::PaperLiteral => f.write_str("paper-literal"),
            Confounding::Sparse(k) => write!(f, "sparse:{k}"),
        }
    }
}

impl FromStr for Confounding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-literal" | "literal" => Ok(Confounding::PaperLiteral),
            _ => match s.strip_prefix("sparse:").map(str::parse::<usize>) {
                Some(Ok(k)) => Ok(Confounding::Sparse(k)),
                _ => invalid(format!("confounding must be `paper-literal` or `sparse:<k>`, got {s:?}")),
            },
        }
    }
}

/// `X = B X + e`, `e ~ N(0, Omega)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearGaussianScm {
    graph: Smcm,
    b: DMatrix<f64>,
    omega: DMatrix<f64>,
}

impl LinearGaussianScm {
    /// Checks that `b[(j, i)] != 0` exactly when `i -> j`, that `omega` is
    /// symmetric positive definite, and that its off-diagonal pattern matches
    /// the bidirected edges.
    pub fn new(graph: Smcm, b: DMatrix<f64>, omega: DMatrix<f64>) -> Result<Self> {
        let n = graph.n();
        if b.shape() != (n, n) || omega.shape() != (n, n) {
            return invalid(format!("coefficient and error matrices must be {n}x{n}"));
        }
        for j in 0..n {
            for i in 0..n {
                let edge = graph.parents(j).contains(i);
                if edge != (b[(j, i)].abs() > ZERO_TOL) {
                    return Err(Error::InvalidGraph(format!(
                        "coefficient B[{j},{i}] does not match the edge {i} -> {j}"
                    )));
                }
                if i != j {
                    if (omega[(i, j)] - omega[(j, i)]).abs() > 1e-12 {
                        return invalid("error covariance is not symmetric");
                    }
                    if graph.siblings(i).contains(j) != (omega[(i, j)].abs() > ZERO_TOL) {
                        return Err(Error::InvalidGraph(format!(
                            "error covariance at ({i},{j}) does not match the edge {i} <-> {j}"
                        )));
                    }
                }
            }
        }
        if omega.clone().cholesky().is_none() {
            return invalid("error covariance is not positive definite");
        }
        Ok(LinearGaussianScm { graph, b, omega })
    }

    pub fn graph(&self) -> &Smcm {
        &self.graph
    }

    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn error_covariance(&self) -> &DMatrix<f64> {
        &self.omega
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }
}

fn coefficient(rng: &mut ChaCha8Rng) -> f64 {
    let magnitude = rng.random_range(COEF_MIN..=COEF_MAX);
    if rng.random_bool(0.5) {
        magnitude
    } else {
        -magnitude
    }
}

fn error_variance(rng: &mut ChaCha8Rng) -> f64 {
    let dist = Normal::new(ERROR_MEAN, ERROR_SD).expect("valid normal");
    loop {
        let v: f64 = dist.sample(rng);
        if v > 0.0 {
            return v;
        }
    }
}

/// Random DAG coefficients: a random vertex order, then each forward pair
/// gets an edge with probability `avg_degree / (n - 1)`.
fn random_coefficients(rng: &mut ChaCha8Rng, n: usize, avg_degree: f64) -> DMatrix<f64> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let p = if n > 1 { (avg_degree / (n - 1) as f64).min(1.0) } else { 0.0 };
    let mut b = DMatrix::zeros(n, n);
    for a in 0..n {
        for c in a + 1..n {
            if rng.random_bool(p) {
                b[(order[c], order[a])] = coefficient(rng);
            }
        }
    }
    b
}

fn covariance_of(b: &DMatrix<f64>, omega: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = b.nrows();
    let inv = (DMatrix::identity(n, n) - b)
        .try_inverse()
        .ok_or_else(|| Error::InvalidGraph("I - B is singular".into()))?;
    let sigma = &inv * omega * inv.transpose();
    Ok((&sigma + sigma.transpose()) * 0.5)
}

/// Draws a random model. `avg_degree` counts directed-edge endpoints per
/// vertex, so the expected number of directed edges is `n * avg_degree / 2`.
pub fn generate_scm(n: usize, avg_degree: f64, confounding: Confounding, seed: u64) -> Result<LinearGaussianScm> {
    if n < 2 {
        return invalid(format!("need at least 2 vertices, got {n}"));
    }
    if !(avg_degree >= 0.0 && avg_degree.is_finite()) {
        return invalid(format!("average degree must be non-negative, got {avg_degree}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = random_coefficients(&mut rng, n, avg_degree);
    let mut omega = match confounding {
        Confounding::PaperLiteral => {
            let aux = random_coefficients(&mut rng, n, avg_degree);
            let d = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| error_variance(&mut rng)));
            covariance_of(&aux, &d)?
        }
        Confounding::Sparse(k) => {
            let all = pairs(n);
            if k > all.len() {
                return invalid(format!("cannot confound {k} of {} pairs", all.len()));
            }
            let chosen: Vec<_> = all.choose_multiple(&mut rng, k).copied().collect();
            let mut omega = DMatrix::zeros(n, n);
            for (i, j) in chosen {
                let c = error_variance(&mut rng);
                omega[(i, j)] = c;
                omega[(j, i)] = c;
            }
            // Strict diagonal dominance keeps Omega positive definite
            // without disturbing its zero pattern.
            for i in 0..n {
                let off: f64 = (0..n).filter(|&j| j != i).map(|j| omega[(i, j)].abs()).sum();
                omega[(i, i)] = off + error_variance(&mut rng);
            }
            omega
        }
    };
    for v in omega.iter_mut() {
        if v.abs() <= ZERO_TOL {
            *v = 0.0;
        }
    }
    let mut directed = Vec::new();
    let mut bidirected = Vec::new();
    for j in 0..n {
        for i in 0..n {
            if b[(j, i)] != 0.0 {
                directed.push((i, j));
            }
            if i < j && omega[(i, j)] != 0.0 {
                bidirected.push((i, j));
            }
        }
    }
    let graph = Smcm::new(MixedGraph::new(n, &directed, &bidirected)?)?;
    LinearGaussianScm::new(graph, b, omega).map_err(|e| Error::Generation(e.to_string()))
}

/// `Sigma = (I - B)^-1 Omega (I - B)^-T`.
pub fn observational_covariance(scm: &LinearGaussianScm) -> Result<DMatrix<f64>> {
    covariance_of(&scm.b, &scm.omega)
}

/// Lower factor `L` with `L L^T = sigma`; falls back to an eigenvalue floor
/// when `sigma` is numerically singular.
fn sampling_factor(sigma: DMatrix<f64>) -> DMatrix<f64> {
    if let Some(c) = sigma.clone().cholesky() {
        return c.l();
    }
    let eig = sigma.symmetric_eigen();
    let sqrt = eig.eigenvalues.map(|l| l.max(1e-10).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&sqrt)
}

/// `m` independent rows from `N(0, Sigma)`; reproducible per seed.
pub fn sample_data(scm: &LinearGaussianScm, m: usize, seed: u64) -> Result<Dataset> {
    if m == 0 {
        return invalid("sample count must be positive");
    }
    let n = scm.n();
    let factor = sampling_factor(observational_covariance(scm)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = DMatrix::from_fn(n, m, |_, _| StandardNormal.sample(&mut rng));
    Dataset::new((factor * noise).transpose())
}
