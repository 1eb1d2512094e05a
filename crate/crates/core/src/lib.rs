//! Causal structure learning over mixed graphs with latent confounders.

pub mod asp;
pub mod constraints;
pub mod equivalence;
pub mod error;
pub mod evaluation;
pub mod graph;
pub mod io;
pub mod projection;
pub mod separation;
pub mod simulation;
pub mod solver;

pub use constraints::{CiStatement, ConstraintSet, Dataset, Verdict, Weight, WeightScheme};
pub use error::{Error, Result};
pub use graph::{Dag, GraphView, Mag, MixedGraph, PairState, Smcm, VertexId, VertexSet};
pub use projection::{latent_project, smcm_to_mag, LatentDag};
pub use separation::{m_separated, IndependenceModel, SeparationStatement};
pub use solver::{solve, AssumptionMode, Cost, SearchSpace, SolverConfig, SolverResult};
pub use asp::{emit_program, AspProgram, EmitOptions};
pub use evaluation::{ExperimentReport, ReportRow, SchemeKind};
pub use simulation::{Confounding, LinearGaussianScm};
