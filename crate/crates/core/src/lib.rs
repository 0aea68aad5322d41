//! Visualization and rank-based testing of bivariate copula symmetries.
//!
//! Three symmetries are covered: reflection (exchangeability), radial and
//! joint. Each is turned into a family of curves indexed by a random anchor
//! that vanish identically under the symmetry; data curves are ranked by
//! modified band depth among curves built from a symmetrized resample.

pub mod cli;
pub mod copula;
pub mod depth;
pub mod empirical;
pub mod error;
pub mod fboxplot;
pub mod kendall;
pub mod seed;
pub mod special;
pub mod study;
pub mod symmetry;
pub mod symmetry_test;
pub mod test_functions;

pub use copula::{tau_to_params, Axis, CopulaSpec, Family};
pub use depth::{modified_band_depth, rank_by_depth, DepthVector};
pub use empirical::{pseudo_observations, DataMatrix, EmpiricalCopula, Provenance, UniformSample};
pub use error::{Error, Result};
pub use fboxplot::{boxplot_summary, render, BoxplotSummary};
pub use study::{run_scenario, StudyResult, StudyScenario};
pub use symmetry::Symmetry;
pub use symmetry_test::{run_test, TestConfig, TestResult};
pub use test_functions::{build_set, draw_anchors, CurveMatrix, FunctionalSet};
