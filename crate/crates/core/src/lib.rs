//! Sequential algorithm portfolios for fixed-budget black-box optimization.
//!
//! A portfolio is an ordered list of (algorithm, budget) pairs run one after
//! the other. This crate generates benchmark suites, runs the optimizers,
//! turns their traces into empirical attainment functions, builds portfolios
//! greedily and selects one per unseen function from its landscape
//! neighbors.

pub mod baseline;
pub mod eaf;
pub mod error;
pub mod features;
pub mod optim;
pub mod portfolio;
pub mod seed;
pub mod selector;
pub mod similarity;
pub mod store;
pub mod suite;

pub use eaf::{compute_eaf, BudgetGrid, EafMatrix, EafSource, EafTable, TargetGrid};
pub use error::{Error, Result};
pub use features::{FeatureKind, FeatureVector, Standardizer};
pub use optim::{AlgorithmId, Objective, RunTrajectory};
pub use portfolio::{
    greedy_build, perf, GreedyConfig, Pair, Portfolio, PortfolioRecord, WeightVector,
};
pub use selector::{select_final, Quadrant, SelectionOutcome, Side};
pub use similarity::{knn, Neighborhood, WeightScheme};
pub use store::{ExperimentStore, Manifest};
pub use suite::{generate_suite, FunctionId, GeneratedFunction, Suite, SuiteSpec};
