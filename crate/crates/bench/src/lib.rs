//! Shared fixture for the benchmarks: a small desk-sized 2-d experiment.

use portsel_core::eaf::EafSource;
use portsel_core::optim::run_batch;
use portsel_core::{
    compute_eaf, generate_suite, AlgorithmId, BudgetGrid, EafTable, RunTrajectory, Suite,
    SuiteSpec, TargetGrid,
};

pub const TOTAL_BUDGET: usize = 400;
pub const N_RUNS: u32 = 10;

pub struct Fixture {
    pub suite: Suite,
    pub trajectories: Vec<RunTrajectory>,
    pub table: EafTable,
}

impl Fixture {
    pub fn new(n_functions: usize) -> Self {
        let suite = generate_suite(&SuiteSpec {
            dimension: 2,
            n_functions,
            train_fraction: 0.75,
            master_seed: 7,
        })
        .expect("valid suite spec");
        let trajectories = run_batch(&AlgorithmId::ALL, &suite.functions, TOTAL_BUDGET, N_RUNS, 7)
            .expect("optimizer runs");
        let mut table = EafTable::new(
            BudgetGrid::equally_spaced(TOTAL_BUDGET, 50).expect("budget grid"),
            TargetGrid::default(),
        );
        for runs in trajectories.chunks(N_RUNS as usize) {
            let m = compute_eaf(runs, table.budgets(), table.targets()).expect("EAF");
            table.insert(m).expect("matching grids");
        }
        Self {
            suite,
            trajectories,
            table,
        }
    }

    /// The runs of the first (function, algorithm) key.
    pub fn first_key_runs(&self) -> &[RunTrajectory] {
        &self.trajectories[..N_RUNS as usize]
    }
}
