//! Discretized empirical attainment functions.
//!
//! For one (function, algorithm) pair the EAF is a `|B| x |E|` grid whose
//! entry `(b, eps)` is the fraction of runs whose best-so-far gap after `b`
//! evaluations is at most `eps`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{AlgorithmId, RunTrajectory};
use crate::suite::FunctionId;

/// Strictly increasing evaluation counts at which attainment is measured.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct BudgetGrid {
    budgets: Vec<usize>,
}

impl BudgetGrid {
    pub fn new(budgets: Vec<usize>) -> Result<Self> {
        if budgets.len() < 2 {
            return Err(Error::Config(
                "a budget grid needs at least 2 budgets".into(),
            ));
        }
        if budgets[0] == 0 || budgets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "budgets must be positive and strictly increasing".into(),
            ));
        }
        Ok(Self { budgets })
    }

    /// `n` budgets `T/n, 2T/n, ..., T`.
    pub fn equally_spaced(total: usize, n: usize) -> Result<Self> {
        if n < 2 || total == 0 || !total.is_multiple_of(n) {
            return Err(Error::Config(format!(
                "total budget {total} must be a positive multiple of the grid size {n} (n >= 2)"
            )));
        }
        let step = total / n;
        Self::new((1..=n).map(|i| i * step).collect())
    }

    pub fn budgets(&self) -> &[usize] {
        &self.budgets
    }

    pub fn len(&self) -> usize {
        self.budgets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.budgets.is_empty()
    }

    pub fn min(&self) -> usize {
        self.budgets[0]
    }

    pub fn max(&self) -> usize {
        self.budgets[self.budgets.len() - 1]
    }

    pub fn index_of(&self, budget: usize) -> Option<usize> {
        self.budgets.binary_search(&budget).ok()
    }
}

impl TryFrom<Vec<usize>> for BudgetGrid {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<BudgetGrid> for Vec<usize> {
    fn from(g: BudgetGrid) -> Self {
        g.budgets
    }
}

/// Positive attainment thresholds, loosest first (strictly decreasing).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TargetGrid {
    thresholds: Vec<f64>,
}

pub const DEFAULT_TARGET_HI: f64 = 1e2;
pub const DEFAULT_TARGET_LO: f64 = 1e-8;
pub const DEFAULT_TARGET_COUNT: usize = 51;

impl TargetGrid {
    pub fn new(thresholds: Vec<f64>) -> Result<Self> {
        if thresholds.len() < 2 {
            return Err(Error::Config(
                "a target grid needs at least 2 thresholds".into(),
            ));
        }
        if thresholds.iter().any(|t| !(t.is_finite() && *t > 0.0))
            || thresholds.windows(2).any(|w| w[0] <= w[1])
        {
            return Err(Error::Config(
                "thresholds must be finite, positive and strictly decreasing".into(),
            ));
        }
        Ok(Self { thresholds })
    }

    /// `n` thresholds evenly spaced in log10 from `hi` down to `lo`.
    pub fn log_spaced(hi: f64, lo: f64, n: usize) -> Result<Self> {
        if n < 2 || !(hi > lo && lo > 0.0) {
            return Err(Error::Config(format!(
                "invalid log grid [{hi}, {lo}] with {n} points"
            )));
        }
        let (a, b) = (hi.log10(), lo.log10());
        let step = (a - b) / (n - 1) as f64;
        Self::new((0..n).map(|i| 10f64.powf(a - step * i as f64)).collect())
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }
}

impl Default for TargetGrid {
    fn default() -> Self {
        Self::log_spaced(DEFAULT_TARGET_HI, DEFAULT_TARGET_LO, DEFAULT_TARGET_COUNT)
            .expect("default grid is valid")
    }
}

impl TryFrom<Vec<f64>> for TargetGrid {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<TargetGrid> for Vec<f64> {
    fn from(g: TargetGrid) -> Self {
        g.thresholds
    }
}

/// The fixed absolute target grid. Trajectories only gate the call; the grid
/// does not adapt to them.
pub fn default_target_grid(trajectories: &[RunTrajectory]) -> Result<TargetGrid> {
    if trajectories.is_empty() {
        return Err(Error::Usage(
            "default_target_grid needs trajectories".into(),
        ));
    }
    Ok(TargetGrid::default())
}

#[derive(Clone, Debug, PartialEq)]
pub struct EafMatrix {
    pub function_id: FunctionId,
    pub algorithm: AlgorithmId,
    pub n_runs: u32,
    n_budgets: usize,
    n_targets: usize,
    /// Row-major: one row per budget, one column per threshold.
    values: Vec<f64>,
}

impl EafMatrix {
    pub fn from_values(
        function_id: FunctionId,
        algorithm: AlgorithmId,
        n_runs: u32,
        n_budgets: usize,
        n_targets: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        if values.len() != n_budgets * n_targets {
            return Err(Error::Format(format!(
                "EAF for ({function_id}, {algorithm}) has {} values, expected {}x{}",
                values.len(),
                n_budgets,
                n_targets
            )));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Format(format!(
                "EAF for ({function_id}, {algorithm}) has entries outside [0, 1]"
            )));
        }
        Ok(Self {
            function_id,
            algorithm,
            n_runs,
            n_budgets,
            n_targets,
            values,
        })
    }

    pub fn n_budgets(&self) -> usize {
        self.n_budgets
    }

    pub fn n_targets(&self) -> usize {
        self.n_targets
    }

    pub fn get(&self, budget_index: usize, target_index: usize) -> f64 {
        self.values[budget_index * self.n_targets + target_index]
    }

    /// Attainment over all thresholds at one budget.
    pub fn row(&self, budget_index: usize) -> &[f64] {
        &self.values[budget_index * self.n_targets..(budget_index + 1) * self.n_targets]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

pub fn compute_eaf(
    trajectories: &[RunTrajectory],
    budgets: &BudgetGrid,
    targets: &TargetGrid,
) -> Result<EafMatrix> {
    let first = trajectories
        .first()
        .ok_or_else(|| Error::Usage("compute_eaf needs at least one trajectory".into()))?;
    let key = (first.function_id, first.algorithm);
    let thresholds = targets.thresholds();
    let mut counts = vec![0u32; budgets.len() * thresholds.len()];

    for t in trajectories {
        if (t.function_id, t.algorithm) != key {
            return Err(Error::Usage(format!(
                "trajectories mix ({}, {}) with ({}, {})",
                key.0, key.1, t.function_id, t.algorithm
            )));
        }
        if t.best_so_far.len() < budgets.max() {
            return Err(Error::Data(format!(
                "run {} of ({}, {}) has {} evaluations, budget grid needs {}",
                t.run_index,
                t.function_id,
                t.algorithm,
                t.best_so_far.len(),
                budgets.max()
            )));
        }
        for (bi, &b) in budgets.budgets().iter().enumerate() {
            let gap = t.best_so_far[b - 1];
            // thresholds are decreasing, so the attained ones form a prefix
            let attained = thresholds.partition_point(|&eps| gap <= eps);
            let row = &mut counts[bi * thresholds.len()..(bi + 1) * thresholds.len()];
            row[..attained].iter_mut().for_each(|c| *c += 1);
        }
    }

    let n = trajectories.len() as u32;
    let values = counts.into_iter().map(|c| c as f64 / n as f64).collect();
    EafMatrix::from_values(key.0, key.1, n, budgets.len(), thresholds.len(), values)
}

/// Read access to EAF matrices sharing one pair of grids.
pub trait EafSource: Sync {
    fn budgets(&self) -> &BudgetGrid;
    fn targets(&self) -> &TargetGrid;
    fn matrix(&self, function: FunctionId, algorithm: AlgorithmId) -> Result<&EafMatrix>;
}

#[derive(Clone, Debug)]
pub struct EafTable {
    budgets: BudgetGrid,
    targets: TargetGrid,
    matrices: BTreeMap<(FunctionId, AlgorithmId), EafMatrix>,
}

impl EafTable {
    pub fn new(budgets: BudgetGrid, targets: TargetGrid) -> Self {
        Self {
            budgets,
            targets,
            matrices: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, matrix: EafMatrix) -> Result<()> {
        if matrix.n_budgets() != self.budgets.len() || matrix.n_targets() != self.targets.len() {
            return Err(Error::Data(format!(
                "EAF for ({}, {}) is {}x{}, table grids are {}x{}",
                matrix.function_id,
                matrix.algorithm,
                matrix.n_budgets(),
                matrix.n_targets(),
                self.budgets.len(),
                self.targets.len()
            )));
        }
        self.matrices
            .insert((matrix.function_id, matrix.algorithm), matrix);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &EafMatrix> {
        self.matrices.values()
    }
}

impl EafSource for EafTable {
    fn budgets(&self) -> &BudgetGrid {
        &self.budgets
    }

    fn targets(&self) -> &TargetGrid {
        &self.targets
    }

    fn matrix(&self, function: FunctionId, algorithm: AlgorithmId) -> Result<&EafMatrix> {
        self.matrices
            .get(&(function, algorithm))
            .ok_or_else(|| Error::Data(format!("no EAF data for ({function}, {algorithm})")))
    }
}
