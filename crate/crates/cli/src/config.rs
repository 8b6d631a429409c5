//! Pipeline configuration: defaults, presets, file loading and validation.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use portsel_core::eaf::{BudgetGrid, TargetGrid};
use portsel_core::portfolio::DEFAULT_PENALTY;
use portsel_core::seed::derive_seed;
use portsel_core::suite::SuiteSpec;
use portsel_core::{AlgorithmId, Error, FeatureKind, Result, WeightScheme};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub master_seed: u64,
    pub dims: Vec<usize>,
    pub supported_dims: Vec<usize>,
    pub n_functions: usize,
    pub train_fraction: f64,
    /// Total budget per function is `budget_per_dim * d`.
    pub budget_per_dim: usize,
    pub n_budgets: usize,
    pub target_hi: f64,
    pub target_lo: f64,
    pub n_targets: usize,
    pub n_runs: u32,
    pub algorithms: Vec<AlgorithmId>,
    /// ELA sample size is `ela_samples_per_dim * d`.
    pub ela_samples_per_dim: usize,
    pub ks: Vec<usize>,
    pub schemes: Vec<WeightScheme>,
    pub feature_kinds: Vec<FeatureKind>,
    pub penalty: f64,
    pub sbp_samples: usize,
    pub sbp_subset: usize,
    /// Variant reported in the headline table.
    pub main_k: usize,
    pub main_scheme: WeightScheme,
    pub main_features: FeatureKind,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            master_seed: 42,
            dims: vec![2],
            supported_dims: vec![2, 5, 10],
            n_functions: 80,
            train_fraction: 0.75,
            budget_per_dim: 200,
            n_budgets: 50,
            target_hi: 1e2,
            target_lo: 1e-8,
            n_targets: 51,
            n_runs: 10,
            algorithms: AlgorithmId::ALL.to_vec(),
            ela_samples_per_dim: 50,
            ks: vec![1, 2, 3, 5, 7, 10],
            schemes: WeightScheme::ALL.to_vec(),
            feature_kinds: vec![FeatureKind::Ela, FeatureKind::LatentPerf],
            penalty: DEFAULT_PENALTY,
            sbp_samples: 50,
            sbp_subset: 10,
            main_k: 10,
            main_scheme: WeightScheme::Eq,
            main_features: FeatureKind::Ela,
            workers: 0,
        }
    }
}

/// Keys that determine the stored suite, trajectories, EAFs and features.
#[derive(Serialize)]
struct DataKey<'a> {
    master_seed: u64,
    dimension: usize,
    n_functions: usize,
    train_fraction: f64,
    total_budget: usize,
    budgets: &'a [usize],
    targets: &'a [f64],
    n_runs: u32,
    algorithms: &'a [AlgorithmId],
    ela_samples: usize,
}

impl Config {
    /// Study-sized settings: three dimensions, 1000 functions split 900/100,
    /// `T = 2000 d`.
    pub fn apply_paper_scale(&mut self) {
        self.dims = vec![2, 5, 10];
        self.n_functions = 1000;
        self.train_fraction = 0.9;
        self.budget_per_dim = 2000;
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let is_toml = path.extension().is_some_and(|e| e == "toml");
        let parsed = if is_toml {
            toml::from_str(&text).map_err(|e| e.to_string())
        } else {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn total_budget(&self, d: usize) -> usize {
        self.budget_per_dim * d
    }

    pub fn n_train(&self) -> usize {
        (self.train_fraction * self.n_functions as f64).round() as usize
    }

    pub fn budget_grid(&self, d: usize) -> Result<BudgetGrid> {
        BudgetGrid::equally_spaced(self.total_budget(d), self.n_budgets)
    }

    pub fn target_grid(&self) -> Result<TargetGrid> {
        TargetGrid::log_spaced(self.target_hi, self.target_lo, self.n_targets)
    }

    /// Seed of everything stored for dimension `d`.
    pub fn dimension_seed(&self, d: usize) -> u64 {
        derive_seed(self.master_seed, &[d as u64])
    }

    pub fn suite_spec(&self, d: usize) -> SuiteSpec {
        SuiteSpec {
            dimension: d,
            n_functions: self.n_functions,
            train_fraction: self.train_fraction,
            master_seed: self.dimension_seed(d),
        }
    }

    pub fn sorted_algorithms(&self) -> Vec<AlgorithmId> {
        let mut a = self.algorithms.clone();
        a.sort_unstable();
        a.dedup();
        a
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.dims.is_empty() {
            return fail("dims must not be empty".into());
        }
        if let Some(d) = self.dims.iter().find(|d| !self.supported_dims.contains(d)) {
            return fail(format!(
                "dimension {d} is not supported (supported: {:?})",
                self.supported_dims
            ));
        }
        if self.algorithms.is_empty() {
            return fail("at least one algorithm is required".into());
        }
        if self.n_runs == 0 {
            return fail("n_runs must be at least 1".into());
        }
        for &d in &self.dims {
            self.suite_spec(d).validate()?;
            self.budget_grid(d)?;
        }
        self.target_grid()?;
        let n_train = self.n_train();
        if self.ks.is_empty() || self.ks.iter().any(|&k| k == 0 || k >= n_train) {
            return fail(format!(
                "every k must satisfy 1 <= k < {n_train}, got {:?}",
                self.ks
            ));
        }
        if !self.ks.contains(&self.main_k) {
            return fail(format!(
                "main_k {} is not among ks {:?}",
                self.main_k, self.ks
            ));
        }
        if !self.schemes.contains(&self.main_scheme) {
            return fail(format!(
                "main_scheme {} is not among schemes",
                self.main_scheme
            ));
        }
        if !self.feature_kinds.contains(&self.main_features) {
            return fail(format!(
                "main_features {} is not among feature_kinds",
                self.main_features
            ));
        }
        if self.sbp_samples == 0 || self.sbp_subset == 0 || self.sbp_subset > n_train {
            return fail(format!(
                "SBP* sampling needs 1 <= sbp_subset <= {n_train} and sbp_samples >= 1"
            ));
        }
        if !(self.penalty >= 0.0 && self.penalty.is_finite()) {
            return fail("penalty must be finite and nonnegative".into());
        }
        if self.ela_samples_per_dim < 10 {
            return fail("ela_samples_per_dim must be at least 10".into());
        }
        Ok(())
    }

    /// Hex SHA-256 of the keys that determine stored data for dimension `d`.
    pub fn data_hash(&self, d: usize) -> Result<String> {
        let budgets = self.budget_grid(d)?;
        let targets = self.target_grid()?;
        let key = DataKey {
            master_seed: self.master_seed,
            dimension: d,
            n_functions: self.n_functions,
            train_fraction: self.train_fraction,
            total_budget: self.total_budget(d),
            budgets: budgets.budgets(),
            targets: targets.thresholds(),
            n_runs: self.n_runs,
            algorithms: &self.sorted_algorithms(),
            ela_samples: self.ela_samples_per_dim * d,
        };
        let json = serde_json::to_vec(&key).map_err(|e| Error::Format(e.to_string()))?;
        Ok(hex::encode(Sha256::digest(&json)))
    }
}
