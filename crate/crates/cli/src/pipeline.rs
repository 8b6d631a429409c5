//! The `generate` and `run` stages.

use std::path::Path;

use rayon::prelude::*;

use portsel_core::eaf::compute_eaf;
use portsel_core::features::{
    extract_ela, extract_latent_perf, latent_feature_names, ELA_FEATURE_NAMES,
};
use portsel_core::optim::run_batch;
use portsel_core::store::{ExperimentStore, Manifest, FORMAT_VERSION};
use portsel_core::{generate_suite, AlgorithmId, Error, FeatureKind, FunctionId, Result};

use crate::config::Config;

pub(crate) fn with_workers<T: Send>(config: &Config, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", config.workers)))?;
    Ok(pool.install(f))
}

pub fn manifest(config: &Config, d: usize) -> Result<Manifest> {
    Ok(Manifest {
        format_version: FORMAT_VERSION,
        dimension: d,
        master_seed: config.dimension_seed(d),
        budgets: config.budget_grid(d)?,
        targets: config.target_grid()?,
        n_runs: config.n_runs,
        algorithms: config.sorted_algorithms(),
        config_hash: config.data_hash(d)?,
    })
}

/// Opens the existing store for `d`, refusing one built from other settings.
pub fn open_store(config: &Config, root: &Path, d: usize, stage: &str) -> Result<ExperimentStore> {
    let store = ExperimentStore::open(root, d).map_err(|e| match e {
        Error::NotFound(_) => Error::Data(format!(
            "no store for d={d} under {}; run `generate` before `{stage}`",
            root.display()
        )),
        other => other,
    })?;
    if store.manifest().config_hash != config.data_hash(d)? {
        return Err(Error::Config(format!(
            "store {} was built with a different configuration",
            store.dir().display()
        )));
    }
    Ok(store)
}

/// Writes the manifest, suite and ELA features of every configured dimension.
pub fn cmd_generate(config: &Config, root: &Path) -> Result<()> {
    config.validate()?;
    for &d in &config.dims {
        let store = ExperimentStore::create(root, manifest(config, d)?)?;
        let suite = generate_suite(&config.suite_spec(d))?;
        match store.get_suite() {
            Ok(existing) if existing.to_json()? == suite.to_json()? => {}
            Ok(_) => {
                return Err(Error::Config(format!(
                    "{} holds a different suite",
                    store.dir().display()
                )))
            }
            Err(Error::NotFound(_)) => store.put_suite(&suite)?,
            Err(e) => return Err(e),
        }
        if !store.has_features(FeatureKind::Ela) {
            let n = config.ela_samples_per_dim * d;
            let seed = store.manifest().master_seed;
            let vectors = with_workers(config, || {
                suite
                    .functions
                    .par_iter()
                    .map(|f| extract_ela(f, n, seed))
                    .collect::<Result<Vec<_>>>()
            })??;
            let names: Vec<String> = ELA_FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
            store.put_features(FeatureKind::Ela, &names, &vectors)?;
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunSummary {
    /// (function, algorithm) keys whose EAF was computed in this call.
    pub computed: usize,
    /// Keys already complete in the store.
    pub skipped: usize,
}

/// Runs every (function, algorithm) key that has no EAF yet, then derives the
/// performance-based features.
pub fn cmd_run(config: &Config, root: &Path) -> Result<RunSummary> {
    config.validate()?;
    let mut summary = RunSummary::default();
    for &d in &config.dims {
        let store = open_store(config, root, d, "run")?;
        let suite = store.get_suite()?;
        let m = store.manifest().clone();
        let total = config.total_budget(d);
        let keys: Vec<(usize, AlgorithmId)> = (0..suite.functions.len())
            .flat_map(|i| m.algorithms.iter().map(move |&a| (i, a)))
            .collect();
        let done = with_workers(config, || {
            keys.par_iter()
                .map(|&(i, a)| {
                    let f = &suite.functions[i];
                    if store.has_eaf(f.id(), a) {
                        return Ok(false);
                    }
                    let runs = if store.has_trajectories(f.id(), a) {
                        store.get_trajectories(f.id(), a)?
                    } else {
                        let runs = run_batch(
                            &[a],
                            std::slice::from_ref(f),
                            total,
                            m.n_runs,
                            m.master_seed,
                        )?;
                        store.put_trajectories(&runs)?;
                        runs
                    };
                    store.put_eaf(&compute_eaf(&runs, &m.budgets, &m.targets)?)?;
                    Ok(true)
                })
                .collect::<Result<Vec<bool>>>()
        })??;
        let computed = done.iter().filter(|c| **c).count();
        summary.computed += computed;
        summary.skipped += done.len() - computed;

        if computed > 0 || !store.has_features(FeatureKind::LatentPerf) {
            let ids: Vec<FunctionId> = suite.functions.iter().map(|f| f.id()).collect();
            let table = store.load_eaf_table(&ids)?;
            let vectors = ids
                .iter()
                .map(|&f| extract_latent_perf(f, &m.algorithms, total, &table))
                .collect::<Result<Vec<_>>>()?;
            store.put_features(
                FeatureKind::LatentPerf,
                &latent_feature_names(&m.algorithms),
                &vectors,
            )?;
        }
    }
    Ok(summary)
}
