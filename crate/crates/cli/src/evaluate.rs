//! The `evaluate` stage: baselines, per-target selection, and the results
//! bundle.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use portsel_core::baseline::{
    dedup_pool, sbp_star, single_best_solver, virtual_best_portfolio, virtual_best_solver,
    BaselineReport, Choice, SbpConfig, SbpStar,
};
use portsel_core::eaf::EafTable;
use portsel_core::portfolio::{greedy_build, perf, perf_on, PortfolioRecord, Provenance};
use portsel_core::selector::{build_ksbp_star, diagnose, quadrant_summary, select_local};
use portsel_core::similarity::weights;
use portsel_core::store::ExperimentStore;
use portsel_core::{
    knn, AlgorithmId, Error, FeatureKind, FunctionId, GreedyConfig, Neighborhood, Portfolio,
    Result, SelectionOutcome, Side, Standardizer, WeightScheme, WeightVector,
};

use crate::config::Config;
use crate::pipeline::{open_store, with_workers};
use crate::table::{g6, Table};

/// Rows of the headline table, in order.
pub const METHODS: [&str; 7] = ["SBS", "k-SBS", "VBS", "SBP*", "k-SBP*", "k-SBP", "VBP"];

pub const RESULTS_DIR: &str = "results";

/// Files of the results bundle, in report order.
pub const BUNDLE_CSVS: [&str; 8] = [
    "table_improvement.csv",
    "table_features.csv",
    "weights_table.csv",
    "sweep_k.csv",
    "quadrants.csv",
    "pairwise_vbs_vs_ksbp.csv",
    "selection_outcomes.csv",
    "checks.csv",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variant {
    pub features: FeatureKind,
    pub k: usize,
    pub scheme: WeightScheme,
}

impl Variant {
    pub fn main(config: &Config) -> Self {
        Self {
            features: config.main_features,
            k: config.main_k,
            scheme: config.main_scheme,
        }
    }
}

#[derive(Clone, Debug)]
pub struct VariantResult {
    pub variant: Variant,
    /// One per test function, in test order.
    pub outcomes: Vec<SelectionOutcome>,
    /// k-SBS choice per test function with its performance on the target.
    pub ksbs: Vec<Choice<AlgorithmId>>,
}

#[derive(Clone, Debug)]
pub struct DimensionResult {
    pub dimension: usize,
    pub total_budget: usize,
    pub train: Vec<FunctionId>,
    pub test: Vec<FunctionId>,
    pub sbs: Choice<AlgorithmId>,
    pub vbs_train_mean: f64,
    pub vbs_test: Vec<Choice<AlgorithmId>>,
    pub sbs_test: Vec<f64>,
    pub sbp_star: SbpStar,
    pub sbp_star_test: Vec<f64>,
    pub vbp_pool: Vec<Portfolio>,
    pub vbp_test: Vec<Choice<usize>>,
    pub variants: Vec<VariantResult>,
    /// Largest configured neighborhood of every test function, per feature kind.
    pub neighborhoods: BTreeMap<FeatureKind, Vec<Neighborhood>>,
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

/// Mean and sample standard deviation.
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    let m = mean(v);
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
    (m, var.sqrt())
}

/// Percent improvement over the SBS per function; functions where the SBS
/// scores 0 are left out.
pub fn relative_improvement(perf: &[f64], sbs: &[f64]) -> Vec<f64> {
    perf.iter()
        .zip(sbs)
        .filter(|(_, s)| **s != 0.0)
        .map(|(p, s)| 100.0 * (p - s) / s)
        .collect()
}

impl DimensionResult {
    pub fn variant(&self, v: Variant) -> Option<&VariantResult> {
        self.variants.iter().find(|r| r.variant == v)
    }

    /// Per-test-function performance of `method`, using `variant` for the
    /// neighborhood-based methods.
    pub fn test_perf(&self, method: &str, variant: Variant) -> Vec<f64> {
        let vr = || self.variant(variant).expect("configured variant");
        match method {
            "SBS" => self.sbs_test.clone(),
            "k-SBS" => vr().ksbs.iter().map(|c| c.perf).collect(),
            "VBS" => self.vbs_test.iter().map(|c| c.perf).collect(),
            "SBP*" => self.sbp_star_test.clone(),
            "k-SBP*" => vr().outcomes.iter().map(|o| o.final_perf_ksbp).collect(),
            "k-SBP" => vr()
                .outcomes
                .iter()
                .map(|o| o.final_perf_chosen())
                .collect(),
            "VBP" => self.vbp_test.iter().map(|c| c.perf).collect(),
            _ => panic!("unknown method {method}"),
        }
    }

    pub fn improvement(&self, method: &str, variant: Variant) -> Vec<f64> {
        relative_improvement(&self.test_perf(method, variant), &self.sbs_test)
    }
}

fn features_of(
    store: &ExperimentStore,
    kind: FeatureKind,
) -> Result<BTreeMap<FunctionId, portsel_core::FeatureVector>> {
    let (_, vectors) = store.get_features(kind).map_err(|e| match e {
        Error::NotFound(p) => Error::Data(format!(
            "missing {kind} features ({p}); run `{}` first",
            if kind == FeatureKind::Ela {
                "generate"
            } else {
                "run"
            }
        )),
        other => other,
    })?;
    Ok(vectors.into_iter().map(|v| (v.function_id, v)).collect())
}

fn load_table(store: &ExperimentStore, ids: &[FunctionId]) -> Result<EafTable> {
    store.load_eaf_table(ids).map_err(|e| match e {
        Error::NotFound(p) => Error::Data(format!("missing EAF data ({p}); run `run` first")),
        other => other,
    })
}

pub fn evaluate_dimension(config: &Config, store: &ExperimentStore) -> Result<DimensionResult> {
    let suite = store.get_suite()?;
    let m = store.manifest().clone();
    let d = m.dimension;
    let total = config.total_budget(d);
    let algs = m.algorithms.clone();
    let greedy = GreedyConfig {
        total_budget: total,
        penalty: config.penalty,
    };
    let (train, test) = (suite.train_ids.clone(), suite.test_ids.clone());
    let all: Vec<FunctionId> = suite.functions.iter().map(|f| f.id()).collect();
    let table = load_table(store, &all)?;

    let sbs = single_best_solver(&train, &algs, total, &table)?;
    let vbs_train = virtual_best_solver(&train, &algs, total, &table)?;
    let vbs_train_mean = mean(&vbs_train.values().map(|c| c.perf).collect::<Vec<_>>());
    let vbs_test: Vec<Choice<AlgorithmId>> = virtual_best_solver(&test, &algs, total, &table)?
        .into_values()
        .collect();
    let sbp_cfg = SbpConfig {
        n_samples: config.sbp_samples,
        subset_size: config.sbp_subset,
    };
    let sbp = sbp_star(&train, &algs, greedy, sbp_cfg, m.master_seed, &table)?;

    let k_max = *config.ks.iter().max().expect("validated");
    let mut neighborhoods = BTreeMap::new();
    for &kind in &config.feature_kinds {
        let raw = features_of(store, kind)?;
        let get = |f: FunctionId| {
            raw.get(&f)
                .ok_or_else(|| Error::Data(format!("no {kind} features for {f}")))
        };
        let train_vecs = train
            .iter()
            .map(|&f| get(f).cloned())
            .collect::<Result<Vec<_>>>()?;
        let standardizer = Standardizer::fit(&train_vecs)?;
        store.put_standardizer(&standardizer)?;
        let z_train = train_vecs
            .iter()
            .map(|v| standardizer.transform(v))
            .collect::<Result<Vec<_>>>()?;
        let pairs: Vec<(FunctionId, &[f64])> = z_train
            .iter()
            .map(|v| (v.function_id, v.values.as_slice()))
            .collect();
        let hoods = test
            .iter()
            .map(|&t| {
                let z = standardizer.transform(get(t)?)?;
                knn(t, &z.values, &pairs, k_max)
            })
            .collect::<Result<Vec<_>>>()?;
        neighborhoods.insert(kind, hoods);
    }

    let mut ks = config.ks.clone();
    ks.sort_unstable();
    ks.dedup();
    let variants: Vec<Variant> = config
        .feature_kinds
        .iter()
        .flat_map(|&features| {
            ks.iter().flat_map(move |&k| {
                config.schemes.iter().map(move |&scheme| Variant {
                    features,
                    k,
                    scheme,
                })
            })
        })
        .collect();
    let jobs: Vec<(usize, usize)> = (0..variants.len())
        .flat_map(|v| (0..test.len()).map(move |t| (v, t)))
        .collect();
    let solved = with_workers(config, || {
        jobs.par_iter()
            .map(|&(vi, ti)| {
                let v = variants[vi];
                let hood = neighborhoods[&v.features][ti].truncate(v.k)?;
                let local = build_ksbp_star(&hood, v.scheme, &algs, greedy, &table)?;
                let selection =
                    select_local(&hood, v.scheme, local, sbp.portfolio.clone(), &table)?;
                let ksbs = best_single_on(&hood, v.scheme, &algs, total, &table)?;
                let outcome = diagnose(selection, &table)?;
                let ksbs_final = perf_on(hood.target, &Portfolio::singleton(ksbs, total), &table)?;
                Ok((
                    outcome,
                    Choice {
                        choice: ksbs,
                        perf: ksbs_final,
                    },
                ))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let mut solved = solved.into_iter();
    let variants: Vec<VariantResult> = variants
        .into_iter()
        .map(|variant| {
            let (outcomes, ksbs) = solved.by_ref().take(test.len()).unzip();
            VariantResult {
                variant,
                outcomes,
                ksbs,
            }
        })
        .collect();

    let mut pool: Vec<Portfolio> = algs
        .iter()
        .map(|&a| Portfolio::singleton(a, total))
        .collect();
    pool.push(sbp.portfolio.clone());
    for &t in &test {
        pool.push(greedy_build(
            &[t],
            &WeightVector::uniform(1),
            &algs,
            greedy,
            &table,
        )?);
    }
    for v in &variants {
        pool.extend(v.outcomes.iter().map(|o| o.selection.ksbp_star.clone()));
    }
    let vbp_pool = dedup_pool(pool);
    let vbp_test: Vec<Choice<usize>> = virtual_best_portfolio(&test, &vbp_pool, &table)?
        .into_values()
        .collect();

    let single = |a: AlgorithmId| Portfolio::singleton(a, total);
    let sbs_test = test
        .iter()
        .map(|&t| perf_on(t, &single(sbs.choice), &table))
        .collect::<Result<Vec<_>>>()?;
    let sbp_star_test = test
        .iter()
        .map(|&t| perf_on(t, &sbp.portfolio, &table))
        .collect::<Result<Vec<_>>>()?;

    Ok(DimensionResult {
        dimension: d,
        total_budget: total,
        train,
        test,
        sbs,
        vbs_train_mean,
        vbs_test,
        sbs_test,
        sbp_star_test,
        sbp_star: sbp,
        vbp_pool,
        vbp_test,
        variants,
        neighborhoods,
    })
}

/// Best single algorithm on the weighted neighborhood; ties go to the lowest
/// algorithm code.
fn best_single_on(
    hood: &Neighborhood,
    scheme: WeightScheme,
    algs: &[AlgorithmId],
    total: usize,
    table: &EafTable,
) -> Result<AlgorithmId> {
    let w = weights(scheme, hood);
    let mut best: Option<(f64, AlgorithmId)> = None;
    for &a in algs {
        let p = perf(&hood.neighbors, &Portfolio::singleton(a, total), &w, table)?;
        if best.is_none_or(|(top, _)| p > top) {
            best = Some((p, a));
        }
    }
    Ok(best.expect("at least one algorithm").1)
}

fn quadrant_row(v: &VariantResult) -> Result<Vec<String>> {
    let q = quadrant_summary(v.outcomes.iter().map(|o| &o.quadrant))?;
    Ok(vec![g6(q.ll), g6(q.lg), g6(q.gl), g6(q.gg)])
}

fn allocation_mean<'a>(
    portfolios: impl Iterator<Item = &'a Portfolio>,
    algs: &[AlgorithmId],
    total: usize,
) -> BTreeMap<String, f64> {
    let mut sum: BTreeMap<AlgorithmId, f64> = algs.iter().map(|&a| (a, 0.0)).collect();
    let mut n = 0usize;
    for p in portfolios {
        for (a, f) in p.allocation(total) {
            *sum.entry(a).or_insert(0.0) += f;
        }
        n += 1;
    }
    sum.into_iter()
        .map(|(a, s)| (a.name().to_string(), s / n.max(1) as f64))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub scope: String,
    pub name: &'static str,
    pub value: f64,
    pub pass: bool,
    /// Hard checks must hold on every run; soft ones are only reported.
    pub hard: bool,
}

pub fn checks(config: &Config, results: &[DimensionResult]) -> Vec<Check> {
    let main = Variant::main(config);
    let mut out = Vec::new();
    let imp = |r: &DimensionResult, m: &str, v: Variant| mean(&r.improvement(m, v));
    for r in results {
        let scope = format!("d{}", r.dimension);
        let mut push = |name, value: f64, pass, hard| {
            out.push(Check {
                scope: scope.clone(),
                name,
                value,
                pass,
                hard,
            })
        };
        push(
            "vbs_ge_sbs_train",
            r.vbs_train_mean - r.sbs.perf,
            r.vbs_train_mean >= r.sbs.perf,
            true,
        );
        let vbp = mean(&r.test_perf("VBP", main));
        let vbs = mean(&r.test_perf("VBS", main));
        let sbp = mean(&r.test_perf("SBP*", main));
        push("vbp_ge_vbs_test", vbp - vbs, vbp >= vbs, true);
        push("vbp_ge_sbp_star_test", vbp - sbp, vbp >= sbp, true);
        let sbp_imp = imp(r, "SBP*", main);
        let vbs_imp = imp(r, "VBS", main);
        push(
            "sbp_star_improvement_positive",
            sbp_imp,
            sbp_imp > 0.0,
            false,
        );
        push(
            "sbp_star_improvement_exceeds_vbs",
            sbp_imp - vbs_imp,
            sbp_imp > vbs_imp,
            false,
        );
        let ela = Variant {
            features: FeatureKind::Ela,
            ..main
        };
        let latent = Variant {
            features: FeatureKind::LatentPerf,
            ..main
        };
        if r.variant(ela).is_some() && r.variant(latent).is_some() {
            let gap_ela = (vbs_imp - imp(r, "k-SBS", ela)).abs();
            let gap_latent = (vbs_imp - imp(r, "k-SBS", latent)).abs();
            push(
                "latent_ksbs_closer_to_vbs",
                gap_ela - gap_latent,
                gap_latent < gap_ela,
                false,
            );
            let diff = imp(r, "k-SBP", latent) - imp(r, "k-SBP", ela);
            push("latent_ksbp_ge_ela_ksbp", diff, diff >= 0.0, false);
        }
    }
    out
}

/// Writes every CSV of the bundle plus `portfolios.json` into `dir`.
pub fn write_bundle(config: &Config, results: &[DimensionResult], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let main = Variant::main(config);
    let write = |name: &str, t: &Table| t.write(&dir.join(name));

    let mut header = vec!["method".to_string()];
    for r in results {
        header.push(format!("d{}_mean", r.dimension));
        header.push(format!("d{}_std", r.dimension));
    }
    header.extend(["overall_mean".to_string(), "overall_std".to_string()]);
    let mut t = Table {
        header,
        rows: Vec::new(),
    };
    for method in METHODS {
        let mut row = vec![method.to_string()];
        let mut pooled = Vec::new();
        for r in results {
            let v = r.improvement(method, main);
            let (m, s) = mean_std(&v);
            row.extend([g6(m), g6(s)]);
            pooled.extend(v);
        }
        let (m, s) = mean_std(&pooled);
        row.extend([g6(m), g6(s)]);
        t.push(row);
    }
    write("table_improvement.csv", &t)?;

    let mut t = Table::new(&["dimension", "features", "method", "mean", "std"]);
    for r in results {
        for &features in &config.feature_kinds {
            let v = Variant { features, ..main };
            for method in ["k-SBS", "k-SBP*", "k-SBP"] {
                let (m, s) = mean_std(&r.improvement(method, v));
                t.push(vec![
                    r.dimension.to_string(),
                    features.to_string(),
                    method.into(),
                    g6(m),
                    g6(s),
                ]);
            }
        }
    }
    write("table_features.csv", &t)?;

    let mut t = Table::new(&[
        "dimension",
        "features",
        "k",
        "scheme",
        "k-SBP*_mean",
        "k-SBP*_std",
        "k-SBP_mean",
        "k-SBP_std",
    ]);
    for r in results {
        for &scheme in &config.schemes {
            let v = Variant { scheme, ..main };
            let (a, b) = mean_std(&r.improvement("k-SBP*", v));
            let (c, d) = mean_std(&r.improvement("k-SBP", v));
            t.push(vec![
                r.dimension.to_string(),
                v.features.to_string(),
                v.k.to_string(),
                scheme.to_string(),
                g6(a),
                g6(b),
                g6(c),
                g6(d),
            ]);
        }
    }
    write("weights_table.csv", &t)?;

    let mut t = Table::new(&[
        "dimension",
        "features",
        "scheme",
        "k",
        "method",
        "mean",
        "std",
    ]);
    let mut q = Table::new(&[
        "dimension",
        "features",
        "scheme",
        "k",
        "LL",
        "LG",
        "GL",
        "GG",
    ]);
    let mut sel = Table::new(&[
        "dimension",
        "features",
        "scheme",
        "k",
        "function_id",
        "local_ksbp_star",
        "local_sbp_star",
        "chosen",
        "final_ksbp_star",
        "final_sbp_star",
        "quadrant",
    ]);
    for r in results {
        let mut variants: Vec<&VariantResult> = r.variants.iter().collect();
        variants.sort_by_key(|v| (v.variant.features, v.variant.scheme, v.variant.k));
        for vr in variants {
            let v = vr.variant;
            let key = vec![
                r.dimension.to_string(),
                v.features.to_string(),
                v.scheme.to_string(),
                v.k.to_string(),
            ];
            for method in ["k-SBS", "k-SBP*", "k-SBP"] {
                let (m, s) = mean_std(&r.improvement(method, v));
                let mut row = key.clone();
                row.extend([method.to_string(), g6(m), g6(s)]);
                t.push(row);
            }
            let mut row = key.clone();
            row.extend(quadrant_row(vr)?);
            q.push(row);
            for o in &vr.outcomes {
                let s = &o.selection;
                let mut row = key.clone();
                row.extend([
                    o.target.0.to_string(),
                    g6(s.local_perf_ksbp),
                    g6(s.local_perf_sbp),
                    match s.chosen {
                        Side::Local => "local",
                        Side::Global => "global",
                    }
                    .to_string(),
                    g6(o.final_perf_ksbp),
                    g6(o.final_perf_sbp),
                    o.quadrant.name().to_string(),
                ]);
                sel.push(row);
            }
        }
    }
    write("sweep_k.csv", &t)?;
    write("quadrants.csv", &q)?;
    write("selection_outcomes.csv", &sel)?;

    let mut t = Table::new(&["dimension", "function_id", "vbs", "ksbp"]);
    for r in results {
        let vbs = r.test_perf("VBS", main);
        let ksbp = r.test_perf("k-SBP", main);
        for ((f, a), b) in r.test.iter().zip(vbs).zip(ksbp) {
            t.push(vec![r.dimension.to_string(), f.0.to_string(), g6(a), g6(b)]);
        }
    }
    write("pairwise_vbs_vs_ksbp.csv", &t)?;

    let mut t = Table::new(&["scope", "check", "value", "pass", "gating"]);
    for c in checks(config, results) {
        t.push(vec![
            c.scope,
            c.name.into(),
            g6(c.value),
            if c.pass { "pass" } else { "fail" }.into(),
            if c.hard { "hard" } else { "soft" }.into(),
        ]);
    }
    write("checks.csv", &t)?;

    let mut allocations: BTreeMap<String, BTreeMap<&str, BTreeMap<String, f64>>> = BTreeMap::new();
    for r in results {
        let algs = config.sorted_algorithms();
        let total = r.total_budget;
        let vr = r.variant(main).expect("main variant");
        let chosen: Vec<&Portfolio> = vr
            .outcomes
            .iter()
            .map(|o| o.selection.chosen_portfolio())
            .collect();
        let mut m = BTreeMap::new();
        m.insert(
            "SBS",
            allocation_mean(
                std::iter::once(&Portfolio::singleton(r.sbs.choice, total)),
                &algs,
                total,
            ),
        );
        m.insert(
            "SBP*",
            allocation_mean(std::iter::once(&r.sbp_star.portfolio), &algs, total),
        );
        m.insert(
            "k-SBP*",
            allocation_mean(
                vr.outcomes.iter().map(|o| &o.selection.ksbp_star),
                &algs,
                total,
            ),
        );
        m.insert("k-SBP", allocation_mean(chosen.into_iter(), &algs, total));
        m.insert(
            "VBP",
            allocation_mean(
                r.vbp_test.iter().map(|c| &r.vbp_pool[c.choice]),
                &algs,
                total,
            ),
        );
        allocations.insert(format!("d{}", r.dimension), m);
    }
    let text = serde_json::to_string_pretty(&allocations)
        .map_err(|e| Error::Format(e.to_string()))?
        + "\n";
    let path = dir.join("portfolios.json");
    std::fs::write(&path, text).map_err(|e| Error::Io { path, source: e })
}

#[derive(Serialize)]
struct NeighborhoodReport<'a> {
    features: FeatureKind,
    neighborhoods: &'a [Neighborhood],
}

/// Per-dimension artifacts kept next to the data they were computed from.
fn write_store_reports(
    config: &Config,
    store: &ExperimentStore,
    r: &DimensionResult,
) -> Result<()> {
    let main = Variant::main(config);
    let uniform = |n: usize| vec![1.0 / n as f64; n];
    store.put_portfolio(
        "sbp_star",
        &PortfolioRecord::new(
            &r.sbp_star.portfolio,
            Provenance {
                method: "SBP*".into(),
                function_set: r.train.clone(),
                weights: uniform(r.train.len()),
            },
        ),
    )?;
    let vr = r.variant(main).expect("main variant");
    for o in &vr.outcomes {
        let s = &o.selection;
        store.put_portfolio(
            &format!("ksbp_star_f{}", o.target.0),
            &PortfolioRecord::new(
                &s.ksbp_star,
                Provenance {
                    method: format!("k-SBP*(k={}, {}, {})", main.k, main.scheme, main.features),
                    function_set: s.neighborhood.neighbors.clone(),
                    weights: weights(main.scheme, &s.neighborhood).as_slice().to_vec(),
                },
            ),
        )?;
    }

    let mut per_function_perf = BTreeMap::new();
    for method in METHODS {
        let perf: BTreeMap<FunctionId, f64> = r
            .test
            .iter()
            .copied()
            .zip(r.test_perf(method, main))
            .collect();
        per_function_perf.insert(method.to_string(), perf);
    }
    let report = BaselineReport {
        sbs_algorithm: r.sbs.choice,
        per_function_vbs: r
            .test
            .iter()
            .copied()
            .zip(r.vbs_test.iter().map(|c| c.choice))
            .collect(),
        sbp_star: r.sbp_star.portfolio.clone(),
        per_function_vbp: r
            .test
            .iter()
            .copied()
            .zip(r.vbp_test.iter().map(|c| r.vbp_pool[c.choice].clone()))
            .collect(),
        per_function_perf,
    };
    let reports = store.reports_dir();
    write_json(&reports.join("baseline_report.json"), &report)?;
    let hoods: Vec<NeighborhoodReport> = r
        .neighborhoods
        .iter()
        .map(|(&features, n)| NeighborhoodReport {
            features,
            neighborhoods: n,
        })
        .collect();
    write_json(&reports.join("neighborhoods.json"), &hoods)?;
    write_json(&reports.join("selection_outcomes.json"), &vr.outcomes)?;
    Ok(())
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let text =
        serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))? + "\n";
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn results_dir(root: &Path) -> PathBuf {
    root.join(RESULTS_DIR)
}

/// Evaluates every configured dimension and writes the results bundle to
/// `<root>/results`.
pub fn cmd_evaluate(config: &Config, root: &Path) -> Result<Vec<DimensionResult>> {
    config.validate()?;
    let mut results = Vec::new();
    for &d in &config.dims {
        let store = open_store(config, root, d, "evaluate")?;
        let r = evaluate_dimension(config, &store)?;
        write_store_reports(config, &store, &r)?;
        results.push(r);
    }
    write_bundle(config, &results, &results_dir(root))?;
    Ok(results)
}
