//! Landscape descriptors and their train-set standardization.
//!
//! The ELA-lite vector is computed from a uniform sample of the domain. The
//! distribution, dispersion, distance and level-set features use the sampled
//! values as they are. The regression meta-models are fit to `exp(y) - 1`,
//! which undoes the `ln(1 + .)` compression of the generated functions: a
//! pure sphere component then becomes an exact quadratic again.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::eaf::EafSource;
use crate::error::{Error, Result};
use crate::optim::{uniform_point, AlgorithmId};
use crate::seed::{rng_from, tag};
use crate::suite::{FunctionId, GeneratedFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Ela,
    LatentPerf,
}

impl FeatureKind {
    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Ela => "ela",
            FeatureKind::LatentPerf => "latent_perf",
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ela" => Ok(FeatureKind::Ela),
            "latent_perf" => Ok(FeatureKind::LatentPerf),
            _ => Err(Error::Config(format!("unknown feature kind `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub function_id: FunctionId,
    pub kind: FeatureKind,
    pub values: Vec<f64>,
}

/// Column order of the ELA-lite vector.
pub const ELA_FEATURE_NAMES: [&str; 12] = [
    "distr.skewness",
    "distr.kurtosis",
    "meta.lin_r2",
    "meta.quad_r2",
    "meta.quad_interact_r2",
    "meta.log10_lin_coef_ratio",
    "meta.log10_quad_cond",
    "disp.ratio_mean_10",
    "disp.ratio_mean_25",
    "fdc",
    "level.mmce_50",
    "level.mmce_25",
];

pub fn latent_feature_names(algorithms: &[AlgorithmId]) -> Vec<String> {
    let mut algs = algorithms.to_vec();
    algs.sort_unstable();
    algs.iter().map(|a| format!("final.{a}")).collect()
}

pub fn default_ela_samples(dimension: usize) -> usize {
    50 * dimension
}

pub fn extract_ela(f: &GeneratedFunction, n_samples: usize, seed: u64) -> Result<FeatureVector> {
    let d = f.dimension();
    if n_samples < 10 * d {
        return Err(Error::Config(format!(
            "ELA needs at least {} samples in dimension {d}, got {n_samples}",
            10 * d
        )));
    }
    let mut rng = rng_from(seed, &[tag::ELA, f.id().0 as u64]);
    let xs: Vec<Vec<f64>> = (0..n_samples).map(|_| uniform_point(&mut rng, d)).collect();
    let ys: Vec<f64> = xs.iter().map(|x| f.eval_unchecked(x)).collect();
    Ok(ela_from_sample(f.id(), &xs, &ys))
}

/// ELA-lite features of an already evaluated sample.
///
/// A constant sample yields zeros for every distribution, meta-model,
/// distance-correlation and level-set feature.
pub fn ela_from_sample(id: FunctionId, xs: &[Vec<f64>], ys: &[f64]) -> FeatureVector {
    let (skew, kurt) = skew_kurtosis(ys);
    let yt: Vec<f64> = ys.iter().map(|y| y.exp_m1()).collect();
    let d = xs[0].len();

    let lin = fit(xs, &yt, |x| x.to_vec());
    let quad = fit(xs, &yt, |x| {
        let mut row = x.to_vec();
        row.extend(x.iter().map(|v| v * v));
        row
    });
    let full = fit(xs, &yt, |x| {
        let mut row = x.to_vec();
        for i in 0..d {
            for j in i..d {
                row.push(x[i] * x[j]);
            }
        }
        row
    });

    let lin_ratio = log_ratio(&lin.coefficients[1..=d]);
    let quad_cond = log_ratio(&quad.coefficients[1 + d..=2 * d]);

    let order = argsort(ys);
    let disp_10 = dispersion_ratio(xs, &order, 0.10);
    let disp_25 = dispersion_ratio(xs, &order, 0.25);
    let fdc = fitness_distance_correlation(xs, ys, order[0]);
    let mmce_50 = level_misclassification(xs, ys, &order, 0.50);
    let mmce_25 = level_misclassification(xs, ys, &order, 0.25);

    FeatureVector {
        function_id: id,
        kind: FeatureKind::Ela,
        values: vec![
            skew, kurt, lin.r2, quad.r2, full.r2, lin_ratio, quad_cond, disp_10, disp_25, fdc,
            mmce_50, mmce_25,
        ],
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|x| *x == v[0])
}

fn skew_kurtosis(ys: &[f64]) -> (f64, f64) {
    if is_constant(ys) {
        return (0.0, 0.0);
    }
    let m = mean(ys);
    let moment = |p: i32| ys.iter().map(|y| (y - m).powi(p)).sum::<f64>() / ys.len() as f64;
    let m2 = moment(2);
    if m2 <= 0.0 {
        return (0.0, 0.0);
    }
    (moment(3) / m2.powf(1.5), moment(4) / (m2 * m2) - 3.0)
}

struct Fit {
    /// Intercept first, then one entry per basis term.
    coefficients: Vec<f64>,
    r2: f64,
}

fn fit(xs: &[Vec<f64>], y: &[f64], basis: impl Fn(&[f64]) -> Vec<f64>) -> Fit {
    let rows: Vec<Vec<f64>> = xs.iter().map(|x| basis(x)).collect();
    let p = rows[0].len() + 1;
    if is_constant(y) {
        return Fit {
            coefficients: vec![0.0; p],
            r2: 0.0,
        };
    }
    let a = DMatrix::from_fn(
        xs.len(),
        p,
        |i, j| if j == 0 { 1.0 } else { rows[i][j - 1] },
    );
    let b = DVector::from_column_slice(y);
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-12)
        .unwrap_or_else(|_| DVector::zeros(p));
    let resid = &b - &a * &coef;
    let m = mean(y);
    let ss_tot: f64 = y.iter().map(|v| (v - m).powi(2)).sum();
    let ss_res = resid.norm_squared();
    Fit {
        coefficients: coef.iter().copied().collect(),
        r2: if ss_tot > 0.0 {
            1.0 - ss_res / ss_tot
        } else {
            0.0
        },
    }
}

/// `log10(max |c| / min |c|)` with the minimum floored at `max * 1e-15`.
fn log_ratio(coefs: &[f64]) -> f64 {
    let abs: Vec<f64> = coefs.iter().map(|c| c.abs()).collect();
    let hi = abs.iter().cloned().fold(0.0, f64::max);
    if hi == 0.0 || !hi.is_finite() {
        return 0.0;
    }
    let lo = abs
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
        .max(hi * 1e-15);
    (hi / lo).log10()
}

fn argsort(ys: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..ys.len()).collect();
    idx.sort_by(|&a, &b| ys[a].total_cmp(&ys[b]).then(a.cmp(&b)));
    idx
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn mean_pairwise_distance(points: &[&[f64]]) -> f64 {
    let n = points.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            total += distance(points[i], points[j]);
        }
    }
    total / (n * (n - 1) / 2) as f64
}

fn dispersion_ratio(xs: &[Vec<f64>], order: &[usize], quantile: f64) -> f64 {
    let n_best = ((quantile * xs.len() as f64).ceil() as usize).clamp(2, xs.len());
    let best: Vec<&[f64]> = order[..n_best].iter().map(|&i| xs[i].as_slice()).collect();
    let all: Vec<&[f64]> = xs.iter().map(|x| x.as_slice()).collect();
    let denom = mean_pairwise_distance(&all);
    if denom == 0.0 {
        return 0.0;
    }
    mean_pairwise_distance(&best) / denom
}

fn fitness_distance_correlation(xs: &[Vec<f64>], ys: &[f64], best: usize) -> f64 {
    let dist: Vec<f64> = xs.iter().map(|x| distance(x, &xs[best])).collect();
    let (my, md) = (mean(ys), mean(&dist));
    let cov: f64 = ys.iter().zip(&dist).map(|(y, d)| (y - my) * (d - md)).sum();
    let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let vd: f64 = dist.iter().map(|d| (d - md).powi(2)).sum();
    if vy == 0.0 || vd == 0.0 {
        return 0.0;
    }
    cov / (vy * vd).sqrt()
}

/// Splits the sample at the value quantile and reports how often the
/// nearest class centroid disagrees with the true class.
fn level_misclassification(xs: &[Vec<f64>], ys: &[f64], order: &[usize], quantile: f64) -> f64 {
    let cut = ys[order[((quantile * ys.len() as f64) as usize).min(ys.len() - 1)]];
    let below: Vec<bool> = ys.iter().map(|y| *y < cut).collect();
    let n_below = below.iter().filter(|b| **b).count();
    if n_below == 0 || n_below == ys.len() {
        return 0.0;
    }
    let d = xs[0].len();
    let mut centroids = [vec![0.0; d], vec![0.0; d]];
    for (x, &b) in xs.iter().zip(&below) {
        let c = &mut centroids[b as usize];
        c.iter_mut().zip(x).for_each(|(c, v)| *c += v);
    }
    let counts = [ys.len() - n_below, n_below];
    for (c, n) in centroids.iter_mut().zip(counts) {
        c.iter_mut().for_each(|v| *v /= n as f64);
    }
    let wrong = xs
        .iter()
        .zip(&below)
        .filter(|(x, &b)| {
            let predicted_below = distance(x, &centroids[1]) < distance(x, &centroids[0]);
            predicted_below != b
        })
        .count();
    wrong as f64 / ys.len() as f64
}

/// Mean attainment over thresholds at budget `total_budget`, one entry per
/// algorithm (sorted by code).
pub fn extract_latent_perf(
    function: FunctionId,
    algorithms: &[AlgorithmId],
    total_budget: usize,
    eaf: &(impl EafSource + ?Sized),
) -> Result<FeatureVector> {
    let bi = eaf
        .budgets()
        .index_of(total_budget)
        .ok_or_else(|| Error::Data(format!("budget {total_budget} is not on the budget grid")))?;
    let mut algs = algorithms.to_vec();
    algs.sort_unstable();
    let values = algs
        .iter()
        .map(|&a| Ok(mean(eaf.matrix(function, a)?.row(bi))))
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureVector {
        function_id: function,
        kind: FeatureKind::LatentPerf,
        values,
    })
}

/// Per-feature affine map to zero mean and unit population variance over the
/// training vectors. Features whose training spread is below `1e-12` are
/// mapped to 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub kind: FeatureKind,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub degenerate: Vec<bool>,
}

pub const DEGENERATE_STD: f64 = 1e-12;

impl Standardizer {
    pub fn fit(train: &[FeatureVector]) -> Result<Self> {
        if train.len() < 2 {
            return Err(Error::Usage(
                "standardizer needs at least 2 training vectors".into(),
            ));
        }
        let n = train[0].values.len();
        if train
            .iter()
            .any(|v| v.values.len() != n || v.kind != train[0].kind)
        {
            return Err(Error::Usage(
                "training vectors differ in kind or length".into(),
            ));
        }
        let count = train.len() as f64;
        let mut mean = vec![0.0; n];
        for v in train {
            mean.iter_mut().zip(&v.values).for_each(|(m, x)| *m += x);
        }
        mean.iter_mut().for_each(|m| *m /= count);
        let mut var = vec![0.0; n];
        for v in train {
            for ((s, x), m) in var.iter_mut().zip(&v.values).zip(&mean) {
                *s += (x - m).powi(2);
            }
        }
        let mut std: Vec<f64> = var.iter().map(|s| (s / count).sqrt()).collect();
        let degenerate: Vec<bool> = std
            .iter()
            .map(|s| s.is_nan() || *s < DEGENERATE_STD)
            .collect();
        for (s, &deg) in std.iter_mut().zip(&degenerate) {
            if deg {
                *s = 1.0;
            }
        }
        Ok(Self {
            kind: train[0].kind,
            mean,
            std,
            degenerate,
        })
    }

    pub fn transform(&self, v: &FeatureVector) -> Result<FeatureVector> {
        if v.values.len() != self.mean.len() {
            return Err(Error::Usage(format!(
                "feature vector of {} has length {}, standardizer expects {}",
                v.function_id,
                v.values.len(),
                self.mean.len()
            )));
        }
        let values = v
            .values
            .iter()
            .enumerate()
            .map(|(i, x)| {
                if self.degenerate[i] {
                    0.0
                } else {
                    (x - self.mean[i]) / self.std[i]
                }
            })
            .collect();
        Ok(FeatureVector {
            function_id: v.function_id,
            kind: v.kind,
            values,
        })
    }
}
