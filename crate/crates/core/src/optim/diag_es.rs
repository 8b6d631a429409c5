use rand_chacha::ChaCha8Rng;

use super::{standard_normal, uniform_point, Evaluator, Objective};
use crate::suite::DOMAIN_BOUND;

/// Separable (mu/mu_w, lambda)-ES: cumulative step-size adaptation for the
/// global step and a rank-mu update of the per-coordinate variances.
pub(super) fn optimize<O: Objective + ?Sized>(ev: &mut Evaluator<'_, O>, rng: &mut ChaCha8Rng) {
    let d = ev.dimension();
    let n = d as f64;
    let lambda = 4 + (3.0 * n.ln()).floor() as usize;
    let mu = lambda / 2;
    let raw: Vec<f64> = (1..=mu)
        .map(|i| (mu as f64 + 0.5).ln() - (i as f64).ln())
        .collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let mueff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();

    let c_sigma = (mueff + 2.0) / (n + mueff + 5.0);
    let d_sigma = 1.0 + 2.0 * (((mueff - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
    let c_mu = ((n + 2.0) / 3.0 * 2.0 * (mueff - 2.0 + 1.0 / mueff) / ((n + 2.0).powi(2) + mueff))
        .min(1.0);
    let chi_n = n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

    loop {
        let mut mean = uniform_point(rng, d);
        let mut sigma = 0.2 * 2.0 * DOMAIN_BOUND;
        let mut diag = vec![1.0; d];
        let mut path = vec![0.0; d];

        loop {
            let mut offspring: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::with_capacity(lambda);
            for _ in 0..lambda {
                let z: Vec<f64> = (0..d).map(|_| standard_normal(rng)).collect();
                let y: Vec<f64> = z.iter().zip(&diag).map(|(z, s)| z * s).collect();
                let mut x: Vec<f64> = mean.iter().zip(&y).map(|(m, y)| m + sigma * y).collect();
                let Some(fx) = ev.eval(&mut x) else {
                    return;
                };
                offspring.push((fx, z, y));
            }
            offspring.sort_by(|a, b| a.0.total_cmp(&b.0));

            let mut z_w = vec![0.0; d];
            let mut y_w = vec![0.0; d];
            let mut y_sq = vec![0.0; d];
            for (w, (_, z, y)) in weights.iter().zip(&offspring) {
                for i in 0..d {
                    z_w[i] += w * z[i];
                    y_w[i] += w * y[i];
                    y_sq[i] += w * y[i] * y[i];
                }
            }
            for i in 0..d {
                mean[i] += sigma * y_w[i];
            }
            let norm_c = (c_sigma * (2.0 - c_sigma) * mueff).sqrt();
            for i in 0..d {
                path[i] = (1.0 - c_sigma) * path[i] + norm_c * z_w[i];
            }
            let path_norm = path.iter().map(|p| p * p).sum::<f64>().sqrt();
            sigma *= ((c_sigma / d_sigma) * (path_norm / chi_n - 1.0)).exp();
            for i in 0..d {
                diag[i] = ((1.0 - c_mu) * diag[i] * diag[i] + c_mu * y_sq[i]).sqrt();
            }

            let spread = sigma * diag.iter().cloned().fold(0.0, f64::max);
            if !(1e-12..=1e3).contains(&spread) {
                break;
            }
        }
    }
}
