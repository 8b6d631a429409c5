use rand_chacha::ChaCha8Rng;

use super::{clamp_to_domain, uniform_point, Evaluator, Objective};
use crate::suite::DOMAIN_BOUND;

const INITIAL_STEP: f64 = 0.1 * 2.0 * DOMAIN_BOUND;
const RESTART_DIAMETER: f64 = 1e-12;

/// Nelder-Mead with standard coefficients; restarts from a fresh random
/// simplex once the simplex diameter drops below `RESTART_DIAMETER`.
pub(super) fn optimize<O: Objective + ?Sized>(ev: &mut Evaluator<'_, O>, rng: &mut ChaCha8Rng) {
    let d = ev.dimension();
    loop {
        let origin = uniform_point(rng, d);
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
        for k in 0..=d {
            let mut v = origin.clone();
            if k > 0 {
                let i = k - 1;
                let step = if v[i] + INITIAL_STEP > DOMAIN_BOUND {
                    -INITIAL_STEP
                } else {
                    INITIAL_STEP
                };
                v[i] += step;
            }
            let Some(fv) = ev.eval(&mut v) else {
                return;
            };
            simplex.push((v, fv));
        }

        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            if diameter(&simplex) < RESTART_DIAMETER {
                break;
            }
            let worst = &simplex[d];
            let f_second_worst = simplex[d - 1].1;
            let centroid: Vec<f64> = (0..d)
                .map(|j| simplex[..d].iter().map(|(v, _)| v[j]).sum::<f64>() / d as f64)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                let mut p: Vec<f64> = centroid
                    .iter()
                    .zip(&worst.0)
                    .map(|(c, w)| c + t * (c - w))
                    .collect();
                clamp_to_domain(&mut p);
                p
            };

            let mut reflected = along(1.0);
            let Some(f_reflected) = ev.eval(&mut reflected) else {
                return;
            };
            if f_reflected < simplex[0].1 {
                let mut expanded = along(2.0);
                let Some(f_expanded) = ev.eval(&mut expanded) else {
                    return;
                };
                simplex[d] = if f_expanded < f_reflected {
                    (expanded, f_expanded)
                } else {
                    (reflected, f_reflected)
                };
                continue;
            }
            if f_reflected < f_second_worst {
                simplex[d] = (reflected, f_reflected);
                continue;
            }
            let f_worst = simplex[d].1;
            let (mut contracted, bound) = if f_reflected < f_worst {
                (along(0.5), f_reflected)
            } else {
                (along(-0.5), f_worst)
            };
            let Some(f_contracted) = ev.eval(&mut contracted) else {
                return;
            };
            if f_contracted < bound {
                simplex[d] = (contracted, f_contracted);
                continue;
            }
            let best = simplex[0].0.clone();
            for vertex in simplex.iter_mut().skip(1) {
                let mut v: Vec<f64> = best
                    .iter()
                    .zip(&vertex.0)
                    .map(|(b, x)| b + 0.5 * (x - b))
                    .collect();
                let Some(fv) = ev.eval(&mut v) else {
                    return;
                };
                *vertex = (v, fv);
            }
        }
    }
}

fn diameter(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let best = &simplex[0].0;
    simplex[1..]
        .iter()
        .map(|(v, _)| {
            v.iter()
                .zip(best)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}
