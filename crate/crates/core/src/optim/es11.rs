use rand_chacha::ChaCha8Rng;

use super::{standard_normal, uniform_point, Evaluator, Objective};
use crate::suite::DOMAIN_BOUND;

const INITIAL_SIGMA: f64 = 0.2 * DOMAIN_BOUND * 2.0;
const MIN_SIGMA: f64 = 1e-12;

/// (1+1)-ES; restarts from a uniform point when the step size collapses.
pub(super) fn optimize<O: Objective + ?Sized>(ev: &mut Evaluator<'_, O>, rng: &mut ChaCha8Rng) {
    let d = ev.dimension();
    // success/failure factors balance exactly at a 1/5 success rate
    let grow = (1.0f64 / 3.0).exp();
    let shrink = (-1.0f64 / 12.0).exp();
    loop {
        let mut parent = uniform_point(rng, d);
        let Some(mut f_parent) = ev.eval(&mut parent) else {
            return;
        };
        let mut sigma = INITIAL_SIGMA;
        while sigma > MIN_SIGMA {
            let mut child: Vec<f64> = parent
                .iter()
                .map(|x| x + sigma * standard_normal(rng))
                .collect();
            let Some(f_child) = ev.eval(&mut child) else {
                return;
            };
            if f_child <= f_parent {
                parent = child;
                f_parent = f_child;
                sigma = (sigma * grow).min(2.0 * DOMAIN_BOUND);
            } else {
                sigma *= shrink;
            }
        }
    }
}
