use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{uniform_point, Evaluator, Objective};

const DIFFERENTIAL_WEIGHT: f64 = 0.5;
const CROSSOVER_RATE: f64 = 0.9;

/// DE/rand/1/bin with population `10 d` and generational replacement.
pub(super) fn optimize<O: Objective + ?Sized>(ev: &mut Evaluator<'_, O>, rng: &mut ChaCha8Rng) {
    let d = ev.dimension();
    let np = (10 * d).max(4);

    let mut pop = Vec::with_capacity(np);
    let mut fit = Vec::with_capacity(np);
    for _ in 0..np {
        let mut x = uniform_point(rng, d);
        let Some(fx) = ev.eval(&mut x) else {
            return;
        };
        pop.push(x);
        fit.push(fx);
    }

    loop {
        let mut trials = Vec::with_capacity(np);
        for i in 0..np {
            let [r1, r2, r3] = distinct_others(rng, np, i);
            let j_rand = rng.random_range(0..d);
            let mut trial: Vec<f64> = (0..d)
                .map(|j| {
                    if j == j_rand || rng.random::<f64>() < CROSSOVER_RATE {
                        pop[r1][j] + DIFFERENTIAL_WEIGHT * (pop[r2][j] - pop[r3][j])
                    } else {
                        pop[i][j]
                    }
                })
                .collect();
            let Some(f_trial) = ev.eval(&mut trial) else {
                return;
            };
            trials.push((trial, f_trial));
        }
        for (i, (trial, f_trial)) in trials.into_iter().enumerate() {
            if f_trial <= fit[i] {
                pop[i] = trial;
                fit[i] = f_trial;
            }
        }
    }
}

fn distinct_others(rng: &mut ChaCha8Rng, np: usize, exclude: usize) -> [usize; 3] {
    let mut picked = [usize::MAX; 3];
    let mut k = 0;
    while k < 3 {
        let c = rng.random_range(0..np);
        if c != exclude && !picked[..k].contains(&c) {
            picked[k] = c;
            k += 1;
        }
    }
    picked
}
