//! Algorithm-selection reference points: SBS, VBS, the resampled single best
//! portfolio (SBP*) and the virtual best portfolio over an explicit pool.
//!
//! Solvers are scored as singleton portfolios holding the full budget, so
//! every method is measured with the same `perf` metric.

use std::collections::BTreeMap;

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eaf::EafSource;
use crate::error::{Error, Result};
use crate::optim::AlgorithmId;
use crate::portfolio::{greedy_build, perf, perf_on, GreedyConfig, Portfolio, WeightVector};
use crate::seed::{rng_from, tag};
use crate::suite::FunctionId;

/// A per-function winner and its score.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Choice<T> {
    pub choice: T,
    pub perf: f64,
}

fn sorted_algorithms(algorithms: &[AlgorithmId]) -> Result<Vec<AlgorithmId>> {
    if algorithms.is_empty() {
        return Err(Error::Usage("no algorithms given".into()));
    }
    let mut a = algorithms.to_vec();
    a.sort_unstable();
    a.dedup();
    Ok(a)
}

/// Algorithm with the best mean full-budget performance over `train`; ties go
/// to the lowest algorithm code.
pub fn single_best_solver(
    train: &[FunctionId],
    algorithms: &[AlgorithmId],
    total_budget: usize,
    eaf: &(impl EafSource + ?Sized),
) -> Result<Choice<AlgorithmId>> {
    if train.is_empty() {
        return Err(Error::Usage(
            "single_best_solver needs training functions".into(),
        ));
    }
    let uniform = WeightVector::uniform(train.len());
    let mut best: Option<Choice<AlgorithmId>> = None;
    for a in sorted_algorithms(algorithms)? {
        let p = perf(train, &Portfolio::singleton(a, total_budget), &uniform, eaf)?;
        if best.as_ref().is_none_or(|b| p > b.perf) {
            best = Some(Choice { choice: a, perf: p });
        }
    }
    Ok(best.expect("at least one algorithm"))
}

/// Per-function best full-budget algorithm, same tie rule as the SBS.
pub fn virtual_best_solver(
    functions: &[FunctionId],
    algorithms: &[AlgorithmId],
    total_budget: usize,
    eaf: &(impl EafSource + ?Sized),
) -> Result<BTreeMap<FunctionId, Choice<AlgorithmId>>> {
    let algs = sorted_algorithms(algorithms)?;
    let mut out = BTreeMap::new();
    for &f in functions {
        let mut best: Option<Choice<AlgorithmId>> = None;
        for &a in &algs {
            let p = perf_on(f, &Portfolio::singleton(a, total_budget), eaf)?;
            if best.as_ref().is_none_or(|b| p > b.perf) {
                best = Some(Choice { choice: a, perf: p });
            }
        }
        out.insert(f, best.expect("at least one algorithm"));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbpConfig {
    /// Number of sampled training subsets.
    pub n_samples: usize,
    /// Functions per subset.
    pub subset_size: usize,
}

impl Default for SbpConfig {
    fn default() -> Self {
        Self {
            n_samples: 50,
            subset_size: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbpCandidate {
    pub subset: Vec<FunctionId>,
    pub portfolio: Portfolio,
    pub train_perf: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbpStar {
    pub portfolio: Portfolio,
    pub train_perf: f64,
    pub candidates: Vec<SbpCandidate>,
}

/// Greedy portfolios built on random training subsets, judged on the whole
/// training set; the first sampled candidate wins ties.
pub fn sbp_star(
    train: &[FunctionId],
    algorithms: &[AlgorithmId],
    greedy: GreedyConfig,
    config: SbpConfig,
    seed: u64,
    eaf: &(impl EafSource + ?Sized),
) -> Result<SbpStar> {
    if config.n_samples == 0 || config.subset_size == 0 {
        return Err(Error::Config(
            "SBP* needs n_samples >= 1 and subset_size >= 1".into(),
        ));
    }
    if train.len() < config.subset_size {
        return Err(Error::Config(format!(
            "SBP* subsets of {} functions need at least that many training functions, got {}",
            config.subset_size,
            train.len()
        )));
    }
    let mut rng = rng_from(seed, &[tag::SBP_SAMPLING]);
    let subsets: Vec<Vec<FunctionId>> = (0..config.n_samples)
        .map(|_| {
            let mut s: Vec<FunctionId> = index::sample(&mut rng, train.len(), config.subset_size)
                .into_iter()
                .map(|i| train[i])
                .collect();
            s.sort_unstable();
            s
        })
        .collect();

    let uniform_train = WeightVector::uniform(train.len());
    let subset_weights = WeightVector::uniform(config.subset_size);
    let candidates = subsets
        .into_par_iter()
        .map(|subset| {
            let portfolio = greedy_build(&subset, &subset_weights, algorithms, greedy, eaf)?;
            let train_perf = perf(train, &portfolio, &uniform_train, eaf)?;
            Ok(SbpCandidate {
                subset,
                portfolio,
                train_perf,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let best = candidates.iter().enumerate().fold(0, |best, (i, c)| {
        if c.train_perf > candidates[best].train_perf {
            i
        } else {
            best
        }
    });
    Ok(SbpStar {
        portfolio: candidates[best].portfolio.clone(),
        train_perf: candidates[best].train_perf,
        candidates,
    })
}

/// Per-function best member of `pool` (by index); earliest member wins ties.
pub fn virtual_best_portfolio(
    functions: &[FunctionId],
    pool: &[Portfolio],
    eaf: &(impl EafSource + ?Sized),
) -> Result<BTreeMap<FunctionId, Choice<usize>>> {
    if pool.is_empty() {
        return Err(Error::Usage(
            "virtual_best_portfolio needs a nonempty pool".into(),
        ));
    }
    functions
        .par_iter()
        .map(|&f| {
            let mut best = Choice {
                choice: 0,
                perf: perf_on(f, &pool[0], eaf)?,
            };
            for (i, p) in pool.iter().enumerate().skip(1) {
                let v = perf_on(f, p, eaf)?;
                if v > best.perf {
                    best = Choice { choice: i, perf: v };
                }
            }
            Ok((f, best))
        })
        .collect()
}

/// Removes later duplicates (same multiset) from a candidate pool.
pub fn dedup_pool(pool: Vec<Portfolio>) -> Vec<Portfolio> {
    let mut out: Vec<Portfolio> = Vec::with_capacity(pool.len());
    for p in pool {
        if !out.iter().any(|q| q.same_multiset(&p)) {
            out.push(p);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub sbs_algorithm: AlgorithmId,
    pub per_function_vbs: BTreeMap<FunctionId, AlgorithmId>,
    pub sbp_star: Portfolio,
    pub per_function_vbp: BTreeMap<FunctionId, Portfolio>,
    /// method name -> function -> perf
    pub per_function_perf: BTreeMap<String, BTreeMap<FunctionId, f64>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eaf::{BudgetGrid, EafMatrix, EafTable, TargetGrid};
    use crate::portfolio::Pair;

    /// 2 functions x 2 algorithms, |B| = 2, |E| = 2; the full-budget row is
    /// what the singleton baselines see.
    fn two_by_two() -> EafTable {
        let mut t = EafTable::new(
            BudgetGrid::new(vec![5, 10]).unwrap(),
            TargetGrid::new(vec![1.0, 0.1]).unwrap(),
        );
        let rows = [
            // f0: Es11 (0.9, 0.3) mean 0.6; De (1.0, 0.0) mean 0.5
            (0, AlgorithmId::Es11, [0.9, 0.3]),
            (0, AlgorithmId::De, [1.0, 0.0]),
            // f1: Es11 (0.2, 0.0) mean 0.1; De (0.6, 0.4) mean 0.5
            (1, AlgorithmId::Es11, [0.2, 0.0]),
            (1, AlgorithmId::De, [0.6, 0.4]),
        ];
        for (f, a, full) in rows {
            let v = vec![full[0] / 2.0, full[1] / 2.0, full[0], full[1]];
            t.insert(EafMatrix::from_values(FunctionId(f), a, 10, 2, 2, v).unwrap())
                .unwrap();
        }
        t
    }

    const FS: [FunctionId; 2] = [FunctionId(0), FunctionId(1)];
    const ALGS: [AlgorithmId; 2] = [AlgorithmId::Es11, AlgorithmId::De];

    #[test]
    fn sbs_by_hand() {
        // means: Es11 (0.6 + 0.1) / 2 = 0.35, De (0.5 + 0.5) / 2 = 0.5
        let sbs = single_best_solver(&FS, &ALGS, 10, &two_by_two()).unwrap();
        assert_eq!(sbs.choice, AlgorithmId::De);
        assert!((sbs.perf - 0.5).abs() < 1e-12);
    }

    #[test]
    fn vbs_by_hand() {
        let vbs = virtual_best_solver(&FS, &ALGS, 10, &two_by_two()).unwrap();
        assert_eq!(vbs[&FunctionId(0)].choice, AlgorithmId::Es11);
        assert_eq!(vbs[&FunctionId(1)].choice, AlgorithmId::De);
        let mean = vbs.values().map(|c| c.perf).sum::<f64>() / 2.0;
        assert!((mean - 0.55).abs() < 1e-12);
    }

    #[test]
    fn single_algorithm_baselines() {
        let t = two_by_two();
        let sbs = single_best_solver(&FS, &[AlgorithmId::Es11], 10, &t).unwrap();
        assert_eq!(sbs.choice, AlgorithmId::Es11);
        let vbs = virtual_best_solver(&FS, &[AlgorithmId::Es11], 10, &t).unwrap();
        assert!(vbs.values().all(|c| c.choice == AlgorithmId::Es11));
    }

    #[test]
    fn vbp_by_enumeration() {
        let t = two_by_two();
        let pool = vec![
            Portfolio::singleton(AlgorithmId::De, 10),
            Portfolio::new(vec![
                Pair::new(AlgorithmId::Es11, 5),
                Pair::new(AlgorithmId::Es11, 5),
            ]),
            Portfolio::new(vec![
                Pair::new(AlgorithmId::Es11, 5),
                Pair::new(AlgorithmId::De, 5),
            ]),
        ];
        // f0: De@10 0.5; Es11@5 twice (0.6975 + 0.2775) / 2 = 0.4875; mixed (0.725 + 0.15) / 2 = 0.4375
        // f1: De@10 0.5; Es11@5 twice (0.19 + 0) / 2 = 0.095; mixed (0.37 + 0.2) / 2 = 0.285
        let vbp = virtual_best_portfolio(&FS, &pool, &t).unwrap();
        assert_eq!(vbp[&FunctionId(0)].choice, 0);
        assert_eq!(vbp[&FunctionId(1)].choice, 0);
        assert!((vbp[&FunctionId(0)].perf - 0.5).abs() < 1e-12);

        let vbp = virtual_best_portfolio(&FS, &pool[1..], &t).unwrap();
        assert_eq!(vbp[&FunctionId(0)].choice, 0);
        assert!((vbp[&FunctionId(0)].perf - 0.4875).abs() < 1e-12);
        assert_eq!(vbp[&FunctionId(1)].choice, 1);
        assert!((vbp[&FunctionId(1)].perf - 0.285).abs() < 1e-12);

        assert!(matches!(
            virtual_best_portfolio(&FS, &[], &t),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn sbp_star_single_sample_is_that_candidate() {
        let t = two_by_two();
        let cfg = SbpConfig {
            n_samples: 1,
            subset_size: 1,
        };
        let s = sbp_star(&FS, &ALGS, GreedyConfig::new(10), cfg, 3, &t).unwrap();
        assert_eq!(s.candidates.len(), 1);
        assert_eq!(s.portfolio, s.candidates[0].portfolio);
    }

    #[test]
    fn sbp_star_is_argmax_and_deterministic() {
        let t = two_by_two();
        let cfg = SbpConfig {
            n_samples: 6,
            subset_size: 1,
        };
        let s = sbp_star(&FS, &ALGS, GreedyConfig::new(10), cfg, 3, &t).unwrap();
        assert!(s.candidates.iter().all(|c| c.train_perf <= s.train_perf));
        let again = sbp_star(&FS, &ALGS, GreedyConfig::new(10), cfg, 3, &t).unwrap();
        assert_eq!(s, again);
        let too_big = SbpConfig {
            n_samples: 1,
            subset_size: 3,
        };
        assert!(matches!(
            sbp_star(&FS, &ALGS, GreedyConfig::new(10), too_big, 3, &t),
            Err(Error::Config(_))
        ));
    }
}
