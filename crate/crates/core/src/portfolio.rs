//! Sequential portfolios, their attainment-based performance, and greedy
//! construction.
//!
//! A portfolio runs its (algorithm, budget) pairs independently, so it misses
//! a threshold only if every member misses it:
//!
//! ```text
//! perf(F, MS, w) = sum_i w_i / |E| * sum_eps [1 - prod_{(a,b) in MS} (1 - af_{f_i,a}(b, eps))]
//! ```
//!
//! Weights are normalized to sum to one, so uniform weights give the plain
//! mean over functions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::eaf::{EafMatrix, EafSource};
use crate::error::{Error, Result};
use crate::optim::AlgorithmId;
use crate::suite::FunctionId;

/// Default coefficient of the `(b/T)^2` budget penalty.
pub const DEFAULT_PENALTY: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pair {
    pub algorithm: AlgorithmId,
    pub budget: usize,
}

impl Pair {
    pub fn new(algorithm: AlgorithmId, budget: usize) -> Self {
        Self { algorithm, budget }
    }
}

/// Multiset of (algorithm, budget) pairs, kept in insertion order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Portfolio {
    pairs: Vec<Pair>,
}

impl Portfolio {
    pub fn new(pairs: Vec<Pair>) -> Self {
        Self { pairs }
    }

    pub fn singleton(algorithm: AlgorithmId, budget: usize) -> Self {
        Self::new(vec![Pair::new(algorithm, budget)])
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn push(&mut self, pair: Pair) {
        self.pairs.push(pair);
    }

    pub fn with(&self, pair: Pair) -> Self {
        let mut p = self.clone();
        p.push(pair);
        p
    }

    pub fn total_budget(&self) -> usize {
        self.pairs.iter().map(|p| p.budget).sum()
    }

    /// Same multiset, ignoring order.
    pub fn same_multiset(&self, other: &Portfolio) -> bool {
        let mut a = self.pairs.clone();
        let mut b = other.pairs.clone();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }

    /// Fraction of `total_budget` assigned to each algorithm.
    pub fn allocation(&self, total_budget: usize) -> BTreeMap<AlgorithmId, f64> {
        let mut out = BTreeMap::new();
        for p in &self.pairs {
            *out.entry(p.algorithm).or_insert(0.0) += p.budget as f64 / total_budget as f64;
        }
        out
    }
}

/// Nonnegative weights summing to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector {
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn uniform(k: usize) -> Self {
        Self {
            weights: vec![1.0 / k as f64; k],
        }
    }

    /// Normalizes `raw` to sum to one.
    pub fn normalized(raw: &[f64]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::Usage("weight vector is empty".into()));
        }
        if raw.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Usage(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            return Err(Error::Usage("weights sum to zero".into()));
        }
        Ok(Self {
            weights: raw.iter().map(|w| w / total).collect(),
        })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Serialized portfolio with a note on how it was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PortfolioRecord {
    pub pairs: Vec<Pair>,
    pub total_budget: usize,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub method: String,
    pub function_set: Vec<FunctionId>,
    pub weights: Vec<f64>,
}

impl PortfolioRecord {
    pub fn new(portfolio: &Portfolio, provenance: Provenance) -> Self {
        Self {
            pairs: portfolio.pairs().to_vec(),
            total_budget: portfolio.total_budget(),
            provenance,
        }
    }

    pub fn portfolio(&self) -> Portfolio {
        Portfolio::new(self.pairs.clone())
    }
}

/// Mean attainment over thresholds of `1 - prod`, the per-function term of `perf`.
fn mean_attainment(products: impl Iterator<Item = f64>, n_targets: usize) -> f64 {
    let mut s = 0.0;
    for p in products {
        s += 1.0 - p;
    }
    s / n_targets as f64
}

fn budget_row(eaf: &(impl EafSource + ?Sized), function: FunctionId, pair: Pair) -> Result<&[f64]> {
    let bi = eaf.budgets().index_of(pair.budget).ok_or_else(|| {
        Error::Data(format!(
            "budget {} of {} is not on the budget grid",
            pair.budget, pair.algorithm
        ))
    })?;
    Ok(eaf.matrix(function, pair.algorithm)?.row(bi))
}

pub fn perf(
    functions: &[FunctionId],
    portfolio: &Portfolio,
    weights: &WeightVector,
    eaf: &(impl EafSource + ?Sized),
) -> Result<f64> {
    if functions.len() != weights.len() {
        return Err(Error::Usage(format!(
            "{} functions but {} weights",
            functions.len(),
            weights.len()
        )));
    }
    let n_targets = eaf.targets().len();
    let mut products = vec![1.0; n_targets];
    let mut total = 0.0;
    for (&f, &w) in functions.iter().zip(weights.as_slice()) {
        products.iter_mut().for_each(|p| *p = 1.0);
        for &pair in portfolio.pairs() {
            let row = budget_row(eaf, f, pair)?;
            for (p, af) in products.iter_mut().zip(row) {
                *p *= 1.0 - af;
            }
        }
        total += w * mean_attainment(products.iter().copied(), n_targets);
    }
    Ok(total)
}

/// `perf` of one function with unit weight.
pub fn perf_on(
    function: FunctionId,
    portfolio: &Portfolio,
    eaf: &(impl EafSource + ?Sized),
) -> Result<f64> {
    perf(&[function], portfolio, &WeightVector::uniform(1), eaf)
}

/// Penalized greedy score of an extended portfolio whose newest pair has `budget`.
pub fn score(extended_perf: f64, budget: usize, total_budget: usize, penalty: f64) -> f64 {
    let frac = budget as f64 / total_budget as f64;
    extended_perf - penalty * frac * frac
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreedyConfig {
    pub total_budget: usize,
    pub penalty: f64,
}

impl GreedyConfig {
    pub fn new(total_budget: usize) -> Self {
        Self {
            total_budget,
            penalty: DEFAULT_PENALTY,
        }
    }
}

/// Greedy construction: repeatedly append the feasible pair with the highest
/// [`score`] until no grid budget fits into what is left.
///
/// Candidates are scanned by increasing budget, then increasing algorithm
/// code, and only a strictly better score replaces the incumbent.
pub fn greedy_build(
    functions: &[FunctionId],
    weights: &WeightVector,
    algorithms: &[AlgorithmId],
    config: GreedyConfig,
    eaf: &(impl EafSource + ?Sized),
) -> Result<Portfolio> {
    if algorithms.is_empty() {
        return Err(Error::Usage(
            "greedy_build needs at least one algorithm".into(),
        ));
    }
    if functions.is_empty() {
        return Err(Error::Usage(
            "greedy_build needs at least one function".into(),
        ));
    }
    if functions.len() != weights.len() {
        return Err(Error::Usage(format!(
            "{} functions but {} weights",
            functions.len(),
            weights.len()
        )));
    }
    if config.total_budget == 0 {
        return Err(Error::Config("total budget must be positive".into()));
    }
    let mut algs = algorithms.to_vec();
    algs.sort_unstable();
    algs.dedup();

    // matrices[i][a] for function i and algorithm a
    let matrices: Vec<Vec<&EafMatrix>> = functions
        .iter()
        .map(|&f| algs.iter().map(|&a| eaf.matrix(f, a)).collect())
        .collect::<Result<_>>()?;
    let budgets = eaf.budgets().budgets();
    let n_targets = eaf.targets().len();
    let w = weights.as_slice();

    let mut products = vec![vec![1.0; n_targets]; functions.len()];
    let mut portfolio = Portfolio::default();
    let mut remaining = config.total_budget;

    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for (bi, &b) in budgets
            .iter()
            .enumerate()
            .take_while(|(_, &b)| b <= remaining)
        {
            for ai in 0..algs.len() {
                let mut extended = 0.0;
                for (i, prods) in products.iter().enumerate() {
                    let row = matrices[i][ai].row(bi);
                    let term = mean_attainment(
                        prods.iter().zip(row).map(|(p, af)| p * (1.0 - af)),
                        n_targets,
                    );
                    extended += w[i] * term;
                }
                let s = score(extended, b, config.total_budget, config.penalty);
                if best.is_none_or(|(top, _, _)| s > top) {
                    best = Some((s, bi, ai));
                }
            }
        }
        let Some((_, bi, ai)) = best else {
            break;
        };
        for (i, prods) in products.iter_mut().enumerate() {
            let row = matrices[i][ai].row(bi);
            for (p, af) in prods.iter_mut().zip(row) {
                *p *= 1.0 - af;
            }
        }
        portfolio.push(Pair::new(algs[ai], budgets[bi]));
        remaining -= budgets[bi];
    }
    Ok(portfolio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eaf::{BudgetGrid, EafTable, TargetGrid};

    fn table(
        budgets: Vec<usize>,
        n_targets: usize,
        entries: &[(u32, AlgorithmId, Vec<f64>)],
    ) -> EafTable {
        let targets = TargetGrid::log_spaced(1.0, 1e-3, n_targets).unwrap();
        let nb = budgets.len();
        let mut t = EafTable::new(BudgetGrid::new(budgets).unwrap(), targets);
        for (f, a, v) in entries {
            t.insert(
                EafMatrix::from_values(FunctionId(*f), *a, 4, nb, n_targets, v.clone()).unwrap(),
            )
            .unwrap();
        }
        t
    }

    #[test]
    fn empty_portfolio_scores_zero() {
        let t = table(vec![1, 2], 2, &[(0, AlgorithmId::De, vec![1.0; 4])]);
        let p = perf(
            &[FunctionId(0)],
            &Portfolio::default(),
            &WeightVector::uniform(1),
            &t,
        );
        assert_eq!(p.unwrap(), 0.0);
    }

    #[test]
    fn certain_attainment_scores_one() {
        let t = table(vec![1, 2], 2, &[(0, AlgorithmId::De, vec![1.0; 4])]);
        let p = perf_on(FunctionId(0), &Portfolio::singleton(AlgorithmId::De, 2), &t).unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn worked_two_pair_example() {
        // budget 2 row of algorithm De is (0.5, 0.25); budget 2 row of Es11 is (0.5, 0.0)
        let t = table(
            vec![1, 2],
            2,
            &[
                (0, AlgorithmId::De, vec![0.0, 0.0, 0.5, 0.25]),
                (0, AlgorithmId::Es11, vec![0.0, 0.0, 0.5, 0.0]),
            ],
        );
        let one = Portfolio::singleton(AlgorithmId::De, 2);
        assert!((perf_on(FunctionId(0), &one, &t).unwrap() - 0.375).abs() < 1e-12);
        let two = one.with(Pair::new(AlgorithmId::Es11, 2));
        assert!((perf_on(FunctionId(0), &two, &t).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn perf_errors() {
        let t = table(vec![1, 2], 2, &[(0, AlgorithmId::De, vec![1.0; 4])]);
        let p = Portfolio::singleton(AlgorithmId::Es11, 2);
        assert!(matches!(
            perf_on(FunctionId(0), &p, &t),
            Err(Error::Data(_))
        ));
        let off_grid = Portfolio::singleton(AlgorithmId::De, 3);
        assert!(matches!(
            perf_on(FunctionId(0), &off_grid, &t),
            Err(Error::Data(_))
        ));
        assert!(matches!(
            perf(&[FunctionId(0)], &p, &WeightVector::uniform(2), &t),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn score_examples() {
        assert_eq!(score(0.7, 30, 100, 0.0), 0.7);
        assert!((score(0.5, 100, 100, 0.1) - 0.4).abs() < 1e-15);
        let big = score(0.05, 100, 100, 0.1);
        let small = score(0.04, 10, 100, 0.1);
        assert!(small > big);
    }

    #[test]
    fn minimal_total_budget_gives_one_pair() {
        let t = table(
            vec![1, 2],
            2,
            &[(0, AlgorithmId::De, vec![0.2, 0.1, 0.6, 0.3])],
        );
        let p = greedy_build(
            &[FunctionId(0)],
            &WeightVector::uniform(1),
            &[AlgorithmId::De],
            GreedyConfig::new(1),
            &t,
        )
        .unwrap();
        assert_eq!(p.pairs(), &[Pair::new(AlgorithmId::De, 1)]);
    }

    #[test]
    fn unpenalized_single_algorithm_takes_full_budget_first() {
        let t = table(
            vec![1, 2, 3],
            2,
            &[(0, AlgorithmId::De, vec![0.1, 0.0, 0.3, 0.1, 0.9, 0.5])],
        );
        let p = greedy_build(
            &[FunctionId(0)],
            &WeightVector::uniform(1),
            &[AlgorithmId::De],
            GreedyConfig {
                total_budget: 3,
                penalty: 0.0,
            },
            &t,
        )
        .unwrap();
        assert_eq!(p.pairs()[0], Pair::new(AlgorithmId::De, 3));
        assert_eq!(p.total_budget(), 3);
    }

    #[test]
    fn greedy_rejects_empty_inputs() {
        let t = table(vec![1, 2], 2, &[(0, AlgorithmId::De, vec![1.0; 4])]);
        let w = WeightVector::uniform(1);
        assert!(matches!(
            greedy_build(&[FunctionId(0)], &w, &[], GreedyConfig::new(2), &t),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            greedy_build(
                &[FunctionId(1)],
                &w,
                &[AlgorithmId::De],
                GreedyConfig::new(2),
                &t
            ),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn weight_normalization() {
        let w = WeightVector::normalized(&[1.0, 3.0]).unwrap();
        assert_eq!(w.as_slice(), &[0.25, 0.75]);
        assert!(WeightVector::normalized(&[0.0, 0.0]).is_err());
        assert!(WeightVector::normalized(&[-1.0, 2.0]).is_err());
        assert_eq!(
            WeightVector::normalized(&[2.0; 4]).unwrap(),
            WeightVector::uniform(4)
        );
    }

    #[test]
    fn allocation_fractions() {
        let p = Portfolio::new(vec![
            Pair::new(AlgorithmId::De, 20),
            Pair::new(AlgorithmId::Es11, 40),
            Pair::new(AlgorithmId::De, 20),
        ]);
        let a = p.allocation(100);
        assert_eq!(a[&AlgorithmId::De], 0.4);
        assert_eq!(a[&AlgorithmId::Es11], 0.4);
        assert!(p.same_multiset(&Portfolio::new(vec![
            Pair::new(AlgorithmId::Es11, 40),
            Pair::new(AlgorithmId::De, 20),
            Pair::new(AlgorithmId::De, 20),
        ])));
    }
}
