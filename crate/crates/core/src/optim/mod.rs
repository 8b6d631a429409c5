//! Fixed-budget stochastic optimizers that log best-so-far trajectories.
//!
//! Every optimizer talks to the objective exclusively through [`Evaluator`],
//! which clamps candidates into the search box, counts evaluations and
//! refuses to evaluate once the budget is spent. A run therefore consumes
//! exactly `budget` evaluations regardless of where the optimizer's own loop
//! happens to stop.

mod de;
mod diag_es;
mod es11;
mod nelder_mead;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{derive_seed, tag};
use crate::suite::{FunctionId, GeneratedFunction, DOMAIN_BOUND};

/// Optimizer identity. The integer codes are persisted and must not change.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AlgorithmId {
    /// (1+1)-ES with the 1/5th success rule.
    #[serde(rename = "es11")]
    Es11 = 0,
    /// (mu, lambda)-ES with per-coordinate step sizes.
    #[serde(rename = "diag-es")]
    DiagEs = 1,
    /// DE/rand/1/bin.
    #[serde(rename = "de")]
    De = 2,
    /// Nelder-Mead simplex with restarts.
    #[serde(rename = "nelder-mead")]
    NelderMead = 3,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 4] = [
        AlgorithmId::Es11,
        AlgorithmId::DiagEs,
        AlgorithmId::De,
        AlgorithmId::NelderMead,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmId::Es11 => "es11",
            AlgorithmId::DiagEs => "diag-es",
            AlgorithmId::De => "de",
            AlgorithmId::NelderMead => "nelder-mead",
        }
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }
}

/// Anything the optimizers can minimize. Values must be nonnegative gaps to
/// the optimum.
pub trait Objective: Sync {
    fn id(&self) -> FunctionId;
    fn dimension(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
}

impl Objective for GeneratedFunction {
    fn id(&self) -> FunctionId {
        GeneratedFunction::id(self)
    }

    fn dimension(&self) -> usize {
        GeneratedFunction::dimension(self)
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.eval_unchecked(x)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunTrajectory {
    pub function_id: FunctionId,
    pub algorithm: AlgorithmId,
    pub run_index: u32,
    pub seed: u64,
    /// `best_so_far[i]` is the best value after `i + 1` evaluations.
    pub best_so_far: Vec<f64>,
}

impl RunTrajectory {
    /// Best value after exactly `evaluations` evaluations (1-indexed).
    pub fn at(&self, evaluations: usize) -> Option<f64> {
        evaluations
            .checked_sub(1)
            .and_then(|i| self.best_so_far.get(i))
            .copied()
    }
}

pub(crate) struct Evaluator<'a, O: ?Sized> {
    objective: &'a O,
    budget: usize,
    best: f64,
    trace: Vec<f64>,
}

impl<'a, O: Objective + ?Sized> Evaluator<'a, O> {
    fn new(objective: &'a O, budget: usize) -> Self {
        Self {
            objective,
            budget,
            best: f64::INFINITY,
            trace: Vec::with_capacity(budget),
        }
    }

    pub(crate) fn dimension(&self) -> usize {
        self.objective.dimension()
    }

    /// Clamps `x` into the domain in place and evaluates it, or returns
    /// `None` once the budget is exhausted.
    pub(crate) fn eval(&mut self, x: &mut [f64]) -> Option<f64> {
        if self.trace.len() >= self.budget {
            return None;
        }
        clamp_to_domain(x);
        let v = self.objective.value(x);
        if v < self.best {
            self.best = v;
        }
        self.trace.push(self.best);
        Some(v)
    }

    fn into_trace(self) -> Vec<f64> {
        self.trace
    }
}

pub(crate) fn clamp_to_domain(x: &mut [f64]) {
    x.iter_mut()
        .for_each(|v| *v = v.clamp(-DOMAIN_BOUND, DOMAIN_BOUND));
}

pub(crate) fn uniform_point(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d)
        .map(|_| rng.random_range(-DOMAIN_BOUND..=DOMAIN_BOUND))
        .collect()
}

pub(crate) fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(rand_distr::StandardNormal)
}

/// Runs `algorithm` on `objective` for exactly `budget` evaluations.
pub fn run<O: Objective + ?Sized>(
    algorithm: AlgorithmId,
    objective: &O,
    budget: usize,
    seed: u64,
) -> Result<RunTrajectory> {
    run_indexed(algorithm, objective, budget, seed, 0)
}

fn run_indexed<O: Objective + ?Sized>(
    algorithm: AlgorithmId,
    objective: &O,
    budget: usize,
    seed: u64,
    run_index: u32,
) -> Result<RunTrajectory> {
    if budget == 0 {
        return Err(Error::Config("evaluation budget must be at least 1".into()));
    }
    if objective.dimension() == 0 {
        return Err(Error::Config("objective has dimension 0".into()));
    }
    let mut rng = <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
    let mut ev = Evaluator::new(objective, budget);
    match algorithm {
        AlgorithmId::Es11 => es11::optimize(&mut ev, &mut rng),
        AlgorithmId::DiagEs => diag_es::optimize(&mut ev, &mut rng),
        AlgorithmId::De => de::optimize(&mut ev, &mut rng),
        AlgorithmId::NelderMead => nelder_mead::optimize(&mut ev, &mut rng),
    }
    let best_so_far = ev.into_trace();
    debug_assert_eq!(best_so_far.len(), budget);
    Ok(RunTrajectory {
        function_id: objective.id(),
        algorithm,
        run_index,
        seed,
        best_so_far,
    })
}

pub fn run_seed(
    base_seed: u64,
    function: FunctionId,
    algorithm: AlgorithmId,
    run_index: u32,
) -> u64 {
    derive_seed(
        base_seed,
        &[
            tag::RUN,
            function.0 as u64,
            algorithm.code() as u64,
            run_index as u64,
        ],
    )
}

/// `n_runs` independent runs per (function, algorithm) pair, in parallel.
///
/// Output is ordered by function, then algorithm, then run index.
pub fn run_batch<O: Objective>(
    algorithms: &[AlgorithmId],
    functions: &[O],
    budget: usize,
    n_runs: u32,
    base_seed: u64,
) -> Result<Vec<RunTrajectory>> {
    if n_runs == 0 {
        return Err(Error::Config("n_runs must be at least 1".into()));
    }
    let jobs: Vec<(&O, AlgorithmId, u32)> = functions
        .iter()
        .flat_map(|f| {
            algorithms
                .iter()
                .flat_map(move |&a| (0..n_runs).map(move |r| (f, a, r)))
        })
        .collect();
    jobs.into_par_iter()
        .map(|(f, a, r)| run_indexed(a, f, budget, run_seed(base_seed, f.id(), a, r), r))
        .collect()
}
