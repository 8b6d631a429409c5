//! Generated benchmark suites.
//!
//! Each function is a weighted blend of rotated base functions that all share
//! one optimum `x_opt`:
//!
//! ```text
//! f(x) = sum_j w_j * ln(1 + base_j(R_j (x - x_opt)))
//! ```
//!
//! Every base function is nonnegative with a unique zero at the origin, so
//! `f(x_opt) = 0` holds exactly and the gap to the optimum is just `f(x)`.

use std::fmt;

use nalgebra::DMatrix;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from, tag};

/// Search domain is `[-DOMAIN_BOUND, DOMAIN_BOUND]^d`.
pub const DOMAIN_BOUND: f64 = 5.0;
/// Optima are drawn from `[-OPT_BOUND, OPT_BOUND]^d`.
pub const OPT_BOUND: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FunctionId(pub u32);

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseFunction {
    Sphere,
    Ellipsoid,
    Rastrigin,
    RosenbrockRotated,
    AttractiveSector,
    DifferentPowers,
    Schaffer,
    BentCigar,
}

impl BaseFunction {
    pub const ALL: [BaseFunction; 8] = [
        BaseFunction::Sphere,
        BaseFunction::Ellipsoid,
        BaseFunction::Rastrigin,
        BaseFunction::RosenbrockRotated,
        BaseFunction::AttractiveSector,
        BaseFunction::DifferentPowers,
        BaseFunction::Schaffer,
        BaseFunction::BentCigar,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Raw value at the transformed point `z`; zero iff `z = 0`.
    pub fn eval(self, z: &[f64]) -> f64 {
        let d = z.len();
        // exponent ramp 0..1 across coordinates, defined for d = 1 as 0
        let ramp = |i: usize| {
            if d > 1 {
                i as f64 / (d - 1) as f64
            } else {
                0.0
            }
        };
        match self {
            BaseFunction::Sphere => z.iter().map(|v| v * v).sum(),
            BaseFunction::Ellipsoid => z
                .iter()
                .enumerate()
                .map(|(i, v)| 10f64.powf(6.0 * ramp(i)) * v * v)
                .sum(),
            BaseFunction::Rastrigin => z
                .iter()
                .map(|v| 10.0 * (1.0 - (2.0 * std::f64::consts::PI * v).cos()) + v * v)
                .sum(),
            BaseFunction::RosenbrockRotated => {
                if d == 1 {
                    return z[0] * z[0];
                }
                z.windows(2)
                    .map(|w| {
                        let (u, v) = (w[0] + 1.0, w[1] + 1.0);
                        100.0 * (u * u - v).powi(2) + (u - 1.0).powi(2)
                    })
                    .sum()
            }
            BaseFunction::AttractiveSector => z
                .iter()
                .map(|&v| {
                    let s = if v > 0.0 { 100.0 } else { 1.0 };
                    (s * v).powi(2)
                })
                .sum(),
            BaseFunction::DifferentPowers => z
                .iter()
                .enumerate()
                .map(|(i, v)| v.abs().powf(2.0 + 4.0 * ramp(i)))
                .sum::<f64>()
                .sqrt(),
            BaseFunction::Schaffer => {
                let terms: Vec<f64> = if d == 1 {
                    vec![z[0].abs()]
                } else {
                    z.windows(2).map(|w| w[0].hypot(w[1])).collect()
                };
                let n = terms.len() as f64;
                let mean = terms
                    .iter()
                    .map(|&s| {
                        let r = s.sqrt();
                        r + r * (50.0 * s.powf(0.2)).sin().powi(2)
                    })
                    .sum::<f64>()
                    / n;
                mean * mean
            }
            BaseFunction::BentCigar => {
                z[0] * z[0] + 1e6 * z[1..].iter().map(|v| v * v).sum::<f64>()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSpec {
    pub dimension: usize,
    pub n_functions: usize,
    pub train_fraction: f64,
    pub master_seed: u64,
}

impl SuiteSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        if self.n_functions < 2 {
            return Err(Error::Config(format!(
                "a suite needs at least 2 functions, got {}",
                self.n_functions
            )));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        let n_train = self.n_train();
        if n_train == 0 || n_train == self.n_functions {
            return Err(Error::Config(format!(
                "train_fraction {} leaves an empty train or test partition for {} functions",
                self.train_fraction, self.n_functions
            )));
        }
        Ok(())
    }

    pub fn n_train(&self) -> usize {
        (self.n_functions as f64 * self.train_fraction).floor() as usize
    }
}

#[derive(Clone, Debug)]
struct Component {
    base: BaseFunction,
    weight: f64,
    /// Row-major `d x d` orthogonal matrix.
    rotation: Vec<f64>,
}

/// Serialized form of one generated function; rotations are rebuilt from `seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionRecord {
    pub id: FunctionId,
    /// One entry per [`BaseFunction::ALL`] member; zero for inactive components.
    pub weights: Vec<f64>,
    pub seed: u64,
    pub x_opt: Vec<f64>,
}

/// An immutable benchmark function with known optimum value 0.
#[derive(Clone, Debug)]
pub struct GeneratedFunction {
    id: FunctionId,
    dimension: usize,
    seed: u64,
    weights: Vec<f64>,
    x_opt: Vec<f64>,
    components: Vec<Component>,
}

impl GeneratedFunction {
    /// Draws a fresh function from `seed`.
    pub fn generate(id: FunctionId, dimension: usize, seed: u64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_base = BaseFunction::ALL.len();
        let n_active = rng.random_range(2..=5usize);
        let mut active = index::sample(&mut rng, n_base, n_active).into_vec();
        active.sort_unstable();
        let mut weights = vec![0.0; n_base];
        for &j in &active {
            // (0, 1]; a zero draw would silently deactivate the component
            weights[j] = 1.0 - rng.random::<f64>();
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let x_opt = (0..dimension)
            .map(|_| rng.random_range(-OPT_BOUND..=OPT_BOUND))
            .collect();
        Self::from_record(
            &FunctionRecord {
                id,
                weights,
                seed,
                x_opt,
            },
            dimension,
        )
    }

    pub fn from_record(record: &FunctionRecord, dimension: usize) -> Result<Self> {
        if record.x_opt.len() != dimension {
            return Err(Error::Format(format!(
                "{}: x_opt has length {}, expected {dimension}",
                record.id,
                record.x_opt.len()
            )));
        }
        if record.weights.len() != BaseFunction::ALL.len()
            || record.weights.iter().any(|w| !w.is_finite() || *w < 0.0)
        {
            return Err(Error::Format(format!(
                "{}: expected {} nonnegative component weights",
                record.id,
                BaseFunction::ALL.len()
            )));
        }
        let mut rot_rng = ChaCha8Rng::seed_from_u64(record.seed);
        rot_rng.set_stream(1);
        let components = BaseFunction::ALL
            .iter()
            .zip(&record.weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(&base, &weight)| Component {
                base,
                weight,
                rotation: random_rotation(&mut rot_rng, dimension),
            })
            .collect();
        Ok(Self {
            id: record.id,
            dimension,
            seed: record.seed,
            weights: record.weights.clone(),
            x_opt: record.x_opt.clone(),
            components,
        })
    }

    /// A single-component function without rotation, useful for calibration.
    pub fn single(id: FunctionId, base: BaseFunction, x_opt: Vec<f64>) -> Self {
        let d = x_opt.len();
        let mut weights = vec![0.0; BaseFunction::ALL.len()];
        weights[base.index()] = 1.0;
        let mut rotation = vec![0.0; d * d];
        (0..d).for_each(|i| rotation[i * d + i] = 1.0);
        Self {
            id,
            dimension: d,
            seed: 0,
            weights,
            x_opt,
            components: vec![Component {
                base,
                weight: 1.0,
                rotation,
            }],
        }
    }

    pub fn record(&self) -> FunctionRecord {
        FunctionRecord {
            id: self.id,
            weights: self.weights.clone(),
            seed: self.seed,
            x_opt: self.x_opt.clone(),
        }
    }

    pub fn id(&self) -> FunctionId {
        self.id
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn x_opt(&self) -> &[f64] {
        &self.x_opt
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Always 0 by construction.
    pub fn f_opt(&self) -> f64 {
        0.0
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dimension {
            return Err(Error::Usage(format!(
                "{} expects a point of dimension {}, got {}",
                self.id,
                self.dimension,
                x.len()
            )));
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        let d = self.dimension;
        let shifted: Vec<f64> = x.iter().zip(&self.x_opt).map(|(a, b)| a - b).collect();
        let mut z = vec![0.0; d];
        let mut value = 0.0;
        for c in &self.components {
            for (i, zi) in z.iter_mut().enumerate() {
                let row = &c.rotation[i * d..(i + 1) * d];
                *zi = row.iter().zip(&shifted).map(|(r, s)| r * s).sum();
            }
            value += c.weight * c.base.eval(&z).ln_1p();
        }
        value.max(0.0)
    }
}

/// Haar-distributed orthogonal matrix from the QR factorization of a Gaussian draw.
fn random_rotation(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let g = DMatrix::<f64>::from_fn(d, d, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            out.push(q[(i, j)]);
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct Suite {
    pub spec: SuiteSpec,
    pub functions: Vec<GeneratedFunction>,
    pub train_ids: Vec<FunctionId>,
    pub test_ids: Vec<FunctionId>,
}

#[derive(Serialize, Deserialize)]
struct SuiteDocument {
    dimension: usize,
    master_seed: u64,
    n_functions: usize,
    train_fraction: f64,
    train_ids: Vec<FunctionId>,
    test_ids: Vec<FunctionId>,
    functions: Vec<FunctionRecord>,
}

pub fn generate_suite(spec: &SuiteSpec) -> Result<Suite> {
    spec.validate()?;
    let functions = (0..spec.n_functions as u32)
        .map(|i| {
            let seed = derive_seed(spec.master_seed, &[tag::FUNCTION, i as u64]);
            GeneratedFunction::generate(FunctionId(i), spec.dimension, seed)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rng = rng_from(spec.master_seed, &[tag::SUITE_SPLIT]);
    let mut ids: Vec<FunctionId> = functions.iter().map(|f| f.id()).collect();
    rand::seq::SliceRandom::shuffle(ids.as_mut_slice(), &mut rng);
    let (train, test) = ids.split_at(spec.n_train());
    let mut train_ids = train.to_vec();
    let mut test_ids = test.to_vec();
    train_ids.sort_unstable();
    test_ids.sort_unstable();

    Ok(Suite {
        spec: spec.clone(),
        functions,
        train_ids,
        test_ids,
    })
}

impl Suite {
    pub fn function(&self, id: FunctionId) -> Option<&GeneratedFunction> {
        // ids are dense and ordered by construction
        self.functions
            .get(id.0 as usize)
            .filter(|f| f.id() == id)
            .or_else(|| self.functions.iter().find(|f| f.id() == id))
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = SuiteDocument {
            dimension: self.spec.dimension,
            master_seed: self.spec.master_seed,
            n_functions: self.spec.n_functions,
            train_fraction: self.spec.train_fraction,
            train_ids: self.train_ids.clone(),
            test_ids: self.test_ids.clone(),
            functions: self.functions.iter().map(|f| f.record()).collect(),
        };
        serde_json::to_string_pretty(&doc).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SuiteDocument =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("suite: {e}")))?;
        if doc.functions.len() != doc.n_functions {
            return Err(Error::Format(format!(
                "suite header announces {} functions but holds {}",
                doc.n_functions,
                doc.functions.len()
            )));
        }
        let functions = doc
            .functions
            .iter()
            .map(|r| GeneratedFunction::from_record(r, doc.dimension))
            .collect::<Result<Vec<_>>>()?;
        Ok(Suite {
            spec: SuiteSpec {
                dimension: doc.dimension,
                n_functions: doc.n_functions,
                train_fraction: doc.train_fraction,
                master_seed: doc.master_seed,
            },
            functions,
            train_ids: doc.train_ids,
            test_ids: doc.test_ids,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(d: usize, n: usize, seed: u64) -> SuiteSpec {
        SuiteSpec {
            dimension: d,
            n_functions: n,
            train_fraction: 0.9,
            master_seed: seed,
        }
    }

    #[test]
    fn regeneration_is_identical() {
        let a = generate_suite(&spec(2, 3, 7)).unwrap();
        let b = generate_suite(&spec(2, 3, 7)).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let x = [0.3, -1.2];
        for (fa, fb) in a.functions.iter().zip(&b.functions) {
            assert_eq!(
                fa.evaluate(&x).unwrap().to_bits(),
                fb.evaluate(&x).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn optimum_is_exactly_zero() {
        for d in [1, 2, 5, 10] {
            let suite = generate_suite(&spec(d, 40, 11)).unwrap();
            for f in &suite.functions {
                assert_eq!(f.evaluate(f.x_opt()).unwrap(), 0.0, "{} d={d}", f.id());
            }
        }
    }

    #[test]
    fn split_sizes_at_full_scale() {
        let mut s = spec(2, 1000, 3);
        s.train_fraction = 0.9;
        let suite = generate_suite(&s).unwrap();
        assert_eq!(suite.train_ids.len(), 900);
        assert_eq!(suite.test_ids.len(), 100);
        let mut all: Vec<_> = suite.train_ids.iter().chain(&suite.test_ids).collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 1000);
    }

    #[test]
    fn sphere_unit_offset_is_ln2() {
        let f = GeneratedFunction::single(FunctionId(0), BaseFunction::Sphere, vec![0.5, -1.0]);
        let v = f.evaluate(&[1.5, -1.0]).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn generated_weights_cover_two_to_five_components() {
        let suite = generate_suite(&spec(3, 200, 5)).unwrap();
        for f in &suite.functions {
            let active = f.weights().iter().filter(|w| **w > 0.0).count();
            assert!((2..=5).contains(&active));
            assert!((f.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(f.x_opt().iter().all(|v| v.abs() <= OPT_BOUND));
        }
    }

    #[test]
    fn rotations_are_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = 5;
        let q = random_rotation(&mut rng, d);
        for i in 0..d {
            for j in 0..d {
                let dot: f64 = (0..d).map(|k| q[i * d + k] * q[j * d + k]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn json_round_trip_preserves_evaluation() {
        let suite = generate_suite(&spec(5, 6, 99)).unwrap();
        let back = Suite::from_json(&suite.to_json().unwrap()).unwrap();
        assert_eq!(back.train_ids, suite.train_ids);
        let x = [1.0, -2.0, 0.5, 3.0, -4.5];
        for (a, b) in suite.functions.iter().zip(&back.functions) {
            assert_eq!(a.evaluate(&x).unwrap(), b.evaluate(&x).unwrap());
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(matches!(
            generate_suite(&spec(0, 10, 1)),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            generate_suite(&spec(2, 1, 1)),
            Err(Error::Config(_))
        ));
        let mut s = spec(2, 10, 1);
        s.train_fraction = 1.0;
        assert!(matches!(generate_suite(&s), Err(Error::Config(_))));
    }

    #[test]
    fn dimension_mismatch_is_usage_error() {
        let suite = generate_suite(&spec(2, 2, 1)).unwrap();
        assert!(matches!(
            suite.functions[0].evaluate(&[0.0; 3]),
            Err(Error::Usage(_))
        ));
    }
}
