//! Cosine-similarity neighborhoods and neighbor weighting schemes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::portfolio::WeightVector;
use crate::suite::FunctionId;

/// `a . b / (|a| |b|)`; zero when either vector has zero norm.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Usage(format!(
            "cannot compare feature vectors of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Neighborhood {
    pub target: FunctionId,
    /// Most similar first.
    pub neighbors: Vec<FunctionId>,
    pub similarities: Vec<f64>,
    /// Similarity of the closest training function left out.
    pub boundary_similarity: f64,
}

impl Neighborhood {
    pub fn k(&self) -> usize {
        self.neighbors.len()
    }

    /// The first `k` neighbors, with the next one as boundary.
    pub fn truncate(&self, k: usize) -> Result<Neighborhood> {
        if k == 0 || k > self.k() {
            return Err(Error::Config(format!(
                "cannot shrink a {}-neighborhood to {k}",
                self.k()
            )));
        }
        let boundary = if k < self.k() {
            self.similarities[k]
        } else {
            self.boundary_similarity
        };
        Ok(Neighborhood {
            target: self.target,
            neighbors: self.neighbors[..k].to_vec(),
            similarities: self.similarities[..k].to_vec(),
            boundary_similarity: boundary,
        })
    }
}

/// The `k` training vectors most similar to `target`; ties go to the lower
/// function id.
pub fn knn(
    target: FunctionId,
    target_features: &[f64],
    train: &[(FunctionId, &[f64])],
    k: usize,
) -> Result<Neighborhood> {
    if k == 0 || k >= train.len() {
        return Err(Error::Config(format!(
            "k must satisfy 1 <= k < {} (training set size), got {k}",
            train.len()
        )));
    }
    let mut scored = train
        .iter()
        .map(|&(id, v)| Ok((id, cosine_similarity(target_features, v)?)))
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(Neighborhood {
        target,
        neighbors: scored[..k].iter().map(|s| s.0).collect(),
        similarities: scored[..k].iter().map(|s| s.1).collect(),
        boundary_similarity: scored[k].1,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightScheme {
    /// Uniform.
    Eq,
    /// `exp(d_i)`.
    Soft,
    /// `d_i - d_{k+1}`.
    Diff,
    /// Rank-based `ln((k+1)/2) - ln(i)`, negative values clamped to 0.
    Log,
}

impl WeightScheme {
    pub const ALL: [WeightScheme; 4] = [
        WeightScheme::Eq,
        WeightScheme::Soft,
        WeightScheme::Diff,
        WeightScheme::Log,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WeightScheme::Eq => "eq",
            WeightScheme::Soft => "soft",
            WeightScheme::Diff => "diff",
            WeightScheme::Log => "log",
        }
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|w| w.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown weighting scheme `{s}`")))
    }
}

fn raw_weights(scheme: WeightScheme, n: &Neighborhood) -> Vec<f64> {
    let k = n.k();
    match scheme {
        WeightScheme::Eq => vec![1.0; k],
        WeightScheme::Soft => n.similarities.iter().map(|d| d.exp()).collect(),
        WeightScheme::Diff => n
            .similarities
            .iter()
            .map(|d| (d - n.boundary_similarity).max(0.0))
            .collect(),
        WeightScheme::Log => {
            let head = ((k as f64 + 1.0) / 2.0).ln();
            (1..=k).map(|i| (head - (i as f64).ln()).max(0.0)).collect()
        }
    }
}

/// Normalized neighbor weights; all-zero raw weights fall back to uniform.
pub fn weights(scheme: WeightScheme, neighborhood: &Neighborhood) -> WeightVector {
    let raw = raw_weights(scheme, neighborhood);
    WeightVector::normalized(&raw).unwrap_or_else(|_| WeightVector::uniform(neighborhood.k()))
}
