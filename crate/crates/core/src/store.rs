//! On-disk experiment store for one dimension of a study.
//!
//! ```text
//! <root>/d<dim>/
//!   manifest.json
//!   suite.json
//!   traj/f<id>_<alg>/index.json, run<r>.bin
//!   eaf/f<id>_<alg>.bin, f<id>_<alg>.json
//!   features/<kind>_d<dim>.csv, <kind>_standardizer.json
//!   portfolios/<name>.json
//!   reports/
//! ```
//!
//! Files are written to a temporary name and renamed into place, so a key is
//! either fully present or absent. Trajectory indexes are written after their
//! run files and EAF sidecars after their matrices, so the index and the
//! sidecar are the completion markers for a key.

use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::eaf::{BudgetGrid, EafMatrix, EafTable, TargetGrid};
use crate::error::{Error, Result};
use crate::features::{FeatureKind, FeatureVector, Standardizer};
use crate::optim::{AlgorithmId, RunTrajectory};
use crate::portfolio::PortfolioRecord;
use crate::suite::{FunctionId, Suite};

pub const FORMAT_VERSION: u32 = 1;

const TRAJ_MAGIC: [u8; 4] = *b"PSTJ";
const TRAJ_HEADER: usize = 4 + 4 + 8 + 8;
const TRAJ_SEGMENT: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub dimension: usize,
    pub master_seed: u64,
    pub budgets: BudgetGrid,
    pub targets: TargetGrid,
    pub n_runs: u32,
    pub algorithms: Vec<AlgorithmId>,
    pub config_hash: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct TrajIndex {
    function_id: FunctionId,
    algorithm_id: AlgorithmId,
    n_runs: u32,
    runs: Vec<TrajEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TrajEntry {
    run_index: u32,
    seed: u64,
    length: u64,
    file: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct EafSidecar {
    function_id: FunctionId,
    algorithm_id: AlgorithmId,
    n_runs: u32,
    #[serde(rename = "B")]
    budgets: Vec<usize>,
    #[serde(rename = "E")]
    targets: Vec<f64>,
}

#[derive(Debug)]
pub struct ExperimentStore {
    dir: PathBuf,
    manifest: Manifest,
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| match e.kind() {
        ErrorKind::NotFound => Error::NotFound(path.display().to_string()),
        _ => Error::io(path, e),
    })
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = read_bytes(path)?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn key_name(f: FunctionId, a: AlgorithmId) -> String {
    format!("f{}_{}", f.0, a.name())
}

/// Run-length encodes `values` by bit pattern, so decoding is exact.
pub fn encode_trajectory(values: &[f64]) -> Vec<u8> {
    let mut segments: Vec<(u64, u64)> = Vec::new();
    for v in values {
        match segments.last_mut() {
            Some((bits, n)) if *bits == v.to_bits() => *n += 1,
            _ => segments.push((v.to_bits(), 1)),
        }
    }
    let mut out = Vec::with_capacity(TRAJ_HEADER + TRAJ_SEGMENT * segments.len());
    out.extend_from_slice(&TRAJ_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(values.len() as u64).to_le_bytes());
    out.extend_from_slice(&(segments.len() as u64).to_le_bytes());
    for (bits, n) in segments {
        out.extend_from_slice(&bits.to_le_bytes());
        out.extend_from_slice(&n.to_le_bytes());
    }
    out
}

fn le_u64(b: &[u8]) -> u64 {
    u64::from_le_bytes(b.try_into().expect("8 bytes"))
}

pub fn decode_trajectory(bytes: &[u8]) -> Result<Vec<f64>> {
    let bad = |msg: &str| Error::Format(format!("trajectory payload: {msg}"));
    if bytes.len() < TRAJ_HEADER || bytes[..4] != TRAJ_MAGIC {
        return Err(bad("missing header"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(bad(&format!(
            "version {version}, expected {FORMAT_VERSION}"
        )));
    }
    let length = le_u64(&bytes[8..16]);
    let n_segments = le_u64(&bytes[16..24]);
    let body = &bytes[TRAJ_HEADER..];
    if n_segments.checked_mul(TRAJ_SEGMENT as u64) != Some(body.len() as u64) {
        return Err(bad("segment count does not match payload size"));
    }
    let total = body
        .chunks_exact(TRAJ_SEGMENT)
        .try_fold(0u64, |acc, s| acc.checked_add(le_u64(&s[8..])));
    if total != Some(length) {
        return Err(bad("run lengths do not add up to the declared length"));
    }
    let mut out = Vec::with_capacity(length as usize);
    for s in body.chunks_exact(TRAJ_SEGMENT) {
        let v = f64::from_bits(le_u64(&s[..8]));
        out.extend(std::iter::repeat_n(v, le_u64(&s[8..]) as usize));
    }
    Ok(out)
}

impl ExperimentStore {
    /// Directory holding the store for dimension `d` under `root`.
    pub fn dimension_dir(root: &Path, d: usize) -> PathBuf {
        root.join(format!("d{d}"))
    }

    /// Opens the store for `manifest.dimension`, creating it if needed.
    ///
    /// An existing store is only reused when its config hash matches.
    pub fn create(root: &Path, manifest: Manifest) -> Result<Self> {
        if manifest.format_version != FORMAT_VERSION {
            return Err(Error::Usage(format!(
                "cannot create a store with format version {}",
                manifest.format_version
            )));
        }
        let dir = Self::dimension_dir(root, manifest.dimension);
        let path = dir.join("manifest.json");
        if path.exists() {
            let store = Self::open(root, manifest.dimension)?;
            if store.manifest.config_hash != manifest.config_hash {
                return Err(Error::Config(format!(
                    "store {} was built with config {}, refusing to reuse it for config {}",
                    dir.display(),
                    store.manifest.config_hash,
                    manifest.config_hash
                )));
            }
            if store.manifest != manifest {
                return Err(Error::Config(format!(
                    "store {} has a manifest that differs from the requested one",
                    dir.display()
                )));
            }
            return Ok(store);
        }
        for sub in ["traj", "eaf", "features", "portfolios", "reports"] {
            let p = dir.join(sub);
            fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
        }
        write_json(&path, &manifest)?;
        Ok(Self { dir, manifest })
    }

    pub fn open(root: &Path, d: usize) -> Result<Self> {
        let dir = Self::dimension_dir(root, d);
        let value: serde_json::Value = read_json(&dir.join("manifest.json"))?;
        let version = value.get("format_version").and_then(|v| v.as_u64());
        if version != Some(FORMAT_VERSION as u64) {
            return Err(Error::Format(format!(
                "{}: format version {version:?}, expected {FORMAT_VERSION}",
                dir.display()
            )));
        }
        let manifest: Manifest = serde_json::from_value(value)
            .map_err(|e| Error::Format(format!("{}/manifest.json: {e}", dir.display())))?;
        if manifest.dimension != d {
            return Err(Error::Format(format!(
                "{} holds dimension {}",
                dir.display(),
                manifest.dimension
            )));
        }
        Ok(Self { dir, manifest })
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn reports_dir(&self) -> PathBuf {
        self.dir.join("reports")
    }

    pub fn put_suite(&self, suite: &Suite) -> Result<()> {
        if suite.spec.dimension != self.manifest.dimension {
            return Err(Error::Usage(format!(
                "suite of dimension {} does not belong in a d{} store",
                suite.spec.dimension, self.manifest.dimension
            )));
        }
        let mut text = suite.to_json()?;
        text.push('\n');
        write_atomic(&self.dir.join("suite.json"), text.as_bytes())
    }

    pub fn get_suite(&self) -> Result<Suite> {
        let path = self.dir.join("suite.json");
        let bytes = read_bytes(&path)?;
        let text = String::from_utf8(bytes)
            .map_err(|_| Error::Format(format!("{} is not UTF-8", path.display())))?;
        Suite::from_json(&text)
    }

    fn traj_dir(&self, f: FunctionId, a: AlgorithmId) -> PathBuf {
        self.dir.join("traj").join(key_name(f, a))
    }

    /// Stores all runs of one (function, algorithm) key, replacing any
    /// previous set.
    pub fn put_trajectories(&self, runs: &[RunTrajectory]) -> Result<()> {
        let first = runs
            .first()
            .ok_or_else(|| Error::Usage("put_trajectories needs at least one run".into()))?;
        let (f, a) = (first.function_id, first.algorithm);
        if runs.iter().any(|r| (r.function_id, r.algorithm) != (f, a)) {
            return Err(Error::Usage(
                "put_trajectories got runs of several keys".into(),
            ));
        }
        let dir = self.traj_dir(f, a);
        let mut entries = Vec::with_capacity(runs.len());
        for r in runs {
            let file = format!("run{}.bin", r.run_index);
            write_atomic(&dir.join(&file), &encode_trajectory(&r.best_so_far))?;
            entries.push(TrajEntry {
                run_index: r.run_index,
                seed: r.seed,
                length: r.best_so_far.len() as u64,
                file,
            });
        }
        write_json(
            &dir.join("index.json"),
            &TrajIndex {
                function_id: f,
                algorithm_id: a,
                n_runs: runs.len() as u32,
                runs: entries,
            },
        )
    }

    pub fn has_trajectories(&self, f: FunctionId, a: AlgorithmId) -> bool {
        self.traj_dir(f, a).join("index.json").is_file()
    }

    pub fn get_trajectories(&self, f: FunctionId, a: AlgorithmId) -> Result<Vec<RunTrajectory>> {
        let dir = self.traj_dir(f, a);
        let index: TrajIndex = read_json(&dir.join("index.json"))?;
        if (index.function_id, index.algorithm_id) != (f, a)
            || index.runs.len() != index.n_runs as usize
        {
            return Err(Error::Format(format!(
                "{}: inconsistent index",
                dir.display()
            )));
        }
        index
            .runs
            .iter()
            .map(|e| {
                if e.file.contains(['/', '\\']) {
                    return Err(Error::Format(format!(
                        "{}: bad run file name",
                        dir.display()
                    )));
                }
                let values = decode_trajectory(&read_bytes(&dir.join(&e.file))?)?;
                if values.len() as u64 != e.length {
                    return Err(Error::Format(format!(
                        "{}/{}: {} values, index says {}",
                        dir.display(),
                        e.file,
                        values.len(),
                        e.length
                    )));
                }
                Ok(RunTrajectory {
                    function_id: f,
                    algorithm: a,
                    run_index: e.run_index,
                    seed: e.seed,
                    best_so_far: values,
                })
            })
            .collect()
    }

    fn eaf_paths(&self, f: FunctionId, a: AlgorithmId) -> (PathBuf, PathBuf) {
        let base = self.dir.join("eaf").join(key_name(f, a));
        (base.with_extension("bin"), base.with_extension("json"))
    }

    pub fn put_eaf(&self, m: &EafMatrix) -> Result<()> {
        let (b, e) = (&self.manifest.budgets, &self.manifest.targets);
        if m.n_budgets() != b.len() || m.n_targets() != e.len() {
            return Err(Error::Usage(format!(
                "EAF for ({}, {}) does not match the store grids",
                m.function_id, m.algorithm
            )));
        }
        let (bin, json) = self.eaf_paths(m.function_id, m.algorithm);
        let bytes: Vec<u8> = m.values().iter().flat_map(|v| v.to_le_bytes()).collect();
        write_atomic(&bin, &bytes)?;
        write_json(
            &json,
            &EafSidecar {
                function_id: m.function_id,
                algorithm_id: m.algorithm,
                n_runs: m.n_runs,
                budgets: b.budgets().to_vec(),
                targets: e.thresholds().to_vec(),
            },
        )
    }

    pub fn has_eaf(&self, f: FunctionId, a: AlgorithmId) -> bool {
        self.eaf_paths(f, a).1.is_file()
    }

    pub fn get_eaf(&self, f: FunctionId, a: AlgorithmId) -> Result<EafMatrix> {
        let (bin, json) = self.eaf_paths(f, a);
        let side: EafSidecar = read_json(&json)?;
        if (side.function_id, side.algorithm_id) != (f, a)
            || side.budgets != self.manifest.budgets.budgets()
            || side.targets != self.manifest.targets.thresholds()
        {
            return Err(Error::Format(format!(
                "{}: sidecar does not match the store",
                json.display()
            )));
        }
        let bytes = read_bytes(&bin)?;
        let n = side.budgets.len() * side.targets.len();
        if bytes.len() != 8 * n {
            return Err(Error::Format(format!(
                "{}: {} bytes, expected {}",
                bin.display(),
                bytes.len(),
                8 * n
            )));
        }
        let values = bytes
            .chunks_exact(8)
            .map(le_u64)
            .map(f64::from_bits)
            .collect();
        EafMatrix::from_values(
            f,
            a,
            side.n_runs,
            side.budgets.len(),
            side.targets.len(),
            values,
        )
    }

    /// All EAF matrices for `functions` x manifest algorithms.
    pub fn load_eaf_table(&self, functions: &[FunctionId]) -> Result<EafTable> {
        let mut table = EafTable::new(self.manifest.budgets.clone(), self.manifest.targets.clone());
        for &f in functions {
            for &a in &self.manifest.algorithms {
                table.insert(self.get_eaf(f, a)?)?;
            }
        }
        Ok(table)
    }

    fn features_path(&self, kind: FeatureKind) -> PathBuf {
        self.dir
            .join("features")
            .join(format!("{}_d{}.csv", kind.name(), self.manifest.dimension))
    }

    /// Writes one CSV per feature kind; values use the shortest exact decimal.
    pub fn put_features(
        &self,
        kind: FeatureKind,
        names: &[String],
        vectors: &[FeatureVector],
    ) -> Result<()> {
        if vectors
            .iter()
            .any(|v| v.kind != kind || v.values.len() != names.len())
        {
            return Err(Error::Usage(format!(
                "feature vectors do not match kind {kind} with {} columns",
                names.len()
            )));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let fmt_err = |e: csv::Error| Error::Format(e.to_string());
        let mut header = vec!["function_id".to_string()];
        header.extend(names.iter().cloned());
        w.write_record(&header).map_err(fmt_err)?;
        for v in vectors {
            let mut row = vec![v.function_id.0.to_string()];
            row.extend(v.values.iter().map(|x| x.to_string()));
            w.write_record(&row).map_err(fmt_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        write_atomic(&self.features_path(kind), &bytes)
    }

    /// Column names and vectors, in file order.
    pub fn get_features(&self, kind: FeatureKind) -> Result<(Vec<String>, Vec<FeatureVector>)> {
        let path = self.features_path(kind);
        let bytes = read_bytes(&path)?;
        let bad = |msg: String| Error::Format(format!("{}: {msg}", path.display()));
        let mut r = csv::Reader::from_reader(bytes.as_slice());
        let header = r.headers().map_err(|e| bad(e.to_string()))?.clone();
        if header.get(0) != Some("function_id") {
            return Err(bad("first column must be function_id".into()));
        }
        let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut vectors = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let id: u32 = rec[0]
                .parse()
                .map_err(|_| bad(format!("bad function id `{}`", &rec[0])))?;
            let values = rec
                .iter()
                .skip(1)
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| bad(format!("bad number `{s}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            vectors.push(FeatureVector {
                function_id: FunctionId(id),
                kind,
                values,
            });
        }
        Ok((names, vectors))
    }

    pub fn has_features(&self, kind: FeatureKind) -> bool {
        self.features_path(kind).is_file()
    }

    fn standardizer_path(&self, kind: FeatureKind) -> PathBuf {
        self.dir
            .join("features")
            .join(format!("{}_standardizer.json", kind.name()))
    }

    pub fn put_standardizer(&self, s: &Standardizer) -> Result<()> {
        write_json(&self.standardizer_path(s.kind), s)
    }

    pub fn get_standardizer(&self, kind: FeatureKind) -> Result<Standardizer> {
        read_json(&self.standardizer_path(kind))
    }

    fn portfolio_path(&self, name: &str) -> Result<PathBuf> {
        let ok = !name.is_empty()
            && name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
            && !name.starts_with('.');
        if !ok {
            return Err(Error::Usage(format!("invalid portfolio name `{name}`")));
        }
        Ok(self.dir.join("portfolios").join(format!("{name}.json")))
    }

    pub fn put_portfolio(&self, name: &str, record: &PortfolioRecord) -> Result<()> {
        write_json(&self.portfolio_path(name)?, record)
    }

    pub fn get_portfolio(&self, name: &str) -> Result<PortfolioRecord> {
        read_json(&self.portfolio_path(name)?)
    }
}
