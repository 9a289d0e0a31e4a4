//! Null calibration of copy-rate estimates and significance decisions.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::detector::{detect, DetectionParams};
use crate::distributions::AnalyticDistribution;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream_rng};

/// Copy-rate estimates with `q = p`, one per freshly drawn training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullDistribution {
    pub values: Vec<f64>,
    pub run_count: usize,
    pub seed: u64,
}

impl NullDistribution {
    pub fn new(values: Vec<f64>, seed: u64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("null distribution needs at least one value"));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid("null values must lie in [0, 1]"));
        }
        Ok(Self {
            run_count: values.len(),
            values,
            seed,
        })
    }
}

/// How null values equal to the observed estimate count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRule {
    /// Count only null values strictly above the observation.
    #[default]
    Strict,
    /// Count null values at or above the observation.
    Inclusive,
}

/// Seeds of one calibration run: the training set stream and the detector seed.
pub fn run_seeds(seed: u64, run: usize) -> (u64, u64) {
    let base = derive_seed(seed, run as u64);
    (derive_seed(base, 0), derive_seed(base, 1))
}

/// Runs the detector `runs` times with `q = p`, each time on a fresh
/// training set of size `n`.
pub fn null_calibrate(
    p: &AnalyticDistribution,
    n: usize,
    params: &DetectionParams,
    runs: usize,
    seed: u64,
) -> Result<NullDistribution> {
    if runs == 0 {
        return Err(Error::invalid("calibration needs at least one run"));
    }
    if n == 0 {
        return Err(Error::invalid("training size must be >= 1"));
    }
    params.validate()?;
    p.validate()?;
    let values = (0..runs)
        .into_par_iter()
        .map(|run| {
            let (data_seed, detect_seed) = run_seeds(seed, run);
            let s = p.sample(n, &mut stream_rng(data_seed, 0));
            let mut q = p.clone();
            let run_params = DetectionParams {
                seed: detect_seed,
                ..*params
            };
            detect(&s, &mut q, &run_params)
                .map(|r| r.cr_hat)
                .map_err(|e| e.context(format!("calibration run {run}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    NullDistribution::new(values, seed)
}

/// Fraction of null values exceeding `observed` (or tying it, when
/// inclusive). Small values indicate copying.
pub fn p_value(null: &NullDistribution, observed: f64, rule: TieRule) -> Result<f64> {
    if null.values.is_empty() {
        return Err(Error::invalid("empty null distribution"));
    }
    if observed.is_nan() {
        return Err(Error::invalid("observed value is NaN"));
    }
    let above = null
        .values
        .iter()
        .filter(|&&v| match rule {
            TieRule::Strict => v > observed,
            TieRule::Inclusive => v >= observed,
        })
        .count();
    Ok(above as f64 / null.values.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignificanceDecision {
    pub p_value: f64,
    pub alpha: f64,
    pub significant: bool,
}

pub fn decide(p_value: f64, alpha: f64) -> Result<SignificanceDecision> {
    if !(0.0..=1.0).contains(&p_value) {
        return Err(Error::invalid(format!("p-value {p_value} outside [0, 1]")));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!("alpha {alpha} outside [0, 1]")));
    }
    Ok(SignificanceDecision {
        p_value,
        alpha,
        significant: p_value <= alpha,
    })
}

/// Median, averaging the two middle values for even counts.
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() || values.iter().any(|v| v.is_nan()) {
        return Err(Error::invalid("median needs a nonempty list without NaN"));
    }
    let mut v = values.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    let mid = v.len() / 2;
    Ok(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    })
}

/// On-disk store of null distributions, one CSV per key.
#[derive(Debug, Clone)]
pub struct NullCache {
    dir: PathBuf,
}

pub fn params_hash(params: &DetectionParams) -> String {
    let json = serde_json::to_vec(params).expect("parameters serialize");
    hex::encode(Sha256::digest(&json))[..16].to_string()
}

impl NullCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path_for(
        &self,
        p: &AnalyticDistribution,
        n: usize,
        params: &DetectionParams,
        runs: usize,
        seed: u64,
    ) -> PathBuf {
        self.dir.join(format!(
            "null_{}_{n}_{}_{seed}_{runs}.csv",
            p.id(),
            params_hash(params)
        ))
    }

    pub fn load(path: &Path, seed: u64) -> Result<NullDistribution> {
        let text = fs::read_to_string(path)?;
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let field = line.rsplit(',').next().unwrap_or(line);
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                line: i + 1,
                message: format!("bad null value {field:?}"),
            })?;
            values.push(v);
        }
        NullDistribution::new(values, seed)
    }

    pub fn store(path: &Path, null: &NullDistribution) -> Result<()> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut out = String::from("# run,cr_hat\n");
        for (i, v) in null.values.iter().enumerate() {
            out.push_str(&format!("{i},{v:?}\n"));
        }
        let tmp = path.with_extension("csv.tmp");
        fs::write(&tmp, out)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Cached null distribution for the key, computing and storing it on a miss.
    pub fn get_or_compute(
        &self,
        p: &AnalyticDistribution,
        n: usize,
        params: &DetectionParams,
        runs: usize,
        seed: u64,
    ) -> Result<NullDistribution> {
        let path = self.path_for(p, n, params, runs, seed);
        if path.exists() {
            if let Ok(null) = Self::load(&path, seed) {
                if null.run_count == runs {
                    return Ok(null);
                }
            }
        }
        let null = null_calibrate(p, n, params, runs, seed)?;
        Self::store(&path, &null)?;
        Ok(null)
    }
}
