//! Copy-region search around each training point and the resulting
//! data-copy rate estimate.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dist, PointSet};
use crate::index::KdTree;
use crate::mass::{
    ceil_to_usize, check_eps_delta, estimate_k, AnchoredEstimator, EstimatorConfig,
    RegularityParams,
};
use crate::rng::stream_rng;
use crate::sampler::SamplerOracle;

/// Sample size of the coverage set `U`: `ceil(20 ln(1/delta) / eps^2)`.
pub fn default_u_size(epsilon: f64, delta: f64) -> Result<usize> {
    check_eps_delta(epsilon, delta)?;
    ceil_to_usize(20.0 * (1.0 / delta).ln() / (epsilon * epsilon))
}

/// Generated-sample size that carries the accuracy guarantee.
pub fn theoretical_m(d: usize, n: usize, delta: f64, epsilon: f64) -> Result<usize> {
    if n == 0 || d == 0 {
        return Err(Error::invalid("n and d must be >= 1"));
    }
    check_eps_delta(epsilon, delta)?;
    let e = epsilon.min(1.0);
    let scale = epsilon * epsilon * e * e;
    let n2 = (n as f64) * (n as f64);
    let d2 = d as f64 + 2.0;
    let log = (98304.0 * n2 * d2 / (delta * scale)).ln();
    ceil_to_usize(2048.0 * n2 * d2 * log / scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectionParams {
    /// Overrepresentation factor.
    pub lambda: f64,
    /// Largest allowed `p`-mass of a copy region.
    pub gamma: f64,
    pub epsilon: f64,
    pub delta: f64,
    /// Number of generated points used to measure `q` around training points.
    pub m: usize,
    /// Size of the coverage sample; derived from `epsilon` and `delta` when absent.
    pub u_size: Option<usize>,
    pub b: usize,
    /// Regularity exponent; estimated from the training set when absent.
    pub k: Option<u32>,
    /// Settings for estimating `k`.
    pub k_estimator: EstimatorConfig,
    pub seed: u64,
}

impl Default for DetectionParams {
    fn default() -> Self {
        Self {
            lambda: 20.0,
            gamma: 0.00025,
            epsilon: 0.1,
            delta: 0.05,
            m: 200_000,
            u_size: None,
            b: 400,
            k: None,
            k_estimator: EstimatorConfig::default(),
            seed: 0,
        }
    }
}

impl DetectionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 1.0) || !self.lambda.is_finite() {
            return Err(Error::invalid(format!(
                "lambda must exceed 1, got {}",
                self.lambda
            )));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::invalid(format!(
                "gamma must lie in (0, 1), got {}",
                self.gamma
            )));
        }
        check_eps_delta(self.epsilon, self.delta)?;
        if self.m == 0 {
            return Err(Error::invalid("m must be >= 1"));
        }
        if self.u_size == Some(0) {
            return Err(Error::invalid("u_size must be >= 1"));
        }
        if self.b == 0 {
            return Err(Error::invalid("b must be >= 1"));
        }
        if self.k == Some(0) {
            return Err(Error::invalid("k must be >= 1"));
        }
        if self.k.is_none() {
            self.k_estimator.validate()?;
        }
        Ok(())
    }

    pub fn u_size(&self) -> Result<usize> {
        match self.u_size {
            Some(u) => Ok(u),
            None => default_u_size(self.epsilon, self.delta),
        }
    }
}

/// Copy region around training point `train_index`. `radius` is `None` when
/// not even the zero radius passes the mass cap, which happens only when at
/// least `b` training points coincide with the center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CopyRegion {
    pub train_index: usize,
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub cr_hat: f64,
    /// Number of coverage points inside some copy region.
    pub covered: usize,
    pub regions: Vec<CopyRegion>,
    pub m_used: usize,
    pub u_used: usize,
    pub k_used: u32,
    pub params: DetectionParams,
    pub seed: u64,
    pub sampler: String,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl DetectionReport {
    /// Regions with a strictly positive radius.
    pub fn positive_regions(&self) -> usize {
        self.regions
            .iter()
            .filter(|r| r.radius.is_some_and(|r| r > 0.0))
            .count()
    }
}

/// Largest candidate radius around the estimator's anchor passing both the
/// mass cap and the overrepresentation test. `t_tree` indexes `m` generated
/// points.
pub(crate) fn search_radius(
    x: &[f64],
    est: &AnchoredEstimator,
    t_tree: &KdTree,
    m: usize,
    lambda: f64,
    gamma: f64,
) -> Option<f64> {
    // Candidates beyond this bound all fail the mass cap.
    let bound = est.radius_bound(gamma);
    let mut ds = t_tree.distances_within(x, bound);
    ds.sort_unstable_by(f64::total_cmp);
    let passes = |r: f64, count: usize| {
        let p = est.mass(r);
        p <= gamma && count as f64 / m as f64 >= lambda * p
    };
    let mut j = ds.len();
    while j > 0 {
        let r = ds[j - 1];
        // T-count of the closed ball of radius r: every distance <= r.
        if passes(r, j) {
            return Some(r);
        }
        let mut i = j - 1;
        while i > 0 && ds[i - 1] == r {
            i -= 1;
        }
        j = i;
    }
    passes(0.0, 0).then_some(0.0)
}

/// Copy radius of `x` given training set `s` and generated sample `t`.
pub fn find_copy_radius(
    x: &[f64],
    s: &PointSet,
    t: &PointSet,
    params: &DetectionParams,
    k: u32,
) -> Result<Option<f64>> {
    params.validate()?;
    s.check_dim(x.len())?;
    t.check_dim(x.len())?;
    if t.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let est = AnchoredEstimator::new(x, s, RegularityParams::new(k, params.b)?)?;
    let tree = KdTree::build(t);
    Ok(search_radius(
        x,
        &est,
        &tree,
        t.len(),
        params.lambda,
        params.gamma,
    ))
}

/// Per-point radius search plus coverage count given already drawn `t` and `u`.
pub fn detect_with_samples(
    s: &PointSet,
    t: &PointSet,
    u: &PointSet,
    params: &DetectionParams,
    k: u32,
) -> Result<(Vec<CopyRegion>, usize)> {
    params.validate()?;
    if s.is_empty() || t.is_empty() || u.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    t.check_dim(s.dim())?;
    u.check_dim(s.dim())?;
    if s.len() < params.b {
        return Err(Error::InsufficientData {
            needed: params.b,
            available: s.len(),
        });
    }
    let reg = RegularityParams::new(k, params.b)?;
    let tree = KdTree::build(t);
    let m = t.len();
    let regions: Vec<CopyRegion> = (0..s.len())
        .into_par_iter()
        .map(|i| {
            let x = s.point(i);
            let est = AnchoredEstimator::new(x, s, reg)?;
            Ok(CopyRegion {
                train_index: i,
                radius: search_radius(x, &est, &tree, m, params.lambda, params.gamma),
            })
        })
        .collect::<Result<_>>()?;
    let active: Vec<(&[f64], f64)> = regions
        .iter()
        .filter_map(|c| c.radius.map(|r| (s.point(c.train_index), r)))
        .collect();
    let covered = (0..u.len())
        .into_par_iter()
        .filter(|&j| {
            let p = u.point(j);
            active.iter().any(|(x, r)| dist(x, p) <= *r)
        })
        .count();
    Ok((regions, covered))
}

/// Draws `m` generated points and then the coverage sample from `sampler`
/// on the stream of `params.seed`, and estimates the data-copy rate.
pub fn detect(
    s: &PointSet,
    sampler: &mut dyn SamplerOracle,
    params: &DetectionParams,
) -> Result<DetectionReport> {
    let start = Instant::now();
    params.validate()?;
    if s.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    if s.len() < params.b {
        return Err(Error::InsufficientData {
            needed: params.b,
            available: s.len(),
        });
    }
    if sampler.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: sampler.dim(),
        });
    }
    let k = match params.k {
        Some(k) => k,
        None => estimate_k(s, &params.k_estimator).map_err(|e| e.context("estimating k"))?,
    };
    let u_size = params.u_size()?;
    let mut rng = stream_rng(params.seed, 0);
    let t = sampler
        .sample(params.m, &mut rng)
        .map_err(|e| e.context(format!("drawing {} generated points", params.m)))?;
    let u = sampler
        .sample(u_size, &mut rng)
        .map_err(|e| e.context(format!("drawing {u_size} coverage points")))?;
    if t.len() != params.m || u.len() != u_size {
        return Err(Error::Sampler(format!(
            "sampler returned {} and {} points, expected {} and {u_size}",
            t.len(),
            u.len(),
            params.m
        )));
    }
    let (regions, covered) = detect_with_samples(s, &t, &u, params, k)?;
    Ok(DetectionReport {
        cr_hat: covered as f64 / u_size as f64,
        covered,
        regions,
        m_used: params.m,
        u_used: u_size,
        k_used: k,
        params: *params,
        seed: params.seed,
        sampler: sampler.describe(),
        elapsed: start.elapsed(),
    })
}
