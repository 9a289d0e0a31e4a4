//! Probability mass of small balls under a k-regular data distribution, and
//! the intrinsic-dimension estimate that supplies k.
//!
//! The estimator anchors on the smallest ball around `x` holding `b` training
//! points (radius `r_*`). Below that radius it interpolates the empirical mass
//! `b/n` down by `(r / r_*)^k`; at or above it, it returns the empirical
//! fraction of training points in the ball.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dist, kth_distance, sorted_distances, PointSet};

/// Regularity exponent `k` and interpolation threshold `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularityParams {
    pub k: u32,
    pub b: usize,
}

impl RegularityParams {
    pub fn new(k: u32, b: usize) -> Result<Self> {
        let p = Self { k, b };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::invalid("regularity exponent k must be >= 1"));
        }
        if self.b < 1 {
            return Err(Error::invalid("threshold b must be >= 1"));
        }
        Ok(())
    }
}

/// Tolerance settings for [`estimate_k`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorConfig {
    pub epsilon: f64,
    pub delta: f64,
    #[serde(default)]
    pub b_override: Option<usize>,
    /// Pick the anchor point at random from this seed instead of using the
    /// first point.
    #[serde(default)]
    pub anchor_seed: Option<u64>,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            epsilon: 3.0,
            delta: 0.05,
            b_override: None,
            anchor_seed: None,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        check_eps_delta(self.epsilon, self.delta)?;
        if self.b_override == Some(0) {
            return Err(Error::invalid("b override must be >= 1"));
        }
        Ok(())
    }

    /// Threshold count used by [`estimate_k`] for a sample of `n` points in
    /// dimension `d`.
    pub fn threshold(&self, d: usize, n: usize) -> Result<usize> {
        self.validate()?;
        match self.b_override {
            Some(b) => Ok(b),
            None => {
                let log = (16.0 * n as f64 / self.delta).ln();
                ceil_to_usize(64.0 * (d as f64 + 2.0) * log / (self.epsilon * self.epsilon))
            }
        }
    }
}

pub(crate) fn check_eps_delta(epsilon: f64, delta: f64) -> Result<()> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::invalid(format!(
            "epsilon must be > 0, got {epsilon}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    Ok(())
}

pub(crate) fn ceil_to_usize(x: f64) -> Result<usize> {
    if !x.is_finite() || x < 0.0 || x >= usize::MAX as f64 {
        return Err(Error::invalid(format!(
            "value {x} is not representable as a count"
        )));
    }
    Ok((x.ceil() as usize).max(1))
}

/// `ceil(c (d+2) L / min(eps,1)^2)` where `L` is the log term.
fn threshold_from_log(constant: f64, d: usize, log_term: f64, epsilon: f64) -> Result<usize> {
    let e = epsilon.min(1.0);
    ceil_to_usize(constant * (d as f64 + 2.0) * log_term / (e * e))
}

/// Threshold `b` that carries the accuracy guarantee of the estimator:
/// `ceil(400 (d+2) ln(16 n / delta) / min(eps, 1)^2)`.
pub fn theoretical_b(d: usize, n: usize, delta: f64, epsilon: f64) -> Result<usize> {
    if n == 0 || d == 0 {
        return Err(Error::invalid("n and d must be >= 1"));
    }
    check_eps_delta(epsilon, delta)?;
    threshold_from_log(400.0, d, (16.0 * n as f64 / delta).ln(), epsilon)
}

/// Estimated mass of the closed ball `B(x, r)` from training sample `s`.
pub fn est_mass(x: &[f64], r: f64, s: &PointSet, params: RegularityParams) -> Result<f64> {
    params.validate()?;
    if !(r >= 0.0) {
        return Err(Error::invalid(format!("radius must be >= 0, got {r}")));
    }
    if s.len() < params.b {
        return Err(Error::InsufficientData {
            needed: params.b,
            available: s.len(),
        });
    }
    let r_star = kth_distance(s, x, params.b)?;
    let n = s.len();
    if r_star > r {
        Ok(interpolate(params.b, n, params.k, r, r_star))
    } else {
        let inside = s.iter().filter(|p| dist(x, p) <= r).count();
        Ok(inside as f64 / n as f64)
    }
}

#[inline]
fn interpolate(b: usize, n: usize, k: u32, r: f64, r_star: f64) -> f64 {
    (b as f64 / n as f64) * (r / r_star).powi(k as i32)
}

/// Mass estimator bound to one anchor point, with the sorted training
/// distances cached so repeated queries cost a binary search.
#[derive(Debug, Clone)]
pub struct AnchoredEstimator {
    sorted: Vec<f64>,
    r_star: f64,
    params: RegularityParams,
}

impl AnchoredEstimator {
    pub fn new(x: &[f64], s: &PointSet, params: RegularityParams) -> Result<Self> {
        params.validate()?;
        if s.len() < params.b {
            return Err(Error::InsufficientData {
                needed: params.b,
                available: s.len(),
            });
        }
        let sorted = sorted_distances(s, x)?;
        let r_star = sorted[params.b - 1];
        Ok(Self {
            sorted,
            r_star,
            params,
        })
    }

    pub fn r_star(&self) -> f64 {
        self.r_star
    }

    /// Same value as [`est_mass`] for this anchor.
    #[inline]
    pub fn mass(&self, r: f64) -> f64 {
        let n = self.sorted.len();
        if self.r_star > r {
            interpolate(self.params.b, n, self.params.k, r, self.r_star)
        } else {
            self.sorted.partition_point(|&d| d <= r) as f64 / n as f64
        }
    }

    /// A radius no smaller than any `r` with `mass(r) <= cap`.
    pub fn radius_bound(&self, cap: f64) -> f64 {
        let n = self.sorted.len();
        let b = self.params.b;
        if cap >= 1.0 {
            return f64::INFINITY;
        }
        if cap * (n as f64) < b as f64 && self.r_star > 0.0 {
            // Only the interpolation branch can stay under the cap.
            let scale = (cap * n as f64 / b as f64).powf(1.0 / self.params.k as f64);
            return self.r_star * scale * (1.0 + 1e-9) + f64::MIN_POSITIVE;
        }
        // Empirical branch: the count must stay at or below floor(cap * n).
        let allowed = (cap * n as f64).floor() as usize;
        match self.sorted.get(allowed) {
            Some(&d) => d,
            None => f64::INFINITY,
        }
    }
}

/// Intrinsic-dimension estimate from the ratio of the radii holding `b` and
/// `2b` training points around an anchor.
pub fn estimate_k(s: &PointSet, config: &EstimatorConfig) -> Result<u32> {
    let n = s.len();
    if n == 0 {
        return Err(Error::EmptyPointSet);
    }
    let b = config.threshold(s.dim(), n)?;
    if n < 2 * b {
        return Err(Error::InsufficientData {
            needed: 2 * b,
            available: n,
        });
    }
    let anchor = match config.anchor_seed {
        None => 0,
        Some(seed) => ChaCha8Rng::seed_from_u64(seed).random_range(0..n),
    };
    let sorted = sorted_distances(s, s.point(anchor))?;
    let s_star = sorted[b - 1];
    let r_star = sorted[2 * b - 1];
    if r_star <= s_star || s_star <= 0.0 {
        return Err(Error::DegenerateRadii);
    }
    let raw = 1.0 / (r_star / s_star).log2();
    let k = raw.round();
    if !(k >= 1.0) || !k.is_finite() {
        return Err(Error::InconsistentRegularity(raw));
    }
    Ok(k as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use std::f64::consts::PI;

    fn unit_circle(n: usize, seed: u64) -> PointSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coords = Vec::with_capacity(2 * n);
        for _ in 0..n {
            let t = rng.random_range(0.0..2.0 * PI);
            coords.extend_from_slice(&[t.cos(), t.sin()]);
        }
        PointSet::new(2, coords).unwrap()
    }

    #[test]
    fn theoretical_b_formula() {
        // ln term equal to one: 400 * 4 * 1 / 1.
        assert_eq!(threshold_from_log(400.0, 2, 1.0, 1.0).unwrap(), 1600);
        // eps >= 1 clamps to 1.
        assert_eq!(
            theoretical_b(2, 2000, 0.05, 1.0).unwrap(),
            theoretical_b(2, 2000, 0.05, 7.5).unwrap()
        );
        // Hand evaluation: 400 * 4 * ln(16 * 2000 / 0.05) / 0.25
        //   = 6400 * ln(640000) = 6400 * 13.369223... = 85563.03 -> 85564.
        assert_eq!(theoretical_b(2, 2000, 0.05, 0.5).unwrap(), 85564);
        assert!(theoretical_b(2, 0, 0.05, 0.5).is_err());
        assert!(theoretical_b(2, 10, 1.0, 0.5).is_err());
        assert!(theoretical_b(2, 10, 0.1, 0.0).is_err());
    }

    #[test]
    fn est_mass_edge_cases() {
        let s = unit_circle(500, 1);
        let p = RegularityParams::new(1, 50).unwrap();
        let x = [1.0, 0.0];
        assert_eq!(est_mass(&x, 2.5, &s, p).unwrap(), 1.0);
        let off = [0.3, 0.2];
        assert_eq!(est_mass(&off, 0.0, &s, p).unwrap(), 0.0);
        let small = RegularityParams::new(1, 501).unwrap();
        assert!(matches!(
            est_mass(&x, 0.1, &s, small),
            Err(Error::InsufficientData {
                needed: 501,
                available: 500
            })
        ));
    }

    #[test]
    fn branch_continuity_at_anchor_radius() {
        let s = unit_circle(2000, 3);
        let p = RegularityParams::new(1, 100).unwrap();
        let x = s.point(17).to_vec();
        let r_star = kth_distance(&s, &x, 100).unwrap();
        // Empirical branch at r_*; interpolation just below converges to b/n.
        assert_eq!(est_mass(&x, r_star, &s, p).unwrap(), 100.0 / 2000.0);
        let below = f64::from_bits(r_star.to_bits() - 1);
        let v = est_mass(&x, below, &s, p).unwrap();
        assert!(v < 0.05 && (0.05 - v) < 1e-12);
    }

    #[test]
    fn anchored_matches_direct() {
        let s = unit_circle(1000, 9);
        let p = RegularityParams::new(1, 40).unwrap();
        let x = [0.2, -0.9];
        let a = AnchoredEstimator::new(&x, &s, p).unwrap();
        for r in [0.0, 1e-4, 0.01, 0.05, a.r_star(), 0.3, 1.0, 2.5] {
            assert_eq!(a.mass(r), est_mass(&x, r, &s, p).unwrap());
        }
    }

    #[test]
    fn radius_bound_covers_all_capped_radii() {
        let s = unit_circle(1000, 4);
        let x = s.point(0).to_vec();
        let mut ds = sorted_distances(&s, &x).unwrap();
        ds.push(0.0);
        for (k, b, cap) in [(1, 40, 0.001), (2, 40, 0.01), (1, 40, 0.2), (1, 5, 0.5)] {
            let a = AnchoredEstimator::new(&x, &s, RegularityParams::new(k, b).unwrap()).unwrap();
            let bound = a.radius_bound(cap);
            for &r in &ds {
                if a.mass(r) <= cap {
                    assert!(r <= bound, "k={k} b={b} cap={cap} r={r} bound={bound}");
                }
            }
            for r in (0..400).map(|i| i as f64 * 0.005) {
                if a.mass(r) <= cap {
                    assert!(r <= bound);
                }
            }
        }
    }

    #[test]
    fn estimate_k_errors() {
        let same = PointSet::new(2, [0.5, 0.5].repeat(400)).unwrap();
        let cfg = EstimatorConfig {
            b_override: Some(50),
            ..Default::default()
        };
        assert!(matches!(
            estimate_k(&same, &cfg),
            Err(Error::DegenerateRadii)
        ));
        let tiny = unit_circle(50, 1);
        assert!(matches!(
            estimate_k(&tiny, &cfg),
            Err(Error::InsufficientData { needed: 100, .. })
        ));
    }

    #[test]
    fn estimate_k_threshold_formula() {
        // 64 * 4 * ln(16 * 50000 / 0.05) / 9 = 471.3 -> 472.
        let cfg = EstimatorConfig::default();
        assert_eq!(cfg.threshold(2, 50_000).unwrap(), 472);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn monotone_in_radius(seed in 0u64..1000, k in 1u32..4, b in 1usize..60,
                              r1 in 0.0f64..2.5, r2 in 0.0f64..2.5) {
            let s = unit_circle(120, seed);
            let p = RegularityParams::new(k, b).unwrap();
            let x = [0.4, 0.1];
            let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            let a = est_mass(&x, lo, &s, p).unwrap();
            let c = est_mass(&x, hi, &s, p).unwrap();
            prop_assert!(a <= c);
            prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&c));
        }

        #[test]
        fn scale_invariance(seed in 0u64..1000, k in 1u32..3, b in 1usize..60,
                            r in 0.0f64..2.5, exp in -6i32..6) {
            let alpha = 2f64.powi(exp);
            let s = unit_circle(120, seed);
            let scaled = s.map_points(2, |p, out| { out[0] = p[0] * alpha; out[1] = p[1] * alpha; }).unwrap();
            let p = RegularityParams::new(k, b).unwrap();
            let x = [0.4, 0.1];
            let xs = [0.4 * alpha, 0.1 * alpha];
            prop_assert_eq!(est_mass(&x, r, &s, p).unwrap(), est_mass(&xs, r * alpha, &scaled, p).unwrap());
        }
    }
}
