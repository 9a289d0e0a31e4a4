use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{AnalyticDistribution, DistKind};
use crate::error::{Error, Result};
use crate::geometry::PointSet;
use crate::rng::stream_rng;

/// One halfmoons draw: outer moon `(cos t, sin t)` or inner moon
/// `(1 - cos t, 0.5 - sin t)` with equal probability, `t ~ U[0, pi]`.
pub(super) fn draw<R: Rng + ?Sized>(sigma: f64, out: &mut [f64], rng: &mut R) {
    let outer = rng.random::<bool>();
    let t = rng.random::<f64>() * std::f64::consts::PI;
    let (x, y) = if outer {
        (t.cos(), t.sin())
    } else {
        (1.0 - t.cos(), 0.5 - t.sin())
    };
    out[0] = x;
    out[1] = y;
    if sigma > 0.0 {
        for o in out.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *o += sigma * z;
        }
    }
}

pub fn sample_halfmoons(n: usize, sigma: f64, seed: u64) -> Result<PointSet> {
    if n == 0 {
        return Err(Error::invalid("sample size must be >= 1"));
    }
    let dist = AnalyticDistribution::halfmoons(sigma);
    dist.validate()?;
    Ok(dist.sample(n, &mut stream_rng(seed, 0)))
}

/// Mixture of a near-verbatim copier and an underfit model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CopierConfig {
    /// Probability of drawing from the copier component.
    pub rho: f64,
    /// Size of the copied training subset.
    pub copy_count: usize,
    /// Radius of the uniform disk noise added to copied points.
    pub copy_noise: f64,
    /// Radius of the uniform disk noise added to fresh base draws.
    pub underfit_noise: f64,
}

impl Default for CopierConfig {
    fn default() -> Self {
        Self {
            rho: 0.4,
            copy_count: 20,
            copy_noise: 0.02,
            underfit_noise: 0.25,
        }
    }
}

/// `q = rho * (uniform over S' + disk noise) + (1 - rho) * (base + disk noise)`
/// with `S'` a seeded uniform subset of `s`.
pub fn make_copier_mixture(
    s: &PointSet,
    config: CopierConfig,
    base: &AnalyticDistribution,
    seed: u64,
) -> Result<AnalyticDistribution> {
    let CopierConfig {
        rho,
        copy_count,
        copy_noise,
        underfit_noise,
    } = config;
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::invalid(format!("rho must lie in [0, 1], got {rho}")));
    }
    if copy_count == 0 || copy_count > s.len() {
        return Err(Error::invalid(format!(
            "copy count {copy_count} must be between 1 and the training size {}",
            s.len()
        )));
    }
    if base.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: base.dim(),
        });
    }
    let mut rng = stream_rng(seed, 0);
    let chosen = sample_indices(&mut rng, s.len(), copy_count).into_vec();
    let copied = s.select(&chosen);
    let copier = AnalyticDistribution::uniform_over(&copied)?.with_disk_noise(copy_noise);
    let underfit = base.clone().with_disk_noise(underfit_noise);
    let q: AnalyticDistribution = DistKind::Mixture {
        components: vec![(rho, copier), (1.0 - rho, underfit)],
    }
    .into();
    q.validate()?;
    Ok(q)
}
