use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::gamma::gamma;

use super::{AnalyticDistribution, DistKind};
use crate::error::{Error, Result};
use crate::geometry::PointSet;

/// Radially symmetric unit kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    Gaussian,
    UniformBall,
}

/// Convolution sampler for the KDE of `s`: a uniform training point plus
/// `sigma` times kernel noise.
pub fn kde_sampler(s: &PointSet, sigma: f64, kernel: Kernel) -> Result<AnalyticDistribution> {
    if s.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let d: AnalyticDistribution = DistKind::Kde {
        centers: s.clone(),
        sigma,
        kernel,
    }
    .into();
    d.validate()?;
    Ok(d)
}

/// Volume of the unit ball in `d` dimensions.
pub fn unit_ball_volume(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    std::f64::consts::PI.powf(h) / gamma(h + 1.0)
}

/// Radius `R` with half the kernel mass inside the unit-bandwidth ball.
pub fn kernel_median_radius(kernel: Kernel, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::invalid("dimension must be >= 1"));
    }
    match kernel {
        Kernel::UniformBall => Ok(0.5f64.powf(1.0 / d as f64)),
        Kernel::Gaussian => {
            let chi2 = ChiSquared::new(d as f64).map_err(|e| Error::invalid(e.to_string()))?;
            Ok(chi2.inverse_cdf(0.5).sqrt())
        }
    }
}

/// Side `D = R sigma (max(2 n lambda, 1/gamma) omega_d)^(1/d)` of the cube on
/// which a KDE of bandwidth `sigma` copies every training point.
pub fn cube_side(
    median_radius: f64,
    sigma: f64,
    n: usize,
    lambda: f64,
    gamma_cap: f64,
    d: usize,
) -> Result<f64> {
    if n == 0 || d == 0 {
        return Err(Error::invalid("n and d must be >= 1"));
    }
    if !(lambda > 1.0) {
        return Err(Error::invalid(format!(
            "lambda must exceed 1, got {lambda}"
        )));
    }
    if !(gamma_cap > 0.0 && gamma_cap < 1.0) {
        return Err(Error::invalid(format!(
            "gamma must lie in (0, 1), got {gamma_cap}"
        )));
    }
    if !(sigma > 0.0) || !(median_radius > 0.0) {
        return Err(Error::invalid("sigma and kernel radius must be > 0"));
    }
    let scale = (2.0 * n as f64 * lambda).max(1.0 / gamma_cap) * unit_ball_volume(d);
    Ok(median_radius * sigma * scale.powf(1.0 / d as f64))
}

/// The uniform cube `[0, D]^d` paired with its side `D`.
pub fn uniform_cube_kde_fixture(
    n: usize,
    lambda: f64,
    gamma_cap: f64,
    sigma: f64,
    d: usize,
    kernel: Kernel,
) -> Result<(AnalyticDistribution, f64)> {
    let r = kernel_median_radius(kernel, d)?;
    let side = cube_side(r, sigma, n, lambda, gamma_cap, d)?;
    Ok((AnalyticDistribution::uniform_cube(side, d)?, side))
}
