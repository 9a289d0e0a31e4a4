//! Synthetic data distributions with sampling and, where the geometry allows
//! it, exact ball masses.

mod circles;
mod halfmoons;
mod kde;
mod oracle;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{dist, PointSet};

pub use circles::{
    arc_fraction, circles_family, covers, exact_circle_ball_mass, generative_a, uniform_circle,
    CircleGeometry, IndexSubset,
};
pub use halfmoons::{make_copier_mixture, sample_halfmoons, CopierConfig};
pub use kde::{
    cube_side, kde_sampler, kernel_median_radius, uniform_cube_kde_fixture, unit_ball_volume,
    Kernel,
};
pub use oracle::{exact_cr_oracle, OracleConfig};

/// The shape of a distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistKind {
    /// Two interleaving half circles with isotropic Gaussian noise.
    Halfmoons { sigma: f64 },
    /// Uniform on `[0, side]^dim`.
    UniformCube { side: f64, dim: usize },
    /// Unit circles in planes parallel to the first two axes, uniform on each
    /// circle, circle `i` carrying mass `weights[i]`.
    Circles {
        centers: Vec<Vec<f64>>,
        weights: Vec<f64>,
    },
    /// Discrete distribution on `points`; uniform when `weights` is absent.
    PointAtoms {
        points: PointSet,
        weights: Option<Vec<f64>>,
    },
    /// Kernel density estimate: a uniform center plus `sigma` times kernel noise.
    Kde {
        centers: PointSet,
        sigma: f64,
        kernel: Kernel,
    },
    /// `base` plus noise drawn uniformly from the ball of the given radius.
    DiskNoise {
        base: Box<AnalyticDistribution>,
        radius: f64,
    },
    /// Weighted mixture of components.
    Mixture {
        components: Vec<(f64, AnalyticDistribution)>,
    },
}

/// A synthetic distribution usable both as data source `p` and as generated
/// distribution `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticDistribution {
    pub kind: DistKind,
    /// Known bounds on the regularity threshold mass of the distribution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_epsilon_bounds: Option<(f64, f64)>,
}

impl From<DistKind> for AnalyticDistribution {
    fn from(kind: DistKind) -> Self {
        Self {
            kind,
            p_epsilon_bounds: None,
        }
    }
}

fn check_weights(weights: &[f64], what: &str) -> Result<()> {
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::invalid(format!(
            "{what} weights must be finite and nonnegative"
        )));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "{what} weights sum to {total}, expected 1"
        )));
    }
    Ok(())
}

/// Index drawn in proportion to `weights` (which sum to one).
fn pick<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// Uniform draw from the ball of radius `radius`, added into `out`.
pub(crate) fn add_ball_noise<R: Rng + ?Sized>(out: &mut [f64], radius: f64, rng: &mut R) {
    let d = out.len();
    let mut dir = vec![0.0; d];
    let norm = loop {
        let mut acc: f64 = 0.0;
        for v in dir.iter_mut() {
            *v = rng.sample(StandardNormal);
            acc += *v * *v;
        }
        if acc > 0.0 {
            break acc.sqrt();
        }
    };
    let u: f64 = rng.random();
    let rad = radius * u.powf(1.0 / d as f64);
    for (o, v) in out.iter_mut().zip(&dir) {
        *o += rad * v / norm;
    }
}

impl AnalyticDistribution {
    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            DistKind::Halfmoons { sigma } => {
                if !(*sigma >= 0.0) || !sigma.is_finite() {
                    return Err(Error::invalid("halfmoons sigma must be >= 0"));
                }
            }
            DistKind::UniformCube { side, dim } => {
                if !(*side > 0.0) || !side.is_finite() || *dim == 0 {
                    return Err(Error::invalid("cube needs side > 0 and dim >= 1"));
                }
            }
            DistKind::Circles { centers, weights } => {
                if centers.is_empty() || centers.len() != weights.len() {
                    return Err(Error::invalid("circles need one weight per center"));
                }
                let d = centers[0].len();
                if d < 2 || centers.iter().any(|c| c.len() != d) {
                    return Err(Error::invalid(
                        "circle centers need a common dimension >= 2",
                    ));
                }
                check_weights(weights, "circle")?;
            }
            DistKind::PointAtoms { points, weights } => {
                if points.is_empty() {
                    return Err(Error::EmptyPointSet);
                }
                if let Some(w) = weights {
                    if w.len() != points.len() {
                        return Err(Error::invalid("atom weights must match atom count"));
                    }
                    check_weights(w, "atom")?;
                }
            }
            DistKind::Kde { centers, sigma, .. } => {
                if centers.is_empty() {
                    return Err(Error::EmptyPointSet);
                }
                if !(*sigma > 0.0) || !sigma.is_finite() {
                    return Err(Error::invalid("kde bandwidth must be > 0"));
                }
            }
            DistKind::DiskNoise { base, radius } => {
                if !(*radius >= 0.0) || !radius.is_finite() {
                    return Err(Error::invalid("noise radius must be >= 0"));
                }
                base.validate()?;
            }
            DistKind::Mixture { components } => {
                if components.is_empty() {
                    return Err(Error::invalid("mixture needs at least one component"));
                }
                let w: Vec<f64> = components.iter().map(|c| c.0).collect();
                check_weights(&w, "mixture")?;
                let d = components[0].1.dim();
                for (_, c) in components {
                    c.validate()?;
                    if c.dim() != d {
                        return Err(Error::invalid("mixture components differ in dimension"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            DistKind::Halfmoons { .. } => 2,
            DistKind::UniformCube { dim, .. } => *dim,
            DistKind::Circles { centers, .. } => centers[0].len(),
            DistKind::PointAtoms { points, .. } => points.dim(),
            DistKind::Kde { centers, .. } => centers.dim(),
            DistKind::DiskNoise { base, .. } => base.dim(),
            DistKind::Mixture { components } => components[0].1.dim(),
        }
    }

    /// Short stable identifier derived from the serialized descriptor.
    pub fn id(&self) -> String {
        let json = serde_json::to_vec(self).expect("distribution serializes");
        hex::encode(Sha256::digest(&json))[..16].to_string()
    }

    /// Writes one draw into `out` (length `dim()`).
    pub fn sample_into<R: Rng + ?Sized>(&self, out: &mut [f64], rng: &mut R) {
        match &self.kind {
            DistKind::Halfmoons { sigma } => halfmoons::draw(*sigma, out, rng),
            DistKind::UniformCube { side, .. } => {
                for o in out.iter_mut() {
                    *o = rng.random::<f64>() * side;
                }
            }
            DistKind::Circles { centers, weights } => {
                let i = pick(weights, rng);
                let t = rng.random::<f64>() * std::f64::consts::TAU;
                out.copy_from_slice(&centers[i]);
                out[0] += t.cos();
                out[1] += t.sin();
            }
            DistKind::PointAtoms { points, weights } => {
                let i = match weights {
                    Some(w) => pick(w, rng),
                    None => rng.random_range(0..points.len()),
                };
                out.copy_from_slice(points.point(i));
            }
            DistKind::Kde {
                centers,
                sigma,
                kernel,
            } => {
                let i = rng.random_range(0..centers.len());
                out.copy_from_slice(centers.point(i));
                match kernel {
                    Kernel::Gaussian => {
                        for o in out.iter_mut() {
                            let z: f64 = rng.sample(StandardNormal);
                            *o += sigma * z;
                        }
                    }
                    Kernel::UniformBall => add_ball_noise(out, *sigma, rng),
                }
            }
            DistKind::DiskNoise { base, radius } => {
                base.sample_into(out, rng);
                add_ball_noise(out, *radius, rng);
            }
            DistKind::Mixture { components } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut chosen = &components[components.len() - 1].1;
                for (w, c) in components {
                    acc += w;
                    if u < acc {
                        chosen = c;
                        break;
                    }
                }
                chosen.sample_into(out, rng);
            }
        }
    }

    /// `count` independent draws.
    pub fn sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> PointSet {
        let d = self.dim();
        let mut coords = vec![0.0; count * d];
        for row in coords.chunks_exact_mut(d) {
            self.sample_into(row, rng);
        }
        PointSet::from_raw(d, coords)
    }

    /// Exact mass of the closed ball `B(center, r)`, when the distribution
    /// admits a closed form.
    pub fn exact_ball_mass(&self, center: &[f64], r: f64) -> Option<f64> {
        match &self.kind {
            DistKind::Circles { centers, weights } => Some(
                centers
                    .iter()
                    .zip(weights)
                    .filter(|(_, &w)| w > 0.0)
                    .map(|(c, w)| w * arc_fraction(c, center, r))
                    .sum(),
            ),
            DistKind::PointAtoms { points, weights } => {
                let n = points.len() as f64;
                Some(
                    points
                        .iter()
                        .enumerate()
                        .filter(|(_, p)| dist(center, p) <= r)
                        .map(|(i, _)| weights.as_ref().map_or(1.0 / n, |w| w[i]))
                        .sum(),
                )
            }
            DistKind::Mixture { components } => components
                .iter()
                .map(|(w, c)| c.exact_ball_mass(center, r).map(|m| w * m))
                .sum(),
            _ => None,
        }
    }

    pub fn has_exact_mass(&self) -> bool {
        match &self.kind {
            DistKind::Circles { .. } | DistKind::PointAtoms { .. } => true,
            DistKind::Mixture { components } => components.iter().all(|(_, c)| c.has_exact_mass()),
            _ => false,
        }
    }

    pub fn halfmoons(sigma: f64) -> Self {
        DistKind::Halfmoons { sigma }.into()
    }

    /// Uniform distribution over the points of `s` (the verbatim copier).
    pub fn uniform_over(s: &PointSet) -> Result<Self> {
        let d: Self = DistKind::PointAtoms {
            points: s.clone(),
            weights: None,
        }
        .into();
        d.validate()?;
        Ok(d)
    }

    pub fn uniform_cube(side: f64, dim: usize) -> Result<Self> {
        let d: Self = DistKind::UniformCube { side, dim }.into();
        d.validate()?;
        Ok(d)
    }

    pub fn with_disk_noise(self, radius: f64) -> Self {
        DistKind::DiskNoise {
            base: Box::new(self),
            radius,
        }
        .into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn ball_noise_is_uniform_in_disk() {
        let mut rng = stream_rng(3, 0);
        let n = 100_000;
        let mut inside_half = 0;
        for _ in 0..n {
            let mut p = [0.0, 0.0];
            add_ball_noise(&mut p, 2.0, &mut rng);
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            assert!(r <= 2.0);
            if r <= 1.0 {
                inside_half += 1;
            }
        }
        // Area fraction of the inner disk is 1/4; 5 sigma band.
        let frac = inside_half as f64 / n as f64;
        assert!((frac - 0.25).abs() < 5.0 * (0.25f64 * 0.75 / n as f64).sqrt());
    }

    #[test]
    fn atoms_mass_and_sampling() {
        let pts = PointSet::from_rows(2, &[[0.0, 0.0], [1.0, 0.0], [5.0, 5.0]]).unwrap();
        let d = AnalyticDistribution::uniform_over(&pts).unwrap();
        assert!((d.exact_ball_mass(&[0.5, 0.0], 0.5).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(d.exact_ball_mass(&[0.5, 0.0], 0.49).unwrap(), 0.0);
        let mut rng = stream_rng(1, 0);
        let s = d.sample(300, &mut rng);
        assert!(s.iter().all(|p| pts.iter().any(|q| q == p)));
    }

    #[test]
    fn validation_catches_bad_weights() {
        let bad: AnalyticDistribution = DistKind::Circles {
            centers: vec![vec![0.0, 0.0]],
            weights: vec![0.5],
        }
        .into();
        assert!(bad.validate().is_err());
        assert!(AnalyticDistribution::uniform_cube(0.0, 2).is_err());
    }

    #[test]
    fn ids_are_stable_and_distinct() {
        let a = AnalyticDistribution::halfmoons(0.1);
        let b = AnalyticDistribution::halfmoons(0.2);
        assert_eq!(a.id(), AnalyticDistribution::halfmoons(0.1).id());
        assert_ne!(a.id(), b.id());
    }
}
