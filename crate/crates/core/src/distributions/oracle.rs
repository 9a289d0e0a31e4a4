//! Ground-truth copy rate from exact ball masses.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::circles::{arc_interval, arc_union_fraction};
use super::{AnalyticDistribution, DistKind};
use crate::error::{Error, Result};
use crate::geometry::{dist, PointSet};
use crate::rng::stream_rng;

/// Relative slack on the two mass comparisons so that masses equal up to
/// rounding of products of weights compare as equal.
const SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    /// Number of evenly spaced radii scanned per training point, on top of
    /// the structural radii of both distributions.
    pub grid_density: usize,
    /// Draws used when the union mass has no closed form.
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            grid_density: 2000,
            mc_samples: 1_000_000,
            seed: 0,
        }
    }
}

/// Smallest `r` with `r * r >= r2` in floating point.
fn covering_radius(r2: f64) -> f64 {
    let mut r = r2.sqrt();
    while r * r < r2 {
        r = r.next_up();
    }
    r
}

/// Radii at which the mass of `B(x, r)` can jump or change regime.
fn critical_radii(d: &AnalyticDistribution, x: &[f64], out: &mut Vec<f64>) {
    match &d.kind {
        DistKind::Circles { centers, weights } => {
            for (c, w) in centers.iter().zip(weights) {
                if *w > 0.0 {
                    let a = ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)).sqrt();
                    let h2: f64 = x[2..]
                        .iter()
                        .zip(&c[2..])
                        .map(|(p, q)| (p - q) * (p - q))
                        .sum();
                    out.push(covering_radius((a - 1.0) * (a - 1.0) + h2));
                    out.push(covering_radius((a + 1.0) * (a + 1.0) + h2));
                }
            }
        }
        DistKind::PointAtoms { points, .. } => out.extend(points.iter().map(|p| dist(x, p))),
        DistKind::Mixture { components } => {
            for (_, c) in components {
                critical_radii(c, x, out);
            }
        }
        _ => {}
    }
}

/// Mass of the union of closed balls `(center, radius)`, when `d` is built
/// from circles and atoms.
fn union_mass(d: &AnalyticDistribution, balls: &[(&[f64], f64)]) -> Option<f64> {
    match &d.kind {
        DistKind::Circles { centers, weights } => Some(
            centers
                .iter()
                .zip(weights)
                .filter(|(_, &w)| w > 0.0)
                .map(|(c, w)| {
                    let arcs: Vec<(f64, f64)> = balls
                        .iter()
                        .filter_map(|(x, r)| arc_interval(c, x, *r))
                        .collect();
                    w * arc_union_fraction(&arcs)
                })
                .sum(),
        ),
        DistKind::PointAtoms { points, weights } => {
            let n = points.len() as f64;
            Some(
                points
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| balls.iter().any(|(x, r)| dist(x, p) <= *r))
                    .map(|(i, _)| weights.as_ref().map_or(1.0 / n, |w| w[i]))
                    .sum(),
            )
        }
        DistKind::Mixture { components } => components
            .iter()
            .map(|(w, c)| union_mass(c, balls).map(|m| w * m))
            .sum(),
        _ => None,
    }
}

/// Largest scanned radius around `x` with `q(B) >= lambda p(B)` and
/// `p(B) <= gamma`.
fn best_radius(
    q: &AnalyticDistribution,
    p: &AnalyticDistribution,
    x: &[f64],
    lambda: f64,
    gamma: f64,
    grid_density: usize,
) -> Option<f64> {
    let mut radii = vec![0.0];
    critical_radii(p, x, &mut radii);
    critical_radii(q, x, &mut radii);
    let top = radii.iter().copied().fold(0.0, f64::max);
    if grid_density > 0 && top > 0.0 {
        radii.extend((1..=grid_density).map(|i| top * i as f64 / grid_density as f64));
    }
    radii
        .into_iter()
        .filter(|&r| {
            let pm = p.exact_ball_mass(x, r).unwrap_or(f64::INFINITY);
            let qm = q.exact_ball_mass(x, r).unwrap_or(0.0);
            pm <= gamma * (1.0 + SLACK) && qm >= lambda * pm * (1.0 - SLACK)
        })
        .max_by(f64::total_cmp)
}

/// Copy rate of `q` with respect to `p` and training set `s`, maximizing over
/// a radius grid plus the structural radii of both distributions. The grid
/// makes this a lower bound that tightens as `grid_density` grows.
pub fn exact_cr_oracle(
    q: &AnalyticDistribution,
    p: &AnalyticDistribution,
    s: &PointSet,
    lambda: f64,
    gamma: f64,
    config: &OracleConfig,
) -> Result<f64> {
    if !(lambda > 1.0) || !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::invalid(format!(
            "need lambda > 1 and gamma in (0, 1), got {lambda} and {gamma}"
        )));
    }
    for (name, d) in [("q", q), ("p", p)] {
        d.validate()?;
        if !d.has_exact_mass() {
            return Err(Error::MissingOracle(format!(
                "{name} has no exact ball mass"
            )));
        }
        s.check_dim(d.dim())?;
    }
    let radii: Vec<Option<f64>> = (0..s.len())
        .into_par_iter()
        .map(|i| best_radius(q, p, s.point(i), lambda, gamma, config.grid_density))
        .collect();
    let balls: Vec<(&[f64], f64)> = radii
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.map(|r| (s.point(i), r)))
        .collect();
    if let Some(m) = union_mass(q, &balls) {
        return Ok(m.clamp(0.0, 1.0));
    }
    let mut rng = stream_rng(config.seed, 0);
    let mut point = vec![0.0; q.dim()];
    let mut hits = 0usize;
    for _ in 0..config.mc_samples {
        q.sample_into(&mut point, &mut rng);
        if balls.iter().any(|(x, r)| dist(x, &point) <= *r) {
            hits += 1;
        }
    }
    Ok(hits as f64 / config.mc_samples.max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{
        circles_family, covers, generative_a, uniform_circle, CircleGeometry, IndexSubset,
    };

    #[test]
    fn identical_distributions_have_zero_rate() {
        let p = uniform_circle(&[0.0, 0.0]).unwrap();
        let s = p.sample(50, &mut stream_rng(1, 0));
        let cr = exact_cr_oracle(&p, &p, &s, 2.0, 0.1, &OracleConfig::default()).unwrap();
        assert_eq!(cr, 0.0);
    }

    #[test]
    fn atom_on_circle_is_copied() {
        // q = half an atom at a training point, half the circle itself.
        let p = uniform_circle(&[0.0, 0.0]).unwrap();
        let s = PointSet::from_rows(2, &[[1.0, 0.0], [-1.0, 0.0]]).unwrap();
        let atom = AnalyticDistribution::uniform_over(&s.select(&[0])).unwrap();
        let q: AnalyticDistribution = DistKind::Mixture {
            components: vec![(0.5, atom), (0.5, p.clone())],
        }
        .into();
        let cr = exact_cr_oracle(&q, &p, &s, 2.0, 0.05, &OracleConfig::default()).unwrap();
        // The atom plus the circle arc inside the copy ball around (1, 0).
        assert!(cr >= 0.5 && cr <= 0.5 + 0.5 * 0.05 + 1e-9, "{cr}");
    }

    #[test]
    fn monotone_in_lambda_and_gamma() {
        let p = uniform_circle(&[0.0, 0.0]).unwrap();
        let s = p.sample(20, &mut stream_rng(2, 0));
        let atoms = AnalyticDistribution::uniform_over(&s.select(&[0, 1, 2])).unwrap();
        let q: AnalyticDistribution = DistKind::Mixture {
            components: vec![(0.3, atoms), (0.7, p.clone())],
        }
        .into();
        let cfg = OracleConfig {
            grid_density: 400,
            ..Default::default()
        };
        let mut prev = f64::INFINITY;
        for lambda in [1.5, 3.0, 6.0, 12.0] {
            let cr = exact_cr_oracle(&q, &p, &s, lambda, 0.05, &cfg).unwrap();
            assert!(cr <= prev + 1e-15);
            prev = cr;
        }
        let mut prev = 0.0;
        for gamma in [0.001, 0.01, 0.05, 0.2] {
            let cr = exact_cr_oracle(&q, &p, &s, 2.0, gamma, &cfg).unwrap();
            assert!(cr >= prev - 1e-15);
            prev = cr;
        }
    }

    #[test]
    fn lower_bound_construction_small() {
        let geom = CircleGeometry::coplanar(8).unwrap();
        let t = IndexSubset::random(8, 11).unwrap();
        let p = circles_family(&t, &geom).unwrap();
        let rows: Vec<Vec<f64>> = geom.centers()[1..]
            .iter()
            .map(|c| vec![c[0], c[1] + 1.0])
            .collect();
        let s = PointSet::from_rows(2, &rows).unwrap();
        assert!(covers(&s, &t, &geom));
        // A whole member circle must fit under the cap: gamma / (1 + eps) >= 1 / (3 kappa).
        let (lambda, eps, gamma) = (13.0, 1.0 / 3.0, 0.2);
        let cfg = OracleConfig {
            grid_density: 200,
            ..Default::default()
        };
        let a = generative_a(&s, &t, lambda, eps, &geom, false, 3).unwrap();
        let cr =
            exact_cr_oracle(&a, &p, &s, lambda * (1.0 + eps), gamma / (1.0 + eps), &cfg).unwrap();
        assert!((cr - 13.0 / 18.0).abs() < 1e-12, "{cr}");
        let a_prime = generative_a(&s, &t, lambda, eps, &geom, true, 3).unwrap();
        let cr = exact_cr_oracle(
            &a_prime,
            &p,
            &s,
            lambda / (1.0 + eps),
            gamma * (1.0 + eps),
            &cfg,
        )
        .unwrap();
        assert_eq!(cr, 0.0);
    }

    #[test]
    fn rejects_distributions_without_exact_mass() {
        let p = AnalyticDistribution::halfmoons(0.1);
        let s = p.sample(5, &mut stream_rng(0, 0));
        assert!(matches!(
            exact_cr_oracle(&p, &p, &s, 2.0, 0.1, &OracleConfig::default()),
            Err(Error::MissingOracle(_))
        ));
    }
}
