//! Families of unit circles used as hard instances for copy detection.
//!
//! Circle `C_0` is stored at index 0 of every geometry; `C_1..C_2k` follow.

use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};

use rand::seq::index::sample as sample_indices;
use serde::{Deserialize, Serialize};

use super::{AnalyticDistribution, DistKind};
use crate::error::{Error, Result};
use crate::geometry::PointSet;
use crate::rng::stream_rng;

/// Centers of `2 kappa + 1` unit circles, each lying in the plane spanned by
/// the first two axes through its center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleGeometry {
    centers: Vec<Vec<f64>>,
}

fn center_dist(a: &[f64], b: &[f64]) -> f64 {
    crate::geometry::dist(a, b)
}

impl CircleGeometry {
    /// `centers[0]` is `C_0`. Requires centers of `C_1..C_2k` at least 5
    /// apart, and `C_0` at least 6 beyond the largest such center distance,
    /// so its set distance to every other circle exceeds the diameter of
    /// their union by 2.
    pub fn new(centers: Vec<Vec<f64>>) -> Result<Self> {
        if centers.len() < 3 || centers.len() % 2 == 0 {
            return Err(Error::invalid(
                "need 2*kappa + 1 circle centers with kappa >= 1",
            ));
        }
        let d = centers[0].len();
        if d < 2 || centers.iter().any(|c| c.len() != d) {
            return Err(Error::invalid(
                "circle centers need a common dimension >= 2",
            ));
        }
        if centers.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("circle centers must be finite"));
        }
        let rest = &centers[1..];
        let mut widest: f64 = 0.0;
        for i in 0..rest.len() {
            for j in i + 1..rest.len() {
                let dij = center_dist(&rest[i], &rest[j]);
                if dij < 5.0 {
                    return Err(Error::invalid(format!(
                        "circles {} and {} have centers {dij} apart, need >= 5",
                        i + 1,
                        j + 1
                    )));
                }
                widest = widest.max(dij);
            }
        }
        for (i, c) in rest.iter().enumerate() {
            let d0 = center_dist(&centers[0], c);
            if d0 < widest + 6.0 {
                return Err(Error::invalid(format!(
                    "circle 0 is {d0} from circle {}, need >= {}",
                    i + 1,
                    widest + 6.0
                )));
            }
        }
        Ok(Self { centers })
    }

    /// Planar layout: `C_i` centered at `(5 (i - 1), 0)`, `C_0` at `2 L + 10`
    /// on the same axis where `L = 5 (2 kappa - 1)`.
    pub fn coplanar(kappa: usize) -> Result<Self> {
        if kappa == 0 {
            return Err(Error::invalid("kappa must be >= 1"));
        }
        let span = 5.0 * (2 * kappa - 1) as f64;
        let mut centers = vec![vec![2.0 * span + 10.0, 0.0]];
        centers.extend((0..2 * kappa).map(|i| vec![5.0 * i as f64, 0.0]));
        Self::new(centers)
    }

    pub fn kappa(&self) -> usize {
        (self.centers.len() - 1) / 2
    }

    pub fn dim(&self) -> usize {
        self.centers[0].len()
    }

    /// All centers, `C_0` first.
    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    /// Distance from `x` to the nearest point of circle `i`.
    pub fn distance_to_circle(&self, i: usize, x: &[f64]) -> f64 {
        let (a, h2) = offsets(&self.centers[i], x);
        ((a - 1.0) * (a - 1.0) + h2).sqrt()
    }

    /// Index of the circle nearest to `x` (ties to the smaller index).
    pub fn nearest_circle(&self, x: &[f64]) -> usize {
        let mut best = (0, f64::INFINITY);
        for i in 0..self.centers.len() {
            let d = self.distance_to_circle(i, x);
            if d < best.1 {
                best = (i, d);
            }
        }
        best.0
    }
}

/// A size-`kappa` subset of `{1, ..., 2 kappa}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSubset {
    kappa: usize,
    members: BTreeSet<usize>,
}

impl IndexSubset {
    pub fn new(kappa: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let members: BTreeSet<usize> = members.into_iter().collect();
        if kappa == 0 || members.len() != kappa {
            return Err(Error::invalid(format!(
                "subset must hold exactly kappa = {kappa} distinct indices, got {}",
                members.len()
            )));
        }
        if members.iter().any(|&i| i == 0 || i > 2 * kappa) {
            return Err(Error::invalid(format!(
                "subset indices must lie in 1..={}",
                2 * kappa
            )));
        }
        Ok(Self { kappa, members })
    }

    /// Uniformly random subset, reproducible per seed.
    pub fn random(kappa: usize, seed: u64) -> Result<Self> {
        if kappa == 0 {
            return Err(Error::invalid("kappa must be >= 1"));
        }
        let mut rng = stream_rng(seed, 0);
        let picked = sample_indices(&mut rng, 2 * kappa, kappa);
        Self::new(kappa, picked.into_iter().map(|i| i + 1))
    }

    pub fn complement(&self) -> Self {
        Self {
            kappa: self.kappa,
            members: (1..=2 * self.kappa)
                .filter(|i| !self.members.contains(i))
                .collect(),
        }
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.contains(&i)
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }
}

/// In-plane offset `a` and squared out-of-plane offset `h^2` of `x` relative
/// to a circle center.
fn offsets(center: &[f64], x: &[f64]) -> (f64, f64) {
    let dx = x[0] - center[0];
    let dy = x[1] - center[1];
    let h2: f64 = x[2..]
        .iter()
        .zip(&center[2..])
        .map(|(p, c)| (p - c) * (p - c))
        .sum();
    ((dx * dx + dy * dy).sqrt(), h2)
}

/// Half-width in angle of the arc of the unit circle at `center` inside the
/// closed ball `B(x, r)`, with the arc's mid angle. `None` for an empty arc.
pub(crate) fn arc_interval(center: &[f64], x: &[f64], r: f64) -> Option<(f64, f64)> {
    if r < 0.0 {
        return None;
    }
    let (a, h2) = offsets(center, x);
    let r2 = r * r;
    if (a - 1.0) * (a - 1.0) + h2 > r2 {
        return None;
    }
    let mid = (x[1] - center[1]).atan2(x[0] - center[0]);
    if (a + 1.0) * (a + 1.0) + h2 <= r2 {
        return Some((mid, PI));
    }
    let c = ((1.0 + a * a + h2 - r2) / (2.0 * a)).clamp(-1.0, 1.0);
    let half = c.acos();
    (half > 0.0).then_some((mid, half))
}

/// Fraction of the unit circle at `center` inside the closed ball `B(x, r)`.
pub fn arc_fraction(center: &[f64], x: &[f64], r: f64) -> f64 {
    arc_interval(center, x, r).map_or(0.0, |(_, half)| half / PI)
}

/// Measure (as a fraction of the circle) of a union of arcs given as
/// `(mid, half_width)` pairs.
pub(crate) fn arc_union_fraction(arcs: &[(f64, f64)]) -> f64 {
    let mut spans: Vec<(f64, f64)> = Vec::with_capacity(arcs.len() + 2);
    for &(mid, half) in arcs {
        if half >= PI {
            return 1.0;
        }
        let lo = (mid - half).rem_euclid(TAU);
        let hi = lo + 2.0 * half;
        if hi > TAU {
            spans.push((lo, TAU));
            spans.push((0.0, hi - TAU));
        } else {
            spans.push((lo, hi));
        }
    }
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for (lo, hi) in spans {
        match cur {
            Some((clo, chi)) if lo <= chi => cur = Some((clo, chi.max(hi))),
            Some((clo, chi)) => {
                total += chi - clo;
                cur = Some((lo, hi));
            }
            None => cur = Some((lo, hi)),
        }
    }
    if let Some((clo, chi)) = cur {
        total += chi - clo;
    }
    (total / TAU).min(1.0)
}

/// Exact mass of the closed ball `B(center, r)` under a circles or atoms
/// based distribution.
pub fn exact_circle_ball_mass(dist: &AnalyticDistribution, center: &[f64], r: f64) -> Result<f64> {
    if center.len() != dist.dim() {
        return Err(Error::DimensionMismatch {
            expected: dist.dim(),
            found: center.len(),
        });
    }
    dist.exact_ball_mass(center, r).ok_or_else(|| {
        Error::MissingOracle(format!("distribution {} has no exact ball mass", dist.id()))
    })
}

fn circles_with_weights(
    geometry: &CircleGeometry,
    weights: Vec<f64>,
) -> Result<AnalyticDistribution> {
    let d: AnalyticDistribution = DistKind::Circles {
        centers: geometry.centers.clone(),
        weights,
    }
    .into();
    d.validate()?;
    Ok(d)
}

/// `p_T`: mass `1/(3 kappa)` on each circle indexed by `subset`, `2/(3 kappa)`
/// on the rest, none on `C_0`.
pub fn circles_family(
    subset: &IndexSubset,
    geometry: &CircleGeometry,
) -> Result<AnalyticDistribution> {
    let kappa = geometry.kappa();
    if subset.kappa != kappa {
        return Err(Error::invalid(format!(
            "subset is for kappa = {}, geometry has kappa = {kappa}",
            subset.kappa
        )));
    }
    let k = kappa as f64;
    let weights = (0..=2 * kappa)
        .map(|i| match i {
            0 => 0.0,
            i if subset.contains(i) => 1.0 / (3.0 * k),
            _ => 2.0 / (3.0 * k),
        })
        .collect();
    let mut d = circles_with_weights(geometry, weights)?;
    d.p_epsilon_bounds = Some((1.0 / (9.0 * k), 2.0 / (3.0 * k)));
    Ok(d)
}

/// Uniform distribution on the unit circle at `center`.
pub fn uniform_circle(center: &[f64]) -> Result<AnalyticDistribution> {
    let d: AnalyticDistribution = DistKind::Circles {
        centers: vec![center.to_vec()],
        weights: vec![1.0],
    }
    .into();
    d.validate()?;
    Ok(d)
}

/// Circles of `subset` (or of its complement when `outside`) holding exactly
/// one point of `s`, points assigned to their nearest circle.
fn singly_occupied(
    s: &PointSet,
    subset: &IndexSubset,
    geometry: &CircleGeometry,
    outside: bool,
) -> Vec<usize> {
    let mut counts = vec![0usize; geometry.centers.len()];
    for p in s.iter() {
        counts[geometry.nearest_circle(p)] += 1;
    }
    (1..=2 * geometry.kappa())
        .filter(|&i| subset.contains(i) != outside && counts[i] == 1)
        .collect()
}

/// True when at least `kappa/8` circles inside `subset` and at least
/// `kappa/8` outside it each hold exactly one point of `s`.
pub fn covers(s: &PointSet, subset: &IndexSubset, geometry: &CircleGeometry) -> bool {
    if s.dim() != geometry.dim() {
        return false;
    }
    let need = geometry.kappa() as f64 / 8.0;
    let inside = singly_occupied(s, subset, geometry, false).len() as f64;
    let outside = singly_occupied(s, subset, geometry, true).len() as f64;
    inside >= need && outside >= need
}

/// The generative algorithm `A_T` (or `A_T'` when `prime`, which runs `A` on
/// the complement of `subset`).
///
/// When `s` covers the subset, picks `kappa/8` singly occupied circles of the
/// subset and puts `lambda (1 + epsilon) / (3 kappa)` on each and the rest on
/// `C_0`. Otherwise all mass goes to `C_0`.
pub fn generative_a(
    s: &PointSet,
    subset: &IndexSubset,
    lambda: f64,
    epsilon: f64,
    geometry: &CircleGeometry,
    prime: bool,
    seed: u64,
) -> Result<AnalyticDistribution> {
    let kappa = geometry.kappa();
    if kappa % 8 != 0 {
        return Err(Error::invalid(format!(
            "kappa must be divisible by 8, got {kappa}"
        )));
    }
    if subset.kappa != kappa {
        return Err(Error::invalid("subset and geometry disagree on kappa"));
    }
    if !(lambda > 1.0) || !(epsilon > 0.0) {
        return Err(Error::invalid("need lambda > 1 and epsilon > 0"));
    }
    let per_circle = lambda * (1.0 + epsilon) / (3.0 * kappa as f64);
    let rest = 1.0 - lambda * (1.0 + epsilon) / 24.0;
    if rest < 0.0 {
        return Err(Error::invalid(format!(
            "lambda (1 + epsilon) = {} exceeds 24",
            lambda * (1.0 + epsilon)
        )));
    }
    let subset = if prime {
        subset.complement()
    } else {
        subset.clone()
    };
    let mut weights = vec![0.0; 2 * kappa + 1];
    if !covers(s, &subset, geometry) {
        weights[0] = 1.0;
        return circles_with_weights(geometry, weights);
    }
    let l = singly_occupied(s, &subset, geometry, false);
    let mut rng = stream_rng(seed, 0);
    for j in sample_indices(&mut rng, l.len(), kappa / 8) {
        weights[l[j]] = per_circle;
    }
    weights[0] = rest;
    circles_with_weights(geometry, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use rand::Rng;

    #[test]
    fn arc_fraction_cases() {
        let c = [0.0, 0.0, 0.0];
        assert!((arc_fraction(&c, &[1.0, 0.0, 0.0], 1.0) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(arc_fraction(&c, &[1.0, 0.0, 0.0], 2.0), 1.0);
        assert_eq!(arc_fraction(&c, &[0.0, 0.0, 2.0], 5f64.sqrt()), 1.0);
        assert_eq!(arc_fraction(&c, &[0.0, 0.0, 2.0], 2.2), 0.0);
        assert_eq!(arc_fraction(&c, &[5.0, 0.0, 0.0], 3.9), 0.0);
        // On-circle masses follow 2 arcsin(r/2) / pi.
        for r in [0.01, 0.3, 0.9, 1.7] {
            let want = 2.0 * (r / 2.0f64).asin() / PI;
            assert!((arc_fraction(&c, &[0.0, -1.0, 0.0], r) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn arc_union() {
        assert_eq!(arc_union_fraction(&[]), 0.0);
        assert!((arc_union_fraction(&[(0.0, PI / 2.0)]) - 0.5).abs() < 1e-15);
        // Overlapping and wrapping arcs.
        let u = arc_union_fraction(&[(PI, PI / 4.0), (-PI + 0.1, PI / 4.0), (0.0, 0.1)]);
        assert!((u - (PI / 2.0 + 0.1 + 0.2) / TAU).abs() < 1e-12, "{u}");
        assert_eq!(arc_union_fraction(&[(0.3, PI)]), 1.0);
    }

    #[test]
    fn exact_mass_agrees_with_monte_carlo() {
        let geom = CircleGeometry::new(vec![
            vec![40.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
            vec![0.0, 5.0, 1.0],
        ])
        .unwrap();
        let subset = IndexSubset::new(1, [2]).unwrap();
        let p = circles_family(&subset, &geom).unwrap();
        let n = 1_000_000;
        let draws = p.sample(n, &mut stream_rng(77, 0));
        let mut rng = stream_rng(78, 0);
        for _ in 0..50 {
            let x = [
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..7.0),
                rng.random_range(-1.0..2.0),
            ];
            let r = rng.random_range(0.0..5.0);
            let exact = exact_circle_ball_mass(&p, &x, r).unwrap();
            let hits = draws
                .iter()
                .filter(|q| crate::geometry::dist(q, &x) <= r)
                .count();
            let mc = hits as f64 / n as f64;
            let se = (exact * (1.0 - exact) / n as f64)
                .sqrt()
                .max(1.0 / n as f64);
            assert!(
                (mc - exact).abs() <= 3.0 * se,
                "x={x:?} r={r} exact={exact} mc={mc}"
            );
        }
    }

    #[test]
    fn family_weights_and_occupancy() {
        let geom = CircleGeometry::coplanar(1).unwrap();
        let p = circles_family(&IndexSubset::new(1, [1]).unwrap(), &geom).unwrap();
        let DistKind::Circles { weights, .. } = &p.kind else {
            unreachable!()
        };
        assert_eq!(weights, &vec![0.0, 1.0 / 3.0, 2.0 / 3.0]);

        let geom = CircleGeometry::coplanar(4).unwrap();
        let subset = IndexSubset::random(4, 3).unwrap();
        let p = circles_family(&subset, &geom).unwrap();
        assert_eq!(p.p_epsilon_bounds, Some((1.0 / 36.0, 2.0 / 12.0)));
        let DistKind::Circles { weights, .. } = &p.kind else {
            unreachable!()
        };
        assert!((weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let n = 100_000;
        let mut counts = vec![0usize; 9];
        for x in p.sample(n, &mut stream_rng(5, 0)).iter() {
            counts[geom.nearest_circle(x)] += 1;
        }
        for (c, w) in counts.iter().zip(weights) {
            assert!((*c as f64 / n as f64 - w).abs() < 0.01);
        }
    }

    #[test]
    fn geometry_validation() {
        assert!(
            CircleGeometry::new(vec![vec![100.0, 0.0], vec![0.0, 0.0], vec![4.0, 0.0]]).is_err()
        );
        assert!(CircleGeometry::new(vec![vec![9.0, 0.0], vec![0.0, 0.0], vec![5.0, 0.0]]).is_err());
        assert!(CircleGeometry::new(vec![vec![16.0, 0.0], vec![0.0, 0.0], vec![5.0, 0.0]]).is_ok());
        let g = CircleGeometry::coplanar(64).unwrap();
        assert_eq!(g.kappa(), 64);
        assert_eq!(g.centers().len(), 129);
    }

    #[test]
    fn subsets() {
        assert!(IndexSubset::new(2, [1, 1]).is_err());
        assert!(IndexSubset::new(2, [1, 5]).is_err());
        let t = IndexSubset::random(8, 1).unwrap();
        let c = t.complement();
        assert_eq!(c.members().count(), 8);
        assert!(t.members().all(|i| !c.contains(i)));
        assert_eq!(c.complement(), t);
    }

    fn one_point_per_circle(geom: &CircleGeometry) -> PointSet {
        let rows: Vec<Vec<f64>> = geom.centers()[1..]
            .iter()
            .map(|c| vec![c[0] + 1.0, c[1]])
            .collect();
        PointSet::from_rows(2, &rows).unwrap()
    }

    #[test]
    fn covering_rules() {
        let geom = CircleGeometry::coplanar(8).unwrap();
        let t = IndexSubset::random(8, 2).unwrap();
        assert!(!covers(&PointSet::empty(2).unwrap(), &t, &geom));
        let s = one_point_per_circle(&geom);
        assert!(covers(&s, &t, &geom));
        assert!(covers(&s, &t.complement(), &geom));
        // Points only on circles of T: the complement side is empty.
        let inside: Vec<Vec<f64>> = t
            .members()
            .map(|i| vec![geom.centers()[i][0] - 1.0, 0.0])
            .collect();
        let s = PointSet::from_rows(2, &inside).unwrap();
        assert!(!covers(&s, &t, &geom));
        assert_eq!(covers(&s, &t, &geom), covers(&s, &t.complement(), &geom));
    }

    #[test]
    fn generative_a_masses() {
        let geom = CircleGeometry::coplanar(8).unwrap();
        let t = IndexSubset::random(8, 4).unwrap();
        let s = one_point_per_circle(&geom);
        let a = generative_a(&s, &t, 13.0, 1.0 / 3.0, &geom, false, 1).unwrap();
        let DistKind::Circles { weights, .. } = &a.kind else {
            unreachable!()
        };
        assert!((weights[0] - 5.0 / 18.0).abs() < 1e-15);
        assert!((weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let on: Vec<usize> = (1..=16).filter(|&i| weights[i] > 0.0).collect();
        assert_eq!(on.len(), 1);
        assert!(t.contains(on[0]));

        let a_prime = generative_a(&s, &t, 13.0, 1.0 / 3.0, &geom, true, 1).unwrap();
        let DistKind::Circles { weights, .. } = &a_prime.kind else {
            unreachable!()
        };
        assert!((1..=16)
            .filter(|&i| weights[i] > 0.0)
            .all(|i| !t.contains(i)));

        let fallback = generative_a(
            &PointSet::empty(2).unwrap(),
            &t,
            13.0,
            1.0 / 3.0,
            &geom,
            false,
            1,
        )
        .unwrap();
        let DistKind::Circles { weights, .. } = &fallback.kind else {
            unreachable!()
        };
        assert_eq!(weights[0], 1.0);

        let g4 = CircleGeometry::coplanar(4).unwrap();
        let t4 = IndexSubset::random(4, 0).unwrap();
        assert!(generative_a(&s, &t4, 13.0, 1.0 / 3.0, &g4, false, 1).is_err());
    }
}
