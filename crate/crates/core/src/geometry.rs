//! Euclidean primitives shared by every other module.
//!
//! Balls are closed everywhere: a point at distance exactly `r` from the
//! center is inside `B(center, r)`. Comparisons use the raw double-precision
//! distance with no tolerance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Euclidean distance between two coordinate slices of equal length.
///
/// Summation runs over axes in index order; every distance in the crate goes
/// through this function so that index structures and linear scans agree
/// bit-for-bit.
#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc.sqrt()
}

/// Checked distance: errors on a dimension mismatch.
pub fn distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(dist(a, b))
}

/// An ordered collection of points in `dim`-dimensional space, stored
/// row-major in a flat buffer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    /// Builds a point set from a flat row-major buffer.
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("point dimension must be at least 1"));
        }
        if coords.len() % dim != 0 {
            return Err(Error::invalid(format!(
                "coordinate buffer of length {} is not a multiple of dimension {dim}",
                coords.len()
            )));
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index: pos / dim });
        }
        Ok(Self { dim, coords })
    }

    pub fn empty(dim: usize) -> Result<Self> {
        Self::new(dim, Vec::new())
    }

    pub fn from_rows<R: AsRef<[f64]>>(dim: usize, rows: &[R]) -> Result<Self> {
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            coords.extend_from_slice(row);
        }
        Self::new(dim, coords)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Appends a point, validating its dimension and finiteness.
    pub fn push(&mut self, p: &[f64]) -> Result<()> {
        self.check_dim(p.len())?;
        if p.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index: self.len() });
        }
        self.coords.extend_from_slice(p);
        Ok(())
    }

    /// Appends all points of `other`.
    pub fn extend(&mut self, other: &PointSet) -> Result<()> {
        self.check_dim(other.dim)?;
        self.coords.extend_from_slice(&other.coords);
        Ok(())
    }

    /// Subset of the points at the given indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> PointSet {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        PointSet {
            dim: self.dim,
            coords,
        }
    }

    /// Splits off the first `count` points into a new set.
    pub fn split_front(mut self, count: usize) -> (PointSet, PointSet) {
        let tail = self.coords.split_off(count.min(self.len()) * self.dim);
        let dim = self.dim;
        (self, PointSet { dim, coords: tail })
    }

    /// Applies `f` to every point, producing a new set of dimension `out_dim`.
    pub fn map_points<F>(&self, out_dim: usize, mut f: F) -> Result<PointSet>
    where
        F: FnMut(&[f64], &mut [f64]),
    {
        let mut coords = vec![0.0; self.len() * out_dim];
        for (src, dst) in self.iter().zip(coords.chunks_exact_mut(out_dim.max(1))) {
            f(src, dst);
        }
        PointSet::new(out_dim, coords)
    }

    pub(crate) fn from_raw(dim: usize, coords: Vec<f64>) -> Self {
        debug_assert!(dim > 0 && coords.len() % dim == 0);
        Self { dim, coords }
    }

    pub(crate) fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found,
            });
        }
        Ok(())
    }

    /// Coordinate-wise mean; `None` for an empty set.
    pub fn mean(&self) -> Option<Vec<f64>> {
        if self.is_empty() {
            return None;
        }
        let mut acc = vec![0.0; self.dim];
        for p in self.iter() {
            for (a, c) in acc.iter_mut().zip(p) {
                *a += c;
            }
        }
        let n = self.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        Some(acc)
    }
}

/// A closed ball `{x : ||x - center|| <= radius}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::invalid(format!(
                "ball radius must be finite and >= 0, got {radius}"
            )));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index: 0 });
        }
        Ok(Self { center, radius })
    }

    #[inline]
    pub fn contains(&self, p: &[f64]) -> bool {
        dist(&self.center, p) <= self.radius
    }
}

/// Number of points of `ps` inside the closed ball.
pub fn count_in_ball(ps: &PointSet, ball: &Ball) -> Result<usize> {
    ps.check_dim(ball.center.len())?;
    Ok(ps.iter().filter(|p| ball.contains(p)).count())
}

/// Distances from `center` to every point of `ps`, ascending.
///
/// The `b`-th entry (1-indexed) is the smallest radius whose closed ball
/// around `center` holds at least `b` points.
pub fn sorted_distances(ps: &PointSet, center: &[f64]) -> Result<Vec<f64>> {
    if ps.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    ps.check_dim(center.len())?;
    let mut d: Vec<f64> = ps.iter().map(|p| dist(center, p)).collect();
    d.sort_unstable_by(f64::total_cmp);
    Ok(d)
}

/// The `rank`-th smallest distance (1-indexed) from `center` to `ps`.
///
/// Linear-time selection; agrees with `sorted_distances(ps, center)[rank - 1]`.
pub fn kth_distance(ps: &PointSet, center: &[f64], rank: usize) -> Result<f64> {
    if rank == 0 || rank > ps.len() {
        return Err(Error::InsufficientData {
            needed: rank.max(1),
            available: ps.len(),
        });
    }
    ps.check_dim(center.len())?;
    let mut d: Vec<f64> = ps.iter().map(|p| dist(center, p)).collect();
    let (_, kth, _) = d.select_nth_unstable_by(rank - 1, f64::total_cmp);
    Ok(*kth)
}

/// True iff `pt` lies in at least one of the closed balls.
pub fn union_membership(balls: &[Ball], pt: &[f64]) -> Result<bool> {
    for ball in balls {
        if ball.center.len() != pt.len() {
            return Err(Error::DimensionMismatch {
                expected: ball.center.len(),
                found: pt.len(),
            });
        }
        if ball.contains(pt) {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(rows: &[[f64; 2]]) -> PointSet {
        PointSet::from_rows(2, rows).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance(&[0.0, 0.0], &[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        for h in [0.0, 0.25, 1.5, 1e-7] {
            assert_eq!(
                distance(&[1.0, 1.0], &[1.0, 1.0 + h]).unwrap(),
                (1.0 + h) - 1.0
            );
        }
        assert!(matches!(
            distance(&[0.0], &[0.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn count_is_inclusive() {
        let ps = set(&[[0.0, 0.0], [2.0, 0.0]]);
        let c = vec![0.0, 0.0];
        assert_eq!(
            count_in_ball(&ps, &Ball::new(c.clone(), 2.0).unwrap()).unwrap(),
            2
        );
        assert_eq!(
            count_in_ball(&ps, &Ball::new(c.clone(), 1.9).unwrap()).unwrap(),
            1
        );
        assert_eq!(count_in_ball(&ps, &Ball::new(c, 0.0).unwrap()).unwrap(), 1);
        let bad = Ball::new(vec![0.0; 3], 1.0).unwrap();
        assert!(count_in_ball(&ps, &bad).is_err());
    }

    #[test]
    fn sorted_distance_examples() {
        let ps = set(&[[0.0, 0.0], [3.0, 4.0], [0.0, 1.0]]);
        let d = sorted_distances(&ps, &[0.0, 0.0]).unwrap();
        assert_eq!(d, vec![0.0, 1.0, 5.0]);
        assert_eq!(d[2 - 1], 1.0);
        assert_eq!(kth_distance(&ps, &[0.0, 0.0], 2).unwrap(), 1.0);

        let dup = set(&[[1.0, 1.0], [1.0, 1.0], [2.0, 1.0]]);
        assert_eq!(
            sorted_distances(&dup, &[1.0, 1.0]).unwrap(),
            vec![0.0, 0.0, 1.0]
        );

        assert!(matches!(
            sorted_distances(&PointSet::empty(2).unwrap(), &[0.0, 0.0]),
            Err(Error::EmptyPointSet)
        ));
    }

    #[test]
    fn union_membership_examples() {
        let unit = Ball::new(vec![0.0, 0.0], 1.0).unwrap();
        assert!(union_membership(&[unit.clone()], &[0.0, 1.0]).unwrap());
        assert!(!union_membership(&[], &[0.0, 1.0]).unwrap());
        let twice = [unit.clone(), unit];
        assert!(union_membership(&twice, &[0.5, 0.0]).unwrap());
        assert!(!union_membership(&twice, &[1.5, 0.0]).unwrap());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(matches!(
            PointSet::new(2, vec![0.0, 1.0, f64::NAN, 0.0]),
            Err(Error::NonFinite { index: 1 })
        ));
        assert!(PointSet::new(2, vec![0.0, 1.0, 2.0]).is_err());
    }

    fn coord() -> impl Strategy<Value = f64> {
        -100.0f64..100.0
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn triangle_inequality(a in prop::array::uniform3(coord()),
                               b in prop::array::uniform3(coord()),
                               c in prop::array::uniform3(coord())) {
            let ab = dist(&a, &b);
            let bc = dist(&b, &c);
            let ac = dist(&a, &c);
            prop_assert!(ac <= (ab + bc) * (1.0 + 1e-12) + 1e-12);
            prop_assert_eq!(ab, dist(&b, &a));
            prop_assert!(ab >= 0.0);
        }
    }

    proptest! {
        #[test]
        fn count_monotone_and_matches_sorted(
            rows in prop::collection::vec(prop::array::uniform2(-5.0f64..5.0), 1..60),
            center in prop::array::uniform2(-5.0f64..5.0),
            r1 in 0.0f64..8.0, r2 in 0.0f64..8.0,
        ) {
            let ps = PointSet::from_rows(2, &rows).unwrap();
            let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            let c_lo = count_in_ball(&ps, &Ball::new(center.to_vec(), lo).unwrap()).unwrap();
            let c_hi = count_in_ball(&ps, &Ball::new(center.to_vec(), hi).unwrap()).unwrap();
            prop_assert!(c_lo <= c_hi);

            let sorted = sorted_distances(&ps, &center).unwrap();
            for b in 1..=ps.len() {
                let r = sorted[b - 1];
                let at = count_in_ball(&ps, &Ball::new(center.to_vec(), r).unwrap()).unwrap();
                prop_assert!(at >= b);
                // Just below r the ball holds fewer than b points.
                if r > 0.0 {
                    let below = f64::from_bits(r.to_bits() - 1);
                    let c = count_in_ball(&ps, &Ball::new(center.to_vec(), below).unwrap()).unwrap();
                    prop_assert!(c < b);
                }
                prop_assert_eq!(kth_distance(&ps, &center, b).unwrap(), r);
            }
        }
    }
}
