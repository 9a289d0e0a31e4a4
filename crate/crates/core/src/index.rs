//! Static kd-tree for exact closed-ball range queries.
//!
//! Results agree exactly with a linear scan using [`crate::geometry::dist`]:
//! node pruning uses per-axis gap bounds that, by monotonicity of IEEE
//! subtraction, squaring, summation and square root, never exceed the
//! distance computed for any point inside the node.

use crate::geometry::{dist, PointSet};

const LEAF_SIZE: usize = 16;

#[derive(Debug, Clone)]
struct Node {
    lo: Vec<f64>,
    hi: Vec<f64>,
    start: usize,
    end: usize,
    children: Option<(usize, usize)>,
}

/// A kd-tree over a copy of a point set. Indices reported by queries refer
/// to positions in the original set.
#[derive(Debug, Clone)]
pub struct KdTree {
    dim: usize,
    coords: Vec<f64>,
    original: Vec<usize>,
    nodes: Vec<Node>,
}

impl KdTree {
    pub fn build(ps: &PointSet) -> Self {
        let dim = ps.dim();
        let mut order: Vec<usize> = (0..ps.len()).collect();
        let mut nodes = Vec::new();
        if !order.is_empty() {
            Self::build_node(ps, &mut order, 0, ps.len(), &mut nodes);
        }
        let mut coords = Vec::with_capacity(ps.coords().len());
        for &i in &order {
            coords.extend_from_slice(ps.point(i));
        }
        Self {
            dim,
            coords,
            original: order,
            nodes,
        }
    }

    fn build_node(
        ps: &PointSet,
        order: &mut [usize],
        start: usize,
        end: usize,
        nodes: &mut Vec<Node>,
    ) -> usize {
        let dim = ps.dim();
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for &i in &order[start..end] {
            for (j, &c) in ps.point(i).iter().enumerate() {
                lo[j] = lo[j].min(c);
                hi[j] = hi[j].max(c);
            }
        }
        let id = nodes.len();
        let count = end - start;
        let axis = (0..dim)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
            .unwrap_or(0);
        let flat = hi[axis] <= lo[axis];
        nodes.push(Node {
            lo,
            hi,
            start,
            end,
            children: None,
        });
        if count <= LEAF_SIZE || flat {
            return id;
        }
        let mid = count / 2;
        order[start..end].select_nth_unstable_by(mid, |&a, &b| {
            ps.point(a)[axis].total_cmp(&ps.point(b)[axis])
        });
        let left = Self::build_node(ps, order, start, start + mid, nodes);
        let right = Self::build_node(ps, order, start + mid, end, nodes);
        nodes[id].children = Some((left, right));
        id
    }

    pub fn len(&self) -> usize {
        self.original.len()
    }

    pub fn is_empty(&self) -> bool {
        self.original.is_empty()
    }

    #[inline]
    fn stored(&self, k: usize) -> &[f64] {
        &self.coords[k * self.dim..(k + 1) * self.dim]
    }

    fn lower_bound(node: &Node, c: &[f64]) -> f64 {
        let mut acc = 0.0;
        for j in 0..c.len() {
            let g = if c[j] < node.lo[j] {
                node.lo[j] - c[j]
            } else if c[j] > node.hi[j] {
                c[j] - node.hi[j]
            } else {
                0.0
            };
            acc += g * g;
        }
        acc.sqrt()
    }

    fn upper_bound(node: &Node, c: &[f64]) -> f64 {
        let mut acc = 0.0;
        for j in 0..c.len() {
            let g = (c[j] - node.lo[j]).abs().max((node.hi[j] - c[j]).abs());
            acc += g * g;
        }
        acc.sqrt()
    }

    /// Calls `visit(original_index, distance)` for every point within the
    /// closed ball of radius `r` around `center`.
    pub fn for_each_within<F: FnMut(usize, f64)>(&self, center: &[f64], r: f64, mut visit: F) {
        debug_assert_eq!(center.len(), self.dim);
        if self.nodes.is_empty() {
            return;
        }
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if Self::lower_bound(node, center) > r {
                continue;
            }
            match node.children {
                Some((l, rr)) => {
                    stack.push(rr);
                    stack.push(l);
                }
                None => {
                    for k in node.start..node.end {
                        let d = dist(center, self.stored(k));
                        if d <= r {
                            visit(self.original[k], d);
                        }
                    }
                }
            }
        }
    }

    /// Distances of all points within the closed ball, unordered.
    pub fn distances_within(&self, center: &[f64], r: f64) -> Vec<f64> {
        let mut out = Vec::new();
        self.for_each_within(center, r, |_, d| out.push(d));
        out
    }

    /// Number of points within the closed ball.
    pub fn count_within(&self, center: &[f64], r: f64) -> usize {
        if self.nodes.is_empty() {
            return 0;
        }
        let mut total = 0;
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if Self::lower_bound(node, center) > r {
                continue;
            }
            if Self::upper_bound(node, center) <= r {
                total += node.end - node.start;
                continue;
            }
            match node.children {
                Some((l, rr)) => {
                    stack.push(rr);
                    stack.push(l);
                }
                None => {
                    total += (node.start..node.end)
                        .filter(|&k| dist(center, self.stored(k)) <= r)
                        .count();
                }
            }
        }
        total
    }

    /// Nearest stored point: `(original_index, distance)`. Ties resolve to
    /// the smallest original index.
    pub fn nearest(&self, center: &[f64]) -> Option<(usize, f64)> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if Self::lower_bound(node, center) > best.1 {
                continue;
            }
            match node.children {
                Some((l, rr)) => {
                    let dl = Self::lower_bound(&self.nodes[l], center);
                    let dr = Self::lower_bound(&self.nodes[rr], center);
                    if dl <= dr {
                        stack.push(rr);
                        stack.push(l);
                    } else {
                        stack.push(l);
                        stack.push(rr);
                    }
                }
                None => {
                    for k in node.start..node.end {
                        let d = dist(center, self.stored(k));
                        let idx = self.original[k];
                        if d < best.1 || (d == best.1 && idx < best.0) {
                            best = (idx, d);
                        }
                    }
                }
            }
        }
        Some(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{count_in_ball, Ball};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_set(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> PointSet {
        let coords = (0..n * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        PointSet::new(dim, coords).unwrap()
    }

    #[test]
    fn agrees_with_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in [1, 2, 3, 5] {
            let ps = random_set(&mut rng, 3000, dim);
            let tree = KdTree::build(&ps);
            for _ in 0..100 {
                let c: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.2..1.2)).collect();
                // Use stored-point distances as radii so boundary ties are exercised.
                let r = dist(&c, ps.point(rng.random_range(0..ps.len())));
                let ball = Ball::new(c.clone(), r).unwrap();
                let linear = count_in_ball(&ps, &ball).unwrap();
                assert_eq!(tree.count_within(&c, r), linear);
                let mut listed = tree.distances_within(&c, r);
                assert_eq!(listed.len(), linear);
                let mut expect: Vec<f64> =
                    ps.iter().map(|p| dist(&c, p)).filter(|&d| d <= r).collect();
                listed.sort_by(f64::total_cmp);
                expect.sort_by(f64::total_cmp);
                assert_eq!(listed, expect);

                let (idx, d) = tree.nearest(&c).unwrap();
                let brute = ps
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (i, dist(&c, p)))
                    .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
                    .unwrap();
                assert_eq!((idx, d), brute);
            }
        }
    }

    #[test]
    fn duplicates_and_empty() {
        let ps = PointSet::new(2, [0.5, 0.5].repeat(100)).unwrap();
        let tree = KdTree::build(&ps);
        assert_eq!(tree.count_within(&[0.5, 0.5], 0.0), 100);
        assert_eq!(tree.count_within(&[0.5, 0.6], 0.05), 0);
        let empty = KdTree::build(&PointSet::empty(2).unwrap());
        assert_eq!(empty.count_within(&[0.0, 0.0], 10.0), 0);
        assert!(empty.nearest(&[0.0, 0.0]).is_none());
    }
}
