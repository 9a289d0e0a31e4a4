//! Three-sample nearest-neighbor test for data copying, run per region of a
//! c-means partition of the training set.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::geometry::{dist, PointSet};
use crate::index::KdTree;
use crate::rng::stream_rng;

/// Significance level matching `Z < -3`.
pub const BASELINE_ALPHA: f64 = 0.0027;

/// Which training points define `d(y, S)` for a point assigned to a cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceScope {
    /// The training points of the same cluster.
    #[default]
    Cluster,
    /// All training points.
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineParams {
    pub c: usize,
    pub max_iters: usize,
    pub seed: u64,
    pub scope: DistanceScope,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self {
            c: 1,
            max_iters: 100,
            seed: 0,
            scope: DistanceScope::Cluster,
        }
    }
}

impl BaselineParams {
    pub fn validate(&self) -> Result<()> {
        if self.c == 0 {
            return Err(Error::invalid("cluster count c must be >= 1"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be >= 1"));
        }
        Ok(())
    }
}

/// Nearest centroid, ties to the smaller index.
fn nearest_centroid(centroids: &PointSet, p: &[f64]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = dist(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best.0
}

/// Lloyd's algorithm from a seeded farthest-point start. Stops at an
/// assignment fixpoint or after `max_iters` rounds.
pub fn cmeans(
    s: &PointSet,
    c: usize,
    max_iters: usize,
    seed: u64,
) -> Result<(PointSet, Vec<usize>)> {
    if c == 0 || max_iters == 0 {
        return Err(Error::invalid("c and max_iters must be >= 1"));
    }
    if c > s.len() {
        return Err(Error::invalid(format!(
            "c = {c} exceeds the {} training points",
            s.len()
        )));
    }
    let n = s.len();
    let d = s.dim();
    let first = stream_rng(seed, 0).random_range(0..n);
    let mut chosen = vec![first];
    let mut gap: Vec<f64> = s.iter().map(|p| dist(p, s.point(first))).collect();
    while chosen.len() < c {
        let mut next = 0;
        for i in 1..n {
            if gap[i] > gap[next] {
                next = i;
            }
        }
        chosen.push(next);
        for (i, g) in gap.iter_mut().enumerate() {
            *g = g.min(dist(s.point(i), s.point(next)));
        }
    }
    let mut centroids = s.select(&chosen);
    let mut assign: Vec<usize> = vec![usize::MAX; n];
    for _ in 0..max_iters {
        let fresh: Vec<usize> = (0..n)
            .into_par_iter()
            .map(|i| nearest_centroid(&centroids, s.point(i)))
            .collect();
        let changed = fresh != assign;
        assign = fresh;
        repair_empty(s, &centroids, &mut assign, c);
        centroids = means(s, &assign, c, d);
        if !changed {
            break;
        }
    }
    Ok((centroids, assign))
}

/// Moves the point farthest from its centroid into each empty cluster.
fn repair_empty(s: &PointSet, centroids: &PointSet, assign: &mut [usize], c: usize) {
    loop {
        let mut sizes = vec![0usize; c];
        for &a in assign.iter() {
            sizes[a] += 1;
        }
        let Some(empty) = sizes.iter().position(|&z| z == 0) else {
            return;
        };
        let mut far = None;
        let mut far_d = -1.0;
        for (i, &a) in assign.iter().enumerate() {
            if sizes[a] > 1 {
                let di = dist(s.point(i), centroids.point(a));
                if di > far_d {
                    far_d = di;
                    far = Some(i);
                }
            }
        }
        match far {
            Some(i) => assign[i] = empty,
            None => return,
        }
    }
}

fn means(s: &PointSet, assign: &[usize], c: usize, d: usize) -> PointSet {
    let mut sums = vec![0.0; c * d];
    let mut counts = vec![0usize; c];
    for (p, &a) in s.iter().zip(assign) {
        counts[a] += 1;
        for (acc, v) in sums[a * d..(a + 1) * d].iter_mut().zip(p) {
            *acc += v;
        }
    }
    for (j, &cnt) in counts.iter().enumerate() {
        for v in &mut sums[j * d..(j + 1) * d] {
            *v /= cnt.max(1) as f64;
        }
    }
    PointSet::from_raw(d, sums)
}

/// Rank statistic `delta = #{(i, j): p_i < q_j}` and its normal score.
/// `None` when either list is empty.
pub fn zu_statistic(p_dists: &[f64], q_dists: &[f64]) -> Option<(u64, f64)> {
    if p_dists.is_empty() || q_dists.is_empty() {
        return None;
    }
    let mut q = q_dists.to_vec();
    q.sort_unstable_by(f64::total_cmp);
    let delta: u64 = p_dists
        .iter()
        .map(|&v| (q.len() - q.partition_point(|&x| x <= v)) as u64)
        .sum();
    let (np, nq) = (p_dists.len() as f64, q_dists.len() as f64);
    let z = (delta as f64 - np * nq / 2.0) / (np * nq * (np + nq + 1.0) / 12.0).sqrt();
    Some((delta, z))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterStat {
    pub cluster: usize,
    pub n_p: usize,
    pub n_q: usize,
    /// `None` when the cluster received no test or no generated points.
    pub delta: Option<u64>,
    pub z: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub per_cluster: Vec<ClusterStat>,
    pub min_z: f64,
    pub p_value: f64,
    pub params: BaselineParams,
}

impl BaselineReport {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p_value <= alpha
    }
}

pub fn standard_normal_cdf(z: f64) -> f64 {
    Normal::standard().cdf(z)
}

/// Runs the test with test sample `p` and generated sample `q`. Small
/// (negative) scores mean `q` sits closer to the training set than `p`.
pub fn baseline_test(
    s: &PointSet,
    p: &PointSet,
    q: &PointSet,
    params: &BaselineParams,
) -> Result<BaselineReport> {
    params.validate()?;
    if s.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    p.check_dim(s.dim())?;
    q.check_dim(s.dim())?;
    let (centroids, assign) = cmeans(s, params.c, params.max_iters, params.seed)?;
    let c = params.c;
    let trees: Vec<KdTree> = match params.scope {
        DistanceScope::Cluster => (0..c)
            .map(|j| {
                let idx: Vec<usize> = (0..s.len()).filter(|&i| assign[i] == j).collect();
                KdTree::build(&s.select(&idx))
            })
            .collect(),
        DistanceScope::Global => vec![KdTree::build(s)],
    };
    let split = |sample: &PointSet| -> Vec<Vec<f64>> {
        let labelled: Vec<(usize, f64)> = (0..sample.len())
            .into_par_iter()
            .map(|i| {
                let x = sample.point(i);
                let j = nearest_centroid(&centroids, x);
                let tree = &trees[if params.scope == DistanceScope::Global {
                    0
                } else {
                    j
                }];
                (j, tree.nearest(x).map_or(f64::INFINITY, |(_, d)| d))
            })
            .collect();
        let mut out = vec![Vec::new(); c];
        for (j, d) in labelled {
            out[j].push(d);
        }
        out
    };
    let pd = split(p);
    let qd = split(q);
    let per_cluster: Vec<ClusterStat> = (0..c)
        .into_par_iter()
        .map(|j| {
            let stat = zu_statistic(&pd[j], &qd[j]);
            ClusterStat {
                cluster: j,
                n_p: pd[j].len(),
                n_q: qd[j].len(),
                delta: stat.map(|s| s.0),
                z: stat.map(|s| s.1),
            }
        })
        .collect();
    let min_z = per_cluster
        .iter()
        .filter_map(|c| c.z)
        .filter(|z| z.is_finite())
        .min_by(f64::total_cmp)
        .ok_or_else(|| Error::invalid("no cluster received both test and generated points"))?;
    Ok(BaselineReport {
        per_cluster,
        min_z,
        p_value: standard_normal_cdf(min_z),
        params: *params,
    })
}
