//! Sampling access to a generated distribution `q`.

use crate::distributions::AnalyticDistribution;
use crate::error::{Error, Result};
use crate::geometry::PointSet;
use crate::rng::SeededRng;

/// Source of independent draws from a generated distribution.
///
/// Implementations that own randomness must take it from `rng` so a run is
/// reproducible from its seed. Samplers with their own source of randomness
/// (pre-drawn files, subprocesses) may ignore it.
pub trait SamplerOracle: Send {
    fn dim(&self) -> usize;

    fn sample(&mut self, count: usize, rng: &mut SeededRng) -> Result<PointSet>;

    /// Short human readable description, recorded in reports.
    fn describe(&self) -> String;
}

impl SamplerOracle for AnalyticDistribution {
    fn dim(&self) -> usize {
        AnalyticDistribution::dim(self)
    }

    fn sample(&mut self, count: usize, rng: &mut SeededRng) -> Result<PointSet> {
        Ok(AnalyticDistribution::sample(self, count, rng))
    }

    fn describe(&self) -> String {
        format!("analytic:{}", self.id())
    }
}

/// Serves pre-drawn points in file order.
#[derive(Debug, Clone)]
pub struct FileSampler {
    points: PointSet,
    next: usize,
    label: String,
}

impl FileSampler {
    pub fn new(points: PointSet, label: impl Into<String>) -> Self {
        Self {
            points,
            next: 0,
            label: label.into(),
        }
    }

    pub fn remaining(&self) -> usize {
        self.points.len() - self.next
    }
}

impl SamplerOracle for FileSampler {
    fn dim(&self) -> usize {
        self.points.dim()
    }

    fn sample(&mut self, count: usize, _rng: &mut SeededRng) -> Result<PointSet> {
        if count > self.remaining() {
            return Err(Error::Sampler(format!(
                "{} holds {} unused points, {count} requested",
                self.label,
                self.remaining()
            )));
        }
        let idx: Vec<usize> = (self.next..self.next + count).collect();
        self.next += count;
        Ok(self.points.select(&idx))
    }

    fn describe(&self) -> String {
        format!("file:{}", self.label)
    }
}
