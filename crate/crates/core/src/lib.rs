//! Detection of training-data copying by generative models.
//!
//! A generated distribution `q` copies training point `x` when it puts at
//! least `lambda` times the true distribution's mass on a small ball around
//! `x`. The detector estimates the true mass from the training sample,
//! measures `q` from generated draws, and reports the fraction of `q` that
//! falls inside such balls.

pub mod baseline;
pub mod calibration;
pub mod detector;
pub mod distributions;
pub mod error;
pub mod experiments;
pub mod external;
pub mod geometry;
pub mod index;
pub mod io;
pub mod mass;
pub mod report;
pub mod rng;
pub mod sampler;

pub use detector::{detect, DetectionParams, DetectionReport};
pub use error::{Error, Result};
pub use geometry::PointSet;
pub use sampler::SamplerOracle;
