//! Recipes for the synthetic experiments: halfmoons copier mixtures against
//! the detector and the three-sample baseline, the uniform-cube KDE
//! construction, and the circle-family lower bound fixtures.

use serde::{Deserialize, Serialize};

use crate::baseline::{baseline_test, BaselineParams, BASELINE_ALPHA};
use crate::calibration::{
    decide, median, null_calibrate, p_value, NullCache, NullDistribution, TieRule,
};
use crate::detector::{detect, DetectionParams};
use crate::distributions::{
    circles_family, covers, exact_cr_oracle, generative_a, kde_sampler, make_copier_mixture,
    uniform_cube_kde_fixture, AnalyticDistribution, CircleGeometry, CopierConfig, IndexSubset,
    Kernel, OracleConfig,
};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream_rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HalfmoonsExperiment {
    pub n: usize,
    pub sigma: f64,
    pub detection: DetectionParams,
    /// Copier settings; `rho` is replaced by each entry of `rhos`.
    pub copier: CopierConfig,
    pub rhos: Vec<f64>,
    pub clusters: Vec<usize>,
    pub repetitions: usize,
    pub null_runs: usize,
    pub alpha: f64,
    pub baseline_alpha: f64,
    pub tie_rule: TieRule,
    pub seed: u64,
    pub reduced_precision: bool,
}

impl Default for HalfmoonsExperiment {
    fn default() -> Self {
        Self {
            n: 2000,
            sigma: 0.1,
            detection: DetectionParams {
                k: Some(2),
                ..Default::default()
            },
            copier: CopierConfig::default(),
            rhos: vec![0.1, 0.2, 0.3, 0.4],
            clusters: vec![1, 5, 10, 20],
            repetitions: 10,
            null_runs: 1000,
            alpha: 0.05,
            baseline_alpha: BASELINE_ALPHA,
            tie_rule: TieRule::Strict,
            seed: 0,
            reduced_precision: false,
        }
    }
}

impl HalfmoonsExperiment {
    /// Small configuration for smoke runs; same table layout.
    pub fn quick() -> Self {
        Self {
            n: 600,
            detection: DetectionParams {
                k: Some(2),
                m: 30_000,
                b: 120,
                ..Default::default()
            },
            clusters: vec![1, 5],
            repetitions: 3,
            null_runs: 20,
            reduced_precision: true,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.detection.validate()?;
        if self.n < self.detection.b {
            return Err(Error::invalid(format!(
                "n = {} is below b = {}",
                self.n, self.detection.b
            )));
        }
        if self.repetitions == 0 || self.null_runs == 0 {
            return Err(Error::invalid("repetitions and null_runs must be >= 1"));
        }
        if self.rhos.iter().any(|r| !(*r > 0.0 && *r <= 1.0)) {
            return Err(Error::invalid("each rho must lie in (0, 1]"));
        }
        if self.clusters.iter().any(|&c| c == 0 || c > self.n) {
            return Err(Error::invalid("cluster counts must lie in 1..=n"));
        }
        Ok(())
    }

    pub fn columns(&self) -> Vec<String> {
        std::iter::once("q = p".to_string())
            .chain(self.rhos.iter().map(|r| format!("rho = {r}")))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub method: String,
    /// Median p-value per column.
    pub p_values: Vec<f64>,
    pub significant: Vec<bool>,
    /// Per-repetition p-values, `[column][repetition]`.
    pub runs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentTable {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<TableRow>,
    pub reduced_precision: bool,
    /// Copy-rate estimates of the detector, `[column][repetition]`.
    pub cr_hats: Vec<Vec<f64>>,
}

impl ExperimentTable {
    pub fn row(&self, method: &str) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("method");
        for c in &self.columns {
            out.push_str(&format!(",p[{c}],significant[{c}]"));
        }
        out.push_str(",reduced_precision\n");
        for r in &self.rows {
            out.push_str(&r.method);
            for (p, s) in r.p_values.iter().zip(&r.significant) {
                out.push_str(&format!(",{p:.4},{}", if *s { "yes" } else { "no" }));
            }
            out.push_str(&format!(",{}\n", self.reduced_precision));
        }
        out
    }

    /// Two aligned blocks: decisions, then median p-values.
    pub fn to_text(&self) -> String {
        let width = self
            .columns
            .iter()
            .map(|c| c.len())
            .max()
            .unwrap_or(0)
            .max(8);
        let lead = self
            .rows
            .iter()
            .map(|r| r.method.len())
            .max()
            .unwrap_or(0)
            .max(6);
        let header = {
            let mut h = format!("{:<lead$}", "method");
            for c in &self.columns {
                h.push_str(&format!(" | {c:>width$}"));
            }
            h
        };
        let mut out = format!("{}\n", self.title);
        if self.reduced_precision {
            out.push_str("(reduced precision)\n");
        }
        out.push_str(&format!("\n{header}\n{}\n", "-".repeat(header.len())));
        for r in &self.rows {
            out.push_str(&format!("{:<lead$}", r.method));
            for s in &r.significant {
                out.push_str(&format!(" | {:>width$}", if *s { "yes" } else { "no" }));
            }
            out.push('\n');
        }
        out.push_str(&format!("\n{header}\n{}\n", "-".repeat(header.len())));
        for r in &self.rows {
            out.push_str(&format!("{:<lead$}", r.method));
            for p in &r.p_values {
                out.push_str(&format!(" | {p:>width$.4}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Null distribution for the halfmoons detector, through the cache if given.
pub fn halfmoons_null(
    cfg: &HalfmoonsExperiment,
    cache: Option<&NullCache>,
) -> Result<NullDistribution> {
    let p = AnalyticDistribution::halfmoons(cfg.sigma);
    let seed = derive_seed(cfg.seed, 0);
    match cache {
        Some(c) => c.get_or_compute(&p, cfg.n, &cfg.detection, cfg.null_runs, seed),
        None => null_calibrate(&p, cfg.n, &cfg.detection, cfg.null_runs, seed),
    }
}

/// Runs every repetition of every column for the detector and each baseline
/// cluster count, and aggregates by the median p-value.
pub fn run_halfmoons(
    cfg: &HalfmoonsExperiment,
    cache: Option<&NullCache>,
) -> Result<ExperimentTable> {
    cfg.validate()?;
    let p = AnalyticDistribution::halfmoons(cfg.sigma);
    let null = halfmoons_null(cfg, cache).map_err(|e| e.context("null calibration"))?;
    let cols = cfg.rhos.len() + 1;
    let methods = 1 + cfg.clusters.len();
    // [method][column][repetition]
    let mut pv = vec![vec![Vec::with_capacity(cfg.repetitions); cols]; methods];
    let mut cr_hats = vec![Vec::with_capacity(cfg.repetitions); cols];
    for rep in 0..cfg.repetitions {
        let rep_seed = derive_seed(cfg.seed, 1 + rep as u64);
        let s = p.sample(cfg.n, &mut stream_rng(rep_seed, 0));
        let test = p.sample(cfg.n, &mut stream_rng(rep_seed, 1));
        for col in 0..cols {
            let col_seed = derive_seed(rep_seed, 100 + col as u64);
            let mut q = if col == 0 {
                p.clone()
            } else {
                let copier = CopierConfig {
                    rho: cfg.rhos[col - 1],
                    ..cfg.copier
                };
                make_copier_mixture(&s, copier, &p, derive_seed(col_seed, 0))?
            };
            let params = DetectionParams {
                seed: derive_seed(col_seed, 1),
                ..cfg.detection
            };
            let rep_ctx =
                |e: Error| e.context(format!("repetition {rep}, column {}", cfg.columns()[col]));
            let report = detect(&s, &mut q, &params).map_err(rep_ctx)?;
            cr_hats[col].push(report.cr_hat);
            pv[0][col].push(p_value(&null, report.cr_hat, cfg.tie_rule)?);
            let generated = q.sample(cfg.n, &mut stream_rng(derive_seed(col_seed, 2), 0));
            for (j, &c) in cfg.clusters.iter().enumerate() {
                let bp = BaselineParams {
                    c,
                    seed: rep_seed,
                    ..Default::default()
                };
                let rep = baseline_test(&s, &test, &generated, &bp).map_err(rep_ctx)?;
                pv[1 + j][col].push(rep.p_value);
            }
        }
    }
    let mut rows = Vec::with_capacity(methods);
    for (mi, per_col) in pv.into_iter().enumerate() {
        let (method, alpha) = if mi == 0 {
            ("ours".to_string(), cfg.alpha)
        } else {
            (format!("c={}", cfg.clusters[mi - 1]), cfg.baseline_alpha)
        };
        let p_values = per_col
            .iter()
            .map(|v| median(v))
            .collect::<Result<Vec<_>>>()?;
        let significant = p_values
            .iter()
            .map(|&pv| decide(pv, alpha).map(|d| d.significant))
            .collect::<Result<Vec<_>>>()?;
        rows.push(TableRow {
            method,
            p_values,
            significant,
            runs: per_col,
        });
    }
    Ok(ExperimentTable {
        title: "Halfmoons copier mixtures: median p-values and decisions".into(),
        columns: cfg.columns(),
        rows,
        reduced_precision: cfg.reduced_precision,
        cr_hats,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KdeExperiment {
    pub n: usize,
    pub d: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub kernel: Kernel,
    /// Detector settings; `lambda` and `gamma` are overwritten by the fields above.
    pub detection: DetectionParams,
    pub trials: usize,
    pub seed: u64,
}

impl Default for KdeExperiment {
    fn default() -> Self {
        Self {
            n: 100,
            d: 2,
            lambda: 5.0,
            gamma: 0.01,
            sigma: 0.05,
            kernel: Kernel::UniformBall,
            detection: DetectionParams {
                epsilon: 0.1,
                b: 10,
                k: Some(2),
                ..Default::default()
            },
            trials: 10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeOutcome {
    pub side: f64,
    pub cr_hats: Vec<f64>,
}

/// Uniform cube sized so a KDE of bandwidth `sigma` copies each training
/// point, and the detector's estimate on `trials` fresh training sets.
pub fn run_kde(cfg: &KdeExperiment) -> Result<KdeOutcome> {
    let (pi, side) =
        uniform_cube_kde_fixture(cfg.n, cfg.lambda, cfg.gamma, cfg.sigma, cfg.d, cfg.kernel)?;
    let params = DetectionParams {
        lambda: cfg.lambda,
        gamma: cfg.gamma,
        ..cfg.detection
    };
    params.validate()?;
    let mut cr_hats = Vec::with_capacity(cfg.trials);
    for trial in 0..cfg.trials {
        let seed = derive_seed(cfg.seed, trial as u64);
        let s = pi.sample(cfg.n, &mut stream_rng(seed, 0));
        let mut q = kde_sampler(&s, cfg.sigma, cfg.kernel)?;
        let rep = detect(&s, &mut q, &DetectionParams { seed, ..params })
            .map_err(|e| e.context(format!("trial {trial}")))?;
        cr_hats.push(rep.cr_hat);
    }
    Ok(KdeOutcome { side, cr_hats })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LowerBoundExperiment {
    pub kappa: usize,
    pub lambda: f64,
    pub epsilon: f64,
    /// Mass cap; the oracle runs at `gamma / (1 + eps)` and `gamma (1 + eps)`.
    pub gamma: f64,
    pub trials: usize,
    pub seed: u64,
    pub oracle: OracleConfig,
}

impl Default for LowerBoundExperiment {
    fn default() -> Self {
        Self {
            kappa: 64,
            lambda: 13.0,
            epsilon: 1.0 / 3.0,
            gamma: 0.05,
            trials: 100,
            seed: 0,
            oracle: OracleConfig {
                grid_density: 100,
                ..Default::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundOutcome {
    pub trials: usize,
    pub covering: usize,
    /// Oracle rate of `A_T(S)` at `(lambda (1+eps), gamma / (1+eps))`, per covering trial.
    pub rate_a: Vec<f64>,
    /// Oracle rate of `A_T'(S)` at `(lambda / (1+eps), gamma (1+eps))`, per covering trial.
    pub rate_a_prime: Vec<f64>,
    /// Expected value of `rate_a`: `lambda (1+eps) / 24`.
    pub expected_rate: f64,
    /// Mass `A_T` leaves on `C_0`.
    pub c0_mass: f64,
    /// Density ratio of `A_T'` to `p_T` on supported circles, `lambda (1+eps) / 2`.
    pub supported_ratio: f64,
    /// The overrepresentation level it must stay below, `lambda / (1+eps)`.
    pub ratio_limit: f64,
}

pub fn run_lower_bound(cfg: &LowerBoundExperiment) -> Result<LowerBoundOutcome> {
    let geom = CircleGeometry::coplanar(cfg.kappa)?;
    let (lambda, eps) = (cfg.lambda, cfg.epsilon);
    let mut out = LowerBoundOutcome {
        trials: cfg.trials,
        covering: 0,
        rate_a: Vec::new(),
        rate_a_prime: Vec::new(),
        expected_rate: lambda * (1.0 + eps) / 24.0,
        c0_mass: 1.0 - lambda * (1.0 + eps) / 24.0,
        supported_ratio: lambda * (1.0 + eps) / 2.0,
        ratio_limit: lambda / (1.0 + eps),
    };
    for trial in 0..cfg.trials {
        let seed = derive_seed(cfg.seed, trial as u64);
        let t = IndexSubset::random(cfg.kappa, derive_seed(seed, 0))?;
        let p = circles_family(&t, &geom)?;
        let s = p.sample(cfg.kappa, &mut stream_rng(seed, 1));
        if !covers(&s, &t, &geom) {
            continue;
        }
        out.covering += 1;
        let a = generative_a(&s, &t, lambda, eps, &geom, false, derive_seed(seed, 2))?;
        let a_prime = generative_a(&s, &t, lambda, eps, &geom, true, derive_seed(seed, 2))?;
        out.rate_a.push(exact_cr_oracle(
            &a,
            &p,
            &s,
            lambda * (1.0 + eps),
            cfg.gamma / (1.0 + eps),
            &cfg.oracle,
        )?);
        out.rate_a_prime.push(exact_cr_oracle(
            &a_prime,
            &p,
            &s,
            lambda / (1.0 + eps),
            cfg.gamma * (1.0 + eps),
            &cfg.oracle,
        )?);
    }
    Ok(out)
}
