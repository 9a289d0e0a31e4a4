use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use datacopy::baseline::{baseline_test, BaselineParams, DistanceScope, BASELINE_ALPHA};
use datacopy::calibration::{decide, null_calibrate, p_value, NullCache, TieRule};
use datacopy::detector::{detect, DetectionParams};
use datacopy::distributions::{
    circles_family, make_copier_mixture, uniform_circle, AnalyticDistribution, CircleGeometry,
    CopierConfig, IndexSubset, Kernel,
};
use datacopy::experiments::{
    run_halfmoons, run_kde, run_lower_bound, HalfmoonsExperiment, KdeExperiment,
    LowerBoundExperiment,
};
use datacopy::external::{ExternalSampler, DEFAULT_TIMEOUT};
use datacopy::io::{file_digest, format_points, read_points};
use datacopy::mass::{estimate_k, EstimatorConfig};
use datacopy::report::{ReportDocument, Timing};
use datacopy::rng::stream_rng;
use datacopy::sampler::{FileSampler, SamplerOracle};
use datacopy::{Error, PointSet, Result};

const THREADS_ENV: &str = "DATACOPY_THREADS";

#[derive(Parser)]
#[command(
    name = "datacopy",
    version,
    about = "Detect point-wise data copying by generative models"
)]
struct Cli {
    /// Worker threads; defaults to $DATACOPY_THREADS, then to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the copy rate of a sampler against a training set.
    Detect(DetectArgs),
    /// Three-sample test on cluster-wise nearest-neighbor distances.
    Baseline(BaselineArgs),
    /// Null distribution of the copy rate for a built-in distribution.
    Calibrate(CalibrateArgs),
    /// Estimate the regularity exponent of a point set.
    EstimateK(EstimateKArgs),
    /// Significance tables over halfmoons copier mixtures.
    ExperimentHalfmoons(HalfmoonsArgs),
    /// Copy rates of a KDE trained on a uniform cube.
    ExperimentKde(KdeArgs),
    /// Circle-family fixtures with exact oracle rates.
    ExperimentLowerbound(LowerBoundArgs),
    /// Draw points from a built-in distribution.
    Sample(SampleArgs),
}

#[derive(Args)]
struct Common {
    /// JSON file with parameters; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct DetectFlags {
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    u_size: Option<usize>,
}

impl DetectFlags {
    fn apply(&self, p: &mut DetectionParams) {
        macro_rules! set {
            ($($f:ident),*) => {$(if let Some(v) = self.$f { p.$f = v; })*};
        }
        set!(lambda, gamma, epsilon, delta, m, b);
        if self.k.is_some() {
            p.k = self.k;
        }
        if self.u_size.is_some() {
            p.u_size = self.u_size;
        }
    }
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Builtin {
    /// Halfmoons with Gaussian noise.
    Halfmoons,
    /// Copier mixture around the training set.
    Copier,
    /// Uniform over the training points.
    Verbatim,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SamplerSource {
    /// Built-in model.
    #[arg(long)]
    builtin: Option<Builtin>,
    /// Pre-generated sample file, consumed in order.
    #[arg(long)]
    sample_file: Option<PathBuf>,
    /// Command speaking the line protocol on stdin and stdout.
    #[arg(long)]
    sampler_cmd: Option<String>,
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    train: PathBuf,
    #[command(flatten)]
    source: SamplerSource,
    /// Noise of the halfmoons built-ins.
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    /// Copy probability of the copier built-in.
    #[arg(long, default_value_t = 0.4)]
    rho: f64,
    /// Per-batch timeout of the sampler command, in seconds.
    #[arg(long, default_value_t = DEFAULT_TIMEOUT.as_secs_f64())]
    sampler_timeout: f64,
    #[command(flatten)]
    params: DetectFlags,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    Cluster,
    Global,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long)]
    train: PathBuf,
    /// Held-out sample from the data distribution.
    #[arg(long)]
    test: PathBuf,
    /// Sample from the model.
    #[arg(long)]
    generated: PathBuf,
    #[arg(long)]
    clusters: Option<usize>,
    #[arg(long, value_enum)]
    scope: Option<ScopeArg>,
    #[arg(long, default_value_t = BASELINE_ALPHA)]
    alpha: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct CalibrateConfig {
    dist: DistSpec,
    n: usize,
    runs: usize,
    detection: DetectionParams,
    tie_rule: TieRule,
    alpha: f64,
}

impl Default for CalibrateConfig {
    fn default() -> Self {
        Self {
            dist: DistSpec::default(),
            n: 2000,
            runs: 1000,
            detection: DetectionParams {
                k: Some(2),
                ..Default::default()
            },
            tie_rule: TieRule::Strict,
            alpha: 0.05,
        }
    }
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    /// Copy-rate estimate to test against the null.
    #[arg(long)]
    observed: Option<f64>,
    /// Count null values equal to the observation as exceeding it.
    #[arg(long)]
    inclusive_ties: bool,
    #[arg(long)]
    alpha: Option<f64>,
    /// Directory of cached null distributions.
    #[arg(long)]
    cache: Option<PathBuf>,
    #[command(flatten)]
    dist: DistFlags,
    #[command(flatten)]
    params: DetectFlags,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct EstimateKArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    b: Option<usize>,
    /// Random anchor point from this seed instead of the first point.
    #[arg(long)]
    anchor_seed: Option<u64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct HalfmoonsArgs {
    /// Few repetitions and calibration runs; the table is flagged.
    #[arg(long)]
    quick: bool,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    null_runs: Option<usize>,
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Also write the table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct KdeArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, value_enum)]
    kernel: Option<KernelArg>,
    #[arg(long)]
    trials: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Gaussian,
    UniformBall,
}

#[derive(Args)]
struct LowerBoundArgs {
    #[arg(long)]
    kappa: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum DistName {
    #[default]
    Halfmoons,
    UniformSquare,
    UniformCircle,
    Circles,
}

/// A built-in analytic distribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct DistSpec {
    name: DistName,
    sigma: f64,
    kappa: usize,
    subset_seed: u64,
}

impl Default for DistSpec {
    fn default() -> Self {
        Self {
            name: DistName::Halfmoons,
            sigma: 0.1,
            kappa: 8,
            subset_seed: 0,
        }
    }
}

impl DistSpec {
    fn build(&self) -> Result<AnalyticDistribution> {
        match self.name {
            DistName::Halfmoons => Ok(AnalyticDistribution::halfmoons(self.sigma)),
            DistName::UniformSquare => AnalyticDistribution::uniform_cube(1.0, 2),
            DistName::UniformCircle => uniform_circle(&[0.0, 0.0]),
            DistName::Circles => circles_family(
                &IndexSubset::random(self.kappa, self.subset_seed)?,
                &CircleGeometry::coplanar(self.kappa)?,
            ),
        }
    }
}

#[derive(Args)]
struct DistFlags {
    #[arg(long, value_enum)]
    dist: Option<DistName>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    kappa: Option<usize>,
    #[arg(long)]
    subset_seed: Option<u64>,
}

impl DistFlags {
    fn apply(&self, spec: &mut DistSpec) {
        if let Some(v) = self.dist {
            spec.name = v;
        }
        if let Some(v) = self.sigma {
            spec.sigma = v;
        }
        if let Some(v) = self.kappa {
            spec.kappa = v;
        }
        if let Some(v) = self.subset_seed {
            spec.subset_seed = v;
        }
    }
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    dist: DistFlags,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| Error::from(e).context(format!("reading {}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::from(e).context(format!("config {}", path.display())))
}

fn read_input(path: &Path) -> Result<(PointSet, String)> {
    let points = read_points(path)?;
    Ok((points, file_digest(path)?))
}

fn emit(doc: ReportDocument, out: Option<&Path>, started: Instant) -> Result<()> {
    let doc = doc.with_timing(Timing {
        elapsed_secs: started.elapsed().as_secs_f64(),
        threads: rayon::current_num_threads(),
    });
    if let Some(path) = out {
        doc.write(path)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct DetectConfig<'a> {
    params: &'a DetectionParams,
    sampler: String,
    sigma: f64,
    rho: f64,
}

fn run_detect(args: DetectArgs) -> Result<()> {
    let started = Instant::now();
    let mut params: DetectionParams = load_config(args.common.config.as_deref())?;
    args.params.apply(&mut params);
    if let Some(seed) = args.common.seed {
        params.seed = seed;
    }
    params.validate()?;
    let (train, train_digest) = read_input(&args.train)?;
    let mut doc_inputs = vec![("train", train_digest)];
    let (mut sampler, label): (Box<dyn SamplerOracle>, String) = match &args.source {
        SamplerSource {
            builtin: Some(b), ..
        } => {
            let base = AnalyticDistribution::halfmoons(args.sigma);
            let q = match b {
                Builtin::Halfmoons => base,
                Builtin::Copier => make_copier_mixture(
                    &train,
                    CopierConfig {
                        rho: args.rho,
                        ..Default::default()
                    },
                    &base,
                    params.seed,
                )?,
                Builtin::Verbatim => AnalyticDistribution::uniform_over(&train)?,
            };
            let label = serde_json::to_value(b)?
                .as_str()
                .unwrap_or_default()
                .to_string();
            (Box::new(q), format!("builtin:{label}"))
        }
        SamplerSource {
            sample_file: Some(path),
            ..
        } => {
            let (points, digest) = read_input(path)?;
            doc_inputs.push(("samples", digest));
            (
                Box::new(FileSampler::new(points, path.display().to_string())),
                format!("file:{}", path.display()),
            )
        }
        SamplerSource {
            sampler_cmd: Some(cmd),
            ..
        } => {
            if !(args.sampler_timeout > 0.0) {
                return Err(Error::invalid("sampler timeout must be positive"));
            }
            let timeout = Duration::from_secs_f64(args.sampler_timeout);
            (
                Box::new(ExternalSampler::spawn(
                    cmd,
                    train.dim(),
                    timeout,
                    params.seed,
                )?),
                format!("command:{cmd}"),
            )
        }
        _ => return Err(Error::invalid("no sampler source given")),
    };
    let report = detect(&train, sampler.as_mut(), &params)?;
    let config = DetectConfig {
        params: &params,
        sampler: label,
        sigma: args.sigma,
        rho: args.rho,
    };
    let mut doc = ReportDocument::new("detect", params.seed, &config, &report)?;
    for (name, digest) in doc_inputs {
        doc = doc.with_input(name, digest);
    }
    println!(
        "cr_hat {:.6} ({} of {} coverage points), {} of {} training points with copy regions",
        report.cr_hat,
        report.covered,
        report.u_used,
        report.positive_regions(),
        report.regions.len()
    );
    emit(doc, args.common.out.as_deref(), started)
}

#[derive(Serialize)]
struct BaselineOutcome {
    report: datacopy::baseline::BaselineReport,
    alpha: f64,
    significant: bool,
}

fn run_baseline(args: BaselineArgs) -> Result<()> {
    let started = Instant::now();
    let mut params: BaselineParams = load_config(args.common.config.as_deref())?;
    if let Some(c) = args.clusters {
        params.c = c;
    }
    if let Some(scope) = args.scope {
        params.scope = match scope {
            ScopeArg::Cluster => DistanceScope::Cluster,
            ScopeArg::Global => DistanceScope::Global,
        };
    }
    if let Some(seed) = args.common.seed {
        params.seed = seed;
    }
    if !(0.0..=1.0).contains(&args.alpha) {
        return Err(Error::invalid(format!(
            "alpha {} outside [0, 1]",
            args.alpha
        )));
    }
    let (train, d_train) = read_input(&args.train)?;
    let (test, d_test) = read_input(&args.test)?;
    let (generated, d_gen) = read_input(&args.generated)?;
    let report = baseline_test(&train, &test, &generated, &params)?;
    let outcome = BaselineOutcome {
        significant: report.significant(args.alpha),
        alpha: args.alpha,
        report,
    };
    println!(
        "min Z {:.4}, p {:.4e}, {}significant at {}",
        outcome.report.min_z,
        outcome.report.p_value,
        if outcome.significant { "" } else { "not " },
        args.alpha
    );
    let doc = ReportDocument::new("baseline", params.seed, &params, &outcome)?
        .with_input("train", d_train)
        .with_input("test", d_test)
        .with_input("generated", d_gen);
    emit(doc, args.common.out.as_deref(), started)
}

#[derive(Serialize)]
struct CalibrationOutcome {
    null: datacopy::calibration::NullDistribution,
    decision: Option<datacopy::calibration::SignificanceDecision>,
}

fn run_calibrate(args: CalibrateArgs) -> Result<()> {
    let started = Instant::now();
    let mut cfg: CalibrateConfig = load_config(args.common.config.as_deref())?;
    args.dist.apply(&mut cfg.dist);
    args.params.apply(&mut cfg.detection);
    if let Some(v) = args.n {
        cfg.n = v;
    }
    if let Some(v) = args.runs {
        cfg.runs = v;
    }
    if let Some(v) = args.alpha {
        cfg.alpha = v;
    }
    if args.inclusive_ties {
        cfg.tie_rule = TieRule::Inclusive;
    }
    if let Some(seed) = args.common.seed {
        cfg.detection.seed = seed;
    }
    cfg.detection.validate()?;
    let p = cfg.dist.build()?;
    let seed = cfg.detection.seed;
    let null = match &args.cache {
        Some(dir) => {
            NullCache::new(dir).get_or_compute(&p, cfg.n, &cfg.detection, cfg.runs, seed)?
        }
        None => null_calibrate(&p, cfg.n, &cfg.detection, cfg.runs, seed)?,
    };
    let decision = match args.observed {
        Some(obs) => Some(decide(p_value(&null, obs, cfg.tie_rule)?, cfg.alpha)?),
        None => None,
    };
    let max = null.values.iter().copied().fold(0.0, f64::max);
    match &decision {
        Some(d) => println!(
            "{} null runs (max {max:.6}); p {:.4}, {}significant at {}",
            null.run_count,
            d.p_value,
            if d.significant { "" } else { "not " },
            d.alpha
        ),
        None => println!("{} null runs, max cr_hat {max:.6}", null.run_count),
    }
    let doc = ReportDocument::new(
        "calibrate",
        seed,
        &cfg,
        &CalibrationOutcome { null, decision },
    )?;
    emit(doc, args.common.out.as_deref(), started)
}

fn run_estimate_k(args: EstimateKArgs) -> Result<()> {
    let started = Instant::now();
    let mut cfg: EstimatorConfig = load_config(args.common.config.as_deref())?;
    if let Some(v) = args.epsilon {
        cfg.epsilon = v;
    }
    if let Some(v) = args.delta {
        cfg.delta = v;
    }
    if args.b.is_some() {
        cfg.b_override = args.b;
    }
    if args.anchor_seed.is_some() {
        cfg.anchor_seed = args.anchor_seed;
    }
    cfg.validate()?;
    let (points, digest) = read_input(&args.train)?;
    let k = estimate_k(&points, &cfg)?;
    println!("k = {k}");
    let doc = ReportDocument::new("estimate-k", cfg.anchor_seed.unwrap_or(0), &cfg, &k)?
        .with_input("train", digest);
    emit(doc, args.common.out.as_deref(), started)
}

fn run_experiment_halfmoons(args: HalfmoonsArgs) -> Result<()> {
    let started = Instant::now();
    let mut cfg = match args.common.config.as_deref() {
        Some(path) => load_config(Some(path))?,
        None if args.quick => HalfmoonsExperiment::quick(),
        None => HalfmoonsExperiment::default(),
    };
    if args.quick {
        cfg.reduced_precision = true;
    }
    if let Some(v) = args.repetitions {
        cfg.repetitions = v;
    }
    if let Some(v) = args.null_runs {
        cfg.null_runs = v;
    }
    if let Some(v) = args.common.seed {
        cfg.seed = v;
    }
    cfg.validate()?;
    let cache = args.cache.as_ref().map(NullCache::new);
    let table = run_halfmoons(&cfg, cache.as_ref())?;
    print!("{}", table.to_text());
    if let Some(path) = &args.csv {
        fs::write(path, table.to_csv())?;
    }
    let doc = ReportDocument::new("experiment-halfmoons", cfg.seed, &cfg, &table)?;
    emit(doc, args.common.out.as_deref(), started)
}

fn run_experiment_kde(args: KdeArgs) -> Result<()> {
    let started = Instant::now();
    let mut cfg: KdeExperiment = load_config(args.common.config.as_deref())?;
    if let Some(v) = args.n {
        cfg.n = v;
    }
    if let Some(v) = args.d {
        cfg.d = v;
    }
    if let Some(v) = args.sigma {
        cfg.sigma = v;
    }
    if let Some(v) = args.kernel {
        cfg.kernel = match v {
            KernelArg::Gaussian => Kernel::Gaussian,
            KernelArg::UniformBall => Kernel::UniformBall,
        };
    }
    if let Some(v) = args.trials {
        cfg.trials = v;
    }
    if let Some(v) = args.common.seed {
        cfg.seed = v;
    }
    let out = run_kde(&cfg)?;
    let hits = out.cr_hats.iter().filter(|&&c| c >= 0.35).count();
    println!(
        "cube side {:.6}; cr_hat >= 0.35 on {hits} of {} trials, median {:.4}",
        out.side,
        out.cr_hats.len(),
        datacopy::calibration::median(&out.cr_hats)?
    );
    let doc = ReportDocument::new("experiment-kde", cfg.seed, &cfg, &out)?;
    emit(doc, args.common.out.as_deref(), started)
}

fn run_experiment_lowerbound(args: LowerBoundArgs) -> Result<()> {
    let started = Instant::now();
    let mut cfg: LowerBoundExperiment = load_config(args.common.config.as_deref())?;
    if let Some(v) = args.kappa {
        cfg.kappa = v;
    }
    if let Some(v) = args.gamma {
        cfg.gamma = v;
    }
    if let Some(v) = args.trials {
        cfg.trials = v;
    }
    if let Some(v) = args.common.seed {
        cfg.seed = v;
    }
    let out = run_lower_bound(&cfg)?;
    let mean = |v: &[f64]| {
        if v.is_empty() {
            f64::NAN
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    println!(
        "{} of {} training sets cover; mean oracle rate {:.6} for A_T (expected {:.6}), {:.6} for A_T'",
        out.covering,
        out.trials,
        mean(&out.rate_a),
        out.expected_rate,
        mean(&out.rate_a_prime)
    );
    let doc = ReportDocument::new("experiment-lowerbound", cfg.seed, &cfg, &out)?;
    emit(doc, args.common.out.as_deref(), started)
}

fn run_sample(args: SampleArgs) -> Result<()> {
    let mut spec = DistSpec::default();
    args.dist.apply(&mut spec);
    let dist = spec.build()?;
    let points = dist.sample(args.n, &mut stream_rng(args.seed, 0));
    let name = serde_json::to_value(spec.name)?;
    let header = format!(
        "{} ({}) n={} seed={}",
        name.as_str().unwrap_or_default(),
        dist.id(),
        args.n,
        args.seed
    );
    let text = format_points(&points, Some(&header));
    match &args.out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    match err.root() {
        Error::Parse { .. }
        | Error::Io(_)
        | Error::Json(_)
        | Error::DimensionMismatch { .. }
        | Error::NonFinite { .. }
        | Error::EmptyPointSet => 2,
        Error::Sampler(_) | Error::Protocol { .. } => 3,
        Error::InvalidParameter(_) | Error::InsufficientData { .. } => 4,
        _ => 1,
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::invalid(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = thread_count(cli.threads)? {
        if n == 0 {
            return Err(Error::invalid("thread count must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::invalid(e.to_string()))?;
    }
    match cli.command {
        Command::Detect(a) => run_detect(a),
        Command::Baseline(a) => run_baseline(a),
        Command::Calibrate(a) => run_calibrate(a),
        Command::EstimateK(a) => run_estimate_k(a),
        Command::ExperimentHalfmoons(a) => run_experiment_halfmoons(a),
        Command::ExperimentKde(a) => run_experiment_kde(a),
        Command::ExperimentLowerbound(a) => run_experiment_lowerbound(a),
        Command::Sample(a) => run_sample(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
