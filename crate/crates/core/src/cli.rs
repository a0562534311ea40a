//! Command-line front end. Exit codes: 0 success, 1 I/O failure,
//! 2 invalid flags / incompatible request / config error, 3 dataset validation.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::conjugate::{posterior_theta1, posterior_theta3, PriorSpec};
use crate::config::parse_study_config;
use crate::distributions::{
    gamma_ln_pdf, lomax_cdf, lomax_pdf, lomax_quantile, sample_bivariate, GammaParams, LomaxParams,
    ModelVariant, PseudoExpParams,
};
use crate::error::{Error, Result};
use crate::fit::{check_compatible, fit, ChainSettings, FitOptions, Method};
use crate::io::{dataset_to_csv, read_dataset, sha256_hex, sig17, write_atomic, Num};
use crate::posterior::FitPrior;
use crate::pseudo_gamma::{
    marginal_theta1, marginal_theta3, posterior_log_kernel, prior_log_density, PseudoGammaPrior,
};
use crate::quadrature::QuadConfig;
use crate::report::{FitReport, RunInfo, TOOL_VERSION};
use crate::rng::seeded;
use crate::study::{export_study, run_study, StudyConfig};
use crate::summary::ParameterId;

/// Kept draws under `--fast`.
pub const FAST_KEPT_DRAWS: usize = 1_000;

#[derive(Debug, Parser)]
#[command(name = "pseudoexp", version, about = "Bayesian inference for the bivariate pseudo-exponential distribution")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a dataset from the model and write it as an `x,y` CSV.
    Simulate(SimulateArgs),
    /// Fit a dataset and write a JSON report.
    Fit(FitArgs),
    /// Predictive quantiles and a (t, pdf, cdf) grid from a fit report.
    Predict(PredictArgs),
    /// Run a seeded simulation study and write the summary table.
    Study(StudyArgs),
    /// Evaluate a prior, joint posterior, or marginal posterior on a grid.
    DensityGrid(DensityGridArgs),
}

fn parse_variant(s: &str) -> std::result::Result<ModelVariant, String> {
    ModelVariant::from_str(s).map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// full, sub1 (theta2 = theta3), or sub2 (theta2 = 0)
    #[arg(long, value_parser = parse_variant)]
    pub model: ModelVariant,
    #[arg(long)]
    pub theta1: f64,
    /// Full model only (for sub1 it may be given only if equal to theta3).
    #[arg(long)]
    pub theta2: Option<f64>,
    #[arg(long)]
    pub theta3: f64,
    #[arg(long)]
    pub n: usize,
    /// Drawn from the clock when omitted; always printed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PriorKind {
    Independent,
    Improper,
    Pseudo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Analytic,
    Quadrature,
    Harm,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Analytic => Method::Analytic,
            MethodArg::Quadrature => Method::Quadrature,
            MethodArg::Harm => Method::Harm,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PriorArgs {
    #[arg(long, value_enum, default_value = "independent")]
    pub prior: PriorKind,
    #[arg(long, default_value_t = 2.0)]
    pub alpha1: f64,
    #[arg(long, default_value_t = 2.0)]
    pub beta1: f64,
    /// Gamma prior on theta2 (full model only, also used with --prior pseudo).
    #[arg(long, default_value_t = 3.0)]
    pub alpha2: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta2: f64,
    #[arg(long, default_value_t = 4.0)]
    pub alpha3: f64,
    #[arg(long, default_value_t = 5.0)]
    pub beta3: f64,
    #[arg(long, default_value_t = 2.0)]
    pub tau1: f64,
    #[arg(long, default_value_t = 4.0)]
    pub tau2: f64,
    #[arg(long, default_value_t = 2.0)]
    pub psi1: f64,
    #[arg(long, default_value_t = 0.0)]
    pub psi2: f64,
    #[arg(long, default_value_t = 3.0)]
    pub psi3: f64,
}

impl PriorArgs {
    pub fn build(&self, variant: ModelVariant) -> Result<FitPrior> {
        let theta2 = match variant {
            ModelVariant::Full => Some(GammaParams::new(self.alpha2, self.beta2)?),
            _ => None,
        };
        Ok(match self.prior {
            PriorKind::Improper => FitPrior::Conjugate {
                spec: PriorSpec::Improper,
            },
            PriorKind::Independent => FitPrior::Conjugate {
                spec: PriorSpec::IndependentGamma {
                    theta1: GammaParams::new(self.alpha1, self.beta1)?,
                    theta2,
                    theta3: GammaParams::new(self.alpha3, self.beta3)?,
                },
            },
            PriorKind::Pseudo => FitPrior::Pseudo {
                prior: PseudoGammaPrior::new(self.tau1, self.tau2, self.psi1, self.psi2, self.psi3)?,
                theta2,
            },
        })
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_parser = parse_variant)]
    pub model: ModelVariant,
    #[command(flatten)]
    pub prior: PriorArgs,
    /// Defaults to analytic for conjugate sub-model fits, quadrature for
    /// pseudo priors with psi2 = 0 on a sub-model, and harm otherwise.
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long, default_value_t = 10_000)]
    pub kept_draws: usize,
    #[arg(long, default_value_t = 10)]
    pub thinning: usize,
    #[arg(long, default_value_t = 10_000)]
    pub burn_in: usize,
    /// Keep 1,000 draws instead of --kept-draws.
    #[arg(long)]
    pub fast: bool,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// JSON report written by `fit`.
    #[arg(long = "fit")]
    pub fit_report: PathBuf,
    /// Comma-separated probabilities; defaults to 0.025,0.5,0.975 when no grid is requested.
    #[arg(long, value_delimiter = ',')]
    pub quantiles: Option<Vec<f64>>,
    /// `start:end:points`
    #[arg(long)]
    pub grid: Option<String>,
    /// Grid CSV path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Quantile JSON path; stdout when omitted.
    #[arg(long)]
    pub quantiles_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    /// Study configuration; built-in sub-model I defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Keep 1,000 draws per chain.
    #[arg(long)]
    pub fast: bool,
    /// Overrides the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridKind {
    Prior,
    Posterior,
    Marginal,
}

#[derive(Debug, Args)]
pub struct DensityGridArgs {
    #[arg(long, value_enum)]
    pub what: GridKind,
    #[arg(long, value_parser = parse_variant, default_value = "sub1")]
    pub model: ModelVariant,
    #[command(flatten)]
    pub prior: PriorArgs,
    /// Dataset for posterior and marginal grids.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Marginal grids only.
    #[arg(long, default_value = "theta1")]
    pub parameter: String,
    /// `lo:hi` for theta1 (or the marginal's parameter).
    #[arg(long)]
    pub range: String,
    /// `lo:hi` for theta3 in joint grids; defaults to --range.
    #[arg(long)]
    pub range2: Option<String>,
    /// Points per axis.
    #[arg(long, default_value_t = 101)]
    pub steps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Maps an error to the process exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => 1,
        Error::Csv(c) if matches!(c.kind(), csv::ErrorKind::Io(_)) => 1,
        Error::Json(j) if j.is_io() => 1,
        Error::Dataset { .. } => 3,
        _ => 2,
    }
}

fn invalid(message: impl Into<String>) -> Error {
    Error::Domain(message.into())
}

/// `lo:hi` with `0 <= lo < hi < inf`.
pub fn parse_range(text: &str) -> Result<(f64, f64)> {
    let bad = || invalid(format!("range must be `lo:hi` with 0 <= lo < hi, got `{text}`"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    if lo >= 0.0 && hi > lo && hi.is_finite() {
        Ok((lo, hi))
    } else {
        Err(bad())
    }
}

/// `start:end:points` with `points >= 2`.
pub fn parse_grid(text: &str) -> Result<(f64, f64, usize)> {
    let bad = || invalid(format!("grid must be `start:end:points` with 0 <= start < end and points >= 2, got `{text}`"));
    let (range, points) = text.rsplit_once(':').ok_or_else(bad)?;
    let (lo, hi) = parse_range(range).map_err(|_| bad())?;
    let points: usize = points.trim().parse().map_err(|_| bad())?;
    if points < 2 {
        return Err(bad());
    }
    Ok((lo, hi, points))
}

/// `points` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let step = (hi - lo) / (points - 1) as f64;
    (0..points)
        .map(|i| if i + 1 == points { hi } else { lo + step * i as f64 })
        .collect()
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<u64> {
    let params = match (args.model, args.theta2) {
        (ModelVariant::Full, Some(t2)) => PseudoExpParams::new(args.theta1, t2, args.theta3)?,
        (ModelVariant::Full, None) => return Err(invalid("--model full requires --theta2")),
        (ModelVariant::SubModelI, Some(t2)) if t2 != args.theta3 => {
            return Err(Error::Constraint(format!(
                "sub-model I fixes theta2 = theta3; got --theta2 {t2} and --theta3 {}",
                args.theta3
            )))
        }
        (ModelVariant::SubModelI, _) => PseudoExpParams::sub_model_one(args.theta1, args.theta3)?,
        (ModelVariant::SubModelII, Some(_)) => {
            return Err(Error::Constraint("sub-model II fixes theta2 = 0; drop --theta2".into()))
        }
        (ModelVariant::SubModelII, None) => PseudoExpParams::sub_model_two(args.theta1, args.theta3)?,
    };
    if args.n == 0 {
        return Err(invalid("--n must be at least 1"));
    }
    let seed = args.seed.unwrap_or_else(|| {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0)
    });
    let sample = sample_bivariate(&params, args.model, args.n, &mut seeded(seed))?;
    write_atomic(&args.out, dataset_to_csv(&sample).as_bytes())?;
    Ok(seed)
}

/// Picks the cheapest exact route for the prior and variant.
pub fn default_method(variant: ModelVariant, prior: &FitPrior) -> Method {
    match prior {
        FitPrior::Conjugate { .. } if variant.is_sub_model() => Method::Analytic,
        FitPrior::Pseudo { prior, .. } if variant.is_sub_model() && prior.is_simple() => Method::Quadrature,
        _ => Method::Harm,
    }
}

pub fn cmd_fit(args: &FitArgs) -> Result<FitReport> {
    let prior = args.prior.build(args.model)?;
    let method = args
        .method
        .map(Method::from)
        .unwrap_or_else(|| default_method(args.model, &prior));
    check_compatible(args.model, &prior, method)?;
    let bytes = fs::read(&args.data)?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| Error::Dataset {
        rows: vec![],
        message: "dataset is not UTF-8".into(),
    })?;
    let sample = crate::io::parse_dataset(&text)?;
    let mut options = FitOptions::new(method, args.seed);
    options.level = args.level;
    options.chain = ChainSettings {
        kept_draws: if args.fast { FAST_KEPT_DRAWS } else { args.kept_draws },
        thinning: args.thinning,
        burn_in: args.burn_in,
    };
    let f = fit(&sample, args.model, &prior, &options)?;
    let report = FitReport::from_fit(
        &f,
        &RunInfo {
            seed: args.seed,
            data: args.data.display().to_string(),
            data_sha256: sha256_hex(&bytes),
            fast: args.fast,
        },
    );
    emit(args.out.as_deref(), &report.to_json())?;
    Ok(report)
}

#[derive(Serialize)]
struct QuantileEntry {
    probability: Num,
    value: Num,
}

#[derive(Serialize)]
struct PredictiveQuantiles {
    shape: Num,
    scale: Num,
    quantiles: Vec<QuantileEntry>,
}

#[derive(Serialize)]
struct QuantileReport {
    schema_version: u32,
    source_config_hash: String,
    x: PredictiveQuantiles,
    y: PredictiveQuantiles,
}

pub fn predictive_grid_csv(x: &LomaxParams, y: &LomaxParams, lo: f64, hi: f64, points: usize) -> String {
    let mut out = String::from("variable,t,pdf,cdf\n");
    for (name, law) in [("x", x), ("y", y)] {
        for t in linspace(lo, hi, points) {
            let _ = writeln!(
                out,
                "{name},{},{},{}",
                sig17(t),
                sig17(lomax_pdf(law, t)),
                sig17(lomax_cdf(law, t))
            );
        }
    }
    out
}

pub fn cmd_predict(args: &PredictArgs) -> Result<()> {
    let report = FitReport::from_json(&fs::read_to_string(&args.fit_report)?)?;
    let (x, y) = report.predictive_laws()?;
    let grid = args.grid.as_deref().map(parse_grid).transpose()?;
    let probs = match (&args.quantiles, grid) {
        (Some(q), _) => Some(q.clone()),
        (None, None) => Some(vec![0.025, 0.5, 0.975]),
        (None, Some(_)) => None,
    };
    if let Some(probs) = probs {
        let table = |law: &LomaxParams| -> Result<PredictiveQuantiles> {
            Ok(PredictiveQuantiles {
                shape: Num(law.shape),
                scale: Num(law.scale),
                quantiles: probs
                    .iter()
                    .map(|&p| {
                        Ok(QuantileEntry {
                            probability: Num(p),
                            value: Num(lomax_quantile(law, p)?),
                        })
                    })
                    .collect::<Result<_>>()?,
            })
        };
        let q = QuantileReport {
            schema_version: crate::report::SCHEMA_VERSION,
            source_config_hash: report.provenance.config_hash.clone(),
            x: table(&x)?,
            y: table(&y)?,
        };
        let mut text = serde_json::to_string_pretty(&q)?;
        text.push('\n');
        emit(args.quantiles_out.as_deref(), &text)?;
    }
    if let Some((lo, hi, points)) = grid {
        emit(args.out.as_deref(), &predictive_grid_csv(&x, &y, lo, hi, points))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct StudyNote {
    n: usize,
    parameter: ParameterId,
    prior: String,
    note: String,
}

#[derive(Serialize)]
struct StudyProvenance {
    schema_version: u32,
    tool_version: &'static str,
    seed: u64,
    config: Option<String>,
    config_sha256: Option<String>,
    fast: bool,
    kept_draws: usize,
    thinning: usize,
    burn_in: usize,
    replications: usize,
    notes: Vec<StudyNote>,
}

/// Path of the provenance file written next to a study table.
pub fn study_provenance_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".provenance.json");
    PathBuf::from(s)
}

pub fn cmd_study(args: &StudyArgs) -> Result<usize> {
    let (mut config, text) = match &args.config {
        Some(p) => {
            let text = fs::read_to_string(p)?;
            (parse_study_config(&text)?, Some(text))
        }
        None => (StudyConfig::new(ModelVariant::SubModelI, 0), None),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if args.fast {
        config.chain.kept_draws = FAST_KEPT_DRAWS;
    }
    let rows = run_study(&config)?;
    export_study(&rows, &args.out)?;
    let notes: Vec<StudyNote> = rows
        .iter()
        .filter_map(|r| {
            r.note.as_ref().map(|note| StudyNote {
                n: r.n,
                parameter: r.parameter,
                prior: r.prior.clone(),
                note: note.clone(),
            })
        })
        .collect();
    for n in &notes {
        eprintln!("warning: n={} {} {}: {}", n.n, n.parameter, n.prior, n.note);
    }
    let prov = StudyProvenance {
        schema_version: crate::report::SCHEMA_VERSION,
        tool_version: TOOL_VERSION,
        seed: config.seed,
        config: args.config.as_ref().map(|p| p.display().to_string()),
        config_sha256: text.as_ref().map(|t| sha256_hex(t.as_bytes())),
        fast: args.fast,
        kept_draws: config.chain.kept_draws,
        thinning: config.chain.thinning,
        burn_in: config.chain.burn_in,
        replications: config.replications,
        notes,
    };
    let mut json = serde_json::to_string_pretty(&prov)?;
    json.push('\n');
    write_atomic(&study_provenance_path(&args.out), json.as_bytes())?;
    Ok(rows.len())
}

enum Surface {
    Normalized(Box<dyn Fn(f64, f64) -> f64>),
    /// Log kernel; the grid is rescaled so its maximum is 1.
    Kernel(Box<dyn Fn(f64, f64) -> f64>),
}

fn conjugate_posteriors(
    spec: &PriorSpec,
    args: &DensityGridArgs,
) -> Result<(GammaParams, GammaParams)> {
    let sample = load_grid_data(args)?;
    let stats = sample.stats();
    Ok((
        posterior_theta1(spec, &stats)?.gamma(),
        posterior_theta3(spec, &stats, args.model)?.gamma(),
    ))
}

fn load_grid_data(args: &DensityGridArgs) -> Result<crate::distributions::BivariateSample> {
    let path = args
        .data
        .as_ref()
        .ok_or_else(|| invalid("posterior and marginal grids need --data"))?;
    read_dataset(path)
}

fn joint_surface(args: &DensityGridArgs, prior: &FitPrior) -> Result<Surface> {
    let variant = args.model;
    match (args.what, prior) {
        (GridKind::Prior, FitPrior::Conjugate { spec: PriorSpec::Improper }) => {
            Err(invalid("the improper prior has no density to grid"))
        }
        (GridKind::Prior, FitPrior::Conjugate { spec: PriorSpec::IndependentGamma { theta1, theta3, .. } }) => {
            let (g1, g3) = (*theta1, *theta3);
            Ok(Surface::Normalized(Box::new(move |a, b| {
                (gamma_ln_pdf(&g1, a) + gamma_ln_pdf(&g3, b)).exp()
            })))
        }
        (GridKind::Prior, FitPrior::Pseudo { prior, .. }) => {
            let p = *prior;
            Ok(Surface::Normalized(Box::new(move |a, b| {
                prior_log_density(&p, a, b).map_or(0.0, f64::exp)
            })))
        }
        (GridKind::Posterior, _) if !variant.is_sub_model() => Err(Error::Incompatible(
            "joint (theta1, theta3) posterior grids need a sub-model".into(),
        )),
        (GridKind::Posterior, FitPrior::Conjugate { spec }) => {
            let (g1, g3) = conjugate_posteriors(spec, args)?;
            Ok(Surface::Normalized(Box::new(move |a, b| {
                (gamma_ln_pdf(&g1, a) + gamma_ln_pdf(&g3, b)).exp()
            })))
        }
        (GridKind::Posterior, FitPrior::Pseudo { prior, theta2 }) => {
            let sample = load_grid_data(args)?;
            let (p, t2) = (*prior, *theta2);
            if p.is_simple() {
                Ok(Surface::Kernel(Box::new(move |a, b| {
                    posterior_log_kernel(&p, Some(&sample), variant, a, b).unwrap_or(f64::NEG_INFINITY)
                })))
            } else {
                Ok(Surface::Kernel(Box::new(move |a, b| {
                    crate::posterior::params_from_point(variant, &[a, b])
                        .and_then(|theta| {
                            crate::pseudo_gamma::general_posterior_log_kernel(
                                &p,
                                t2.as_ref(),
                                &sample,
                                variant,
                                &theta,
                            )
                            .ok()
                        })
                        .unwrap_or(f64::NEG_INFINITY)
                })))
            }
        }
        (GridKind::Marginal, _) => unreachable!("handled by marginal_values"),
    }
}

fn marginal_values(args: &DensityGridArgs, prior: &FitPrior, thetas: &[f64]) -> Result<Vec<f64>> {
    let parameter: ParameterId = args.parameter.parse()?;
    if !args.model.is_sub_model() || parameter == ParameterId::Theta2 {
        return Err(Error::Incompatible(
            "exact marginal grids exist for theta1 and theta3 of a sub-model".into(),
        ));
    }
    match prior {
        FitPrior::Conjugate { spec } => {
            let (g1, g3) = conjugate_posteriors(spec, args)?;
            let g = if parameter == ParameterId::Theta1 { g1 } else { g3 };
            Ok(thetas.iter().map(|&t| crate::distributions::gamma_pdf(&g, t)).collect())
        }
        FitPrior::Pseudo { prior, .. } => {
            if !prior.is_simple() {
                return Err(Error::Incompatible(
                    "marginal grids under a pseudo-gamma prior need psi2 = 0".into(),
                ));
            }
            let sample = load_grid_data(args)?;
            let cfg = QuadConfig::default();
            let m = if parameter == ParameterId::Theta1 {
                marginal_theta1(prior, &sample, args.model, &cfg)?
            } else {
                marginal_theta3(prior, &sample, args.model, &cfg)?
            };
            Ok(thetas.iter().map(|&t| m.pdf(t)).collect())
        }
    }
}

pub fn density_grid_csv(args: &DensityGridArgs) -> Result<String> {
    if args.steps < 2 {
        return Err(invalid("--steps must be at least 2"));
    }
    let (lo, hi) = parse_range(&args.range)?;
    let (lo2, hi2) = match &args.range2 {
        Some(r) => parse_range(r)?,
        None => (lo, hi),
    };
    let prior = args.prior.build(args.model)?;
    let mut out = String::new();
    let _ = writeln!(out, "# what: {:?}", args.what);
    let _ = writeln!(out, "# model: {}", args.model);
    let _ = writeln!(out, "# prior: {}", prior.kind());
    let _ = writeln!(out, "# tool_version: {TOOL_VERSION}");
    let xs = linspace(lo, hi, args.steps);
    if args.what == GridKind::Marginal {
        let values = marginal_values(args, &prior, &xs)?;
        let _ = writeln!(out, "# parameter: {}", args.parameter);
        out.push_str("# normalization: normalized density\n");
        out.push_str("theta,density\n");
        for (t, v) in xs.iter().zip(values) {
            let _ = writeln!(out, "{},{}", sig17(*t), sig17(v));
        }
        return Ok(out);
    }
    let ys = linspace(lo2, hi2, args.steps);
    let surface = joint_surface(args, &prior)?;
    let (values, label) = match surface {
        Surface::Normalized(f) => (
            xs.iter().flat_map(|&a| ys.iter().map(move |&b| (a, b))).map(|(a, b)| f(a, b)).collect::<Vec<_>>(),
            "normalized density",
        ),
        Surface::Kernel(f) => {
            let logs: Vec<f64> = xs.iter().flat_map(|&a| ys.iter().map(move |&b| (a, b))).map(|(a, b)| f(a, b)).collect();
            let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if !max.is_finite() {
                return Err(invalid("the kernel is zero everywhere on the requested grid"));
            }
            (logs.iter().map(|l| (l - max).exp()).collect(), "kernel scaled to maximum 1 on this grid")
        }
    };
    let _ = writeln!(out, "# normalization: {label}");
    out.push_str("theta1,theta3,value\n");
    let mut k = 0;
    for &a in &xs {
        for &b in &ys {
            let _ = writeln!(out, "{},{},{}", sig17(a), sig17(b), sig17(values[k]));
            k += 1;
        }
    }
    Ok(out)
}

pub fn cmd_density_grid(args: &DensityGridArgs) -> Result<()> {
    let text = density_grid_csv(args)?;
    emit(args.out.as_deref(), &text)
}

/// Parses arguments, runs the command, and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a).map(|seed| println!("seed: {seed}")),
        Command::Fit(a) => cmd_fit(a).map(|_| ()),
        Command::Predict(a) => cmd_predict(a),
        Command::Study(a) => cmd_study(a).map(|n| eprintln!("wrote {n} rows")),
        Command::DensityGrid(a) => cmd_density_grid(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
