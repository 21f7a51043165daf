//! `momlab`: fit robust regularized estimators, solve complexity fixed
//! points, check margin conditions, and run the synthetic stress-test lab.
//!
//! Every subcommand reads a JSON config and emits a JSON result on stdout;
//! `lab` additionally writes `rows.csv` / `summary.json` / `config.json`
//! into its output directory and prints one line per acceptance gate.
//!
//! Exit codes: 0 success (and, for `lab`, all gates passed); 1 `lab` ran to
//! completion but some gate failed; 2 invalid config, I/O failure, or a
//! solver error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ndarray::{Array1, Array2, Axis};
use rand::prelude::*;
use serde::{Deserialize, Serialize};

use momlab::datagen::{
    contaminate, generate_design, make_regression_dataset, stream_rng, ContaminationMode, Dataset,
    DesignSpec, NoiseSpec, Truth,
};
use momlab::lab::{self, ExperimentConfig, GateCmp, Scenario};
use momlab::losses::LossSpec;
use momlab::penalties::PenaltySpec;
use momlab::rkhs::{KernelModel, KernelSpec};
use momlab::solvers::{
    fit_mom_minmax, fit_rerm, lepski_select, LepskiConfig, Model, ModelVariant, SolverConfig,
};
use momlab::theory::{
    bernstein_gamma_huber, bernstein_gamma_quantile, elastic_net_r_star, fixed_point_solve,
    gaussian_mean_width_mc, kernel_complexity_bound, phi_ball_radius, rademacher_complexity_mc,
    FixedPointProblem, FixedPointResult, RademacherClass, ThresholdShape, WidthSet,
};
use momlab::{Error, Result};

#[derive(Parser)]
#[command(name = "momlab", version, about = "Robust estimators and their stress-test lab")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit a regularized empirical risk minimizer from a JSON config.
    FitRerm { config: PathBuf },
    /// Fit the minmax median-of-means estimator from a JSON config.
    FitMom { config: PathBuf },
    /// Run the adaptive grid selection over penalty levels.
    Lepski { config: PathBuf },
    /// Solve a complexity fixed point and print its certificate.
    Complexity { config: PathBuf },
    /// Evaluate a local margin (Bernstein) constant for a noise law.
    BernsteinCheck { config: PathBuf },
    /// Generate a synthetic dataset and write it as CSV.
    MakeData {
        config: PathBuf,
        /// Output CSV path (header `x_1..x_p,y,is_outlier`).
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one experiment scenario and write its report files.
    Lab {
        /// One of: rate_scaling, breakdown, lepski_demo, rerm_vs_mom.
        scenario: String,
        /// Experiment config JSON; defaults to the scenario's stock config.
        #[arg(long, conflicts_with = "print_config")]
        config: Option<PathBuf>,
        /// Directory for rows.csv, summary.json, config.json.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the scenario's stock config as JSON and exit.
        #[arg(long)]
        print_config: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Cmd) -> Result<ExitCode> {
    match cmd {
        Cmd::FitRerm { config } => {
            let cfg: FitFileConfig = read_config(&config)?;
            print_json(&run_fit(&cfg, Estimator::Rerm)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::FitMom { config } => {
            let cfg: FitFileConfig = read_config(&config)?;
            print_json(&run_fit(&cfg, Estimator::Mom)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Lepski { config } => {
            let cfg: LepskiFileConfig = read_config(&config)?;
            print_json(&run_lepski(&cfg)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Complexity { config } => {
            let cfg: ComplexityConfig = read_config(&config)?;
            print_json(&run_complexity(&cfg)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::BernsteinCheck { config } => {
            let cfg: BernsteinConfig = read_config(&config)?;
            print_json(&run_bernstein(&cfg)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::MakeData { config, out } => {
            let cfg: SyntheticSpec = read_config(&config)?;
            let data = cfg.build()?;
            data.write_csv(&out)?;
            print_json(&serde_json::json!({
                "path": out,
                "n": data.n(),
                "p": data.p(),
                "outlier_rows": data.outliers.len(),
            }))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Lab { scenario, config, out, print_config } => {
            run_lab(&scenario, config.as_deref(), out.as_deref(), print_config)
        }
    }
}

fn read_config<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Prints one line to stdout. A closed pipe (`momlab ... | head`) is not an
/// error; any other write failure is.
fn print_line(text: &str) -> Result<()> {
    use std::io::{ErrorKind, Write};
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}") {
        Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    print_line(&serde_json::to_string_pretty(value)?)
}

fn sub_seed(seed: u64, tag: u64) -> u64 {
    stream_rng(seed, &[tag]).random::<u64>()
}

// ---------------------------------------------------------------------------
// fit-rerm / fit-mom
// ---------------------------------------------------------------------------

/// Where the sample comes from: a CSV file written by `make-data` (or by
/// hand, same header) or an inline synthetic recipe.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum DataSource {
    Csv(PathBuf),
    Synthetic(SyntheticSpec),
}

impl DataSource {
    fn load(&self) -> Result<Dataset> {
        match self {
            DataSource::Csv(path) => Dataset::read_csv(path)
                .map_err(|e| Error::Config(format!("cannot load dataset {}: {e}", path.display()))),
            DataSource::Synthetic(spec) => spec.build(),
        }
    }
}

/// Synthetic regression sample: `y = f*(x) + noise`, optionally with a
/// fraction of rows replaced by adversarial outliers.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SyntheticSpec {
    n: usize,
    seed: u64,
    design: DesignSpec,
    noise: NoiseSpec,
    truth: TruthSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    contamination: Option<ContaminationSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum TruthSpec {
    Linear { coefficients: Vec<f64> },
    Kernel { coefficients: Vec<f64>, training_inputs: Vec<f64>, kernel: KernelSpec },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ContaminationSpec {
    frac: f64,
    magnitude: f64,
    mode: ContaminationMode,
    /// Defaults to the dataset seed (the corruption stream is tagged apart
    /// from the design and noise streams either way).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

impl SyntheticSpec {
    fn build(&self) -> Result<Dataset> {
        let truth = match &self.truth {
            TruthSpec::Linear { coefficients } => {
                Truth::Linear(Array1::from_vec(coefficients.clone()))
            }
            TruthSpec::Kernel { coefficients, training_inputs, kernel } => {
                Truth::Kernel(KernelModel {
                    coefficients: Array1::from_vec(coefficients.clone()),
                    training_inputs: training_inputs.clone(),
                    kernel: *kernel,
                })
            }
        };
        let clean = make_regression_dataset(&self.design, &self.noise, &truth, self.n, self.seed)?;
        match &self.contamination {
            None => Ok(clean),
            Some(c) => {
                contaminate(&clean, c.frac, c.magnitude, c.mode, c.seed.unwrap_or(self.seed))
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FitFileConfig {
    data: DataSource,
    loss: LossSpec,
    penalty: PenaltySpec,
    lambda: f64,
    /// Required with the squared_hilbert_norm penalty, rejected otherwise.
    #[serde(default)]
    kernel: Option<KernelSpec>,
    /// Block count; fit-mom only.
    #[serde(default)]
    s_blocks: Option<usize>,
    #[serde(default)]
    solver: SolverConfig,
}

#[derive(Debug, Clone, Copy)]
enum Estimator {
    Rerm,
    Mom,
}

#[derive(Debug, Serialize)]
struct FitReport {
    estimator: &'static str,
    n: usize,
    p: usize,
    lambda: f64,
    coefficients: Vec<f64>,
    objective: f64,
    iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    kkt_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    l2_error_vs_truth: Option<f64>,
}

fn run_fit(cfg: &FitFileConfig, which: Estimator) -> Result<FitReport> {
    let data = cfg.data.load()?;
    let (estimator, model) = match which {
        Estimator::Rerm => {
            if cfg.s_blocks.is_some() {
                return Err(Error::Config(
                    "s_blocks is a fit-mom parameter; drop it from a fit-rerm config".into(),
                ));
            }
            let model = fit_rerm(
                &data,
                cfg.loss,
                &cfg.penalty,
                cfg.lambda,
                &cfg.solver,
                cfg.kernel.as_ref(),
            )?;
            ("rerm", model)
        }
        Estimator::Mom => {
            let s = cfg.s_blocks.ok_or_else(|| {
                Error::Config("fit-mom needs s_blocks (number of median-of-means blocks)".into())
            })?;
            let model = fit_mom_minmax(
                &data,
                cfg.loss,
                &cfg.penalty,
                cfg.lambda,
                s,
                &cfg.solver,
                cfg.kernel.as_ref(),
            )?;
            ("mom_minmax", model)
        }
    };
    Ok(FitReport {
        estimator,
        n: data.n(),
        p: data.p(),
        lambda: model.lambda,
        coefficients: model.coefficients().to_vec(),
        objective: model.objective,
        iterations: model.iterations,
        kkt_residual: model.kkt_residual,
        l2_error_vs_truth: l2_error_vs_truth(&model, &data)?,
    })
}

/// Squared population L2 distance to the recorded truth: coefficient
/// distance under an isotropic design for linear fits, evaluation-grid
/// quadrature for kernel fits. `None` when the data carries no truth (CSV
/// sources) or the fitted geometry does not match the recorded truth.
fn l2_error_vs_truth(model: &Model, data: &Dataset) -> Result<Option<f64>> {
    match (&model.variant, &data.truth) {
        (ModelVariant::Linear { coefficients }, Some(Truth::Linear(t_star))) => {
            if coefficients.len() != t_star.len() {
                return Err(Error::DimensionMismatch {
                    expected: t_star.len(),
                    got: coefficients.len(),
                });
            }
            let diff = coefficients - t_star;
            Ok(Some(diff.dot(&diff)))
        }
        (ModelVariant::Kernel(fit), Some(Truth::Kernel(star))) => {
            Ok(Some(lab::kernel_sq_error_on_grid(fit, star, lab::KERNEL_EVAL_GRID)?.0))
        }
        _ => Ok(None),
    }
}

// ---------------------------------------------------------------------------
// lepski
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LepskiFileConfig {
    data: DataSource,
    loss: LossSpec,
    /// Must be an elastic net: the grid's radius oracle is the closed-form
    /// elastic-net fixed point.
    penalty: PenaltySpec,
    /// Upper bound `M >= phi(target)`; the grid spans `2^(1-M) .. 2^(J-M)`.
    m_bound: usize,
    /// Bernstein constant `A*` in the acceptance threshold and the oracle.
    a_star: f64,
    /// Sub-Gaussian norm-equivalence constant fed to the radius oracle.
    b_subg: f64,
    /// Multiplier on the closed-form squared radius; the theory constants
    /// are loose, so 1.0 produces very conservative grids.
    #[serde(default = "default_one")]
    radius_scale: f64,
    #[serde(default)]
    solver: SolverConfig,
}

fn default_one() -> f64 {
    1.0
}

#[derive(Debug, Serialize)]
struct LepskiGridRow {
    level: usize,
    phi: f64,
    lambda: f64,
    radius: f64,
    objective: f64,
    iterations: usize,
    threshold: f64,
    /// Whether this level's own fit sits in its acceptance set.
    member_of_own_level: bool,
}

#[derive(Debug, Serialize)]
struct LepskiReport {
    k_star: usize,
    selected: usize,
    grid_levels: usize,
    lambda: f64,
    coefficients: Vec<f64>,
    objective: f64,
    iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    l2_error_vs_truth: Option<f64>,
    grid: Vec<LepskiGridRow>,
}

fn run_lepski(cfg: &LepskiFileConfig) -> Result<LepskiReport> {
    let alpha = match cfg.penalty {
        PenaltySpec::ElasticNet { alpha } => alpha,
        PenaltySpec::SquaredHilbertNorm => {
            return Err(Error::Config(
                "the lepski subcommand implements the elastic-net grid oracle only".into(),
            ))
        }
    };
    let data = cfg.data.load()?;
    let (n, p) = (data.n(), data.p());
    let (lipschitz, a_star, b_subg, scale) =
        (cfg.loss.lipschitz(), cfg.a_star, cfg.b_subg, cfg.radius_scale);
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Config(format!("radius_scale must be positive, got {scale}")));
    }
    let oracle = move |phi: f64| -> Result<f64> {
        let radii = elastic_net_r_star(n, p, alpha, lipschitz, b_subg, a_star, phi)?;
        Ok((scale * radii.r_star_sq).sqrt())
    };
    let lep = LepskiConfig { m_bound: cfg.m_bound, a_star: cfg.a_star };
    let state = lepski_select(&data, cfg.loss, &cfg.penalty, &lep, &cfg.solver, &oracle)?;

    let grid = state
        .grid
        .iter()
        .zip(state.fitted.iter())
        .enumerate()
        .map(|(idx, (point, model))| {
            let level = idx + 1;
            LepskiGridRow {
                level,
                phi: point.phi,
                lambda: point.lambda,
                radius: point.radius,
                objective: model.objective,
                iterations: model.iterations,
                threshold: state.thresholds[idx],
                member_of_own_level: state.is_member(level, level),
            }
        })
        .collect();
    let chosen = state.f_tilde();
    Ok(LepskiReport {
        k_star: state.k_star,
        selected: state.selected,
        grid_levels: state.grid.len(),
        lambda: chosen.lambda,
        coefficients: chosen.coefficients().to_vec(),
        objective: chosen.objective,
        iterations: chosen.iterations,
        l2_error_vs_truth: l2_error_vs_truth(chosen, &data)?,
        grid,
    })
}

// ---------------------------------------------------------------------------
// complexity
// ---------------------------------------------------------------------------

const TAG_MOM_DESIGN: u64 = 1;
const TAG_MOM_HALF: u64 = 2;
const TAG_MOM_SIGNS_FULL: u64 = 3;
const TAG_MOM_SIGNS_HALF: u64 = 4;

fn default_draws() -> usize {
    400
}

fn default_tol() -> f64 {
    1e-3
}

/// Which localized complexity to solve. All kinds share the bisection and
/// certificate machinery; they differ in the complexity oracle and the
/// threshold shape.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ComplexityConfig {
    /// Identity width oracle `W(r) = r` against the Gaussian-width
    /// threshold; closed form `64 L B A / sqrt(N)`, kept as a calibration
    /// check of the solver itself.
    LinearAnalytic {
        n: usize,
        a: f64,
        lipschitz: f64,
        b_subg: f64,
        #[serde(default = "default_tol")]
        tol: f64,
    },
    /// Monte-Carlo Gaussian mean width of the localization set of an
    /// elastic-net class. The penalty ball of radius `eta (4 + 2/A) phi_star`
    /// is relaxed to the l1 ball `(radius / alpha) B_1`, intersected with
    /// `r B_2`.
    ElasticNet {
        n: usize,
        p: usize,
        alpha: f64,
        a: f64,
        b_subg: f64,
        lipschitz: f64,
        phi_star: f64,
        #[serde(default = "default_draws")]
        draws: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_tol")]
        tol: f64,
    },
    /// Deterministic spectral bound on the kernel-class Rademacher
    /// complexity (reproducing-norm ball of radius `2 sqrt(2 + 1/A)
    /// f_star_norm` intersected with `r`-sphere in L2), scaled back up by
    /// `sqrt(N)` since the bound is on the normalized complexity.
    Kernel {
        n: usize,
        a: f64,
        lipschitz: f64,
        f_star_norm: f64,
        kernel: KernelSpec,
        #[serde(default = "default_tol")]
        tol: f64,
    },
    /// Monte-Carlo Rademacher complexity of an elastic-net class on a drawn
    /// design, with the block-median threshold. The uniform-in-subsets
    /// requirement is approximated by checking the full index set and one
    /// random half: the oracle returns the larger of the full-sample
    /// estimate and the half-sample estimate rescaled by `N / |half|`.
    MomLinear {
        n: usize,
        p: usize,
        alpha: f64,
        a: f64,
        lipschitz: f64,
        phi_star: f64,
        design: DesignSpec,
        #[serde(default = "default_draws")]
        draws: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_tol")]
        tol: f64,
    },
}

#[derive(Debug, Serialize)]
struct ComplexityReport {
    kind: &'static str,
    radius: f64,
    radius_sq: f64,
    a: f64,
    stderr: f64,
    certificate: serde_json::Value,
    inputs: ComplexityConfig,
}

fn certificate_json(result: &FixedPointResult) -> serde_json::Value {
    let side = |pair: (f64, f64)| {
        serde_json::json!({ "complexity": pair.0, "threshold": pair.1 })
    };
    serde_json::json!({
        "at_radius": side(result.certificate.at_radius),
        "at_shrunk": side(result.certificate.at_shrunk),
    })
}

fn en_l1_radius(alpha: f64, a: f64, phi_star: f64) -> Result<f64> {
    PenaltySpec::ElasticNet { alpha }.validate_for_estimation()?;
    if !(a > 0.0 && phi_star > 0.0) {
        return Err(Error::Config("complexity needs a > 0 and phi_star > 0".into()));
    }
    let eta = PenaltySpec::ElasticNet { alpha }.eta();
    Ok(phi_ball_radius(eta, a, phi_star) / alpha)
}

fn run_complexity(cfg: &ComplexityConfig) -> Result<ComplexityReport> {
    let (kind, result) = match cfg {
        ComplexityConfig::LinearAnalytic { n, a, lipschitz, b_subg, tol } => {
            let identity = |r: f64| Ok((r, 0.0));
            let problem = FixedPointProblem {
                complexity: &identity,
                shape: ThresholdShape::GaussianWidth,
                a: *a,
                n: *n,
                lipschitz: *lipschitz,
                subgaussian_b: *b_subg,
                tol: *tol,
            };
            ("linear_analytic", fixed_point_solve(&problem)?)
        }
        ComplexityConfig::ElasticNet { n, p, alpha, a, b_subg, lipschitz, phi_star, draws, seed, tol } => {
            let rho = en_l1_radius(*alpha, *a, *phi_star)?;
            let (p, draws, seed) = (*p, *draws, *seed);
            let width = move |r: f64| {
                gaussian_mean_width_mc(&WidthSet::L1L2 { rho, r, p }, draws, seed)
            };
            let problem = FixedPointProblem {
                complexity: &width,
                shape: ThresholdShape::GaussianWidth,
                a: *a,
                n: *n,
                lipschitz: *lipschitz,
                subgaussian_b: *b_subg,
                tol: *tol,
            };
            ("elastic_net", fixed_point_solve(&problem)?)
        }
        ComplexityConfig::Kernel { n, a, lipschitz, f_star_norm, kernel, tol } => {
            kernel.validate()?;
            if !(*f_star_norm > 0.0) {
                return Err(Error::Config("kernel complexity needs f_star_norm > 0".into()));
            }
            let eigenvalues = kernel.eigenvalues().ok_or_else(|| {
                Error::Config(
                    "kernel complexity needs a declared spectrum; use synthetic_mercer".into(),
                )
            })?;
            let sup_k = kernel.bounded_sup();
            let rho_norm = 2.0 * (2.0 + 1.0 / a).sqrt() * f_star_norm;
            let sqrt_n = (*n as f64).sqrt();
            let bound = move |r: f64| {
                Ok((sqrt_n * kernel_complexity_bound(rho_norm, r, eigenvalues.view(), sup_k), 0.0))
            };
            let problem = FixedPointProblem {
                complexity: &bound,
                shape: ThresholdShape::KernelRademacher,
                a: *a,
                n: *n,
                lipschitz: *lipschitz,
                subgaussian_b: 1.0,
                tol: *tol,
            };
            ("kernel", fixed_point_solve(&problem)?)
        }
        ComplexityConfig::MomLinear { n, p, alpha, a, lipschitz, phi_star, design, draws, seed, tol } => {
            let rho = en_l1_radius(*alpha, *a, *phi_star)?;
            let full = generate_design(design, *n, *p, sub_seed(*seed, TAG_MOM_DESIGN))?;
            let half = random_half(&full, sub_seed(*seed, TAG_MOM_HALF));
            let rescale = *n as f64 / half.nrows() as f64;
            let (draws, seed) = (*draws, *seed);
            let halves = move |r: f64| -> Result<(f64, f64)> {
                let class = RademacherClass::Linear { rho, r, design: full.view() };
                let (full_est, full_se) =
                    rademacher_complexity_mc(&class, draws, sub_seed(seed, TAG_MOM_SIGNS_FULL))?;
                let class = RademacherClass::Linear { rho, r, design: half.view() };
                let (half_est, half_se) =
                    rademacher_complexity_mc(&class, draws, sub_seed(seed, TAG_MOM_SIGNS_HALF))?;
                Ok(if rescale * half_est > full_est {
                    (rescale * half_est, rescale * half_se)
                } else {
                    (full_est, full_se)
                })
            };
            let problem = FixedPointProblem {
                complexity: &halves,
                shape: ThresholdShape::RademacherHalves,
                a: *a,
                n: *n,
                lipschitz: *lipschitz,
                subgaussian_b: 1.0,
                tol: *tol,
            };
            ("mom_linear", fixed_point_solve(&problem)?)
        }
    };
    Ok(ComplexityReport {
        kind,
        radius: result.radius,
        radius_sq: result.radius * result.radius,
        a: result.a,
        stderr: result.mc_stderr,
        certificate: certificate_json(&result),
        inputs: cfg.clone(),
    })
}

/// Ceil(n/2) rows drawn without replacement, kept in ascending row order.
fn random_half(design: &Array2<f64>, seed: u64) -> Array2<f64> {
    let n = design.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut stream_rng(seed, &[]));
    let mut half: Vec<usize> = idx.into_iter().take(n.div_ceil(2)).collect();
    half.sort_unstable();
    design.select(Axis(0), &half)
}

// ---------------------------------------------------------------------------
// bernstein-check
// ---------------------------------------------------------------------------

/// Margin-constant check from closed-form noise laws. The `loss` tag picks
/// the condition: `huber` needs the noise mass of the surviving clipping
/// window, `quantile` the noise density over the localization interval.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "loss", rename_all = "snake_case", deny_unknown_fields)]
enum BernsteinConfig {
    Huber { noise: NoiseSpec, delta: f64, c_prime: f64, radius: f64 },
    Quantile { noise: NoiseSpec, radius: f64 },
}

#[derive(Debug, Serialize)]
struct BernsteinReport {
    gamma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    a_out: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c_prime: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    certificate: serde_json::Value,
    inputs: BernsteinConfig,
}

fn run_bernstein(cfg: &BernsteinConfig) -> Result<BernsteinReport> {
    let check = match cfg {
        BernsteinConfig::Huber { noise, delta, c_prime, radius } => {
            bernstein_gamma_huber(noise, *delta, *c_prime, *radius)?
        }
        BernsteinConfig::Quantile { noise, radius } => bernstein_gamma_quantile(noise, *radius)?,
    };
    Ok(BernsteinReport {
        gamma: check.gamma,
        a_out: check.a_out,
        c_prime: check.c_prime,
        epsilon: check.epsilon,
        certificate: serde_json::json!({
            "holds": check.gamma > 0.0,
            "radius_checked": check.radius_checked,
        }),
        inputs: cfg.clone(),
    })
}

// ---------------------------------------------------------------------------
// lab
// ---------------------------------------------------------------------------

fn run_lab(
    scenario: &str,
    config: Option<&Path>,
    out: Option<&Path>,
    print_config: bool,
) -> Result<ExitCode> {
    let scenario = Scenario::from_name(scenario)?;
    if print_config {
        print_json(&ExperimentConfig::default_for(scenario))?;
        return Ok(ExitCode::SUCCESS);
    }
    let cfg = match config {
        None => ExperimentConfig::default_for(scenario),
        Some(path) => {
            let cfg: ExperimentConfig = read_config(path)?;
            if cfg.scenario != scenario {
                return Err(Error::Config(format!(
                    "config is for scenario {}, command line says {}",
                    cfg.scenario.name(),
                    scenario.name()
                )));
            }
            cfg
        }
    };
    let out = out.ok_or_else(|| Error::Config("lab needs --out <dir> to write reports".into()))?;

    let report = momlab::lab::run_scenario(&cfg)?;
    momlab::lab::write_report(&report, out)?;

    let summary = &report.summary;
    print_line(&format!(
        "scenario {}: {} rows, {} gates",
        summary.scenario,
        report.rows.len(),
        summary.gates.len()
    ))?;
    for g in &summary.gates {
        let cmp = match g.cmp {
            GateCmp::AtMost => "<=",
            GateCmp::AtLeast => ">=",
            GateCmp::Equals => "==",
        };
        let verdict = if g.pass { "PASS" } else { "FAIL" };
        print_line(&format!(
            "  [{verdict}] {}: observed {:.6} {} {:.6}",
            g.name, g.observed, cmp, g.bound
        ))?;
    }
    for f in &summary.failures {
        print_line(&format!("  [cell failure] {f}"))?;
    }
    print_line(&format!("reports written to {}", out.display()))?;
    if summary.all_pass {
        print_line("all gates passed")?;
        Ok(ExitCode::SUCCESS)
    } else {
        print_line("some gates FAILED")?;
        Ok(ExitCode::from(1))
    }
}
