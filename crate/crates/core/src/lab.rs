//! Scenario lab: configured, reproducible experiment runs over the
//! estimator stack, reporting one CSV row per fitted model and a gate
//! summary with hard pass/fail bounds.
//!
//! Four scenarios are built in:
//!
//! * `rate_scaling`: kernel median-regression error versus sample size on
//!   heavy-tailed data; the headline statistic is the log-log slope of the
//!   mean squared error curve, which must land in a declared band.
//! * `breakdown`: linear Huber + elastic net under adversarial row
//!   corruption; the full-sample estimator must degrade by a large factor
//!   while the median-of-means estimator stays near its clean error.
//! * `lepski_demo`: the grid-selection rule on clean Gaussian linear data;
//!   the selected model must track the best grid model.
//! * `rerm_vs_mom`: both estimator families across sample sizes under
//!   heavy-tailed and Gaussian noise arms.
//!
//! Conventions shared by every scenario:
//!
//! * The `l2_error` column is the squared parameter distance: for linear
//!   models `||t_hat - t*||_2^2` exactly, for kernel models the mean of
//!   `(f_hat - f*)^2` over a fixed equispaced grid of
//!   [`KERNEL_EVAL_GRID`] midpoints on `[0, 1]` (a quadrature of the
//!   squared `L_2(mu)` distance under the uniform design).
//! * Gate ratios are quoted on unsquared errors: root-mean of the squared
//!   column, so a "10x" gate means a tenfold error norm inflation.
//! * `excess_risk` is the held-out mean loss of the fit minus that of the
//!   generating truth on [`HOLDOUT_SAMPLES`] fresh draws per replicate.
//! * Cells (grid points of a scenario) run concurrently; each cell buffers
//!   its rows and a single writer emits them in deterministic
//!   (cell, replicate) order. Reruns with the same config reproduce
//!   `rows.csv` byte for byte except the measured `wall_ms` column, and
//!   `summary.json` byte for byte (it contains no timings).
//! * A solver failure aborts its cell; the error is recorded in the
//!   summary and trips the `no_cell_failures` gate.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use ndarray::Array1;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{
    contaminate, make_regression_dataset, stream_rng, ContaminationMode, Dataset, DesignSpec,
    NoiseSpec, Truth,
};
use crate::linalg;
use crate::losses::{empirical_risk, LossSpec};
use crate::penalties::PenaltySpec;
use crate::rkhs::{KernelModel, KernelSpec};
use crate::solvers::{
    fit_mom_minmax, fit_rerm, lepski_select, LepskiConfig, Model, ModelVariant, SolverConfig,
};
use crate::theory::{elastic_net_r_star, kernel_r_bar, quantile_gamma_remark};
use crate::{Error, Result};

/// Held-out draws behind every excess-risk estimate.
pub const HOLDOUT_SAMPLES: usize = 100_000;

/// Evaluation grid size for kernel L2 errors (equispaced midpoints on [0,1]).
pub const KERNEL_EVAL_GRID: usize = 2000;

/// Exact `rows.csv` header, in column order.
pub const ROWS_HEADER: &str =
    "scenario,cell,rep,N,p,frac,S,lambda,estimator,l2_error,excess_risk,iters,wall_ms";

// Seed-stream tags; combined with the scenario tag, cell index, and
// replicate index they give every random object its own stream.
const TAG_TRUTH: u64 = 1;
const TAG_DATA: u64 = 2;
const TAG_CONTAM: u64 = 3;
const TAG_SOLVER: u64 = 4;
const TAG_HOLDOUT: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    RateScaling,
    Breakdown,
    LepskiDemo,
    RermVsMom,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::RateScaling => "rate_scaling",
            Scenario::Breakdown => "breakdown",
            Scenario::LepskiDemo => "lepski_demo",
            Scenario::RermVsMom => "rerm_vs_mom",
        }
    }

    pub fn from_name(name: &str) -> Result<Scenario> {
        match name {
            "rate_scaling" => Ok(Scenario::RateScaling),
            "breakdown" => Ok(Scenario::Breakdown),
            "lepski_demo" => Ok(Scenario::LepskiDemo),
            "rerm_vs_mom" => Ok(Scenario::RermVsMom),
            other => Err(Error::config(format!(
                "unknown scenario '{other}' (expected rate_scaling, breakdown, lepski_demo, \
                 or rerm_vs_mom)"
            ))),
        }
    }

    fn tag(&self) -> u64 {
        match self {
            Scenario::RateScaling => 11,
            Scenario::Breakdown => 12,
            Scenario::LepskiDemo => 13,
            Scenario::RermVsMom => 14,
        }
    }
}

/// Constants fed to the closed-form radius and selection-rule machinery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryInputs {
    /// Margin constant of the lower-curvature condition.
    pub a: f64,
    /// Subgaussian design constant.
    pub b_subg: f64,
    /// Grid exponent bound of the selection rule (`phi_j = 2^(j - m_bound)`).
    pub m_bound: usize,
}

/// Full description of a scenario run. `default_for` gives the stock
/// parameterization of each scenario; config files must spell out every
/// field (the CLI has a flag to print a stock config for editing).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    /// Sample sizes. Scenarios with a single size read the first entry.
    pub n_grid: Vec<usize>,
    /// Outlier fractions (breakdown scenario).
    pub fractions: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    /// Input dimension of linear scenarios; kernel scenarios use scalar
    /// inputs and log `p = 1`.
    pub p: usize,
    /// Block count for the fixed-block scenarios (`rerm_vs_mom`); the
    /// breakdown scenario derives its count from the outlier budget.
    pub s_blocks: usize,
    pub loss: LossSpec,
    pub penalty: PenaltySpec,
    pub kernel: Option<KernelSpec>,
    pub noise: NoiseSpec,
    pub outlier_magnitude: f64,
    /// Scale on the per-scenario regularization rule: `rate_scaling` uses
    /// `lambda = scale * N^(-1/(1+p_decay))`, the selection demo multiplies
    /// the closed-form squared radius, the linear scenarios use
    /// `lambda = scale * sqrt(p / N)`.
    pub lambda_scale: f64,
    pub rerm_iters: usize,
    pub mom_iters: usize,
    pub step_scale: f64,
    pub theory: TheoryInputs,
}

impl ExperimentConfig {
    pub fn default_for(scenario: Scenario) -> ExperimentConfig {
        match scenario {
            Scenario::RateScaling => ExperimentConfig {
                scenario,
                n_grid: vec![256, 512, 1024, 2048, 4096, 8192],
                fractions: Vec::new(),
                replicates: 5,
                seed: 20240,
                p: 1,
                s_blocks: 0,
                loss: LossSpec::Quantile { tau: 0.5 },
                penalty: PenaltySpec::SquaredHilbertNorm,
                kernel: Some(KernelSpec::SyntheticMercer {
                    beta: 1.0,
                    p_decay: 0.5,
                    k_max: 512,
                }),
                noise: NoiseSpec::Cauchy,
                outlier_magnitude: 1e6,
                lambda_scale: 1.0,
                rerm_iters: 600,
                mom_iters: 2000,
                step_scale: 8.0,
                theory: TheoryInputs { a: 1.0, b_subg: 1.0, m_bound: 4 },
            },
            Scenario::Breakdown => ExperimentConfig {
                scenario,
                n_grid: vec![2000],
                fractions: vec![0.0, 0.05],
                replicates: 5,
                seed: 3111,
                p: 20,
                s_blocks: 0,
                loss: LossSpec::Huber { delta: 2.0 },
                penalty: PenaltySpec::ElasticNet { alpha: 0.5 },
                kernel: None,
                noise: NoiseSpec::Gaussian { sigma: 0.5 },
                outlier_magnitude: 1e6,
                // lambda = 0.1 * sqrt(20 / 2000) = 0.01
                lambda_scale: 0.1,
                rerm_iters: 2000,
                mom_iters: 3000,
                step_scale: 1.0,
                theory: TheoryInputs { a: 1.0, b_subg: 1.0, m_bound: 4 },
            },
            Scenario::LepskiDemo => ExperimentConfig {
                scenario,
                n_grid: vec![400],
                fractions: Vec::new(),
                replicates: 5,
                seed: 4711,
                p: 30,
                s_blocks: 0,
                loss: LossSpec::Huber { delta: 2.0 },
                penalty: PenaltySpec::ElasticNet { alpha: 0.5 },
                kernel: None,
                noise: NoiseSpec::Gaussian { sigma: 0.5 },
                outlier_magnitude: 1e6,
                lambda_scale: 0.005,
                rerm_iters: 1500,
                mom_iters: 2000,
                step_scale: 1.0,
                theory: TheoryInputs { a: 1.0, b_subg: 1.0, m_bound: 4 },
            },
            Scenario::RermVsMom => ExperimentConfig {
                scenario,
                n_grid: vec![250, 500, 1000, 2000],
                fractions: Vec::new(),
                replicates: 10,
                seed: 90210,
                p: 10,
                s_blocks: 21,
                loss: LossSpec::Quantile { tau: 0.5 },
                penalty: PenaltySpec::ElasticNet { alpha: 0.5 },
                kernel: None,
                noise: NoiseSpec::Cauchy,
                outlier_magnitude: 1e6,
                lambda_scale: 0.1,
                rerm_iters: 1500,
                mom_iters: 2000,
                step_scale: 1.0,
                theory: TheoryInputs { a: 1.0, b_subg: 1.0, m_bound: 4 },
            },
        }
    }

    fn validate_common(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::config("replicates must be >= 1"));
        }
        if self.n_grid.is_empty() {
            return Err(Error::config("n_grid must be nonempty"));
        }
        if self.n_grid.iter().any(|&n| n == 0) {
            return Err(Error::config("sample sizes must be >= 1"));
        }
        if self.p == 0 {
            return Err(Error::config("p must be >= 1"));
        }
        if !(self.lambda_scale.is_finite() && self.lambda_scale > 0.0) {
            return Err(Error::config(format!(
                "lambda_scale must be positive, got {}",
                self.lambda_scale
            )));
        }
        if self.rerm_iters == 0 {
            return Err(Error::config("rerm_iters must be >= 1"));
        }
        self.loss.validate()?;
        self.penalty.validate_for_estimation()?;
        if let Some(k) = &self.kernel {
            k.validate()?;
        }
        if !(self.theory.a.is_finite() && self.theory.a > 0.0)
            || !(self.theory.b_subg.is_finite() && self.theory.b_subg > 0.0)
        {
            return Err(Error::config("theory constants a and b_subg must be positive"));
        }
        Ok(())
    }
}

/// One fitted model's report line. Serialization order matches
/// [`ROWS_HEADER`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scenario: String,
    pub cell: String,
    pub rep: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub p: usize,
    pub frac: f64,
    #[serde(rename = "S")]
    pub s: usize,
    pub lambda: f64,
    pub estimator: String,
    pub l2_error: f64,
    pub excess_risk: f64,
    pub iters: usize,
    pub wall_ms: u64,
}

impl ReportRow {
    fn check_finite(&self) -> Result<()> {
        for (name, v) in [
            ("frac", self.frac),
            ("lambda", self.lambda),
            ("l2_error", self.l2_error),
            ("excess_risk", self.excess_risk),
        ] {
            if !v.is_finite() {
                return Err(Error::Solver {
                    message: format!(
                        "non-finite {name} ({v}) in report row {}/{} rep {}",
                        self.cell, self.estimator, self.rep
                    ),
                    iterations: self.iters,
                    trace: Vec::new(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateCmp {
    AtMost,
    AtLeast,
    Equals,
}

/// One pass/fail bound of a scenario. `pass` is false whenever `observed`
/// is NaN (a missing aggregate counts against the run).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateResult {
    pub name: String,
    pub observed: f64,
    pub cmp: GateCmp,
    pub bound: f64,
    pub pass: bool,
}

fn gate(name: &str, observed: f64, cmp: GateCmp, bound: f64) -> GateResult {
    let pass = match cmp {
        GateCmp::AtMost => observed <= bound,
        GateCmp::AtLeast => observed >= bound,
        GateCmp::Equals => observed == bound,
    };
    GateResult { name: name.to_string(), observed, cmp, bound, pass }
}

/// Aggregates, gates, and failure records of one scenario run. Contains no
/// timings, so serializing it is byte-stable across reruns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabSummary {
    pub scenario: String,
    pub all_pass: bool,
    pub gates: Vec<GateResult>,
    pub metrics: BTreeMap<String, f64>,
    pub failures: Vec<String>,
}

/// Everything a scenario run produces.
#[derive(Debug)]
pub struct LabReport {
    pub config: ExperimentConfig,
    pub rows: Vec<ReportRow>,
    pub summary: LabSummary,
}

/// Runs the scenario named in the config.
pub fn run_scenario(cfg: &ExperimentConfig) -> Result<LabReport> {
    cfg.validate_common()?;
    match cfg.scenario {
        Scenario::RateScaling => run_rate_scaling(cfg),
        Scenario::Breakdown => run_breakdown(cfg),
        Scenario::LepskiDemo => run_lepski_demo(cfg),
        Scenario::RermVsMom => run_rerm_vs_mom(cfg),
    }
}

/// Writes `rows.csv`, `summary.json`, and the resolved `config.json` into
/// `out_dir` (created if missing).
pub fn write_report(report: &LabReport, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    let mut wtr = csv::Writer::from_path(out_dir.join("rows.csv"))?;
    for row in &report.rows {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    let mut summary = serde_json::to_string_pretty(&report.summary)?;
    summary.push('\n');
    fs::write(out_dir.join("summary.json"), summary)?;
    let mut config = serde_json::to_string_pretty(&report.config)?;
    config.push('\n');
    fs::write(out_dir.join("config.json"), config)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// shared machinery

fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    stream_rng(seed, tags).random::<u64>()
}

/// Unit-norm Gaussian direction shared by all cells of a linear scenario.
fn unit_truth(p: usize, seed: u64) -> Array1<f64> {
    let mut rng = stream_rng(seed, &[TAG_TRUTH]);
    let mut t = Array1::<f64>::from_shape_fn(p, |_| StandardNormal.sample(&mut rng));
    let norm = t.dot(&t).sqrt();
    if norm > 0.0 {
        t /= norm;
    } else {
        t[0] = 1.0;
    }
    t
}

fn truth_predictions(truth: &Truth, data: &Dataset) -> Result<Array1<f64>> {
    match truth {
        Truth::Linear(t_star) => Ok(data.inputs.dot(t_star)),
        Truth::Kernel(model) => model.predict(&data.scalar_inputs()?),
    }
}

/// Held-out mean loss of the fit minus that of the truth, on `held`.
fn excess_risk_on(model: &Model, truth: &Truth, loss: LossSpec, held: &Dataset) -> Result<f64> {
    let fit_preds = model.predictions_on(held)?;
    let star_preds = truth_predictions(truth, held)?;
    let fit_risk = empirical_risk(loss, fit_preds.view(), held.targets.view())?;
    let star_risk = empirical_risk(loss, star_preds.view(), held.targets.view())?;
    Ok(fit_risk - star_risk)
}

/// Exact squared parameter distance for a linear fit.
fn linear_sq_error(model: &Model, t_star: &Array1<f64>) -> Result<f64> {
    match &model.variant {
        ModelVariant::Linear { coefficients } => {
            if coefficients.len() != t_star.len() {
                return Err(Error::DimensionMismatch {
                    expected: t_star.len(),
                    got: coefficients.len(),
                });
            }
            let diff = coefficients - t_star;
            Ok(diff.dot(&diff))
        }
        ModelVariant::Kernel(_) => {
            Err(Error::config("linear_sq_error called on a kernel model"))
        }
    }
}

/// Mean and standard error of `(f - g)^2` over `grid` equispaced midpoints
/// of `[0, 1]`; the mean is the reported squared kernel L2 error.
pub fn kernel_sq_error_on_grid(
    model: &KernelModel,
    truth: &KernelModel,
    grid: usize,
) -> Result<(f64, f64)> {
    if grid < 2 {
        return Err(Error::domain("evaluation grid needs at least 2 points"));
    }
    let xs: Vec<f64> = (0..grid).map(|i| (i as f64 + 0.5) / grid as f64).collect();
    let fit = model.predict(&xs)?;
    let star = truth.predict(&xs)?;
    let sq: Vec<f64> = fit.iter().zip(star.iter()).map(|(a, b)| (a - b) * (a - b)).collect();
    Ok(linalg::mean_stderr(&sq))
}

/// Least-squares slope of `ln(mean)` against `ln(n)`.
fn log_log_slope(ns: &[usize], means: &[f64]) -> f64 {
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = means.iter().map(|&m| m.ln()).collect();
    let k = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / k;
    let ybar = ys.iter().sum::<f64>() / k;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys.iter()) {
        num += (x - xbar) * (y - ybar);
        den += (x - xbar) * (x - xbar);
    }
    num / den
}

/// Mean of `l2_error` over rows matching a (cell, estimator) pair; NaN when
/// the group is empty (which fails any gate it feeds).
fn mean_l2(rows: &[ReportRow], cell: &str, estimator: &str) -> f64 {
    let vals: Vec<f64> = rows
        .iter()
        .filter(|r| r.cell == cell && r.estimator == estimator)
        .map(|r| r.l2_error)
        .collect();
    if vals.is_empty() {
        return f64::NAN;
    }
    vals.iter().sum::<f64>() / vals.len() as f64
}

/// Counts adjacent increases in a mean-error sequence (a monotone decay has
/// zero).
fn count_inversions(means: &[f64]) -> usize {
    means.windows(2).filter(|w| w[1] > w[0]).count()
}

type CellOutput = (Vec<ReportRow>, BTreeMap<String, f64>);

/// Runs `cell_fn` over all cell indices concurrently and reassembles rows
/// in deterministic cell order (rows inside a cell are already in replicate
/// order). Failed cells contribute a failure record instead of rows.
fn run_cells<F>(n_cells: usize, cell_fn: F) -> (Vec<ReportRow>, BTreeMap<String, f64>, Vec<String>)
where
    F: Fn(usize) -> Result<CellOutput> + Sync,
{
    let mut outputs: Vec<(usize, Result<CellOutput>)> =
        (0..n_cells).into_par_iter().map(|i| (i, cell_fn(i))).collect();
    outputs.sort_by_key(|(i, _)| *i);
    let mut rows = Vec::new();
    let mut metrics = BTreeMap::new();
    let mut failures = Vec::new();
    for (_, out) in outputs {
        match out {
            Ok((cell_rows, cell_metrics)) => {
                rows.extend(cell_rows);
                metrics.extend(cell_metrics);
            }
            Err(err) => failures.push(err.to_string()),
        }
    }
    (rows, metrics, failures)
}

fn finish_summary(
    scenario: Scenario,
    mut gates: Vec<GateResult>,
    metrics: BTreeMap<String, f64>,
    failures: Vec<String>,
) -> LabSummary {
    gates.push(gate("no_cell_failures", failures.len() as f64, GateCmp::AtMost, 0.0));
    let all_pass = gates.iter().all(|g| g.pass);
    LabSummary { scenario: scenario.name().to_string(), all_pass, gates, metrics, failures }
}

fn cell_context(err: Error, cell: &str, rep: usize) -> Error {
    Error::config(format!("cell {cell} rep {rep}: {err}"))
}

// ---------------------------------------------------------------------------
// rate_scaling

fn run_rate_scaling(cfg: &ExperimentConfig) -> Result<LabReport> {
    let scen = Scenario::RateScaling;
    let kernel = cfg
        .kernel
        .as_ref()
        .ok_or_else(|| Error::config("rate_scaling needs a kernel spec"))?;
    let KernelSpec::SyntheticMercer { p_decay, beta, .. } = *kernel else {
        return Err(Error::config(
            "rate_scaling needs the factorized spectral kernel (synthetic_mercer)",
        ));
    };
    if cfg.n_grid.len() < 2 {
        return Err(Error::config("rate_scaling needs at least two sample sizes"));
    }
    if !matches!(cfg.penalty, PenaltySpec::SquaredHilbertNorm) {
        return Err(Error::config("rate_scaling uses the squared-Hilbert-norm penalty"));
    }

    // Unit-norm truth: a single scaled kernel section, so the target sits on
    // the sphere of the hypothesis space.
    let anchor = 0.3;
    let k_anchor = kernel.eval(anchor, anchor)?;
    let truth_model = KernelModel {
        coefficients: Array1::from_vec(vec![k_anchor.sqrt().recip()]),
        training_inputs: vec![anchor],
        kernel: kernel.clone(),
    };
    let truth = Truth::Kernel(truth_model.clone());

    let cell_fn = |ci: usize| -> Result<CellOutput> {
        let n = cfg.n_grid[ci];
        let cell = format!("N{n}");
        let lambda = cfg.lambda_scale * (n as f64).powf(-1.0 / (1.0 + p_decay));
        let mut rows = Vec::with_capacity(cfg.replicates);
        let mut metrics = BTreeMap::new();
        for rep in 0..cfg.replicates {
            let ctx = |e| cell_context(e, &cell, rep);
            let tags = |purpose: u64| [scen.tag(), ci as u64, rep as u64, purpose];
            let data = make_regression_dataset(
                &DesignSpec::UniformUnit,
                &cfg.noise,
                &truth,
                n,
                derive_seed(cfg.seed, &tags(TAG_DATA)),
            )
            .map_err(ctx)?;
            let solver = SolverConfig {
                max_iters: cfg.rerm_iters,
                step_scale: cfg.step_scale,
                seed: derive_seed(cfg.seed, &tags(TAG_SOLVER)),
                ..SolverConfig::default()
            };
            let start = Instant::now();
            let model =
                fit_rerm(&data, cfg.loss, &cfg.penalty, lambda, &solver, Some(kernel))
                    .map_err(ctx)?;
            let wall_ms = start.elapsed().as_millis() as u64;
            let ModelVariant::Kernel(fit) = &model.variant else {
                return Err(Error::config("kernel fit returned a linear model"));
            };
            let (l2_error, _) =
                kernel_sq_error_on_grid(fit, &truth_model, KERNEL_EVAL_GRID).map_err(ctx)?;
            let held = make_regression_dataset(
                &DesignSpec::UniformUnit,
                &cfg.noise,
                &truth,
                HOLDOUT_SAMPLES,
                derive_seed(cfg.seed, &tags(TAG_HOLDOUT)),
            )
            .map_err(ctx)?;
            let excess_risk = excess_risk_on(&model, &truth, cfg.loss, &held).map_err(ctx)?;
            let row = ReportRow {
                scenario: scen.name().to_string(),
                cell: cell.clone(),
                rep,
                n,
                p: 1,
                frac: 0.0,
                s: 0,
                lambda,
                estimator: "rerm".to_string(),
                l2_error,
                excess_risk,
                iters: model.iterations,
                wall_ms,
            };
            row.check_finite().map_err(ctx)?;
            rows.push(row);
        }
        // Log both the rule actually used and the conservative closed-form
        // recommendation (squared radius over unit penalty strength).
        let gamma = quantile_gamma_remark(1.0, kernel.sup_norm_factor());
        let radii =
            kernel_r_bar(4.0 / gamma, beta, cfg.loss.lipschitz(), p_decay, 1.0, n)?;
        metrics.insert(format!("lambda_used_{cell}"), lambda);
        metrics.insert(format!("lambda_theory_{cell}"), radii.r_tilde_sq);
        Ok((rows, metrics))
    };

    let (rows, mut metrics, failures) = run_cells(cfg.n_grid.len(), cell_fn);

    let mut means = Vec::with_capacity(cfg.n_grid.len());
    for &n in &cfg.n_grid {
        let m = mean_l2(&rows, &format!("N{n}"), "rerm");
        metrics.insert(format!("mean_sq_l2_N{n}"), m);
        means.push(m);
    }
    let slope = log_log_slope(&cfg.n_grid, &means);
    metrics.insert("slope".to_string(), slope);

    let gates = vec![
        gate("rate_slope_at_least", slope, GateCmp::AtLeast, -1.05),
        gate("rate_slope_at_most", slope, GateCmp::AtMost, -0.35),
    ];
    Ok(LabReport {
        config: cfg.clone(),
        rows,
        summary: finish_summary(scen, gates, metrics, failures),
    })
}

// ---------------------------------------------------------------------------
// breakdown

/// Block count from the outlier budget: a bit over twice the corrupted rows
/// (`ceil(7 |O| / 3) + 1`), so corrupted blocks stay a strict minority; a
/// clean sample degenerates to the single-block (full-sample) estimator.
pub fn blocks_for_outliers(outliers: usize) -> usize {
    (7 * outliers).div_ceil(3) + 1
}

fn run_breakdown(cfg: &ExperimentConfig) -> Result<LabReport> {
    let scen = Scenario::Breakdown;
    if cfg.fractions.is_empty() {
        return Err(Error::config("breakdown needs at least one outlier fraction"));
    }
    if !cfg.fractions.iter().any(|&f| f == 0.0) {
        return Err(Error::config("breakdown needs the clean (0.0) fraction as baseline"));
    }
    if !matches!(cfg.penalty, PenaltySpec::ElasticNet { .. }) {
        return Err(Error::config("breakdown is a linear scenario; use elastic_net"));
    }
    if cfg.mom_iters == 0 {
        return Err(Error::config("mom_iters must be >= 1"));
    }
    let n = cfg.n_grid[0];
    let p = cfg.p;
    let t_star = unit_truth(p, derive_seed(cfg.seed, &[scen.tag()]));
    let truth = Truth::Linear(t_star.clone());
    let lambda = cfg.lambda_scale * (p as f64 / n as f64).sqrt();

    let cell_fn = |ci: usize| -> Result<CellOutput> {
        let frac = cfg.fractions[ci];
        let cell = format!("frac_{frac}");
        let outliers = (frac * n as f64).floor() as usize;
        let s_mom = blocks_for_outliers(outliers);
        let mut rows = Vec::with_capacity(2 * cfg.replicates);
        for rep in 0..cfg.replicates {
            let ctx = |e| cell_context(e, &cell, rep);
            let tags = |purpose: u64| [scen.tag(), ci as u64, rep as u64, purpose];
            let clean = make_regression_dataset(
                &DesignSpec::GaussianIso,
                &cfg.noise,
                &truth,
                n,
                derive_seed(cfg.seed, &tags(TAG_DATA)),
            )
            .map_err(ctx)?;
            let data = contaminate(
                &clean,
                frac,
                cfg.outlier_magnitude,
                ContaminationMode::Both,
                derive_seed(cfg.seed, &tags(TAG_CONTAM)),
            )
            .map_err(ctx)?;
            let held = make_regression_dataset(
                &DesignSpec::GaussianIso,
                &cfg.noise,
                &truth,
                HOLDOUT_SAMPLES,
                derive_seed(cfg.seed, &tags(TAG_HOLDOUT)),
            )
            .map_err(ctx)?;

            for (estimator, s_col) in [("rerm", 0), ("mom", s_mom)] {
                let solver = SolverConfig {
                    max_iters: if estimator == "rerm" { cfg.rerm_iters } else { cfg.mom_iters },
                    step_scale: cfg.step_scale,
                    seed: derive_seed(cfg.seed, &tags(TAG_SOLVER)),
                    ..SolverConfig::default()
                };
                let start = Instant::now();
                let model = if estimator == "rerm" {
                    fit_rerm(&data, cfg.loss, &cfg.penalty, lambda, &solver, None)
                } else {
                    fit_mom_minmax(&data, cfg.loss, &cfg.penalty, lambda, s_mom, &solver, None)
                }
                .map_err(ctx)?;
                let wall_ms = start.elapsed().as_millis() as u64;
                let row = ReportRow {
                    scenario: scen.name().to_string(),
                    cell: cell.clone(),
                    rep,
                    n,
                    p,
                    frac,
                    s: s_col,
                    lambda,
                    estimator: estimator.to_string(),
                    l2_error: linear_sq_error(&model, &t_star).map_err(ctx)?,
                    excess_risk: excess_risk_on(&model, &truth, cfg.loss, &held)
                        .map_err(ctx)?,
                    iters: model.iterations,
                    wall_ms,
                };
                row.check_finite().map_err(ctx)?;
                rows.push(row);
            }
        }
        Ok((rows, BTreeMap::new()))
    };

    let (rows, mut metrics, failures) = run_cells(cfg.fractions.len(), cell_fn);

    let clean_cell = "frac_0".to_string();
    let clean_rerm = mean_l2(&rows, &clean_cell, "rerm");
    let clean_mom = mean_l2(&rows, &clean_cell, "mom");
    for &frac in &cfg.fractions {
        let cell = format!("frac_{frac}");
        metrics.insert(format!("mean_sq_l2_{cell}_rerm"), mean_l2(&rows, &cell, "rerm"));
        metrics.insert(format!("mean_sq_l2_{cell}_mom"), mean_l2(&rows, &cell, "mom"));
    }

    // Unsquared (root-mean-square) error ratios against the clean
    // full-sample baseline; gates take the worst contaminated fraction.
    let mut worst_rerm_ratio = f64::INFINITY;
    let mut worst_mom_ratio: f64 = 0.0;
    for &frac in cfg.fractions.iter().filter(|&&f| f > 0.0) {
        let cell = format!("frac_{frac}");
        let rerm_ratio = (mean_l2(&rows, &cell, "rerm") / clean_rerm).sqrt();
        let mom_ratio = (mean_l2(&rows, &cell, "mom") / clean_rerm).sqrt();
        metrics.insert(format!("rms_ratio_rerm_{cell}"), rerm_ratio);
        metrics.insert(format!("rms_ratio_mom_{cell}"), mom_ratio);
        worst_rerm_ratio = worst_rerm_ratio.min(rerm_ratio);
        worst_mom_ratio = worst_mom_ratio.max(mom_ratio);
    }
    if cfg.fractions.iter().all(|&f| f == 0.0) {
        worst_rerm_ratio = f64::NAN;
        worst_mom_ratio = f64::NAN;
    }
    let clean_ratio = (clean_mom / clean_rerm).sqrt();
    let clean_spread = clean_ratio.max(clean_ratio.recip());
    metrics.insert("rms_ratio_clean_mom".to_string(), clean_ratio);

    let gates = vec![
        gate("contaminated_rerm_degrades_10x", worst_rerm_ratio, GateCmp::AtLeast, 10.0),
        gate("contaminated_mom_within_3x_clean", worst_mom_ratio, GateCmp::AtMost, 3.0),
        gate("clean_mom_rerm_within_2x", clean_spread, GateCmp::AtMost, 2.0),
    ];
    Ok(LabReport {
        config: cfg.clone(),
        rows,
        summary: finish_summary(scen, gates, metrics, failures),
    })
}

// ---------------------------------------------------------------------------
// lepski_demo

fn run_lepski_demo(cfg: &ExperimentConfig) -> Result<LabReport> {
    let scen = Scenario::LepskiDemo;
    let PenaltySpec::ElasticNet { alpha } = cfg.penalty else {
        return Err(Error::config("lepski_demo is a linear scenario; use elastic_net"));
    };
    let n = cfg.n_grid[0];
    let p = cfg.p;
    let lep = LepskiConfig { m_bound: cfg.theory.m_bound, a_star: cfg.theory.a };
    lep.validate()?;
    let expected_levels = lep.grid_len();
    let t_star = unit_truth(p, derive_seed(cfg.seed, &[scen.tag()]));
    let truth = Truth::Linear(t_star.clone());
    let lipschitz = cfg.loss.lipschitz();
    let scale = cfg.lambda_scale;
    let theory = cfg.theory;
    let oracle = move |phi: f64| -> Result<f64> {
        let radii = elastic_net_r_star(n, p, alpha, lipschitz, theory.b_subg, theory.a, phi)?;
        Ok((scale * radii.r_star_sq).sqrt())
    };
    let cell = format!("M{}", cfg.theory.m_bound);

    // One cell per replicate: every replicate runs the full grid selection.
    let cell_fn = |rep: usize| -> Result<CellOutput> {
        let ctx = |e| cell_context(e, &cell, rep);
        let tags = |purpose: u64| [scen.tag(), rep as u64, purpose];
        let data = make_regression_dataset(
            &DesignSpec::GaussianIso,
            &cfg.noise,
            &truth,
            n,
            derive_seed(cfg.seed, &tags(TAG_DATA)),
        )
        .map_err(ctx)?;
        let held = make_regression_dataset(
            &DesignSpec::GaussianIso,
            &cfg.noise,
            &truth,
            HOLDOUT_SAMPLES,
            derive_seed(cfg.seed, &tags(TAG_HOLDOUT)),
        )
        .map_err(ctx)?;
        let solver = SolverConfig {
            max_iters: cfg.rerm_iters,
            step_scale: cfg.step_scale,
            seed: derive_seed(cfg.seed, &tags(TAG_SOLVER)),
            ..SolverConfig::default()
        };
        let start = Instant::now();
        let state =
            lepski_select(&data, cfg.loss, &cfg.penalty, &lep, &solver, &oracle).map_err(ctx)?;
        // Grid fits run inside the selection call; its wall clock is shared
        // by every row of this replicate.
        let wall_ms = start.elapsed().as_millis() as u64;

        let mut rows = Vec::with_capacity(state.grid.len() + 1);
        let mut metrics = BTreeMap::new();
        let mut best_sq = f64::INFINITY;
        for (idx, point) in state.grid.iter().enumerate() {
            let model = &state.fitted[idx];
            let l2_error = linear_sq_error(model, &t_star).map_err(ctx)?;
            best_sq = best_sq.min(l2_error);
            let row = ReportRow {
                scenario: scen.name().to_string(),
                cell: cell.clone(),
                rep,
                n,
                p,
                frac: 0.0,
                s: 0,
                lambda: point.lambda,
                estimator: format!("grid_{}", idx + 1),
                l2_error,
                excess_risk: excess_risk_on(model, &truth, cfg.loss, &held).map_err(ctx)?,
                iters: model.iterations,
                wall_ms,
            };
            row.check_finite().map_err(ctx)?;
            rows.push(row);
        }
        let selected = state.f_tilde();
        let selected_sq = linear_sq_error(selected, &t_star).map_err(ctx)?;
        let row = ReportRow {
            scenario: scen.name().to_string(),
            cell: cell.clone(),
            rep,
            n,
            p,
            frac: 0.0,
            s: 0,
            lambda: state.grid[state.selected - 1].lambda,
            estimator: "selected".to_string(),
            l2_error: selected_sq,
            excess_risk: excess_risk_on(selected, &truth, cfg.loss, &held).map_err(ctx)?,
            iters: selected.iterations,
            wall_ms,
        };
        row.check_finite().map_err(ctx)?;
        rows.push(row);

        let levels = state.grid.len();
        metrics.insert(format!("k_star_rep_{rep}"), state.k_star as f64);
        metrics.insert(
            format!("sel_over_best_rms_rep_{rep}"),
            (selected_sq / best_sq).sqrt(),
        );
        metrics.insert(
            format!("terminal_member_rep_{rep}"),
            f64::from(state.is_member(levels, levels)),
        );
        metrics.insert(format!("grid_levels_rep_{rep}"), levels as f64);
        metrics.insert(
            format!("k_star_in_range_rep_{rep}"),
            f64::from(state.k_star >= 1 && state.k_star <= levels),
        );
        Ok((rows, metrics))
    };

    let (rows, metrics, failures) = run_cells(cfg.replicates, cell_fn);

    let rep_metric = |prefix: &str| -> Vec<f64> {
        (0..cfg.replicates)
            .filter_map(|r| metrics.get(&format!("{prefix}_rep_{r}")).copied())
            .collect()
    };
    let fold = |vals: Vec<f64>, init: f64, f: fn(f64, f64) -> f64| -> f64 {
        if vals.len() != cfg.replicates {
            return f64::NAN;
        }
        vals.into_iter().fold(init, f)
    };
    let worst_ratio = fold(rep_metric("sel_over_best_rms"), 0.0, f64::max);
    let grid_levels = fold(rep_metric("grid_levels"), 0.0, f64::max);
    let all_in_range = fold(rep_metric("k_star_in_range"), 1.0, f64::min);
    let all_members = fold(rep_metric("terminal_member"), 1.0, f64::min);

    let gates = vec![
        gate("grid_size_matches_rule", grid_levels, GateCmp::Equals, expected_levels as f64),
        gate("selected_within_3x_best", worst_ratio, GateCmp::AtMost, 3.0),
        gate("k_star_in_grid_range", all_in_range, GateCmp::Equals, 1.0),
        gate("terminal_fit_accepted_at_terminal_level", all_members, GateCmp::Equals, 1.0),
    ];
    Ok(LabReport {
        config: cfg.clone(),
        rows,
        summary: finish_summary(scen, gates, metrics, failures),
    })
}

// ---------------------------------------------------------------------------
// rerm_vs_mom

fn noise_tag(noise: &NoiseSpec) -> &'static str {
    match noise {
        NoiseSpec::Gaussian { .. } => "gauss",
        NoiseSpec::Student { .. } => "student",
        NoiseSpec::Cauchy => "cauchy",
        NoiseSpec::Uniform { .. } => "uniform",
    }
}

fn run_rerm_vs_mom(cfg: &ExperimentConfig) -> Result<LabReport> {
    let scen = Scenario::RermVsMom;
    if !matches!(cfg.penalty, PenaltySpec::ElasticNet { .. }) {
        return Err(Error::config("rerm_vs_mom is a linear scenario; use elastic_net"));
    }
    if matches!(cfg.noise, NoiseSpec::Gaussian { .. }) {
        return Err(Error::config(
            "rerm_vs_mom pits the configured heavy-tailed noise against a Gaussian \
             reference arm; pick a non-Gaussian noise",
        ));
    }
    if cfg.s_blocks < 2 {
        return Err(Error::config("rerm_vs_mom needs s_blocks >= 2"));
    }
    if cfg.mom_iters == 0 {
        return Err(Error::config("mom_iters must be >= 1"));
    }
    let p = cfg.p;
    let heavy_tag = noise_tag(&cfg.noise);
    let arms = [(heavy_tag, cfg.noise), ("gauss", NoiseSpec::Gaussian { sigma: 1.0 })];
    let t_star = unit_truth(p, derive_seed(cfg.seed, &[scen.tag()]));
    let truth = Truth::Linear(t_star.clone());
    let n_cells = arms.len() * cfg.n_grid.len();

    let cell_fn = |ci: usize| -> Result<CellOutput> {
        let (arm_tag, arm_noise) = arms[ci / cfg.n_grid.len()];
        let n = cfg.n_grid[ci % cfg.n_grid.len()];
        let cell = format!("{arm_tag}_N{n}");
        let lambda = cfg.lambda_scale * (p as f64 / n as f64).sqrt();
        if cfg.s_blocks > n {
            return Err(Error::config(format!(
                "cell {cell}: s_blocks {} exceeds sample size {n}",
                cfg.s_blocks
            )));
        }
        let mut rows = Vec::with_capacity(2 * cfg.replicates);
        for rep in 0..cfg.replicates {
            let ctx = |e| cell_context(e, &cell, rep);
            let tags = |purpose: u64| [scen.tag(), ci as u64, rep as u64, purpose];
            let data = make_regression_dataset(
                &DesignSpec::GaussianIso,
                &arm_noise,
                &truth,
                n,
                derive_seed(cfg.seed, &tags(TAG_DATA)),
            )
            .map_err(ctx)?;
            let held = make_regression_dataset(
                &DesignSpec::GaussianIso,
                &arm_noise,
                &truth,
                HOLDOUT_SAMPLES,
                derive_seed(cfg.seed, &tags(TAG_HOLDOUT)),
            )
            .map_err(ctx)?;
            for (estimator, s_col) in [("rerm", 0), ("mom", cfg.s_blocks)] {
                let solver = SolverConfig {
                    max_iters: if estimator == "rerm" { cfg.rerm_iters } else { cfg.mom_iters },
                    step_scale: cfg.step_scale,
                    seed: derive_seed(cfg.seed, &tags(TAG_SOLVER)),
                    ..SolverConfig::default()
                };
                let start = Instant::now();
                let model = if estimator == "rerm" {
                    fit_rerm(&data, cfg.loss, &cfg.penalty, lambda, &solver, None)
                } else {
                    fit_mom_minmax(
                        &data,
                        cfg.loss,
                        &cfg.penalty,
                        lambda,
                        cfg.s_blocks,
                        &solver,
                        None,
                    )
                }
                .map_err(ctx)?;
                let wall_ms = start.elapsed().as_millis() as u64;
                let row = ReportRow {
                    scenario: scen.name().to_string(),
                    cell: cell.clone(),
                    rep,
                    n,
                    p,
                    frac: 0.0,
                    s: s_col,
                    lambda,
                    estimator: estimator.to_string(),
                    l2_error: linear_sq_error(&model, &t_star).map_err(ctx)?,
                    excess_risk: excess_risk_on(&model, &truth, cfg.loss, &held)
                        .map_err(ctx)?,
                    iters: model.iterations,
                    wall_ms,
                };
                row.check_finite().map_err(ctx)?;
                rows.push(row);
            }
        }
        Ok((rows, BTreeMap::new()))
    };

    let (rows, mut metrics, failures) = run_cells(n_cells, cell_fn);

    let arm_means = |tag: &str, estimator: &str| -> Vec<f64> {
        cfg.n_grid
            .iter()
            .map(|&n| mean_l2(&rows, &format!("{tag}_N{n}"), estimator))
            .collect()
    };
    for (tag, _) in arms {
        for estimator in ["rerm", "mom"] {
            for (&n, m) in cfg.n_grid.iter().zip(arm_means(tag, estimator)) {
                metrics.insert(format!("mean_sq_l2_{tag}_N{n}_{estimator}"), m);
            }
        }
    }

    let heavy_rerm = arm_means(heavy_tag, "rerm");
    let heavy_mom = arm_means(heavy_tag, "mom");
    let nan_guard = |means: &[f64], count: usize| -> f64 {
        if means.iter().any(|m| m.is_nan()) {
            f64::NAN
        } else {
            count as f64
        }
    };
    let rerm_inversions = nan_guard(&heavy_rerm, count_inversions(&heavy_rerm));
    let mom_inversions = nan_guard(&heavy_mom, count_inversions(&heavy_mom));
    metrics.insert(format!("{heavy_tag}_inversions_rerm"), rerm_inversions);
    metrics.insert(format!("{heavy_tag}_inversions_mom"), mom_inversions);

    let gauss_rerm = arm_means("gauss", "rerm");
    let gauss_mom = arm_means("gauss", "mom");
    let mut worst_gauss_ratio: f64 = 0.0;
    for ((&n, rerm), mom) in cfg.n_grid.iter().zip(&gauss_rerm).zip(&gauss_mom) {
        let ratio = (mom / rerm).sqrt();
        metrics.insert(format!("gauss_rms_ratio_N{n}"), ratio);
        worst_gauss_ratio = worst_gauss_ratio.max(ratio);
    }

    let gates = vec![
        gate("heavy_rerm_error_decreases", rerm_inversions, GateCmp::AtMost, 1.0),
        gate("heavy_mom_error_decreases", mom_inversions, GateCmp::AtMost, 1.0),
        gate("gaussian_mom_within_2x_rerm", worst_gauss_ratio, GateCmp::AtMost, 2.0),
    ];
    Ok(LabReport {
        config: cfg.clone(),
        rows,
        summary: finish_summary(scen, gates, metrics, failures),
    })
}

// ---------------------------------------------------------------------------
