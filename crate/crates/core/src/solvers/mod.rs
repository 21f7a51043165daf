//! Solvers for penalized empirical risk and its median-of-means minmax
//! counterpart.
//!
//! Two problem geometries are supported, selected by the penalty:
//!
//! * elastic net: linear predictors `x -> <t, x>`, solved by proximal
//!   (sub)gradient steps on the coefficient vector;
//! * squared Hilbert norm: kernel expansions `x -> sum_i a_i K(x_i, x)`,
//!   solved by (sub)gradient steps on the representer coefficients, where the
//!   quadratic penalty is smooth and folded into the gradient.
//!
//! [`rerm::fit_rerm`] minimizes the composite objective over the full sample;
//! [`mom::fit_mom_minmax`] runs the alternating descent/ascent scheme on the
//! median block of loss increments; [`lepski::lepski_select`] wraps a grid of
//! penalized fits with the adaptive acceptance-set selection rule.

mod lepski;
mod mom;
mod rerm;

pub use lepski::{lepski_select, GridPoint, LepskiConfig, LepskiState};
pub use mom::{fit_mom_minmax, mom_of_increments};
pub use rerm::fit_rerm;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::datagen::Dataset;
use crate::linalg;
use crate::losses::LossSpec;
use crate::penalties::PenaltySpec;
use crate::rkhs::{KernelModel, KernelSpec};
use crate::{Error, Result};

/// Step-size schedule for the (sub)gradient loops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepRule {
    /// Constant step.
    Fixed { step: f64 },
    /// `c / sqrt(k)` at iteration `k` (1-based), the usual nonsmooth schedule.
    Diminishing { c: f64 },
}

impl StepRule {
    fn validate(&self) -> Result<()> {
        let v = match *self {
            StepRule::Fixed { step } => step,
            StepRule::Diminishing { c } => c,
        };
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::domain(format!("step rule parameter must be positive, got {v}")));
        }
        Ok(())
    }

    pub(crate) fn step_at(&self, k: usize) -> f64 {
        match *self {
            StepRule::Fixed { step } => step,
            StepRule::Diminishing { c } => c / (k as f64).sqrt(),
        }
    }
}

/// Iteration budget and schedule knobs shared by all solvers.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// `None` derives a schedule from the loss and the design spectrum:
    /// a fixed `1/L` step for smooth losses, `c/sqrt(k)` otherwise.
    pub step_rule: Option<StepRule>,
    /// Multiplier applied to the automatic schedule only; an explicit
    /// `step_rule` is used verbatim.
    pub step_scale: f64,
    /// Relative objective-change stop for the smooth full-sample paths.
    /// Nonsmooth and median-block loops run the whole budget and keep the
    /// best iterate.
    pub tolerance: f64,
    /// Redraw the MOM block partition every iteration (recommended; a frozen
    /// partition can lock a contaminated block into the median).
    pub reshuffle_blocks: bool,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 2000,
            step_rule: None,
            step_scale: 1.0,
            tolerance: 1e-14,
            reshuffle_blocks: true,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::domain("max_iters must be >= 1"));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::domain(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if !(self.step_scale.is_finite() && self.step_scale > 0.0) {
            return Err(Error::domain(format!("step_scale must be positive, got {}", self.step_scale)));
        }
        if let Some(rule) = &self.step_rule {
            rule.validate()?;
        }
        Ok(())
    }
}

/// Fitted predictor: a coefficient vector over features, or a kernel
/// expansion over the training points.
#[derive(Debug, Clone)]
pub enum ModelVariant {
    Linear { coefficients: Array1<f64> },
    Kernel(KernelModel),
}

/// Result of a solver run.
///
/// `objective` is the composite value at the returned coefficients, which are
/// the best iterate encountered (never worse than the zero model the loops
/// start from). `objective_trace` records the value after each update, so its
/// length equals `iterations`.
#[derive(Debug, Clone)]
pub struct Model {
    pub variant: ModelVariant,
    pub objective: f64,
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    /// Prox fixed-point residual `||t - prox(t - s grad R(t))||` at the
    /// returned point; reported for smooth losses only.
    pub kkt_residual: Option<f64>,
    pub lambda: f64,
}

impl Model {
    /// Coefficient vector: `t` for linear models, representer `a` for kernel
    /// models.
    pub fn coefficients(&self) -> &Array1<f64> {
        match &self.variant {
            ModelVariant::Linear { coefficients } => coefficients,
            ModelVariant::Kernel(km) => &km.coefficients,
        }
    }

    /// Predictions on a dataset's inputs.
    pub fn predictions_on(&self, data: &Dataset) -> Result<Array1<f64>> {
        match &self.variant {
            ModelVariant::Linear { coefficients } => {
                if coefficients.len() != data.p() {
                    return Err(Error::DimensionMismatch {
                        expected: coefficients.len(),
                        got: data.p(),
                    });
                }
                Ok(data.inputs.dot(coefficients))
            }
            ModelVariant::Kernel(km) => km.predict(&data.scalar_inputs()?),
        }
    }
}

/// Validates the shared (data, loss, penalty, lambda, config, kernel)
/// contract and enforces the penalty/geometry pairing.
pub(crate) fn check_problem(
    data: &Dataset,
    loss: LossSpec,
    penalty: &PenaltySpec,
    lambda: f64,
    cfg: &SolverConfig,
    kernel: Option<&KernelSpec>,
) -> Result<()> {
    loss.validate()?;
    penalty.validate()?;
    cfg.validate()?;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::domain(format!("lambda must be >= 0, got {lambda}")));
    }
    if data.targets.len() != data.n() {
        return Err(Error::DimensionMismatch { expected: data.n(), got: data.targets.len() });
    }
    let wants_kernel = matches!(penalty, PenaltySpec::SquaredHilbertNorm);
    match (wants_kernel, kernel) {
        (true, None) => {
            return Err(Error::config("squared_hilbert_norm penalty needs a kernel spec"))
        }
        (false, Some(_)) => {
            return Err(Error::config("elastic_net is a linear-model penalty; drop the kernel spec"))
        }
        (true, Some(k)) => k.validate()?,
        (false, None) => {}
    }
    Ok(())
}

/// Mean loss of raw predictions; callers validate inputs once up front.
pub(crate) fn mean_loss_raw(loss: LossSpec, preds: &Array1<f64>, targets: &Array1<f64>) -> f64 {
    let n = preds.len() as f64;
    linalg::kahan_sum(preds.iter().zip(targets.iter()).map(|(&u, &y)| loss.eval_raw(u, y))) / n
}

/// Subgradient of the loss at each prediction.
pub(crate) fn subgrad_vec(loss: LossSpec, preds: &Array1<f64>, targets: &Array1<f64>) -> Array1<f64> {
    Array1::from_iter(preds.iter().zip(targets.iter()).map(|(&u, &y)| loss.subgrad_raw(u, y)))
}

/// Prediction operator for the kernel geometry.
///
/// RBF problems carry the dense Gram matrix; the synthetic Mercer kernel uses
/// its feature factor `Phi` (`G = Phi Phi^T`), which turns every Gram product
/// into two `N x k_max` passes and keeps large-sample fits affordable.
pub(crate) enum KernelOpKind {
    Gram { gram: Array2<f64> },
    Factored { phi: Array2<f64> },
}

pub(crate) struct KernelOp {
    pub kind: KernelOpKind,
    /// Operator norm of the Gram matrix.
    pub sigma: f64,
    pub points: Vec<f64>,
    pub spec: KernelSpec,
}

impl KernelOp {
    pub fn build(data: &Dataset, spec: &KernelSpec) -> Result<KernelOp> {
        let points = data.scalar_inputs()?;
        match spec {
            KernelSpec::Rbf { .. } => {
                let gram = spec.gram_matrix(&points)?;
                let sigma = linalg::sym_operator_norm(gram.view());
                Ok(KernelOp { kind: KernelOpKind::Gram { gram }, sigma, points, spec: *spec })
            }
            KernelSpec::SyntheticMercer { .. } => {
                let phi = spec.feature_matrix(&points)?;
                // sigma_max(Phi Phi^T) = sigma_max(Phi)^2.
                let s = linalg::design_sigma_max(phi.view());
                Ok(KernelOp { kind: KernelOpKind::Factored { phi }, sigma: s * s, points, spec: *spec })
            }
        }
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }
}
