//! Convex Lipschitz losses in the prediction argument.
//!
//! Each loss `l(u, y)` below is convex and L-Lipschitz in the prediction `u`
//! for every fixed target `y`, which is the standing assumption behind the
//! robust risk bounds this crate studies. The catalogue:
//!
//! ```text
//! logistic               log(1 + exp(-y u))                     L = 1
//! hinge_classification   max(1 - y u, 0)                        L = 1
//! huber(delta)           (u-y)^2 / 2          if |u-y| <= delta
//!                        delta|u-y| - delta^2/2   otherwise     L = delta
//! quantile(tau)          rho_tau(u - y),
//!                        rho_tau(z) = z (tau - 1{z <= 0})       L = 1
//! hinge_regression       max(y - u, 0)                          L = 1
//! ```
//!
//! Classification losses expect labels in {-1, +1}. Subgradients at kinks
//! are deterministic: the quantile loss returns `tau - 1/2` at a zero
//! residual (the midpoint of its subdifferential `[tau-1, tau]`) and both
//! hinges return 0 at their kinks.

use ndarray::ArrayView1;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Loss selector with per-kind parameters.
///
/// Serializes as `{"kind": "...", "delta"?: number, "tau"?: number}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossSpec {
    Logistic,
    HingeClassification,
    Huber { delta: f64 },
    Quantile { tau: f64 },
    HingeRegression,
}

impl LossSpec {
    /// Checks the per-kind parameter ranges.
    pub fn validate(&self) -> Result<()> {
        match *self {
            LossSpec::Huber { delta } => {
                if !(delta.is_finite() && delta > 0.0) {
                    return Err(Error::domain(format!(
                        "huber delta must be a positive real, got {delta}"
                    )));
                }
            }
            LossSpec::Quantile { tau } => {
                if !(tau.is_finite() && 0.0 < tau && tau < 1.0) {
                    return Err(Error::domain(format!(
                        "quantile tau must lie in (0,1), got {tau}"
                    )));
                }
            }
            LossSpec::Logistic | LossSpec::HingeClassification | LossSpec::HingeRegression => {}
        }
        Ok(())
    }

    fn is_classification(&self) -> bool {
        matches!(self, LossSpec::Logistic | LossSpec::HingeClassification)
    }

    fn check_point(&self, u: f64, y: f64) -> Result<()> {
        self.validate()?;
        if !u.is_finite() || !y.is_finite() {
            return Err(Error::domain(format!("non-finite loss input u={u}, y={y}")));
        }
        if self.is_classification() && y != 1.0 && y != -1.0 {
            return Err(Error::domain(format!(
                "classification loss needs y in {{-1,+1}}, got {y}"
            )));
        }
        Ok(())
    }

    /// Loss value at prediction `u` and target `y`.
    pub fn eval(&self, u: f64, y: f64) -> Result<f64> {
        self.check_point(u, y)?;
        Ok(self.eval_raw(u, y))
    }

    /// A subgradient of `u -> l(u, y)` at `u`.
    ///
    /// The returned value `g` satisfies `l(v,y) >= l(u,y) + g (v - u)` for
    /// all `v`, with `|g| <= lipschitz()`.
    pub fn subgradient(&self, u: f64, y: f64) -> Result<f64> {
        self.check_point(u, y)?;
        Ok(self.subgrad_raw(u, y))
    }

    /// Unchecked loss evaluation, for hot loops after inputs are validated.
    #[inline]
    pub(crate) fn eval_raw(&self, u: f64, y: f64) -> f64 {
        match *self {
            // Written as log1p(exp(-|s|)) plus the positive part so the
            // exponent never overflows for |u| ~ 1e3 heavy-tail inputs.
            LossSpec::Logistic => {
                let s = -y * u;
                if s > 0.0 {
                    s + (-s).exp().ln_1p()
                } else {
                    s.exp().ln_1p()
                }
            }
            LossSpec::HingeClassification => (1.0 - u * y).max(0.0),
            LossSpec::Huber { delta } => {
                let z = u - y;
                if z.abs() <= delta {
                    0.5 * z * z
                } else {
                    delta * z.abs() - 0.5 * delta * delta
                }
            }
            LossSpec::Quantile { tau } => {
                let z = u - y;
                z * (tau - if z <= 0.0 { 1.0 } else { 0.0 })
            }
            LossSpec::HingeRegression => (y - u).max(0.0),
        }
    }

    /// Unchecked subgradient, for hot loops after inputs are validated.
    #[inline]
    pub(crate) fn subgrad_raw(&self, u: f64, y: f64) -> f64 {
        match *self {
            LossSpec::Logistic => {
                // d/du log(1+exp(-yu)) = -y sigmoid(-yu); exp may overflow to
                // inf for large yu, in which case the quotient is exactly 0.
                -y / (1.0 + (y * u).exp())
            }
            LossSpec::HingeClassification => {
                if u * y < 1.0 {
                    -y
                } else {
                    0.0
                }
            }
            LossSpec::Huber { delta } => (u - y).clamp(-delta, delta),
            LossSpec::Quantile { tau } => {
                let z = u - y;
                if z > 0.0 {
                    tau
                } else if z < 0.0 {
                    tau - 1.0
                } else {
                    tau - 0.5
                }
            }
            LossSpec::HingeRegression => {
                if u < y {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Lipschitz constant of `u -> l(u, y)` (uniform in `y`).
    pub fn lipschitz(&self) -> f64 {
        match *self {
            LossSpec::Huber { delta } => delta,
            _ => 1.0,
        }
    }

    /// Whether the loss is differentiable everywhere in `u`.
    pub fn is_smooth(&self) -> bool {
        matches!(self, LossSpec::Logistic | LossSpec::Huber { .. })
    }

    /// Upper bound on the second derivative in `u`, for smooth losses.
    ///
    /// Drives gradient step sizes: huber curvature is 1 (independent of
    /// delta), logistic is 1/4.
    pub fn curvature_bound(&self) -> Option<f64> {
        match self {
            LossSpec::Huber { .. } => Some(1.0),
            LossSpec::Logistic => Some(0.25),
            _ => None,
        }
    }
}

/// Mean loss over paired predictions and targets.
pub fn empirical_risk(
    spec: LossSpec,
    predictions: ArrayView1<f64>,
    targets: ArrayView1<f64>,
) -> Result<f64> {
    if predictions.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: predictions.len(),
            got: targets.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::domain("empirical risk of an empty sample"));
    }
    spec.check_point(predictions[0], targets[0])?;
    let mut total = 0.0;
    for (&u, &y) in predictions.iter().zip(targets.iter()) {
        if !u.is_finite() || !y.is_finite() {
            return Err(Error::domain("non-finite entry in risk inputs"));
        }
        if spec.is_classification() && y != 1.0 && y != -1.0 {
            return Err(Error::domain(format!(
                "classification loss needs y in {{-1,+1}}, got {y}"
            )));
        }
        total += spec.eval_raw(u, y);
    }
    Ok(total / predictions.len() as f64)
}
