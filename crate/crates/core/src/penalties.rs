//! Even convex penalties and their proximal maps.
//!
//! Both penalties satisfy `phi(0) = 0`, `phi(-t) = phi(t)`, convexity, and
//! the quasi-triangle inequality `phi(f+g) <= eta (phi(f) + phi(g))` with
//! `eta = 2`:
//!
//! ```text
//! elastic_net(alpha)      (1-alpha) ||t||_1 + alpha ||t||_2^2
//! squared_hilbert_norm    a^T K a   (representer coefficients a, Gram K)
//! ```
//!
//! The proximal map `prox(v, step) = argmin_t  0.5 ||t-v||^2 + step phi(t)`
//! is exact in both cases: coordinatewise soft-thresholding at
//! `step (1-alpha)` followed by the scaling `1/(1 + 2 step alpha)` for the
//! elastic net, and the linear solve `(I + 2 step K) a = v` for the squared
//! Hilbert norm.

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::linalg::{self, soft_threshold};
use crate::{Error, Result};

/// Penalty selector.
///
/// Serializes as `{"kind": "...", "alpha"?: number}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PenaltySpec {
    ElasticNet { alpha: f64 },
    SquaredHilbertNorm,
}

impl PenaltySpec {
    /// Accepts any `alpha` in the closed interval `[0, 1]`.
    ///
    /// The endpoints (pure lasso / pure ridge) are valid for evaluation and
    /// proximal computations in tests; estimator configurations additionally
    /// require [`PenaltySpec::validate_for_estimation`].
    pub fn validate(&self) -> Result<()> {
        if let PenaltySpec::ElasticNet { alpha } = *self {
            if !(alpha.is_finite() && (0.0..=1.0).contains(&alpha)) {
                return Err(Error::domain(format!(
                    "elastic net alpha must lie in [0,1], got {alpha}"
                )));
            }
        }
        Ok(())
    }

    /// Stricter check for estimator configurations: `alpha` in the open
    /// interval `(0, 1)`, so both the sparsity and the ridge term are active.
    pub fn validate_for_estimation(&self) -> Result<()> {
        self.validate()?;
        if let PenaltySpec::ElasticNet { alpha } = *self {
            if alpha == 0.0 || alpha == 1.0 {
                return Err(Error::config(format!(
                    "estimators require elastic net alpha strictly inside (0,1), got {alpha}"
                )));
            }
        }
        Ok(())
    }

    /// Quasi-triangle constant `eta` (2 for both penalties).
    pub fn eta(&self) -> f64 {
        2.0
    }

    fn check_gram<'k>(
        &self,
        coeffs: ArrayView1<f64>,
        gram: Option<&'k Array2<f64>>,
    ) -> Result<Option<&'k Array2<f64>>> {
        match self {
            PenaltySpec::ElasticNet { .. } => Ok(None),
            PenaltySpec::SquaredHilbertNorm => {
                let g = gram.ok_or_else(|| {
                    Error::domain("squared_hilbert_norm needs the Gram matrix")
                })?;
                if g.nrows() != g.ncols() {
                    return Err(Error::domain("Gram matrix must be square"));
                }
                if g.nrows() != coeffs.len() {
                    return Err(Error::DimensionMismatch {
                        expected: g.nrows(),
                        got: coeffs.len(),
                    });
                }
                Ok(Some(g))
            }
        }
    }

    /// Penalty value at `coeffs`.
    ///
    /// `gram` is required for (and only read by) `squared_hilbert_norm`,
    /// where `coeffs` are representer coefficients and the value is
    /// `coeffs^T gram coeffs`.
    pub fn eval(&self, coeffs: ArrayView1<f64>, gram: Option<&Array2<f64>>) -> Result<f64> {
        self.validate()?;
        let gram = self.check_gram(coeffs, gram)?;
        Ok(self.eval_raw(coeffs, gram))
    }

    /// Unchecked penalty value, for hot loops after validation.
    pub(crate) fn eval_raw(&self, coeffs: ArrayView1<f64>, gram: Option<&Array2<f64>>) -> f64 {
        match *self {
            PenaltySpec::ElasticNet { alpha } => {
                let mut l1 = 0.0;
                let mut l2_sq = 0.0;
                for &t in coeffs.iter() {
                    l1 += t.abs();
                    l2_sq += t * t;
                }
                (1.0 - alpha) * l1 + alpha * l2_sq
            }
            PenaltySpec::SquaredHilbertNorm => {
                let g = gram.expect("validated Gram");
                coeffs.dot(&g.dot(&coeffs))
            }
        }
    }

    /// Exact proximal map `argmin_t 0.5 ||t - v||^2 + step * phi(t)`.
    pub fn prox(
        &self,
        v: ArrayView1<f64>,
        step: f64,
        gram: Option<&Array2<f64>>,
    ) -> Result<Array1<f64>> {
        self.validate()?;
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::domain(format!("prox step must be positive, got {step}")));
        }
        let gram = self.check_gram(v, gram)?;
        match *self {
            PenaltySpec::ElasticNet { alpha } => {
                let thr = step * (1.0 - alpha);
                let scale = 1.0 / (1.0 + 2.0 * step * alpha);
                Ok(v.mapv(|x| soft_threshold(x, thr) * scale))
            }
            PenaltySpec::SquaredHilbertNorm => {
                let g = gram.expect("validated Gram");
                linalg::solve_shifted_gram(g.view(), 2.0 * step, v).ok_or_else(|| {
                    Error::domain("shifted Gram system is not positive definite")
                })
            }
        }
    }
}
