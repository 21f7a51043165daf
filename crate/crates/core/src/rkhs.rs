//! Scalar kernels, Gram matrices, and RKHS norms.
//!
//! Two kernels are provided. The RBF kernel is the familiar
//! `exp(-(x-y)^2 / (2 bw^2))`. The synthetic Mercer kernel is built for rate
//! experiments where the spectrum must be an experimental input: on `[0,1]`
//! with the uniform measure,
//!
//! ```text
//! K(x, y) = sum_{k=1..k_max} lambda_k e_k(x) e_k(y),
//! lambda_k = beta k^(-1/p),   e_k(x) = sqrt(2) cos(pi k x),
//! ```
//!
//! so the integral operator of `K` has exactly the eigenvalue decay
//! `beta k^(-1/p)` (the cosines are orthonormal in `L2[0,1]`; the constant
//! function `e_0` is excluded). Every function of the truncated kernel is a
//! finite cosine polynomial, which the feature map [`KernelSpec::feature_matrix`]
//! exposes: `Phi[i, k-1] = sqrt(lambda_k) e_k(x_i)` gives `G = Phi Phi^T` and
//! lets solvers and predictors run in `O(N k_max)` instead of `O(N^2)`.

use ndarray::{Array1, Array2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::kahan_sum;
use crate::{Error, Result};

/// Kernel selector.
///
/// Serializes as `{"kind": "rbf", "bandwidth": ...}` or
/// `{"kind": "synthetic_mercer", "beta": ..., "p_decay": ..., "k_max": ...}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    Rbf {
        bandwidth: f64,
    },
    SyntheticMercer {
        beta: f64,
        /// Eigendecay exponent: `lambda_k = beta k^(-1/p_decay)`, `0 < p_decay < 1`.
        p_decay: f64,
        /// Truncation order of the Mercer sum.
        k_max: usize,
    },
}

pub const DEFAULT_K_MAX: usize = 10_000;

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Rbf { bandwidth } => {
                if !(bandwidth.is_finite() && bandwidth > 0.0) {
                    return Err(Error::domain(format!(
                        "rbf bandwidth must be positive, got {bandwidth}"
                    )));
                }
            }
            KernelSpec::SyntheticMercer { beta, p_decay, k_max } => {
                if !(beta.is_finite() && beta > 0.0) {
                    return Err(Error::domain(format!("mercer beta must be positive, got {beta}")));
                }
                if !(p_decay.is_finite() && 0.0 < p_decay && p_decay < 1.0) {
                    return Err(Error::domain(format!(
                        "mercer p_decay must lie in (0,1), got {p_decay}"
                    )));
                }
                if k_max == 0 {
                    return Err(Error::domain("mercer k_max must be >= 1"));
                }
            }
        }
        Ok(())
    }

    /// `sup_x K(x, x)`: 1 for RBF, `2 beta sum_k k^(-1/p)` for the Mercer
    /// kernel (every cosine attains `e_k(0) = sqrt(2)` at 0).
    pub fn bounded_sup(&self) -> f64 {
        match *self {
            KernelSpec::Rbf { .. } => 1.0,
            KernelSpec::SyntheticMercer { beta, p_decay, k_max } => {
                let exponent = -1.0 / p_decay;
                2.0 * beta * kahan_sum((1..=k_max).rev().map(|k| (k as f64).powf(exponent)))
            }
        }
    }

    /// `sup_x sqrt(K(x, x))`, the factor in the reproducing bound
    /// `|f(x)| <= ||f||_H sqrt(K(x,x))` and in complexity bounds.
    pub fn sup_norm_factor(&self) -> f64 {
        self.bounded_sup().sqrt()
    }

    /// Mercer eigenvalues `lambda_k = beta k^(-1/p)`, `k = 1..k_max`
    /// (nonincreasing); `None` for kernels without a declared spectrum.
    pub fn eigenvalues(&self) -> Option<Array1<f64>> {
        match *self {
            KernelSpec::Rbf { .. } => None,
            KernelSpec::SyntheticMercer { beta, p_decay, k_max } => Some(Array1::from_iter(
                (1..=k_max).map(|k| beta * (k as f64).powf(-1.0 / p_decay)),
            )),
        }
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::domain(format!("kernel input must be finite, got {x}")));
        }
        if matches!(self, KernelSpec::SyntheticMercer { .. }) && !(0.0..=1.0).contains(&x) {
            return Err(Error::domain(format!(
                "synthetic_mercer is defined on [0,1], got {x}"
            )));
        }
        Ok(())
    }

    /// Kernel evaluation `K(x, y)`.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        self.validate()?;
        self.check_domain(x)?;
        self.check_domain(y)?;
        Ok(self.eval_raw(x, y))
    }

    #[inline]
    pub(crate) fn eval_raw(&self, x: f64, y: f64) -> f64 {
        match *self {
            KernelSpec::Rbf { bandwidth } => {
                let d = x - y;
                (-d * d / (2.0 * bandwidth * bandwidth)).exp()
            }
            KernelSpec::SyntheticMercer { beta, p_decay, k_max } => {
                let exponent = -1.0 / p_decay;
                let mut sum = 0.0;
                for k in 1..=k_max {
                    let kf = k as f64;
                    let lambda = beta * kf.powf(exponent);
                    let ek_x = 2.0_f64.sqrt() * (std::f64::consts::PI * kf * x).cos();
                    let ek_y = 2.0_f64.sqrt() * (std::f64::consts::PI * kf * y).cos();
                    // Grouping the product keeps K(x,y) bitwise symmetric.
                    sum += lambda * (ek_x * ek_y);
                }
                sum
            }
        }
    }

    /// Dense Gram matrix `G[i,j] = K(x_i, x_j)`, built in parallel row chunks.
    pub fn gram_matrix(&self, points: &[f64]) -> Result<Array2<f64>> {
        self.validate()?;
        if points.is_empty() {
            return Err(Error::domain("gram matrix needs at least one point"));
        }
        for &x in points {
            self.check_domain(x)?;
        }
        let n = points.len();
        let mut rows: Vec<f64> = vec![0.0; n * n];
        rows.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = self.eval_raw(points[i], points[j]);
            }
        });
        Ok(Array2::from_shape_vec((n, n), rows).expect("n*n buffer"))
    }

    /// Feature matrix of the truncated Mercer kernel:
    /// `Phi[i, k-1] = sqrt(lambda_k) e_k(x_i)`, shape `N x k_max`.
    ///
    /// `Phi Phi^T` equals the Gram matrix (up to rounding), and predictions
    /// of any representer model are `Phi` products, which is what makes the
    /// large-N rate experiments tractable.
    pub fn feature_matrix(&self, points: &[f64]) -> Result<Array2<f64>> {
        self.validate()?;
        let KernelSpec::SyntheticMercer { beta, p_decay, k_max } = *self else {
            return Err(Error::config("feature_matrix needs a synthetic_mercer kernel"));
        };
        for &x in points {
            self.check_domain(x)?;
        }
        let n = points.len();
        let sqrt2 = 2.0_f64.sqrt();
        let root_lambdas: Vec<f64> = (1..=k_max)
            .map(|k| (beta * (k as f64).powf(-1.0 / p_decay)).sqrt())
            .collect();
        let mut rows: Vec<f64> = vec![0.0; n * k_max];
        rows.par_chunks_mut(k_max).enumerate().for_each(|(i, row)| {
            let x = points[i];
            for (k0, slot) in row.iter_mut().enumerate() {
                let kf = (k0 + 1) as f64;
                *slot = root_lambdas[k0] * sqrt2 * (std::f64::consts::PI * kf * x).cos();
            }
        });
        Ok(Array2::from_shape_vec((n, k_max), rows).expect("n*k buffer"))
    }
}

/// A kernel expansion `f(x) = sum_i a_i K(x_i, x)` over training inputs.
#[derive(Debug, Clone)]
pub struct KernelModel {
    pub coefficients: Array1<f64>,
    pub training_inputs: Vec<f64>,
    pub kernel: KernelSpec,
}

impl KernelModel {
    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if self.coefficients.len() != self.training_inputs.len() {
            return Err(Error::DimensionMismatch {
                expected: self.training_inputs.len(),
                got: self.coefficients.len(),
            });
        }
        Ok(())
    }

    /// Evaluates the expansion at each query point.
    ///
    /// The Mercer kernel goes through its feature map (`O((N+Q) k_max)`);
    /// the RBF kernel sums pairwise terms directly.
    pub fn predict(&self, queries: &[f64]) -> Result<Array1<f64>> {
        self.validate()?;
        match self.kernel {
            KernelSpec::Rbf { .. } => {
                for &q in queries {
                    self.kernel.check_domain(q)?;
                }
                let preds: Vec<f64> = queries
                    .par_iter()
                    .map(|&q| {
                        self.training_inputs
                            .iter()
                            .zip(self.coefficients.iter())
                            .map(|(&x, &a)| a * self.kernel.eval_raw(x, q))
                            .sum()
                    })
                    .collect();
                Ok(Array1::from_vec(preds))
            }
            KernelSpec::SyntheticMercer { .. } => {
                let phi_train = self.kernel.feature_matrix(&self.training_inputs)?;
                let spectral = phi_train.t().dot(&self.coefficients);
                let phi_query = self.kernel.feature_matrix(queries)?;
                Ok(phi_query.dot(&spectral))
            }
        }
    }
}

/// Squared RKHS norm `a^T G a` of a representer model.
pub fn rkhs_norm_sq(model: &KernelModel, gram: &Array2<f64>) -> Result<f64> {
    model.validate()?;
    if gram.nrows() != gram.ncols() || gram.nrows() != model.coefficients.len() {
        return Err(Error::DimensionMismatch {
            expected: model.coefficients.len(),
            got: gram.nrows(),
        });
    }
    Ok(model.coefficients.dot(&gram.dot(&model.coefficients)))
}

/// Uniform bound on an RKHS ball: `sup_x |f(x)| <= rho sqrt(sup_x K(x,x))`
/// whenever `||f||_H <= rho`.
pub fn sup_bound_from_rkhs_ball(spec: &KernelSpec, rho_norm: f64) -> Result<f64> {
    spec.validate()?;
    if !(rho_norm.is_finite() && rho_norm >= 0.0) {
        return Err(Error::domain(format!("rho_norm must be >= 0, got {rho_norm}")));
    }
    Ok(rho_norm * spec.sup_norm_factor())
}
