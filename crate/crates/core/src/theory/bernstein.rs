//! Margin constants for analytic noise laws: how much probability mass the
//! noise puts near the regression function decides the curvature constant
//! `A = 4 / gamma` in the oracle inequalities, checked here from closed-form
//! conditional distributions rather than samples.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal, StudentsT};

use crate::datagen::NoiseSpec;
use crate::linalg::kahan_sum;
use crate::{Error, Result};

/// Outcome of a margin check at one localization radius. `gamma == 0`
/// means the condition failed there and no curvature constant follows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BernsteinCheck {
    /// Mass (or density) lower bound in `[0, 1]`.
    pub gamma: f64,
    /// Curvature constant `4 / gamma`; absent when `gamma == 0`.
    pub a_out: Option<f64>,
    /// Norm-equivalence constant the radius was computed with, when one
    /// entered the check.
    pub c_prime: Option<f64>,
    /// Moment index of the norm equivalence, when one entered the check.
    pub epsilon: Option<f64>,
    /// The localization radius the condition was evaluated at.
    pub radius_checked: f64,
}

fn noise_cdf(noise: &NoiseSpec, x: f64) -> Result<f64> {
    match *noise {
        NoiseSpec::Gaussian { sigma } => {
            let dist = Normal::new(0.0, sigma)
                .map_err(|e| Error::domain(format!("gaussian noise: {e}")))?;
            Ok(dist.cdf(x))
        }
        NoiseSpec::Student { nu } => {
            let dist = StudentsT::new(0.0, 1.0, nu)
                .map_err(|e| Error::domain(format!("student noise: {e}")))?;
            Ok(dist.cdf(x))
        }
        NoiseSpec::Cauchy => Ok(0.5 + x.atan() / std::f64::consts::PI),
        NoiseSpec::Uniform { half_width } => {
            if !(half_width > 0.0) {
                return Err(Error::domain("uniform noise needs half_width > 0"));
            }
            Ok(((x + half_width) / (2.0 * half_width)).clamp(0.0, 1.0))
        }
    }
}

fn noise_density(noise: &NoiseSpec, x: f64) -> Result<f64> {
    match *noise {
        NoiseSpec::Gaussian { sigma } => {
            let dist = Normal::new(0.0, sigma)
                .map_err(|e| Error::domain(format!("gaussian noise: {e}")))?;
            Ok(dist.pdf(x))
        }
        NoiseSpec::Student { nu } => {
            let dist = StudentsT::new(0.0, 1.0, nu)
                .map_err(|e| Error::domain(format!("student noise: {e}")))?;
            Ok(dist.pdf(x))
        }
        NoiseSpec::Cauchy => Ok((std::f64::consts::PI * (1.0 + x * x)).recip()),
        NoiseSpec::Uniform { half_width } => {
            if !(half_width > 0.0) {
                return Err(Error::domain("uniform noise needs half_width > 0"));
            }
            Ok(if x.abs() <= half_width { (2.0 * half_width).recip() } else { 0.0 })
        }
    }
}

/// Margin check for the clipped-square loss with clipping `delta`:
/// `gamma = F_W(a) - F_W(-a)` at `a = delta - 2 C'^2 r`, the noise mass left
/// around the origin once the localization shrinks the clipping window.
/// Reports `gamma = 0` when the window is exhausted (`a <= 0`).
pub fn bernstein_gamma_huber(
    noise: &NoiseSpec,
    delta: f64,
    c_prime: f64,
    r: f64,
) -> Result<BernsteinCheck> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::domain(format!("clipping must be positive, got {delta}")));
    }
    if !(c_prime > 0.0 && c_prime.is_finite()) {
        return Err(Error::domain(format!("norm-equivalence constant must be positive, got {c_prime}")));
    }
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("radius must be nonnegative, got {r}")));
    }
    let a = delta - 2.0 * c_prime * c_prime * r;
    let gamma = if a <= 0.0 { 0.0 } else { noise_cdf(noise, a)? - noise_cdf(noise, -a)? };
    Ok(BernsteinCheck {
        gamma,
        a_out: (gamma > 0.0).then(|| 4.0 / gamma),
        c_prime: Some(c_prime),
        epsilon: Some(2.0),
        radius_checked: r,
    })
}

/// Margin check for the quantile loss: `gamma` is the infimum of the noise
/// density over `[-radius_r, radius_r]`, which all supported laws (symmetric
/// and unimodal) attain at the boundary. Capped at 1, the largest mass a
/// probability bound can use.
pub fn bernstein_gamma_quantile(noise: &NoiseSpec, radius_r: f64) -> Result<BernsteinCheck> {
    if !(radius_r >= 0.0 && radius_r.is_finite()) {
        return Err(Error::domain(format!("radius must be nonnegative, got {radius_r}")));
    }
    let gamma = noise_density(noise, radius_r)?.min(1.0);
    Ok(BernsteinCheck {
        gamma,
        a_out: (gamma > 0.0).then(|| 4.0 / gamma),
        c_prime: None,
        epsilon: None,
        radius_checked: radius_r,
    })
}

/// Sup-norm localization radius for quantile regression over a kernel ball:
/// with norm equivalence constant `C' = (rho sup_K / r)^(eps/(2+eps))`, the
/// density condition must hold on `|z| <= 2^((2+eps)/(2 eps)) rho sup_K`,
/// which no longer involves `r`.
pub fn quantile_localization_radius(epsilon: f64, rho_norm: f64, sup_k: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::domain(format!("moment index must be positive, got {epsilon}")));
    }
    if !(rho_norm >= 0.0 && sup_k >= 0.0) {
        return Err(Error::domain("radius and kernel bound must be nonnegative"));
    }
    Ok(2.0_f64.powf((2.0 + epsilon) / (2.0 * epsilon)) * rho_norm * sup_k)
}

/// Closed-form margin for quantile regression under standard Cauchy noise:
/// `min(1, 1 / (pi (1 + 36 ||f*||^2 sup_K^2)))`.
pub fn quantile_gamma_remark(f_star_norm: f64, sup_k: f64) -> f64 {
    assert!(f_star_norm >= 0.0 && sup_k >= 0.0, "norms must be nonnegative");
    let scale = f_star_norm * sup_k;
    (std::f64::consts::PI * (1.0 + 36.0 * scale * scale)).recip().min(1.0)
}

/// One row of the moment-growth table: the empirical `L_q` norm and its
/// ratio to `sqrt(q)`. A bounded ratio profile is what sub-Gaussian
/// coordinate moments look like; heavy tails blow the ratio up with `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRatio {
    pub q: usize,
    pub lq_norm: f64,
    pub ratio: f64,
}

/// Empirical `L_q` norms of `samples` for `q = 1..=q_max`, each divided by
/// `sqrt(q)`.
pub fn moment_growth_diagnostic(samples: &[f64], q_max: usize) -> Result<Vec<MomentRatio>> {
    if samples.is_empty() {
        return Err(Error::domain("moment diagnostic needs at least one sample"));
    }
    if q_max < 2 {
        return Err(Error::domain("moment diagnostic needs q_max >= 2"));
    }
    let n = samples.len() as f64;
    Ok((1..=q_max)
        .map(|q| {
            let mean = kahan_sum(samples.iter().map(|&z| z.abs().powi(q as i32))) / n;
            let lq_norm = mean.powf(1.0 / q as f64);
            MomentRatio { q, lq_norm, ratio: lq_norm / (q as f64).sqrt() }
        })
        .collect())
}
