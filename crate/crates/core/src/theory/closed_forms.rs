//! Closed-form complexity radii: the two-branch elastic-net radii, the
//! power-law kernel radius, and the block-count floor for median-of-means.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Squared elastic-net radii: `r1_sq` is the sparsity-driven (l1) radius,
/// `r2_sq` the dimension-driven (l2) radius, and `r_star_sq` their minimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticNetRadii {
    pub r1_sq: f64,
    pub r2_sq: f64,
    pub r_star_sq: f64,
}

/// Evaluates the two-branch closed forms for the elastic-net fixed point
/// under an isotropic sub-Gaussian design.
///
/// With `rho = (8 + 4/A) phi_star` and `c = 64 delta B A`:
///
/// - `r1_sq = (rho/(1-alpha)) sqrt((c/N) log(e p (1-alpha) / (sqrt(N) rho)))`
///   when `rho^2 N / ((1-alpha)^2 c) <= p^2`, else `c p / N`;
/// - `r2_sq = c p / N` when `N >= c alpha p / rho`, else
///   `sqrt(64 delta B rho p / (alpha N))`.
pub fn elastic_net_r_star(
    n: usize,
    p: usize,
    alpha: f64,
    delta: f64,
    b_subg: f64,
    a: f64,
    phi_star: f64,
) -> Result<ElasticNetRadii> {
    if n == 0 || p == 0 {
        return Err(Error::domain("closed forms need n >= 1 and p >= 1"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!(
            "elastic-net mixing must lie strictly inside (0,1), got {alpha}"
        )));
    }
    for (name, v) in [("delta", delta), ("b_subg", b_subg), ("a", a), ("phi_star", phi_star)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::domain(format!("{name} must be positive and finite, got {v}")));
        }
    }
    let nf = n as f64;
    let pf = p as f64;
    let rho = (8.0 + 4.0 / a) * phi_star;
    let c = 64.0 * delta * b_subg * a;
    let dim_rate = c * pf / nf;

    let sparse_regime = (rho / (1.0 - alpha)).powi(2) * nf / c <= pf * pf;
    let r1_sq = if sparse_regime {
        let log_arg = std::f64::consts::E * pf * (1.0 - alpha) / (nf.sqrt() * rho);
        let val = rho / (1.0 - alpha) * (c / nf * log_arg.ln()).sqrt();
        // Just inside the regime boundary the logarithm can dip below zero;
        // there the dimension branch is the valid bound.
        if val.is_finite() { val.min(dim_rate) } else { dim_rate }
    } else {
        dim_rate
    };

    let r2_sq = if nf >= c * alpha * pf / rho {
        dim_rate
    } else {
        (64.0 * delta * b_subg * rho * pf / (alpha * nf)).sqrt()
    };

    Ok(ElasticNetRadii { r1_sq, r2_sq, r_star_sq: r1_sq.min(r2_sq) })
}

/// Squared kernel radii for a spectrum with `lambda_k <= beta k^(-1/p)`:
/// the Rademacher radius `r_tilde_sq`, its sixth `r_bar_sq`, and the
/// structural constant `c_const` in front of the rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelRadii {
    pub r_bar_sq: f64,
    pub r_tilde_sq: f64,
    pub c_const: f64,
}

/// Closed-form kernel radius
/// `r_tilde_sq = C ||f*||^(2p/(p+1)) / N^(1/(p+1))` with
/// `C = (384 A beta L)^(2/(p+1)) (4 (2 + 1/A))^(2p/(p+1))` and
/// `r_bar_sq = r_tilde_sq / 6`.
pub fn kernel_r_bar(
    a: f64,
    beta: f64,
    l: f64,
    p_decay: f64,
    f_star_norm: f64,
    n: usize,
) -> Result<KernelRadii> {
    if !(p_decay > 0.0 && p_decay < 1.0) {
        return Err(Error::domain(format!(
            "spectral decay exponent must lie in (0,1), got {p_decay}"
        )));
    }
    if n == 0 {
        return Err(Error::domain("kernel radius needs n >= 1"));
    }
    for (name, v) in [("a", a), ("beta", beta), ("l", l), ("f_star_norm", f_star_norm)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::domain(format!("{name} must be positive and finite, got {v}")));
        }
    }
    let e_lead = 2.0 / (p_decay + 1.0);
    let e_tail = 2.0 * p_decay / (p_decay + 1.0);
    let c_const = (384.0 * a * beta * l).powf(e_lead) * (4.0 * (2.0 + 1.0 / a)).powf(e_tail);
    let r_tilde_sq = c_const * f_star_norm.powf(e_tail) / (n as f64).powf(1.0 / (p_decay + 1.0));
    Ok(KernelRadii { r_bar_sq: r_tilde_sq / 6.0, r_tilde_sq, c_const })
}

/// Block-count complexity floor `max(r_tilde_sq, 368 A^2 L^2 S / N)` for
/// median-of-means with `S` blocks.
pub fn c_s_r(a: f64, l: f64, s: usize, n: usize, r_tilde_sq: f64) -> f64 {
    assert!(n >= 1, "c_s_r needs n >= 1");
    r_tilde_sq.max(368.0 * a * a * l * l * s as f64 / n as f64)
}
