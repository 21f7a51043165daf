//! Bisection solver for complexity fixed points: the smallest radius at
//! which a monotone complexity estimate drops below a quadratic threshold,
//! together with a two-sided numerical certificate.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Which defining inequality the radius must satisfy. Each shape maps the
/// structural constants onto the full threshold, so complexity oracles
/// return raw width or Rademacher estimates without any constants baked in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdShape {
    /// Gaussian-width inequality: complexity <= sqrt(N) r^2 / (64 L B A).
    GaussianWidth,
    /// Block-sample Rademacher inequality, already maximized over data
    /// halves by the oracle: complexity <= N r^2 / (384 A L).
    RademacherHalves,
    /// Bounded-kernel Rademacher inequality: complexity <= N r^2 / (64 A L).
    KernelRademacher,
}

impl ThresholdShape {
    /// Threshold value at radius `r` for Bernstein constant `a`, sample size
    /// `n`, Lipschitz constant `l`, and sub-Gaussian constant `b` (used by
    /// the Gaussian-width shape only).
    pub fn threshold(&self, r: f64, a: f64, n: usize, l: f64, b: f64) -> f64 {
        let nf = n as f64;
        match self {
            ThresholdShape::GaussianWidth => nf.sqrt() * r * r / (64.0 * l * b * a),
            ThresholdShape::RademacherHalves => nf * r * r / (384.0 * a * l),
            ThresholdShape::KernelRademacher => nf * r * r / (64.0 * a * l),
        }
    }
}

/// A fixed-point problem: a complexity oracle plus the constants that
/// parameterize the threshold. The oracle returns `(estimate, mc_stderr)`
/// at a given radius and must be nondecreasing in the radius; freezing the
/// Monte-Carlo draws across radii (common random numbers) guarantees that
/// per draw and keeps the bisection deterministic.
pub struct FixedPointProblem<'a> {
    pub complexity: &'a (dyn Fn(f64) -> Result<(f64, f64)> + Sync),
    pub shape: ThresholdShape,
    /// Bernstein constant A.
    pub a: f64,
    pub n: usize,
    pub lipschitz: f64,
    /// Sub-Gaussian norm-equivalence constant B; only the Gaussian-width
    /// shape consumes it.
    pub subgaussian_b: f64,
    /// Relative bisection tolerance on the radius.
    pub tol: f64,
}

/// Complexity/threshold pairs recorded at the returned radius and at the
/// shrunken radius `radius / 1.1`, where the inequality must fail again.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub at_radius: (f64, f64),
    pub at_shrunk: (f64, f64),
}

/// Outcome of a fixed-point search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointResult {
    pub radius: f64,
    /// Bernstein constant the threshold was evaluated with.
    pub a: f64,
    /// Monte-Carlo standard error of the complexity estimate at `radius`.
    pub mc_stderr: f64,
    pub certificate: Certificate,
}

/// Radius of the penalty ball in the fixed-point localization,
/// `eta (4 + 2/A) phi(f*)`.
pub fn phi_ball_radius(eta: f64, a: f64, phi_star: f64) -> f64 {
    eta * (4.0 + 2.0 / a) * phi_star
}

/// Smallest radius where the complexity falls below the threshold.
///
/// The search brackets upward by doubling (at most 60 times), then bisects
/// to relative tolerance `tol`, always keeping the returned endpoint on the
/// satisfied side. A radius of zero is returned when the inequality already
/// holds at 1e-9; its shrunk certificate is vacuous.
pub fn fixed_point_solve(problem: &FixedPointProblem) -> Result<FixedPointResult> {
    if !(problem.a > 0.0) || !(problem.lipschitz > 0.0) || !(problem.tol > 0.0) {
        return Err(Error::config("fixed point needs a > 0, lipschitz > 0, tol > 0"));
    }
    if problem.n == 0 {
        return Err(Error::config("fixed point needs n >= 1"));
    }
    if matches!(problem.shape, ThresholdShape::GaussianWidth) && !(problem.subgaussian_b > 0.0) {
        return Err(Error::config("gaussian-width shape needs subgaussian_b > 0"));
    }
    let threshold =
        |r: f64| problem.shape.threshold(r, problem.a, problem.n, problem.lipschitz, problem.subgaussian_b);
    let eval = |r: f64| -> Result<(bool, f64, f64)> {
        let (est, stderr) = (problem.complexity)(r)?;
        if !est.is_finite() {
            return Err(Error::FixedPoint(format!(
                "complexity oracle returned {est} at radius {r}"
            )));
        }
        Ok((est <= threshold(r), est, stderr))
    };

    let eps = 1e-9;
    let (holds_at_eps, est_eps, se_eps) = eval(eps)?;
    if holds_at_eps {
        return Ok(FixedPointResult {
            radius: 0.0,
            a: problem.a,
            mc_stderr: se_eps,
            certificate: Certificate {
                at_radius: (est_eps, threshold(eps)),
                at_shrunk: (0.0, 0.0),
            },
        });
    }

    let mut lo = eps;
    let mut hi = 1.0;
    let mut doublings = 0;
    while !eval(hi)?.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::FixedPoint(format!(
                "no radius up to {hi:.3e} satisfies the defining inequality"
            )));
        }
    }
    while (hi - lo) / hi > problem.tol {
        let mid = 0.5 * (lo + hi);
        if eval(mid)?.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    let (_, est_hi, se_hi) = eval(hi)?;
    let shrunk = hi / 1.1;
    let (_, est_sh, _) = eval(shrunk)?;
    Ok(FixedPointResult {
        radius: hi,
        a: problem.a,
        mc_stderr: se_hi,
        certificate: Certificate {
            at_radius: (est_hi, threshold(hi)),
            at_shrunk: (est_sh, threshold(shrunk)),
        },
    })
}
