//! Adaptive penalty-level selection over a geometric grid.
//!
//! The regularization weight that theory prescribes is `r(phi*)^2 / phi*`,
//! which depends on the unknown penalty value `phi*` of the target. Given
//! only an upper bound `M >= phi*`, the selection rule fits one model per
//! grid level `phi_j = 2^(j-M)`, `j = 1..J` with `J = M + ceil(log2 M)`, and
//! compares every fitted model `m` against every level `j` through the
//! penalized excess increment
//!
//! ```text
//! T_j(m) = mean loss(m) - mean loss(j) + lambda_j (phi(m) - phi(j)),
//! ```
//!
//! accepting `m` at level `j` when `T_j(m) <= ((A*)^-1 + 2) lambda_j phi_j`.
//! The selected model is the first candidate lying in every acceptance set
//! from some level onward; the last level always accepts its own fit, so the
//! selection is total.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit_rerm, mean_loss_raw, Model, SolverConfig};
use crate::datagen::Dataset;
use crate::losses::LossSpec;
use crate::penalties::PenaltySpec;
use crate::{Error, Result};

/// Inputs the selection rule needs beyond the fitting problem itself.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LepskiConfig {
    /// Upper bound `M >= phi(target)`; the grid spans `2^(1-M) .. 2^(J-M)`.
    pub m_bound: usize,
    /// Bernstein constant `A*` in the acceptance threshold.
    pub a_star: f64,
}

impl LepskiConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_bound == 0 {
            return Err(Error::domain("m_bound must be >= 1"));
        }
        if !(self.a_star.is_finite() && self.a_star > 0.0) {
            return Err(Error::domain(format!("a_star must be positive, got {}", self.a_star)));
        }
        Ok(())
    }

    /// Grid length `J = M + ceil(log2 M)`.
    pub fn grid_len(&self) -> usize {
        let m = self.m_bound;
        m + m.next_power_of_two().trailing_zeros() as usize
    }
}

/// One grid level: penalty value, regularization weight, oracle radius.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridPoint {
    pub phi: f64,
    pub lambda: f64,
    pub radius: f64,
}

/// Grid, fits, acceptance statistics, and the selection.
///
/// Levels are sorted by nonincreasing `lambda` (the direction the acceptance
/// analysis assumes; an oracle producing the opposite ordering is handled by
/// this sort). `k_star` and `selected` are 1-based level indices.
#[derive(Debug)]
pub struct LepskiState {
    pub config: LepskiConfig,
    pub grid: Vec<GridPoint>,
    pub fitted: Vec<Model>,
    /// `increments[j][m] = T_{lambda_j}(fitted[m])`, both 0-based.
    pub increments: Vec<Vec<f64>>,
    /// Acceptance threshold per level.
    pub thresholds: Vec<f64>,
    /// Smallest level from which some single model is accepted onward.
    pub k_star: usize,
    /// 1-based index of the selected model.
    pub selected: usize,
}

impl LepskiState {
    pub fn f_tilde(&self) -> &Model {
        &self.fitted[self.selected - 1]
    }

    /// Membership of model `m` in the acceptance set of level `j` (1-based).
    pub fn is_member(&self, j: usize, m: usize) -> bool {
        self.increments[j - 1][m - 1] <= self.thresholds[j - 1]
    }
}

/// Runs the grid-fit-and-select procedure; `oracle` maps a grid penalty
/// level `phi_j` to the fixed-point radius `r_j` defining
/// `lambda_j = r_j^2 / phi_j`. Grid fits are independent and run in parallel.
pub fn lepski_select(
    data: &Dataset,
    loss: LossSpec,
    penalty: &PenaltySpec,
    lep: &LepskiConfig,
    cfg: &SolverConfig,
    oracle: &(dyn Fn(f64) -> Result<f64> + Sync),
) -> Result<LepskiState> {
    lep.validate()?;
    let j_total = lep.grid_len();
    let m = lep.m_bound as i32;
    let mut grid: Vec<GridPoint> = Vec::with_capacity(j_total);
    for j in 1..=j_total {
        let phi = 2.0_f64.powi(j as i32 - m);
        let radius = oracle(phi)?;
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::domain(format!(
                "oracle radius must be positive, got {radius} at phi={phi}"
            )));
        }
        let lambda = radius * radius / phi;
        grid.push(GridPoint { phi, lambda, radius });
    }
    grid.sort_by(|a, b| b.lambda.partial_cmp(&a.lambda).expect("finite lambdas"));

    let fitted: Vec<Model> = grid
        .par_iter()
        .map(|gp| fit_rerm(data, loss, penalty, gp.lambda, cfg, None))
        .collect::<Result<Vec<_>>>()?;

    let y = &data.targets;
    let stats: Vec<(f64, f64)> = fitted
        .iter()
        .map(|model| {
            let preds = model.predictions_on(data)?;
            let risk = mean_loss_raw(loss, &preds, y);
            let phi_val = penalty.eval(model.coefficients().view(), None)?;
            Ok((risk, phi_val))
        })
        .collect::<Result<Vec<_>>>()?;

    let thresholds: Vec<f64> = grid
        .iter()
        .map(|gp| (1.0 / lep.a_star + 2.0) * gp.lambda * gp.phi)
        .collect();
    let increments: Vec<Vec<f64>> = (0..j_total)
        .map(|j| {
            let (risk_j, phi_j) = stats[j];
            stats
                .iter()
                .map(|&(risk_m, phi_m)| (risk_m - risk_j) + grid[j].lambda * (phi_m - phi_j))
                .collect()
        })
        .collect();

    // For each model, the earliest level from which it stays accepted; the
    // selection takes the smallest such level, breaking ties toward the
    // earliest model.
    let mut k_star = j_total + 1;
    let mut selected = 0;
    for mi in 0..j_total {
        let mut k_m = 1;
        for j in 0..j_total {
            if increments[j][mi] > thresholds[j] {
                k_m = j + 2;
            }
        }
        if k_m < k_star {
            k_star = k_m;
            selected = mi + 1;
        }
    }
    debug_assert!(k_star <= j_total, "last level accepts its own fit");

    Ok(LepskiState { config: *lep, grid, fitted, increments, thresholds, k_star, selected })
}
