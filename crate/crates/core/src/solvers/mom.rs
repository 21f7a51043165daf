//! Minmax median-of-means estimation.
//!
//! The criterion replaces the empirical mean of loss increments with the
//! median of block means, which a bounded number of adversarial points cannot
//! move. No closed-form minimizer exists, so the fit runs the alternating
//! scheme used in the empirical MOM literature: each iteration locates the
//! median block of `loss_f - loss_g`, then takes one penalized descent step
//! for `f` and one for `g` on that block's empirical criterion.

use ndarray::{Array1, Array2};
use rand::prelude::*;

use super::{check_problem, KernelOp, KernelOpKind, Model, ModelVariant, SolverConfig};
use crate::datagen::{partition_blocks, stream_rng, BlockPartition, Dataset};
use crate::losses::{empirical_risk, LossSpec};
use crate::penalties::PenaltySpec;
use crate::rkhs::{KernelModel, KernelSpec};
use crate::{linalg, Error, Result};

/// Median over partition blocks of the mean loss increment `loss_f - loss_g`.
///
/// Block means are summed in ascending index order, so the value is bitwise
/// invariant under reordering of blocks and of points within a block; ties
/// between block means resolve to the same lower-median value either way.
pub fn mom_of_increments(
    loss: LossSpec,
    model_f: &Model,
    model_g: &Model,
    data: &Dataset,
    partition: &BlockPartition,
) -> Result<f64> {
    loss.validate()?;
    check_partition(partition, data.n())?;
    let uf = model_f.predictions_on(data)?;
    let ug = model_g.predictions_on(data)?;
    let y = &data.targets;
    let mut means: Vec<f64> = partition
        .blocks
        .iter()
        .map(|block| {
            let mut idx = block.clone();
            idx.sort_unstable();
            idx.iter()
                .map(|&i| loss.eval_raw(uf[i], y[i]) - loss.eval_raw(ug[i], y[i]))
                .sum::<f64>()
                / idx.len() as f64
        })
        .collect();
    Ok(linalg::lower_median(&mut means))
}

fn check_partition(partition: &BlockPartition, n: usize) -> Result<()> {
    if partition.blocks.is_empty() {
        return Err(Error::domain("partition has no blocks"));
    }
    for block in &partition.blocks {
        if block.is_empty() {
            return Err(Error::domain("partition contains an empty block"));
        }
        if block.iter().any(|&i| i >= n) {
            return Err(Error::domain("partition index out of range"));
        }
    }
    Ok(())
}

/// One side of the saddle iteration, in the geometry picked by the penalty.
enum ParamState<'a> {
    Linear { x: &'a Array2<f64>, t: Array1<f64> },
    Kernel { op: &'a KernelOp, a: Array1<f64>, b: Array1<f64> },
}

impl ParamState<'_> {
    fn init<'a>(data: &'a Dataset, op: Option<&'a KernelOp>) -> ParamState<'a> {
        match op {
            None => ParamState::Linear { x: &data.inputs, t: Array1::zeros(data.p()) },
            Some(op) => {
                let b = match &op.kind {
                    KernelOpKind::Gram { .. } => Array1::zeros(0),
                    KernelOpKind::Factored { phi } => Array1::zeros(phi.ncols()),
                };
                ParamState::Kernel { op, a: Array1::zeros(op.n()), b }
            }
        }
    }

    fn coefficients(&self) -> &Array1<f64> {
        match self {
            ParamState::Linear { t, .. } => t,
            ParamState::Kernel { a, .. } => a,
        }
    }

    fn predictions(&self) -> Array1<f64> {
        match self {
            ParamState::Linear { x, t } => x.dot(t),
            ParamState::Kernel { op, a, b } => match &op.kind {
                KernelOpKind::Gram { gram } => gram.dot(a),
                KernelOpKind::Factored { phi } => phi.dot(b),
            },
        }
    }

    /// Penalty value at the current parameters; `preds` must be the current
    /// predictions (the Gram path reuses `a^T (G a)`).
    fn penalty_value(&self, penalty: &PenaltySpec, preds: &Array1<f64>) -> f64 {
        match self {
            ParamState::Linear { t, .. } => penalty.eval_raw(t.view(), None),
            ParamState::Kernel { op, a, b } => match &op.kind {
                KernelOpKind::Gram { .. } => a.dot(preds),
                KernelOpKind::Factored { .. } => b.dot(b),
            },
        }
    }

    /// One penalized (sub)gradient step on the mean loss over `block`.
    fn block_descend(
        &mut self,
        loss: LossSpec,
        penalty: &PenaltySpec,
        lambda: f64,
        y: &Array1<f64>,
        preds: &Array1<f64>,
        block: &[usize],
        step: f64,
    ) -> Result<()> {
        let m = block.len() as f64;
        match self {
            ParamState::Linear { x, t } => {
                let mut grad = Array1::zeros(t.len());
                for &i in block {
                    let gi = loss.subgrad_raw(preds[i], y[i]) / m;
                    grad.scaled_add(gi, &x.row(i));
                }
                let mut v = t.clone();
                v.scaled_add(-step, &grad);
                *t = if step * lambda > 0.0 {
                    penalty.prox(v.view(), step * lambda, None)?
                } else {
                    v
                };
            }
            ParamState::Kernel { op, a, b } => match &op.kind {
                KernelOpKind::Gram { gram } => {
                    let mut z = a.mapv(|ai| 2.0 * lambda * ai);
                    for &i in block {
                        z[i] += loss.subgrad_raw(preds[i], y[i]) / m;
                    }
                    let w = gram.dot(&z);
                    a.scaled_add(-step, &w);
                }
                KernelOpKind::Factored { phi } => {
                    let mut d = b.mapv(|bi| 2.0 * lambda * bi);
                    for &i in block {
                        let gi = loss.subgrad_raw(preds[i], y[i]) / m;
                        d.scaled_add(gi, &phi.row(i));
                    }
                    let w = phi.dot(&d);
                    a.scaled_add(-step, &w);
                    b.scaled_add(-step, &phi.t().dot(&w));
                }
            },
        }
        Ok(())
    }

    /// Rebuilds a state around explicit coefficients (final-candidate scoring).
    fn with_coefficients(&self, coeffs: Array1<f64>) -> ParamState<'_> {
        match self {
            ParamState::Linear { x, .. } => ParamState::Linear { x, t: coeffs },
            ParamState::Kernel { op, .. } => {
                let b = match &op.kind {
                    KernelOpKind::Gram { .. } => Array1::zeros(0),
                    KernelOpKind::Factored { phi } => phi.t().dot(&coeffs),
                };
                ParamState::Kernel { op, a: coeffs, b }
            }
        }
    }
}

fn block_means(blocks: &[Vec<usize>], term: impl Fn(usize) -> f64) -> Vec<f64> {
    blocks
        .iter()
        .map(|b| b.iter().map(|&i| term(i)).sum::<f64>() / b.len() as f64)
        .collect()
}

fn sub_seed(seed: u64, tag: u64) -> u64 {
    stream_rng(seed, &[tag]).random::<u64>()
}

const EVAL_PARTITION_TAG: u64 = u64::MAX;

/// Fits the minmax MOM estimator with `s_blocks` blocks.
///
/// Alternating scheme per iteration: redraw the partition (unless
/// `reshuffle_blocks` is off), find the lower-median block of the loss
/// increment `loss_f - loss_g` (the constant penalty difference cannot change
/// which block is the median), then prox-descend `f` and `g` on their own
/// penalized block risks. Automatic steps rescale the full-sample schedules to
/// the block size and decay once the final third of the budget starts, where
/// iterates are also accumulated into a tail average.
///
/// Returned is the best of three candidates under the median-block objective
/// on a fresh held-out partition: the best-proxy iterate, the tail average,
/// and the zero model. With `s_blocks = 1` the criterion is the empirical
/// mean, and the `f` trajectory coincides with the penalized full-sample fit.
pub fn fit_mom_minmax(
    data: &Dataset,
    loss: LossSpec,
    penalty: &PenaltySpec,
    lambda: f64,
    s_blocks: usize,
    cfg: &SolverConfig,
    kernel: Option<&KernelSpec>,
) -> Result<Model> {
    check_problem(data, loss, penalty, lambda, cfg, kernel)?;
    let n = data.n();
    if s_blocks == 0 || s_blocks > n {
        return Err(Error::domain(format!(
            "block count must satisfy 1 <= S <= N, got S={s_blocks}, N={n}"
        )));
    }
    let y = &data.targets;
    // Checked entry point validates targets (finiteness, labels).
    empirical_risk(loss, Array1::zeros(n).view(), y.view())?;

    let op = kernel.map(|spec| KernelOp::build(data, spec)).transpose()?;
    // A single-block partition always hands descent the full sample (block
    // indices are stored ascending), so its spectrum never changes; computing
    // it once keeps the per-iteration cost at O(N p) instead of a fresh
    // power iteration.
    let full_sigma = op.is_none().then(|| linalg::design_sigma_max(data.inputs.view()));
    let mut f = ParamState::init(data, op.as_ref());
    let mut g = ParamState::init(data, op.as_ref());

    let total = cfg.max_iters;
    let tail_len = total.div_ceil(3);
    let tail_start = total - tail_len + 1;
    let smooth = loss.is_smooth();

    let fixed_partition = if cfg.reshuffle_blocks {
        None
    } else {
        Some(partition_blocks(n, s_blocks, sub_seed(cfg.seed, 0))?)
    };

    let mut trace: Vec<f64> = Vec::with_capacity(total);
    let mut best_q = f64::INFINITY;
    let mut best_coeffs = f.coefficients().clone();
    let mut tail_sum: Array1<f64> = Array1::zeros(f.coefficients().len());
    let mut tail_count = 0usize;

    for j in 1..=total {
        let drawn;
        let partition = match &fixed_partition {
            Some(p) => p,
            None => {
                drawn = partition_blocks(n, s_blocks, sub_seed(cfg.seed, j as u64))?;
                &drawn
            }
        };
        let uf = f.predictions();
        let ug = g.predictions();
        let increments = block_means(&partition.blocks, |i| {
            loss.eval_raw(uf[i], y[i]) - loss.eval_raw(ug[i], y[i])
        });
        let med = linalg::lower_median_argindex(&increments);
        let block = partition.blocks[med].as_slice();

        let step = auto_step(&f, loss, lambda, block, full_sigma, j, tail_len, cfg, smooth);
        f.block_descend(loss, penalty, lambda, y, &uf, block, step)?;
        g.block_descend(loss, penalty, lambda, y, &ug, block, step)?;

        let uf_new = f.predictions();
        let mut own = block_means(&partition.blocks, |i| loss.eval_raw(uf_new[i], y[i]));
        let q = linalg::lower_median(&mut own) + lambda * f.penalty_value(penalty, &uf_new);
        if !q.is_finite() || f.coefficients().iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver {
                message: "median-block iterates diverged to a non-finite objective".into(),
                iterations: j,
                trace,
            });
        }
        trace.push(q);
        if q < best_q {
            best_q = q;
            best_coeffs = f.coefficients().clone();
        }
        if j >= tail_start {
            tail_sum += f.coefficients();
            tail_count += 1;
        }
    }

    // Candidate selection on a held-out partition, so the pick is not biased
    // toward whichever partition an iterate happened to score well on.
    let eval_partition = partition_blocks(n, s_blocks, sub_seed(cfg.seed, EVAL_PARTITION_TAG))?;
    let tail_avg = tail_sum.mapv(|v| v / tail_count as f64);
    let zero = Array1::zeros(best_coeffs.len());
    let mut winner: Option<(f64, Array1<f64>)> = None;
    for cand in [best_coeffs, tail_avg, zero] {
        let state = f.with_coefficients(cand);
        let preds = state.predictions();
        let mut means = block_means(&eval_partition.blocks, |i| loss.eval_raw(preds[i], y[i]));
        let q = linalg::lower_median(&mut means) + lambda * state.penalty_value(penalty, &preds);
        let coeffs = match state {
            ParamState::Linear { t, .. } => t,
            ParamState::Kernel { a, .. } => a,
        };
        if winner.as_ref().is_none_or(|(best, _)| q < *best) {
            winner = Some((q, coeffs));
        }
    }
    let (objective, coeffs) = winner.expect("three candidates scored");

    let variant = match op {
        None => ModelVariant::Linear { coefficients: coeffs },
        Some(op) => ModelVariant::Kernel(KernelModel {
            coefficients: coeffs,
            training_inputs: op.points,
            kernel: op.spec,
        }),
    };
    Ok(Model {
        variant,
        objective,
        objective_trace: trace,
        iterations: total,
        kkt_residual: None,
        lambda,
    })
}

/// Step size for iteration `j` on the given median block. The smooth schedule
/// is the block analogue of the fixed `1/L` step with a late `1/sqrt(j)`
/// decay over the tail third; the nonsmooth schedule is `c/sqrt(j)` with `c`
/// matched to the block spectrum.
#[allow(clippy::too_many_arguments)]
fn auto_step(
    state: &ParamState<'_>,
    loss: LossSpec,
    lambda: f64,
    block: &[usize],
    full_sigma: Option<f64>,
    j: usize,
    tail_len: usize,
    cfg: &SolverConfig,
    smooth: bool,
) -> f64 {
    if let Some(rule) = &cfg.step_rule {
        return rule.step_at(j);
    }
    let m = block.len() as f64;
    match state {
        ParamState::Linear { x, .. } => {
            let sigma = if block.len() == x.nrows() {
                full_sigma.expect("full-design sigma cached for linear states")
            } else {
                let mut rows = Array2::zeros((block.len(), x.ncols()));
                for (r, &i) in block.iter().enumerate() {
                    rows.row_mut(r).assign(&x.row(i));
                }
                linalg::design_sigma_max_loose(rows.view())
            };
            if smooth {
                let denom = loss.curvature_bound().expect("smooth loss") * sigma * sigma;
                let base = if denom > 0.0 { m / denom } else { 1.0 };
                cfg.step_scale * base * tail_decay(j, tail_len)
            } else {
                let denom = loss.lipschitz() * sigma;
                let c = if denom > 0.0 { m.sqrt() / denom } else { 1.0 };
                cfg.step_scale * c / (j as f64).sqrt()
            }
        }
        ParamState::Kernel { op, .. } => {
            if smooth {
                let curv = loss.curvature_bound().expect("smooth loss");
                let denom = op.sigma * (curv * op.sigma / m + 2.0 * lambda);
                let base = if denom > 0.0 { 1.0 / denom } else { 1.0 };
                cfg.step_scale * base * tail_decay(j, tail_len)
            } else {
                let c = if op.sigma > 0.0 { 8.0 / op.sigma } else { 1.0 };
                cfg.step_scale * c / (j as f64).sqrt()
            }
        }
    }
}

fn tail_decay(j: usize, tail_len: usize) -> f64 {
    (tail_len as f64 / j as f64).sqrt().min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{
        contaminate, make_regression_dataset, ContaminationMode, DesignSpec, NoiseSpec, Truth,
    };
    use crate::solvers::fit_rerm;
    use ndarray::array;

    fn en(alpha: f64) -> PenaltySpec {
        PenaltySpec::ElasticNet { alpha }
    }

    fn linear_model(coeffs: Array1<f64>) -> Model {
        Model {
            variant: ModelVariant::Linear { coefficients: coeffs },
            objective: 0.0,
            objective_trace: Vec::new(),
            iterations: 0,
            kkt_residual: None,
            lambda: 0.0,
        }
    }

    fn ones_design(targets: Array1<f64>) -> Dataset {
        let n = targets.len();
        Dataset {
            inputs: Array2::from_elem((n, 1), 1.0),
            targets,
            truth: None,
            outliers: Vec::new(),
        }
    }

    /// With f "= 0" and g predicting far above every target, the hinge
    /// increment at point i is exactly y_i, so block means are dictated
    /// directly by the targets.
    fn increment_fixture(targets: Array1<f64>) -> (Dataset, Model, Model) {
        let data = ones_design(targets);
        let f = linear_model(array![0.0]);
        let g = linear_model(array![1000.0]);
        (data, f, g)
    }

    #[test]
    fn median_of_block_means_follows_the_lower_rule() {
        let (data, f, g) = increment_fixture(array![1.0, 5.0, 3.0]);
        let partition = BlockPartition { blocks: vec![vec![0], vec![1], vec![2]], dropped: vec![] };
        let v = mom_of_increments(LossSpec::HingeRegression, &f, &g, &data, &partition).unwrap();
        assert_eq!(v, 3.0);

        let (data, f, g) = increment_fixture(array![1.0, 2.0, 3.0, 10.0]);
        let partition =
            BlockPartition { blocks: vec![vec![0], vec![1], vec![2], vec![3]], dropped: vec![] };
        let v = mom_of_increments(LossSpec::HingeRegression, &f, &g, &data, &partition).unwrap();
        assert_eq!(v, 2.0);
    }

    #[test]
    fn single_block_reduces_to_the_empirical_mean() {
        let (data, f, g) = increment_fixture(array![1.0, 5.0, 3.0, 2.0]);
        let partition = BlockPartition { blocks: vec![vec![0, 1, 2, 3]], dropped: vec![] };
        let v = mom_of_increments(LossSpec::HingeRegression, &f, &g, &data, &partition).unwrap();
        assert_eq!(v, (1.0 + 5.0 + 3.0 + 2.0) / 4.0);
    }

    #[test]
    fn identical_points_make_the_median_equal_the_mean_exactly() {
        // Loss values chosen dyadic so block sums round exactly.
        let data = ones_design(Array1::from_elem(12, 2.5));
        let f = linear_model(array![0.0]); // huber(1): |z|=2.5 -> 2.0
        let g = linear_model(array![2.0]); // huber(1): |z|=0.5 -> 0.125
        let loss = LossSpec::Huber { delta: 1.0 };
        let empirical = {
            let p1 = BlockPartition { blocks: vec![(0..12).collect()], dropped: vec![] };
            mom_of_increments(loss, &f, &g, &data, &p1).unwrap()
        };
        assert_eq!(empirical, 2.0 - 0.125);
        let p3 = partition_blocks(12, 3, 99).unwrap();
        assert_eq!(mom_of_increments(loss, &f, &g, &data, &p3).unwrap(), empirical);
    }

    #[test]
    fn median_is_invariant_under_block_and_within_block_permutations() {
        let truth = Array1::from_shape_fn(4, |j| 0.5 - 0.2 * j as f64);
        let data = make_regression_dataset(
            &DesignSpec::GaussianIso,
            &NoiseSpec::Gaussian { sigma: 1.0 },
            &Truth::Linear(truth),
            30,
            5,
        )
        .unwrap();
        let f = linear_model(Array1::from_elem(4, 0.3));
        let g = linear_model(Array1::from_elem(4, -0.1));
        let loss = LossSpec::Huber { delta: 2.0 };
        let partition = partition_blocks(30, 5, 7).unwrap();
        let v = mom_of_increments(loss, &f, &g, &data, &partition).unwrap();
        let mut scrambled = partition.blocks.clone();
        scrambled.reverse();
        for b in &mut scrambled {
            b.reverse();
        }
        let p2 = BlockPartition { blocks: scrambled, dropped: partition.dropped.clone() };
        assert_eq!(mom_of_increments(loss, &f, &g, &data, &p2).unwrap(), v);
    }

    #[test]
    fn partition_averaged_median_approaches_the_empirical_mean() {
        let truth = Array1::from_shape_fn(3, |j| 1.0 - 0.4 * j as f64);
        let data = make_regression_dataset(
            &DesignSpec::GaussianIso,
            &NoiseSpec::Gaussian { sigma: 0.5 },
            &Truth::Linear(truth),
            1000,
            21,
        )
        .unwrap();
        // f and g sit symmetrically around the truth (1.0, 0.6, 0.2), so the
        // increment distribution is symmetric and the block-mean median is
        // unbiased for the mean up to the empirical skew of one sample.
        let f = linear_model(array![1.3, 0.2, 0.4]);
        let g = linear_model(array![0.7, 1.0, 0.0]);
        let loss = LossSpec::Huber { delta: 1.0 };
        let full = BlockPartition { blocks: vec![(0..1000).collect()], dropped: vec![] };
        let mean = mom_of_increments(loss, &f, &g, &data, &full).unwrap();
        // Odd block count: the lower median is the exact middle order
        // statistic, which is unbiased for symmetric block means; an even
        // count would sit half an order-statistic spacing low by design.
        let medians: Vec<f64> = (0..200)
            .map(|k| {
                let p = partition_blocks(1000, 5, 1000 + k).unwrap();
                mom_of_increments(loss, &f, &g, &data, &p).unwrap()
            })
            .collect();
        let (avg, stderr) = linalg::mean_stderr(&medians);
        assert!(
            (avg - mean).abs() <= 3.0 * stderr,
            "avg {avg} vs mean {mean} (stderr {stderr})"
        );
    }

    #[test]
    fn one_block_matches_the_full_sample_fit() {
        let truth = Array1::from_shape_fn(5, |j| if j % 2 == 0 { 0.8 } else { -0.4 });
        let data = make_regression_dataset(
            &DesignSpec::GaussianIso,
            &NoiseSpec::Gaussian { sigma: 0.3 },
            &Truth::Linear(truth),
            200,
            31,
        )
        .unwrap();
        for (loss, iters) in
            [(LossSpec::Huber { delta: 1.5 }, 1500), (LossSpec::Quantile { tau: 0.5 }, 6000)]
        {
            let cfg = SolverConfig { max_iters: iters, ..Default::default() };
            let rerm = fit_rerm(&data, loss, &en(0.5), 0.05, &cfg, None).unwrap();
            let mom = fit_mom_minmax(&data, loss, &en(0.5), 0.05, 1, &cfg, None).unwrap();
            let rel = (rerm.objective - mom.objective).abs() / rerm.objective.abs();
            assert!(rel <= 1e-3, "S=1 objective {} vs RERM {}", mom.objective, rerm.objective);
        }
    }

    #[test]
    fn runs_are_deterministic_for_a_seed() {
        let truth = Array1::from_elem(3, 0.5);
        let data = make_regression_dataset(
            &DesignSpec::GaussianIso,
            &NoiseSpec::Student { nu: 3.0 },
            &Truth::Linear(truth),
            120,
            41,
        )
        .unwrap();
        let cfg = SolverConfig { max_iters: 300, seed: 9, ..Default::default() };
        let a = fit_mom_minmax(&data, LossSpec::Huber { delta: 1.0 }, &en(0.5), 0.02, 8, &cfg, None)
            .unwrap();
        let b = fit_mom_minmax(&data, LossSpec::Huber { delta: 1.0 }, &en(0.5), 0.02, 8, &cfg, None)
            .unwrap();
        assert_eq!(a.coefficients(), b.coefficients());
        assert_eq!(a.objective_trace, b.objective_trace);
        assert_eq!(a.iterations, 300);
    }

    #[test]
    fn survives_gross_outliers_that_wreck_the_mean_fit() {
        let truth = Array1::from_elem(5, 0.5);
        let clean = make_regression_dataset(
            &DesignSpec::GaussianIso,
            &NoiseSpec::Gaussian { sigma: 0.5 },
            &Truth::Linear(truth.clone()),
            400,
            55,
        )
        .unwrap();
        let dirty = contaminate(&clean, 0.05, 1e6, ContaminationMode::Both, 56).unwrap();
        let s = (7.0_f64 * 20.0 / 3.0).ceil() as usize + 1;
        let cfg = SolverConfig { max_iters: 1200, seed: 3, ..Default::default() };
        let loss = LossSpec::Huber { delta: 2.0 };
        let mom = fit_mom_minmax(&dirty, loss, &en(0.5), 0.01, s, &cfg, None).unwrap();
        let rerm = fit_rerm(&dirty, loss, &en(0.5), 0.01, &cfg, None).unwrap();
        let err = |m: &Model| {
            let d = m.coefficients() - &truth;
            d.dot(&d).sqrt()
        };
        assert!(mom.coefficients().iter().all(|v| v.is_finite()));
        let (em, er) = (err(&mom), err(&rerm));
        assert!(em < er, "MOM error {em} should beat contaminated RERM {er}");
        assert!(em < 0.5, "MOM error {em} too large");
    }

    #[test]
    fn block_count_bounds_are_enforced() {
        let data = ones_design(array![1.0, 2.0, 3.0]);
        let cfg = SolverConfig::default();
        let loss = LossSpec::Huber { delta: 1.0 };
        assert!(fit_mom_minmax(&data, loss, &en(0.5), 0.1, 0, &cfg, None).is_err());
        assert!(fit_mom_minmax(&data, loss, &en(0.5), 0.1, 4, &cfg, None).is_err());
        let empty = BlockPartition { blocks: vec![vec![0], vec![]], dropped: vec![] };
        let f = linear_model(array![0.0]);
        assert!(mom_of_increments(loss, &f, &f, &data, &empty).is_err());
        let oob = BlockPartition { blocks: vec![vec![0, 7]], dropped: vec![] };
        assert!(mom_of_increments(loss, &f, &f, &data, &oob).is_err());
    }
}
