//! Small dense linear-algebra and statistics utilities.
//!
//! Everything here is hand-rolled on top of `ndarray` so the crate does not
//! link a LAPACK backend: power iteration for operator norms, an unblocked
//! Cholesky factorization for the shifted-Gram solves inside proximal maps,
//! and a cyclic Jacobi eigendecomposition for the symmetric matrices that
//! show up in complexity estimation (at most a few hundred rows there).

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

/// Soft-thresholding operator, the proximal map of `thr * |.|`.
#[inline]
pub(crate) fn soft_threshold(x: f64, thr: f64) -> f64 {
    if x > thr {
        x - thr
    } else if x < -thr {
        x + thr
    } else {
        0.0
    }
}

/// Lower median of a slice: the value of rank `ceil(n/2)` (1-based).
///
/// For odd `n` this is the usual median; for even `n` it is the smaller of
/// the two middle values. The slice is reordered in place.
pub(crate) fn lower_median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty slice");
    let rank = values.len().div_ceil(2) - 1;
    *values
        .select_nth_unstable_by(rank, |a, b| a.total_cmp(b))
        .1
}

/// Index attaining the lower median of `values`.
///
/// Ties are broken by the smaller index so the selection is deterministic.
pub(crate) fn lower_median_argindex(values: &[f64]) -> usize {
    assert!(!values.is_empty(), "median of an empty slice");
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    order[values.len().div_ceil(2) - 1]
}

/// Compensated (Kahan) summation, for long sums of small terms.
pub(crate) fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Mean and standard error of the mean (unbiased variance, `n - 1`).
pub(crate) fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    assert!(n > 0, "mean of an empty slice");
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Largest eigenvalue of a symmetric positive semidefinite operator given by
/// its matrix-vector product, via power iteration.
///
/// Uses a fixed deterministic start vector; converges to the dominant
/// eigenvalue for PSD operators. Returns 0 for the zero operator.
pub(crate) fn largest_eigenvalue_sym(
    apply: impl Fn(ArrayView1<f64>) -> Array1<f64>,
    dim: usize,
) -> f64 {
    largest_eigenvalue_sym_bounded(apply, dim, 1e-12, 300)
}

/// Power iteration with caller-chosen relative tolerance and iteration cap,
/// for callers (step-size schedules) that trade precision for speed.
pub(crate) fn largest_eigenvalue_sym_bounded(
    apply: impl Fn(ArrayView1<f64>) -> Array1<f64>,
    dim: usize,
    tol: f64,
    max_iters: usize,
) -> f64 {
    assert!(dim > 0, "operator of dimension zero");
    // Ramped start avoids starting orthogonal to the dominant eigenvector for
    // the structured matrices seen here.
    let mut v = Array1::from_iter((0..dim).map(|i| 1.0 + (i as f64) / (dim as f64)));
    let norm = v.dot(&v).sqrt();
    v.mapv_inplace(|x| x / norm);
    let mut lambda = 0.0f64;
    for _ in 0..max_iters {
        let av = apply(v.view());
        let norm = av.dot(&av).sqrt();
        if norm < 1e-300 {
            return 0.0;
        }
        let next = av / norm;
        let new_lambda = apply(next.view()).dot(&next);
        let done = (new_lambda - lambda).abs() <= tol * new_lambda.abs().max(1.0);
        v = next;
        lambda = new_lambda;
        if done {
            break;
        }
    }
    lambda
}

/// Largest singular value of a design matrix, via power iteration on `X^T X`.
pub(crate) fn design_sigma_max(x: ArrayView2<f64>) -> f64 {
    let apply = |v: ArrayView1<f64>| x.t().dot(&x.dot(&v));
    largest_eigenvalue_sym(apply, x.ncols()).max(0.0).sqrt()
}

/// Cheap spectral-norm estimate for step sizing: ~0.1% relative accuracy,
/// bounded iteration count. A slightly off singular value only perturbs a
/// step length, so the tight default tolerance would be wasted here.
pub(crate) fn design_sigma_max_loose(x: ArrayView2<f64>) -> f64 {
    let apply = |v: ArrayView1<f64>| x.t().dot(&x.dot(&v));
    largest_eigenvalue_sym_bounded(apply, x.ncols(), 1e-3, 80).max(0.0).sqrt()
}

/// Operator norm of a symmetric PSD matrix (its largest eigenvalue).
pub(crate) fn sym_operator_norm(a: ArrayView2<f64>) -> f64 {
    let apply = |v: ArrayView1<f64>| a.dot(&v);
    largest_eigenvalue_sym(apply, a.ncols()).max(0.0)
}

/// Unblocked Cholesky factorization `A = L L^T`. Returns `None` if a pivot
/// is not strictly positive.
pub(crate) fn cholesky(a: &Array2<f64>) -> Option<Array2<f64>> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[[i, i]] = s.sqrt();
            } else {
                l[[i, j]] = s / l[[j, j]];
            }
        }
    }
    Some(l)
}

/// Solves `L L^T x = b` given the Cholesky factor `L`.
fn cholesky_solve(l: &Array2<f64>, b: ArrayView1<f64>) -> Array1<f64> {
    let n = l.nrows();
    let mut y = b.to_owned();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[[i, k]] * y[k];
        }
        y[i] = s / l[[i, i]];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[[k, i]] * y[k];
        }
        y[i] = s / l[[i, i]];
    }
    y
}

/// Solves `(I + c K) x = b` for a symmetric PSD `K` by Cholesky.
///
/// Rounding can push a marginal matrix indefinite, in which case one retry
/// with a `1e-10` diagonal jitter is attempted before giving up.
pub(crate) fn solve_shifted_gram(
    k: ArrayView2<f64>,
    c: f64,
    b: ArrayView1<f64>,
) -> Option<Array1<f64>> {
    let n = k.nrows();
    let mut a = k.to_owned() * c;
    for i in 0..n {
        a[[i, i]] += 1.0;
    }
    if let Some(l) = cholesky(&a) {
        return Some(cholesky_solve(&l, b));
    }
    for i in 0..n {
        a[[i, i]] += 1e-10;
    }
    cholesky(&a).map(|l| cholesky_solve(&l, b))
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns `(values, vectors)` with eigenvalues sorted in descending order
/// and eigenvectors in the matching columns. Intended for the moderate sizes
/// used in complexity estimation (n up to a few hundred).
pub(crate) fn jacobi_eigen(a: ArrayView2<f64>) -> (Array1<f64>, Array2<f64>) {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let mut m = a.to_owned();
    let mut v = Array2::<f64>::eye(n);
    let frob = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = 1e-14 * frob.max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off += m[[p, q]].abs();
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[[p, q]];
                if apq.abs() <= tol / (n * n) as f64 {
                    continue;
                }
                let tau = (m[[q, q]] - m[[p, p]]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for i in 0..n {
                    let mip = m[[i, p]];
                    let miq = m[[i, q]];
                    m[[i, p]] = c * mip - s * miq;
                    m[[i, q]] = s * mip + c * miq;
                }
                for j in 0..n {
                    let mpj = m[[p, j]];
                    let mqj = m[[q, j]];
                    m[[p, j]] = c * mpj - s * mqj;
                    m[[q, j]] = s * mpj + c * mqj;
                }
                for i in 0..n {
                    let vip = v[[i, p]];
                    let viq = v[[i, q]];
                    v[[i, p]] = c * vip - s * viq;
                    v[[i, q]] = s * vip + c * viq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[j, j]].total_cmp(&m[[i, i]]).then(i.cmp(&j)));
    let values = Array1::from_iter(order.iter().map(|&i| m[[i, i]]));
    let mut vectors = Array2::<f64>::zeros((n, n));
    for (new_col, &old_col) in order.iter().enumerate() {
        vectors.column_mut(new_col).assign(&v.column(old_col));
    }
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
        let mut a = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            for j in 0..=i {
                let x: f64 = rng.random_range(-1.0..1.0);
                a[[i, j]] = x;
                a[[j, i]] = x;
            }
        }
        a
    }

    #[test]
    fn soft_threshold_matches_definition() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
        assert_eq!(soft_threshold(0.5, 1.0), 0.0);
        assert_eq!(soft_threshold(-0.5, 1.0), 0.0);
        assert_eq!(soft_threshold(1.0, 1.0), 0.0);
    }

    #[test]
    fn lower_median_takes_rank_ceil_half() {
        assert_eq!(lower_median(&mut [3.0]), 3.0);
        assert_eq!(lower_median(&mut [1.0, 2.0, 3.0, 4.0]), 2.0);
        assert_eq!(lower_median(&mut [4.0, 1.0, 3.0, 2.0, 5.0]), 3.0);
        // Block means 1.5, 3.5, 100.5: median ignores the wild block.
        assert_eq!(lower_median(&mut [100.5, 1.5, 3.5]), 3.5);
    }

    #[test]
    fn lower_median_argindex_breaks_ties_low() {
        assert_eq!(lower_median_argindex(&[5.0, 1.0, 3.0]), 2);
        assert_eq!(lower_median_argindex(&[2.0, 2.0, 2.0]), 1);
        assert_eq!(lower_median_argindex(&[1.0, 2.0, 3.0, 4.0]), 1);
    }

    #[test]
    fn kahan_sum_handles_cancellation() {
        // 1 + 1e-16 repeated: naive summation loses the small terms.
        let terms = std::iter::once(1.0).chain(std::iter::repeat_n(1e-16, 1_000_000));
        let got = kahan_sum(terms);
        assert!((got - (1.0 + 1e-10)).abs() < 1e-14, "got {got}");
    }

    #[test]
    fn mean_stderr_matches_hand_computation() {
        let (m, se) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert!((m - 2.5).abs() < 1e-15);
        // Sample variance 5/3, stderr sqrt(5/12).
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        let (_, se1) = mean_stderr(&[7.0]);
        assert_eq!(se1, 0.0);
    }

    #[test]
    fn power_iteration_matches_known_eigenvalue() {
        let a = array![[2.0, 1.0], [1.0, 2.0]];
        let lam = sym_operator_norm(a.view());
        assert!((lam - 3.0).abs() < 1e-9, "got {lam}");
        let zero = Array2::<f64>::zeros((3, 3));
        assert_eq!(sym_operator_norm(zero.view()), 0.0);
    }

    #[test]
    fn design_sigma_max_matches_jacobi_on_random_designs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let n = rng.random_range(2..12);
            let p = rng.random_range(1..8);
            let x = Array2::from_shape_fn((n, p), |_| rng.random_range(-2.0..2.0f64));
            let gram = x.t().dot(&x);
            let (vals, _) = jacobi_eigen(gram.view());
            let want = vals[0].max(0.0).sqrt();
            let got = design_sigma_max(x.view());
            assert!((got - want).abs() <= 1e-8 * want.max(1.0), "{got} vs {want}");
        }
    }

    #[test]
    fn cholesky_solve_recovers_known_solution() {
        // (I + 1*K) x = b with K = [[2,1],[1,2]]: A = [[3,1],[1,3]].
        let k = array![[2.0, 1.0], [1.0, 2.0]];
        let x = solve_shifted_gram(k.view(), 1.0, array![1.0, 1.0].view()).unwrap();
        assert!((x[0] - 0.25).abs() < 1e-12);
        assert!((x[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn cholesky_jitter_rescues_singular_shift() {
        // K with eigenvalue -1/c makes I + cK exactly singular; the jittered
        // retry returns the minimum-norm-ish solution instead of failing.
        let k = array![[0.0, -1.0], [-1.0, 0.0]];
        let x = solve_shifted_gram(k.view(), 1.0, array![1.0, -1.0].view()).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-3, "got {x}");
        assert!((x[1] + 0.5).abs() < 1e-3, "got {x}");
    }

    #[test]
    fn cholesky_rejects_clearly_indefinite_matrix() {
        let a = array![[1.0, 2.0], [2.0, 1.0]];
        assert!(cholesky(&a).is_none());
    }

    #[test]
    fn jacobi_eigen_reconstructs_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let n = rng.random_range(2..15);
            let a = random_symmetric(n, &mut rng);
            let (vals, vecs) = jacobi_eigen(a.view());
            // Columns are orthonormal.
            let vtv = vecs.t().dot(&vecs);
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((vtv[[i, j]] - want).abs() < 1e-9);
                }
            }
            // A V = V diag(vals).
            let av = a.dot(&vecs);
            for j in 0..n {
                for i in 0..n {
                    assert!((av[[i, j]] - vals[j] * vecs[[i, j]]).abs() < 1e-8);
                }
            }
            // Sorted descending.
            for w in vals.as_slice().unwrap().windows(2) {
                assert!(w[0] >= w[1] - 1e-12);
            }
        }
    }

    #[test]
    fn jacobi_eigen_on_diagonal_matrix_sorts_entries() {
        let a = array![[1.0, 0.0, 0.0], [0.0, 5.0, 0.0], [0.0, 0.0, 3.0]];
        let (vals, _) = jacobi_eigen(a.view());
        assert_eq!(vals.to_vec(), vec![5.0, 3.0, 1.0]);
    }
}
