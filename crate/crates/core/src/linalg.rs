//! Small eigensolvers: symmetric tridiagonal bisection and single-vector LOBPCG.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

/// Number of eigenvalues of the symmetric tridiagonal matrix `(d, e)` that are
/// strictly less than `x` (Sturm sequence count).
pub fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let off = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] };
        q = d[i] - x - if i == 0 { 0.0 } else { off / q };
        if q == 0.0 {
            q = -f64::EPSILON * (d[i].abs() + x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin(d: &[f64], e: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..d.len() {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i < e.len() { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    (lo, hi)
}

/// Smallest eigenvalue of the symmetric tridiagonal matrix with diagonal `d`
/// and off-diagonal `e` (`e.len() == d.len() − 1`), by bisection.
pub fn tridiag_lowest_value(d: &[f64], e: &[f64]) -> f64 {
    assert!(!d.is_empty() && e.len() + 1 == d.len());
    let (mut lo, mut hi) = gershgorin(d, e);
    let scale = lo.abs().max(hi.abs()).max(1e-300);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(d, e, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * scale {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Smallest eigenpair of a symmetric tridiagonal matrix.  The eigenvector is
/// normalized in the Euclidean norm and chosen with a positive sum.
pub fn tridiag_lowest(d: &[f64], e: &[f64]) -> (f64, Vec<f64>) {
    let lambda = tridiag_lowest_value(d, e);
    let n = d.len();
    let (lo, hi) = gershgorin(d, e);
    let shift = lambda - 1e-10 * (hi - lo).abs().max(1e-300);
    let mut x = vec![1.0; n];
    for _ in 0..4 {
        x = thomas_solve(d, e, shift, &x);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
    }
    if x.iter().sum::<f64>() < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    (lambda, x)
}

/// Solve `(T − σ) x = b` for symmetric tridiagonal `T` (Thomas algorithm with a
/// guard against zero pivots).
fn thomas_solve(d: &[f64], e: &[f64], sigma: f64, b: &[f64]) -> Vec<f64> {
    let n = d.len();
    let mut c = vec![0.0; n];
    let mut y = vec![0.0; n];
    let tiny = 1e-300;
    let mut piv = d[0] - sigma;
    if piv.abs() < tiny {
        piv = tiny;
    }
    y[0] = b[0] / piv;
    for i in 1..n {
        c[i - 1] = e[i - 1] / piv;
        piv = d[i] - sigma - e[i - 1] * c[i - 1];
        if piv.abs() < tiny {
            piv = tiny;
        }
        y[i] = (b[i] - e[i - 1] * y[i - 1]) / piv;
    }
    for i in (0..n - 1).rev() {
        y[i] -= c[i] * y[i + 1];
    }
    y
}

/// Outcome of [`lobpcg_lowest`].
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub value: f64,
    pub vector: Vec<Complex64>,
    pub iterations: usize,
    /// `‖Ax − λx‖ / |λ|` (or absolute when `λ = 0`).
    pub residual: f64,
    pub converged: bool,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn scale(a: &mut [Complex64], s: f64) {
    a.iter_mut().for_each(|x| *x *= s);
}

/// Lowest eigenpair of a Hermitian operator by single-vector LOBPCG with a
/// Rayleigh–Ritz step on `span{x, r, p}`.
///
/// `apply(x, y)` must write `A x` into `y`.  Convergence is declared when the
/// relative residual drops below `tol`.
pub fn lobpcg_lowest<F>(apply: F, x0: Vec<Complex64>, tol: f64, max_iters: usize) -> EigenResult
where
    F: Fn(&[Complex64], &mut [Complex64]),
{
    let n = x0.len();
    let mut x = x0;
    let nx = norm(&x);
    assert!(nx > 0.0, "initial vector must be nonzero");
    scale(&mut x, 1.0 / nx);
    let mut ax = vec![Complex64::new(0.0, 0.0); n];
    apply(&x, &mut ax);
    let mut lambda = dot(&x, &ax).re;
    let mut p: Option<(Vec<Complex64>, Vec<Complex64>)> = None;
    let mut r = vec![Complex64::new(0.0, 0.0); n];
    let mut ar = vec![Complex64::new(0.0, 0.0); n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;

    for it in 0..max_iters {
        iterations = it;
        for i in 0..n {
            r[i] = ax[i] - x[i] * lambda;
        }
        let rn = norm(&r);
        residual = rn / lambda.abs().max(1e-300);
        if residual < tol {
            return EigenResult {
                value: lambda,
                vector: x,
                iterations,
                residual,
                converged: true,
            };
        }
        // Remove the x component to improve conditioning.
        let proj = dot(&x, &r);
        for i in 0..n {
            r[i] -= x[i] * proj;
        }
        let rn = norm(&r);
        if rn == 0.0 {
            break;
        }
        scale(&mut r, 1.0 / rn);
        apply(&r, &mut ar);

        let mut basis: Vec<(&[Complex64], &[Complex64])> = vec![(&x, &ax), (&r, &ar)];
        if let Some((pv, apv)) = &p {
            basis.push((pv, apv));
        }
        let (coef, value) = match rayleigh_ritz(&basis) {
            Some(v) => v,
            None => {
                // Drop the search direction and retry with {x, r}.
                basis.truncate(2);
                match rayleigh_ritz(&basis) {
                    Some(v) => v,
                    None => break,
                }
            }
        };
        let k = basis.len();
        let mut new_p = vec![Complex64::new(0.0, 0.0); n];
        let mut new_ap = vec![Complex64::new(0.0, 0.0); n];
        for (j, (v, av)) in basis.iter().enumerate().skip(1) {
            let cj = coef[j];
            for i in 0..n {
                new_p[i] += v[i] * cj;
                new_ap[i] += av[i] * cj;
            }
        }
        let c0 = coef[0];
        for i in 0..n {
            x[i] = x[i] * c0 + new_p[i];
            ax[i] = ax[i] * c0 + new_ap[i];
        }
        let nx = norm(&x);
        scale(&mut x, 1.0 / nx);
        scale(&mut ax, 1.0 / nx);
        // The Ritz value and the recomputed quotient agree up to rounding;
        // the quotient is consistent with the stored image `ax`.
        debug_assert!((dot(&x, &ax).re - value).abs() <= 1e-6 * value.abs().max(1.0));
        lambda = dot(&x, &ax).re;
        let np = norm(&new_p);
        p = if np > 0.0 && k >= 2 {
            scale(&mut new_p, 1.0 / np);
            scale(&mut new_ap, 1.0 / np);
            Some((new_p, new_ap))
        } else {
            None
        };
    }
    EigenResult {
        value: lambda,
        vector: x,
        iterations,
        residual,
        converged: false,
    }
}

/// Lowest Ritz pair on the span of `basis` (pairs of vector and image).
/// Returns `None` when the Gram matrix is numerically singular.
fn rayleigh_ritz(basis: &[(&[Complex64], &[Complex64])]) -> Option<(Vec<Complex64>, f64)> {
    let k = basis.len();
    let mut g = DMatrix::<Complex64>::zeros(k, k);
    let mut h = DMatrix::<Complex64>::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let gij = dot(basis[i].0, basis[j].0);
            let hij = (dot(basis[i].0, basis[j].1) + dot(basis[j].0, basis[i].1).conj()) * 0.5;
            g[(i, j)] = gij;
            g[(j, i)] = gij.conj();
            h[(i, j)] = hij;
            h[(j, i)] = hij.conj();
        }
    }
    let chol = g.clone().cholesky()?;
    let l = chol.l();
    // Reject ill-conditioned bases: the smallest pivot must be meaningful.
    let min_pivot = (0..k).map(|i| l[(i, i)].re).fold(f64::INFINITY, f64::min);
    if !(min_pivot > 1e-7) {
        return None;
    }
    let linv = l.clone().try_inverse()?;
    let reduced = &linv * &h * linv.adjoint();
    let reduced = (&reduced + reduced.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(reduced);
    let (idx, value) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, v)| (i, *v))?;
    let y = eig.eigenvectors.column(idx).into_owned();
    let c = linv.adjoint() * y;
    Some((c.iter().copied().collect(), value))
}
