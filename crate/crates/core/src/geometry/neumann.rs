//! The de Gennes constant and the Neumann lower bound for constant fields.

use std::sync::OnceLock;

use super::{tr_plus, MagneticMatrix};
use crate::error::{Error, Result};
use crate::linalg::tridiag_lowest_value;

/// Inner grid of the de Gennes computation: `(length, points)`.  Neumann at
/// `t = 0`, Dirichlet at `t = length`.
pub const DE_GENNES_GRID: (f64, usize) = (12.0, 4001);

/// Ground Neumann eigenvalue `μ(ξ)` of `−∂_t² + (t − ξ)²` on `(0, ∞)`.
///
/// The half-line is truncated to `[0, 12]` (Dirichlet at the far end) and
/// discretized with 4001 points; the Neumann end carries a half cell, which
/// keeps the scheme second order.
pub fn de_gennes_eigenvalue(xi: f64) -> f64 {
    robin_de_gennes_eigenvalue(xi, 0.0)
}

/// Ground eigenvalue of `−∂_t² + (t − ξ)²` on `(0, ∞)` with the Robin
/// condition `u'(0) = c u(0)` (form term `c|u(0)|²`), on the grid of
/// [`de_gennes_eigenvalue`].
pub fn robin_de_gennes_eigenvalue(xi: f64, c: f64) -> f64 {
    let (length, points) = DE_GENNES_GRID;
    let n = points - 1; // last point is the Dirichlet node
    let dt = length / n as f64;
    let weight = |i: usize| if i == 0 { 0.5 * dt } else { dt };
    let mut d = Vec::with_capacity(n);
    let mut e = Vec::with_capacity(n - 1);
    for i in 0..n {
        let t = i as f64 * dt;
        let degree = if i == 0 { 1.0 } else { 2.0 };
        let w = weight(i);
        let robin = if i == 0 { c } else { 0.0 };
        d.push((degree / dt + w * (t - xi) * (t - xi) + robin) / w);
        if i + 1 < n {
            e.push(-(1.0 / dt) / (w * weight(i + 1)).sqrt());
        }
    }
    tridiag_lowest_value(&d, &e)
}

/// Golden-section minimization of `f` on `[a, b]`.
fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

fn compute_de_gennes() -> Result<f64> {
    let (lo, hi) = (0.3, 1.3);
    let f_lo = de_gennes_eigenvalue(lo);
    let f_hi = de_gennes_eigenvalue(hi);
    let f_mid = de_gennes_eigenvalue(0.5 * (lo + hi));
    if !(f_mid < f_lo && f_mid < f_hi) {
        return Err(Error::ConvergenceFailure(format!(
            "de Gennes search interval [{lo}, {hi}] does not bracket a minimum"
        )));
    }
    let (_, theta) = golden_section(de_gennes_eigenvalue, lo, hi, 1e-9);
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::ConvergenceFailure(format!(
            "de Gennes value {theta} outside (0, 1)"
        )));
    }
    Ok(theta)
}

/// `inf_ξ` of [`robin_de_gennes_eigenvalue`]: a coarse scan of `ξ ∈ [−4, 8]`
/// followed by golden-section refinement around the best sample.
pub fn robin_de_gennes_constant(c: f64) -> f64 {
    if c == 0.0 {
        if let Ok(theta) = de_gennes_constant() {
            return theta;
        }
    }
    let f = |xi: f64| robin_de_gennes_eigenvalue(xi, c);
    let step = 0.25;
    let grid: Vec<f64> = (0..=48).map(|k| -4.0 + step * k as f64).collect();
    let (k, _) = grid
        .iter()
        .map(|&x| f(x))
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (k, v)| if v < acc.1 { (k, v) } else { acc });
    let (_, value) = golden_section(f, grid[k] - step, grid[k] + step, 1e-9);
    value.min(f(grid[k]))
}

/// `Θ₀ = inf_ξ μ(ξ)`, computed once and cached.
pub fn de_gennes_constant() -> Result<f64> {
    static CACHE: OnceLock<Result<f64>> = OnceLock::new();
    CACHE.get_or_init(compute_de_gennes).clone()
}

/// `max(Θ₀‖B^∥‖₂, Tr⁺B^⊥)`, a lower bound for the Neumann ground energy of the
/// constant field `B` on the half-space whose inward normal is the last axis.
pub fn neumann_lower_bound(b: &MagneticMatrix) -> Result<f64> {
    if b.dim() < 2 {
        return Err(Error::InvalidArgument(
            "the Neumann bound needs dimension at least 2".into(),
        ));
    }
    // Re-validate: callers may hand in matrices built from raw entries.
    let b = MagneticMatrix::new(b.dim(), b.entries().to_vec())?;
    let parallel = b.normal_column().iter().map(|v| v * v).sum::<f64>().sqrt();
    let theta = de_gennes_constant()?;
    Ok((theta * parallel).max(tr_plus(&b.tangential_block())))
}
