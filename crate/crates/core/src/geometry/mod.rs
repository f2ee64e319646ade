//! Geometry descriptors and magnetic-field algebra.
//!
//! A magnetic field is the 2-form `B = dA`, stored as the skew-symmetric
//! matrix `B_{kℓ} = ∂_k A_ℓ − ∂_ℓ A_k`.  Its action on a displacement `u` is
//! the covector `B(u, ·)_ℓ = Σ_k B_{kℓ} u_k`; the linear potential
//! `A(x) = ½ B(x − x₀, ·)` then has exterior derivative exactly `B`.

mod field;
mod neumann;
mod spec;

pub use field::{Magnetic, ScalarField};
pub use neumann::{
    de_gennes_constant, de_gennes_eigenvalue, neumann_lower_bound, robin_de_gennes_constant,
    robin_de_gennes_eigenvalue, DE_GENNES_GRID,
};
pub use spec::{BoundaryCondition, Domain, GeometrySpec};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::GaussRule;

/// Tolerance on `|B + Bᵀ|` accepted as skew-symmetric.
pub const SKEW_TOLERANCE: f64 = 1e-12;

/// A real skew-symmetric `d × d` matrix representing a constant magnetic 2-form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MagneticMatrix {
    dim: usize,
    /// Row-major entries.
    entries: Vec<f64>,
}

impl MagneticMatrix {
    /// Build from row-major entries, checking skew-symmetry.
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        let mut defect: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                defect = defect.max((entries[i * dim + j] + entries[j * dim + i]).abs());
            }
        }
        if defect > SKEW_TOLERANCE || entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotSkew { defect });
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidArgument("matrix rows must be square".into()));
        }
        Self::new(dim, rows.iter().flatten().copied().collect())
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![0.0; dim * dim],
        }
    }

    /// The planar field of strength `b`: `[[0, b], [−b, 0]]`.
    pub fn planar(b: f64) -> Self {
        Self {
            dim: 2,
            entries: vec![0.0, b, -b, 0.0],
        }
    }

    /// The 3D matrix of the field vector `β`: `B₁₂ = β₃`, `B₂₃ = β₁`, `B₃₁ = β₂`.
    pub fn from_field_vector(beta: [f64; 3]) -> Self {
        let [b1, b2, b3] = beta;
        Self {
            dim: 3,
            entries: vec![0.0, b3, -b2, -b3, 0.0, b1, b2, -b1, 0.0],
        }
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let d = self.dim + other.dim;
        let mut m = Self::zero(d);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.entries[i * d + j] = self.get(i, j);
            }
        }
        for i in 0..other.dim {
            for j in 0..other.dim {
                m.entries[(i + self.dim) * d + j + self.dim] = other.get(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// `B(u, ·)`: the covector with components `Σ_k B_{kℓ} u_k`.
    pub fn contract(&self, u: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|l| (0..self.dim).map(|k| self.entries[k * self.dim + l] * u[k]).sum())
            .collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|v| v * s).collect(),
        }
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0.0)
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }

    /// `Qᵀ B Q` for a square matrix `Q`.
    pub fn conjugate(&self, q: &DMatrix<f64>) -> Result<Self> {
        let m = q.transpose() * self.to_dmatrix() * q;
        let mut entries = Vec::with_capacity(self.dim * self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                entries.push(0.5 * (m[(i, j)] - m[(j, i)]));
            }
        }
        Self::new(self.dim, entries)
    }

    /// The tangential block `B^⊥`: upper-left `(d−1) × (d−1)` block, when the
    /// last coordinate is the normal direction.
    pub fn tangential_block(&self) -> Self {
        let d = self.dim.saturating_sub(1);
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                entries.push(self.get(i, j));
            }
        }
        Self { dim: d, entries }
    }

    /// The mixed part `B^∥`: the head of the last column, `(B_{kd})_{k<d}`.
    pub fn normal_column(&self) -> Vec<f64> {
        let d = self.dim;
        (0..d.saturating_sub(1)).map(|k| self.get(k, d - 1)).collect()
    }
}

/// `Tr⁺B = Σ β_k` where the eigenvalues of `B` are `±iβ_k`, `β_k ≥ 0`.
///
/// The `β_k` are the singular values of `B`, each appearing twice, so the sum
/// is half the nuclear norm.
pub fn tr_plus(b: &MagneticMatrix) -> f64 {
    if b.dim() == 0 || b.is_zero() {
        return 0.0;
    }
    let svd = b.to_dmatrix().svd(false, false);
    0.5 * svd.singular_values.iter().sum::<f64>()
}

/// A Sobolev exponent `p ∈ [2, 2*)` for dimension `d`, with `2* = ∞` when
/// `d ≤ 2` and `2* = 2d/(d−2)` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentP {
    value: f64,
    dim: usize,
}

impl ExponentP {
    /// Margin kept below the critical exponent in dimension `d ≥ 3`.
    pub const CRITICAL_MARGIN: f64 = 1e-6;

    pub fn new(p: f64, dim: usize) -> Result<Self> {
        let invalid = |reason: &str| Error::InvalidExponent {
            p,
            dim,
            reason: reason.into(),
        };
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        if !p.is_finite() || p < 2.0 {
            return Err(invalid("p must be a finite number ≥ 2"));
        }
        if dim >= 3 {
            let critical = 2.0 * dim as f64 / (dim as f64 - 2.0);
            if p > critical - Self::CRITICAL_MARGIN {
                return Err(invalid("p must be below the critical Sobolev exponent 2d/(d−2)"));
            }
        }
        Ok(Self { value: p, dim })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_linear(&self) -> bool {
        self.value == 2.0
    }
}

/// Lorentz-gauge potential about `x0`: `A(x)·w = ∫₀¹ t B_{x0+t(x−x0)}(x−x0, w) dt`,
/// evaluated with 16-point Gauss–Legendre quadrature.  `A(x0) = 0`.
pub fn lorentz_potential<F>(field: F, x0: &[f64], x: &[f64]) -> Vec<f64>
where
    F: Fn(&[f64]) -> MagneticMatrix,
{
    thread_local! {
        static RULE: GaussRule = GaussRule::new(16);
    }
    let d = x0.len();
    let disp: Vec<f64> = x.iter().zip(x0).map(|(a, b)| a - b).collect();
    let mut out = vec![0.0; d];
    if disp.iter().all(|&v| v == 0.0) {
        return out;
    }
    RULE.with(|rule| {
        let mut y = vec![0.0; d];
        for (t, w) in rule.on(0.0, 1.0) {
            for k in 0..d {
                y[k] = x0[k] + t * disp[k];
            }
            let cov = field(&y).contract(&disp);
            for l in 0..d {
                out[l] += w * t * cov[l];
            }
        }
    });
    out
}

/// Linear approximation `½ B0(x − x0, ·)` of the Lorentz potential.
pub fn linear_approx_potential(b0: &MagneticMatrix, x0: &[f64], x: &[f64]) -> Vec<f64> {
    let disp: Vec<f64> = x.iter().zip(x0).map(|(a, b)| a - b).collect();
    b0.contract(&disp).into_iter().map(|v| 0.5 * v).collect()
}

/// Discrete exterior derivative of a potential at `x`: central differences of
/// `∂_k A_ℓ − ∂_ℓ A_k` with step `eps`.
pub fn discrete_curl<F>(potential: F, x: &[f64], eps: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let d = x.len();
    let mut jac = vec![0.0; d * d]; // jac[k*d + l] = ∂_k A_l
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    for k in 0..d {
        xp[k] += eps;
        xm[k] -= eps;
        let ap = potential(&xp);
        let am = potential(&xm);
        for l in 0..d {
            jac[k * d + l] = (ap[l] - am[l]) / (2.0 * eps);
        }
        xp[k] = x[k];
        xm[k] = x[k];
    }
    let mut b = vec![0.0; d * d];
    for k in 0..d {
        for l in 0..d {
            b[k * d + l] = jac[k * d + l] - jac[l * d + k];
        }
    }
    b
}
