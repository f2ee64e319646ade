use serde::Serialize;

use super::{Magnetic, ScalarField};
use crate::error::{Error, Result};

/// Spatial domain.  Unbounded domains are truncated when discretized.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Domain {
    /// `ℝ^d`.
    WholeSpace,
    /// `{x : x_d > 0}`; the last coordinate is the inward normal.
    HalfSpace,
    /// Axis-aligned box `Π [lo_k, hi_k]`.
    Rectangle { lo: Vec<f64>, hi: Vec<f64> },
    /// Planar disk.
    Disk { center: [f64; 2], radius: f64 },
    /// Planar strip `ℝ × (−half_width, half_width)`.
    Strip { half_width: f64 },
}

/// Boundary condition on the physical boundary.
#[derive(Debug, Clone)]
pub enum BoundaryCondition {
    /// `(−ih∇+A)ψ·n = −i h^{1/2} γ ψ`, entering the form as `h^{3/2}∫γ|ψ|²`.
    Robin(ScalarField),
    /// `ψ = 0`, the `γ = +∞` limit.
    Dirichlet,
}

impl BoundaryCondition {
    pub fn neumann() -> Self {
        BoundaryCondition::Robin(ScalarField::Constant(0.0))
    }

    pub fn describe(&self) -> String {
        match self {
            BoundaryCondition::Robin(g) => format!("robin {}", g.describe()),
            BoundaryCondition::Dirichlet => "dirichlet".into(),
        }
    }
}

/// The electro-magnetic Robin geometry `(domain, Id, V, A, γ)`.
#[derive(Debug, Clone)]
pub struct GeometrySpec {
    pub dim: usize,
    pub domain: Domain,
    pub potential: ScalarField,
    pub magnetic: Magnetic,
    pub boundary: BoundaryCondition,
}

impl GeometrySpec {
    /// Build and validate a spec.
    pub fn new(
        dim: usize,
        domain: Domain,
        potential: ScalarField,
        magnetic: Magnetic,
        boundary: BoundaryCondition,
    ) -> Result<Self> {
        let spec = Self {
            dim,
            domain,
            potential,
            magnetic,
            boundary,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Check that the pieces agree on the dimension and the domain is non-degenerate.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.dim == 0 {
            return bad("dimension must be positive".into());
        }
        match &self.domain {
            Domain::Rectangle { lo, hi } => {
                if lo.len() != self.dim || hi.len() != self.dim {
                    return bad("rectangle bounds must have one entry per dimension".into());
                }
                if lo.iter().zip(hi).any(|(a, b)| !(b > a)) {
                    return bad("rectangle must satisfy lo < hi on every axis".into());
                }
            }
            Domain::Disk { radius, .. } => {
                if self.dim != 2 {
                    return bad("disk domains are planar".into());
                }
                if !(*radius > 0.0) {
                    return bad("disk radius must be positive".into());
                }
            }
            Domain::Strip { half_width } => {
                if self.dim != 2 {
                    return bad("strip domains are planar".into());
                }
                if !(*half_width > 0.0) {
                    return bad("strip half-width must be positive".into());
                }
            }
            Domain::WholeSpace | Domain::HalfSpace => {}
        }
        if let Some(d) = self.magnetic.dim() {
            if d != self.dim {
                return bad(format!("magnetic field has dimension {d}, geometry has {}", self.dim));
            }
        }
        Ok(())
    }

    pub fn has_boundary(&self) -> bool {
        !matches!(self.domain, Domain::WholeSpace)
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self.domain, Domain::Rectangle { .. } | Domain::Disk { .. })
    }

    /// Whether `x` lies in the closed domain.
    pub fn contains(&self, x: &[f64]) -> bool {
        match &self.domain {
            Domain::WholeSpace => true,
            Domain::HalfSpace => x[self.dim - 1] >= 0.0,
            Domain::Rectangle { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(v, (a, b))| *v >= *a && *v <= *b),
            Domain::Disk { center, radius } => {
                let dx = x[0] - center[0];
                let dy = x[1] - center[1];
                dx * dx + dy * dy <= radius * radius
            }
            Domain::Strip { half_width } => x[1].abs() <= *half_width,
        }
    }

    /// Distance from a point of the closed domain to the physical boundary
    /// (`None` for the whole space).
    pub fn boundary_distance(&self, x: &[f64]) -> Option<f64> {
        match &self.domain {
            Domain::WholeSpace => None,
            Domain::HalfSpace => Some(x[self.dim - 1].abs()),
            Domain::Rectangle { lo, hi } => Some(
                x.iter()
                    .zip(lo.iter().zip(hi))
                    .map(|(v, (a, b))| (v - a).abs().min((b - v).abs()))
                    .fold(f64::INFINITY, f64::min),
            ),
            Domain::Disk { center, radius } => {
                let r = ((x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2)).sqrt();
                Some((radius - r).abs())
            }
            Domain::Strip { half_width } => Some((half_width - x[1].abs()).abs()),
        }
    }

    /// Inward unit normal at the boundary point nearest to `x`.
    pub fn inward_normal(&self, x: &[f64]) -> Option<Vec<f64>> {
        let d = self.dim;
        match &self.domain {
            Domain::WholeSpace => None,
            Domain::HalfSpace => {
                let mut n = vec![0.0; d];
                n[d - 1] = 1.0;
                Some(n)
            }
            Domain::Rectangle { lo, hi } => {
                let mut best = (f64::INFINITY, 0, 1.0);
                for k in 0..d {
                    let dl = (x[k] - lo[k]).abs();
                    let dh = (hi[k] - x[k]).abs();
                    if dl < best.0 {
                        best = (dl, k, 1.0);
                    }
                    if dh < best.0 {
                        best = (dh, k, -1.0);
                    }
                }
                let mut n = vec![0.0; d];
                n[best.1] = best.2;
                Some(n)
            }
            Domain::Disk { center, .. } => {
                let dx = x[0] - center[0];
                let dy = x[1] - center[1];
                let r = (dx * dx + dy * dy).sqrt();
                if r == 0.0 {
                    Some(vec![-1.0, 0.0])
                } else {
                    Some(vec![-dx / r, -dy / r])
                }
            }
            Domain::Strip { .. } => Some(vec![0.0, if x[1] >= 0.0 { -1.0 } else { 1.0 }]),
        }
    }

    /// Representative center of the domain (origin for unbounded domains).
    pub fn center(&self) -> Vec<f64> {
        match &self.domain {
            Domain::Rectangle { lo, hi } => lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect(),
            Domain::Disk { center, .. } => center.to_vec(),
            _ => vec![0.0; self.dim],
        }
    }

    /// Robin coefficient at a boundary point (`None` for Dirichlet).
    pub fn robin_at(&self, x: &[f64]) -> Option<f64> {
        match &self.boundary {
            BoundaryCondition::Robin(g) => Some(g.eval(x)),
            BoundaryCondition::Dirichlet => None,
        }
    }

    /// Copy with the gauge shift `A ↦ A + ∇φ`.
    pub fn gauge_shifted<F: Fn(&[f64]) -> f64 + Send + Sync + 'static>(&self, phi: F) -> Self {
        let mut s = self.clone();
        s.magnetic = self.magnetic.clone().gauged(phi);
        s
    }

    /// One-line description used in reports.
    pub fn describe(&self) -> String {
        format!(
            "dim={} domain={:?} V={} A={} boundary={}",
            self.dim,
            self.domain,
            self.potential.describe(),
            self.magnetic.describe(),
            self.boundary.describe()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let ok = GeometrySpec::new(
            2,
            Domain::Disk {
                center: [0.0, 0.0],
                radius: 1.0,
            },
            ScalarField::Constant(1.0),
            Magnetic::Zero,
            BoundaryCondition::neumann(),
        );
        assert!(ok.is_ok());
        let bad = GeometrySpec::new(
            1,
            Domain::Disk {
                center: [0.0, 0.0],
                radius: 1.0,
            },
            ScalarField::Constant(1.0),
            Magnetic::Zero,
            BoundaryCondition::neumann(),
        );
        assert!(bad.is_err());
        let bad = GeometrySpec::new(
            1,
            Domain::Rectangle {
                lo: vec![1.0],
                hi: vec![0.0],
            },
            ScalarField::Constant(1.0),
            Magnetic::Zero,
            BoundaryCondition::neumann(),
        );
        assert!(bad.is_err());
    }

    #[test]
    fn distances_and_normals() {
        let s = GeometrySpec::new(
            2,
            Domain::Disk {
                center: [0.0, 0.0],
                radius: 2.0,
            },
            ScalarField::Constant(1.0),
            Magnetic::Zero,
            BoundaryCondition::neumann(),
        )
        .unwrap();
        assert!((s.boundary_distance(&[1.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(s.inward_normal(&[0.0, 2.0]).unwrap(), vec![-0.0, -1.0]);
        assert!(s.contains(&[1.0, 1.0]) && !s.contains(&[2.0, 1.0]));
    }
}
