use std::fmt;
use std::sync::Arc;

use super::{discrete_curl, linear_approx_potential, lorentz_potential, MagneticMatrix};

type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type MatrixFn = Arc<dyn Fn(&[f64]) -> MagneticMatrix + Send + Sync>;

/// A real scalar field on `ℝ^d` (electric potential, Robin coefficient or
/// planar field strength).
#[derive(Clone)]
pub enum ScalarField {
    Constant(f64),
    /// `base + coeff·|x − center|²`.
    Quadratic {
        base: f64,
        coeff: f64,
        center: Vec<f64>,
    },
    /// `base + coeff·x_axis²`.
    Axis {
        base: f64,
        coeff: f64,
        axis: usize,
    },
    /// `base + amplitude·exp(−(Δθ/width)²)`, where `Δθ` is the wrapped angle
    /// between `x − center` and the direction `angle`.  Meant for Robin
    /// coefficients on circular boundaries.
    AngularBump {
        base: f64,
        amplitude: f64,
        angle: f64,
        width: f64,
        center: Vec<f64>,
    },
    Custom(ScalarFn),
}

impl ScalarField {
    pub fn custom<F: Fn(&[f64]) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        ScalarField::Custom(Arc::new(f))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ScalarField::Constant(c) => *c,
            ScalarField::Quadratic { base, coeff, center } => {
                let r2: f64 = x
                    .iter()
                    .enumerate()
                    .map(|(k, v)| {
                        let c = center.get(k).copied().unwrap_or(0.0);
                        (v - c) * (v - c)
                    })
                    .sum();
                base + coeff * r2
            }
            ScalarField::Axis { base, coeff, axis } => {
                let v = x.get(*axis).copied().unwrap_or(0.0);
                base + coeff * v * v
            }
            ScalarField::AngularBump {
                base,
                amplitude,
                angle,
                width,
                center,
            } => {
                let dx = x[0] - center.first().copied().unwrap_or(0.0);
                let dy = x.get(1).copied().unwrap_or(0.0) - center.get(1).copied().unwrap_or(0.0);
                let theta = dy.atan2(dx);
                let mut diff = (theta - angle).rem_euclid(std::f64::consts::TAU);
                if diff > std::f64::consts::PI {
                    diff -= std::f64::consts::TAU;
                }
                base + amplitude * (-(diff / width).powi(2)).exp()
            }
            ScalarField::Custom(f) => f(x),
        }
    }

    /// The constant value, when the field is constant.
    pub fn as_constant(&self) -> Option<f64> {
        match self {
            ScalarField::Constant(c) => Some(*c),
            ScalarField::Quadratic { base, coeff, .. } | ScalarField::Axis { base, coeff, .. } if *coeff == 0.0 => {
                Some(*base)
            }
            ScalarField::AngularBump { base, amplitude, .. } if *amplitude == 0.0 => Some(*base),
            _ => None,
        }
    }

    /// Short human-readable description used in reports.
    pub fn describe(&self) -> String {
        match self {
            ScalarField::Constant(c) => format!("constant {c}"),
            ScalarField::Quadratic { base, coeff, center } => {
                format!("quadratic {base} {coeff} center {center:?}")
            }
            ScalarField::Axis { base, coeff, axis } => format!("axis {base} {coeff} {axis}"),
            ScalarField::AngularBump {
                base,
                amplitude,
                angle,
                width,
                ..
            } => format!("angular-bump {base} {amplitude} {angle} {width}"),
            ScalarField::Custom(_) => "custom".into(),
        }
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

impl From<f64> for ScalarField {
    fn from(v: f64) -> Self {
        ScalarField::Constant(v)
    }
}

/// Magnetic data: either a field (converted to a potential in the Lorentz
/// gauge about `gauge_origin`) or an explicit potential.
#[derive(Clone)]
pub enum Magnetic {
    Zero,
    /// Constant field with the linear potential `½B(x − gauge_origin, ·)`.
    Constant {
        matrix: MagneticMatrix,
        gauge_origin: Vec<f64>,
    },
    /// Planar field `B(x) = b(x)·[[0,1],[−1,0]]` in 2D.
    Planar {
        strength: ScalarField,
        gauge_origin: Vec<f64>,
    },
    /// General field callback.
    Field {
        field: MatrixFn,
        gauge_origin: Vec<f64>,
    },
    /// Explicit vector potential.
    Potential(VectorFn),
    /// `base` with `A ↦ A + ∇φ`; discrete link phases use exact node
    /// differences of `φ`.
    Gauged {
        base: Box<Magnetic>,
        phi: ScalarFn,
    },
}

impl Magnetic {
    pub fn constant(matrix: MagneticMatrix) -> Self {
        let d = matrix.dim();
        Magnetic::Constant {
            matrix,
            gauge_origin: vec![0.0; d],
        }
    }

    pub fn potential_fn<F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static>(f: F) -> Self {
        Magnetic::Potential(Arc::new(f))
    }

    pub fn field_fn<F: Fn(&[f64]) -> MagneticMatrix + Send + Sync + 'static>(f: F, gauge_origin: Vec<f64>) -> Self {
        Magnetic::Field {
            field: Arc::new(f),
            gauge_origin,
        }
    }

    /// `self` with the gauge shift `A ↦ A + ∇φ`.
    pub fn gauged<F: Fn(&[f64]) -> f64 + Send + Sync + 'static>(self, phi: F) -> Self {
        Magnetic::Gauged {
            base: Box::new(self),
            phi: Arc::new(phi),
        }
    }

    /// True when the potential vanishes identically.
    pub fn is_zero(&self) -> bool {
        match self {
            Magnetic::Zero => true,
            Magnetic::Constant { matrix, .. } => matrix.is_zero(),
            Magnetic::Planar { strength, .. } => strength.as_constant() == Some(0.0),
            _ => false,
        }
    }

    /// Dimension implied by the data, when it is fixed.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Magnetic::Constant { matrix, .. } => Some(matrix.dim()),
            Magnetic::Planar { .. } => Some(2),
            Magnetic::Gauged { base, .. } => base.dim(),
            _ => None,
        }
    }

    /// Vector potential at `x` (without any gauge shift).
    pub fn potential(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Magnetic::Zero => vec![0.0; x.len()],
            Magnetic::Constant { matrix, gauge_origin } => linear_approx_potential(matrix, gauge_origin, x),
            Magnetic::Planar { strength, gauge_origin } => {
                if let Some(b) = strength.as_constant() {
                    linear_approx_potential(&MagneticMatrix::planar(b), gauge_origin, x)
                } else {
                    lorentz_potential(|y| MagneticMatrix::planar(strength.eval(y)), gauge_origin, x)
                }
            }
            Magnetic::Field { field, gauge_origin } => lorentz_potential(|y| field(y), gauge_origin, x),
            Magnetic::Potential(f) => f(x),
            Magnetic::Gauged { base, phi } => {
                let mut a = base.potential(x);
                let eps = 1e-6;
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                for k in 0..x.len() {
                    xp[k] += eps;
                    xm[k] -= eps;
                    a[k] += (phi(&xp) - phi(&xm)) / (2.0 * eps);
                    xp[k] = x[k];
                    xm[k] = x[k];
                }
                a
            }
        }
    }

    /// Field matrix at `x`.  Explicit potentials are differentiated numerically.
    pub fn field_at(&self, x: &[f64]) -> MagneticMatrix {
        let d = x.len();
        match self {
            Magnetic::Zero => MagneticMatrix::zero(d),
            Magnetic::Constant { matrix, .. } => matrix.clone(),
            Magnetic::Planar { strength, .. } => MagneticMatrix::planar(strength.eval(x)),
            Magnetic::Field { field, .. } => field(x),
            Magnetic::Gauged { base, .. } => base.field_at(x),
            Magnetic::Potential(f) => {
                let b = discrete_curl(|y| f(y), x, 1e-5);
                let mut e = vec![0.0; d * d];
                for i in 0..d {
                    for j in 0..d {
                        e[i * d + j] = 0.5 * (b[i * d + j] - b[j * d + i]);
                    }
                }
                MagneticMatrix::new(d, e).unwrap_or_else(|_| MagneticMatrix::zero(d))
            }
        }
    }

    /// Link phase `(1/h)∫_a^b A·dl` (midpoint rule), plus `(φ(b) − φ(a))/h`
    /// for gauge shifts.
    pub fn link_phase(&self, a: &[f64], b: &[f64], h: f64) -> f64 {
        match self {
            Magnetic::Zero => 0.0,
            Magnetic::Gauged { base, phi } => base.link_phase(a, b, h) + (phi(b) - phi(a)) / h,
            _ => {
                let mid: Vec<f64> = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
                let pot = self.potential(&mid);
                pot.iter()
                    .zip(a.iter().zip(b))
                    .map(|(ak, (x, y))| ak * (y - x))
                    .sum::<f64>()
                    / h
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Magnetic::Zero => "zero".into(),
            Magnetic::Constant { matrix, gauge_origin } => {
                format!("constant {:?} gauge origin {gauge_origin:?}", matrix.entries())
            }
            Magnetic::Planar { strength, gauge_origin } => {
                format!("planar {} gauge origin {gauge_origin:?}", strength.describe())
            }
            Magnetic::Field { gauge_origin, .. } => format!("field callback gauge origin {gauge_origin:?}"),
            Magnetic::Potential(_) => "potential callback".into(),
            Magnetic::Gauged { base, .. } => format!("{} + gauge shift", base.describe()),
        }
    }
}

impl fmt::Debug for Magnetic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}
