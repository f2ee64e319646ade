use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::geometry::{ExponentP, GeometrySpec};

/// Complex lattice field; one value per grid node, zero on pinned nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    pub values: Vec<Complex64>,
}

impl WaveFunction {
    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Sample `f` at the free nodes of `grid`; other nodes are set to zero.
    pub fn from_fn<F: Fn(&[f64]) -> Complex64>(grid: &Grid, f: F) -> Self {
        let values = (0..grid.len())
            .map(|n| {
                if grid.is_free(n) {
                    f(&grid.coords(n))
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        Self { values }
    }

    pub fn from_real<F: Fn(&[f64]) -> f64>(grid: &Grid, f: F) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    /// Pointwise modulus as a real-valued wave function.
    pub fn modulus(&self) -> Self {
        Self {
            values: self.values.iter().map(|v| Complex64::new(v.norm(), 0.0)).collect(),
        }
    }

    /// Discrete `L^p` norm `(Σ w_n |ψ_n|^p)^{1/p}`.
    pub fn lp_norm(&self, grid: &Grid, p: f64) -> f64 {
        let s: f64 = self
            .values
            .iter()
            .zip(&grid.weight)
            .zip(&grid.kind)
            .filter(|(_, k)| k.is_free())
            .map(|((v, w), _)| w * v.norm().powf(p))
            .sum();
        s.powf(1.0 / p)
    }

    pub fn l2_norm(&self, grid: &Grid) -> f64 {
        self.lp_norm(grid, 2.0)
    }
}

/// A kinetic link between two free nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Link {
    pub a: usize,
    pub b: usize,
    /// `w_e h² / s²`.
    pub coupling: f64,
    /// `θ = (1/h)∫_a^b A·dl`.
    pub phase: f64,
    /// `e^{iθ}`.
    #[serde(skip)]
    pub factor: Complex64,
}

/// Discrete quadratic form
/// `Q(ψ) = Σ_links c_e |e^{iθ_e} ψ_b − ψ_a|² + Σ_n d_n |ψ_n|²`
/// where `d_n` collects `h V w_n`, `h^{3/2} γ σ_n` and the couplings of edges
/// to pinned neighbours.
#[derive(Debug, Clone)]
pub struct AssembledForm {
    pub h: f64,
    pub grid: Arc<Grid>,
    pub links: Vec<Link>,
    /// Couplings of edges into pinned nodes (the eliminated Dirichlet rows).
    pub kinetic_diag: Vec<f64>,
    /// `h V(x_n) w_n + h^{3/2} γ(x_n) σ_n`.
    pub potential_diag: Vec<f64>,
    /// True when every link phase vanishes.
    pub real: bool,
}

/// `(1/h)∫_a^b A·dl` by the midpoint rule.
pub fn link_phase<F: Fn(&[f64]) -> Vec<f64>>(potential: F, a: &[f64], b: &[f64], h: f64) -> f64 {
    let mid: Vec<f64> = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
    potential(&mid)
        .iter()
        .zip(a.iter().zip(b))
        .map(|(ak, (x, y))| ak * (y - x))
        .sum::<f64>()
        / h
}

/// Assemble `Q_{G,h}` on `grid`.
pub fn assemble(spec: &GeometrySpec, h: f64, grid: &Grid) -> Result<AssembledForm> {
    assemble_shared(spec, h, Arc::new(grid.clone()))
}

/// [`assemble`] reusing a shared grid.
pub fn assemble_shared(spec: &GeometrySpec, h: f64, grid: Arc<Grid>) -> Result<AssembledForm> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("h must be positive, got {h}")));
    }
    if spec.dim != grid.dim {
        return Err(Error::InvalidArgument("grid and geometry dimensions differ".into()));
    }
    let n = grid.len();
    let mut kinetic_diag = vec![0.0; n];
    let mut potential_diag = vec![0.0; n];
    let mut links = Vec::with_capacity(grid.edges.len());
    let h2 = h * h;
    let h32 = h * h.sqrt();
    let zero_field = spec.magnetic.is_zero();
    for e in &grid.edges {
        let s = grid.spacing[e.axis];
        let coupling = e.weight * h2 / (s * s);
        let (fa, fb) = (grid.is_free(e.a), grid.is_free(e.b));
        match (fa, fb) {
            (true, true) => {
                let phase = if zero_field {
                    0.0
                } else {
                    spec.magnetic.link_phase(&grid.coords(e.a), &grid.coords(e.b), h)
                };
                links.push(Link {
                    a: e.a,
                    b: e.b,
                    coupling,
                    phase,
                    factor: Complex64::from_polar(1.0, phase),
                });
            }
            (true, false) if grid.kind[e.b].is_fixed() => kinetic_diag[e.a] += coupling,
            (false, true) if grid.kind[e.a].is_fixed() => kinetic_diag[e.b] += coupling,
            _ => {}
        }
    }
    for i in 0..n {
        if !grid.is_free(i) {
            continue;
        }
        let x = grid.coords(i);
        let mut d = h * spec.potential.eval(&x) * grid.weight[i];
        if grid.surface[i] > 0.0 {
            if let Some(g) = spec.robin_at(&x) {
                d += h32 * g * grid.surface[i];
            }
        }
        potential_diag[i] = d;
    }
    let real = links.iter().all(|l| l.phase == 0.0);
    Ok(AssembledForm {
        h,
        grid,
        links,
        kinetic_diag,
        potential_diag,
        real,
    })
}

/// Energy, `L^p` norm and quotient of one wave function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub energy: f64,
    pub lp_norm: f64,
    pub quotient: f64,
}

impl AssembledForm {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Node quadrature weights.
    pub fn mass(&self) -> &[f64] {
        &self.grid.weight
    }

    /// `Q(ψ)`.
    pub fn energy(&self, psi: &WaveFunction) -> f64 {
        self.kinetic_energy(psi) + self.potential_energy(psi)
    }

    /// Link and pinned-edge part of `Q`.
    pub fn kinetic_energy(&self, psi: &WaveFunction) -> f64 {
        let v = &psi.values;
        let links: f64 = self
            .links
            .iter()
            .map(|l| l.coupling * (l.factor * v[l.b] - v[l.a]).norm_sqr())
            .sum();
        let pinned: f64 = self
            .kinetic_diag
            .iter()
            .zip(v)
            .filter(|(d, _)| **d != 0.0)
            .map(|(d, x)| d * x.norm_sqr())
            .sum();
        links + pinned
    }

    /// Kinetic energy with every link phase removed.
    pub fn field_free_kinetic_energy(&self, psi: &WaveFunction) -> f64 {
        let v = &psi.values;
        let links: f64 = self
            .links
            .iter()
            .map(|l| l.coupling * (v[l.b] - v[l.a]).norm_sqr())
            .sum();
        let pinned: f64 = self.kinetic_diag.iter().zip(v).map(|(d, x)| d * x.norm_sqr()).sum();
        links + pinned
    }

    /// Potential and boundary part of `Q`.
    pub fn potential_energy(&self, psi: &WaveFunction) -> f64 {
        self.potential_diag
            .iter()
            .zip(&psi.values)
            .map(|(d, x)| d * x.norm_sqr())
            .sum()
    }

    /// Complex sesquilinear value `⟨ψ, Mψ⟩`; its imaginary part vanishes for
    /// a Hermitian form.
    pub fn sesquilinear(&self, psi: &WaveFunction) -> Complex64 {
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        self.apply(&psi.values, &mut out);
        psi.values.iter().zip(&out).map(|(x, y)| x.conj() * y).sum()
    }

    /// `out = M ψ` where `Q(ψ) = ⟨ψ, Mψ⟩` (Euclidean pairing).  Pinned and
    /// exterior entries of `out` are zero.
    pub fn apply(&self, psi: &[Complex64], out: &mut [Complex64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = psi[i] * (self.kinetic_diag[i] + self.potential_diag[i]);
        }
        for l in &self.links {
            let fb = l.factor * psi[l.b];
            let fa = l.factor.conj() * psi[l.a];
            out[l.a] += (psi[l.a] - fb) * l.coupling;
            out[l.b] += (psi[l.b] - fa) * l.coupling;
        }
        for (i, o) in out.iter_mut().enumerate() {
            if !self.grid.is_free(i) {
                *o = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Gershgorin bound on the spectrum of `W^{-1}M`.
    pub fn spectral_bound(&self) -> f64 {
        let mut row = vec![0.0; self.len()];
        for (i, r) in row.iter_mut().enumerate() {
            *r = (self.kinetic_diag[i] + self.potential_diag[i]).abs();
        }
        for l in &self.links {
            row[l.a] += 2.0 * l.coupling;
            row[l.b] += 2.0 * l.coupling;
        }
        row.iter()
            .zip(&self.grid.weight)
            .enumerate()
            .filter(|(i, _)| self.grid.is_free(*i))
            .map(|(_, (r, w))| r / w)
            .fold(0.0, f64::max)
    }

    /// A copy with the gauge shift `A ↦ A + ∇φ` applied to the link phases
    /// through exact node differences.
    pub fn gauge_shifted<F: Fn(&[f64]) -> f64>(&self, phi: F) -> Self {
        let mut out = self.clone();
        for l in &mut out.links {
            let d = (phi(&self.grid.coords(l.b)) - phi(&self.grid.coords(l.a))) / self.h;
            l.phase += d;
            l.factor = Complex64::from_polar(1.0, l.phase);
        }
        out.real = out.links.iter().all(|l| l.phase == 0.0);
        out
    }
}

/// Energy, `L^p` norm and quotient `Q(ψ)/‖ψ‖_p²`.
pub fn evaluate(form: &AssembledForm, psi: &WaveFunction, p: &ExponentP) -> Result<Evaluation> {
    if psi.len() != form.len() {
        return Err(Error::InvalidArgument("wave function does not match the grid".into()));
    }
    let lp_norm = psi.lp_norm(&form.grid, p.value());
    if !(lp_norm >= 1e-300) {
        return Err(Error::ZeroFunction { norm: lp_norm });
    }
    let energy = form.energy(psi);
    Ok(Evaluation {
        energy,
        lp_norm,
        quotient: energy / (lp_norm * lp_norm),
    })
}

/// `e^{iφ/h} ψ`.
pub fn gauge_transform<F: Fn(&[f64]) -> f64>(psi: &WaveFunction, grid: &Grid, phi: F, h: f64) -> WaveFunction {
    WaveFunction {
        values: psi
            .values
            .iter()
            .enumerate()
            .map(|(n, v)| v * Complex64::from_polar(1.0, phi(&grid.coords(n)) / h))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::super::grid::{build_grid, Truncation};
    use super::*;
    use crate::geometry::{BoundaryCondition, Domain, Magnetic, MagneticMatrix, ScalarField};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_psi(grid: &Grid, rng: &mut ChaCha8Rng) -> WaveFunction {
        let mut psi = WaveFunction::from_fn(grid, |_| Complex64::new(0.0, 0.0));
        for n in 0..grid.len() {
            if grid.is_free(n) {
                psi.values[n] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        psi
    }

    fn magnetic_square() -> (GeometrySpec, Grid) {
        let spec = GeometrySpec::new(
            2,
            Domain::Rectangle {
                lo: vec![-1.0, -1.0],
                hi: vec![1.0, 1.0],
            },
            ScalarField::Quadratic {
                base: 1.0,
                coeff: 0.5,
                center: vec![0.0, 0.0],
            },
            Magnetic::Planar {
                strength: ScalarField::Axis {
                    base: 1.0,
                    coeff: 1.0,
                    axis: 0,
                },
                gauge_origin: vec![0.0, 0.0],
            },
            BoundaryCondition::Robin(ScalarField::Constant(-0.3)),
        )
        .unwrap();
        let grid = build_grid(&spec, 0.1, None).unwrap();
        (spec, grid)
    }

    #[test]
    fn phase_examples() {
        assert_eq!(link_phase(|_| vec![0.0, 0.0], &[0.0, 0.0], &[0.1, 0.0], 1.0), 0.0);
        let th = link_phase(|_| vec![0.4, 0.0], &[0.0, 0.0], &[0.05, 0.0], 0.25);
        assert!((th - 0.4 * 0.05 / 0.25).abs() < 1e-15);
        // A = ½B(−y, x): compare with 64-point Gauss on a short edge.
        let b = 1.7;
        let pot = |x: &[f64]| vec![-0.5 * b * x[1], 0.5 * b * x[0]];
        let (a, e) = ([0.3, -0.2], [0.3, -0.17]);
        let rule = crate::quadrature::GaussRule::new(64);
        let oracle = rule.integrate(0.0, 1.0, |t| {
            let x = [a[0] + t * (e[0] - a[0]), a[1] + t * (e[1] - a[1])];
            let p = pot(&x);
            p[0] * (e[0] - a[0]) + p[1] * (e[1] - a[1])
        }) / 0.5;
        assert!((link_phase(pot, &a, &e, 0.5) - oracle).abs() < 1e-12);
    }

    #[test]
    fn hermitian_and_real_valued() {
        let (spec, grid) = magnetic_square();
        let form = assemble(&spec, 0.3, &grid).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let psi = random_psi(&grid, &mut rng);
            let s = form.sesquilinear(&psi);
            assert!(s.im.abs() <= 1e-12 * s.re.abs());
            assert!((s.re - form.energy(&psi)).abs() <= 1e-12 * s.re.abs());
        }
    }

    #[test]
    fn reduces_to_five_point_laplacian() {
        let spec = GeometrySpec::new(
            2,
            Domain::WholeSpace,
            ScalarField::Constant(0.0),
            Magnetic::Zero,
            BoundaryCondition::neumann(),
        )
        .unwrap();
        let grid = build_grid(&spec, 0.5, Some(&Truncation::cube(&[0.0, 0.0], 2.0))).unwrap();
        let form = assemble(&spec, 1.0, &grid).unwrap();
        assert!(form.real);
        let c = grid.index(4, 4);
        let mut e = WaveFunction::zeros(grid.len());
        e.values[c] = Complex64::new(1.0, 0.0);
        let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
        form.apply(&e.values, &mut out);
        // (M e_c)_c / w = 4/s², neighbours −1/s².
        let w = grid.weight[c];
        assert!((out[c].re / w - 16.0).abs() < 1e-12);
        assert!((out[c + 1].re / w + 4.0).abs() < 1e-12);
    }

    #[test]
    fn constant_has_zero_neumann_energy() {
        let spec = GeometrySpec::new(
            1,
            Domain::Rectangle {
                lo: vec![0.0],
                hi: vec![3.0],
            },
            ScalarField::Constant(0.0),
            Magnetic::Zero,
            BoundaryCondition::neumann(),
        )
        .unwrap();
        let grid = build_grid(&spec, 0.1, None).unwrap();
        let form = assemble(&spec, 1.0, &grid).unwrap();
        let one = WaveFunction::from_real(&grid, |_| 1.0);
        let p = ExponentP::new(2.0, 1).unwrap();
        assert!(evaluate(&form, &one, &p).unwrap().quotient.abs() < 1e-14);
        assert!(matches!(
            evaluate(&form, &WaveFunction::zeros(grid.len()), &p),
            Err(Error::ZeroFunction { .. })
        ));
    }

    #[test]
    fn gaussian_energy_converges() {
        let spec = GeometrySpec::new(
            2,
            Domain::WholeSpace,
            ScalarField::Constant(0.0),
            Magnetic::Zero,
            BoundaryCondition::neumann(),
        )
        .unwrap();
        // ∫|∇e^{−|x|²/2}|² = π on ℝ².
        let mut errors = Vec::new();
        for &s in &[0.2, 0.1, 0.05] {
            let grid = build_grid(&spec, s, Some(&Truncation::cube(&[0.0, 0.0], 8.0))).unwrap();
            let form = assemble(&spec, 1.0, &grid).unwrap();
            let psi = WaveFunction::from_real(&grid, |x| (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp());
            errors.push((form.energy(&psi) - std::f64::consts::PI).abs());
        }
        for w in errors.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 1.8, "observed order {order}");
        }
    }

    #[test]
    fn gauge_identity() {
        let (spec, grid) = magnetic_square();
        let h = 0.2;
        let form = assemble(&spec, h, &grid).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 0..5 {
            let (a, b, c) = (
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(0.5..3.0),
            );
            let phi = move |x: &[f64]| a * x[0] + b * (c * x[1]).sin() * x[0] + k as f64;
            let psi = random_psi(&grid, &mut rng);
            let shifted_spec = spec.gauge_shifted(phi);
            let shifted = assemble(&shifted_spec, h, &grid).unwrap();
            let lhs = form.energy(&gauge_transform(&psi, &grid, phi, h));
            let rhs = shifted.energy(&psi);
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs(), "{lhs} vs {rhs}");
            let direct = form.gauge_shifted(phi).energy(&psi);
            assert!((direct - rhs).abs() <= 1e-12 * rhs.abs());
        }
    }

    #[test]
    fn diamagnetic_inequality() {
        let (spec, grid) = magnetic_square();
        let form = assemble(&spec, 0.5, &grid).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let psi = random_psi(&grid, &mut rng);
            assert!(form.field_free_kinetic_energy(&psi.modulus()) <= form.kinetic_energy(&psi));
        }
    }

    #[test]
    fn magnetic_translation_invariance() {
        let b = 1.3;
        let h = 0.7;
        let spec = GeometrySpec::new(
            2,
            Domain::WholeSpace,
            ScalarField::Constant(1.0),
            Magnetic::constant(MagneticMatrix::planar(b)),
            BoundaryCondition::neumann(),
        )
        .unwrap();
        let grid = build_grid(&spec, 0.1, Some(&Truncation::cube(&[0.0, 0.0], 4.0))).unwrap();
        let form = assemble(&spec, h, &grid).unwrap();
        let p = ExponentP::new(4.0, 2).unwrap();
        let profile = |x: &[f64]| {
            let r2 = (x[0] + 0.3).powi(2) + (x[1] - 0.2).powi(2);
            Complex64::new((-4.0 * r2).exp(), 0.3 * x[0] * (-3.0 * r2).exp())
        };
        let psi = WaveFunction::from_fn(&grid, profile);
        let x0 = [grid.spacing[0] * 7.0, -grid.spacing[1] * 4.0];
        let a0 = [-0.5 * b * x0[1], 0.5 * b * x0[0]];
        let moved = WaveFunction::from_fn(&grid, |x| {
            let shifted = [x[0] - x0[0], x[1] - x0[1]];
            profile(&shifted) * Complex64::from_polar(1.0, -(a0[0] * x[0] + a0[1] * x[1]) / h)
        });
        let q0 = evaluate(&form, &psi, &p).unwrap().quotient;
        let q1 = evaluate(&form, &moved, &p).unwrap().quotient;
        assert!((q0 - q1).abs() <= 1e-10 * q0.abs(), "{q0} vs {q1}");
    }
}
