//! Two-scale sliding partitions of unity and translation selection.
//!
//! The family consists of translates of a tensor-product cutoff that equals 1
//! on a cube of half-width `h^ρ` and falls to 0 across a transition layer of
//! width `h^α`; consecutive cells are `L = 2h^ρ + h^α` apart, so that
//! `Σ_k χ_k² = 1` identically.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::discretize::{assemble, build_grid, AssembledForm, Grid, WaveFunction};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryCondition, Domain, GeometrySpec, Magnetic, MagneticMatrix, ScalarField};
use crate::quadrature::GaussRule;

/// Degree-7 smoothstep `s(t) = 35t⁴ − 84t⁵ + 70t⁶ − 20t⁷`, with `s(1−t) = 1 − s(t)`.
fn smoothstep(t: f64) -> f64 {
    let t4 = t * t * t * t;
    t4 * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t)))
}

/// `s'(t) = 140 t³(1−t)³`.
fn smoothstep_derivative(t: f64) -> f64 {
    let u = t * (1.0 - t);
    140.0 * u * u * u
}

/// `max s' = 140/64`.
const SMOOTHSTEP_SLOPE: f64 = 140.0 / 64.0;

/// `∫₀¹ s'(t)² dt`.
fn smoothstep_energy() -> f64 {
    GaussRule::new(8).integrate(0.0, 1.0, |t| smoothstep_derivative(t).powi(2))
}

/// A lattice of cutoffs `χ_k(x) = Π_j χ₀(x_j − L k_j − τ_j)`.
#[derive(Debug, Clone, Serialize)]
pub struct PartitionFamily {
    pub alpha: f64,
    pub rho: f64,
    pub h: f64,
    pub dim: usize,
    pub tau: Vec<f64>,
}

/// Build the family; requires `α ≥ ρ > 0`, `h ∈ (0, 1)` and `τ` of length `dim`.
pub fn build_partition(alpha: f64, rho: f64, h: f64, dim: usize, tau: &[f64]) -> Result<PartitionFamily> {
    if !(rho > 0.0 && alpha >= rho && alpha.is_finite()) {
        return Err(Error::InvalidScales(format!(
            "need α ≥ ρ > 0, got α = {alpha}, ρ = {rho}"
        )));
    }
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidScales(format!("need h ∈ (0, 1), got {h}")));
    }
    if !(1..=2).contains(&dim) || tau.len() != dim {
        return Err(Error::InvalidScales(format!(
            "dimension {dim} with a translation of length {}",
            tau.len()
        )));
    }
    Ok(PartitionFamily {
        alpha,
        rho,
        h,
        dim,
        tau: tau.to_vec(),
    })
}

impl PartitionFamily {
    /// Plateau half-width `h^ρ`.
    pub fn plateau(&self) -> f64 {
        self.h.powf(self.rho)
    }

    /// Transition width `h^α`.
    pub fn transition(&self) -> f64 {
        self.h.powf(self.alpha)
    }

    /// Lattice step `L = 2h^ρ + h^α`.
    pub fn step(&self) -> f64 {
        2.0 * self.plateau() + self.transition()
    }

    /// Same scales, another translation.
    pub fn translated(&self, tau: &[f64]) -> Self {
        Self {
            tau: tau.to_vec(),
            ..self.clone()
        }
    }

    /// One-dimensional template `χ₀(u)` and its derivative.
    pub fn template(&self, u: f64) -> (f64, f64) {
        let (r, w) = (self.plateau(), self.transition());
        let a = u.abs();
        if a <= r {
            return (1.0, 0.0);
        }
        if a >= r + w {
            return (0.0, 0.0);
        }
        let t = (a - r) / w;
        let arg = FRAC_PI_2 * smoothstep(t);
        let d = -arg.sin() * FRAC_PI_2 * smoothstep_derivative(t) / w;
        (arg.cos(), d * u.signum())
    }

    /// Cells along `axis` whose template may be nonzero at `x`, with
    /// `(index, χ, χ')`.
    fn axis_terms(&self, axis: usize, x: f64) -> impl Iterator<Item = (i64, f64, f64)> + '_ {
        let l = self.step();
        let k0 = ((x - self.tau[axis]) / l).floor() as i64;
        (k0 - 1..=k0 + 2).filter_map(move |k| {
            let (v, d) = self.template(x - l * k as f64 - self.tau[axis]);
            (v != 0.0 || d != 0.0).then_some((k, v, d))
        })
    }

    /// `χ_k(x)`.
    pub fn value(&self, k: &[i64], x: &[f64]) -> f64 {
        let l = self.step();
        (0..self.dim)
            .map(|j| self.template(x[j] - l * k[j] as f64 - self.tau[j]).0)
            .product()
    }

    /// `Σ_k χ_k(x)^q` (tensor-factorized).
    pub fn power_sum(&self, x: &[f64], q: f64) -> f64 {
        (0..self.dim)
            .map(|j| self.axis_terms(j, x[j]).map(|(_, v, _)| v.powf(q)).sum::<f64>())
            .product()
    }

    /// `Σ_k χ_k(x)²`.
    pub fn square_sum(&self, x: &[f64]) -> f64 {
        (0..self.dim)
            .map(|j| self.axis_terms(j, x[j]).map(|(_, v, _)| v * v).sum::<f64>())
            .product()
    }

    /// `Σ_k |∇χ_k(x)|²`.
    pub fn gradient_square_sum(&self, x: &[f64]) -> f64 {
        let per_axis: Vec<(f64, f64)> = (0..self.dim)
            .map(|j| {
                self.axis_terms(j, x[j])
                    .fold((0.0, 0.0), |(s, g), (_, v, d)| (s + v * v, g + d * d))
            })
            .collect();
        (0..self.dim)
            .map(|j| {
                per_axis[j].1
                    * (0..self.dim)
                        .filter(|&i| i != j)
                        .map(|i| per_axis[i].0)
                        .product::<f64>()
            })
            .sum()
    }

    /// `Σ_k χ_k(x) χ_k(y)`.
    pub fn overlap(&self, x: &[f64], y: &[f64]) -> f64 {
        let l = self.step();
        (0..self.dim)
            .map(|j| {
                self.axis_terms(j, x[j])
                    .map(|(k, v, _)| v * self.template(y[j] - l * k as f64 - self.tau[j]).0)
                    .sum::<f64>()
            })
            .product()
    }

    /// Multi-indices of all cells meeting the box `[lo, hi]`.
    pub fn cells_covering(&self, lo: &[f64], hi: &[f64]) -> Vec<Vec<i64>> {
        let l = self.step();
        let reach = self.plateau() + self.transition();
        let ranges: Vec<(i64, i64)> = (0..self.dim)
            .map(|j| {
                (
                    ((lo[j] - reach - self.tau[j]) / l).floor() as i64,
                    ((hi[j] + reach - self.tau[j]) / l).ceil() as i64,
                )
            })
            .collect();
        let mut cells = vec![Vec::new()];
        for (a, b) in ranges {
            cells = cells
                .into_iter()
                .flat_map(|c| {
                    (a..=b).map(move |k| {
                        let mut c = c.clone();
                        c.push(k);
                        c
                    })
                })
                .collect();
        }
        cells
    }

    /// `χ_k` sampled on the grid nodes.
    pub fn multiplier(&self, k: &[i64], grid: &Grid) -> Vec<f64> {
        (0..grid.len()).map(|n| self.value(k, &grid.coords(n))).collect()
    }

    /// `D = d (π/2)² (140/64)²`, so that `Σ_k|∇χ_k|² ≤ D h^{−2α}`.
    pub fn gradient_bound_constant(&self) -> f64 {
        self.dim as f64 * (FRAC_PI_2 * SMOOTHSTEP_SLOPE).powi(2)
    }

    /// `∫|∇χ_k|²` over one cell, by Gauss–Legendre quadrature of the template.
    pub fn cell_gradient_mass(&self) -> f64 {
        let (r, w) = (self.plateau(), self.transition());
        let rule = GaussRule::new(12);
        let slope = 2.0 * rule.integrate_composite(r, r + w, 16, |u| self.template(u).1.powi(2));
        let mass = 2.0 * r + 2.0 * rule.integrate_composite(r, r + w, 16, |u| self.template(u).0.powi(2));
        self.dim as f64 * slope * mass.powi(self.dim as i32 - 1)
    }

    /// Closed form of [`Self::cell_gradient_mass`]:
    /// `d (π/2)² ∫s'² · h^{−α} · L^{d−1}` (each side of the cutoff carries
    /// half of `(π/2)²∫s'²`, since `sin²` and `cos²` of the ramp share it).
    pub fn cell_gradient_mass_exact(&self) -> f64 {
        self.dim as f64 * FRAC_PI_2.powi(2) * smoothstep_energy() / self.transition()
            * self.step().powi(self.dim as i32 - 1)
    }

    /// Fraction of a cell where the family is not locally a single cutoff:
    /// `1 − (2h^ρ / L)^d`.
    pub fn transition_fraction(&self) -> f64 {
        1.0 - (2.0 * self.plateau() / self.step()).powi(self.dim as i32)
    }
}

/// Discrete localization defect
/// `Σ_links c Re(ψ̄_a e^{iθ} ψ_b) Σ_k (χ_k(b) − χ_k(a))²`, which equals
/// `Σ_k Q(χ_kψ) − Q(ψ)` exactly for any family with `Σχ_k² = 1` at the nodes.
pub fn ims_defect(form: &AssembledForm, psi: &WaveFunction, family: &PartitionFamily) -> f64 {
    let grid = &form.grid;
    let v = &psi.values;
    form.links
        .iter()
        .map(|l| {
            let xa = grid.coords(l.a);
            let xb = grid.coords(l.b);
            let spread = family.square_sum(&xa) + family.square_sum(&xb) - 2.0 * family.overlap(&xa, &xb);
            l.coupling * (v[l.a].conj() * l.factor * v[l.b]).re * spread
        })
        .sum()
}

/// `Σ_k Q(χ_kψ)` by explicit enumeration of the cells.
pub fn localized_energy_sum(form: &AssembledForm, psi: &WaveFunction, family: &PartitionFamily) -> f64 {
    let grid = &form.grid;
    let (lo, hi) = grid_box(grid);
    family
        .cells_covering(&lo, &hi)
        .iter()
        .map(|k| {
            let chi = family.multiplier(k, grid);
            let local = WaveFunction {
                values: psi.values.iter().zip(&chi).map(|(v, c)| v * *c).collect(),
            };
            form.energy(&local)
        })
        .sum()
}

/// `Σ_k ‖χ_kψ‖_p^p`.
pub fn localized_mass_sum(grid: &Grid, psi: &WaveFunction, family: &PartitionFamily, p: f64) -> f64 {
    psi.values
        .iter()
        .enumerate()
        .filter(|(n, _)| grid.is_free(*n))
        .map(|(n, v)| grid.weight[n] * v.norm().powf(p) * family.power_sum(&grid.coords(n), p))
        .sum()
}

fn grid_box(grid: &Grid) -> (Vec<f64>, Vec<f64>) {
    let lo = grid.origin[..grid.dim].to_vec();
    let hi = (0..grid.dim)
        .map(|j| grid.origin[j] + grid.spacing[j] * (grid.shape[j] - 1) as f64)
        .collect();
    (lo, hi)
}

/// Options of [`find_translation`].
#[derive(Debug, Clone, Serialize)]
pub struct TranslationOptions {
    pub samples: usize,
    pub seed: u64,
    /// Multiple of the τ-averaged `L^p` deficit allowed by test (a).
    pub mass_factor: f64,
    /// Multiple of the τ-averaged localization defect allowed by test (b).
    pub defect_factor: f64,
}

impl Default for TranslationOptions {
    fn default() -> Self {
        Self {
            samples: 200,
            seed: 0,
            mass_factor: 3.0,
            defect_factor: 3.0,
        }
    }
}

/// Outcome of the Monte-Carlo translation search.
#[derive(Debug, Clone, Serialize)]
pub struct TranslationReport {
    /// First accepted translation.
    pub tau: Vec<f64>,
    /// Fraction of draws passing both tests.
    pub fraction: f64,
    pub accepted: usize,
    pub samples: usize,
    pub mass_fraction: f64,
    pub defect_fraction: f64,
    /// Acceptance thresholds actually used.
    pub mass_threshold: f64,
    pub defect_threshold: f64,
    /// Whether the constants had to be enlarged by the factor 3.
    pub rescaled: bool,
}

struct Draws {
    taus: Vec<Vec<f64>>,
    deficits: Vec<f64>,
    defects: Vec<f64>,
}

/// Sample `τ ∈ [0, L)^d` uniformly and accept when
/// (a) `Σ_k‖χ_kψ‖_p^p ≥ (1 − C′ q)‖ψ‖_p^p` with `q = 1 − (2h^ρ/L)^d`, and
/// (b) `Σ_kQ(χ_kψ) − Q(ψ) ≤ C″ h² (∫|∇χ₀|² / L^d) ‖ψ‖₂²`.
/// Both right-hand sides bound the τ-averages of the left-hand sides, so with
/// `C′ = C″ = 3` Markov's inequality leaves an accepted set of measure ≥ ⅓.
/// When no draw passes, both constants are multiplied by 3 once.
pub fn find_translation(
    form: &AssembledForm,
    psi: &WaveFunction,
    alpha: f64,
    rho: f64,
    p: f64,
    opts: &TranslationOptions,
) -> Result<TranslationReport> {
    if !(p >= 2.0) {
        return Err(Error::InvalidArgument(format!(
            "translation selection needs p ≥ 2, got {p}"
        )));
    }
    if opts.samples == 0 {
        return Err(Error::InvalidArgument("at least one sample is required".into()));
    }
    let grid = &form.grid;
    let base = build_partition(alpha, rho, form.h, grid.dim, &vec![0.0; grid.dim])?;
    let l = base.step();
    let lp = psi.lp_norm(grid, p).powf(p);
    let l2 = psi.l2_norm(grid).powi(2);
    if !(lp > 0.0) {
        return Err(Error::ZeroFunction { norm: lp });
    }
    let q = base.transition_fraction();
    let mean_defect = form.h * form.h * base.cell_gradient_mass_exact() / l.powi(grid.dim as i32);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut draws = Draws {
        taus: Vec::with_capacity(opts.samples),
        deficits: Vec::with_capacity(opts.samples),
        defects: Vec::with_capacity(opts.samples),
    };
    for _ in 0..opts.samples {
        let tau: Vec<f64> = (0..grid.dim).map(|_| rng.random_range(0.0..l)).collect();
        let family = base.translated(&tau);
        draws
            .deficits
            .push(1.0 - localized_mass_sum(grid, psi, &family, p) / lp);
        draws.defects.push(ims_defect(form, psi, &family) / l2);
        draws.taus.push(tau);
    }
    let evaluate = |scale: f64| {
        let mass_threshold = scale * opts.mass_factor * q;
        let defect_threshold = scale * opts.defect_factor * mean_defect;
        let pass_a: Vec<bool> = draws.deficits.iter().map(|d| *d <= mass_threshold).collect();
        let pass_b: Vec<bool> = draws.defects.iter().map(|d| *d <= defect_threshold).collect();
        let both: Vec<usize> = (0..opts.samples).filter(|&i| pass_a[i] && pass_b[i]).collect();
        let n = opts.samples as f64;
        TranslationReport {
            tau: both.first().map(|&i| draws.taus[i].clone()).unwrap_or_default(),
            fraction: both.len() as f64 / n,
            accepted: both.len(),
            samples: opts.samples,
            mass_fraction: pass_a.iter().filter(|b| **b).count() as f64 / n,
            defect_fraction: pass_b.iter().filter(|b| **b).count() as f64 / n,
            mass_threshold,
            defect_threshold,
            rescaled: scale != 1.0,
        }
    };
    let first = evaluate(1.0);
    if first.accepted > 0 {
        return Ok(first);
    }
    let second = evaluate(3.0);
    if second.accepted > 0 {
        Ok(second)
    } else {
        Err(Error::NoneAccepted { samples: opts.samples })
    }
}

/// Gradient-bound constants fitted at one `h`.
#[derive(Debug, Clone, Serialize)]
pub struct GradientRow {
    pub h: f64,
    /// `sup h^{2α} Σ_k|∇χ_k|²` over the sample points.
    pub pointwise_constant: f64,
    /// `∫|∇χ_k|² / h^{ρd − α − ρ}`.
    pub cell_constant: f64,
    /// Relative gap between quadrature and closed-form cell masses.
    pub cell_quadrature_error: f64,
}

/// Full report of the `partition-check` harness.
#[derive(Debug, Clone, Serialize)]
pub struct PartitionCheck {
    pub alpha: f64,
    pub rho: f64,
    pub h: f64,
    pub dim: usize,
    pub step: f64,
    pub quadratic_sum_max_error: f64,
    pub points: usize,
    pub gradient_bound: f64,
    pub gradient_rows: Vec<GradientRow>,
    pub ims_relative_error: f64,
    pub translation: TranslationReport,
    pub seed: u64,
}

/// `max |Σ_kχ_k² − 1|` over `points` uniform samples of `[−2L, 2L]^d` with a
/// random translation.
pub fn quadratic_sum_error(family: &PartitionFamily, points: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = family.step();
    let fam = family.translated(&(0..family.dim).map(|_| rng.random_range(0.0..l)).collect::<Vec<_>>());
    (0..points)
        .map(|_| {
            let x: Vec<f64> = (0..fam.dim).map(|_| rng.random_range(-2.0 * l..2.0 * l)).collect();
            (fam.square_sum(&x) - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

/// Fitted gradient constants at each `h`.
pub fn gradient_rows(
    alpha: f64,
    rho: f64,
    dim: usize,
    h_list: &[f64],
    points: usize,
    seed: u64,
) -> Result<Vec<GradientRow>> {
    h_list
        .iter()
        .map(|&h| {
            let family = build_partition(alpha, rho, h, dim, &vec![0.0; dim])?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let l = family.step();
            let sup = (0..points)
                .map(|_| {
                    let x: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..l)).collect();
                    family.gradient_square_sum(&x)
                })
                .fold(0.0, f64::max);
            let quad = family.cell_gradient_mass();
            let exact = family.cell_gradient_mass_exact();
            let scale = h.powf(rho * dim as f64 - alpha - rho);
            Ok(GradientRow {
                h,
                pointwise_constant: sup * h.powf(2.0 * alpha),
                cell_constant: quad / scale,
                cell_quadrature_error: (quad / exact - 1.0).abs(),
            })
        })
        .collect()
}

/// A localized test state `e^{iφ(x)} exp(−|x − x₀|²/(2h))` with a random
/// center and a random smooth phase.
pub fn random_localized_state(grid: &Grid, h: f64, seed: u64) -> WaveFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = grid_box(grid);
    let center: Vec<f64> = (0..grid.dim)
        .map(|j| {
            let m = 0.25 * (hi[j] - lo[j]);
            rng.random_range(lo[j] + m..hi[j] - m)
        })
        .collect();
    let k: Vec<f64> = (0..grid.dim).map(|_| rng.random_range(-2.0..2.0)).collect();
    WaveFunction::from_fn(grid, |x| {
        let r2: f64 = x.iter().zip(&center).map(|(a, c)| (a - c) * (a - c)).sum();
        let phase: f64 = x.iter().zip(&k).map(|(a, b)| a * b).sum::<f64>() / h.sqrt();
        Complex64::from_polar((-r2 / (2.0 * h)).exp(), phase)
    })
}

/// The quadratic identity, gradient constants (at `h`, `h/2`, `h/4`), the
/// discrete IMS identity and the translation search on a random localized
/// state in a magnetic box.
pub fn partition_check(alpha: f64, rho: f64, h: f64, samples: usize, seed: u64) -> Result<PartitionCheck> {
    let dim = 2;
    let family = build_partition(alpha, rho, h, dim, &[0.0, 0.0])?;
    let points = 10_000;
    let quadratic_sum_max_error = quadratic_sum_error(&family, points, seed);
    let gradient_rows = gradient_rows(alpha, rho, dim, &[h, 0.5 * h, 0.25 * h], points, seed)?;
    let half = 1.5 * family.step().max(4.0 * h.sqrt());
    let spec = GeometrySpec::new(
        dim,
        Domain::Rectangle {
            lo: vec![-half, -half],
            hi: vec![half, half],
        },
        ScalarField::Constant(1.0),
        Magnetic::constant(MagneticMatrix::planar(1.0)),
        BoundaryCondition::neumann(),
    )?;
    let grid = build_grid(&spec, (h.sqrt() / 8.0).min(half / 40.0), None)?;
    let form = assemble(&spec, h, &grid)?;
    let psi = random_localized_state(&grid, h, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let tau: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..family.step())).collect();
    let moved = family.translated(&tau);
    let lhs = localized_energy_sum(&form, &psi, &moved) - form.energy(&psi);
    let rhs = ims_defect(&form, &psi, &moved);
    let ims_relative_error = (lhs - rhs).abs() / form.energy(&psi);
    let translation = find_translation(
        &form,
        &psi,
        alpha,
        rho,
        4.0,
        &TranslationOptions {
            samples,
            seed,
            ..Default::default()
        },
    )?;
    Ok(PartitionCheck {
        alpha,
        rho,
        h,
        dim,
        step: family.step(),
        quadratic_sum_max_error,
        points,
        gradient_bound: family.gradient_bound_constant(),
        gradient_rows,
        ims_relative_error,
        translation,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_scales() {
        assert!(matches!(
            build_partition(0.2, 0.3, 0.1, 2, &[0.0, 0.0]),
            Err(Error::InvalidScales(_))
        ));
        assert!(build_partition(0.5, 0.0, 0.1, 1, &[0.0]).is_err());
        assert!(build_partition(0.5, 0.3, 1.5, 1, &[0.0]).is_err());
        assert!(build_partition(0.5, 0.3, 0.1, 2, &[0.0]).is_err());
    }

    #[test]
    fn template_shape() {
        let f = build_partition(0.5, 1.0 / 3.0, 0.05, 1, &[0.0]).unwrap();
        assert_eq!(f.template(0.9 * f.plateau()).0, 1.0);
        assert_eq!(f.template(f.plateau() + 1.01 * f.transition()).0, 0.0);
        let mid = f.plateau() + 0.5 * f.transition();
        assert!((f.template(mid).0 - 0.5f64.sqrt()).abs() < 1e-14);
        // Derivative against finite differences.
        let u = f.plateau() + 0.3 * f.transition();
        let e = 1e-7;
        let fd = (f.template(u + e).0 - f.template(u - e).0) / (2.0 * e);
        assert!((fd - f.template(u).1).abs() < 1e-5 * f.template(u).1.abs());
    }

    #[test]
    fn quadratic_sum_is_one() {
        for (alpha, rho, h, dim) in [(0.5, 1.0 / 3.0, 0.05, 2), (0.4, 0.4, 0.3, 1), (0.9, 0.1, 0.01, 2)] {
            let f = build_partition(alpha, rho, h, dim, &vec![0.0; dim]).unwrap();
            assert!(quadratic_sum_error(&f, 10_000, 7) < 1e-12);
        }
    }

    #[test]
    fn gradient_constants_are_h_independent() {
        let rows = gradient_rows(0.5, 1.0 / 3.0, 2, &[0.1, 0.05, 0.025], 10_000, 1).unwrap();
        let f = build_partition(0.5, 1.0 / 3.0, 0.1, 2, &[0.0, 0.0]).unwrap();
        let d = f.gradient_bound_constant();
        for r in &rows {
            assert!(r.pointwise_constant <= d * (1.0 + 1e-12), "{r:?}");
            assert!(r.pointwise_constant >= 0.5 * d, "{r:?}");
            assert!(r.cell_quadrature_error < 1e-10, "{r:?}");
        }
        let worst = rows.iter().map(|r| r.cell_constant).fold(0.0, f64::max);
        assert!(worst <= rows[0].cell_constant * (1.0 + 1e-12));
    }

    #[test]
    fn ims_identity_on_magnetic_box() {
        let check = partition_check(0.5, 1.0 / 3.0, 0.05, 50, 3).unwrap();
        assert!(check.ims_relative_error < 1e-10, "{}", check.ims_relative_error);
        assert!(check.quadratic_sum_max_error < 1e-12);
    }

    #[test]
    fn constant_state_accepts_every_translation() {
        let h = 0.05;
        let spec = GeometrySpec::new(
            2,
            Domain::Rectangle {
                lo: vec![-3.0, -3.0],
                hi: vec![3.0, 3.0],
            },
            ScalarField::Constant(1.0),
            Magnetic::Zero,
            BoundaryCondition::neumann(),
        )
        .unwrap();
        let grid = build_grid(&spec, 0.03, None).unwrap();
        let form = assemble(&spec, h, &grid).unwrap();
        let psi = WaveFunction::from_real(&grid, |_| 1.0);
        let r = find_translation(&form, &psi, 0.5, 1.0 / 3.0, 4.0, &TranslationOptions::default()).unwrap();
        assert_eq!(r.accepted, r.samples, "{r:?}");
        assert!(!r.rescaled);
    }

    #[test]
    fn localized_acceptance_fraction() {
        let check = partition_check(0.5, 1.0 / 3.0, 0.05, 200, 11).unwrap();
        assert!(
            check.translation.fraction >= 1.0 / 3.0 - 0.05,
            "{:?}",
            check.translation
        );
    }
}
