//! Model constants of the frozen homogeneous geometries and the
//! concentration function `x ↦ λ(G_x, 1, p)`.
//!
//! Every model is first reduced by the exact scaling
//! `λ(B, V, γ) = μ^κ λ(B/μ, V/μ, γ/√μ)` with `κ = 1 − d/2 + d/p`, where `μ` is
//! `Tr⁺B` (or `V` when `B = 0`).  Reduced models are solved once and shared
//! between samples with equal parameters.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::discretize::{assemble, build_grid, Truncation};
use crate::error::{Error, Result};
use crate::geometry::{
    de_gennes_constant, robin_de_gennes_constant, tr_plus, BoundaryCondition, Domain, ExponentP, GeometrySpec,
    Magnetic, MagneticMatrix, ScalarField,
};
use crate::minimize::{minimize_quotient, MinimizeOptions};
use crate::model1d::{lambda_c, linear_eigenvalue, soliton_line};

/// Discretization defaults of a model solve.
#[derive(Debug, Clone, Serialize)]
pub struct ModelOptions {
    /// Truncation half-width in natural lengths `μ^{−1/2}`.
    pub half_width_lengths: f64,
    /// Nodes across the truncation half-width in dimension two.
    pub nodes_per_axis: usize,
    /// Nodes across the truncation half-width in dimension one.
    pub nodes_per_axis_1d: usize,
    /// Overrides the node counts: spacing as a fraction of the natural length.
    pub spacing_per_length: Option<f64>,
    /// Solve one-dimensional models on the lattice instead of the closed forms.
    pub numeric_1d: bool,
    pub minimize: MinimizeOptions,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self {
            half_width_lengths: 10.0,
            nodes_per_axis: 120,
            nodes_per_axis_1d: 2000,
            spacing_per_length: None,
            numeric_1d: false,
            minimize: MinimizeOptions {
                restarts: 2,
                grad_tol: 1e-7,
                ..MinimizeOptions::default()
            },
        }
    }
}

impl ModelOptions {
    fn spacing(&self, dim: usize) -> f64 {
        match self.spacing_per_length {
            Some(s) => s,
            None => {
                let n = if dim == 1 {
                    self.nodes_per_axis_1d
                } else {
                    self.nodes_per_axis
                };
                self.half_width_lengths / n.max(1) as f64
            }
        }
    }

    fn key(&self) -> String {
        format!(
            "{}|{}|{}|{:?}|{}|{}|{}|{}",
            self.half_width_lengths,
            self.nodes_per_axis,
            self.nodes_per_axis_1d,
            self.spacing_per_length,
            self.numeric_1d,
            self.minimize.grad_tol,
            self.minimize.restarts,
            self.minimize.seed
        )
    }
}

/// How a model constant was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelMethod {
    /// Closed form (`Tr⁺B + V`, sech soliton, Robin half-line, de Gennes).
    Exact,
    /// Lattice minimization.
    Numeric,
}

/// A model constant with its provenance.
#[derive(Debug, Clone, Serialize)]
pub struct ModelConstant {
    pub value: f64,
    pub method: ModelMethod,
    /// Lattice spacing and truncation half-width in physical units
    /// (zero for closed forms).
    pub spacing: f64,
    pub half_width: f64,
    pub residual: f64,
    pub iterations: usize,
}

impl ModelConstant {
    fn exact(value: f64) -> Self {
        Self {
            value,
            method: ModelMethod::Exact,
            spacing: 0.0,
            half_width: 0.0,
            residual: 0.0,
            iterations: 0,
        }
    }

    fn scaled(mut self, factor: f64, length: f64) -> Self {
        self.value *= factor;
        self.spacing *= length;
        self.half_width *= length;
        self
    }
}

/// Interior or boundary sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleKind {
    Interior,
    Boundary,
}

impl SampleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SampleKind::Interior => "interior",
            SampleKind::Boundary => "boundary",
        }
    }
}

/// `κ = 1 − d/2 + d/p`: `λ` scales like `μ^κ` when energies scale like `μ`.
pub fn scaling_exponent(dim: usize, p: f64) -> f64 {
    let d = dim as f64;
    1.0 - 0.5 * d + d / p
}

/// Scaling reduction: `(μ, B/μ, V/μ, γ/√μ)`.
fn reduce(b: &MagneticMatrix, v: f64, gamma: f64) -> Result<(f64, MagneticMatrix, f64, f64)> {
    let t = tr_plus(b);
    let mu = if t > 0.0 { t } else { v };
    if !(mu > 0.0) {
        return Err(Error::NotPositive { value: t + v });
    }
    Ok((mu, b.scaled(1.0 / mu), v / mu, gamma / mu.sqrt()))
}

fn check_dims(b: &MagneticMatrix, p: &ExponentP) -> Result<()> {
    if b.dim() != p.dim() {
        return Err(Error::InvalidArgument(format!(
            "field of dimension {} with an exponent for dimension {}",
            b.dim(),
            p.dim()
        )));
    }
    Ok(())
}

/// Interior model constant `λ((ℝ^d, Id, V₀, A^L, 0), 1, p)`.
///
/// `p = 2` gives `Tr⁺B₀ + V₀` exactly; `p > 2` minimizes on a truncated
/// whole-space lattice (closed form in dimension one).
pub fn interior_constant(b0: &MagneticMatrix, v0: f64, p: &ExponentP, opts: &ModelOptions) -> Result<ModelConstant> {
    check_dims(b0, p)?;
    let linear = tr_plus(b0) + v0;
    if !(linear > 0.0) {
        return Err(Error::NotPositive { value: linear });
    }
    if p.is_linear() {
        return Ok(ModelConstant::exact(linear));
    }
    let d = b0.dim();
    let (mu, b, v, _) = reduce(b0, v0, 0.0)?;
    let factor = mu.powf(scaling_exponent(d, p.value()));
    let length = mu.powf(-0.5);
    let reduced = if d == 1 && !opts.numeric_1d {
        ModelConstant::exact(soliton_line(p.value())?)
    } else {
        numeric_model(SampleKind::Interior, &b, v, 0.0, p, opts)?
    };
    Ok(reduced.scaled(factor, length))
}

/// Boundary model constant on the half-space `{x_d > 0}` with Robin
/// coefficient `γ₀` on the flat face (`γ₀ = +∞` is Dirichlet).
pub fn boundary_constant(
    b0: &MagneticMatrix,
    v0: f64,
    gamma0: f64,
    p: &ExponentP,
    opts: &ModelOptions,
) -> Result<ModelConstant> {
    check_dims(b0, p)?;
    let d = b0.dim();
    if d >= 3 {
        if p.is_linear() && d == 3 {
            return half_space_ground_3d(b0, v0, gamma0, opts);
        }
        return Err(Error::InvalidArgument(
            "boundary models in dimension three are available at p = 2 only".into(),
        ));
    }
    let (mu, b, v, c) = reduce(b0, v0, gamma0)?;
    let factor = mu.powf(scaling_exponent(d, p.value()));
    let length = mu.powf(-0.5);
    let field_free = b.is_zero();
    let reduced = if field_free && (p.is_linear() || (d == 1 && !opts.numeric_1d)) {
        // V = 1 after reduction; the tangential directions separate.
        ModelConstant::exact(field_free_boundary(c, p.value())?)
    } else if p.is_linear() && d == 2 {
        // Landau gauge along the boundary: a Fourier transform in the
        // tangential variable leaves the Robin de Gennes family; the bottom
        // is an infimum over ξ and is not attained on the half-plane.
        let value = if c == f64::INFINITY {
            // Dirichlet: the de Gennes function tends to the Landau level 1.
            1.0
        } else {
            robin_de_gennes_constant(c)
        };
        ModelConstant::exact(value + v)
    } else {
        numeric_model(SampleKind::Boundary, &b, v, c, p, opts)?
    };
    if !(reduced.value > 0.0) {
        return Err(Error::NotPositive {
            value: reduced.value * factor,
        });
    }
    Ok(reduced.scaled(factor, length))
}

/// Boundary constant computed on the truncated half-space lattice in every
/// case (no closed forms).  At `p = 2` with a magnetic field the half-plane
/// bottom is not attained, so this is an upper bound that decreases toward
/// the true value as the truncation grows.
pub fn lattice_boundary_constant(
    b0: &MagneticMatrix,
    v0: f64,
    gamma0: f64,
    p: &ExponentP,
    opts: &ModelOptions,
) -> Result<ModelConstant> {
    check_dims(b0, p)?;
    let d = b0.dim();
    let (mu, b, v, c) = reduce(b0, v0, gamma0)?;
    let factor = mu.powf(scaling_exponent(d, p.value()));
    Ok(numeric_model(SampleKind::Boundary, &b, v, c, p, opts)?.scaled(factor, mu.powf(-0.5)))
}

/// Half-line constant with `V = 1`, `B = 0` and Robin coefficient `c`.
fn field_free_boundary(c: f64, p: f64) -> Result<f64> {
    if p == 2.0 {
        let value = linear_eigenvalue(c);
        if c <= -1.0 {
            return Err(Error::NotPositive { value: 1.0 - c * c });
        }
        return Ok(value);
    }
    if c <= -1.0 {
        return Err(Error::NotPositive { value: 0.0 });
    }
    if c >= 1.0 {
        // The minimizer escapes to infinity: the whole-line value.
        return soliton_line(p);
    }
    lambda_c(c, p)
}

/// Lattice solve of a reduced model (`μ = 1`).
fn numeric_model(
    kind: SampleKind,
    b: &MagneticMatrix,
    v: f64,
    gamma: f64,
    p: &ExponentP,
    opts: &ModelOptions,
) -> Result<ModelConstant> {
    let d = b.dim();
    if d > 2 {
        return Err(Error::InvalidArgument(
            "lattices are available in dimensions 1 and 2 only".into(),
        ));
    }
    let mut energy = tr_plus(b) + v.max(0.0);
    if kind == SampleKind::Boundary && gamma < 0.0 {
        energy += gamma * gamma;
    }
    let length = energy.max(1e-12).powf(-0.5).min(1.0);
    let half = opts.half_width_lengths * length;
    let spacing = opts.spacing(d) * length;
    let (domain, truncation, boundary) = match kind {
        SampleKind::Interior => (
            Domain::WholeSpace,
            Truncation::cube(&vec![0.0; d], half),
            BoundaryCondition::neumann(),
        ),
        SampleKind::Boundary => (
            Domain::HalfSpace,
            Truncation::half_space(d, half),
            if gamma == f64::INFINITY {
                BoundaryCondition::Dirichlet
            } else {
                BoundaryCondition::Robin(ScalarField::Constant(gamma))
            },
        ),
    };
    let magnetic = if b.is_zero() {
        Magnetic::Zero
    } else {
        Magnetic::constant(b.clone())
    };
    let spec = GeometrySpec::new(d, domain, ScalarField::Constant(v), magnetic, boundary)?;
    let grid = build_grid(&spec, spacing, Some(&truncation))?;
    let form = assemble(&spec, 1.0, &grid)?;
    let mut center = vec![0.0; d];
    if kind == SampleKind::Boundary && gamma == f64::INFINITY {
        center[d - 1] = length;
    }
    let mopts = MinimizeOptions {
        centers: vec![center],
        init_width: Some(length),
        ..opts.minimize.clone()
    };
    let r = minimize_quotient(&form, p, &mopts)?.require_converged()?;
    Ok(ModelConstant {
        value: r.lambda,
        method: ModelMethod::Numeric,
        spacing,
        half_width: half,
        residual: r.el_residual,
        iterations: r.iterations,
    })
}

/// `p = 2` half-space constant for a constant field in dimension three.
///
/// With `β = |β|(0, cos θ, sin θ)` in a boundary frame (normal `x₃`), a
/// Fourier transform along `x₁` reduces the problem to the half-plane
/// operator `−Δ + (x₃ cos θ − x₂ sin θ)²` with the same Robin coefficient.
/// The endpoints are separable: `θ = π/2` is a Landau level times a Robin
/// half-line, `θ = 0` is the Robin de Gennes problem.
pub fn half_space_ground_3d(b0: &MagneticMatrix, v0: f64, gamma0: f64, opts: &ModelOptions) -> Result<ModelConstant> {
    if b0.dim() != 3 {
        return Err(Error::InvalidArgument("expected a 3×3 field".into()));
    }
    // Field vector from B₁₂ = β₃, B₂₃ = β₁, B₃₁ = β₂.
    let beta = [b0.get(1, 2), b0.get(2, 0), b0.get(0, 1)];
    let strength = beta.iter().map(|x| x * x).sum::<f64>().sqrt();
    if strength == 0.0 {
        if !(v0 > 0.0) {
            return Err(Error::NotPositive { value: v0 });
        }
        let c = gamma0 / v0.sqrt();
        return Ok(ModelConstant::exact(v0 * field_free_boundary(c, 2.0)?));
    }
    let c = gamma0 / strength.sqrt();
    let tangential = (beta[0] * beta[0] + beta[1] * beta[1]).sqrt();
    let sin = (beta[2].abs() / strength).min(1.0);
    let cos = (tangential / strength).min(1.0);
    let reduced = if cos < 1e-12 {
        // Landau level 1 plus the Robin half-line shift.
        let shift = if c < 0.0 { -c * c } else { 0.0 };
        ModelConstant::exact(1.0 + shift)
    } else if sin < 1e-12 {
        if c == 0.0 {
            ModelConstant::exact(de_gennes_constant()?)
        } else {
            ModelConstant::exact(robin_de_gennes_constant(c))
        }
    } else {
        // Tilted field: the ground state spreads over sin(θ)^{−1/2} lengths along x₂.
        let stretch = sin.powf(-0.5).min(4.0);
        let half = opts.half_width_lengths * stretch;
        let spacing = opts.spacing(2);
        let spec = GeometrySpec::new(
            2,
            Domain::HalfSpace,
            ScalarField::custom(move |x: &[f64]| {
                let w = x[1] * cos - x[0] * sin;
                w * w
            }),
            Magnetic::Zero,
            if c == f64::INFINITY {
                BoundaryCondition::Dirichlet
            } else {
                BoundaryCondition::Robin(ScalarField::Constant(c))
            },
        )?;
        let grid = build_grid(&spec, spacing, Some(&Truncation::half_space(2, half)))?;
        let form = assemble(&spec, 1.0, &grid)?;
        let mopts = MinimizeOptions {
            centers: vec![vec![0.0, 0.5]],
            init_width: Some(1.0),
            ..opts.minimize.clone()
        };
        let r = minimize_quotient(&form, &ExponentP::new(2.0, 2)?, &mopts)?.require_converged()?;
        ModelConstant {
            value: r.lambda,
            method: ModelMethod::Numeric,
            spacing,
            half_width: half,
            residual: r.el_residual,
            iterations: r.iterations,
        }
    };
    let mut out = reduced.scaled(strength, strength.powf(-0.5));
    out.value += v0;
    if !(out.value > 0.0) {
        return Err(Error::NotPositive { value: out.value });
    }
    Ok(out)
}

/// Comparison between the boundary and interior constants.
#[derive(Debug, Clone, Serialize)]
pub struct IntBordRecord {
    pub boundary: f64,
    pub interior: f64,
    /// `boundary < interior`.
    pub strict_less: bool,
    /// `interior − boundary`.
    pub gap: f64,
    /// `2^{2/p − 1}·interior`: by even reflection the boundary constant is at
    /// least this value when `γ₀ = 0`.
    pub reflection_bound: f64,
}

/// Compute both constants and compare them.
pub fn int_bord_check(
    b0: &MagneticMatrix,
    v0: f64,
    gamma0: f64,
    p: &ExponentP,
    opts: &ModelOptions,
) -> Result<IntBordRecord> {
    if p.is_linear() {
        return Err(Error::InvalidArgument("the comparison is stated for p > 2".into()));
    }
    let boundary = boundary_constant(b0, v0, gamma0, p, opts)?.value;
    let interior = interior_constant(b0, v0, p, opts)?.value;
    Ok(IntBordRecord {
        boundary,
        interior,
        strict_less: boundary < interior,
        gap: interior - boundary,
        reflection_bound: 2f64.powf(2.0 / p.value() - 1.0) * interior,
    })
}

/// One point of the concentration function.
#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationSample {
    pub x: Vec<f64>,
    pub kind: SampleKind,
    pub value: f64,
    pub model: ModelConstant,
}

/// Options of [`concentration_map`].
#[derive(Debug, Clone, Serialize)]
pub struct MapOptions {
    pub model: ModelOptions,
    /// Relative tolerance defining the argmin set `M`.
    pub delta_m: f64,
    /// Points closer than this to the boundary are boundary samples.
    pub boundary_tolerance: f64,
}

impl Default for MapOptions {
    fn default() -> Self {
        Self {
            model: ModelOptions::default(),
            delta_m: 0.02,
            boundary_tolerance: 1e-9,
        }
    }
}

/// Sampled concentration function with its infimum and argmin set.
#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationMap {
    pub samples: Vec<ConcentrationSample>,
    pub inf_value: f64,
    /// Indices of the samples within `delta_m` (relative) of the infimum.
    pub argmin: Vec<usize>,
    pub epsilon: f64,
    pub delta_m: f64,
}

impl ConcentrationMap {
    /// Points of the argmin set `M`.
    pub fn argmin_points(&self) -> Vec<Vec<f64>> {
        self.argmin.iter().map(|&i| self.samples[i].x.clone()).collect()
    }

    /// The sample realizing the infimum.
    pub fn best(&self) -> &ConcentrationSample {
        self.samples
            .iter()
            .min_by(|a, b| a.value.total_cmp(&b.value))
            .expect("a concentration map has samples")
    }

    /// Whether `x` lies in `M_ε = M + D(0, ε)`.
    pub fn in_m_eps(&self, x: &[f64]) -> bool {
        self.argmin.iter().any(|&i| {
            let d2: f64 = self.samples[i].x.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            d2 < self.epsilon * self.epsilon
        })
    }

    /// Smallest value among samples of one kind.
    pub fn inf_of(&self, kind: SampleKind) -> Option<f64> {
        self.samples
            .iter()
            .filter(|s| s.kind == kind)
            .map(|s| s.value)
            .min_by(|a, b| a.total_cmp(b))
    }

    /// `true` when every sample lies in `M`.
    pub fn is_flat(&self) -> bool {
        self.argmin.len() == self.samples.len()
    }
}

/// Frozen model data at a sample.
fn frozen(spec: &GeometrySpec, x: &[f64], kind: SampleKind) -> (MagneticMatrix, f64, f64) {
    let b = spec.magnetic.field_at(x);
    let v = spec.potential.eval(x);
    let gamma = match kind {
        SampleKind::Interior => 0.0,
        SampleKind::Boundary => spec.robin_at(x).unwrap_or(f64::INFINITY),
    };
    (b, v, gamma)
}

/// `p = 2` positivity check at one sample (the spectral assumption): exact
/// in the interior, and in dimension two a sufficient bound
/// `Θ₀Tr⁺B + V > 0` at boundary points with `γ ≥ 0`; other boundary points
/// are solved.
fn linear_check(b: &MagneticMatrix, v: f64, gamma: f64, kind: SampleKind, opts: &ModelOptions) -> Result<f64> {
    let t = tr_plus(b);
    match kind {
        SampleKind::Interior => Ok(t + v),
        SampleKind::Boundary => {
            if b.dim() == 2 && gamma >= 0.0 && t > 0.0 {
                let bound = de_gennes_constant()? * t + v;
                if bound > 0.0 {
                    return Ok(bound);
                }
            }
            match boundary_constant(b, v, gamma, &ExponentP::new(2.0, b.dim())?, opts) {
                Ok(m) => Ok(m.value),
                Err(Error::NotPositive { value }) => Ok(value),
                Err(e) => Err(e),
            }
        }
    }
}

fn model_key(kind: SampleKind, b: &MagneticMatrix, v: f64, gamma: f64) -> String {
    let bits: Vec<u64> = b.entries().iter().map(|x| x.to_bits()).collect();
    format!("{:?}|{:?}|{}|{}", kind, bits, v.to_bits(), gamma.to_bits())
}

/// Sample the concentration function at `points`.
pub fn concentration_map(
    spec: &GeometrySpec,
    points: &[Vec<f64>],
    p: &ExponentP,
    epsilon: f64,
    opts: &MapOptions,
) -> Result<ConcentrationMap> {
    spec.validate()?;
    if points.is_empty() {
        return Err(Error::InvalidArgument("no sample points".into()));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument("epsilon must be non-negative".into()));
    }
    if p.dim() != spec.dim {
        return Err(Error::InvalidArgument("exponent and geometry dimensions differ".into()));
    }
    let mut kinds = Vec::with_capacity(points.len());
    for x in points {
        if x.len() != spec.dim {
            return Err(Error::InvalidArgument(format!("sample {x:?} has the wrong dimension")));
        }
        let dist = spec.boundary_distance(x);
        let on_boundary = dist.is_some_and(|d| d < opts.boundary_tolerance);
        if !on_boundary && !spec.contains(x) {
            return Err(Error::InvalidArgument(format!("sample {x:?} lies outside the domain")));
        }
        kinds.push(if on_boundary {
            SampleKind::Boundary
        } else {
            SampleKind::Interior
        });
    }
    let frozen_data: Vec<(MagneticMatrix, f64, f64)> =
        points.iter().zip(&kinds).map(|(x, &k)| frozen(spec, x, k)).collect();

    // Unique models, in first-appearance order for determinism.
    let mut unique: BTreeMap<String, usize> = BTreeMap::new();
    let mut order: Vec<(SampleKind, MagneticMatrix, f64, f64)> = Vec::new();
    let mut slot = Vec::with_capacity(points.len());
    for ((b, v, g), &k) in frozen_data.iter().zip(&kinds) {
        let key = model_key(k, b, *v, *g);
        let idx = *unique.entry(key).or_insert_with(|| {
            order.push((k, b.clone(), *v, *g));
            order.len() - 1
        });
        slot.push(idx);
    }

    // Spectral assumption at p = 2.
    let checks: Vec<Result<f64>> = crate::parallel::install(|| {
        order
            .par_iter()
            .map(|(k, b, v, g)| linear_check(b, *v, *g, *k, &opts.model))
            .collect()
    });
    for (i, c) in checks.into_iter().enumerate() {
        let value = c?;
        if !(value > 0.0) {
            let x = &points[slot.iter().position(|&s| s == i).unwrap_or(0)];
            return Err(Error::AssumptionViolated(format!(
                "the p = 2 model constant at {x:?} is {value:.6e} ≤ 0"
            )));
        }
    }

    let solved: Vec<Result<ModelConstant>> = crate::parallel::install(|| {
        order
            .par_iter()
            .map(|(k, b, v, g)| match k {
                SampleKind::Interior => interior_constant(b, *v, p, &opts.model),
                SampleKind::Boundary => boundary_constant(b, *v, *g, p, &opts.model),
            })
            .collect()
    });
    let solved: Vec<ModelConstant> = solved.into_iter().collect::<Result<_>>()?;
    let samples: Vec<ConcentrationSample> = points
        .iter()
        .zip(&kinds)
        .zip(&slot)
        .map(|((x, &kind), &s)| ConcentrationSample {
            x: x.clone(),
            kind,
            value: solved[s].value,
            model: solved[s].clone(),
        })
        .collect();
    let inf_value = samples.iter().map(|s| s.value).fold(f64::INFINITY, f64::min);
    let argmin = samples
        .iter()
        .enumerate()
        .filter(|(_, s)| s.value <= inf_value * (1.0 + opts.delta_m))
        .map(|(i, _)| i)
        .collect();
    Ok(ConcentrationMap {
        samples,
        inf_value,
        argmin,
        epsilon,
        delta_m: opts.delta_m,
    })
}

/// Key identifying a model solve, for callers that cache constants.
pub fn model_options_key(opts: &ModelOptions) -> String {
    opts.key()
}

/// Default sample points: a lattice of about `n` points per axis inside the
/// domain plus about `4n` points on the boundary (bounded domains only).
pub fn default_samples(spec: &GeometrySpec, n: usize) -> Result<Vec<Vec<f64>>> {
    let n = n.max(2);
    let mut pts = Vec::new();
    match &spec.domain {
        Domain::Disk { center, radius } => {
            let step = 2.0 * radius / n as f64;
            let k = (radius / step).floor() as i64;
            for j in -k..=k {
                for i in -k..=k {
                    let x = [center[0] + i as f64 * step, center[1] + j as f64 * step];
                    let r2 = (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2);
                    if r2.sqrt() < radius - 0.25 * step {
                        pts.push(x.to_vec());
                    }
                }
            }
            let m = 4 * n;
            for a in 0..m {
                let t = std::f64::consts::TAU * a as f64 / m as f64;
                pts.push(vec![center[0] + radius * t.cos(), center[1] + radius * t.sin()]);
            }
        }
        Domain::Rectangle { lo, hi } => {
            if spec.dim == 1 {
                for i in 0..=n {
                    pts.push(vec![lo[0] + (hi[0] - lo[0]) * i as f64 / n as f64]);
                }
            } else {
                for j in 0..=n {
                    for i in 0..=n {
                        pts.push(vec![
                            lo[0] + (hi[0] - lo[0]) * i as f64 / n as f64,
                            lo[1] + (hi[1] - lo[1]) * j as f64 / n as f64,
                        ]);
                    }
                }
            }
        }
        _ => {
            return Err(Error::InvalidArgument(
                "default samples need a bounded domain; pass explicit points".into(),
            ))
        }
    }
    Ok(pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model1d::lambda_c;

    fn p(v: f64, d: usize) -> ExponentP {
        ExponentP::new(v, d).unwrap()
    }

    #[test]
    fn linear_interior_values() {
        let o = ModelOptions::default();
        assert_eq!(
            interior_constant(&MagneticMatrix::planar(1.0), 0.0, &p(2.0, 2), &o)
                .unwrap()
                .value,
            1.0
        );
        assert_eq!(
            interior_constant(&MagneticMatrix::zero(2), 0.7, &p(2.0, 2), &o)
                .unwrap()
                .value,
            0.7
        );
        assert!(matches!(
            interior_constant(&MagneticMatrix::zero(2), -0.1, &p(2.0, 2), &o),
            Err(Error::NotPositive { .. })
        ));
    }

    #[test]
    fn one_dimensional_closed_forms_and_lattice() {
        let o = ModelOptions::default();
        let z = MagneticMatrix::zero(1);
        let interior = interior_constant(&z, 1.0, &p(4.0, 1), &o).unwrap().value;
        assert!((interior - 4.0 / 3f64.sqrt()).abs() < 1e-9);
        let boundary = boundary_constant(&z, 1.0, 0.0, &p(4.0, 1), &o).unwrap().value;
        assert!((boundary - 4.0 / 6f64.sqrt()).abs() < 1e-9);
        // V₀ scaling: λ = V₀^{1/2+1/p} λ_{γ/√V₀}.
        let scaled = boundary_constant(&z, 4.0, 0.6, &p(4.0, 1), &o).unwrap().value;
        assert!((scaled - 4f64.powf(0.75) * lambda_c(0.3, 4.0).unwrap()).abs() < 1e-9);
        let numeric = ModelOptions {
            numeric_1d: true,
            ..ModelOptions::default()
        };
        let lattice_i = interior_constant(&z, 1.0, &p(4.0, 1), &numeric).unwrap();
        assert_eq!(lattice_i.method, ModelMethod::Numeric);
        assert!((lattice_i.value - interior).abs() < 1e-3, "{}", lattice_i.value);
        let lattice_b = boundary_constant(&z, 1.0, 0.0, &p(4.0, 1), &numeric).unwrap().value;
        assert!((lattice_b - boundary).abs() < 1e-3, "{lattice_b}");
        // Escape for c ≥ 1.
        let escaped = boundary_constant(&z, 1.0, 1.5, &p(4.0, 1), &o).unwrap().value;
        assert!((escaped - interior).abs() < 1e-12);
    }

    #[test]
    fn int_bord_in_one_dimension() {
        let o = ModelOptions::default();
        let r = int_bord_check(&MagneticMatrix::zero(1), 1.0, 0.0, &p(4.0, 1), &o).unwrap();
        assert!(r.strict_less);
        assert!((r.boundary - r.reflection_bound).abs() < 1e-9);
        let eq = int_bord_check(&MagneticMatrix::zero(1), 1.0, 1.0, &p(4.0, 1), &o).unwrap();
        assert!(!eq.strict_less && eq.gap.abs() < 1e-12);
    }

    #[test]
    fn field_free_half_plane_is_one() {
        let o = ModelOptions::default();
        let v = boundary_constant(&MagneticMatrix::zero(2), 1.0, 0.0, &p(2.0, 2), &o)
            .unwrap()
            .value;
        assert_eq!(v, 1.0);
    }

    #[test]
    fn magnetic_half_plane_linear_bracket() {
        let o = ModelOptions::default();
        let theta = de_gennes_constant().unwrap();
        let b = MagneticMatrix::planar(2.0);
        let v = boundary_constant(&b, 0.0, 0.0, &p(2.0, 2), &o).unwrap().value;
        assert!((v - 2.0 * theta).abs() < 1e-9, "{v}");
        // The truncated lattice approaches the same value from above.
        let coarse = ModelOptions {
            nodes_per_axis: 60,
            ..ModelOptions::default()
        };
        let small = lattice_boundary_constant(
            &b,
            0.0,
            0.0,
            &p(2.0, 2),
            &ModelOptions {
                half_width_lengths: 6.0,
                ..coarse.clone()
            },
        )
        .unwrap()
        .value;
        let large = lattice_boundary_constant(&b, 0.0, 0.0, &p(2.0, 2), &coarse)
            .unwrap()
            .value;
        assert!(
            large < small && large >= v - 1e-3 && large <= 2.0,
            "{small} {large} {v}"
        );
    }

    #[test]
    fn three_dimensional_half_space() {
        let o = ModelOptions::default();
        let theta = de_gennes_constant().unwrap();
        let tangential = MagneticMatrix::from_field_vector([0.0, 1.0, 0.0]);
        let t = half_space_ground_3d(&tangential, 0.0, 0.0, &o).unwrap().value;
        assert!((t - theta).abs() < 1e-9);
        let normal = MagneticMatrix::from_field_vector([0.0, 0.0, 2.0]);
        assert!((half_space_ground_3d(&normal, 0.5, 0.0, &o).unwrap().value - 2.5).abs() < 1e-12);
        let mut last = theta;
        for deg in [30.0f64, 60.0] {
            let a = deg.to_radians();
            let m = MagneticMatrix::from_field_vector([0.0, a.cos(), a.sin()]);
            let v = half_space_ground_3d(&m, 0.0, 0.0, &o).unwrap().value;
            let bound = crate::geometry::neumann_lower_bound(&m).unwrap();
            assert!(v >= bound - 2e-3 && v <= 1.0 + 1e-3, "{deg}: {v} vs {bound}");
            assert!(v > last, "{deg}: {v} ≤ {last}");
            last = v;
        }
    }

    #[test]
    fn concavity_in_gamma_one_dimension() {
        let o = ModelOptions::default();
        let z = MagneticMatrix::zero(1);
        let vals: Vec<f64> = (0..9)
            .map(|k| {
                let g = -0.8 + 0.2 * k as f64;
                boundary_constant(&z, 1.0, g, &p(4.0, 1), &o).unwrap().value
            })
            .collect();
        for w in vals.windows(2) {
            assert!(w[1] > w[0]);
        }
        for w in vals.windows(3) {
            assert!(w[0] - 2.0 * w[1] + w[2] <= 1e-4 * w[1]);
        }
    }

    #[test]
    fn constant_data_map_is_flat() {
        let spec = GeometrySpec::new(
            1,
            Domain::Rectangle {
                lo: vec![0.0],
                hi: vec![5.0],
            },
            ScalarField::Constant(2.0),
            Magnetic::Zero,
            BoundaryCondition::Robin(ScalarField::Constant(0.0)),
        )
        .unwrap();
        // Interior points only: every model is the same whole-line problem.
        let pts: Vec<Vec<f64>> = (1..10).map(|k| vec![0.5 * k as f64]).collect();
        let map = concentration_map(&spec, &pts, &p(4.0, 1), 0.1, &MapOptions::default()).unwrap();
        assert!(map.is_flat());
        // With endpoints, the boundary wins (Int-Bord at γ = 0).
        let mut with_ends = pts.clone();
        with_ends.push(vec![0.0]);
        with_ends.push(vec![5.0]);
        let map = concentration_map(&spec, &with_ends, &p(4.0, 1), 0.1, &MapOptions::default()).unwrap();
        assert_eq!(map.argmin.len(), 2);
        assert_eq!(map.best().kind, SampleKind::Boundary);
        assert!(map.in_m_eps(&[0.05]) && !map.in_m_eps(&[2.5]));
    }

    #[test]
    fn assumption_violation_is_reported() {
        let spec = GeometrySpec::new(
            1,
            Domain::Rectangle {
                lo: vec![0.0],
                hi: vec![5.0],
            },
            ScalarField::Constant(1.0),
            Magnetic::Zero,
            BoundaryCondition::Robin(ScalarField::Constant(-1.5)),
        )
        .unwrap();
        let err = concentration_map(&spec, &[vec![0.0], vec![2.0]], &p(4.0, 1), 0.1, &MapOptions::default());
        assert!(matches!(err, Err(Error::AssumptionViolated(_))));
    }
}
