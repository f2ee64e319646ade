//! Semiclassical harnesses: `h`-sweeps against the concentration-map
//! infimum, localization diagnostics, the exact homogeneous scaling law and
//! the large-domain reformulation.

use std::sync::Arc;

use serde::Serialize;

use crate::discretize::{assemble_shared, build_grid, Grid, Truncation, WaveFunction};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryCondition, Domain, ExponentP, GeometrySpec, Magnetic, ScalarField};
use crate::minimize::{minimize_quotient, MinimizeOptions, MinimizerResult};
use crate::model1d::lambda_c;
use crate::models::{boundary_constant, interior_constant, ConcentrationMap, ModelOptions, SampleKind};

/// `1 + d/2 − d/p`: `λ(G, h, p) = h^{this}·λ(G, 1, p)` for homogeneous `G`.
pub fn semiclassical_exponent(dim: usize, p: f64) -> f64 {
    let d = dim as f64;
    1.0 + 0.5 * d - d / p
}

/// Default `h`-list `{2^{−k}, k = 2…7}`.
pub fn default_h_list() -> Vec<f64> {
    (2..=7).map(|k| 2f64.powi(-k)).collect()
}

/// Mesh coupling `spacing = min(cap, √h / points_per_length)`.
pub fn sweep_spacing(h: f64, cap: f64, points_per_length: f64) -> f64 {
    cap.min(h.sqrt() / points_per_length)
}

fn check_h_list(h_list: &[f64]) -> Result<()> {
    if h_list.is_empty() {
        return Err(Error::InvalidArgument("empty h-list".into()));
    }
    if h_list.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
        return Err(Error::InvalidArgument("h values must be positive".into()));
    }
    if h_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument("h-list must be strictly decreasing".into()));
    }
    Ok(())
}

/// Options of [`sweep`].
#[derive(Debug, Clone, Serialize)]
pub struct SweepOptions {
    pub spacing_cap: f64,
    pub points_per_length: f64,
    /// Truncation half-width in units of `√h` for unbounded domains.
    pub truncation_lengths: f64,
    pub minimize: MinimizeOptions,
    /// Recompute the target at the best sample with the lattice spacing the
    /// sweep uses in zoomed coordinates (`1/points_per_length`), so that the
    /// gap measures the semiclassical remainder rather than mesh error.
    pub matched_target: bool,
    pub model: ModelOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            spacing_cap: 0.02,
            points_per_length: 15.0,
            truncation_lengths: 10.0,
            minimize: MinimizeOptions {
                restarts: 2,
                ..MinimizeOptions::default()
            },
            matched_target: true,
            model: ModelOptions::default(),
        }
    }
}

/// One row of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub h: f64,
    pub lambda: f64,
    /// `λ / h^{1+d/2−d/p}`.
    pub ratio: f64,
    pub target: f64,
    /// Signed relative gap `ratio/target − 1`.
    pub gap: f64,
    /// `|ψ|^p`-weighted center of the minimizer.
    pub center: Vec<f64>,
    /// `‖ψ‖_{L^p(Ω ∖ M_ε)}`.
    pub mass_outside: Option<f64>,
    pub spacing: f64,
    pub nodes: usize,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// A sweep with its minimizers.
#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Target used for the gaps.
    pub target: f64,
    /// Infimum of the sampled concentration map (default model lattice).
    pub map_inf: f64,
    pub target_point: Vec<f64>,
    pub target_kind: SampleKind,
    #[serde(skip)]
    pub minimizers: Vec<(f64, Arc<Grid>, WaveFunction)>,
}

/// `|ψ|^p`-weighted center of mass.
pub fn localization_center(grid: &Grid, psi: &WaveFunction, p: f64) -> Vec<f64> {
    let mut c = vec![0.0; grid.dim];
    let mut total = 0.0;
    for (n, v) in psi.values.iter().enumerate() {
        if !grid.is_free(n) {
            continue;
        }
        let m = grid.weight[n] * v.norm().powf(p);
        for (ck, xk) in c.iter_mut().zip(grid.coords(n)) {
            *ck += m * xk;
        }
        total += m;
    }
    c.iter_mut().for_each(|v| *v /= total);
    c
}

/// `‖ψ‖_{L^p(Ω ∖ M_ε)}`; `None` when every free node lies in `M_ε`.
pub fn mass_outside(grid: &Grid, psi: &WaveFunction, map: &ConcentrationMap, p: f64) -> Option<f64> {
    let mut any = false;
    let mut s = 0.0;
    for (n, v) in psi.values.iter().enumerate() {
        if !grid.is_free(n) {
            continue;
        }
        let x = grid.coords(n);
        if map.in_m_eps(&x) {
            continue;
        }
        any = true;
        s += grid.weight[n] * v.norm().powf(p);
    }
    any.then(|| s.powf(1.0 / p))
}

/// Model constant at a point, with an optional override of the lattice.
fn model_at(spec: &GeometrySpec, x: &[f64], kind: SampleKind, p: &ExponentP, opts: &ModelOptions) -> Result<f64> {
    let b = spec.magnetic.field_at(x);
    let v = spec.potential.eval(x);
    Ok(match kind {
        SampleKind::Interior => interior_constant(&b, v, p, opts)?.value,
        SampleKind::Boundary => {
            let g = spec.robin_at(x).unwrap_or(f64::INFINITY);
            boundary_constant(&b, v, g, p, opts)?.value
        }
    })
}

/// Grid of the semiclassical problem at `h`.
pub fn sweep_grid(spec: &GeometrySpec, h: f64, opts: &SweepOptions) -> Result<Grid> {
    let spacing = sweep_spacing(h, opts.spacing_cap, opts.points_per_length);
    let truncation = if spec.is_bounded() {
        None
    } else {
        let half = opts.truncation_lengths * h.sqrt();
        Some(match spec.domain {
            Domain::HalfSpace => Truncation::half_space(spec.dim, half),
            _ => Truncation::cube(&spec.center(), half),
        })
    };
    build_grid(spec, spacing, truncation.as_ref())
}

/// Solve `λ(G, h, p)` for each `h` and tabulate against the concentration map.
pub fn sweep(
    spec: &GeometrySpec,
    p: &ExponentP,
    h_list: &[f64],
    map: &ConcentrationMap,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    check_h_list(h_list)?;
    let best = map.best().clone();
    let target = if opts.matched_target && !p.is_linear() {
        let b = spec.magnetic.field_at(&best.x);
        let mu = {
            let t = crate::geometry::tr_plus(&b);
            if t > 0.0 {
                t
            } else {
                spec.potential.eval(&best.x)
            }
        };
        let matched = ModelOptions {
            spacing_per_length: Some(mu.max(1e-300).sqrt() / opts.points_per_length),
            ..opts.model.clone()
        };
        model_at(spec, &best.x, best.kind, p, &matched)?
    } else {
        map.inf_value
    };
    let kappa = semiclassical_exponent(spec.dim, p.value());
    let mut rows = Vec::with_capacity(h_list.len());
    let mut minimizers = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let grid = Arc::new(sweep_grid(spec, h, opts)?);
        let form = assemble_shared(spec, h, grid.clone())?;
        let mopts = MinimizeOptions {
            centers: if opts.minimize.centers.is_empty() {
                let mut c = vec![best.x.clone()];
                for q in map.argmin_points() {
                    if !c.contains(&q) && c.len() < 4 {
                        c.push(q);
                    }
                }
                c
            } else {
                opts.minimize.centers.clone()
            },
            ..opts.minimize.clone()
        };
        let r: MinimizerResult = minimize_quotient(&form, p, &mopts)?;
        let ratio = r.lambda / h.powf(kappa);
        rows.push(SweepRow {
            h,
            lambda: r.lambda,
            ratio,
            target,
            gap: ratio / target - 1.0,
            center: localization_center(&grid, &r.psi, p.value()),
            mass_outside: mass_outside(&grid, &r.psi, map, p.value()),
            spacing: grid.min_spacing(),
            nodes: grid.free_count(),
            iterations: r.iterations,
            residual: r.el_residual,
            converged: r.converged,
        });
        minimizers.push((h, grid, r.psi));
    }
    Ok(SweepResult {
        rows,
        target,
        map_inf: map.inf_value,
        target_point: best.x,
        target_kind: best.kind,
        minimizers,
    })
}

/// Least-squares power-law fit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub r2: f64,
}

fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, intercept, r2)
}

/// Gaps below this are treated as solver noise.
pub const GAP_FLOOR: f64 = 1e-9;

/// Fit `|gap| ≈ C h^a` on `(h, gap)` pairs.
pub fn fit_correction(points: &[(f64, f64)]) -> Result<PowerFit> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(h, g)| *h > 0.0 && g.abs() > GAP_FLOOR)
        .map(|(h, g)| (h.ln(), g.abs().ln()))
        .collect();
    if usable.len() < 4 {
        return Err(Error::DegenerateFit(format!(
            "{} usable rows (need 4 with |gap| > {GAP_FLOOR:e})",
            usable.len()
        )));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = usable.into_iter().unzip();
    let (slope, intercept, r2) = linear_fit(&x, &y);
    Ok(PowerFit {
        exponent: slope,
        prefactor: intercept.exp(),
        r2,
    })
}

/// Localization of one minimizer.
#[derive(Debug, Clone, Serialize)]
pub struct LocalizationRow {
    pub h: f64,
    pub mass_outside: f64,
    /// Exponential decay rate of `|ψ|` away from its center (per unit length).
    pub decay_rate: f64,
}

/// Decay table and fit of `log m(h)` against `−h^{−ρ}`.
#[derive(Debug, Clone, Serialize)]
pub struct LocalizationReport {
    pub rho: f64,
    pub rows: Vec<LocalizationRow>,
    pub slope: f64,
    pub r2: f64,
    pub strictly_decreasing: bool,
}

/// Slope of `log|ψ|` against the distance to the center, over the tail
/// region `2√h < r` where `|ψ| > 1e−10 max|ψ|`.
fn decay_rate(grid: &Grid, psi: &WaveFunction, h: f64, center: &[f64]) -> f64 {
    let max = psi.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (n, v) in psi.values.iter().enumerate() {
        let a = v.norm();
        if !grid.is_free(n) || a <= 1e-10 * max {
            continue;
        }
        let r = grid
            .coords(n)
            .iter()
            .zip(center)
            .map(|(x, c)| (x - c) * (x - c))
            .sum::<f64>()
            .sqrt();
        if r > 2.0 * h.sqrt() {
            xs.push(r);
            ys.push(a.ln());
        }
    }
    if xs.len() < 3 {
        return f64::NAN;
    }
    -linear_fit(&xs, &ys).0
}

/// Localization diagnostics for the minimizers of a sweep.
pub fn localization_report(
    minimizers: &[(f64, Arc<Grid>, WaveFunction)],
    map: &ConcentrationMap,
    p: f64,
    rho: f64,
) -> Result<LocalizationReport> {
    if !(rho > 0.0 && rho < 0.5) {
        return Err(Error::InvalidArgument("ρ must lie in (0, 1/2)".into()));
    }
    let mut rows = Vec::with_capacity(minimizers.len());
    for (h, grid, psi) in minimizers {
        let m = mass_outside(grid, psi, map, p).ok_or(Error::EmptyComplement)?;
        let center = localization_center(grid, psi, p);
        rows.push(LocalizationRow {
            h: *h,
            mass_outside: m,
            decay_rate: decay_rate(grid, psi, *h, &center),
        });
    }
    let strictly_decreasing = rows.windows(2).all(|w| w[1].mass_outside < w[0].mass_outside);
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.mass_outside > 0.0)
        .map(|r| (-r.h.powf(-rho), r.mass_outside.ln()))
        .collect();
    let (slope, r2) = if pts.len() >= 2 {
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        let (s, _, r2) = linear_fit(&x, &y);
        (s, r2)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(LocalizationReport {
        rho,
        rows,
        slope,
        r2,
        strictly_decreasing,
    })
}

/// One row of the homogeneous scaling check.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub h: f64,
    pub lambda: f64,
    /// `λ / h^{1+d/2−d/p}`.
    pub normalized: f64,
    /// Relative deviation from the first row's normalized value.
    pub deviation: f64,
}

fn check_homogeneous(spec: &GeometrySpec) -> Result<()> {
    let bad = |m: &str| {
        Err(Error::InvalidArgument(format!(
            "scaling law needs a homogeneous geometry: {m}"
        )))
    };
    if !matches!(spec.domain, Domain::WholeSpace | Domain::HalfSpace) {
        return bad("domain must be the whole space or the half-space");
    }
    if spec.potential.as_constant().is_none() {
        return bad("V must be constant");
    }
    match &spec.magnetic {
        Magnetic::Zero => {}
        Magnetic::Constant { gauge_origin, .. } if gauge_origin.iter().all(|v| *v == 0.0) => {}
        _ => return bad("A must be the linear potential of a constant field about the origin"),
    }
    if let BoundaryCondition::Robin(g) = &spec.boundary {
        if g.as_constant().is_none() {
            return bad("γ must be constant");
        }
    }
    Ok(())
}

/// `λ(G, h, p)` on grids rescaled by `x = √h·y` from a reference grid with
/// `base_spacing` and `base_truncation` (at `h = 1`).  Initial bumps are
/// placed at the rescaled `opts.centers`.
pub fn scaling_law(
    spec: &GeometrySpec,
    p: &ExponentP,
    h_list: &[f64],
    base_spacing: f64,
    base_truncation: &Truncation,
    opts: &MinimizeOptions,
) -> Result<Vec<ScalingRow>> {
    check_homogeneous(spec)?;
    if h_list.is_empty() {
        return Err(Error::InvalidArgument("empty h-list".into()));
    }
    let kappa = semiclassical_exponent(spec.dim, p.value());
    let mut rows: Vec<ScalingRow> = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let s = h.sqrt();
        let grid = Arc::new(build_grid(spec, base_spacing * s, Some(&base_truncation.scaled(s)))?);
        let form = assemble_shared(spec, h, grid)?;
        let mopts = MinimizeOptions {
            centers: opts.centers.iter().map(|c| c.iter().map(|v| v * s).collect()).collect(),
            init_width: opts.init_width.map(|w| w * s),
            ..opts.clone()
        };
        let r = minimize_quotient(&form, p, &mopts)?;
        let normalized = r.lambda / h.powf(kappa);
        let deviation = rows.first().map_or(0.0, |f| normalized / f.normalized - 1.0);
        rows.push(ScalingRow {
            h,
            lambda: r.lambda,
            normalized,
            deviation,
        });
    }
    Ok(rows)
}

/// Options of [`large_domain`].
#[derive(Debug, Clone, Serialize)]
pub struct LargeDomainOptions {
    pub spacing_cap: f64,
    pub points_per_length: f64,
    pub minimize: MinimizeOptions,
    pub model: ModelOptions,
    /// Also solve directly on `Ω_R` with `h = 1` and the rescaled grid.
    pub direct_check: bool,
}

impl Default for LargeDomainOptions {
    fn default() -> Self {
        Self {
            spacing_cap: 0.02,
            points_per_length: 15.0,
            minimize: MinimizeOptions {
                restarts: 1,
                ..MinimizeOptions::default()
            },
            model: ModelOptions::default(),
            direct_check: false,
        }
    }
}

/// One row of the large-domain table.
#[derive(Debug, Clone, Serialize)]
pub struct LargeDomainRow {
    pub radius: f64,
    pub h: f64,
    /// `λ(Ω, h, p)` with `h = R^{−2}`.
    pub lambda_semiclassical: f64,
    /// `λ^Neu(Ω_R, p) = R^{d+2−2d/p} λ(Ω, R^{−2}, p)`.
    pub lambda_neumann: f64,
    /// Direct solve on `Ω_R` (when requested).
    pub lambda_direct: Option<f64>,
    /// `λ^Neu(ℝ^d_+, p)`.
    pub reference: f64,
    pub ratio: f64,
}

/// The unit domain `Ω` used for the large-domain table: `(−1, 1)` in
/// dimension one and the unit disk in dimension two.
pub fn large_domain_spec(dim: usize, scale: f64) -> Result<GeometrySpec> {
    let domain = match dim {
        1 => Domain::Rectangle {
            lo: vec![-scale],
            hi: vec![scale],
        },
        2 => Domain::Disk {
            center: [0.0, 0.0],
            radius: scale,
        },
        _ => {
            return Err(Error::InvalidArgument(
                "large-domain tables exist in dimensions 1 and 2".into(),
            ))
        }
    };
    GeometrySpec::new(
        dim,
        domain,
        ScalarField::Constant(1.0),
        Magnetic::Zero,
        BoundaryCondition::neumann(),
    )
}

/// `λ^Neu(Ω_R, p)` through the semiclassical reformulation, with ratios to
/// the half-space constant.
pub fn large_domain(
    dim: usize,
    p: &ExponentP,
    radii: &[f64],
    opts: &LargeDomainOptions,
) -> Result<Vec<LargeDomainRow>> {
    if radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidArgument("radii must be positive".into()));
    }
    if p.dim() != dim {
        return Err(Error::InvalidArgument("exponent and dimension differ".into()));
    }
    let reference = if dim == 1 {
        lambda_c(0.0, p.value())?
    } else {
        boundary_constant(&crate::geometry::MagneticMatrix::zero(dim), 1.0, 0.0, p, &opts.model)?.value
    };
    let spec = large_domain_spec(dim, 1.0)?;
    let power = dim as f64 + 2.0 - 2.0 * dim as f64 / p.value();
    let mut rows = Vec::with_capacity(radii.len());
    for &radius in radii {
        let h = radius.powi(-2);
        let spacing = sweep_spacing(h, opts.spacing_cap, opts.points_per_length);
        let mut center = vec![0.0; dim];
        center[0] = 1.0 - h.sqrt();
        let mopts = MinimizeOptions {
            centers: vec![center.clone()],
            ..opts.minimize.clone()
        };
        let grid = Arc::new(build_grid(&spec, spacing, None)?);
        let form = assemble_shared(&spec, h, grid)?;
        let lambda_semiclassical = minimize_quotient(&form, p, &mopts)?.require_converged()?.lambda;
        let lambda_neumann = radius.powf(power) * lambda_semiclassical;
        let lambda_direct = if opts.direct_check {
            let big = large_domain_spec(dim, radius)?;
            let grid = Arc::new(build_grid(&big, spacing * radius, None)?);
            let form = assemble_shared(&big, 1.0, grid)?;
            let dopts = MinimizeOptions {
                centers: vec![center.iter().map(|c| c * radius).collect()],
                init_width: Some(h.sqrt() * radius),
                ..opts.minimize.clone()
            };
            Some(minimize_quotient(&form, p, &dopts)?.require_converged()?.lambda)
        } else {
            None
        };
        rows.push(LargeDomainRow {
            radius,
            h,
            lambda_semiclassical,
            lambda_neumann,
            lambda_direct,
            reference,
            ratio: lambda_neumann / reference,
        });
    }
    Ok(rows)
}
