//! Shrinking planar waveguides `Σ_h = {Γ(s) + h t a(s) n(s)}`.
//!
//! After the change of function `φ = a^{1/p} ψ∘Φ_h`, the Dirichlet quotient
//! on `Σ_h` is, up to factors `1 ± Ch`, `h^{−1−2/p}` times the reduced quotient
//! `∫ h² a^{1−2/p}|∂_sφ|² + a^{−1−2/p}|∂_tφ|²  /  ‖φ‖²_{L^p(Σ)}` on the straight
//! strip `Σ = ℝ × (−1, 1)`.  The reduced problem is solved in the stretched
//! variable `σ = (s − s_max)/(h a_max)`, where it becomes `h`-independent for
//! a constant profile.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::discretize::{build_grid, AssembledForm, Grid, Link, Truncation, WaveFunction};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryCondition, Domain, ExponentP, GeometrySpec, Magnetic, ScalarField};
use crate::minimize::{minimize_quotient, MinimizeOptions, MinimizerResult};

/// Variable height `a(s)` of the tube.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WidthProfile {
    Constant {
        value: f64,
    },
    /// `1 + A exp(−(s − s₀)²/w²)`.
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// `1 + A (1 + cos(π(s − s₀)/w))/2` on `|s − s₀| < w`, and 1 elsewhere.
    Cosine {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// Piecewise-linear interpolation, constant beyond the ends.
    Table {
        s: Vec<f64>,
        a: Vec<f64>,
    },
}

impl WidthProfile {
    /// The default raised-cosine bump `A = 1, s₀ = 0, w = 1`.
    pub fn default_cosine() -> Self {
        WidthProfile::Cosine {
            amplitude: 1.0,
            center: 0.0,
            width: 1.0,
        }
    }

    /// Parse `constant:c`, `gaussian:A,s0,w`, `cosine[:A,s0,w]` or
    /// `table:file.csv` (two columns `s,a`, optional header).
    pub fn parse(text: &str) -> Result<Self> {
        let (kind, args) = text.split_once(':').unwrap_or((text, ""));
        let numbers = || -> Result<Vec<f64>> {
            args.split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidProfile(format!("`{t}` is not a number")))
                })
                .collect()
        };
        let profile = match kind {
            "constant" => match numbers()?.as_slice() {
                [value] => WidthProfile::Constant { value: *value },
                _ => return Err(Error::InvalidProfile("constant takes one value".into())),
            },
            "gaussian" => match numbers()?.as_slice() {
                [amplitude, center, width] => WidthProfile::Gaussian {
                    amplitude: *amplitude,
                    center: *center,
                    width: *width,
                },
                _ => return Err(Error::InvalidProfile("gaussian takes A,s0,w".into())),
            },
            "cosine" => match numbers()?.as_slice() {
                [] => Self::default_cosine(),
                [amplitude, center, width] => WidthProfile::Cosine {
                    amplitude: *amplitude,
                    center: *center,
                    width: *width,
                },
                _ => return Err(Error::InvalidProfile("cosine takes A,s0,w".into())),
            },
            "table" => Self::from_csv(Path::new(args))?,
            other => return Err(Error::InvalidProfile(format!("unknown profile kind `{other}`"))),
        };
        profile.validate()?;
        Ok(profile)
    }

    /// Read a two-column `s,a` table.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)?;
        let (mut s, mut a) = (Vec::new(), Vec::new());
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            let parsed: Vec<Option<f64>> = record.iter().map(|f| f.parse().ok()).collect();
            match parsed.as_slice() {
                [Some(x), Some(y)] => {
                    s.push(*x);
                    a.push(*y);
                }
                [None, None] if row == 0 => {} // header
                _ => {
                    return Err(Error::InvalidProfile(format!(
                        "{}: row {} is not a pair of numbers",
                        path.display(),
                        row + 1
                    )))
                }
            }
        }
        let table = WidthProfile::Table { s, a };
        table.validate()?;
        Ok(table)
    }

    /// Check positivity and that the maximum is attained at a finite point.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidProfile(m));
        match self {
            WidthProfile::Constant { value } => {
                if !(*value > 0.0 && value.is_finite()) {
                    return bad(format!("height must be positive, got {value}"));
                }
            }
            WidthProfile::Gaussian { amplitude, width, .. } | WidthProfile::Cosine { amplitude, width, .. } => {
                if !(*width > 0.0) {
                    return bad(format!("bump width must be positive, got {width}"));
                }
                if !(*amplitude >= 0.0 && amplitude.is_finite()) {
                    return bad(format!(
                        "amplitude {amplitude}: the maximum must be attained at a finite point (need A ≥ 0)"
                    ));
                }
            }
            WidthProfile::Table { s, a } => {
                if s.len() < 2 || s.len() != a.len() {
                    return bad("a table needs at least two (s, a) rows".into());
                }
                if s.windows(2).any(|w| !(w[1] > w[0])) {
                    return bad("table abscissae must be strictly increasing".into());
                }
                if a.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                    return bad("table heights must be positive".into());
                }
                let max = a.iter().cloned().fold(f64::MIN, f64::max);
                let ends = a[0].max(a[a.len() - 1]);
                let constant = a.iter().all(|v| *v == a[0]);
                if !constant && ends >= max {
                    return bad("the maximum of the table is attained at infinity".into());
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            WidthProfile::Constant { value } => *value,
            WidthProfile::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let u = (s - center) / width;
                1.0 + amplitude * (-u * u).exp()
            }
            WidthProfile::Cosine {
                amplitude,
                center,
                width,
            } => {
                let u = (s - center) / width;
                if u.abs() < 1.0 {
                    1.0 + amplitude * 0.5 * (1.0 + (std::f64::consts::PI * u).cos())
                } else {
                    1.0
                }
            }
            WidthProfile::Table { s: xs, a } => {
                if s <= xs[0] {
                    return a[0];
                }
                if s >= xs[xs.len() - 1] {
                    return a[a.len() - 1];
                }
                let k = xs.partition_point(|x| *x <= s) - 1;
                let t = (s - xs[k]) / (xs[k + 1] - xs[k]);
                a[k] + t * (a[k + 1] - a[k])
            }
        }
    }

    /// `a'(s)` (one-sided slope at table knots).
    pub fn derivative(&self, s: f64) -> f64 {
        match self {
            WidthProfile::Constant { .. } => 0.0,
            WidthProfile::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let u = (s - center) / width;
                -2.0 * amplitude * u / width * (-u * u).exp()
            }
            WidthProfile::Cosine {
                amplitude,
                center,
                width,
            } => {
                let u = (s - center) / width;
                if u.abs() < 1.0 {
                    let pi = std::f64::consts::PI;
                    -amplitude * 0.5 * pi / width * (pi * u).sin()
                } else {
                    0.0
                }
            }
            WidthProfile::Table { s: xs, a } => {
                if s < xs[0] || s >= xs[xs.len() - 1] {
                    return 0.0;
                }
                let k = xs.partition_point(|x| *x <= s) - 1;
                (a[k + 1] - a[k]) / (xs[k + 1] - xs[k])
            }
        }
    }

    /// `(s_max, a_max)`.
    pub fn maximum(&self) -> (f64, f64) {
        match self {
            WidthProfile::Constant { value } => (0.0, *value),
            WidthProfile::Gaussian { amplitude, center, .. } | WidthProfile::Cosine { amplitude, center, .. } => {
                (*center, 1.0 + amplitude)
            }
            WidthProfile::Table { s, a } => {
                let k = (0..a.len()).fold(0, |best, i| if a[i] > a[best] { i } else { best });
                (s[k], a[k])
            }
        }
    }

    /// Half-width of the bump around its maximum (`None` when flat).
    pub fn bump_width(&self) -> Option<f64> {
        match self {
            WidthProfile::Constant { .. } => None,
            WidthProfile::Gaussian { amplitude, width, .. } | WidthProfile::Cosine { amplitude, width, .. } => {
                (*amplitude > 0.0).then_some(*width)
            }
            WidthProfile::Table { s, a } => {
                let (s0, top) = self.maximum();
                let bottom = a.iter().cloned().fold(f64::MAX, f64::min);
                if top == bottom {
                    return None;
                }
                let mid = 0.5 * (top + bottom);
                // Furthest knot-interpolated crossing of the mid level on either side.
                let mut reach: f64 = 0.0;
                for w in s.windows(2).zip(a.windows(2)) {
                    let ((x0, x1), (y0, y1)) = ((w.0[0], w.0[1]), (w.1[0], w.1[1]));
                    if (y0 - mid) * (y1 - mid) <= 0.0 && y0 != y1 {
                        let x = x0 + (mid - y0) / (y1 - y0) * (x1 - x0);
                        reach = reach.max((x - s0).abs());
                    }
                }
                Some(if reach > 0.0 {
                    reach
                } else {
                    0.5 * (s[s.len() - 1] - s[0])
                })
            }
        }
    }
}

/// Discretization and solver options.
#[derive(Debug, Clone, Serialize)]
pub struct WaveguideOptions {
    /// Lattice spacing in the stretched variables `(σ, t)`.
    pub spacing: f64,
    /// Truncation of the straight reference grows from this half-length.
    pub initial_truncation: f64,
    /// Relative change under doubling accepted as converged.
    pub stability: f64,
    pub max_doublings: usize,
    /// s-window: this many bump half-widths on each side of the maximum.
    pub window_widths: f64,
    /// Radius of the neighbourhood of the maximum used for localization.
    pub epsilon: Option<f64>,
    pub minimize: MinimizeOptions,
}

impl Default for WaveguideOptions {
    fn default() -> Self {
        Self {
            spacing: 0.1,
            initial_truncation: 8.0,
            stability: 2e-3,
            max_doublings: 6,
            window_widths: 8.0,
            epsilon: None,
            minimize: MinimizeOptions {
                restarts: 1,
                grad_tol: 1e-7,
                ..MinimizeOptions::default()
            },
        }
    }
}

/// Reduced waveguide problem on the stretched strip.
#[derive(Debug, Clone)]
pub struct WaveguideForm {
    pub form: AssembledForm,
    pub profile: WidthProfile,
    pub h: f64,
    pub s_max: f64,
    pub a_max: f64,
}

impl WaveguideForm {
    /// `s` of the stretched abscissa `σ`.
    pub fn s_of(&self, sigma: f64) -> f64 {
        self.s_max + self.h * self.a_max * sigma
    }
}

fn strip_grid(half_length: f64, spacing: f64) -> Result<Grid> {
    let spec = GeometrySpec::new(
        2,
        Domain::Strip { half_width: 1.0 },
        ScalarField::Constant(0.0),
        Magnetic::Zero,
        BoundaryCondition::Dirichlet,
    )?;
    let trunc = Truncation {
        lo: vec![-half_length, -1.0],
        hi: vec![half_length, 1.0],
    };
    build_grid(&spec, spacing, Some(&trunc))
}

/// Assemble `Q_{Σ,a,h}` in the variables `(σ, t)`:
/// `h a_max ∫ a^{1−2/p} a_max^{−2} |∂_σφ|² + a^{−1−2/p} |∂_tφ|²`, Dirichlet on
/// `t = ±1` and at `σ = ±half_length`.  The `L^p` norms of the returned form
/// are taken in `dσ dt`; [`reduced_lambda`] restores the `ds dt` scaling.
pub fn assemble_waveguide_form(
    profile: &WidthProfile,
    h: f64,
    p: f64,
    half_length: f64,
    spacing: f64,
) -> Result<WaveguideForm> {
    profile.validate()?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("h must be positive, got {h}")));
    }
    if !(p >= 2.0) {
        return Err(Error::InvalidArgument(format!("need p ≥ 2, got {p}")));
    }
    let grid = Arc::new(strip_grid(half_length, spacing)?);
    let (s_max, a_max) = profile.maximum();
    let wf_s = |sigma: f64| s_max + h * a_max * sigma;
    let scale = h * a_max;
    let n = grid.len();
    let mut kinetic_diag = vec![0.0; n];
    let mut links = Vec::with_capacity(grid.edges.len());
    for e in &grid.edges {
        let s = grid.spacing[e.axis];
        let (xa, xb) = (grid.coords(e.a), grid.coords(e.b));
        let a = profile.eval(wf_s(0.5 * (xa[0] + xb[0])));
        let coefficient = if e.axis == 0 {
            a.powf(1.0 - 2.0 / p) / (a_max * a_max)
        } else {
            a.powf(-1.0 - 2.0 / p)
        };
        let coupling = scale * coefficient * e.weight / (s * s);
        match (grid.is_free(e.a), grid.is_free(e.b)) {
            (true, true) => links.push(Link {
                a: e.a,
                b: e.b,
                coupling,
                phase: 0.0,
                factor: Complex64::new(1.0, 0.0),
            }),
            (true, false) => kinetic_diag[e.a] += coupling,
            (false, true) => kinetic_diag[e.b] += coupling,
            _ => {}
        }
    }
    Ok(WaveguideForm {
        form: AssembledForm {
            h: 1.0,
            grid,
            links,
            kinetic_diag,
            potential_diag: vec![0.0; n],
            real: true,
        },
        profile: profile.clone(),
        h,
        s_max,
        a_max,
    })
}

/// Reduced constant in `(s, t)` from the stretched-variable minimum:
/// `‖φ‖²_{L^p(ds dt)} = (h a_max)^{2/p} ‖φ‖²_{L^p(dσ dt)}`.
pub fn reduced_lambda(stretched: f64, h: f64, a_max: f64, p: f64) -> f64 {
    stretched * (h * a_max).powf(-2.0 / p)
}

/// `h^{1−2/p} a_max^{−4/p} λ^Dir(Σ, p)`: the reduced constant of the
/// frozen profile `a ≡ a_max`.
pub fn frozen_prediction(h: f64, a_max: f64, p: f64, reference: f64) -> f64 {
    h.powf(1.0 - 2.0 / p) * a_max.powf(-4.0 / p) * reference
}

fn solve(form: &AssembledForm, p: f64, opts: &MinimizeOptions) -> Result<MinimizerResult> {
    let exponent = ExponentP::new(p, 2)?;
    let mopts = MinimizeOptions {
        centers: if opts.centers.is_empty() {
            vec![vec![0.0, 0.0]]
        } else {
            opts.centers.clone()
        },
        ..opts.clone()
    };
    minimize_quotient(form, &exponent, &mopts)
}

/// `λ^Dir(Σ, p)` on the lattice of spacing `opts.spacing`.
#[derive(Debug, Clone, Serialize)]
pub struct StraightReference {
    pub p: f64,
    pub value: f64,
    pub truncation: f64,
    pub spacing: f64,
    /// `(half-length, value)` for each truncation tried.
    pub history: Vec<(f64, f64)>,
    /// `max |φ(σ,t) − φ(σ,−t)| / max |φ|` of the final minimizer.
    pub evenness_defect: f64,
    pub converged: bool,
    pub residual: f64,
}

/// Reflection defect `max |φ(σ,t)| − |φ(σ,−t)|` relative to `max |φ|`.
pub fn evenness_defect(grid: &Grid, psi: &WaveFunction) -> f64 {
    let (nx, ny) = (grid.shape[0], grid.shape[1]);
    let max = psi.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut defect: f64 = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            let a = psi.values[grid.index(i, j)].norm();
            let b = psi.values[grid.index(i, ny - 1 - j)].norm();
            defect = defect.max((a - b).abs());
        }
    }
    defect / max
}

/// Minimize on the straight strip with Dirichlet everywhere, doubling the
/// truncation until two successive values agree to `opts.stability`.
pub fn straight_reference(p: f64, opts: &WaveguideOptions) -> Result<StraightReference> {
    let profile = WidthProfile::Constant { value: 1.0 };
    let mut history = Vec::new();
    let mut half = opts.initial_truncation;
    let mut last: Option<(f64, MinimizerResult, Arc<Grid>)> = None;
    for _ in 0..=opts.max_doublings {
        let wg = assemble_waveguide_form(&profile, 1.0, p, half, opts.spacing)?;
        let r = solve(&wg.form, p, &opts.minimize)?;
        history.push((half, r.lambda));
        if let Some((prev, _, _)) = &last {
            if (r.lambda / prev - 1.0).abs() < opts.stability {
                return Ok(StraightReference {
                    p,
                    value: r.lambda,
                    truncation: half,
                    spacing: opts.spacing,
                    evenness_defect: evenness_defect(&wg.form.grid, &r.psi),
                    converged: r.converged,
                    residual: r.el_residual,
                    history,
                });
            }
        }
        last = Some((r.lambda, r, wg.form.grid.clone()));
        half *= 2.0;
    }
    let (best, r, _) = last.expect("at least one truncation is tried");
    Err(Error::NoConvergence {
        iterations: r.iterations,
        best,
        residual: r.el_residual,
    })
}

/// Cell-based quotients of one state: the physical Dirichlet quotient on
/// `Σ_h` (straight axis, exact pulled-back metric) and the reduced quotient
/// of `φ`, with `ratio = physical / (h^{−1−2/p} reduced)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuotientComparison {
    pub physical: f64,
    pub reduced: f64,
    pub ratio: f64,
}

/// Compare the tube quotient of `ψ = a^{−1/p} φ∘Φ_h^{−1}` with the reduced
/// quotient of `φ`, both integrated with the same bilinear cell rule.
pub fn compare_quotients(wg: &WaveguideForm, psi: &WaveFunction, p: f64) -> QuotientComparison {
    let grid = &wg.form.grid;
    let (h, a_max) = (wg.h, wg.a_max);
    let scale = h * a_max; // ds = scale dσ
    let (dsig, dt) = (grid.spacing[0], grid.spacing[1]);
    let phi = &psi.values;
    let a_node: Vec<f64> = (0..grid.len())
        .map(|n| wg.profile.eval(wg.s_of(grid.coords(n)[0])))
        .collect();
    let tilde: Vec<Complex64> = phi.iter().zip(&a_node).map(|(v, a)| v * a.powf(-1.0 / p)).collect();
    let (mut e_phys, mut e_red) = (0.0, 0.0);
    for j in 0..grid.shape[1] - 1 {
        for i in 0..grid.shape[0] - 1 {
            let c = [
                grid.index(i, j),
                grid.index(i + 1, j),
                grid.index(i, j + 1),
                grid.index(i + 1, j + 1),
            ];
            let x = grid.coords(c[0]);
            let (sigma, t) = (x[0] + 0.5 * dsig, x[1] + 0.5 * dt);
            let s = wg.s_of(sigma);
            let (a, da) = (wg.profile.eval(s), wg.profile.derivative(s));
            let grad = |f: &[Complex64]| {
                let ds = ((f[c[1]] - f[c[0]]) + (f[c[3]] - f[c[2]])) / (2.0 * dsig * scale);
                let dtt = ((f[c[2]] - f[c[0]]) + (f[c[3]] - f[c[1]])) / (2.0 * dt);
                (ds, dtt)
            };
            let area = dsig * scale * dt;
            let (ps, pt) = grad(phi);
            e_red += area * (h * h * a.powf(1.0 - 2.0 / p) * ps.norm_sqr() + a.powf(-1.0 - 2.0 / p) * pt.norm_sqr());
            let (qs, qt) = grad(&tilde);
            let cross = (qs * qt.conj()).re;
            let density = qs.norm_sqr() - 2.0 * t * da / a * cross
                + (1.0 + h * h * da * da * t * t) / (h * h * a * a) * qt.norm_sqr();
            e_phys += area * h * a * density;
        }
    }
    let (mut n_phys, mut n_red) = (0.0, 0.0);
    for n in 0..grid.len() {
        let w = grid.weight[n] * scale;
        n_red += w * phi[n].norm().powf(p);
        n_phys += w * h * a_node[n] * tilde[n].norm().powf(p);
    }
    let physical = e_phys / n_phys.powf(2.0 / p);
    let reduced = e_red / n_red.powf(2.0 / p);
    QuotientComparison {
        physical,
        reduced,
        ratio: physical / (h.powf(-1.0 - 2.0 / p) * reduced),
    }
}

/// One `h` of the waveguide sweep.
#[derive(Debug, Clone, Serialize)]
pub struct WaveguideRow {
    pub h: f64,
    /// Minimum of the reduced quotient in `(s, t)`.
    pub lambda_reduced: f64,
    /// `h^{1−2/p} a_max^{−4/p} λ^Dir(Σ, p)`.
    pub prediction: f64,
    pub ratio: f64,
    /// `λ^Dir(Σ_h, p) ≈ h^{−1−2/p} λ_reduced`.
    pub lambda_tube: f64,
    /// `‖φ‖_{L^p(|s−s_max|>ε)} / ‖φ‖_{L^p}`.
    pub mass_outside: f64,
    /// Share of `∫|φ|^p` within `ε` of the maximum.
    pub mass_near: f64,
    /// Tube quotient over `h^{−1−2/p}` times the reduced quotient, at the minimizer.
    pub physical_ratio: f64,
    pub window: f64,
    pub nodes: usize,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Result of [`waveguide_sweep`].
#[derive(Debug, Clone, Serialize)]
pub struct WaveguideSweep {
    pub profile: WidthProfile,
    pub p: f64,
    pub s_max: f64,
    pub a_max: f64,
    pub epsilon: f64,
    pub reference: StraightReference,
    pub rows: Vec<WaveguideRow>,
    pub options: WaveguideOptions,
}

/// Localization of `|φ|^p` around `s_max`: `(mass_outside, mass_near)`.
fn localization(wg: &WaveguideForm, psi: &WaveFunction, p: f64, epsilon: f64) -> (f64, f64) {
    let grid = &wg.form.grid;
    let (mut inside, mut outside) = (0.0, 0.0);
    for (n, v) in psi.values.iter().enumerate() {
        let m = grid.weight[n] * v.norm().powf(p);
        if (wg.s_of(grid.coords(n)[0]) - wg.s_max).abs() <= epsilon {
            inside += m;
        } else {
            outside += m;
        }
    }
    let total = inside + outside;
    ((outside / total).powf(1.0 / p), inside / total)
}

/// Solve the reduced problem for each `h` and compare with the frozen
/// prediction built from the matched straight reference.
pub fn waveguide_sweep(
    profile: &WidthProfile,
    p: f64,
    h_list: &[f64],
    opts: &WaveguideOptions,
) -> Result<WaveguideSweep> {
    profile.validate()?;
    if h_list.is_empty() || h_list.iter().any(|h| !(*h > 0.0)) {
        return Err(Error::InvalidArgument("h-list must be nonempty and positive".into()));
    }
    if h_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument("h-list must be strictly decreasing".into()));
    }
    let reference = straight_reference(p, opts)?;
    let (s_max, a_max) = profile.maximum();
    let bump = profile.bump_width();
    let epsilon = opts.epsilon.unwrap_or_else(|| 0.5 * bump.unwrap_or(1.0));
    let mut rows = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let window = match bump {
            Some(w) => (opts.window_widths * w / (h * a_max)).max(reference.truncation),
            None => reference.truncation,
        };
        let wg = assemble_waveguide_form(profile, h, p, window, opts.spacing)?;
        let r = solve(&wg.form, p, &opts.minimize)?;
        let lambda_reduced = reduced_lambda(r.lambda, h, a_max, p);
        let prediction = frozen_prediction(h, a_max, p, reduced_lambda(reference.value, 1.0, 1.0, p));
        let (mass_outside, mass_near) = localization(&wg, &r.psi, p, epsilon);
        rows.push(WaveguideRow {
            h,
            lambda_reduced,
            prediction,
            ratio: lambda_reduced / prediction,
            lambda_tube: h.powf(-1.0 - 2.0 / p) * lambda_reduced,
            mass_outside,
            mass_near,
            physical_ratio: compare_quotients(&wg, &r.psi, p).ratio,
            window,
            nodes: wg.form.grid.free_count(),
            iterations: r.iterations,
            residual: r.el_residual,
            converged: r.converged,
        });
    }
    Ok(WaveguideSweep {
        profile: profile.clone(),
        p,
        s_max,
        a_max,
        epsilon,
        reference,
        rows,
        options: opts.clone(),
    })
}
