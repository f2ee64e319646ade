//! Minimization of the discrete Sobolev quotient `Q(ψ)/‖ψ‖_p²`.
//!
//! At `p = 2` the minimum is the lowest eigenvalue of the weighted operator
//! `L = W⁻¹M` and is computed with a tridiagonal solver (one dimension) or
//! LOBPCG.  For `p > 2` (and optionally at `p = 2`) a projected gradient flow
//! with (short) Barzilai–Borwein steps, monotone backtracking and `L^p`
//! renormalization is run from several initializations.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::discretize::{AssembledForm, WaveFunction};
use crate::error::{Error, Result};
use crate::geometry::ExponentP;
use crate::linalg::{lobpcg_lowest, tridiag_lowest};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative slack allowed when enforcing a non-increasing quotient.
pub const MONOTONE_SLACK: f64 = 1e-14;

/// Restart values closer than this (relative) are considered tied.
pub const TIE_TOLERANCE: f64 = 1e-10;

/// Solver selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Eigensolver at `p = 2`, gradient flow otherwise.
    #[default]
    Auto,
    /// Always use the projected gradient flow.
    GradientFlow,
    /// Eigensolver; only valid at `p = 2`.
    Eigen,
}

/// Options of [`minimize_quotient`].
#[derive(Debug, Clone, Serialize)]
pub struct MinimizeOptions {
    pub max_iters: usize,
    /// Tolerance on the relative Euler–Lagrange residual.
    pub grad_tol: f64,
    /// Number of random initializations.
    pub restarts: usize,
    pub seed: u64,
    /// Candidate localization centers; one Gaussian bump is started at each.
    /// Empty means the centroid of the free nodes.
    pub centers: Vec<Vec<f64>>,
    /// Width of the initial bumps; defaults to `√h`.
    pub init_width: Option<f64>,
    pub method: Method,
    /// Extra user-supplied initializations.
    #[serde(skip)]
    pub initial_guesses: Vec<WaveFunction>,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            grad_tol: 1e-8,
            restarts: 5,
            seed: 0,
            centers: Vec::new(),
            init_width: None,
            method: Method::Auto,
            initial_guesses: Vec::new(),
        }
    }
}

impl MinimizeOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) {
            return Err(Error::InvalidArgument("grad_tol must be positive".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be at least 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be positive".into()));
        }
        if let Some(w) = self.init_width {
            if !(w > 0.0) {
                return Err(Error::InvalidArgument("init_width must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Outcome of a minimization.
#[derive(Debug, Clone, Serialize)]
pub struct MinimizerResult {
    /// The minimal quotient found.
    pub lambda: f64,
    /// `L^p`-normalized minimizer.
    #[serde(skip)]
    pub psi: WaveFunction,
    pub iterations: usize,
    /// Relative Euler–Lagrange residual, see [`el_residual`].
    pub el_residual: f64,
    /// Final quotient of every run, in initialization order.
    pub restart_values: Vec<f64>,
    pub converged: bool,
    pub method: Method,
}

impl MinimizerResult {
    /// Turn a non-converged result into [`Error::NoConvergence`].
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NoConvergence {
                iterations: self.iterations,
                best: self.lambda,
                residual: self.el_residual,
            })
        }
    }

    /// Relative spread `(max − min)/min` of the restart values.
    pub fn restart_spread(&self) -> f64 {
        let lo = self.restart_values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.restart_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (hi - lo) / lo.abs()
    }
}

/// Free-node bookkeeping shared by all kernels.
struct Workspace<'a> {
    form: &'a AssembledForm,
    free: Vec<usize>,
    p: f64,
}

impl<'a> Workspace<'a> {
    fn new(form: &'a AssembledForm, p: f64) -> Self {
        let free = (0..form.len()).filter(|&i| form.grid.is_free(i)).collect();
        Self { form, free, p }
    }

    fn w(&self, i: usize) -> f64 {
        self.form.grid.weight[i]
    }

    /// `Σ w |ψ|^p`.
    fn lp_sum(&self, psi: &[Complex64]) -> f64 {
        self.free
            .iter()
            .map(|&i| self.w(i) * abs_pow(psi[i].norm_sqr(), self.p))
            .sum()
    }

    fn lp_norm(&self, psi: &[Complex64]) -> f64 {
        self.lp_sum(psi).powf(1.0 / self.p)
    }

    /// `Re⟨a, b⟩_W`.
    #[cfg(test)]
    fn pair(&self, a: &[Complex64], b: &[Complex64]) -> f64 {
        self.free.iter().map(|&i| self.w(i) * (a[i].conj() * b[i]).re).sum()
    }

    fn energy(&self, psi: &[Complex64], mpsi: &[Complex64]) -> f64 {
        self.free.iter().map(|&i| (psi[i].conj() * mpsi[i]).re).sum()
    }

    /// `W⁻¹Mψ − μ|ψ|^{p−2}ψ` into `out`, returning `(‖out‖_W, ‖W⁻¹Mψ‖_W)`.
    fn residual_into(&self, psi: &[Complex64], mpsi: &[Complex64], mu: f64, out: &mut [Complex64]) -> (f64, f64) {
        let (mut rr, mut ll) = (0.0, 0.0);
        for &i in &self.free {
            let w = self.w(i);
            let l = mpsi[i] / w;
            let r = l - psi[i] * (mu * abs_pow(psi[i].norm_sqr(), self.p - 2.0));
            out[i] = r;
            rr += w * r.norm_sqr();
            ll += w * l.norm_sqr();
        }
        (rr.sqrt(), ll.sqrt())
    }
}

/// `|z|^q` from `|z|²`.
#[inline]
fn abs_pow(z2: f64, q: f64) -> f64 {
    if q == 2.0 {
        z2
    } else if q == 4.0 {
        z2 * z2
    } else if q == 0.0 {
        1.0
    } else {
        z2.powf(0.5 * q)
    }
}

fn check_len(form: &AssembledForm, psi: &WaveFunction) -> Result<()> {
    if psi.len() != form.len() {
        return Err(Error::InvalidArgument("wave function does not match the grid".into()));
    }
    Ok(())
}

/// Gradient of the quotient with respect to the `W`-weighted real pairing
/// `⟨a, b⟩ = Re Σ w ā b`:
/// `g = (2/‖ψ‖_p²)(Lψ − R ‖ψ‖_p^{2−p} |ψ|^{p−2} ψ)` with `L = W⁻¹M`.
pub fn quotient_gradient(form: &AssembledForm, psi: &WaveFunction, p: &ExponentP) -> Result<WaveFunction> {
    check_len(form, psi)?;
    let ws = Workspace::new(form, p.value());
    let n = ws.lp_norm(&psi.values);
    if !(n >= 1e-300) {
        return Err(Error::ZeroFunction { norm: n });
    }
    let mut m = vec![ZERO; form.len()];
    form.apply(&psi.values, &mut m);
    let r = ws.energy(&psi.values, &m) / (n * n);
    let mu = r * n.powf(2.0 - p.value());
    let mut g = vec![ZERO; form.len()];
    ws.residual_into(&psi.values, &m, mu, &mut g);
    let s = 2.0 / (n * n);
    g.iter_mut().for_each(|v| *v *= s);
    Ok(WaveFunction { values: g })
}

/// Relative Euler–Lagrange residual
/// `‖Lψ − λ‖ψ‖_p^{2−p}|ψ|^{p−2}ψ‖_W / ‖Lψ‖_W`; the Robin condition is built
/// into `L` weakly through the boundary mass.
pub fn el_residual(form: &AssembledForm, lambda: f64, psi: &WaveFunction, p: &ExponentP) -> f64 {
    let ws = Workspace::new(form, p.value());
    let n = ws.lp_norm(&psi.values);
    let mut m = vec![ZERO; form.len()];
    form.apply(&psi.values, &mut m);
    let mut r = vec![ZERO; form.len()];
    let (rn, ln) = ws.residual_into(&psi.values, &m, lambda * n.powf(2.0 - p.value()), &mut r);
    if ln == 0.0 {
        rn
    } else {
        rn / ln
    }
}

/// Outcome of one gradient-flow run.
#[derive(Debug, Clone)]
pub struct FlowRun {
    pub lambda: f64,
    pub psi: WaveFunction,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    /// Quotient after every accepted step (starting with the initial value).
    pub history: Vec<f64>,
}

/// Projected gradient flow from `init`.
pub fn gradient_flow(
    form: &AssembledForm,
    p: &ExponentP,
    init: &WaveFunction,
    max_iters: usize,
    tol: f64,
) -> Result<FlowRun> {
    check_len(form, init)?;
    let ws = Workspace::new(form, p.value());
    let len = form.len();
    let mut psi = init.values.clone();
    for (i, v) in psi.iter_mut().enumerate() {
        if !form.grid.is_free(i) {
            *v = ZERO;
        }
    }
    let n0 = ws.lp_norm(&psi);
    if !(n0 >= 1e-300) || !n0.is_finite() {
        return Err(Error::ZeroFunction { norm: n0 });
    }
    psi.iter_mut().for_each(|v| *v /= n0);

    let mut m = vec![ZERO; len];
    form.apply(&psi, &mut m);
    let mut lambda = ws.energy(&psi, &m);
    let mut g = vec![ZERO; len];
    let (mut rn, mut ln) = ws.residual_into(&psi, &m, lambda, &mut g);
    g.iter_mut().for_each(|v| *v *= 2.0);

    let bound = form.spectral_bound().max(1e-300);
    let tau0 = 1.0 / (2.0 * bound);
    let mut tau = tau0;
    let mut history = vec![lambda];

    let mut trial = vec![ZERO; len];
    let mut trial_m = vec![ZERO; len];
    let mut trial_g = vec![ZERO; len];
    let mut iterations = 0;
    let mut converged = false;
    let mut stalled = 0usize;
    for it in 0..max_iters {
        iterations = it;
        let rel = if ln > 0.0 { rn / ln } else { rn };
        if rel <= tol {
            converged = true;
            break;
        }
        // Backtracking on a trial step.
        let mut accepted = false;
        let mut t = tau;
        let mut trial_lambda = lambda;
        for _ in 0..60 {
            for &i in &ws.free {
                trial[i] = psi[i] - g[i] * t;
            }
            let nt = ws.lp_norm(&trial);
            if nt.is_finite() && nt > 0.0 {
                for &i in &ws.free {
                    trial[i] /= nt;
                }
                form.apply(&trial, &mut trial_m);
                trial_lambda = ws.energy(&trial, &trial_m);
                if trial_lambda <= lambda + MONOTONE_SLACK * lambda.abs() {
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            stalled += 1;
            tau = tau0;
            if stalled > 3 {
                break;
            }
            continue;
        }
        stalled = 0;
        let (trn, tln) = ws.residual_into(&trial, &trial_m, trial_lambda, &mut trial_g);
        trial_g.iter_mut().for_each(|v| *v *= 2.0);
        // Barzilai–Borwein step from the accepted pair.
        let (mut sy, mut yy) = (0.0, 0.0);
        for &i in &ws.free {
            let w = ws.w(i);
            let s = trial[i] - psi[i];
            let y = trial_g[i] - g[i];
            sy += w * (s.conj() * y).re;
            yy += w * y.norm_sqr();
        }
        // The short (second) Barzilai–Borwein step: far fewer rejected
        // trials than the long step on stiff lattices.
        tau = if sy > 0.0 && yy > 0.0 { sy / yy } else { 2.0 * t };
        tau = tau.clamp(tau0 * 1e-3, tau0 * 1e8);
        std::mem::swap(&mut psi, &mut trial);
        std::mem::swap(&mut m, &mut trial_m);
        std::mem::swap(&mut g, &mut trial_g);
        lambda = trial_lambda;
        rn = trn;
        ln = tln;
        history.push(lambda);
        iterations = it + 1;
    }
    let residual = if ln > 0.0 { rn / ln } else { rn };
    if residual <= tol {
        converged = true;
    }
    Ok(FlowRun {
        lambda,
        psi: WaveFunction { values: psi },
        iterations,
        residual,
        converged,
        history,
    })
}

/// Lowest eigenpair of `L = W⁻¹M` (the `p = 2` constant).
pub fn ground_state(form: &AssembledForm, opts: &MinimizeOptions) -> Result<MinimizerResult> {
    opts.validate()?;
    let ws = Workspace::new(form, 2.0);
    if ws.free.is_empty() {
        return Err(Error::InvalidArgument("no free nodes".into()));
    }
    let p2 = ExponentP::new(2.0, form.grid.dim)?;
    let sqrt_w: Vec<f64> = ws.free.iter().map(|&i| ws.w(i).sqrt()).collect();
    let mut psi = vec![ZERO; form.len()];
    let (value, iterations, converged) = if form.grid.dim == 1 {
        // Chain: gauge the link phases away and solve the symmetric tridiagonal problem.
        let pos: std::collections::HashMap<usize, usize> = ws.free.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let nf = ws.free.len();
        let mut d: Vec<f64> = ws
            .free
            .iter()
            .map(|&i| form.kinetic_diag[i] + form.potential_diag[i])
            .collect();
        let mut e = vec![0.0; nf.saturating_sub(1)];
        let mut theta = vec![0.0; nf];
        let mut links = form.links.clone();
        links.sort_by_key(|l| l.a.min(l.b));
        for l in &links {
            let (ka, kb) = (pos[&l.a], pos[&l.b]);
            if kb != ka + 1 {
                return Err(Error::InvalidArgument("one-dimensional grid is not a chain".into()));
            }
            d[ka] += l.coupling;
            d[kb] += l.coupling;
            e[ka] = -l.coupling / (sqrt_w[ka] * sqrt_w[kb]);
            theta[kb] = theta[ka] - l.phase;
        }
        for (k, v) in d.iter_mut().enumerate() {
            *v /= sqrt_w[k] * sqrt_w[k];
        }
        let (value, y) = tridiag_lowest(&d, &e);
        for (k, &i) in ws.free.iter().enumerate() {
            psi[i] = Complex64::from_polar(y[k] / sqrt_w[k], theta[k]);
        }
        (value, 1, true)
    } else {
        let nf = ws.free.len();
        let width = opts.init_width.unwrap_or(form.h.sqrt());
        let center = opts
            .centers
            .first()
            .cloned()
            .unwrap_or_else(|| centroid(form, &ws.free));
        let x0: Vec<Complex64> = ws
            .free
            .iter()
            .zip(&sqrt_w)
            .map(|(&i, sw)| Complex64::new(bump(&form.grid.coords(i), &center, width) * sw + 1e-8, 0.0))
            .collect();
        let apply = |y: &[Complex64], out: &mut [Complex64]| {
            let mut full = vec![ZERO; form.len()];
            for (k, &i) in ws.free.iter().enumerate() {
                full[i] = y[k] / sqrt_w[k];
            }
            let mut mfull = vec![ZERO; form.len()];
            form.apply(&full, &mut mfull);
            for (k, &i) in ws.free.iter().enumerate() {
                out[k] = mfull[i] / sqrt_w[k];
            }
        };
        let tol = opts.grad_tol.min(1e-9);
        let res = lobpcg_lowest(apply, x0, tol, opts.max_iters.max(nf.min(50_000)));
        for (k, &i) in ws.free.iter().enumerate() {
            psi[i] = res.vector[k] / sqrt_w[k];
        }
        (res.value, res.iterations, res.converged)
    };
    let n = ws.lp_norm(&psi);
    psi.iter_mut().for_each(|v| *v /= n);
    let psi = WaveFunction { values: psi };
    let el = el_residual(form, value, &psi, &p2);
    Ok(MinimizerResult {
        lambda: value,
        psi,
        iterations,
        el_residual: el,
        restart_values: vec![value],
        converged: converged || el <= opts.grad_tol,
        method: Method::Eigen,
    })
}

fn centroid(form: &AssembledForm, free: &[usize]) -> Vec<f64> {
    let dim = form.grid.dim;
    let mut c = vec![0.0; dim];
    let mut total = 0.0;
    for &i in free {
        let w = form.grid.weight[i];
        for (ck, xk) in c.iter_mut().zip(form.grid.coords(i)) {
            *ck += w * xk;
        }
        total += w;
    }
    c.iter_mut().for_each(|v| *v /= total);
    c
}

fn bump(x: &[f64], c: &[f64], width: f64) -> f64 {
    let r2: f64 = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
    (-r2 / (2.0 * width * width)).exp()
}

/// Initialization of run `index`: bumps at the candidate centers first, then
/// user guesses, then randomized bumps.
fn initialization(form: &AssembledForm, opts: &MinimizeOptions, centers: &[Vec<f64>], index: usize) -> WaveFunction {
    let width = opts.init_width.unwrap_or(form.h.sqrt());
    if index < centers.len() {
        let c = &centers[index];
        return WaveFunction::from_real(&form.grid, |x| bump(x, c, width));
    }
    let index = index - centers.len();
    if index < opts.initial_guesses.len() {
        return opts.initial_guesses[index].clone();
    }
    let index = index - opts.initial_guesses.len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(index as u64 + 1);
    let base = &centers[index % centers.len()];
    let c: Vec<f64> = base
        .iter()
        .map(|v| v + width * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let w = width * rng.random_range(0.6..1.6);
    let real = form.real;
    let phase = if real {
        Complex64::new(if rng.random_bool(0.5) { 1.0 } else { -1.0 }, 0.0)
    } else {
        Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
    };
    let mut psi = WaveFunction::zeros(form.len());
    for i in 0..form.len() {
        if !form.grid.is_free(i) {
            continue;
        }
        let n1: f64 = rng.sample(StandardNormal);
        let n2: f64 = if real { 0.0 } else { rng.sample(StandardNormal) };
        let noise = Complex64::new(1.0 + 0.1 * n1, 0.1 * n2);
        psi.values[i] = phase * noise * bump(&form.grid.coords(i), &c, w);
    }
    psi
}

/// Minimize the discrete Sobolev quotient.
///
/// Non-convergence is reported through `converged = false` on the best run;
/// use [`MinimizerResult::require_converged`] to turn it into an error.
pub fn minimize_quotient(form: &AssembledForm, p: &ExponentP, opts: &MinimizeOptions) -> Result<MinimizerResult> {
    opts.validate()?;
    if p.dim() != form.grid.dim {
        return Err(Error::InvalidArgument("exponent and grid dimensions differ".into()));
    }
    for g in &opts.initial_guesses {
        check_len(form, g)?;
    }
    let use_eigen = match opts.method {
        Method::Auto => p.is_linear(),
        Method::Eigen => {
            if !p.is_linear() {
                return Err(Error::InvalidArgument("the eigensolver path needs p = 2".into()));
            }
            true
        }
        Method::GradientFlow => false,
    };
    if use_eigen {
        return ground_state(form, opts);
    }
    let free: Vec<usize> = (0..form.len()).filter(|&i| form.grid.is_free(i)).collect();
    if free.is_empty() {
        return Err(Error::InvalidArgument("no free nodes".into()));
    }
    let centers = if opts.centers.is_empty() {
        vec![centroid(form, &free)]
    } else {
        opts.centers.clone()
    };
    let total = centers.len() + opts.initial_guesses.len() + opts.restarts;
    let runs: Vec<Result<FlowRun>> = crate::parallel::install(|| {
        (0..total)
            .into_par_iter()
            .map(|k| {
                // A degenerate draw (e.g. a bump entirely outside the free
                // region) is re-drawn from a later stream.
                let mut init = initialization(form, opts, &centers, k);
                let mut redraw = 0;
                while init.lp_norm(&form.grid, p.value()) < 1e-200 && redraw < 8 {
                    redraw += 1;
                    let mut o = opts.clone();
                    o.seed = opts.seed.wrapping_add(0x9E37_79B9 * redraw);
                    init = initialization(form, &o, &centers, centers.len() + opts.initial_guesses.len() + k);
                }
                gradient_flow(form, p, &init, opts.max_iters, opts.grad_tol)
            })
            .collect()
    });
    let mut best: Option<(usize, FlowRun)> = None;
    let mut values = Vec::with_capacity(total);
    let mut first_err = None;
    for (k, run) in runs.into_iter().enumerate() {
        match run {
            Ok(r) => {
                values.push(r.lambda);
                let better = match &best {
                    None => true,
                    Some((_, b)) => {
                        let tie = (r.lambda - b.lambda).abs() <= TIE_TOLERANCE * b.lambda.abs();
                        if tie {
                            (r.converged && !b.converged) || (r.converged == b.converged && r.iterations < b.iterations)
                        } else {
                            r.lambda < b.lambda
                        }
                    }
                };
                if better {
                    best = Some((k, r));
                }
            }
            Err(e) => {
                values.push(f64::NAN);
                first_err.get_or_insert(e);
            }
        }
    }
    let (_, run) = match best {
        Some(b) => b,
        None => return Err(first_err.unwrap_or(Error::ZeroFunction { norm: 0.0 })),
    };
    Ok(MinimizerResult {
        lambda: run.lambda,
        psi: run.psi,
        iterations: run.iterations,
        el_residual: run.residual,
        restart_values: values,
        converged: run.converged,
        method: Method::GradientFlow,
    })
}
