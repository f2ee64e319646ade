//! The half-line Robin model.
//!
//! Minimizers of `∫|u'|² + |u|² + c|u(0)|²` over `‖u‖_p = 1` on `ℝ_+` solve
//! `−u'' + u = u^{p−1}` with `u'(0) = c u(0)`.  In the phase plane
//! `(u, v) = (u, u')` the system is Hamiltonian with
//! `H(u, v) = (v² − u²)/2 + |u|^p/p`, and the decaying solution lies on the
//! level set `H = 0`, which pins the initial amplitude.

use crate::error::{Error, Result};
use crate::quadrature::GaussRule;

/// Robin parameters with `|c|` above this value are reported through their limits.
pub const LIMIT_THRESHOLD: f64 = 0.999;

/// Tolerance on the Hamiltonian drift along an integrated trajectory.
pub const H_TOLERANCE: f64 = 1e-10;

/// A point `(u, u')` of the phase plane.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PhaseState {
    pub u: f64,
    pub v: f64,
}

/// Uniformly sampled solution of the Robin model ODE.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PhaseTrajectory {
    /// Distance between consecutive samples.
    pub step: f64,
    /// `samples[k]` is the state at `r = k * step`.
    pub samples: Vec<PhaseState>,
    pub p: f64,
    pub c: f64,
    /// `∫_0^{r_end} u^p dr`, integrated alongside the trajectory.
    pub lp_integral: f64,
    /// Radius at which integration stopped.
    pub r_end: f64,
    /// State at `r_end`.
    pub end: PhaseState,
    /// Radius where `v` changes sign (`0` when the trajectory starts decreasing).
    pub t_escape: f64,
    /// Largest `|H|` over the samples.
    pub max_h_drift: f64,
}

impl PhaseTrajectory {
    /// Index of the sample with the largest amplitude.
    pub fn turning_index(&self) -> usize {
        self.samples
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.u.total_cmp(&b.1.u))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// First sample past the turning point where `u ≤ 1`, i.e. where `v' ≥ 0`.
    /// From there on both `u` and `|v|` decrease, hence so does `u + |v|`.
    pub fn inflection_index(&self) -> usize {
        let turn = self.turning_index();
        self.samples[turn..]
            .iter()
            .position(|s| s.u <= 1.0)
            .map(|k| k + turn)
            .unwrap_or(self.samples.len())
    }

    /// Cubic Hermite interpolation of the state at radius `r`, using the ODE
    /// for the derivatives.  Returns `None` outside the sampled range.
    pub fn interpolate(&self, r: f64) -> Option<PhaseState> {
        let last = self.samples.len().checked_sub(1)?;
        if r < 0.0 || r > last as f64 * self.step {
            return None;
        }
        let k = ((r / self.step).floor() as usize).min(last.saturating_sub(1));
        if last == 0 {
            return Some(self.samples[0]);
        }
        let a = self.samples[k];
        let b = self.samples[k + 1];
        let s = (r - k as f64 * self.step) / self.step;
        let dt = self.step;
        let acc = |st: PhaseState| st.u - st.u.abs().powf(self.p - 2.0) * st.u;
        let h00 = 2.0 * s * s * s - 3.0 * s * s + 1.0;
        let h10 = s * s * s - 2.0 * s * s + s;
        let h01 = -2.0 * s * s * s + 3.0 * s * s;
        let h11 = s * s * s - s * s;
        Some(PhaseState {
            u: h00 * a.u + h10 * dt * a.v + h01 * b.u + h11 * dt * b.v,
            v: h00 * a.v + h10 * dt * acc(a) + h01 * b.v + h11 * dt * acc(b),
        })
    }
}

/// Summary of one evaluation of `λ_c`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LambdaReport {
    pub c: f64,
    pub p: f64,
    pub lambda: f64,
    /// Initial amplitude `u_c(0)` (zero when the limit value is reported).
    pub u0: f64,
    pub t_escape: f64,
    /// True when `|c|` exceeds [`LIMIT_THRESHOLD`] and the limit value was reported.
    pub limit: bool,
}

/// `H(u, v) = (v² − u²)/2 + |u|^p / p`.
pub fn hamiltonian(u: f64, v: f64, p: f64) -> f64 {
    0.5 * (v * v - u * u) + u.abs().powf(p) / p
}

/// The unique `u₀ > 0` with `H(u₀, c u₀) = 0`.
pub fn initial_amplitude(c: f64, p: f64) -> Result<f64> {
    check_exponent(p)?;
    if !(c.abs() < 1.0) {
        return Err(Error::NoSolution { c });
    }
    Ok((0.5 * p * (1.0 - c * c)).powf(1.0 / (p - 2.0)))
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p > 2.0) || !p.is_finite() {
        return Err(Error::InvalidExponent {
            p,
            dim: 1,
            reason: "the Robin model needs p > 2".into(),
        });
    }
    Ok(())
}

/// Closed-form whole-line soliton `(p/2)^{1/(p−2)} sech^{2/(p−2)}((p−2) r / 2)`.
pub fn soliton_profile(r: f64, p: f64) -> f64 {
    let k = 0.5 * (p - 2.0);
    (0.5 * p).powf(1.0 / (p - 2.0)) * (1.0 / (k * r).cosh()).powf(2.0 / (p - 2.0))
}

// ---------------------------------------------------------------------------
// Dormand–Prince 5(4)
// ---------------------------------------------------------------------------

const DP_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand–Prince step; returns the fifth-order solution and the
/// embedded error estimate (max norm).
fn dp_step<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]>(f: &F, t: f64, y: &[f64; N], dt: f64) -> ([f64; N], f64) {
    let mut k = [[0.0; N]; 7];
    for stage in 0..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(stage) {
            let a = DP_A[stage][j];
            if a != 0.0 {
                for i in 0..N {
                    ys[i] += dt * a * kj[i];
                }
            }
        }
        k[stage] = f(t + DP_C[stage] * dt, &ys);
    }
    let mut y5 = *y;
    let mut err: f64 = 0.0;
    for i in 0..N {
        let mut d5 = 0.0;
        let mut d4 = 0.0;
        for s in 0..7 {
            d5 += DP_B5[s] * k[s][i];
            d4 += DP_B4[s] * k[s][i];
        }
        y5[i] += dt * d5;
        err = err.max((dt * (d5 - d4)).abs());
    }
    (y5, err)
}

/// Adaptive integration from `t0` to `t1`.  `dt` carries the step-size
/// suggestion between calls.  `stop` is checked after every accepted step.
fn integrate_adaptive<const N: usize, F, S>(
    f: &F,
    t0: f64,
    t1: f64,
    y: &mut [f64; N],
    dt: &mut f64,
    tol: f64,
    mut stop: S,
) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    S: FnMut(f64, &[f64; N], &[f64; N], f64) -> Option<f64>,
{
    let mut t = t0;
    while t < t1 {
        let h = dt.min(t1 - t);
        let (y_new, err) = dp_step(f, t, y, h);
        let scale = tol * (1.0 + y.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
        if err <= scale || h < 1e-12 {
            if let Some(t_stop) = stop(t, y, &y_new, h) {
                // Caller asked to stop inside this step; land exactly on t_stop.
                let (y_stop, _) = dp_step(f, t, y, t_stop - t);
                *y = y_stop;
                return t_stop;
            }
            *y = y_new;
            t += h;
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * (scale / err).powf(0.2)).clamp(0.2, 5.0)
            };
            *dt = (h * factor).max(1e-12);
        } else {
            *dt = (h * (0.9 * (scale / err).powf(0.2)).max(0.1)).max(1e-12);
        }
    }
    t1
}

const ODE_TOL: f64 = 1e-13;

/// Integrate the Robin model from `(u₀, c u₀)`, sampling every `step` up to
/// `r_max` (or until `|u| + |v| < 1e−14`).
///
/// Near the turning point the full system `(u, v)` is integrated.  Once the
/// trajectory is clearly on its descending branch it is continued on the
/// exact level set `v = −u √(1 − 2u^{p−2}/p)`; the stable manifold is
/// unstable for forward integration, and this reduction removes the growing
/// mode while keeping `H` at zero to rounding.
pub fn integrate_trajectory(c: f64, p: f64, r_max: f64, step: f64) -> Result<PhaseTrajectory> {
    if !(r_max > 0.0) || !(step > 0.0) {
        return Err(Error::InvalidArgument("r_max and step must be positive".into()));
    }
    integrate_impl(c, p, r_max, step, 1e-14, true)
}

fn on_descending_branch(u: f64, v: f64) -> bool {
    v <= -0.05 * u
}

fn descending_v(u: f64, p: f64) -> f64 {
    let arg = (1.0 - 2.0 * u.abs().powf(p - 2.0) / p).max(0.0);
    -u * arg.sqrt()
}

fn integrate_impl(
    c: f64,
    p: f64,
    r_max: f64,
    step: f64,
    stop_amplitude: f64,
    keep_samples: bool,
) -> Result<PhaseTrajectory> {
    let u0 = initial_amplitude(c, p)?;
    let full = |_t: f64, y: &[f64; 3]| -> [f64; 3] {
        let u = y[0];
        let up = u.abs().powf(p - 2.0);
        [y[1], u - up * u, up * u * u]
    };
    let reduced = |_t: f64, y: &[f64; 2]| -> [f64; 2] {
        let u = y[0];
        [descending_v(u, p), u.abs().powf(p)]
    };

    let mut samples = Vec::new();
    let mut state = PhaseState { u: u0, v: c * u0 };
    if keep_samples {
        samples.push(state);
    }
    let mut integral = 0.0;
    let mut t_escape = 0.0;
    let mut r = 0.0;
    let mut dt = 1e-3_f64.min(step);
    let mut descending = on_descending_branch(state.u, state.v);

    while r < r_max - 1e-12 * r_max && state.u.abs() + state.v.abs() >= stop_amplitude {
        let r_next = (r + step).min(r_max);
        if !descending {
            let mut y = [state.u, state.v, integral];
            let mut switch_at = None;
            let mut escaped = None;
            let t_reached = integrate_adaptive(&full, r, r_next, &mut y, &mut dt, ODE_TOL, |t, y0, y1, h| {
                if y0[1] > 0.0 && y1[1] <= 0.0 {
                    // Locate the sign change of v by bisection on the step length.
                    let (mut lo, mut hi) = (0.0, h);
                    for _ in 0..60 {
                        let mid = 0.5 * (lo + hi);
                        let (ym, _) = dp_step(&full, t, y0, mid);
                        if ym[1] > 0.0 {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    escaped = Some(t + hi);
                }
                if on_descending_branch(y1[0], y1[1]) {
                    switch_at = Some(t + h);
                    return Some(t + h);
                }
                None
            });
            if let Some(te) = escaped {
                t_escape = te;
            }
            state = PhaseState { u: y[0], v: y[1] };
            integral = y[2];
            if switch_at.is_some() {
                descending = true;
                state.v = descending_v(state.u, p);
                if t_reached < r_next {
                    // Finish the current sampling interval on the level set.
                    let mut yr = [state.u, integral];
                    integrate_adaptive(&reduced, t_reached, r_next, &mut yr, &mut dt, ODE_TOL, |_, _, _, _| {
                        None
                    });
                    state = PhaseState {
                        u: yr[0],
                        v: descending_v(yr[0], p),
                    };
                    integral = yr[1];
                }
            }
        } else {
            let mut yr = [state.u, integral];
            integrate_adaptive(&reduced, r, r_next, &mut yr, &mut dt, ODE_TOL, |_, _, _, _| None);
            state = PhaseState {
                u: yr[0],
                v: descending_v(yr[0], p),
            };
            integral = yr[1];
        }
        r = r_next;
        if keep_samples {
            samples.push(state);
        }
    }

    let max_h_drift = if keep_samples {
        samples
            .iter()
            .map(|s| hamiltonian(s.u, s.v, p).abs())
            .fold(0.0, f64::max)
    } else {
        hamiltonian(state.u, state.v, p).abs()
    };
    if max_h_drift > H_TOLERANCE {
        return Err(Error::ToleranceNotMet {
            drift: max_h_drift,
            tol: H_TOLERANCE,
        });
    }
    if keep_samples {
        if let Some(k) = samples.iter().position(|s| s.u <= 0.0) {
            return Err(Error::ConvergenceFailure(format!(
                "trajectory left u > 0 at r = {}",
                k as f64 * step
            )));
        }
    }
    Ok(PhaseTrajectory {
        step,
        samples,
        p,
        c,
        lp_integral: integral,
        r_end: r,
        end: state,
        t_escape,
        max_h_drift,
    })
}

/// Full report for `λ_c = ‖u_c‖_{L^p(ℝ_+)}^{p−2}`.
pub fn lambda_c_report(c: f64, p: f64) -> Result<LambdaReport> {
    check_exponent(p)?;
    if !(c.abs() < 1.0) {
        return Err(Error::NoSolution { c });
    }
    if c.abs() > LIMIT_THRESHOLD {
        let lambda = if c > 0.0 { soliton_line(p)? } else { 0.0 };
        return Ok(LambdaReport {
            c,
            p,
            lambda,
            u0: initial_amplitude(c, p)?,
            t_escape: f64::INFINITY,
            limit: true,
        });
    }
    let u0 = initial_amplitude(c, p)?;
    // Escape from near the origin takes about ln(1/u0); the tail decays like e^{−r}.
    let r_max = 60.0 + 2.0 * (1.0 / u0).ln().max(0.0);
    let traj = integrate_impl(c, p, r_max, 0.25, 1e-14, false)?;
    let u_end = traj.end.u;
    // ∫_{r}^∞ u^p ≈ u(r)^p / p for u ∝ e^{−r}.
    let total = traj.lp_integral + u_end.powf(p) / p;
    Ok(LambdaReport {
        c,
        p,
        lambda: total.powf((p - 2.0) / p),
        u0,
        t_escape: traj.t_escape,
        limit: false,
    })
}

/// `λ_c = ‖u_c‖_{L^p(ℝ_+)}^{p−2}`, the half-line Robin Sobolev constant.
pub fn lambda_c(c: f64, p: f64) -> Result<f64> {
    Ok(lambda_c_report(c, p)?.lambda)
}

/// Whole-line constant `‖u‖_{L^p(ℝ)}^{p−2}` of the sech soliton.
pub fn soliton_line(p: f64) -> Result<f64> {
    check_exponent(p)?;
    // The integrand decays like e^{−p r}; 60/p + 40 leaves it far below rounding.
    let r_max = 40.0 + 60.0 / p;
    let rule = GaussRule::new(20);
    let half = rule.integrate_composite(0.0, r_max, 400, |r| soliton_profile(r, p).powf(p));
    Ok((2.0 * half).powf((p - 2.0) / p))
}

/// Ground energy of `−∂² + 1` on `ℝ_+` with Robin condition `u'(0) = c u(0)`:
/// `1 − c²` for `c ∈ (−1, 0)`, `1` for `c ≥ 0`, and `0` for `c ≤ −1`.
///
/// For `c ≤ −1` the value is the infimum of the quotient over `L^2`-normalized
/// functions, which is not attained; the convention value `0` is returned.
pub fn linear_eigenvalue(c: f64) -> f64 {
    if c <= -1.0 {
        0.0
    } else if c < 0.0 {
        1.0 - c * c
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn soliton_derivatives(r: f64, p: f64) -> (f64, f64, f64) {
        let e = 1e-3;
        let f = |x| soliton_profile(x, p);
        let u = f(r);
        let d1 = (f(r + e) - f(r - e)) / (2.0 * e);
        let d2 = (f(r + e) - 2.0 * u + f(r - e)) / (e * e);
        (u, d1, d2)
    }

    #[test]
    fn hamiltonian_examples() {
        assert_eq!(hamiltonian(0.0, 0.0, 4.0), 0.0);
        assert!(hamiltonian(2f64.sqrt(), 0.0, 4.0).abs() < 1e-15);
        for &c in &[-0.9, -0.3, 0.0, 0.4, 0.95] {
            for &p in &[3.0, 4.0, 6.0] {
                let u0 = initial_amplitude(c, p).unwrap();
                assert!(hamiltonian(u0, c * u0, p).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn initial_amplitude_examples() {
        assert!((initial_amplitude(0.0, 4.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let small = initial_amplitude(0.99, 4.0).unwrap();
        assert!(small > 0.0 && small < 0.2);
        assert_eq!(initial_amplitude(1.0, 4.0), Err(Error::NoSolution { c: 1.0 }));
        assert!(initial_amplitude(-1.5, 4.0).is_err());
        assert!(initial_amplitude(0.0, 2.0).is_err());
    }

    #[test]
    fn soliton_oracle_solves_ode() {
        for &p in &[3.0, 4.0, 6.0] {
            for k in 0..100 {
                let r = 0.05 + 0.06 * k as f64;
                let (u, _, d2) = soliton_derivatives(r, p);
                let residual = -d2 + u - u.powf(p - 1.0);
                assert!(residual.abs() < 1e-5, "p={p} r={r} residual={residual}");
            }
            // Analytic first derivative check on the Hamiltonian level set.
            for k in 0..100 {
                let r = 0.05 + 0.06 * k as f64;
                let (u, d1, _) = soliton_derivatives(r, p);
                assert!(hamiltonian(u, d1, p).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn trajectory_matches_soliton_at_c_zero() {
        let traj = integrate_trajectory(0.0, 4.0, 20.0, 0.01).unwrap();
        for (k, s) in traj.samples.iter().enumerate() {
            let r = k as f64 * traj.step;
            let exact = 2f64.sqrt() / r.cosh();
            assert!((s.u - exact).abs() < 1e-8, "r={r}: {} vs {exact}", s.u);
        }
        assert!(traj.max_h_drift <= H_TOLERANCE);
        assert_eq!(traj.t_escape, 0.0);
    }

    #[test]
    fn trajectory_conserves_energy_and_stays_positive() {
        for &c in &[-0.8, -0.2, 0.3, 0.5, 0.9] {
            for &p in &[3.0, 4.0, 6.0] {
                let traj = integrate_trajectory(c, p, 30.0, 0.05).unwrap();
                assert!(traj.max_h_drift <= H_TOLERANCE);
                assert!(traj.samples.iter().all(|s| s.u > 0.0));
                let turn = traj.turning_index();
                let u: Vec<f64> = traj.samples[turn..].iter().map(|s| s.u).collect();
                assert!(u.windows(2).all(|w| w[1] < w[0]), "c={c} p={p}");
                let infl = traj.inflection_index();
                let tail: Vec<f64> = traj.samples[infl..].iter().map(|s| s.u + s.v.abs()).collect();
                assert!(tail.windows(2).all(|w| w[1] < w[0]), "c={c} p={p}");
            }
        }
    }

    #[test]
    fn escape_time_matches_closed_form() {
        // For p=4, u_c(r) = √2 sech(r − T) with tanh(T) = c.
        for &c in &[0.2, 0.5, 0.9] {
            let traj = integrate_trajectory(c, 4.0, 15.0, 0.01).unwrap();
            let t = c.atanh();
            assert!((traj.t_escape - t).abs() < 1e-8, "c={c}: {} vs {t}", traj.t_escape);
            for (k, s) in traj.samples.iter().enumerate().step_by(37) {
                let r = k as f64 * 0.01;
                let exact = 2f64.sqrt() / (r - t).cosh();
                assert!((s.u - exact).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn lambda_c_closed_forms() {
        let l0 = lambda_c(0.0, 4.0).unwrap();
        assert!((l0 - 4.0 / 6f64.sqrt()).abs() < 1e-9, "{l0}");
        let line = soliton_line(4.0).unwrap();
        assert!((line - 4.0 / 3f64.sqrt()).abs() < 1e-12);
        for &p in &[3.0, 4.0, 6.0] {
            let ratio = soliton_line(p).unwrap() / lambda_c(0.0, p).unwrap();
            assert!((ratio - 2f64.powf(1.0 - 2.0 / p)).abs() < 1e-9);
        }
    }

    #[test]
    fn lambda_c_against_shifted_soliton() {
        // u_c(r) = u_sol(r + r_c) with tanh(k r_c) = −c.
        for &p in &[3.0, 5.0] {
            let k = 0.5 * (p - 2.0);
            for &c in &[-0.7f64, 0.6] {
                let rc = (-c).atanh() / k;
                let rule = GaussRule::new(20);
                let lo = rc;
                let integral = rule.integrate_composite(lo, lo + 80.0, 800, |r| soliton_profile(r, p).powf(p));
                let exact = integral.powf((p - 2.0) / p);
                let got = lambda_c(c, p).unwrap();
                assert!((got - exact).abs() < 1e-8, "p={p} c={c}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn lambda_c_monotone_and_sandwiched() {
        let p = 4.0;
        let line = soliton_line(p).unwrap();
        let mut prev = 0.0;
        for k in 0..19 {
            let c = -0.9 + 0.1 * k as f64;
            let l = lambda_c(c, p).unwrap();
            assert!(l > prev && l < line);
            prev = l;
        }
    }

    #[test]
    fn limits_are_flagged() {
        let r = lambda_c_report(0.9995, 4.0).unwrap();
        assert!(r.limit);
        assert_eq!(r.lambda, soliton_line(4.0).unwrap());
        let r = lambda_c_report(-0.9995, 4.0).unwrap();
        assert!(r.limit && r.lambda == 0.0);
        assert!(matches!(lambda_c(1.0, 4.0), Err(Error::NoSolution { .. })));
    }

    #[test]
    fn shift_property() {
        let p = 4.0;
        let (c, c2) = (0.5, -0.3);
        let a = integrate_trajectory(c, p, 25.0, 0.005).unwrap();
        let b = integrate_trajectory(c2, p, 20.0, 0.005).unwrap();
        // Find where v/u = c2 on the trajectory of c, past the turning point.
        let ratio = |r: f64| {
            let s = a.interpolate(r).unwrap();
            s.v / s.u - c2
        };
        let (mut lo, mut hi) = (a.t_escape, a.t_escape + 5.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if ratio(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let shift = 0.5 * (lo + hi);
        for k in 0..1000 {
            let r = k as f64 * 0.01;
            let x = a.interpolate(r + shift).unwrap();
            let y = b.interpolate(r).unwrap();
            assert!((x.u - y.u).abs() < 1e-6 && (x.v - y.v).abs() < 1e-6);
        }
    }

    #[test]
    fn linear_eigenvalue_convention() {
        assert_eq!(linear_eigenvalue(-0.5), 0.75);
        assert_eq!(linear_eigenvalue(0.0), 1.0);
        assert_eq!(linear_eigenvalue(0.7), 1.0);
        assert_eq!(linear_eigenvalue(-1.0), 0.0);
        assert_eq!(linear_eigenvalue(-3.0), 0.0);
    }
}
