//! End-to-end acceptance checks, one test per criterion, each with its
//! runtime budget.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semisobolev::asymptotics::{
    default_h_list, localization_report, scaling_law, semiclassical_exponent, sweep, SweepOptions,
};
use semisobolev::config::RunConfig;
use semisobolev::discretize::{assemble, build_grid, gauge_transform, Grid, Truncation, WaveFunction};
use semisobolev::geometry::{
    de_gennes_constant, neumann_lower_bound, BoundaryCondition, Domain, ExponentP, GeometrySpec, Magnetic,
    MagneticMatrix, ScalarField,
};
use semisobolev::minimize::{minimize_quotient, MinimizeOptions};
use semisobolev::model1d::{lambda_c, soliton_line};
use semisobolev::models::{
    boundary_constant, concentration_map, default_samples, int_bord_check, lattice_boundary_constant, MapOptions,
    ModelOptions,
};
use semisobolev::partition::{build_partition, partition_check};
use semisobolev::waveguide::{waveguide_sweep, WaveguideOptions, WidthProfile};

fn within_budget(start: Instant, seconds: u64) {
    let elapsed = start.elapsed();
    assert!(
        elapsed < Duration::from_secs(seconds),
        "took {elapsed:?}, budget {seconds} s"
    );
}

fn exponent(p: f64, dim: usize) -> ExponentP {
    ExponentP::new(p, dim).unwrap()
}

/// `∫_ℝ sech^{2q}` by the composite trapezoid rule on `[−40, 40]`
/// (spectrally accurate for this analytic, rapidly decaying integrand).
fn sech_power_integral(q: f64) -> f64 {
    let (l, n) = (40.0, 80_000);
    let dx = 2.0 * l / n as f64;
    (0..=n)
        .map(|k| {
            let x = -l + k as f64 * dx;
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            w * (1.0 / x.cosh()).powf(2.0 * q)
        })
        .sum::<f64>()
        * dx
}

#[test]
fn c01_exact_one_dimensional_model() {
    let start = Instant::now();
    // Soliton oracle: u = (p/2)^{1/(p−2)} sech^{2/(p−2)}((p−2)r/2) solves
    // −u″+u = u^{p−1} on ℝ, and λ = (∫u^p)^{1−2/p}.  For p = 4:
    // u = √2 sech r, ∫u⁴ = 4·(4/3) = 16/3, λ = (16/3)^{1/2} = 4/√3.
    let p: f64 = 4.0;
    let scale = (p / 2.0).powf(1.0 / (p - 2.0));
    let int_up = scale.powf(p) * sech_power_integral(p / (p - 2.0)) * 2.0 / (p - 2.0);
    let line_oracle = int_up.powf(1.0 - 2.0 / p);
    assert!((line_oracle - 4.0 / 3f64.sqrt()).abs() < 1e-9);
    // c = 0: the even extension halves the integral.
    let half_oracle = (0.5 * int_up).powf(1.0 - 2.0 / p);
    assert!((half_oracle - 4.0 / 6f64.sqrt()).abs() < 1e-9);

    assert!((lambda_c(0.0, p).unwrap() - half_oracle).abs() < 1e-6);
    assert!((soliton_line(p).unwrap() - line_oracle).abs() < 1e-6);
    within_budget(start, 1);
}

#[test]
fn c02_monotonicity_and_limits() {
    let start = Instant::now();
    for p in [3.0, 4.0, 6.0] {
        let line = soliton_line(p).unwrap();
        // 37 equally spaced interior samples of (−0.95, 0.95).
        let values: Vec<f64> = (1..=37)
            .map(|k| lambda_c(-0.95 + 1.9 * k as f64 / 38.0, p).unwrap())
            .collect();
        for w in values.windows(2) {
            assert!(w[1] > w[0], "p = {p}: {w:?}");
        }
        let top = lambda_c(0.999, p).unwrap();
        assert!((top - line).abs() <= 0.01 * line, "p = {p}: {top} vs {line}");
        let bottom = lambda_c(-0.999, p).unwrap();
        assert!(bottom >= 0.0 && bottom <= 0.01 * line, "p = {p}: {bottom}");
    }
    within_budget(start, 10);
}

fn half_line_spec(c: f64) -> GeometrySpec {
    GeometrySpec::new(
        1,
        Domain::HalfSpace,
        ScalarField::Constant(1.0),
        Magnetic::Zero,
        BoundaryCondition::Robin(ScalarField::Constant(c)),
    )
    .unwrap()
}

#[test]
fn c03_linear_robin_eigenvalue() {
    let start = Instant::now();
    let p = exponent(2.0, 1);
    for c in [-0.75, -0.5, -0.25] {
        let spec = half_line_spec(c);
        let exact = 1.0 - c * c;
        let mut errors = Vec::new();
        for spacing in [0.02, 0.01, 0.005] {
            let grid = build_grid(&spec, spacing, Some(&Truncation::half_space(1, 25.0))).unwrap();
            let form = assemble(&spec, 1.0, &grid).unwrap();
            let r = minimize_quotient(&form, &p, &MinimizeOptions::default()).unwrap();
            assert!(r.converged);
            errors.push((r.lambda - exact).abs());
        }
        assert!(errors[2] < 1e-3, "c = {c}: {errors:?}");
        assert!(errors[2] < errors[0], "c = {c}: no refinement gain {errors:?}");
    }
    within_budget(start, 30);
}

fn magnetic_square(h_spacing: f64) -> (GeometrySpec, Grid) {
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
    let grid = build_grid(&spec, h_spacing, None).unwrap();
    (spec, grid)
}

fn random_psi(grid: &Grid, rng: &mut ChaCha8Rng) -> WaveFunction {
    let mut psi = WaveFunction::zeros(grid.len());
    for n in 0..grid.len() {
        if grid.is_free(n) {
            psi.values[n] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
    }
    psi
}

#[test]
fn c04_discrete_gauge_invariance() {
    let start = Instant::now();
    let (spec, grid) = magnetic_square(0.05);
    let h = 0.3;
    let form = assemble(&spec, h, &grid).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in 0..50 {
        let (a, b, c) = (
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(0.5..4.0),
        );
        let phi = move |x: &[f64]| a * x[0] * x[1] + b * (c * x[1]).sin() + 0.1 * k as f64;
        let psi = random_psi(&grid, &mut rng);
        // With the kinetic operator (−ih∇+A): (−ih∇+A−∇φ)(e^{iφ/h}ψ) = e^{iφ/h}(−ih∇+A)ψ.
        let shifted = assemble(&spec.gauge_shifted(move |x: &[f64]| -phi(x)), h, &grid).unwrap();
        let lhs = shifted.energy(&gauge_transform(&psi, &grid, phi, h));
        let rhs = form.energy(&psi);
        assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs(), "pair {k}: {lhs} vs {rhs}");
    }
    within_budget(start, 5);
}

#[test]
fn c05_discrete_diamagnetic_inequality() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (spacing, h) in [(0.1, 1.0), (0.05, 0.25)] {
        let (spec, grid) = magnetic_square(spacing);
        let form = assemble(&spec, h, &grid).unwrap();
        let violations = (0..100)
            .filter(|_| {
                let psi = random_psi(&grid, &mut rng);
                form.field_free_kinetic_energy(&psi.modulus()) > form.kinetic_energy(&psi)
            })
            .count();
        assert_eq!(violations, 0);
    }
    within_budget(start, 5);
}

#[test]
fn c06_homogeneous_scaling_law() {
    let start = Instant::now();
    let hs = [1.0, 0.25, 1.0 / 16.0];
    let cases: Vec<(GeometrySpec, f64, Truncation, Vec<f64>)> = vec![
        (half_line_spec(0.3), 0.02, Truncation::half_space(1, 20.0), vec![0.0]),
        (
            GeometrySpec::new(
                2,
                Domain::HalfSpace,
                ScalarField::Constant(1.0),
                Magnetic::constant(MagneticMatrix::planar(1.0)),
                BoundaryCondition::Robin(ScalarField::Constant(0.2)),
            )
            .unwrap(),
            0.2,
            Truncation::half_space(2, 6.0),
            vec![0.0, 0.5],
        ),
    ];
    for (spec, spacing, truncation, center) in &cases {
        for p in [2.0, 4.0] {
            let p = exponent(p, spec.dim);
            let opts = MinimizeOptions {
                centers: vec![center.clone()],
                init_width: Some(1.0),
                restarts: 1,
                ..Default::default()
            };
            let rows = scaling_law(spec, &p, &hs, *spacing, truncation, &opts).unwrap();
            let kappa = semiclassical_exponent(spec.dim, p.value());
            for r in &rows {
                assert!(r.deviation.abs() < 1e-10, "d = {}, p = {}: {r:?}", spec.dim, p.value());
                assert!((r.lambda / r.h.powf(kappa) - r.normalized).abs() < 1e-12 * r.normalized);
            }
        }
    }
    within_budget(start, 60);
}

#[test]
fn c07_landau_level() {
    let start = Instant::now();
    let spec = GeometrySpec::new(
        2,
        Domain::WholeSpace,
        ScalarField::Constant(0.0),
        Magnetic::constant(MagneticMatrix::planar(1.0)),
        BoundaryCondition::neumann(),
    )
    .unwrap();
    // Default truncation: ten natural lengths each side.
    let grid = build_grid(&spec, 0.1, Some(&Truncation::cube(&[0.0, 0.0], 10.0))).unwrap();
    let form = assemble(&spec, 1.0, &grid).unwrap();
    let r = minimize_quotient(&form, &exponent(2.0, 2), &MinimizeOptions::default()).unwrap();
    assert!(r.converged);
    assert!((r.lambda - 1.0).abs() < 0.02, "{}", r.lambda);
    within_budget(start, 120);
}

#[test]
fn c08_de_gennes_constant_and_neumann_bound() {
    let start = Instant::now();
    let theta = de_gennes_constant().unwrap();
    assert!(theta > 0.0 && theta < 1.0);
    assert!((theta - 0.5901).abs() < 1e-3, "{theta}");
    // Independent shooting oracle for μ(ξ), minimized over a ξ-scan.
    let shoot = |xi: f64| {
        let survives = |mu: f64| {
            let f = |t: f64, y: [f64; 2]| [y[1], ((t - xi) * (t - xi) - mu) * y[0]];
            let (mut t, mut y, dt) = (0.0, [1.0, 0.0], 2e-3);
            while t < 7.0 {
                let k1 = f(t, y);
                let k2 = f(t + 0.5 * dt, [y[0] + 0.5 * dt * k1[0], y[1] + 0.5 * dt * k1[1]]);
                let k3 = f(t + 0.5 * dt, [y[0] + 0.5 * dt * k2[0], y[1] + 0.5 * dt * k2[1]]);
                let k4 = f(t + dt, [y[0] + dt * k3[0], y[1] + dt * k3[1]]);
                for i in 0..2 {
                    y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
                t += dt;
                if y[0] < 0.0 {
                    return false;
                }
            }
            true
        };
        let (mut lo, mut hi) = (0.0, 2.0);
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if survives(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let oracle = (0..=40)
        .map(|k| shoot(0.6 + 0.01 * k as f64))
        .fold(f64::INFINITY, f64::min);
    assert!((theta - oracle).abs() < 1e-3, "{theta} vs {oracle}");

    // The Neumann bound never exceeds the half-plane p = 2 constant computed
    // on the lattice (an upper bound of the true infimum).
    let p = exponent(2.0, 2);
    let opts = ModelOptions {
        nodes_per_axis: 60,
        ..ModelOptions::default()
    };
    for b in [0.5, 1.0, 2.0] {
        let field = MagneticMatrix::planar(b);
        let bound = neumann_lower_bound(&field).unwrap();
        let lattice = lattice_boundary_constant(&field, 0.0, 0.0, &p, &opts).unwrap().value;
        let exact = boundary_constant(&field, 0.0, 0.0, &p, &opts).unwrap().value;
        assert!(bound <= lattice + 1e-3, "b = {b}: {bound} > {lattice}");
        assert!(bound <= exact + 1e-9, "b = {b}: {bound} > {exact}");
    }
    within_budget(start, 120);
}

/// Criteria 9 and 10 share one sweep on the unit disk with
/// `V = 1 + 2|x|²` and Robin coefficient `γ = 1/2`.
#[test]
fn c09_c10_semiclassical_sweep_and_localization() {
    let start = Instant::now();
    let cfg = RunConfig::parse("dim = 2\ndomain = disk\nV = quadratic 1 2\ngamma = 0.5\np = 4\n").unwrap();
    let p = cfg.exponent().unwrap();
    let points = default_samples(&cfg.spec, 12).unwrap();
    let map = concentration_map(&cfg.spec, &points, &p, 0.25, &MapOptions::default()).unwrap();
    let hs = default_h_list();
    assert_eq!(*hs.last().unwrap(), 2f64.powi(-7));
    let opts = SweepOptions {
        truncation_lengths: cfg.settings.truncation,
        minimize: cfg.settings.minimize.clone(),
        ..Default::default()
    };
    let result = sweep(&cfg.spec, &p, &hs, &map, &opts).unwrap();
    assert!(result.rows.iter().all(|r| r.converged), "{:?}", result.rows);

    // 9: within 5% of the concentration infimum at h = 2^{−7}, |gap| monotone
    // over the last four h.
    let last = result.rows.last().unwrap();
    assert!(last.gap.abs() <= 0.05, "{last:?}");
    assert!((last.ratio / result.target - 1.0 - last.gap).abs() < 1e-12);
    let tail = &result.rows[result.rows.len() - 4..];
    for w in tail.windows(2) {
        assert!(w[1].gap.abs() < w[0].gap.abs(), "{tail:?}");
    }

    // 10: mass outside M_ε strictly decreasing, positive slope against −h^{−0.3}.
    let report = localization_report(&result.minimizers, &map, p.value(), 0.3).unwrap();
    assert!(report.strictly_decreasing, "{report:?}");
    let masses: Vec<f64> = report.rows.iter().map(|r| r.mass_outside).collect();
    assert!(masses.windows(2).all(|w| w[1] < w[0]), "{masses:?}");
    assert!(report.slope > 0.0, "{report:?}");
    within_budget(start, 30 * 60);
}

#[test]
fn c11_partition_of_unity() {
    let start = Instant::now();
    let check = partition_check(0.5, 1.0 / 3.0, 0.05, 200, 0).unwrap();
    assert!(
        check.quadratic_sum_max_error < 1e-12,
        "{}",
        check.quadratic_sum_max_error
    );
    assert!(check.ims_relative_error < 1e-10, "{}", check.ims_relative_error);
    // h-independent D: the pointwise constant never exceeds the closed-form
    // bound and the cell constant does not grow as h decreases.
    let d = build_partition(0.5, 1.0 / 3.0, 0.05, 2, &[0.0, 0.0])
        .unwrap()
        .gradient_bound_constant();
    assert!((check.gradient_bound - d).abs() < 1e-12);
    let rows = &check.gradient_rows;
    assert!(rows.len() >= 3);
    for r in rows {
        assert!(r.pointwise_constant <= d * (1.0 + 1e-12), "{r:?}");
        assert!(r.cell_constant <= rows[0].cell_constant * (1.0 + 1e-9), "{r:?}");
        assert!(r.cell_quadrature_error < 1e-10, "{r:?}");
    }
    assert_eq!(check.translation.samples, 200);
    assert!(
        check.translation.fraction >= 1.0 / 3.0 - 0.05,
        "{:?}",
        check.translation
    );
    within_budget(start, 60);
}

#[test]
fn c12_waveguide() {
    let start = Instant::now();
    let opts = WaveguideOptions::default();
    let hs: Vec<f64> = (2..=5).map(|k| 2f64.powi(-k)).collect();
    let constant = waveguide_sweep(&WidthProfile::Constant { value: 1.5 }, 4.0, &hs, &opts).unwrap();
    for r in &constant.rows {
        assert!(r.converged);
        assert!((r.ratio - 1.0).abs() < 1e-6, "{r:?}");
    }
    let bump = waveguide_sweep(&WidthProfile::parse("gaussian:1,0,1").unwrap(), 4.0, &hs, &opts).unwrap();
    for w in bump.rows.windows(2) {
        assert!((w[1].ratio - 1.0).abs() < (w[0].ratio - 1.0).abs(), "{:?}", bump.rows);
        assert!(w[1].mass_near >= w[0].mass_near, "{:?}", bump.rows);
        assert!(w[1].mass_outside < w[0].mass_outside, "{:?}", bump.rows);
    }
    assert!(bump.rows.iter().all(|r| r.converged));
    within_budget(start, 15 * 60);
}

#[test]
fn c13_boundary_attraction() {
    let start = Instant::now();
    let opts = ModelOptions::default();
    let p4 = exponent(4.0, 1);
    let r = int_bord_check(&MagneticMatrix::zero(1), 1.0, 0.0, &p4, &opts).unwrap();
    assert!((r.boundary - 0.5f64.sqrt() * r.interior).abs() < 1e-6, "{r:?}");
    assert!(r.strict_less);

    let gammas: Vec<f64> = (0..9).map(|k| -0.8 + 0.2 * k as f64).collect();
    let check = |values: &[f64]| {
        for w in values.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "{values:?}");
        }
        for w in values.windows(3) {
            assert!(w[0] - 2.0 * w[1] + w[2] <= 1e-9 * w[1].abs().max(1.0), "{values:?}");
        }
    };
    let line: Vec<f64> = gammas
        .iter()
        .map(|&g| {
            boundary_constant(&MagneticMatrix::zero(1), 1.0, g, &p4, &opts)
                .unwrap()
                .value
        })
        .collect();
    check(&line);
    let plane: Vec<f64> = gammas
        .iter()
        .map(|&g| {
            boundary_constant(&MagneticMatrix::planar(1.0), 0.5, g, &exponent(2.0, 2), &opts)
                .unwrap()
                .value
        })
        .collect();
    check(&plane);
    within_budget(start, 60);
}
