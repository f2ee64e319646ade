//! Command-line front end.
//!
//! Every subcommand resolves its configuration completely, runs one library
//! operation, writes its output atomically (temporary file + rename) or to
//! standard output, and prints a one-line summary on standard error.
//! Exit codes: 0 success, 1 validation error, 2 solver non-convergence.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::asymptotics::{
    default_h_list, fit_correction, large_domain, localization_report, sweep, LargeDomainOptions, SweepOptions,
};
use crate::config::RunConfig;
use crate::discretize::{write_wavefunction_csv, GridDiagnostics};
use crate::error::{Error, Result};
use crate::geometry::ExponentP;
use crate::minimize::MinimizeOptions;
use crate::model1d::lambda_c_report;
use crate::models::{concentration_map, default_samples, ConcentrationMap, MapOptions};
use crate::partition::partition_check;
use crate::waveguide::{waveguide_sweep, WaveguideOptions, WidthProfile};

/// Exit code for validation and input errors.
pub const EXIT_INVALID: i32 = 1;
/// Exit code for solver non-convergence.
pub const EXIT_NO_CONVERGENCE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "semisobolev",
    version,
    about = "Optimal Sobolev constants of electro-magnetic Robin Laplacians"
)]
struct Cli {
    /// Seed of every stochastic component (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Half-line Robin constants λ_c(p) over a sweep of c.
    Model1d {
        #[arg(long)]
        p: f64,
        /// `start:end:count`, endpoints included.
        #[arg(long, allow_hyphen_values = true)]
        sweep: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Minimize the quotient of a configured geometry at one h.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the minimizer as CSV.
        #[arg(long)]
        wavefunction: Option<PathBuf>,
    },
    /// Sample the concentration function x ↦ λ(G_x, 1, p).
    Concentration {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        p: Option<f64>,
        /// Sample points per axis.
        #[arg(long, default_value_t = 12)]
        samples: usize,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Semiclassical sweep against the infimum of the concentration function.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        p: Option<f64>,
        /// Comma-separated, strictly decreasing (default 2^-2,…,2^-7).
        #[arg(long = "h-list")]
        h_list: Option<String>,
        #[arg(long, default_value_t = 12)]
        samples: usize,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Exponent of the localization fit log m vs −h^{−ρ}.
        #[arg(long, default_value_t = 0.3)]
        rho: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Large Neumann domains through the semiclassical reformulation.
    LargeDomain {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        p: f64,
        /// Comma-separated radii.
        #[arg(long = "R-list")]
        r_list: String,
        /// Also solve directly on the dilated domain.
        #[arg(long)]
        direct: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Verify the two-scale partition identities and bounds.
    PartitionCheck {
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0 / 3.0)]
        rho: f64,
        #[arg(long, default_value_t = 0.05)]
        h: f64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shrinking-waveguide sweep of the reduced quotient.
    Waveguide {
        /// `gaussian:A,s0,w`, `cosine[:A,s0,w]`, `constant:a` or `table:file.csv`.
        #[arg(long)]
        profile: String,
        #[arg(long, default_value_t = 4.0)]
        p: f64,
        /// Comma-separated, strictly decreasing (default 2^-2,…,2^-5).
        #[arg(long = "h-list")]
        h_list: Option<String>,
        /// Lattice spacing in the stretched variables.
        #[arg(long)]
        spacing: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

/// Outcome of a command: output text, summary and whether every solve converged.
struct Report {
    text: String,
    summary: String,
    converged: bool,
}

/// Run the CLI on `args` (including the program name) and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Map a library error to an exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoConvergence { .. } | Error::ConvergenceFailure(_) => EXIT_NO_CONVERGENCE,
        _ => EXIT_INVALID,
    }
}

fn execute(cli: Cli) -> Result<i32> {
    let seed = cli.seed;
    let (report, out) = match cli.command {
        Command::Model1d { p, sweep, out, format } => (cmd_model1d(p, &sweep, format)?, out),
        Command::Solve {
            config,
            h,
            p,
            out,
            wavefunction,
        } => (cmd_solve(&config, h, p, seed, wavefunction.as_deref())?, out),
        Command::Concentration {
            config,
            p,
            samples,
            epsilon,
            out,
        } => (cmd_concentration(&config, p, samples, epsilon, seed)?, out),
        Command::Sweep {
            config,
            p,
            h_list,
            samples,
            epsilon,
            rho,
            out,
            format,
        } => (
            cmd_sweep(&config, p, h_list.as_deref(), samples, epsilon, rho, seed, format)?,
            out,
        ),
        Command::LargeDomain {
            dim,
            p,
            r_list,
            direct,
            out,
            format,
        } => (cmd_large_domain(dim, p, &r_list, direct, seed, format)?, out),
        Command::PartitionCheck {
            alpha,
            rho,
            h,
            samples,
            out,
        } => (cmd_partition(alpha, rho, h, samples, seed)?, out),
        Command::Waveguide {
            profile,
            p,
            h_list,
            spacing,
            out,
            format,
        } => (
            cmd_waveguide(&profile, p, h_list.as_deref(), spacing, seed, format)?,
            out,
        ),
    };
    match &out {
        Some(path) => write_atomic(path, report.text.as_bytes())?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(report.text.as_bytes())?;
            stdout.flush()?;
        }
    }
    eprintln!("{}", report.summary);
    Ok(if report.converged { 0 } else { EXIT_NO_CONVERGENCE })
}

/// Write `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

fn invalid(message: impl Into<String>) -> Error {
    Error::InvalidArgument(message.into())
}

/// Parse a comma-separated list of numbers; `2^-k` is accepted.
pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            let v = match t.split_once('^') {
                Some((b, e)) => b.parse::<f64>().ok().zip(e.parse::<i32>().ok()).map(|(b, e)| b.powi(e)),
                None => t.parse::<f64>().ok(),
            };
            v.filter(|v| v.is_finite())
                .ok_or_else(|| invalid(format!("`{t}` is not a number")))
        })
        .collect()
}

/// Parse `start:end:count` into `count` equally spaced values.
pub fn parse_range(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || invalid(format!("`{text}` is not start:end:count"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    match n {
        0 => Err(bad()),
        1 => Ok(vec![a]),
        _ => Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()),
    }
}

/// CSV text with `# key = value` lines recording the configuration.
fn csv_text(config: &Value, header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut out = String::new();
    if let Value::Object(map) = config {
        for (k, v) in map {
            let v = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("# {k} = {v}\n"));
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    out.push_str(&String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))?);
    Ok(out)
}

fn json_text<T: Serialize>(command: &str, config: &Value, result: &T) -> Result<String> {
    let doc = json!({ "command": command, "config": config, "result": result });
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn cmd_model1d(p: f64, sweep_text: &str, format: Format) -> Result<Report> {
    let cs = parse_range(sweep_text)?;
    let reports = cs.iter().map(|&c| lambda_c_report(c, p)).collect::<Result<Vec<_>>>()?;
    let config = json!({ "p": p, "sweep": sweep_text, "samples": cs.len() });
    let text = match format {
        Format::Csv => csv_text(
            &config,
            &["c", "lambda", "t_escape", "limit"],
            &reports
                .iter()
                .map(|r| vec![num(r.c), num(r.lambda), num(r.t_escape), r.limit.to_string()])
                .collect::<Vec<_>>(),
        )?,
        Format::Json => json_text("model1d", &config, &reports)?,
    };
    Ok(Report {
        summary: format!("model1d: {} values of λ_c for p = {p}", reports.len()),
        text,
        converged: true,
    })
}

/// Load a config and apply command-line overrides.
fn load_config(path: &Path, h: Option<f64>, p: Option<f64>, seed: Option<u64>) -> Result<RunConfig> {
    RunConfig::load(path)?.with_overrides(h, p, seed)
}

fn config_value(cfg: &RunConfig) -> Value {
    serde_json::to_value(&cfg.file.entries).unwrap_or(Value::Null)
}

fn cmd_solve(
    path: &Path,
    h: Option<f64>,
    p: Option<f64>,
    seed: Option<u64>,
    wavefunction: Option<&Path>,
) -> Result<Report> {
    let mut cfg = load_config(path, h, p, seed)?;
    let solved = cfg.solve()?;
    let (grid, form, result) = (&solved.grid, &solved.form, &solved.result);
    if let Some(wpath) = wavefunction {
        let mut buf = Vec::new();
        write_wavefunction_csv(&mut buf, grid, &result.psi)?;
        write_atomic(wpath, &buf)?;
    }
    let center = crate::asymptotics::localization_center(grid, &result.psi, solved.p);
    let body = json!({
        "lambda": result.lambda,
        "el_residual": result.el_residual,
        "iterations": result.iterations,
        "converged": result.converged,
        "method": result.method,
        "restart_values": result.restart_values,
        "center": center,
        "grid": GridDiagnostics::of(grid, Some(form)),
        "minimize": cfg.settings.minimize,
    });
    Ok(Report {
        text: json_text("solve", &config_value(&cfg), &body)?,
        summary: format!(
            "solve: λ = {:.10} (residual {:.2e}, {} iterations{})",
            result.lambda,
            result.el_residual,
            result.iterations,
            if result.converged { "" } else { ", NOT converged" }
        ),
        converged: result.converged,
    })
}

fn build_map(cfg: &RunConfig, p: &ExponentP, samples: usize, epsilon: f64) -> Result<ConcentrationMap> {
    let points = default_samples(&cfg.spec, samples)?;
    let opts = MapOptions {
        model: crate::models::ModelOptions {
            minimize: MinimizeOptions {
                seed: cfg.settings.minimize.seed,
                ..crate::models::ModelOptions::default().minimize
            },
            ..Default::default()
        },
        ..Default::default()
    };
    concentration_map(&cfg.spec, &points, p, epsilon, &opts)
}

fn cmd_concentration(
    path: &Path,
    p: Option<f64>,
    samples: usize,
    epsilon: Option<f64>,
    seed: Option<u64>,
) -> Result<Report> {
    let mut cfg = load_config(path, None, p, seed)?;
    let p = cfg.exponent()?;
    let epsilon = epsilon.or(cfg.settings.epsilon).unwrap_or(0.25);
    cfg.file.set("epsilon", epsilon);
    cfg.file.set("samples", samples);
    let map = build_map(&cfg, &p, samples, epsilon)?;
    let best = map.best();
    Ok(Report {
        summary: format!(
            "concentration: inf = {:.8} at {:?} ({}), |M| = {} of {} samples",
            map.inf_value,
            best.x,
            best.kind.as_str(),
            map.argmin.len(),
            map.samples.len()
        ),
        text: json_text("concentration", &config_value(&cfg), &map)?,
        converged: true,
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    path: &Path,
    p: Option<f64>,
    h_list: Option<&str>,
    samples: usize,
    epsilon: Option<f64>,
    rho: f64,
    seed: Option<u64>,
    format: Format,
) -> Result<Report> {
    let mut cfg = load_config(path, None, p, seed)?;
    let p = cfg.exponent()?;
    let hs = match h_list {
        Some(t) => parse_list(t)?,
        None => default_h_list(),
    };
    let epsilon = epsilon.or(cfg.settings.epsilon).unwrap_or(0.25);
    cfg.file.set("epsilon", epsilon);
    cfg.file.set("samples", samples);
    cfg.file
        .set("h_list", hs.iter().map(|h| num(*h)).collect::<Vec<_>>().join(","));
    cfg.file.set("rho", rho);
    let map = build_map(&cfg, &p, samples, epsilon)?;
    let opts = SweepOptions {
        truncation_lengths: cfg.settings.truncation,
        minimize: cfg.settings.minimize.clone(),
        ..Default::default()
    };
    let result = sweep(&cfg.spec, &p, &hs, &map, &opts)?;
    let gaps: Vec<(f64, f64)> = result.rows.iter().map(|r| (r.h, r.gap)).collect();
    let fit = fit_correction(&gaps).map_err(|e| e.to_string());
    let localization = localization_report(&result.minimizers, &map, p.value(), rho).map_err(|e| e.to_string());
    let converged = result.rows.iter().all(|r| r.converged);
    let last = result.rows.last().expect("nonempty h-list");
    let summary = format!(
        "sweep: {} rows, target {:.8}, last ratio {:.8} (gap {:+.3e}){}",
        result.rows.len(),
        result.target,
        last.ratio,
        last.gap,
        if converged { "" } else { ", some rows NOT converged" }
    );
    let config = config_value(&cfg);
    let text = match format {
        Format::Csv => csv_text(
            &config,
            &[
                "h",
                "lambda",
                "ratio",
                "target",
                "gap",
                "center",
                "mass_outside",
                "spacing",
                "nodes",
                "iterations",
                "residual",
                "converged",
            ],
            &result
                .rows
                .iter()
                .map(|r| {
                    vec![
                        num(r.h),
                        num(r.lambda),
                        num(r.ratio),
                        num(r.target),
                        num(r.gap),
                        r.center.iter().map(|c| num(*c)).collect::<Vec<_>>().join(" "),
                        opt_num(r.mass_outside),
                        num(r.spacing),
                        r.nodes.to_string(),
                        r.iterations.to_string(),
                        num(r.residual),
                        r.converged.to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        )?,
        Format::Json => json_text(
            "sweep",
            &config,
            &json!({
                "sweep": result,
                "fit": fit.as_ref().ok(),
                "fit_error": fit.as_ref().err(),
                "localization": localization.as_ref().ok(),
                "localization_error": localization.as_ref().err(),
            }),
        )?,
    };
    Ok(Report {
        text,
        summary,
        converged,
    })
}

fn cmd_large_domain(
    dim: usize,
    p: f64,
    r_list: &str,
    direct: bool,
    seed: Option<u64>,
    format: Format,
) -> Result<Report> {
    let radii = parse_list(r_list)?;
    let p = ExponentP::new(p, dim)?;
    let mut opts = LargeDomainOptions {
        direct_check: direct,
        ..Default::default()
    };
    if let Some(seed) = seed {
        opts.minimize.seed = seed;
    }
    let rows = large_domain(dim, &p, &radii, &opts)?;
    let config = json!({ "dim": dim, "p": p.value(), "R_list": radii, "options": opts });
    let text = match format {
        Format::Csv => csv_text(
            &config,
            &[
                "R",
                "h",
                "lambda_semiclassical",
                "lambda_neumann",
                "lambda_direct",
                "reference",
                "ratio",
            ],
            &rows
                .iter()
                .map(|r| {
                    vec![
                        num(r.radius),
                        num(r.h),
                        num(r.lambda_semiclassical),
                        num(r.lambda_neumann),
                        opt_num(r.lambda_direct),
                        num(r.reference),
                        num(r.ratio),
                    ]
                })
                .collect::<Vec<_>>(),
        )?,
        Format::Json => json_text("large-domain", &config, &rows)?,
    };
    let last = rows.last().ok_or_else(|| invalid("empty R-list"))?;
    Ok(Report {
        text,
        summary: format!("large-domain: {} radii, last ratio {:.6}", rows.len(), last.ratio),
        converged: true,
    })
}

fn cmd_partition(alpha: f64, rho: f64, h: f64, samples: usize, seed: Option<u64>) -> Result<Report> {
    let seed = seed.unwrap_or(0);
    let check = partition_check(alpha, rho, h, samples, seed)?;
    let config = json!({ "alpha": alpha, "rho": rho, "h": h, "samples": samples, "seed": seed });
    Ok(Report {
        summary: format!(
            "partition-check: max |Σχ²−1| = {:.1e}, IMS error {:.1e}, acceptance {:.3}",
            check.quadratic_sum_max_error, check.ims_relative_error, check.translation.fraction
        ),
        text: json_text("partition-check", &config, &check)?,
        converged: true,
    })
}

fn cmd_waveguide(
    profile: &str,
    p: f64,
    h_list: Option<&str>,
    spacing: Option<f64>,
    seed: Option<u64>,
    format: Format,
) -> Result<Report> {
    let profile = WidthProfile::parse(profile)?;
    let hs = match h_list {
        Some(t) => parse_list(t)?,
        None => (2..=5).map(|k| 2f64.powi(-k)).collect(),
    };
    let mut opts = WaveguideOptions::default();
    if let Some(s) = spacing {
        opts.spacing = s;
    }
    if let Some(seed) = seed {
        opts.minimize.seed = seed;
    }
    let result = waveguide_sweep(&profile, p, &hs, &opts)?;
    let converged = result.rows.iter().all(|r| r.converged);
    let config = json!({ "profile": profile, "p": p, "h_list": hs, "options": opts });
    let text = match format {
        Format::Csv => csv_text(
            &config,
            &[
                "h",
                "lambda_reduced",
                "prediction",
                "ratio",
                "lambda_tube",
                "mass_outside",
                "mass_near",
                "physical_ratio",
                "window",
                "nodes",
                "iterations",
                "residual",
                "converged",
            ],
            &result
                .rows
                .iter()
                .map(|r| {
                    vec![
                        num(r.h),
                        num(r.lambda_reduced),
                        num(r.prediction),
                        num(r.ratio),
                        num(r.lambda_tube),
                        num(r.mass_outside),
                        num(r.mass_near),
                        num(r.physical_ratio),
                        num(r.window),
                        r.nodes.to_string(),
                        r.iterations.to_string(),
                        num(r.residual),
                        r.converged.to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        )?,
        Format::Json => json_text("waveguide", &config, &result)?,
    };
    let last = result.rows.last().expect("nonempty h-list");
    Ok(Report {
        text,
        summary: format!(
            "waveguide: λ^Dir(Σ) = {:.8}, last ratio {:.6}{}",
            result.reference.value,
            last.ratio,
            if converged { "" } else { ", some rows NOT converged" }
        ),
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_list("0.5, 2^-2,2^-3").unwrap(), vec![0.5, 0.25, 0.125]);
        assert!(parse_list("a").is_err());
        let r = parse_range("-0.9:0.9:19").unwrap();
        assert_eq!(r.len(), 19);
        assert!((r[1] + 0.8).abs() < 1e-15);
        assert!(parse_range("0:1").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["semisobolev", "--bogus"]), EXIT_INVALID);
        assert_eq!(
            run(["semisobolev", "model1d", "--p", "4", "--sweep", "0:1"]),
            EXIT_INVALID
        );
        assert_eq!(
            exit_code(&Error::NoConvergence {
                iterations: 1,
                best: 0.0,
                residual: 1.0
            }),
            EXIT_NO_CONVERGENCE
        );
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
