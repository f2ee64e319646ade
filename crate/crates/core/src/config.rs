//! Key–value run configuration.
//!
//! One `key = value` pair per line; `#` starts a comment.  Recognized keys:
//!
//! | key          | value                                                         |
//! |--------------|---------------------------------------------------------------|
//! | `dim`        | `1` or `2`                                                    |
//! | `domain`     | `whole-space`, `half-space`, `rectangle`, `disk`, `strip`     |
//! | `radius`     | disk radius (default 1)                                       |
//! | `center`     | disk center `x,y` (default `0,0`)                             |
//! | `lo`, `hi`   | rectangle corners, comma-separated                            |
//! | `half_width` | strip half-width (default 1)                                  |
//! | `truncation` | truncation half-width for unbounded domains, in units of `√h` |
//! | `spacing`    | lattice spacing (default `min(0.02, √h/15)`)                  |
//! | `V`          | `constant v` · `quadratic base coeff [cx,cy]` · `axis base coeff k` |
//! | `B`          | `0` · `constant b` · `quadratic base coeff [cx,cy]` (planar strength) |
//! | `gamma`      | `dirichlet` · a number · `angular-bump base amp angle width` · `quadratic …` · `axis …` |
//! | `p`, `h`     | exponent and semiclassical parameter                          |
//! | `seed`, `restarts`, `max_iters`, `grad_tol` | minimizer options              |
//! | `epsilon`    | radius of the localization neighbourhood `M_ε`                |

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use crate::asymptotics::sweep_spacing;
use crate::discretize::{assemble_shared, build_grid, AssembledForm, Grid, Truncation};
use crate::error::{Error, Result};
use crate::geometry::ExponentP;
use crate::geometry::{BoundaryCondition, Domain, GeometrySpec, Magnetic, MagneticMatrix, ScalarField};
use crate::minimize::{minimize_quotient, MinimizeOptions, MinimizerResult};

/// Keys accepted in a configuration file.
pub const KNOWN_KEYS: &[&str] = &[
    "dim",
    "domain",
    "radius",
    "center",
    "lo",
    "hi",
    "half_width",
    "truncation",
    "spacing",
    "V",
    "B",
    "gamma",
    "p",
    "h",
    "seed",
    "restarts",
    "max_iters",
    "grad_tol",
    "epsilon",
];

/// Raw `key → value` pairs.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ConfigFile {
    pub entries: BTreeMap<String, String>,
}

fn config_error(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_error(&format!("line {}", no + 1), "expected `key = value`"))?;
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(config_error(key, format!("unknown key (line {})", no + 1)));
            }
            if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(config_error(key, format!("duplicate key (line {})", no + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn number(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|v| parse_number(key, v)).transpose()
    }

    pub fn integer(&self, key: &str) -> Result<Option<u64>> {
        self.get(key)
            .map(|v| {
                v.parse::<u64>()
                    .map_err(|_| config_error(key, format!("`{v}` is not a non-negative integer")))
            })
            .transpose()
    }

    fn vector(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key).map(|v| parse_vector(key, v)).transpose()
    }

    /// Set `key` unless already present (used to record resolved defaults).
    pub fn set_default(&mut self, key: &str, value: impl ToString) {
        self.entries.entry(key.to_string()).or_insert_with(|| value.to_string());
    }

    /// Override `key` (command-line flags win over the file).
    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }
}

fn parse_number(key: &str, text: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| config_error(key, format!("`{text}` is not a finite number")))
}

fn parse_vector(key: &str, text: &str) -> Result<Vec<f64>> {
    text.split(',').map(|t| parse_number(key, t)).collect()
}

/// Scalar-field grammar shared by `V`, `B` and `gamma`.
fn parse_scalar(key: &str, text: &str, dim: usize) -> Result<ScalarField> {
    let words: Vec<&str> = text.split_whitespace().collect();
    let num = |i: usize| -> Result<f64> {
        words
            .get(i)
            .ok_or_else(|| config_error(key, format!("`{text}`: missing argument {i}")))
            .and_then(|w| parse_number(key, w))
    };
    let arity = |n: usize| -> Result<()> {
        if words.len() > n {
            Err(config_error(key, format!("`{text}`: too many arguments")))
        } else {
            Ok(())
        }
    };
    match words.first().copied() {
        None => Err(config_error(key, "empty value")),
        Some("constant") => {
            arity(2)?;
            Ok(ScalarField::Constant(num(1)?))
        }
        Some("quadratic") => {
            arity(4)?;
            let center = match words.get(3) {
                Some(c) => parse_vector(key, c)?,
                None => vec![0.0; dim],
            };
            if center.len() != dim {
                return Err(config_error(key, format!("center must have {dim} components")));
            }
            Ok(ScalarField::Quadratic {
                base: num(1)?,
                coeff: num(2)?,
                center,
            })
        }
        Some("axis") => {
            arity(4)?;
            let axis = num(3)?;
            if axis.fract() != 0.0 || axis < 0.0 || axis as usize >= dim {
                return Err(config_error(key, format!("axis must be an integer in 0..{dim}")));
            }
            Ok(ScalarField::Axis {
                base: num(1)?,
                coeff: num(2)?,
                axis: axis as usize,
            })
        }
        Some("angular-bump") => {
            arity(5)?;
            if dim != 2 {
                return Err(config_error(key, "angular-bump needs dim = 2"));
            }
            Ok(ScalarField::AngularBump {
                base: num(1)?,
                amplitude: num(2)?,
                angle: num(3)?,
                width: num(4)?,
                center: vec![0.0, 0.0],
            })
        }
        Some(w) if words.len() == 1 => Ok(ScalarField::Constant(parse_number(key, w)?)),
        Some(w) => Err(config_error(key, format!("unknown form `{w}`"))),
    }
}

/// Settings that are not part of the geometry.
#[derive(Debug, Clone, Serialize)]
pub struct RunSettings {
    pub p: Option<f64>,
    pub h: Option<f64>,
    pub spacing: Option<f64>,
    /// Truncation half-width in units of `√h`.
    pub truncation: f64,
    pub epsilon: Option<f64>,
    pub minimize: MinimizeOptions,
}

/// A validated geometry together with its resolved configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub file: ConfigFile,
    pub spec: GeometrySpec,
    pub settings: RunSettings,
}

impl RunConfig {
    /// Validate every key and build the geometry.  Defaults are written back
    /// into `file` so the echo of the configuration is complete.
    pub fn from_file(mut file: ConfigFile) -> Result<Self> {
        let dim = file.integer("dim")?.ok_or_else(|| config_error("dim", "missing"))? as usize;
        if !(1..=2).contains(&dim) {
            return Err(config_error("dim", "must be 1 or 2"));
        }
        let domain_name = file
            .get("domain")
            .ok_or_else(|| config_error("domain", "missing"))?
            .to_string();
        let domain = match domain_name.as_str() {
            "whole-space" => Domain::WholeSpace,
            "half-space" => Domain::HalfSpace,
            "rectangle" => {
                let lo = file
                    .vector("lo")?
                    .ok_or_else(|| config_error("lo", "missing for a rectangle"))?;
                let hi = file
                    .vector("hi")?
                    .ok_or_else(|| config_error("hi", "missing for a rectangle"))?;
                if lo.len() != dim {
                    return Err(config_error("lo", format!("must have {dim} components")));
                }
                if hi.len() != dim {
                    return Err(config_error("hi", format!("must have {dim} components")));
                }
                Domain::Rectangle { lo, hi }
            }
            "disk" => {
                file.set_default("radius", 1.0);
                file.set_default("center", "0,0");
                let radius = file.number("radius")?.unwrap_or(1.0);
                let c = file.vector("center")?.unwrap_or_else(|| vec![0.0, 0.0]);
                if c.len() != 2 {
                    return Err(config_error("center", "must have 2 components"));
                }
                Domain::Disk {
                    center: [c[0], c[1]],
                    radius,
                }
            }
            "strip" => {
                file.set_default("half_width", 1.0);
                Domain::Strip {
                    half_width: file.number("half_width")?.unwrap_or(1.0),
                }
            }
            other => return Err(config_error("domain", format!("unknown domain `{other}`"))),
        };
        file.set_default("V", "constant 1");
        file.set_default("B", "0");
        file.set_default("gamma", "0");
        let potential = parse_scalar("V", file.get("V").unwrap_or("constant 1"), dim)?;
        let b_text = file.get("B").unwrap_or("0").to_string();
        let magnetic = match b_text.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["0"] | ["zero"] => Magnetic::Zero,
            _ if dim != 2 => return Err(config_error("B", "magnetic fields need dim = 2")),
            ["constant", b] => Magnetic::constant(MagneticMatrix::planar(parse_number("B", b)?)),
            _ => Magnetic::Planar {
                strength: parse_scalar("B", &b_text, dim)?,
                gauge_origin: vec![0.0; dim],
            },
        };
        let gamma_text = file.get("gamma").unwrap_or("0").to_string();
        let boundary = if gamma_text == "dirichlet" {
            BoundaryCondition::Dirichlet
        } else {
            let mut gamma = parse_scalar("gamma", &gamma_text, dim)?;
            if let (ScalarField::AngularBump { center, .. }, Domain::Disk { center: c, .. }) = (&mut gamma, &domain) {
                *center = c.to_vec();
            }
            BoundaryCondition::Robin(gamma)
        };
        let spec = GeometrySpec::new(dim, domain, potential, magnetic, boundary)
            .map_err(|e| config_error("domain", e.to_string()))?;

        let positive = |key: &str, v: Option<f64>| -> Result<Option<f64>> {
            match v {
                Some(x) if !(x > 0.0) => Err(config_error(key, "must be positive")),
                other => Ok(other),
            }
        };
        let defaults = MinimizeOptions::default();
        file.set_default("truncation", 10.0);
        file.set_default("seed", defaults.seed);
        file.set_default("restarts", defaults.restarts);
        file.set_default("max_iters", defaults.max_iters);
        file.set_default("grad_tol", defaults.grad_tol);
        let minimize = MinimizeOptions {
            seed: file.integer("seed")?.unwrap_or(defaults.seed),
            restarts: file.integer("restarts")?.map_or(defaults.restarts, |v| v as usize),
            max_iters: file.integer("max_iters")?.map_or(defaults.max_iters, |v| v as usize),
            grad_tol: positive("grad_tol", file.number("grad_tol")?)?.unwrap_or(defaults.grad_tol),
            ..defaults
        };
        let p = file.number("p")?;
        if let Some(p) = p {
            if p < 2.0 {
                return Err(config_error("p", "must be at least 2"));
            }
        }
        let settings = RunSettings {
            p,
            h: positive("h", file.number("h")?)?,
            spacing: positive("spacing", file.number("spacing")?)?,
            truncation: positive("truncation", file.number("truncation")?)?.unwrap_or(10.0),
            epsilon: positive("epsilon", file.number("epsilon")?)?,
            minimize,
        };
        Ok(Self { file, spec, settings })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_file(ConfigFile::load(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_file(ConfigFile::parse(text)?)
    }

    /// Re-validate with `h`, `p` and `seed` replaced by the given values.
    pub fn with_overrides(self, h: Option<f64>, p: Option<f64>, seed: Option<u64>) -> Result<Self> {
        if h.is_none() && p.is_none() && seed.is_none() {
            return Ok(self);
        }
        let mut file = self.file;
        if let Some(h) = h {
            file.set("h", h);
        }
        if let Some(p) = p {
            file.set("p", p);
        }
        if let Some(seed) = seed {
            file.set("seed", seed);
        }
        Self::from_file(file)
    }

    /// The exponent, required for every solve.
    pub fn exponent(&self) -> Result<ExponentP> {
        let p = self
            .settings
            .p
            .ok_or_else(|| config_error("p", "missing (set it in the file or pass --p)"))?;
        ExponentP::new(p, self.spec.dim)
    }

    /// Discretize at the configured `h` and minimize the quotient.  The
    /// resolved spacing is recorded in `file`.
    pub fn solve(&mut self) -> Result<Solved> {
        let h = self
            .settings
            .h
            .ok_or_else(|| config_error("h", "missing (set it in the file or pass --h)"))?;
        let p = self.exponent()?;
        let spacing = self.settings.spacing.unwrap_or_else(|| sweep_spacing(h, 0.02, 15.0));
        self.file.set_default("spacing", spacing);
        let half = self.settings.truncation * h.sqrt();
        let truncation = match self.spec.domain {
            Domain::Rectangle { .. } | Domain::Disk { .. } => None,
            Domain::HalfSpace => Some(Truncation::half_space(self.spec.dim, half)),
            _ => Some(Truncation::cube(&self.spec.center(), half)),
        };
        let grid = Arc::new(build_grid(&self.spec, spacing, truncation.as_ref())?);
        let form = assemble_shared(&self.spec, h, grid.clone())?;
        let mut opts = self.settings.minimize.clone();
        if opts.centers.is_empty() {
            opts.centers = default_centers(&self.spec, &grid, h);
        }
        let result = minimize_quotient(&form, &p, &opts)?;
        Ok(Solved {
            h,
            p: p.value(),
            spacing,
            grid,
            form,
            result,
        })
    }
}

/// Initial bump centers: the middle of the lattice plus points one length
/// scale `√h` inside the boundary, where minimizers of boundary problems sit.
fn default_centers(spec: &GeometrySpec, grid: &Grid, h: f64) -> Vec<Vec<f64>> {
    let free: Vec<Vec<f64>> = (0..grid.len())
        .filter(|&n| grid.is_free(n))
        .map(|n| grid.coords(n))
        .collect();
    let mut middle = vec![0.0; spec.dim];
    for x in &free {
        for (m, v) in middle.iter_mut().zip(x) {
            *m += v / free.len() as f64;
        }
    }
    let d = h.sqrt();
    let mut centers = vec![middle.clone()];
    match &spec.domain {
        Domain::HalfSpace => {
            let mut x = middle;
            x[0] = d;
            centers.push(x);
        }
        Domain::Disk { center, radius } => {
            let r = (radius - d).max(0.5 * radius);
            for k in 0..4 {
                let t = std::f64::consts::FRAC_PI_2 * k as f64;
                centers.push(vec![center[0] + r * t.cos(), center[1] + r * t.sin()]);
            }
        }
        Domain::Rectangle { lo, hi } => {
            for axis in 0..spec.dim {
                let inset = d.min(0.25 * (hi[axis] - lo[axis]));
                for end in [lo[axis] + inset, hi[axis] - inset] {
                    let mut x = middle.clone();
                    x[axis] = end;
                    centers.push(x);
                }
            }
        }
        Domain::Strip { half_width } => {
            for end in [-1.0, 1.0] {
                let mut x = middle.clone();
                x[1] = end * (half_width - d.min(0.5 * half_width));
                centers.push(x);
            }
        }
        _ => {}
    }
    centers
}

/// Outcome of [`RunConfig::solve`].
#[derive(Debug, Clone)]
pub struct Solved {
    pub h: f64,
    pub p: f64,
    pub spacing: f64,
    pub grid: Arc<Grid>,
    pub form: AssembledForm,
    pub result: MinimizerResult,
}

#[cfg(test)]
mod tests {
    use super::*;

    const DISK: &str = "# unit disk\ndim = 2\ndomain = disk\nV = quadratic 1 2\ngamma = 0.5 # Robin\n";

    #[test]
    fn parses_disk_and_records_defaults() {
        let cfg = RunConfig::parse(DISK).unwrap();
        assert!(matches!(cfg.spec.domain, Domain::Disk { radius, .. } if radius == 1.0));
        assert_eq!(cfg.spec.potential.eval(&[1.0, 0.0]), 3.0);
        assert_eq!(cfg.spec.robin_at(&[1.0, 0.0]), Some(0.5));
        assert_eq!(cfg.file.get("B"), Some("0"));
        assert_eq!(cfg.file.get("radius"), Some("1"));
        assert_eq!(cfg.settings.minimize.restarts, MinimizeOptions::default().restarts);
    }

    #[test]
    fn magnetic_and_dirichlet() {
        let cfg =
            RunConfig::parse("dim=2\ndomain=half-space\nB = constant 1.5\ngamma = dirichlet\nV = axis 0 1 0").unwrap();
        assert!(matches!(cfg.spec.boundary, BoundaryCondition::Dirichlet));
        assert!((cfg.spec.magnetic.field_at(&[0.0, 1.0]).get(0, 1) - 1.5).abs() < 1e-15);
        let cfg = RunConfig::parse("dim=2\ndomain=disk\ngamma = angular-bump 0 -0.5 0 0.3").unwrap();
        assert!(cfg.spec.robin_at(&[1.0, 0.0]).unwrap() < -0.49);
    }

    #[test]
    fn errors_name_the_offending_key() {
        let cases = [
            ("dim = 2\ndomain = disk\ncolour = red", "colour"),
            ("domain = disk", "dim"),
            ("dim = 3\ndomain = disk", "dim"),
            ("dim = 2\ndomain = torus", "domain"),
            ("dim = 2\ndomain = rectangle\nlo = 0,0", "hi"),
            ("dim = 2\ndomain = disk\nV = cubic 1", "V"),
            ("dim = 1\ndomain = half-space\nB = constant 1", "B"),
            ("dim = 2\ndomain = disk\ngamma = angular-bump 1 2", "gamma"),
            ("dim = 2\ndomain = disk\ngrad_tol = -1", "grad_tol"),
            ("dim = 2\ndomain = disk\np = 1.5", "p"),
            ("dim = 2\ndomain = disk\ndim = 1", "dim"),
            ("dim = 2\ndomain = disk\nradius", "line 3"),
        ];
        for (text, key) in cases {
            match RunConfig::parse(text) {
                Err(Error::Config { key: k, .. }) => assert_eq!(k, key, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }
}
