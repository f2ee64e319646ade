//! C ABI for the `semisobolev` library.
//!
//! Conventions:
//! * every fallible function returns an [`SsStatus`]; on failure a message is
//!   available from [`ss_last_error_message`] on the same thread;
//! * results are written through out-pointers, which must be non-null;
//! * objects are opaque handles created by `ss_*_new`/`ss_*_parse`/`ss_solve`
//!   and released by the matching `ss_*_free` (null is accepted and ignored);
//! * strings returned to the caller are released with [`ss_string_free`];
//! * panics never cross the boundary; they are reported as [`SsStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use semisobolev::config::{RunConfig, Solved};
use semisobolev::discretize::GridDiagnostics;
use semisobolev::{geometry, model1d, partition, Error};

/// Status code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument was outside its domain (including non-UTF-8 strings).
    InvalidArgument = 2,
    /// A configuration key or value was rejected.
    Config = 3,
    /// A solver did not reach its tolerance.  Result handles are still written.
    NoConvergence = 4,
    /// File-system or serialization failure.
    Io = 5,
    /// A caller-provided buffer is too small.
    BufferTooSmall = 6,
    /// An internal panic was caught.
    Panic = 7,
}

/// A validated run configuration.
pub struct SsConfig {
    inner: RunConfig,
}

/// The minimizer of one solve.
pub struct SsSolution {
    inner: Solved,
    config: RunConfig,
}

/// Scalar summary of a solve.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SsSolveSummary {
    /// Minimal quotient.
    pub lambda: f64,
    /// Relative Euler–Lagrange residual.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Lattice nodes (length of the value arrays).
    pub nodes: usize,
    /// Space dimension (coordinates per node).
    pub dim: usize,
    pub h: f64,
    pub p: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<Vec<u8>>) {
    let mut bytes = message.into();
    bytes.retain(|&b| b != 0);
    let c = CString::new(bytes).expect("interior nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> SsStatus {
    match e {
        Error::NoConvergence { .. } | Error::ConvergenceFailure(_) => SsStatus::NoConvergence,
        Error::Config { .. } => SsStatus::Config,
        Error::Io(_) => SsStatus::Io,
        _ => SsStatus::InvalidArgument,
    }
}

/// Run `f`, translating errors and panics into status codes.
fn guard<F: FnOnce() -> Result<SsStatus, (SsStatus, String)>>(f: F) -> SsStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(format!("internal panic: {message}"));
            SsStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (SsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null_err(name: &str) -> (SsStatus, String) {
    (SsStatus::NullPointer, format!("`{name}` is null"))
}

/// # Safety
/// `s` is null or a valid nul-terminated string.
unsafe fn read_str<'a>(s: *const c_char, name: &str) -> Result<&'a str, (SsStatus, String)> {
    if s.is_null() {
        return Err(null_err(name));
    }
    // SAFETY: non-null and nul-terminated by the caller's contract.
    unsafe { CStr::from_ptr(s) }
        .to_str()
        .map_err(|_| (SsStatus::InvalidArgument, format!("`{name}` is not UTF-8")))
}

/// # Safety
/// `out` is null or valid for a write of `T`.
unsafe fn write_out<T>(out: *mut T, value: T, name: &str) -> Result<(), (SsStatus, String)> {
    if out.is_null() {
        return Err(null_err(name));
    }
    // SAFETY: non-null and writable by the caller's contract.
    unsafe { out.write(value) };
    Ok(())
}

fn into_c_string(s: String) -> Result<*mut c_char, (SsStatus, String)> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| (SsStatus::Io, "output contains a nul byte".to_string()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn ss_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null.  The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ss_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` is null or a pointer returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ss_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: allocated by `CString::into_raw` in this crate.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Half-line Robin constant `λ_c(p)` for `|c| < 1`.
///
/// # Safety
/// `out` is valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn ss_lambda_c(c: f64, p: f64, out: *mut f64) -> SsStatus {
    guard(|| {
        let v = model1d::lambda_c(c, p).map_err(lib_err)?;
        unsafe { write_out(out, v, "out") }?;
        Ok(SsStatus::Ok)
    })
}

/// Whole-line constant `λ(ℝ, p)`, the `c → 1` limit of [`ss_lambda_c`].
///
/// # Safety
/// `out` is valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn ss_soliton_line(p: f64, out: *mut f64) -> SsStatus {
    guard(|| {
        let v = model1d::soliton_line(p).map_err(lib_err)?;
        unsafe { write_out(out, v, "out") }?;
        Ok(SsStatus::Ok)
    })
}

/// Bottom of the spectrum of the linear half-line Robin operator.
#[no_mangle]
pub extern "C" fn ss_linear_eigenvalue(c: f64) -> f64 {
    model1d::linear_eigenvalue(c)
}

/// The de Gennes constant `Θ₀`.
///
/// # Safety
/// `out` is valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn ss_de_gennes_constant(out: *mut f64) -> SsStatus {
    guard(|| {
        let v = geometry::de_gennes_constant().map_err(lib_err)?;
        unsafe { write_out(out, v, "out") }?;
        Ok(SsStatus::Ok)
    })
}

/// Parse configuration text (`key = value` lines) into a new handle.
///
/// # Safety
/// `text` is a nul-terminated string; `out` is valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ss_config_parse(text: *const c_char, out: *mut *mut SsConfig) -> SsStatus {
    guard(|| {
        let text = unsafe { read_str(text, "text") }?;
        let inner = RunConfig::parse(text).map_err(lib_err)?;
        unsafe { write_out(out, Box::into_raw(Box::new(SsConfig { inner })), "out") }?;
        Ok(SsStatus::Ok)
    })
}

/// Load a configuration file into a new handle.
///
/// # Safety
/// `path` is a nul-terminated string; `out` is valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ss_config_load(path: *const c_char, out: *mut *mut SsConfig) -> SsStatus {
    guard(|| {
        let path = unsafe { read_str(path, "path") }?;
        let inner = RunConfig::load(Path::new(path)).map_err(lib_err)?;
        unsafe { write_out(out, Box::into_raw(Box::new(SsConfig { inner })), "out") }?;
        Ok(SsStatus::Ok)
    })
}

/// Set one key and re-validate.  On failure the handle is unchanged.
///
/// # Safety
/// `config` is a live handle; `key` and `value` are nul-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn ss_config_set(config: *mut SsConfig, key: *const c_char, value: *const c_char) -> SsStatus {
    guard(|| {
        // SAFETY: live handle by contract.
        let config = unsafe { config.as_mut() }.ok_or_else(|| null_err("config"))?;
        let key = unsafe { read_str(key, "key") }?;
        let value = unsafe { read_str(value, "value") }?;
        let mut file = config.inner.file.clone();
        file.set(key, value);
        config.inner = RunConfig::from_file(file).map_err(lib_err)?;
        Ok(SsStatus::Ok)
    })
}

/// Resolved configuration as JSON (`key → value`), released with [`ss_string_free`].
///
/// # Safety
/// `config` is a live handle; `out` is valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ss_config_to_json(config: *const SsConfig, out: *mut *mut c_char) -> SsStatus {
    guard(|| {
        let config = unsafe { config.as_ref() }.ok_or_else(|| null_err("config"))?;
        let text = serde_json::to_string(&config.inner.file.entries).map_err(|e| (SsStatus::Io, e.to_string()))?;
        unsafe { write_out(out, into_c_string(text)?, "out") }?;
        Ok(SsStatus::Ok)
    })
}

/// Release a configuration handle.
///
/// # Safety
/// `config` is null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ss_config_free(config: *mut SsConfig) {
    if !config.is_null() {
        // SAFETY: allocated by `Box::into_raw` in this crate.
        drop(unsafe { Box::from_raw(config) });
    }
}

/// Minimize the quotient of the configured geometry (`h` and `p` must be set).
/// Returns [`SsStatus::NoConvergence`] when the residual tolerance was not
/// met; the solution handle is written in that case too.
///
/// # Safety
/// `config` is a live handle; `out` is valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ss_solve(config: *const SsConfig, out: *mut *mut SsSolution) -> SsStatus {
    guard(|| {
        let config = unsafe { config.as_ref() }.ok_or_else(|| null_err("config"))?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        let mut run = config.inner.clone();
        let inner = run.solve().map_err(lib_err)?;
        let converged = inner.result.converged;
        let message = format!(
            "no convergence after {} iterations (residual {:e})",
            inner.result.iterations, inner.result.el_residual
        );
        unsafe { write_out(out, Box::into_raw(Box::new(SsSolution { inner, config: run })), "out") }?;
        if converged {
            Ok(SsStatus::Ok)
        } else {
            Err((SsStatus::NoConvergence, message))
        }
    })
}

/// Scalar summary of a solution.
///
/// # Safety
/// `solution` is a live handle; `out` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ss_solution_summary(solution: *const SsSolution, out: *mut SsSolveSummary) -> SsStatus {
    guard(|| {
        let s = unsafe { solution.as_ref() }.ok_or_else(|| null_err("solution"))?;
        let r = &s.inner.result;
        let summary = SsSolveSummary {
            lambda: r.lambda,
            residual: r.el_residual,
            iterations: r.iterations,
            converged: r.converged,
            nodes: s.inner.grid.len(),
            dim: s.inner.grid.dim,
            h: s.inner.h,
            p: s.inner.p,
        };
        unsafe { write_out(out, summary, "out") }?;
        Ok(SsStatus::Ok)
    })
}

/// Copy the minimizer into `re[0..len)` and `im[0..len)`; `len` must be at
/// least the node count.  Nodes outside the domain hold zero.
///
/// # Safety
/// `solution` is a live handle; `re` and `im` are valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn ss_solution_values(
    solution: *const SsSolution,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> SsStatus {
    guard(|| {
        let s = unsafe { solution.as_ref() }.ok_or_else(|| null_err("solution"))?;
        if re.is_null() || im.is_null() {
            return Err(null_err(if re.is_null() { "re" } else { "im" }));
        }
        let values = &s.inner.result.psi.values;
        if len < values.len() {
            return Err((
                SsStatus::BufferTooSmall,
                format!("need {} entries, got {len}", values.len()),
            ));
        }
        // SAFETY: both buffers hold at least `values.len()` doubles.
        let (re, im) = unsafe {
            (
                std::slice::from_raw_parts_mut(re, values.len()),
                std::slice::from_raw_parts_mut(im, values.len()),
            )
        };
        for ((r, i), v) in re.iter_mut().zip(im.iter_mut()).zip(values) {
            *r = v.re;
            *i = v.im;
        }
        Ok(SsStatus::Ok)
    })
}

/// Copy node coordinates, row-major `nodes × dim`, into `xs[0..len)`.
///
/// # Safety
/// `solution` is a live handle; `xs` is valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn ss_solution_coords(solution: *const SsSolution, xs: *mut f64, len: usize) -> SsStatus {
    guard(|| {
        let s = unsafe { solution.as_ref() }.ok_or_else(|| null_err("solution"))?;
        if xs.is_null() {
            return Err(null_err("xs"));
        }
        let grid = &s.inner.grid;
        let need = grid.len() * grid.dim;
        if len < need {
            return Err((SsStatus::BufferTooSmall, format!("need {need} entries, got {len}")));
        }
        // SAFETY: the buffer holds at least `need` doubles.
        let xs = unsafe { std::slice::from_raw_parts_mut(xs, need) };
        for (n, chunk) in xs.chunks_exact_mut(grid.dim).enumerate() {
            chunk.copy_from_slice(&grid.coords(n));
        }
        Ok(SsStatus::Ok)
    })
}

/// Solution report as JSON (resolved config, scalars, grid diagnostics),
/// released with [`ss_string_free`].
///
/// # Safety
/// `solution` is a live handle; `out` is valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ss_solution_to_json(solution: *const SsSolution, out: *mut *mut c_char) -> SsStatus {
    guard(|| {
        let s = unsafe { solution.as_ref() }.ok_or_else(|| null_err("solution"))?;
        let doc = serde_json::json!({
            "config": s.config.file.entries,
            "result": s.inner.result,
            "grid": GridDiagnostics::of(&s.inner.grid, Some(&s.inner.form)),
        });
        let text = serde_json::to_string_pretty(&doc).map_err(|e| (SsStatus::Io, e.to_string()))?;
        unsafe { write_out(out, into_c_string(text)?, "out") }?;
        Ok(SsStatus::Ok)
    })
}

/// Release a solution handle.
///
/// # Safety
/// `solution` is null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ss_solution_free(solution: *mut SsSolution) {
    if !solution.is_null() {
        // SAFETY: allocated by `Box::into_raw` in this crate.
        drop(unsafe { Box::from_raw(solution) });
    }
}

/// Run the two-scale partition checks; the JSON report is released with
/// [`ss_string_free`].
///
/// # Safety
/// `out` is valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ss_partition_check(
    alpha: f64,
    rho: f64,
    h: f64,
    samples: usize,
    seed: u64,
    out: *mut *mut c_char,
) -> SsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        let check = partition::partition_check(alpha, rho, h, samples, seed).map_err(lib_err)?;
        let text = serde_json::to_string_pretty(&check).map_err(|e| (SsStatus::Io, e.to_string()))?;
        unsafe { write_out(out, into_c_string(text)?, "out") }?;
        Ok(SsStatus::Ok)
    })
}
