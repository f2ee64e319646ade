//! Exercises the C ABI from Rust and from a C program linked against the
//! static library.

use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use semisobolev_ffi::*;

fn last_error() -> String {
    let p = ss_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn take_string(p: *mut c_char) -> String {
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { ss_string_free(p) };
    s
}

const LINE: &str = "dim = 1\ndomain = half-space\ngamma = 0\nh = 1\np = 4\nspacing = 0.02\n";

#[test]
fn scalar_constants() {
    let mut v = 0.0;
    assert_eq!(unsafe { ss_lambda_c(0.0, 4.0, &mut v) }, SsStatus::Ok);
    assert!((v - 4.0 / 6f64.sqrt()).abs() < 1e-6);
    assert_eq!(unsafe { ss_soliton_line(4.0, &mut v) }, SsStatus::Ok);
    assert!((v - 4.0 / 3f64.sqrt()).abs() < 1e-6);
    assert!((ss_linear_eigenvalue(-0.5) - 0.75).abs() < 1e-12);
    assert_eq!(unsafe { ss_de_gennes_constant(&mut v) }, SsStatus::Ok);
    assert!((v - 0.5901).abs() < 1e-3);
    assert!(ss_last_error_message().is_null());
    let version = unsafe { CStr::from_ptr(ss_version()) }.to_str().unwrap();
    assert_eq!(version, env!("CARGO_PKG_VERSION"));
}

#[test]
fn error_codes_and_messages() {
    let mut v = 0.0;
    assert_eq!(unsafe { ss_lambda_c(1.5, 4.0, &mut v) }, SsStatus::InvalidArgument);
    assert!(last_error().contains("c = 1.5"));
    assert_eq!(unsafe { ss_lambda_c(0.0, 4.0, ptr::null_mut()) }, SsStatus::NullPointer);
    assert!(last_error().contains("out"));

    let mut cfg = ptr::null_mut();
    let bad = CString::new("dim = 1\nbogus = 3\n").unwrap();
    assert_eq!(unsafe { ss_config_parse(bad.as_ptr(), &mut cfg) }, SsStatus::Config);
    assert!(last_error().contains("bogus"));
    assert!(cfg.is_null());
    let missing = CString::new("/nonexistent/file.cfg").unwrap();
    assert_eq!(unsafe { ss_config_load(missing.as_ptr(), &mut cfg) }, SsStatus::Io);
    unsafe {
        ss_config_free(ptr::null_mut());
        ss_solution_free(ptr::null_mut());
        ss_string_free(ptr::null_mut());
    }
}

#[test]
fn config_solve_roundtrip() {
    let text = CString::new(LINE).unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { ss_config_parse(text.as_ptr(), &mut cfg) }, SsStatus::Ok);

    // A rejected update leaves the handle unchanged.
    let (k, bad) = (CString::new("p").unwrap(), CString::new("1").unwrap());
    assert_eq!(
        unsafe { ss_config_set(cfg, k.as_ptr(), bad.as_ptr()) },
        SsStatus::Config
    );
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { ss_config_to_json(cfg, &mut json) }, SsStatus::Ok);
    assert!(take_string(json).contains("\"p\":\"4\""));

    let mut sol = ptr::null_mut();
    assert_eq!(unsafe { ss_solve(cfg, &mut sol) }, SsStatus::Ok);
    let mut s = SsSolveSummary::default();
    assert_eq!(unsafe { ss_solution_summary(sol, &mut s) }, SsStatus::Ok);
    assert!(s.converged && s.residual <= 1e-7);
    assert_eq!(s.dim, 1);
    // Half-line, c = 0 at h = 1 is the exact constant up to discretization.
    assert!((s.lambda - 4.0 / 6f64.sqrt()).abs() < 2e-3, "{}", s.lambda);

    let mut small = vec![0.0; 2];
    assert_eq!(
        unsafe { ss_solution_values(sol, small.as_mut_ptr(), small.as_mut_ptr(), 1) },
        SsStatus::BufferTooSmall
    );
    let (mut re, mut im) = (vec![0.0; s.nodes], vec![0.0; s.nodes]);
    assert_eq!(
        unsafe { ss_solution_values(sol, re.as_mut_ptr(), im.as_mut_ptr(), s.nodes) },
        SsStatus::Ok
    );
    assert!(re.iter().zip(&im).any(|(r, i)| r.hypot(*i) > 0.0));
    let mut xs = vec![0.0; s.nodes * s.dim];
    assert_eq!(
        unsafe { ss_solution_coords(sol, xs.as_mut_ptr(), xs.len()) },
        SsStatus::Ok
    );
    assert!(xs.windows(2).all(|w| w[1] > w[0]));

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { ss_solution_to_json(sol, &mut json) }, SsStatus::Ok);
    let doc: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
    assert_eq!(doc["config"]["domain"], "half-space");
    assert_eq!(doc["result"]["lambda"].as_f64().unwrap(), s.lambda);

    // Non-convergence still yields a handle.
    let (k, v) = (CString::new("max_iters").unwrap(), CString::new("3").unwrap());
    assert_eq!(unsafe { ss_config_set(cfg, k.as_ptr(), v.as_ptr()) }, SsStatus::Ok);
    let mut sol2 = ptr::null_mut();
    assert_eq!(unsafe { ss_solve(cfg, &mut sol2) }, SsStatus::NoConvergence);
    assert!(!sol2.is_null());
    assert!(last_error().contains("no convergence"));
    unsafe {
        ss_solution_free(sol2);
        ss_solution_free(sol);
        ss_config_free(cfg);
    }
}

#[test]
fn partition_report() {
    let mut json = ptr::null_mut();
    assert_eq!(
        unsafe { ss_partition_check(0.5, 1.0 / 3.0, 0.1, 30, 7, &mut json) },
        SsStatus::Ok
    );
    let doc: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
    assert!(doc["quadratic_sum_max_error"].as_f64().unwrap() < 1e-12);
    assert_eq!(
        unsafe { ss_partition_check(0.2, 0.3, 0.1, 30, 7, &mut json) },
        SsStatus::InvalidArgument
    );
}

/// Directory holding the static library built alongside this test binary.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let header_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    assert!(header_dir.join("semisobolev.h").exists());
    let lib = artifact_dir().join("libsemisobolev_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <math.h>
#include <stdio.h>
#include "semisobolev.h"
int main(void) {
    double v = 0.0;
    if (ss_lambda_c(0.0, 4.0, &v) != SS_STATUS_OK) return 1;
    if (fabs(v - 4.0 / sqrt(6.0)) > 1e-6) return 2;
    if (ss_lambda_c(2.0, 4.0, &v) != SS_STATUS_INVALID_ARGUMENT) return 3;
    if (ss_last_error_message() == NULL) return 4;
    SsConfig *cfg = NULL;
    if (ss_config_parse("dim = 1\ndomain = whole-space\nh = 1\np = 4\nspacing = 0.05\n", &cfg) != SS_STATUS_OK) return 5;
    SsSolution *sol = NULL;
    if (ss_solve(cfg, &sol) != SS_STATUS_OK) return 6;
    SsSolveSummary s;
    if (ss_solution_summary(sol, &s) != SS_STATUS_OK) return 7;
    printf("%.12f\n", s.lambda);
    ss_solution_free(sol);
    ss_config_free(cfg);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(&header_dir)
        .arg(&src)
        .arg(&lib)
        .args(["-o"])
        .arg(&exe)
        .args(["-lm", "-lpthread", "-ldl"])
        .status()
        .expect("a C compiler is required");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let lambda: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!((lambda - 4.0 / 3f64.sqrt()).abs() < 5e-3, "{lambda}");
}
