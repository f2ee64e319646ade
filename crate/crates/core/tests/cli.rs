//! Runs the `semisobolev` binary end to end.

use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semisobolev"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

const DISK: &str = "# variable potential on the unit disk\n\
                    dim = 2\n\
                    domain = disk\n\
                    V = quadratic 1 2\n\
                    gamma = 0.5\n";

#[test]
fn model1d_sweep_writes_increasing_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["model1d", "--p", "4", "--sweep", "-0.9:0.9:19", "--out", "m.csv"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1, "one-line summary: {stderr}");
    let text = std::fs::read_to_string(dir.path().join("m.csv")).unwrap();
    assert!(text.lines().any(|l| l.starts_with("# p = ")));
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let lambdas: Vec<f64> = reader.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    assert_eq!(lambdas.len(), 19);
    assert!(lambdas.windows(2).all(|w| w[1] > w[0]), "{lambdas:?}");
    // Only the output file remains: the temporary file was renamed.
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn solve_reports_residual_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("disk.cfg"), DISK).unwrap();
    let args = [
        "solve", "--config", "disk.cfg", "--h", "0.0625", "--p", "4", "--seed", "3",
    ];
    let a = run(dir.path(), &[&args[..], &["--out", "a.json"]].concat());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = run(dir.path(), &[&args[..], &["--out", "b.json"]].concat());
    assert!(b.status.success());
    let ja = std::fs::read(dir.path().join("a.json")).unwrap();
    let jb = std::fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(ja, jb, "identical config and seed must give identical bytes");

    let doc: serde_json::Value = serde_json::from_slice(&ja).unwrap();
    assert_eq!(doc["command"], "solve");
    let result = &doc["result"];
    assert!(result["el_residual"].as_f64().unwrap() <= 1e-7);
    assert!(result["converged"].as_bool().unwrap());
    assert!(result["lambda"].as_f64().unwrap() > 0.0);
    // The resolved configuration is echoed, including defaults.
    let config = &doc["config"];
    for key in [
        "h",
        "p",
        "seed",
        "spacing",
        "radius",
        "grad_tol",
        "max_iters",
        "restarts",
        "B",
    ] {
        assert!(config.get(key).is_some(), "missing `{key}` in {config}");
    }
    assert_eq!(config["seed"], "3");
}

#[test]
fn non_convergence_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("disk.cfg"),
        format!("{DISK}max_iters = 3\nrestarts = 1\n"),
    )
    .unwrap();
    let out = run(
        dir.path(),
        &[
            "solve", "--config", "disk.cfg", "--h", "0.0625", "--p", "4", "--out", "x.json",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(dir.path().join("x.json").exists(), "the result is still written");
}

#[test]
fn validation_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let unknown_flag = run(dir.path(), &["model1d", "--p", "4", "--sweep", "0:0.5:3", "--bogus"]);
    assert_eq!(unknown_flag.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&unknown_flag.stderr).contains("Usage"));

    std::fs::write(dir.path().join("bad.cfg"), "dim = 2\ndomain = disk\nradius = -1\n").unwrap();
    let bad = run(dir.path(), &["solve", "--config", "bad.cfg", "--h", "0.1", "--p", "4"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("radius"));

    std::fs::write(dir.path().join("typo.cfg"), "dim = 2\ndomian = disk\n").unwrap();
    let typo = run(dir.path(), &["solve", "--config", "typo.cfg", "--h", "0.1", "--p", "4"]);
    assert_eq!(typo.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&typo.stderr).contains("domian"));

    let bad_p = run(dir.path(), &["model1d", "--p", "1.5", "--sweep", "0:0.5:3"]);
    assert_eq!(bad_p.status.code(), Some(1));
    assert!(!dir.path().join("out.csv").exists());

    let help = run(dir.path(), &["--help"]);
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn partition_and_waveguide_tables_echo_config() {
    let dir = tempfile::tempdir().unwrap();
    let part = run(
        dir.path(),
        &[
            "partition-check",
            "--h",
            "0.1",
            "--samples",
            "40",
            "--seed",
            "2",
            "--out",
            "p.json",
        ],
    );
    assert!(part.status.success(), "{}", String::from_utf8_lossy(&part.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("p.json")).unwrap()).unwrap();
    assert_eq!(doc["config"]["seed"], 2);
    assert!(doc["result"]["quadratic_sum_max_error"].as_f64().unwrap() < 1e-12);

    let wg = run(
        dir.path(),
        &[
            "waveguide",
            "--profile",
            "constant:1.3",
            "--h-list",
            "2^-2,2^-3",
            "--out",
            "w.csv",
        ],
    );
    assert!(wg.status.success(), "{}", String::from_utf8_lossy(&wg.stderr));
    let text = std::fs::read_to_string(dir.path().join("w.csv")).unwrap();
    assert!(text.contains("# options = ") && text.contains("\"spacing\""));
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let ratios: Vec<f64> = reader.records().map(|r| r.unwrap()[3].parse().unwrap()).collect();
    assert_eq!(ratios.len(), 2);
    assert!(ratios.iter().all(|r| (r - 1.0).abs() < 1e-6), "{ratios:?}");

    let ld = run(
        dir.path(),
        &[
            "large-domain",
            "--dim",
            "1",
            "--p",
            "4",
            "--R-list",
            "2,4",
            "--format",
            "json",
        ],
    );
    assert!(ld.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&ld.stdout).unwrap();
    assert_eq!(doc["result"].as_array().unwrap().len(), 2);
}
