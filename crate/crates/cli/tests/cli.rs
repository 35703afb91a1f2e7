//! End-to-end runs of the binary: exit codes, report shape, determinism,
//! artifact handling.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde::Deserialize;

fn perigrid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_perigrid"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("perigrid_cli_{}_{name}", std::process::id()));
    if dir.exists() {
        std::fs::remove_dir_all(&dir).unwrap();
    }
    dir
}

#[derive(Deserialize)]
struct Report {
    command: String,
    inputs: BTreeMap<String, String>,
    metrics: BTreeMap<String, f64>,
    artifacts: Vec<String>,
    version: String,
}

fn parse_report(out: &Output) -> Report {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is a report")
}

#[test]
fn coarea_reports_an_exact_identity() {
    let out = perigrid(&["coarea", "--domain", "square", "--level", "6"]);
    let rep = parse_report(&out);
    assert_eq!(rep.command, "coarea");
    assert_eq!(rep.inputs["function"], "ramp");
    assert!(rep.metrics["rel_err"] <= 1e-9);
    assert!(rep.metrics["tv"] > 0.0);
    assert!(rep.artifacts.is_empty());
    assert!(!rep.version.is_empty());
}

#[test]
fn identical_invocations_print_identical_bytes() {
    let args = ["jordan", "--domain", "slit_disk", "--level", "6"];
    let first = perigrid(&args);
    let second = perigrid(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn unknown_names_are_usage_errors() {
    for args in [
        vec!["gallery", "--domain", "pentagon", "--level", "5"],
        vec!["extend", "--domain", "disk", "--level", "5", "--set", "top-third"],
        vec!["smooth", "--domain", "disk", "--level", "5", "--function", "sine"],
        vec!["verify", "--suite", "everything"],
        vec!["sweep", "--cmd", "verify", "--levels", "5", "--domain", "disk"],
        vec!["sweep", "--cmd", "coarea", "--levels", "x", "--domain", "disk"],
    ] {
        let out = perigrid(&args);
        assert_eq!(out.status.code(), Some(2), "args: {args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn module_violations_exit_one() {
    // The comb has no representation this coarse; the builder refuses.
    let out = perigrid(&["extend", "--domain", "comb_4_2", "--level", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn gallery_writes_mask_and_metadata_and_respects_force() {
    let dir = scratch_dir("gallery");
    let dirs = dir.to_str().unwrap();
    let args = ["gallery", "--domain", "disk", "--level", "5", "--out", dirs];
    let rep = parse_report(&perigrid(&args));
    assert_eq!(rep.artifacts.len(), 2);
    assert!(rep.artifacts[0].ends_with("disk_L5.pbm"));

    let mask = perigrid::io::load_mask(rep.artifacts[0].as_ref()).unwrap();
    assert_eq!(mask.count() as f64, rep.metrics["cells"]);

    // A second run must refuse to replace the files, then obey --force.
    let refused = perigrid(&args);
    assert_eq!(refused.status.code(), Some(2));
    let mut forced: Vec<&str> = args.to_vec();
    forced.push("--force");
    assert!(perigrid(&forced).status.success());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn sweep_merges_levels_in_order_whatever_the_thread_cap() {
    let dir_a = scratch_dir("sweep_a");
    let dir_b = scratch_dir("sweep_b");
    let run = |dir: &PathBuf, threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_perigrid"))
            .args([
                "sweep", "--cmd", "coarea", "--domain", "square", "--levels", "6,4,5",
                "--out", dir.to_str().unwrap(),
            ])
            .env("GMT_THREADS", threads)
            .output()
            .expect("binary runs");
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let serial = run(&dir_a, "1");
    let parallel = run(&dir_b, "4");

    let csv_a = std::fs::read_to_string(dir_a.join("sweep_coarea_square.csv")).unwrap();
    let csv_b = std::fs::read_to_string(dir_b.join("sweep_coarea_square.csv")).unwrap();
    assert_eq!(csv_a, csv_b);
    let levels: Vec<&str> =
        csv_a.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(levels, ["4", "5", "6"]);

    // The reports differ only in the out path, which is part of the echo.
    let strip = |bytes: &[u8], dir: &str| String::from_utf8_lossy(bytes).replace(dir, "OUT");
    assert_eq!(
        strip(&serial, dir_a.to_str().unwrap()),
        strip(&parallel, dir_b.to_str().unwrap())
    );
    std::fs::remove_dir_all(&dir_a).unwrap();
    std::fs::remove_dir_all(&dir_b).unwrap();
}

#[test]
fn bad_thread_cap_is_a_usage_error() {
    let dir = scratch_dir("threads");
    let out = Command::new(env!("CARGO_BIN_EXE_perigrid"))
        .args([
            "sweep", "--cmd", "coarea", "--domain", "square", "--levels", "4",
            "--out", dir.to_str().unwrap(),
        ])
        .env("GMT_THREADS", "zero")
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_runs_the_suites_and_reports_counts() {
    let out = perigrid(&["verify", "--count", "4", "--level", "5", "--seed", "11"]);
    let rep = parse_report(&out);
    assert_eq!(rep.metrics["coarea_checks"], 4.0);
    assert_eq!(rep.metrics["whitney_checks"], 4.0);
    assert_eq!(rep.metrics["jordan_checks"], 4.0);
    assert!(rep.metrics["density_checks"] > 0.0);
}

#[test]
fn extend_reports_the_documented_metric_set() {
    let out = perigrid(&["extend", "--domain", "comb_4_2", "--level", "7"]);
    let rep = parse_report(&out);
    for key in ["constant", "overlap_length", "perimeter_in", "perimeter_out"] {
        assert!(rep.metrics.contains_key(key), "missing {key}");
    }
    assert!(rep.metrics["constant"] <= 10.0);
}
