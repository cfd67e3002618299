//! End-to-end tests of the `heatsym` binary: subcommands, exit codes, and
//! file outputs.

use std::path::Path;
use std::process::Command;

fn heatsym() -> Command {
    Command::new(env!("CARGO_BIN_EXE_heatsym"))
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

fn run_config(out: &Path) -> String {
    format!(
        "\
scheme.family = linear_invariant
initial.kind = fundamental
initial.c = 1.0
initial.t0 = 10.0
initial.x_min = -10.0
initial.x_max = 10.0
initial.nodes = 21
boundary.kind = exact
steps.count = 20
steps.tau_policy = fixed
steps.tau = 0.05
output.dir = {}
output.emit = csv,svg,summary
",
        out.display()
    )
}

#[test]
fn run_writes_outputs_and_reproduces_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = dir.path().join("run.cfg");
    write(&cfg, &run_config(&out));

    let status = heatsym().arg("run").arg(&cfg).status().unwrap();
    assert!(status.success());
    for file in ["layers.csv", "solution.svg", "mesh.svg", "summary.txt"] {
        assert!(out.join(file).exists(), "{file} missing");
    }
    let first = std::fs::read(out.join("layers.csv")).unwrap();
    let summary1 = std::fs::read(out.join("summary.txt")).unwrap();

    let status = heatsym().arg("run").arg(&cfg).status().unwrap();
    assert!(status.success());
    assert_eq!(std::fs::read(out.join("layers.csv")).unwrap(), first);
    assert_eq!(std::fs::read(out.join("summary.txt")).unwrap(), summary1);
}

#[test]
fn output_dir_env_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    write(&cfg, &run_config(&dir.path().join("ignored")));
    let override_dir = dir.path().join("override");
    let status = heatsym()
        .arg("run")
        .arg(&cfg)
        .env("HEATSYM_OUT_DIR", &override_dir)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(override_dir.join("layers.csv").exists());
    assert!(!dir.path().join("ignored").exists());
}

#[test]
fn parse_error_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    write(
        &cfg,
        "scheme.family = linear_invariant\nthis is not a pair\n",
    );
    let status = heatsym().arg("run").arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_1() {
    // A deep valley with a huge time step drives the invariant model's R
    // negative: the step is rejected, never clamped.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("reject.cfg");
    write(
        &cfg,
        &format!(
            "\
scheme.family = linear_invariant
initial.kind = inline
initial.xs = -1, 0, 1
initial.us = 1, 1e-6, 1
boundary.kind = hold
steps.count = 1
steps.tau_policy = fixed
steps.tau = 10
output.dir = {}
output.emit = csv
",
            dir.path().join("out").display()
        ),
    );
    let out = heatsym().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("step rejected"), "stderr: {msg}");
}

#[test]
fn compare_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_a = dir.path().join("a.cfg");
    let cfg_b = dir.path().join("b.cfg");
    write(&cfg_a, &run_config(&dir.path().join("a-out")));
    write(
        &cfg_b,
        &run_config(&dir.path().join("b-out")).replace(
            "scheme.family = linear_invariant",
            "scheme.family = linear_orthogonal",
        ),
    );
    let cmp_dir = dir.path().join("cmp");
    let out = heatsym()
        .arg("compare")
        .arg(&cfg_a)
        .arg(&cfg_b)
        .arg("--output")
        .arg(&cmp_dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(cmp_dir.join("comparison.csv").exists());
    assert!(cmp_dir.join("error.svg").exists());
    let table = std::fs::read_to_string(cmp_dir.join("comparison.csv")).unwrap();
    assert!(table.starts_with("t,err_a,err_b,ratio"));
    assert!(table.lines().count() > 2);
}

#[test]
fn check_mesh_prints_table_and_rejects_unknown_set() {
    let out = heatsym().arg("check-mesh").arg("linear").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("X3"));
    assert!(text.contains("false"));

    let out = heatsym().arg("check-mesh").arg("bogus").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invariants_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let stencil = dir.path().join("stencil.txt");
    write(
        &stencil,
        "t = 0\nt_hat = 1\nx = 0\nx_hat = 0\nh_plus = 1\nh_minus = 1\n\
         h_hat_plus = 1\nh_hat_minus = 1\nu = 1\nu_plus = 1\nu_minus = 1\n\
         u_hat = 1\nu_hat_plus = 1\nu_hat_minus = 1\n",
    );
    let out = heatsym()
        .arg("invariants")
        .arg("powerlaw")
        .arg(&stencil)
        .args(["--sigma", "2", "--n", "3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("I1 = 1.0000000000000000e0"));
    assert!(text.lines().count() == 7);

    // Malformed stencil file: usage error.
    write(&stencil, "u = not-a-number\n");
    let out = heatsym()
        .arg("invariants")
        .arg("linear")
        .arg(&stencil)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exact_subcommand() {
    let out = heatsym()
        .arg("exact")
        .arg("fundamental")
        .args(["--eval", "1", "0", "--c", "1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("= 1.0000000000000000e0"));

    // Outside the domain: numerical failure.
    let out = heatsym()
        .arg("exact")
        .arg("fundamental")
        .args(["--eval", "0", "0", "--c", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = heatsym()
        .arg("exact")
        .arg("semilinear")
        .args([
            "--eval",
            "0.1",
            "2.0",
            "--alpha",
            "1",
            "--f0",
            "0.5",
            "--delta",
            "1",
            "--tau-step",
            "0.02",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
}
