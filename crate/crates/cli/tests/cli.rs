use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn cpslab(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cpslab"));
    cmd.args(args).env_remove("CPSLAB_THREADS");
    cmd
}

fn run(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn cpslab");
    assert!(
        out.status.success(),
        "cpslab failed: {}\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn write_spec(dir: &Path, body: &str) -> String {
    let path = dir.join("spec.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

const CPS_SPEC: &str = r#"{"model": "CPS", "kappa": 4, "n_sites": 400, "seed": 9, "t_max": 8,
    "replicas": 3, "analyses": ["densities", "audit", {"rate_fit": {"t_min": 1, "t_max": 8}}]}"#;

#[test]
fn simulate_writes_artifacts_and_is_reproducible() {
    let tmp = TempDir::new().unwrap();
    let spec = write_spec(tmp.path(), CPS_SPEC);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let out = run(cpslab(&["simulate", "--spec", &spec, "--out", a.to_str().unwrap()]).env("CPSLAB_THREADS", "1"));
    run(cpslab(&["simulate", "--spec", &spec, "--out", b.to_str().unwrap()]).env("CPSLAB_THREADS", "4"));

    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("ledger balanced"), "{stdout}");
    for name in ["densities.csv", "fits.json", "events.csv", "audit.json"] {
        assert_eq!(read(&a, name), read(&b, name), "{name} differs between thread counts");
    }
    let summary_a: serde_json::Value = serde_json::from_slice(&read(&a, "summary.json")).unwrap();
    let summary_b: serde_json::Value = serde_json::from_slice(&read(&b, "summary.json")).unwrap();
    assert_eq!(summary_a["summary"], summary_b["summary"]);
    let densities = String::from_utf8(read(&a, "densities.csv")).unwrap();
    assert!(densities.starts_with("t,p,q,r,"));
    let summary: serde_json::Value = serde_json::from_slice(&read(&a, "summary.json")).unwrap();
    assert_eq!(summary["spec"]["replicas"], 3);
}

#[test]
fn seed_flag_changes_output() {
    let tmp = TempDir::new().unwrap();
    let spec = write_spec(tmp.path(), CPS_SPEC);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    run(&mut cpslab(&["simulate", "--spec", &spec, "--out", a.to_str().unwrap()]));
    run(&mut cpslab(&["simulate", "--spec", &spec, "--seed", "10", "--out", b.to_str().unwrap()]));
    assert_ne!(read(&a, "densities.csv"), read(&b, "densities.csv"));
}

#[test]
fn cca_raster_is_a_p6_image() {
    let tmp = TempDir::new().unwrap();
    let spec = write_spec(
        tmp.path(),
        r#"{"model": "CCA", "kappa": 3, "n_sites": 64, "seed": 2, "t_max": 20, "raster": true, "write_snapshots": true}"#,
    );
    let out = tmp.path().join("run");
    run(&mut cpslab(&["cca", "--spec", &spec, "--out", out.to_str().unwrap()]));
    let ppm = read(&out, "raster.ppm");
    let header_end = ppm.iter().enumerate().filter(|&(_, &b)| b == b'\n').nth(2).unwrap().0 + 1;
    let header = std::str::from_utf8(&ppm[..header_end]).unwrap();
    let dims: Vec<usize> = header.lines().nth(1).unwrap().split(' ').map(|s| s.parse().unwrap()).collect();
    assert!(header.starts_with("P6\n"));
    assert_eq!(dims[0], 64);
    assert_eq!(ppm.len() - header_end, 3 * dims[0] * dims[1]);

    // render from the written snapshots reproduces the raster
    let rendered = tmp.path().join("again.ppm");
    let snaps = out.join("snapshots.jsonl");
    run(&mut cpslab(&["render", "--input", snaps.to_str().unwrap(), "--out", rendered.to_str().unwrap()]));
    assert_eq!(fs::read(rendered).unwrap(), ppm);
}

#[test]
fn ba_with_one_velocity_never_collides() {
    let tmp = TempDir::new().unwrap();
    let spec = write_spec(tmp.path(), r#"{"model": "BA", "n_sites": 500, "seed": 4, "t_max": 30, "velocities": [1]}"#);
    let out = tmp.path().join("run");
    run(&mut cpslab(&["ba", "--spec", &spec, "--out", out.to_str().unwrap()]));
    let events = String::from_utf8(read(&out, "events.csv")).unwrap();
    assert_eq!(events.trim_end(), "time,position,left,right");
}

#[test]
fn flags_without_spec() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let o = run(&mut cpslab(&[
        "simulate",
        "--kappa",
        "3",
        "--n-sites",
        "200",
        "--t-max",
        "3",
        "--replicas",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("replicas") && stdout.contains('2'), "{stdout}");
    assert!(out.join("densities.csv").exists());
}

#[test]
fn bad_specs_are_rejected() {
    let tmp = TempDir::new().unwrap();
    let cases = [
        ("{\"model\": ", "malformed spec JSON"),
        (r#"{"model": "CCA", "analyses": ["audit"]}"#, "audit"),
        (r#"{"model": "CPS", "kappa": 3, "n_sites": 10, "t_max": 1}"#, "seed"),
        (r#"{"model": "CPS", "kappa": 3, "n_sites": 10, "seed": 1, "t_max": 1, "colour": 2}"#, "colour"),
    ];
    for (body, needle) in cases {
        let spec = write_spec(tmp.path(), body);
        let o = cpslab(&["simulate", "--spec", &spec]).output().unwrap();
        assert_eq!(o.status.code(), Some(2), "{body}");
        let err = String::from_utf8(o.stderr).unwrap();
        assert!(err.contains(needle), "{body}: {err}");
    }
}

#[test]
fn model_must_match_subcommand() {
    let tmp = TempDir::new().unwrap();
    let spec = write_spec(tmp.path(), CPS_SPEC);
    let o = cpslab(&["ba", "--spec", &spec]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("model BA"));
}

#[test]
fn bad_thread_count_is_an_error() {
    let tmp = TempDir::new().unwrap();
    let spec = write_spec(tmp.path(), CPS_SPEC);
    let out = tmp.path().join("run");
    let o = cpslab(&["simulate", "--spec", &spec, "--out", out.to_str().unwrap()])
        .env("CPSLAB_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn matching_reports_pairs() {
    let o = run(&mut cpslab(&["matching", "--edges", "RRLRLL.L"]));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["size"], 3);
    assert_eq!(v["formula_matched_particles"], 6);
    assert_eq!(v["brute_force_maximum"], 3);
    assert_eq!(v["pairs"][0], serde_json::json!([0, 5]));

    let bad = cpslab(&["matching", "--edges", "RXL"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn rate_fit_reads_densities() {
    let tmp = TempDir::new().unwrap();
    let csv = tmp.path().join("densities.csv");
    let mut body = String::from("t,p,q,r,n_edges,n_replicas,se_r\n");
    for t in [1.0f64, 2.0, 4.0, 8.0, 16.0] {
        let r = 0.5 * t.powf(-0.5);
        body.push_str(&format!("{t},{r},0,{r},1000,1,0\n"));
    }
    fs::write(&csv, body).unwrap();
    let o = run(&mut cpslab(&["rate-fit", "--input", csv.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let alpha = v[0]["alpha"].as_f64().unwrap();
    assert!((alpha - 0.5).abs() < 1e-9, "{alpha}");
    assert!(tmp.path().join("fits.json").exists());
}

#[test]
fn verify_fast_suite_passes() {
    let tmp = TempDir::new().unwrap();
    let report = tmp.path().join("report.json");
    let o = run(&mut cpslab(&["verify", "--suite", "fast", "--out", report.to_str().unwrap()]));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("all checks passed"), "{stdout}");
    let v: serde_json::Value = serde_json::from_slice(&fs::read(report).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
}
