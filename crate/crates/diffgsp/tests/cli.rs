use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_diffgsp"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env("RUST_LOG", "off").output().expect("binary runs")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn missing_config_is_a_data_error_naming_the_path() {
    let o = run(&["bench", "--config", "missing.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.cfg"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["embed", "--input", "x.csv"]).status.code(), Some(1));
    assert_eq!(run(&["embed", "--input", "x.csv", "--sigma", "1", "--sigma-median"]).status.code(), Some(1));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let v = run(&["--version"]);
    assert_eq!(v.status.code(), Some(0));
    let text = String::from_utf8_lossy(&v.stdout);
    assert!(text.contains(env!("CARGO_PKG_VERSION")) && text.contains("format 1"), "{text}");
}

#[test]
fn embed_matches_golden_bytes() {
    let input = fixture("toy.csv");
    let args = ["embed", "--input", input.to_str().unwrap(), "--sigma-median", "--t", "1", "--l", "2"];
    let first = run(&args);
    assert!(first.status.success(), "{}", stderr(&first));
    let golden = fs::read(fixture("toy_embed_golden.csv")).unwrap();
    assert_eq!(first.stdout, golden);
    assert_eq!(run(&args).stdout, first.stdout);
    let body = String::from_utf8(first.stdout).unwrap();
    assert!(body.lines().skip(2).all(|l| l.split(',').count() == 2));
}

#[test]
fn embed_truncation_too_large_is_usage() {
    let input = fixture("toy.csv");
    let o = run(&["embed", "--input", input.to_str().unwrap(), "--sigma", "1", "--l", "8"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn embed_bgh_runs() {
    let input = fixture("toy.csv");
    let o = run(&["embed", "--input", input.to_str().unwrap(), "--sigma-bgh", "--l", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let body = String::from_utf8(o.stdout).unwrap();
    assert!(body.starts_with("# t = 1, l = 3, sigma = "));
}

#[test]
fn lattice_identity_single_frame_is_delta() {
    let o = run(&["demo-lattice", "--side", "5", "--t-max", "0", "--filter", "identity"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let body = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = body.lines().skip(1).collect();
    assert_eq!(rows.len(), 25);
    for r in rows {
        let f: Vec<&str> = r.split(',').collect();
        assert_eq!(f[0], "0");
        let expected = if f[1] == "2" && f[2] == "2" { 1.0 } else { 0.0 };
        let v: f64 = f[3].parse().unwrap();
        assert!((v - expected).abs() < 1e-12, "{r}");
    }
}

#[test]
fn check_gso_and_filter_on_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.csv");
    fs::write(&graph, "i,j,weight\n0,1,1\n1,2,0.5\n2,3,1\n3,0,0.25\n0,2,0.75\n").unwrap();
    let report = dir.path().join("report.csv");
    for gso in ["a", "l", "p", "dm"] {
        let o = run(&[
            "check-gso",
            "--graph",
            graph.to_str().unwrap(),
            "--gso",
            gso,
            "--probes",
            "50",
            "--output",
            report.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{gso}: {}", stderr(&o));
        let text = fs::read_to_string(&report).unwrap();
        assert!(text.starts_with("property,residual,pass\n"));
        assert!(text.lines().any(|l| l.starts_with("linearity,") && l.ends_with(",true")), "{text}");
    }
    let signals = dir.path().join("x.csv");
    fs::write(&signals, "a,b,c,d\n1,0,0,0\n0.5,0.5,-1,2\n").unwrap();
    let o = run(&[
        "filter",
        "--graph",
        graph.to_str().unwrap(),
        "--signals",
        signals.to_str().unwrap(),
        "--gso",
        "l",
        "--filter",
        "identity",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let body = String::from_utf8(o.stdout).unwrap();
    let second: Vec<f64> = body.lines().nth(2).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    for (a, b) in second.iter().zip([0.5, 0.5, -1.0, 2.0]) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn filter_with_wrong_width_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.csv");
    fs::write(&graph, "i,j,weight\n0,1,1\n1,2,1\n").unwrap();
    let signals = dir.path().join("x.csv");
    fs::write(&signals, "a,b\n1,2\n").unwrap();
    let o = run(&["filter", "--graph", graph.to_str().unwrap(), "--signals", signals.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn markov_filter_pole_is_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.csv");
    fs::write(&graph, "i,j,weight\n0,1,1\n1,2,1\n2,0,1\n").unwrap();
    let signals = dir.path().join("x.csv");
    fs::write(&signals, "a,b,c\n1,2,3\n").unwrap();
    let o = run(&[
        "filter",
        "--graph",
        graph.to_str().unwrap(),
        "--signals",
        signals.to_str().unwrap(),
        "--gso",
        "p",
        "--filter",
        "tikhonov",
        "--tikhonov-sign",
        "minus",
        "--tau",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn learn_writes_edge_list_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("learned.csv");
    let o = run(&[
        "learn",
        "--coords",
        &data("stations.csv"),
        "--signals",
        &data("temperatures.csv"),
        "--gso",
        "dm",
        "--filter",
        "tikhonov",
        "--tau",
        "0.5",
        "--t",
        "1",
        "--method",
        "mv",
        "--max-iters",
        "200",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let edges = fs::read_to_string(&out).unwrap();
    assert!(edges.starts_with("i,j,weight\n"));
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    assert!(meta["iterations"].as_u64().unwrap() <= 200);
    assert!(meta["constraint_violation"].as_f64().unwrap() < 1e-6);
}

#[test]
fn bench_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("b.cfg");
    fs::write(&cfg, "n = 8\nm_signals = 40\ngso_list = A,DM\ntau_grid = 0.5\nmax_iters = 50\noutput_dir = nowhere\n")
        .unwrap();
    let out = dir.path().join("out");
    let o = run(&[
        "--seed",
        "3",
        "bench",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "gso_list=L",
        "--jobs",
        "1",
        "--output-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(table.lines().count(), 2);
    assert!(table.lines().nth(1).unwrap().starts_with("synthetic,L,0.5,1,"));
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("results.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"].as_u64(), Some(3));
    assert_eq!(meta["format_version"].as_u64(), Some(1));
}

#[test]
fn bench_bad_override_is_usage() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("b.cfg");
    fs::write(&cfg, "n = 8\n").unwrap();
    let o = run(&["bench", "--config", cfg.to_str().unwrap(), "--set", "bogus=1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["bench", "--config", cfg.to_str().unwrap(), "--set", "tau_grid=3"]);
    assert_eq!(o.status.code(), Some(1));
}
