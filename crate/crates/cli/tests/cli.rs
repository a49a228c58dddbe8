use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn crflab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crflab")).args(args).current_dir(cwd).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn repo(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel).to_string_lossy().into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL_FLOW: &str = r#"
seed = 4
[chart]
n = 2
resolution = 16
[metric]
kind = "random"
[flow]
t0 = 2.0
t_end = 0.2
[monitors]
schwarz = true
"#;

#[test]
fn usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&crflab(&["frobnicate"], dir.path())), 64);
    assert_eq!(code(&crflab(&["max-time", "--bogus"], dir.path())), 64);
    assert_eq!(code(&crflab(&[], dir.path())), 64);
    assert_eq!(code(&crflab(&["--help"], dir.path())), 0);
}

#[test]
fn max_time_hopf_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mt");
    let o = crflab(&["max-time", "--data", &repo("data/surfaces/hopf.toml"), "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("not Inoue"), "{stdout}");
    let r = json(&out.join("result.json"));
    assert_eq!(r["t_max"], 0.5);
    assert_eq!(r["case"], "b");
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["subcommand"], "max-time");
    assert_eq!(m["input_hash"].as_str().unwrap().len(), 64);

    let inf = crflab(&["max-time", "--data", &repo("data/surfaces/inoue.toml"), "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(code(&inf), 0);
    assert_eq!(json(&out.join("result.json"))["t_max"], "inf");
}

#[test]
fn max_time_flag_contradiction_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(repo("data/surfaces/blowup_minus_one.toml"))
        .unwrap()
        .replace("minimal = false", "minimal = true");
    let p = dir.path().join("bad.toml");
    std::fs::write(&p, text).unwrap();
    let o = crflab(&["max-time", "--data", p.to_str().unwrap(), "--out", "o"], dir.path());
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn default_output_directory_is_keyed_by_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = crflab(&["hopf-explicit", "--n", "2", "--t", "0.25", "--points", "10"], dir.path());
    assert_eq!(code(&o), 0);
    let runs: Vec<_> = std::fs::read_dir(dir.path().join("runs")).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(runs.len(), 1);
    let name = runs[0].file_name().unwrap().to_string_lossy().into_owned();
    assert!(name.starts_with("hopf-explicit-"), "{name}");
    assert!(runs[0].join("manifest.json").exists());
    let o2 = crflab(&["hopf-explicit", "--n", "2", "--t", "0.2", "--points", "10"], dir.path());
    assert_eq!(code(&o2), 0);
    assert_eq!(std::fs::read_dir(dir.path().join("runs")).unwrap().count(), 2);
}

#[test]
fn hopf_explicit_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = crflab(&["hopf-explicit", "--n", "2", "--t", "0.25", "--points", "100", "--out", "h"], dir.path());
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("[0.5, 1.0]"));
    let csv = std::fs::read_to_string(dir.path().join("h/hopf_explicit.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 101);
    for line in &lines[1..] {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((cells[4] - 0.5).abs() < 1e-12 && (cells[5] - 1.0).abs() < 1e-12);
    }
    let bad = crflab(&["hopf-explicit", "--n", "2", "--t", "0.5", "--out", "h"], dir.path());
    assert_eq!(code(&bad), 2);
}

#[test]
fn hopf_verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    for n in ["2", "3"] {
        let o = crflab(&["hopf-verify", "--n", n, "--out", "v"], dir.path());
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    }
}

#[test]
fn verify_identities_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = crflab(&["verify-identities", "--chart", "torus2", "--resolution", "64", "--seed", "7", "--out", "a"], dir.path());
    assert_eq!(code(&o), 0);
    let report = std::fs::read_to_string(dir.path().join("a/identities.txt")).unwrap();
    assert_eq!(report.lines().count(), 10);
    assert!(report.lines().all(|l| l.ends_with("status=pass")));
    // 16 points per axis cannot resolve the random data to the pinned tolerances.
    let coarse = crflab(&["verify-identities", "--resolution", "16", "--out", "b"], dir.path());
    assert_eq!(code(&coarse), 3);
}

#[test]
fn run_flow_is_bitwise_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("small.toml");
    std::fs::write(&sc, SMALL_FLOW).unwrap();
    let s = sc.to_str().unwrap();
    assert_eq!(code(&crflab(&["run-flow", "--scenario", s, "--out", "r1"], dir.path())), 0);
    assert_eq!(code(&crflab(&["run-flow", "--scenario", s, "--out", "r2"], dir.path())), 0);
    let a = std::fs::read(dir.path().join("r1/trajectory.csv")).unwrap();
    let b = std::fs::read(dir.path().join("r2/trajectory.csv")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
    let summary = json(&dir.path().join("r1/summary.json"));
    assert_eq!(summary["termination"], "reached-end");
    assert!(summary["max_q1_increase"].as_f64().unwrap() <= 1e-8);
    let o = crflab(&["run-flow", "--scenario", s, "--seed", "5", "--out", "r3"], dir.path());
    assert_eq!(code(&o), 0);
    assert_ne!(std::fs::read(dir.path().join("r3/trajectory.csv")).unwrap(), a);
}

#[test]
fn run_normalized_resumes_from_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("n.toml");
    let text = SMALL_FLOW.replace("t_end = 0.2", "t_end = 0.2\nmode = \"normalized\"\nreference = \"acknowledged\"");
    std::fs::write(&sc, text).unwrap();
    let s = sc.to_str().unwrap();
    let o = crflab(&["run-normalized", "--scenario", s, "--checkpoint-every", "5", "--out", "n1"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let ck = dir.path().join("n1/checkpoint.ckpt");
    assert!(ck.exists());
    let o = crflab(&["run-normalized", "--scenario", s, "--resume", ck.to_str().unwrap(), "--out", "n2"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = json(&dir.path().join("n2/summary.json"));
    assert!((summary["t"].as_f64().unwrap() - 0.2).abs() < 1e-12);
    // A volume reference is degenerate on a torus.
    let strict = SMALL_FLOW.replace("t_end = 0.2", "t_end = 0.2\nreference = \"volume\"");
    std::fs::write(&sc, strict).unwrap();
    assert_eq!(code(&crflab(&["run-normalized", "--scenario", s, "--out", "n3"], dir.path())), 2);
}

#[test]
fn numerical_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("pd.toml");
    std::fs::write(&sc, format!("{SMALL_FLOW}\n[flow.step]\neps_pd = 5.0\n").replace("[monitors]\nschwarz = true\n", ""))
        .unwrap();
    let o = crflab(&["run-flow", "--scenario", sc.to_str().unwrap(), "--out", "f"], dir.path());
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("positivity lost"));
}

#[test]
fn scenario_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("bad.toml");
    std::fs::write(&sc, format!("{SMALL_FLOW}\nunknown_key = 1\n")).unwrap();
    assert_eq!(code(&crflab(&["run-flow", "--scenario", sc.to_str().unwrap(), "--out", "x"], dir.path())), 2);
    assert_eq!(code(&crflab(&["run-flow", "--scenario", "missing.toml", "--out", "x"], dir.path())), 2);
    std::fs::write(&sc, SMALL_FLOW.replace("t_end = 0.2", "t_end = 3.0")).unwrap();
    assert_eq!(code(&crflab(&["run-flow", "--scenario", sc.to_str().unwrap(), "--out", "x"], dir.path())), 2);
}

#[test]
fn solve_ma_manufactured() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("ma.toml");
    std::fs::write(
        &sc,
        "seed = 2\n[chart]\nn = 1\nresolution = 64\n[metric]\nkind = \"random\"\n[elliptic.manufactured]\nkind = \"random\"\namplitude = 0.3\n",
    )
    .unwrap();
    let s = sc.to_str().unwrap();
    for method in ["newton-continuation", "gill-flow"] {
        let o = crflab(&["solve-ma", "--scenario", s, "--method", method, "--tolerance", "1e-9", "--out", method], dir.path());
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let sol = json(&dir.path().join(method).join("solution.json"));
        assert!(sol["manufactured_error"].as_f64().unwrap() < 1e-7, "{sol}");
        assert!(dir.path().join(method).join("phi.snap").exists());
        let est = std::fs::read_to_string(dir.path().join(method).join("estimates.csv")).unwrap();
        assert_eq!(est.lines().count(), 6);
    }
    let o = crflab(&["solve-ma", "--scenario", s, "--method", "multigrid", "--out", "m"], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn plot_outputs_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("small.toml");
    std::fs::write(&sc, SMALL_FLOW).unwrap();
    assert_eq!(code(&crflab(&["run-flow", "--scenario", sc.to_str().unwrap(), "--out", "r"], dir.path())), 0);
    let csv = dir.path().join("r/trajectory.csv");
    let c = csv.to_str().unwrap();
    assert_eq!(code(&crflab(&["plot", "--csv", c, "--columns", "volume,max_q1", "--out", "p1"], dir.path())), 0);
    assert_eq!(code(&crflab(&["plot", "--csv", c, "--columns", "volume,max_q1", "--out", "p2"], dir.path())), 0);
    let a = std::fs::read(dir.path().join("p1/plot.svg")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("p2/plot.svg")).unwrap());
    assert!(String::from_utf8_lossy(&a).contains("<polyline"));
    assert_eq!(code(&crflab(&["plot", "--csv", c, "--columns", "nope", "--out", "p3"], dir.path())), 2);
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(code(&crflab(&["plot", "--csv", empty.to_str().unwrap(), "--columns", "volume", "--out", "p4"], dir.path())), 2);
}
