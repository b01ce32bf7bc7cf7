mod common;

use std::fs;
use std::io::BufReader;
use std::path::Path;
use std::process::{Command, Output};

use common::*;
use fracnet::formats::{read_edges_csv, read_nodes_csv, read_polyline_csv, read_sweep_csv, SWEEP_HEADER};
use fracnet::{line_of_sight, Family, DEFAULT_MAX_DEPTH};

fn fracnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracnet")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = fracnet(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    fracnet(args).status.code().unwrap()
}

fn open(p: &Path) -> BufReader<fs::File> {
    BufReader::new(fs::File::open(p).unwrap())
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn info_prints_the_domain_constants() {
    let out = ok(&["info", "--family", "2", "--theta", "0.7"]);
    assert!(out.contains("D      = 1.63"), "{out}");
    let json: serde_json::Value = serde_json::from_str(&ok(&["info", "--family", "3", "--theta-deg", "20", "--json"])).unwrap();
    assert_eq!(json["family"], 3);
    assert!((json["theta"].as_f64().unwrap() - 20f64.to_radians()).abs() < 1e-15);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["info", "--family", "2", "--theta", "0.9"]), 2);
    assert_eq!(code(&["info", "--family", "5", "--theta", "0.3"]), 2);
    assert_eq!(code(&["info", "--family", "3", "--theta", "-0.1"]), 2);
    assert_eq!(code(&["render", "--family", "2", "--theta", "0.4", "--level", "30"]), 3);
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&["sample", "--family", "2", "--theta", "0.4", "--rho", "-1", "--out-dir", path(dir.path())]), 2);
    let csv = dir.path().join("s.csv");
    ok(&["sweep", "--family", "2", "--theta", "0.7", "--rho", "20", "--trials", "3", "--output", path(&csv)]);
    assert_eq!(code(&["fit", "--input", path(&csv)]), 4);
    assert_eq!(code(&["check", "--input", path(&csv), "--family", "2", "--theta", "0.7"]), 4);
    assert_eq!(code(&["fit", "--input", path(&dir.path().join("missing.csv"))]), 1);
}

#[test]
fn render_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for (family, theta, n) in [("2", "0.4", 2usize), ("3", "0.5", 3)] {
        let file = dir.path().join(format!("f{family}.csv"));
        ok(&["render", "--family", family, "--theta", theta, "--level", "5", "--format", "csv", "--output", path(&file)]);
        let text = fs::read_to_string(&file).unwrap();
        assert!(text.starts_with("x,y\n"));
        let pts = read_polyline_csv(text.as_bytes()).unwrap();
        assert_eq!(pts.len(), 4 * n.pow(5) + 1);
        assert_eq!(pts[0], pts[pts.len() - 1]);
        assert!(dir.path().join(format!("f{family}.csv.manifest.json")).exists());
    }
    let svg = ok(&["render", "--family", "2", "--theta", "0.5", "--level", "3"]);
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
}

#[test]
fn sample_with_zero_density_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["sample", "--family", "3", "--theta", "0.3", "--rho", "0", "--out-dir", path(dir.path())]);
    assert_eq!(fs::read_to_string(dir.path().join("nodes.csv")).unwrap(), "id,x,y\n");
    assert_eq!(fs::read_to_string(dir.path().join("edges.csv")).unwrap(), "id_a,id_b\n");
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["node_count"], 0);
}

#[test]
fn sample_is_deterministic_and_edges_check_out() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = |d: &Path| {
        ["sample", "--family", "2", "--theta", "0.7", "--rho", "8", "--seed", "42", "--out-dir", path(d)]
            .map(String::from)
    };
    let run = |d: &Path| ok(&args(d).iter().map(String::as_str).collect::<Vec<_>>());
    run(a.path());
    run(b.path());
    for f in ["nodes.csv", "edges.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
    }
    let nodes = read_nodes_csv(open(&a.path().join("nodes.csv"))).unwrap();
    let edges = read_edges_csv(open(&a.path().join("edges.csv"))).unwrap();
    assert!(nodes.len() > 20);
    let d = domain(Family::F2, 0.7);
    assert_eq!(edges, brute_force_edges(&nodes, 1.0, |p, q| line_of_sight(&d, p, q, DEFAULT_MAX_DEPTH)));
}

#[test]
fn sample_json_format() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["sample", "--family", "3", "--theta", "0.5", "--rho", "3", "--format", "json", "--out-dir", path(dir.path())]);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("network.json")).unwrap()).unwrap();
    assert!(v["nodes"].as_array().unwrap().len() > 5);
    assert!(v["edges"].is_array());
}

#[test]
fn sweep_output_is_reproducible_and_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    fs::write(&cfg, "# small sweep\nfamily = 3\ntheta = 0.3, 0.5\nrho = 2, 6\ntrials = 30\n").unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("t{threads}.csv"));
        ok(&["--threads", threads, "sweep", "--config", path(&cfg), "--output", path(&out)]);
        outputs.push(fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs[0].clone()).unwrap();
    assert_eq!(text.lines().next().unwrap(), SWEEP_HEADER);
    let rows = read_sweep_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.trials == 30 && r.family == Family::F3));

    let rerun = dir.path().join("rerun.csv");
    ok(&["rerun", path(&dir.path().join("t1.csv.manifest.json")), "--output", path(&rerun)]);
    assert_eq!(fs::read(&rerun).unwrap(), outputs[0]);

    let flagged = dir.path().join("flag.csv");
    ok(&["sweep", "--config", path(&cfg), "--trials", "10", "--output", path(&flagged)]);
    assert!(read_sweep_csv(open(&flagged)).unwrap().iter().all(|r| r.trials == 10));
}

#[test]
fn fit_and_check_report_on_a_measurable_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("koch.csv");
    let theta = std::f64::consts::FRAC_PI_6.to_string();
    let r2 = domain(Family::F2, std::f64::consts::FRAC_PI_6).r.powi(-2);
    let mut grid = [20.0, 40.0, 80.0, 20.0 * r2, 40.0 * r2];
    grid.sort_by(f64::total_cmp);
    let rhos = grid.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
    ok(&["sweep", "--family", "2", "--theta", &theta, "--rho", &rhos, "--trials", "100", "--output", path(&csv)]);
    let fit = ok(&["fit", "--input", path(&csv)]);
    assert!(fit.contains("beta_hat") && fit.contains("D/2"), "{fit}");
    let check = ok(&["check", "--input", path(&csv), "--family", "2", "--theta", &theta]);
    let table: Vec<_> = check.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(table[0].starts_with("rho,rho_scaled,"));
    assert_eq!(table.len(), 3, "{check}");
}

#[test]
fn sample_rerun_reproduces_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    ok(&["sample", "--family", "2", "--theta", "0.4", "--rho", "5", "--seed", "9", "--out-dir", path(a.path())]);
    ok(&["rerun", path(&a.path().join("manifest.json")), "--output", path(b.path())]);
    for f in ["nodes.csv", "edges.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
    }
}
