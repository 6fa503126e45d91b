use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rcm(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rcm"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn real(v: &serde_json::Value) -> f64 {
    v.as_str().expect("reals are strings").parse().unwrap()
}

fn csv_rows(path: &Path) -> (String, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    (
        header,
        lines
            .map(|l| l.split(',').map(str::to_string).collect())
            .collect(),
    )
}

#[test]
fn rate_curve_and_phase_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = rcm(
        &[
            "rate", "--lambda", "3", "--q", "2", "--grid", "4096", "--out", "c.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let (header, rows) = csv_rows(&dir.path().join("c.csv"));
    assert_eq!(header, "theta,phi");
    assert_eq!(rows.len(), 4096);
    let best = rows
        .iter()
        .max_by(|a, b| {
            a[1].parse::<f64>()
                .unwrap()
                .total_cmp(&b[1].parse().unwrap())
        })
        .unwrap();
    assert!((best[0].parse::<f64>().unwrap() - 0.8585).abs() < 1e-3);

    let phase = json(&dir.path().join("c.phase.json"));
    assert_eq!(phase["manifest"], "c.manifest.json");
    assert!((real(&phase["theta_max"]) - 0.858_559_636_640_110_6).abs() < 1e-12);
    let manifest = json(&dir.path().join("c.manifest.json"));
    assert_eq!(manifest["subcommand"], "rate");
    assert_eq!(manifest["outputs"][0], "c.csv");
    assert_eq!(manifest["outputs"][1], "c.phase.json");
}

#[test]
fn rate_curve_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    // lambda = 1 is critical for q = 1: the curve is written, the phase point refused
    let out = rcm(
        &["rate", "--lambda", "1", "--q", "1", "--out", "a.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(!dir.path().join("a.phase.json").exists());
    let m = json(&dir.path().join("a.manifest.json"));
    assert!(m["status"]
        .as_str()
        .unwrap()
        .starts_with("phase point refused"));
    let (_, rows) = csv_rows(&dir.path().join("a.csv"));
    let sup = rows
        .iter()
        .map(|r| r[1].parse::<f64>().unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(sup.abs() < 1e-6);

    assert!(rcm(
        &["rate", "--lambda", "0.5", "--q", "2", "--out", "b.csv"],
        dir.path()
    )
    .status
    .success());
    let (_, rows) = csv_rows(&dir.path().join("b.csv"));
    let best = rows
        .iter()
        .max_by(|a, b| {
            a[1].parse::<f64>()
                .unwrap()
                .total_cmp(&b[1].parse().unwrap())
        })
        .unwrap();
    assert_eq!(best[0], "0.0");
}

#[test]
fn criticality_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = rcm(&["rate", "--lambda", "2", "--q", "2"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("critical"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        rcm(&["sample", "--n", "5"], dir.path()).status.code(),
        Some(2)
    );
    assert_eq!(rcm(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(
        rcm(&["phase", "--q", "2", "--lambda-step", "0"], dir.path())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn phase_table_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = rcm(
        &[
            "phase",
            "--q",
            "1,2,4",
            "--lambda-start",
            "0.05",
            "--lambda-stop",
            "5",
            "--lambda-step",
            "0.1",
            "--out",
            "p.csv",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (header, rows) = csv_rows(&dir.path().join("p.csv"));
    assert_eq!(header, "q,lambda,lambda_c,theta_star,theta_max,free_energy");
    let col = |r: &Vec<String>, i: usize| r[i].parse::<f64>().unwrap();
    for r in rows.iter().filter(|r| col(r, 0) == 1.0) {
        assert!(col(r, 5).abs() < 1e-12);
    }
    let first = |q: f64| {
        rows.iter()
            .filter(|r| col(r, 0) == q && col(r, 3) > 0.0)
            .map(|r| col(r, 1))
            .next()
            .unwrap()
    };
    assert!((first(4.0) - 3.0 * 3f64.ln()).abs() <= 0.1);
    let q2: Vec<_> = rows.iter().filter(|r| col(r, 0) == 2.0).collect();
    let at = |l: f64| q2.iter().find(|r| (col(r, 1) - l).abs() < 1e-9).unwrap();
    assert_eq!(col(at(1.95), 3), 0.0);
    assert!(col(at(2.05), 3) > 0.0);
}

#[test]
fn phase_grid_through_critical_point() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "phase",
        "--q",
        "2",
        "--lambda-start",
        "1.9",
        "--lambda-stop",
        "2.1",
        "--lambda-step",
        "0.1",
    ];
    assert_eq!(rcm(&args, dir.path()).status.code(), Some(3));
    let mut skip = args.to_vec();
    skip.push("--skip-critical");
    let out = rcm(&skip, dir.path());
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 3);
}

#[test]
fn exact_report_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = rcm(
        &[
            "exact", "--n", "4", "--lambda", "1", "--q", "1", "--r", "2,4", "--eps", "0.25",
            "--out", "e.json",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let v = json(&dir.path().join("e.json"));
    assert!((real(&v["Z"]) - 1.0).abs() < 1e-12);
    assert_eq!(v["configurations"], 64);
    assert_eq!(v["spanning_trees"], 16);
    assert_eq!(v["forests"], 38);
    assert_eq!(v["Z_Br"].as_array().unwrap().len(), 2);
    assert_eq!(v["Z_Keps2"][0]["size_cutoff"], 1);
    assert_eq!(v["manifest"], "e.manifest.json");

    let out = rcm(
        &["exact", "--n", "8", "--lambda", "1", "--q", "2"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn sample_is_reproducible_and_complete() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        vec![
            "sample", "--n", "60", "--lambda", "2.5", "--q", "2", "--seed", "9", "--burnin", "5",
            "--sweeps", "100", "--thin", "2", "--eps", "0.1,0.2", "--out", out,
        ]
    };
    assert!(rcm(&args("a.csv"), dir.path()).status.success());
    assert!(rcm(&args("b.csv"), dir.path()).status.success());
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.csv")).unwrap());
    let (header, rows) = csv_rows(&dir.path().join("a.csv"));
    assert_eq!(
        header,
        "sweep,largest_fraction,k_over_n,acyclic,connected,v_eps_fraction,v_eps_fraction_2"
    );
    assert_eq!(rows.len(), 50);
    assert_eq!(rows[0][0], "7");
    for r in &rows {
        assert!(r[3] == "0" || r[3] == "1");
        for x in [&r[1], &r[2], &r[5], &r[6]] {
            let x: f64 = x.parse().unwrap();
            assert!((0.0..=1.0).contains(&x));
        }
    }
    let summary = json(&dir.path().join("a.summary.json"));
    assert!(real(&summary["largest_fraction"]["mean"]) > 0.0);
    assert_eq!(summary["manifest"], "a.manifest.json");
    let manifest = json(&dir.path().join("a.manifest.json"));
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["status"], "ok");
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.conf"),
        "# shared defaults\nlambda = 1.5\nq = 2\nburnin = 1\nsweeps = 3\nalpha = 0.5\n",
    )
    .unwrap();
    let out = rcm(
        &[
            "sample", "--config", "run.conf", "--n", "20", "--sweeps", "5", "--out", "s.csv",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let m = json(&dir.path().join("s.manifest.json"));
    assert_eq!(m["parameters"]["lambda"], "1.5000000000000000");
    assert_eq!(m["parameters"]["sweeps"], 5);
    assert_eq!(m["parameters"]["burnin"], 1);

    fs::write(dir.path().join("bad.conf"), "lamda = 1\n").unwrap();
    let out = rcm(
        &[
            "--config", "bad.conf", "sample", "--n", "5", "--lambda", "1", "--q", "1",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn time_limit_keeps_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = rcm(
        &[
            "sample",
            "--n",
            "300",
            "--lambda",
            "3",
            "--q",
            "2",
            "--burnin",
            "0",
            "--sweeps",
            "1000000",
            "--time-limit",
            "0.5",
            "--out",
            "t.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    let (_, rows) = csv_rows(&dir.path().join("t.csv"));
    assert!(!rows.is_empty());
    let m = json(&dir.path().join("t.manifest.json"));
    let status = m["status"].as_str().unwrap();
    assert!(
        status.starts_with(&format!("aborted after {} records", rows.len())),
        "{status}"
    );
}

#[test]
fn saddle_diagnostic_keys() {
    let dir = tempfile::tempdir().unwrap();
    let out = rcm(&["saddle", "--alpha", "0.5", "--r", "200"], dir.path());
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for k in [
        "r",
        "alpha",
        "s_r",
        "theta_r",
        "value",
        "s_limit",
        "theta_limit",
        "value_limit",
    ] {
        assert!(v.get(k).is_some(), "missing {k}");
    }
    assert!((real(&v["s_r"]) - 0.5 * (-0.5f64).exp()).abs() < 1e-3);
}

#[test]
fn quick_validation_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = rcm(
        &["validate", "--level", "quick", "--out", "a.json"],
        dir.path(),
    );
    let b = rcm(
        &["validate", "--level", "quick", "--out", "b.json"],
        dir.path(),
    );
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    assert_eq!(b.status.code(), Some(0));
    let ra = json(&dir.path().join("a.json"));
    let rb = json(&dir.path().join("b.json"));
    assert_eq!(ra["criteria"], rb["criteria"]);
    assert_eq!(
        serde_json::to_string(&ra["criteria"]).unwrap(),
        serde_json::to_string(&rb["criteria"]).unwrap()
    );
    assert_eq!(ra["criteria"].as_array().unwrap().len(), 10);
    assert_eq!(ra["criteria"][2]["status"], "skipped");
    let stderr = String::from_utf8_lossy(&a.stderr);
    assert_eq!(
        stderr
            .lines()
            .filter(|l| l.starts_with("PASS") || l.starts_with("SKIP"))
            .count(),
        10
    );
}
