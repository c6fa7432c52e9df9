use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn arealaw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arealaw")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn golden() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/tfim_golden.toml")
}

const MINIMAL: &str = r#"[model]
name = "tfim"
size = 6
J = 1.0
g = 1.5

[grid]
kind = "linear"
min = 0.1
max = 3.0
points = 17

[regions]
l = [2, 3]
"#;

fn json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn minimal_config_writes_one_curve_row_per_temperature() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("min.toml");
    fs::write(&cfg, MINIMAL).unwrap();
    let out = dir.path().join("out");
    let o = arealaw(&["run", "--config", path(&cfg), "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let curve = fs::read_to_string(out.join("curve.csv")).unwrap();
    assert_eq!(curve.lines().next().unwrap(), "T,u,s,c,logZ,F");
    assert_eq!(curve.lines().count(), 1 + 17);
    let scan = fs::read_to_string(out.join("scan.csv")).unwrap();
    assert_eq!(scan.lines().count(), 1 + 2);
    for f in ["record.json", "certificates.json", "summary.txt", "timings.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert!(!out.join("entropy.svg").exists());
}

#[test]
fn region_edge_must_divide_lattice() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, MINIMAL.replace("size = 6", "size = 8")).unwrap();
    let o = arealaw(&["run", "--config", path(&cfg), "--out", path(&dir.path().join("out"))]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.toml:14:"), "{err}");
}

#[test]
fn unknown_key_is_rejected_with_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.toml");
    fs::write(&cfg, MINIMAL.replace("g = 1.5", "g = 1.5\ngamma = 2")).unwrap();
    let o = arealaw(&["run", "--config", path(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("typo.toml:6:") && err.contains("gamma"), "{err}");
}

#[test]
fn golden_run_holds_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g");
    let o = arealaw(&["run", "--config", path(&golden()), "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let certs = json(&out.join("certificates.json"));
    for region in certs["regions"].as_array().unwrap() {
        assert_eq!(region["lemma2_verdict"], "holds");
        assert_eq!(region["prop1"]["verdict"], "holds");
    }
    for p in certs["pepo"].as_array().unwrap() {
        assert_eq!(p["trace_verdict"], "holds");
        assert_eq!(p["entropy_verdict"], "holds");
    }
    assert!(out.join("entropy.svg").exists() && out.join("heat_capacity.svg").exists());

    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    let again = dir.path().join("r");
    let o = arealaw(&["report", "--record", path(&out), "--out", path(&again)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read_to_string(again.join("summary.txt")).unwrap(), summary);
    assert_eq!(
        fs::read(again.join("heat_capacity.svg")).unwrap(),
        fs::read(out.join("heat_capacity.svg")).unwrap()
    );
}

fn write_csv(dir: &Path, name: &str, rows: impl Iterator<Item = (f64, f64)>) -> PathBuf {
    let mut s = String::from("# synthetic\nT,c\n");
    for (t, c) in rows {
        s.push_str(&format!("{t:?},{c:?}\n"));
    }
    let p = dir.join(name);
    fs::write(&p, s).unwrap();
    p
}

const GEOMETRY: [&str; 12] = ["--d", "1", "--r", "1", "--l", "4", "--n", "8", "--C", "1", "--h", "0.5"];

#[test]
fn fit_recovers_schottky_gap() {
    let dir = tempfile::tempdir().unwrap();
    let gap = 1.3;
    let csv = write_csv(
        dir.path(),
        "two_level.csv",
        (0..30).map(|i| {
            let t = 0.05 + (gap / 5.0 - 0.05) * i as f64 / 29.0;
            let x = (gap / t).exp();
            (t, (gap / t).powi(2) * x / (1.0 + x).powi(2))
        }),
    );
    let out = dir.path().join("fit");
    let mut args = vec!["fit", "--csv", path(&csv), "--out", path(&out)];
    args.extend(GEOMETRY);
    let o = arealaw(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let cert = json(&out.join("certificates.json"));
    let delta = cert["fit"]["model"]["delta"].as_f64().unwrap();
    assert!((delta - gap).abs() < 0.05 * gap, "{delta}");
    assert_eq!(cert["certificate"]["verdict"], "holds");
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.starts_with("data-driven: entanglement side not measured"));
}

#[test]
fn fit_polynomial_regime_recovers_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_csv(dir.path(), "debye.csv", (1..=12).map(|i| {
        let t = 0.02 * i as f64;
        (t, 5.0 * t.powi(3))
    }));
    let out = dir.path().join("fit");
    let mut args = vec!["fit", "--csv", path(&csv), "--out", path(&out), "--regime", "polynomial"];
    args.extend(GEOMETRY);
    let o = arealaw(&args);
    assert!(matches!(o.status.code(), Some(0 | 3)), "{}", String::from_utf8_lossy(&o.stderr));
    let cert = json(&out.join("certificates.json"));
    let gamma = cert["fit"]["model"]["gamma"].as_f64().unwrap();
    assert!((gamma - 3.0).abs() < 1e-9, "{gamma}");
}

#[test]
fn fit_names_the_bad_column() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    fs::write(&csv, "T,cv\n0.1,1.0\n").unwrap();
    let mut args = vec!["fit", "--csv", path(&csv)];
    args.extend(GEOMETRY);
    let o = arealaw(&args);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("'cv'"), "{err}");
}

#[test]
fn zero_threads_is_a_usage_error() {
    let o = arealaw(&["--threads", "0", "run", "--config", path(&golden())]);
    assert_eq!(o.status.code(), Some(1));
}
