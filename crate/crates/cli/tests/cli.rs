use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn har(args: &[&str], config: Option<&Path>, out: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_har"));
    cmd.args(args).arg("--out").arg(out);
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    cmd.output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

/// Writes a synthetic panel (seeded, or the bundled one) and a small config
/// next to it.
fn setup(name: &str, seed: Option<u64>, horizons: &str, extra: &str) -> (PathBuf, PathBuf) {
    let dir = scratch(name);
    match seed {
        Some(s) => {
            let out = har(&["synth", "--seed", &s.to_string()], None, &dir);
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        }
        None => {
            let bundled = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic_panel.csv");
            fs::copy(bundled, dir.join("synthetic_panel.csv")).unwrap();
        }
    }
    let config = dir.join("run.toml");
    fs::write(
        &config,
        format!(
            r#"data = "synthetic_panel.csv"
horizons = {horizons}
initial_size = 80

[[transforms]]
column = "hpi"
kind = "QoQ"

[[transforms]]
column = "credit"
kind = "QoQ"

[[specs]]
name = "a"
target = "hpi_qoq"
regressors = ["credit_qoq", "rate", "stress"]

[[specs]]
name = "b"
target = "hpi_qoq"
regressors = ["rate"]

[budget]
grid_points = 10
refine_points = 5
{extra}"#
        ),
    )
    .unwrap();
    (dir, config)
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    assert!(text.starts_with("# columns: "), "{}", path.display());
    text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn synth_is_seeded() {
    let (a, b) = (scratch("synth_a"), scratch("synth_b"));
    for d in [&a, &b] {
        assert!(har(&["synth", "--seed", "11"], None, d).status.success());
    }
    let pa = fs::read(a.join("synthetic_panel.csv")).unwrap();
    assert_eq!(pa, fs::read(b.join("synthetic_panel.csv")).unwrap());
    assert!(har(&["synth", "--seed", "12"], None, &b).status.success());
    assert_ne!(pa, fs::read(b.join("synthetic_panel.csv")).unwrap());
    // 120 quarters, schema and header lines.
    assert_eq!(String::from_utf8(pa).unwrap().lines().count(), 122);
}

#[test]
fn fit_writes_artifacts_per_spec_and_horizon() {
    let (dir, config) = setup("fit", Some(3), "[1, 2]", "");
    let out = har(&["fit"], Some(&config), &dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for run in ["a_h1", "a_h2", "b_h1", "b_h2"] {
        for f in ["fit.json", "selection.json", "coefficients.csv"] {
            assert!(dir.join(run).join(f).is_file(), "{run}/{f}");
        }
    }
    let rows = csv_rows(&dir.join("a_h1/coefficients.csv"));
    assert_eq!(rows[0].len(), 11);
    assert_eq!(rows[0][1], "tau_10");
    assert_eq!(rows[0][10], "ols");
    assert_eq!(rows.len(), 5);
}

#[test]
fn missing_column_is_a_validation_error() {
    let (dir, config) = setup("missing", Some(3), "[1]", "");
    let text = fs::read_to_string(&config).unwrap().replace("\"rate\"]", "\"nope\"]");
    fs::write(&config, text).unwrap();
    let out = har(&["fit"], Some(&config), &dir);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("nope") && err.contains("specs[1]"), "{err}");
}

#[test]
fn malformed_config_and_bad_flags_exit_two() {
    let dir = scratch("bad");
    let config = dir.join("bad.toml");
    fs::write(&config, "horizons = [0]\nunknown_key = 1\n").unwrap();
    assert_eq!(har(&["fit"], Some(&config), &dir).status.code(), Some(2));
    assert_eq!(har(&["fit"], None, &dir).status.code(), Some(2));
    assert_eq!(har(&["synth", "--jobs", "0"], None, &dir).status.code(), Some(2));
}

#[test]
fn forecast_risk_and_spillover_shapes() {
    let (dir, config) = setup("pipeline", None, "[1, 4]", "\n[spillover]\nmodel = \"a\"\n");
    for cmd in ["forecast", "risk", "spillover"] {
        let out = har(&[cmd], Some(&config), &dir);
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let scores = csv_rows(&dir.join("scores.csv"));
    assert_eq!(scores.len(), 1 + 4);
    for row in &scores[1..] {
        for v in &row[3..7] {
            let v: f64 = v.parse().unwrap();
            assert!(v.is_finite() && v > 0.0);
        }
    }
    let risk = csv_rows(&dir.join("a_h1/risk.csv"));
    for row in &risk[1..] {
        let v: Vec<f64> = row[1..].iter().map(|s| s.parse().unwrap()).collect();
        assert!(v[0] >= 0.0);
        assert_eq!(v[2] + v[3], v[0]);
    }
    let table = csv_rows(&dir.join("connectedness.csv"));
    assert_eq!(table[0], ["pair", "h1", "h4"]);
    assert_eq!(table.len(), 3);
    let rolling = csv_rows(&dir.join("a_h1/rolling_spillover.csv"));
    let header = &rolling[0];
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    for row in rolling[1..].iter().filter(|r| r[1] == "ok") {
        let c: f64 = row[col("C_ES_sri")].parse().unwrap();
        assert!(c.is_finite());
    }
    assert!(dir.join("a_h4/irf.csv").is_file());
}

#[test]
fn flat_tail_is_a_runtime_error() {
    // On this panel the h=2 fit has no regressor in its upper tail, so EL is
    // constant and the VAR cannot be estimated.
    let (dir, config) = setup("flat", Some(3), "[2]", "\n[spillover]\nmodel = \"a\"\n");
    let text = fs::read_to_string(&config).unwrap().replace("grid_points = 10\nrefine_points = 5", "grid_points = 8\nrefine_points = 4");
    fs::write(&config, text).unwrap();
    let out = har(&["spillover"], Some(&config), &dir);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("EL is constant"));
}
