use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const SPHERE: &str = r#"
name = "sphere"
lambdas = [2.0, 1.5]
methods = ["quadrature"]
seed = 3

[model]
family = "space_form"
dim = 3
curvature = 1.0

[radii]
start = 0.2
levels = 4

[outputs]
plots = true
"#;

const FLAT_VARIATIONAL: &str = r#"
name = "flat"
lambdas = [2.0]
radii = [1.0]
methods = ["variational"]

[model]
family = "space_form"
dim = 3
curvature = 0.0

[outputs]
field_dumps = "csv"
"#;

const SCALAR_FLAT: &str = r#"
name = "scalar_flat"
lambdas = [2.0]
radii = [0.3, 0.2, 0.15, 0.1]
methods = ["variational"]

[model]
family = "curvature_polynomial"
dim = 3
generators = [[0, 1, 0, 1, 1.0], [0, 2, 0, 2, -1.0]]
"#;

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path
}

fn geocap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geocap")).args(args).output().unwrap()
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    geocap(&args)
}

fn read_csv(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(|r| r.unwrap()).collect()
}

#[test]
fn sphere_sweep_writes_eight_sorted_rows() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), SPHERE);
    let out = dir.path().join("out");
    let status = run(&config, &out, &[]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));

    let mut reader = csv::Reader::from_path(out.join("sphere.csv")).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, geocap_cli::output::CSV_HEADER);
    let rows = read_csv(&out.join("sphere.csv"));
    assert_eq!(rows.len(), 8);
    let keys: Vec<(f64, f64)> = rows.iter().map(|r| (r[2].parse().unwrap(), r[3].parse().unwrap())).collect();
    assert_eq!(keys[0], (1.5, 0.2));
    assert_eq!(keys[3], (1.5, 0.025));
    assert_eq!(keys[4], (2.0, 0.2));
    for row in &rows {
        assert_eq!(&row[4], "quadrature");
        let s_hat: f64 = row[11].parse().unwrap();
        assert!((s_hat - 6.0).abs() < 0.05);
        assert_eq!(&row[13], "0.0");
    }

    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("sphere.json")).unwrap()).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 8);
    assert_eq!(report["fits"].as_array().unwrap().len(), 2);
    assert!(report["invariant_checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
    assert!(report["timings"]["total_ms"].as_f64().unwrap() > 0.0);

    let plot = fs::read_to_string(out.join("sphere_quadrature_lambda2.0.dat")).unwrap();
    assert!(plot.contains("# predicted_kappa=0.666666666667"));
    assert_eq!(plot.lines().filter(|l| !l.starts_with('#')).count(), 4);
}

#[test]
fn quadrature_rows_meet_error_bound() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), &SPHERE.replace("curvature = 1.0", "curvature = -1.0"));
    let out = dir.path().join("out");
    assert!(run(&config, &out, &[]).status.success());
    for row in read_csv(&out.join("sphere.csv")) {
        let capacity: f64 = row[5].parse().unwrap();
        let err: f64 = row[12].parse().unwrap();
        assert!(err <= 1e-10 * capacity, "{row:?}");
    }
}

#[test]
fn csv_is_byte_reproducible() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), &SPHERE.replace("[\"quadrature\"]", "[\"series\", \"quadrature\"]"));
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(run(&config, &a, &["--workers", "1"]).status.success());
    assert!(run(&config, &b, &["--workers", "3"]).status.success());
    let first = fs::read(a.join("sphere.csv")).unwrap();
    assert_eq!(first, fs::read(b.join("sphere.csv")).unwrap());
    assert_eq!(read_csv(&a.join("sphere.csv")).len(), 16);
}

#[test]
fn timings_flag_fills_runtime_column() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), FLAT_VARIATIONAL);
    let out = dir.path().join("out");
    assert!(run(&config, &out, &["--resolution", "1", "--timings"]).status.success());
    let rows = read_csv(&out.join("flat.csv"));
    let runtime: f64 = rows[0][13].parse().unwrap();
    assert!(runtime > 0.0);
}

#[test]
fn flat_variational_recovers_two() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), FLAT_VARIATIONAL);
    let out = dir.path().join("out");
    let status = run(&config, &out, &["--resolution", "2"]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let rows = read_csv(&out.join("flat.csv"));
    assert_eq!(rows.len(), 1);
    let capacity: f64 = rows[0][5].parse().unwrap();
    let c_n: f64 = rows[0][6].parse().unwrap();
    let deficit: f64 = rows[0][7].parse().unwrap();
    assert_eq!(c_n, 2.0);
    assert!((capacity - 2.0).abs() < 0.02, "{capacity}");
    assert!(deficit.abs() < 0.01);
    assert_eq!(&rows[0][11], "");

    let field = out.join("flat_field_lambda2.0_r1.0.csv");
    let text = fs::read_to_string(field).unwrap();
    assert_eq!(text.lines().next(), Some("x,y,z,value"));
}

#[test]
fn malformed_config_exits_two_without_output() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), &SPHERE.replace("[2.0, 1.5]", "[0.9]"));
    let out = dir.path().join("out");
    let status = run(&config, &out, &[]);
    assert_eq!(status.status.code(), Some(2));
    assert!(!out.exists());

    let config = write_config(dir.path(), "name = \"broken\"\nlambdas = [2.0");
    assert_eq!(run(&config, &out, &[]).status.code(), Some(2));
    assert_eq!(run(&dir.path().join("missing.toml"), &out, &[]).status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn verify_rejects_unknown_suite() {
    assert_eq!(geocap(&["verify", "everything"]).status.code(), Some(2));
}

#[test]
fn verify_fast_passes() {
    let out = geocap(&["verify", "fast"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 8);
}

#[test]
fn conjecture_scan_needs_scalar_flat_model() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let config = write_config(dir.path(), SCALAR_FLAT);
    let status = geocap(&["scan-conjecture", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--resolution", "1"]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    assert_eq!(read_csv(&out.join("scalar_flat_conjecture.csv")).len(), 4);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("scalar_flat_conjecture.json")).unwrap()).unwrap();
    assert!(report["rows"][0]["r4_coefficient"].is_number());

    let sphere = write_config(dir.path(), SPHERE);
    let other = dir.path().join("other");
    let status = geocap(&["scan-conjecture", sphere.to_str().unwrap(), "--out", other.to_str().unwrap()]);
    assert_eq!(status.status.code(), Some(2));
    assert!(!other.exists());
}
