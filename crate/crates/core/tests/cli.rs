use std::path::Path;
use std::process::{Command, Output};

fn chi3(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chi3"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("CHI3_THREADS", "2")
        .output()
        .expect("spawn chi3")
}

/// Header and rows of a CSV written by the tool, skipping `#` metadata lines.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<f64>], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i]).collect()
}

#[test]
fn spectrum_writes_all_formats() {
    let dir = tempfile::tempdir().unwrap();
    let out = chi3(dir.path(), &["spectrum", "--grid", "-3:3:61"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for m in ["eha", "hm", "slm"] {
        for ext in ["csv", "json", "svg"] {
            assert!(dir.path().join(format!("spectrum_{m}.{ext}")).exists(), "spectrum_{m}.{ext}");
        }
    }
    let (header, rows) = read_csv(&dir.path().join("spectrum_hm.csv"));
    assert_eq!(rows.len(), 61);
    let lo = column(&header, &rows, "g_opt_minus");
    let amp = column(&header, &rows, "g_amplitude");
    assert!(lo.iter().zip(&amp).all(|(l, a)| l <= &(a + 1e-15)));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("spectrum_hm.json")).unwrap()).unwrap();
    assert_eq!(json["metadata"]["tool"], "chi3");
    assert_eq!(json["metadata"]["schema_version"], 1);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(chi3(dir.path(), &["spectrum", "--model", ""]).status.code(), Some(64));
    assert_eq!(chi3(dir.path(), &["spectrum", "--grid", "0:1:1"]).status.code(), Some(64));
    assert_eq!(chi3(dir.path(), &["spectrum", "--set", "nonsense=1"]).status.code(), Some(64));
    assert_eq!(chi3(dir.path(), &["nonsense"]).status.code(), Some(64));
    assert_eq!(chi3(dir.path(), &["spectrum", "--set", "a0=1e12"]).status.code(), Some(2));
    assert_eq!(chi3(dir.path(), &["invfree", "--set", "invfree_q0=-100", "--set", "invfree_x=10"]).status.code(), Some(2));
    assert_eq!(chi3(dir.path(), &["check", "--inject-fault", "noise-constant"]).status.code(), Some(1));
}

#[test]
fn check_passes_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = chi3(dir.path(), &["check"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let summary: serde_json::Value = serde_json::from_str(String::from_utf8_lossy(&out.stdout).lines().next().unwrap()).unwrap();
    assert_eq!(summary["pass"], true);
    assert!(summary["first_failure"].is_null());
}

#[test]
fn params_file_layers_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.toml");
    std::fs::write(&file, "models = \"slm\"\ngrid = \"-1:1:11\"\nfc = 0.5\n").unwrap();
    let out = chi3(dir.path(), &["spectrum", "--params", file.to_str().unwrap(), "--grid", "-2:2:21", "--format", "csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!dir.path().join("spectrum_hm.csv").exists());
    let (_, rows) = read_csv(&dir.path().join("spectrum_slm.csv"));
    assert_eq!(rows.len(), 21);
}

#[test]
fn simulate_is_reproducible_and_marks_complex_noise() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["simulate", "--model", "hm", "--ntraj", "20", "--seed", "7", "--format", "csv,json"];
    assert!(chi3(dir.path(), &args).status.success());
    let first = std::fs::read(dir.path().join("simulate_hm.csv")).unwrap();
    // a different thread count must not change the bytes
    let again = Command::new(env!("CARGO_BIN_EXE_chi3"))
        .args(args)
        .arg("--out")
        .arg(dir.path())
        .env("CHI3_THREADS", "1")
        .output()
        .unwrap();
    assert!(again.status.success());
    assert_eq!(first, std::fs::read(dir.path().join("simulate_hm.csv")).unwrap());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("simulate_hm.json")).unwrap()).unwrap();
    assert_eq!(json["data"]["noise_mode"], "complex");
}

#[test]
fn invfree_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = chi3(dir.path(), &["invfree", "--set", "invfree_beta=0", "--set", "invfree_q0=20"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, rows) = read_csv(&dir.path().join("invfree_stats.csv"));
    // without saturation the field is coherent
    assert!((column(&h, &rows, "mean_n")[0] - 20.0).abs() < 1e-9);
    assert!((column(&h, &rows, "xi_over_n")[0] - 1.0).abs() < 1e-12);

    let out = chi3(dir.path(), &["invfree", "--set", "invfree_beta=0.05"]);
    assert!(out.status.success());
    let (h, rows) = read_csv(&dir.path().join("invfree_y.csv"));
    let y0 = column(&h, &rows, "y_theta_0");
    let y1 = column(&h, &rows, "y_theta_half_pi");
    assert!(y0.iter().zip(&y1).all(|(a, b)| b >= a));
    let (h, rows) = read_csv(&dir.path().join("invfree_mandel.csv"));
    assert!(column(&h, &rows, "xi_over_n").iter().all(|r| (0.4..=1.0).contains(r)));
}

#[test]
fn compare_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = chi3(dir.path(), &["compare"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("compare.json")).unwrap()).unwrap();
    for m in ["eha", "hm", "slm"] {
        let dev = json["data"]["models"][m]["oracle_max_abs_deviation"].as_f64().unwrap();
        assert!(dev < 1e-10, "{m}: {dev}");
    }
}
