use std::path::Path;
use std::process::{Command, Output};

fn sketchlab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sketchlab"))
        .args(args)
        .current_dir(dir)
        .env_remove("SKETCHLAB_SEED")
        .output()
        .unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn column(rows: &[Vec<String>], name: &str) -> f64 {
    let idx = rows[0].iter().position(|h| h == name).unwrap();
    rows[1][idx].parse().unwrap()
}

#[test]
fn gen_then_lra_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let out = sketchlab(&["gen", "--family", "svd-profile", "--n", "64", "--r", "8", "--seed", "1", "-o", "m.mtx"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = sketchlab(&["lra", "--input", "m.mtx", "--mult", "asph", "--d", "3", "--l", "8"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 2);
    assert!(column(&rows, "mean_error") <= 1e-6);
    assert!(String::from_utf8_lossy(&out.stderr).contains("mean relative spectral error"));
}

#[test]
fn cross_approximation_on_gravity_writes_a_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = sketchlab(
        &["cur", "--algo", "ca", "--loops", "5", "--family", "gravity", "--n", "256", "--r", "8", "-o", "ca.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&std::fs::read_to_string(dir.path().join("ca.csv")).unwrap());
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][0], "cur");
    assert!(column(&rows, "mean_reads") > 0.0);
    assert!(column(&rows, "mean_error") < 1e-3);
}

#[test]
fn lsr_gaussian_mean_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let out = sketchlab(&["lsr", "--family", "gaussian", "--mult", "gaussian", "--trials", "100"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    let mean = column(&rows, "mean_error");
    assert!((1.0..=1.20).contains(&mean), "{mean}");
    assert_eq!(column(&rows, "mean_reads"), (4096 * 101) as f64);
}

#[test]
fn lra_abridged_hadamard_on_profile() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["lra", "--family", "svd-profile", "--n", "256", "--rank", "8", "--mult", "ah", "--d", "3", "--l", "8", "--trials", "100"];
    let out = sketchlab(&args, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert!(column(&rows, "mean_error") <= 1e-6);
}

#[test]
fn fixed_seed_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["hss", "--family", "cauchy", "--n", "128", "--depth", "2", "--r", "8", "--seed", "5"];
    let a = sketchlab(&args, dir.path());
    let b = sketchlab(&args, dir.path());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    // runtime only appears on request
    assert!(!String::from_utf8_lossy(&a.stdout).contains("runtime"));
    let t = sketchlab(&[&args[..], &["--timing"]].concat(), dir.path());
    assert!(String::from_utf8_lossy(&t.stdout).lines().next().unwrap().ends_with("mean_runtime_s"));
}

#[test]
fn seed_from_environment_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.json"),
        r#"{"command": "leverage", "family": "factor-gaussian", "n": 96, "rank": 3, "r": 3, "trials": 3}"#,
    )
    .unwrap();
    let via_env = Command::new(env!("CARGO_BIN_EXE_sketchlab"))
        .args(["--config", "run.json"])
        .current_dir(dir.path())
        .env("SKETCHLAB_SEED", "11")
        .output()
        .unwrap();
    assert!(via_env.status.success(), "{}", String::from_utf8_lossy(&via_env.stderr));
    let via_flag = sketchlab(&["--config", "run.json", "--seed", "11"], dir.path());
    assert_eq!(via_env.stdout, via_flag.stdout);
    let rows = csv_rows(&String::from_utf8(via_flag.stdout).unwrap());
    assert_eq!(rows[1][0], "leverage");
    assert_eq!(rows[1][9], "11");
    assert!(column(&rows, "mean_error") < 1e-8);
}

#[test]
fn usage_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    assert!(!sketchlab(&["frobnicate"], dir.path()).status.success());
    let out = sketchlab(&["cur", "--algo", "magic"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown CUR algorithm"));
    let out = sketchlab(&["lra", "--input", "missing.mtx"], dir.path());
    assert!(!out.status.success());
    let out = sketchlab(&["lsr", "--trials", "0"], dir.path());
    assert!(!out.status.success());
}

#[test]
fn selftest_quick_prints_every_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let out = sketchlab(&["selftest", "--quick", "-o", "s.csv"], dir.path());
    let text = String::from_utf8(out.stdout).unwrap();
    for id in 1..=12 {
        assert!(text.contains(&format!("criterion {id:>2} ")), "missing {id}");
    }
    let csv = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert_eq!(csv.lines().count(), 13);
    // exit status tracks the criteria
    assert_eq!(out.status.success(), !csv.contains(",false,"));
}
