use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn scanorder(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scanorder"))
        .args(args)
        .env_remove("SCANORDER_OUT")
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().skip(1).collect()
}

#[test]
fn spectral_and_mixing_on_hardcore() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let res = scanorder(&[
        "run", "--analyses", "spectral,mixing", "--model", "hardcore_knn", "--n", "3", "--out", out,
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let spectral = read(dir.path(), "spectral.csv");
    assert!(spectral.starts_with("model_id,sampler,unit,gap,relaxation_time,reversible\n"));
    assert_eq!(data_lines(&spectral).len(), 2);
    let summary = read(dir.path(), "mixing_summary.csv");
    assert_eq!(data_lines(&summary).len(), 2);
    assert!(summary.contains("random_update") && summary.contains("alternating_scan"));
    assert!(dir.path().join("mixing_curve.csv").exists());
    assert!(dir.path().join("summary.csv").exists());
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn theorem1_suite_reports_every_instance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let res = scanorder(&[
        "verify", "--suite", "theorem1", "--trials", "20", "--max-side", "3", "--seed", "3", "--out", out,
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = read(dir.path(), "verify_theorem1.csv");
    let rows = data_lines(&csv);
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r.contains(",true,") && r.ends_with(",true")));
}

#[test]
fn malformed_json_fails_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out");
    let res = scanorder(&[
        "spectral",
        "--model",
        r#"{"kind": "hardcore_knn", "n": }"#,
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(1));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("byte offset"), "{err}");
    assert!(!target.exists());
}

#[test]
fn missing_model_parameter_is_a_user_error() {
    let dir = tempfile::tempdir().unwrap();
    let res = scanorder(&["spectral", "--model", "hardcore_knn", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("--n"));
}

#[test]
fn coupling_output_is_byte_identical_across_runs() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let res = scanorder(&[
            "coupling", "--model", "random_rbm", "--n1", "40", "--n2", "40", "--m", "120",
            "--seed", "9", "--replicates", "8", "--out", d.path().to_str().unwrap(),
        ]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    }
    for name in ["coupling.csv", "coupling_summary.csv", "summary.csv"] {
        assert_eq!(
            fs::read(dirs[0].path().join(name)).unwrap(),
            fs::read(dirs[1].path().join(name)).unwrap(),
            "{name}"
        );
    }
    let rows = read(dirs[0].path(), "coupling.csv");
    assert_eq!(data_lines(&rows).len(), 16);
}

#[test]
fn manifest_replays_to_identical_outputs() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let res = scanorder(&[
        "run", "--analyses", "spectral,coupling", "--model", "hardcore_knn", "--n", "2", "--seed", "1",
        "--replicates", "5", "--out", first.path().to_str().unwrap(),
    ]);
    // Hardcore is not monotone, so coupling is rejected as a user error.
    assert_eq!(res.status.code(), Some(1));

    let res = scanorder(&[
        "run", "--analyses", "spectral,mixing", "--model", "hardcore_knn", "--n", "2",
        "--out", first.path().to_str().unwrap(),
    ]);
    assert!(res.status.success());
    let manifest = first.path().join("manifest.json");
    let res = scanorder(&[
        "run", "--config", manifest.to_str().unwrap(), "--out", second.path().to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    for name in ["spectral.csv", "mixing_curve.csv", "mixing_summary.csv", "summary.csv"] {
        assert_eq!(read(first.path(), name), read(second.path(), name), "{name}");
    }
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from-env");
    let res = Command::new(env!("CARGO_BIN_EXE_scanorder"))
        .args(["spectral", "--model", "hardcore_knn", "--n", "2"])
        .env("SCANORDER_OUT", &target)
        .output()
        .unwrap();
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(target.join("spectral.csv").exists());
}

#[test]
fn lumped_sizes_range() {
    let dir = tempfile::tempdir().unwrap();
    let res = scanorder(&["lumped", "--sizes", "2-6", "--out", dir.path().to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let summary = read(dir.path(), "lumped_mixing_summary.csv");
    assert_eq!(data_lines(&summary).len(), 10);
    let spectral = read(dir.path(), "lumped_spectral.csv");
    assert_eq!(data_lines(&spectral).len(), 10);
}
