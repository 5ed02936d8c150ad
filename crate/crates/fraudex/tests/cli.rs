use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = r#"
seed = 11
[dataset]
n_rows = 1200
n_numeric = 6
n_categorical = 2
fraud_rate = 0.1
[background]
size = 40
[explain]
n_coalitions = 200
n_perturbations = 300
[studies]
timing_sizes = [20, 5000]
timing_repeats = 1
"#;

fn fraudex(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fraudex"))
        .arg("--config")
        .arg(dir.join("run.toml"))
        .arg("--out")
        .arg(dir.join("out"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), CONFIG).unwrap();
    dir
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn missing_models_fail_with_a_message() {
    let dir = setup();
    let out = fraudex(dir.path(), &["evaluate"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("error:"), "{}", stderr(&out));
}

#[test]
fn bad_config_reports_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), "[dataset]\nfraud_rate = 2.0\nholdout = 1.5\n").unwrap();
    let out = fraudex(dir.path(), &["train"]);
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(err.contains("fraud_rate") && err.contains("holdout"), "{err}");
}

#[test]
fn train_explain_and_study_end_to_end() {
    let dir = setup();
    let out = fraudex(dir.path(), &["train"]);
    assert!(out.status.success(), "{}", stderr(&out));
    for slug in ["naive_bayes", "logistic_regression", "isolation_forest", "autoencoder"] {
        assert!(dir.path().join(format!("out/models/{slug}.json")).exists(), "{slug}");
    }

    // Explanations are deterministic byte for byte.
    let explain = ["explain", "--model", "random_forest"];
    assert!(fraudex(dir.path(), &explain).status.success());
    let files: Vec<_> = std::fs::read_dir(dir.path().join("out/explanations")).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(files.len(), 1);
    let first = std::fs::read(&files[0]).unwrap();
    assert!(fraudex(dir.path(), &explain).status.success());
    assert_eq!(first, std::fs::read(&files[0]).unwrap());

    // LIME does not apply to anomaly detectors.
    let out = fraudex(dir.path(), &["explain", "--model", "isolation_forest", "--method", "lime"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("isolation_forest"), "{}", stderr(&out));

    let out = fraudex(dir.path(), &["explain", "--model", "logistic_regression", "--instance", "999999"]);
    assert!(!out.status.success());

    let out = fraudex(dir.path(), &["study", "timing"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let timing = std::fs::read_to_string(dir.path().join("out/timing.csv")).unwrap();
    // A background larger than the training split is skipped, not clamped.
    let big: Vec<&str> = timing.lines().filter(|l| l.contains(",5000,")).collect();
    assert!(!big.is_empty() && big.iter().all(|l| l.contains("background")), "{timing}");
    // LIME cells for detectors carry a skip marker.
    assert!(timing.lines().any(|l| l.starts_with("autoencoder,lime") && !l.ends_with(',')), "{timing}");
}
