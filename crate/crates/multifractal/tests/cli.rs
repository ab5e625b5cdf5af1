use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(cmd: &str, dir: &Path, config: &str, out: &str) -> Output {
    let cfg = dir.join(format!("{out}.json"));
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_multifractal"))
        .args([cmd, "--config", cfg.to_str().unwrap(), "--out", dir.join(out).to_str().unwrap(), "--threads", "2"])
        .output()
        .unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path).unwrap().lines().skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn lebesgue_point_gives_exact_tau_line() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("prescribe-measure", dir.path(), r#"{"spectrum": {"nodes": [[1.0, 1.0]]}, "depth": 10}"#, "leb");
    assert!(o.status.success(), "{}", stderr(&o));
    for r in rows(&dir.path().join("leb/tau_comparison.csv")) {
        let t: f64 = r[0].parse().unwrap();
        let emp: f64 = r[2].parse().unwrap();
        assert!((emp - (t - 1.0)).abs() < 1e-12, "t = {t}: {emp}");
    }
}

#[test]
fn empty_grid_exits_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("prescribe-measure", dir.path(), r#"{"spectrum": {"nodes": [[1.0, 1.0]]}, "grids": {"t": []}}"#, "g");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("grids.t"), "{}", stderr(&o));
}

#[test]
fn invalid_spectrum_exits_2_and_lists_checks() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("prescribe-measure", dir.path(), r#"{"spectrum": {"nodes": [[0.5, 0.2], [1.0, 0.8]]}}"#, "bad");
    assert_eq!(o.status.code(), Some(2));
    assert!(dir.path().join("bad/validation.json").is_file());
}

#[test]
fn p_infinite_prediction_matches_target() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"spectrum": {"nodes": [[0.9, 0.5], [1.0, 1.0], [1.1666666666666667, 0.5]]}, "depth": 12, "synthesize": false}"#;
    let o = run("frisch-parisi", dir.path(), cfg, "fp");
    assert!(o.status.success(), "{}", stderr(&o));
    let overlay = rows(&dir.path().join("fp/overlay.csv"));
    assert!(!overlay.is_empty());
    for r in overlay.into_iter().filter(|r| r[1] != "-inf" || r[2] != "-inf") {
        let (target, predicted): (f64, f64) = (r[1].parse().unwrap(), r[2].parse().unwrap());
        assert!((target - predicted).abs() < 1e-6, "H = {}: {target} vs {predicted}", r[0]);
    }
}

#[test]
fn steep_start_with_finite_p_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"spectrum": {"nodes": [[0.4, 0.0], [0.5, 0.6], [1.0, 1.0]]}, "p": 2, "depth": 10}"#;
    let o = run("frisch-parisi", dir.path(), cfg, "steep");
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn non_power_of_two_samples_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.csv"), "1\n2\n3\n").unwrap();
    let o = run("analyze-signal", dir.path(), r#"{"samples": "s.csv"}"#, "odd");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"spectrum": {"nodes": [[0.9, 0.5], [1.0, 1.0], [1.1666666666666667, 0.5]]}, "depth": 10, "out": "same"}"#;
    let files = |d: &Path| {
        let mut v: Vec<_> = fs::read_dir(d).unwrap().map(|e| e.unwrap().path()).collect();
        v.sort();
        v.into_iter().map(|p| (p.file_name().unwrap().to_owned(), fs::read(&p).unwrap())).collect::<Vec<_>>()
    };
    fs::write(dir.path().join("c.json"), cfg).unwrap();
    let go = || {
        let o = Command::new(env!("CARGO_BIN_EXE_multifractal"))
            .args(["frisch-parisi", "--config", dir.path().join("c.json").to_str().unwrap()])
            .env("MULTIFRACTAL_THREADS", "3")
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        files(&dir.path().join("same"))
    };
    let first = go();
    assert!(first.iter().any(|(n, _)| n == "signal.csv"));
    assert_eq!(first, go());
}

#[test]
fn synthesized_signal_round_trips_through_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"spectrum": {"nodes": [[0.9, 0.5], [1.0, 1.0], [1.1666666666666667, 0.5]]}, "depth": 10}"#;
    assert!(run("frisch-parisi", dir.path(), cfg, "fp").status.success());
    let o = run("analyze-signal", dir.path(), r#"{"samples": "fp/signal.csv", "wavelet_order": 3}"#, "an");
    assert!(o.status.success(), "{}", stderr(&o));
    let zeta = rows(&dir.path().join("an/zeta.csv"));
    assert!(zeta.iter().all(|r| r[1] != "-inf"));
}
