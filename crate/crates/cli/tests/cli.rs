use std::path::Path;
use std::process::{Command, Output};

fn fdsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fdsim")).args(args).output().unwrap()
}

fn default_cfg() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.toml").display().to_string()
}

// keeps the sweeps small; flags override the file
const FAST: &[&str] = &["--powers", "0:12.5:25", "--runs", "2", "--cancellers", "linear,wl"];

fn small_config(dir: &Path) -> String {
    let text = std::fs::read_to_string(default_cfg()).unwrap().replace("n_samples = 10000", "n_samples = 2000");
    let path = dir.join("small.cfg");
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn sweep_writes_csv_with_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("sweep.csv");
    let mut args = vec!["--config", &cfg, "--out", out.to_str().unwrap()];
    args.extend_from_slice(FAST);
    let res = fdsim(&args);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert!(lines[0].starts_with("# config_sha256="));
    assert_eq!(lines[1], "# master_seed=1");
    let body: Vec<_> = lines.iter().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(*body[0], "tx_power_dbm,canceller,mean_sinr_db,std_sinr_db,runs,saturation_count");
    assert_eq!(body.len(), 1 + 3 * 2);
    assert!(body[1].starts_with("0.000,linear,"));
    assert!(body[6].starts_with("25.000,widely-linear,"));
}

#[test]
fn identical_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let run = |seed: &str| {
        let mut args = vec!["--config", cfg.as_str(), "--seed", seed];
        args.extend_from_slice(FAST);
        fdsim(&args).stdout
    };
    let a = run("11");
    assert!(!a.is_empty());
    assert_eq!(a, run("11"));
    assert_ne!(a, run("12"));
}

#[test]
fn wiener_pa_and_model_dump() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let models = dir.path().join("models");
    let res = fdsim(&[
        "--config",
        &cfg,
        "--pa",
        "wiener",
        "--powers",
        "20",
        "--runs",
        "1",
        "--cancellers",
        "joint-full-3",
        "--dump-models",
        models.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let file = models.join("joint-full-3_20.000dBm.json");
    let model = fdsim_core::canceller::CancellerModel::load(&file).unwrap();
    assert_eq!(model.n_tx(), 2);
    assert_eq!(model.n_rx(), 2);
}

#[test]
fn validate_runs_the_invariant_suite() {
    let res = fdsim(&["--validate"]);
    let text = String::from_utf8_lossy(&res.stdout);
    for name in ["irr_round_trip", "pa_iip3_two_tone", "cascade_identity", "ceiling_law", "ordering_law", "determinism"] {
        assert!(text.contains(name), "{text}");
    }
    // success tracks the suite outcome
    assert_eq!(res.status.success(), !text.contains("FAIL"));
}

#[test]
fn usage_errors_exit_nonzero() {
    let bad = [
        vec!["--no-such-flag"],
        vec!["--config", "/nonexistent/scenario.toml"],
        vec!["--pa", "doherty"],
        vec!["--powers", "5:1"],
        vec!["--cancellers", "linear,quadratic"],
        vec!["--runs", "0"],
        vec!["--seed", "-3"],
    ];
    for args in bad {
        let res = fdsim(&args);
        assert!(!res.status.success(), "{args:?}");
        assert!(!res.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    std::fs::write(&path, "[pa]\ngain_db = 27.0\nbias_voltage = 3.3\n").unwrap();
    let res = fdsim(&["--config", path.to_str().unwrap(), "--runs", "1"]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("bias_voltage"));
}
