use std::process::{Command, Output};

use noma_bsc::experiments::ExperimentConfig;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noma-bsc")).args(args).output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = cli(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn solve_prints_a_report() {
    let text = stdout(&["solve", "--num-cells", "2", "--seed", "3"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["mode"], "WBS");
    assert_eq!(v["allocation"]["cells"].as_array().unwrap().len(), 2);
    assert!(v["converged"].as_bool().unwrap());
    assert!(v["metrics"]["ee_total"].as_f64().unwrap() > 0.0);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    let mut cfg = ExperimentConfig::default();
    cfg.trials = 7;
    cfg.system.sic_error = 0.2;
    std::fs::write(&path, cfg.to_toml_string().unwrap()).unwrap();
    let text = stdout(&["config", "--config", path.to_str().unwrap(), "--trials", "3"]);
    let got = ExperimentConfig::from_toml_str(&text).unwrap();
    assert_eq!(got.trials, 3);
    assert_eq!(got.system.sic_error, 0.2);
}

#[test]
fn sweep_csv_carries_its_settings() {
    let text = stdout(&["sweep", "--trials", "2", "--num-cells", "2", "--sweep-param", "sic_error", "--sweep-values", "0,0.5"]);
    assert!(text.contains("# system.num_cells=2"));
    assert!(text.contains("# layout.d_far_m="));
    assert!(text.contains("# assumption.dual_update="));
    assert!(text.contains("# rng=ChaCha8"));
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "sweep_param,sweep_value,mode,statistic,value");
    let mean = |beta: &str| -> f64 {
        rows.iter()
            .find(|r| r.starts_with(&format!("sic_error,{beta},WBS,mean_ee,")))
            .and_then(|r| r.rsplit(',').next())
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!(mean("0.5") <= mean("0"));
}

#[test]
fn single_cell_needs_no_more_outer_iterations_than_ten() {
    let text = stdout(&["converge", "--cells", "1,10", "--seed", "5"]);
    let iters = |k: &str| {
        text.lines()
            .filter(|l| !l.starts_with('#') && l.starts_with(&format!("{k},")))
            .count()
    };
    assert!(iters("1") >= 1);
    assert!(iters("1") <= iters("10"));
}

#[test]
fn oracle_subcommand_reports_a_ratio() {
    let text = stdout(&["oracle", "--seed", "1", "--n-power", "50", "--n-pac", "50", "--n-phi", "11"]);
    let ratio: f64 = text
        .lines()
        .find(|l| l.starts_with("ratio"))
        .and_then(|l| l.split_whitespace().nth(1))
        .unwrap()
        .parse()
        .unwrap();
    assert!(ratio >= 0.98);
}

#[test]
fn bad_input_fails_cleanly() {
    let out = cli(&["sweep", "--trials", "0"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    assert!(!cli(&["solve", "--mode", "XYZ"]).status.success());
}

#[test]
fn output_file_receives_the_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let out = cli(&["sweep", "--trials", "2", "--num-cells", "2", "--sweep-values", "0,10", "-o", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert!(std::fs::read_to_string(&path).unwrap().contains("p_max_dbm,10,NBS,mean_ee,"));
}
