use std::path::Path;
use std::process::{Command, Output};

fn reslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reslab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(2)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn fig1_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig1.csv");
    let out = reslab(&[
        "run",
        "--experiment",
        "fig1",
        "--gamma0",
        "0.05",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&path);
    assert!(csv.starts_with("# config: experiment=fig1 gamma0=0.05 "));
    assert_eq!(
        csv.lines().nth(1).unwrap(),
        "experiment,lambda_t,N,qfi,method"
    );
    let rows = data_rows(&csv);
    assert_eq!(rows[0][..3], ["fig1", "0.0000000000000000e0", "1"]);
    assert_eq!(rows[0][3].parse::<f64>().unwrap(), 1.0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("rows"));
}

#[test]
fn output_is_deterministic_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut docs = Vec::new();
    for (i, threads) in ["1", "3", "1"].iter().enumerate() {
        let path = dir.path().join(format!("f{i}.csv"));
        let out = Command::new(env!("CARGO_BIN_EXE_reslab"))
            .env("RESLAB_THREADS", threads)
            .args([
                "run",
                "--experiment",
                "fig4",
                "--n-list",
                "1,2,8",
                "--out",
                path.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert_eq!(code(&out), 0);
        docs.push(std::fs::read(&path).unwrap());
    }
    let seq = dir.path().join("seq.csv");
    let out = reslab(&[
        "--sequential",
        "run",
        "--experiment",
        "fig4",
        "--n-list",
        "1,2,8",
        "--out",
        seq.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    docs.push(std::fs::read(&seq).unwrap());
    assert!(docs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# sweep\nexperiment = fig2\nn-list = 1, 2\nt_max = 1\nn_samples = 11\n",
    )
    .unwrap();
    let out = reslab(&["--config", cfg.to_str().unwrap(), "run", "--t-max", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.contains(" t_max=2 "));
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 22);
    assert_eq!(rows.last().unwrap()[1].parse::<f64>().unwrap(), 2.0);
}

#[test]
fn fig5_symmetry_and_zero_at_pi() {
    let out = reslab(&["run", "--experiment", "fig5", "--k-steps", "400"]);
    assert_eq!(code(&out), 0);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        csv.lines().nth(1).unwrap(),
        "experiment,gamma0,N,theta,gp,method"
    );
    for block in data_rows(&csv).chunks(65) {
        let gp: Vec<f64> = block.iter().map(|r| r[4].parse().unwrap()).collect();
        assert!(gp[32].abs() < 1e-10);
        assert!((0..65).all(|i| (gp[i] - gp[64 - i]).abs() < 1e-10));
    }
}

#[test]
fn scan_nc() {
    let out = reslab(&["scan-nc", "--gamma0", "0.05", "--n-max", "20"]);
    assert_eq!(code(&out), 0);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        data_rows(&csv)[0][3..],
        ["11".to_string(), "11".to_string()]
    );
    let out = reslab(&["scan-nc", "--gamma0", "0.01", "--n-max", "20"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8(out.stdout).unwrap().contains(",none,51"));
}

#[test]
fn tolerance_failure_exits_one() {
    // too coarse a horizon to see the revival at N = 11
    let out = reslab(&[
        "scan-nc",
        "--gamma0",
        "0.05",
        "--t-max",
        "5",
        "--n-samples",
        "11",
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("tolerance failure"));
}

#[test]
fn validate_smoke() {
    let out = reslab(&[
        "validate",
        "--grid",
        "smoke",
        "--bath-modes",
        "800",
        "--bath-half-width",
        "20",
        "--bath-t-max",
        "2",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        csv.lines().nth(1).unwrap(),
        "check,max_deviation,tolerance,status"
    );
}

#[test]
fn config_errors_exit_two() {
    for args in [
        vec!["run", "--experiment", "fig9"],
        vec!["run", "--experiment", "fig1", "--t-max", "-3"],
        vec!["run", "--experiment", "fig1", "--n-samples", "1"],
        vec!["run"],
        vec!["run", "--experiment", "validate"],
        vec!["validate", "--grid", "enormous"],
        vec!["--config", "/nonexistent/reslab.cfg", "scan-nc"],
        // bath horizon beyond half the recurrence time
        vec![
            "validate",
            "--grid",
            "smoke",
            "--bath-modes",
            "50",
            "--bath-half-width",
            "5",
            "--bath-t-max",
            "40",
        ],
        vec!["frobnicate"],
    ] {
        assert_eq!(code(&reslab(&args)), 2, "{args:?}");
    }
    let bad_threads = Command::new(env!("CARGO_BIN_EXE_reslab"))
        .env("RESLAB_THREADS", "zero")
        .args(["scan-nc"])
        .output()
        .unwrap();
    assert_eq!(code(&bad_threads), 2);
}

#[test]
fn numerical_errors_exit_three() {
    // a bath step this coarse cannot resolve the band edges and the norm drifts
    let out = reslab(&["validate", "--bath-dt", "0.05"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("norm drift"));
}
