//! End-to-end checks driving the compiled binary.

use std::path::Path;
use std::process::{Command, Output};

use rhoqubo::harness::{prime_sweep_list, read_records_csv};
use rhoqubo::io::read_native;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rhoqubo"))
}

fn run_ok(args: &[&str]) -> serde_json::Value {
    let output = bin().args(args).output().unwrap();
    assert!(
        output.status.success(),
        "command {args:?} failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is one JSON line")
}

fn run_err(args: &[&str]) -> serde_json::Value {
    let output: Output = bin().args(args).output().unwrap();
    assert!(!output.status.success(), "command {args:?} unexpectedly passed");
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert_eq!(stderr.trim().lines().count(), 1, "stderr: {stderr}");
    serde_json::from_str(stderr.trim()).expect("stderr is one JSON line")
}

fn path_str(path: &Path) -> String {
    path.display().to_string()
}

#[test]
fn gen_qkp_writes_a_parseable_native_instance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("inst.native");
    let summary = run_ok(&[
        "gen", "qkp", "--n", "12", "--density", "50", "--seed", "3", "--out", &path_str(&out),
    ]);
    assert_eq!(summary["name"], "qkp-n12-d50-s3");
    assert_eq!(summary["vars"], 12);

    let bundle = read_native(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(bundle.problem.dimension(), 12);
    assert_eq!(bundle.problem.inequalities().len(), 1);
    assert_eq!(
        summary["capacity"],
        bundle.problem.inequalities()[0].bound()
    );
}

#[test]
fn gen_cardinality_attaches_the_bound() {
    let dir = tempfile::tempdir().unwrap();
    let orlib = dir.path().join("matrices.txt");
    std::fs::write(&orlib, "1\n4 2\n1 2 -5\n1 1 -3\n").unwrap();
    let out = dir.path().join("card.native");
    let summary = run_ok(&[
        "gen",
        "cardinality",
        "--input",
        &path_str(&orlib),
        "--fraction",
        "50",
        "--out",
        &path_str(&out),
    ]);
    assert_eq!(summary["bound"], 2);

    let bundle = read_native(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let ineq = &bundle.problem.inequalities()[0];
    assert_eq!(ineq.bound(), 2);
    assert!(ineq.coeffs().iter().all(|&c| c == 1));
    assert_eq!(bundle.problem.objective().entry(0, 1), -5);
    assert_eq!(bundle.problem.objective().entry(0, 0), -3);
}

#[test]
fn transform_reports_consistent_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.native");
    run_ok(&["gen", "qkp", "--n", "10", "--seed", "1", "--out", &path_str(&inst)]);

    let aug = dir.path().join("aug.native");
    let summary = run_ok(&[
        "transform", "--input", &path_str(&inst), "--rho", "10", "--out", &path_str(&aug),
    ]);
    let vars = summary["original_vars"].as_u64().unwrap();
    let slack = summary["slack_count"].as_u64().unwrap();
    assert_eq!(summary["augmented_vars"].as_u64().unwrap(), vars + slack);
    assert!(summary["penalty_weight"].as_i64().unwrap() > 0);
    assert_eq!(
        summary["effective_weight"].as_i64().unwrap(),
        100 * summary["penalty_weight"].as_i64().unwrap()
    );

    let out_bundle = read_native(&std::fs::read_to_string(&aug).unwrap()).unwrap();
    assert!(out_bundle.problem.inequalities().is_empty());
    assert_eq!(
        out_bundle.problem.dimension() as u64,
        summary["augmented_vars"].as_u64().unwrap()
    );
}

#[test]
fn solve_is_deterministic_and_writes_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.native");
    run_ok(&["gen", "qkp", "--n", "20", "--seed", "4", "--out", &path_str(&inst)]);

    let trace = dir.path().join("trace.csv");
    let args = [
        "solve",
        "--input",
        &path_str(&inst),
        "--rho",
        "10",
        "--seed",
        "7",
        "--iter-limit",
        "20000",
        "--out",
        &path_str(&trace),
    ];
    let first = run_ok(&args);
    let second = run_ok(&args);
    assert_eq!(first["best_objective"], second["best_objective"]);
    assert_eq!(first["iterations"], second["iterations"]);
    assert_eq!(first["restarts"], second["restarts"]);
    assert_eq!(first["feasible"], true);
    assert_eq!(first["sense"], "max");

    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.lines().count() >= 2);
    assert_eq!(text.lines().next().unwrap(), "elapsed_seconds,best_objective");
}

#[test]
fn sweep_exports_records_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.native");
    run_ok(&["gen", "qkp", "--n", "15", "--seed", "5", "--out", &path_str(&inst)]);

    let out = dir.path().join("sweep");
    let summary = run_ok(&[
        "sweep",
        "--input",
        &path_str(&inst),
        "--rho",
        "1,5",
        "--M",
        "auto,300000",
        "--iter-limit",
        "3000",
        "--threads",
        "2",
        "--out",
        &path_str(&out),
    ]);
    assert_eq!(summary["cells"], 4);
    assert_eq!(summary["cell_errors"], 0);

    let records = read_records_csv(out.join("records.csv")).unwrap();
    assert_eq!(records.len(), 4);
    for record in &records {
        assert!(record.error.is_empty());
        assert!(out.join(&record.trace_ref).exists(), "{}", record.trace_ref);
    }
}

#[test]
fn sweep_primes_covers_one_plus_primes_up_to_the_bound() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.native");
    run_ok(&["gen", "qkp", "--n", "6", "--seed", "9", "--out", &path_str(&inst)]);
    let bundle = read_native(&std::fs::read_to_string(&inst).unwrap()).unwrap();
    let bound = bundle.problem.inequalities()[0].bound();

    let out = dir.path().join("sweep");
    let summary = run_ok(&[
        "sweep",
        "--input",
        &path_str(&inst),
        "--rho",
        "primes",
        "--iter-limit",
        "200",
        "--out",
        &path_str(&out),
    ]);
    assert_eq!(
        summary["cells"].as_u64().unwrap() as usize,
        prime_sweep_list(bound).len()
    );
}

#[test]
fn oracle_confirms_unit_rho_on_a_small_instance() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.native");
    run_ok(&["gen", "qkp", "--n", "8", "--seed", "2", "--out", &path_str(&inst)]);

    let summary = run_ok(&["oracle", "--input", &path_str(&inst), "--rho", "1"]);
    assert_eq!(summary["mode"], "constrained");
    assert_eq!(summary["matches"], true);
    assert_eq!(summary["precondition"], true);
    assert_eq!(summary["degradation"], 0);
    assert_eq!(summary["base_objective"], summary["augmented_objective"]);
}

#[test]
fn stats_builds_deviation_and_win_tables() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.native");
    run_ok(&["gen", "qkp", "--n", "12", "--seed", "6", "--out", &path_str(&inst)]);
    let sweep_dir = dir.path().join("sweep");
    run_ok(&[
        "sweep",
        "--input",
        &path_str(&inst),
        "--rho",
        "1,3,9",
        "--iter-limit",
        "4000",
        "--out",
        &path_str(&sweep_dir),
    ]);

    let stats = dir.path().join("stats.csv");
    let summary = run_ok(&[
        "stats",
        "--input",
        &path_str(&sweep_dir.join("records.csv")),
        "--out",
        &path_str(&stats),
    ]);
    assert_eq!(summary["records"], 3);
    assert_eq!(summary["instances"], 1);
    assert_eq!(summary["wins"].as_array().unwrap().len(), 3);
    assert!(stats.exists());
    assert!(dir.path().join("stats-wins.csv").exists());

    let text = std::fs::read_to_string(&stats).unwrap();
    assert!(text.starts_with("instance,dimension,density_percent,rho"));
}

#[test]
fn failures_exit_nonzero_with_a_json_error_line() {
    let missing = run_err(&["solve", "--input", "no-such-file.native"]);
    assert!(
        missing["error"].as_str().unwrap().contains("no-such-file"),
        "{missing}"
    );

    let bad_rho = {
        let dir = tempfile::tempdir().unwrap();
        let inst = dir.path().join("inst.native");
        run_ok(&["gen", "qkp", "--n", "4", "--out", &path_str(&inst)]);
        run_err(&["sweep", "--input", &path_str(&inst), "--rho", "0", "--out", &path_str(&dir.path().join("s"))])
    };
    assert!(bad_rho["error"].as_str().unwrap().contains("rho"), "{bad_rho}");

    let bad_flag = run_err(&["solve", "--no-such-flag"]);
    assert!(bad_flag["error"].is_string());
}
