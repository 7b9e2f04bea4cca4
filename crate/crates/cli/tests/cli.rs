use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use nsconic::io::{parse_problem, SolutionReport};
use nsconic::problems;

fn problem(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("problems")
        .join(format!("{name}.json"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nsconic"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn path_str(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn shipped_problem_files_match_the_built_in_problems() {
    assert_eq!(parse_problem(problem("lp")).unwrap(), problems::tiny_lp());
    assert_eq!(
        parse_problem(problem("exp")).unwrap(),
        problems::exp_problem()
    );
    assert_eq!(
        parse_problem(problem("pow")).unwrap(),
        problems::power_problem()
    );
    assert_eq!(
        parse_problem(problem("infeasible")).unwrap(),
        problems::infeasible_lp()
    );
}

#[test]
fn adaptive_lp_writes_json_solution() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("lp.sol.json");
    let lp = problem("lp");
    let out = run(&[
        "solve",
        path_str(&lp),
        "--mode",
        "adaptive",
        "--epsilon",
        "1e-8",
        "--json-out",
        path_str(&json),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let sol: SolutionReport = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(sol.status, nsconic::hsd::Status::Optimal);
    assert!((sol.primal_objective - 1.0).abs() < 1e-6);
}

#[test]
fn infeasible_lp_exits_zero_with_certificate() {
    let f = problem("infeasible");
    let out = run(&["solve", path_str(&f), "--mode", "adaptive"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("PrimalInfeasible"));
}

#[test]
fn verified_theoretical_runs_have_no_failures() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["lp", "exp", "pow"] {
        let f = problem(name);
        let trace = dir.path().join(format!("{name}.csv"));
        let out = run(&[
            "solve",
            path_str(&f),
            "--mode",
            "theoretical",
            "--epsilon",
            "0.5",
            "--verify",
            "--trace",
            path_str(&trace),
        ]);
        let stdout = String::from_utf8_lossy(&out.stdout);
        assert_eq!(code(&out), 0, "{name}: {stdout}");
        assert!(stdout.contains(" 0 failed"), "{name}: {stdout}");
        let replay = run(&["verify", path_str(&trace)]);
        assert_eq!(
            code(&replay),
            0,
            "{name}: {}",
            String::from_utf8_lossy(&replay.stdout)
        );
    }
}

#[test]
fn corrupted_trace_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let garbage = dir.path().join("garbage.csv");
    fs::write(&garbage, "iter,mu_e\n0,not-a-number\n").unwrap();
    assert_eq!(code(&run(&["verify", path_str(&garbage)])), 3);

    // a well-formed trace whose numbers were edited fails the decay checks
    let trace = dir.path().join("lp.csv");
    let lp = problem("lp");
    let out = run(&[
        "solve",
        path_str(&lp),
        "--epsilon",
        "0.9",
        "--trace",
        path_str(&trace),
    ]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(&trace).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut fields: Vec<String> = lines[5].split(',').map(String::from).collect();
    fields[1] = "0.5".into();
    lines[5] = fields.join(",");
    let tampered = dir.path().join("tampered.csv");
    fs::write(&tampered, lines.join("\n") + "\n").unwrap();
    assert_eq!(code(&run(&["verify", path_str(&tampered)])), 3);
}

#[test]
fn input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["solve", "/nonexistent/problem.json"])), 1);
    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"m": 0, "n": 3, "A": [], "b": [], "c": [0, 0, 1], "cones": [{"type": "pow", "alpha": 1.2}]}"#,
    )
    .unwrap();
    assert_eq!(code(&run(&["solve", path_str(&bad)])), 1);
    let lp = problem("lp");
    assert_eq!(code(&run(&["solve", path_str(&lp), "--epsilon", "2"])), 1);
    assert_eq!(code(&run(&["verify", "/nonexistent/trace.csv"])), 1);
}

#[test]
fn iteration_limit_exits_two() {
    let lp = problem("lp");
    let out = run(&["solve", path_str(&lp), "--max-iters", "10"]);
    assert_eq!(code(&out), 2);
}
