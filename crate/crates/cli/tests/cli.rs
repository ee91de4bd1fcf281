use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn otc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_otc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn measure_runs_at_the_hoeffding_budget() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = write(
        dir.path(),
        "rho.json",
        r#"{"dims":[2],"re":[0.75,0,0,0.25],"im":[0,0,0,0]}"#,
    );
    let r = json_of(&otc(&[
        "measure", "--state", s(&fixture), "--obs", "sigmaz", "--delta", "0.1", "--eps", "0.05",
        "--trials", "200", "--seed", "7",
    ]));
    assert_eq!(r["theory"]["ancillas"], 738);
    let rate = r["aggregate"]["failure_rate"].as_f64().unwrap();
    let limit = r["theory"]["failure_rate_limit_3sigma"].as_f64().unwrap();
    assert!(rate <= limit, "{rate} > {limit}");
    assert_eq!(r["trials"].as_array().unwrap().len(), 200);
    assert_eq!(r["trials"][3]["seed"], 10);
    assert_eq!(r["config"]["subcommand"], "measure");
}

#[test]
fn unsatisfiable_formula_is_always_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = write(dir.path(), "unsat.cnf", "c all four clauses\np cnf 2 4\n1 2 0\n-1 2 0\n1 -2 0\n-1 -2 0\n");
    for mode in ["analytic", "circuit"] {
        let r = json_of(&otc(&[
            "sat", "--cnf", s(&cnf), "--p", "3", "--q", "20", "--trials", "100", "--seed", "1",
            "--mode", mode,
        ]));
        assert_eq!(r["aggregate"]["satisfiable_votes"], 0);
        assert!(r["trials"]
            .as_array()
            .unwrap()
            .iter()
            .all(|t| t["answer"] == "unsatisfiable"));
    }
}

#[test]
fn malformed_cnf_exits_with_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = write(dir.path(), "bad.cnf", "p cnf 2 2\n1 -2 0\n3 0\n");
    let out = otc(&["sat", "--cnf", s(&cnf)]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("line 3"), "{msg}");

    let out = otc(&["sat", "--cnf", s(&dir.path().join("absent.cnf"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_arguments_exit_with_one() {
    let out = otc(&["measure", "--bloch", "0,0,1", "--delta", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("delta"));
    assert_eq!(otc(&["measure", "--nonsense"]).status.code(), Some(1));
    assert_eq!(otc(&["measure", "--bloch", "2,0,0"]).status.code(), Some(1));
    assert_eq!(otc(&["measure", "--bloch", "0,0,1", "--obs", "gm4"]).status.code(), Some(1));
    assert_eq!(otc(&["sgate", "--bloch", "0,0,1", "--trials", "0"]).status.code(), Some(1));
}

#[test]
fn protocol_failure_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("p cnf 12 1\n");
    text.push_str("1 2 3 0\n");
    let cnf = write(dir.path(), "wide.cnf", &text);
    let out = otc(&["sat", "--cnf", s(&cnf), "--mode", "circuit"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn reports_are_deterministic_except_for_the_timestamp() {
    let args = ["clone", "--bloch", "0.1,-0.4,0.6", "--trials", "8", "--seed", "3"];
    let mut a = json_of(&otc(&args));
    let mut b = json_of(&otc(&args));
    for r in [&mut a, &mut b] {
        r["provenance"].as_object_mut().unwrap().remove("timestamp");
    }
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn csv_goes_to_the_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("agg.csv");
    let out = otc(&["sgate", "--bloch", "0,0,0.5", "--p", "3", "--format", "csv", "--out", s(&path)]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 1);
    let col = headers.iter().position(|h| h == "aggregate.n_z_out").unwrap();
    let nz: f64 = rows[0][col].parse().unwrap();
    assert!((nz - 0.5f64.powi(8)).abs() < 1e-12);
}

#[test]
fn grandfather_fixpoint_is_maximally_mixed() {
    let r = json_of(&otc(&["fixpoint", "--bloch", "0,0,1", "--interaction", "grandfather"]));
    let re = r["trials"][0]["solution"]["re"].as_array().unwrap();
    let re: Vec<f64> = re.iter().map(|v| v.as_f64().unwrap()).collect();
    assert!((re[0] - 0.5).abs() < 1e-10 && (re[3] - 0.5).abs() < 1e-10);
    assert!(r["aggregate"]["residual"].as_f64().unwrap() <= 1e-10);
}
