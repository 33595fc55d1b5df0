use std::path::Path;
use std::process::{Command, Output};

fn swtest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swtest")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn test_reports_a_periodic_cosine() {
    let o = swtest(&["test", "--fn", "cos", "--n", "500", "--b", "200", "--N", "10", "--alpha", "0.05", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("PERIODIC"));
    assert!(text.contains("c_alpha = "));
    assert!(text.contains("top H1 persistence: "));
}

#[test]
fn oversized_subsample_is_a_usage_error() {
    let o = swtest(&["bound", "--b", "600", "--n", "500"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("b > n"));
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(swtest(&["test", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(swtest(&["test", "--fn", "nope"]).status.code(), Some(1));
    assert_eq!(swtest(&["test", "--alpha", "1.5"]).status.code(), Some(1));
    assert_eq!(swtest(&["--help"]).status.code(), Some(0));
}

#[test]
fn unreadable_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("none.csv");
    assert_eq!(swtest(&["test", "--input", missing.to_str().unwrap()]).status.code(), Some(2));
    let flat = dir.path().join("flat.csv");
    let rows: String = (0..200).map(|i| format!("{},2.5\n", i as f64 * 0.1)).collect();
    std::fs::write(&flat, format!("t,value\n{rows}")).unwrap();
    let o = swtest(&["test", "--input", flat.to_str().unwrap(), "--mode", "normalized", "--b", "50", "--L", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_writes_the_table_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t3.csv");
    let log = dir.path().join("t3.json");
    let o = swtest(&[
        "simulate", "--table", "3", "--reps", "2", "--clean-only", "--out", out.to_str().unwrap(), "--log",
        log.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "method,noise_kind,scale,detections,repetitions");
    assert!(lines[1].starts_with("Tds,none,0,"));
    assert!(lines[2].starts_with("GLS,none,0,"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&log).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["cells"][0]["runs"].as_array().unwrap().len(), 2);
}

#[test]
fn simulate_accepts_a_plan_file() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.toml");
    std::fs::write(
        &plan,
        "table = 2\nn = 150\nb = 40\nrepetitions = 2\nnoise = [\"none\", \"GA:0.1\"]\nmethods = [\"tds\", \"gls\"]\n",
    )
    .unwrap();
    let o = swtest(&["simulate", "--plan", plan.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 5);
    std::fs::write(&plan, "repetitions = 0\n").unwrap();
    assert_eq!(swtest(&["simulate", "--plan", plan.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn embed_and_diagram_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cloud = dir.path().join("cloud.csv");
    let o = swtest(&["embed", "--fn", "cos", "--n", "200", "--N", "3", "--mode", "normalized", "--out", cloud.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let rows = std::fs::read_to_string(&cloud).unwrap();
    assert!(rows.lines().all(|l| l.split(',').count() == 7));
    let o = swtest(&["diagram", "--cloud", cloud.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("dim,birth,death"));
    assert!(text.lines().any(|l| l.starts_with("1,")));

    let bin = dir.path().join("cloud.bin");
    let o = swtest(&["embed", "--fn", "cos", "--n", "200", "--N", "3", "--format", "bin", "--out", bin.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let bytes = std::fs::read(&bin).unwrap();
    assert_eq!(bytes.len() % (7 * 8), 0);
}

#[test]
fn gls_writes_the_periodogram() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pg.csv");
    let o = swtest(&["gls", "--fn", "f1", "--n", "300", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("PERIODIC"));
    let pg = std::fs::read_to_string(&out).unwrap();
    assert_eq!(pg.lines().next(), Some("frequency,power"));
}

#[test]
fn converge_and_real_run() {
    let o = swtest(&["converge", "--n", "300", "--b", "100", "--Ns", "3,6", "--draws", "200"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("slope successive d_B"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "t,value\n0,1\n").unwrap();
    let o = swtest(&["real", bad.to_str().unwrap(), Path::new("/nonexistent.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.contains("ERROR")).count(), 2);
}
