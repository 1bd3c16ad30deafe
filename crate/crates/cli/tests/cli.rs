use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_ltperiod");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn records(text: &str) -> Vec<serde_json::Value> {
    text.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn status_of<'a>(recs: &'a [serde_json::Value], id: &str) -> &'a str {
    recs.iter().find(|r| r["check_id"] == id).unwrap_or_else(|| panic!("no record {id}"))["status"].as_str().unwrap()
}

#[test]
fn w_table_rows() {
    let o = run(&["w-table", "--p", "2", "--max", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,digits,w,monna");
    assert_eq!(lines.len(), 9);
    // 7 = (111)_2: w = (2/3)(1 + 1/2 + 1/4), M = 7/8
    assert_eq!(lines[8], "7,1 1 1,7/6,7/8");
    assert_eq!(lines[1], "0,0,0,0");
    // 3 = q − 1 is the first k with w = 1
    assert_eq!(lines[4], "3,1 1,1,3/4");
}

#[test]
fn w_table_json() {
    let o = run(&["w-table", "--p", "3", "--max", "8", "--format", "json"]);
    let rows: Vec<serde_json::Value> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[8]["w"], "1");
    assert_eq!(rows[8]["digits"], serde_json::json!([2, 2]));
}

#[test]
fn pk_prints_polynomials() {
    for method in ["comb", "series"] {
        let o = run(&["pk", "--p", "2", "--k", "4", "--method", method]);
        assert_eq!(stdout(&o).trim(), "Y^4/24 + Y/2");
    }
    let o = run(&["pk", "--p", "2", "--k", "8"]);
    assert_eq!(stdout(&o).trim(), "Y^8/40320 + Y^5/48 + Y^2/8");
    let o = run(&["pk", "--p", "2", "--k", "2", "--method", "poly"]);
    assert_eq!(stdout(&o).trim(), "Y^2/2");
}

#[test]
fn mulp_polynomial_model() {
    let o = run(&["mulp", "--p", "2", "--cap", "10", "--model", "polynomial"]);
    assert_eq!(stdout(&o).trim(), "(2)*Z^1 + (1)*Z^4 + O(Z^10)");
}

#[test]
fn usage_errors_exit_three() {
    assert_eq!(run(&["w-table", "--p", "4"]).status.code(), Some(3));
    assert_eq!(run(&["nonsense"]).status.code(), Some(3));
    let o = run(&["solve-omega", "--p", "3", "--tail-truncation", "100"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("tail bound"), "{}", stderr(&o));
}

#[test]
fn props_w_with_jobs() {
    let o = run(&["--jobs", "1", "props-w", "--p", "3", "--kmax", "800", "--pairs", "200", "--subs", "200"]);
    assert_eq!(o.status.code(), Some(0));
    let recs = records(&stdout(&o));
    assert_eq!(recs.len(), 7);
    assert_eq!(recs[6]["summary"]["counts"]["pass"], 6);
}

#[test]
fn config_file_and_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# table\np = 3\nmax = 3\n").unwrap();
    let c = cfg.to_str().unwrap();
    let o = run(&["--config", c, "w-table"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 5);
    let o = run(&["--config", c, "w-table", "--max", "5"]);
    assert_eq!(stdout(&o).lines().count(), 7);
    std::fs::write(&cfg, "not a pair\n").unwrap();
    assert_eq!(run(&["--config", c, "w-table"]).status.code(), Some(3));
}

fn solve_p3(dir: &Path) -> String {
    let path = dir.join("cert.json");
    let o = run(&["solve-omega", "--p", "3", "--out", path.to_str().unwrap()]);
    // level 2 is not integral at k = 81, so the certificate is flagged invalid
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("integrality: fail"));
    path.to_str().unwrap().to_string()
}

#[test]
fn verify_ranges_and_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let cert = solve_p3(dir.path());

    let o = run(&["verify", "--cert", &cert, "--kmax", "101"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("beyond the certificate truncation"));

    let o = run(&["verify", "--cert", &cert, "--kmax", "27", "--s3-kmax", "27"]);
    let recs = records(&stdout(&o));
    assert_eq!(status_of(&recs, "audit:valuation"), "pass");
    assert_eq!(status_of(&recs, "audit:integrality"), "fail");
    assert_eq!(status_of(&recs, "thmA:k=27"), "pass");
    assert_eq!(o.status.code(), Some(1));

    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    v["omega"]["coeffs"].as_array_mut().unwrap().insert(0, serde_json::json!([0, "1"]));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, v.to_string()).unwrap();
    let o = run(&["verify", "--cert", bad.to_str().unwrap(), "--kmax", "27"]);
    assert_eq!(o.status.code(), Some(1));
    let recs = records(&stdout(&o));
    assert_eq!(status_of(&recs, "audit:valuation"), "fail");
    assert_eq!(status_of(&recs, "audit:torsion-root"), "fail");
}

#[test]
fn all_is_deterministic_at_p3() {
    let dir = tempfile::tempdir().unwrap();
    let small = [
        "all", "--p", "3", "--pk-mmax", "40", "--w-kmax", "500", "--w-pairs", "100", "--w-subs", "100",
        "--identity-kmax", "40", "--functional-zcap", "12", "--lemma35-cap", "20", "--zeta-mmax", "60",
        "--lucas-mmax", "40", "--kmax", "27",
    ];
    let mut outs = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("r{i}.jsonl"));
        let mut args = small.to_vec();
        args.extend(["--out", path.to_str().unwrap()]);
        let o = run(&args);
        assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
        outs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
    let text = String::from_utf8(outs.pop().unwrap()).unwrap();
    let recs = records(&text);
    let summary = &recs.last().unwrap()["summary"];
    assert_eq!(summary["command"], "all");
    assert_eq!(summary["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(status_of(&recs, "solver:torsion-root"), "pass");
    assert_eq!(status_of(&recs, "thmA:k=9"), "pass");
}
