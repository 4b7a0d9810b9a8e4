use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_outspace")).args(args).output().expect("runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn figure1_writes_one_dot_per_cover() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["repro", "figure1", "--format", "dot", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut names: Vec<String> =
        fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names.len(), 13);
    assert!(names.contains(&"figure1_k-5.dot".to_string()) && names.contains(&"figure1_k7.dot".to_string()));
    let k7 = fs::read_to_string(dir.path().join("figure1_k7.dot")).unwrap();
    assert!(k7.contains("color=red") && k7.contains("penwidth=3"));
}

#[test]
fn figure1_json_reports_no_mismatch() {
    let o = run(&["repro", "figure1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["data"]["covers"].as_array().unwrap().len(), 13);
    assert_eq!(v["data"]["mismatches"].as_array().unwrap().len(), 0);
    assert_eq!(v["data"]["dilatation"]["exact_root"], true);
}

#[test]
fn output_is_deterministic() {
    let args = ["project", "--rank", "4", "--A", "abaab,cb,abd", "--B", "a,c,d", "--format", "json"];
    let a = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&run(&args)));
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["data"]["gate"], "unknown");
}

#[test]
fn self_projection_has_its_own_exit_code() {
    let o = run(&["project", "--A", "a,b", "--B", "ba,b"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("PROJ_SELF"));
}

#[test]
fn bad_input_exits_with_two() {
    assert_eq!(run(&["project", "--A", "a,q", "--B", "b"]).status.code(), Some(2));
    assert_eq!(run(&["repro", "nothing"]).status.code(), Some(2));
    assert_eq!(run(&["repro", "colors", "--format", "dot"]).status.code(), Some(2));
}

#[test]
fn exported_graphs_fold() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src.json");
    let o = run(&["export", "json", "--rank", "2", "--out", src.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&src).unwrap()).unwrap();
    v["data"]["edges"][1]["word"] = "ba".into();
    v["data"]["edges"][1]["length"] = "1/2".into();
    let tgt = dir.path().join("tgt.json");
    fs::write(&tgt, v.to_string()).unwrap();
    let o = run(&["fold", "--from", src.to_str().unwrap(), "--guide", tgt.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let p: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(p["kind"], "folding_path");
    let events = p["data"]["events"].as_array().unwrap().len();
    assert!(events >= 1);
    assert_eq!(p["data"]["frames"].as_array().unwrap().len(), events + 1);
}

#[test]
fn reproductions_pass() {
    assert_eq!(run(&["repro", "colors"]).status.code(), Some(0));
    let o = run(&["repro", "dist4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("length 4, verified true"));
}
