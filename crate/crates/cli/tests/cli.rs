use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn softsheaf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_softsheaf"))
        .args(args)
        .env_remove("SOFTSHEAF_CAPS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn json_lines(o: &Output) -> Vec<Value> {
    stdout(o).lines().map(|l| serde_json::from_str(l).expect("one JSON record per line")).collect()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.display().to_string()
}

#[test]
fn verify_single_instance_passes() {
    let o = softsheaf(&["verify", "thm-gamma", "--algebra", "set3", "--lattice", "bool4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("k-sheaf-condition"));
}

#[test]
fn verify_targets_select_their_checks() {
    for (target, theorem) in [("cor-main", "representation-round-trip"), ("t-gen", "omega-sheaf-correspondence")] {
        let o = softsheaf(&["--format", "json", "verify", target, "--algebra", "Z4", "--lattice", "chain3"]);
        assert_eq!(o.status.code(), Some(0));
        let recs = json_lines(&o);
        assert!(recs.iter().any(|r| r["theorem"] == theorem));
        assert!(recs.iter().all(|r| r["pass"] == true));
    }
}

#[test]
fn gelfand_z12_has_four_element_frame() {
    let o = softsheaf(&["--format", "json", "gelfand", "--ring", "zn:12"]);
    assert_eq!(o.status.code(), Some(0));
    let recs = json_lines(&o);
    let size = recs.iter().find(|r| r["info"] == "jrid_frame_size").expect("frame size record");
    assert_eq!(size["value"], 4);
    let check = recs.iter().find(|r| r["theorem"] == "gelfand-representation").unwrap();
    assert_eq!(check["pass"], true);
    assert!(check.get("counterexample").is_none());
}

#[test]
fn pierce_z6_splits_into_two_and_three() {
    let o = softsheaf(&["--format", "json", "pierce", "--ring", "zn:6"]);
    assert_eq!(o.status.code(), Some(0));
    let recs = json_lines(&o);
    let sizes = recs.iter().find(|r| r["info"] == "factor_sizes").unwrap();
    assert_eq!(sizes["value"], serde_json::json!([2, 3]));
}

#[test]
fn non_transitive_matrix_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.lat", "matrix 3\n1 1 0\n0 1 1\n0 0 1\n");
    let o = softsheaf(&["check-lattice", &bad]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 1") && err.contains("not transitive"), "{err}");
}

#[test]
fn algebra_parse_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.alg", "algebra 2\nsig op/2\n0 1\n1 x\n");
    let o = softsheaf(&["check-algebra", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("line 4"));
}

#[test]
fn check_lattice_and_algebra_files() {
    let dir = tempfile::tempdir().unwrap();
    let m3 = write(dir.path(), "m3.lat", "lattice 5\n0<1\n0<2\n0<3\n1<4\n2<4\n3<4\n");
    let o = softsheaf(&["check-lattice", &m3]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("distributive: false"));
    let dot = softsheaf(&["--format", "dot", "check-lattice", &m3]);
    assert!(stdout(&dot).starts_with("digraph"));

    let z2 = write(dir.path(), "z2.alg", "algebra 2\nsig mul/2 inv/1 e/0\n0 1 1 0\n0 1\n0\n");
    let o = softsheaf(&["check-algebra", &z2]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("malcev-commuting"));
}

#[test]
fn con_lattice_of_set3_has_five_partitions() {
    let o = softsheaf(&["--format", "json", "con-lattice", "set3"]);
    assert_eq!(o.status.code(), Some(0));
    let recs = json_lines(&o);
    assert_eq!(recs.iter().find(|r| r["info"] == "size").unwrap()["value"], 5);
}

#[test]
fn commute_triple_reports_all_four_predicates() {
    let o = softsheaf(&["--format", "json", "verify", "commute-triple", "--algebra", "set3", "--theta1", "0,0,1", "--theta2", "0,1,1"]);
    assert_eq!(o.status.code(), Some(0));
    let recs = json_lines(&o);
    let infos: Vec<&Value> = recs.iter().filter(|r| r.get("info").is_some()).collect();
    assert_eq!(infos.len(), 4);
    assert!(infos.iter().all(|r| r["value"] == false));
}

#[test]
fn bijection_from_files_with_dot() {
    let dir = tempfile::tempdir().unwrap();
    let c2 = write(dir.path(), "c2.pos", "poset 2\n0<1\n");
    let o = softsheaf(&["--format", "json", "compord", "bijection", "--x", &c2, "--y", &c2]);
    assert_eq!(o.status.code(), Some(0));
    let recs = json_lines(&o);
    assert_eq!(recs.iter().find(|r| r["info"] == "decompositions").unwrap()["value"], 4);
    let dot = softsheaf(&["--format", "dot", "compord", "bijection", "--x", &c2, "--y", &c2]);
    assert_eq!(stdout(&dot).matches("digraph").count(), 4);
    assert!(stdout(&dot).contains("style=dashed"));
}

#[test]
fn caps_from_environment_and_violations() {
    let o = Command::new(env!("CARGO_BIN_EXE_softsheaf"))
        .args(["--format", "json", "verify", "wilker"])
        .env("SOFTSHEAF_CAPS", "lattice=3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_lines(&o).len(), 9);
    let o = softsheaf(&["--caps", "lattice=99", "verify", "wilker"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("cap violation"));
}

#[test]
fn corpus_is_deterministic_and_counted() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = d.path().display().to_string();
        let o = softsheaf(&["--seed", "5", "--caps", "lattice=4,points=3,ring=6", "--out", &out, "generate-corpus"]);
        assert_eq!(o.status.code(), Some(0));
    }
    let ma = fs::read_to_string(a.path().join("manifest.json")).unwrap();
    assert_eq!(ma, fs::read_to_string(b.path().join("manifest.json")).unwrap());
    let m: Value = serde_json::from_str(&ma).unwrap();
    assert_eq!(m["lattices"].as_array().unwrap().len(), 5);
    assert_eq!(m["spaces"].as_array().unwrap().len(), 1 + 2 + 5);
    assert!(a.path().join("rings/zn-06.ring").is_file());
    let lat = a.path().join("lattices/lattice-4-000.lat").display().to_string();
    assert_eq!(softsheaf(&["check-lattice", &lat]).status.code(), Some(0));

    let o = softsheaf(&["--caps", "lattice=1,points=1,ring=1", "generate-corpus"]);
    let m: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(m["lattices"].as_array().unwrap().len(), 1);
    assert_eq!(m["lattices"][0]["elements"], 1);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut bodies = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("r{k}.jsonl")).display().to_string();
        let o = softsheaf(&["--format", "json", "--out", &out, "--seed", "3", "verify", "commute-triple"]);
        assert_eq!(o.status.code(), Some(0));
        bodies.push(fs::read(&out).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
    assert!(!bodies[0].is_empty());
}
