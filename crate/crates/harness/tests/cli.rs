use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use tempfile::TempDir;

const POINT: &str = r#"{"format": "coarsex/1", "points": ["pt"]}"#;

const CYCLE: &str = r#"{
    "format": "coarsex/1",
    "points": ["0", "1", "2", "3", "4"],
    "entourages": {"U1": [["0","1"],["1","2"],["2","3"],["3","4"],["4","0"]]},
    "bornology": [["0","1","2","3","4"]]
}"#;

const SWAP: &str = r#"{
    "format": "coarsex/1",
    "points": ["a", "b"],
    "group": "Z2",
    "action": {"e": [0, 1], "t1": ["b", "a"]},
    "entourages": {"U": [["a", "b"]]},
    "bornology": [["a", "b"]]
}"#;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn coarsex(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_coarsex")).args(args).output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_exit_codes() {
    let dir = TempDir::new().unwrap();
    let ok = coarsex(&["validate", s(&write(&dir, "pt.json", POINT))]);
    assert_eq!(ok.code, 0, "{}", ok.stdout);
    assert!(ok.stdout.lines().all(|l| l.starts_with("PASS")));

    // t1 acts trivially on a three-element group but t1∘t1 = t2 moves points
    let broken = r#"{"format": "coarsex/1", "points": ["a","b"], "group": "Z3",
        "action": {"e": [0,1], "t1": [1,0], "t2": [1,0]}}"#;
    let bad = coarsex(&["validate", s(&write(&dir, "bad.json", broken))]);
    assert_eq!(bad.code, 1);
    assert!(bad.stdout.contains("FAIL"));

    let malformed = coarsex(&["validate", s(&write(&dir, "m.json", "{\"format\": \"coarsex/1\",\n \"points\": [1}"))]);
    assert_eq!(malformed.code, 2);
    assert!(malformed.stderr.contains("m.json:2:"), "{}", malformed.stderr);

    assert_eq!(coarsex(&["frobnicate"]).code, 2);
    assert_eq!(coarsex(&["validate", "/nonexistent/space.json"]).code, 2);
}

#[test]
fn homology_of_point_and_group_homology() {
    let dir = TempDir::new().unwrap();
    let r = coarsex(&["homology", "--max-degree", "3", s(&write(&dir, "pt.json", POINT))]);
    assert_eq!(r.code, 0);
    assert_eq!(r.stdout, "H0 Z\nH1 0\nH2 0\nH3 0\n");

    let g = coarsex(&["group-homology", "--group", "z2", "--max-degree", "3"]);
    assert_eq!(g.code, 0);
    assert!(g.stdout.ends_with("Z, Z/2, 0, Z/2\n"), "{}", g.stdout);

    let set = coarsex(&["group-homology", "--group", "z2", "--set", s(&write(&dir, "swap.json", SWAP)), "--max-degree", "1"]);
    assert_eq!(set.code, 0);
    assert!(set.stdout.starts_with("H0 Z\nH1 0\n"), "{}", set.stdout);
}

#[test]
fn phi_psi_on_cosets() {
    let dir = TempDir::new().unwrap();
    let r = coarsex(&["phi-psi", "--group", "z2", "--set", s(&write(&dir, "swap.json", SWAP)), "--max-degree", "2"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert!(r.stdout.contains("PASS ψ∘φ = id"));
    assert_eq!(coarsex(&["phi-psi", "--group", "s3"]).code, 0);
}

#[test]
fn rips_of_five_cycle_with_export() {
    let dir = TempDir::new().unwrap();
    let export = dir.path().join("c5.txt");
    let r = coarsex(&["rips", "--entourage", "U1", "--max-dim", "2", "--export", s(&export), s(&write(&dir, "c5.json", CYCLE))]);
    assert_eq!(r.code, 0, "{}{}", r.stdout, r.stderr);
    assert!(r.stdout.contains("simplices 0 5\nsimplices 1 5\n"), "{}", r.stdout);
    assert!(r.stdout.contains("H1 Z\n"));
    assert_eq!(fs::read_to_string(&export).unwrap().lines().count(), 10);
    let missing = coarsex(&["rips", "--entourage", "V", s(&dir.path().join("c5.json"))]);
    assert_eq!(missing.code, 2);
}

#[test]
fn change_group_restricts_and_writes() {
    let dir = TempDir::new().unwrap();
    let hom = r#"{"format": "coarsex/1", "hom": {"source": "trivial", "target": "Z2", "map": ["e"]}}"#;
    let out = dir.path().join("res.json");
    let r = coarsex(&[
        "change-group", "--kind", "res", "--hom", s(&write(&dir, "hom.json", hom)), "--check-degree", "1", "--out", s(&out),
        s(&write(&dir, "swap.json", SWAP)),
    ]);
    assert_eq!(r.code, 0, "{}{}", r.stdout, r.stderr);
    assert!(r.stdout.contains("orbits 2"));
    assert_eq!(coarsex(&["validate", s(&out)]).code, 0);

    let ind = coarsex(&["change-group", "--kind", "ind", "--hom", s(&dir.path().join("hom.json")), s(&write(&dir, "pt.json", POINT))]);
    assert_eq!(ind.code, 0, "{}", ind.stderr);
    assert!(ind.stdout.contains("points 2"));
}

#[test]
fn mackey_on_subgroups() {
    let dir = TempDir::new().unwrap();
    let pt = write(&dir, "pt.json", POINT);
    let r = coarsex(&["mackey", "--group", "z4", "--into", "e,t2", s(&pt)]);
    assert_eq!(r.code, 0, "{}{}", r.stdout, r.stderr);
    assert!(r.stdout.contains("PASS isomorphism"));
    let s3 = coarsex(&["mackey", "--group", "s3", "--into", "e,(12)", "--into-prime", "e,(13)", s(&pt)]);
    assert_eq!(s3.code, 0, "{}", s3.stderr);
    let not_subgroup = coarsex(&["mackey", "--group", "z4", "--into", "e,t1", s(&pt)]);
    assert_eq!(not_subgroup.code, 2);
}

#[test]
fn axioms_report_and_mutation() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("report.json");
    let r = coarsex(&["axioms", "--seed", "3", "--trials", "4", "--max-size", "4", "--report", s(&report)]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert!(r.stdout.contains(json["digest"].as_str().unwrap()));
    let again = coarsex(&["axioms", "--seed", "3", "--trials", "4", "--max-size", "4"]);
    assert_eq!(again.stdout.lines().last(), r.stdout.lines().last());

    let broken = coarsex(&["axioms", "--trials", "2", "--mutate", "break-cocycle"]);
    assert_eq!(broken.code, 1);
    assert!(broken.stdout.contains("FAIL controlled"));
    assert_eq!(coarsex(&["axioms", "--trials", "0"]).code, 2);
}

const SIGN: &str = r#"{
    "format": "coarsex/1",
    "space": {"format": "coarsex/1", "points": ["pt"], "group": "Z2"},
    "object": {"dims": [1], "cocycle": {"t1": [[[-1]]]}},
    "subgroup": ["e", "t1"]
}"#;

const BAND: &str = r#"{
    "format": "coarsex/1",
    "space": {"format": "coarsex/1", "points": ["0","1","2","3","4","5"],
              "entourages": {"U": [["0","1"],["1","2"],["2","3"],["3","4"],["4","5"]]}},
    "object": {"dims": [1, 1, 1, 1, 1, 1]}
}"#;

const TWO: &str = r#"{
    "format": "coarsex/1",
    "space": {"format": "coarsex/1", "points": ["a","b"], "entourages": {"U": [["a","b"]]}, "bornology": [["a","b"]]},
    "object": {"dims": [1, 1]}
}"#;

#[test]
fn controlled_objects() {
    let dir = TempDir::new().unwrap();
    let sign = write(&dir, "sign.json", SIGN);
    assert_eq!(coarsex(&["ctrl", "validate", s(&sign)]).code, 0);
    let bh = coarsex(&["ctrl", "functor", "--kind", "bh", s(&sign)]);
    assert_eq!(bh.code, 0, "{}{}", bh.stdout, bh.stderr);
    assert!(bh.stdout.contains("Φ(t1) = [-1]"));
    let conv = coarsex(&["ctrl", "functor", "--kind", "conv", s(&sign)]);
    assert_eq!(conv.code, 0, "{}{}", conv.stdout, conv.stderr);

    let broken = write(&dir, "broken.json", &SIGN.replace("[[[-1]]]", "[[[2]]]"));
    assert_eq!(coarsex(&["ctrl", "validate", s(&broken)]).code, 1);

    let band = write(&dir, "band.json", BAND);
    let k = coarsex(&["ctrl", "karoubi", "--seed-set", "0", s(&band)]);
    assert_eq!(k.code, 0, "{}{}", k.stdout, k.stderr);
    assert!(k.stdout.contains("PASS diagram commutes"));

    let two = write(&dir, "two.json", TWO);
    let q = coarsex(&["ctrl", "quotient-hom", "--sub", "a", s(&two)]);
    assert_eq!(q.code, 0, "{}", q.stderr);
    assert!(q.stdout.contains("hom rank 4\n"));
    assert!(q.stdout.contains("quotient 0\n"));
    assert!(q.stdout.contains("blockwise quotient Z\n"));
}
