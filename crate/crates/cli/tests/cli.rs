use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn strata(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_strata")).args(args).env_remove("STRATA_SEED").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(out: &Output) -> Value {
    assert_eq!(code(out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn counts(v: &Value) -> Vec<u64> {
    v["counts_by_dim"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).collect()
}

fn densities(v: &Value) -> Vec<String> {
    let mut out: Vec<String> = v["strata"]
        .as_array()
        .unwrap()
        .iter()
        .filter_map(|s| s["density"]["polynomial"].as_str().map(String::from))
        .collect();
    out.sort();
    out
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn golden_counts() {
    let v = json(&strata(&["stratify", path(&example("paper_cp1xcp2.json"))]));
    assert_eq!(counts(&v), [7, 10, 4]);
    assert_eq!(v["strata"].as_array().unwrap().len(), 21);
    assert!(v["strata"][20].get("density").is_none());

    let v = json(&strata(&["stratify", path(&example("square_identity.json"))]));
    assert_eq!(counts(&v), [4, 4, 1]);
    let v = json(&strata(&["stratify", path(&example("simplex_sum.json"))]));
    assert_eq!(counts(&v), [2, 1]);
}

#[test]
fn densities_match_the_golden_file() {
    let out = strata(&["dh", path(&example("paper_cp1xcp2.json"))]);
    let golden =
        std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/paper_cp1xcp2.dh.json"))
            .unwrap();
    assert_eq!(String::from_utf8(out.stdout.clone()).unwrap(), golden);
    assert_eq!(densities(&json(&out)), ["-x - y + 4", "-y + 3", "1", "x"]);

    let v = json(&strata(&["dh", path(&example("simplex_sum.json"))]));
    assert_eq!(densities(&v), ["t"]);
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let input = example("paper_cp1xcp2.json");
    assert_eq!(code(&strata(&["dh", path(&input), "--out", path(&a), "--seed", "1"])), 0);
    assert_eq!(code(&strata(&["dh", path(&input), "--out", path(&b), "--seed", "99", "--sequential"])), 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    // more held-out points only strengthen the check
    let c = dir.path().join("c.json");
    assert_eq!(code(&strata(&["dh", path(&input), "--out", path(&c), "--samples", "25"])), 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());

    let v: Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    assert_eq!(v["provenance"]["input_sha256"].as_str().unwrap().len(), 64);
    assert!(v["provenance"]["tool_version"].as_str().unwrap().starts_with("strata "));
}

#[test]
fn render_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.json");
    let svg = dir.path().join("s.svg");
    assert_eq!(code(&strata(&["dh", path(&example("paper_cp1xcp2.json")), "--out", path(&s)])), 0);
    assert_eq!(code(&strata(&["render", path(&s), "--out", path(&svg)])), 0);
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<?xml"));
    assert_eq!(text.matches("<circle ").count(), 7);
    assert_eq!(text.matches("<line ").count(), 10);
    assert_eq!(text.matches("<polygon ").count(), 4);
    assert!(text.contains(">-y + 3</text>"));

    let bare = strata(&["render", path(&s), "--no-labels"]);
    assert_eq!(code(&bare), 0);
    assert!(!String::from_utf8(bare.stdout).unwrap().contains("<text "));
}

#[test]
fn validate_cover_reports() {
    let ok = strata(&["validate-cover", path(&example("square_identity.json"))]);
    assert_eq!(code(&ok), 0);
    assert!(String::from_utf8(ok.stdout).unwrap().starts_with("cover is valid"));

    let bad = strata(&["validate-cover", path(&example("slit_box.json"))]);
    assert_eq!(code(&bad), 3);
    let report = String::from_utf8(bad.stdout).unwrap();
    assert!(report.starts_with("cover is invalid"));
    assert!(report.contains("(0, 0)"));
    assert!(String::from_utf8(bad.stderr).unwrap().contains("members [0, 1]"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    };

    let garbage = write("garbage.json", "{ not json");
    assert_eq!(code(&strata(&["stratify", path(&garbage)])), 2);
    assert_eq!(code(&strata(&["stratify", path(&dir.path().join("missing.json"))])), 2);
    let unbounded = write(
        "open.json",
        r#"{"ambient_dim": 2, "inequalities": [{"normal": [-1, 0], "offset": "0"}], "subtorus_matrix": [[1], [0]]}"#,
    );
    assert_eq!(code(&strata(&["stratify", path(&unbounded)])), 2);
    let cover = strata(&["stratify", path(&example("slit_box.json"))]);
    assert_eq!(code(&cover), 3);

    let valid_cover = write(
        "segment.json",
        r#"{"ambient_dim": 1, "members": [{"vertices": [["0"]]}, {"vertices": [["1"]]}, {"vertices": [["0"], ["1"]]}]}"#,
    );
    assert_eq!(code(&strata(&["stratify", path(&valid_cover)])), 0);
    // a cover has no torus action to integrate over
    assert_eq!(code(&strata(&["dh", path(&valid_cover)])), 2);

    assert_eq!(code(&strata(&["render", path(&example("paper_cp1xcp2.json"))])), 2);
    let space = write(
        "cube.json",
        r#"{"ambient_dim": 3, "inequalities": [
            {"normal": [-1, 0, 0], "offset": "0"}, {"normal": [1, 0, 0], "offset": "1"},
            {"normal": [0, -1, 0], "offset": "0"}, {"normal": [0, 1, 0], "offset": "1"},
            {"normal": [0, 0, -1], "offset": "0"}, {"normal": [0, 0, 1], "offset": "1"}],
            "subtorus_matrix": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}"#,
    );
    let cube = dir.path().join("cube.strata.json");
    assert_eq!(code(&strata(&["stratify", path(&space), "--out", path(&cube)])), 0);
    assert_eq!(code(&strata(&["render", path(&cube)])), 6);
}

#[test]
fn oracle_agrees() {
    let out = strata(&["oracle", path(&example("paper_cp1xcp2.json")), "--samples", "2", "--trials", "20000"]);
    assert_eq!(code(&out), 0);
    let table = String::from_utf8(out.stdout).unwrap();
    // header plus two rows per chamber
    assert_eq!(table.lines().count(), 9);
    assert!(table.lines().skip(1).all(|l| l.ends_with("\tyes")));
}
