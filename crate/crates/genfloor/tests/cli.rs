use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn genfloor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_genfloor")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn generate_evaluate_render_extend() {
    let dir = tempfile::tempdir().unwrap();
    let layout = dir.path().join("layout.json");
    let out = genfloor(&[
        "generate",
        "--reqs",
        s(&fixture("residential8_l1.csv")),
        "--method",
        "otree_proceeding",
        "--params",
        "2,6,5,0,0,3,7,0",
        "-o",
        s(&layout),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&layout), json(&fixture("residential8_layout.json")));

    let report = dir.path().join("eval.json");
    assert!(genfloor(&["evaluate", "--layout", s(&layout), "-o", s(&report)]).status.success());
    assert_eq!(json(&report)["adjacency"]["count"], 28);
    let l2 = genfloor(&["evaluate", "--layout", s(&layout), "--problem", s(&fixture("residential8.csv"))]);
    let v: serde_json::Value = serde_json::from_slice(&l2.stdout).unwrap();
    assert_eq!((v["adjacency"]["count"].as_u64(), v["adjacency"]["required"].as_u64()), (Some(20), Some(20)));

    for kind in ["floorplan", "bubble", "tree"] {
        let svg = dir.path().join(format!("{kind}.svg"));
        assert!(genfloor(&["render", "--layout", s(&layout), "--kind", kind, "-o", s(&svg)]).status.success());
        assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
    }

    let ext = dir.path().join("ext.json");
    assert!(genfloor(&["extend", "--layout", s(&layout), "--boundary", "20x26", "-o", s(&ext)]).status.success());
    let v = json(&ext);
    assert_eq!(v["coverage"], 1.0);
    assert_eq!(v["penalty"], false);
}

#[test]
fn optimize_writes_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let out = genfloor(&[
        "optimize",
        "--problem",
        s(&fixture("abc.csv")),
        "--pop",
        "10",
        "--gens",
        "3",
        "--seed",
        "5",
        "--objectives",
        "adjacency,area,distance",
        "-o",
        s(&run),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let history = std::fs::read_to_string(run.join("history.csv")).unwrap();
    assert_eq!(history.lines().count(), 5);
    assert!(run.join("config.json").exists());
    assert!(run.join("problem.json").exists());
    assert_eq!(json(&run.join("pareto/000.json"))["required"], 4);
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let reqs = fixture("abc.csv");
    let cases: Vec<Vec<&str>> = vec![
        vec!["generate", "--reqs", s(&reqs), "--params", "1,2"],
        vec!["generate", "--reqs", s(&reqs), "--params", "99,0,0"],
        vec!["generate", "--reqs", s(&reqs), "--rotations", "1"],
        vec!["optimize", "--problem", s(&reqs), "--pop", "3", "-o", "unused"],
        vec!["optimize", "--problem", s(&reqs), "--objectives", "beauty", "-o", "unused"],
        vec!["optimize", "--problem", s(&reqs), "--mutation", "1.5", "-o", "unused"],
    ];
    for args in cases {
        let out = genfloor(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "id,name,width,height,rotatable,flexible,adjacent_to\na,A,-1,2,false,true,\n").unwrap();
    assert_eq!(genfloor(&["generate", "--reqs", s(&bad)]).status.code(), Some(2));

    let layout = dir.path().join("l.json");
    assert!(genfloor(&["generate", "--reqs", s(&reqs), "-o", s(&layout)]).status.success());
    assert_eq!(genfloor(&["extend", "--layout", s(&layout), "--boundary", "12by8"]).status.code(), Some(2));
}

#[test]
fn missing_files_fail() {
    let out = genfloor(&["generate", "--reqs", "/nonexistent/reqs.csv"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}
