//! Runs the `dx` binary end to end.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use laconic::fixtures;
use laconic::model::{instances_isomorphic, parse_facts_inferred};

fn dx(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dx")).current_dir(dir).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("fig2a.map"), fixtures::PAIRS[0].left).unwrap();
    fs::write(dir.path().join("example5.map"), fixtures::TWO_PATTERNS).unwrap();
    fs::write(dir.path().join("p_a.facts"), "P(a).\n").unwrap();
    dir
}

#[test]
fn core_of_single_fact() {
    let dir = setup();
    let o = dx(dir.path(), &["core", "-m", "fig2a.map", "-i", "p_a.facts", "-o", "core.facts"]);
    assert!(o.status.success(), "{o:?}");
    let core = parse_facts_inferred(&fs::read_to_string(dir.path().join("core.facts")).unwrap()).unwrap();
    assert_eq!(core.len(), 1);
    assert_eq!(core.nulls().len(), 1);
}

#[test]
fn chase_is_not_a_core_but_core_is() {
    let dir = setup();
    let chase =
        parse_facts_inferred(&stdout(&dx(dir.path(), &["chase", "-m", "fig2a.map", "-i", "p_a.facts"]))).unwrap();
    assert_eq!(chase.len(), 2);
    let core = parse_facts_inferred(&stdout(&dx(dir.path(), &["core", "-m", "fig2a.map", "-i", "p_a.facts"]))).unwrap();
    assert!(!instances_isomorphic(&chase, &core));
}

#[test]
fn blocks_table_has_three_types() {
    let dir = setup();
    let o = dx(dir.path(), &["blocks", "-m", "example5.map", "--eliminate-certain"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with('t')).count(), 3);
    assert_eq!(text.lines().filter(|l| l.trim_start().starts_with("pre:")).count(), 3);
    assert!(!text.contains("certain["));
}

#[test]
fn laconified_output_verifies() {
    let dir = setup();
    let o = dx(dir.path(), &["laconify", "-m", "fig2a.map", "-o", "out.map"]);
    assert!(o.status.success(), "{o:?}");
    let ok = dx(dir.path(), &["verify", "laconic", "-m", "out.map", "--samples", "200", "--seed", "7"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    let eq = dx(dir.path(), &["verify", "equiv", "-m", "out.map", "--against", "fig2a.map", "--samples", "50"]);
    assert_eq!(eq.status.code(), Some(0));
    let bad = dx(dir.path(), &["verify", "laconic", "-m", "fig2a.map", "--samples", "20"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("P(a)."), "{}", stdout(&bad));
}

#[test]
fn seed_from_environment_and_jsonl() {
    let dir = setup();
    let run = |seed: &str, log: &str| {
        Command::new(env!("CARGO_BIN_EXE_dx"))
            .current_dir(dir.path())
            .env("DX_SEED", seed)
            .args(["verify", "laconic", "-m", "example5.map", "--samples", "10", "--jsonl", log])
            .output()
            .unwrap()
    };
    let (a, b) = (run("3", "a.jsonl"), run("3", "b.jsonl"));
    assert_eq!(a.stdout, b.stdout);
    let text = fs::read_to_string(dir.path().join("a.jsonl")).unwrap();
    assert_eq!(text, fs::read_to_string(dir.path().join("b.jsonl")).unwrap());
    assert_eq!(text.lines().count(), 10);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v.get("seed").is_some() && v.get("verdict").is_some(), "{line}");
    }
}

#[test]
fn csv_input_and_sql_script() {
    let dir = setup();
    fs::create_dir(dir.path().join("src")).unwrap();
    fs::write(dir.path().join("src/P.csv"), "a\nb\n").unwrap();
    let o = dx(dir.path(), &["chase", "-m", "fig2a.map", "--csv", "src"]);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(parse_facts_inferred(&stdout(&o)).unwrap().len(), 4);
    let sql = dx(dir.path(), &["emit-sql", "-m", "fig2a.map", "--laconify", "--ddl"]);
    assert!(sql.status.success());
    let script = stdout(&sql);
    let conn = rusqlite::Connection::open_in_memory().unwrap();
    conn.execute_batch(&script).unwrap();
    conn.execute_batch("INSERT INTO \"P\" VALUES ('a'), ('b');").unwrap();
    let n: i64 = conn.query_row("SELECT COUNT(*) FROM \"target_R\"", [], |r| r.get(0)).unwrap();
    assert_eq!(n, 2);
}

#[test]
fn certain_answers_both_ways() {
    let dir = setup();
    let args = ["certain", "-m", "example5.map", "-i", "p_a.facts", "-q", "[x] exists y: R1(x, y)"];
    let a = dx(dir.path(), &args);
    assert!(a.status.success(), "{a:?}");
    let mut unfolded = args.to_vec();
    unfolded.push("--unfold");
    let b = dx(dir.path(), &unfolded);
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).contains('a'));
}

#[test]
fn errors_exit_with_usage_code() {
    let dir = setup();
    assert_eq!(dx(dir.path(), &["chase", "-m", "missing.map", "-i", "p_a.facts"]).status.code(), Some(2));
    assert_eq!(dx(dir.path(), &["nonsense"]).status.code(), Some(2));
}
