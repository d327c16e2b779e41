//! End-to-end tests of the `relens` binary: synthesize from a spec file,
//! apply the written lenses, validate specs, and benchmark a directory.

use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

fn relens() -> Command {
    Command::new(env!("CARGO_BIN_EXE_relens"))
}

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const PAIR_SPEC: &str = r#"
typedef src = "a" | "b";
typedef tgt = "x" | "y";
synth pair : src <=> tgt with { "a" <-> "y" };
"#;

#[test]
fn synth_writes_a_lens_file_that_run_applies_both_ways() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "pair.lspec", PAIR_SPEC);
    let lenses = dir.path().join("pair.lenses");

    let out = relens()
        .args(["synth", spec.to_str().unwrap(), "--out"])
        .arg(&lenses)
        .output()
        .unwrap();
    assert!(out.status.success(), "synth failed: {}", stderr(&out));
    assert!(stderr(&out).contains("task pair:"), "progress goes to stderr");

    let text = std::fs::read_to_string(&lenses).unwrap();
    assert!(text.contains("lens pair ="), "missing declaration:\n{text}");

    let input = write(&dir, "in.txt", "a\n");
    let out = relens()
        .args(["run", lenses.to_str().unwrap(), "--get"])
        .arg(&input)
        .output()
        .unwrap();
    assert!(out.status.success(), "run --get failed: {}", stderr(&out));
    assert_eq!(stdout(&out), "y\n");

    let back = write(&dir, "back.txt", "y\n");
    let out = relens()
        .args(["run", lenses.to_str().unwrap(), "--put"])
        .arg(&back)
        .output()
        .unwrap();
    assert!(out.status.success(), "run --put failed: {}", stderr(&out));
    assert_eq!(stdout(&out), "a\n");
}

#[test]
fn run_reads_stdin_when_no_input_file_is_given() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "pair.lspec", PAIR_SPEC);
    let lenses = dir.path().join("pair.lenses");
    let out = relens()
        .args(["synth", spec.to_str().unwrap(), "--out"])
        .arg(&lenses)
        .output()
        .unwrap();
    assert!(out.status.success(), "synth failed: {}", stderr(&out));

    let mut child = relens()
        .args(["run", lenses.to_str().unwrap(), "--get"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    use std::io::Write as _;
    child.stdin.take().unwrap().write_all(b"b\n").unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success(), "run failed: {}", stderr(&out));
    assert_eq!(stdout(&out), "x\n");
}

#[test]
fn run_exits_2_when_the_input_is_outside_the_format() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "pair.lspec", PAIR_SPEC);
    let lenses = dir.path().join("pair.lenses");
    let out = relens()
        .args(["synth", spec.to_str().unwrap(), "--out"])
        .arg(&lenses)
        .output()
        .unwrap();
    assert!(out.status.success(), "synth failed: {}", stderr(&out));

    let input = write(&dir, "bad.txt", "zzz\n");
    let out = relens()
        .args(["run", lenses.to_str().unwrap(), "--get"])
        .arg(&input)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    assert!(stdout(&out).is_empty());
    // The backward direction classifies against the target format instead.
    let out = relens()
        .args(["run", lenses.to_str().unwrap(), "--put"])
        .arg(dir.path().join("bad.txt"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
}

#[test]
fn run_requires_a_direction_and_a_unique_or_named_lens() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "pair.lspec", PAIR_SPEC);
    let lenses = dir.path().join("pair.lenses");
    let out = relens()
        .args(["synth", spec.to_str().unwrap(), "--out"])
        .arg(&lenses)
        .output()
        .unwrap();
    assert!(out.status.success());

    // Neither --get nor --put: argument error.
    let out = relens()
        .args(["run", lenses.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());

    // A lens name that is not declared.
    let out = relens()
        .args(["run", lenses.to_str().unwrap(), "--get", "--lens", "nope"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no lens named `nope`"));
}

#[test]
fn synth_solves_only_up_to_a_selected_task() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "two.lspec",
        r#"
synth first : "a" <=> "x";
synth second : "b" <=> "y";
"#,
    );
    let out = relens()
        .args(["synth", spec.to_str().unwrap(), "first"])
        .output()
        .unwrap();
    assert!(out.status.success(), "synth failed: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("lens first ="));
    assert!(!text.contains("lens second ="), "stopped early:\n{text}");

    let out = relens()
        .args(["synth", spec.to_str().unwrap(), "third"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no task named `third`"));
}

#[test]
fn synth_output_parses_back_and_reuses_earlier_lenses_by_name() {
    let out = relens()
        .args([
            "synth",
            corpus_dir().join("compositional.lspec").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "synth failed: {}", stderr(&out));
    let text = stdout(&out);
    let outer = text
        .lines()
        .find(|l| l.starts_with("lens outer ="))
        .expect("outer is declared");
    assert!(
        outer.contains("inner"),
        "outer should mention the inner lens by name: {outer}"
    );

    // The printed file is itself a valid spec file.
    let dir = TempDir::new().unwrap();
    let reparse = write(&dir, "again.lspec", &text);
    let out = relens()
        .args(["check", reparse.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "reparse failed: {}", stderr(&out));
}

#[test]
fn check_reports_each_task_and_flags_ambiguity() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "mixed.lspec",
        r#"
synth good : "a" | "b" <=> "x" | "y" with { "a" <-> "x" };
synth shaky : "a" | "a" <=> "x";
"#,
    );
    let out = relens()
        .args(["check", spec.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "check failed: {}", stderr(&out));
    let text = stdout(&out);
    assert!(
        text.contains("good: source ok, target ok, examples 1/1"),
        "unexpected report:\n{text}"
    );
    assert!(
        text.contains("shaky: source ambiguous, target ok"),
        "unexpected report:\n{text}"
    );
}

#[test]
fn bench_emits_one_csv_row_per_task() {
    let dir = TempDir::new().unwrap();
    write(&dir, "a.lspec", PAIR_SPEC);
    write(
        &dir,
        "b.lspec",
        "synth solo : \"m\" <=> \"n\";\n",
    );
    let out = relens()
        .args(["bench", dir.path().to_str().unwrap(), "--mode", "noer"])
        .output()
        .unwrap();
    assert!(out.status.success(), "bench failed: {}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("task,mode,success,wall_ms,pops,expansions_total,expansions_forced")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2, "one row per task:\n{text}");
    assert!(rows[0].starts_with("pair,noer,true,"));
    assert!(rows[1].starts_with("solo,noer,true,"));
}

#[test]
fn bench_keeps_going_past_an_unsolvable_task() {
    let dir = TempDir::new().unwrap();
    // Languages of different sizes admit no bijection: synthesis must fail,
    // and the failure must still produce a CSV row with its statistics.
    write(
        &dir,
        "a.lspec",
        "synth impossible : \"a\" | \"b\" <=> \"x\";\n",
    );
    write(&dir, "b.lspec", "synth fine : \"m\" <=> \"n\";\n")
        ;
    let out = relens()
        .args([
            "bench",
            dir.path().to_str().unwrap(),
            "--budget-pops",
            "200",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "bench failed: {}", stderr(&out));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2, "both tasks report:\n{text}");
    assert!(rows[0].starts_with("impossible,full,false,"));
    assert!(rows[1].starts_with("fine,full,true,"));
}
