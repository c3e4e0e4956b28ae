use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn dunstan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dunstan"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn file(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json_lines(o: &Output) -> Vec<Value> {
    stdout(o)
        .lines()
        .map(|l| serde_json::from_str(l).expect("one JSON object per line"))
        .collect()
}

#[test]
fn decode_text() {
    let dir = tempfile::tempdir().unwrap();
    let p = file(&dir, "a.dst", "# curve\nf68r: o / a AND / TRE / HERE / o> AND\n");
    let o = dunstan(&["decode", s(&p), "--top", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let first = out.lines().next().unwrap();
    assert!(first.starts_with("f68r#1 | opaque=0"), "{first}");
    assert!(first.contains("| TO RIND TRE HERE AD |"), "{first}");
    assert_eq!(out.lines().count(), 3);
}

#[test]
fn decode_structured_with_trace() {
    let dir = tempfile::tempdir().unwrap();
    let p = file(&dir, "a.dst", "x: o> AND\n");
    let o = dunstan(&["--format", "structured", "decode", s(&p), "--top", "1", "--explain"]);
    assert_eq!(o.status.code(), Some(0));
    let v = &json_lines(&o)[0];
    assert_eq!(v["tag"], "x");
    assert_eq!(v["surface"], "AD");
    assert_eq!(v["score"]["opaque_chars"], 0);
    assert_eq!(v["trace"][0]["rule"], "OPrefixElision");
    assert_eq!(v["trace"][0]["after"], "AD");
}

#[test]
fn decode_explain_text() {
    let dir = tempfile::tempdir().unwrap();
    let p = file(&dir, "a.dst", "x: TRE~ME\n");
    let out = stdout(&dunstan(&["decode", s(&p), "--top", "1", "--explain"]));
    assert!(out.contains("METRE"));
    assert!(out.lines().any(|l| l.starts_with("    Ligature")), "{out}");
}

#[test]
fn bad_dst_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = file(&dir, "bad.dst", "x: PLA / / AT\n");
    let o = dunstan(&["decode", s(&p)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    assert!(o.stdout.is_empty());
}

#[test]
fn missing_file_exits_2() {
    assert_eq!(dunstan(&["decode", "/nonexistent/x.dst"]).status.code(), Some(2));
    assert_eq!(dunstan(&["stats", "/nonexistent/x.dst"]).status.code(), Some(2));
}

#[test]
fn usage_error_exits_2() {
    assert_eq!(dunstan(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn encode() {
    let out = stdout(&dunstan(&["encode", "plant retort qq"]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "PLA ANT / RET ORT");
    assert_eq!(lines[1], "residual: QQ");
    let v = &json_lines(&dunstan(&["--format", "structured", "encode", "TRE"]))[0];
    assert_eq!(v["dst"], "TRE");
    assert_eq!(v["residual"], serde_json::json!([]));
}

#[test]
fn segment() {
    let out = stdout(&dunstan(&["segment", "retortat"]));
    assert_eq!(out.trim(), "RETORT (pl.) | retorts");
    let v = &json_lines(&dunstan(&["--format", "structured", "segment", "TREAT"]))[0];
    assert_eq!(v["lexicon_chars"], 5);
}

#[test]
fn romandate() {
    let out = stdout(&dunstan(&["romandate", "DXVCM"]));
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("1615 PlainSum"));
    assert!(lines[1].starts_with("1585 SubtractXV"));
    let v = json_lines(&dunstan(&["--format", "structured", "romandate", "DXVCM"]));
    assert_eq!(v[0]["value"], 1615);
    assert_eq!(v[1]["interpretation"], "SubtractXV");
    assert_eq!(dunstan(&["romandate", "DXQ"]).status.code(), Some(2));
}

#[test]
fn masked() {
    let dir = tempfile::tempdir().unwrap();
    let p = file(&dir, "m.txt", "# glyph positions\nA,4,1\nV,1,4\nI,2,3\nV,3,2\n");
    assert_eq!(stdout(&dunstan(&["masked", s(&p)])).trim(), "VIVA");
    let bad = file(&dir, "b.txt", "A,4\n");
    assert_eq!(dunstan(&["masked", s(&bad)]).status.code(), Some(2));
}

#[test]
fn stats() {
    let dir = tempfile::tempdir().unwrap();
    let p = file(&dir, "a.dst", "a: ORT ORT / o\nb: TRE\n");
    let out = stdout(&dunstan(&["stats", s(&p)]));
    assert!(out.starts_with("symbols 3 letters 9 mean 3.000"), "{out}");
    assert!(out.lines().any(|l| l == "ORT 2"));
    let v = &json_lines(&dunstan(&["--format", "structured", "stats", s(&p)]))[0];
    assert_eq!(v["frequencies"]["TRE"], 1);
}

#[test]
fn shipped_fixtures_pass() {
    let o = dunstan(&["fixtures"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(!out.contains("FAIL"));
    assert!(out.lines().last().unwrap().ends_with("passed"));
}

#[test]
fn fixture_filter() {
    let out = stdout(&dunstan(&["fixtures", "--filter", "f68r"]));
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS")).count(), 3);
    assert!(out.contains("3/3 passed"));
}

#[test]
fn sabotaged_fixture_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let p = file(
        &dir,
        "fx.txt",
        "ok|decode|PLA ANT|PLANT|t\nbroken|decode|PLA ANT|PLANK|t\n",
    );
    let o = dunstan(&["fixtures", "--corpus", s(&p)]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("PASS ok"));
    assert!(out.contains("FAIL broken"));
    assert!(out.contains("+PLANT -PLANK"));
    let v = json_lines(&dunstan(&["--format", "structured", "fixtures", "--corpus", s(&p)]));
    assert_eq!(v[0]["id"], "broken");
    assert_eq!(v[0]["passed"], false);
    assert_eq!(v[2]["passed"], 1);
}

#[test]
fn malformed_corpus_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = file(&dir, "fx.txt", "only|three|fields\n");
    assert_eq!(dunstan(&["fixtures", "--corpus", s(&p)]).status.code(), Some(2));
}
