#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn textprep<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_textprep"))
        .args(args)
        .output()
        .expect("textprep runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Asserts success and returns stdout.
#[track_caller]
pub fn ok(out: Output) -> String {
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    stdout(&out)
}

pub fn fixture_corpus() -> String {
    textprep::fixture::CORPUS.to_string()
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    if let Some(parent) = p.parent() {
        fs::create_dir_all(parent).unwrap();
    }
    fs::write(&p, text).unwrap();
    p
}

pub fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap()
}

/// A database directory holding the collision fixture.
pub fn collision_db(dir: &Path) -> PathBuf {
    let db = dir.join("collisions");
    write(&db, "ids.txt", textprep::fixture::COLLISION_IDS);
    write(&db, "strokes.txt", textprep::fixture::COLLISION_STROKES);
    db
}

/// Splits the fixture corpus into two halves to act as source and target.
pub fn split_fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let lines: Vec<&str> = textprep::fixture::CORPUS.lines().collect();
    let half = lines.len() / 2;
    let src = write(dir, "data/src.txt", &(lines[..half].join("\n") + "\n"));
    let tgt = write(dir, "data/tgt.txt", &(lines[half..].join("\n") + "\n"));
    (src, tgt)
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
