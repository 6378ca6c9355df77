#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn ooc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ooc"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("ooc runs")
}

/// Runs `ooc` and panics with its stderr unless it succeeds.
pub fn ok(dir: &Path, args: &[&str]) -> String {
    let out = ooc(dir, args);
    assert!(
        out.status.success(),
        "ooc {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn code(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = ooc(dir, args);
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

/// Every file under `root`, keyed by relative path.
pub fn snapshot(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

pub const TINY: &[&str] = &["--embed-dim", "8", "--hidden-dim", "16", "--batch-size", "16", "--lr", "0.01"];

/// A small raw-text corpus corrupted at rate 3 under `dir/c`.
pub fn corrupted_fixture(dir: &Path) {
    ok(dir, &["synth", "--kind", "fixture", "--documents", "12", "--sentences", "14", "--seed", "1", "--out", "raw"]);
    ok(dir, &["corrupt", "--corpus", "raw", "--out", "c", "--rate", "3", "--seed", "5"]);
}

pub fn with(base: &[&str], extra: &[&'static str]) -> Vec<String> {
    base.iter().chain(extra).map(|s| s.to_string()).collect()
}

pub fn run(dir: &Path, args: &[String]) -> String {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    ok(dir, &refs)
}
