#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kcgml_cli::manifest::hash_tree;

pub fn kcgml(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kcgml"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn ok(args: &[&str]) -> Output {
    let out = kcgml(args);
    assert!(
        out.status.success(),
        "kcgml {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

/// Small synthetic office and light training so each run takes well under a second.
pub const SMALL: &[&str] = &[
    "--synthetic",
    "--n-people",
    "40",
    "--n-timestamps",
    "120",
    "--walks",
    "2",
    "--length",
    "20",
    "--window",
    "3",
    "--epochs",
    "1",
    "--sage-epochs",
    "2",
];

pub fn with(dir: &Path, cmd: &[&str], extra: &[&str]) -> Vec<String> {
    let mut args = vec!["--out".to_owned(), dir.display().to_string()];
    args.extend(cmd.iter().map(|s| s.to_string()));
    args.extend(extra.iter().map(|s| s.to_string()));
    args
}

pub fn run_ok(dir: &Path, cmd: &[&str], extra: &[&str]) -> Output {
    let args = with(dir, cmd, extra);
    ok(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

pub fn run(dir: &Path, cmd: &[&str], extra: &[&str]) -> Output {
    let args = with(dir, cmd, extra);
    kcgml(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

pub fn hashes(dir: &Path) -> BTreeMap<String, String> {
    hash_tree(dir).expect("readable run dir")
}

pub fn json(path: PathBuf) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display())))
        .expect("valid json")
}
