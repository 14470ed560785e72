#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn data(name: &str) -> PathBuf {
    data_dir().join(name)
}

pub fn etop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_etop")).args(args).output().expect("run etop")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

/// A 24-pipeline space that every bundled dataset accepts.
pub const SMALL_SPACE: &str = r#"{"slots": [
  [{"name": "impute", "params": {"strategy": "mean"}}, {"name": "impute", "params": {"strategy": "median"}},
   {"name": "impute", "params": {"strategy": "mode"}}, {"name": "impute", "params": {"strategy": "constant_zero"}}],
  [{"name": "encode", "params": {"kind": "onehot"}}, {"name": "encode", "params": {"kind": "ordinal"}}],
  [{"name": "dtree", "params": {"max_depth": 1, "min_leaf": 1}}, {"name": "knn", "params": {"k": 1}},
   {"name": "logreg", "params": {"lr": 0.1, "epochs": 100, "l2": 0.001}}]
]}"#;
