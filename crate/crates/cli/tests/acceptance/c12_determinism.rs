use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

use crate::Outcome;

const BIN: &str = env!("CARGO_BIN_EXE_prosper");

fn prosper(out: &Path, args: &[&str]) -> Result<(), String> {
    let status = Command::new(BIN)
        .args(args)
        .arg("--out")
        .arg(out)
        .arg("--seed")
        .arg("17")
        .output()
        .map_err(|e| e.to_string())?;
    if status.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&status.stderr).trim()))
    }
}

fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "manifest.json" {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                files.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    files
}

const STEPS: &[&[&str]] = &[
    &["gen", "--kind", "random-utility", "--prompts", "6", "--responses", "6", "--criteria", "3"],
    &["audit"],
    &["audit", "--mode", "aggregate"],
    &["solve", "--variant", "full,vb,jc", "--iterations", "40"],
    &["solve", "--variant", "full", "--iterations", "40", "--estimator", "exact"],
    &["tournament"],
    &["tournament", "--sampled", "2000"],
    &["diag"],
    &["converge", "--horizons", "10,100", "--seeds", "1,2", "--oracle-iterations", "5000"],
];

pub fn run() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    let mut diffs = Vec::new();
    for step in STEPS {
        for dir in [&a, &b] {
            if let Err(e) = prosper(dir, step) {
                return Outcome::new(false, format!("command failed: {e}"));
            }
        }
        let mut single = step.to_vec();
        single.extend(["--threads", "1"]);
        if let Err(e) = prosper(&c, &single) {
            return Outcome::new(false, format!("command failed: {e}"));
        }
        let (sa, sb, sc) = (snapshot(&a), snapshot(&b), snapshot(&c));
        if sa != sb || sa != sc {
            let bad: Vec<&String> = sa.keys().filter(|k| sb.get(*k) != sa.get(*k) || sc.get(*k) != sa.get(*k)).collect();
            diffs.push(format!("{} -> {bad:?}", step[0]));
        }
    }
    let files = snapshot(&a).len();
    Outcome::new(
        diffs.is_empty(),
        if diffs.is_empty() {
            format!("{} commands rerun (default and single-threaded): {files} report files byte-identical", STEPS.len())
        } else {
            format!("differences: {}", diffs.join("; "))
        },
    )
}
