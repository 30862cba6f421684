//! CSV and manifest serialisation of results, written atomically.
//!
//! Floats use Rust's shortest round-trip formatting, so identical values
//! always produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::{LabelNoiseRun, NoisePoint, RunRecord};

pub const CURVE_HEADER: &str = "iteration,train_loss,train_acc,test_acc";
pub const INPUT_NOISE_HEADER: &str = "epsilon,accuracy";
pub const LABEL_NOISE_HEADER: &str = "fraction,iteration,test_acc";

pub fn curve_csv(records: &[RunRecord]) -> String {
    let mut out = format!("{CURVE_HEADER}\n");
    for r in records {
        let _ = writeln!(out, "{},{},{},{}", r.iteration, r.train_loss, r.train_acc, r.test_acc);
    }
    out
}

pub fn input_noise_csv(points: &[NoisePoint]) -> String {
    let mut out = format!("{INPUT_NOISE_HEADER}\n");
    for p in points {
        let _ = writeln!(out, "{},{}", p.epsilon, p.accuracy);
    }
    out
}

pub fn label_noise_csv(runs: &[LabelNoiseRun]) -> String {
    let mut out = format!("{LABEL_NOISE_HEADER}\n");
    for run in runs {
        for r in &run.records {
            let _ = writeln!(out, "{},{},{}", run.fraction, r.iteration, r.test_acc);
        }
    }
    out
}

pub fn manifest_text<K: AsRef<str>, V: AsRef<str>>(entries: &[(K, V)]) -> String {
    let mut out = String::new();
    for (k, v) in entries {
        let _ = writeln!(out, "{}={}", k.as_ref(), v.as_ref());
    }
    out
}

/// Writes `contents` to a sibling temp file and renames it over `path`,
/// creating parent directories as needed.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("{} has no file name", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::RunStatus;

    #[test]
    fn curve_format() {
        let text = curve_csv(&[RunRecord {
            iteration: 500,
            train_loss: 0.25,
            train_acc: 1.0,
            test_acc: 0.875,
        }]);
        assert_eq!(text, "iteration,train_loss,train_acc,test_acc\n500,0.25,1,0.875\n");
    }

    #[test]
    fn noise_formats() {
        let text = input_noise_csv(&[NoisePoint { epsilon: 0.5, accuracy: 0.75 }]);
        assert_eq!(text, "epsilon,accuracy\n0.5,0.75\n");
        let run = LabelNoiseRun {
            fraction: 0.2,
            records: vec![RunRecord {
                iteration: 10,
                train_loss: 1.0,
                train_acc: 0.5,
                test_acc: 0.25,
            }],
            status: RunStatus::Completed,
        };
        assert_eq!(label_noise_csv(&[run]), "fraction,iteration,test_acc\n0.2,10,0.25\n");
    }

    #[test]
    fn atomic_write_creates_parents_and_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a/b/curve.csv");
        write_atomic(&path, b"x\n").unwrap();
        write_atomic(&path, b"y\n").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "y\n");
        let names: Vec<_> = fs::read_dir(path.parent().unwrap())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(names.len(), 1);
    }

    #[test]
    fn manifest_lines() {
        assert_eq!(manifest_text(&[("seed", "3"), ("loss", "log")]), "seed=3\nloss=log\n");
    }
}
