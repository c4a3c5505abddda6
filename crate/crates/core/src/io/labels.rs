//! One integer per line. Blank lines are skipped; surrounding whitespace is
//! allowed.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{BoundaryMask, LabelField};

/// Parses label text; `path` is only used in error messages.
pub fn parse_labels(text: &str, path: &Path) -> Result<Vec<i32>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v = t.parse::<i32>().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: k + 1,
            message: format!("expected an integer label, found {t:?}"),
        })?;
        out.push(v);
    }
    Ok(out)
}

/// Reads a prediction file. The count must match the scene and no line may
/// carry the ignore label.
pub fn read_pred_labels(
    path: impl AsRef<Path>,
    expected_count: usize,
    ignore_label: i32,
) -> Result<LabelField> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let labels = parse_labels(&text, path)?;
    if labels.len() != expected_count {
        return Err(Error::LengthMismatch {
            what: "prediction file",
            expected: expected_count,
            found: labels.len(),
        });
    }
    if let Some(index) = labels.iter().position(|&l| l == ignore_label) {
        return Err(Error::IgnoreInPrediction { index });
    }
    LabelField::new(labels, ignore_label)
}

pub fn write_labels(path: impl AsRef<Path>, labels: &[i32]) -> Result<()> {
    let path = path.as_ref();
    let mut s = String::with_capacity(labels.len() * 3);
    for l in labels {
        writeln!(s, "{l}").unwrap();
    }
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

pub fn write_mask(path: impl AsRef<Path>, mask: &BoundaryMask) -> Result<()> {
    let path = path.as_ref();
    let mut s = String::with_capacity(mask.len() * 2);
    for &f in mask.flags() {
        s.push_str(if f { "1\n" } else { "0\n" });
    }
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<BoundaryMask> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut flags = Vec::new();
    for (k, line) in text.lines().enumerate() {
        match line.trim() {
            "" => {}
            "0" => flags.push(false),
            "1" => flags.push(true),
            t => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: k + 1,
                    message: format!("expected 0 or 1, found {t:?}"),
                })
            }
        }
    }
    Ok(BoundaryMask::new(flags))
}
