//! JSON documents: class groups, scene specs (any serde type) and metric
//! reports. Report counters are stored as integers; metrics are stored as
//! decimal strings with 12 significant digits, or `null` when undefined.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{ConfusionMatrix, Counters, Metrics, MetricsReport};
use crate::types::{ClassGroups, EvalConfig};

const REPORT_FORMAT: &str = "segerr-report";
const REPORT_VERSION: u32 = 1;
/// Largest accepted gap between a stored metric and its recomputation.
const STORED_METRIC_TOLERANCE: f64 = 1e-9;

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// `{"group name": [class ids...], ...}`; groups may not share a class.
pub fn read_groups(path: impl AsRef<Path>) -> Result<ClassGroups> {
    read_json(path)
}

/// Formats a value with 12 significant digits.
pub fn format_metric(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v:.11}");
    }
    let exp = v.abs().log10().floor() as i32;
    let decimals = (11 - exp).max(0) as usize;
    format!("{v:.decimals$}")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoredMetrics {
    miou: Option<String>,
    macc: Option<String>,
    oacc: Option<String>,
    ferr: Option<String>,
    merr: Option<String>,
    rerr: Option<String>,
    derr: Option<String>,
    per_class_iou: Vec<Option<String>>,
    group_iou: BTreeMap<String, Option<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportFile {
    format: String,
    version: u32,
    scenes: u64,
    config: EvalConfig,
    groups: ClassGroups,
    counters: Counters,
    metrics: StoredMetrics,
}

fn store(v: Option<f64>) -> Option<String> {
    v.map(format_metric)
}

impl From<&MetricsReport> for ReportFile {
    fn from(r: &MetricsReport) -> Self {
        let m = &r.metrics;
        Self {
            format: REPORT_FORMAT.into(),
            version: REPORT_VERSION,
            scenes: r.scenes,
            config: r.config.clone(),
            groups: r.groups.clone(),
            counters: r.counters.clone(),
            metrics: StoredMetrics {
                miou: store(m.miou),
                macc: store(m.macc),
                oacc: store(m.oacc),
                ferr: store(m.ferr),
                merr: store(m.merr),
                rerr: store(m.rerr),
                derr: store(m.derr),
                per_class_iou: m.per_class_iou.iter().map(|v| store(*v)).collect(),
                group_iou: m.group_iou.iter().map(|(k, v)| (k.clone(), store(*v))).collect(),
            },
        }
    }
}

fn bad(message: String) -> Error {
    Error::InvalidParameter(message)
}

/// Parses one stored value and checks it against the recomputed one.
fn load(name: &str, stored: &Option<String>, expected: Option<f64>) -> Result<Option<f64>> {
    let value = match stored {
        None => None,
        Some(s) => Some(
            s.parse::<f64>()
                .map_err(|_| bad(format!("metric {name}: {s:?} is not a number")))?,
        ),
    };
    match (value, expected) {
        (None, None) => Ok(None),
        (Some(v), Some(e)) if (v - e).abs() <= STORED_METRIC_TOLERANCE => Ok(Some(v)),
        _ => Err(bad(format!(
            "stored metric {name} ({value:?}) disagrees with its counters ({expected:?})"
        ))),
    }
}

impl TryFrom<ReportFile> for MetricsReport {
    type Error = Error;

    fn try_from(f: ReportFile) -> Result<Self> {
        if f.format != REPORT_FORMAT || f.version != REPORT_VERSION {
            return Err(bad(format!(
                "unsupported report format {:?} version {}",
                f.format, f.version
            )));
        }
        f.config.validate()?;
        f.groups.check_classes(f.config.num_classes)?;
        let cm = &f.counters.confusion;
        ConfusionMatrix::from_counts(cm.num_classes(), cm.counts().to_vec())?;
        if cm.num_classes() != f.config.num_classes {
            return Err(Error::ShapeMismatch(format!(
                "confusion matrix has {} classes, configuration has {}",
                cm.num_classes(),
                f.config.num_classes
            )));
        }
        f.counters.check()?;

        let e = Metrics::from_counters(&f.counters, &f.groups);
        let s = &f.metrics;
        if s.per_class_iou.len() != e.per_class_iou.len() {
            return Err(Error::ShapeMismatch("per-class IoU list has the wrong length".into()));
        }
        if s.group_iou.len() != e.group_iou.len()
            || s.group_iou.keys().zip(e.group_iou.keys()).any(|(a, b)| a != b)
        {
            return Err(Error::ShapeMismatch("group IoU names differ from the groups".into()));
        }
        let metrics = Metrics {
            per_class_iou: s
                .per_class_iou
                .iter()
                .zip(&e.per_class_iou)
                .enumerate()
                .map(|(c, (v, x))| load(&format!("per_class_iou[{c}]"), v, *x))
                .collect::<Result<_>>()?,
            miou: load("miou", &s.miou, e.miou)?,
            macc: load("macc", &s.macc, e.macc)?,
            oacc: load("oacc", &s.oacc, e.oacc)?,
            group_iou: s
                .group_iou
                .iter()
                .zip(e.group_iou.values())
                .map(|((k, v), x)| Ok((k.clone(), load(k, v, *x)?)))
                .collect::<Result<_>>()?,
            ferr: load("ferr", &s.ferr, e.ferr)?,
            merr: load("merr", &s.merr, e.merr)?,
            rerr: load("rerr", &s.rerr, e.rerr)?,
            derr: load("derr", &s.derr, e.derr)?,
        };
        Ok(MetricsReport {
            config: f.config,
            groups: f.groups,
            scenes: f.scenes,
            counters: f.counters,
            metrics,
        })
    }
}

pub fn report_to_json(report: &MetricsReport) -> String {
    let mut s = serde_json::to_string_pretty(&ReportFile::from(report))
        .expect("report serialization cannot fail");
    s.push('\n');
    s
}

/// Parses a report. Metric values are the stored ones; they must agree with
/// the counters to within 1e-9.
pub fn report_from_json(text: &str, path: &Path) -> Result<MetricsReport> {
    let file: ReportFile = serde_json::from_str(text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    MetricsReport::try_from(file)
}

pub fn write_report(path: impl AsRef<Path>, report: &MetricsReport) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, report_to_json(report)).map_err(|e| Error::io(path, e))
}

pub fn read_report(path: impl AsRef<Path>) -> Result<MetricsReport> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    report_from_json(&text, path)
}
