//! Shared domain types: point clouds, label fields, boundary masks and the
//! evaluation configuration.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_IGNORE_LABEL: i32 = -1;
pub const DEFAULT_RADIUS_M: f64 = 0.06;
pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;
pub const DEFAULT_MIN_COMPONENT_SIZE: usize = 50;

/// Point positions in meters with optional per-point colors and normals.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    positions: Vec<[f32; 3]>,
    colors: Option<Vec<[u8; 3]>>,
    normals: Option<Vec<[f32; 3]>>,
}

impl PointCloud {
    pub fn new(positions: Vec<[f32; 3]>) -> Result<Self> {
        Self::with_attributes(positions, None, None)
    }

    pub fn with_attributes(
        positions: Vec<[f32; 3]>,
        colors: Option<Vec<[u8; 3]>>,
        normals: Option<Vec<[f32; 3]>>,
    ) -> Result<Self> {
        let n = positions.len();
        if let Some(index) = positions
            .iter()
            .position(|p| p.iter().any(|c| !c.is_finite()))
        {
            return Err(Error::NonFiniteCoordinate { index });
        }
        if let Some(c) = &colors {
            check_len("colors", n, c.len())?;
        }
        if let Some(v) = &normals {
            check_len("normals", n, v.len())?;
        }
        Ok(Self {
            positions,
            colors,
            normals,
        })
    }

    pub fn empty() -> Self {
        Self {
            positions: Vec::new(),
            colors: None,
            normals: None,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    #[inline]
    pub fn positions(&self) -> &[[f32; 3]] {
        &self.positions
    }

    #[inline]
    pub fn position(&self, i: usize) -> [f32; 3] {
        self.positions[i]
    }

    pub fn colors(&self) -> Option<&[[u8; 3]]> {
        self.colors.as_deref()
    }

    pub fn normals(&self) -> Option<&[[f32; 3]]> {
        self.normals.as_deref()
    }

    /// Squared Euclidean distance between points `i` and `j`, evaluated in
    /// double precision. Every neighbor test in the crate goes through this.
    #[inline]
    pub fn dist2(&self, i: usize, j: usize) -> f64 {
        dist2(&self.positions[i], &self.positions[j])
    }

    /// Axis-aligned bounds `(min, max)`, or `None` for an empty cloud.
    pub fn bounds(&self) -> Option<([f64; 3], [f64; 3])> {
        let first = self.positions.first()?;
        let mut lo = first.map(f64::from);
        let mut hi = lo;
        for p in &self.positions[1..] {
            for a in 0..3 {
                let v = f64::from(p[a]);
                lo[a] = lo[a].min(v);
                hi[a] = hi[a].max(v);
            }
        }
        Some((lo, hi))
    }

    /// Reorders points so that new index `k` holds old point `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            positions: order.iter().map(|&i| self.positions[i]).collect(),
            colors: self
                .colors
                .as_ref()
                .map(|c| order.iter().map(|&i| c[i]).collect()),
            normals: self
                .normals
                .as_ref()
                .map(|v| order.iter().map(|&i| v[i]).collect()),
        }
    }
}

#[inline]
pub(crate) fn dist2(a: &[f32; 3], b: &[f32; 3]) -> f64 {
    let dx = f64::from(a[0]) - f64::from(b[0]);
    let dy = f64::from(a[1]) - f64::from(b[1]);
    let dz = f64::from(a[2]) - f64::from(b[2]);
    dx * dx + dy * dy + dz * dz
}

/// Per-point class ids with an ignore sentinel for unannotated points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelField {
    labels: Vec<i32>,
    ignore_label: i32,
}

impl LabelField {
    pub fn new(labels: Vec<i32>, ignore_label: i32) -> Result<Self> {
        if let Some(index) = labels.iter().position(|&l| l != ignore_label && l < 0) {
            return Err(Error::LabelOutOfRange {
                index,
                label: labels[index],
                num_classes: 0,
            });
        }
        Ok(Self {
            labels,
            ignore_label,
        })
    }

    /// Label field using the default ignore sentinel.
    pub fn from_labels(labels: Vec<i32>) -> Result<Self> {
        Self::new(labels, DEFAULT_IGNORE_LABEL)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn labels(&self) -> &[i32] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, i: usize) -> i32 {
        self.labels[i]
    }

    #[inline]
    pub fn ignore_label(&self) -> i32 {
        self.ignore_label
    }

    #[inline]
    pub fn is_ignored(&self, i: usize) -> bool {
        self.labels[i] == self.ignore_label
    }

    /// Class id of point `i`, or `None` for ignored points.
    #[inline]
    pub fn class_of(&self, i: usize) -> Option<usize> {
        let l = self.labels[i];
        (l != self.ignore_label).then_some(l as usize)
    }

    /// One past the largest non-ignore label (0 if there is none).
    pub fn max_class_bound(&self) -> usize {
        self.labels
            .iter()
            .filter(|&&l| l != self.ignore_label)
            .map(|&l| l as usize + 1)
            .max()
            .unwrap_or(0)
    }

    /// Copy of `self` where every point ignored in `mask_source` is ignored too.
    pub fn masked_by(&self, mask_source: &LabelField) -> Self {
        let labels = self
            .labels
            .iter()
            .zip(mask_source.labels())
            .map(|(&l, &m)| {
                if m == mask_source.ignore_label {
                    self.ignore_label
                } else {
                    l
                }
            })
            .collect();
        Self {
            labels,
            ignore_label: self.ignore_label,
        }
    }

    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            labels: order.iter().map(|&i| self.labels[i]).collect(),
            ignore_label: self.ignore_label,
        }
    }
}

/// Per-point boolean flags, e.g. boundary pseudo-labels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BoundaryMask {
    flags: Vec<bool>,
}

impl BoundaryMask {
    pub fn new(flags: Vec<bool>) -> Self {
        Self { flags }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.flags.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    #[inline]
    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.flags[i]
    }

    /// Number of set flags.
    pub fn count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.flags
            .iter()
            .enumerate()
            .filter_map(|(i, &f)| f.then_some(i))
    }

    pub fn into_flags(self) -> Vec<bool> {
        self.flags
    }
}

/// How DErr chooses its samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerrSamples {
    /// One sample per ground-truth class mask.
    #[default]
    Class,
    /// One sample per ground-truth connected component.
    Component,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    pub radius_m: f64,
    /// IoU threshold as a fraction in (0, 1); "50" in tables means 0.5.
    pub iou_threshold: f64,
    pub min_component_size: usize,
    pub num_classes: usize,
    pub ignore_label: i32,
    #[serde(default)]
    pub derr_samples: DerrSamples,
}

impl EvalConfig {
    pub fn new(num_classes: usize) -> Self {
        Self {
            radius_m: DEFAULT_RADIUS_M,
            iou_threshold: DEFAULT_IOU_THRESHOLD,
            min_component_size: DEFAULT_MIN_COMPONENT_SIZE,
            num_classes,
            ignore_label: DEFAULT_IGNORE_LABEL,
            derr_samples: DerrSamples::Class,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius_m > 0.0 && self.radius_m.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "radius must be positive, got {}",
                self.radius_m
            )));
        }
        if !(self.iou_threshold > 0.0 && self.iou_threshold < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "IoU threshold must lie in (0, 1), got {}",
                self.iou_threshold
            )));
        }
        if self.num_classes == 0 {
            return Err(Error::InvalidParameter("num_classes must be >= 1".into()));
        }
        if self.min_component_size == 0 {
            return Err(Error::InvalidParameter(
                "min_component_size must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Named, pairwise-disjoint sets of class ids (e.g. head / common / tail).
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, BTreeSet<usize>>")]
#[serde(into = "BTreeMap<String, BTreeSet<usize>>")]
pub struct ClassGroups {
    groups: BTreeMap<String, BTreeSet<usize>>,
}

impl ClassGroups {
    pub fn new(groups: BTreeMap<String, BTreeSet<usize>>) -> Result<Self> {
        let mut owner: BTreeMap<usize, &str> = BTreeMap::new();
        for (name, ids) in &groups {
            for &id in ids {
                if let Some(first) = owner.insert(id, name) {
                    return Err(Error::OverlappingGroups {
                        class: id,
                        first: first.to_string(),
                        second: name.clone(),
                    });
                }
            }
        }
        Ok(Self { groups })
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &BTreeSet<usize>)> {
        self.groups.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn check_classes(&self, num_classes: usize) -> Result<()> {
        for (name, ids) in &self.groups {
            if let Some(&bad) = ids.iter().find(|&&c| c >= num_classes) {
                return Err(Error::InvalidParameter(format!(
                    "group {name:?} contains class {bad}, but there are only {num_classes} classes"
                )));
            }
        }
        Ok(())
    }
}

impl TryFrom<BTreeMap<String, BTreeSet<usize>>> for ClassGroups {
    type Error = Error;

    fn try_from(groups: BTreeMap<String, BTreeSet<usize>>) -> Result<Self> {
        Self::new(groups)
    }
}

impl From<ClassGroups> for BTreeMap<String, BTreeSet<usize>> {
    fn from(g: ClassGroups) -> Self {
        g.groups
    }
}

/// A scene whose cloud, labels and configuration have been cross-checked.
#[derive(Debug, Clone, Copy)]
pub struct ValidatedScene<'a> {
    pub cloud: &'a PointCloud,
    pub gt: &'a LabelField,
    pub pred: &'a LabelField,
    pub cfg: &'a EvalConfig,
}

pub fn validate_scene<'a>(
    cloud: &'a PointCloud,
    gt: &'a LabelField,
    pred: &'a LabelField,
    cfg: &'a EvalConfig,
) -> Result<ValidatedScene<'a>> {
    cfg.validate()?;
    let n = cloud.len();
    check_len("ground-truth labels", n, gt.len())?;
    check_len("predicted labels", n, pred.len())?;
    for (what, field) in [("ground truth", gt), ("prediction", pred)] {
        if field.ignore_label() != cfg.ignore_label {
            return Err(Error::InvalidParameter(format!(
                "{what} uses ignore label {}, configuration uses {}",
                field.ignore_label(),
                cfg.ignore_label
            )));
        }
    }
    if let Some(index) = pred.labels().iter().position(|&l| l == cfg.ignore_label) {
        return Err(Error::IgnoreInPrediction { index });
    }
    for field in [gt, pred] {
        for (index, &label) in field.labels().iter().enumerate() {
            if label != cfg.ignore_label && (label < 0 || label as usize >= cfg.num_classes) {
                return Err(Error::LabelOutOfRange {
                    index,
                    label,
                    num_classes: cfg.num_classes,
                });
            }
        }
    }
    Ok(ValidatedScene {
        cloud,
        gt,
        pred,
        cfg,
    })
}

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::LengthMismatch {
            what,
            expected,
            found,
        });
    }
    Ok(())
}
