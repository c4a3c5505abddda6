//! Traditional segmentation metrics (IoU, accuracy) and the four error
//! metrics: region classification error (RErr), displacement error (DErr),
//! false response (FErr) and merging error (MErr).
//!
//! Every metric is derived from integer counters with one final division, so
//! reports from many scenes aggregate exactly by summing counters. A metric
//! whose denominator is zero is `None`.
//!
//! Conventions:
//! * ignored ground-truth points are removed from both label fields before
//!   anything is computed (boundaries, components, confusion);
//! * IoU qualification against the threshold is strict (`>`);
//! * RErr samples are ground-truth connected components of at least
//!   `min_component_size` points; the matching prediction region is the union
//!   of predicted components, of the plurality predicted label, touching it;
//! * DErr samples are either per-class masks or ground-truth components
//!   (`DerrSamples`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::boundary::{boundary_overlap_counts, compute_boundary_mask_in, OverlapCounts};
use crate::components::{extract_components_in, plurality_with_count, Components};
use crate::error::{Error, Result};
use crate::parallel::Workers;
use crate::spatial::build_grid;
use crate::types::{BoundaryMask, ClassGroups, DerrSamples, EvalConfig, LabelField, ValidatedScene};

/// Row-major `M x M` counts; entry `(g, p)` counts annotated points with
/// ground truth `g` and prediction `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfusionMatrix {
    num_classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(num_classes: usize) -> Self {
        Self {
            num_classes,
            counts: vec![0; num_classes * num_classes],
        }
    }

    pub fn from_counts(num_classes: usize, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != num_classes * num_classes {
            return Err(Error::ShapeMismatch(format!(
                "confusion matrix for {num_classes} classes needs {} entries, got {}",
                num_classes * num_classes,
                counts.len()
            )));
        }
        Ok(Self {
            num_classes,
            counts,
        })
    }

    pub fn from_labels(gt: &LabelField, pred: &LabelField, num_classes: usize) -> Self {
        let mut cm = Self::new(num_classes);
        for i in 0..gt.len() {
            if let (Some(g), Some(p)) = (gt.class_of(i), pred.class_of(i)) {
                cm.counts[g * num_classes + p] += 1;
            }
        }
        cm
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    #[inline]
    pub fn get(&self, g: usize, p: usize) -> u64 {
        self.counts[g * self.num_classes + p]
    }

    pub fn row_sum(&self, g: usize) -> u64 {
        self.counts[g * self.num_classes..(g + 1) * self.num_classes]
            .iter()
            .sum()
    }

    pub fn col_sum(&self, p: usize) -> u64 {
        (0..self.num_classes).map(|g| self.get(g, p)).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.num_classes).map(|c| self.get(c, c)).sum()
    }

    /// IoU of class `c`, `None` if the class is absent from both fields.
    pub fn iou(&self, c: usize) -> Option<f64> {
        let tp = self.get(c, c);
        let union = self.row_sum(c) + self.col_sum(c) - tp;
        ratio(tp, union)
    }

    fn add(&mut self, other: &ConfusionMatrix) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }
}

#[inline]
fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraditionalMetrics {
    pub per_class_iou: Vec<Option<f64>>,
    pub miou: Option<f64>,
    pub macc: Option<f64>,
    pub oacc: Option<f64>,
    pub group_iou: BTreeMap<String, Option<f64>>,
    pub confusion: ConfusionMatrix,
}

impl TraditionalMetrics {
    pub fn from_confusion(confusion: ConfusionMatrix, groups: &ClassGroups) -> Self {
        let m = confusion.num_classes();
        let per_class_iou: Vec<Option<f64>> = (0..m).map(|c| confusion.iou(c)).collect();
        let miou = mean(per_class_iou.iter().flatten().copied());
        let macc = mean((0..m).filter_map(|c| ratio(confusion.get(c, c), confusion.row_sum(c))));
        let oacc = ratio(confusion.trace(), confusion.total());
        let group_iou = groups
            .iter()
            .map(|(name, ids)| {
                let v = mean(
                    ids.iter()
                        .filter_map(|&c| per_class_iou.get(c).copied().flatten()),
                );
                (name.to_string(), v)
            })
            .collect();
        Self {
            per_class_iou,
            miou,
            macc,
            oacc,
            group_iou,
            confusion,
        }
    }
}

pub fn traditional_metrics(scene: &ValidatedScene, groups: &ClassGroups) -> Result<TraditionalMetrics> {
    groups.check_classes(scene.cfg.num_classes)?;
    let cm = ConfusionMatrix::from_labels(scene.gt, scene.pred, scene.cfg.num_classes);
    Ok(TraditionalMetrics::from_confusion(cm, groups))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryErrors {
    pub ferr: Option<f64>,
    pub merr: Option<f64>,
    /// `a` = |P_r|, `b` = |G_r|, `both` = |P_r ∩ G_r|.
    pub counts: OverlapCounts,
}

/// False-response and merging errors from the predicted and ground-truth
/// boundary masks.
pub fn ferr_merr(gt_boundary: &BoundaryMask, pred_boundary: &BoundaryMask) -> Result<BoundaryErrors> {
    let counts = boundary_overlap_counts(pred_boundary, gt_boundary)?;
    Ok(BoundaryErrors {
        ferr: ratio(counts.a - counts.both, counts.a),
        merr: ratio(counts.b - counts.both, counts.b),
        counts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionErrors {
    pub rerr: Option<f64>,
    pub tp: u64,
    pub all: u64,
}

/// Total size of the predicted components that contain at least one of
/// `members` predicted as `label`.
fn touched_prediction(
    members: &[usize],
    label: usize,
    pred: &LabelField,
    pred_comps: &Components,
) -> u64 {
    let mut ids: Vec<u32> = members
        .iter()
        .filter(|&&i| pred.class_of(i) == Some(label))
        .filter_map(|&i| pred_comps.membership[i])
        .collect();
    ids.sort_unstable();
    ids.dedup();
    ids.iter()
        .map(|&id| pred_comps.components[id as usize].size() as u64)
        .sum()
}

fn iou_exceeds(inter: u64, union: u64, threshold: f64) -> bool {
    union > 0 && inter as f64 / union as f64 > threshold
}

/// RErr from precomputed components. `pred` must already carry the
/// ground-truth ignore mask, and `pred_comps` must be its components at the
/// same radius.
pub fn rerr_from_components(
    gt_comps: &Components,
    pred: &LabelField,
    pred_comps: &Components,
    cfg: &EvalConfig,
) -> RegionErrors {
    let (mut tp, mut all) = (0u64, 0u64);
    for comp in gt_comps.iter().filter(|c| c.size() >= cfg.min_component_size) {
        let Some((label, inter)) = plurality_with_count(comp, pred) else {
            continue;
        };
        let pred_size = touched_prediction(&comp.point_indices, label, pred, pred_comps);
        let union = pred_size + comp.size() as u64 - inter;
        if iou_exceeds(inter, union, cfg.iou_threshold) {
            all += 1;
            tp += u64::from(label == comp.label);
        }
    }
    RegionErrors {
        rerr: ratio(all - tp, all),
        tp,
        all,
    }
}

pub fn rerr(scene: &ValidatedScene) -> Result<RegionErrors> {
    Ok(SceneAnalysis::new(scene, Workers::default())?.region_errors())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacementErrors {
    pub derr: Option<f64>,
    pub numerator: u64,
    pub denominator: u64,
}

pub fn derr(scene: &ValidatedScene) -> Result<DisplacementErrors> {
    Ok(SceneAnalysis::new(scene, Workers::default())?.displacement_errors())
}

/// Boundary masks and components of one scene, computed once and shared by
/// all metric stages.
struct SceneAnalysis<'a> {
    scene: ValidatedScene<'a>,
    pred: LabelField,
    gt_boundary: BoundaryMask,
    pred_boundary: BoundaryMask,
    gt_comps: Components,
    pred_comps: Components,
}

impl<'a> SceneAnalysis<'a> {
    fn new(scene: &ValidatedScene<'a>, workers: Workers) -> Result<Self> {
        let pred = scene.pred.masked_by(scene.gt);
        let r = scene.cfg.radius_m;
        if scene.cloud.is_empty() {
            let empty = Components {
                components: Vec::new(),
                membership: Vec::new(),
            };
            return Ok(Self {
                scene: *scene,
                pred,
                gt_boundary: BoundaryMask::default(),
                pred_boundary: BoundaryMask::default(),
                gt_comps: empty.clone(),
                pred_comps: empty,
            });
        }
        let grid = build_grid(scene.cloud, r)?;
        Ok(Self {
            scene: *scene,
            gt_boundary: compute_boundary_mask_in(&grid, scene.gt, r, workers)?,
            pred_boundary: compute_boundary_mask_in(&grid, &pred, r, workers)?,
            gt_comps: extract_components_in(&grid, scene.gt, r, workers)?,
            pred_comps: extract_components_in(&grid, &pred, r, workers)?,
            pred,
        })
    }

    fn region_errors(&self) -> RegionErrors {
        rerr_from_components(&self.gt_comps, &self.pred, &self.pred_comps, self.scene.cfg)
    }

    /// For a ground-truth sample `G` and its prediction `P`, the interior
    /// strips `G ∩ G_r` and `P ∩ P_r` are exactly the points of `G` (resp.
    /// `P`) flagged in the label-field boundary masks: a point of a maximal
    /// same-label region is near the region's contour iff a differently
    /// labeled annotated point lies within `r`.
    fn displacement_errors(&self) -> DisplacementErrors {
        let cfg = self.scene.cfg;
        let gt = self.scene.gt;
        let (mut num, mut den) = (0u64, 0u64);
        match cfg.derr_samples {
            DerrSamples::Class => {
                let m = cfg.num_classes;
                let cm = ConfusionMatrix::from_labels(gt, &self.pred, m);
                let mut class_num = vec![0u64; m];
                let mut class_den = vec![0u64; m];
                for i in self.gt_boundary.indices() {
                    let Some(g) = gt.class_of(i) else { continue };
                    class_den[g] += 1;
                    if self.pred.class_of(i) == Some(g) && self.pred_boundary.get(i) {
                        class_num[g] += 1;
                    }
                }
                for c in 0..m {
                    let tp = cm.get(c, c);
                    let union = cm.row_sum(c) + cm.col_sum(c) - tp;
                    if cm.row_sum(c) > 0 && iou_exceeds(tp, union, cfg.iou_threshold) {
                        num += class_num[c];
                        den += class_den[c];
                    }
                }
            }
            DerrSamples::Component => {
                for comp in self
                    .gt_comps
                    .iter()
                    .filter(|c| c.size() >= cfg.min_component_size)
                {
                    let g = comp.label;
                    let inter = comp
                        .point_indices
                        .iter()
                        .filter(|&&i| self.pred.class_of(i) == Some(g))
                        .count() as u64;
                    let pred_size =
                        touched_prediction(&comp.point_indices, g, &self.pred, &self.pred_comps);
                    let union = pred_size + comp.size() as u64 - inter;
                    if !iou_exceeds(inter, union, cfg.iou_threshold) {
                        continue;
                    }
                    for &i in &comp.point_indices {
                        if self.gt_boundary.get(i) {
                            den += 1;
                            if self.pred.class_of(i) == Some(g) && self.pred_boundary.get(i) {
                                num += 1;
                            }
                        }
                    }
                }
            }
        }
        DisplacementErrors {
            derr: ratio(den - num, den),
            numerator: num,
            denominator: den,
        }
    }
}

/// Raw integer counters from which every metric is derived.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Counters {
    pub confusion: ConfusionMatrix,
    /// |P_r|
    pub pred_boundary: u64,
    /// |G_r|
    pub gt_boundary: u64,
    /// |P_r ∩ G_r|
    pub boundary_overlap: u64,
    pub rerr_tp: u64,
    pub rerr_all: u64,
    pub derr_numerator: u64,
    pub derr_denominator: u64,
}

impl Counters {
    pub fn zero(num_classes: usize) -> Self {
        Self {
            confusion: ConfusionMatrix::new(num_classes),
            pred_boundary: 0,
            gt_boundary: 0,
            boundary_overlap: 0,
            rerr_tp: 0,
            rerr_all: 0,
            derr_numerator: 0,
            derr_denominator: 0,
        }
    }

    fn add(&mut self, o: &Counters) {
        self.confusion.add(&o.confusion);
        self.pred_boundary += o.pred_boundary;
        self.gt_boundary += o.gt_boundary;
        self.boundary_overlap += o.boundary_overlap;
        self.rerr_tp += o.rerr_tp;
        self.rerr_all += o.rerr_all;
        self.derr_numerator += o.derr_numerator;
        self.derr_denominator += o.derr_denominator;
    }

    /// Checks the relations every consistent counter set satisfies.
    pub fn check(&self) -> Result<()> {
        let ok = self.boundary_overlap <= self.pred_boundary
            && self.boundary_overlap <= self.gt_boundary
            && self.rerr_tp <= self.rerr_all
            && self.derr_numerator <= self.derr_denominator;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "inconsistent counters (a numerator exceeds its denominator)".into(),
            ))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub per_class_iou: Vec<Option<f64>>,
    pub miou: Option<f64>,
    pub macc: Option<f64>,
    pub oacc: Option<f64>,
    pub group_iou: BTreeMap<String, Option<f64>>,
    pub ferr: Option<f64>,
    pub merr: Option<f64>,
    pub rerr: Option<f64>,
    pub derr: Option<f64>,
}

impl Metrics {
    pub fn from_counters(c: &Counters, groups: &ClassGroups) -> Self {
        let t = TraditionalMetrics::from_confusion(c.confusion.clone(), groups);
        Self {
            per_class_iou: t.per_class_iou,
            miou: t.miou,
            macc: t.macc,
            oacc: t.oacc,
            group_iou: t.group_iou,
            ferr: ratio(c.pred_boundary - c.boundary_overlap, c.pred_boundary),
            merr: ratio(c.gt_boundary - c.boundary_overlap, c.gt_boundary),
            rerr: ratio(c.rerr_all - c.rerr_tp, c.rerr_all),
            derr: ratio(c.derr_denominator - c.derr_numerator, c.derr_denominator),
        }
    }

    /// Every present value, for range checks.
    pub fn present_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.per_class_iou.iter().flatten().copied().collect();
        v.extend(self.group_iou.values().flatten());
        v.extend(
            [
                self.miou, self.macc, self.oacc, self.ferr, self.merr, self.rerr, self.derr,
            ]
            .into_iter()
            .flatten(),
        );
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub config: EvalConfig,
    pub groups: ClassGroups,
    /// Number of scenes folded into the counters.
    pub scenes: u64,
    pub counters: Counters,
    pub metrics: Metrics,
}

impl MetricsReport {
    pub fn from_counters(config: EvalConfig, groups: ClassGroups, scenes: u64, counters: Counters) -> Self {
        let metrics = Metrics::from_counters(&counters, &groups);
        Self {
            config,
            groups,
            scenes,
            counters,
            metrics,
        }
    }

    pub fn recompute(&self) -> Metrics {
        Metrics::from_counters(&self.counters, &self.groups)
    }
}

pub fn evaluate_scene(scene: &ValidatedScene, groups: &ClassGroups) -> Result<MetricsReport> {
    evaluate_scene_with(scene, groups, Workers::default())
}

pub fn evaluate_scene_with(
    scene: &ValidatedScene,
    groups: &ClassGroups,
    workers: Workers,
) -> Result<MetricsReport> {
    let cfg = scene.cfg;
    groups.check_classes(cfg.num_classes)?;
    let analysis = SceneAnalysis::new(scene, workers)?;
    let boundary = ferr_merr(&analysis.gt_boundary, &analysis.pred_boundary)?;
    let region = analysis.region_errors();
    let displacement = analysis.displacement_errors();
    let counters = Counters {
        confusion: ConfusionMatrix::from_labels(scene.gt, scene.pred, cfg.num_classes),
        pred_boundary: boundary.counts.a,
        gt_boundary: boundary.counts.b,
        boundary_overlap: boundary.counts.both,
        rerr_tp: region.tp,
        rerr_all: region.all,
        derr_numerator: displacement.numerator,
        derr_denominator: displacement.denominator,
    };
    Ok(MetricsReport::from_counters(cfg.clone(), groups.clone(), 1, counters))
}

/// Radii of the standard sweep, 2 to 10 cm.
pub const SWEEP_RADII: [f64; 5] = [0.02, 0.04, 0.06, 0.08, 0.10];

/// One report per radius; every other setting comes from `scene.cfg`.
pub fn evaluate_sweep(
    scene: &ValidatedScene,
    groups: &ClassGroups,
    radii: &[f64],
    workers: Workers,
) -> Result<Vec<MetricsReport>> {
    radii
        .iter()
        .map(|&r| {
            let cfg = EvalConfig {
                radius_m: r,
                ..scene.cfg.clone()
            };
            cfg.validate()?;
            let at_r = ValidatedScene { cfg: &cfg, ..*scene };
            evaluate_scene_with(&at_r, groups, workers)
        })
        .collect()
}

/// Micro-average: counters are summed and every metric recomputed once.
pub fn aggregate(reports: &[MetricsReport]) -> Result<MetricsReport> {
    let first = reports
        .first()
        .ok_or_else(|| Error::IncompatibleReports("nothing to aggregate".into()))?;
    let mut counters = first.counters.clone();
    let mut scenes = first.scenes;
    for r in &reports[1..] {
        if r.config.num_classes != first.config.num_classes {
            return Err(Error::IncompatibleReports(format!(
                "class counts differ ({} vs {})",
                first.config.num_classes, r.config.num_classes
            )));
        }
        if r.config != first.config {
            return Err(Error::IncompatibleReports(
                "evaluation settings differ".into(),
            ));
        }
        if r.groups != first.groups {
            return Err(Error::IncompatibleReports("class groups differ".into()));
        }
        counters.add(&r.counters);
        scenes += r.scenes;
    }
    Ok(MetricsReport::from_counters(
        first.config.clone(),
        first.groups.clone(),
        scenes,
        counters,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{validate_scene, PointCloud};

    fn plane(nx: usize, ny: usize, pitch: f64) -> PointCloud {
        let mut v = Vec::new();
        for x in 0..nx {
            for y in 0..ny {
                v.push([(x as f64 * pitch) as f32, (y as f64 * pitch) as f32, 0.0]);
            }
        }
        PointCloud::new(v).unwrap()
    }

    fn halves(cloud: &PointCloud, split: f32) -> Vec<i32> {
        cloud
            .positions()
            .iter()
            .map(|p| i32::from(p[0] >= split))
            .collect()
    }

    #[test]
    fn perfect_prediction() {
        let cloud = plane(20, 10, 0.02);
        let l = LabelField::from_labels(halves(&cloud, 0.2)).unwrap();
        let cfg = EvalConfig::new(2);
        let scene = validate_scene(&cloud, &l, &l, &cfg).unwrap();
        let t = traditional_metrics(&scene, &ClassGroups::default()).unwrap();
        assert_eq!((t.miou, t.macc, t.oacc), (Some(1.0), Some(1.0), Some(1.0)));
        let rep = evaluate_scene(&scene, &ClassGroups::default()).unwrap();
        assert_eq!(rep.metrics.ferr, Some(0.0));
        assert_eq!(rep.metrics.merr, Some(0.0));
        assert_eq!(rep.metrics.rerr, Some(0.0));
        assert_eq!(rep.metrics.derr, Some(0.0));
    }

    #[test]
    fn swapped_labels() {
        let cloud = plane(20, 10, 0.02);
        let gt = LabelField::from_labels(halves(&cloud, 0.2)).unwrap();
        let pred =
            LabelField::from_labels(gt.labels().iter().map(|&l| 1 - l).collect()).unwrap();
        let cfg = EvalConfig::new(2);
        let scene = validate_scene(&cloud, &gt, &pred, &cfg).unwrap();
        let t = traditional_metrics(&scene, &ClassGroups::default()).unwrap();
        assert_eq!(t.per_class_iou, vec![Some(0.0), Some(0.0)]);
        assert_eq!(t.oacc, Some(0.0));
    }

    #[test]
    fn uniform_scene_has_no_boundary_metrics() {
        let cloud = plane(10, 10, 0.02);
        let l = LabelField::from_labels(vec![0; 100]).unwrap();
        let cfg = EvalConfig::new(3);
        let scene = validate_scene(&cloud, &l, &l, &cfg).unwrap();
        let rep = evaluate_scene(&scene, &ClassGroups::default()).unwrap();
        assert_eq!(rep.metrics.ferr, None);
        assert_eq!(rep.metrics.merr, None);
        assert_eq!(rep.metrics.miou, Some(1.0));
        // classes 1 and 2 are absent from both fields
        assert_eq!(rep.metrics.per_class_iou, vec![Some(1.0), None, None]);
    }

    #[test]
    fn ferr_merr_counts() {
        let n = 30;
        let mut p = vec![false; n];
        let mut g = vec![false; n];
        p[..10].fill(true); // |P_r| = 10
        g[4..12].fill(true); // |G_r| = 8, overlap 6
        let e = ferr_merr(&BoundaryMask::new(g), &BoundaryMask::new(p)).unwrap();
        assert_eq!(e.counts, OverlapCounts { a: 10, b: 8, both: 6 });
        assert_eq!(e.ferr, Some(0.4));
        assert_eq!(e.merr, Some(0.25));
    }

    #[test]
    fn ferr_merr_identity_and_disjoint() {
        let a = BoundaryMask::new(vec![true, false, true]);
        let e = ferr_merr(&a, &a).unwrap();
        assert_eq!((e.ferr, e.merr), (Some(0.0), Some(0.0)));
        let b = BoundaryMask::new(vec![false, true, false]);
        let e = ferr_merr(&a, &b).unwrap();
        assert_eq!((e.ferr, e.merr), (Some(1.0), Some(1.0)));
    }

    #[test]
    fn region_swap_on_two_boxes() {
        // Two 10x10 patches one meter apart.
        let mut pts = plane(10, 10, 0.02).positions().to_vec();
        pts.extend(
            plane(10, 10, 0.02)
                .positions()
                .iter()
                .map(|p| [p[0] + 1.0, p[1], p[2]]),
        );
        let cloud = PointCloud::new(pts).unwrap();
        let gt: Vec<i32> = (0..200).map(|i| i32::from(i >= 100)).collect();
        let pred: Vec<i32> = vec![1; 200];
        let gt = LabelField::from_labels(gt).unwrap();
        let pred = LabelField::from_labels(pred).unwrap();
        let cfg = EvalConfig::new(2);
        let scene = validate_scene(&cloud, &gt, &pred, &cfg).unwrap();
        let r = rerr(&scene).unwrap();
        assert_eq!((r.tp, r.all, r.rerr), (1, 2, Some(0.5)));
    }

    #[test]
    fn small_components_are_not_samples() {
        let cloud = plane(5, 5, 0.02);
        let l = LabelField::from_labels(vec![0; 25]).unwrap();
        let cfg = EvalConfig::new(1); // min_component_size 50 > 25
        let scene = validate_scene(&cloud, &l, &l, &cfg).unwrap();
        let r = rerr(&scene).unwrap();
        assert_eq!((r.all, r.rerr), (0, None));
    }

    #[test]
    fn displacement_disjoint_strips() {
        // Strip of class 1 predicted far too wide: its interior strip no
        // longer meets the ground-truth interior strip.
        let cloud = plane(41, 3, 0.02);
        let gt: Vec<i32> = cloud
            .positions()
            .iter()
            .map(|p| i32::from(p[0] > 0.3 && p[0] < 0.5))
            .collect();
        let pred: Vec<i32> = cloud
            .positions()
            .iter()
            .map(|p| i32::from(p[0] > 0.15 && p[0] < 0.65))
            .collect();
        let gt = LabelField::from_labels(gt).unwrap();
        let pred = LabelField::from_labels(pred).unwrap();
        let mut cfg = EvalConfig::new(2);
        cfg.iou_threshold = 0.3;
        let scene = validate_scene(&cloud, &gt, &pred, &cfg).unwrap();
        let d = derr(&scene).unwrap();
        assert!(d.denominator > 0);
        // class 1 contributes nothing to the numerator
        let gt_b = crate::boundary::compute_boundary_mask(&cloud, &gt, 0.06).unwrap();
        let class1_den = gt_b.indices().filter(|&i| gt.get(i) == 1).count() as u64;
        assert!(class1_den > 0);
        assert!(d.numerator <= d.denominator - class1_den);
    }

    #[test]
    fn empty_scene_everything_absent() {
        let cloud = PointCloud::empty();
        let l = LabelField::from_labels(vec![]).unwrap();
        let cfg = EvalConfig::new(4);
        let scene = validate_scene(&cloud, &l, &l, &cfg).unwrap();
        let rep = evaluate_scene(&scene, &ClassGroups::default()).unwrap();
        assert!(rep.metrics.present_values().is_empty());
    }

    #[test]
    fn aggregate_rules() {
        let cloud = plane(20, 10, 0.02);
        let gt = LabelField::from_labels(halves(&cloud, 0.2)).unwrap();
        let pred = LabelField::from_labels(halves(&cloud, 0.24)).unwrap();
        let cfg = EvalConfig::new(2);
        let a = evaluate_scene(&validate_scene(&cloud, &gt, &gt, &cfg).unwrap(), &ClassGroups::default()).unwrap();
        let b = evaluate_scene(&validate_scene(&cloud, &gt, &pred, &cfg).unwrap(), &ClassGroups::default()).unwrap();
        assert_eq!(aggregate(std::slice::from_ref(&a)).unwrap(), a);
        assert_eq!(
            aggregate(&[a.clone(), b.clone()]).unwrap(),
            aggregate(&[b.clone(), a.clone()]).unwrap()
        );
        let mut c = b.clone();
        c.config.num_classes = 3;
        assert!(matches!(
            aggregate(&[a, c]),
            Err(Error::IncompatibleReports(_))
        ));
        assert!(aggregate(&[]).is_err());
    }
}
