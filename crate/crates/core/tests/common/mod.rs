//! Slow, direct reference implementations used to check the library.
//! Nothing here calls library algorithms; only plain data accessors.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use segerr::{DerrSamples, EvalConfig, LabelField, PointCloud};

pub fn d2(a: &[f32; 3], b: &[f32; 3]) -> f64 {
    let dx = f64::from(a[0]) - f64::from(b[0]);
    let dy = f64::from(a[1]) - f64::from(b[1]);
    let dz = f64::from(a[2]) - f64::from(b[2]);
    dx * dx + dy * dy + dz * dz
}

fn near(cloud: &PointCloud, i: usize, j: usize, r: f64) -> bool {
    i != j && d2(&cloud.positions()[i], &cloud.positions()[j]) <= r * r
}

/// Labels with the ignore sentinel mapped to `None`.
pub fn classes(l: &LabelField) -> Vec<Option<i32>> {
    l.labels()
        .iter()
        .map(|&v| (v != l.ignore_label()).then_some(v))
        .collect()
}

pub fn boundary(cloud: &PointCloud, labels: &LabelField, r: f64) -> Vec<bool> {
    let c = classes(labels);
    let n = cloud.len();
    let mut out = vec![false; n];
    for i in 0..n {
        let Some(own) = c[i] else { continue };
        for j in 0..n {
            if let Some(other) = c[j] {
                if other != own && near(cloud, i, j, r) {
                    out[i] = true;
                    break;
                }
            }
        }
    }
    out
}

pub fn zone(cloud: &PointCloud, mask: &[bool], valid: &[bool], r: f64) -> Vec<bool> {
    let n = cloud.len();
    (0..n)
        .map(|i| valid[i] && (0..n).any(|j| valid[j] && mask[j] != mask[i] && near(cloud, i, j, r)))
        .collect()
}

pub fn neighbors(cloud: &PointCloud, q: usize, r: f64) -> Vec<usize> {
    (0..cloud.len()).filter(|&j| near(cloud, q, j, r)).collect()
}

/// Connected components by breadth-first search over the full quadratic
/// adjacency, as (label, sorted members), sorted by (label, first member).
pub fn components(cloud: &PointCloud, labels: &LabelField, r: f64) -> Vec<(i32, Vec<usize>)> {
    let c = classes(labels);
    let n = cloud.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        let Some(label) = c[s] else { continue };
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut members = vec![s];
        let mut queue = VecDeque::from([s]);
        while let Some(i) = queue.pop_front() {
            for j in 0..n {
                if !seen[j] && c[j] == Some(label) && near(cloud, i, j, r) {
                    seen[j] = true;
                    members.push(j);
                    queue.push_back(j);
                }
            }
        }
        members.sort_unstable();
        out.push((label, members));
    }
    out.sort_by(|a, b| (a.0, a.1[0]).cmp(&(b.0, b.1[0])));
    out
}

#[derive(Debug, Clone, Default)]
pub struct NaiveReport {
    pub confusion: Vec<Vec<u64>>,
    pub pred_boundary: u64,
    pub gt_boundary: u64,
    pub boundary_overlap: u64,
    pub rerr_tp: u64,
    pub rerr_all: u64,
    pub derr_num: u64,
    pub derr_den: u64,
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

fn frac(num: u64, den: u64) -> Option<f64> {
    if den == 0 {
        None
    } else {
        Some(num as f64 / den as f64)
    }
}

fn avg(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        None
    } else {
        Some(v.iter().sum::<f64>() / v.len() as f64)
    }
}

fn set_iou(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> (u64, u64) {
    (a.intersection(b).count() as u64, a.union(b).count() as u64)
}

fn qualifies(inter: u64, union: u64, theta: f64) -> bool {
    union > 0 && inter as f64 / union as f64 > theta
}

/// Every report field from first principles. Ground-truth ignore points
/// are removed from the prediction too.
pub fn report(
    cloud: &PointCloud,
    gt: &LabelField,
    pred: &LabelField,
    cfg: &EvalConfig,
    groups: &BTreeMap<String, Vec<usize>>,
) -> NaiveReport {
    let n = cloud.len();
    let m = cfg.num_classes;
    let r = cfg.radius_m;
    let g = classes(gt);
    let valid: Vec<bool> = g.iter().map(Option::is_some).collect();
    let p_raw = classes(pred);
    let p: Vec<Option<i32>> = (0..n).map(|i| if valid[i] { p_raw[i] } else { None }).collect();
    let pred_masked = LabelField::new(
        p.iter().map(|v| v.unwrap_or(gt.ignore_label())).collect(),
        gt.ignore_label(),
    )
    .unwrap();

    let mut out = NaiveReport {
        confusion: vec![vec![0; m]; m],
        ..Default::default()
    };
    for i in 0..n {
        if let (Some(a), Some(b)) = (g[i], p[i]) {
            out.confusion[a as usize][b as usize] += 1;
        }
    }
    let cm = &out.confusion;
    let row = |c: usize| cm[c].iter().sum::<u64>();
    let col = |c: usize| (0..m).map(|k| cm[k][c]).sum::<u64>();
    out.per_class_iou = (0..m)
        .map(|c| frac(cm[c][c], row(c) + col(c) - cm[c][c]))
        .collect();
    let present: Vec<f64> = out.per_class_iou.iter().flatten().copied().collect();
    out.miou = avg(&present);
    let accs: Vec<f64> = (0..m).filter_map(|c| frac(cm[c][c], row(c))).collect();
    out.macc = avg(&accs);
    let total: u64 = (0..m).map(row).sum();
    out.oacc = frac((0..m).map(|c| cm[c][c]).sum(), total);
    for (name, ids) in groups {
        let v: Vec<f64> = ids.iter().filter_map(|&c| out.per_class_iou[c]).collect();
        out.group_iou.insert(name.clone(), avg(&v));
    }

    let gb = boundary(cloud, gt, r);
    let pb = boundary(cloud, &pred_masked, r);
    out.pred_boundary = pb.iter().filter(|&&b| b).count() as u64;
    out.gt_boundary = gb.iter().filter(|&&b| b).count() as u64;
    out.boundary_overlap = (0..n).filter(|&i| gb[i] && pb[i]).count() as u64;
    out.ferr = frac(out.pred_boundary - out.boundary_overlap, out.pred_boundary);
    out.merr = frac(out.gt_boundary - out.boundary_overlap, out.gt_boundary);

    let gt_comps = components(cloud, gt, r);
    let pred_comps = components(cloud, &pred_masked, r);
    let pred_sets: Vec<(i32, BTreeSet<usize>)> = pred_comps
        .iter()
        .map(|(l, v)| (*l, v.iter().copied().collect()))
        .collect();
    // Union of predicted components of `label` that intersect `c`.
    let touched = |c: &BTreeSet<usize>, label: i32| -> BTreeSet<usize> {
        pred_sets
            .iter()
            .filter(|(l, s)| *l == label && s.intersection(c).next().is_some())
            .flat_map(|(_, s)| s.iter().copied())
            .collect()
    };
    let samples: Vec<(i32, BTreeSet<usize>)> = gt_comps
        .iter()
        .filter(|(_, v)| v.len() >= cfg.min_component_size)
        .map(|(l, v)| (*l, v.iter().copied().collect()))
        .collect();

    for (label, c) in &samples {
        let mut hist: BTreeMap<i32, u64> = BTreeMap::new();
        for &i in c {
            if let Some(v) = p[i] {
                *hist.entry(v).or_default() += 1;
            }
        }
        let Some(best_count) = hist.values().max().copied() else { continue };
        let star = *hist.iter().find(|(_, &k)| k == best_count).unwrap().0;
        let pset = touched(c, star);
        let (inter, union) = set_iou(&pset, c);
        if qualifies(inter, union, cfg.iou_threshold) {
            out.rerr_all += 1;
            if star == *label {
                out.rerr_tp += 1;
            }
        }
    }
    out.rerr = frac(out.rerr_all - out.rerr_tp, out.rerr_all);

    let mut strip_counts = |gset: &BTreeSet<usize>, pset: &BTreeSet<usize>| {
        let (inter, union) = set_iou(pset, gset);
        if !qualifies(inter, union, cfg.iou_threshold) {
            return;
        }
        let gmask: Vec<bool> = (0..n).map(|i| gset.contains(&i)).collect();
        let pmask: Vec<bool> = (0..n).map(|i| pset.contains(&i)).collect();
        let gr = zone(cloud, &gmask, &valid, r);
        let pr = zone(cloud, &pmask, &valid, r);
        let g_strip: BTreeSet<usize> = (0..n).filter(|&i| gmask[i] && gr[i]).collect();
        let p_strip: BTreeSet<usize> = (0..n).filter(|&i| pmask[i] && pr[i]).collect();
        out.derr_num += g_strip.intersection(&p_strip).count() as u64;
        out.derr_den += g_strip.len() as u64;
    };
    match cfg.derr_samples {
        DerrSamples::Class => {
            for c in 0..m as i32 {
                let gset: BTreeSet<usize> = (0..n).filter(|&i| g[i] == Some(c)).collect();
                if gset.is_empty() {
                    continue;
                }
                let pset: BTreeSet<usize> = (0..n).filter(|&i| p[i] == Some(c)).collect();
                strip_counts(&gset, &pset);
            }
        }
        DerrSamples::Component => {
            for (label, c) in &samples {
                let pset = touched(c, *label);
                strip_counts(c, &pset);
            }
        }
    }
    out.derr = frac(out.derr_den - out.derr_num, out.derr_den);
    out
}

fn close(a: Option<f64>, b: Option<f64>, tol: f64) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => (x - y).abs() <= tol,
        _ => false,
    }
}

/// Compares every field of a library report with the naive one.
pub fn compare(lib: &segerr::MetricsReport, naive: &NaiveReport, tol: f64) -> Result<(), String> {
    let c = &lib.counters;
    let m = lib.config.num_classes;
    for a in 0..m {
        for b in 0..m {
            if c.confusion.get(a, b) != naive.confusion[a][b] {
                return Err(format!("confusion[{a}][{b}]"));
            }
        }
    }
    let ints = [
        ("pred_boundary", c.pred_boundary, naive.pred_boundary),
        ("gt_boundary", c.gt_boundary, naive.gt_boundary),
        ("boundary_overlap", c.boundary_overlap, naive.boundary_overlap),
        ("rerr_tp", c.rerr_tp, naive.rerr_tp),
        ("rerr_all", c.rerr_all, naive.rerr_all),
        ("derr_numerator", c.derr_numerator, naive.derr_num),
        ("derr_denominator", c.derr_denominator, naive.derr_den),
    ];
    for (name, x, y) in ints {
        if x != y {
            return Err(format!("{name}: library {x}, oracle {y}"));
        }
    }
    let lm = &lib.metrics;
    if lm.per_class_iou.len() != naive.per_class_iou.len() {
        return Err("per_class_iou length".into());
    }
    for (k, (x, y)) in lm.per_class_iou.iter().zip(&naive.per_class_iou).enumerate() {
        if !close(*x, *y, tol) {
            return Err(format!("per_class_iou[{k}]: {x:?} vs {y:?}"));
        }
    }
    let reals = [
        ("miou", lm.miou, naive.miou),
        ("macc", lm.macc, naive.macc),
        ("oacc", lm.oacc, naive.oacc),
        ("ferr", lm.ferr, naive.ferr),
        ("merr", lm.merr, naive.merr),
        ("rerr", lm.rerr, naive.rerr),
        ("derr", lm.derr, naive.derr),
    ];
    for (name, x, y) in reals {
        if !close(x, y, tol) {
            return Err(format!("{name}: library {x:?}, oracle {y:?}"));
        }
    }
    if lm.group_iou.len() != naive.group_iou.len() {
        return Err("group count".into());
    }
    for (name, y) in &naive.group_iou {
        if !close(lm.group_iou.get(name).copied().flatten(), *y, tol) {
            return Err(format!("group {name}"));
        }
    }
    Ok(())
}
