//! Deterministic synthetic scenes with analytically known labels, and
//! controlled corruption of a label field to produce a synthetic prediction
//! exhibiting one kind of segmentation error.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::boundary::compute_boundary_mask;
use crate::components::extract_components;
use crate::error::{Error, Result};
use crate::rng::SceneRng;
use crate::spatial::build_grid;
use crate::types::{check_len, LabelField, PointCloud, DEFAULT_IGNORE_LABEL, DEFAULT_MIN_COMPONENT_SIZE};

const MAX_POINTS: u64 = 50_000_000;
/// Lattice index rounding slack: `extent / pitch` values within this of an
/// integer count as that integer.
const LATTICE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sphere {
    pub center: [f64; 3],
    pub radius: f64,
    pub label: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Generator {
    /// Planar lattice in z = 0; label 0 for x < split_x, 1 otherwise.
    TwoPlanes {
        extent: [f64; 2],
        pitch: f64,
        split_x: f64,
    },
    /// Volumetric lattice; points inside a sphere take its label (first
    /// match wins), other points take `background` or are omitted if it is
    /// null.
    SpheresInBox {
        extent: [f64; 3],
        pitch: f64,
        spheres: Vec<Sphere>,
        background: Option<i32>,
    },
    /// Planar lattice with square tiles alternating between labels 0 and 1.
    Checkerboard {
        extent: [f64; 2],
        pitch: f64,
        tile: f64,
    },
    /// Uniform random points in a box, labeled by the nearest of `blobs`
    /// random centers; center `k` carries label `k mod classes`.
    RandomBlobs {
        extent: [f64; 3],
        count: usize,
        blobs: usize,
        classes: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub generator: Generator,
    #[serde(default)]
    pub seed: u64,
    /// Uniform per-axis position noise in meters; labels still follow the
    /// unperturbed lattice position.
    #[serde(default)]
    pub jitter: f64,
}

impl SceneSpec {
    pub fn new(generator: Generator) -> Self {
        Self {
            generator,
            seed: 0,
            jitter: 0.0,
        }
    }

    pub fn two_planes() -> Self {
        Self::new(Generator::TwoPlanes {
            extent: [1.0, 1.0],
            pitch: 0.02,
            split_x: 0.5,
        })
    }

    pub fn checkerboard() -> Self {
        Self::new(Generator::Checkerboard {
            extent: [1.0, 1.0],
            pitch: 0.02,
            tile: 0.1,
        })
    }

    /// Two spheres of radius 0.1 m one meter apart in a labeled box.
    pub fn two_spheres() -> Self {
        Self::new(Generator::SpheresInBox {
            extent: [1.4, 0.4, 0.4],
            pitch: 0.03,
            spheres: vec![
                Sphere {
                    center: [0.2, 0.2, 0.2],
                    radius: 0.1,
                    label: 1,
                },
                Sphere {
                    center: [1.2, 0.2, 0.2],
                    radius: 0.1,
                    label: 2,
                },
            ],
            background: Some(0),
        })
    }

    pub fn random_blobs(count: usize, extent: f64, seed: u64) -> Self {
        Self {
            generator: Generator::RandomBlobs {
                extent: [extent; 3],
                count,
                blobs: 12,
                classes: 5,
            },
            seed,
            jitter: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.jitter >= 0.0 && self.jitter.is_finite()) {
            return bad(format!("jitter must be non-negative, got {}", self.jitter));
        }
        let positive = |name: &str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                bad(format!("{name} must be positive, got {v}"))
            }
        };
        let lattice = |extent: &[f64], pitch: f64| -> Result<()> {
            positive("pitch", pitch)?;
            let mut total = 1u64;
            for &e in extent {
                positive("extent", e)?;
                total = total.saturating_mul(axis_count(e, pitch) as u64);
            }
            if total > MAX_POINTS {
                return bad(format!("lattice would have {total} points"));
            }
            Ok(())
        };
        match &self.generator {
            Generator::TwoPlanes { extent, pitch, .. } => lattice(extent, *pitch),
            Generator::Checkerboard {
                extent,
                pitch,
                tile,
            } => {
                positive("tile", *tile)?;
                lattice(extent, *pitch)
            }
            Generator::SpheresInBox {
                extent,
                pitch,
                spheres,
                background,
            } => {
                for s in spheres {
                    positive("sphere radius", s.radius)?;
                    if s.label < 0 {
                        return bad(format!("sphere label {} is negative", s.label));
                    }
                }
                if background.is_some_and(|b| b < 0) {
                    return bad("background label is negative".into());
                }
                lattice(extent, *pitch)
            }
            Generator::RandomBlobs {
                extent,
                count,
                blobs,
                classes,
            } => {
                for &e in extent {
                    positive("extent", e)?;
                }
                if *blobs == 0 || *classes == 0 {
                    return bad("random blobs need at least one blob and one class".into());
                }
                if *count as u64 > MAX_POINTS {
                    return bad(format!("{count} points requested"));
                }
                Ok(())
            }
        }
    }
}

fn axis_count(extent: f64, pitch: f64) -> usize {
    (extent / pitch + LATTICE_EPS).floor() as usize + 1
}

fn tile_index(v: f64, tile: f64) -> i64 {
    (v / tile + LATTICE_EPS).floor() as i64
}

/// Generates the scene; output is bitwise identical for identical specs.
pub fn generate_scene(spec: &SceneSpec) -> Result<(PointCloud, LabelField)> {
    spec.validate()?;
    let mut rng = SceneRng::new(spec.seed);
    let mut positions: Vec<[f64; 3]> = Vec::new();
    let mut labels: Vec<i32> = Vec::new();

    match &spec.generator {
        Generator::TwoPlanes {
            extent,
            pitch,
            split_x,
        } => {
            for_lattice(&[extent[0], extent[1], 0.0], *pitch, |p| {
                positions.push(p);
                labels.push(i32::from(p[0] >= split_x - LATTICE_EPS));
            });
        }
        Generator::Checkerboard {
            extent,
            pitch,
            tile,
        } => {
            for_lattice(&[extent[0], extent[1], 0.0], *pitch, |p| {
                positions.push(p);
                labels.push(((tile_index(p[0], *tile) + tile_index(p[1], *tile)).rem_euclid(2)) as i32);
            });
        }
        Generator::SpheresInBox {
            extent,
            pitch,
            spheres,
            background,
        } => {
            for_lattice(extent, *pitch, |p| {
                let inside = spheres.iter().find(|s| {
                    let d2: f64 = (0..3).map(|a| (p[a] - s.center[a]).powi(2)).sum();
                    d2 <= s.radius * s.radius
                });
                if let Some(label) = inside.map(|s| s.label).or(*background) {
                    positions.push(p);
                    labels.push(label);
                }
            });
        }
        Generator::RandomBlobs {
            extent,
            count,
            blobs,
            classes,
        } => {
            let centers: Vec<[f64; 3]> = (0..*blobs)
                .map(|_| {
                    [
                        rng.uniform(0.0, extent[0]),
                        rng.uniform(0.0, extent[1]),
                        rng.uniform(0.0, extent[2]),
                    ]
                })
                .collect();
            for _ in 0..*count {
                let p = [
                    rng.uniform(0.0, extent[0]),
                    rng.uniform(0.0, extent[1]),
                    rng.uniform(0.0, extent[2]),
                ];
                let mut best = (f64::INFINITY, 0usize);
                for (k, c) in centers.iter().enumerate() {
                    let d2: f64 = (0..3).map(|a| (p[a] - c[a]).powi(2)).sum();
                    if d2 < best.0 {
                        best = (d2, k);
                    }
                }
                positions.push(p);
                labels.push((best.1 % classes) as i32);
            }
        }
    }

    let jitter = spec.jitter;
    let points = positions
        .into_iter()
        .map(|p| {
            let mut q = [0f32; 3];
            for a in 0..3 {
                let noise = if jitter > 0.0 {
                    rng.uniform(-jitter, jitter)
                } else {
                    0.0
                };
                q[a] = (p[a] + noise) as f32;
            }
            q
        })
        .collect();
    Ok((
        PointCloud::new(points)?,
        LabelField::new(labels, DEFAULT_IGNORE_LABEL)?,
    ))
}

/// Visits lattice points `i * pitch` in x-fastest order; a zero extent
/// yields a single layer on that axis.
fn for_lattice(extent: &[f64; 3], pitch: f64, mut f: impl FnMut([f64; 3])) {
    let n: Vec<usize> = extent
        .iter()
        .map(|&e| if e > 0.0 { axis_count(e, pitch) } else { 1 })
        .collect();
    for z in 0..n[2] {
        for y in 0..n[1] {
            for x in 0..n[0] {
                f([x as f64 * pitch, y as f64 * pitch, z as f64 * pitch]);
            }
        }
    }
}

pub const DEFAULT_SPECKLE_PATCHES: usize = 5;

/// Kind of error injected into a label field. The `magnitude` passed along
/// with it is, per mode: the connectivity radius (region-swap, merge), the
/// contour shift (dilate, erode) or the patch radius (speckle).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum CorruptionMode {
    /// Relabel one whole connected component to a different class.
    RegionSwap,
    /// Grow one class by `magnitude` meters into its neighbors.
    Dilate,
    /// Shrink one class by `magnitude` meters; freed points take the label
    /// of the nearest other-class point.
    Erode,
    /// Relabel one component to the most common label bordering it.
    Merge,
    /// Paint small balls of a wrong class well inside uniform regions.
    /// Centers need `3 * magnitude` of clearance from other labels; with no
    /// such point the labels are returned unchanged.
    Speckle { patches: usize },
}

impl FromStr for CorruptionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "region-swap" => Ok(Self::RegionSwap),
            "dilate" => Ok(Self::Dilate),
            "erode" => Ok(Self::Erode),
            "merge" => Ok(Self::Merge),
            "speckle" => Ok(Self::Speckle {
                patches: DEFAULT_SPECKLE_PATCHES,
            }),
            other => Err(Error::InvalidParameter(format!(
                "unknown corruption mode {other:?} (expected region-swap, dilate, erode, merge or speckle)"
            ))),
        }
    }
}

/// Produces a full prediction (no ignore labels) from `gt`. Ground-truth
/// ignore points are predicted as class 0.
pub fn corrupt_labels(
    gt: &LabelField,
    cloud: &PointCloud,
    mode: CorruptionMode,
    magnitude: f64,
    seed: u64,
) -> Result<LabelField> {
    check_len("labels", cloud.len(), gt.len())?;
    if !(magnitude > 0.0 && magnitude.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "magnitude must be positive, got {magnitude}"
        )));
    }
    let mut rng = SceneRng::new(seed);
    let ignore = gt.ignore_label();
    let mut pred: Vec<i32> = gt
        .labels()
        .iter()
        .map(|&l| if l == ignore { 0 } else { l })
        .collect();
    if cloud.is_empty() {
        return LabelField::new(pred, ignore);
    }
    let num_classes = gt.max_class_bound().max(2);
    let other_class = |rng: &mut SceneRng, label: usize| -> i32 {
        let offset = 1 + rng.next_below(num_classes as u64 - 1) as usize;
        ((label + offset) % num_classes) as i32
    };

    match mode {
        CorruptionMode::RegionSwap | CorruptionMode::Merge => {
            let comps = extract_components(cloud, gt, magnitude)?;
            let mut candidates: Vec<usize> = (0..comps.len())
                .filter(|&k| comps.components[k].size() >= DEFAULT_MIN_COMPONENT_SIZE)
                .collect();
            if candidates.is_empty() {
                candidates = (0..comps.len()).collect();
            }
            if mode == CorruptionMode::RegionSwap {
                if !candidates.is_empty() {
                    let comp = &comps.components[candidates[rng.next_below(candidates.len() as u64) as usize]];
                    let new = other_class(&mut rng, comp.label);
                    for &i in &comp.point_indices {
                        pred[i] = new;
                    }
                }
            } else {
                let grid = build_grid(cloud, magnitude)?;
                let r2 = magnitude * magnitude;
                // Border label histogram of each candidate component.
                let mut bordered: Vec<(usize, i32)> = Vec::new();
                for &k in &candidates {
                    let comp = &comps.components[k];
                    let mut hist: BTreeMap<usize, u64> = BTreeMap::new();
                    for &i in &comp.point_indices {
                        grid.scan_neighbors(i, r2, |j| {
                            if let Some(l) = gt.class_of(j) {
                                if l != comp.label {
                                    *hist.entry(l).or_default() += 1;
                                }
                            }
                            false
                        });
                    }
                    let mut best: Option<(usize, u64)> = None;
                    for (l, c) in hist {
                        if best.is_none_or(|(_, bc)| c > bc) {
                            best = Some((l, c));
                        }
                    }
                    if let Some((l, _)) = best {
                        bordered.push((k, l as i32));
                    }
                }
                if !bordered.is_empty() {
                    let (k, new) = bordered[rng.next_below(bordered.len() as u64) as usize];
                    for &i in &comps.components[k].point_indices {
                        pred[i] = new;
                    }
                }
            }
        }
        CorruptionMode::Dilate | CorruptionMode::Erode => {
            let present: Vec<usize> = {
                let mut seen = vec![false; num_classes];
                for i in 0..gt.len() {
                    if let Some(c) = gt.class_of(i) {
                        seen[c] = true;
                    }
                }
                (0..num_classes).filter(|&c| seen[c]).collect()
            };
            if !present.is_empty() {
                let target = present[rng.next_below(present.len() as u64) as usize];
                let grid = build_grid(cloud, magnitude)?;
                let r2 = magnitude * magnitude;
                for (i, p) in pred.iter_mut().enumerate() {
                    let Some(own) = gt.class_of(i) else { continue };
                    if mode == CorruptionMode::Dilate {
                        if own != target
                            && grid.scan_neighbors(i, r2, |j| gt.class_of(j) == Some(target))
                        {
                            *p = target as i32;
                        }
                    } else if own == target {
                        let mut nearest: Option<(f64, usize)> = None;
                        grid.scan_neighbors(i, r2, |j| {
                            if gt.class_of(j).is_some_and(|l| l != target) {
                                let d = cloud.dist2(i, j);
                                if nearest.is_none_or(|(bd, bj)| d < bd || (d == bd && j < bj)) {
                                    nearest = Some((d, j));
                                }
                            }
                            false
                        });
                        if let Some((_, j)) = nearest {
                            *p = gt.get(j);
                        }
                    }
                }
            }
        }
        CorruptionMode::Speckle { patches } => {
            // Centers keep three patch radii of clearance from any other
            // label, so patches and the contours they create stay inside
            // uniform regions.
            let clearance = compute_boundary_mask(cloud, gt, 3.0 * magnitude)?;
            let eligible: Vec<usize> = (0..gt.len())
                .filter(|&i| !gt.is_ignored(i) && !clearance.get(i))
                .collect();
            if !eligible.is_empty() {
                let grid = build_grid(cloud, magnitude)?;
                let r2 = magnitude * magnitude;
                for _ in 0..patches {
                    let center = eligible[rng.next_below(eligible.len() as u64) as usize];
                    let own = gt.class_of(center).unwrap_or(0);
                    let new = other_class(&mut rng, own);
                    pred[center] = new;
                    grid.scan_neighbors(center, r2, |j| {
                        if !gt.is_ignored(j) {
                            pred[j] = new;
                        }
                        false
                    });
                }
            }
        }
    }
    LabelField::new(pred, ignore)
}
