//! Boundary pseudo-labels: a point is a boundary point when some other
//! annotated point with a different label lies within the closed ball of
//! radius `r` around it.
//!
//! Every point is processed independently (one work item per point, early
//! exit at the first differing neighbor), so the loop is embarrassingly
//! parallel. The same routine also produces the two-sided contour zone of a
//! binary mask, which is what the displacement metric needs.

use crate::error::{Error, Result};
use crate::parallel::{map_indices, Workers};
use crate::spatial::{build_grid, SpatialGrid};
use crate::types::{check_len, BoundaryMask, LabelField, PointCloud};

/// Key marking points that neither become boundary points nor trigger them.
const INVALID: i64 = i64::MIN;
const BRUTE_BLOCK: usize = 512;

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "radius must be positive, got {r}"
        )))
    }
}

fn label_keys(labels: &LabelField) -> Vec<i64> {
    let ignore = labels.ignore_label();
    labels
        .labels()
        .iter()
        .map(|&l| if l == ignore { INVALID } else { i64::from(l) })
        .collect()
}

fn differing_neighbor_flags(
    grid: &SpatialGrid,
    keys: &[i64],
    r: f64,
    workers: Workers,
) -> Result<Vec<bool>> {
    if r > grid.cell_size() {
        return Err(Error::RadiusExceedsCell {
            radius: r,
            cell_size: grid.cell_size(),
        });
    }
    let r2 = r * r;
    let perm = grid.permutation();
    let sorted_keys: Vec<i64> = perm.iter().map(|&i| keys[i as usize]).collect();
    let by_slot = map_indices(keys.len(), workers, |s| {
        let own = sorted_keys[s];
        own != INVALID
            && grid.scan_slots(s, r2, |t| {
                let other = sorted_keys[t];
                other != INVALID && other != own
            })
    });
    let mut flags = vec![false; keys.len()];
    for (&i, f) in perm.iter().zip(by_slot) {
        flags[i as usize] = f;
    }
    Ok(flags)
}

/// Boundary mask of `labels` using all hardware threads.
pub fn compute_boundary_mask(cloud: &PointCloud, labels: &LabelField, r: f64) -> Result<BoundaryMask> {
    compute_boundary_mask_with(cloud, labels, r, Workers::default())
}

pub fn compute_boundary_mask_with(
    cloud: &PointCloud,
    labels: &LabelField,
    r: f64,
    workers: Workers,
) -> Result<BoundaryMask> {
    check_len("labels", cloud.len(), labels.len())?;
    check_radius(r)?;
    if cloud.is_empty() {
        return Ok(BoundaryMask::default());
    }
    let grid = build_grid(cloud, r)?;
    compute_boundary_mask_in(&grid, labels, r, workers)
}

/// Boundary mask over a prebuilt grid (its cell size must be at least `r`).
pub fn compute_boundary_mask_in(
    grid: &SpatialGrid,
    labels: &LabelField,
    r: f64,
    workers: Workers,
) -> Result<BoundaryMask> {
    check_len("labels", grid.len(), labels.len())?;
    check_radius(r)?;
    let keys = label_keys(labels);
    differing_neighbor_flags(grid, &keys, r, workers).map(BoundaryMask::new)
}

/// Quadratic reference: every point scans every other point (with the same
/// early exit). This is the baseline the grid version is measured against.
pub fn compute_boundary_mask_brute(
    cloud: &PointCloud,
    labels: &LabelField,
    r: f64,
    workers: Workers,
) -> Result<BoundaryMask> {
    check_len("labels", cloud.len(), labels.len())?;
    check_radius(r)?;
    let keys = label_keys(labels);
    let pts: Vec<[f64; 3]> = cloud
        .positions()
        .iter()
        .map(|p| p.map(f64::from))
        .collect();
    let r2 = r * r;
    Ok(BoundaryMask::new(map_indices(pts.len(), workers, |i| {
        let own = keys[i];
        if own == INVALID {
            return false;
        }
        let q = pts[i];
        // Branch-free inner test over blocks, early exit between blocks.
        pts.chunks(BRUTE_BLOCK)
            .zip(keys.chunks(BRUTE_BLOCK))
            .any(|(ps, ks)| {
                ps.iter().zip(ks).fold(false, |hit, (p, &k)| {
                    let d = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
                    let d2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                    hit | ((k != INVALID) & (k != own) & (d2 <= r2))
                })
            })
    })))
}

/// Two-sided strip of width `r` around the contour of a binary mask: valid
/// points having a valid point within `r` on the other side of the mask.
pub fn binary_boundary_zone(
    cloud: &PointCloud,
    mask: &[bool],
    valid: &[bool],
    r: f64,
) -> Result<BoundaryMask> {
    check_len("mask", cloud.len(), mask.len())?;
    check_len("valid flags", cloud.len(), valid.len())?;
    check_radius(r)?;
    if cloud.is_empty() {
        return Ok(BoundaryMask::default());
    }
    let grid = build_grid(cloud, r)?;
    binary_boundary_zone_in(&grid, mask, valid, r, Workers::default())
}

pub fn binary_boundary_zone_in(
    grid: &SpatialGrid,
    mask: &[bool],
    valid: &[bool],
    r: f64,
    workers: Workers,
) -> Result<BoundaryMask> {
    check_len("mask", grid.len(), mask.len())?;
    check_len("valid flags", grid.len(), valid.len())?;
    check_radius(r)?;
    let keys: Vec<i64> = mask
        .iter()
        .zip(valid)
        .map(|(&m, &v)| if v { i64::from(m) } else { INVALID })
        .collect();
    differing_neighbor_flags(grid, &keys, r, workers).map(BoundaryMask::new)
}

/// `(|a|, |b|, |a ∩ b|)` over point indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OverlapCounts {
    pub a: u64,
    pub b: u64,
    pub both: u64,
}

pub fn boundary_overlap_counts(a: &BoundaryMask, b: &BoundaryMask) -> Result<OverlapCounts> {
    check_len("second mask", a.len(), b.len())?;
    let mut out = OverlapCounts::default();
    for (&x, &y) in a.flags().iter().zip(b.flags()) {
        out.a += u64::from(x);
        out.b += u64::from(y);
        out.both += u64::from(x && y);
    }
    Ok(out)
}
