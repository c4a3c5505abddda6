//! Uniform-grid radius-neighbor index and the quadratic brute-force scan it
//! is checked against.
//!
//! Points are counting-sorted by cell (stable within a cell) into a
//! permutation array, and a copy of the positions is kept in that order so a
//! 27-cell stencil scan walks contiguous memory. The stencil is complete only
//! when the query radius does not exceed the cell size; larger radii are
//! rejected rather than silently missing neighbors.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::types::{dist2, PointCloud};

/// Dense cell tables are used while they stay within this many cells per
/// point (plus a fixed allowance); sparser scenes fall back to a hash map.
const DENSE_CELLS_PER_POINT: u64 = 8;
const DENSE_CELLS_ALLOWANCE: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
enum CellIndex {
    /// `starts[k]..starts[k + 1]` is the slot range of linear cell `k`.
    Dense(Vec<u32>),
    Sparse(HashMap<u64, (u32, u32)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    cell_size: f64,
    origin: [f64; 3],
    dims: [u64; 3],
    index: CellIndex,
    /// Point indices grouped by cell.
    permutation: Vec<u32>,
    /// Positions in permutation order.
    sorted: Vec<[f32; 3]>,
    /// Slot of each original point in `permutation`.
    slot: Vec<u32>,
    /// Integer cell coordinates in permutation order.
    cells: Vec<[u64; 3]>,
}

fn axis_cell(v: f64, origin: f64, cell_size: f64) -> u64 {
    let mut c = ((v - origin) / cell_size).floor().max(0.0) as u64;
    // Repair floating-point rounding so origin + c*s <= v < origin + (c+1)*s
    // holds exactly for the evaluated expressions.
    while c > 0 && origin + c as f64 * cell_size > v {
        c -= 1;
    }
    while origin + (c + 1) as f64 * cell_size <= v {
        c += 1;
    }
    c
}

pub fn build_grid(cloud: &PointCloud, cell_size: f64) -> Result<SpatialGrid> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if !(cell_size > 0.0 && cell_size.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "cell size must be positive, got {cell_size}"
        )));
    }
    let n = cloud.len();
    if n > u32::MAX as usize {
        return Err(Error::InvalidParameter(format!("too many points: {n}")));
    }
    let (origin, hi) = cloud.bounds().ok_or(Error::EmptyCloud)?;

    let mut dims = [0u64; 3];
    for a in 0..3 {
        dims[a] = axis_cell(hi[a], origin[a], cell_size) + 1;
    }
    let total = dims[0]
        .checked_mul(dims[1])
        .and_then(|v| v.checked_mul(dims[2]))
        .ok_or_else(|| {
            Error::InvalidParameter(format!(
                "cell size {cell_size} is too fine for the scene extent"
            ))
        })?;

    let cells: Vec<[u64; 3]> = cloud
        .positions()
        .iter()
        .map(|p| {
            let mut c = [0u64; 3];
            for a in 0..3 {
                c[a] = axis_cell(f64::from(p[a]), origin[a], cell_size);
            }
            c
        })
        .collect();
    let key = |c: &[u64; 3]| (c[2] * dims[1] + c[1]) * dims[0] + c[0];

    let dense = total <= DENSE_CELLS_PER_POINT * n as u64 + DENSE_CELLS_ALLOWANCE;
    let (index, permutation) = if dense {
        // Counting sort by linear cell key.
        let mut starts = vec![0u32; total as usize + 1];
        for c in &cells {
            starts[key(c) as usize + 1] += 1;
        }
        for k in 1..starts.len() {
            starts[k] += starts[k - 1];
        }
        let mut fill = starts.clone();
        let mut permutation = vec![0u32; n];
        for (i, c) in cells.iter().enumerate() {
            let k = key(c) as usize;
            permutation[fill[k] as usize] = i as u32;
            fill[k] += 1;
        }
        (CellIndex::Dense(starts), permutation)
    } else {
        let mut permutation: Vec<u32> = (0..n as u32).collect();
        // Stable sort keeps input order within a cell.
        permutation.sort_by_key(|&i| key(&cells[i as usize]));
        let mut map = HashMap::new();
        let mut s = 0;
        while s < n {
            let k = key(&cells[permutation[s] as usize]);
            let mut e = s + 1;
            while e < n && key(&cells[permutation[e] as usize]) == k {
                e += 1;
            }
            map.insert(k, (s as u32, e as u32));
            s = e;
        }
        (CellIndex::Sparse(map), permutation)
    };

    let sorted = permutation
        .iter()
        .map(|&i| cloud.position(i as usize))
        .collect();
    let mut slot = vec![0u32; n];
    for (s, &i) in permutation.iter().enumerate() {
        slot[i as usize] = s as u32;
    }
    let cells = permutation.iter().map(|&i| cells[i as usize]).collect();

    Ok(SpatialGrid {
        cell_size,
        origin,
        dims,
        index,
        permutation,
        sorted,
        slot,
        cells,
    })
}

impl SpatialGrid {
    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.permutation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.permutation.is_empty()
    }

    /// Point indices grouped by cell.
    pub fn permutation(&self) -> &[u32] {
        &self.permutation
    }

    pub fn cell_of(&self, i: usize) -> [u64; 3] {
        self.cells[self.slot[i] as usize]
    }

    fn linear(&self, c: [u64; 3]) -> u64 {
        (c[2] * self.dims[1] + c[1]) * self.dims[0] + c[0]
    }

    fn range(&self, key: u64) -> (usize, usize) {
        match &self.index {
            CellIndex::Dense(starts) => {
                let k = key as usize;
                (starts[k] as usize, starts[k + 1] as usize)
            }
            CellIndex::Sparse(map) => map
                .get(&key)
                .map_or((0, 0), |&(s, e)| (s as usize, e as usize)),
        }
    }

    /// Point indices stored in cell `c` (empty for unoccupied or out-of-range cells).
    pub fn cell_points(&self, c: [u64; 3]) -> &[u32] {
        if (0..3).any(|a| c[a] >= self.dims[a]) {
            return &[];
        }
        let (s, e) = self.range(self.linear(c));
        &self.permutation[s..e]
    }

    pub fn occupied_cells(&self) -> usize {
        match &self.index {
            CellIndex::Dense(starts) => starts.windows(2).filter(|w| w[1] > w[0]).count(),
            CellIndex::Sparse(map) => map.len(),
        }
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if !(r > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "radius must be positive, got {r}"
            )));
        }
        if r > self.cell_size {
            return Err(Error::RadiusExceedsCell {
                radius: r,
                cell_size: self.cell_size,
            });
        }
        Ok(())
    }

    /// Like [`Self::scan_slots`], but in terms of original point indices.
    #[inline]
    pub(crate) fn scan_neighbors<F>(&self, i: usize, r2: f64, mut visit: F) -> bool
    where
        F: FnMut(usize) -> bool,
    {
        self.scan_slots(self.slot[i] as usize, r2, |t| visit(self.permutation[t] as usize))
    }

    /// Visits the slots in the 27-cell stencil around slot `s` whose points
    /// lie within `sqrt(r2)` of it, excluding `s` itself. Stops as soon as
    /// `visit` returns `true`, and reports whether that happened.
    ///
    /// Walking queries in slot order keeps both the query and its candidates
    /// in nearby memory.
    #[inline]
    pub(crate) fn scan_slots<F>(&self, s: usize, r2: f64, mut visit: F) -> bool
    where
        F: FnMut(usize) -> bool,
    {
        let c = self.cells[s];
        let q = self.sorted[s];
        let mut scan = |a: usize, b: usize| {
            for t in a..b {
                if t != s && dist2(&q, &self.sorted[t]) <= r2 && visit(t) {
                    return true;
                }
            }
            false
        };
        let lo = |v: u64| v.saturating_sub(1);
        let hi = |v: u64, d: u64| (v + 1).min(d - 1);
        let (x0, x1) = (lo(c[0]), hi(c[0], self.dims[0]));
        for z in lo(c[2])..=hi(c[2], self.dims[2]) {
            for y in lo(c[1])..=hi(c[1], self.dims[1]) {
                match &self.index {
                    CellIndex::Dense(starts) => {
                        // Cells along x are adjacent in both the table and the
                        // sorted array, so one slot range covers the row.
                        let k0 = self.linear([x0, y, z]) as usize;
                        let k1 = self.linear([x1, y, z]) as usize;
                        if scan(starts[k0] as usize, starts[k1 + 1] as usize) {
                            return true;
                        }
                    }
                    CellIndex::Sparse(_) => {
                        for x in x0..=x1 {
                            let (a, b) = self.range(self.linear([x, y, z]));
                            if scan(a, b) {
                                return true;
                            }
                        }
                    }
                }
            }
        }
        false
    }
}

/// All points `j != query` with `|p_j - p_query| <= r`, in ascending index order.
pub fn radius_neighbors(
    grid: &SpatialGrid,
    cloud: &PointCloud,
    query: usize,
    r: f64,
) -> Result<Vec<usize>> {
    if cloud.len() != grid.len() {
        return Err(Error::LengthMismatch {
            what: "point cloud (grid built from a different cloud)",
            expected: grid.len(),
            found: cloud.len(),
        });
    }
    if query >= cloud.len() {
        return Err(Error::InvalidParameter(format!(
            "query index {query} out of range for {} points",
            cloud.len()
        )));
    }
    grid.check_radius(r)?;
    let mut out = Vec::new();
    grid.scan_neighbors(query, r * r, |j| {
        out.push(j);
        false
    });
    out.sort_unstable();
    Ok(out)
}

/// Exact closed-ball neighbor set by a full scan over every point.
///
/// Panics if `query` is out of range.
pub fn brute_force_neighbors(cloud: &PointCloud, query: usize, r: f64) -> Vec<usize> {
    let r2 = r * r;
    let q = cloud.position(query);
    cloud
        .positions()
        .iter()
        .enumerate()
        .filter(|&(j, p)| j != query && dist2(&q, p) <= r2)
        .map(|(j, _)| j)
        .collect()
}
