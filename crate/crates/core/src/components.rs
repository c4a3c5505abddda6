//! Connected components of the same-label radius graph: two annotated points
//! are adjacent when they share a label and lie within `r` of each other.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::parallel::{map_indices, Workers};
use crate::spatial::{build_grid, SpatialGrid};
use crate::types::{check_len, LabelField, PointCloud};

const EDGE_BLOCK: usize = 4096;

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let p = self.parent[x] as usize;
            self.parent[x] = self.parent[p];
            x = self.parent[x] as usize;
        }
        x
    }

    /// Merges the sets of `a` and `b`; returns `false` if they were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub label: usize,
    /// Member indices in ascending order; never empty.
    pub point_indices: Vec<usize>,
}

impl Component {
    pub fn size(&self) -> usize {
        self.point_indices.len()
    }
}

/// Components sorted by `(label, smallest member index)`, plus a per-point
/// lookup into that list (`None` for ignored points).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    pub components: Vec<Component>,
    pub membership: Vec<Option<u32>>,
}

impl Components {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Component> {
        self.components.iter()
    }
}

pub fn extract_components(cloud: &PointCloud, labels: &LabelField, r: f64) -> Result<Components> {
    check_len("labels", cloud.len(), labels.len())?;
    if cloud.is_empty() {
        return Ok(Components {
            components: Vec::new(),
            membership: Vec::new(),
        });
    }
    let grid = build_grid(cloud, r)?;
    extract_components_in(&grid, labels, r, Workers::default())
}

pub fn extract_components_in(
    grid: &SpatialGrid,
    labels: &LabelField,
    r: f64,
    workers: Workers,
) -> Result<Components> {
    check_len("labels", grid.len(), labels.len())?;
    if r > grid.cell_size() {
        return Err(crate::Error::RadiusExceedsCell {
            radius: r,
            cell_size: grid.cell_size(),
        });
    }
    let n = labels.len();
    let r2 = r * r;
    let mut uf = UnionFind::new(n);

    // Candidate edges are generated in parallel per block, then merged in
    // index order so the forest is identical for any worker count.
    for start in (0..n).step_by(EDGE_BLOCK) {
        let len = EDGE_BLOCK.min(n - start);
        let edges = map_indices(len, workers, |k| {
            let i = start + k;
            let mut out = Vec::new();
            if let Some(own) = labels.class_of(i) {
                grid.scan_neighbors(i, r2, |j| {
                    if j > i && labels.class_of(j) == Some(own) {
                        out.push(j as u32);
                    }
                    false
                });
            }
            out
        });
        for (k, nbrs) in edges.into_iter().enumerate() {
            for j in nbrs {
                uf.union(start + k, j as usize);
            }
        }
    }

    let mut root_to_id: Vec<u32> = vec![u32::MAX; n];
    let mut components: Vec<Component> = Vec::new();
    for i in 0..n {
        let Some(label) = labels.class_of(i) else {
            continue;
        };
        let root = uf.find(i);
        if root_to_id[root] == u32::MAX {
            root_to_id[root] = components.len() as u32;
            components.push(Component {
                label,
                point_indices: Vec::new(),
            });
        }
        components[root_to_id[root] as usize].point_indices.push(i);
    }
    // Creation order is by smallest member, so a stable sort by label gives
    // the (label, smallest member) order.
    components.sort_by_key(|c| c.label);
    let mut membership = vec![None; n];
    for (id, c) in components.iter().enumerate() {
        for &i in &c.point_indices {
            membership[i] = Some(id as u32);
        }
    }
    Ok(Components {
        components,
        membership,
    })
}

/// Most frequent predicted class among the component's members, ties going
/// to the smallest class id. `None` only if every member is ignored in `pred`.
pub fn plurality_predicted_label(component: &Component, pred: &LabelField) -> Option<usize> {
    plurality_with_count(component, pred).map(|(label, _)| label)
}

pub(crate) fn plurality_with_count(component: &Component, pred: &LabelField) -> Option<(usize, u64)> {
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    for &i in &component.point_indices {
        if let Some(c) = pred.class_of(i) {
            *counts.entry(c).or_default() += 1;
        }
    }
    let mut best: Option<(usize, u64)> = None;
    for (label, count) in counts {
        if best.is_none_or(|(_, c)| count > c) {
            best = Some((label, count));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SceneRng;

    fn lattice(n: usize, pitch: f32, offset: f32) -> Vec<[f32; 3]> {
        let mut v = Vec::new();
        for x in 0..n {
            for y in 0..n {
                v.push([offset + x as f32 * pitch, y as f32 * pitch, 0.0]);
            }
        }
        v
    }

    #[test]
    fn union_find_basics() {
        let mut uf = UnionFind::new(5);
        assert!(uf.union(0, 1));
        assert!(uf.union(3, 4));
        assert!(!uf.union(1, 0));
        assert_eq!(uf.find(0), uf.find(1));
        assert_ne!(uf.find(0), uf.find(3));
        assert!(uf.union(1, 4));
        assert_eq!(uf.find(0), uf.find(3));
    }

    #[test]
    fn dense_uniform_cloud_is_one_component() {
        let cloud = PointCloud::new(lattice(20, 0.02, 0.0)).unwrap();
        let labels = LabelField::from_labels(vec![4; 400]).unwrap();
        let comps = extract_components(&cloud, &labels, 0.06).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps.components[0].size(), 400);
        assert_eq!(comps.components[0].label, 4);
    }

    #[test]
    fn separated_clusters_are_two_components() {
        let mut pts = lattice(5, 0.02, 0.0);
        pts.extend(lattice(5, 0.02, 1.0));
        let cloud = PointCloud::new(pts).unwrap();
        let labels = LabelField::from_labels(vec![0; 50]).unwrap();
        let comps = extract_components(&cloud, &labels, 0.06).unwrap();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps.components[0].point_indices, (0..25).collect::<Vec<_>>());
    }

    #[test]
    fn ignore_points_belong_to_no_component() {
        let cloud = PointCloud::new(lattice(4, 0.02, 0.0)).unwrap();
        let mut l = vec![1; 16];
        l[3] = -1;
        let labels = LabelField::from_labels(l).unwrap();
        let comps = extract_components(&cloud, &labels, 0.06).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps.components[0].size(), 15);
        assert_eq!(comps.membership[3], None);
    }

    #[test]
    fn plurality_rules() {
        let comp = Component {
            label: 0,
            point_indices: (0..10).collect(),
        };
        let pred = LabelField::from_labels(vec![7; 10]).unwrap();
        assert_eq!(plurality_predicted_label(&comp, &pred), Some(7));
        let mut l = vec![9; 10];
        l[..5].fill(3);
        let pred = LabelField::from_labels(l).unwrap();
        assert_eq!(plurality_predicted_label(&comp, &pred), Some(3));
    }

    #[test]
    fn plurality_matches_naive_histogram() {
        let mut rng = SceneRng::new(99);
        for _ in 0..50 {
            let size = 1 + rng.next_below(40) as usize;
            let labels: Vec<i32> = (0..size).map(|_| rng.next_below(5) as i32).collect();
            let comp = Component {
                label: 0,
                point_indices: (0..size).collect(),
            };
            let pred = LabelField::from_labels(labels.clone()).unwrap();
            let mut hist = [0usize; 5];
            for &l in &labels {
                hist[l as usize] += 1;
            }
            let max = *hist.iter().max().unwrap();
            let expect = hist.iter().position(|&c| c == max).unwrap();
            assert_eq!(plurality_predicted_label(&comp, &pred), Some(expect));
        }
    }
}
