//! Exact single-source shortest paths over real edges, shortest-path trees,
//! center selection and the brute-force vertex-to-label oracle.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{EdgeId, Label, PlanarGraph, VertexId};

pub const UNREACHABLE: u64 = u64::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error("no vertex carries label {0}")]
    LabelAbsent(Label),
}

/// Distances from one source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceMap {
    pub source: VertexId,
    pub dist: Vec<u64>,
}

impl DistanceMap {
    #[inline]
    pub fn get(&self, v: VertexId) -> u64 {
        self.dist[v.index()]
    }
}

/// Shortest-path tree with root distances `h` and hop levels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spt {
    pub root: VertexId,
    pub parent: Vec<Option<VertexId>>,
    pub parent_edge: Vec<Option<EdgeId>>,
    pub h: Vec<u64>,
    pub level: Vec<u32>,
    /// Largest hop level in the tree.
    pub levels: u32,
}

impl Spt {
    #[inline]
    pub fn h(&self, v: VertexId) -> u64 {
        self.h[v.index()]
    }

    #[inline]
    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[v.index()]
    }

    /// `tree[e]` is true iff edge `e` is some vertex's parent edge.
    pub fn tree_edge_flags(&self, m: usize) -> Vec<bool> {
        let mut flags = vec![false; m];
        for e in self.parent_edge.iter().flatten() {
            flags[e.index()] = true;
        }
        flags
    }

    /// Lowest common ancestor by level-equalizing parent walks.
    pub fn lca(&self, mut a: VertexId, mut b: VertexId) -> VertexId {
        while self.level[a.index()] > self.level[b.index()] {
            a = self.parent[a.index()].expect("non-root has a parent");
        }
        while self.level[b.index()] > self.level[a.index()] {
            b = self.parent[b.index()].expect("non-root has a parent");
        }
        while a != b {
            a = self.parent[a.index()].expect("non-root has a parent");
            b = self.parent[b.index()].expect("non-root has a parent");
        }
        a
    }

    /// True iff `a` lies on the tree path from the root to `b`.
    pub fn is_ancestor(&self, a: VertexId, mut b: VertexId) -> bool {
        while self.level[b.index()] > self.level[a.index()] {
            b = self.parent[b.index()].expect("non-root has a parent");
        }
        a == b
    }
}

/// Dijkstra over real edges.
///
/// Among parents offering the same distance the tree prefers the smaller
/// vertex id, then the smaller edge id; only vertices settled earlier are
/// eligible, so zero-length edges cannot create parent cycles.
pub fn sssp(g: &PlanarGraph, source: VertexId) -> (DistanceMap, Spt) {
    let n = g.n();
    let mut dist = vec![UNREACHABLE; n];
    let mut parent: Vec<Option<VertexId>> = vec![None; n];
    let mut parent_edge: Vec<Option<EdgeId>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut heap = BinaryHeap::new();
    dist[source.index()] = 0;
    heap.push(Reverse((0u64, source)));
    while let Some(Reverse((d, v))) = heap.pop() {
        if settled[v.index()] || d > dist[v.index()] {
            continue;
        }
        settled[v.index()] = true;
        order.push(v);
        for (w, e, len) in g.real_neighbors(v) {
            if settled[w.index()] {
                continue;
            }
            let nd = d + len;
            let cur = dist[w.index()];
            let better =
                nd < cur || (nd == cur && (v, e) < (parent[w.index()].unwrap(), parent_edge[w.index()].unwrap()));
            if better {
                if nd < cur {
                    heap.push(Reverse((nd, w)));
                }
                dist[w.index()] = nd;
                parent[w.index()] = Some(v);
                parent_edge[w.index()] = Some(e);
            }
        }
    }

    // parents are settled before their children
    let mut level = vec![0u32; n];
    let mut levels = 0;
    for v in order {
        if let Some(p) = parent[v.index()] {
            level[v.index()] = level[p.index()] + 1;
            levels = levels.max(level[v.index()]);
        }
    }
    let h = dist.clone();
    (DistanceMap { source, dist }, Spt { root: source, parent, parent_edge, h, level, levels })
}

/// Distances only.
pub fn distances(g: &PlanarGraph, source: VertexId) -> DistanceMap {
    sssp(g, source).0
}

/// The vertex whose shortest-path tree has the fewest hop levels (ties go to
/// the smallest id), together with that level count.
pub fn find_center(g: &PlanarGraph) -> (VertexId, u32) {
    let levels: Vec<u32> = g.vertices().collect::<Vec<_>>().par_iter().map(|&v| sssp(g, v).1.levels).collect();
    let (best, &rho) = levels.iter().enumerate().min_by_key(|&(i, &l)| (l, i)).expect("graph has at least one vertex");
    (VertexId(best as u32), rho)
}

/// Largest distance from `v` to any vertex.
pub fn weighted_eccentricity(g: &PlanarGraph, v: VertexId) -> u64 {
    distances(g, v).dist.into_iter().max().unwrap_or(0)
}

/// Exact `min { dist(u, v) : label(v) = label }` with the smallest-id witness.
pub fn exact_label_distance(g: &PlanarGraph, u: VertexId, label: Label) -> Result<(u64, VertexId), PathError> {
    let dm = distances(g, u);
    nearest_in(&dm, g, label).ok_or(PathError::LabelAbsent(label))
}

/// Exact nearest vertex of every label from one source; `None` for labels
/// no vertex carries.
pub fn exact_label_distances_from(g: &PlanarGraph, u: VertexId) -> Vec<Option<(u64, VertexId)>> {
    let dm = distances(g, u);
    let mut best: Vec<Option<(u64, VertexId)>> = vec![None; g.num_labels() as usize];
    for v in g.vertices() {
        let cand = (dm.get(v), v);
        let slot = &mut best[g.label(v).index()];
        if slot.is_none_or(|b| cand < b) {
            *slot = Some(cand);
        }
    }
    best
}

fn nearest_in(dm: &DistanceMap, g: &PlanarGraph, label: Label) -> Option<(u64, VertexId)> {
    g.vertices_with_label(label).map(|v| (dm.get(v), v)).min()
}
