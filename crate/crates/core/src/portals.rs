//! Portal selection on separator paths and the per-vertex portal tables.
//!
//! For a vertex `v` and a root-monotone path, a portal set has the distance
//! property when every path node `w` satisfies
//! `min_i d_i + |h_i - h(w)| <= (1 + ε) δ(v, w)`. Selection starts from the
//! projection `z₀` and greedily walks toward the root (phase 1), then away
//! from it (phase 2). A node `z` is a candidate relative to the last chosen
//! portal `z'` when it lies beyond `z'` in the walking direction and
//! `(1 + ε) δ(v, z) < δ(v, z') + |h(z) - h(z')|`, i.e. when `z'` does not
//! already cover it.

use rayon::prelude::*;

use crate::decomposition::{PathSel, PieceId, Rgd, SeparatorPath};
use crate::graph::{PlanarGraph, VertexId};
use crate::shortest_paths::{distances, DistanceMap};
use crate::stretch::Epsilon;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Portal {
    /// Index of `z` on its separator path.
    pub position: u32,
    pub z: VertexId,
    /// δ(v, z)
    pub d: u64,
    /// Root distance of `z`.
    pub h: u64,
}

fn portal_at(dist: &DistanceMap, path: &SeparatorPath, pos: usize) -> Portal {
    let z = path.node(pos);
    Portal { position: pos as u32, z, d: dist.get(z), h: path.h(pos) }
}

/// The path node closest to the source of `dist`; ties prefer smaller `h`,
/// then smaller vertex id.
pub fn project(dist: &DistanceMap, path: &SeparatorPath) -> Portal {
    assert!(!path.is_empty(), "cannot project onto an empty path");
    let pos = (0..path.len()).min_by_key(|&i| (dist.get(path.node(i)), path.h(i), path.node(i))).unwrap();
    portal_at(dist, path, pos)
}

/// Greedy two-phase portal selection; output sorted by `h` ascending.
pub fn select_portals(dist: &DistanceMap, path: &SeparatorPath, eps: Epsilon) -> Vec<Portal> {
    let z0 = project(dist, path);
    let d = |i: usize| dist.get(path.node(i));
    let mut out = vec![z0];

    // toward the root: pick the farthest-from-root candidate
    let mut cur = z0.position as usize;
    loop {
        let (dc, hc) = (d(cur), path.h(cur));
        let next = (0..path.len())
            .filter(|&j| path.h(j) < hc && eps.scaled_lt(d(j), dc + hc - path.h(j)))
            .max_by_key(|&j| (path.h(j), j));
        match next {
            Some(j) => {
                out.push(portal_at(dist, path, j));
                cur = j;
            }
            None => break,
        }
    }

    // away from the root: pick the closest-to-root candidate
    let mut cur = z0.position as usize;
    loop {
        let (dc, hc) = (d(cur), path.h(cur));
        let next = (0..path.len())
            .filter(|&j| path.h(j) > hc && eps.scaled_lt(d(j), dc + path.h(j) - hc))
            .min_by_key(|&j| (path.h(j), j));
        match next {
            Some(j) => {
                out.push(portal_at(dist, path, j));
                cur = j;
            }
            None => break,
        }
    }

    out.sort_by_key(|p| (p.h, p.position));
    out
}

/// Exhaustive check of the distance property over every path node.
pub fn verify_distance_property(dist: &DistanceMap, path: &SeparatorPath, portals: &[Portal], eps: Epsilon) -> bool {
    (0..path.len()).all(|i| {
        let w = path.node(i);
        let hw = path.h(i);
        portals.iter().map(|p| p.d + p.h.abs_diff(hw)).min().is_some_and(|best| eps.within(dist.get(w), best))
    })
}

/// Portals of one vertex on the two paths of one piece's separator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecePortals {
    pub piece: PieceId,
    pub paths: [Vec<Portal>; 2],
}

impl PiecePortals {
    pub fn path(&self, sel: PathSel) -> &[Portal] {
        &self.paths[sel.index()]
    }
}

/// For every vertex, its portals at each separator-carrying piece that
/// contains it, ordered root piece first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexPortalTable {
    per_vertex: Vec<Vec<PiecePortals>>,
}

impl VertexPortalTable {
    pub(crate) fn from_parts(per_vertex: Vec<Vec<PiecePortals>>) -> Self {
        VertexPortalTable { per_vertex }
    }

    #[inline]
    pub fn of(&self, v: VertexId) -> &[PiecePortals] {
        &self.per_vertex[v.index()]
    }

    pub fn num_vertices(&self) -> usize {
        self.per_vertex.len()
    }

    pub fn total_portals(&self) -> usize {
        self.per_vertex.iter().flat_map(|pieces| pieces.iter()).map(|pp| pp.paths[0].len() + pp.paths[1].len()).sum()
    }

    pub fn max_list_len(&self) -> usize {
        self.per_vertex
            .iter()
            .flat_map(|pieces| pieces.iter())
            .flat_map(|pp| pp.paths.iter())
            .map(Vec::len)
            .max()
            .unwrap_or(0)
    }
}

/// Portals of `v` at every separator piece containing it, using the exact
/// distances `dist` from `v`.
pub fn vertex_portals(rgd: &Rgd, v: VertexId, dist: &DistanceMap, eps: Epsilon) -> Vec<PiecePortals> {
    rgd.ancestors(rgd.deepest_piece(v))
        .into_iter()
        .filter_map(|pid| {
            let sep = rgd.piece(pid).separator.as_ref()?;
            Some(PiecePortals {
                piece: pid,
                paths: [select_portals(dist, &sep.paths[0], eps), select_portals(dist, &sep.paths[1], eps)],
            })
        })
        .collect()
}

/// One exact SSSP per vertex, then portal selection on every ancestor
/// separator path. Vertices are processed in parallel.
pub fn build_vertex_tables(g: &PlanarGraph, rgd: &Rgd, eps: Epsilon) -> VertexPortalTable {
    let vertices: Vec<VertexId> = g.vertices().collect();
    let per_vertex = vertices.par_iter().map(|&v| vertex_portals(rgd, v, &distances(g, v), eps)).collect();
    VertexPortalTable { per_vertex }
}
