//! Fundamental-cycle separators and the recursive graph decomposition.
//!
//! All separators are fundamental cycles of one global shortest-path tree
//! in the triangulated graph. A cycle is split at its apex (the tree LCA of
//! the non-tree edge's endpoints) into two root-monotone paths, so the
//! distance between two nodes of one path is the difference of their root
//! distances.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::graph::{Dart, EdgeId, Faces, Label, PlanarGraph, VertexId};
use crate::shortest_paths::{Spt, UNREACHABLE};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct PieceId(pub u32);

impl PieceId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for PieceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Which of a separator's two paths.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum PathSel {
    A,
    B,
}

impl PathSel {
    pub const BOTH: [PathSel; 2] = [PathSel::A, PathSel::B];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecompositionError {
    #[error("edge {0} belongs to the shortest-path tree")]
    EdgeInTree(EdgeId),
    #[error("vertex {0} touches faces on both sides of the cycle")]
    InconsistentEmbedding(VertexId),
    #[error("no balanced fundamental cycle for piece {piece} with {members} members")]
    NoBalancedEdge { piece: PieceId, members: usize },
}

/// A descending tree path starting at the cycle apex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparatorPath {
    nodes: Vec<VertexId>,
    h: Vec<u64>,
}

impl SeparatorPath {
    /// Tree path from `apex` down to its descendant `bottom`.
    pub fn descending(spt: &Spt, apex: VertexId, bottom: VertexId) -> Self {
        let mut nodes = vec![bottom];
        let mut cur = bottom;
        while cur != apex {
            cur = spt.parent(cur).expect("apex is an ancestor of bottom");
            nodes.push(cur);
        }
        nodes.reverse();
        let h = nodes.iter().map(|&v| spt.h(v)).collect();
        SeparatorPath { nodes, h }
    }

    pub(crate) fn from_parts(nodes: Vec<VertexId>, h: Vec<u64>) -> Self {
        debug_assert_eq!(nodes.len(), h.len());
        SeparatorPath { nodes, h }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[VertexId] {
        &self.nodes
    }

    pub fn hs(&self) -> &[u64] {
        &self.h
    }

    #[inline]
    pub fn node(&self, pos: usize) -> VertexId {
        self.nodes[pos]
    }

    #[inline]
    pub fn h(&self, pos: usize) -> u64 {
        self.h[pos]
    }

    pub fn position(&self, v: VertexId) -> Option<usize> {
        self.nodes.iter().position(|&x| x == v)
    }
}

/// Fundamental cycle of `nontree_edge` split into two apex-rooted paths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Separator {
    pub nontree_edge: EdgeId,
    pub paths: [SeparatorPath; 2],
    /// Sorted, deduplicated.
    pub cycle_vertices: Vec<VertexId>,
}

impl Separator {
    pub(crate) fn from_paths(nontree_edge: EdgeId, a: SeparatorPath, b: SeparatorPath) -> Self {
        let mut cycle_vertices: Vec<VertexId> = a.nodes.iter().chain(&b.nodes).copied().collect();
        cycle_vertices.sort_unstable();
        cycle_vertices.dedup();
        Separator { nontree_edge, paths: [a, b], cycle_vertices }
    }

    #[inline]
    pub fn path(&self, sel: PathSel) -> &SeparatorPath {
        &self.paths[sel.index()]
    }

    pub fn apex(&self) -> VertexId {
        self.paths[0].nodes[0]
    }

    pub fn on_cycle(&self, v: VertexId) -> bool {
        self.cycle_vertices.binary_search(&v).is_ok()
    }

    /// Tree edges of both paths plus the closing edge.
    pub fn cycle_edges(&self, spt: &Spt) -> Vec<EdgeId> {
        let mut edges: Vec<EdgeId> = self
            .paths
            .iter()
            .flat_map(|p| p.nodes[1..].iter().map(|&v| spt.parent_edge[v.index()].expect("non-apex has parent")))
            .collect();
        edges.push(self.nontree_edge);
        edges.sort_unstable();
        edges.dedup();
        edges
    }
}

/// Which side of a separator cycle a vertex lies on.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Side {
    Exterior,
    Interior,
    OnCycle,
}

/// The cycle closed by non-tree edge `e`.
pub fn fundamental_cycle(g: &PlanarGraph, spt: &Spt, e: EdgeId) -> Result<Separator, DecompositionError> {
    let edge = g.edge(e);
    if spt.parent_edge[edge.u.index()] == Some(e) || spt.parent_edge[edge.v.index()] == Some(e) {
        return Err(DecompositionError::EdgeInTree(e));
    }
    let apex = spt.lca(edge.u, edge.v);
    Ok(Separator::from_paths(
        e,
        SeparatorPath::descending(spt, apex, edge.u),
        SeparatorPath::descending(spt, apex, edge.v),
    ))
}

/// Degenerate separator for graphs without non-tree edges (n <= 2): the
/// tree path from the root to `bottom`.
fn tree_path_separator(spt: &Spt, bottom: VertexId) -> Separator {
    let e = spt.parent_edge[bottom.index()].expect("bottom is not the root");
    Separator::from_paths(
        e,
        SeparatorPath::descending(spt, spt.root, bottom),
        SeparatorPath::descending(spt, spt.root, spt.root),
    )
}

/// Two-colors the faces by a dual traversal that never crosses a cycle
/// edge, seeded with the two faces on either side of the closing edge.
/// The face left of the `u -> v` dart of the closing edge is exterior.
pub fn classify_sides(g: &PlanarGraph, spt: &Spt, sep: &Separator) -> Result<Vec<Side>, DecompositionError> {
    classify_sides_with(g, &Faces::compute(g), spt, sep)
}

pub(crate) fn classify_sides_with(
    g: &PlanarGraph,
    faces: &Faces,
    spt: &Spt,
    sep: &Separator,
) -> Result<Vec<Side>, DecompositionError> {
    let mut side = vec![Side::OnCycle; g.n()];
    if sep.cycle_vertices.len() == g.n() {
        return Ok(side);
    }
    let mut cycle_edge = vec![false; g.m()];
    for e in sep.cycle_edges(spt) {
        cycle_edge[e.index()] = true;
    }
    let nf = faces.boundaries().len();
    let mut color: Vec<Option<Side>> = vec![None; nf];
    let mut queue = VecDeque::new();
    let e = sep.nontree_edge;
    let seeds =
        [(faces.face_of(Dart::new(e, false)), Side::Exterior), (faces.face_of(Dart::new(e, true)), Side::Interior)];
    for (f, c) in seeds {
        match color[f] {
            Some(prev) if prev != c => return Err(DecompositionError::InconsistentEmbedding(g.edge(e).u)),
            _ => {
                color[f] = Some(c);
                queue.push_back(f);
            }
        }
    }
    while let Some(f) = queue.pop_front() {
        let c = color[f].unwrap();
        for &d in faces.boundary(f) {
            if cycle_edge[d.edge().index()] {
                continue;
            }
            let nb = faces.face_of(d.twin());
            match color[nb] {
                None => {
                    color[nb] = Some(c);
                    queue.push_back(nb);
                }
                Some(other) if other != c => {
                    return Err(DecompositionError::InconsistentEmbedding(d.tail(g)));
                }
                _ => {}
            }
        }
    }
    for v in g.vertices() {
        if sep.on_cycle(v) {
            continue;
        }
        let mut seen: Option<Side> = None;
        for &e in g.rotation(v) {
            let c = color[faces.face_of(Dart::leaving(g, e, v))];
            match (seen, c) {
                (_, None) => return Err(DecompositionError::InconsistentEmbedding(v)),
                (None, Some(c)) => seen = Some(c),
                (Some(s), Some(c)) if s != c => return Err(DecompositionError::InconsistentEmbedding(v)),
                _ => {}
            }
        }
        side[v.index()] = seen.ok_or(DecompositionError::InconsistentEmbedding(v))?;
    }
    Ok(side)
}

/// Precomputed state for scanning all fundamental cycles of one tree.
///
/// The non-tree edges form a spanning tree of the dual graph (the co-tree).
/// Deleting a non-tree edge from it leaves two face sets, which are exactly
/// the two regions bounded by that edge's fundamental cycle. Each vertex is
/// charged to one incident "home" face, so a region's vertex weight is a
/// co-tree subtree sum corrected for the cycle's own vertices.
pub(crate) struct SeparatorSearch<'a> {
    g: &'a PlanarGraph,
    spt: &'a Spt,
    faces: Faces,
    /// (edge, child face, child face lies on the exterior side)
    candidates: Vec<(EdgeId, usize, bool)>,
    cycles: Vec<Vec<VertexId>>,
    order: Vec<usize>,
    cotree_parent: Vec<Option<usize>>,
    tin: Vec<u32>,
    tout: Vec<u32>,
    home: Vec<usize>,
}

impl<'a> SeparatorSearch<'a> {
    pub(crate) fn new(g: &'a PlanarGraph, spt: &'a Spt) -> Self {
        let faces = Faces::compute(g);
        let nf = faces.boundaries().len();
        let tree = spt.tree_edge_flags(g.m());

        // co-tree adjacency: face -> (neighbor face, edge)
        let mut adj: Vec<Vec<(usize, EdgeId)>> = vec![Vec::new(); nf];
        for e in (0..g.m() as u32).map(EdgeId) {
            if tree[e.index()] {
                continue;
            }
            let f0 = faces.face_of(Dart::new(e, false));
            let f1 = faces.face_of(Dart::new(e, true));
            adj[f0].push((f1, e));
            adj[f1].push((f0, e));
        }
        let mut cotree_parent = vec![None; nf];
        let mut parent_edge: Vec<Option<EdgeId>> = vec![None; nf];
        let mut tin = vec![0u32; nf];
        let mut tout = vec![0u32; nf];
        let mut order = Vec::with_capacity(nf);
        if nf > 0 {
            let mut visited = vec![false; nf];
            let mut clock = 0u32;
            // iterative DFS: (face, next adjacency index)
            let mut stack = vec![(0usize, 0usize)];
            visited[0] = true;
            tin[0] = clock;
            clock += 1;
            order.push(0);
            while let Some(&mut (f, ref mut i)) = stack.last_mut() {
                if *i < adj[f].len() {
                    let (nb, e) = adj[f][*i];
                    *i += 1;
                    if !visited[nb] {
                        visited[nb] = true;
                        cotree_parent[nb] = Some(f);
                        parent_edge[nb] = Some(e);
                        tin[nb] = clock;
                        clock += 1;
                        order.push(nb);
                        stack.push((nb, 0));
                    }
                } else {
                    tout[f] = clock;
                    stack.pop();
                }
            }
        }

        let mut candidates = Vec::new();
        let mut cycles = Vec::new();
        for e in (0..g.m() as u32).map(EdgeId) {
            if tree[e.index()] {
                continue;
            }
            let f0 = faces.face_of(Dart::new(e, false));
            let f1 = faces.face_of(Dart::new(e, true));
            let (child, child_is_ext) = if parent_edge[f0] == Some(e) {
                (f0, true)
            } else {
                debug_assert_eq!(parent_edge[f1], Some(e));
                (f1, false)
            };
            candidates.push((e, child, child_is_ext));
            let edge = g.edge(e);
            let apex = spt.lca(edge.u, edge.v);
            let mut cyc = vec![apex];
            for end in [edge.u, edge.v] {
                let mut cur = end;
                while cur != apex {
                    cyc.push(cur);
                    cur = spt.parent(cur).expect("apex is an ancestor");
                }
            }
            cycles.push(cyc);
        }

        let home =
            g.vertices().map(|v| g.rotation(v).first().map_or(0, |&e| faces.face_of(Dart::leaving(g, e, v)))).collect();

        SeparatorSearch { g, spt, faces, candidates, cycles, order, cotree_parent, tin, tout, home }
    }

    #[inline]
    fn in_subtree(&self, root: usize, f: usize) -> bool {
        self.tin[root] <= self.tin[f] && self.tin[f] < self.tout[root]
    }

    /// (exterior weight, interior weight) of every candidate edge.
    pub(crate) fn side_weights(&self, weights: &[bool]) -> Vec<(EdgeId, usize, usize)> {
        let nf = self.faces.boundaries().len();
        let mut sub = vec![0usize; nf];
        let mut total = 0;
        for v in self.g.vertices() {
            if weights[v.index()] {
                sub[self.home[v.index()]] += 1;
                total += 1;
            }
        }
        for &f in self.order.iter().rev() {
            if let Some(p) = self.cotree_parent[f] {
                sub[p] += sub[f];
            }
        }
        self.candidates
            .iter()
            .zip(&self.cycles)
            .map(|(&(e, child, child_is_ext), cyc)| {
                let mut inside = sub[child];
                let mut outside = total - inside;
                for &c in cyc {
                    if weights[c.index()] {
                        if self.in_subtree(child, self.home[c.index()]) {
                            inside -= 1;
                        } else {
                            outside -= 1;
                        }
                    }
                }
                if child_is_ext {
                    (e, inside, outside)
                } else {
                    (e, outside, inside)
                }
            })
            .collect()
    }

    /// Balanced separator for the vertices flagged in `weights`: both sides
    /// carry at most 2/3 of the total; among those, the smallest heavier
    /// side wins, then the smallest edge id.
    pub(crate) fn choose(&self, weights: &[bool], piece: PieceId) -> Result<Separator, DecompositionError> {
        let total = weights.iter().filter(|&&w| w).count();
        if self.candidates.is_empty() {
            // Only a tree (n <= 2): the root path to the deepest member.
            let bottom = self
                .g
                .vertices()
                .filter(|&v| weights[v.index()])
                .max_by_key(|&v| (self.spt.level[v.index()], v))
                .filter(|&v| v != self.spt.root)
                .ok_or(DecompositionError::NoBalancedEdge { piece, members: total })?;
            return Ok(tree_path_separator(self.spt, bottom));
        }
        let best = self
            .side_weights(weights)
            .into_iter()
            .filter(|&(_, ext, int)| 3 * ext.max(int) <= 2 * total)
            .min_by_key(|&(e, ext, int)| (ext.max(int), e));
        match best {
            Some((e, _, _)) => fundamental_cycle(self.g, self.spt, e),
            None => Err(DecompositionError::NoBalancedEdge { piece, members: total }),
        }
    }

    pub(crate) fn classify(&self, sep: &Separator) -> Result<Vec<Side>, DecompositionError> {
        classify_sides_with(self.g, &self.faces, self.spt, sep)
    }
}

/// Balanced fundamental-cycle separator for the vertices flagged in
/// `weights`; `g` must be triangulated.
pub fn choose_separator(g: &PlanarGraph, spt: &Spt, weights: &[bool]) -> Result<Separator, DecompositionError> {
    SeparatorSearch::new(g, spt).choose(weights, PieceId(0))
}

/// Exact distances inside the subgraph induced by a small leaf piece.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeafTable {
    members: Vec<VertexId>,
    /// Row-major `members.len()^2` matrix; `UNREACHABLE` where the induced
    /// subgraph is disconnected.
    dist: Vec<u64>,
    by_label: BTreeMap<(VertexId, Label), (u64, VertexId)>,
}

impl LeafTable {
    pub(crate) fn build(g: &PlanarGraph, members: &[VertexId]) -> Self {
        let k = members.len();
        let local: HashMap<VertexId, usize> = members.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut dist = vec![UNREACHABLE; k * k];
        for (s, &src) in members.iter().enumerate() {
            let row = &mut dist[s * k..(s + 1) * k];
            row[s] = 0;
            let mut heap = std::collections::BinaryHeap::new();
            heap.push(std::cmp::Reverse((0u64, src)));
            while let Some(std::cmp::Reverse((d, v))) = heap.pop() {
                if d > row[local[&v]] {
                    continue;
                }
                for (w, _, len) in g.real_neighbors(v) {
                    if let Some(&j) = local.get(&w) {
                        if d + len < row[j] {
                            row[j] = d + len;
                            heap.push(std::cmp::Reverse((d + len, w)));
                        }
                    }
                }
            }
        }
        let mut t = LeafTable { members: members.to_vec(), dist, by_label: BTreeMap::new() };
        t.refresh_labels(g.labels());
        t
    }

    pub(crate) fn from_parts(members: Vec<VertexId>, dist: Vec<u64>, labels: &[Label]) -> Self {
        let mut t = LeafTable { members, dist, by_label: BTreeMap::new() };
        t.refresh_labels(labels);
        t
    }

    /// Recomputes the per-label minima after labels change.
    pub(crate) fn refresh_labels(&mut self, labels: &[Label]) {
        let k = self.members.len();
        self.by_label.clear();
        for (i, &u) in self.members.iter().enumerate() {
            for (j, &v) in self.members.iter().enumerate() {
                let d = self.dist[i * k + j];
                if d == UNREACHABLE {
                    continue;
                }
                let slot = self.by_label.entry((u, labels[v.index()])).or_insert((d, v));
                if (d, v) < *slot {
                    *slot = (d, v);
                }
            }
        }
    }

    pub fn members(&self) -> &[VertexId] {
        &self.members
    }

    pub fn distances(&self) -> &[u64] {
        &self.dist
    }

    /// Induced-subgraph distance from `u` to the nearest `label` member.
    pub fn lookup(&self, u: VertexId, label: Label) -> Option<(u64, VertexId)> {
        self.by_label.get(&(u, label)).copied()
    }

    pub fn cells(&self) -> usize {
        self.by_label.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub id: PieceId,
    pub parent: Option<PieceId>,
    pub depth: u32,
    /// Sorted.
    pub members: Vec<VertexId>,
    pub separator: Option<Separator>,
    /// `[exterior, interior]`
    pub children: Option<[PieceId; 2]>,
    pub leaf_table: Option<LeafTable>,
}

impl Piece {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.members.binary_search(&v).is_ok()
    }
}

/// Recursive graph decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rgd {
    pieces: Vec<Piece>,
    deepest: Vec<PieceId>,
    leaf_max: usize,
}

impl Rgd {
    pub(crate) fn from_parts(pieces: Vec<Piece>, leaf_max: usize, n: usize) -> Self {
        let mut deepest = vec![PieceId(0); n];
        let mut best_depth = vec![0u32; n];
        for p in &pieces {
            for &v in &p.members {
                if p.depth >= best_depth[v.index()] {
                    best_depth[v.index()] = p.depth;
                    deepest[v.index()] = p.id;
                }
            }
        }
        Rgd { pieces, deepest, leaf_max }
    }

    pub fn root(&self) -> PieceId {
        PieceId(0)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    #[inline]
    pub fn piece(&self, id: PieceId) -> &Piece {
        &self.pieces[id.index()]
    }

    pub(crate) fn piece_mut(&mut self, id: PieceId) -> &mut Piece {
        &mut self.pieces[id.index()]
    }

    pub fn leaf_max(&self) -> usize {
        self.leaf_max
    }

    /// The deepest piece whose members contain `v`.
    #[inline]
    pub fn deepest_piece(&self, v: VertexId) -> PieceId {
        self.deepest[v.index()]
    }

    pub fn depth(&self) -> u32 {
        self.pieces.iter().map(|p| p.depth).max().unwrap_or(0)
    }

    /// Root-to-`piece` chain, inclusive.
    pub fn ancestors(&self, piece: PieceId) -> Vec<PieceId> {
        let mut out = vec![piece];
        let mut cur = piece;
        while let Some(p) = self.pieces[cur.index()].parent {
            out.push(p);
            cur = p;
        }
        out.reverse();
        out
    }

    pub fn lca(&self, mut p: PieceId, mut q: PieceId) -> PieceId {
        let depth = |x: PieceId| self.pieces[x.index()].depth;
        let up = |x: PieceId| self.pieces[x.index()].parent.expect("non-root piece has a parent");
        while depth(p) > depth(q) {
            p = up(p);
        }
        while depth(q) > depth(p) {
            q = up(q);
        }
        while p != q {
            p = up(p);
            q = up(q);
        }
        p
    }
}

/// Recursively splits the vertex set with balanced fundamental-cycle
/// separators until pieces have at most `leaf_max` members. `g` must be
/// triangulated and `spt` a shortest-path tree of it over real edges.
pub fn build_rgd(g: &PlanarGraph, spt: &Spt, leaf_max: usize) -> Result<Rgd, DecompositionError> {
    assert!(leaf_max >= 1, "leaf_max must be at least 1");
    let search = SeparatorSearch::new(g, spt);
    let mut pieces = vec![Piece {
        id: PieceId(0),
        parent: None,
        depth: 0,
        members: g.vertices().collect(),
        separator: None,
        children: None,
        leaf_table: None,
    }];
    let mut weights = vec![false; g.n()];
    let mut queue = VecDeque::from([PieceId(0)]);
    while let Some(pid) = queue.pop_front() {
        let members = pieces[pid.index()].members.clone();
        if members.len() <= leaf_max {
            if members.len() > 1 {
                pieces[pid.index()].leaf_table = Some(LeafTable::build(g, &members));
            }
            continue;
        }
        for &v in &members {
            weights[v.index()] = true;
        }
        let sep = search.choose(&weights, pid);
        for &v in &members {
            weights[v.index()] = false;
        }
        let sep = sep?;
        let sides = search.classify(&sep)?;
        let (mut ext, mut int) = (Vec::new(), Vec::new());
        for &v in &members {
            match sides[v.index()] {
                Side::Exterior => ext.push(v),
                Side::Interior => int.push(v),
                Side::OnCycle => {}
            }
        }
        let depth = pieces[pid.index()].depth + 1;
        let mut ids = [PieceId(0); 2];
        for (slot, child_members) in [ext, int].into_iter().enumerate() {
            let id = PieceId(pieces.len() as u32);
            ids[slot] = id;
            pieces.push(Piece {
                id,
                parent: Some(pid),
                depth,
                members: child_members,
                separator: None,
                children: None,
                leaf_table: None,
            });
            queue.push_back(id);
        }
        let piece = &mut pieces[pid.index()];
        piece.separator = Some(sep);
        piece.children = Some(ids);
    }
    Ok(Rgd::from_parts(pieces, leaf_max, g.n()))
}
