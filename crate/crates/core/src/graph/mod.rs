//! Embedded planar graph model.
//!
//! A [`PlanarGraph`] carries one label per vertex, weighted undirected edges
//! and a rotation system (counterclockwise cyclic order of incident edges per
//! vertex). The rotation system is the embedding; faces are recovered by
//! walking darts with [`Faces::compute`].

mod format;
mod generate;
mod triangulate;

use std::collections::{HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

pub use format::{parse_graph, serialize_graph};
pub use generate::{gen_grid, gen_planar, WeightRange};
pub use triangulate::triangulate;

/// Largest admissible real edge length.
pub const MAX_EDGE_LENGTH: u64 = 1 << 31;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Label(pub u32);

impl Label {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct EdgeId(pub u32);

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Edge length. Artificial edges (added by triangulation) have no finite
/// length and never take part in distance computations.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum EdgeLength {
    Finite(u32),
    Infinite,
}

impl EdgeLength {
    pub fn finite(self) -> Option<u64> {
        match self {
            EdgeLength::Finite(w) => Some(u64::from(w)),
            EdgeLength::Infinite => None,
        }
    }

    pub fn is_artificial(self) -> bool {
        matches!(self, EdgeLength::Infinite)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub length: EdgeLength,
}

impl Edge {
    pub fn real(u: VertexId, v: VertexId, length: u32) -> Self {
        Edge { u, v, length: EdgeLength::Finite(length) }
    }

    pub fn artificial(u: VertexId, v: VertexId) -> Self {
        Edge { u, v, length: EdgeLength::Infinite }
    }

    /// The endpoint opposite `x`.
    #[inline]
    pub fn other(&self, x: VertexId) -> VertexId {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    MalformedLine { line: usize, msg: String },
    #[error("duplicate edge between {0} and {1}")]
    DuplicateEdge(VertexId, VertexId),
    #[error("invalid edge {edge}: {msg}")]
    InvalidEdge { edge: EdgeId, msg: String },
    #[error("vertex {vertex} has label {label} outside [0, {num_labels})")]
    InvalidLabel { vertex: VertexId, label: Label, num_labels: u32 },
    #[error("graph is not connected")]
    Disconnected,
    #[error("inconsistent rotation at vertex {vertex}: {msg}")]
    EmbeddingInconsistent { vertex: VertexId, msg: String },
    #[error("Euler's formula violated: n={n}, m={m}, f={f}")]
    EulerViolation { n: usize, m: usize, f: usize },
}

/// Connected, loop-free, embedded planar graph with one label per vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanarGraph {
    labels: Vec<Label>,
    num_labels: u32,
    edges: Vec<Edge>,
    rotation: Vec<Vec<EdgeId>>,
}

impl PlanarGraph {
    /// Builds and validates a graph. `rotation[v]` lists the edges incident
    /// to `v` in counterclockwise order.
    pub fn new(
        labels: Vec<Label>,
        num_labels: u32,
        edges: Vec<Edge>,
        rotation: Vec<Vec<EdgeId>>,
    ) -> Result<Self, GraphError> {
        let g = PlanarGraph { labels, num_labels, edges, rotation };
        g.validate()?;
        Ok(g)
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn from_parts_unchecked(
        labels: Vec<Label>,
        num_labels: u32,
        edges: Vec<Edge>,
        rotation: Vec<Vec<EdgeId>>,
    ) -> Self {
        PlanarGraph { labels, num_labels, edges, rotation }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Size of the label alphabet declared for this graph.
    pub fn num_labels(&self) -> u32 {
        self.num_labels
    }

    #[inline]
    pub fn label(&self, v: VertexId) -> Label {
        self.labels[v.index()]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub(crate) fn set_label(&mut self, v: VertexId, label: Label) {
        self.labels[v.index()] = label;
    }

    #[inline]
    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.index()]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[inline]
    pub fn rotation(&self, v: VertexId) -> &[EdgeId] {
        &self.rotation[v.index()]
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.n() as u32).map(VertexId)
    }

    pub fn num_artificial(&self) -> usize {
        self.edges.iter().filter(|e| e.length.is_artificial()).count()
    }

    /// Real (finite-length) neighbors of `v` as `(neighbor, edge, length)`.
    pub fn real_neighbors(&self, v: VertexId) -> impl Iterator<Item = (VertexId, EdgeId, u64)> + '_ {
        self.rotation[v.index()].iter().filter_map(move |&e| {
            let edge = &self.edges[e.index()];
            edge.length.finite().map(|w| (edge.other(v), e, w))
        })
    }

    /// Vertices carrying `label`.
    pub fn vertices_with_label(&self, label: Label) -> impl Iterator<Item = VertexId> + '_ {
        self.labels.iter().enumerate().filter(move |(_, &l)| l == label).map(|(i, _)| VertexId(i as u32))
    }

    /// Same vertices, edges and lengths (labels ignored).
    pub fn same_structure(&self, other: &PlanarGraph) -> bool {
        self.edges == other.edges && self.rotation == other.rotation
    }

    /// Checks every structural invariant and returns the face count.
    pub fn validate(&self) -> Result<usize, GraphError> {
        let n = self.n();
        if self.rotation.len() != n {
            return Err(GraphError::EmbeddingInconsistent {
                vertex: VertexId(self.rotation.len().min(n) as u32),
                msg: format!("{} rotation lists for {} vertices", self.rotation.len(), n),
            });
        }
        for (i, &l) in self.labels.iter().enumerate() {
            if l.0 >= self.num_labels {
                return Err(GraphError::InvalidLabel {
                    vertex: VertexId(i as u32),
                    label: l,
                    num_labels: self.num_labels,
                });
            }
        }
        let mut real_pairs = HashSet::new();
        for (i, e) in self.edges.iter().enumerate() {
            let id = EdgeId(i as u32);
            if e.u.index() >= n || e.v.index() >= n {
                return Err(GraphError::InvalidEdge { edge: id, msg: "endpoint out of range".into() });
            }
            if e.u == e.v {
                return Err(GraphError::InvalidEdge { edge: id, msg: "self-loop".into() });
            }
            if let EdgeLength::Finite(w) = e.length {
                if u64::from(w) > MAX_EDGE_LENGTH {
                    return Err(GraphError::InvalidEdge { edge: id, msg: format!("length {w} too large") });
                }
                let key = (e.u.min(e.v), e.u.max(e.v));
                if !real_pairs.insert(key) {
                    return Err(GraphError::DuplicateEdge(key.0, key.1));
                }
            }
        }
        self.check_rotation()?;
        if !self.is_connected() {
            return Err(GraphError::Disconnected);
        }
        let m = self.m();
        let faces = Faces::compute(self);
        let f = faces.count();
        if (n >= 3 && m > 3 * n - 6) || n as i64 - m as i64 + f as i64 != 2 {
            return Err(GraphError::EulerViolation { n, m, f });
        }
        Ok(f)
    }

    fn check_rotation(&self) -> Result<(), GraphError> {
        let mut seen = vec![0u8; 2 * self.m()];
        for (v, rot) in self.rotation.iter().enumerate() {
            let vid = VertexId(v as u32);
            for &e in rot {
                let Some(edge) = self.edges.get(e.index()) else {
                    return Err(GraphError::EmbeddingInconsistent { vertex: vid, msg: format!("unknown edge {e}") });
                };
                let side = if edge.u == vid {
                    0
                } else if edge.v == vid {
                    1
                } else {
                    return Err(GraphError::EmbeddingInconsistent {
                        vertex: vid,
                        msg: format!("edge {e} is not incident"),
                    });
                };
                let slot = &mut seen[2 * e.index() + side];
                *slot += 1;
                if *slot > 1 {
                    return Err(GraphError::EmbeddingInconsistent {
                        vertex: vid,
                        msg: format!("edge {e} listed twice"),
                    });
                }
            }
        }
        if let Some(pos) = seen.iter().position(|&c| c != 1) {
            let e = &self.edges[pos / 2];
            let vertex = if pos % 2 == 0 { e.u } else { e.v };
            return Err(GraphError::EmbeddingInconsistent {
                vertex,
                msg: format!("edge {} missing from rotation", pos / 2),
            });
        }
        Ok(())
    }

    fn is_connected(&self) -> bool {
        let n = self.n();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &e in &self.rotation[v] {
                let w = self.edges[e.index()].other(VertexId(v as u32)).index();
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == n
    }
}

/// A directed edge: `2 * edge` runs `u -> v`, `2 * edge + 1` runs `v -> u`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Dart(pub u32);

impl Dart {
    #[inline]
    pub fn new(e: EdgeId, reversed: bool) -> Self {
        Dart(2 * e.0 + reversed as u32)
    }

    /// The dart along `e` leaving `from`.
    #[inline]
    pub fn leaving(g: &PlanarGraph, e: EdgeId, from: VertexId) -> Self {
        Dart::new(e, g.edge(e).u != from)
    }

    #[inline]
    pub fn edge(self) -> EdgeId {
        EdgeId(self.0 / 2)
    }

    #[inline]
    pub fn twin(self) -> Self {
        Dart(self.0 ^ 1)
    }

    #[inline]
    pub fn tail(self, g: &PlanarGraph) -> VertexId {
        let e = g.edge(self.edge());
        if self.0 & 1 == 0 {
            e.u
        } else {
            e.v
        }
    }

    #[inline]
    pub fn head(self, g: &PlanarGraph) -> VertexId {
        self.twin().tail(g)
    }
}

/// Face structure induced by the rotation system.
///
/// Walking rule: after arriving at `w` along edge `e`, leave along the
/// successor of `e` in `w`'s rotation.
#[derive(Clone, Debug)]
pub struct Faces {
    face_of_dart: Vec<u32>,
    boundaries: Vec<Vec<Dart>>,
}

impl Faces {
    pub fn compute(g: &PlanarGraph) -> Self {
        let darts = 2 * g.m();
        let mut pos_in_rot = vec![0u32; darts];
        for v in g.vertices() {
            for (i, &e) in g.rotation(v).iter().enumerate() {
                pos_in_rot[Dart::leaving(g, e, v).0 as usize] = i as u32;
            }
        }
        let mut face_of_dart = vec![u32::MAX; darts];
        let mut boundaries = Vec::new();
        for start in 0..darts as u32 {
            if face_of_dart[start as usize] != u32::MAX {
                continue;
            }
            let face = boundaries.len() as u32;
            let mut walk = Vec::new();
            let mut d = Dart(start);
            while face_of_dart[d.0 as usize] == u32::MAX {
                face_of_dart[d.0 as usize] = face;
                walk.push(d);
                let w = d.head(g);
                let rot = g.rotation(w);
                let back = d.twin();
                let next = rot[(pos_in_rot[back.0 as usize] as usize + 1) % rot.len()];
                d = Dart::leaving(g, next, w);
            }
            boundaries.push(walk);
        }
        Faces { face_of_dart, boundaries }
    }

    /// Number of faces. A single isolated vertex has one face.
    pub fn count(&self) -> usize {
        self.boundaries.len().max(1)
    }

    #[inline]
    pub fn face_of(&self, d: Dart) -> usize {
        self.face_of_dart[d.0 as usize] as usize
    }

    pub fn boundary(&self, face: usize) -> &[Dart] {
        &self.boundaries[face]
    }

    pub fn boundaries(&self) -> &[Vec<Dart>] {
        &self.boundaries
    }
}

/// Walks every face and checks Euler's formula; returns the face count.
pub fn validate_faces(g: &PlanarGraph) -> Result<usize, GraphError> {
    let f = Faces::compute(g).count();
    let (n, m) = (g.n(), g.m());
    if n as i64 - m as i64 + f as i64 != 2 {
        return Err(GraphError::EulerViolation { n, m, f });
    }
    Ok(f)
}
