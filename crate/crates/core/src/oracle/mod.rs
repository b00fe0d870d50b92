//! The vertex-to-label distance oracle: preprocessing pipeline, queries,
//! label changes and space accounting.

mod io;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::decomposition::{build_rgd, DecompositionError, PathSel, PieceId, Rgd};
use crate::graph::{triangulate, GraphError, Label, PlanarGraph, VertexId};
use crate::index::{build_label_index, LabelIndex, RangeMode};
use crate::portals::{build_vertex_tables, VertexPortalTable};
use crate::shortest_paths::{find_center, sssp, Spt};
use crate::stretch::Epsilon;

pub use io::{FormatError, FORMAT_VERSION, MAGIC};

/// Target stretch: `1 + ε` with `0 < ε < 1`, or the single-portal 3-stretch.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Stretch {
    Eps(Epsilon),
    Three,
}

impl Stretch {
    /// ε used for portal selection; 2 in 3-stretch mode.
    pub fn epsilon(self) -> Epsilon {
        match self {
            Stretch::Eps(e) => e,
            Stretch::Three => Epsilon::TWO,
        }
    }
}

impl fmt::Display for Stretch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stretch::Eps(e) => e.fmt(f),
            Stretch::Three => f.write_str("three"),
        }
    }
}

impl fmt::Display for RangeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RangeMode::BinarySearch => "binary",
            RangeMode::Bitvector => "bitvector",
        })
    }
}

impl FromStr for RangeMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "binary" | "binary-search" => Ok(RangeMode::BinarySearch),
            "bitvector" => Ok(RangeMode::Bitvector),
            _ => Err(format!("unknown range mode '{s}' (expected 'binary' or 'bitvector')")),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct OracleConfig {
    pub stretch: Stretch,
    pub range_mode: RangeMode,
    /// Pieces with at most this many members are not split further.
    pub leaf_max: usize,
    pub root_override: Option<VertexId>,
}

impl OracleConfig {
    pub fn with_eps(eps: Epsilon) -> Self {
        OracleConfig { stretch: Stretch::Eps(eps), ..Default::default() }
    }

    pub fn three_stretch() -> Self {
        OracleConfig { stretch: Stretch::Three, ..Default::default() }
    }
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            stretch: Stretch::Eps(Epsilon::new(1, 2).expect("1/2 is a valid epsilon")),
            range_mode: RangeMode::BinarySearch,
            leaf_max: 1,
            root_override: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("label {0} is carried by no vertex")]
    LabelAbsent(Label),
    #[error("vertex {0} does not exist")]
    InvalidVertex(VertexId),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Work counters of one query.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct QueryStats {
    pub pieces_visited: u32,
    pub portals_examined: u32,
    pub search_steps: u32,
    pub rmq_calls: u32,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct QueryResult {
    pub d: u64,
    pub witness: VertexId,
    pub stats: QueryStats,
}

/// Component sizes of a built oracle.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct SpaceReport {
    pub vertex_portals: usize,
    pub label_entries: usize,
    pub contributors: usize,
    pub rmq_cells: usize,
    pub bitvector_words: usize,
    pub leaf_table_cells: usize,
    pub pieces: usize,
    pub depth: u32,
}

impl SpaceReport {
    /// Vertex-table portals plus label-index entries.
    pub fn total_entries(&self) -> usize {
        self.vertex_portals + self.label_entries
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Oracle {
    graph: PlanarGraph,
    spt: Spt,
    rho: u32,
    rgd: Rgd,
    tables: VertexPortalTable,
    index: LabelIndex,
    label_counts: Vec<u32>,
    config: OracleConfig,
}

fn count_labels(g: &PlanarGraph) -> Vec<u32> {
    let mut counts = vec![0u32; g.num_labels() as usize];
    for &l in g.labels() {
        counts[l.index()] += 1;
    }
    counts
}

impl Oracle {
    /// center → shortest-path tree → triangulation → decomposition →
    /// vertex portal tables → label index.
    pub fn build(g: &PlanarGraph, config: OracleConfig) -> Result<Self, OracleError> {
        if let Stretch::Eps(e) = config.stretch {
            if !e.is_below_one() {
                return Err(OracleError::Config(format!("epsilon {e} must be below 1 (use the 3-stretch mode for 2)")));
            }
        }
        if config.leaf_max == 0 {
            return Err(OracleError::Config("leaf_max must be at least 1".into()));
        }
        let root = match config.root_override {
            Some(r) if r.index() >= g.n() => return Err(OracleError::InvalidVertex(r)),
            Some(r) => r,
            None => find_center(g).0,
        };
        let (_, spt) = sssp(g, root);
        let rho = spt.levels;
        let rgd = build_rgd(&triangulate(g), &spt, config.leaf_max)?;
        let tables = build_vertex_tables(g, &rgd, config.stretch.epsilon());
        let index = build_label_index(&tables, &rgd, g.labels(), g.num_labels());
        Ok(Oracle { label_counts: count_labels(g), graph: g.clone(), spt, rho, rgd, tables, index, config })
    }

    pub fn graph(&self) -> &PlanarGraph {
        &self.graph
    }

    pub fn spt(&self) -> &Spt {
        &self.spt
    }

    pub fn root(&self) -> VertexId {
        self.spt.root
    }

    /// Hop levels of the shortest-path tree.
    pub fn rho(&self) -> u32 {
        self.rho
    }

    pub fn rgd(&self) -> &Rgd {
        &self.rgd
    }

    pub fn tables(&self) -> &VertexPortalTable {
        &self.tables
    }

    pub fn label_index(&self) -> &LabelIndex {
        &self.index
    }

    pub fn config(&self) -> &OracleConfig {
        &self.config
    }

    pub fn label_count(&self, label: Label) -> u32 {
        self.label_counts.get(label.index()).copied().unwrap_or(0)
    }

    /// Labels carried by at least one vertex.
    pub fn present_labels(&self) -> impl Iterator<Item = Label> + '_ {
        (0..self.label_counts.len() as u32).map(Label).filter(|&l| self.label_count(l) > 0)
    }

    /// `2 · (depth + 1) · max portals per path`: the most portals of `u`
    /// a single query can examine.
    pub fn portal_work_bound(&self) -> u64 {
        2 * (u64::from(self.rgd.depth()) + 1) * self.config.stretch.epsilon().max_portals_per_path()
    }

    pub fn query(&self, u: VertexId, label: Label) -> Result<QueryResult, OracleError> {
        self.query_with_mode(u, label, self.config.range_mode)
    }

    /// Approximate nearest `label` vertex of `u`.
    pub fn nearest_labeled(&self, u: VertexId, label: Label) -> Result<(u64, VertexId), OracleError> {
        self.query(u, label).map(|r| (r.d, r.witness))
    }

    pub fn query_with_mode(&self, u: VertexId, label: Label, mode: RangeMode) -> Result<QueryResult, OracleError> {
        if u.index() >= self.graph.n() {
            return Err(OracleError::InvalidVertex(u));
        }
        if self.label_count(label) == 0 {
            return Err(OracleError::LabelAbsent(label));
        }
        let mut stats = QueryStats::default();
        if self.graph.label(u) == label {
            return Ok(QueryResult { d: 0, witness: u, stats });
        }
        let mut best: Option<(u64, VertexId)> = None;
        let mut offer = |d: u64, w: VertexId| {
            if best.is_none_or(|b| (d, w) < b) {
                best = Some((d, w));
            }
        };
        for pp in self.tables.of(u) {
            let Some(pair) = self.index.get(label, pp.piece) else { continue };
            stats.pieces_visited += 1;
            for sel in PathSel::BOTH {
                let lpi = &pair[sel.index()];
                let portals = pp.path(sel);
                stats.portals_examined += portals.len() as u32;
                if lpi.is_empty() {
                    continue;
                }
                let last = lpi.len() - 1;
                for zu in portals {
                    let split = lpi.locate_split(zu.h, zu.position as usize, mode);
                    stats.search_steps += split.steps;
                    if split.plus_start <= last {
                        let i = lpi.rmq_plus().query(split.plus_start, last).expect("range inside entries");
                        let e = &lpi.entries()[i];
                        offer(zu.d + (e.h - zu.h) + e.d_min, e.witness);
                        stats.rmq_calls += 1;
                    }
                    if split.minus_end > 0 {
                        let i = lpi.rmq_minus().query(0, split.minus_end - 1).expect("range inside entries");
                        let e = &lpi.entries()[i];
                        offer(zu.d + (zu.h - e.h) + e.d_min, e.witness);
                        stats.rmq_calls += 1;
                    }
                }
            }
        }
        if self.rgd.leaf_max() > 1 {
            if let Some(t) = &self.rgd.piece(self.rgd.deepest_piece(u)).leaf_table {
                if let Some((d, w)) = t.lookup(u, label) {
                    offer(d, w);
                }
            }
        }
        let (d, witness) = best.expect("a present label is reachable through some separator or the leaf table");
        Ok(QueryResult { d, witness, stats })
    }

    /// Moves `v` to `label`. Returns the number of (piece, path) label
    /// structures rewritten.
    pub fn change_label(&mut self, v: VertexId, label: Label) -> Result<usize, OracleError> {
        if v.index() >= self.graph.n() {
            return Err(OracleError::InvalidVertex(v));
        }
        if label.0 >= self.graph.num_labels() {
            return Err(OracleError::Graph(GraphError::InvalidLabel {
                vertex: v,
                label,
                num_labels: self.graph.num_labels(),
            }));
        }
        let from = self.graph.label(v);
        if from == label {
            return Ok(0);
        }
        let portals = self.tables.of(v);
        let mut touched = self.index.remove_vertex(v, from, portals);
        touched += self.index.insert_vertex(&self.rgd, v, label, portals);
        self.graph.set_label(v, label);
        self.label_counts[from.index()] -= 1;
        self.label_counts[label.index()] += 1;
        let leaf = self.rgd.deepest_piece(v);
        if let Some(t) = &mut self.rgd.piece_mut(leaf).leaf_table {
            t.refresh_labels(self.graph.labels());
        }
        Ok(touched)
    }

    pub fn stats(&self) -> SpaceReport {
        SpaceReport {
            vertex_portals: self.tables.total_portals(),
            label_entries: self.index.total_entries(),
            contributors: self.index.total_contributors(),
            rmq_cells: self.index.rmq_cells(),
            bitvector_words: self.index.bitvector_words(),
            leaf_table_cells: self
                .rgd
                .pieces()
                .iter()
                .filter_map(|p| p.leaf_table.as_ref())
                .map(|t| t.distances().len())
                .sum(),
            pieces: self.rgd.pieces().len(),
            depth: self.rgd.depth(),
        }
    }

    /// Test fixture: zeroes the `d_min` of one label-index entry whose node
    /// does not carry that label, so some query underestimates. Returns the
    /// `(vertex, label)` pair that now answers 0.
    #[doc(hidden)]
    pub fn corrupt_one_entry(&mut self) -> Option<(VertexId, Label)> {
        let labels = self.graph.labels().to_vec();
        let (label, piece, sel, pos) = self.index.sorted_pairs().into_iter().find_map(|(l, p, pair)| {
            PathSel::BOTH.into_iter().find_map(|sel| {
                pair[sel.index()]
                    .entries()
                    .iter()
                    .position(|e| e.d_min > 0 && labels[e.z.index()] != l)
                    .map(|i| (l, p, sel, i))
            })
        })?;
        let lpi = self.index.entry_mut(label, piece, sel)?;
        let z = lpi.entries()[pos].z;
        lpi.corrupt_d_min(pos, 0);
        Some((z, label))
    }

    /// Pieces visited by a query from `u`: those with a separator on the
    /// root chain of `u`'s deepest piece.
    pub fn separator_ancestors(&self, u: VertexId) -> Vec<PieceId> {
        self.tables.of(u).iter().map(|pp| pp.piece).collect()
    }
}

#[cfg(test)]
mod tests;
