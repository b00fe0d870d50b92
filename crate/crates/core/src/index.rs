//! Per-label portal indexes: for every label, a hash map from piece to the
//! two path indexes holding the deduplicated portals of that label's
//! vertices, with range-minimum support over `d_min ± h` and a rank
//! bitvector over path positions.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::decomposition::{PathSel, PieceId, Rgd};
use crate::graph::{Label, VertexId};
use crate::portals::{PiecePortals, Portal, VertexPortalTable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IndexError {
    #[error("bad range [{i}, {j}] for length {len}")]
    BadRange { i: usize, j: usize, len: usize },
    #[error("bad index {i} for length {len}")]
    BadIndex { i: usize, len: usize },
}

/// Sparse table of interval argmins; O(k log k) cells, O(1) query.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseTableRmq {
    keys: Vec<i64>,
    /// `levels[k][i]` = argmin of `keys[i .. i + 2^(k+1)]`
    levels: Vec<Vec<u32>>,
}

impl SparseTableRmq {
    pub fn new(keys: Vec<i64>) -> Self {
        let mut levels: Vec<Vec<u32>> = Vec::new();
        let mut width = 1usize;
        while 2 * width <= keys.len() {
            let level: Vec<u32> = (0..=keys.len() - 2 * width)
                .map(|i| {
                    let (a, b) = match levels.last() {
                        None => (i as u32, (i + 1) as u32),
                        Some(prev) => (prev[i], prev[i + width]),
                    };
                    pick(&keys, a, b)
                })
                .collect();
            levels.push(level);
            width *= 2;
        }
        SparseTableRmq { keys, levels }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[i64] {
        &self.keys
    }

    /// Index of the minimum key in `[i, j]`, smallest index on ties.
    pub fn query(&self, i: usize, j: usize) -> Result<usize, IndexError> {
        if i > j || j >= self.keys.len() {
            return Err(IndexError::BadRange { i, j, len: self.keys.len() });
        }
        let span = j - i + 1;
        if span == 1 {
            return Ok(i);
        }
        let k = (usize::BITS - 1 - span.leading_zeros()) as usize;
        let level = &self.levels[k - 1];
        Ok(pick(&self.keys, level[i], level[j + 1 - (1 << k)]) as usize)
    }

    /// Stored argmin cells.
    pub fn cells(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }
}

#[inline]
fn pick(keys: &[i64], a: u32, b: u32) -> u32 {
    let (ka, kb) = (keys[a as usize], keys[b as usize]);
    if kb < ka || (kb == ka && b < a) {
        b
    } else {
        a
    }
}

/// Bit array with per-word prefix popcounts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RankBitvector {
    len: usize,
    words: Vec<u64>,
    /// `prefix[w]` = set bits in words `[0, w)`
    prefix: Vec<u32>,
}

impl RankBitvector {
    pub fn from_positions(len: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut words = vec![0u64; len.div_ceil(64)];
        for i in ones {
            assert!(i < len, "bit {i} outside length {len}");
            words[i / 64] |= 1 << (i % 64);
        }
        let mut prefix = Vec::with_capacity(words.len() + 1);
        let mut acc = 0u32;
        prefix.push(0);
        for w in &words {
            acc += w.count_ones();
            prefix.push(acc);
        }
        RankBitvector { len, words, prefix }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        *self.prefix.last().unwrap_or(&0) as usize
    }

    /// Set bits strictly before `i`.
    #[inline]
    pub fn rank(&self, i: usize) -> Result<usize, IndexError> {
        if i > self.len {
            return Err(IndexError::BadIndex { i, len: self.len });
        }
        let (w, b) = (i / 64, i % 64);
        let below = if b == 0 { 0 } else { (self.words[w] & ((1u64 << b) - 1)).count_ones() };
        Ok(self.prefix[w] as usize + below as usize)
    }

    pub fn num_words(&self) -> usize {
        self.words.len()
    }
}

/// One deduplicated portal node of one label on one path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelEntry {
    pub position: u32,
    pub z: VertexId,
    pub h: u64,
    pub d_min: u64,
    pub witness: VertexId,
    /// Sorted `(d, vertex)`; the first element is `(d_min, witness)`.
    pub contributors: Vec<(u64, VertexId)>,
}

impl LabelEntry {
    fn refresh(&mut self) {
        let (d, w) = self.contributors[0];
        self.d_min = d;
        self.witness = w;
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub enum RangeMode {
    #[default]
    BinarySearch,
    Bitvector,
}

/// `C⁺ = entries[plus_start..]`, `C⁻ = entries[..minus_end]`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Split {
    pub plus_start: usize,
    pub minus_end: usize,
    /// Comparisons (binary search) or equal-h adjustments (bitvector).
    pub steps: u32,
}

/// Portals of one label on one separator path, sorted by `(h, position)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelPathIndex {
    piece: PieceId,
    path: PathSel,
    path_len: u32,
    entries: Vec<LabelEntry>,
    rmq_plus: SparseTableRmq,
    rmq_minus: SparseTableRmq,
    omega: RankBitvector,
}

impl LabelPathIndex {
    pub(crate) fn new(piece: PieceId, path: PathSel, path_len: u32, mut entries: Vec<LabelEntry>) -> Self {
        entries.sort_by_key(|e| (e.h, e.position));
        let mut out = LabelPathIndex {
            piece,
            path,
            path_len,
            entries,
            rmq_plus: SparseTableRmq::default(),
            rmq_minus: SparseTableRmq::default(),
            omega: RankBitvector::default(),
        };
        out.rebuild();
        out
    }

    /// Recomputes both RMQ structures and ω from `entries`.
    pub(crate) fn rebuild(&mut self) {
        let key = |d: u64, h: u64, sign: i64| d as i64 + sign * h as i64;
        self.rmq_plus = SparseTableRmq::new(self.entries.iter().map(|e| key(e.d_min, e.h, 1)).collect());
        self.rmq_minus = SparseTableRmq::new(self.entries.iter().map(|e| key(e.d_min, e.h, -1)).collect());
        self.omega =
            RankBitvector::from_positions(self.path_len as usize, self.entries.iter().map(|e| e.position as usize));
    }

    pub fn piece(&self) -> PieceId {
        self.piece
    }

    pub fn path(&self) -> PathSel {
        self.path
    }

    pub fn path_len(&self) -> u32 {
        self.path_len
    }

    pub fn entries(&self) -> &[LabelEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn rmq_plus(&self) -> &SparseTableRmq {
        &self.rmq_plus
    }

    pub fn rmq_minus(&self) -> &SparseTableRmq {
        &self.rmq_minus
    }

    pub fn omega(&self) -> &RankBitvector {
        &self.omega
    }

    fn slot(&self, p: &Portal) -> Result<usize, usize> {
        self.entries.binary_search_by_key(&(p.h, p.position), |e| (e.h, e.position))
    }

    /// Adds `(p.d, v)`; RMQ and ω are left stale until `rebuild`.
    pub(crate) fn insert(&mut self, p: &Portal, v: VertexId) {
        match self.slot(p) {
            Ok(i) => {
                let c = &mut self.entries[i].contributors;
                let at = c.binary_search(&(p.d, v)).unwrap_or_else(|x| x);
                c.insert(at, (p.d, v));
                self.entries[i].refresh();
            }
            Err(i) => self.entries.insert(
                i,
                LabelEntry {
                    position: p.position,
                    z: p.z,
                    h: p.h,
                    d_min: p.d,
                    witness: v,
                    contributors: vec![(p.d, v)],
                },
            ),
        }
    }

    /// Removes one `(p.d, v)`; RMQ and ω are left stale until `rebuild`.
    pub(crate) fn remove(&mut self, p: &Portal, v: VertexId) {
        let i = self.slot(p).expect("removed portal has an entry");
        let c = &mut self.entries[i].contributors;
        let at = c.binary_search(&(p.d, v)).expect("removed contributor is present");
        c.remove(at);
        if c.is_empty() {
            self.entries.remove(i);
        } else {
            self.entries[i].refresh();
        }
    }

    /// Overwrites a stored minimum, breaking the contributor invariant.
    pub(crate) fn corrupt_d_min(&mut self, i: usize, d: u64) {
        self.entries[i].d_min = d;
        self.rebuild();
    }

    /// Splits entries around the portal of `u` at path position `pos_u`
    /// with root distance `h_u`. Entries with `h == h_u` fall in both ranges.
    pub fn locate_split(&self, h_u: u64, pos_u: usize, mode: RangeMode) -> Split {
        match mode {
            RangeMode::BinarySearch => {
                let mut steps = 0u32;
                let mut lower_bound = |pred: &dyn Fn(u64) -> bool| {
                    let (mut lo, mut hi) = (0usize, self.entries.len());
                    while lo < hi {
                        steps += 1;
                        let mid = (lo + hi) / 2;
                        if pred(self.entries[mid].h) {
                            lo = mid + 1;
                        } else {
                            hi = mid;
                        }
                    }
                    lo
                };
                let plus_start = lower_bound(&|h| h < h_u);
                let minus_end = lower_bound(&|h| h <= h_u);
                Split { plus_start, minus_end, steps }
            }
            RangeMode::Bitvector => {
                // h is non-decreasing along the path, so entry order is
                // position order and rank maps positions to entry indexes.
                let mut steps = 0u32;
                let mut plus_start = self.omega.rank(pos_u).expect("position on path");
                while plus_start > 0 && self.entries[plus_start - 1].h == h_u {
                    plus_start -= 1;
                    steps += 1;
                }
                let mut minus_end = self.omega.rank(pos_u + 1).expect("position on path");
                while minus_end < self.entries.len() && self.entries[minus_end].h == h_u {
                    minus_end += 1;
                    steps += 1;
                }
                Split { plus_start, minus_end, steps }
            }
        }
    }
}

/// Both paths of one piece for one label.
pub type PiecePair = [LabelPathIndex; 2];

/// Per label, a hash map from piece to its two path indexes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelIndex {
    per_label: Vec<HashMap<PieceId, PiecePair>>,
}

impl LabelIndex {
    pub(crate) fn from_parts(per_label: Vec<HashMap<PieceId, PiecePair>>) -> Self {
        LabelIndex { per_label }
    }

    pub fn num_labels(&self) -> usize {
        self.per_label.len()
    }

    pub fn pieces(&self, label: Label) -> &HashMap<PieceId, PiecePair> {
        &self.per_label[label.index()]
    }

    #[inline]
    pub fn get(&self, label: Label, piece: PieceId) -> Option<&PiecePair> {
        self.per_label.get(label.index())?.get(&piece)
    }

    /// `(label, piece, pair)` in a fixed order.
    pub fn sorted_pairs(&self) -> Vec<(Label, PieceId, &PiecePair)> {
        let mut out = Vec::new();
        for (l, map) in self.per_label.iter().enumerate() {
            let mut keys: Vec<&PieceId> = map.keys().collect();
            keys.sort();
            out.extend(keys.into_iter().map(|p| (Label(l as u32), *p, &map[p])));
        }
        out
    }

    fn all_paths(&self) -> impl Iterator<Item = &LabelPathIndex> {
        self.per_label.iter().flat_map(|m| m.values()).flat_map(|pair| pair.iter())
    }

    pub fn total_entries(&self) -> usize {
        self.all_paths().map(LabelPathIndex::len).sum()
    }

    pub fn total_contributors(&self) -> usize {
        self.all_paths().flat_map(|p| p.entries.iter()).map(|e| e.contributors.len()).sum()
    }

    pub fn rmq_cells(&self) -> usize {
        self.all_paths().map(|p| p.rmq_plus.cells() + p.rmq_minus.cells()).sum()
    }

    pub fn bitvector_words(&self) -> usize {
        self.all_paths().map(|p| p.omega.num_words()).sum()
    }

    pub(crate) fn entry_mut(&mut self, label: Label, piece: PieceId, sel: PathSel) -> Option<&mut LabelPathIndex> {
        self.per_label[label.index()].get_mut(&piece).map(|pair| &mut pair[sel.index()])
    }

    /// Withdraws `v`'s portals from `label`. Returns the number of
    /// (piece, path) structures changed.
    pub(crate) fn remove_vertex(&mut self, v: VertexId, label: Label, portals: &[PiecePortals]) -> usize {
        let map = &mut self.per_label[label.index()];
        let mut touched = 0;
        for pp in portals {
            let Some(pair) = map.get_mut(&pp.piece) else { continue };
            for sel in PathSel::BOTH {
                let list = pp.path(sel);
                if list.is_empty() {
                    continue;
                }
                let lpi = &mut pair[sel.index()];
                for p in list {
                    lpi.remove(p, v);
                }
                lpi.rebuild();
                touched += 1;
            }
            if pair.iter().all(LabelPathIndex::is_empty) {
                map.remove(&pp.piece);
            }
        }
        touched
    }

    /// Adds `v`'s portals under `label`. Returns the number of
    /// (piece, path) structures changed.
    pub(crate) fn insert_vertex(&mut self, rgd: &Rgd, v: VertexId, label: Label, portals: &[PiecePortals]) -> usize {
        let map = &mut self.per_label[label.index()];
        let mut touched = 0;
        for pp in portals {
            if pp.paths.iter().all(Vec::is_empty) {
                continue;
            }
            let pair = map.entry(pp.piece).or_insert_with(|| empty_pair(rgd, pp.piece));
            for sel in PathSel::BOTH {
                let list = pp.path(sel);
                if list.is_empty() {
                    continue;
                }
                let lpi = &mut pair[sel.index()];
                for p in list {
                    lpi.insert(p, v);
                }
                lpi.rebuild();
                touched += 1;
            }
        }
        touched
    }
}

fn path_len(rgd: &Rgd, piece: PieceId, sel: PathSel) -> u32 {
    let sep = rgd.piece(piece).separator.as_ref().expect("indexed piece has a separator");
    sep.path(sel).len() as u32
}

fn empty_pair(rgd: &Rgd, piece: PieceId) -> PiecePair {
    PathSel::BOTH.map(|sel| LabelPathIndex::new(piece, sel, path_len(rgd, piece, sel), Vec::new()))
}

/// Groups every vertex's portals by (label, piece, path, position),
/// keeping all contributors and exposing the minimum.
pub fn build_label_index(tables: &VertexPortalTable, rgd: &Rgd, labels: &[Label], num_labels: u32) -> LabelIndex {
    type Bucket = BTreeMap<(u64, u32), LabelEntry>;
    let mut grouped: Vec<BTreeMap<PieceId, [Bucket; 2]>> = vec![BTreeMap::new(); num_labels as usize];
    for (v, &label) in labels.iter().enumerate() {
        let v = VertexId(v as u32);
        for pp in tables.of(v) {
            if pp.paths.iter().all(Vec::is_empty) {
                continue;
            }
            let buckets = grouped[label.index()].entry(pp.piece).or_default();
            for sel in PathSel::BOTH {
                for p in pp.path(sel) {
                    buckets[sel.index()]
                        .entry((p.h, p.position))
                        .or_insert_with(|| LabelEntry {
                            position: p.position,
                            z: p.z,
                            h: p.h,
                            d_min: p.d,
                            witness: v,
                            contributors: Vec::new(),
                        })
                        .contributors
                        .push((p.d, v));
                }
            }
        }
    }
    let per_label = grouped
        .into_iter()
        .map(|pieces| {
            pieces
                .into_iter()
                .map(|(piece, buckets)| {
                    let pair = buckets.map(|b| b.into_values()).map(|it| {
                        it.map(|mut e| {
                            e.contributors.sort_unstable();
                            e.refresh();
                            e
                        })
                        .collect::<Vec<_>>()
                    });
                    let [a, b] = pair;
                    let pair = [
                        LabelPathIndex::new(piece, PathSel::A, path_len(rgd, piece, PathSel::A), a),
                        LabelPathIndex::new(piece, PathSel::B, path_len(rgd, piece, PathSel::B), b),
                    ];
                    (piece, pair)
                })
                .collect()
        })
        .collect();
    LabelIndex { per_label }
}
