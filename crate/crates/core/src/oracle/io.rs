//! Binary oracle files.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic "LBLORCL\0" | version u32
//! section*  : tag u8 | byte length u64 | payload
//! crc32 u32 : over every preceding byte
//! ```
//!
//! Sections appear once each, in tag order: 1 header (config, root, ρ),
//! 2 graph, 3 shortest-path tree, 4 decomposition, 5 vertex portal tables,
//! 6 label index. Vectors are a u64 count followed by elements; optional
//! ids use `u32::MAX` for none. Hash maps are written in key order. RMQ
//! tables, rank bitvectors and per-label leaf minima are rebuilt on load.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use thiserror::Error;

use super::{count_labels, Oracle, OracleConfig, OracleError, Stretch};
use crate::decomposition::{LeafTable, PathSel, Piece, PieceId, Rgd, Separator, SeparatorPath};
use crate::graph::{Edge, EdgeId, EdgeLength, Label, PlanarGraph, VertexId};
use crate::index::{LabelEntry, LabelIndex, LabelPathIndex, PiecePair, RangeMode};
use crate::portals::{PiecePortals, Portal, VertexPortalTable};
use crate::shortest_paths::Spt;
use crate::stretch::Epsilon;

pub const MAGIC: &[u8; 8] = b"LBLORCL\0";
pub const FORMAT_VERSION: u32 = 1;

const NONE: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("not an oracle file (bad magic)")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),
    #[error("file truncated")]
    Truncated,
    #[error("checksum mismatch (stored {stored:08x}, computed {computed:08x})")]
    BadChecksum { stored: u32, computed: u32 },
    #[error("expected section {expected}, found {found}")]
    BadSection { expected: u8, found: u8 },
    #[error("invalid content: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> FormatError {
    FormatError::Invalid(msg.into())
}

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u8(&mut self, x: u8) {
        self.buf.push(x);
    }
    fn u32(&mut self, x: u32) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }
    fn u64(&mut self, x: u64) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }
    fn len(&mut self, n: usize) {
        self.u64(n as u64);
    }
    fn opt(&mut self, x: Option<u32>) {
        self.u32(x.unwrap_or(NONE));
    }
    fn section(&mut self, tag: u8, body: Writer) {
        self.u8(tag);
        self.len(body.buf.len());
        self.buf.extend_from_slice(&body.buf);
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8], FormatError> {
        let end = self.pos.checked_add(k).filter(|&e| e <= self.buf.len()).ok_or(FormatError::Truncated)?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    /// A count, bounded by the bytes left so corrupt counts cannot allocate.
    fn len(&mut self, min_elem: usize) -> Result<usize, FormatError> {
        let n = self.u64()?;
        let left = (self.buf.len() - self.pos) as u64;
        if n.saturating_mul(min_elem.max(1) as u64) > left {
            return Err(FormatError::Truncated);
        }
        Ok(n as usize)
    }
    fn opt(&mut self) -> Result<Option<u32>, FormatError> {
        let x = self.u32()?;
        Ok((x != NONE).then_some(x))
    }
    fn below(&mut self, bound: usize, what: &str) -> Result<u32, FormatError> {
        let x = self.u32()?;
        if (x as usize) < bound {
            Ok(x)
        } else {
            Err(invalid(format!("{what} {x} out of range (< {bound})")))
        }
    }
    fn vertex(&mut self, n: usize) -> Result<VertexId, FormatError> {
        self.below(n, "vertex").map(VertexId)
    }
    fn section(&mut self, tag: u8) -> Result<Reader<'a>, FormatError> {
        let found = self.u8()?;
        if found != tag {
            return Err(FormatError::BadSection { expected: tag, found });
        }
        let k = self.len(1)?;
        Ok(Reader { buf: self.take(k)?, pos: 0 })
    }
    fn finish(&self) -> Result<(), FormatError> {
        if self.pos == self.buf.len() {
            Ok(())
        } else {
            Err(invalid("trailing bytes in section"))
        }
    }
}

fn write_header(o: &Oracle) -> Writer {
    let mut w = Writer::default();
    match o.config.stretch {
        Stretch::Eps(e) => {
            w.u8(0);
            w.u32(e.num());
            w.u32(e.den());
        }
        Stretch::Three => {
            w.u8(1);
            w.u32(0);
            w.u32(0);
        }
    }
    w.u8(match o.config.range_mode {
        RangeMode::BinarySearch => 0,
        RangeMode::Bitvector => 1,
    });
    w.len(o.config.leaf_max);
    w.opt(o.config.root_override.map(|v| v.0));
    w.u32(o.spt.root.0);
    w.u32(o.rho);
    w
}

fn read_header(r: &mut Reader) -> Result<(OracleConfig, u32, u32), FormatError> {
    let tag = r.u8()?;
    let (p, q) = (r.u32()?, r.u32()?);
    let stretch = match tag {
        0 => Stretch::Eps(Epsilon::new(p, q).map_err(|e| invalid(e.to_string()))?),
        1 => Stretch::Three,
        t => return Err(invalid(format!("stretch tag {t}"))),
    };
    let range_mode = match r.u8()? {
        0 => RangeMode::BinarySearch,
        1 => RangeMode::Bitvector,
        t => return Err(invalid(format!("range mode tag {t}"))),
    };
    let leaf_max = r.u64()? as usize;
    if leaf_max == 0 {
        return Err(invalid("leaf_max 0"));
    }
    let root_override = r.opt()?.map(VertexId);
    let root = r.u32()?;
    let rho = r.u32()?;
    Ok((OracleConfig { stretch, range_mode, leaf_max, root_override }, root, rho))
}

fn write_graph(g: &PlanarGraph) -> Writer {
    let mut w = Writer::default();
    w.u32(g.num_labels());
    w.len(g.n());
    for &l in g.labels() {
        w.u32(l.0);
    }
    w.len(g.m());
    for e in g.edges() {
        w.u32(e.u.0);
        w.u32(e.v.0);
        match e.length {
            EdgeLength::Finite(x) => {
                w.u8(0);
                w.u32(x);
            }
            EdgeLength::Infinite => {
                w.u8(1);
                w.u32(0);
            }
        }
    }
    for v in g.vertices() {
        w.len(g.rotation(v).len());
        for e in g.rotation(v) {
            w.u32(e.0);
        }
    }
    w
}

fn read_graph(r: &mut Reader) -> Result<PlanarGraph, FormatError> {
    let num_labels = r.u32()?;
    let n = r.len(4)?;
    let labels = (0..n).map(|_| r.u32().map(Label)).collect::<Result<Vec<_>, _>>()?;
    let m = r.len(13)?;
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (u, v) = (r.vertex(n)?, r.vertex(n)?);
        let (tag, x) = (r.u8()?, r.u32()?);
        edges.push(match tag {
            0 => Edge::real(u, v, x),
            1 => Edge::artificial(u, v),
            t => return Err(invalid(format!("edge length tag {t}"))),
        });
    }
    let mut rotation = Vec::with_capacity(n);
    for _ in 0..n {
        let k = r.len(4)?;
        rotation.push((0..k).map(|_| r.below(m, "edge").map(EdgeId)).collect::<Result<Vec<_>, _>>()?);
    }
    PlanarGraph::new(labels, num_labels, edges, rotation).map_err(|e| invalid(format!("graph: {e}")))
}

fn write_spt(s: &Spt) -> Writer {
    let mut w = Writer::default();
    w.u32(s.root.0);
    w.u32(s.levels);
    w.len(s.h.len());
    for i in 0..s.h.len() {
        w.opt(s.parent[i].map(|v| v.0));
        w.opt(s.parent_edge[i].map(|e| e.0));
        w.u64(s.h[i]);
        w.u32(s.level[i]);
    }
    w
}

fn read_spt(r: &mut Reader, n: usize, m: usize) -> Result<Spt, FormatError> {
    let root = r.vertex(n)?;
    let levels = r.u32()?;
    if r.len(20)? != n {
        return Err(invalid("tree size differs from graph"));
    }
    let mut s = Spt {
        root,
        parent: Vec::with_capacity(n),
        parent_edge: Vec::with_capacity(n),
        h: Vec::with_capacity(n),
        level: Vec::with_capacity(n),
        levels,
    };
    for _ in 0..n {
        let p = r.opt()?;
        let e = r.opt()?;
        if p.is_some_and(|p| p as usize >= n) || e.is_some_and(|e| e as usize >= m) {
            return Err(invalid("tree parent out of range"));
        }
        s.parent.push(p.map(VertexId));
        s.parent_edge.push(e.map(EdgeId));
        s.h.push(r.u64()?);
        s.level.push(r.u32()?);
    }
    Ok(s)
}

fn write_vertices(w: &mut Writer, vs: &[VertexId]) {
    w.len(vs.len());
    for v in vs {
        w.u32(v.0);
    }
}

fn read_vertices(r: &mut Reader, n: usize) -> Result<Vec<VertexId>, FormatError> {
    let k = r.len(4)?;
    (0..k).map(|_| r.vertex(n)).collect()
}

fn write_rgd(rgd: &Rgd) -> Writer {
    let mut w = Writer::default();
    w.len(rgd.leaf_max());
    w.len(rgd.pieces().len());
    for p in rgd.pieces() {
        w.opt(p.parent.map(|x| x.0));
        w.u32(p.depth);
        write_vertices(&mut w, &p.members);
        match &p.separator {
            None => w.u8(0),
            Some(sep) => {
                w.u8(1);
                w.u32(sep.nontree_edge.0);
                for path in &sep.paths {
                    write_vertices(&mut w, path.nodes());
                    for &h in path.hs() {
                        w.u64(h);
                    }
                }
            }
        }
        match p.children {
            None => w.u8(0),
            Some([a, b]) => {
                w.u8(1);
                w.u32(a.0);
                w.u32(b.0);
            }
        }
        match &p.leaf_table {
            None => w.u8(0),
            Some(t) => {
                w.u8(1);
                write_vertices(&mut w, t.members());
                for &d in t.distances() {
                    w.u64(d);
                }
            }
        }
    }
    w
}

fn read_rgd(r: &mut Reader, g: &PlanarGraph) -> Result<Rgd, FormatError> {
    let n = g.n();
    let leaf_max = r.u64()? as usize;
    let k = r.len(10)?;
    let mut pieces = Vec::with_capacity(k);
    for id in 0..k {
        let parent = r.opt()?;
        if parent.is_some_and(|p| p as usize >= id) {
            return Err(invalid("piece parent must precede the piece"));
        }
        let depth = r.u32()?;
        let members = read_vertices(r, n)?;
        let separator = match r.u8()? {
            0 => None,
            1 => {
                // an edge of the triangulation, which is not stored
                let e = EdgeId(r.u32()?);
                let read_path = |r: &mut Reader| -> Result<SeparatorPath, FormatError> {
                    let nodes = read_vertices(r, n)?;
                    let h = (0..nodes.len()).map(|_| r.u64()).collect::<Result<Vec<_>, _>>()?;
                    Ok(SeparatorPath::from_parts(nodes, h))
                };
                let a = read_path(r)?;
                let b = read_path(r)?;
                Some(Separator::from_paths(e, a, b))
            }
            t => return Err(invalid(format!("separator tag {t}"))),
        };
        let children = match r.u8()? {
            0 => None,
            1 => Some([PieceId(r.below(k, "piece")?), PieceId(r.below(k, "piece")?)]),
            t => return Err(invalid(format!("children tag {t}"))),
        };
        let leaf_table = match r.u8()? {
            0 => None,
            1 => {
                let mem = read_vertices(r, n)?;
                let cells = mem.len().checked_mul(mem.len()).ok_or(FormatError::Truncated)?;
                let dist = (0..cells).map(|_| r.u64()).collect::<Result<Vec<_>, _>>()?;
                Some(LeafTable::from_parts(mem, dist, g.labels()))
            }
            t => return Err(invalid(format!("leaf table tag {t}"))),
        };
        pieces.push(Piece {
            id: PieceId(id as u32),
            parent: parent.map(PieceId),
            depth,
            members,
            separator,
            children,
            leaf_table,
        });
    }
    if pieces.is_empty() {
        return Err(invalid("decomposition has no pieces"));
    }
    Ok(Rgd::from_parts(pieces, leaf_max, n))
}

fn write_portal_list(w: &mut Writer, list: &[Portal]) {
    w.len(list.len());
    for p in list {
        w.u32(p.position);
        w.u32(p.z.0);
        w.u64(p.d);
        w.u64(p.h);
    }
}

fn path_len(rgd: &Rgd, piece: PieceId, sel: PathSel) -> Result<usize, FormatError> {
    rgd.piece(piece)
        .separator
        .as_ref()
        .map(|s| s.path(sel).len())
        .ok_or_else(|| invalid(format!("piece {piece} has no separator")))
}

fn read_portal_list(r: &mut Reader, n: usize, len: usize) -> Result<Vec<Portal>, FormatError> {
    let k = r.len(24)?;
    (0..k)
        .map(|_| Ok(Portal { position: r.below(len, "path position")?, z: r.vertex(n)?, d: r.u64()?, h: r.u64()? }))
        .collect()
}

fn write_tables(t: &VertexPortalTable) -> Writer {
    let mut w = Writer::default();
    w.len(t.num_vertices());
    for v in 0..t.num_vertices() {
        let list = t.of(VertexId(v as u32));
        w.len(list.len());
        for pp in list {
            w.u32(pp.piece.0);
            for path in &pp.paths {
                write_portal_list(&mut w, path);
            }
        }
    }
    w
}

fn read_tables(r: &mut Reader, n: usize, rgd: &Rgd) -> Result<VertexPortalTable, FormatError> {
    if r.len(8)? != n {
        return Err(invalid("portal table size differs from graph"));
    }
    let mut per_vertex = Vec::with_capacity(n);
    for _ in 0..n {
        let k = r.len(20)?;
        let mut list = Vec::with_capacity(k);
        for _ in 0..k {
            let piece = PieceId(r.below(rgd.pieces().len(), "piece")?);
            let a = read_portal_list(r, n, path_len(rgd, piece, PathSel::A)?)?;
            let b = read_portal_list(r, n, path_len(rgd, piece, PathSel::B)?)?;
            list.push(PiecePortals { piece, paths: [a, b] });
        }
        per_vertex.push(list);
    }
    Ok(VertexPortalTable::from_parts(per_vertex))
}

fn write_index(idx: &LabelIndex) -> Writer {
    let mut w = Writer::default();
    w.len(idx.num_labels());
    let pairs = idx.sorted_pairs();
    for l in 0..idx.num_labels() {
        let mine: Vec<_> = pairs.iter().filter(|(label, _, _)| label.index() == l).collect();
        w.len(mine.len());
        for (_, piece, pair) in mine {
            w.u32(piece.0);
            for lpi in pair.iter() {
                w.len(lpi.len());
                for e in lpi.entries() {
                    w.u32(e.position);
                    w.u32(e.z.0);
                    w.u64(e.h);
                    w.u64(e.d_min);
                    w.u32(e.witness.0);
                    w.len(e.contributors.len());
                    for &(d, v) in &e.contributors {
                        w.u64(d);
                        w.u32(v.0);
                    }
                }
            }
        }
    }
    w
}

fn read_index(r: &mut Reader, n: usize, num_labels: u32, rgd: &Rgd) -> Result<LabelIndex, FormatError> {
    if r.len(8)? != num_labels as usize {
        return Err(invalid("label count differs from graph"));
    }
    let mut per_label = Vec::with_capacity(num_labels as usize);
    for _ in 0..num_labels {
        let k = r.len(20)?;
        let mut map: HashMap<PieceId, PiecePair> = HashMap::with_capacity(k);
        for _ in 0..k {
            let piece = PieceId(r.below(rgd.pieces().len(), "piece")?);
            let read_path = |r: &mut Reader, sel: PathSel| -> Result<LabelPathIndex, FormatError> {
                let len = path_len(rgd, piece, sel)?;
                let count = r.len(40)?;
                let mut entries = Vec::with_capacity(count);
                for _ in 0..count {
                    let position = r.below(len, "path position")?;
                    let z = r.vertex(n)?;
                    let h = r.u64()?;
                    let d_min = r.u64()?;
                    let witness = r.vertex(n)?;
                    let c = r.len(12)?;
                    let contributors = (0..c).map(|_| Ok((r.u64()?, r.vertex(n)?))).collect::<Result<Vec<_>, _>>()?;
                    if contributors.is_empty() {
                        return Err(invalid("label entry without contributors"));
                    }
                    entries.push(LabelEntry { position, z, h, d_min, witness, contributors });
                }
                Ok(LabelPathIndex::new(piece, sel, len as u32, entries))
            };
            let a = read_path(r, PathSel::A)?;
            let b = read_path(r, PathSel::B)?;
            if map.insert(piece, [a, b]).is_some() {
                return Err(invalid(format!("piece {piece} listed twice")));
            }
        }
        per_label.push(map);
    }
    Ok(LabelIndex::from_parts(per_label))
}

impl Oracle {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::default();
        w.buf.extend_from_slice(MAGIC);
        w.u32(FORMAT_VERSION);
        w.section(1, write_header(self));
        w.section(2, write_graph(&self.graph));
        w.section(3, write_spt(&self.spt));
        w.section(4, write_rgd(&self.rgd));
        w.section(5, write_tables(&self.tables));
        w.section(6, write_index(&self.index));
        let crc = crc32fast::hash(&w.buf);
        w.u32(crc);
        w.buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FormatError> {
        if bytes.len() < MAGIC.len() + 8 {
            return Err(if bytes.starts_with(MAGIC) || MAGIC.starts_with(bytes) {
                FormatError::Truncated
            } else {
                FormatError::BadMagic
            });
        }
        if &bytes[..MAGIC.len()] != MAGIC {
            return Err(FormatError::BadMagic);
        }
        let (body, tail) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(tail.try_into().expect("4 bytes"));
        let mut r = Reader { buf: body, pos: MAGIC.len() };
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(FormatError::UnsupportedVersion(version));
        }
        let computed = crc32fast::hash(body);
        if stored != computed {
            return Err(FormatError::BadChecksum { stored, computed });
        }

        let mut s = r.section(1)?;
        let (config, root, rho) = read_header(&mut s)?;
        s.finish()?;
        let mut s = r.section(2)?;
        let graph = read_graph(&mut s)?;
        s.finish()?;
        let (n, m) = (graph.n(), graph.m());
        if root as usize >= n || config.root_override.is_some_and(|v| v.index() >= n) {
            return Err(invalid("root out of range"));
        }
        let mut s = r.section(3)?;
        let spt = read_spt(&mut s, n, m)?;
        s.finish()?;
        if spt.root.0 != root || spt.levels != rho {
            return Err(invalid("header disagrees with tree"));
        }
        let mut s = r.section(4)?;
        let rgd = read_rgd(&mut s, &graph)?;
        s.finish()?;
        let mut s = r.section(5)?;
        let tables = read_tables(&mut s, n, &rgd)?;
        s.finish()?;
        let mut s = r.section(6)?;
        let index = read_index(&mut s, n, graph.num_labels(), &rgd)?;
        s.finish()?;
        r.finish()?;

        Ok(Oracle { label_counts: count_labels(&graph), graph, spt, rho, rgd, tables, index, config })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), OracleError> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, OracleError> {
        let bytes = fs::read(path)?;
        Ok(Oracle::from_bytes(&bytes)?)
    }
}
