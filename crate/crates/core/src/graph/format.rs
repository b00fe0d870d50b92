//! `PLGRAPH 1` text format.
//!
//! ```text
//! PLGRAPH 1
//! <n> <m> <L>
//! V <vertex-id> <label-id>          (n lines)
//! E <edge-id> <u> <v> <length|INF>  (m lines, INF marks artificial edges)
//! R <vertex-id> <edge-id>*          (n lines, counterclockwise rotation)
//! ```
//!
//! `#` starts a comment; blank lines are ignored.

use std::fmt::Write as _;

use super::{Edge, EdgeId, EdgeLength, GraphError, Label, PlanarGraph, VertexId, MAX_EDGE_LENGTH};

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next_tokens(&mut self) -> Result<(usize, Vec<&'a str>), GraphError> {
        for (i, raw) in self.inner.by_ref() {
            let content = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = content.split_whitespace().collect();
            self.last = i + 1;
            if !tokens.is_empty() {
                return Ok((i + 1, tokens));
            }
        }
        Err(malformed(self.last + 1, "unexpected end of input"))
    }
}

fn malformed(line: usize, msg: impl Into<String>) -> GraphError {
    GraphError::MalformedLine { line, msg: msg.into() }
}

fn number<T: std::str::FromStr>(line: usize, tok: &str, what: &str) -> Result<T, GraphError> {
    tok.parse().map_err(|_| malformed(line, format!("bad {what} '{tok}'")))
}

/// Parses and validates a graph.
pub fn parse_graph(text: &str) -> Result<PlanarGraph, GraphError> {
    let mut lines = Lines { inner: text.lines().enumerate(), last: 0 };

    let (ln, head) = lines.next_tokens()?;
    if head != ["PLGRAPH", "1"] {
        return Err(malformed(ln, "expected header 'PLGRAPH 1'"));
    }
    let (ln, counts) = lines.next_tokens()?;
    if counts.len() != 3 {
        return Err(malformed(ln, "expected '<n> <m> <L>'"));
    }
    let n: usize = number(ln, counts[0], "vertex count")?;
    let m: usize = number(ln, counts[1], "edge count")?;
    let num_labels: u32 = number(ln, counts[2], "label count")?;
    if n == 0 {
        return Err(malformed(ln, "graph must have at least one vertex"));
    }

    let mut labels: Vec<Option<Label>> = vec![None; n];
    for _ in 0..n {
        let (ln, t) = lines.next_tokens()?;
        if t.len() != 3 || t[0] != "V" {
            return Err(malformed(ln, "expected 'V <vertex-id> <label-id>'"));
        }
        let v: usize = number(ln, t[1], "vertex id")?;
        let l: u32 = number(ln, t[2], "label id")?;
        let slot = labels.get_mut(v).ok_or_else(|| malformed(ln, format!("vertex id {v} out of range")))?;
        if slot.replace(Label(l)).is_some() {
            return Err(malformed(ln, format!("vertex {v} declared twice")));
        }
    }

    let mut edges: Vec<Option<Edge>> = vec![None; m];
    for _ in 0..m {
        let (ln, t) = lines.next_tokens()?;
        if t.len() != 5 || t[0] != "E" {
            return Err(malformed(ln, "expected 'E <edge-id> <u> <v> <length|INF>'"));
        }
        let id: usize = number(ln, t[1], "edge id")?;
        let u: u32 = number(ln, t[2], "endpoint")?;
        let v: u32 = number(ln, t[3], "endpoint")?;
        if u as usize >= n || v as usize >= n {
            return Err(malformed(ln, "endpoint out of range"));
        }
        let length = if t[4] == "INF" {
            EdgeLength::Infinite
        } else {
            let w: u64 = number(ln, t[4], "length")?;
            if w > MAX_EDGE_LENGTH {
                return Err(malformed(ln, format!("length {w} exceeds 2^31")));
            }
            EdgeLength::Finite(w as u32)
        };
        let slot = edges.get_mut(id).ok_or_else(|| malformed(ln, format!("edge id {id} out of range")))?;
        if slot.replace(Edge { u: VertexId(u), v: VertexId(v), length }).is_some() {
            return Err(malformed(ln, format!("edge {id} declared twice")));
        }
    }

    let mut rotation: Vec<Option<Vec<EdgeId>>> = vec![None; n];
    for _ in 0..n {
        let (ln, t) = lines.next_tokens()?;
        if t.len() < 2 || t[0] != "R" {
            return Err(malformed(ln, "expected 'R <vertex-id> <edge-id>*'"));
        }
        let v: usize = number(ln, t[1], "vertex id")?;
        let rot =
            t[2..].iter().map(|tok| number::<u32>(ln, tok, "edge id").map(EdgeId)).collect::<Result<Vec<_>, _>>()?;
        let slot = rotation.get_mut(v).ok_or_else(|| malformed(ln, format!("vertex id {v} out of range")))?;
        if slot.replace(rot).is_some() {
            return Err(malformed(ln, format!("rotation for vertex {v} given twice")));
        }
    }
    if let Ok((ln, _)) = lines.next_tokens() {
        return Err(malformed(ln, "trailing content"));
    }

    // Every slot is filled: n distinct in-range ids were read for n slots.
    let labels = labels.into_iter().map(Option::unwrap).collect();
    let edges = edges.into_iter().map(Option::unwrap).collect();
    let rotation = rotation.into_iter().map(Option::unwrap).collect();
    PlanarGraph::new(labels, num_labels, edges, rotation)
}

/// Writes the canonical text form of `g`.
pub fn serialize_graph(g: &PlanarGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "PLGRAPH 1");
    let _ = writeln!(out, "{} {} {}", g.n(), g.m(), g.num_labels());
    for v in g.vertices() {
        let _ = writeln!(out, "V {} {}", v, g.label(v));
    }
    for (i, e) in g.edges().iter().enumerate() {
        match e.length {
            EdgeLength::Finite(w) => {
                let _ = writeln!(out, "E {} {} {} {}", i, e.u, e.v, w);
            }
            EdgeLength::Infinite => {
                let _ = writeln!(out, "E {} {} {} INF", i, e.u, e.v);
            }
        }
    }
    for v in g.vertices() {
        out.push_str("R ");
        out.push_str(&v.to_string());
        for e in g.rotation(v) {
            let _ = write!(out, " {e}");
        }
        out.push('\n');
    }
    out
}
