use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Edge, EdgeId, Label, PlanarGraph, VertexId, MAX_EDGE_LENGTH};

/// Inclusive range of real edge lengths.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WeightRange {
    pub min: u32,
    pub max: u32,
}

impl WeightRange {
    pub fn new(min: u32, max: u32) -> Self {
        assert!(min <= max && u64::from(max) <= MAX_EDGE_LENGTH, "invalid weight range {min}..={max}");
        WeightRange { min, max }
    }
}

/// A `rows x cols` grid. Vertex `(r, c)` has id `r * cols + c`; lengths and
/// labels are drawn uniformly and reproducibly from `seed`.
pub fn gen_grid(rows: usize, cols: usize, weights: WeightRange, num_labels: u32, seed: u64) -> PlanarGraph {
    assert!(rows >= 1 && cols >= 1 && rows * cols >= 2, "grid must have at least two vertices");
    assert!(num_labels >= 1, "need at least one label");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rows * cols;
    let id = |r: usize, c: usize| VertexId((r * cols + c) as u32);

    let labels: Vec<Label> = (0..n).map(|_| Label(rng.gen_range(0..num_labels))).collect();
    let mut edges = Vec::new();
    // right[v] / up[v]: edge to (r, c+1) / (r+1, c)
    let mut right = vec![None; n];
    let mut up = vec![None; n];
    for r in 0..rows {
        for c in 0..cols {
            let v = id(r, c);
            if c + 1 < cols {
                right[v.index()] = Some(EdgeId(edges.len() as u32));
                edges.push(Edge::real(v, id(r, c + 1), rng.gen_range(weights.min..=weights.max)));
            }
            if r + 1 < rows {
                up[v.index()] = Some(EdgeId(edges.len() as u32));
                edges.push(Edge::real(v, id(r + 1, c), rng.gen_range(weights.min..=weights.max)));
            }
        }
    }
    let mut rotation = vec![Vec::with_capacity(4); n];
    for r in 0..rows {
        for c in 0..cols {
            let v = id(r, c).index();
            let rot = &mut rotation[v];
            // counterclockwise: east, north, west, south
            rot.extend(right[v]);
            rot.extend(up[v]);
            if c > 0 {
                rot.extend(right[id(r, c - 1).index()]);
            }
            if r > 0 {
                rot.extend(up[id(r - 1, c).index()]);
            }
        }
    }
    PlanarGraph::from_parts_unchecked(labels, num_labels, edges, rotation)
}

/// A connected planar graph obtained from a grid with at least `n` vertices
/// by deleting a random `1 - density` fraction of its edges (deletions that
/// would disconnect the graph are skipped).
pub fn gen_planar(n: usize, density: f64, weights: WeightRange, num_labels: u32, seed: u64) -> PlanarGraph {
    assert!(density > 0.0 && density <= 1.0, "density must lie in (0, 1]");
    let n = n.max(4);
    let rows = (n as f64).sqrt().ceil() as usize;
    let cols = n.div_ceil(rows);
    let grid = gen_grid(rows, cols, weights, num_labels, seed);

    let m = grid.m();
    let target = ((1.0 - density) * m as f64).floor() as usize;
    if target == 0 {
        return grid;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut rng);

    let mut alive = vec![true; m];
    let mut deleted = 0;
    for e in order {
        if deleted == target {
            break;
        }
        alive[e] = false;
        if connected_with(&grid, &alive) {
            deleted += 1;
        } else {
            alive[e] = true;
        }
    }

    let mut new_id = vec![None; m];
    let mut edges = Vec::with_capacity(m - deleted);
    for (i, e) in grid.edges().iter().enumerate() {
        if alive[i] {
            new_id[i] = Some(EdgeId(edges.len() as u32));
            edges.push(*e);
        }
    }
    let rotation =
        grid.vertices().map(|v| grid.rotation(v).iter().filter_map(|e| new_id[e.index()]).collect()).collect();
    PlanarGraph::from_parts_unchecked(grid.labels().to_vec(), num_labels, edges, rotation)
}

fn connected_with(g: &PlanarGraph, alive: &[bool]) -> bool {
    let mut seen = vec![false; g.n()];
    let mut queue = VecDeque::from([VertexId(0)]);
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = queue.pop_front() {
        for &e in g.rotation(v) {
            if !alive[e.index()] {
                continue;
            }
            let w = g.edge(e).other(v);
            if !seen[w.index()] {
                seen[w.index()] = true;
                count += 1;
                queue.push_back(w);
            }
        }
    }
    count == g.n()
}
