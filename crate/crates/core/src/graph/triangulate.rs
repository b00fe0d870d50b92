use std::collections::HashSet;

use super::{Edge, EdgeId, Faces, PlanarGraph, VertexId};

/// Adds artificial chords until every face is bounded by exactly three
/// edges. Existing edges keep their ids and relative rotation order; new
/// edges are appended.
///
/// Each face walk is cut ear by ear. A chord that would parallel an
/// existing edge is avoided when another ear is available; otherwise the
/// parallel artificial edge is added (edges are identified by id, so this
/// is still a valid embedding).
pub fn triangulate(g: &PlanarGraph) -> PlanarGraph {
    if g.n() < 3 {
        return g.clone();
    }
    let faces = Faces::compute(g);
    let mut edges: Vec<Edge> = g.edges().to_vec();
    let mut rotation: Vec<Vec<EdgeId>> = g.vertices().map(|v| g.rotation(v).to_vec()).collect();
    let mut adjacent: HashSet<(VertexId, VertexId)> = edges.iter().map(|e| (e.u.min(e.v), e.u.max(e.v))).collect();

    for boundary in faces.boundaries() {
        // (tail, edge, head) of each dart, in walk order
        let mut walk: Vec<(VertexId, EdgeId, VertexId)> =
            boundary.iter().map(|&d| (d.tail(g), d.edge(), d.head(g))).collect();
        while walk.len() > 3 {
            let k = walk.len();
            let ear = |i: usize| {
                let a = walk[(i + k - 1) % k].0;
                let b = walk[i].2;
                (a, b)
            };
            let pick = (0..k)
                .find(|&i| {
                    let (a, b) = ear(i);
                    a != b && !adjacent.contains(&(a.min(b), a.max(b)))
                })
                .or_else(|| (0..k).find(|&i| ear(i).0 != ear(i).1))
                .expect("a face walk longer than three with a loop-free graph always has an ear");

            // Ear at corner `pick`: darts a -> x -> b become the chord a -> b.
            let prev = (pick + k - 1) % k;
            let (a, e_in_a) = (walk[prev].0, walk[(prev + k - 1) % k].1);
            let (b, e_in_b) = (walk[pick].2, walk[pick].1);
            let chord = EdgeId(edges.len() as u32);
            edges.push(Edge::artificial(a, b));
            adjacent.insert((a.min(b), a.max(b)));
            insert_after(&mut rotation[a.index()], e_in_a, chord);
            insert_after(&mut rotation[b.index()], e_in_b, chord);

            walk[prev] = (a, chord, b);
            walk.remove(pick);
        }
    }

    let labels = g.labels().to_vec();
    let out = PlanarGraph::from_parts_unchecked(labels, g.num_labels(), edges, rotation);
    debug_assert!(Faces::compute(&out).boundaries().iter().all(|b| b.len() == 3));
    out
}

fn insert_after(rot: &mut Vec<EdgeId>, after: EdgeId, new: EdgeId) {
    let pos = rot.iter().position(|&e| e == after).expect("corner edge present in rotation");
    rot.insert(pos + 1, new);
}
