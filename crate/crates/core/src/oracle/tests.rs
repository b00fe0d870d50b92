use super::*;
use crate::graph::{gen_grid, gen_planar, Edge, EdgeId, WeightRange};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// All-pairs distances over real edges, independent of the library's Dijkstra.
fn floyd_warshall(g: &PlanarGraph) -> Vec<Vec<u64>> {
    let n = g.n();
    let inf = u64::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for e in g.edges() {
        if let Some(len) = e.length.finite() {
            let (u, v) = (e.u.index(), e.v.index());
            d[u][v] = d[u][v].min(len);
            d[v][u] = d[v][u].min(len);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

fn exact(all: &[Vec<u64>], g: &PlanarGraph, u: usize, label: Label) -> Option<u64> {
    (0..g.n()).filter(|&v| g.label(VertexId(v as u32)) == label).map(|v| all[u][v]).min()
}

/// Every (u, λ) answer lies in `[δ, (1+ε)δ]` (or `[δ, 3δ]`) and the
/// witness carries λ at distance at most `d`.
fn sweep(o: &Oracle, all: &[Vec<u64>]) {
    let g = o.graph();
    let eps = o.config().stretch.epsilon();
    for u in 0..g.n() {
        for l in 0..g.num_labels() {
            let label = Label(l);
            let Some(delta) = exact(all, g, u, label) else {
                assert!(matches!(o.query(VertexId(u as u32), label), Err(OracleError::LabelAbsent(_))));
                continue;
            };
            let r = o.query(VertexId(u as u32), label).unwrap();
            assert!(r.d >= delta, "u={u} λ={l}: {} < δ={delta}", r.d);
            assert!(eps.within(delta, r.d), "u={u} λ={l}: {} > (1+{eps})·{delta}", r.d);
            assert_eq!(g.label(r.witness), label);
            assert!(all[u][r.witness.index()] <= r.d);
            assert!(u64::from(r.stats.portals_examined) <= o.portal_work_bound());
            let b = o.query_with_mode(VertexId(u as u32), label, RangeMode::Bitvector).unwrap();
            assert_eq!((b.d, b.witness), (r.d, r.witness));
        }
    }
}

fn answers(o: &Oracle) -> Vec<Option<(u64, VertexId)>> {
    let g = o.graph();
    let mut out = Vec::new();
    for u in g.vertices() {
        for l in 0..g.num_labels() {
            out.push(o.query(u, Label(l)).ok().map(|r| (r.d, r.witness)));
        }
    }
    out
}

fn eps(p: u32, q: u32) -> Epsilon {
    Epsilon::new(p, q).unwrap()
}

#[test]
fn single_vertex_graph() {
    let g = PlanarGraph::new(vec![Label(0)], 2, vec![], vec![vec![]]).unwrap();
    let o = Oracle::build(&g, OracleConfig::default()).unwrap();
    let r = o.query(VertexId(0), Label(0)).unwrap();
    assert_eq!((r.d, r.witness), (0, VertexId(0)));
    assert!(matches!(o.query(VertexId(0), Label(1)), Err(OracleError::LabelAbsent(Label(1)))));
    assert!(matches!(o.query(VertexId(1), Label(0)), Err(OracleError::InvalidVertex(_))));
    let s = o.stats();
    assert_eq!((s.vertex_portals, s.label_entries, s.rmq_cells, s.bitvector_words), (0, 0, 0, 0));
}

#[test]
fn two_vertex_unit_edge_is_exact() {
    let g = PlanarGraph::new(
        vec![Label(0), Label(1)],
        2,
        vec![Edge::real(VertexId(0), VertexId(1), 1)],
        vec![vec![EdgeId(0)], vec![EdgeId(0)]],
    )
    .unwrap();
    for cfg in [OracleConfig::with_eps(eps(1, 2)), OracleConfig::three_stretch()] {
        let o = Oracle::build(&g, cfg).unwrap();
        assert_eq!(o.query(VertexId(0), Label(1)).unwrap().d, 1);
        assert_eq!(o.query(VertexId(1), Label(0)).unwrap().d, 1);
    }
}

#[test]
fn eight_by_eight_grid_sweep() {
    let g = gen_grid(8, 8, WeightRange::new(1, 100), 5, 21);
    let all = floyd_warshall(&g);
    let o = Oracle::build(&g, OracleConfig::with_eps(eps(1, 2))).unwrap();
    sweep(&o, &all);
}

#[test]
fn sparse_planar_sweeps_across_eps_and_leaf_sizes() {
    for (seed, leaf_max, e) in [(1u64, 1usize, eps(1, 10)), (2, 4, eps(1, 4)), (3, 9, eps(3, 4))] {
        let g = gen_planar(70, 0.7, WeightRange::new(1, 100), 4, seed);
        let all = floyd_warshall(&g);
        let o = Oracle::build(&g, OracleConfig { leaf_max, ..OracleConfig::with_eps(e) }).unwrap();
        sweep(&o, &all);
    }
}

#[test]
fn three_stretch_mode() {
    let g = gen_grid(7, 6, WeightRange::new(1, 100), 3, 5);
    let all = floyd_warshall(&g);
    let o = Oracle::build(&g, OracleConfig::three_stretch()).unwrap();
    for u in g.vertices() {
        for pp in o.tables().of(u) {
            assert!(pp.paths.iter().all(|p| p.len() == 1));
        }
    }
    sweep(&o, &all);
}

#[test]
fn root_override_and_config_errors() {
    let g = gen_grid(4, 4, WeightRange::new(1, 9), 2, 2);
    let o = Oracle::build(&g, OracleConfig { root_override: Some(VertexId(0)), ..Default::default() }).unwrap();
    assert_eq!(o.root(), VertexId(0));
    sweep(&o, &floyd_warshall(&g));
    let bad = OracleConfig { root_override: Some(VertexId(16)), ..Default::default() };
    assert!(matches!(Oracle::build(&g, bad), Err(OracleError::InvalidVertex(_))));
    let bad = OracleConfig { leaf_max: 0, ..Default::default() };
    assert!(matches!(Oracle::build(&g, bad), Err(OracleError::Config(_))));
    assert!(matches!(Oracle::build(&g, OracleConfig::with_eps(eps(1, 1))), Err(OracleError::Config(_))));
}

#[test]
fn relabels_match_fresh_builds() {
    let g = gen_grid(6, 6, WeightRange::new(1, 100), 4, 9);
    for leaf_max in [1, 5] {
        let cfg = OracleConfig { leaf_max, ..OracleConfig::with_eps(eps(1, 4)) };
        let mut o = Oracle::build(&g, cfg).unwrap();
        let mut labels = g.labels().to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(leaf_max as u64);
        for _ in 0..25 {
            let v = rng.gen_range(0..g.n());
            let to = Label(rng.gen_range(0..4));
            let touched = o.change_label(VertexId(v as u32), to).unwrap();
            assert!(touched <= 4 * (o.rgd().depth() as usize + 1));
            labels[v] = to;
            let fresh_g = PlanarGraph::new(
                labels.clone(),
                4,
                g.edges().to_vec(),
                g.vertices().map(|v| g.rotation(v).to_vec()).collect(),
            )
            .unwrap();
            let fresh = Oracle::build(&fresh_g, cfg).unwrap();
            assert_eq!(answers(&o), answers(&fresh));
            assert_eq!(o.label_index(), fresh.label_index());
            assert_eq!(o.to_bytes(), fresh.to_bytes());
        }
    }
}

#[test]
fn relabel_identity_and_emptying_a_label() {
    let labels: Vec<Label> = (0..9).map(|i| Label(u32::from(i == 4))).collect();
    let base = gen_grid(3, 3, WeightRange::new(1, 10), 2, 1);
    let g = PlanarGraph::new(
        labels,
        2,
        base.edges().to_vec(),
        base.vertices().map(|v| base.rotation(v).to_vec()).collect(),
    )
    .unwrap();
    let mut o = Oracle::build(&g, OracleConfig::default()).unwrap();
    let before = o.clone();
    assert_eq!(o.change_label(VertexId(4), Label(1)).unwrap(), 0);
    assert_eq!(o, before);
    o.change_label(VertexId(4), Label(0)).unwrap();
    assert!(o.label_index().pieces(Label(1)).is_empty());
    assert!(matches!(o.query(VertexId(0), Label(1)), Err(OracleError::LabelAbsent(_))));
    assert!(o.change_label(VertexId(4), Label(2)).is_err());
}

#[test]
fn serialization_round_trip_and_determinism() {
    let g = gen_planar(50, 0.8, WeightRange::new(1, 100), 3, 8);
    let cfg = OracleConfig { range_mode: RangeMode::Bitvector, leaf_max: 3, ..OracleConfig::with_eps(eps(1, 3)) };
    let o = Oracle::build(&g, cfg).unwrap();
    let bytes = o.to_bytes();
    assert_eq!(bytes, Oracle::build(&g, cfg).unwrap().to_bytes());
    let back = Oracle::from_bytes(&bytes).unwrap();
    assert_eq!(back, o);
    assert_eq!(answers(&back), answers(&o));
    let three = Oracle::build(&g, OracleConfig::three_stretch()).unwrap();
    assert_eq!(Oracle::from_bytes(&three.to_bytes()).unwrap(), three);
}

#[test]
fn damaged_files_are_rejected() {
    let g = gen_grid(3, 4, WeightRange::new(1, 9), 2, 4);
    let bytes = Oracle::build(&g, OracleConfig::default()).unwrap().to_bytes();
    let mut flipped = bytes.clone();
    flipped[40] ^= 1;
    assert!(matches!(Oracle::from_bytes(&flipped), Err(FormatError::BadChecksum { .. })));
    assert!(Oracle::from_bytes(&bytes[..bytes.len() - 9]).is_err());
    assert_eq!(Oracle::from_bytes(b"PLGRAPH v1\n0 0\n"), Err(FormatError::BadMagic));
    let mut versioned = bytes.clone();
    versioned[8] = 9;
    assert_eq!(Oracle::from_bytes(&versioned), Err(FormatError::UnsupportedVersion(9)));
}

#[test]
fn corrupted_entry_is_caught_by_a_sweep() {
    let g = gen_grid(5, 5, WeightRange::new(1, 50), 3, 6);
    let all = floyd_warshall(&g);
    let mut o = Oracle::build(&g, OracleConfig::default()).unwrap();
    let (z, label) = o.corrupt_one_entry().unwrap();
    let reloaded = Oracle::from_bytes(&o.to_bytes()).unwrap();
    let d = reloaded.query(z, label).unwrap().d;
    assert!(d < exact(&all, &g, z.index(), label).unwrap());
}
