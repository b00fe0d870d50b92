use std::cmp::Reverse;
use std::collections::BinaryHeap;

use label_oracle::graph::{gen_planar, Label, PlanarGraph, VertexId, WeightRange};
use label_oracle::index::RangeMode;
use label_oracle::oracle::{Oracle, OracleConfig, Stretch};
use label_oracle::stretch::Epsilon;
use proptest::prelude::*;

fn dijkstra(g: &PlanarGraph, s: VertexId) -> Vec<u64> {
    let mut dist = vec![u64::MAX; g.n()];
    let mut heap = BinaryHeap::from([Reverse((0u64, s))]);
    dist[s.index()] = 0;
    while let Some(Reverse((d, v))) = heap.pop() {
        if d > dist[v.index()] {
            continue;
        }
        for &e in g.rotation(v) {
            let edge = g.edge(e);
            let Some(len) = edge.length.finite() else { continue };
            let w = edge.other(v);
            if d + len < dist[w.index()] {
                dist[w.index()] = d + len;
                heap.push(Reverse((d + len, w)));
            }
        }
    }
    dist
}

fn stretch_strategy() -> impl Strategy<Value = Stretch> {
    prop_oneof![
        4 => (1u32..30, 2u32..31)
            .prop_filter("eps below one", |(p, q)| p < q)
            .prop_map(|(p, q)| Stretch::Eps(Epsilon::new(p, q).unwrap())),
        1 => Just(Stretch::Three),
    ]
}

fn relabeled(g: &PlanarGraph, labels: Vec<Label>) -> PlanarGraph {
    PlanarGraph::new(labels, g.num_labels(), g.edges().to_vec(), g.vertices().map(|v| g.rotation(v).to_vec()).collect())
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn answers_are_sound_bounded_and_mode_independent(
        n in 1usize..90,
        density in 0.5f64..1.0,
        labels in 1u32..6,
        seed in any::<u64>(),
        stretch in stretch_strategy(),
        leaf_max in 1usize..6,
        root in proptest::option::of(any::<u32>()),
    ) {
        let g = gen_planar(n, density, WeightRange::new(0, 60), labels, seed);
        let root_override = root.map(|r| VertexId(r % g.n() as u32));
        let cfg = OracleConfig { stretch, leaf_max, root_override, range_mode: RangeMode::BinarySearch };
        let o = Oracle::build(&g, cfg).unwrap();
        let eps = stretch.epsilon();
        for u in g.vertices() {
            let dist = dijkstra(&g, u);
            for l in 0..labels {
                let label = Label(l);
                let delta = g.vertices().filter(|&v| g.label(v) == label).map(|v| dist[v.index()]).min();
                let got = o.query(u, label);
                let Some(delta) = delta else {
                    prop_assert!(got.is_err());
                    continue;
                };
                let r = got.unwrap();
                prop_assert!(r.d >= delta);
                prop_assert!(eps.within(delta, r.d), "d={} δ={} ε={}", r.d, delta, eps);
                prop_assert_eq!(g.label(r.witness), label);
                prop_assert!(dist[r.witness.index()] <= r.d);
                prop_assert!(u64::from(r.stats.portals_examined) <= o.portal_work_bound());
                let b = o.query_with_mode(u, label, RangeMode::Bitvector).unwrap();
                prop_assert_eq!((b.d, b.witness), (r.d, r.witness));
                prop_assert_eq!(o.nearest_labeled(u, label).unwrap(), (r.d, r.witness));
            }
        }
        let s = o.stats();
        prop_assert!(s.label_entries <= s.vertex_portals);
        prop_assert_eq!(s.contributors, s.vertex_portals);
        prop_assert_eq!(Oracle::from_bytes(&o.to_bytes()).unwrap(), o);
    }

    #[test]
    fn relabel_sequences_equal_fresh_builds(
        n in 4usize..40,
        seed in any::<u64>(),
        moves in prop::collection::vec((any::<u32>(), 0u32..3), 1..12),
        leaf_max in 1usize..4,
    ) {
        let g = gen_planar(n, 0.8, WeightRange::new(1, 30), 3, seed);
        let cfg = OracleConfig { leaf_max, ..OracleConfig::with_eps(Epsilon::new(1, 3).unwrap()) };
        let mut o = Oracle::build(&g, cfg).unwrap();
        let mut labels = g.labels().to_vec();
        for (v, l) in moves {
            let v = VertexId(v % g.n() as u32);
            let touched = o.change_label(v, Label(l)).unwrap();
            prop_assert!(touched <= 4 * (o.rgd().depth() as usize + 1));
            labels[v.index()] = Label(l);
        }
        let fresh = Oracle::build(&relabeled(&g, labels), cfg).unwrap();
        prop_assert_eq!(o.to_bytes(), fresh.to_bytes());
    }
}
