//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p label-oracle --test acceptance -- --nocapture`
//! to see the report. Ground truth comes from a Dijkstra written here,
//! independent of the library's shortest-path code.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use label_oracle::decomposition::PathSel;
use label_oracle::graph::{
    gen_grid, gen_planar, parse_graph, serialize_graph, Label, PlanarGraph, VertexId, WeightRange,
};
use label_oracle::index::{RangeMode, RankBitvector, SparseTableRmq};
use label_oracle::oracle::{Oracle, OracleConfig, Stretch};
use label_oracle::portals::{select_portals, verify_distance_property};
use label_oracle::shortest_paths::DistanceMap;
use label_oracle::stretch::Epsilon;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WEIGHTS: (u32, u32) = (1, 100);
const LABEL_COUNTS: [u32; 3] = [2, 5, 10];
const EPS: [(u32, u32); 3] = [(1, 10), (1, 4), (1, 2)];

fn dijkstra(g: &PlanarGraph, s: VertexId) -> Vec<u64> {
    let mut adj: Vec<Vec<(usize, u64)>> = vec![Vec::new(); g.n()];
    for e in g.edges() {
        if let Some(len) = e.length.finite() {
            adj[e.u.index()].push((e.v.index(), len));
            adj[e.v.index()].push((e.u.index(), len));
        }
    }
    let mut dist = vec![u64::MAX; g.n()];
    let mut heap = BinaryHeap::from([Reverse((0u64, s.index()))]);
    dist[s.index()] = 0;
    while let Some(Reverse((d, v))) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(w, len) in &adj[v] {
            if d + len < dist[w] {
                dist[w] = d + len;
                heap.push(Reverse((d + len, w)));
            }
        }
    }
    dist
}

/// `exact[u][λ]` = δ(u, λ), `None` for absent labels.
fn exact_table(g: &PlanarGraph) -> Vec<Vec<Option<u64>>> {
    g.vertices()
        .map(|u| {
            let d = dijkstra(g, u);
            let mut best = vec![None; g.num_labels() as usize];
            for v in g.vertices() {
                let slot: &mut Option<u64> = &mut best[g.label(v).index()];
                *slot = Some(slot.map_or(d[v.index()], |b| b.min(d[v.index()])));
            }
            best
        })
        .collect()
}

fn depth_bound(n: usize) -> u32 {
    ((n as f64).ln() / 1.5f64.ln()).ceil() as u32 + 1
}

struct Case {
    name: String,
    graph: PlanarGraph,
    exact: Vec<Vec<Option<u64>>>,
}

fn corpus() -> Vec<Case> {
    let w = WeightRange::new(WEIGHTS.0, WEIGHTS.1);
    let mut out = Vec::new();
    for (i, &labels) in LABEL_COUNTS.iter().enumerate() {
        let seed = 100 + i as u64;
        for (name, graph) in [
            (format!("grid10x10 L={labels}"), gen_grid(10, 10, w, labels, seed)),
            (format!("grid16x16 L={labels}"), gen_grid(16, 16, w, labels, seed)),
            (format!("planar200 L={labels}"), gen_planar(200, 0.8, w, labels, seed)),
        ] {
            let exact = exact_table(&graph);
            out.push(Case { name, graph, exact });
        }
    }
    out
}

struct Report {
    failures: Vec<u32>,
}

impl Report {
    fn line(&mut self, id: u32, pass: bool, detail: String) {
        println!("criterion {id:>2}: {} : {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failures.push(id);
        }
    }
}

/// Every query answer against δ; returns (violations, worst d/δ, answers).
fn sweep(o: &Oracle, exact: &[Vec<Option<u64>>]) -> (usize, f64, Vec<Option<(u64, VertexId)>>) {
    let g = o.graph();
    let eps = o.config().stretch.epsilon();
    let (mut bad, mut worst) = (0usize, 1.0f64);
    let mut answers = Vec::new();
    for u in g.vertices() {
        for l in 0..g.num_labels() {
            let label = Label(l);
            let got = o.query(u, label).ok();
            answers.push(got.map(|r| (r.d, r.witness)));
            match (exact[u.index()][l as usize], got) {
                (None, None) => {}
                (Some(delta), Some(r)) => {
                    let witness_ok = g.label(r.witness) == label;
                    if r.d < delta || !eps.within(delta, r.d) || !witness_ok {
                        bad += 1;
                    }
                    if delta > 0 {
                        worst = worst.max(r.d as f64 / delta as f64);
                    }
                }
                _ => bad += 1,
            }
        }
    }
    (bad, worst, answers)
}

fn portal_lists_within_bound(o: &Oracle) -> (bool, usize) {
    let eps = o.config().stretch.epsilon();
    let mut longest = 0;
    let mut ok = true;
    for v in o.graph().vertices() {
        for pp in o.tables().of(v) {
            for l in &pp.paths {
                longest = longest.max(l.len());
                ok &= eps.within_portal_bound(l.len());
            }
        }
    }
    (ok, longest)
}

#[test]
fn acceptance() {
    let mut report = Report { failures: Vec::new() };
    let corpus = corpus();

    // 1, 3, 10 share the (1+ε) builds.
    let mut c1_bad = 0;
    let mut c1_worst = 1.0f64;
    let mut c1_queries = 0;
    let mut c3_ok = true;
    let mut c3_detail = Vec::new();
    let mut c10_ok = true;
    for case in &corpus {
        for &(p, q) in &EPS {
            let eps = Epsilon::new(p, q).unwrap();
            let o = Oracle::build(&case.graph, OracleConfig::with_eps(eps)).unwrap();
            let (bad, worst, answers) = sweep(&o, &case.exact);
            c1_bad += bad;
            c1_worst = c1_worst.max(worst);
            c1_queries += answers.len();
            if bad > 0 {
                println!("  {} eps={eps}: {bad} stretch violations", case.name);
            }
            let (ok3, longest) = portal_lists_within_bound(&o);
            c3_ok &= ok3;
            if case.name.starts_with("grid16x16 L=2") {
                c3_detail.push(format!("eps={eps} longest={longest} cap={}", eps.max_portals_per_path()));
            }

            let reloaded = Oracle::from_bytes(&o.to_bytes()).unwrap();
            let reparsed = parse_graph(&serialize_graph(&case.graph)).unwrap();
            let rebuilt = Oracle::build(&reparsed, OracleConfig::with_eps(eps)).unwrap();
            let (_, _, a2) = sweep(&reloaded, &case.exact);
            let (_, _, a3) = sweep(&rebuilt, &case.exact);
            c10_ok &= reparsed == case.graph && reloaded == o && a2 == answers && a3 == answers;
        }
    }
    report.line(
        1,
        c1_bad == 0,
        format!(
            "{c1_queries} queries over 27 builds, {c1_bad} outside [δ, (1+ε)δ], worst observed d/δ = {c1_worst:.4}"
        ),
    );

    // 2: 3-stretch mode.
    let mut c2_bad = 0;
    let mut c2_multi = 0;
    let mut c2_worst = 1.0f64;
    for case in &corpus {
        let o = Oracle::build(&case.graph, OracleConfig::three_stretch()).unwrap();
        let (bad, worst, _) = sweep(&o, &case.exact);
        c2_bad += bad;
        c2_worst = c2_worst.max(worst);
        for v in o.graph().vertices() {
            c2_multi += o.tables().of(v).iter().flat_map(|pp| pp.paths.iter()).filter(|l| l.len() != 1).count();
        }
        let (ok3, _) = portal_lists_within_bound(&o);
        c3_ok &= ok3;
    }
    report.line(
        2,
        c2_bad == 0 && c2_multi == 0,
        format!("{c2_bad} answers outside [δ, 3δ], {c2_multi} portal lists not of size 1, worst d/δ = {c2_worst:.4}"),
    );
    report.line(3, c3_ok, format!("every portal list < 4/(ε-ε²)+1 on all builds; 16x16: {}", c3_detail.join(", ")));

    // 4: distance property on fuzzed (vertex, path, ε) triples.
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut c4_bad = 0;
    let mut c4_done = 0;
    let fuzz_graphs: Vec<(PlanarGraph, Oracle)> = (0..10)
        .map(|i| {
            let g = gen_planar(rng.gen_range(30..160), rng.gen_range(0.6..1.0), WeightRange::new(1, 100), 3, 400 + i);
            let o = Oracle::build(&g, OracleConfig::default()).unwrap();
            (g, o)
        })
        .collect();
    while c4_done < 1000 {
        let (g, o) = &fuzz_graphs[rng.gen_range(0..fuzz_graphs.len())];
        let v = VertexId(rng.gen_range(0..g.n() as u32));
        let pieces = o.separator_ancestors(v);
        if pieces.is_empty() {
            continue;
        }
        let piece = pieces[rng.gen_range(0..pieces.len())];
        let sel = if rng.gen_bool(0.5) { PathSel::A } else { PathSel::B };
        let path = o.rgd().piece(piece).separator.as_ref().unwrap().path(sel);
        let qd = rng.gen_range(2..=40u32);
        let eps = Epsilon::new(rng.gen_range(1..qd), qd).unwrap();
        let dist = DistanceMap { source: v, dist: dijkstra(g, v) };
        let portals = select_portals(&dist, path, eps);
        let lib_ok = verify_distance_property(&dist, path, &portals, eps);
        // independent recheck with exact integer arithmetic
        let own_ok = (0..path.len()).all(|i| {
            let best = portals.iter().map(|z| z.d + z.h.abs_diff(path.h(i))).min().unwrap();
            let delta = u128::from(dist.dist[path.node(i).index()]);
            u128::from(eps.den()) * u128::from(best) <= u128::from(eps.den() + eps.num()) * delta
        });
        let bound_ok = eps.within_portal_bound(portals.len());
        if !(lib_ok && own_ok && bound_ok) {
            c4_bad += 1;
        }
        c4_done += 1;
    }
    report.line(4, c4_bad == 0, format!("{c4_done} fuzzed (vertex, path, ε) triples, {c4_bad} failures"));

    // 5: separator balance and depth.
    let mut c5_bad = Vec::new();
    let mut c5_depths = Vec::new();
    for case in corpus.iter().filter(|c| c.name.ends_with("L=2")) {
        let o = Oracle::build(&case.graph, OracleConfig::default()).unwrap();
        let rgd = o.rgd();
        let n = case.graph.n();
        if rgd.depth() > depth_bound(n) {
            c5_bad.push(format!("{} depth {} > {}", case.name, rgd.depth(), depth_bound(n)));
        }
        for piece in rgd.pieces() {
            if let Some(children) = piece.children {
                let cap = (2 * piece.members.len()).div_ceil(3);
                for c in children {
                    if rgd.piece(c).members.len() > cap {
                        c5_bad.push(format!("{} piece {} child {} too large", case.name, piece.id, c));
                    }
                }
            }
        }
        c5_depths.push(format!("{} depth {}/{}", case.name.split(' ').next().unwrap(), rgd.depth(), depth_bound(n)));
    }
    report.line(5, c5_bad.is_empty(), format!("{}; {} violations", c5_depths.join(", "), c5_bad.len()));

    // 6: range-mode equivalence, rank and RMQ against naive scans.
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut c6_mismatch = 0;
    let mode_oracles: Vec<Oracle> = corpus
        .iter()
        .filter(|c| c.name.ends_with("L=5"))
        .map(|c| Oracle::build(&c.graph, OracleConfig::with_eps(Epsilon::new(1, 4).unwrap())).unwrap())
        .collect();
    for _ in 0..10_000 {
        let o = &mode_oracles[rng.gen_range(0..mode_oracles.len())];
        let u = VertexId(rng.gen_range(0..o.graph().n() as u32));
        let l = Label(rng.gen_range(0..o.graph().num_labels()));
        let a = o.query_with_mode(u, l, RangeMode::BinarySearch).ok().map(|r| (r.d, r.witness));
        let b = o.query_with_mode(u, l, RangeMode::Bitvector).ok().map(|r| (r.d, r.witness));
        c6_mismatch += usize::from(a != b);
    }
    let mut rank_bad = 0;
    for _ in 0..10_000 {
        let len = rng.gen_range(0..300);
        let bits: Vec<bool> = (0..len).map(|_| rng.gen_bool(0.5)).collect();
        let bv = RankBitvector::from_positions(len, (0..len).filter(|&i| bits[i]));
        let i = rng.gen_range(0..=len);
        rank_bad += usize::from(bv.rank(i).unwrap() != bits[..i].iter().filter(|&&b| b).count());
    }
    let mut rmq_bad = 0;
    for _ in 0..1000 {
        let len = rng.gen_range(1..500);
        let keys: Vec<i64> = (0..len).map(|_| rng.gen_range(-50..50)).collect();
        let t = SparseTableRmq::new(keys.clone());
        for _ in 0..100 {
            let i = rng.gen_range(0..len);
            let j = rng.gen_range(i..len);
            let naive = (i..=j).min_by_key(|&k| (keys[k], k)).unwrap();
            rmq_bad += usize::from(t.query(i, j).unwrap() != naive);
        }
    }
    report.line(
        6,
        c6_mismatch == 0 && rank_bad == 0 && rmq_bad == 0,
        format!("10000 queries: {c6_mismatch} mode mismatches; 10000 rank checks: {rank_bad} wrong; 100000 RMQ ranges: {rmq_bad} wrong"),
    );

    // 7: label changes against fresh builds.
    let base = gen_grid(6, 6, WeightRange::new(1, 100), 4, 7);
    let cfg = OracleConfig::with_eps(Epsilon::new(1, 4).unwrap());
    let mut o = Oracle::build(&base, cfg).unwrap();
    let mut labels = base.labels().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut c7_diff, mut c7_touch_bad, mut c7_max_touch) = (0, 0, 0);
    let rotation: Vec<_> = base.vertices().map(|v| base.rotation(v).to_vec()).collect();
    for _ in 0..100 {
        let v = rng.gen_range(0..base.n());
        let to = Label(rng.gen_range(0..4));
        let touched = o.change_label(VertexId(v as u32), to).unwrap();
        c7_max_touch = c7_max_touch.max(touched);
        c7_touch_bad += usize::from(touched > 4 * (o.rgd().depth() as usize + 1));
        labels[v] = to;
        let g = PlanarGraph::new(labels.clone(), 4, base.edges().to_vec(), rotation.clone()).unwrap();
        let fresh = Oracle::build(&g, cfg).unwrap();
        for u in g.vertices() {
            for l in 0..4 {
                let a = o.query(u, Label(l)).ok().map(|r| (r.d, r.witness));
                let b = fresh.query(u, Label(l)).ok().map(|r| (r.d, r.witness));
                c7_diff += usize::from(a != b);
            }
        }
    }
    report.line(
        7,
        c7_diff == 0 && c7_touch_bad == 0,
        format!(
            "100 relabels: {c7_diff} answers differ from fresh builds; max touched {c7_max_touch} (cap {})",
            4 * (o.rgd().depth() + 1)
        ),
    );

    // 8 and 9: grid family at ε = 1/4.
    let eps = Epsilon::new(1, 4).unwrap();
    let cap = eps.max_portals_per_path();
    let mut c8_bad = 0;
    let mut means = Vec::new();
    let mut normalized = Vec::new();
    for side in [8usize, 16, 32] {
        let g = gen_grid(side, side, WeightRange::new(1, 100), 5, 80 + side as u64);
        let o = Oracle::build(&g, OracleConfig::with_eps(eps)).unwrap();
        let n = g.n();
        let bound = 2 * u64::from(depth_bound(n)) * cap;
        let mut total = 0u64;
        let mut count = 0u64;
        for u in g.vertices() {
            for l in o.present_labels() {
                let r = o.query(u, l).unwrap();
                let examined = u64::from(r.stats.portals_examined);
                c8_bad += usize::from(examined > bound);
                total += examined;
                count += 1;
            }
        }
        means.push((n, total as f64 / count as f64, bound));
        let entries = o.stats().total_entries() as f64;
        normalized.push((n, entries / (4.0 * n as f64 * (n as f64).log2())));
    }
    let ratios: Vec<String> = means.windows(2).map(|w| format!("{:.2}", w[1].1 / w[0].1)).collect();
    report.line(
        8,
        c8_bad == 0,
        format!(
            "{c8_bad} queries over the bound; mean portals examined {} (bounds {}); successive ratios {} (informational, want <= 2)",
            means.iter().map(|m| format!("n={}:{:.2}", m.0, m.1)).collect::<Vec<_>>().join(" "),
            means.iter().map(|m| m.2.to_string()).collect::<Vec<_>>().join("/"),
            ratios.join(", ")
        ),
    );
    let lo = normalized.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let hi = normalized.iter().map(|x| x.1).fold(0.0, f64::max);
    report.line(
        9,
        hi <= 3.0 * lo,
        format!(
            "entries/((1/ε)·n·log2 n): {}; spread {:.3} (cap 3)",
            normalized.iter().map(|x| format!("n={}:{:.4}", x.0, x.1)).collect::<Vec<_>>().join(" "),
            hi / lo
        ),
    );

    report.line(
        10,
        c10_ok,
        "PLGRAPH and oracle-file round trips preserve all answers on the criterion-1 builds".into(),
    );

    assert!(report.failures.is_empty(), "failed criteria: {:?}", report.failures);
}

#[test]
fn three_stretch_config_reports_eps_two() {
    assert_eq!(Stretch::Three.epsilon(), Epsilon::TWO);
    assert_eq!(Epsilon::TWO.max_portals_per_path(), 1);
}
