use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::time::Instant;

use label_oracle::graph::{
    gen_grid, gen_planar, parse_graph, serialize_graph, GraphError, Label, PlanarGraph, VertexId, WeightRange,
};
use label_oracle::index::RangeMode;
use label_oracle::oracle::{FormatError, Oracle, OracleConfig, OracleError, Stretch};
use label_oracle::shortest_paths::exact_label_distances_from;
use label_oracle::stretch::Epsilon;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::{BenchArgs, BuildArgs, GenArgs, QueryArgs, RelabelArgs, StatsArgs, VerifyArgs};

pub const BENCH_HEADER: &str = "n,m,labels,eps,rho,mode,queries,max_stretch,mean_stretch,mean_portals,entries,ms";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    BadFlags(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {source}")]
    Graph { path: String, source: GraphError },
    #[error("{path}: {source}")]
    Format { path: String, source: FormatError },
    #[error("{0}")]
    Query(OracleError),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("{0}")]
    Other(OracleError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::BadFlags(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Graph { .. } | CliError::Format { .. } => 4,
            CliError::Query(_) => 5,
            CliError::Verification(_) => 6,
            CliError::Other(_) => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

fn read_graph(path: &Path) -> Result<PlanarGraph, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_graph(&text).map_err(|source| CliError::Graph { path: path.display().to_string(), source })
}

fn load_oracle(path: &Path) -> Result<Oracle, CliError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    Oracle::from_bytes(&bytes).map_err(|source| CliError::Format { path: path.display().to_string(), source })
}

fn save_oracle(o: &Oracle, path: &Path) -> Result<(), CliError> {
    fs::write(path, o.to_bytes()).map_err(io_err(path))
}

fn weights((min, max): (u32, u32)) -> Result<WeightRange, CliError> {
    if max as u64 >= label_oracle::graph::MAX_EDGE_LENGTH {
        return Err(CliError::BadFlags(format!("maximum weight {max} too large")));
    }
    Ok(WeightRange::new(min, max))
}

fn generate(
    rows: usize,
    cols: usize,
    labels: u32,
    seed: u64,
    w: WeightRange,
    density: f64,
) -> Result<PlanarGraph, CliError> {
    if rows == 0 || cols == 0 {
        return Err(CliError::BadFlags("rows and cols must be positive".into()));
    }
    if labels == 0 {
        return Err(CliError::BadFlags("at least one label is required".into()));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(CliError::BadFlags(format!("density {density} outside (0, 1]")));
    }
    Ok(if density == 1.0 {
        gen_grid(rows, cols, w, labels, seed)
    } else {
        gen_planar(rows * cols, density, w, labels, seed)
    })
}

pub fn gen(a: GenArgs) -> Result<(), CliError> {
    let g = generate(a.rows, a.cols, a.labels, a.seed, weights(a.weights)?, a.density)?;
    let text = serialize_graph(&g);
    match &a.out {
        Some(path) => fs::write(path, text).map_err(io_err(path)),
        None => io::stdout().write_all(text.as_bytes()).map_err(io_err(Path::new("<stdout>"))),
    }
}

pub fn build(a: BuildArgs) -> Result<(), CliError> {
    let stretch = match a.stretch.eps {
        Some(e) if !e.is_below_one() => {
            return Err(CliError::BadFlags(format!("--eps {e} must be below 1; use --three-stretch for 3")))
        }
        Some(e) => Stretch::Eps(e),
        None => Stretch::Three,
    };
    if a.leaf_max == 0 {
        return Err(CliError::BadFlags("--leaf-max must be at least 1".into()));
    }
    let g = read_graph(&a.graph)?;
    let config =
        OracleConfig { stretch, range_mode: a.range_mode, leaf_max: a.leaf_max, root_override: a.root.map(VertexId) };
    let start = Instant::now();
    let o = Oracle::build(&g, config).map_err(|e| match e {
        OracleError::InvalidVertex(_) | OracleError::Config(_) => CliError::BadFlags(e.to_string()),
        e => CliError::Other(e),
    })?;
    let ms = start.elapsed().as_millis();
    save_oracle(&o, &a.out)?;
    let s = o.stats();
    println!(
        "built n={} m={} labels={} eps={} root={} rho={} depth={} entries={} ms={}",
        g.n(),
        g.m(),
        g.num_labels(),
        stretch,
        o.root(),
        o.rho(),
        s.depth,
        s.total_entries(),
        ms
    );
    Ok(())
}

pub fn query(a: QueryArgs) -> Result<(), CliError> {
    let o = load_oracle(&a.oracle)?;
    let mode = a.range_mode.unwrap_or(o.config().range_mode);
    let r = o.query_with_mode(VertexId(a.vertex), Label(a.label), mode).map_err(CliError::Query)?;
    println!("{} {}", r.d, r.witness);
    Ok(())
}

pub fn relabel(a: RelabelArgs) -> Result<(), CliError> {
    let mut o = load_oracle(&a.oracle)?;
    let touched = o.change_label(VertexId(a.vertex), Label(a.label)).map_err(CliError::Query)?;
    save_oracle(&o, a.out.as_deref().unwrap_or(&a.oracle))?;
    println!("touched {touched}");
    Ok(())
}

/// Largest observed `d / δ` as an exact fraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Ratio {
    num: u64,
    den: u64,
}

impl Ratio {
    const ONE: Ratio = Ratio { num: 1, den: 1 };

    fn new(num: u64, den: u64) -> Self {
        let (mut a, mut b) = (num, den);
        while b != 0 {
            (a, b) = (b, a % b);
        }
        Ratio { num: num / a, den: den / a }
    }

    fn max(self, other: Ratio) -> Ratio {
        if u128::from(other.num) * u128::from(self.den) > u128::from(self.num) * u128::from(other.den) {
            other
        } else {
            self
        }
    }
}

impl std::fmt::Display for Ratio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

struct Sweep {
    queries: usize,
    worst: Ratio,
    stretch_sum: f64,
    portals_sum: u64,
    /// First `(u, λ, d, δ)` outside `[δ, (1+ε)δ]` or where the two range
    /// modes disagree.
    violation: Option<String>,
}

/// Answers `pairs` with the oracle and compares them to exact distances.
fn sweep(o: &Oracle, pairs: &[(VertexId, Label)]) -> Sweep {
    let g = o.graph();
    let eps = o.config().stretch.epsilon();
    let mut by_vertex: Vec<Vec<Label>> = vec![Vec::new(); g.n()];
    for &(u, l) in pairs {
        by_vertex[u.index()].push(l);
    }
    let parts: Vec<Sweep> = by_vertex
        .par_iter()
        .enumerate()
        .filter(|(_, ls)| !ls.is_empty())
        .map(|(u, ls)| {
            let u = VertexId(u as u32);
            let exact = exact_label_distances_from(g, u);
            let mut s = Sweep { queries: 0, worst: Ratio::ONE, stretch_sum: 0.0, portals_sum: 0, violation: None };
            for &l in ls {
                let (delta, _) = exact[l.index()].expect("sampled labels are present");
                let r = o.query_with_mode(u, l, RangeMode::BinarySearch).expect("present label");
                let b = o.query_with_mode(u, l, RangeMode::Bitvector).expect("present label");
                s.queries += 1;
                s.portals_sum += u64::from(r.stats.portals_examined);
                if (r.d, r.witness) != (b.d, b.witness) {
                    s.violation.get_or_insert(format!(
                        "u={u} label={l}: binary-search answer ({}, {}) differs from bitvector answer ({}, {})",
                        r.d, r.witness, b.d, b.witness
                    ));
                }
                if r.d < delta || !eps.within(delta, r.d) || g.label(r.witness) != l {
                    s.violation.get_or_insert(format!("u={u} label={l} d={} exact={delta} witness={}", r.d, r.witness));
                }
                if delta > 0 {
                    s.worst = s.worst.max(Ratio::new(r.d, delta));
                    s.stretch_sum += r.d as f64 / delta as f64;
                } else {
                    s.stretch_sum += 1.0;
                }
            }
            s
        })
        .collect();
    parts.into_iter().fold(
        Sweep { queries: 0, worst: Ratio::ONE, stretch_sum: 0.0, portals_sum: 0, violation: None },
        |mut acc, s| {
            acc.queries += s.queries;
            acc.worst = acc.worst.max(s.worst);
            acc.stretch_sum += s.stretch_sum;
            acc.portals_sum += s.portals_sum;
            if acc.violation.is_none() {
                acc.violation = s.violation;
            }
            acc
        },
    )
}

/// Every (vertex, present label) pair, or `sample` of them drawn with
/// replacement.
fn pairs(o: &Oracle, sample: Option<usize>, seed: u64) -> Vec<(VertexId, Label)> {
    let labels: Vec<Label> = o.present_labels().collect();
    let all: Vec<(VertexId, Label)> = o.graph().vertices().flat_map(|u| labels.iter().map(move |&l| (u, l))).collect();
    match sample {
        None => all,
        Some(k) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..k).filter_map(|_| all.choose(&mut rng).copied()).collect()
        }
    }
}

pub fn verify(a: VerifyArgs) -> Result<(), CliError> {
    let g = read_graph(&a.graph)?;
    let o = load_oracle(&a.oracle)?;
    if !g.same_structure(o.graph()) {
        return Err(CliError::Verification("graph file does not match the oracle's graph".into()));
    }
    if g.labels() != o.graph().labels() {
        eprintln!("note: labels differ from the graph file (relabeled oracle); checking the oracle's labels");
    }
    let s = sweep(&o, &pairs(&o, a.sample, a.seed));
    if let Some(v) = s.violation {
        return Err(CliError::Verification(v));
    }
    println!(
        "ok pairs={} eps={} worst_stretch={} ({:.6})",
        s.queries,
        o.config().stretch,
        s.worst,
        s.worst.num as f64 / s.worst.den as f64
    );
    Ok(())
}

fn parse_stretch(s: &str) -> Result<Stretch, CliError> {
    if s == "3" || s == "three" {
        return Ok(Stretch::Three);
    }
    let e: Epsilon = s.parse().map_err(|e| CliError::BadFlags(format!("--eps: {e}")))?;
    if !e.is_below_one() {
        return Err(CliError::BadFlags(format!("--eps {e} must be below 1 (or 3 for the 3-stretch mode)")));
    }
    Ok(Stretch::Eps(e))
}

pub fn bench(a: BenchArgs) -> Result<(), CliError> {
    let stretches = a.eps.iter().map(|s| parse_stretch(s)).collect::<Result<Vec<_>, _>>()?;
    let w = weights(a.weights)?;
    let mut out = io::stdout().lock();
    let stdout = Path::new("<stdout>");
    writeln!(out, "{BENCH_HEADER}").map_err(io_err(stdout))?;
    for &side in &a.sides {
        for &stretch in &stretches {
            for rep in 0..a.reps {
                let seed = a.seed.wrapping_add(rep as u64);
                let g = generate(side, side, a.labels, seed, w, a.density)?;
                let config = OracleConfig { stretch, range_mode: a.range_mode, ..OracleConfig::default() };
                let start = Instant::now();
                let o = Oracle::build(&g, config).map_err(CliError::Other)?;
                let ms = start.elapsed().as_millis();
                let sample = (a.queries > 0).then_some(a.queries);
                let s = sweep(&o, &pairs(&o, sample, seed));
                if let Some(v) = s.violation {
                    return Err(CliError::Verification(v));
                }
                let q = s.queries.max(1) as f64;
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{:.6},{:.3},{},{}",
                    g.n(),
                    g.m(),
                    g.num_labels(),
                    stretch,
                    o.rho(),
                    a.range_mode,
                    s.queries,
                    s.worst,
                    s.stretch_sum / q,
                    s.portals_sum as f64 / q,
                    o.stats().total_entries(),
                    ms
                )
                .map_err(io_err(stdout))?;
            }
        }
    }
    Ok(())
}

pub fn stats(a: StatsArgs) -> Result<(), CliError> {
    let o = load_oracle(&a.oracle)?;
    let g = o.graph();
    let s = o.stats();
    println!("n: {}", g.n());
    println!("m: {}", g.m());
    println!("labels: {}", g.num_labels());
    println!("eps: {}", o.config().stretch);
    println!("range_mode: {}", o.config().range_mode);
    println!("leaf_max: {}", o.config().leaf_max);
    println!("root: {}", o.root());
    println!("rho: {}", o.rho());
    println!("depth: {}", s.depth);
    println!("pieces: {}", s.pieces);
    println!("vertex_portals: {}", s.vertex_portals);
    println!("label_entries: {}", s.label_entries);
    println!("contributors: {}", s.contributors);
    println!("rmq_cells: {}", s.rmq_cells);
    println!("bitvector_words: {}", s.bitvector_words);
    println!("leaf_table_cells: {}", s.leaf_table_cells);
    println!("total_entries: {}", s.total_entries());
    Ok(())
}
