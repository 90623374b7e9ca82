//! `nass`: build pairwise-GED indexes and run threshold similarity queries.
//!
//! Exit codes: 0 success, 1 failed verification, 2 usage or I/O error.

mod report;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use nass::graph::{gen_synthetic, parse_db, parse_graphs, write_db, SyntheticConfig};
use nass::index::{build_index_with_stats, BuildConfig, GedIndex, UNLIMITED_BUDGET};
use nass::search::{linear_scan, nass_search, Query, SearchResult};
use nass::{brute_force_ged, nass_ged_with, GedOptions, Graph, GraphDatabase};

use report::{Row, RunReport};

#[derive(Parser)]
#[command(
    name = "nass",
    version,
    about = "Exact graph similarity search under graph edit distance"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Precompute pairwise distances up to a threshold.
    Build(BuildArgs),
    /// Answer threshold queries against a database.
    Query(QueryArgs),
    /// Threshold GED of one database pair.
    Ged(GedArgs),
    /// Write a synthetic database.
    Gen(GenArgs),
    /// Run a query workload over a range of thresholds, with and without the index.
    Bench(BenchArgs),
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    db: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    tau_index: u32,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Live search-node budget across all workers; unlimited when omitted.
    #[arg(long)]
    node_budget: Option<usize>,
    /// Check every entry against exhaustive GED (graphs of at most 9 vertices).
    #[arg(long)]
    verify: bool,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    db: PathBuf,
    #[arg(long, required_unless_present = "no_index")]
    index: Option<PathBuf>,
    #[arg(long)]
    queries: PathBuf,
    #[arg(long)]
    tau: u32,
    /// Verify every label-filtered graph instead of using the index.
    #[arg(long)]
    no_index: bool,
    /// Write a JSON-lines run report here.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Add a third column with the distance, or `-` when the result came from
    /// the index without verification.
    #[arg(long)]
    distances: bool,
}

#[derive(Args)]
struct GedArgs {
    #[arg(long)]
    db: PathBuf,
    #[arg(long)]
    g1: usize,
    #[arg(long)]
    g2: usize,
    #[arg(long)]
    tau: u32,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 12)]
    avg_edges: usize,
    #[arg(long, default_value_t = 0.25)]
    density: f64,
    #[arg(long, default_value_t = 4)]
    vlabels: usize,
    #[arg(long, default_value_t = 2)]
    elabels: usize,
    #[arg(long, default_value_t = 4)]
    clones: usize,
    #[arg(long, default_value_t = 2)]
    mutations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    db: PathBuf,
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    /// Inclusive threshold range, e.g. `1..4`.
    #[arg(long, value_parser = parse_range)]
    tau_range: (u32, u32),
    #[arg(long)]
    stats: PathBuf,
}

fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, got {s:?}"))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: u32 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b: u32 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    if a > b {
        return Err(format!("empty range {s}"));
    }
    Ok((a, b))
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    msg: String,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        msg: msg.into(),
    }
}

fn with_path<E: std::fmt::Display>(path: &Path) -> impl Fn(E) -> Failure + '_ {
    move |e| usage(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Command::Build(a) => cmd_build(a),
        Command::Query(a) => cmd_query(a),
        Command::Ged(a) => cmd_ged(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("nass: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn read_db(path: &Path) -> Result<GraphDatabase, Failure> {
    let f = File::open(path).map_err(with_path(path))?;
    parse_db(BufReader::new(f)).map_err(with_path(path))
}

fn read_queries(path: &Path, db: &mut GraphDatabase) -> Result<Vec<Graph>, Failure> {
    let f = File::open(path).map_err(with_path(path))?;
    parse_graphs(BufReader::new(f), &mut db.labels).map_err(with_path(path))
}

fn read_index(path: &Path, db: &GraphDatabase) -> Result<GedIndex, Failure> {
    let mut f = File::open(path).map_err(with_path(path))?;
    let idx = GedIndex::load(&mut f).map_err(with_path(path))?;
    if idx.len() != db.len() {
        return Err(usage(format!(
            "{}: index covers {} graphs but the database has {}",
            path.display(),
            idx.len(),
            db.len()
        )));
    }
    Ok(idx)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(with_path(path))
}

fn cmd_build(a: BuildArgs) -> Result<(), Failure> {
    let db = read_db(&a.db)?;
    let cfg = BuildConfig {
        tau_index: a.tau_index,
        n_workers: a.threads,
        node_budget: a.node_budget.unwrap_or(UNLIMITED_BUDGET),
    };
    // Open the output first so an unwritable path fails before the build.
    let mut out = create(&a.out)?;
    let start = Instant::now();
    let (idx, stats) = build_index_with_stats(&db, &cfg).map_err(|e| usage(e.to_string()))?;
    let secs = start.elapsed().as_secs_f64();
    idx.save(&mut out).map_err(with_path(&a.out))?;
    out.flush().map_err(with_path(&a.out))?;

    let total = idx.num_entries();
    let inexact = idx.num_inexact();
    let pct = if total == 0 {
        0.0
    } else {
        100.0 * inexact as f64 / total as f64
    };
    println!("graphs\t{}", idx.len());
    println!("entries\t{total}");
    println!("inexact\t{inexact}\t{pct:.2}%");
    println!("pairs\t{}\tpreempted\t{}", stats.pairs, stats.preempted);
    println!("seconds\t{secs:.3}");

    if a.verify {
        verify_index(&db, &idx)?;
        println!("verify\tok");
    }
    Ok(())
}

fn verify_index(db: &GraphDatabase, idx: &GedIndex) -> Result<(), Failure> {
    let fail = |msg: String| Failure { code: 1, msg };
    let n = db.len();
    let mut stored = vec![None; n];
    for i in 0..n {
        stored.iter_mut().for_each(|s| *s = None);
        for e in idx.entries(i) {
            stored[e.neighbor as usize] = Some((u32::from(e.distance), e.exact));
        }
        for (j, s) in stored.iter().enumerate() {
            let truth = brute_force_ged(&db.graphs[i], &db.graphs[j])
                .map_err(|e| usage(format!("--verify: {e}")))?;
            let ok = match *s {
                Some((d, true)) => d == truth,
                Some((d, false)) => d <= truth,
                None => truth > idx.tau_index() || i == j,
            };
            if !ok || (i == j && *s != Some((0, true))) {
                return Err(fail(format!(
                    "verify: pair ({i}, {j}) stored {s:?}, exhaustive GED {truth}"
                )));
            }
        }
    }
    Ok(())
}

/// Runs one query, timed.
fn run_query(db: &GraphDatabase, idx: Option<&GedIndex>, q: &Query) -> (SearchResult, u64) {
    let start = Instant::now();
    let res = match idx {
        Some(idx) => nass_search(db, idx, q),
        None => linear_scan(db, q),
    };
    (res, start.elapsed().as_micros() as u64)
}

fn cmd_query(a: QueryArgs) -> Result<(), Failure> {
    let mut db = read_db(&a.db)?;
    let idx = match (&a.index, a.no_index) {
        (_, true) => None,
        (Some(p), false) => Some(read_index(p, &db)?),
        (None, false) => return Err(usage("--index is required without --no-index")),
    };
    let queries = read_queries(&a.queries, &mut db)?;
    let mut stats = a.stats.as_deref().map(create).transpose()?;

    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let mut rows = Vec::with_capacity(queries.len());
    for (qid, g) in queries.into_iter().enumerate() {
        let q = Query {
            graph: g,
            tau: a.tau,
        };
        let (res, micros) = run_query(&db, idx.as_ref(), &q);
        for h in &res.hits {
            let written = if a.distances {
                let d = h
                    .distance
                    .map_or_else(|| "-".to_string(), |d| d.to_string());
                writeln!(out, "{qid}\t{}\t{d}", h.id)
            } else {
                writeln!(out, "{qid}\t{}", h.id)
            };
            written.map_err(|e| usage(format!("stdout: {e}")))?;
        }
        rows.push(Row::new(qid, a.tau, &res, micros));
    }
    out.flush().map_err(|e| usage(format!("stdout: {e}")))?;

    if let (Some(w), Some(path)) = (stats.as_mut(), a.stats.as_deref()) {
        let mode = if a.no_index { "scan" } else { "index" };
        RunReport::new(a.tau, mode, rows)
            .write_line(w)
            .map_err(with_path(path))?;
        w.flush().map_err(with_path(path))?;
    }
    Ok(())
}

fn cmd_ged(a: GedArgs) -> Result<(), Failure> {
    let db = read_db(&a.db)?;
    let get = |i: usize| {
        db.get(i).ok_or_else(|| {
            usage(format!(
                "graph id {i} out of range (database has {})",
                db.len()
            ))
        })
    };
    let (g1, g2) = (get(a.g1)?, get(a.g2)?);
    let out = nass_ged_with(g1, g2, a.tau, &GedOptions::default());
    println!("distance\t{}", out.distance);
    println!("mappings_pushed\t{}", out.stats.nodes_pushed);
    Ok(())
}

fn cmd_gen(a: GenArgs) -> Result<(), Failure> {
    let cfg = SyntheticConfig {
        count: a.count,
        avg_edges: a.avg_edges,
        density: a.density,
        n_vertex_labels: a.vlabels,
        n_edge_labels: a.elabels,
        mutations_per_clone: a.mutations,
        clones: a.clones,
        rng_seed: a.seed,
    };
    let db = gen_synthetic(&cfg).map_err(|e| usage(e.to_string()))?;
    let mut out = create(&a.out)?;
    write_db(&mut out, &db).map_err(with_path(&a.out))?;
    out.flush().map_err(with_path(&a.out))?;
    println!("graphs\t{}", db.len());
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<(), Failure> {
    let mut db = read_db(&a.db)?;
    let idx = read_index(&a.index, &db)?;
    let queries = read_queries(&a.queries, &mut db)?;
    let mut w = create(&a.stats)?;
    let (lo, hi) = a.tau_range;
    for tau in lo..=hi {
        let mut rows = Vec::with_capacity(queries.len());
        for (qid, g) in queries.iter().enumerate() {
            let q = Query {
                graph: g.clone(),
                tau,
            };
            let (res, micros) = run_query(&db, Some(&idx), &q);
            let (scan, scan_micros) = run_query(&db, None, &q);
            if res.ids() != scan.ids() {
                return Err(Failure {
                    code: 1,
                    msg: format!(
                        "query {qid} at tau {tau}: index answer {:?} differs from scan {:?}",
                        res.ids(),
                        scan.ids()
                    ),
                });
            }
            rows.push(Row::new(qid, tau, &res, micros).with_scan(&scan, scan_micros));
        }
        let report = RunReport::new(tau, "index", rows);
        println!(
            "tau\t{tau}\tqueries\t{}\tmean_candidates_verified\t{:.2}\tscan\t{:.2}",
            report.rows.len(),
            report.mean_candidates_verified,
            report.mean_scan_candidates_verified.unwrap_or(0.0)
        );
        report.write_line(&mut w).map_err(with_path(&a.stats))?;
    }
    w.flush().map_err(with_path(&a.stats))?;
    Ok(())
}
