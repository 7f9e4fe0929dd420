//! Lazy versus non-lazy comparison on generated reachability queries,
//! summarized as counts per bound-quality bucket.

use std::fmt;
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::engine::{run, Bucket, EngineConfig, EngineError, Limit, Mode};
use crate::generate::{layered_reachability, LayeredParams};
use crate::program::{Atom, GroundProgram};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchConfig {
    pub seed: u64,
    pub queries: usize,
    pub graph: LayeredParams,
    /// Applied to each mode separately, per query.
    pub limit: Limit,
    pub epsilon: f64,
    /// Run queries on the rayon pool.
    pub parallel: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeResult {
    pub lower: f64,
    pub upper: f64,
    pub bucket: Bucket,
    pub rules_added: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    pub query: Atom,
    pub facts: usize,
    pub rules: usize,
    pub lazy: ModeResult,
    pub non_lazy: ModeResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub results: Vec<QueryResult>,
}

/// The `i`-th program of a benchmark; independent of how many queries run.
pub fn bench_program(seed: u64, i: usize, graph: LayeredParams) -> (GroundProgram, Atom) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64));
    layered_reachability(&mut rng, graph)
}

fn run_mode(program: &GroundProgram, query: &Atom, mode: Mode, cfg: &BenchConfig) -> Result<ModeResult, EngineError> {
    let trace = run(
        program,
        query,
        &EngineConfig {
            mode,
            limit: cfg.limit,
            epsilon: cfg.epsilon,
        },
    )?;
    Ok(ModeResult {
        lower: trace.lower,
        upper: trace.upper,
        bucket: trace.bucket,
        rules_added: trace.stats.rules_added,
        elapsed: trace.elapsed,
    })
}

pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport, EngineError> {
    let one = |i: usize| -> Result<QueryResult, EngineError> {
        let (program, query) = bench_program(cfg.seed, i, cfg.graph);
        Ok(QueryResult {
            facts: program.facts.len(),
            rules: program.rules.len(),
            lazy: run_mode(&program, &query, Mode::Lazy, cfg)?,
            non_lazy: run_mode(&program, &query, Mode::NonLazy, cfg)?,
            query,
        })
    };
    let results: Result<Vec<_>, _> = if cfg.parallel {
        (0..cfg.queries).into_par_iter().map(one).collect()
    } else {
        (0..cfg.queries).map(one).collect()
    };
    Ok(BenchReport { results: results? })
}

impl BenchReport {
    /// `counts()[bucket][0]` for non-lazy, `[1]` for lazy.
    pub fn counts(&self) -> [[usize; 2]; 4] {
        let mut m = [[0; 2]; 4];
        for r in &self.results {
            m[r.non_lazy.bucket as usize][0] += 1;
            m[r.lazy.bucket as usize][1] += 1;
        }
        m
    }

    /// Mean interval width per mode, `(non_lazy, lazy)`.
    pub fn mean_gap(&self) -> (f64, f64) {
        let n = self.results.len().max(1) as f64;
        let nl: f64 = self.results.iter().map(|r| r.non_lazy.upper - r.non_lazy.lower).sum();
        let l: f64 = self.results.iter().map(|r| r.lazy.upper - r.lazy.lower).sum();
        (nl / n, l / n)
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels = ["Almost Exact", "Tight Bound", "Loose Bound", "No Answer"];
        let counts = self.counts();
        writeln!(f, "{:<14}|{:>9} |{:>6}", "", "non-lazy", "lazy")?;
        writeln!(f, "{}", "-".repeat(33))?;
        for (b, label) in Bucket::ALL.iter().zip(labels) {
            let row = counts[*b as usize];
            writeln!(f, "{:<14}|{:>9} |{:>6}", label, row[0], row[1])?;
        }
        let (nl, l) = self.mean_gap();
        writeln!(f, "mean gap: non-lazy {nl:.4}, lazy {l:.4}")?;
        let better = self
            .results
            .iter()
            .filter(|r| r.lazy.upper - r.lazy.lower < r.non_lazy.upper - r.non_lazy.lower - 1e-9)
            .count();
        let worse = self
            .results
            .iter()
            .filter(|r| r.lazy.upper - r.lazy.lower > r.non_lazy.upper - r.non_lazy.lower + 1e-9)
            .count();
        write!(f, "lazy tighter on {better} queries, looser on {worse}")
    }
}
