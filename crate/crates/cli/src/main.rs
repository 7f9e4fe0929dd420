use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use plp_bounds::bench::{run_bench, BenchConfig};
use plp_bounds::encode::{Encoding, Target};
use plp_bounds::engine::{run_observed, BoundEvent, BoundTrace, EngineConfig, Limit, Mode, Observer, DEFAULT_EPSILON};
use plp_bounds::generate::LayeredParams;
use plp_bounds::lazy::IterationRecord;
use plp_bounds::maxsat::write_wcnf;
use plp_bounds::oracle::{Oracle, OracleError, DEFAULT_MAX_FACTS};
use plp_bounds::program::{parse_program, validate, Atom, GroundProgram, ProgramIndex};

#[derive(Parser)]
#[command(name = "plpb", version, about = "Anytime probability bounds for ground probabilistic logic programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bound a query's probability by lazy explanation search.
    Solve(SolveArgs),
    /// Exact probability by enumerating all possible worlds (small programs only).
    Exact(ExactArgs),
    /// Compare lazy and non-lazy search on generated reachability queries.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Lazy,
    Nonlazy,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Ndjson,
}

#[derive(clap::Args)]
struct SolveArgs {
    file: PathBuf,
    /// Query atom; defaults to the first `query(...)` in the file.
    #[arg(long)]
    query: Option<String>,
    #[arg(long, value_enum, default_value = "lazy")]
    mode: ModeArg,
    /// Wall-clock budget in seconds.
    #[arg(long, env = "PLPB_BUDGET", default_value_t = 900.0, conflicts_with = "cap")]
    budget: f64,
    /// Deterministic mode: at most N explanations per side, no clock.
    #[arg(long)]
    cap: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Write every MAX-SAT instance to stderr in WCNF.
    #[arg(long)]
    dump_wcnf: bool,
    /// Write the final explanation diagrams to stderr in DOT.
    #[arg(long)]
    dump_bdd: bool,
}

#[derive(clap::Args)]
struct ExactArgs {
    file: PathBuf,
    #[arg(long)]
    query: Option<String>,
    #[arg(long, default_value_t = DEFAULT_MAX_FACTS)]
    max_facts: usize,
}

#[derive(clap::Args)]
struct BenchArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    queries: usize,
    #[arg(long, default_value_t = 8)]
    layers: usize,
    #[arg(long, default_value_t = 6)]
    width: usize,
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    /// Per-query, per-mode budget in seconds.
    #[arg(long, env = "PLPB_BUDGET", default_value_t = 900.0, conflicts_with = "cap")]
    budget: f64,
    #[arg(long)]
    cap: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Run one query at a time.
    #[arg(long)]
    sequential: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Exact(args) => cmd_exact(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load(path: &PathBuf) -> Result<GroundProgram> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let program = parse_program(&text).map_err(|e| anyhow!("{}:{e}", path.display()))?;
    let report = validate(&program);
    if !report.is_ok() {
        bail!("{}: invalid program:\n{report}", path.display());
    }
    Ok(program)
}

fn pick_query(program: &GroundProgram, flag: Option<&str>) -> Result<Atom> {
    match flag {
        Some(text) => Atom::parse(text).map_err(|e| anyhow!("--query: {e}")),
        None => program
            .queries
            .first()
            .cloned()
            .ok_or_else(|| anyhow!("no query: add `query(...).` to the program or pass --query")),
    }
}

fn limit(budget: f64, cap: Option<usize>) -> Result<Limit> {
    match cap {
        Some(n) => Ok(Limit::Explanations(n)),
        None if budget.is_finite() && budget >= 0.0 => Ok(Limit::Time(Duration::from_secs_f64(budget))),
        None => bail!("budget must be a nonnegative number of seconds"),
    }
}

/// Fixed-point with trailing zeros removed: 0.424, 1, 0.
fn num(x: f64) -> String {
    let s = format!("{x:.9}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn side_name(t: Target) -> &'static str {
    match t {
        Target::Query => "q",
        Target::Negation => "not_q",
    }
}

fn literals_json(lits: &[(Atom, bool)]) -> Value {
    Value::Array(
        lits.iter()
            .map(|(a, v)| json!({ "atom": a.to_string(), "value": v }))
            .collect(),
    )
}

fn render_literals(lits: &[(Atom, bool)]) -> String {
    let items: Vec<String> = lits
        .iter()
        .map(|(a, v)| if *v { a.to_string() } else { format!("\\+{a}") })
        .collect();
    format!("{{{}}}", items.join(", "))
}

/// The one-line text summary; also reproducible from the NDJSON summary.
pub fn summary_line(summary: &Value) -> String {
    format!(
        "lower={} upper={} status={} bucket={}",
        num(summary["lower"].as_f64().unwrap_or(f64::NAN)),
        num(summary["upper"].as_f64().unwrap_or(f64::NAN)),
        summary["status"].as_str().unwrap_or("?"),
        summary["bucket"].as_str().unwrap_or("?"),
    )
}

fn summary_json(trace: &BoundTrace, mode: ModeArg) -> Value {
    json!({
        "type": "summary",
        "query": trace.query.to_string(),
        "mode": match mode { ModeArg::Lazy => "lazy", ModeArg::Nonlazy => "nonlazy" },
        "lower": trace.lower,
        "upper": trace.upper,
        "status": trace.terminal.to_string(),
        "bucket": trace.bucket.to_string(),
        "events": trace.events.len(),
        "time": trace.elapsed.as_secs_f64(),
        "rules_added": trace.stats.rules_added,
        "expansions": trace.stats.expansions,
        "solver_calls": trace.stats.solver_calls,
    })
}

struct Streamer<W: Write> {
    out: W,
    format: Format,
    dump_wcnf: bool,
    error: Option<io::Error>,
}

impl<W: Write> Streamer<W> {
    fn emit(&mut self, line: String) {
        if self.error.is_none() {
            if let Err(e) = writeln!(self.out, "{line}") {
                self.error = Some(e);
            }
        }
    }
}

impl<W: Write> Observer for Streamer<W> {
    fn iteration(&mut self, rec: &IterationRecord, enc: &Encoding, index: &ProgramIndex) {
        if self.dump_wcnf {
            let mut comments = vec![format!("iteration {} target {}", rec.iteration, side_name(rec.target))];
            comments.extend(enc.describe(index));
            eprint!("{}", write_wcnf(&enc.instance, &comments));
        }
        if self.format != Format::Ndjson {
            return;
        }
        let explanation = rec.explanation.as_ref().map(|e| {
            let mut lits = e.literals(index);
            lits.extend(e.heads.iter().map(|&(h, v)| (index.atom(h).clone(), v)));
            json!({
                "literals": literals_json(&lits),
                "cost": e.cost,
            })
        });
        let expanded: Vec<String> = rec.expanded.iter().map(|&h| index.atom(h).to_string()).collect();
        self.emit(
            json!({
                "type": "iteration",
                "iteration": rec.iteration,
                "side": side_name(rec.target),
                "optimum": explanation,
                "expanded": expanded,
            })
            .to_string(),
        );
    }

    fn event(&mut self, ev: &BoundEvent) {
        let line = match self.format {
            Format::Ndjson => json!({
                "type": "event",
                "time": ev.elapsed.as_secs_f64(),
                "side": side_name(ev.side),
                "explanation": literals_json(&ev.literals),
                "probability": ev.probability,
                "lower": ev.lower,
                "upper": ev.upper,
            })
            .to_string(),
            Format::Text => format!(
                "[{:>9.3}s] {:<5} p={:<12} lower={:<12} upper={:<12} {}",
                ev.elapsed.as_secs_f64(),
                side_name(ev.side),
                num(ev.probability),
                num(ev.lower),
                num(ev.upper),
                render_literals(&ev.literals)
            ),
        };
        self.emit(line);
    }
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let program = load(&args.file)?;
    let query = pick_query(&program, args.query.as_deref())?;
    if args.epsilon.is_nan() || args.epsilon < 0.0 {
        bail!("--epsilon must be nonnegative");
    }
    let config = EngineConfig {
        mode: match args.mode {
            ModeArg::Lazy => Mode::Lazy,
            ModeArg::Nonlazy => Mode::NonLazy,
        },
        limit: limit(args.budget, args.cap)?,
        epsilon: args.epsilon,
    };
    let stdout = io::stdout();
    let mut streamer = Streamer {
        out: stdout.lock(),
        format: args.format,
        dump_wcnf: args.dump_wcnf,
        error: None,
    };
    let trace = run_observed(&program, &query, &config, &mut streamer)?;
    let summary = summary_json(&trace, args.mode);
    match args.format {
        Format::Ndjson => streamer.emit(summary.to_string()),
        Format::Text => streamer.emit(summary_line(&summary)),
    }
    match streamer.error {
        Some(e) if e.kind() == io::ErrorKind::BrokenPipe => return Ok(()),
        Some(e) => return Err(e).context("writing output"),
        None => {}
    }
    if args.dump_bdd {
        let label = |v: u32| trace.fact_atoms[v as usize].to_string();
        eprintln!("// explanations of {}", trace.query);
        eprint!("{}", trace.query_dnf.to_dot(&label));
        eprintln!("// explanations of not {}", trace.query);
        eprint!("{}", trace.negation_dnf.to_dot(&label));
    }
    Ok(())
}

fn cmd_exact(args: ExactArgs) -> Result<()> {
    let program = load(&args.file)?;
    let query = pick_query(&program, args.query.as_deref())?;
    let oracle = Oracle::new(&program)?.with_max_facts(args.max_facts);
    match oracle.exact_probability(&query) {
        Ok(p) => {
            println!("{}", num(p));
            Ok(())
        }
        Err(e @ OracleError::TooManyFacts { .. }) => {
            bail!("{e}; use `plpb solve` for bounds instead, or raise --max-facts")
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let cfg = BenchConfig {
        seed: args.seed,
        queries: args.queries,
        graph: LayeredParams {
            layers: args.layers,
            width: args.width,
            density: args.density,
        },
        limit: limit(args.budget, args.cap)?,
        epsilon: args.epsilon,
        parallel: !args.sequential,
    };
    if cfg.graph.layers < 2 || cfg.graph.width < 1 {
        bail!("need at least 2 layers and width 1");
    }
    let report = run_bench(&cfg)?;
    println!(
        "{} queries, {} layers x {} nodes, density {}",
        args.queries, args.layers, args.width, args.density
    );
    println!("{report}");
    Ok(())
}
