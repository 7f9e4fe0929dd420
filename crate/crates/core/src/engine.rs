//! Anytime controller: alternates explanation searches for `q` and `¬q`,
//! keeps the two explanation disjunctions, and reports hard bounds after
//! every new explanation.

use std::fmt;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::encode::{Encoding, Explanation, Target};
use crate::lazy::{IterationRecord, LazyError, LazyState, NextOutcome};
use crate::program::{normalize, validate, Atom, GroundProgram, ProgramIndex, ValidationReport};
use crate::wmc::{bounds, ExplanationDnf};

pub const DEFAULT_EPSILON: f64 = 1e-6;
pub const DEFAULT_BUDGET: Duration = Duration::from_secs(900);

/// Gaps at or below this are exact up to rounding.
const EXACT_GAP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("invalid program:\n{0}")]
    Invalid(ValidationReport),
    #[error("unknown query atom `{0}`")]
    UnknownQuery(Atom),
    #[error(transparent)]
    Lazy(#[from] LazyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Lazy,
    /// All reachable rules are in the program from the start.
    NonLazy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limit {
    /// Wall-clock budget for the whole run.
    Time(Duration),
    /// At most this many explanations per side, no clock. Deterministic.
    Explanations(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub mode: Mode,
    pub limit: Limit,
    pub epsilon: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            mode: Mode::Lazy,
            limit: Limit::Time(DEFAULT_BUDGET),
            epsilon: DEFAULT_EPSILON,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminal {
    /// `upper - lower <= epsilon`.
    Converged,
    /// The bounds coincide: both searches ran dry or the disjunctions
    /// already cover every world.
    Exact,
    BudgetExhausted,
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Terminal::Converged => "converged",
            Terminal::Exact => "exact",
            Terminal::BudgetExhausted => "budget_exhausted",
        })
    }
}

/// Quality of a final bound by the width of the interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bucket {
    /// gap < 0.01
    AlmostExact,
    /// 0.01 <= gap < 0.25
    TightBound,
    /// 0.25 <= gap < 1
    LooseBound,
    /// gap = 1
    NoAnswer,
}

impl Bucket {
    pub const ALL: [Bucket; 4] = [
        Bucket::AlmostExact,
        Bucket::TightBound,
        Bucket::LooseBound,
        Bucket::NoAnswer,
    ];
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Bucket::AlmostExact => "almost_exact",
            Bucket::TightBound => "tight_bound",
            Bucket::LooseBound => "loose_bound",
            Bucket::NoAnswer => "no_answer",
        })
    }
}

pub fn bucket(lower: f64, upper: f64) -> Bucket {
    let gap = upper - lower;
    if gap < 0.01 {
        Bucket::AlmostExact
    } else if gap < 0.25 {
        Bucket::TightBound
    } else if gap < 1.0 {
        Bucket::LooseBound
    } else {
        Bucket::NoAnswer
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundEvent {
    pub elapsed: Duration,
    pub side: Target,
    pub literals: Vec<(Atom, bool)>,
    pub probability: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunStats {
    /// Rules that entered the searched program, counted once each.
    pub rules_added: usize,
    pub expansions: usize,
    pub solver_calls: usize,
    pub solver_nodes: u64,
    pub query_found: usize,
    pub negation_found: usize,
    pub query_exhausted: bool,
    pub negation_exhausted: bool,
}

#[derive(Debug, Clone)]
pub struct BoundTrace {
    pub query: Atom,
    pub events: Vec<BoundEvent>,
    pub terminal: Terminal,
    pub lower: f64,
    pub upper: f64,
    pub bucket: Bucket,
    pub elapsed: Duration,
    pub stats: RunStats,
    pub query_dnf: ExplanationDnf,
    pub negation_dnf: ExplanationDnf,
    /// Fact atoms in BDD variable order.
    pub fact_atoms: Vec<Atom>,
}

/// Callbacks for streaming a run.
pub trait Observer {
    fn iteration(&mut self, _record: &IterationRecord, _encoding: &Encoding, _index: &ProgramIndex) {}
    fn event(&mut self, _event: &BoundEvent) {}
}

impl Observer for () {}

pub fn run(program: &GroundProgram, query: &Atom, config: &EngineConfig) -> Result<BoundTrace, EngineError> {
    run_observed(program, query, config, &mut ())
}

pub fn run_observed(
    program: &GroundProgram,
    query: &Atom,
    config: &EngineConfig,
    observer: &mut dyn Observer,
) -> Result<BoundTrace, EngineError> {
    let start = Instant::now();
    let report = validate(program);
    if !report.is_ok() {
        return Err(EngineError::Invalid(report));
    }
    if !program.mentions(query) {
        return Err(EngineError::UnknownQuery(query.clone()));
    }
    let mut normalized = normalize(program);
    if !normalized.mentions(query) {
        // an impossible fact or a defined atom whose rules all vanished
        normalized.queries.push(query.clone());
    }
    let mut ls = match config.mode {
        Mode::Lazy => LazyState::new(&normalized, query)?,
        Mode::NonLazy => LazyState::new_expanded(&normalized, query)?,
    };

    let probs: Vec<f64> = ls
        .index()
        .facts()
        .iter()
        .map(|&f| ls.index().prob(f).unwrap())
        .collect();
    let fact_atoms: Vec<Atom> = ls
        .index()
        .facts()
        .iter()
        .map(|&f| ls.index().atom(f).clone())
        .collect();
    let mut dnfs = [ExplanationDnf::new(probs.clone()), ExplanationDnf::new(probs)];
    let deadline = match config.limit {
        Limit::Time(d) => Some(start + d),
        Limit::Explanations(_) => None,
    };
    let cap = match config.limit {
        Limit::Explanations(n) => n,
        Limit::Time(_) => usize::MAX,
    };

    // the index never changes; the trace callback needs it while `ls` is
    // mutably borrowed
    let index = ls.index().clone();
    let mut events = Vec::new();
    let mut last_prob: [Option<f64>; 2] = [None, None];
    let mut found = [0usize; 2];
    let (mut lower, mut upper) = (0.0, 1.0);
    let side_slot = |t: Target| (t == Target::Negation) as usize;

    let terminal = loop {
        let gap = upper - lower;
        let active: Vec<Target> = [Target::Query, Target::Negation]
            .into_iter()
            .filter(|&t| !ls.is_exhausted(t))
            .collect();
        if active.is_empty() || gap <= EXACT_GAP {
            break Terminal::Exact;
        }
        if gap <= config.epsilon {
            break Terminal::Converged;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            break Terminal::BudgetExhausted;
        }
        let eligible: Vec<Target> = active
            .into_iter()
            .filter(|&t| found[side_slot(t)] < cap)
            .collect();
        if eligible.is_empty() {
            break Terminal::BudgetExhausted;
        }
        // Greedy: the side whose last explanation was more probable; a side
        // not tried yet counts as probability 1; ties go to q.
        let side = *eligible
            .iter()
            .max_by(|&&a, &&b| {
                let pa = last_prob[side_slot(a)].unwrap_or(1.0);
                let pb = last_prob[side_slot(b)].unwrap_or(1.0);
                pa.partial_cmp(&pb)
                    .unwrap()
                    .then_with(|| (a == Target::Query).cmp(&(b == Target::Query)))
            })
            .unwrap();

        let outcome = ls.next_explanation_traced(side, deadline, &mut |rec, enc| {
            observer.iteration(rec, enc, &index)
        });
        match outcome {
            NextOutcome::Found(e) => {
                let s = side_slot(side);
                found[s] += 1;
                last_prob[s] = Some(e.probability);
                dnfs[s].add_explanation(&fact_literals(&e, ls.index()));
                let (lo, up) = bounds(&dnfs[0], &dnfs[1]);
                // Both are monotone in exact arithmetic; guard rounding so the
                // reported sequence is too.
                let (new_lower, new_upper) = (lo.max(lower), up.min(upper));
                if new_lower <= new_upper {
                    (lower, upper) = (new_lower, new_upper);
                } else {
                    // crossed by rounding only: meet without moving backwards
                    let v = new_upper.max(lower);
                    (lower, upper) = (v, v);
                }
                let event = BoundEvent {
                    elapsed: start.elapsed(),
                    side,
                    literals: e.literals(ls.index()),
                    probability: e.probability,
                    lower,
                    upper,
                };
                observer.event(&event);
                events.push(event);
            }
            NextOutcome::Exhausted => {}
            NextOutcome::Timeout => break Terminal::BudgetExhausted,
        }
    };

    let lazy_stats = ls.stats();
    let stats = RunStats {
        rules_added: ls.expanded_rules().len(),
        expansions: lazy_stats.expansions,
        solver_calls: lazy_stats.solver_calls,
        solver_nodes: lazy_stats.solver_nodes,
        query_found: found[0],
        negation_found: found[1],
        query_exhausted: ls.is_exhausted(Target::Query),
        negation_exhausted: ls.is_exhausted(Target::Negation),
    };
    let [query_dnf, negation_dnf] = dnfs;
    Ok(BoundTrace {
        query: query.clone(),
        events,
        terminal,
        lower,
        upper,
        bucket: bucket(lower, upper),
        elapsed: start.elapsed(),
        stats,
        query_dnf,
        negation_dnf,
        fact_atoms,
    })
}

fn fact_literals(e: &Explanation, index: &ProgramIndex) -> Vec<(u32, bool)> {
    e.facts
        .iter()
        .map(|&(a, v)| (index.fact_position(a).unwrap() as u32, v))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::{parse_program, TOY_PROGRAM};

    fn toy() -> (GroundProgram, Atom) {
        (parse_program(TOY_PROGRAM).unwrap(), Atom::parse("p(1,4)").unwrap())
    }

    fn capped(n: usize, epsilon: f64) -> EngineConfig {
        EngineConfig {
            mode: Mode::Lazy,
            limit: Limit::Explanations(n),
            epsilon,
        }
    }

    #[test]
    fn buckets() {
        assert_eq!(bucket(0.424, 0.424), Bucket::AlmostExact);
        assert_eq!(bucket(0.4, 0.55), Bucket::TightBound);
        assert_eq!(bucket(0.0, 1.0), Bucket::NoAnswer);
        assert_eq!(bucket(0.5, 0.509), Bucket::AlmostExact);
        assert_eq!(bucket(0.5, 0.51), Bucket::TightBound);
        assert_eq!(bucket(0.5, 0.75), Bucket::LooseBound);
        assert_eq!(bucket(0.0, 0.999), Bucket::LooseBound);
    }

    #[test]
    fn toy_exact() {
        let (p, q) = toy();
        let t = run(&p, &q, &capped(usize::MAX, 0.0)).unwrap();
        assert_eq!(t.terminal, Terminal::Exact);
        assert!((t.lower - 0.424).abs() < 1e-9 && (t.upper - 0.424).abs() < 1e-9);
        let q_side: Vec<String> = t
            .events
            .iter()
            .filter(|e| e.side == Target::Query)
            .map(|e| format!("{:?}", e.literals.iter().map(|l| l.0.to_string()).collect::<Vec<_>>()))
            .collect();
        assert_eq!(
            q_side,
            vec![r#"["e(1,2)", "e(2,4)"]"#, r#"["e(1,3)", "e(3,4)"]"#]
        );
        assert_eq!(t.bucket, Bucket::AlmostExact);
    }

    #[test]
    fn toy_cap_four() {
        let (p, q) = toy();
        let t = run(&p, &q, &capped(4, 0.0)).unwrap();
        assert_eq!(t.terminal, Terminal::Exact);
        assert!((t.lower - 0.424).abs() < 1e-9 && (t.upper - 0.424).abs() < 1e-9);
    }

    #[test]
    fn toy_converges_with_loose_epsilon() {
        let (p, q) = toy();
        let t = run(&p, &q, &capped(usize::MAX, 0.2)).unwrap();
        assert_eq!(t.terminal, Terminal::Converged);
        assert_eq!(t.events.len(), 2);
        assert!((t.lower - 0.4).abs() < 1e-12 && (t.upper - 0.55).abs() < 1e-12);
    }

    #[test]
    fn zero_budget() {
        let (p, q) = toy();
        let cfg = EngineConfig {
            mode: Mode::Lazy,
            limit: Limit::Time(Duration::ZERO),
            epsilon: 0.0,
        };
        let t = run(&p, &q, &cfg).unwrap();
        assert!(t.events.is_empty());
        assert_eq!((t.lower, t.upper), (0.0, 1.0));
        assert_eq!(t.terminal, Terminal::BudgetExhausted);
        assert_eq!(t.bucket, Bucket::NoAnswer);
    }

    #[test]
    fn errors() {
        let (p, _) = toy();
        assert!(matches!(
            run(&p, &Atom::constant("nope"), &capped(1, 0.0)),
            Err(EngineError::UnknownQuery(_))
        ));
        let bad = parse_program("0.5::a. a :- b.").unwrap();
        assert!(matches!(
            run(&bad, &Atom::constant("a"), &capped(1, 0.0)),
            Err(EngineError::Invalid(_))
        ));
    }

    #[test]
    fn deterministic_queries() {
        let cfg = capped(usize::MAX, 0.0);
        let p = parse_program("1.0::a. query(a).").unwrap();
        let t = run(&p, &Atom::constant("a"), &cfg).unwrap();
        assert_eq!((t.lower, t.upper, t.terminal), (1.0, 1.0, Terminal::Exact));
        let p = parse_program("0.0::a. 0.5::b. q :- a. q :- b, c. query(a).").unwrap();
        let t = run(&p, &Atom::constant("a"), &cfg).unwrap();
        assert_eq!((t.lower, t.upper, t.terminal), (0.0, 0.0, Terminal::Exact));
        let t = run(&p, &Atom::constant("q"), &cfg).unwrap();
        assert_eq!((t.lower, t.upper, t.terminal), (0.0, 0.0, Terminal::Exact));
    }

    #[test]
    fn modes_agree_on_toy() {
        let (p, q) = toy();
        let lazy = run(&p, &q, &capped(usize::MAX, 0.0)).unwrap();
        let full = run(
            &p,
            &q,
            &EngineConfig {
                mode: Mode::NonLazy,
                ..capped(usize::MAX, 0.0)
            },
        )
        .unwrap();
        assert!((lazy.lower - full.lower).abs() < 1e-9);
        assert!((lazy.upper - full.upper).abs() < 1e-9);
        assert_eq!(full.stats.expansions, 0);
        assert!(lazy.stats.expansions > 0);
    }
}
