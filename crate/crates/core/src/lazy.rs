//! Lazy explanation search.
//!
//! The lazy program starts with every probabilistic fact and none of the
//! rules. Each defined atom reachable from the query is represented by a
//! free pseudo-fact (weight 1 whether true or false) and called
//! unexpanded. The optimal explanation is searched in this smaller program;
//! if it assigns any unexpanded head, those heads are replaced by their
//! rules and the search repeats. An optimum that touches no unexpanded head
//! is also optimal for the full program, because resolving a head can only
//! add literals to an explanation, never raise its probability.

use std::time::Instant;

use thiserror::Error;

use crate::encode::{encode_target, Encoding, Explanation, Target};
use crate::maxsat::{SolveOutcome, Solver};
use crate::program::{Atom, AtomId, GroundProgram, ProgramIndex};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LazyError {
    #[error("unknown atom `{0}`")]
    UnknownAtom(Atom),
    #[error("`{0}` is not an unexpanded head")]
    NotUnexpanded(Atom),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomStatus {
    Fact,
    /// Present as a free `(1;1)` pseudo-fact.
    Unexpanded,
    /// Replaced by all of its rules.
    Expanded,
    /// Not reachable from the query.
    Irrelevant,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NextOutcome {
    Found(Explanation),
    /// No explanation of this target remains.
    Exhausted,
    Timeout,
}

/// One solver call inside [`LazyState::next_explanation`].
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub target: Target,
    /// The optimum in the lazy program; `None` if it was infeasible.
    pub explanation: Option<Explanation>,
    /// Heads expanded as a consequence of this optimum.
    pub expanded: Vec<AtomId>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LazyStats {
    pub solver_calls: usize,
    pub expansions: usize,
    pub solver_nodes: u64,
}

#[derive(Debug, Clone)]
pub struct LazyState {
    index: ProgramIndex,
    query: AtomId,
    status: Vec<AtomStatus>,
    expanded_rules: Vec<usize>,
    found: [Vec<Explanation>; 2],
    exhausted: [bool; 2],
    stats: LazyStats,
}

fn slot(t: Target) -> usize {
    match t {
        Target::Query => 0,
        Target::Negation => 1,
    }
}

impl LazyState {
    /// All facts, no rules, every defined atom reachable from `query`
    /// unexpanded.
    pub fn new(program: &GroundProgram, query: &Atom) -> Result<Self, LazyError> {
        let index = ProgramIndex::new(program);
        let q = index
            .id(query)
            .ok_or_else(|| LazyError::UnknownAtom(query.clone()))?;
        let mut status: Vec<AtomStatus> = index
            .atom_ids()
            .map(|a| {
                if index.is_fact(a) {
                    AtomStatus::Fact
                } else {
                    AtomStatus::Irrelevant
                }
            })
            .collect();
        for a in index.reachable_defined(q) {
            status[a.index()] = AtomStatus::Unexpanded;
        }
        Ok(LazyState {
            index,
            query: q,
            status,
            expanded_rules: Vec::new(),
            found: [Vec::new(), Vec::new()],
            exhausted: [false, false],
            stats: LazyStats::default(),
        })
    }

    /// The non-lazy starting point: every reachable head expanded up front.
    pub fn new_expanded(program: &GroundProgram, query: &Atom) -> Result<Self, LazyError> {
        let mut ls = Self::new(program, query)?;
        ls.expand_all();
        ls.stats.expansions = 0;
        Ok(ls)
    }

    pub fn index(&self) -> &ProgramIndex {
        &self.index
    }

    pub fn query(&self) -> AtomId {
        self.query
    }

    pub fn status(&self, a: AtomId) -> AtomStatus {
        self.status[a.index()]
    }

    pub fn unexpanded_heads(&self) -> Vec<AtomId> {
        self.index
            .atom_ids()
            .filter(|&a| self.status(a) == AtomStatus::Unexpanded)
            .collect()
    }

    /// Indices of the program rules in the lazy program, in the order they
    /// were added.
    pub fn expanded_rules(&self) -> &[usize] {
        &self.expanded_rules
    }

    pub fn stats(&self) -> LazyStats {
        self.stats
    }

    /// Head-free explanations returned so far for `target`, best first.
    pub fn found(&self, target: Target) -> &[Explanation] {
        &self.found[slot(target)]
    }

    pub fn is_exhausted(&self, target: Target) -> bool {
        self.exhausted[slot(target)]
    }

    /// Replaces each head by its rules. Defined atoms mentioned by the new
    /// rules that are not yet part of the lazy program become unexpanded.
    pub fn expand(&mut self, heads: &[AtomId]) -> Result<(), LazyError> {
        for &h in heads {
            if self.status(h) != AtomStatus::Unexpanded {
                return Err(LazyError::NotUnexpanded(self.index.atom(h).clone()));
            }
        }
        for &h in heads {
            if self.status(h) != AtomStatus::Unexpanded {
                continue; // listed twice
            }
            self.status[h.index()] = AtomStatus::Expanded;
            self.stats.expansions += 1;
            for &r in self.index.rules_for(h) {
                self.expanded_rules.push(r);
                for &(b, _) in &self.index.rules()[r].body {
                    if self.status[b.index()] == AtomStatus::Irrelevant {
                        self.status[b.index()] = AtomStatus::Unexpanded;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn expand_all(&mut self) {
        while !self.unexpanded_heads().is_empty() {
            let heads = self.unexpanded_heads();
            self.expand(&heads).expect("heads are unexpanded");
        }
    }

    /// Registers a head-free explanation so later searches on `target`
    /// exclude it and its supersets.
    pub fn record(&mut self, target: Target, e: Explanation) {
        debug_assert!(e.is_head_free());
        self.found[slot(target)].push(e);
    }

    pub fn next_explanation(&mut self, target: Target, deadline: Option<Instant>) -> NextOutcome {
        self.next_explanation_traced(target, deadline, &mut |_, _| {})
    }

    /// Searches the next-best explanation of `target`, expanding heads as
    /// needed. `trace` sees every inner solver call. A timeout records
    /// nothing; expansions already made are kept since they are valid for
    /// any later search.
    pub fn next_explanation_traced(
        &mut self,
        target: Target,
        deadline: Option<Instant>,
        trace: &mut dyn FnMut(&IterationRecord, &Encoding),
    ) -> NextOutcome {
        if self.is_exhausted(target) {
            return NextOutcome::Exhausted;
        }
        loop {
            let enc = encode_target(self, target);
            let mut solver = Solver::new(enc.instance.clone());
            let outcome = solver.solve(deadline);
            self.stats.solver_calls += 1;
            self.stats.solver_nodes += solver.stats().nodes;
            let iteration = self.stats.solver_calls;
            match outcome {
                SolveOutcome::Timeout { .. } => return NextOutcome::Timeout,
                SolveOutcome::Infeasible => {
                    trace(
                        &IterationRecord {
                            iteration,
                            target,
                            explanation: None,
                            expanded: Vec::new(),
                        },
                        &enc,
                    );
                    // The lazy program relaxes the full one and later
                    // expansions only add constraints, so this is final.
                    self.exhausted[slot(target)] = true;
                    return NextOutcome::Exhausted;
                }
                SolveOutcome::Optimal { model, .. } => {
                    let e = enc.decode(&model, &self.index);
                    let heads = e.head_atoms();
                    trace(
                        &IterationRecord {
                            iteration,
                            target,
                            explanation: Some(e.clone()),
                            expanded: heads.clone(),
                        },
                        &enc,
                    );
                    if heads.is_empty() {
                        self.record(target, e.clone());
                        return NextOutcome::Found(e);
                    }
                    self.expand(&heads).expect("decoded heads are unexpanded");
                }
            }
        }
    }
}
