//! Exact weighted partial MAX-SAT by branch and bound.
//!
//! Hard clauses must all hold; each variable carries a nonnegative cost that
//! is paid when it is assigned true. The solver minimizes total cost with a
//! depth-first search over variables in index order (false first), unit
//! propagation on the hard clauses, and a lower bound built from disjoint
//! propagation conflicts among the still-free costly variables.

mod wcnf;

use std::fmt;
use std::ops::Not;
use std::time::Instant;

pub use wcnf::{parse_wcnf, write_wcnf, WcnfError, WCNF_SCALE};

/// Costs closer than this are treated as equal.
pub const COST_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u32);

impl Var {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn pos(self) -> Lit {
        Lit(self.0 << 1)
    }

    #[inline]
    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Lit {
        Lit(self.0 << 1 | 1)
    }
}

/// A variable or its negation, packed as `2 * var + negated`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    #[inline]
    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    #[inline]
    pub fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    fn code(self) -> usize {
        self.0 as usize
    }

    /// Value of the literal under a total assignment.
    pub fn eval(self, model: &[bool]) -> bool {
        model[self.var().index()] != self.is_negated()
    }
}

impl Not for Lit {
    type Output = Lit;

    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_negated() {
            write!(f, "-{}", self.var().0 + 1)
        } else {
            write!(f, "{}", self.var().0 + 1)
        }
    }
}

pub type Clause = Vec<Lit>;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MaxSatInstance {
    costs: Vec<f64>,
    hard: Vec<Clause>,
}

impl MaxSatInstance {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a fresh variable whose true value costs `cost`.
    pub fn new_var(&mut self, cost: f64) -> Var {
        assert!(cost >= 0.0 && cost.is_finite(), "cost must be finite and nonnegative");
        self.costs.push(cost);
        Var(self.costs.len() as u32 - 1)
    }

    pub fn num_vars(&self) -> usize {
        self.costs.len()
    }

    pub fn cost(&self, v: Var) -> f64 {
        self.costs[v.index()]
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn hard(&self) -> &[Clause] {
        &self.hard
    }

    pub fn add_hard(&mut self, clause: Clause) {
        for l in &clause {
            assert!(l.var().index() < self.num_vars(), "clause mentions unknown variable");
        }
        self.hard.push(clause);
    }

    pub fn is_satisfied_by(&self, model: &[bool]) -> bool {
        self.hard.iter().all(|c| c.iter().any(|l| l.eval(model)))
    }

    pub fn model_cost(&self, model: &[bool]) -> f64 {
        model
            .iter()
            .zip(&self.costs)
            .filter(|(&v, _)| v)
            .map(|(_, &c)| c)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveOutcome {
    Optimal { model: Vec<bool>, cost: f64 },
    Infeasible,
    /// The deadline passed; carries the best assignment found so far.
    Timeout { best: Option<(Vec<bool>, f64)> },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub nodes: u64,
    pub conflicts: u64,
    pub improvements: u64,
}

/// An instance plus the search machinery. Clauses may be added between
/// solves; each call to [`Solver::solve`] searches from scratch.
#[derive(Debug, Clone)]
pub struct Solver {
    instance: MaxSatInstance,
    stats: SolveStats,
}

impl Solver {
    pub fn new(instance: MaxSatInstance) -> Self {
        Solver {
            instance,
            stats: SolveStats::default(),
        }
    }

    pub fn instance(&self) -> &MaxSatInstance {
        &self.instance
    }

    pub fn stats(&self) -> SolveStats {
        self.stats
    }

    pub fn new_var(&mut self, cost: f64) -> Var {
        self.instance.new_var(cost)
    }

    pub fn add_hard(&mut self, clause: Clause) {
        self.instance.add_hard(clause);
    }

    pub fn solve(&mut self, deadline: Option<Instant>) -> SolveOutcome {
        let mut search = Search::new(&self.instance, deadline);
        let outcome = search.run();
        self.stats = search.stats;
        outcome
    }
}

/// One-shot convenience wrapper.
pub fn solve(instance: &MaxSatInstance, deadline: Option<Instant>) -> SolveOutcome {
    Search::new(instance, deadline).run()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Reason {
    Decision,
    Assumption,
    Clause(u32),
}

const UNASSIGNED: i8 = 0;

struct Search<'a> {
    costs: &'a [f64],
    clauses: Vec<Clause>,
    /// Unit clauses and a flag for an empty clause, applied at the root.
    units: Vec<Lit>,
    trivially_unsat: bool,
    /// `watches[l]`: clauses watching literal `l`, visited when `l` turns false.
    watches: Vec<Vec<u32>>,
    /// `positive[v]`: clauses containing `v` unnegated.
    positive: Vec<Vec<u32>>,
    /// Per variable: 1 true, -1 false, 0 unassigned.
    value: Vec<i8>,
    reason: Vec<Reason>,
    trail_pos: Vec<u32>,
    trail: Vec<Lit>,
    qhead: usize,
    acc_cost: f64,
    incumbent: Option<(Vec<bool>, f64)>,
    deadline: Option<Instant>,
    timed_out: bool,
    stats: SolveStats,
    // scratch for the lower bound
    residual: Vec<f64>,
    scratch: Vec<Lit>,
    seen: Vec<bool>,
}

impl<'a> Search<'a> {
    fn new(inst: &'a MaxSatInstance, deadline: Option<Instant>) -> Self {
        let n = inst.num_vars();
        let mut s = Search {
            costs: &inst.costs,
            clauses: Vec::with_capacity(inst.hard.len()),
            units: Vec::new(),
            trivially_unsat: false,
            watches: vec![Vec::new(); 2 * n],
            positive: vec![Vec::new(); n],
            value: vec![UNASSIGNED; n],
            reason: vec![Reason::Decision; n],
            trail_pos: vec![0; n],
            trail: Vec::with_capacity(n),
            qhead: 0,
            acc_cost: 0.0,
            incumbent: None,
            deadline,
            timed_out: false,
            stats: SolveStats::default(),
            residual: inst.costs.clone(),
            scratch: Vec::with_capacity(n),
            seen: vec![false; n],
        };
        for clause in &inst.hard {
            let mut c = clause.clone();
            c.sort_unstable();
            c.dedup();
            if c.windows(2).any(|w| w[0] == !w[1]) {
                continue;
            }
            match c.len() {
                0 => s.trivially_unsat = true,
                1 => s.units.push(c[0]),
                _ => {
                    let ci = s.clauses.len() as u32;
                    s.watches[c[0].code()].push(ci);
                    s.watches[c[1].code()].push(ci);
                    for l in c.iter().filter(|l| !l.is_negated()) {
                        s.positive[l.var().index()].push(ci);
                    }
                    s.clauses.push(c);
                }
            }
        }
        s
    }

    #[inline]
    fn lit_value(&self, l: Lit) -> i8 {
        let v = self.value[l.var().index()];
        if l.is_negated() {
            -v
        } else {
            v
        }
    }

    fn enqueue(&mut self, l: Lit, reason: Reason) {
        let v = l.var().index();
        debug_assert_eq!(self.value[v], UNASSIGNED);
        self.value[v] = if l.is_negated() { -1 } else { 1 };
        self.reason[v] = reason;
        self.trail_pos[v] = self.trail.len() as u32;
        self.trail.push(l);
        if !l.is_negated() {
            self.acc_cost += self.costs[v];
        }
    }

    fn backtrack(&mut self, len: usize) {
        while self.trail.len() > len {
            let l = self.trail.pop().unwrap();
            let v = l.var().index();
            self.value[v] = UNASSIGNED;
            if !l.is_negated() {
                self.acc_cost -= self.costs[v];
            }
        }
        if self.trail.is_empty() {
            // keep accumulated rounding error from drifting across the search
            self.acc_cost = 0.0;
        }
        self.qhead = self.qhead.min(len);
    }

    /// Unit propagation; returns the index of a falsified clause on conflict.
    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let ci = ws[i];
                i += 1;
                let c = ci as usize;
                if self.clauses[c][0] == false_lit {
                    self.clauses[c].swap(0, 1);
                }
                let first = self.clauses[c][0];
                if self.lit_value(first) == 1 {
                    ws[j] = ci;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..self.clauses[c].len() {
                    let lk = self.clauses[c][k];
                    if self.lit_value(lk) != -1 {
                        self.clauses[c].swap(1, k);
                        self.watches[lk.code()].push(ci);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = ci;
                j += 1;
                if self.lit_value(first) == -1 {
                    conflict = Some(ci);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        i += 1;
                        j += 1;
                    }
                } else {
                    self.enqueue(first, Reason::Clause(ci));
                }
            }
            ws.truncate(j);
            self.watches[false_lit.code()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn run(&mut self) -> SolveOutcome {
        if self.trivially_unsat {
            return SolveOutcome::Infeasible;
        }
        for i in 0..self.units.len() {
            let u = self.units[i];
            match self.lit_value(u) {
                1 => {}
                -1 => return SolveOutcome::Infeasible,
                _ => self.enqueue(u, Reason::Decision),
            }
        }
        self.search();
        if self.timed_out {
            return SolveOutcome::Timeout {
                best: self.incumbent.take(),
            };
        }
        match self.incumbent.take() {
            Some((model, cost)) => SolveOutcome::Optimal { model, cost },
            None => SolveOutcome::Infeasible,
        }
    }

    fn out_of_time(&mut self) -> bool {
        if self.timed_out {
            return true;
        }
        if let Some(d) = self.deadline {
            if self.stats.nodes % 64 == 1 && Instant::now() >= d {
                self.timed_out = true;
            }
        }
        self.timed_out
    }

    fn search(&mut self) {
        self.stats.nodes += 1;
        if self.out_of_time() {
            return;
        }
        if self.propagate().is_some() {
            self.stats.conflicts += 1;
            return;
        }
        let bound = self.incumbent.as_ref().map_or(f64::INFINITY, |inc| inc.1);
        if self.acc_cost >= bound - COST_TOLERANCE {
            return;
        }
        if bound.is_finite() {
            let room = bound - COST_TOLERANCE - self.acc_cost;
            if self.core_bound(room) >= room {
                return;
            }
        }
        let Some(v) = self.value.iter().position(|&x| x == UNASSIGNED) else {
            let model: Vec<bool> = self.value.iter().map(|&x| x == 1).collect();
            self.stats.improvements += 1;
            self.incumbent = Some((model, self.acc_cost));
            return;
        };
        let v = Var(v as u32);
        let mark = self.trail.len();
        self.enqueue(v.neg(), Reason::Decision);
        self.search();
        self.backtrack(mark);
        if self.timed_out || !self.needed(v) {
            return;
        }
        self.enqueue(v.pos(), Reason::Decision);
        self.search();
        self.backtrack(mark);
    }

    /// Whether some clause could still rely on `v` being true. If not,
    /// flipping `v` to false in any completion keeps it feasible, costs no
    /// more and is lexicographically smaller, so the true branch can go.
    fn needed(&self, v: Var) -> bool {
        self.positive[v.index()].iter().any(|&ci| {
            !self.clauses[ci as usize]
                .iter()
                .any(|&l| l.var() != v && self.lit_value(l) == 1)
        })
    }

    /// Lower bound on the extra cost any completion of the current partial
    /// assignment must pay. Repeatedly assumes every free variable with
    /// residual cost false; a propagation conflict yields a core of
    /// assumptions, one of which must be true. The core's cheapest residual
    /// cost is added to the bound and subtracted from every member, so no
    /// cost is counted twice. Stops early once `limit` is reached.
    fn core_bound(&mut self, limit: f64) -> f64 {
        let mark = self.trail.len();
        let mut touched = Vec::new();
        let mut lb = 0.0;
        loop {
            let mut assumptions = std::mem::take(&mut self.scratch);
            assumptions.clear();
            assumptions.extend(
                (0..self.value.len())
                    .filter(|&v| self.value[v] == UNASSIGNED && self.residual[v] > COST_TOLERANCE)
                    .map(|v| Var(v as u32).neg()),
            );
            let found = if assumptions.is_empty() {
                None
            } else {
                self.assume_and_analyze(&assumptions, mark)
            };
            self.scratch = assumptions;
            let Some(mut core) = found else {
                break;
            };
            self.minimize_core(&mut core, mark);
            let step = core
                .iter()
                .map(|v| self.residual[v.index()])
                .fold(f64::INFINITY, f64::min);
            lb += step;
            for &v in &core {
                self.residual[v.index()] -= step;
                touched.push(v);
            }
            if lb >= limit {
                break;
            }
        }
        for v in touched {
            self.residual[v.index()] = self.costs[v.index()];
        }
        lb
    }

    /// Enqueues `assumptions`, propagates, and on conflict returns the
    /// assumption variables the conflict depends on. Always restores the
    /// trail to `mark`.
    fn assume_and_analyze(&mut self, assumptions: &[Lit], mark: usize) -> Option<Vec<Var>> {
        for &a in assumptions {
            if self.lit_value(a) == UNASSIGNED {
                self.enqueue(a, Reason::Assumption);
            }
        }
        let conflict = self.propagate();
        let core = conflict.map(|ci| self.analyze(ci, mark));
        self.backtrack(mark);
        core
    }

    fn conflicts_under(&mut self, assumptions: &[Lit], mark: usize) -> bool {
        for &a in assumptions {
            if self.lit_value(a) == UNASSIGNED {
                self.enqueue(a, Reason::Assumption);
            }
        }
        let conflict = self.propagate().is_some();
        self.backtrack(mark);
        conflict
    }

    fn analyze(&mut self, conflict: u32, mark: usize) -> Vec<Var> {
        let mut core = Vec::new();
        let mut stack: Vec<Lit> = self.clauses[conflict as usize].clone();
        let mut touched = Vec::new();
        while let Some(l) = stack.pop() {
            let v = l.var().index();
            if self.seen[v] || (self.trail_pos[v] as usize) < mark {
                continue;
            }
            self.seen[v] = true;
            touched.push(v);
            match self.reason[v] {
                Reason::Assumption => core.push(Var(v as u32)),
                Reason::Clause(c) => stack.extend(self.clauses[c as usize].iter().copied()),
                Reason::Decision => {}
            }
        }
        for v in touched {
            self.seen[v] = false;
        }
        core.sort();
        core
    }

    /// Drops core members that are not needed for the conflict, trying the
    /// cheapest first so the surviving minimum cost is as high as possible.
    fn minimize_core(&mut self, core: &mut Vec<Var>, mark: usize) {
        if core.len() <= 1 {
            return;
        }
        let mut order = core.clone();
        order.sort_by(|a, b| {
            self.residual[a.index()]
                .partial_cmp(&self.residual[b.index()])
                .unwrap()
                .then(a.cmp(b))
        });
        let mut kept: Vec<Var> = order;
        let mut i = 0;
        while i < kept.len() && kept.len() > 1 {
            let trial: Vec<Lit> = kept
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, v)| v.neg())
                .collect();
            if self.conflicts_under(&trial, mark) {
                kept.remove(i);
            } else {
                i += 1;
            }
        }
        kept.sort();
        *core = kept;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimum(outcome: &SolveOutcome) -> (Vec<bool>, f64) {
        match outcome {
            SolveOutcome::Optimal { model, cost } => (model.clone(), *cost),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn forced_single() {
        let mut inst = MaxSatInstance::new();
        let a = inst.new_var(-(0.8f64).ln());
        inst.add_hard(vec![a.pos()]);
        let (model, cost) = optimum(&solve(&inst, None));
        assert_eq!(model, vec![true]);
        assert!((cost - 0.2231435513142097).abs() < 1e-12);
    }

    #[test]
    fn cheaper_disjunct() {
        let mut inst = MaxSatInstance::new();
        let a = inst.new_var(-(0.8f64).ln());
        let b = inst.new_var(-(0.5f64).ln());
        inst.add_hard(vec![a.pos(), b.pos()]);
        let (model, cost) = optimum(&solve(&inst, None));
        assert_eq!(model, vec![true, false]);
        assert!((cost + (0.8f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn contradiction() {
        let mut inst = MaxSatInstance::new();
        let x = inst.new_var(0.0);
        inst.add_hard(vec![x.pos()]);
        inst.add_hard(vec![x.neg()]);
        assert_eq!(solve(&inst, None), SolveOutcome::Infeasible);
        let mut inst = MaxSatInstance::new();
        inst.new_var(1.0);
        inst.add_hard(vec![]);
        assert_eq!(solve(&inst, None), SolveOutcome::Infeasible);
    }

    #[test]
    fn incremental_tautology_keeps_optimum() {
        let mut inst = MaxSatInstance::new();
        let a = inst.new_var(1.0);
        let b = inst.new_var(2.0);
        inst.add_hard(vec![a.pos(), b.pos()]);
        let mut s = Solver::new(inst);
        let first = s.solve(None);
        s.add_hard(vec![a.pos(), a.neg()]);
        assert_eq!(s.solve(None), first);
        s.add_hard(vec![a.neg()]);
        let (model, cost) = optimum(&s.solve(None));
        assert_eq!(model, vec![false, true]);
        assert_eq!(cost, 2.0);
    }

    #[test]
    fn ties_prefer_lexicographically_smallest() {
        let mut inst = MaxSatInstance::new();
        let a = inst.new_var(1.0);
        let b = inst.new_var(1.0);
        let c = inst.new_var(1.0);
        inst.add_hard(vec![a.pos(), b.pos(), c.pos()]);
        let (model, _) = optimum(&solve(&inst, None));
        assert_eq!(model, vec![false, false, true]);
    }

    #[test]
    fn expired_deadline_times_out() {
        let mut inst = MaxSatInstance::new();
        let a = inst.new_var(1.0);
        inst.add_hard(vec![a.pos()]);
        let past = Instant::now() - std::time::Duration::from_secs(1);
        assert!(matches!(
            solve(&inst, Some(past)),
            SolveOutcome::Timeout { best: None }
        ));
    }
}
