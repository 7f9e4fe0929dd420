use std::collections::HashSet;
use std::fmt;

use super::{Atom, GroundProgram, ProgramIndex};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// An atom is declared as a probabilistic fact and also heads a rule.
    FactAlsoDefined(Atom),
    /// Defined atoms depending positively on each other in a cycle.
    PositiveCycle(Vec<Atom>),
    /// `\+atom` where `atom` is not a probabilistic fact.
    NegatedDefinedAtom { rule: usize, atom: Atom },
    /// A `query(...)` names an atom that occurs nowhere else.
    UndefinedQuery(Atom),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::FactAlsoDefined(a) => {
                write!(f, "`{a}` is both a probabilistic fact and a rule head")
            }
            Violation::PositiveCycle(atoms) => {
                let names: Vec<String> = atoms.iter().map(|a| a.to_string()).collect();
                write!(f, "positive cycle among {{{}}}", names.join(", "))
            }
            Violation::NegatedDefinedAtom { rule, atom } => write!(
                f,
                "rule {} negates defined atom `{atom}`; negation is only supported on probabilistic facts",
                rule + 1
            ),
            Violation::UndefinedQuery(a) => {
                write!(f, "query `{a}` is neither a fact nor mentioned by any rule")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Collects every structural problem in `program`. Never fails.
pub fn validate(program: &GroundProgram) -> ValidationReport {
    let mut violations = Vec::new();
    let facts: HashSet<&Atom> = program.facts.iter().map(|f| &f.atom).collect();

    let mut reported = HashSet::new();
    for rule in &program.rules {
        if facts.contains(&rule.head) && reported.insert(&rule.head) {
            violations.push(Violation::FactAlsoDefined(rule.head.clone()));
        }
    }

    for (i, rule) in program.rules.iter().enumerate() {
        for lit in &rule.body {
            if !lit.positive && !facts.contains(&lit.atom) {
                violations.push(Violation::NegatedDefinedAtom {
                    rule: i,
                    atom: lit.atom.clone(),
                });
            }
        }
    }

    for comp in positive_cycles(program, &facts) {
        violations.push(Violation::PositiveCycle(comp));
    }

    for q in &program.queries {
        let known = facts.contains(q)
            || program
                .rules
                .iter()
                .any(|r| &r.head == q || r.body.iter().any(|l| &l.atom == q));
        if !known {
            violations.push(Violation::UndefinedQuery(q.clone()));
        }
    }

    ValidationReport { violations }
}

/// Strongly connected components of the head→body dependency graph that
/// contain a cycle. Fact atoms are excluded, so `{0.5::a; a :- a}` is
/// reported only as a fact/head overlap.
fn positive_cycles(program: &GroundProgram, facts: &HashSet<&Atom>) -> Vec<Vec<Atom>> {
    let idx = ProgramIndex::new(program);
    let n = idx.num_atoms();
    let is_defined = |a: usize| !facts.contains(idx.atom(super::AtomId(a as u32)));
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut self_loop = vec![false; n];
    for rule in idx.rules() {
        let h = rule.head.index();
        if !is_defined(h) {
            continue;
        }
        for &(b, _) in &rule.body {
            let b = b.index();
            if is_defined(b) {
                succ[h].push(b);
                if b == h {
                    self_loop[h] = true;
                }
            }
        }
    }

    let comps = tarjan(&succ);
    let mut out = Vec::new();
    for comp in comps {
        if comp.len() > 1 || self_loop[comp[0]] {
            let mut atoms: Vec<Atom> = comp
                .iter()
                .map(|&a| idx.atom(super::AtomId(a as u32)).clone())
                .collect();
            atoms.sort();
            out.push(atoms);
        }
    }
    out.sort();
    out
}

fn tarjan(succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    struct St<'a> {
        succ: &'a [Vec<usize>],
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        comps: Vec<Vec<usize>>,
    }
    fn visit(st: &mut St, v: usize) {
        st.index[v] = Some(st.next);
        st.low[v] = st.next;
        st.next += 1;
        st.stack.push(v);
        st.on_stack[v] = true;
        for i in 0..st.succ[v].len() {
            let w = st.succ[v][i];
            match st.index[w] {
                None => {
                    visit(st, w);
                    st.low[v] = st.low[v].min(st.low[w]);
                }
                Some(iw) if st.on_stack[w] => st.low[v] = st.low[v].min(iw),
                _ => {}
            }
        }
        if Some(st.low[v]) == st.index[v] {
            let mut comp = Vec::new();
            loop {
                let w = st.stack.pop().unwrap();
                st.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            st.comps.push(comp);
        }
    }
    let n = succ.len();
    let mut st = St {
        succ,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        comps: Vec::new(),
    };
    for v in 0..n {
        if st.index[v].is_none() {
            visit(&mut st, v);
        }
    }
    st.comps
}
