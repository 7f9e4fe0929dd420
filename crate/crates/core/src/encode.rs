//! Translation of a lazy program and a target (`q` or `¬q`) into weighted
//! partial MAX-SAT.
//!
//! Selector variables, allocated per atom in atom-id order:
//!
//! * probabilistic fact `f`: `true(f)` with cost `-ln p(f)` and `false(f)`
//!   with cost `-ln (1 - p(f))`;
//! * unexpanded head `h`: `true(h)` and `false(h)`, both free;
//! * expanded defined atom `d`: `derivable(d)` and `blocked(d)`, both free.
//!
//! Rule bodies with two or more literals get a free auxiliary variable
//! implying every body literal. `derivable(d)` needs one supported rule
//! body, `blocked(d)` needs every rule body to contain a refuted literal.
//! Both directions are monotone, so the fact literals chosen by any model
//! decide the target in every world that extends them.

use std::fmt;

use crate::lazy::{AtomStatus, LazyState};
use crate::maxsat::{Clause, Lit, MaxSatInstance, Var};
use crate::program::{Atom, AtomId, ProgramIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    /// Explanations of the query: lower bound.
    Query,
    /// Explanations of the negated query: upper bound.
    Negation,
}

impl Target {
    pub fn other(self) -> Target {
        match self {
            Target::Query => Target::Negation,
            Target::Negation => Target::Query,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Query => "q",
            Target::Negation => "not_q",
        })
    }
}

/// A partial assignment to probabilistic facts (and, before expansion is
/// complete, to unexpanded heads) under which the target holds.
#[derive(Debug, Clone, PartialEq)]
pub struct Explanation {
    /// Fact literals `(atom, value)` in atom-id order.
    pub facts: Vec<(AtomId, bool)>,
    /// Unexpanded heads the solver assigned, with their value.
    pub heads: Vec<(AtomId, bool)>,
    /// Sum of the negative log-probabilities of the fact literals.
    pub cost: f64,
    /// Product of the fact-literal probabilities; heads contribute 1.
    pub probability: f64,
}

impl Explanation {
    pub fn is_head_free(&self) -> bool {
        self.heads.is_empty()
    }

    pub fn literals(&self, index: &ProgramIndex) -> Vec<(Atom, bool)> {
        self.facts
            .iter()
            .map(|&(a, v)| (index.atom(a).clone(), v))
            .collect()
    }

    pub fn head_atoms(&self) -> Vec<AtomId> {
        self.heads.iter().map(|h| h.0).collect()
    }

    /// `{e(1,2), \+e(1,3), p(2,4)}`-style rendering.
    pub fn render(&self, index: &ProgramIndex) -> String {
        let mut parts: Vec<(AtomId, bool)> = self.facts.clone();
        parts.extend(self.heads.iter().copied());
        parts.sort();
        let items: Vec<String> = parts
            .iter()
            .map(|&(a, v)| {
                if v {
                    index.atom(a).to_string()
                } else {
                    format!("\\+{}", index.atom(a))
                }
            })
            .collect();
        format!("{{{}}}", items.join(", "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    ChooseTrue(AtomId),
    ChooseFalse(AtomId),
    Derivable(AtomId),
    Blocked(AtomId),
    /// Auxiliary for the body of the rule with this index.
    RuleBody(usize),
}

/// A MAX-SAT instance together with the meaning of its variables.
#[derive(Debug, Clone)]
pub struct Encoding {
    pub instance: MaxSatInstance,
    pub target: Target,
    selectors: Vec<Selector>,
    /// Per atom: (first, second) variable of its pair, if allocated.
    pairs: Vec<Option<(Var, Var)>>,
    status: Vec<AtomStatus>,
}

impl Encoding {
    pub fn selector(&self, v: Var) -> Selector {
        self.selectors[v.index()]
    }

    pub fn choose_true(&self, a: AtomId) -> Option<Var> {
        match self.status[a.index()] {
            AtomStatus::Fact | AtomStatus::Unexpanded => self.pairs[a.index()].map(|p| p.0),
            _ => None,
        }
    }

    pub fn choose_false(&self, a: AtomId) -> Option<Var> {
        match self.status[a.index()] {
            AtomStatus::Fact | AtomStatus::Unexpanded => self.pairs[a.index()].map(|p| p.1),
            _ => None,
        }
    }

    pub fn derivable(&self, a: AtomId) -> Option<Var> {
        match self.status[a.index()] {
            AtomStatus::Expanded => self.pairs[a.index()].map(|p| p.0),
            _ => None,
        }
    }

    pub fn blocked(&self, a: AtomId) -> Option<Var> {
        match self.status[a.index()] {
            AtomStatus::Expanded => self.pairs[a.index()].map(|p| p.1),
            _ => None,
        }
    }

    /// Literal meaning "the body literal `(atom, positive)` holds in every
    /// extension".
    fn support_lit(&self, atom: AtomId, positive: bool) -> Lit {
        let (t, f) = self.pairs[atom.index()].expect("body atom has selectors");
        if positive {
            t.pos()
        } else {
            f.pos()
        }
    }

    /// Literal meaning "the body literal `(atom, positive)` fails in every
    /// extension".
    fn refute_lit(&self, atom: AtomId, positive: bool) -> Lit {
        self.support_lit(atom, !positive)
    }

    /// `∨ ¬selector(l)` over the explanation's fact literals: forbids the
    /// explanation and all of its supersets.
    pub fn blocking_clause(&self, e: &Explanation) -> Clause {
        e.facts
            .iter()
            .map(|&(a, v)| {
                let var = if v {
                    self.choose_true(a)
                } else {
                    self.choose_false(a)
                };
                var.expect("blocking clause over a fact atom").neg()
            })
            .collect()
    }

    /// Reads the explanation chosen by a model of the hard clauses.
    pub fn decode(&self, model: &[bool], index: &ProgramIndex) -> Explanation {
        let mut facts = Vec::new();
        let mut heads = Vec::new();
        let mut cost = 0.0;
        let mut probability = 1.0;
        for (i, status) in self.status.iter().enumerate() {
            let Some((t, f)) = self.pairs[i] else { continue };
            let a = AtomId(i as u32);
            let value = if model[t.index()] {
                true
            } else if model[f.index()] {
                false
            } else {
                continue;
            };
            match status {
                AtomStatus::Fact => {
                    let p = index.prob(a).unwrap();
                    facts.push((a, value));
                    if value {
                        cost += self.instance.cost(t);
                        probability *= p;
                    } else {
                        cost += self.instance.cost(f);
                        probability *= 1.0 - p;
                    }
                }
                AtomStatus::Unexpanded => heads.push((a, value)),
                _ => {}
            }
        }
        Explanation {
            facts,
            heads,
            cost,
            probability,
        }
    }

    /// Human-readable names for WCNF comments.
    pub fn describe(&self, index: &ProgramIndex) -> Vec<String> {
        self.selectors
            .iter()
            .enumerate()
            .map(|(v, s)| {
                let name = match *s {
                    Selector::ChooseTrue(a) => format!("true({})", index.atom(a)),
                    Selector::ChooseFalse(a) => format!("false({})", index.atom(a)),
                    Selector::Derivable(a) => format!("derivable({})", index.atom(a)),
                    Selector::Blocked(a) => format!("blocked({})", index.atom(a)),
                    Selector::RuleBody(r) => format!("body(rule {})", r + 1),
                };
                format!("var {} = {}", v + 1, name)
            })
            .collect()
    }
}

/// Builds the MAX-SAT instance for `target` over the current lazy program,
/// including the blocking clauses recorded for that target.
pub fn encode_target(ls: &LazyState, target: Target) -> Encoding {
    let index = ls.index();
    let n = index.num_atoms();
    let mut enc = Encoding {
        instance: MaxSatInstance::new(),
        target,
        selectors: Vec::new(),
        pairs: vec![None; n],
        status: (0..n).map(|i| ls.status(AtomId(i as u32))).collect(),
    };

    // Structural variables first, so the search branches on which rules
    // to use before it branches on fact choices.
    for a in index.atom_ids() {
        if enc.status[a.index()] == AtomStatus::Expanded {
            let d = enc.instance.new_var(0.0);
            let b = enc.instance.new_var(0.0);
            enc.selectors.push(Selector::Derivable(a));
            enc.selectors.push(Selector::Blocked(a));
            enc.pairs[a.index()] = Some((d, b));
        }
    }
    let mut body_aux: Vec<Option<Var>> = vec![None; index.rules().len()];
    for a in index.atom_ids() {
        if enc.status[a.index()] != AtomStatus::Expanded {
            continue;
        }
        for &r in index.rules_for(a) {
            if index.rules()[r].body.len() >= 2 {
                body_aux[r] = Some(enc.instance.new_var(0.0));
                enc.selectors.push(Selector::RuleBody(r));
            }
        }
    }
    for a in index.atom_ids() {
        let costs = match enc.status[a.index()] {
            AtomStatus::Fact => {
                let p = index.prob(a).unwrap();
                (-p.ln(), -(1.0 - p).ln())
            }
            AtomStatus::Unexpanded => (0.0, 0.0),
            AtomStatus::Expanded | AtomStatus::Irrelevant => continue,
        };
        let t = enc.instance.new_var(costs.0);
        let f = enc.instance.new_var(costs.1);
        enc.selectors.push(Selector::ChooseTrue(a));
        enc.selectors.push(Selector::ChooseFalse(a));
        enc.pairs[a.index()] = Some((t, f));
    }

    // (a) never both values
    for a in index.atom_ids() {
        if matches!(
            enc.status[a.index()],
            AtomStatus::Fact | AtomStatus::Unexpanded
        ) {
            let (t, f) = enc.pairs[a.index()].unwrap();
            enc.instance.add_hard(vec![t.neg(), f.neg()]);
        }
    }

    // (b) support and (c) refutation of expanded atoms
    for a in index.atom_ids() {
        if enc.status[a.index()] != AtomStatus::Expanded {
            continue;
        }
        let (derivable, blocked) = enc.pairs[a.index()].unwrap();
        let rules = index.rules_for(a);
        let unconditional = rules.iter().any(|&r| index.rules()[r].body.is_empty());
        if !unconditional {
            let mut support = vec![derivable.neg()];
            for &r in rules {
                let body = &index.rules()[r].body;
                match body_aux[r] {
                    Some(aux) => {
                        for &(b, pos) in body {
                            let l = enc.support_lit(b, pos);
                            enc.instance.add_hard(vec![aux.neg(), l]);
                        }
                        support.push(aux.pos());
                    }
                    None => support.push(enc.support_lit(body[0].0, body[0].1)),
                }
            }
            enc.instance.add_hard(support);
        }
        for &r in rules {
            let mut refute = vec![blocked.neg()];
            for &(b, pos) in &index.rules()[r].body {
                refute.push(enc.refute_lit(b, pos));
            }
            enc.instance.add_hard(refute);
        }
    }

    // (d) the target itself
    let (first, second) = enc.pairs[ls.query().index()].expect("query has selectors");
    enc.instance.add_hard(vec![match target {
        Target::Query => first.pos(),
        Target::Negation => second.pos(),
    }]);

    // (e) previously found explanations
    for e in ls.found(target) {
        let clause = enc.blocking_clause(e);
        enc.instance.add_hard(clause);
    }

    enc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lazy::LazyState;
    use crate::maxsat::{solve, SolveOutcome};
    use crate::program::{parse_program, Atom, TOY_PROGRAM};

    fn toy_state() -> LazyState {
        let p = parse_program(TOY_PROGRAM).unwrap();
        LazyState::new(&p, &Atom::new("p", &["1", "4"])).unwrap()
    }

    fn optimum(enc: &Encoding, ls: &LazyState) -> Explanation {
        match solve(&enc.instance, None) {
            SolveOutcome::Optimal { model, cost } => {
                let e = enc.decode(&model, ls.index());
                assert!((e.cost - cost).abs() < 1e-12);
                e
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn initial_lazy_program_only_needs_the_head() {
        let ls = toy_state();
        let enc = encode_target(&ls, Target::Query);
        let e = optimum(&enc, &ls);
        assert_eq!(e.cost, 0.0);
        assert_eq!(e.probability, 1.0);
        assert!(e.facts.is_empty());
        assert_eq!(e.render(ls.index()), "{p(1,4)}");
    }

    #[test]
    fn fully_expanded_optima() {
        let mut ls = toy_state();
        ls.expand_all();
        let enc = encode_target(&ls, Target::Query);
        let e = optimum(&enc, &ls);
        assert_eq!(e.render(ls.index()), "{e(1,2), e(2,4)}");
        assert!((e.cost - 0.916290731874155).abs() < 1e-12);
        assert!((e.probability - 0.4).abs() < 1e-12);
        assert!(((-e.cost).exp() - e.probability).abs() < 1e-9);

        let enc = encode_target(&ls, Target::Negation);
        let e = optimum(&enc, &ls);
        assert_eq!(e.render(ls.index()), "{\\+e(1,3), \\+e(2,4)}");
        assert!((e.cost - 0.7985076962177716).abs() < 1e-12);
        assert!((e.probability - 0.45).abs() < 1e-12);
    }

    #[test]
    fn blocking_clause_shape() {
        let mut ls = toy_state();
        ls.expand_all();
        let enc = encode_target(&ls, Target::Query);
        let e = optimum(&enc, &ls);
        let clause = enc.blocking_clause(&e);
        let e12 = ls.index().id(&Atom::new("e", &["1", "2"])).unwrap();
        let e24 = ls.index().id(&Atom::new("e", &["2", "4"])).unwrap();
        assert_eq!(
            clause,
            vec![
                enc.choose_true(e12).unwrap().neg(),
                enc.choose_true(e24).unwrap().neg()
            ]
        );
        let single = Explanation {
            facts: vec![(e12, true)],
            heads: vec![],
            cost: 0.0,
            probability: 0.8,
        };
        assert_eq!(
            enc.blocking_clause(&single),
            vec![enc.choose_true(e12).unwrap().neg()]
        );
    }

    #[test]
    fn blocking_both_explanations_is_infeasible() {
        let mut ls = toy_state();
        ls.expand_all();
        let first = optimum(&encode_target(&ls, Target::Query), &ls);
        ls.record(Target::Query, first);
        let second = optimum(&encode_target(&ls, Target::Query), &ls);
        assert_eq!(second.render(ls.index()), "{e(1,3), e(3,4)}");
        assert!((second.cost + (0.04f64).ln()).abs() < 1e-12);
        ls.record(Target::Query, second);
        assert_eq!(
            solve(&encode_target(&ls, Target::Query).instance, None),
            SolveOutcome::Infeasible
        );
    }

    #[test]
    fn fact_query() {
        let p = parse_program("0.3::a. 0.6::b.").unwrap();
        let ls = LazyState::new(&p, &Atom::constant("b")).unwrap();
        let enc = encode_target(&ls, Target::Query);
        let e = optimum(&enc, &ls);
        assert_eq!(e.render(ls.index()), "{b}");
        let e = optimum(&encode_target(&ls, Target::Negation), &ls);
        assert_eq!(e.render(ls.index()), "{\\+b}");
        assert!((e.probability - 0.4).abs() < 1e-12);
    }

    #[test]
    fn costs_follow_probabilities() {
        let mut ls = toy_state();
        ls.expand_all();
        let enc = encode_target(&ls, Target::Query);
        for v in 0..enc.instance.num_vars() {
            let v = Var(v as u32);
            let c = enc.instance.cost(v);
            match enc.selector(v) {
                Selector::ChooseTrue(a) => {
                    assert!((c + ls.index().prob(a).unwrap().ln()).abs() < 1e-15)
                }
                Selector::ChooseFalse(a) => {
                    assert!((c + (1.0 - ls.index().prob(a).unwrap()).ln()).abs() < 1e-15)
                }
                _ => assert_eq!(c, 0.0),
            }
        }
    }
}
