//! Ground probabilistic logic programs: probabilistic facts, rules and queries.
//!
//! Programs are written in a small ProbLog-like syntax:
//!
//! ```text
//! % edges
//! 0.8::e(1,2).
//! p(1,4) :- e(1,2), p(2,4).
//! query(p(1,4)).
//! ```

mod index;
mod normalize;
mod parse;
mod validate;

use std::fmt;

pub use index::{AtomId, IndexedRule, ProgramIndex};
pub use normalize::normalize;
pub use parse::{parse_program, ParseError};
pub use validate::{validate, ValidationReport, Violation};

/// A ground atom such as `e(1,2)` or `alarm`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub name: String,
    pub args: Vec<String>,
}

impl Atom {
    pub fn new(name: impl Into<String>, args: &[&str]) -> Self {
        Atom {
            name: name.into(),
            args: args.iter().map(|a| a.to_string()).collect(),
        }
    }

    /// A zero-arity atom.
    pub fn constant(name: impl Into<String>) -> Self {
        Atom {
            name: name.into(),
            args: Vec::new(),
        }
    }

    /// Parses a single atom, e.g. the value of a `--query` flag.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parse::parse_atom(text)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.args.is_empty() {
            write!(f, "({})", self.args.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal {
            atom,
            positive: true,
        }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal {
            atom,
            positive: false,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("\\+")?;
        }
        write!(f, "{}", self.atom)
    }
}

/// `prob::atom.`
#[derive(Debug, Clone, PartialEq)]
pub struct ProbFact {
    pub atom: Atom,
    pub prob: f64,
}

/// `head :- body.` An empty body makes `head` unconditionally true.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub head: Atom,
    pub body: Vec<Literal>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundProgram {
    pub facts: Vec<ProbFact>,
    pub rules: Vec<Rule>,
    pub queries: Vec<Atom>,
}

impl GroundProgram {
    pub fn is_empty(&self) -> bool {
        self.facts.is_empty() && self.rules.is_empty() && self.queries.is_empty()
    }

    pub fn fact(&self, atom: &Atom) -> Option<&ProbFact> {
        self.facts.iter().find(|f| &f.atom == atom)
    }

    /// True if `atom` occurs anywhere: as a fact, a rule head, a body
    /// literal or a query.
    pub fn mentions(&self, atom: &Atom) -> bool {
        self.facts.iter().any(|f| &f.atom == atom)
            || self.queries.iter().any(|q| q == atom)
            || self.rules.iter().any(|r| {
                &r.head == atom || r.body.iter().any(|l| &l.atom == atom)
            })
    }
}

impl fmt::Display for GroundProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for fact in &self.facts {
            writeln!(f, "{}::{}.", fact.prob, fact.atom)?;
        }
        for rule in &self.rules {
            if rule.body.is_empty() {
                writeln!(f, "{}.", rule.head)?;
            } else {
                let body: Vec<String> = rule.body.iter().map(|l| l.to_string()).collect();
                writeln!(f, "{} :- {}.", rule.head, body.join(", "))?;
            }
        }
        for q in &self.queries {
            writeln!(f, "query({}).", q)?;
        }
        Ok(())
    }
}

/// A small reachability example: paths 1→2→4 and
/// 1→3→4 with query `p(1,4)`.
pub const TOY_PROGRAM: &str = "\
p(1,4) :- e(1,2), p(2,4).
p(2,4) :- e(2,4).
p(1,4) :- e(1,3), p(3,4).
p(3,4) :- e(3,4).
0.8::e(1,2).
0.1::e(1,3).
0.5::e(2,4).
0.4::e(3,4).
query(p(1,4)).
";
