//! Weighted model counting of explanation disjunctions with a reduced
//! ordered BDD.
//!
//! Variables are fact positions (declaration order), fixed for the run.
//! Nodes are hash-consed in a unique table and disjunction is memoized, so
//! overlapping explanations are counted exactly.

use std::collections::HashMap;
use std::fmt::Write as _;

/// Node handle. `FALSE` and `TRUE` are the terminals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub const FALSE: NodeId = NodeId(0);
    pub const TRUE: NodeId = NodeId(1);

    pub fn is_terminal(self) -> bool {
        self.0 < 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Node {
    var: u32,
    lo: NodeId,
    hi: NodeId,
}

#[derive(Debug, Clone, Default)]
pub struct Bdd {
    nodes: Vec<Node>,
    unique: HashMap<Node, NodeId>,
    or_cache: HashMap<(NodeId, NodeId), NodeId>,
}

impl Bdd {
    pub fn new() -> Self {
        let terminal = Node {
            var: u32::MAX,
            lo: NodeId::FALSE,
            hi: NodeId::FALSE,
        };
        Bdd {
            nodes: vec![terminal, terminal],
            unique: HashMap::new(),
            or_cache: HashMap::new(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    fn var_of(&self, n: NodeId) -> u32 {
        self.nodes[n.0 as usize].var
    }

    fn mk(&mut self, var: u32, lo: NodeId, hi: NodeId) -> NodeId {
        if lo == hi {
            return lo;
        }
        let node = Node { var, lo, hi };
        if let Some(&id) = self.unique.get(&node) {
            return id;
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(node);
        self.unique.insert(node, id);
        id
    }

    /// Conjunction of `(var, value)` literals. Contradictory literals give
    /// `FALSE`.
    pub fn cube(&mut self, literals: &[(u32, bool)]) -> NodeId {
        let mut lits = literals.to_vec();
        lits.sort();
        lits.dedup();
        if lits.windows(2).any(|w| w[0].0 == w[1].0) {
            return NodeId::FALSE;
        }
        let mut acc = NodeId::TRUE;
        for &(var, value) in lits.iter().rev() {
            acc = if value {
                self.mk(var, NodeId::FALSE, acc)
            } else {
                self.mk(var, acc, NodeId::FALSE)
            };
        }
        acc
    }

    pub fn or(&mut self, a: NodeId, b: NodeId) -> NodeId {
        if a == NodeId::TRUE || b == NodeId::TRUE {
            return NodeId::TRUE;
        }
        if a == NodeId::FALSE || a == b {
            return b;
        }
        if b == NodeId::FALSE {
            return a;
        }
        let key = if a < b { (a, b) } else { (b, a) };
        if let Some(&r) = self.or_cache.get(&key) {
            return r;
        }
        let (va, vb) = (self.var_of(a), self.var_of(b));
        let var = va.min(vb);
        let (alo, ahi) = self.cofactors(a, var);
        let (blo, bhi) = self.cofactors(b, var);
        let lo = self.or(alo, blo);
        let hi = self.or(ahi, bhi);
        let r = self.mk(var, lo, hi);
        self.or_cache.insert(key, r);
        r
    }

    fn cofactors(&self, n: NodeId, var: u32) -> (NodeId, NodeId) {
        if n.is_terminal() || self.var_of(n) != var {
            (n, n)
        } else {
            let node = self.nodes[n.0 as usize];
            (node.lo, node.hi)
        }
    }

    /// Σ over satisfying assignments of Π literal probabilities, where
    /// `probs[v]` is the probability that variable `v` is true.
    pub fn weighted_count(&self, root: NodeId, probs: &[f64]) -> f64 {
        let mut memo: HashMap<NodeId, f64> = HashMap::new();
        self.count_rec(root, probs, &mut memo)
    }

    fn count_rec(&self, n: NodeId, probs: &[f64], memo: &mut HashMap<NodeId, f64>) -> f64 {
        match n {
            NodeId::FALSE => return 0.0,
            NodeId::TRUE => return 1.0,
            _ => {}
        }
        if let Some(&c) = memo.get(&n) {
            return c;
        }
        let node = self.nodes[n.0 as usize];
        let p = probs[node.var as usize];
        let c = p * self.count_rec(node.hi, probs, memo)
            + (1.0 - p) * self.count_rec(node.lo, probs, memo);
        memo.insert(n, c);
        c
    }

    pub fn eval(&self, root: NodeId, assignment: &[bool]) -> bool {
        let mut n = root;
        while !n.is_terminal() {
            let node = self.nodes[n.0 as usize];
            n = if assignment[node.var as usize] {
                node.hi
            } else {
                node.lo
            };
        }
        n == NodeId::TRUE
    }

    /// Graphviz rendering; `label(v)` names variable `v`.
    pub fn to_dot(&self, root: NodeId, label: &dyn Fn(u32) -> String) -> String {
        let mut out = String::from("digraph bdd {\n  n0 [shape=box,label=\"0\"];\n  n1 [shape=box,label=\"1\"];\n");
        let mut stack = vec![root];
        let mut seen = std::collections::HashSet::new();
        while let Some(n) = stack.pop() {
            if n.is_terminal() || !seen.insert(n) {
                continue;
            }
            let node = self.nodes[n.0 as usize];
            let _ = writeln!(out, "  n{} [label=\"{}\"];", n.0, label(node.var));
            let _ = writeln!(out, "  n{} -> n{} [style=dashed];", n.0, node.lo.0);
            let _ = writeln!(out, "  n{} -> n{};", n.0, node.hi.0);
            stack.push(node.lo);
            stack.push(node.hi);
        }
        out.push_str("}\n");
        out
    }
}

/// A disjunction of explanations for one target, with its probability.
#[derive(Debug, Clone)]
pub struct ExplanationDnf {
    bdd: Bdd,
    root: NodeId,
    probs: Vec<f64>,
    terms: Vec<Vec<(u32, bool)>>,
    probability: f64,
}

impl ExplanationDnf {
    /// `probs[v]`: probability of fact variable `v`.
    pub fn new(probs: Vec<f64>) -> Self {
        ExplanationDnf {
            bdd: Bdd::new(),
            root: NodeId::FALSE,
            probs,
            terms: Vec::new(),
            probability: 0.0,
        }
    }

    /// Adds `∧ literals` as a disjunct and returns the new probability.
    pub fn add_explanation(&mut self, literals: &[(u32, bool)]) -> f64 {
        let cube = self.bdd.cube(literals);
        self.root = self.bdd.or(self.root, cube);
        self.terms.push(literals.to_vec());
        self.probability = self.bdd.weighted_count(self.root, &self.probs).clamp(0.0, 1.0);
        self.probability
    }

    pub fn probability(&self) -> f64 {
        self.probability
    }

    pub fn weighted_count(&self, probs: &[f64]) -> f64 {
        self.bdd.weighted_count(self.root, probs)
    }

    pub fn terms(&self) -> &[Vec<(u32, bool)>] {
        &self.terms
    }

    pub fn bdd(&self) -> &Bdd {
        &self.bdd
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn to_dot(&self, label: &dyn Fn(u32) -> String) -> String {
        self.bdd.to_dot(self.root, label)
    }
}

/// `(lower, upper)` from the query-side and negation-side disjunctions.
pub fn bounds(query_side: &ExplanationDnf, negation_side: &ExplanationDnf) -> (f64, f64) {
    let lower = query_side.probability();
    let upper = (1.0 - negation_side.probability()).clamp(0.0, 1.0);
    (lower, upper)
}
