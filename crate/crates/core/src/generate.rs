//! Synthetic program generators: layered reachability graphs for
//! benchmarking and small random acyclic programs for property tests.

use rand::Rng;

use crate::program::{Atom, GroundProgram, Literal, ProbFact, Rule};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayeredParams {
    pub layers: usize,
    pub width: usize,
    /// Probability that a given edge between consecutive layers exists.
    pub density: f64,
}

fn node(layer: usize, i: usize, width: usize) -> String {
    (layer * width + i + 1).to_string()
}

/// A layered DAG with edges only from layer `l` to `l+1`, as `e/2` facts
/// with probabilities in [0.1, 0.9], and ground `p/2` path rules towards a
/// random node of the last layer. The query is `p(s,t)` for a random `s` in
/// the first layer.
pub fn layered_reachability<R: Rng>(rng: &mut R, params: LayeredParams) -> (GroundProgram, Atom) {
    let LayeredParams {
        layers,
        width,
        density,
    } = params;
    assert!(layers >= 2 && width >= 1);
    let source = node(0, rng.gen_range(0..width), width);
    let target = node(layers - 1, rng.gen_range(0..width), width);
    let mut program = GroundProgram::default();
    let mut edges = Vec::new();
    for l in 0..layers - 1 {
        for i in 0..width {
            for j in 0..width {
                if rng.gen_bool(density.clamp(0.0, 1.0)) {
                    let p = (rng.gen_range(0.1..=0.9f64) * 100.0).round() / 100.0;
                    let (x, y) = (node(l, i, width), node(l + 1, j, width));
                    program.facts.push(ProbFact {
                        atom: Atom::new("e", &[&x, &y]),
                        prob: p,
                    });
                    edges.push((l, x, y));
                }
            }
        }
    }
    // The query must head at least one rule: give the source an edge that
    // yields one if the random draw did not.
    let useful = |y: &str| layers > 2 || y == target;
    if !edges.iter().any(|(_, x, y)| *x == source && useful(y)) {
        let y = if layers == 2 {
            target.clone()
        } else {
            node(1, rng.gen_range(0..width), width)
        };
        let p = (rng.gen_range(0.1..=0.9f64) * 100.0).round() / 100.0;
        program.facts.push(ProbFact {
            atom: Atom::new("e", &[&source, &y]),
            prob: p,
        });
        edges.push((0, source.clone(), y));
    }
    let path = |x: &str| Atom::new("p", &[x, &target]);
    for (l, x, y) in &edges {
        let e = Literal::pos(Atom::new("e", &[x, y]));
        if *y == target {
            program.rules.push(Rule {
                head: path(x),
                body: vec![e],
            });
        } else if l + 1 < layers - 1 {
            program.rules.push(Rule {
                head: path(x),
                body: vec![e, Literal::pos(path(y))],
            });
        }
    }
    let query = path(&source);
    program.queries.push(query.clone());
    (program, query)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomParams {
    pub max_facts: usize,
    pub max_defined: usize,
    pub max_rules_per_head: usize,
    pub max_body: usize,
    /// Chance that a fact literal in a body is negated.
    pub negation: f64,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            max_facts: 8,
            max_defined: 5,
            max_rules_per_head: 3,
            max_body: 3,
            negation: 0.0,
        }
    }
}

/// A random acyclic program: defined atom `d{i}` only depends on facts and
/// on `d{j}` with `j > i`. The query is `d0`.
pub fn random_program<R: Rng>(rng: &mut R, params: RandomParams) -> (GroundProgram, Atom) {
    let n_facts = rng.gen_range(1..=params.max_facts.max(1));
    let n_defined = rng.gen_range(1..=params.max_defined.max(1));
    let mut program = GroundProgram::default();
    for i in 0..n_facts {
        let p = (rng.gen_range(0.05..=0.95f64) * 100.0).round() / 100.0;
        program.facts.push(ProbFact {
            atom: Atom::constant(format!("f{i}")),
            prob: p,
        });
    }
    for d in 0..n_defined {
        let n_rules = rng.gen_range(1..=params.max_rules_per_head.max(1));
        for _ in 0..n_rules {
            let len = rng.gen_range(1..=params.max_body.max(1));
            let mut body: Vec<Literal> = Vec::with_capacity(len);
            for _ in 0..len {
                let later = n_defined - d - 1;
                let use_defined = later > 0 && rng.gen_bool(0.35);
                let lit = if use_defined {
                    let j = rng.gen_range(d + 1..n_defined);
                    Literal::pos(Atom::constant(format!("d{j}")))
                } else {
                    let f = Atom::constant(format!("f{}", rng.gen_range(0..n_facts)));
                    if rng.gen_bool(params.negation.clamp(0.0, 1.0)) {
                        Literal::neg(f)
                    } else {
                        Literal::pos(f)
                    }
                };
                if !body.iter().any(|b| b.atom == lit.atom) {
                    body.push(lit);
                }
            }
            program.rules.push(Rule {
                head: Atom::constant(format!("d{d}")),
                body,
            });
        }
    }
    let query = Atom::constant("d0");
    program.queries.push(query.clone());
    (program, query)
}
