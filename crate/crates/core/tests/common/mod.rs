//! Generators and brute-force references shared by the integration tests.
#![allow(dead_code)]

use plp_bounds::generate::{random_program, RandomParams};
use plp_bounds::maxsat::{Lit, MaxSatInstance, Var};
use plp_bounds::program::{Atom, GroundProgram};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random clauses over at most `max_vars` variables. With `integer_costs`
/// every cost is a small integer, so equal-cost optima compare exactly.
pub fn random_instance<R: Rng>(rng: &mut R, max_vars: usize, integer_costs: bool) -> MaxSatInstance {
    let n = rng.gen_range(1..=max_vars);
    let mut inst = MaxSatInstance::new();
    for _ in 0..n {
        let cost = if rng.gen_bool(0.2) {
            0.0
        } else if integer_costs {
            rng.gen_range(1..=4) as f64
        } else {
            rng.gen_range(0.01..3.0)
        };
        inst.new_var(cost);
    }
    let m = rng.gen_range(0..=2 * n);
    for _ in 0..m {
        let len = rng.gen_range(1..=4.min(n).max(1));
        let clause: Vec<Lit> = (0..len)
            .map(|_| {
                let v = Var(rng.gen_range(0..n) as u32);
                // lean positive so the optimum is rarely all-false
                if rng.gen_bool(0.6) {
                    v.pos()
                } else {
                    v.neg()
                }
            })
            .collect();
        inst.add_hard(clause);
    }
    inst
}

/// Model for enumeration index `m`, variable 0 as the most significant bit,
/// so ascending `m` is ascending lexicographic order with false < true.
pub fn model_of(m: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| (m >> (n - 1 - i)) & 1 == 1).collect()
}

/// Minimum-cost feasible model, lexicographically smallest among those
/// within 1e-9 of the minimum.
pub fn brute_force(inst: &MaxSatInstance) -> Option<(Vec<bool>, f64)> {
    let n = inst.num_vars();
    let mut best: Option<f64> = None;
    let mut feasible = Vec::new();
    for m in 0..1u64 << n {
        let model = model_of(m, n);
        if inst.is_satisfied_by(&model) {
            let c = inst.model_cost(&model);
            best = Some(best.map_or(c, |b: f64| b.min(c)));
            feasible.push((model, c));
        }
    }
    let best = best?;
    feasible.into_iter().find(|(_, c)| (c - best).abs() <= 1e-9)
}

/// Random DNF over at most `max_vars` variables: `(probs, terms)`.
pub fn random_dnf<R: Rng>(rng: &mut R, max_vars: usize) -> (Vec<f64>, Vec<Vec<(u32, bool)>>) {
    let n = rng.gen_range(1..=max_vars);
    let probs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=1.0)).collect();
    let k = rng.gen_range(0..=8);
    let terms = (0..k)
        .map(|_| {
            let len = rng.gen_range(0..=4.min(n));
            (0..len)
                .map(|_| (rng.gen_range(0..n) as u32, rng.gen_bool(0.5)))
                .collect()
        })
        .collect();
    (probs, terms)
}

pub fn dnf_holds(terms: &[Vec<(u32, bool)>], world: &[bool]) -> bool {
    terms
        .iter()
        .any(|t| t.iter().all(|&(v, val)| world[v as usize] == val))
}

pub fn dnf_probability(probs: &[f64], terms: &[Vec<(u32, bool)>]) -> f64 {
    let n = probs.len();
    (0..1u64 << n)
        .map(|m| {
            let world: Vec<bool> = (0..n).map(|i| (m >> i) & 1 == 1).collect();
            if !dnf_holds(terms, &world) {
                return 0.0;
            }
            world
                .iter()
                .zip(probs)
                .map(|(&x, &p)| if x { p } else { 1.0 - p })
                .product()
        })
        .sum()
}

/// Small random acyclic programs with at most 12 facts.
pub fn small_program(seed: u64, negation: f64) -> (GroundProgram, Atom) {
    random_program(
        &mut rng(seed),
        RandomParams {
            max_facts: 12,
            max_defined: 6,
            max_rules_per_head: 3,
            max_body: 3,
            negation,
        },
    )
}
