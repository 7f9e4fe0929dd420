//! Exact inference by enumerating possible worlds.
//!
//! Exponential in the number of probabilistic facts; this is the reference
//! the approximate engine is tested against, not an inference method.

use thiserror::Error;

use crate::encode::Target;
use crate::program::{Atom, AtomId, GroundProgram, ProgramIndex};

pub const DEFAULT_MAX_FACTS: usize = 24;
pub const DEFAULT_MAX_EXPLANATION_FACTS: usize = 13;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("program has {facts} probabilistic facts; enumeration is limited to {limit}")]
    TooManyFacts { facts: usize, limit: usize },
    #[error("dependency graph among defined atoms is cyclic")]
    Cyclic,
}

/// A total assignment to the probabilistic facts, indexed by fact position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct World(pub Vec<bool>);

impl World {
    /// The world numbered `bits`: fact `i` is true iff bit `i` is set.
    pub fn from_bits(bits: u64, num_facts: usize) -> Self {
        World((0..num_facts).map(|i| bits >> i & 1 == 1).collect())
    }
}

/// A fact-level literal, `(atom, value)`.
pub type FactLiteral = (Atom, bool);

#[derive(Debug, Clone)]
pub struct Oracle {
    index: ProgramIndex,
    order: Vec<AtomId>,
    max_facts: usize,
}

impl Oracle {
    pub fn new(program: &GroundProgram) -> Result<Self, OracleError> {
        let index = ProgramIndex::new(program);
        let order = index.topological_order().ok_or(OracleError::Cyclic)?;
        Ok(Oracle {
            index,
            order,
            max_facts: DEFAULT_MAX_FACTS,
        })
    }

    pub fn with_max_facts(mut self, limit: usize) -> Self {
        self.max_facts = limit;
        self
    }

    pub fn num_facts(&self) -> usize {
        self.index.facts().len()
    }

    pub fn index(&self) -> &ProgramIndex {
        &self.index
    }

    pub fn world_probability(&self, world: &World) -> f64 {
        self.index
            .facts()
            .iter()
            .zip(&world.0)
            .map(|(&f, &v)| {
                let p = self.index.prob(f).unwrap();
                if v {
                    p
                } else {
                    1.0 - p
                }
            })
            .product()
    }

    /// Truth value of every atom in the least model of `world` plus the rules.
    fn evaluate(&self, world: &World) -> Vec<bool> {
        let mut val = vec![false; self.index.num_atoms()];
        for (&f, &v) in self.index.facts().iter().zip(&world.0) {
            val[f.index()] = v;
        }
        for &a in &self.order {
            val[a.index()] = self.index.rules_for(a).iter().any(|&r| {
                self.index.rules()[r]
                    .body
                    .iter()
                    .all(|&(b, pos)| val[b.index()] == pos)
            });
        }
        val
    }

    pub fn entails(&self, world: &World, atom: &Atom) -> bool {
        match self.index.id(atom) {
            Some(id) => self.evaluate(world)[id.index()],
            None => false,
        }
    }

    fn guard(&self, limit: usize) -> Result<usize, OracleError> {
        let n = self.num_facts();
        if n > limit {
            return Err(OracleError::TooManyFacts { facts: n, limit });
        }
        Ok(n)
    }

    /// `tt[w]` = does `atom` hold in world number `w`.
    pub fn truth_table(&self, atom: &Atom) -> Result<Vec<bool>, OracleError> {
        let n = self.guard(self.max_facts)?;
        let id = self.index.id(atom);
        Ok((0..1u64 << n)
            .map(|bits| match id {
                Some(id) => self.evaluate(&World::from_bits(bits, n))[id.index()],
                None => false,
            })
            .collect())
    }

    pub fn exact_probability(&self, query: &Atom) -> Result<f64, OracleError> {
        let n = self.num_facts();
        let tt = self.truth_table(query)?;
        Ok(tt
            .iter()
            .enumerate()
            .filter(|(_, &holds)| holds)
            .map(|(bits, _)| self.world_probability(&World::from_bits(bits as u64, n)))
            .sum())
    }

    /// True iff every world extending `literals` makes `query` hold
    /// (`Target::Query`) or fail (`Target::Negation`).
    pub fn is_explanation(
        &self,
        literals: &[FactLiteral],
        query: &Atom,
        target: Target,
    ) -> Result<bool, OracleError> {
        let n = self.guard(self.max_facts)?;
        let mut fixed_mask = 0u64;
        let mut fixed_bits = 0u64;
        for (atom, value) in literals {
            let Some(pos) = self.index.id(atom).and_then(|id| self.index.fact_position(id)) else {
                return Ok(false);
            };
            let bit = 1u64 << pos;
            if fixed_mask & bit != 0 && (fixed_bits & bit != 0) != *value {
                // contradictory literals cover no world
                return Ok(true);
            }
            fixed_mask |= bit;
            if *value {
                fixed_bits |= bit;
            }
        }
        let id = self.index.id(query);
        let want = target == Target::Query;
        let free_mask = !fixed_mask & ((1u64 << n) - 1);
        // iterate over all subsets of the free positions
        let mut sub = 0u64;
        loop {
            let world = World::from_bits(fixed_bits | sub, n);
            let holds = id.is_some_and(|id| self.evaluate(&world)[id.index()]);
            if holds != want {
                return Ok(false);
            }
            if sub == free_mask {
                break;
            }
            sub = (sub.wrapping_sub(free_mask)) & free_mask;
        }
        Ok(true)
    }

    /// All subset-minimal explanations of `target`, with probabilities, in
    /// no particular order. Enumerates the 3^n partial assignments, so the
    /// limit is tighter than for [`Self::exact_probability`].
    pub fn minimal_explanations(
        &self,
        query: &Atom,
        target: Target,
    ) -> Result<Vec<(Vec<FactLiteral>, f64)>, OracleError> {
        let table = self.implicant_table(query, target)?;
        let n = self.num_facts();
        let pow3: Vec<usize> = (0..=n).map(|i| 3usize.pow(i as u32)).collect();
        let mut out = Vec::new();
        for (c, &(implicant, prob)) in table.iter().enumerate() {
            if !implicant {
                continue;
            }
            let mut minimal = true;
            let mut lits = Vec::new();
            for i in 0..n {
                let d = c / pow3[i] % 3;
                if d == 2 {
                    continue;
                }
                lits.push((self.index.atom(self.index.facts()[i]).clone(), d == 1));
                if table[c + (2 - d) * pow3[i]].0 {
                    minimal = false;
                    break;
                }
            }
            if minimal {
                out.push((lits, prob));
            }
        }
        Ok(out)
    }

    /// Highest probability of any explanation of `target`, `None` if there is
    /// none.
    pub fn best_explanation_probability(
        &self,
        query: &Atom,
        target: Target,
    ) -> Result<Option<f64>, OracleError> {
        let table = self.implicant_table(query, target)?;
        Ok(table
            .iter()
            .filter(|(imp, _)| *imp)
            .map(|&(_, p)| p)
            .fold(None, |best, p| Some(best.map_or(p, |b: f64| b.max(p)))))
    }

    /// For each cube in base-3 encoding (digit 0 = false, 1 = true, 2 = free
    /// for fact `i` at position 3^i): is it an implicant of the target, and
    /// its probability.
    fn implicant_table(&self, query: &Atom, target: Target) -> Result<Vec<(bool, f64)>, OracleError> {
        let n = self.guard(self.max_facts.min(DEFAULT_MAX_EXPLANATION_FACTS))?;
        let tt = self.truth_table(query)?;
        let want = target == Target::Query;
        let probs: Vec<f64> = self
            .index
            .facts()
            .iter()
            .map(|&f| self.index.prob(f).unwrap())
            .collect();
        let total = 3usize.pow(n as u32);
        let mut table = vec![(false, 0.0); total];
        for c in 0..total {
            let mut rest = c;
            let mut world = 0u64;
            let mut prob = 1.0;
            let mut free = None;
            let mut pow = 1usize;
            for (i, &p) in probs.iter().enumerate() {
                match rest % 3 {
                    0 => prob *= 1.0 - p,
                    1 => {
                        prob *= p;
                        world |= 1 << i;
                    }
                    _ => {
                        if free.is_none() {
                            free = Some(pow);
                        }
                    }
                }
                rest /= 3;
                pow *= 3;
            }
            let implicant = match free {
                None => tt[world as usize] == want,
                Some(p) => table[c - 2 * p].0 && table[c - p].0,
            };
            table[c] = (implicant, prob);
        }
        Ok(table)
    }
}
