use std::collections::HashMap;

use super::{Atom, GroundProgram};

/// Dense atom handle, assigned in first-occurrence order (facts, then
/// rules, then queries).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomId(pub u32);

impl AtomId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexedRule {
    pub head: AtomId,
    /// `(atom, positive)`
    pub body: Vec<(AtomId, bool)>,
}

/// Integer-indexed view of a [`GroundProgram`] used by the solvers.
#[derive(Debug, Clone)]
pub struct ProgramIndex {
    atoms: Vec<Atom>,
    lookup: HashMap<Atom, AtomId>,
    prob: Vec<Option<f64>>,
    fact_pos: Vec<Option<usize>>,
    facts: Vec<AtomId>,
    rules: Vec<IndexedRule>,
    rules_by_head: Vec<Vec<usize>>,
}

impl ProgramIndex {
    pub fn new(program: &GroundProgram) -> Self {
        let mut idx = ProgramIndex {
            atoms: Vec::new(),
            lookup: HashMap::new(),
            prob: Vec::new(),
            fact_pos: Vec::new(),
            facts: Vec::new(),
            rules: Vec::new(),
            rules_by_head: Vec::new(),
        };
        for fact in &program.facts {
            let id = idx.intern(&fact.atom);
            if idx.prob[id.index()].is_none() {
                idx.prob[id.index()] = Some(fact.prob);
                idx.fact_pos[id.index()] = Some(idx.facts.len());
                idx.facts.push(id);
            }
        }
        for rule in &program.rules {
            let head = idx.intern(&rule.head);
            let body = rule
                .body
                .iter()
                .map(|l| (idx.intern(&l.atom), l.positive))
                .collect();
            idx.rules_by_head[head.index()].push(idx.rules.len());
            idx.rules.push(IndexedRule { head, body });
        }
        for q in &program.queries {
            idx.intern(q);
        }
        idx
    }

    fn intern(&mut self, atom: &Atom) -> AtomId {
        if let Some(&id) = self.lookup.get(atom) {
            return id;
        }
        let id = AtomId(self.atoms.len() as u32);
        self.atoms.push(atom.clone());
        self.lookup.insert(atom.clone(), id);
        self.prob.push(None);
        self.fact_pos.push(None);
        self.rules_by_head.push(Vec::new());
        id
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn atom(&self, id: AtomId) -> &Atom {
        &self.atoms[id.index()]
    }

    pub fn id(&self, atom: &Atom) -> Option<AtomId> {
        self.lookup.get(atom).copied()
    }

    pub fn atom_ids(&self) -> impl Iterator<Item = AtomId> {
        (0..self.atoms.len() as u32).map(AtomId)
    }

    pub fn is_fact(&self, id: AtomId) -> bool {
        self.prob[id.index()].is_some()
    }

    /// Probability of a fact atom, `None` for defined atoms.
    pub fn prob(&self, id: AtomId) -> Option<f64> {
        self.prob[id.index()]
    }

    /// Fact atoms in declaration order.
    pub fn facts(&self) -> &[AtomId] {
        &self.facts
    }

    /// Position of a fact atom in [`Self::facts`].
    pub fn fact_position(&self, id: AtomId) -> Option<usize> {
        self.fact_pos[id.index()]
    }

    pub fn rules(&self) -> &[IndexedRule] {
        &self.rules
    }

    pub fn rules_for(&self, head: AtomId) -> &[usize] {
        &self.rules_by_head[head.index()]
    }

    /// Defined atoms reachable from `root` through rule bodies, `root`
    /// included when it is not a fact. Ordered by atom id.
    pub fn reachable_defined(&self, root: AtomId) -> Vec<AtomId> {
        let mut seen = vec![false; self.atoms.len()];
        let mut stack = vec![root];
        let mut out = Vec::new();
        while let Some(a) = stack.pop() {
            if seen[a.index()] || self.is_fact(a) {
                continue;
            }
            seen[a.index()] = true;
            out.push(a);
            for &r in self.rules_for(a) {
                for &(b, _) in &self.rules[r].body {
                    if !seen[b.index()] {
                        stack.push(b);
                    }
                }
            }
        }
        out.sort();
        out
    }

    /// Defined atoms in an order where every atom follows the defined atoms
    /// its rule bodies mention. `None` if the dependency graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<AtomId>> {
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.atoms.len()];
        let mut order = Vec::new();
        for start in self.atom_ids() {
            if self.is_fact(start) || state[start.index()] != 0 {
                continue;
            }
            let mut stack: Vec<(AtomId, usize, usize)> = vec![(start, 0, 0)];
            state[start.index()] = 1;
            while let Some(&mut (a, ref mut ri, ref mut li)) = stack.last_mut() {
                let rules = self.rules_for(a);
                if *ri >= rules.len() {
                    state[a.index()] = 2;
                    order.push(a);
                    stack.pop();
                    continue;
                }
                let body = &self.rules[rules[*ri]].body;
                if *li >= body.len() {
                    *ri += 1;
                    *li = 0;
                    continue;
                }
                let b = body[*li].0;
                *li += 1;
                if self.is_fact(b) {
                    continue;
                }
                match state[b.index()] {
                    0 => {
                        state[b.index()] = 1;
                        stack.push((b, 0, 0));
                    }
                    1 => return None,
                    _ => {}
                }
            }
        }
        Some(order)
    }
}
