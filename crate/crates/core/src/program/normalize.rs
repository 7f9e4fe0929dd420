use std::collections::HashMap;

use super::{Atom, GroundProgram, Rule};

/// Eliminates deterministic facts so every remaining probability lies
/// strictly inside (0,1).
///
/// A fact with probability 1 is substituted as true, a fact with
/// probability 0 as false: satisfied literals disappear from bodies and
/// rules with a falsified literal are dropped. A query on a certain fact
/// keeps an empty-body rule so the atom stays derivable.
pub fn normalize(program: &GroundProgram) -> GroundProgram {
    let fixed: HashMap<&Atom, bool> = program
        .facts
        .iter()
        .filter(|f| f.prob <= 0.0 || f.prob >= 1.0)
        .map(|f| (&f.atom, f.prob >= 1.0))
        .collect();
    if fixed.is_empty() {
        return program.clone();
    }

    let facts = program
        .facts
        .iter()
        .filter(|f| !fixed.contains_key(&f.atom))
        .cloned()
        .collect();

    let mut rules = Vec::with_capacity(program.rules.len());
    'rules: for rule in &program.rules {
        let mut body = Vec::with_capacity(rule.body.len());
        for lit in &rule.body {
            match fixed.get(&lit.atom) {
                Some(&value) if value == lit.positive => {}
                Some(_) => continue 'rules,
                None => body.push(lit.clone()),
            }
        }
        rules.push(Rule {
            head: rule.head.clone(),
            body,
        });
    }

    let mut kept_true = Vec::new();
    for q in &program.queries {
        if fixed.get(q) == Some(&true) && !kept_true.contains(&q) {
            kept_true.push(q);
            rules.push(Rule {
                head: q.clone(),
                body: Vec::new(),
            });
        }
    }

    GroundProgram {
        facts,
        rules,
        queries: program.queries.clone(),
    }
}
