mod common;

use common::small_program;
use plp_bounds::oracle::Oracle;
use plp_bounds::program::{
    normalize, parse_program, validate, Atom, GroundProgram, Literal, ProbFact, Rule, Violation,
};
use proptest::prelude::*;

fn atom_strategy() -> impl Strategy<Value = Atom> {
    (
        prop::sample::select(vec!["a", "b", "edge", "p_2"]),
        prop::collection::vec(prop::sample::select(vec!["1", "x", "n42"]), 0..3),
    )
        .prop_map(|(name, args)| Atom::new(name, &args))
}

fn prob_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![
        Just(0.0),
        Just(1.0),
        (0.0f64..=1.0),
        (1u32..100).prop_map(|k| k as f64 / 100.0),
    ]
}

/// Programs that parse, but need not validate: cycles, negated defined
/// atoms and facts that also head rules all occur.
fn program_strategy() -> impl Strategy<Value = GroundProgram> {
    (
        prop::collection::vec((atom_strategy(), prob_strategy()), 0..6),
        prop::collection::vec(
            (
                atom_strategy(),
                prop::collection::vec((atom_strategy(), any::<bool>()), 0..3),
            ),
            0..6,
        ),
        prop::collection::vec(atom_strategy(), 0..2),
    )
        .prop_map(|(facts, rules, queries)| {
            let mut p = GroundProgram::default();
            for (atom, prob) in facts {
                if p.fact(&atom).is_none() {
                    p.facts.push(ProbFact { atom, prob });
                }
            }
            for (head, body) in rules {
                let body = body
                    .into_iter()
                    .map(|(a, pos)| if pos { Literal::pos(a) } else { Literal::neg(a) })
                    .collect();
                p.rules.push(Rule { head, body });
            }
            p.queries = queries;
            p
        })
}

proptest! {
    #[test]
    fn printing_then_parsing_is_identity(p in program_strategy()) {
        let text = p.to_string();
        prop_assert_eq!(parse_program(&text).unwrap(), p);
    }

    #[test]
    fn generated_programs_roundtrip_and_validate(seed in any::<u64>(), negation in 0.0f64..0.5) {
        let (p, q) = small_program(seed, negation);
        prop_assert!(validate(&p).is_ok(), "{}", validate(&p));
        prop_assert_eq!(&p.queries, &vec![q]);
        prop_assert_eq!(parse_program(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn parser_never_panics(text in "[a-z0-9():,.%\\\\+ \\n-]{0,60}") {
        let _ = parse_program(&text);
    }

    #[test]
    fn validate_is_total(p in program_strategy()) {
        let report = validate(&p);
        prop_assert_eq!(report.is_ok(), report.violations.is_empty());
        // facts that are also defined are always reported
        for f in &p.facts {
            if p.rules.iter().any(|r| r.head == f.atom) {
                prop_assert!(report
                    .violations
                    .iter()
                    .any(|v| *v == Violation::FactAlsoDefined(f.atom.clone())));
            }
        }
    }

    #[test]
    fn normalize_is_idempotent(p in program_strategy()) {
        let once = normalize(&p);
        prop_assert_eq!(normalize(&once), once);
    }

    #[test]
    fn normalize_keeps_query_probability(seed in any::<u64>(), pin in any::<u64>()) {
        let (mut p, q) = small_program(seed, 0.3);
        // pin some facts to 0 or 1
        for (i, f) in p.facts.iter_mut().enumerate() {
            match (pin >> (2 * i)) & 3 {
                0 => f.prob = 0.0,
                1 => f.prob = 1.0,
                _ => {}
            }
        }
        let before = Oracle::new(&p).unwrap().exact_probability(&q).unwrap();
        let n = normalize(&p);
        let report = validate(&n);
        if !report.is_ok() {
            // only a query whose every derivation vanished, so P = 0
            prop_assert_eq!(&report.violations, &vec![Violation::UndefinedQuery(q.clone())]);
            prop_assert!(before.abs() < 1e-12);
        }
        prop_assert!(n.facts.iter().all(|f| f.prob > 0.0 && f.prob < 1.0));
        let after = Oracle::new(&n).unwrap().exact_probability(&q).unwrap();
        prop_assert!((before - after).abs() < 1e-9, "{} vs {}", before, after);
    }
}

#[test]
fn cycles_and_negated_heads_are_reported() {
    let p = parse_program("a :- b. b :- a, f. c :- \\+a. 0.5::f. query(d).").unwrap();
    let report = validate(&p);
    assert!(report
        .violations
        .iter()
        .any(|v| matches!(v, Violation::PositiveCycle(atoms) if atoms.len() == 2)));
    assert!(report
        .violations
        .iter()
        .any(|v| matches!(v, Violation::NegatedDefinedAtom { .. })));
    assert!(report
        .violations
        .iter()
        .any(|v| *v == Violation::UndefinedQuery(Atom::constant("d"))));
}

#[test]
fn parse_errors_carry_positions() {
    let err = parse_program("0.5::a.\n1.5::b.").unwrap_err();
    assert!(err.to_string().contains("2:"), "{err}");
    assert!(parse_program("0.5::a. 0.6::a.").is_err());
    assert!(parse_program("a :- .").is_err());
}
