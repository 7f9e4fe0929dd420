mod common;

use std::time::Instant;

use common::{brute_force, random_instance, rng};
use plp_bounds::maxsat::{
    parse_wcnf, solve, write_wcnf, Lit, MaxSatInstance, SolveOutcome, Solver, Var, WCNF_SCALE,
};
use proptest::prelude::*;

fn optimum(out: SolveOutcome) -> Option<(Vec<bool>, f64)> {
    match out {
        SolveOutcome::Optimal { model, cost } => Some((model, cost)),
        SolveOutcome::Infeasible => None,
        SolveOutcome::Timeout { .. } => panic!("no deadline was set"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn optimum_matches_enumeration(seed in any::<u64>()) {
        let inst = random_instance(&mut rng(seed), 14, false);
        let got = optimum(solve(&inst, None));
        let want = brute_force(&inst);
        match (got, want) {
            (Some((model, cost)), Some((_, best))) => {
                prop_assert!(inst.is_satisfied_by(&model));
                prop_assert!((inst.model_cost(&model) - cost).abs() < 1e-9);
                prop_assert!((cost - best).abs() < 1e-9, "{} vs {}", cost, best);
            }
            (None, None) => {}
            (g, w) => prop_assert!(false, "solver {:?}, enumeration {:?}", g, w),
        }
    }

    /// With integer costs ties are exact, and the solver must return the
    /// lexicographically smallest optimum (variable 0 first, false < true).
    #[test]
    fn ties_break_lexicographically(seed in any::<u64>()) {
        let inst = random_instance(&mut rng(seed), 12, true);
        let got = optimum(solve(&inst, None)).map(|(m, _)| m);
        let want = brute_force(&inst).map(|(m, _)| m);
        prop_assert_eq!(got, want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn solving_is_deterministic(seed in any::<u64>()) {
        let inst = random_instance(&mut rng(seed), 14, false);
        prop_assert_eq!(solve(&inst, None), solve(&inst, None));
    }

    /// Forbidding the optimum with a hard clause gives the second best,
    /// both through an incremental solver and from scratch.
    #[test]
    fn added_clause_gives_second_best(seed in any::<u64>()) {
        let inst = random_instance(&mut rng(seed), 10, false);
        let mut solver = Solver::new(inst.clone());
        let Some((model, first)) = optimum(solver.solve(None)) else {
            return Ok(());
        };
        let block: Vec<Lit> = model
            .iter()
            .enumerate()
            .map(|(v, &x)| if x { Var(v as u32).neg() } else { Var(v as u32).pos() })
            .collect();
        solver.add_hard(block.clone());
        let mut fresh = inst.clone();
        fresh.add_hard(block);
        let incremental = optimum(solver.solve(None));
        let want = brute_force(&fresh);
        prop_assert_eq!(
            incremental.as_ref().map(|m| m.1 > first - 1e-9),
            want.as_ref().map(|_| true)
        );
        if let (Some((_, a)), Some((_, b))) = (&incremental, &want) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        prop_assert_eq!(incremental, optimum(solve(&fresh, None)));
    }

    #[test]
    fn wcnf_roundtrip_keeps_optimum(seed in any::<u64>()) {
        let inst = random_instance(&mut rng(seed), 10, false);
        let text = write_wcnf(&inst, &["roundtrip".to_string()]);
        let back = parse_wcnf(&text).unwrap();
        prop_assert_eq!(back.num_vars(), inst.num_vars());
        prop_assert_eq!(back.hard(), inst.hard());
        let a = optimum(solve(&inst, None)).map(|m| m.1);
        let b = optimum(solve(&back, None)).map(|m| m.1);
        match (a, b) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() <= inst.num_vars() as f64 / WCNF_SCALE),
            (a, b) => prop_assert_eq!(a, b),
        }
    }
}

#[test]
fn contradictory_units_are_infeasible() {
    let mut inst = MaxSatInstance::new();
    let a = inst.new_var(1.0);
    let b = inst.new_var(0.5);
    inst.add_hard(vec![a.pos(), b.pos()]);
    let mut solver = Solver::new(inst);
    assert!(matches!(solver.solve(None), SolveOutcome::Optimal { .. }));
    solver.add_hard(vec![a.neg()]);
    solver.add_hard(vec![b.neg()]);
    assert_eq!(solver.solve(None), SolveOutcome::Infeasible);
}

#[test]
fn two_choices_pick_the_cheaper() {
    let mut inst = MaxSatInstance::new();
    let a = inst.new_var(-(0.8f64.ln()));
    let b = inst.new_var(-(0.5f64.ln()));
    inst.add_hard(vec![a.pos(), b.pos()]);
    let (model, cost) = optimum(solve(&inst, None)).unwrap();
    assert_eq!(model, vec![true, false]);
    assert!((cost - 0.2231435513142097).abs() < 1e-12);
}

#[test]
fn past_deadline_times_out() {
    let inst = random_instance(&mut rng(1), 14, false);
    let out = solve(&inst, Some(Instant::now()));
    assert!(matches!(out, SolveOutcome::Timeout { .. }), "{out:?}");
}
