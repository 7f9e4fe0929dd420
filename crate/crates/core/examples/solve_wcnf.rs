//! Solve a WCNF file (for example one written by `plpb solve --dump-wcnf`)
//! and print the optimum cost with search statistics.

use std::time::Instant;

use plp_bounds::maxsat::{parse_wcnf, SolveOutcome, Solver};

fn main() {
    let Some(path) = std::env::args().nth(1) else {
        eprintln!("usage: solve_wcnf <file.wcnf>");
        std::process::exit(2);
    };
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| {
        eprintln!("{path}: {e}");
        std::process::exit(1);
    });
    let instance = parse_wcnf(&text).unwrap_or_else(|e| {
        eprintln!("{path}: {e}");
        std::process::exit(1);
    });
    let start = Instant::now();
    let mut solver = Solver::new(instance);
    let outcome = solver.solve(None);
    match outcome {
        SolveOutcome::Optimal { cost, .. } => println!("optimum {cost}"),
        SolveOutcome::Infeasible => println!("infeasible"),
        SolveOutcome::Timeout { .. } => unreachable!("no deadline"),
    }
    println!("{:?} in {:?}", solver.stats(), start.elapsed());
}
