//! Anytime inference for ground probabilistic logic programs.
//!
//! The probability of a query is bracketed by two explanation
//! disjunctions: explanations of the query give a lower bound, explanations
//! of its negation an upper bound. Explanations are found best-first by
//! weighted partial MAX-SAT over a lazily grown sub-program, and the
//! disjunctions are counted exactly with a BDD.

pub mod bench;
pub mod encode;
pub mod engine;
pub mod generate;
pub mod lazy;
pub mod maxsat;
pub mod oracle;
pub mod program;
pub mod wmc;

pub use encode::{Explanation, Target};
pub use engine::{bucket, run, BoundTrace, Bucket, EngineConfig, Limit, Mode, Terminal};
pub use program::{parse_program, Atom, GroundProgram};
