//! WCNF text format (`p wcnf <vars> <clauses> <top>`), used for debug dumps
//! and standalone fuzzing of the solver.
//!
//! Hard clauses carry the `top` weight. A variable's cost is written as the
//! soft unit clause `-v` with integer weight `round(cost * WCNF_SCALE)`;
//! zero-cost variables are omitted.

use std::fmt::Write as _;

use thiserror::Error;

use super::{Lit, MaxSatInstance, Var};

pub const WCNF_SCALE: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WcnfError {
    #[error("line {0}: missing or malformed `p wcnf` header")]
    Header(usize),
    #[error("line {line}: {msg}")]
    Clause { line: usize, msg: String },
}

pub fn write_wcnf(inst: &MaxSatInstance, comments: &[String]) -> String {
    let soft: Vec<(Var, u64)> = inst
        .costs()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0.0)
        .map(|(v, &c)| (Var(v as u32), (c * WCNF_SCALE).round() as u64))
        .collect();
    let top: u64 = soft.iter().map(|s| s.1).sum::<u64>() + 1;
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "c {c}");
    }
    let _ = writeln!(
        out,
        "p wcnf {} {} {}",
        inst.num_vars(),
        inst.hard().len() + soft.len(),
        top
    );
    for clause in inst.hard() {
        let _ = write!(out, "{top}");
        for l in clause {
            let _ = write!(out, " {l}");
        }
        let _ = writeln!(out, " 0");
    }
    for (v, w) in soft {
        let _ = writeln!(out, "{w} {} 0", v.neg());
    }
    out
}

/// Reads a WCNF file. Soft clauses other than negative units are encoded
/// with a fresh relaxation variable `r`: hard `C ∨ r`, cost of `r` = weight.
pub fn parse_wcnf(text: &str) -> Result<MaxSatInstance, WcnfError> {
    let mut inst = MaxSatInstance::new();
    let mut top: Option<u64> = None;
    let mut declared_vars = 0usize;
    let mut soft: Vec<(Vec<Lit>, f64)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 5 || parts[1] != "wcnf" {
                return Err(WcnfError::Header(lineno));
            }
            declared_vars = parts[2].parse().map_err(|_| WcnfError::Header(lineno))?;
            top = Some(parts[4].parse().map_err(|_| WcnfError::Header(lineno))?);
            for _ in 0..declared_vars {
                inst.new_var(0.0);
            }
            continue;
        }
        let Some(top) = top else {
            return Err(WcnfError::Header(lineno));
        };
        let bad = |msg: &str| WcnfError::Clause {
            line: lineno,
            msg: msg.to_string(),
        };
        let mut nums = line.split_whitespace();
        let weight: u64 = nums
            .next()
            .and_then(|w| w.parse().ok())
            .ok_or_else(|| bad("bad weight"))?;
        let mut lits = Vec::new();
        let mut terminated = false;
        for tok in nums {
            let n: i64 = tok.parse().map_err(|_| bad("bad literal"))?;
            if n == 0 {
                terminated = true;
                break;
            }
            let v = n.unsigned_abs() as usize;
            if v > declared_vars {
                return Err(bad("literal exceeds declared variable count"));
            }
            let var = Var(v as u32 - 1);
            lits.push(if n < 0 { var.neg() } else { var.pos() });
        }
        if !terminated {
            return Err(bad("clause not terminated by 0"));
        }
        if weight >= top {
            inst.add_hard(lits);
        } else {
            soft.push((lits, weight as f64 / WCNF_SCALE));
        }
    }
    if top.is_none() {
        return Err(WcnfError::Header(text.lines().count().max(1)));
    }
    let mut extra = vec![0.0; inst.num_vars()];
    for (lits, w) in soft {
        if lits.len() == 1 && lits[0].is_negated() {
            extra[lits[0].var().index()] += w;
        } else {
            let r = inst.new_var(w);
            let mut c = lits;
            c.push(r.pos());
            inst.add_hard(c);
        }
    }
    let mut out = MaxSatInstance::new();
    for (v, &c) in inst.costs().iter().enumerate() {
        out.new_var(c + extra.get(v).copied().unwrap_or(0.0));
    }
    for c in inst.hard() {
        out.add_hard(c.clone());
    }
    Ok(out)
}
