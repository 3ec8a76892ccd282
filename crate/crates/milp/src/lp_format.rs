//! Export to the CPLEX LP text format for cross-checking with external
//! solvers.

use std::fmt::Write;

use crate::problem::{MilpProblem, Relation, Sense, VarId, VarKind};

/// Renders `problem` in LP format. Variable and row names are sanitized;
/// the objective constant is written as a comment since not every reader
/// accepts it.
pub fn write_lp(problem: &MilpProblem) -> String {
    let names: Vec<String> = problem
        .variables
        .iter()
        .enumerate()
        .map(|(i, v)| sanitize(&v.name, &format!("v{i}")))
        .collect();
    let mut out = String::new();
    if problem.objective.constant != 0.0 {
        let _ = writeln!(out, "\\ objective constant: {:e}", problem.objective.constant);
    }
    out.push_str(match problem.objective.sense {
        Sense::Minimize => "Minimize\n",
        Sense::Maximize => "Maximize\n",
    });
    let _ = writeln!(out, " obj: {}", linear(&problem.objective.coeffs, &names));
    out.push_str("Subject To\n");
    for (i, c) in problem.constraints.iter().enumerate() {
        let op = match c.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        let _ = writeln!(
            out,
            " {}: {} {} {:e}",
            sanitize(&c.name, &format!("c{i}")),
            linear(&c.coeffs, &names),
            op,
            c.rhs
        );
    }
    out.push_str("Bounds\n");
    for (v, name) in problem.variables.iter().zip(&names) {
        if let VarKind::Continuous { lo, hi } = v.kind {
            let _ = writeln!(out, " {lo:e} <= {name} <= {hi:e}");
        }
    }
    let binaries: Vec<&str> = problem
        .variables
        .iter()
        .zip(&names)
        .filter(|(v, _)| v.kind.is_binary())
        .map(|(_, n)| n.as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for n in binaries {
            let _ = writeln!(out, " {n}");
        }
    }
    out.push_str("End\n");
    out
}

fn linear(coeffs: &[(VarId, f64)], names: &[String]) -> String {
    if coeffs.is_empty() {
        return "0 ".to_string() + &names[0];
    }
    let mut s = String::new();
    for (k, &(v, a)) in coeffs.iter().enumerate() {
        let sign = if a < 0.0 { "-" } else { "+" };
        if k == 0 {
            if a < 0.0 {
                s.push_str("- ");
            }
        } else {
            let _ = write!(s, " {sign} ");
        }
        let _ = write!(s, "{:e} {}", a.abs(), names[v.0]);
    }
    s
}

fn sanitize(name: &str, fallback: &str) -> String {
    let cleaned: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "_.[]".contains(c) { c } else { '_' })
        .collect();
    match cleaned.chars().next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => cleaned,
        _ => fallback.to_string(),
    }
}
