//! CPLEX-style LP text.

use std::fmt::Write as _;

use crate::ir::{Direction, MilpModel, Sense, VariableKind};
use crate::scalar::{to_f64, Scalar};

/// Decimal text; LP files have no fraction syntax.
pub(crate) fn number<S: Scalar>(v: &S) -> String {
    let r = v.render();
    if r.contains('/') {
        to_f64(v).to_string()
    } else {
        r
    }
}

fn linear<S: Scalar>(terms: &[(String, S)]) -> String {
    let mut out = String::new();
    for (i, (name, c)) in terms.iter().enumerate() {
        let sign = if c.is_negative() { "-" } else { "+" };
        if i > 0 || c.is_negative() {
            out.push_str(sign);
            out.push(' ');
        }
        let a = c.abs();
        if !a.is_one() {
            out.push_str(&number(&a));
            out.push(' ');
        }
        out.push_str(name);
        out.push(' ');
    }
    out.pop();
    out
}

/// The model in LP format: variables on the left, constants on the right,
/// sections in declaration order. An objective constant is dropped and
/// noted in a comment.
pub fn emit_lp<S: Scalar>(model: &MilpModel<S>) -> String {
    let mut out = String::new();
    out.push_str(match model.objective.direction {
        Direction::Max => "Maximize\n",
        Direction::Min => "Minimize\n",
    });
    let obj: Vec<(String, S)> = model.objective.expr.terms().map(|(n, c)| (n.to_string(), c.clone())).collect();
    writeln!(out, " obj: {}", linear(&obj)).unwrap();
    let k = model.objective.expr.constant_term();
    if !k.is_zero() {
        writeln!(out, "\\ objective constant {} omitted", number(k)).unwrap();
    }
    out.push_str("Subject To\n");
    for (i, c) in model.constraints.iter().enumerate() {
        let diff = c.lhs.minus(&c.rhs);
        let terms: Vec<(String, S)> = diff.terms().map(|(n, v)| (n.to_string(), v.clone())).collect();
        let rhs = -diff.constant_term().clone();
        let rhs = if rhs.is_zero() { S::zero() } else { rhs };
        let op = match c.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        writeln!(out, " c{}: {} {op} {}", i + 1, linear(&terms), number(&rhs)).unwrap();
    }
    out.push_str("Bounds\n");
    for v in model.variables.iter().filter(|v| !v.is_binary()) {
        match &v.upper_bound {
            Some(u) => writeln!(out, " 0 <= {} <= {}", v.name, number(u)).unwrap(),
            None => writeln!(out, " {} >= 0", v.name).unwrap(),
        }
    }
    let section = |out: &mut String, title: &str, kind: VariableKind| {
        let names: Vec<&str> = model
            .variables
            .iter()
            .filter(|v| v.kind == kind)
            .map(|v| v.name.as_str())
            .collect();
        if !names.is_empty() {
            writeln!(out, "{title}\n {}", names.join(" ")).unwrap();
        }
    };
    section(&mut out, "Generals", VariableKind::Integer);
    section(&mut out, "Binaries", VariableKind::Binary);
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{AffineExpression, Objective, Variable};
    use crate::parser::parse_constraint;

    #[test]
    fn small_model() {
        let m = MilpModel {
            variables: vec![Variable::continuous("x"), Variable::integer("y"), Variable::binary("bi_y")],
            objective: Objective::new(
                Direction::Min,
                AffineExpression::normalize_terms([("x", 2.0), ("y", -1.0)], 3.0).unwrap(),
            )
            .unwrap(),
            constraints: vec![
                parse_constraint("x + 2 >= 3*y").unwrap(),
                parse_constraint("bi_y + y = 1").unwrap(),
            ],
            big_m: 10.0,
        };
        assert_eq!(
            emit_lp(&m),
            "Minimize\n obj: 2 x - y\n\\ objective constant 3 omitted\nSubject To\n c1: x - 3 y >= -2\n c2: bi_y + y = 1\nBounds\n x >= 0\n y >= 0\nGenerals\n y\nBinaries\n bi_y\nEnd\n"
        );
    }
}
