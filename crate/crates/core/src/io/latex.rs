//! LaTeX `align` block: one numbered row for the objective and each
//! constraint, then unnumbered domain rows.

use std::fmt::Write as _;

use super::lp::number;
use crate::ir::{AffineExpression, Direction, MilpModel, Sense, VariableKind};
use crate::scalar::Scalar;

fn name(n: &str) -> String {
    format!("\\mathit{{{}}}", n.replace('_', "\\_"))
}

fn expr<S: Scalar>(e: &AffineExpression<S>) -> String {
    let mut out = String::new();
    for (i, (n, c)) in e.terms().enumerate() {
        if c.is_negative() {
            out.push_str(if i == 0 { "-" } else { " - " });
        } else if i > 0 {
            out.push_str(" + ");
        }
        let a = c.abs();
        if !a.is_one() {
            out.push_str(&number(&a));
            out.push_str(" \\, ");
        }
        out.push_str(&name(n));
    }
    let k = e.constant_term();
    if !k.is_zero() || e.is_empty() {
        if e.is_empty() {
            if k.is_negative() {
                out.push('-');
            }
        } else {
            out.push_str(if k.is_negative() { " - " } else { " + " });
        }
        out.push_str(&number(&k.abs()));
    }
    out
}

pub fn emit_latex<S: Scalar>(model: &MilpModel<S>) -> String {
    let mut out = String::from("\\begin{align}\n");
    let op = match model.objective.direction {
        Direction::Max => "\\max",
        Direction::Min => "\\min",
    };
    write!(out, "{op} \\quad & {}", expr(&model.objective.expr)).unwrap();
    for (i, c) in model.constraints.iter().enumerate() {
        let rel = match c.sense {
            Sense::Le => "\\leq",
            Sense::Ge => "\\geq",
            Sense::Eq => "=",
        };
        let lead = if i == 0 { "\\text{s.t.} \\quad " } else { "" };
        write!(out, " \\\\\n{lead}& {} {rel} {}", expr(&c.lhs), expr(&c.rhs)).unwrap();
    }
    out.push_str("\n\\end{align}\n");

    let domains: [(VariableKind, &str); 3] = [
        (VariableKind::Continuous, "\\geq 0"),
        (VariableKind::Integer, "\\in \\mathbb{Z}_{\\geq 0}"),
        (VariableKind::Binary, "\\in \\{0, 1\\}"),
    ];
    let rows: Vec<String> = domains
        .iter()
        .filter_map(|(kind, set)| {
            let names: Vec<String> = model
                .variables
                .iter()
                .filter(|v| v.kind == *kind)
                .map(|v| name(&v.name))
                .collect();
            (!names.is_empty()).then(|| format!("& {} {set}", names.join(", ")))
        })
        .collect();
    if !rows.is_empty() {
        writeln!(out, "\\begin{{align*}}\n{}\n\\end{{align*}}", rows.join(" \\\\\n")).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{Objective, Variable};
    use crate::parser::parse_constraint;

    #[test]
    fn exclusive_or_row() {
        let m = MilpModel {
            variables: vec![Variable::binary("bi_a"), Variable::binary("bi_b")],
            objective: Objective::new(Direction::Max, AffineExpression::var("bi_a")).unwrap(),
            constraints: vec![parse_constraint("bi_a + bi_b = 1").unwrap()],
            big_m: 1.0,
        };
        assert_eq!(
            emit_latex(&m),
            "\\begin{align}\n\\max \\quad & \\mathit{bi\\_a} \\\\\n\\text{s.t.} \\quad & \\mathit{bi\\_a} + \\mathit{bi\\_b} = 1\n\\end{align}\n\\begin{align*}\n& \\mathit{bi\\_a}, \\mathit{bi\\_b} \\in \\{0, 1\\}\n\\end{align*}\n"
        );
    }

    #[test]
    fn no_constraints() {
        let m = MilpModel {
            variables: vec![Variable::continuous("x")],
            objective: Objective::new(Direction::Min, AffineExpression::term("x", -2.5)).unwrap(),
            constraints: vec![],
            big_m: 1.0,
        };
        let text = emit_latex(&m);
        assert!(text.starts_with("\\begin{align}\n\\min \\quad & -2.5 \\, \\mathit{x}\n\\end{align}\n"));
        assert_eq!(text.matches("\\\\\n").count(), 0);
    }
}
