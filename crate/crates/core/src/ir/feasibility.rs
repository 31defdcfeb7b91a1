use std::collections::HashMap;

use super::{IrError, MilpModel, Sense};
use crate::scalar::Scalar;

pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Violation<S> {
    /// Position in `model.constraints`.
    pub index: usize,
    pub lhs_value: S,
    pub rhs_value: S,
}

/// Every constraint of `model` violated by `assignment`.
pub fn check_feasible<S: Scalar>(
    model: &MilpModel<S>,
    assignment: &HashMap<String, S>,
) -> Result<Vec<Violation<S>>, IrError> {
    for v in &model.variables {
        let value = assignment
            .get(&v.name)
            .ok_or_else(|| IrError::IncompleteAssignment(v.name.clone()))?;
        if v.is_binary() && !(value.is_zero() || value.is_one()) {
            return Err(IrError::NonBinaryAssignment(v.name.clone()));
        }
    }
    let tol = S::from_f64(FEASIBILITY_TOL).unwrap_or_else(S::zero);
    let mut violations = Vec::new();
    for (index, c) in model.constraints.iter().enumerate() {
        let lhs = c.lhs.evaluate(assignment)?;
        let rhs = c.rhs.evaluate(assignment)?;
        let slack_tol = tol.clone() * S::one().max_of(lhs.abs()).max_of(rhs.abs());
        let gap = lhs.clone() - rhs.clone();
        let violated = match c.sense {
            Sense::Le => gap > slack_tol,
            Sense::Ge => -gap > slack_tol,
            Sense::Eq => gap.abs() > slack_tol,
        };
        if violated {
            violations.push(Violation {
                index,
                lhs_value: lhs,
                rhs_value: rhs,
            });
        }
    }
    Ok(violations)
}
