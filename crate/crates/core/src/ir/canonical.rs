use super::{AffineExpression, Constraint, IrError, Sense};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CanonicalSense {
    Le,
    Eq,
}

/// Variables on the left sorted by name, constant on the right, `>=` flipped
/// to `<=`, and the lexicographically first coefficient scaled to magnitude
/// 1 (to exactly +1 for equalities).
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalConstraint<S> {
    pub terms: Vec<(String, S)>,
    pub sense: CanonicalSense,
    pub rhs: S,
}

impl<S: Scalar> CanonicalConstraint<S> {
    /// The plain constraint this canonical form describes.
    pub fn to_constraint(&self) -> Constraint<S> {
        let lhs = AffineExpression::normalize_terms(self.terms.iter().cloned(), S::zero())
            .expect("canonical terms are finite");
        let sense = match self.sense {
            CanonicalSense::Le => Sense::Le,
            CanonicalSense::Eq => Sense::Eq,
        };
        Constraint::new(lhs, sense, AffineExpression::constant(self.rhs.clone()))
            .expect("canonical form has at least one term")
    }

    /// Componentwise comparison under relative tolerance.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.sense == other.sense
            && self.terms.len() == other.terms.len()
            && self
                .terms
                .iter()
                .zip(&other.terms)
                .all(|((na, ca), (nb, cb))| na == nb && ca.approx_eq(cb, tol))
            && self.rhs.approx_eq(&other.rhs, tol)
    }
}

pub fn canonicalize<S: Scalar>(c: &Constraint<S>) -> Result<CanonicalConstraint<S>, IrError> {
    let diff = c.lhs.minus(&c.rhs);
    let negate = c.sense == Sense::Ge;
    let mut terms: Vec<(String, S)> = diff
        .terms()
        .map(|(n, v)| (n.to_string(), if negate { -v.clone() } else { v.clone() }))
        .collect();
    let mut rhs = -diff.constant_term().clone();
    if negate {
        rhs = -rhs;
    }
    if terms.is_empty() {
        return Err(IrError::DegenerateConstraint);
    }
    terms.sort_by(|a, b| a.0.cmp(&b.0));
    let sense = match c.sense {
        Sense::Eq => CanonicalSense::Eq,
        Sense::Le | Sense::Ge => CanonicalSense::Le,
    };
    // Inequalities may only be scaled by a positive factor.
    let lead = match sense {
        CanonicalSense::Eq => terms[0].1.clone(),
        CanonicalSense::Le => terms[0].1.abs(),
    };
    for (_, v) in terms.iter_mut() {
        *v = v.clone() / lead.clone();
    }
    rhs = rhs / lead;
    Ok(CanonicalConstraint { terms, sense, rhs })
}

/// Canonical forms match within relative tolerance `tol`. Degenerate
/// constraints are never equivalent to anything.
pub fn equivalent<S: Scalar>(a: &Constraint<S>, b: &Constraint<S>, tol: f64) -> bool {
    match (canonicalize(a), canonicalize(b)) {
        (Ok(ca), Ok(cb)) => ca.approx_eq(&cb, tol),
        _ => false,
    }
}
