use std::collections::HashMap;
use std::fmt;

use indexmap::IndexMap;

use super::IrError;
use crate::scalar::Scalar;

/// Linear terms plus a constant. Terms keep insertion order, which is the
/// order they are rendered in; equality ignores that order.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineExpression<S> {
    terms: IndexMap<String, S>,
    constant: S,
}

impl<S: Scalar> Default for AffineExpression<S> {
    fn default() -> Self {
        Self::constant(S::zero())
    }
}

impl<S: Scalar> AffineExpression<S> {
    pub fn constant(value: S) -> Self {
        AffineExpression {
            terms: IndexMap::new(),
            constant: value,
        }
    }

    pub fn var(name: impl Into<String>) -> Self {
        Self::term(name, S::one())
    }

    pub fn term(name: impl Into<String>, coefficient: S) -> Self {
        let mut terms = IndexMap::new();
        if !coefficient.is_zero() {
            terms.insert(name.into(), coefficient);
        }
        AffineExpression {
            terms,
            constant: S::zero(),
        }
    }

    /// Build a normalized expression from possibly repeated terms: repeated
    /// names are summed, zero coefficients dropped, first-seen order kept.
    pub fn normalize_terms<I, N>(terms: I, constant: S) -> Result<Self, IrError>
    where
        I: IntoIterator<Item = (N, S)>,
        N: Into<String>,
    {
        if !constant.is_finite_value() {
            return Err(IrError::InvalidExpression("non-finite constant".into()));
        }
        let mut merged: IndexMap<String, S> = IndexMap::new();
        for (name, coef) in terms {
            let name = name.into();
            if !coef.is_finite_value() {
                return Err(IrError::InvalidExpression(format!(
                    "non-finite coefficient on `{name}`"
                )));
            }
            match merged.get_mut(&name) {
                Some(existing) => *existing = existing.clone() + coef,
                None => {
                    merged.insert(name, coef);
                }
            }
        }
        merged.retain(|_, c| !c.is_zero());
        Ok(AffineExpression {
            terms: merged,
            constant,
        })
    }

    /// Re-validate and drop zero terms. Idempotent.
    pub fn normalize(&self) -> Result<Self, IrError> {
        Self::normalize_terms(
            self.terms.iter().map(|(n, c)| (n.clone(), c.clone())),
            self.constant.clone(),
        )
    }

    pub fn terms(&self) -> impl ExactSizeIterator<Item = (&str, &S)> {
        self.terms.iter().map(|(n, c)| (n.as_str(), c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_term(&self) -> &S {
        &self.constant
    }

    pub fn coefficient(&self, name: &str) -> Option<&S> {
        self.terms.get(name)
    }

    pub fn has_variables(&self) -> bool {
        !self.terms.is_empty()
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.terms.keys().map(String::as_str)
    }

    pub fn scaled(&self, factor: &S) -> Self {
        let mut out = AffineExpression {
            terms: self
                .terms
                .iter()
                .map(|(n, c)| (n.clone(), c.clone() * factor.clone()))
                .collect(),
            constant: self.constant.clone() * factor.clone(),
        };
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    /// `self - other`, merged and zero-free.
    pub fn minus(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (name, coef) in &other.terms {
            match terms.get_mut(name) {
                Some(c) => *c = c.clone() - coef.clone(),
                None => {
                    terms.insert(name.clone(), -coef.clone());
                }
            }
        }
        terms.retain(|_, c| !c.is_zero());
        AffineExpression {
            terms,
            constant: self.constant.clone() - other.constant.clone(),
        }
    }

    pub fn evaluate(&self, assignment: &HashMap<String, S>) -> Result<S, IrError> {
        let mut total = self.constant.clone();
        for (name, coef) in &self.terms {
            let value = assignment
                .get(name)
                .ok_or_else(|| IrError::IncompleteAssignment(name.clone()))?;
            total = total + coef.clone() * value.clone();
        }
        Ok(total)
    }
}

impl<S: Scalar> fmt::Display for AffineExpression<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::render_expression(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_terms_are_folded_away() {
        let e = AffineExpression::normalize_terms([("trucks", 5.0), ("trucks", 0.0)], 0.0).unwrap();
        assert_eq!(e, AffineExpression::term("trucks", 5.0));
        let e = AffineExpression::normalize_terms([("x", 2.0), ("x", -2.0)], 0.0).unwrap();
        assert!(e.is_empty());
    }

    #[test]
    fn duplicates_merge() {
        let e = AffineExpression::normalize_terms([("ships", 1.0), ("ships", 1.0)], 0.0).unwrap();
        assert_eq!(e.coefficient("ships"), Some(&2.0));
        assert_eq!(e.len(), 1);
    }

    #[test]
    fn timber_weights_unchanged() {
        let raw = [("trucks", 12.0), ("aeroplanes", 20.0), ("ships", 15.0), ("trains", 10.0)];
        let e = AffineExpression::normalize_terms(raw, 0.0).unwrap();
        let names: Vec<_> = e.variables().collect();
        assert_eq!(names, ["trucks", "aeroplanes", "ships", "trains"]);
        assert_eq!(e.normalize().unwrap(), e);
    }

    #[test]
    fn non_finite_rejected() {
        assert!(matches!(
            AffineExpression::normalize_terms([("x", f64::NAN)], 0.0),
            Err(IrError::InvalidExpression(_))
        ));
        assert!(AffineExpression::<f64>::normalize_terms(Vec::<(String, f64)>::new(), f64::INFINITY).is_err());
    }

    #[test]
    fn equality_ignores_order() {
        let a = AffineExpression::normalize_terms([("x", 1.0), ("y", 2.0)], 0.0).unwrap();
        let b = AffineExpression::normalize_terms([("y", 2.0), ("x", 1.0)], 0.0).unwrap();
        assert_eq!(a, b);
    }
}
