//! MILP intermediate representation.
//!
//! Variables, affine expressions, typed constraints, the objective and the
//! model that holds them. Everything here is an immutable value type generic
//! over the coefficient [`Scalar`].

mod canonical;
mod expression;
mod feasibility;
mod serde_impl;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use canonical::{canonicalize, equivalent, CanonicalConstraint, CanonicalSense};
pub use expression::AffineExpression;
pub use feasibility::{check_feasible, Violation, FEASIBILITY_TOL};

use crate::scalar::Scalar;
use crate::taxonomy::ConstraintType;

/// Relative tolerance used for coefficient comparisons throughout.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Prefix shared by every binary indicator name.
pub const INDICATOR_PREFIX: &str = "bi_";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IrError {
    #[error("invalid expression: {0}")]
    InvalidExpression(String),
    #[error("degenerate constraint: no variable has a nonzero coefficient")]
    DegenerateConstraint,
    #[error("constraint references no variable")]
    NoVariables,
    #[error("assignment is missing variable `{0}`")]
    IncompleteAssignment(String),
    #[error("binary variable `{0}` assigned a value other than 0 or 1")]
    NonBinaryAssignment(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

/// `true` for ASCII identifiers that start with a letter.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn indicator_name(base: &str) -> String {
    format!("{INDICATOR_PREFIX}{base}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableKind {
    Continuous,
    Integer,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Serialize", deserialize = "S: Deserialize<'de>"))]
pub struct Variable<S> {
    pub name: String,
    pub kind: VariableKind,
    /// The continuous/integer variable a binary indicator shadows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linked_base: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper_bound: Option<S>,
}

impl<S> Variable<S> {
    pub fn new(name: impl Into<String>, kind: VariableKind) -> Self {
        Variable {
            name: name.into(),
            kind,
            linked_base: None,
            upper_bound: None,
        }
    }

    pub fn integer(name: impl Into<String>) -> Self {
        Self::new(name, VariableKind::Integer)
    }

    pub fn continuous(name: impl Into<String>) -> Self {
        Self::new(name, VariableKind::Continuous)
    }

    pub fn binary(name: impl Into<String>) -> Self {
        Self::new(name, VariableKind::Binary)
    }

    /// `bi_<base>` linked to `base`.
    pub fn indicator_for(base: &str) -> Self {
        Variable {
            name: indicator_name(base),
            kind: VariableKind::Binary,
            linked_base: Some(base.to_string()),
            upper_bound: None,
        }
    }

    pub fn is_binary(&self) -> bool {
        self.kind == VariableKind::Binary
    }

    pub fn is_indicator(&self) -> bool {
        self.linked_base.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Max,
    Min,
}

impl Direction {
    pub fn keyword(self) -> &'static str {
        match self {
            Direction::Max => "Maximize",
            Direction::Min => "Minimize",
        }
    }
}

/// What a constraint is: a classified paragraph, a supplemented linking
/// constraint, or not yet typed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintTag {
    Typed(ConstraintType),
    Linking,
    Unknown,
}

impl ConstraintTag {
    pub fn code(self) -> Option<ConstraintType> {
        match self {
            ConstraintTag::Typed(c) => Some(c),
            _ => None,
        }
    }
}

/// Where a constraint came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Paragraph(usize),
    Supplemented,
}

impl Source {
    pub fn paragraph(self) -> Option<usize> {
        match self {
            Source::Paragraph(i) => Some(i),
            Source::Supplemented => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<S> {
    pub lhs: AffineExpression<S>,
    pub sense: Sense,
    pub rhs: AffineExpression<S>,
    pub ctype: ConstraintTag,
    pub source: Source,
}

impl<S: Scalar> Constraint<S> {
    /// Untyped constraint; both sides are normalized.
    pub fn new(
        lhs: AffineExpression<S>,
        sense: Sense,
        rhs: AffineExpression<S>,
    ) -> Result<Self, IrError> {
        let lhs = lhs.normalize()?;
        let rhs = rhs.normalize()?;
        if !lhs.has_variables() && !rhs.has_variables() {
            return Err(IrError::NoVariables);
        }
        Ok(Constraint {
            lhs,
            sense,
            rhs,
            ctype: ConstraintTag::Unknown,
            source: Source::Supplemented,
        })
    }

    pub fn with_type(mut self, code: ConstraintType) -> Self {
        self.ctype = ConstraintTag::Typed(code);
        self
    }

    pub fn with_tag(mut self, tag: ConstraintTag) -> Self {
        self.ctype = tag;
        self
    }

    pub fn with_source(mut self, source: Source) -> Self {
        self.source = source;
        self
    }

    pub fn is_linking(&self) -> bool {
        self.ctype == ConstraintTag::Linking
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.lhs.variables().chain(self.rhs.variables())
    }

    pub fn references(&self, name: &str) -> bool {
        self.lhs.coefficient(name).is_some() || self.rhs.coefficient(name).is_some()
    }
}

impl<S: Scalar> fmt::Display for Constraint<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::render_constraint(self))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Objective<S> {
    pub direction: Direction,
    pub expr: AffineExpression<S>,
}

impl<S: Scalar> Objective<S> {
    pub fn new(direction: Direction, expr: AffineExpression<S>) -> Result<Self, IrError> {
        let expr = expr.normalize()?;
        if !expr.has_variables() {
            return Err(IrError::NoVariables);
        }
        Ok(Objective { direction, expr })
    }

    /// Same direction and term-wise equal coefficients; the constant is
    /// ignored.
    pub fn equivalent(&self, other: &Self, tol: f64) -> bool {
        self.direction == other.direction
            && self.expr.len() == other.expr.len()
            && self.expr.terms().all(|(name, c)| {
                other
                    .expr
                    .coefficient(name)
                    .is_some_and(|o| c.approx_eq(o, tol))
            })
    }
}

impl<S: Scalar> fmt::Display for Objective<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::render_objective(self))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpModel<S> {
    pub variables: Vec<Variable<S>>,
    pub objective: Objective<S>,
    pub constraints: Vec<Constraint<S>>,
    pub big_m: S,
}

impl<S: Scalar> MilpModel<S> {
    pub fn variable(&self, name: &str) -> Option<&Variable<S>> {
        self.variables.iter().find(|v| v.name == name)
    }

    /// Only binary variables are declared.
    pub fn is_pure_binary(&self) -> bool {
        self.variables.iter().all(Variable::is_binary)
    }

    pub fn linking_constraints(&self) -> impl Iterator<Item = &Constraint<S>> {
        self.constraints.iter().filter(|c| c.is_linking())
    }

    /// Indicators referenced by at least one non-linking constraint, in
    /// declaration order.
    pub fn used_indicators(&self) -> Vec<&Variable<S>> {
        self.variables
            .iter()
            .filter(|v| v.is_indicator())
            .filter(|v| {
                self.constraints
                    .iter()
                    .any(|c| !c.is_linking() && c.references(&v.name))
            })
            .collect()
    }

    /// Structural checks: naming, indicator links, declared references.
    pub fn validate(&self) -> Result<(), IrError> {
        let bad = |msg: String| Err(IrError::InvalidModel(msg));
        if !(self.big_m > S::zero()) {
            return bad("big_m must be positive".into());
        }
        let mut seen = HashSet::new();
        for v in &self.variables {
            if !is_identifier(&v.name) {
                return bad(format!("`{}` is not a valid identifier", v.name));
            }
            if !seen.insert(v.name.as_str()) {
                return bad(format!("duplicate variable `{}`", v.name));
            }
            if let Some(ub) = &v.upper_bound {
                if ub.is_negative() {
                    return bad(format!("negative upper bound on `{}`", v.name));
                }
            }
        }
        for v in &self.variables {
            let Some(base) = &v.linked_base else { continue };
            if !v.is_binary() {
                return bad(format!("non-binary `{}` has a linked base", v.name));
            }
            if v.name != indicator_name(base) {
                return bad(format!("indicator `{}` must be named `{}`", v.name, indicator_name(base)));
            }
            match self.variable(base) {
                Some(b) if !b.is_binary() => {}
                Some(_) => return bad(format!("indicator `{}` links a binary variable", v.name)),
                None => return bad(format!("indicator `{}` links unknown `{base}`", v.name)),
            }
        }
        if !self.objective.expr.has_variables() {
            return bad("objective references no variable".into());
        }
        for name in self.objective.expr.variables() {
            if !seen.contains(name) {
                return bad(format!("objective references undeclared `{name}`"));
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if !c.lhs.has_variables() && !c.rhs.has_variables() {
                return bad(format!("constraint {i} references no variable"));
            }
            for name in c.variables() {
                if !seen.contains(name) {
                    return bad(format!("constraint {i} references undeclared `{name}`"));
                }
            }
        }
        Ok(())
    }

    /// Every used indicator of a mixed model carries exactly two linking
    /// constraints.
    pub fn check_linking(&self) -> Result<(), IrError> {
        if self.is_pure_binary() {
            return Ok(());
        }
        for v in self.used_indicators() {
            let n = self
                .linking_constraints()
                .filter(|c| c.references(&v.name))
                .count();
            if n != 2 {
                return Err(IrError::InvalidModel(format!(
                    "indicator `{}` has {n} linking constraints, expected 2",
                    v.name
                )));
            }
        }
        Ok(())
    }
}
