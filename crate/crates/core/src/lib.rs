//! Synthesis of mixed-integer linear programs from natural-language problem
//! descriptions.
//!
//! The core types are generic over the coefficient [`Scalar`]; the aliases
//! below fix the common choices.

pub mod classifier;
pub mod evaluator;
pub mod gateway;
pub mod io;
pub mod ir;
pub mod parser;
pub mod pipeline;
pub mod prompts;
pub mod scalar;
pub mod taxonomy;

pub use ir::{
    AffineExpression, Constraint, ConstraintTag, Direction, MilpModel, Objective, Sense, Source,
    Variable, VariableKind,
};
pub use scalar::{Rational, Scalar};
pub use taxonomy::ConstraintType;

pub type Model = MilpModel<f64>;
pub type Model32 = MilpModel<f32>;
pub type ExactModel = MilpModel<Rational>;
pub type Expression = AffineExpression<f64>;
pub type ExactExpression = AffineExpression<Rational>;
pub type LinearConstraint = Constraint<f64>;
pub type ExactConstraint = Constraint<Rational>;
pub type ModelObjective = Objective<f64>;
