//! Scoring synthesized models against ground truth.

mod diff;
mod grade;
mod metrics;
mod ratio;

use thiserror::Error;

pub use diff::{diff_models, Implication, Mismatch, ModelDiff};
pub use grade::{grade_instance, GeneratedParagraph, GeneratedResult, InstanceReport};
pub use metrics::{compute_metrics, CorpusMetrics, ErrorTable};
pub use ratio::Ratio;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("alignment: {0}")]
    Alignment(String),
    #[error("instance `{0}` has no ground truth")]
    MissingGroundTruth(String),
    #[error("invalid ground truth: {0}")]
    InvalidTruth(String),
    #[error("no instances to score")]
    EmptyCorpus,
}
