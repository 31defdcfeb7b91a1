//! Stage 2: map a description to its type code.
//!
//! Two backends: a language model reached through the gateway (normally a
//! fine-tuned classifier) and the offline cue-phrase rules. The dataset
//! helpers build, split and export fine-tuning data.

mod dataset;
mod rules;

use thiserror::Error;

pub use dataset::{
    export_finetune, import_finetune, split_dataset, write_finetune, FinetuneRecord, LabeledDescription,
    Origin, SplitDataset, DEFAULT_VALIDATION_RATIO,
};
pub use rules::{classify_rules, RuleMatch};

use crate::evaluator::Ratio;
use crate::gateway::{Gateway, GatewayError};
use crate::prompts::classifier_prompt;
use crate::taxonomy::ConstraintType;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("no cue matched: {0:?}")]
    Unclassifiable(String),
    #[error("reply {0:?} is not a type number 0-13")]
    InvalidLabel(String),
    #[error("class {0} has fewer than 2 items")]
    InsufficientClassData(u8),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

/// Parse a classifier reply such as `" 13"`.
pub fn parse_label(reply: &str) -> Result<ConstraintType, ClassifyError> {
    reply
        .trim()
        .parse::<i64>()
        .ok()
        .and_then(|n| ConstraintType::try_from(n).ok())
        .ok_or_else(|| ClassifyError::InvalidLabel(reply.to_string()))
}

/// Classify through the gateway's classifier model, retrying once on a
/// reply that is not a type number.
pub fn classify_llm(text: &str, gateway: &Gateway) -> Result<ConstraintType, ClassifyError> {
    let prompt = classifier_prompt(text).map_err(|e| ClassifyError::Precondition(e.to_string()))?;
    let model = gateway.config().classifier_model().to_string();
    let mut last = String::new();
    for _ in 0..2 {
        let record = gateway.complete_with_model(&prompt.text, &model)?;
        match parse_label(&record.reply) {
            Ok(code) => return Ok(code),
            Err(_) => last = record.reply,
        }
    }
    Err(ClassifyError::InvalidLabel(last))
}

pub enum Backend<'g> {
    Rules,
    Llm(&'g Gateway),
}

impl Backend<'_> {
    pub fn classify(&self, text: &str) -> Result<ConstraintType, ClassifyError> {
        match self {
            Backend::Rules => classify_rules(text).map(|m| m.code),
            Backend::Llm(g) => classify_llm(text, g),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Score {
    pub correct: u64,
    pub total: u64,
    /// Indices of the items that were misclassified or failed.
    pub misses: Vec<usize>,
}

impl Score {
    pub fn accuracy(&self) -> Ratio {
        Ratio::new(self.correct, self.total)
    }
}

/// Exact-label accuracy of `classify` over `data`. A classification error
/// counts as a miss.
pub fn score_classifier(
    mut classify: impl FnMut(&str) -> Result<ConstraintType, ClassifyError>,
    data: &[LabeledDescription],
) -> Score {
    let mut misses = Vec::new();
    for (i, item) in data.iter().enumerate() {
        if classify(&item.text).ok() != Some(item.label) {
            misses.push(i);
        }
    }
    Score {
        correct: (data.len() - misses.len()) as u64,
        total: data.len() as u64,
        misses,
    }
}
