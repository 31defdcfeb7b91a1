use serde::{Deserialize, Serialize};

use crate::gateway::{CompletionRecord, GatewayError};

/// One prompt and what came back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    pub prompt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reply: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub attempts: u32,
}

impl Exchange {
    pub fn from_result(prompt: &str, r: &Result<CompletionRecord, GatewayError>) -> Self {
        match r {
            Ok(rec) => Exchange {
                prompt: prompt.to_string(),
                reply: Some(rec.reply.clone()),
                error: None,
                attempts: rec.attempts,
            },
            Err(e) => Exchange {
                prompt: prompt.to_string(),
                reply: None,
                error: Some(e.to_string()),
                attempts: 0,
            },
        }
    }

    /// An exchange answered without a model call.
    pub fn local(input: &str, reply: String) -> Self {
        Exchange {
            prompt: input.to_string(),
            reply: Some(reply),
            error: None,
            attempts: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParagraphTrace {
    pub index: usize,
    pub text: String,
    /// Stage-2 type code.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<u8>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub classification: Vec<Exchange>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub generation: Vec<Exchange>,
    /// The accepted expression in grammar form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parsed: Option<String>,
    /// Set when the reply only parsed after repair.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub repaired: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSubstitution {
    pub variable: String,
    pub bound: String,
    /// Paragraphs whose standalone bound was folded into the linking pair.
    pub removed_paragraphs: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SupplementRecord {
    pub skipped_pure_binary: bool,
    pub indicators: Vec<String>,
    pub big_m: String,
    pub substitutions: Vec<BoundSubstitution>,
    pub added: usize,
}

/// Audit record of one synthesis run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SynthesisTrace {
    pub instance_id: String,
    pub variables: Vec<String>,
    pub pure_binary: bool,
    pub stage1: Vec<Exchange>,
    pub paragraphs: Vec<ParagraphTrace>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pruned_indicators: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supplementation: Option<SupplementRecord>,
}
