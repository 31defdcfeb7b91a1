//! Offline provider driven by a per-instance fixture.
//!
//! Stage-1 prompts are answered with the fixture's variable lists, Stage-2
//! prompts with the cue-rule classifier, and Stage-3 prompts by filling the
//! requested type's formula with the fixture slot for that paragraph. The
//! reply depends only on the prompt text and the fixture.

use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{Provider, ProviderError};
use crate::classifier::classify_rules;
use crate::parser::render_name_list;
use crate::prompts::{classifier_paragraph, variable_prompt_kind, PromptBuilder};
use crate::scalar::Scalar;
use crate::taxonomy::ConstraintType;

/// Reply given when a fixture cannot answer a generation prompt. It never
/// parses, so the pipeline sees a generation failure.
pub const STUB_UNKNOWN_REPLY: &str = "I am not sure how to model this statement.";

/// Coefficient data for one paragraph. Which fields are read depends on the
/// type code in the prompt; see `docs/fixtures.md`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParagraphSlot {
    pub paragraph: String,
    /// Verbatim reply, bypassing the template fill.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reply: Option<String>,
    /// `max` or `min`, objective only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<String>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub terms: IndexMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    /// Proportion constraints: `subject <= share * (over...)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub share: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub over: Vec<String>,
    /// Comparison constraints: `factor * smaller <= larger`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smaller: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub larger: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<f64>,
    /// Logic constraints: statement variables, full binary names.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFixture {
    /// Answer to the first variable prompt.
    #[serde(default)]
    pub variables: Vec<String>,
    /// Answer to the binary fallback prompt.
    #[serde(default)]
    pub binary_variables: Vec<String>,
    #[serde(default)]
    pub slots: Vec<ParagraphSlot>,
}

impl InstanceFixture {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, String> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    fn slot(&self, paragraph: &str) -> Option<&ParagraphSlot> {
        self.slots.iter().find(|s| s.paragraph.trim() == paragraph.trim())
    }
}

pub struct StubProvider {
    fixture: InstanceFixture,
}

fn sum(terms: impl IntoIterator<Item = (String, f64)>) -> Option<String> {
    let mut out = String::new();
    for (name, coef) in terms {
        if coef == 0.0 {
            continue;
        }
        let sep = match (out.is_empty(), coef < 0.0) {
            (true, true) => "-",
            (true, false) => "",
            (false, true) => " - ",
            (false, false) => " + ",
        };
        out.push_str(sep);
        if coef.abs() != 1.0 {
            out.push_str(&coef.abs().render());
            out.push('*');
        }
        out.push_str(&name);
    }
    (!out.is_empty()).then_some(out)
}

fn fill(code: ConstraintType, slot: &ParagraphSlot) -> Option<String> {
    if let Some(r) = &slot.reply {
        return Some(r.clone());
    }
    let terms = || sum(slot.terms.iter().map(|(n, c)| (n.clone(), *c)));
    let c = code.code();
    Some(match c {
        0 => {
            let keyword = match slot.direction.as_deref()? {
                "max" => "Maximize",
                "min" => "Minimize",
                _ => return None,
            };
            format!("{keyword} {}", terms()?)
        }
        1..=3 | 5..=7 => {
            let op = if c <= 3 { "<=" } else { ">=" };
            format!("{} {op} {}", terms()?, slot.bound?.render_signed())
        }
        4 | 8 => {
            let op = if c == 4 { "<=" } else { ">=" };
            let share = slot.share?;
            let rhs = sum(slot.over.iter().map(|n| (n.clone(), share)))?;
            format!("{} {op} {rhs}", slot.subject.as_ref()?)
        }
        9 => {
            let factor = slot.factor.unwrap_or(1.0);
            let lhs = sum([(slot.smaller.clone()?, factor)])?;
            format!("{lhs} <= {}", slot.larger.as_ref()?)
        }
        10 => format!("{} <= {}", slot.a.as_ref()?, slot.b.as_ref()?),
        11 => format!("{} + {} = 1", slot.a.as_ref()?, slot.b.as_ref()?),
        12 => format!("{} + {} >= 1", slot.a.as_ref()?, slot.b.as_ref()?),
        13 => format!("{} + {} <= 1", slot.a.as_ref()?, slot.b.as_ref()?),
        _ => return None,
    })
}

trait RenderSigned {
    fn render_signed(&self) -> String;
}

impl RenderSigned for f64 {
    fn render_signed(&self) -> String {
        if *self < 0.0 {
            format!("-{}", self.abs().render())
        } else {
            self.render()
        }
    }
}

impl StubProvider {
    pub fn new(fixture: InstanceFixture) -> Self {
        StubProvider { fixture }
    }

    pub fn reply(&self, prompt: &str) -> Result<String, ProviderError> {
        if let Some(binary) = variable_prompt_kind(prompt) {
            let list = if binary {
                &self.fixture.binary_variables
            } else {
                &self.fixture.variables
            };
            return Ok(render_name_list(list));
        }
        if let Some(paragraph) = classifier_paragraph(prompt) {
            return Ok(match classify_rules(paragraph) {
                Ok(m) => format!(" {}", m.code),
                Err(_) => " unknown".to_string(),
            });
        }
        let info = PromptBuilder::default()
            .inspect_generation_prompt(prompt)
            .ok_or_else(|| ProviderError::Rejected("stub does not recognise this prompt".into()))?;
        Ok(self
            .fixture
            .slot(&info.paragraph)
            .and_then(|slot| fill(info.code, slot))
            .unwrap_or_else(|| STUB_UNKNOWN_REPLY.to_string()))
    }
}

impl Provider for StubProvider {
    fn id(&self) -> &str {
        "stub"
    }

    fn complete(&self, prompt: &str, _model: &str) -> Result<String, ProviderError> {
        self.reply(prompt)
    }
}
