//! Prompt construction for the three synthesis stages.
//!
//! Prompt texts live in versioned template files (`templates/v1/*.txt`) with
//! `{{name}}` placeholders. Substitution is a single left-to-right pass, so
//! placeholder-like text inside a substituted value is left alone.

use std::collections::HashMap;
use std::path::Path;
use std::sync::OnceLock;

use thiserror::Error;

use crate::ir::INDICATOR_PREFIX;
use crate::parser::{parse_variable_list, render_name_list};
use crate::taxonomy::{ConstraintType, TemplateSet};

/// Marker appended to every classifier prompt, shared with the fine-tuning
/// export.
pub const FINETUNE_SEPARATOR: &str = "\n\n###\n\n";

pub const TEMPLATE_VERSION: &str = "v1";

const OBJECTIVE_MARKER: &str = "Description of Objective Function: ";
const CONSTRAINT_MARKER: &str = "Constraint Description: ";
const FORMULA_MARKER: &str = "which corresponds to the mathematical formula ";

#[derive(Debug, Error, PartialEq)]
pub enum PromptError {
    #[error("precondition violated: {0}")]
    Precondition(&'static str),
    #[error("prompt contract violation: {0}")]
    PromptContractViolation(String),
    #[error("template `{template}` has unknown placeholder `{name}`")]
    UnknownPlaceholder { template: String, name: String },
    #[error("template `{template}` has an unterminated placeholder")]
    Unterminated { template: String },
    #[error("cannot read template: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Variables = 1,
    Classification = 2,
    Generation = 3,
}

/// Which parser validates the reply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplyKind {
    VariableList,
    TypeNumber,
    Objective,
    Constraint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptBundle {
    pub stage: Stage,
    pub text: String,
    pub expected_reply: ReplyKind,
}

/// The five prompt bodies of one template version.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplates {
    pub variables: String,
    pub variables_binary: String,
    pub objective: String,
    pub constraint: String,
    pub logic: String,
}

const TEMPLATE_FILES: [&str; 5] = ["variables", "variables_binary", "objective", "constraint", "logic"];

fn strip_final_newline(s: &str) -> String {
    s.strip_suffix('\n').unwrap_or(s).to_string()
}

impl PromptTemplates {
    pub fn builtin() -> &'static PromptTemplates {
        static BUILTIN: OnceLock<PromptTemplates> = OnceLock::new();
        BUILTIN.get_or_init(|| PromptTemplates {
            variables: strip_final_newline(include_str!("../templates/v1/variables.txt")),
            variables_binary: strip_final_newline(include_str!("../templates/v1/variables_binary.txt")),
            objective: strip_final_newline(include_str!("../templates/v1/objective.txt")),
            constraint: strip_final_newline(include_str!("../templates/v1/constraint.txt")),
            logic: strip_final_newline(include_str!("../templates/v1/logic.txt")),
        })
    }

    /// Load `<dir>/{variables,variables_binary,objective,constraint,logic}.txt`.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self, PromptError> {
        let mut texts = Vec::with_capacity(TEMPLATE_FILES.len());
        for name in TEMPLATE_FILES {
            let path = dir.as_ref().join(format!("{name}.txt"));
            let text = std::fs::read_to_string(&path)
                .map_err(|e| PromptError::Io(format!("{}: {e}", path.display())))?;
            texts.push(strip_final_newline(&text));
        }
        let mut it = texts.into_iter();
        let mut next = || it.next().unwrap();
        let t = PromptTemplates {
            variables: next(),
            variables_binary: next(),
            objective: next(),
            constraint: next(),
            logic: next(),
        };
        // Surface unknown placeholders at load time rather than per prompt.
        for (name, body) in t.named() {
            substitute(name, body, &[
                ("description", ""),
                ("paragraph", ""),
                ("variables", ""),
                ("template", ""),
            ])?;
        }
        Ok(t)
    }

    fn named(&self) -> [(&'static str, &str); 5] {
        [
            ("variables", &self.variables),
            ("variables_binary", &self.variables_binary),
            ("objective", &self.objective),
            ("constraint", &self.constraint),
            ("logic", &self.logic),
        ]
    }
}

/// Replace each `{{name}}` in `body` with its value.
pub fn substitute(template: &str, body: &str, values: &[(&str, &str)]) -> Result<String, PromptError> {
    let lookup: HashMap<&str, &str> = values.iter().copied().collect();
    let mut out = String::with_capacity(body.len());
    let mut rest = body;
    while let Some(open) = rest.find("{{") {
        out.push_str(&rest[..open]);
        let after = &rest[open + 2..];
        let Some(close) = after.find("}}") else {
            return Err(PromptError::Unterminated {
                template: template.to_string(),
            });
        };
        let name = after[..close].trim();
        match lookup.get(name) {
            Some(v) => out.push_str(v),
            None => {
                return Err(PromptError::UnknownPlaceholder {
                    template: template.to_string(),
                    name: name.to_string(),
                })
            }
        }
        rest = &after[close + 2..];
    }
    out.push_str(rest);
    Ok(out)
}

/// The full problem text given to every generation prompt.
pub fn full_description<T: AsRef<str>>(paragraphs: &[T]) -> String {
    paragraphs
        .iter()
        .map(|p| p.as_ref().trim())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Builds prompts from one template version and one type table.
#[derive(Debug, Clone, Copy)]
pub struct PromptBuilder<'a> {
    pub templates: &'a PromptTemplates,
    pub types: &'a TemplateSet,
}

impl Default for PromptBuilder<'static> {
    fn default() -> Self {
        PromptBuilder {
            templates: PromptTemplates::builtin(),
            types: TemplateSet::builtin(),
        }
    }
}

impl<'a> PromptBuilder<'a> {
    pub fn variable_prompt(&self, description: &str, binary_fallback: bool) -> Result<PromptBundle, PromptError> {
        if description.trim().is_empty() {
            return Err(PromptError::Precondition("description is empty"));
        }
        let (name, body) = if binary_fallback {
            ("variables_binary", &self.templates.variables_binary)
        } else {
            ("variables", &self.templates.variables)
        };
        Ok(PromptBundle {
            stage: Stage::Variables,
            text: substitute(name, body, &[("description", description)])?,
            expected_reply: ReplyKind::VariableList,
        })
    }

    /// Text substituted for `{{template}}` in a generation prompt.
    pub fn template_text(&self, code: ConstraintType) -> String {
        let t = self.types.get(code);
        if t.is_logic {
            format!(
                "In natural language descriptions, this type of constraint often contains a format like {}, {FORMULA_MARKER}{}.",
                t.quoted_cues(),
                t.prompt_formula()
            )
        } else {
            t.guidance.clone()
        }
    }

    pub fn generation_prompt(
        &self,
        description: &str,
        paragraph: &str,
        code: ConstraintType,
        variables: &[String],
        binary_variables: &[String],
    ) -> Result<PromptBundle, PromptError> {
        if description.trim().is_empty() {
            return Err(PromptError::Precondition("description is empty"));
        }
        if paragraph.trim().is_empty() {
            return Err(PromptError::Precondition("paragraph is empty"));
        }
        let list = check_contract(code, variables, binary_variables)?;
        let (name, body) = if code.is_objective() {
            ("objective", &self.templates.objective)
        } else if code.is_logic() {
            ("logic", &self.templates.logic)
        } else {
            ("constraint", &self.templates.constraint)
        };
        let rendered_list = render_name_list(list);
        let template = self.template_text(code);
        let text = substitute(
            name,
            body,
            &[
                ("description", description),
                ("paragraph", paragraph),
                ("variables", &rendered_list),
                ("template", &template),
            ],
        )?;
        Ok(PromptBundle {
            stage: Stage::Generation,
            text,
            expected_reply: if code.is_objective() {
                ReplyKind::Objective
            } else {
                ReplyKind::Constraint
            },
        })
    }

    /// Recover code, paragraph and variable list from a generation prompt
    /// built by this builder.
    pub fn inspect_generation_prompt(&self, prompt: &str) -> Option<GenerationPromptInfo> {
        let ((paragraph, after), code) = if let Some(f) = field_after(prompt, OBJECTIVE_MARKER) {
            (f, ConstraintType::OBJECTIVE)
        } else {
            let f = field_after(prompt, CONSTRAINT_MARKER)?;
            let code = self.detect_constraint_code(&prompt[f.1..])?;
            (f, code)
        };
        let rest = &prompt[after..];
        let list_start = rest.find(" variables [")? + " variables ".len();
        let variables = parse_variable_list(&rest[list_start..]).ok()?;
        Some(GenerationPromptInfo {
            code,
            paragraph,
            variables,
        })
    }

    fn detect_constraint_code(&self, prompt: &str) -> Option<ConstraintType> {
        if let Some(at) = prompt.find(FORMULA_MARKER) {
            let formula = prompt[at + FORMULA_MARKER.len()..].split(". ").next()?;
            return self
                .types
                .iter()
                .find(|t| t.is_logic && t.prompt_formula() == formula.trim_end_matches('.'))
                .map(|t| t.code);
        }
        self.types
            .iter()
            .filter(|t| !t.is_logic && !t.code.is_objective() && !t.guidance.is_empty())
            .find(|t| prompt.contains(&format!("\n\n{}\n\n", t.guidance)))
            .map(|t| t.code)
    }
}

/// What a generation prompt asks for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationPromptInfo {
    pub code: ConstraintType,
    pub paragraph: String,
    pub variables: Vec<String>,
}

/// Field text after `marker` up to the next blank line, and the byte offset
/// where it ends.
fn field_after(prompt: &str, marker: &str) -> Option<(String, usize)> {
    let start = prompt.find(marker)? + marker.len();
    let rest = &prompt[start..];
    let end = rest.find("\n\n").unwrap_or(rest.len());
    Some((rest[..end].to_string(), start + end))
}

fn is_indicator_name(name: &str) -> bool {
    name.starts_with(INDICATOR_PREFIX)
}

/// The list a prompt for `code` may embed. Logic codes take binary names;
/// the rest take base names, except in a pure-binary problem where the two
/// lists coincide.
fn check_contract<'v>(
    code: ConstraintType,
    variables: &'v [String],
    binary_variables: &'v [String],
) -> Result<&'v [String], PromptError> {
    let violation = |m: String| Err(PromptError::PromptContractViolation(m));
    if code.is_logic() {
        if binary_variables.is_empty() {
            return violation(format!("type {code} needs a binary variable list"));
        }
        if let Some(bad) = binary_variables.iter().find(|n| !is_indicator_name(n)) {
            return violation(format!("type {code} got non-binary name `{bad}`"));
        }
        return Ok(binary_variables);
    }
    if variables.is_empty() {
        return violation(format!("type {code} needs a variable list"));
    }
    let pure_binary = variables == binary_variables;
    if !pure_binary {
        if let Some(bad) = variables.iter().find(|n| is_indicator_name(n)) {
            return violation(format!("type {code} got binary name `{bad}`"));
        }
    }
    Ok(variables)
}

pub fn classifier_prompt(paragraph: &str) -> Result<PromptBundle, PromptError> {
    if paragraph.trim().is_empty() {
        return Err(PromptError::Precondition("paragraph is empty"));
    }
    Ok(PromptBundle {
        stage: Stage::Classification,
        text: format!("{paragraph}{FINETUNE_SEPARATOR}"),
        expected_reply: ReplyKind::TypeNumber,
    })
}

/// Paragraph text of a classifier prompt.
pub fn classifier_paragraph(prompt: &str) -> Option<&str> {
    prompt.strip_suffix(FINETUNE_SEPARATOR)
}

pub fn variable_prompt(description: &str, binary_fallback: bool) -> Result<PromptBundle, PromptError> {
    PromptBuilder::default().variable_prompt(description, binary_fallback)
}

pub fn generation_prompt(
    description: &str,
    paragraph: &str,
    code: ConstraintType,
    variables: &[String],
    binary_variables: &[String],
) -> Result<PromptBundle, PromptError> {
    PromptBuilder::default().generation_prompt(description, paragraph, code, variables, binary_variables)
}

/// Stage-1 prompt flavour, or `None` for other prompts.
pub fn variable_prompt_kind(prompt: &str) -> Option<bool> {
    let t = PromptTemplates::builtin();
    let head = |body: &str| body.split("{{").next().unwrap_or("").to_string();
    if prompt.starts_with(&head(&t.variables_binary)) {
        Some(true)
    } else if prompt.starts_with(&head(&t.variables)) {
        Some(false)
    } else {
        None
    }
}
