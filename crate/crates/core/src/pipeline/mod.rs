//! The three synthesis stages plus linking supplementation.
//!
//! Stage 1 asks for the decision variables and derives one binary indicator
//! per base variable. Stage 2 assigns each paragraph a type code. Stage 3
//! generates each paragraph's expression from its type template. Finally
//! unused indicators are pruned and linking constraints added.

mod instance;
mod supplement;
mod trace;

use std::collections::HashSet;

use thiserror::Error;

pub use instance::{objective_paragraph, ProblemInstance};
pub use supplement::{single_upper_bound, supplement_linking};
pub use trace::{BoundSubstitution, Exchange, ParagraphTrace, SupplementRecord, SynthesisTrace};

use crate::classifier::{classify_rules, parse_label};
use crate::gateway::{Gateway, GatewayError};
use crate::ir::{indicator_name, Constraint, MilpModel, Objective, Source, Variable, INDICATOR_PREFIX};
use crate::parser::{parse_constraint_reply, parse_objective_reply, parse_variable_list, ParseErrorKind};
use crate::prompts::{classifier_prompt, full_description, PromptBuilder};
use crate::scalar::Scalar;
use crate::taxonomy::ConstraintType;

/// Default big-M used in linking constraints.
pub const DEFAULT_BIG_M: f64 = 100_000.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthesisError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("no decision variables were identified")]
    NoVariablesFound,
    #[error("invalid variable set: {0}")]
    InvalidVariableSet(String),
    #[error("stage {stage}{}: {error}", .index.map(|i| format!(", paragraph {i}")).unwrap_or_default())]
    Gateway {
        stage: u8,
        index: Option<usize>,
        error: GatewayError,
    },
    #[error("paragraph {index}: could not classify ({reason})")]
    ClassificationFailed { index: usize, reason: String },
    #[error("paragraph {index}: generation failed ({reason})")]
    GenerationFailed { index: usize, reason: String },
    #[error("paragraphs {first} and {second} are both classified as the objective")]
    DuplicateObjective { first: usize, second: usize },
    #[error("no paragraph is classified as the objective")]
    MissingObjective,
    #[error("inconsistent model: {0}")]
    ModelInconsistent(String),
    #[error("prompt: {0}")]
    Prompt(String),
}

/// A failed run with everything recorded up to the failure.
#[derive(Debug, Clone, Error)]
#[error("{error}")]
pub struct SynthesisFailure {
    pub error: SynthesisError,
    pub trace: SynthesisTrace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClassifierMode {
    /// Ask the gateway's classifier model.
    #[default]
    Gateway,
    /// Use the built-in cue rules without a model call.
    Rules,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisConfig<S> {
    pub big_m: S,
    pub classifier: ClassifierMode,
    /// Extra attempts after an unusable reply.
    pub reprompts: u32,
}

impl<S: Scalar> Default for SynthesisConfig<S> {
    fn default() -> Self {
        SynthesisConfig {
            big_m: S::from_f64(DEFAULT_BIG_M).expect("default big-M is representable"),
            classifier: ClassifierMode::Gateway,
            reprompts: 1,
        }
    }
}

/// Stage-1 outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableSet {
    /// Names for codes 0-9: base variables, or the binaries of a pure
    /// binary problem.
    pub base: Vec<String>,
    /// Names for logic codes: indicators, or the same binaries.
    pub binary: Vec<String>,
    pub pure_binary: bool,
}

impl VariableSet {
    pub fn declarations<S>(&self) -> Vec<Variable<S>> {
        if self.pure_binary {
            self.binary.iter().map(Variable::binary).collect()
        } else {
            let mut out: Vec<Variable<S>> = self.base.iter().map(Variable::integer).collect();
            out.extend(self.base.iter().map(|b| Variable::indicator_for(b)));
            out
        }
    }
}

fn check_names(names: &[String]) -> Result<(), SynthesisError> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(SynthesisError::InvalidVariableSet(format!("duplicate name `{n}`")));
        }
    }
    Ok(())
}

fn complete_with_retries(
    gateway: &Gateway,
    prompt: &str,
    tries: u32,
    stage: u8,
    exchanges: &mut Vec<Exchange>,
    mut accept: impl FnMut(&str) -> Result<(), String>,
) -> Result<Result<String, String>, SynthesisError> {
    let mut last = String::new();
    for _ in 0..tries {
        let result = gateway.complete(prompt);
        exchanges.push(Exchange::from_result(prompt, &result));
        let rec = result.map_err(|error| SynthesisError::Gateway {
            stage,
            index: None,
            error,
        })?;
        match accept(&rec.reply) {
            Ok(()) => return Ok(Ok(rec.reply)),
            Err(e) => last = e,
        }
    }
    Ok(Err(last))
}

/// Stage 1: ask for base variables, falling back to binaries when the
/// answer is empty.
pub fn identify_variables(
    description: &str,
    gateway: &Gateway,
    reprompts: u32,
    trace: &mut SynthesisTrace,
) -> Result<VariableSet, SynthesisError> {
    let builder = PromptBuilder::default();
    let tries = reprompts + 1;
    let list_ok = |reply: &str| match parse_variable_list(reply) {
        Ok(_) => Ok(()),
        Err(e) if e.kind == ParseErrorKind::EmptyList => Ok(()),
        Err(e) => Err(e.to_string()),
    };
    let parse = |reply: &str| parse_variable_list(reply).unwrap_or_default();

    let first = builder
        .variable_prompt(description, false)
        .map_err(|e| SynthesisError::Prompt(e.to_string()))?;
    let reply = complete_with_retries(gateway, &first.text, tries, 1, &mut trace.stage1, list_ok)?
        .map_err(SynthesisError::InvalidVariableSet)?;
    let names = parse(&reply);
    if !names.is_empty() {
        check_names(&names)?;
        let binary = names.iter().filter(|n| n.starts_with(INDICATOR_PREFIX)).count();
        if binary == names.len() {
            // A list made only of binaries is the answer the prompt asks for
            // when the problem has no continuous or integer variables.
            return Ok(VariableSet {
                base: names.clone(),
                binary: names,
                pure_binary: true,
            });
        }
        if binary > 0 {
            return Err(SynthesisError::InvalidVariableSet(format!(
                "mixed list of base and binary names: {}",
                names.join(", ")
            )));
        }
        let indicators = names.iter().map(|n| indicator_name(n)).collect();
        return Ok(VariableSet {
            base: names,
            binary: indicators,
            pure_binary: false,
        });
    }

    let fallback = builder
        .variable_prompt(description, true)
        .map_err(|e| SynthesisError::Prompt(e.to_string()))?;
    let reply = complete_with_retries(gateway, &fallback.text, tries, 1, &mut trace.stage1, list_ok)?
        .map_err(SynthesisError::InvalidVariableSet)?;
    let names = parse(&reply);
    if names.is_empty() {
        return Err(SynthesisError::NoVariablesFound);
    }
    check_names(&names)?;
    if let Some(bad) = names.iter().find(|n| !n.starts_with(INDICATOR_PREFIX)) {
        return Err(SynthesisError::InvalidVariableSet(format!(
            "binary variable `{bad}` lacks the `{INDICATOR_PREFIX}` prefix"
        )));
    }
    Ok(VariableSet {
        base: names.clone(),
        binary: names,
        pure_binary: true,
    })
}

/// Stage 2: one type code per paragraph.
pub fn classify_paragraphs(
    paragraphs: &[String],
    gateway: &Gateway,
    mode: ClassifierMode,
    reprompts: u32,
    trace: &mut SynthesisTrace,
) -> Result<Vec<ConstraintType>, SynthesisError> {
    let mut codes = Vec::with_capacity(paragraphs.len());
    if mode == ClassifierMode::Rules {
        for (i, p) in paragraphs.iter().enumerate() {
            let m = classify_rules(p).map_err(|e| SynthesisError::ClassificationFailed {
                index: i,
                reason: e.to_string(),
            })?;
            trace.paragraphs[i].classification.push(Exchange::local(p, format!(" {} ({})", m.code, m.cue)));
            trace.paragraphs[i].code = Some(m.code.code());
            codes.push(m.code);
        }
        return Ok(codes);
    }
    let prompts: Vec<String> = paragraphs
        .iter()
        .map(|p| classifier_prompt(p).map(|b| b.text))
        .collect::<Result<_, _>>()
        .map_err(|e| SynthesisError::Prompt(e.to_string()))?;
    let model = gateway.config().classifier_model().to_string();
    let first = gateway.complete_batch_with_model(&prompts, &model);
    for (i, result) in first.into_iter().enumerate() {
        let pt = &mut trace.paragraphs[i];
        pt.classification.push(Exchange::from_result(&prompts[i], &result));
        let mut result = result;
        let mut tries_left = reprompts;
        let code = loop {
            let rec = result.map_err(|error| SynthesisError::Gateway {
                stage: 2,
                index: Some(i),
                error,
            })?;
            match parse_label(&rec.reply) {
                Ok(code) => break code,
                Err(e) if tries_left == 0 => {
                    return Err(SynthesisError::ClassificationFailed {
                        index: i,
                        reason: e.to_string(),
                    })
                }
                Err(_) => {
                    tries_left -= 1;
                    result = gateway.complete_with_model(&prompts[i], &model);
                    pt.classification.push(Exchange::from_result(&prompts[i], &result));
                }
            }
        };
        pt.code = Some(code.code());
        codes.push(code);
    }
    Ok(codes)
}

enum Generated<S> {
    Objective(Objective<S>),
    Constraint(Constraint<S>),
}

fn parse_generated<S: Scalar>(
    reply: &str,
    code: ConstraintType,
    allowed: &[String],
) -> Result<(Generated<S>, bool), String> {
    let (g, diag) = if code.is_objective() {
        let (o, d) = parse_objective_reply::<S>(reply).map_err(|e| e.to_string())?;
        (Generated::Objective(o), d)
    } else {
        let (c, d) = parse_constraint_reply::<S>(reply).map_err(|e| e.to_string())?;
        (Generated::Constraint(c), d)
    };
    let names: Vec<&str> = match &g {
        Generated::Objective(o) => o.expr.variables().collect(),
        Generated::Constraint(c) => c.variables().collect(),
    };
    if let Some(bad) = names.iter().find(|n| !allowed.iter().any(|a| a == *n)) {
        return Err(format!("reply uses undeclared variable `{bad}`"));
    }
    Ok((g, diag.recovered))
}

/// Run all stages on one instance.
pub fn synthesize<S: Scalar>(
    instance: &ProblemInstance<S>,
    gateway: &Gateway,
    config: &SynthesisConfig<S>,
) -> Result<(MilpModel<S>, SynthesisTrace), SynthesisFailure> {
    let mut trace = SynthesisTrace {
        instance_id: instance.id.clone(),
        paragraphs: instance
            .paragraphs
            .iter()
            .enumerate()
            .map(|(index, text)| ParagraphTrace {
                index,
                text: text.clone(),
                ..ParagraphTrace::default()
            })
            .collect(),
        ..SynthesisTrace::default()
    };
    match run(instance, gateway, config, &mut trace) {
        Ok(model) => Ok((model, trace)),
        Err(error) => Err(SynthesisFailure { error, trace }),
    }
}

fn run<S: Scalar>(
    instance: &ProblemInstance<S>,
    gateway: &Gateway,
    config: &SynthesisConfig<S>,
    trace: &mut SynthesisTrace,
) -> Result<MilpModel<S>, SynthesisError> {
    instance.validate()?;
    if !config.big_m.is_positive() {
        return Err(SynthesisError::InvalidInstance("big-M must be positive".into()));
    }
    let description = full_description(&instance.paragraphs);

    let vars = identify_variables(&description, gateway, config.reprompts, trace)?;
    trace.pure_binary = vars.pure_binary;
    trace.variables = vars.base.clone();

    let codes = classify_paragraphs(&instance.paragraphs, gateway, config.classifier, config.reprompts, trace)?;
    let objectives: Vec<usize> = (0..codes.len()).filter(|&i| codes[i].is_objective()).collect();
    match objectives.as_slice() {
        [] => return Err(SynthesisError::MissingObjective),
        [_] => {}
        [first, second, ..] => {
            return Err(SynthesisError::DuplicateObjective {
                first: *first,
                second: *second,
            })
        }
    }

    let builder = PromptBuilder::default();
    let mut prompts = Vec::with_capacity(codes.len());
    for (i, code) in codes.iter().enumerate() {
        let p = builder
            .generation_prompt(&description, &instance.paragraphs[i], *code, &vars.base, &vars.binary)
            .map_err(|e| SynthesisError::Prompt(format!("paragraph {i}: {e}")))?;
        prompts.push(p.text);
    }
    let first = gateway.complete_batch(&prompts);
    let mut objective = None;
    let mut constraints = Vec::new();
    for (i, result) in first.into_iter().enumerate() {
        let code = codes[i];
        let allowed = if code.is_logic() { &vars.binary } else { &vars.base };
        let pt = &mut trace.paragraphs[i];
        pt.generation.push(Exchange::from_result(&prompts[i], &result));
        let mut result = result;
        let mut tries_left = config.reprompts;
        let (generated, repaired) = loop {
            let rec = result.map_err(|error| SynthesisError::Gateway {
                stage: 3,
                index: Some(i),
                error,
            })?;
            match parse_generated::<S>(&rec.reply, code, allowed) {
                Ok(g) => break g,
                Err(reason) if tries_left == 0 => {
                    pt.error = Some(reason.clone());
                    return Err(SynthesisError::GenerationFailed { index: i, reason });
                }
                Err(_) => {
                    tries_left -= 1;
                    result = gateway.complete(&prompts[i]);
                    pt.generation.push(Exchange::from_result(&prompts[i], &result));
                }
            }
        };
        pt.repaired = repaired;
        match generated {
            Generated::Objective(o) => {
                pt.parsed = Some(o.to_string());
                objective = Some(o);
            }
            Generated::Constraint(c) => {
                let c = c.with_type(code).with_source(Source::Paragraph(i));
                pt.parsed = Some(c.to_string());
                constraints.push(c);
            }
        }
    }

    let mut model = MilpModel {
        variables: vars.declarations(),
        objective: objective.ok_or(SynthesisError::MissingObjective)?,
        constraints,
        big_m: config.big_m.clone(),
    };
    let used: HashSet<String> = model.used_indicators().iter().map(|v| v.name.clone()).collect();
    let (kept, pruned): (Vec<_>, Vec<_>) = model
        .variables
        .into_iter()
        .partition(|v| !v.is_indicator() || used.contains(&v.name));
    trace.pruned_indicators = pruned.into_iter().map(|v| v.name).collect();
    model.variables = kept;

    let (model, record) = supplement_linking(model, vars.pure_binary)?;
    trace.supplementation = Some(record);
    model
        .validate()
        .map_err(|e| SynthesisError::ModelInconsistent(e.to_string()))?;
    model
        .check_linking()
        .map_err(|e| SynthesisError::ModelInconsistent(e.to_string()))?;
    Ok(model)
}
