use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::ir::{equivalent, Constraint, ConstraintTag, MilpModel, Sense, Source};
use crate::parser::{parse_constraint, parse_objective};
use crate::pipeline::{objective_paragraph, ProblemInstance, SynthesisTrace};
use crate::scalar::Scalar;

/// What Stage 2 and Stage 3 produced for one paragraph.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratedParagraph {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<u8>,
    /// The expression before supplementation, in grammar form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expression: Option<String>,
}

/// A synthesis output in the shape the grader consumes. `model` is absent
/// when synthesis failed part way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(serialize = "S: Scalar + Serialize", deserialize = "S: Scalar + Deserialize<'de>"))]
pub struct GeneratedResult<S> {
    pub id: String,
    pub paragraphs: Vec<GeneratedParagraph>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<MilpModel<S>>,
}

impl<S: Scalar> GeneratedResult<S> {
    pub fn from_trace(trace: &SynthesisTrace, model: Option<MilpModel<S>>) -> Self {
        GeneratedResult {
            id: trace.instance_id.clone(),
            paragraphs: trace
                .paragraphs
                .iter()
                .map(|p| GeneratedParagraph {
                    code: p.code,
                    expression: p.parsed.clone(),
                })
                .collect(),
            model,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceReport {
    pub id: String,
    /// 1 when the whole model is correct.
    pub t: u8,
    pub d: usize,
    pub tc: usize,
    pub te: usize,
    pub objective_correct: bool,
    /// Constraint paragraphs whose expression is wrong.
    pub wrong_constraints: Vec<usize>,
    pub misclassified: Vec<usize>,
    pub missing_linking: bool,
    pub extra_constraints: usize,
    pub missing_constraints: usize,
}

/// `(pos, neg, factor)` for a two-variable link `pos <= factor * neg`.
fn link_shape<S: Scalar>(c: &Constraint<S>) -> Option<(String, String, S)> {
    let mut diff = c.lhs.minus(&c.rhs);
    match c.sense {
        Sense::Le => {}
        Sense::Ge => diff = diff.scaled(&-S::one()),
        Sense::Eq => return None,
    }
    if diff.len() != 2 || !diff.constant_term().is_zero() {
        return None;
    }
    let mut pos = None;
    let mut neg = None;
    for (n, v) in diff.terms() {
        if v.is_positive() {
            pos = Some((n.to_string(), v.clone()));
        } else {
            neg = Some((n.to_string(), -v.clone()));
        }
    }
    let ((p, a), (n, b)) = (pos?, neg?);
    Some((p, n, b / a))
}

fn links_match<S: Scalar>(g: &Constraint<S>, t: &Constraint<S>, tol: f64, sufficient: Option<&S>) -> bool {
    if equivalent(g, t, tol) {
        return true;
    }
    let (Some(s), Some((gp, gn, gf)), Some((tp, tn, tf))) = (sufficient, link_shape(g), link_shape(t)) else {
        return false;
    };
    gp == tp && gn == tn && gf >= *s && tf >= *s
}

fn expression_correct<S: Scalar>(
    text: Option<&str>,
    paragraph: usize,
    objective_at: usize,
    truth: &MilpModel<S>,
    tol: f64,
) -> bool {
    let Some(text) = text else { return false };
    if paragraph == objective_at {
        return parse_objective::<S>(text).is_ok_and(|o| o.equivalent(&truth.objective, tol));
    }
    let Some(t) = truth
        .constraints
        .iter()
        .find(|c| c.source == Source::Paragraph(paragraph))
    else {
        return false;
    };
    parse_constraint::<S>(text).is_ok_and(|g| equivalent(&g, t, tol))
}

/// Score one generated result against its instance's ground truth.
pub fn grade_instance<S: Scalar>(
    generated: &GeneratedResult<S>,
    instance: &ProblemInstance<S>,
    tol: f64,
) -> Result<InstanceReport, EvalError> {
    let truth = instance
        .ground_truth
        .as_ref()
        .ok_or_else(|| EvalError::MissingGroundTruth(instance.id.clone()))?;
    let d = instance.paragraphs.len();
    if generated.paragraphs.len() != d {
        return Err(EvalError::Alignment(format!(
            "`{}`: generated result has {} paragraphs, ground truth {d}",
            instance.id,
            generated.paragraphs.len()
        )));
    }
    let objective_at = objective_paragraph(truth, d).map_err(|e| EvalError::InvalidTruth(e.to_string()))?;
    let mut labels = vec![0u8; d];
    for c in &truth.constraints {
        if let Source::Paragraph(i) = c.source {
            labels[i] = match c.ctype {
                ConstraintTag::Typed(code) => code.code(),
                _ => {
                    return Err(EvalError::InvalidTruth(format!(
                        "`{}`: constraint for paragraph {i} has no type code",
                        instance.id
                    )))
                }
            };
        }
    }

    let mut report = InstanceReport {
        id: instance.id.clone(),
        t: 0,
        d,
        tc: 0,
        te: 0,
        objective_correct: false,
        wrong_constraints: Vec::new(),
        misclassified: Vec::new(),
        missing_linking: false,
        extra_constraints: 0,
        missing_constraints: 0,
    };
    for (i, g) in generated.paragraphs.iter().enumerate() {
        if g.code == Some(labels[i]) {
            report.tc += 1;
        } else {
            report.misclassified.push(i);
        }
        let ok = expression_correct(g.expression.as_deref(), i, objective_at, truth, tol);
        if ok {
            report.te += 1;
        } else if i != objective_at {
            report.wrong_constraints.push(i);
        }
        if i == objective_at {
            report.objective_correct = ok;
        }
        if g.expression.is_none() {
            report.missing_constraints += 1;
        }
    }

    let truth_links: Vec<&Constraint<S>> = truth.linking_constraints().collect();
    let Some(model) = &generated.model else {
        report.missing_linking = !truth_links.is_empty();
        return Ok(report);
    };
    let mut seen = vec![false; d];
    let mut matched = vec![false; truth_links.len()];
    for c in &model.constraints {
        if c.is_linking() {
            let hit = (0..truth_links.len())
                .find(|&j| !matched[j] && links_match(c, truth_links[j], tol, instance.sufficient_big_m.as_ref()));
            match hit {
                Some(j) => matched[j] = true,
                None => report.extra_constraints += 1,
            }
            continue;
        }
        match c.source {
            Source::Paragraph(i) if i < d && !seen[i] => seen[i] = true,
            _ => report.extra_constraints += 1,
        }
    }
    report.missing_linking = matched.iter().any(|m| !m);
    if report.te == d && !report.missing_linking && report.extra_constraints == 0 && report.missing_constraints == 0 {
        report.t = 1;
    }
    Ok(report)
}
