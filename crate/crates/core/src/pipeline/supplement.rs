//! Linking constraints between indicators and their base variables.

use super::trace::{BoundSubstitution, SupplementRecord};
use super::SynthesisError;
use crate::ir::{
    AffineExpression, Constraint, ConstraintTag, MilpModel, Sense, Source, VariableKind,
};
use crate::scalar::Scalar;

/// `Some(b)` when `c` says `x <= b` for the single variable `x` with a
/// positive coefficient, in any arrangement of sides.
pub fn single_upper_bound<S: Scalar>(c: &Constraint<S>, x: &str) -> Option<S> {
    let diff = c.lhs.minus(&c.rhs);
    if diff.len() != 1 {
        return None;
    }
    let coef = diff.coefficient(x)?.clone();
    let (coef, constant) = match c.sense {
        Sense::Le => (coef, diff.constant_term().clone()),
        Sense::Ge => (-coef, -diff.constant_term().clone()),
        Sense::Eq => return None,
    };
    // coef * x + constant <= 0 with coef > 0  =>  x <= -constant / coef
    if !coef.is_positive() {
        return None;
    }
    let b = -constant / coef;
    // Avoid a negative zero from `-0 / c`.
    Some(if b.is_zero() { S::zero() } else { b })
}

fn linking<S: Scalar>(
    lhs: AffineExpression<S>,
    rhs: AffineExpression<S>,
) -> Result<Constraint<S>, SynthesisError> {
    Ok(Constraint::new(lhs, Sense::Le, rhs)
        .map_err(|e| SynthesisError::ModelInconsistent(e.to_string()))?
        .with_tag(ConstraintTag::Linking)
        .with_source(Source::Supplemented))
}

/// Add `x <= U*y` and `y <= x` (or `y <= M*x` for non-integer `x`) for every
/// indicator `y` used outside linking constraints, where `U` is the tightest
/// single-variable upper bound on `x` when one exists (the standalone bound
/// is then dropped), else the declared upper bound, else `big_m`. Pure
/// binary models are returned unchanged.
pub fn supplement_linking<S: Scalar>(
    mut model: MilpModel<S>,
    pure_binary: bool,
) -> Result<(MilpModel<S>, SupplementRecord), SynthesisError> {
    let mut record = SupplementRecord {
        skipped_pure_binary: pure_binary,
        big_m: model.big_m.render(),
        ..SupplementRecord::default()
    };
    if pure_binary {
        return Ok((model, record));
    }
    let used: Vec<(String, String)> = model
        .used_indicators()
        .into_iter()
        .map(|v| (v.name.clone(), v.linked_base.clone().unwrap_or_default()))
        .collect();
    let mut added = Vec::new();
    for (y, x) in used {
        let base = model
            .variable(&x)
            .ok_or_else(|| SynthesisError::ModelInconsistent(format!("indicator `{y}` links unknown `{x}`")))?;
        if base.is_binary() {
            return Err(SynthesisError::ModelInconsistent(format!(
                "indicator `{y}` links binary `{x}`"
            )));
        }
        let kind = base.kind;
        let declared = base.upper_bound.clone();
        let bounds: Vec<(usize, S)> = model
            .constraints
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_linking())
            .filter_map(|(i, c)| single_upper_bound(c, &x).map(|b| (i, b)))
            .collect();
        let tightest = bounds
            .iter()
            .map(|(_, b)| b.clone())
            .reduce(|a, b| if b < a { b } else { a })
            .filter(|b| !b.is_negative());
        let upper = match tightest {
            Some(b) => {
                let removed: Vec<usize> = bounds.iter().map(|(i, _)| *i).collect();
                record.substitutions.push(BoundSubstitution {
                    variable: x.clone(),
                    bound: b.render(),
                    removed_paragraphs: removed
                        .iter()
                        .filter_map(|&i| model.constraints[i].source.paragraph())
                        .collect(),
                });
                let mut i = 0;
                model.constraints.retain(|_| {
                    let keep = !removed.contains(&i);
                    i += 1;
                    keep
                });
                b
            }
            None => declared.unwrap_or_else(|| model.big_m.clone()),
        };
        added.push(linking(AffineExpression::var(x.clone()), AffineExpression::term(y.clone(), upper))?);
        let back = if kind == VariableKind::Integer {
            AffineExpression::var(x.clone())
        } else {
            AffineExpression::term(x.clone(), model.big_m.clone())
        };
        added.push(linking(AffineExpression::var(y.clone()), back)?);
        record.indicators.push(y);
    }
    record.added = added.len();
    model.constraints.extend(added);
    Ok((model, record))
}
