use serde::{Deserialize, Serialize};

use super::SynthesisError;
use crate::ir::{MilpModel, Source};
use crate::scalar::Scalar;

/// A problem description split into paragraphs, each stating the objective
/// or one constraint, with optional ground truth for grading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(serialize = "S: Scalar + Serialize", deserialize = "S: Scalar + Deserialize<'de>"))]
pub struct ProblemInstance<S> {
    pub id: String,
    pub paragraphs: Vec<String>,
    /// Paragraph-aligned reference model: paragraph `i` is the source of
    /// exactly one constraint or is the objective paragraph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<MilpModel<S>>,
    /// Any big-M at least this large is treated as correct when grading.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sufficient_big_m: Option<S>,
}

impl<S: Scalar> ProblemInstance<S> {
    /// Split free text into paragraphs on blank lines.
    pub fn from_text(id: impl Into<String>, text: &str) -> Self {
        let mut paragraphs = Vec::new();
        let mut current: Vec<&str> = Vec::new();
        for line in text.lines() {
            if line.trim().is_empty() {
                if !current.is_empty() {
                    paragraphs.push(current.join("\n"));
                    current.clear();
                }
            } else {
                current.push(line.trim());
            }
        }
        if !current.is_empty() {
            paragraphs.push(current.join("\n"));
        }
        ProblemInstance {
            id: id.into(),
            paragraphs,
            ground_truth: None,
            sufficient_big_m: None,
        }
    }

    pub fn validate(&self) -> Result<(), SynthesisError> {
        let bad = |m: String| Err(SynthesisError::InvalidInstance(m));
        if self.paragraphs.len() < 2 {
            return bad(format!("instance `{}` needs at least 2 paragraphs", self.id));
        }
        if let Some(i) = self.paragraphs.iter().position(|p| p.trim().is_empty()) {
            return bad(format!("paragraph {i} is empty"));
        }
        if let Some(truth) = &self.ground_truth {
            truth
                .validate()
                .map_err(|e| SynthesisError::InvalidInstance(format!("ground truth: {e}")))?;
            objective_paragraph(truth, self.paragraphs.len())?;
        }
        Ok(())
    }
}

/// Index of the paragraph the ground-truth objective comes from: the only
/// paragraph no constraint cites.
pub fn objective_paragraph<S: Scalar>(truth: &MilpModel<S>, paragraphs: usize) -> Result<usize, SynthesisError> {
    let mut cited = vec![0usize; paragraphs];
    for c in &truth.constraints {
        if let Source::Paragraph(i) = c.source {
            if i >= paragraphs {
                return Err(SynthesisError::InvalidInstance(format!(
                    "ground truth cites paragraph {i} of {paragraphs}"
                )));
            }
            cited[i] += 1;
        }
    }
    if let Some(i) = cited.iter().position(|&n| n > 1) {
        return Err(SynthesisError::InvalidInstance(format!(
            "ground truth has several constraints for paragraph {i}"
        )));
    }
    let free: Vec<usize> = (0..paragraphs).filter(|&i| cited[i] == 0).collect();
    match free.as_slice() {
        [one] => Ok(*one),
        _ => Err(SynthesisError::InvalidInstance(format!(
            "ground truth must leave exactly one paragraph for the objective, found {}",
            free.len()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blank_line_split() {
        let inst = ProblemInstance::<f64>::from_text("x", "First line\ncontinues.\n\n\nSecond.\n  \nThird.");
        assert_eq!(inst.paragraphs, ["First line\ncontinues.", "Second.", "Third."]);
        inst.validate().unwrap();
        assert!(ProblemInstance::<f64>::from_text("y", "Only one.").validate().is_err());
    }
}
