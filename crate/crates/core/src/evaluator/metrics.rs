use std::fmt;

use serde::Serialize;

use super::{EvalError, InstanceReport, Ratio};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ErrorTable {
    pub incorrect_models: usize,
    pub incorrect_objectives: usize,
    pub incorrect_constraints: usize,
    pub models_missing_linking: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusMetrics {
    pub n: usize,
    /// Share of completely correct models.
    pub acc1: Ratio,
    /// Share of correctly classified expressions.
    pub acc2: Ratio,
    /// Share of correctly formulated expressions.
    pub acc3: Ratio,
    pub errors: ErrorTable,
}

pub fn compute_metrics(reports: &[InstanceReport]) -> Result<CorpusMetrics, EvalError> {
    if reports.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let n = reports.len() as u64;
    let t: u64 = reports.iter().map(|r| r.t as u64).sum();
    let d: u64 = reports.iter().map(|r| r.d as u64).sum();
    let tc: u64 = reports.iter().map(|r| r.tc as u64).sum();
    let te: u64 = reports.iter().map(|r| r.te as u64).sum();
    Ok(CorpusMetrics {
        n: reports.len(),
        acc1: Ratio::new(t, n),
        acc2: Ratio::new(tc, d),
        acc3: Ratio::new(te, d),
        errors: ErrorTable {
            incorrect_models: reports.iter().filter(|r| r.t == 0).count(),
            incorrect_objectives: reports.iter().filter(|r| !r.objective_correct).count(),
            incorrect_constraints: reports.iter().map(|r| r.wrong_constraints.len()).sum(),
            models_missing_linking: reports.iter().filter(|r| r.missing_linking).count(),
        },
    })
}

impl fmt::Display for CorpusMetrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: [(&str, String); 8] = [
            ("Instances", self.n.to_string()),
            ("ACC1", self.acc1.to_string()),
            ("ACC2", self.acc2.to_string()),
            ("ACC3", self.acc3.to_string()),
            ("No. of incorrect models", self.errors.incorrect_models.to_string()),
            ("No. of incorrect objectives", self.errors.incorrect_objectives.to_string()),
            ("No. of incorrect constraints", self.errors.incorrect_constraints.to_string()),
            (
                "No. of models missing linking constraints",
                self.errors.models_missing_linking.to_string(),
            ),
        ];
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in rows {
            writeln!(f, "{k:<width$}  {v:>6}")?;
        }
        Ok(())
    }
}
