//! Objective/constraint type taxonomy.
//!
//! Code 0 is the objective; codes 1-9 are the basic bound, proportion and
//! comparison constraints; codes 10-13 are two-statement logic constraints
//! over binary variables. The per-type templates are loaded from a TOML data
//! file; [`TemplateSet::builtin`] parses the copy bundled with the crate.

use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const BUILTIN_TEMPLATES: &str = include_str!("../data/templates.toml");

#[derive(Debug, Error, PartialEq)]
pub enum TaxonomyError {
    #[error("type code {0} is outside 0-13")]
    InvalidCode(i64),
    #[error("type {0} has no NL4Opt counterpart")]
    NoCrosswalk(u8),
    #[error("type 9 needs to know whether the comparison factor equals 1")]
    MissingComparisonFlag,
    #[error("the comparison-factor flag only applies to type 9, not type {0}")]
    UnexpectedComparisonFlag(u8),
    #[error("template data: {0}")]
    TemplateData(String),
}

/// Objective/constraint type number, 0-13.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u8")]
pub struct ConstraintType(u8);

impl ConstraintType {
    pub const OBJECTIVE: ConstraintType = ConstraintType(0);
    pub const MAX_CODE: u8 = 13;

    pub fn new(code: u8) -> Result<Self, TaxonomyError> {
        if code <= Self::MAX_CODE {
            Ok(ConstraintType(code))
        } else {
            Err(TaxonomyError::InvalidCode(code as i64))
        }
    }

    pub fn code(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = ConstraintType> {
        (0..=Self::MAX_CODE).map(ConstraintType)
    }

    pub fn is_objective(self) -> bool {
        self.0 == 0
    }

    pub fn is_logic(self) -> bool {
        (10..=13).contains(&self.0)
    }

    pub fn uses_binary_vars(self) -> bool {
        self.is_logic()
    }
}

impl TryFrom<i64> for ConstraintType {
    type Error = TaxonomyError;

    fn try_from(value: i64) -> Result<Self, Self::Error> {
        u8::try_from(value)
            .ok()
            .filter(|c| *c <= Self::MAX_CODE)
            .map(ConstraintType)
            .ok_or(TaxonomyError::InvalidCode(value))
    }
}

impl From<ConstraintType> for u8 {
    fn from(value: ConstraintType) -> Self {
        value.0
    }
}

impl fmt::Display for ConstraintType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Template {
    pub code: ConstraintType,
    pub name: String,
    pub meaning: String,
    pub formula_pattern: String,
    #[serde(default)]
    pub cues: Vec<String>,
    pub is_logic: bool,
    pub uses_binary_vars: bool,
    #[serde(default)]
    pub guidance: String,
}

impl Template {
    /// Logic formula rewritten over the placeholder names `a`/`b`, as used
    /// in generation prompts (`y_A + y_B <= 1` becomes `a + b <= 1`).
    pub fn prompt_formula(&self) -> String {
        self.formula_pattern.replace("y_A", "a").replace("y_B", "b")
    }

    /// Cue phrasings joined as `"X" or "Y" or "Z"`.
    pub fn quoted_cues(&self) -> String {
        self.cues
            .iter()
            .map(|c| format!("\"{c}\""))
            .collect::<Vec<_>>()
            .join(" or ")
    }
}

#[derive(Debug, Deserialize)]
struct TemplateFile {
    #[allow(dead_code)]
    version: u32,
    template: Vec<Template>,
}

/// One template per code 0-13, indexed by code.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateSet {
    templates: Vec<Template>,
}

impl TemplateSet {
    pub fn from_toml_str(text: &str) -> Result<Self, TaxonomyError> {
        let file: TemplateFile =
            toml::from_str(text).map_err(|e| TaxonomyError::TemplateData(e.to_string()))?;
        let mut slots: Vec<Option<Template>> = vec![None; ConstraintType::MAX_CODE as usize + 1];
        for t in file.template {
            let idx = t.code.code() as usize;
            if slots[idx].is_some() {
                return Err(TaxonomyError::TemplateData(format!(
                    "duplicate template for code {}",
                    t.code
                )));
            }
            if t.is_logic != t.code.is_logic() || t.uses_binary_vars != t.code.uses_binary_vars() {
                return Err(TaxonomyError::TemplateData(format!(
                    "code {} has inconsistent logic flags",
                    t.code
                )));
            }
            if t.is_logic && t.cues.is_empty() {
                return Err(TaxonomyError::TemplateData(format!(
                    "logic code {} lists no cue phrasings",
                    t.code
                )));
            }
            slots[idx] = Some(t);
        }
        let templates = slots
            .into_iter()
            .enumerate()
            .map(|(i, t)| t.ok_or_else(|| TaxonomyError::TemplateData(format!("missing code {i}"))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TemplateSet { templates })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TaxonomyError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| TaxonomyError::TemplateData(e.to_string()))?;
        Self::from_toml_str(&text)
    }

    /// The bundled table.
    pub fn builtin() -> &'static TemplateSet {
        static BUILTIN: OnceLock<TemplateSet> = OnceLock::new();
        BUILTIN.get_or_init(|| {
            TemplateSet::from_toml_str(BUILTIN_TEMPLATES).expect("bundled templates are valid")
        })
    }

    pub fn get(&self, code: ConstraintType) -> &Template {
        &self.templates[code.code() as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Template> {
        self.templates.iter()
    }
}

/// Template for `code` from the bundled table.
pub fn template_for(code: ConstraintType) -> &'static Template {
    TemplateSet::builtin().get(code)
}

/// NL4Opt competition type number for one of our basic codes 1-9.
///
/// `d_equals_one` distinguishes the two balance-constraint variants of code 9
/// and must be given exactly when `code` is 9.
pub fn crosswalk(code: ConstraintType, d_equals_one: Option<bool>) -> Result<u8, TaxonomyError> {
    let c = code.code();
    match (c, d_equals_one) {
        (9, None) => return Err(TaxonomyError::MissingComparisonFlag),
        (9, Some(true)) => return Ok(7),
        (9, Some(false)) => return Ok(6),
        (0 | 10..=13, _) => return Err(TaxonomyError::NoCrosswalk(c)),
        (_, Some(_)) => return Err(TaxonomyError::UnexpectedComparisonFlag(c)),
        _ => {}
    }
    Ok(match c {
        1 => 2,
        2 | 6 => 1,
        3 | 7 => 4,
        4 | 8 => 5,
        5 => 3,
        _ => unreachable!(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ct(c: u8) -> ConstraintType {
        ConstraintType::new(c).unwrap()
    }

    #[test]
    fn codes_are_bounded() {
        assert!(ConstraintType::new(13).is_ok());
        assert_eq!(ConstraintType::new(14), Err(TaxonomyError::InvalidCode(14)));
        assert!(ConstraintType::try_from(-1i64).is_err());
        assert_eq!(ConstraintType::all().count(), 14);
    }

    #[test]
    fn template_rows() {
        assert_eq!(
            template_for(ct(3)).formula_pattern,
            "sum of variables multiplied by their weight <= constant"
        );
        let ten = template_for(ct(10));
        assert!(ten.cues.iter().any(|c| c == "If A then B"));
        assert_eq!(ten.formula_pattern, "y_A <= y_B");
        let zero = template_for(ct(0));
        assert!(zero.meaning.contains("Maximize") && zero.meaning.contains("Minimize"));
        assert_eq!(template_for(ct(13)).prompt_formula(), "a + b <= 1");
    }

    #[test]
    fn logic_flags_and_distinct_patterns() {
        let set = TemplateSet::builtin();
        for t in set.iter() {
            assert_eq!(t.is_logic, (10..=13).contains(&t.code.code()));
            assert_eq!(t.uses_binary_vars, t.is_logic);
        }
        let mut patterns: Vec<_> = (10..=13).map(|c| &set.get(ct(c)).formula_pattern).collect();
        patterns.sort();
        patterns.dedup();
        assert_eq!(patterns.len(), 4);
    }

    #[test]
    fn crosswalk_matches_table() {
        let expected = [(1, 2), (2, 1), (3, 4), (4, 5), (5, 3), (6, 1), (7, 4), (8, 5)];
        for (ours, theirs) in expected {
            assert_eq!(crosswalk(ct(ours), None), Ok(theirs));
        }
        assert_eq!(crosswalk(ct(9), Some(true)), Ok(7));
        assert_eq!(crosswalk(ct(9), Some(false)), Ok(6));
        assert_eq!(crosswalk(ct(9), None), Err(TaxonomyError::MissingComparisonFlag));
        assert_eq!(crosswalk(ct(11), None), Err(TaxonomyError::NoCrosswalk(11)));
        assert_eq!(crosswalk(ct(4), Some(true)), Err(TaxonomyError::UnexpectedComparisonFlag(4)));
    }

    #[test]
    fn rejects_incomplete_table() {
        let text = "version = 1\n[[template]]\ncode = 0\nname = \"o\"\nmeaning = \"m\"\nformula_pattern = \"f\"\nis_logic = false\nuses_binary_vars = false\n";
        assert!(matches!(
            TemplateSet::from_toml_str(text),
            Err(TaxonomyError::TemplateData(_))
        ));
    }
}
