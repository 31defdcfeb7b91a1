//! Cue-phrase classifier used as the offline baseline.
//!
//! Cues are tried in a fixed precedence: objective, logic, proportion,
//! comparison, then plain bounds. Logic outranks bounds because conditional
//! sentences often mention a bound inside the consequent.

use super::ClassifyError;
use crate::taxonomy::ConstraintType;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleMatch {
    pub code: ConstraintType,
    /// Short description of the cue that decided the code.
    pub cue: String,
}

const OBJECTIVE_CUES: [&str; 5] = ["maximiz", "maximis", "minimiz", "minimis", "how many"];

/// Bound-direction cues, `true` for upper bounds. Negated comparatives come
/// first so that "no more than" is not read as "more than"; otherwise lower
/// cues win over upper ones.
const DIRECTION_CUES: [(&str, bool); 25] = [
    ("no more than", true),
    ("not more than", true),
    ("no less than", false),
    ("not less than", false),
    ("no fewer than", false),
    ("not fewer than", false),
    ("at least", false),
    ("a minimum of", false),
    ("minimum", false),
    ("or more", false),
    ("must exceed", false),
    ("more than", false),
    ("at most", true),
    ("cannot exceed", true),
    ("can not exceed", true),
    ("can't exceed", true),
    ("not exceed", true),
    ("up to", true),
    ("maximum", true),
    ("limit", true),
    ("capacity", true),
    ("available", true),
    ("or less", true),
    ("less than", true),
    ("fewer than", true),
];

const PROPORTION_CUES: [&str; 6] = ["%", "percent", "proportion", "fraction of", "share of", "ratio of"];

const COMPARISON_CUES: [&str; 9] = [
    "times as many",
    "twice as many",
    "as many as",
    "as much as",
    "times the number of",
    "times the amount of",
    "exceed the number of",
    "than the number of",
    "than the amount of",
];

const SUM_CUES: [&str; 5] = ["total", "combined", "altogether", "sum of", "in all"];

const NEGATIONS: [&str; 6] = [" not ", "n't ", " no ", " never ", " none ", " neither "];

fn normalize(text: &str) -> String {
    let lowered = text.to_lowercase().replace(['\u{2019}', '\u{2018}'], "'");
    let words: Vec<&str> = lowered.split_whitespace().collect();
    format!(" {} ", words.join(" "))
}

fn first_cue<'c>(text: &str, cues: &[&'c str]) -> Option<&'c str> {
    cues.iter().copied().find(|c| text.contains(c))
}

fn negated(clause: &str) -> bool {
    let padded = format!(" {} ", clause.trim().trim_end_matches(['.', ',', ';']));
    NEGATIONS.iter().any(|n| padded.contains(n))
}

fn numbers_in(text: &str) -> usize {
    let mut count = 0;
    let mut in_number = false;
    for c in text.chars() {
        let digit = c.is_ascii_digit();
        if digit && !in_number {
            count += 1;
        }
        in_number = digit || (in_number && (c == '.' || c == ','));
    }
    count
}

fn code(c: u8) -> ConstraintType {
    ConstraintType::new(c).expect("rule codes are in range")
}

fn found(c: u8, cue: impl Into<String>) -> Option<RuleMatch> {
    Some(RuleMatch {
        code: code(c),
        cue: cue.into(),
    })
}

fn logic(t: &str) -> Option<RuleMatch> {
    let fixed: [(&str, u8); 9] = [
        ("or neither", 13),
        ("or both", 12),
        ("but not both", 11),
        ("not both", 13),
        ("exactly one of", 11),
        ("at least one of", 12),
        ("at most one of", 13),
        ("only one of", 13),
        (" unless ", 12),
    ];
    for (cue, c) in fixed {
        if t.contains(cue) {
            return found(c, cue.trim());
        }
    }
    let start = t.find(" if ")?;
    if t[..start].ends_with(" only") {
        return found(10, "only if");
    }
    let clause = &t[start + " if ".len()..];
    let (antecedent, consequent) = match clause.find(" then ") {
        Some(i) => (&clause[..i], &clause[i + " then ".len()..]),
        None => {
            let i = clause.find(',')?;
            (&clause[..i], &clause[i + 1..])
        }
    };
    let (a, b) = (negated(antecedent), negated(consequent));
    let c = match (a, b) {
        (false, false) | (true, true) => 10,
        (false, true) => 13,
        (true, false) => 12,
    };
    let sign = |n: bool| if n { "not" } else { "pos" };
    found(c, format!("if {} then {}", sign(a), sign(b)))
}

fn direction(t: &str) -> Option<(bool, &'static str)> {
    DIRECTION_CUES
        .iter()
        .find(|(c, _)| t.contains(c))
        .map(|(c, upper)| (*upper, *c))
}

/// Classify one description by cue phrases.
pub fn classify_rules(text: &str) -> Result<RuleMatch, ClassifyError> {
    let t = normalize(text);
    if t.trim().is_empty() {
        return Err(ClassifyError::Unclassifiable(String::new()));
    }
    if let Some(c) = first_cue(&t, &OBJECTIVE_CUES) {
        return Ok(found(0, c).unwrap());
    }
    if let Some(m) = logic(&t) {
        return Ok(m);
    }
    let dir = direction(&t);
    if let Some(p) = first_cue(&t, &PROPORTION_CUES) {
        if let Some((upper, d)) = dir {
            return Ok(found(if upper { 4 } else { 8 }, format!("{p} + {d}")).unwrap());
        }
    }
    if let Some(c) = first_cue(&t, &COMPARISON_CUES) {
        return Ok(found(9, c).unwrap());
    }
    let Some((upper, d)) = dir else {
        return Err(ClassifyError::Unclassifiable(text.trim().to_string()));
    };
    let (offset, shape) = if numbers_in(&t) >= 2 {
        (3, "weighted")
    } else if let Some(s) = first_cue(&t, &SUM_CUES) {
        (2, s)
    } else {
        (1, "single")
    };
    let c = if upper { offset } else { offset + 4 };
    Ok(found(c, format!("{d} + {shape}")).unwrap())
}
