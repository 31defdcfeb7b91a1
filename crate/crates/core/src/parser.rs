//! Parsing and rendering of the textual math exchanged with language models.
//!
//! Grammar (see `docs/grammar.ebnf` for the full contract):
//!
//! ```text
//! expression := [sign] term { ("+" | "-") term }
//! term       := number [ ["*"] identifier ] | identifier
//! number     := decimal [ "/" decimal ]
//! constraint := expression ("<=" | ">=" | "=") expression
//! objective  := ("Maximize" | "Minimize") [":"] expression
//! ```
//!
//! `≤`/`≥` are accepted for `<=`/`>=`. Rendering is the inverse: parsing a
//! rendered value reproduces it exactly.

use std::fmt;

use thiserror::Error;

use crate::ir::{
    is_identifier, AffineExpression, Constraint, Direction, IrError, Objective, Sense,
};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    EmptyExpression,
    MissingDirection,
    NoList,
    EmptyList,
    InvalidName,
    InvalidExpression,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} (at offset {position})")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Character offset into the parsed text.
    pub position: usize,
    pub message: String,
}

impl ParseError {
    fn new(kind: ParseErrorKind, position: usize, message: impl Into<String>) -> Self {
        ParseError {
            kind,
            position,
            message: message.into(),
        }
    }

    fn syntax(position: usize, message: impl Into<String>) -> Self {
        Self::new(ParseErrorKind::Syntax, position, message)
    }
}

/// Outcome of parsing a raw model reply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostics {
    pub position: usize,
    pub message: String,
    /// The reply only parsed after stripping surrounding prose.
    pub recovered: bool,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Cmp(Sense),
    Colon,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = i;
        let single = |tok| Token { tok, pos };
        match c {
            c if c.is_whitespace() => i += 1,
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Num(chars[start..i].iter().collect()),
                    pos: start,
                });
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    pos: start,
                });
            }
            '+' => {
                out.push(single(Tok::Plus));
                i += 1;
            }
            '-' | '\u{2212}' => {
                out.push(single(Tok::Minus));
                i += 1;
            }
            '*' | '\u{00d7}' => {
                out.push(single(Tok::Star));
                i += 1;
            }
            '/' => {
                out.push(single(Tok::Slash));
                i += 1;
            }
            ':' => {
                out.push(single(Tok::Colon));
                i += 1;
            }
            '\u{2264}' => {
                out.push(single(Tok::Cmp(Sense::Le)));
                i += 1;
            }
            '\u{2265}' => {
                out.push(single(Tok::Cmp(Sense::Ge)));
                i += 1;
            }
            '<' | '>' => {
                if chars.get(i + 1) == Some(&'=') {
                    let sense = if c == '<' { Sense::Le } else { Sense::Ge };
                    out.push(single(Tok::Cmp(sense)));
                    i += 2;
                } else {
                    return Err(ParseError::syntax(pos, "strict inequalities are not supported"));
                }
            }
            '=' => {
                out.push(single(Tok::Cmp(Sense::Eq)));
                i += 1;
            }
            other => {
                return Err(ParseError::syntax(pos, format!("unexpected character `{other}`")));
            }
        }
    }
    Ok(out)
}

struct ExprParser<'a, S> {
    toks: &'a [Token],
    at: usize,
    end_pos: usize,
    terms: Vec<(String, S)>,
    constant: S,
}

impl<'a, S: Scalar> ExprParser<'a, S> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.tok)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end_pos, |t| t.pos)
    }

    fn number(&mut self, raw: &str, pos: usize) -> Result<S, ParseError> {
        S::parse_decimal(raw).ok_or_else(|| ParseError::syntax(pos, format!("malformed number `{raw}`")))
    }

    /// decimal [ "/" decimal ]
    fn coefficient(&mut self) -> Result<S, ParseError> {
        let (raw, pos) = match self.toks.get(self.at) {
            Some(Token { tok: Tok::Num(raw), pos }) => (raw.clone(), *pos),
            _ => return Err(ParseError::syntax(self.pos(), "expected a number")),
        };
        self.at += 1;
        let mut value = self.number(&raw, pos)?;
        if self.peek() == Some(&Tok::Slash) {
            self.at += 1;
            let (raw, pos) = match self.toks.get(self.at) {
                Some(Token { tok: Tok::Num(raw), pos }) => (raw.clone(), *pos),
                _ => return Err(ParseError::syntax(self.pos(), "expected a denominator")),
            };
            self.at += 1;
            let denom = self.number(&raw, pos)?;
            if denom.is_zero() {
                return Err(ParseError::syntax(pos, "division by zero"));
            }
            value = value / denom;
        }
        Ok(value)
    }

    fn term(&mut self, negative: bool) -> Result<(), ParseError> {
        let sign = |v: S| if negative { -v } else { v };
        match self.peek().cloned() {
            Some(Tok::Ident(name)) => {
                self.at += 1;
                self.terms.push((name, sign(S::one())));
            }
            Some(Tok::Num(_)) => {
                let coef = self.coefficient()?;
                let starred = self.peek() == Some(&Tok::Star);
                if starred {
                    self.at += 1;
                }
                match self.peek().cloned() {
                    Some(Tok::Ident(name)) => {
                        self.at += 1;
                        self.terms.push((name, sign(coef)));
                    }
                    _ if starred => {
                        return Err(ParseError::syntax(self.pos(), "expected a variable after `*`"))
                    }
                    _ => self.constant = self.constant.clone() + sign(coef),
                }
            }
            Some(_) => return Err(ParseError::syntax(self.pos(), "expected a term")),
            None => return Err(ParseError::syntax(self.end_pos, "expression ends early")),
        }
        Ok(())
    }

    fn expression(mut self) -> Result<AffineExpression<S>, ParseError> {
        if self.toks.is_empty() {
            return Err(ParseError::new(
                ParseErrorKind::EmptyExpression,
                self.end_pos,
                "empty expression",
            ));
        }
        let mut negative = match self.peek() {
            Some(Tok::Minus) => {
                self.at += 1;
                true
            }
            Some(Tok::Plus) => {
                self.at += 1;
                false
            }
            _ => false,
        };
        loop {
            self.term(negative)?;
            match self.peek() {
                None => break,
                Some(Tok::Plus) => negative = false,
                Some(Tok::Minus) => negative = true,
                Some(_) => {
                    return Err(ParseError::syntax(self.pos(), "expected `+` or `-` between terms"))
                }
            }
            self.at += 1;
        }
        AffineExpression::normalize_terms(self.terms, self.constant)
            .map_err(|e| ParseError::new(ParseErrorKind::InvalidExpression, 0, e.to_string()))
    }
}

fn expression_from_tokens<S: Scalar>(toks: &[Token], end_pos: usize) -> Result<AffineExpression<S>, ParseError> {
    ExprParser {
        toks,
        at: 0,
        end_pos,
        terms: Vec::new(),
        constant: S::zero(),
    }
    .expression()
}

fn reject_stray(toks: &[Token]) -> Result<(), ParseError> {
    if let Some(t) = toks.iter().find(|t| matches!(t.tok, Tok::Colon | Tok::Cmp(_))) {
        return Err(ParseError::syntax(t.pos, "unexpected token in expression"));
    }
    Ok(())
}

pub fn parse_expression<S: Scalar>(text: &str) -> Result<AffineExpression<S>, ParseError> {
    let toks = tokenize(text)?;
    reject_stray(&toks)?;
    expression_from_tokens(&toks, text.chars().count())
}

pub fn parse_constraint<S: Scalar>(text: &str) -> Result<Constraint<S>, ParseError> {
    let toks = tokenize(text)?;
    let end = text.chars().count();
    let cmps: Vec<usize> = toks
        .iter()
        .enumerate()
        .filter(|(_, t)| matches!(t.tok, Tok::Cmp(_)))
        .map(|(i, _)| i)
        .collect();
    let split = match cmps.as_slice() {
        [one] => *one,
        [] => return Err(ParseError::syntax(end, "expected one of `<=`, `>=`, `=`")),
        [_, second, ..] => {
            return Err(ParseError::syntax(toks[*second].pos, "more than one comparison operator"))
        }
    };
    let Tok::Cmp(sense) = toks[split].tok else { unreachable!() };
    let (left, right) = (&toks[..split], &toks[split + 1..]);
    reject_stray(left)?;
    reject_stray(right)?;
    if left.is_empty() {
        return Err(ParseError::syntax(toks[split].pos, "missing left-hand side"));
    }
    if right.is_empty() {
        return Err(ParseError::syntax(end, "missing right-hand side"));
    }
    let lhs = expression_from_tokens(left, toks[split].pos)?;
    let rhs = expression_from_tokens(right, end)?;
    Constraint::new(lhs, sense, rhs).map_err(|e| match e {
        IrError::NoVariables => ParseError::new(
            ParseErrorKind::InvalidExpression,
            0,
            "constraint references no variable",
        ),
        other => ParseError::new(ParseErrorKind::InvalidExpression, 0, other.to_string()),
    })
}

const DIRECTION_WORDS: [(&str, Direction); 4] = [
    ("maximize", Direction::Max),
    ("maximise", Direction::Max),
    ("minimize", Direction::Min),
    ("minimise", Direction::Min),
];

pub fn parse_objective<S: Scalar>(text: &str) -> Result<Objective<S>, ParseError> {
    let trimmed = text.trim_start();
    let offset = text.chars().count() - trimmed.chars().count();
    let lowered = trimmed.to_ascii_lowercase();
    let Some((word, direction)) = DIRECTION_WORDS.iter().find(|(w, _)| lowered.starts_with(w)) else {
        return Err(ParseError::new(
            ParseErrorKind::MissingDirection,
            offset,
            "objective must start with Maximize or Minimize",
        ));
    };
    let rest = &trimmed[word.len()..];
    if rest.chars().next().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(ParseError::new(
            ParseErrorKind::MissingDirection,
            offset,
            "objective must start with Maximize or Minimize",
        ));
    }
    let base = offset + word.len();
    let mut toks = tokenize(rest).map_err(|e| shift(e, base))?;
    if toks.first().is_some_and(|t| t.tok == Tok::Colon) {
        toks.remove(0);
    }
    reject_stray(&toks).map_err(|e| shift(e, base))?;
    let expr = expression_from_tokens(&toks, rest.chars().count()).map_err(|e| shift(e, base))?;
    Objective::new(*direction, expr).map_err(|_| {
        ParseError::new(ParseErrorKind::InvalidExpression, base, "objective references no variable")
    })
}

fn shift(mut e: ParseError, by: usize) -> ParseError {
    e.position += by;
    e
}

const QUOTES: [char; 7] = ['\'', '"', '`', '\u{2018}', '\u{2019}', '\u{201c}', '\u{201d}'];

/// Names from the first bracketed list in `text`. Quotes around names are
/// optional; surrounding prose is ignored.
pub fn parse_variable_list(text: &str) -> Result<Vec<String>, ParseError> {
    let Some(open) = text.find('[') else {
        return Err(ParseError::new(ParseErrorKind::NoList, 0, "no bracketed list found"));
    };
    let Some(close_rel) = text[open..].find(']') else {
        return Err(ParseError::new(
            ParseErrorKind::NoList,
            text[..open].chars().count(),
            "unterminated list",
        ));
    };
    let inner = &text[open + 1..open + close_rel];
    let mut names = Vec::new();
    let mut cursor = open + 1;
    for raw in inner.split(',') {
        let pos = text[..cursor].chars().count();
        cursor += raw.len() + 1;
        let item = raw.trim().trim_matches(|c| QUOTES.contains(&c)).trim();
        if item.is_empty() {
            if raw.trim().is_empty() {
                continue;
            }
            return Err(ParseError::new(ParseErrorKind::InvalidName, pos, "empty name"));
        }
        if !is_identifier(item) {
            return Err(ParseError::new(
                ParseErrorKind::InvalidName,
                pos,
                format!("`{item}` is not a valid variable name"),
            ));
        }
        names.push(item.to_string());
    }
    if names.is_empty() {
        return Err(ParseError::new(
            ParseErrorKind::EmptyList,
            text[..open].chars().count(),
            "the list is empty",
        ));
    }
    Ok(names)
}

fn candidate_lines(raw: &str) -> Vec<String> {
    let mut out = Vec::new();
    for line in raw.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with("```") {
            continue;
        }
        let line = line
            .trim_matches(|c| c == '`' || c == '$')
            .trim()
            .trim_end_matches(['.', ';'])
            .trim();
        out.push(line.to_string());
        if let Some((_, after)) = line.rsplit_once(':') {
            out.push(after.trim().to_string());
        }
    }
    out
}

fn parse_with_repair<T>(
    raw: &str,
    parse: impl Fn(&str) -> Result<T, ParseError>,
) -> Result<(T, ParseDiagnostics), ParseError> {
    let first = match parse(raw.trim()) {
        Ok(v) => {
            return Ok((
                v,
                ParseDiagnostics {
                    position: 0,
                    message: "parsed".into(),
                    recovered: false,
                },
            ))
        }
        Err(e) => e,
    };
    let mut found: Vec<(T, String)> = Vec::new();
    let mut seen_lines: Vec<String> = Vec::new();
    for cand in candidate_lines(raw) {
        if let Ok(v) = parse(&cand) {
            if !seen_lines.contains(&cand) {
                seen_lines.push(cand.clone());
                found.push((v, cand));
            }
        }
    }
    // A line and its post-colon suffix can both parse; count distinct lines.
    if found.len() == 2 && found[0].1.ends_with(&found[1].1) {
        found.truncate(1);
    }
    if found.len() == 1 {
        let (value, line) = found.pop().unwrap();
        return Ok((
            value,
            ParseDiagnostics {
                position: first.position,
                message: format!("recovered `{line}` after: {}", first.message),
                recovered: true,
            },
        ));
    }
    Err(first)
}

/// Parse a model reply expected to hold one constraint, with one repair
/// pass that strips code fences, prose lines and trailing periods.
pub fn parse_constraint_reply<S: Scalar>(raw: &str) -> Result<(Constraint<S>, ParseDiagnostics), ParseError> {
    parse_with_repair(raw, parse_constraint)
}

pub fn parse_objective_reply<S: Scalar>(raw: &str) -> Result<(Objective<S>, ParseDiagnostics), ParseError> {
    parse_with_repair(raw, parse_objective)
}

fn push_term<S: Scalar>(out: &mut String, first: bool, coef: &S, name: Option<&str>) {
    let negative = coef.is_negative();
    match (first, negative) {
        (true, true) => out.push('-'),
        (true, false) => {}
        (false, true) => out.push_str(" - "),
        (false, false) => out.push_str(" + "),
    }
    let magnitude = coef.abs();
    match name {
        Some(n) if magnitude.is_one() => out.push_str(n),
        Some(n) => {
            out.push_str(&magnitude.render());
            out.push('*');
            out.push_str(n);
        }
        None => out.push_str(&magnitude.render()),
    }
}

pub fn render_expression<S: Scalar>(expr: &AffineExpression<S>) -> String {
    let mut out = String::new();
    let mut first = true;
    for (name, coef) in expr.terms() {
        push_term(&mut out, first, coef, Some(name));
        first = false;
    }
    let c = expr.constant_term();
    if !c.is_zero() || first {
        push_term(&mut out, first, c, None);
    }
    out
}

pub fn render_constraint<S: Scalar>(c: &Constraint<S>) -> String {
    format!(
        "{} {} {}",
        render_expression(&c.lhs),
        c.sense.symbol(),
        render_expression(&c.rhs)
    )
}

pub fn render_objective<S: Scalar>(o: &Objective<S>) -> String {
    format!("{} {}", o.direction.keyword(), render_expression(&o.expr))
}

/// Python-style list of single-quoted names, as used in prompts.
pub fn render_name_list<T: AsRef<str>>(names: &[T]) -> String {
    let inner: Vec<String> = names.iter().map(|n| format!("'{}'", n.as_ref())).collect();
    format!("[{}]", inner.join(", "))
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn expr(s: &str) -> AffineExpression<f64> {
        parse_expression(s).unwrap()
    }

    #[test]
    fn objective_sum() {
        let e = expr("5*trucks + 10*aeroplanes + 8*ships + 7*trains");
        assert_eq!(e.len(), 4);
        assert_eq!(e.coefficient("aeroplanes"), Some(&10.0));
        assert_eq!(*e.constant_term(), 0.0);
    }

    #[test]
    fn implicit_unit_coefficient() {
        assert_eq!(expr("trucks"), AffineExpression::var("trucks"));
        assert_eq!(expr("2 x"), AffineExpression::term("x", 2.0));
        assert_eq!(expr("2x"), AffineExpression::term("x", 2.0));
    }

    #[test]
    fn decimals_fractions_constants() {
        let e = expr("0.5*x + 1/4*y + 3");
        assert_eq!(e.coefficient("x"), Some(&0.5));
        assert_eq!(e.coefficient("y"), Some(&0.25));
        assert_eq!(*e.constant_term(), 3.0);
        let r: AffineExpression<Rational> = parse_expression("1/3*x").unwrap();
        assert_eq!(r.coefficient("x"), Some(&Rational::new(1.into(), 3.into())));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_expression::<f64>("5*trucks + ?").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Syntax);
        assert_eq!(e.position, 11);
        let e = parse_expression::<f64>("   ").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::EmptyExpression);
        assert!(parse_expression::<f64>("x y").is_err());
        assert!(parse_expression::<f64>("x +").is_err());
        assert!(parse_expression::<f64>("3 * ").is_err());
        assert!(parse_expression::<f64>("1/0*x").is_err());
    }

    #[test]
    fn constraints() {
        let c: Constraint<f64> =
            parse_constraint("12*trucks + 20*aeroplanes + 15*ships + 10*trains <= 890").unwrap();
        assert_eq!(c.sense, Sense::Le);
        assert_eq!(*c.rhs.constant_term(), 890.0);
        let c: Constraint<f64> = parse_constraint("bi_trucks + bi_trains <= 1").unwrap();
        assert_eq!(c.sense, Sense::Le);
        assert!(c.rhs.is_empty());
        assert_eq!(*c.rhs.constant_term(), 1.0);
        let c: Constraint<f64> = parse_constraint("x \u{2265} 2").unwrap();
        assert_eq!(c.sense, Sense::Ge);
    }

    #[test]
    fn constraint_errors() {
        assert_eq!(
            parse_constraint::<f64>("x = ").unwrap_err().kind,
            ParseErrorKind::Syntax
        );
        assert!(parse_constraint::<f64>("x + y").is_err());
        assert!(parse_constraint::<f64>("x <= y <= 3").is_err());
        assert!(parse_constraint::<f64>("x == 3").is_err());
        assert!(parse_constraint::<f64>("x < 3").is_err());
        assert_eq!(
            parse_constraint::<f64>("1 <= 2").unwrap_err().kind,
            ParseErrorKind::InvalidExpression
        );
    }

    #[test]
    fn objectives() {
        let o: Objective<f64> =
            parse_objective("Maximize 5*trucks + 10*aeroplanes + 8*ships + 7*trains").unwrap();
        assert_eq!(o.direction, Direction::Max);
        let o: Objective<f64> = parse_objective("  minimize: x").unwrap();
        assert_eq!(o.direction, Direction::Min);
        assert_eq!(o.expr, AffineExpression::var("x"));
        let e = parse_objective::<f64>("5*trucks + 10*aeroplanes").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::MissingDirection);
        assert!(parse_objective::<f64>("Maximizex").is_err());
    }

    #[test]
    fn variable_lists() {
        assert_eq!(
            parse_variable_list("['trucks', 'aeroplanes', 'ships', 'trains']").unwrap(),
            ["trucks", "aeroplanes", "ships", "trains"]
        );
        assert_eq!(parse_variable_list("The variables are: [\"x\"]").unwrap(), ["x"]);
        assert_eq!(parse_variable_list("[a, b,]").unwrap(), ["a", "b"]);
        assert_eq!(parse_variable_list("[]").unwrap_err().kind, ParseErrorKind::EmptyList);
        assert_eq!(parse_variable_list("no list").unwrap_err().kind, ParseErrorKind::NoList);
        assert_eq!(
            parse_variable_list("['ok', '2bad']").unwrap_err().kind,
            ParseErrorKind::InvalidName
        );
    }

    #[test]
    fn rendering() {
        let c: Constraint<f64> = Constraint::new(
            AffineExpression::normalize_terms([("ships", 1.0), ("trains", -1.0)], 0.0).unwrap(),
            Sense::Le,
            AffineExpression::constant(0.0),
        )
        .unwrap();
        assert_eq!(render_constraint(&c), "ships - trains <= 0");
        let c: Constraint<f64> = parse_constraint("x + y = 1").unwrap();
        assert_eq!(render_constraint(&c), "x + y = 1");
        assert_eq!(render_expression(&expr("-2*x + 0.5*y - 3")), "-2*x + 0.5*y - 3");
        assert_eq!(render_name_list(&["a", "b"]), "['a', 'b']");
    }

    #[test]
    fn objective_round_trip() {
        let text = "Maximize 5*trucks + 10*aeroplanes + 8*ships + 7*trains";
        let o: Objective<f64> = parse_objective(text).unwrap();
        assert_eq!(render_objective(&o), text);
        assert_eq!(parse_objective::<f64>(&render_objective(&o)).unwrap(), o);
    }

    #[test]
    fn repair_pass() {
        let (c, d) = parse_constraint_reply::<f64>("x <= 5").unwrap();
        assert!(!d.recovered);
        assert_eq!(c.sense, Sense::Le);
        let raw = "Here is the constraint:\n```\nbi_ships <= bi_aeroplanes\n```\nThis encodes the rule.";
        let (c, d) = parse_constraint_reply::<f64>(raw).unwrap();
        assert!(d.recovered);
        assert_eq!(render_constraint(&c), "bi_ships <= bi_aeroplanes");
        let (_, d) = parse_constraint_reply::<f64>("The constraint is: x + y <= 4.").unwrap();
        assert!(d.recovered);
        assert!(parse_constraint_reply::<f64>("x <= 1\ny <= 2").is_err());
        assert!(parse_constraint_reply::<f64>("I cannot do that").is_err());
        let (o, d) = parse_objective_reply::<f64>("Answer:\nMaximize 3*x + y").unwrap();
        assert!(d.recovered);
        assert_eq!(o.direction, Direction::Max);
    }
}
