//! JSON representation: expressions, constraints and objectives are stored
//! as text in the expression grammar, which round-trips exactly.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{AffineExpression, Constraint, ConstraintTag, MilpModel, Objective, Source, Variable};
use crate::parser;
use crate::scalar::Scalar;
use crate::taxonomy::ConstraintType;

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CodeOrLabel {
    Code(i64),
    Label(String),
}

impl Serialize for ConstraintTag {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> Result<Ser::Ok, Ser::Error> {
        match self {
            ConstraintTag::Typed(c) => s.serialize_u8(c.code()),
            ConstraintTag::Linking => s.serialize_str("linking"),
            ConstraintTag::Unknown => s.serialize_str("unknown"),
        }
    }
}

impl<'de> Deserialize<'de> for ConstraintTag {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match CodeOrLabel::deserialize(d)? {
            CodeOrLabel::Code(c) => ConstraintType::try_from(c)
                .map(ConstraintTag::Typed)
                .map_err(D::Error::custom),
            CodeOrLabel::Label(l) if l == "linking" => Ok(ConstraintTag::Linking),
            CodeOrLabel::Label(l) if l == "unknown" => Ok(ConstraintTag::Unknown),
            CodeOrLabel::Label(l) => Err(D::Error::custom(format!(
                "expected a type code, \"linking\" or \"unknown\", found \"{l}\""
            ))),
        }
    }
}

impl Serialize for Source {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> Result<Ser::Ok, Ser::Error> {
        match self {
            Source::Paragraph(i) => s.serialize_u64(*i as u64),
            Source::Supplemented => s.serialize_str("supplemented"),
        }
    }
}

impl<'de> Deserialize<'de> for Source {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match CodeOrLabel::deserialize(d)? {
            CodeOrLabel::Code(i) if i >= 0 => Ok(Source::Paragraph(i as usize)),
            CodeOrLabel::Label(l) if l == "supplemented" => Ok(Source::Supplemented),
            _ => Err(D::Error::custom(
                "expected a paragraph index or \"supplemented\"",
            )),
        }
    }
}

impl<S: Scalar> Serialize for AffineExpression<S> {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> Result<Ser::Ok, Ser::Error> {
        s.serialize_str(&parser::render_expression(self))
    }
}

impl<'de, S: Scalar> Deserialize<'de> for AffineExpression<S> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parser::parse_expression(&text).map_err(D::Error::custom)
    }
}

impl<S: Scalar> Serialize for Objective<S> {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> Result<Ser::Ok, Ser::Error> {
        s.serialize_str(&parser::render_objective(self))
    }
}

impl<'de, S: Scalar> Deserialize<'de> for Objective<S> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parser::parse_objective(&text).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct ConstraintRepr {
    expr: String,
    ctype: ConstraintTag,
    source: Source,
}

impl<S: Scalar> Serialize for Constraint<S> {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> Result<Ser::Ok, Ser::Error> {
        ConstraintRepr {
            expr: parser::render_constraint(self),
            ctype: self.ctype,
            source: self.source,
        }
        .serialize(s)
    }
}

impl<'de, S: Scalar> Deserialize<'de> for Constraint<S> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = ConstraintRepr::deserialize(d)?;
        let c: Constraint<S> = parser::parse_constraint(&repr.expr).map_err(D::Error::custom)?;
        Ok(c.with_tag(repr.ctype).with_source(repr.source))
    }
}

#[derive(Serialize)]
struct ModelRef<'a, S: Scalar> {
    variables: &'a [Variable<S>],
    objective: &'a Objective<S>,
    constraints: &'a [Constraint<S>],
    big_m: &'a S,
}

#[derive(Deserialize)]
#[serde(bound(deserialize = "S: Scalar + Deserialize<'de>"))]
struct ModelOwned<S: Scalar> {
    variables: Vec<Variable<S>>,
    objective: Objective<S>,
    #[serde(default)]
    constraints: Vec<Constraint<S>>,
    big_m: S,
}

impl<S: Scalar + Serialize> Serialize for MilpModel<S> {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> Result<Ser::Ok, Ser::Error> {
        ModelRef {
            variables: &self.variables,
            objective: &self.objective,
            constraints: &self.constraints,
            big_m: &self.big_m,
        }
        .serialize(s)
    }
}

impl<'de, S: Scalar + Deserialize<'de>> Deserialize<'de> for MilpModel<S> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let m = ModelOwned::<S>::deserialize(d)?;
        Ok(MilpModel {
            variables: m.variables,
            objective: m.objective,
            constraints: m.constraints,
            big_m: m.big_m,
        })
    }
}
