//! The headline invariants as runner-driven checks, shared by the property
//! tests and the acceptance target.

use std::collections::{BTreeSet, HashMap};

use nl2milp::classifier::classify_rules;
use nl2milp::gateway::{Gateway, InstanceFixture, ParagraphSlot, StubProvider};
use nl2milp::ir::{canonicalize, check_feasible, equivalent, CanonicalSense, MilpModel};
use nl2milp::parser::{parse_constraint, parse_expression, render_constraint, render_expression};
use nl2milp::pipeline::{supplement_linking, synthesize, ProblemInstance, SynthesisConfig};
use nl2milp::{AffineExpression, Constraint, ConstraintType, Direction, Objective, Sense, Source, Variable};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

pub const NAMES: [&str; 6] = ["x", "y", "z", "w_1", "load", "bi_flag"];

pub fn runner(cases: u32, deterministic: bool) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    if deterministic {
        TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
    } else {
        TestRunner::new(config)
    }
}

fn report<T: std::fmt::Debug>(r: Result<(), proptest::test_runner::TestError<T>>) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

pub fn sense() -> impl Strategy<Value = Sense> {
    prop_oneof![Just(Sense::Le), Just(Sense::Ge), Just(Sense::Eq)]
}

/// Integer coefficients in [-100, 100], sometimes with two decimals.
pub fn coef() -> impl Strategy<Value = f64> {
    prop_oneof![
        (-100i32..=100).prop_map(f64::from),
        (-10000i32..=10000).prop_map(|v| f64::from(v) / 100.0),
    ]
}

pub fn expr() -> impl Strategy<Value = AffineExpression<f64>> {
    (proptest::collection::vec((0..NAMES.len(), coef()), 0..=6), coef()).prop_map(|(terms, k)| {
        AffineExpression::normalize_terms(terms.into_iter().map(|(i, c)| (NAMES[i], c)), k).unwrap()
    })
}

pub fn constraint() -> impl Strategy<Value = Constraint<f64>> {
    (expr(), sense(), expr())
        .prop_filter_map("needs a variable", |(l, s, r)| Constraint::new(l, s, r).ok())
        .prop_filter("needs a variable after cancelling", |c| canonicalize(c).is_ok())
}

pub fn flipped(s: Sense) -> Sense {
    match s {
        Sense::Le => Sense::Ge,
        Sense::Ge => Sense::Le,
        Sense::Eq => Sense::Eq,
    }
}

/// Idempotence, positive and negative scaling, side swap, term reordering.
pub fn canonical_invariants(runner: &mut TestRunner) -> Result<(), String> {
    let strategy = (constraint(), 0.01f64..1000.0, any::<bool>(), any::<usize>());
    report(runner.run(&strategy, |(c, k, neg, rot)| {
        let once = canonicalize(&c).unwrap();
        let twice = canonicalize(&once.to_constraint()).unwrap();
        prop_assert!(once.approx_eq(&twice, 1e-9), "{:?} vs {:?}", once, twice);
        prop_assert!(matches!(once.sense, CanonicalSense::Le | CanonicalSense::Eq));
        prop_assert!(equivalent(&c, &c, 1e-9));

        let scaled = Constraint::new(c.lhs.scaled(&k), c.sense, c.rhs.scaled(&k)).unwrap();
        prop_assert!(equivalent(&c, &scaled, 1e-9));
        let swapped = Constraint::new(c.rhs.clone(), flipped(c.sense), c.lhs.clone()).unwrap();
        prop_assert!(equivalent(&c, &swapped, 1e-9) && equivalent(&swapped, &c, 1e-9));
        if neg {
            let m = -k;
            let negated = Constraint::new(c.lhs.scaled(&m), flipped(c.sense), c.rhs.scaled(&m)).unwrap();
            prop_assert!(equivalent(&c, &negated, 1e-9));
        }

        let mut terms: Vec<(String, f64)> = c.lhs.terms().map(|(n, v)| (n.to_string(), *v)).collect();
        if terms.len() > 1 {
            let n = terms.len();
            terms.rotate_left(rot % n);
        }
        let lhs = AffineExpression::normalize_terms(terms, *c.lhs.constant_term()).unwrap();
        let reordered = Constraint::new(lhs, c.sense, c.rhs.clone()).unwrap();
        prop_assert!(equivalent(&c, &reordered, 1e-9));
        Ok(())
    }))
}

/// Render then parse gives back the same IR value.
pub fn parser_round_trip(runner: &mut TestRunner) -> Result<(), String> {
    report(runner.run(&constraint(), |c| {
        let text = render_constraint(&c);
        let back: Constraint<f64> = parse_constraint(&text).unwrap();
        prop_assert_eq!((&back.lhs, back.sense, &back.rhs), (&c.lhs, c.sense, &c.rhs), "{}", text);
        let back_e: AffineExpression<f64> = parse_expression(&render_expression(&c.lhs)).unwrap();
        prop_assert_eq!(back_e, c.lhs.clone());
        Ok(())
    }))
}

// Randomized stub pipelines.

const GOODS: [&str; 6] = ["chairs", "tables", "desks", "lamps", "shelves", "beds"];

#[derive(Debug, Clone)]
pub enum Para {
    Capacity(Vec<u32>, u32),
    Upper(usize, u32),
    Compare(usize, usize),
    Exclusive(usize, usize),
    Requires(usize, usize),
}

fn para(n: usize) -> impl Strategy<Value = Para> {
    let pair = (0..n, 0..n).prop_filter("distinct", |(a, b)| a != b);
    prop_oneof![
        (proptest::collection::vec(1u32..30, n), 100u32..1000).prop_map(|(c, b)| Para::Capacity(c, b)),
        (0..n, 5u32..60).prop_map(|(i, b)| Para::Upper(i, b)),
        pair.clone().prop_map(|(a, b)| Para::Compare(a, b)),
        pair.clone().prop_map(|(a, b)| Para::Exclusive(a, b)),
        pair.prop_map(|(a, b)| Para::Requires(a, b)),
    ]
}

pub fn scenario() -> impl Strategy<Value = (usize, Vec<u32>, Vec<Para>, bool)> {
    (2usize..=5, any::<bool>()).prop_flat_map(|(n, pure)| {
        (
            Just(n),
            proptest::collection::vec(1u32..20, n),
            proptest::collection::vec(para(n), 1..6),
            Just(pure),
        )
    })
}

/// Paragraph text, expected code and stub slot.
fn render(p: &Para, names: &[String], pure: bool) -> Option<(String, u8, ParagraphSlot)> {
    let bi = |i: usize| if pure { names[i].clone() } else { format!("bi_{}", names[i]) };
    let shown = |i: usize| names[i].trim_start_matches("bi_").to_string();
    Some(match p {
        Para::Capacity(c, b) if !pure => {
            let parts: Vec<String> = c.iter().zip(names).map(|(c, n)| format!("{c} units for each {n}")).collect();
            let text = format!("There are {b} units of wood available. The amount of wood required is {}.", parts.join(", "));
            let terms = c.iter().zip(names).map(|(c, n)| (n.clone(), f64::from(*c))).collect();
            (text, 3, ParagraphSlot { terms, bound: Some(f64::from(*b)), ..Default::default() })
        }
        Para::Upper(i, b) if !pure => (
            format!("At most {b} {} can be made.", names[*i]),
            1,
            ParagraphSlot { terms: [(names[*i].clone(), 1.0)].into_iter().collect(), bound: Some(f64::from(*b)), ..Default::default() },
        ),
        Para::Compare(a, b) if !pure => (
            format!("The number of {} made cannot exceed the number of {} made.", names[*a], names[*b]),
            9,
            ParagraphSlot { smaller: Some(names[*a].clone()), larger: Some(names[*b].clone()), ..Default::default() },
        ),
        Para::Exclusive(a, b) => (
            format!("If they make {}, then they will not make {}.", shown(*a), shown(*b)),
            13,
            ParagraphSlot { a: Some(bi(*a)), b: Some(bi(*b)), ..Default::default() },
        ),
        Para::Requires(a, b) => (
            format!("If they make {}, they will also make {}.", shown(*a), shown(*b)),
            10,
            ParagraphSlot { a: Some(bi(*a)), b: Some(bi(*b)), ..Default::default() },
        ),
        _ => return None,
    })
}

pub fn build(n: usize, profits: &[u32], paras: &[Para], pure: bool) -> (ProblemInstance<f64>, InstanceFixture) {
    let names: Vec<String> = GOODS[..n].iter().map(|g| if pure { format!("bi_{g}") } else { g.to_string() }).collect();
    let profit_text: Vec<String> = GOODS[..n].iter().zip(profits).map(|(g, p)| format!("each {g} is ${p}")).collect();
    let objective = format!("The profit for {}. How should they plan production to maximize the profit?", profit_text.join(", "));
    let mut paragraphs = vec![objective.clone()];
    let mut slots = vec![ParagraphSlot {
        paragraph: objective,
        direction: Some("max".into()),
        terms: names.iter().zip(profits).map(|(n, p)| (n.clone(), f64::from(*p))).collect(),
        ..Default::default()
    }];
    for p in paras {
        if let Some((text, code, mut slot)) = render(p, &names, pure) {
            assert_eq!(classify_rules(&text).unwrap().code.code(), code, "{text}");
            if paragraphs.contains(&text) {
                continue;
            }
            slot.paragraph = text.clone();
            paragraphs.push(text);
            slots.push(slot);
        }
    }
    let fixture = InstanceFixture { variables: names, binary_variables: vec![], slots };
    let inst = ProblemInstance { id: "random".into(), paragraphs, ground_truth: None, sufficient_big_m: None };
    (inst, fixture)
}

/// Linking rows are exactly two per used indicator, none for pure binary models.
pub fn linking_invariant(runner: &mut TestRunner) -> Result<(), String> {
    report(runner.run(&scenario(), |(n, profits, paras, pure)| {
        let (inst, fixture) = build(n, &profits, &paras, pure);
        if inst.paragraphs.len() < 2 {
            return Ok(());
        }
        let gw = Gateway::new(StubProvider::new(fixture), Default::default()).unwrap();
        let (model, trace) = synthesize::<f64>(&inst, &gw, &SynthesisConfig::default()).unwrap();
        let linking = model.linking_constraints().count();
        let used = model.used_indicators().len();
        if pure {
            prop_assert!(model.is_pure_binary());
            prop_assert_eq!(linking, 0);
        } else {
            prop_assert_eq!(linking, 2 * used);
            prop_assert_eq!(model.variables.iter().filter(|v| v.is_indicator()).count(), used);
        }
        prop_assert!(model.check_linking().is_ok());
        prop_assert_eq!(trace.pure_binary, pure);
        Ok(())
    }))
}

// Bound substitution on bounded integer micro-instances.

pub const ENUM_TOP: u32 = 40;

fn micro_model(n: usize, bounds: &[(usize, u32)], exclusive: bool, big_m: f64) -> MilpModel<f64> {
    let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let mut variables: Vec<Variable<f64>> = names.iter().map(|x| Variable::integer(x.clone())).collect();
    variables.extend(names.iter().map(|x| Variable::indicator_for(x)));
    let typed = |text: String, code: u8, p: usize| {
        parse_constraint::<f64>(&text).unwrap().with_type(ConstraintType::new(code).unwrap()).with_source(Source::Paragraph(p))
    };
    let mut constraints: Vec<Constraint<f64>> =
        bounds.iter().enumerate().map(|(k, (i, b))| typed(format!("{} <= {b}", names[*i]), 1, k + 1)).collect();
    if exclusive && n == 2 {
        constraints.push(typed("bi_x0 + bi_x1 <= 1".into(), 13, 50));
    } else {
        // Keeps every indicator in use without restricting it.
        constraints.extend((0..n).map(|i| typed(format!("bi_x{i} <= 1"), 10, 60 + i)));
    }
    MilpModel {
        variables,
        objective: Objective::new(Direction::Max, AffineExpression::var("x0")).unwrap(),
        constraints,
        big_m,
    }
}

/// Every bound kept and plain big-M links.
fn reference(model: &MilpModel<f64>, n: usize) -> MilpModel<f64> {
    let mut m = model.clone();
    for i in 0..n {
        let x = format!("x{i}");
        m.constraints.push(parse_constraint(&format!("{x} <= {}*bi_{x}", m.big_m)).unwrap());
        m.constraints.push(parse_constraint(&format!("bi_{x} <= {x}")).unwrap());
    }
    m
}

fn feasible_points(model: &MilpModel<f64>, n: usize) -> Vec<Vec<u32>> {
    let side = ENUM_TOP as usize + 1;
    let total = side.pow(n as u32) << n;
    let mut out = Vec::new();
    for code in 0..total {
        let mut rest = code;
        let mut point = Vec::new();
        let mut assignment = HashMap::new();
        for i in 0..n {
            let v = (rest % side) as u32;
            rest /= side;
            point.push(v);
            assignment.insert(format!("x{i}"), f64::from(v));
        }
        for i in 0..n {
            let b = (rest % 2) as u32;
            rest /= 2;
            point.push(b);
            assignment.insert(format!("bi_x{i}"), f64::from(b));
        }
        if check_feasible(model, &assignment).unwrap().is_empty() {
            out.push(point);
        }
    }
    out
}

/// Folding standalone upper bounds into the linking pair leaves the integer
/// feasible set unchanged.
pub fn bound_substitution(runner: &mut TestRunner) -> Result<(), String> {
    let strategy = (1usize..=2, proptest::collection::vec((0usize..2, 0u32..=ENUM_TOP), 0..4), any::<bool>());
    report(runner.run(&strategy, |(n, bounds, exclusive)| {
        let bounds: Vec<(usize, u32)> = bounds.into_iter().filter(|(i, _)| *i < n).collect();
        let model = micro_model(n, &bounds, exclusive, 60.0);
        let expected = feasible_points(&reference(&model, n), n);
        let (supplemented, record) = supplement_linking(model, false).unwrap();
        prop_assert_eq!(supplemented.linking_constraints().count(), 2 * n);
        prop_assert!(supplemented.constraints.iter().all(|c| c.ctype.code().map(|t| t.code()) != Some(1)));
        let bounded: BTreeSet<usize> = bounds.iter().map(|b| b.0).collect();
        prop_assert_eq!(record.substitutions.len(), bounded.len());
        prop_assert_eq!(feasible_points(&supplemented, n), expected);
        Ok(())
    }))
}
