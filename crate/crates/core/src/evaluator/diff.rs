use std::fmt;

use serde::Serialize;

use crate::ir::{canonicalize, equivalent, CanonicalConstraint, Constraint, MilpModel};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Implication {
    /// The left constraint is tighter and implies the right one.
    LeftImpliesRight,
    RightImpliesLeft,
}

/// Two unmatched constraints over the same variables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub left: String,
    pub right: String,
    /// `(name, right - left)` over canonical coefficients; `rhs` for the
    /// constant.
    pub deltas: Vec<(String, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub implication: Option<Implication>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ModelDiff {
    pub variables_only_left: Vec<String>,
    pub variables_only_right: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<(String, String)>,
    pub only_left: Vec<String>,
    pub only_right: Vec<String>,
    pub mismatches: Vec<Mismatch>,
}

impl ModelDiff {
    pub fn is_empty(&self) -> bool {
        self.variables_only_left.is_empty()
            && self.variables_only_right.is_empty()
            && self.objective.is_none()
            && self.only_left.is_empty()
            && self.only_right.is_empty()
            && self.mismatches.is_empty()
    }
}

fn same_support<S>(a: &CanonicalConstraint<S>, b: &CanonicalConstraint<S>) -> bool {
    a.sense == b.sense && a.terms.len() == b.terms.len() && a.terms.iter().zip(&b.terms).all(|(x, y)| x.0 == y.0)
}

fn mismatch<S: Scalar>(
    l: &Constraint<S>,
    cl: &CanonicalConstraint<S>,
    r: &Constraint<S>,
    cr: &CanonicalConstraint<S>,
    tol: f64,
) -> Mismatch {
    let f = crate::scalar::to_f64;
    let mut deltas: Vec<(String, f64)> = cl
        .terms
        .iter()
        .zip(&cr.terms)
        .filter(|((_, a), (_, b))| !a.approx_eq(b, tol))
        .map(|((n, a), (_, b))| (n.clone(), f(b) - f(a)))
        .collect();
    let same_terms = deltas.is_empty();
    if !cl.rhs.approx_eq(&cr.rhs, tol) {
        deltas.push(("rhs".into(), f(&cr.rhs) - f(&cl.rhs)));
    }
    // Same left-hand side, both `<=`: the smaller bound is the tighter one.
    let implication = (same_terms && cl.sense == crate::ir::CanonicalSense::Le).then(|| {
        if cl.rhs < cr.rhs {
            Implication::LeftImpliesRight
        } else {
            Implication::RightImpliesLeft
        }
    });
    Mismatch {
        left: l.to_string(),
        right: r.to_string(),
        deltas,
        implication,
    }
}

/// Differences between two models with constraints matched by canonical
/// equivalence.
pub fn diff_models<S: Scalar>(left: &MilpModel<S>, right: &MilpModel<S>, tol: f64) -> ModelDiff {
    let names = |m: &MilpModel<S>| m.variables.iter().map(|v| v.name.clone()).collect::<Vec<_>>();
    let (ln, rn) = (names(left), names(right));
    let mut diff = ModelDiff {
        variables_only_left: ln.iter().filter(|n| !rn.contains(n)).cloned().collect(),
        variables_only_right: rn.iter().filter(|n| !ln.contains(n)).cloned().collect(),
        ..ModelDiff::default()
    };
    if !left.objective.equivalent(&right.objective, tol) {
        diff.objective = Some((left.objective.to_string(), right.objective.to_string()));
    }

    let mut right_used = vec![false; right.constraints.len()];
    let mut left_open = Vec::new();
    for l in &left.constraints {
        match (0..right.constraints.len()).find(|&j| !right_used[j] && equivalent(l, &right.constraints[j], tol)) {
            Some(j) => right_used[j] = true,
            None => left_open.push(l),
        }
    }
    let mut right_open: Vec<&Constraint<S>> = right
        .constraints
        .iter()
        .zip(&right_used)
        .filter(|(_, used)| !**used)
        .map(|(c, _)| c)
        .collect();
    for l in left_open {
        let Ok(cl) = canonicalize(l) else {
            diff.only_left.push(l.to_string());
            continue;
        };
        let pair = right_open
            .iter()
            .position(|r| canonicalize(r).is_ok_and(|cr| same_support(&cl, &cr)));
        match pair {
            Some(k) => {
                let r = right_open.remove(k);
                let cr = canonicalize(r).expect("checked above");
                diff.mismatches.push(mismatch(l, &cl, r, &cr, tol));
            }
            None => diff.only_left.push(l.to_string()),
        }
    }
    diff.only_right = right_open.iter().map(|c| c.to_string()).collect();
    diff
}

impl fmt::Display for ModelDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.variables_only_left {
            writeln!(f, "variable only in generated: {v}")?;
        }
        for v in &self.variables_only_right {
            writeln!(f, "variable missing in generated: {v}")?;
        }
        if let Some((l, r)) = &self.objective {
            writeln!(f, "objective differs:\n  generated: {l}\n  expected:  {r}")?;
        }
        for m in &self.mismatches {
            writeln!(f, "constraint differs:\n  generated: {}\n  expected:  {}", m.left, m.right)?;
            for (name, d) in &m.deltas {
                writeln!(f, "    {name}: {d:+}")?;
            }
            match m.implication {
                Some(Implication::LeftImpliesRight) => writeln!(f, "    (generated is tighter and implies expected)")?,
                Some(Implication::RightImpliesLeft) => writeln!(f, "    (expected is tighter and implies generated)")?,
                None => {}
            }
        }
        for c in &self.only_left {
            writeln!(f, "extra in generated: {c}")?;
        }
        for c in &self.only_right {
            writeln!(f, "missing in generated: {c}")?;
        }
        Ok(())
    }
}
