//! Functional equations with subsets over G = Z^r × torsion, with values in
//! a product of finite cyclic groups, plus a library of expressible
//! properties and a bounded periodic satisfiability search.

pub mod library;
pub mod program;
pub mod set;
pub mod solve;

use std::collections::{BTreeSet, HashSet};
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::json::{JsonError, Versioned};
pub use set::{materialize_cap, Elem, SetExpr};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeqError {
    #[error("bad group: {0}")]
    BadGroup(String),
    #[error("bad set: {0}")]
    BadSet(String),
    #[error("shift {0:?} does not belong to the group")]
    BadShift(Vec<i64>),
    #[error("component {0:?} already exists")]
    ComponentCollision(String),
    #[error("unknown component {0:?}")]
    UnknownComponent(String),
    #[error("component {0:?} has different value groups in the two properties")]
    ComponentMismatch(String),
    #[error("properties live on different groups")]
    GroupMismatch,
    #[error("equation {0} has no terms")]
    EmptyTerms(usize),
    #[error("equation {equation}: set dimension {found} does not match scope {expected}")]
    ScopeMismatch { equation: usize, expected: usize, found: usize },
    #[error("element {0:?} does not have order 2")]
    NotOrderTwo(Vec<i64>),
    #[error("modulus L = {found} too small, need L > {bound}")]
    ModulusTooSmall { found: i64, bound: i64 },
    #[error("constraint set is not symmetric under negation")]
    Asymmetric,
    #[error("injection is not injective or meets its own negation")]
    BadInjection,
    #[error("q = {q} exceeds 2^(U-1) with U = {u}")]
    PeriodTooLarge { q: usize, u: usize },
    #[error("s0 = {s0} too small for {needed} symbols")]
    S0TooSmall { s0: usize, needed: usize },
    #[error("{0} exceeds the materialization cap")]
    TooLarge(String),
    #[error("equation {equation} at point {point} could not be decided within the cap")]
    Indeterminate { equation: usize, point: usize },
    #[error("quotient needs {expected} periods, got {found}")]
    BadPeriods { expected: usize, found: usize },
    #[error("rule: {0}")]
    Rule(String),
}

/// Z^freeRank × Z/t_1 × ... × Z/t_k; elements are coordinate vectors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct GroupSpec {
    pub free_rank: usize,
    pub torsion: Vec<i64>,
}

impl GroupSpec {
    pub fn new(free_rank: usize, torsion: Vec<i64>) -> Result<Self, FeqError> {
        if torsion.iter().any(|&t| t < 1) {
            return Err(FeqError::BadGroup(format!("cyclic orders must be >= 1, got {torsion:?}")));
        }
        Ok(GroupSpec { free_rank, torsion })
    }

    /// A finite group (Z/t_1) × ... × (Z/t_k).
    pub fn finite(torsion: Vec<i64>) -> Result<Self, FeqError> {
        GroupSpec::new(0, torsion)
    }

    pub fn dim(&self) -> usize {
        self.free_rank + self.torsion.len()
    }

    pub fn reduce(&self, x: &[i64]) -> Result<Vec<i64>, FeqError> {
        if x.len() != self.dim() {
            return Err(FeqError::BadShift(x.to_vec()));
        }
        Ok(x.iter()
            .enumerate()
            .map(|(k, &v)| if k < self.free_rank { v } else { v.rem_euclid(self.torsion[k - self.free_rank]) })
            .collect())
    }

    pub fn is_zero(&self, x: &[i64]) -> bool {
        self.reduce(x).is_ok_and(|r| r.iter().all(|&v| v == 0))
    }
}

/// The finite quotient Z/n_1 × ... × Z/n_r × torsion of G.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quotient {
    pub group: GroupSpec,
    pub periods: Vec<i64>,
}

impl Quotient {
    pub fn new(group: &GroupSpec, periods: &[i64]) -> Result<Self, FeqError> {
        if periods.len() != group.free_rank {
            return Err(FeqError::BadPeriods { expected: group.free_rank, found: periods.len() });
        }
        if periods.iter().any(|&p| p < 1) {
            return Err(FeqError::BadGroup("periods must be >= 1".into()));
        }
        Ok(Quotient { group: group.clone(), periods: periods.to_vec() })
    }

    pub fn moduli(&self) -> Vec<i64> {
        self.periods.iter().chain(&self.group.torsion).copied().collect()
    }

    pub fn size(&self) -> usize {
        self.moduli().iter().product::<i64>() as usize
    }

    /// Coordinates of a point; the last coordinate varies fastest.
    pub fn coords(&self, mut idx: usize) -> Vec<i64> {
        let m = self.moduli();
        let mut out = vec![0; m.len()];
        for k in (0..m.len()).rev() {
            out[k] = (idx % m[k] as usize) as i64;
            idx /= m[k] as usize;
        }
        out
    }

    pub fn index(&self, x: &[i64]) -> usize {
        self.moduli().iter().zip(x).fold(0usize, |acc, (&m, &v)| acc * m as usize + v.rem_euclid(m) as usize)
    }

    pub fn shift(&self, idx: usize, h: &[i64]) -> usize {
        let x: Vec<i64> = self.coords(idx).iter().zip(h).map(|(a, b)| a + b).collect();
        self.index(&x)
    }

    pub fn points(&self) -> Vec<Vec<i64>> {
        (0..self.size()).map(|i| self.coords(i)).collect()
    }
}

/// A named unknown α_u : G → H_u.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub name: String,
    pub torsion: Vec<i64>,
}

impl Component {
    pub fn cyclic(name: impl Into<String>, l: i64) -> Self {
        Component { name: name.into(), torsion: vec![l] }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub shift: Vec<i64>,
    pub set: SetExpr,
}

/// ⨄_j (α(x + h_j) + E_j) = E′ for all x, with every set read on the
/// coordinates `scope` of the value group and full on the others.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalEquation {
    pub scope: Vec<usize>,
    pub terms: Vec<Term>,
    pub target: SetExpr,
}

/// The tuple on `scope` is e-boolean and lies in `omega` at every point.
/// Stands for the existential expansion built by
/// [`library::expand_boolean_constraint`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BooleanConstraint {
    pub label: String,
    pub scope: Vec<usize>,
    pub e: Vec<i64>,
    pub modulus: i64,
    pub omega: SetExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Property {
    pub group: GroupSpec,
    pub components: Vec<Component>,
    pub equations: Vec<FunctionalEquation>,
    pub existential: BTreeSet<String>,
    /// Constraints kept in compact form; `expand` turns them into equations.
    pub constraints: Vec<BooleanConstraint>,
}

impl Property {
    pub fn new(group: GroupSpec, components: Vec<Component>) -> Result<Self, FeqError> {
        let mut names = BTreeSet::new();
        for c in &components {
            if !names.insert(c.name.clone()) {
                return Err(FeqError::ComponentCollision(c.name.clone()));
            }
        }
        Ok(Property { group, components, equations: Vec::new(), existential: BTreeSet::new(), constraints: Vec::new() })
    }

    pub fn h_moduli(&self) -> Vec<i64> {
        self.components.iter().flat_map(|c| c.torsion.iter().copied()).collect()
    }

    pub fn h_dim(&self) -> usize {
        self.components.iter().map(|c| c.torsion.len()).sum()
    }

    pub fn coords_of(&self, name: &str) -> Result<Range<usize>, FeqError> {
        let mut at = 0;
        for c in &self.components {
            if c.name == name {
                return Ok(at..at + c.torsion.len());
            }
            at += c.torsion.len();
        }
        Err(FeqError::UnknownComponent(name.to_string()))
    }

    pub fn component_index(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| c.name == name)
    }

    pub fn is_expressible(&self) -> bool {
        self.existential.is_empty() && self.constraints.is_empty()
    }

    /// Appends an equation after checking its shape.
    pub fn push(&mut self, eq: FunctionalEquation) -> Result<(), FeqError> {
        let idx = self.equations.len();
        if eq.terms.is_empty() {
            return Err(FeqError::EmptyTerms(idx));
        }
        let dim = self.h_dim();
        if eq.scope.iter().any(|&k| k >= dim) {
            return Err(FeqError::BadSet(format!("scope {:?} outside value group", eq.scope)));
        }
        for s in eq.terms.iter().map(|t| &t.set).chain([&eq.target]) {
            s.validate()?;
            if s.dim() != eq.scope.len() {
                return Err(FeqError::ScopeMismatch { equation: idx, expected: eq.scope.len(), found: s.dim() });
            }
        }
        for t in &eq.terms {
            self.group.reduce(&t.shift)?;
        }
        self.equations.push(eq);
        Ok(())
    }

    /// Replaces compact constraints by their existential expansion.
    pub fn expand(&self) -> Result<Property, FeqError> {
        let mut out = self.clone();
        out.constraints.clear();
        for c in &self.constraints {
            library::expand_boolean_constraint(&mut out, c)?;
        }
        Ok(out)
    }

    pub fn to_doc(&self) -> FeqSystemDoc {
        FeqSystemDoc {
            schema: FeqSystemDoc::SCHEMA.to_string(),
            group: self.group.clone(),
            components: self.components.clone(),
            equations: self.equations.clone(),
            existential: self.existential.iter().cloned().collect(),
            constraints: self.constraints.clone(),
        }
    }

    pub fn from_doc(doc: FeqSystemDoc) -> Result<Self, JsonError> {
        let inv = |e: FeqError| JsonError::Invalid(e.to_string());
        let group = GroupSpec::new(doc.group.free_rank, doc.group.torsion).map_err(inv)?;
        let mut p = Property::new(group, doc.components).map_err(inv)?;
        for eq in doc.equations {
            p.push(eq).map_err(inv)?;
        }
        for name in doc.existential {
            p.coords_of(&name).map_err(inv)?;
            p.existential.insert(name);
        }
        p.constraints = doc.constraints;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeqSystemDoc {
    pub schema: String,
    pub group: GroupSpec,
    pub components: Vec<Component>,
    pub equations: Vec<FunctionalEquation>,
    pub existential: Vec<String>,
    #[serde(default)]
    pub constraints: Vec<BooleanConstraint>,
}

impl Versioned for FeqSystemDoc {
    const SCHEMA: &'static str = "feq-system.v1";
    fn schema(&self) -> &str {
        &self.schema
    }
}

/// Adds dummy components; the existing equations are untouched.
pub fn lift(p: &Property, new_components: Vec<Component>) -> Result<Property, FeqError> {
    let mut out = p.clone();
    for c in new_components {
        if out.component_index(&c.name).is_some() {
            return Err(FeqError::ComponentCollision(c.name));
        }
        out.components.push(c);
    }
    Ok(out)
}

/// Both properties at once; components are matched by name.
pub fn conjoin(p: &Property, q: &Property) -> Result<Property, FeqError> {
    if p.group != q.group {
        return Err(FeqError::GroupMismatch);
    }
    let mut out = p.clone();
    for c in &q.components {
        match out.components.iter().find(|d| d.name == c.name) {
            Some(d) if d.torsion != c.torsion => return Err(FeqError::ComponentMismatch(c.name.clone())),
            Some(_) => {}
            None => out.components.push(c.clone()),
        }
    }
    let mut remap = Vec::with_capacity(q.h_dim());
    for c in &q.components {
        remap.extend(out.coords_of(&c.name)?);
    }
    for eq in &q.equations {
        let mut eq = eq.clone();
        eq.scope = eq.scope.iter().map(|&k| remap[k]).collect();
        out.push(eq)?;
    }
    for c in &q.constraints {
        let mut c = c.clone();
        c.scope = c.scope.iter().map(|&k| remap[k]).collect();
        out.constraints.push(c);
    }
    out.existential.extend(q.existential.iter().cloned());
    Ok(out)
}

/// Marks components as existentially quantified.
pub fn exists(p: &Property, names: &[&str]) -> Result<Property, FeqError> {
    let mut out = p.clone();
    for &n in names {
        out.coords_of(n)?;
        out.existential.insert(n.to_string());
    }
    Ok(out)
}

/// Values of all components at every point of a quotient.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    pub periods: Vec<i64>,
    pub h_moduli: Vec<i64>,
    /// Point-major: values[point * dim + coordinate].
    pub values: Vec<i64>,
}

impl Assignment {
    pub fn new(q: &Quotient, h_moduli: Vec<i64>, values: Vec<i64>) -> Self {
        assert_eq!(values.len(), q.size() * h_moduli.len());
        let values =
            values.iter().enumerate().map(|(k, v)| v.rem_euclid(h_moduli[k % h_moduli.len().max(1)])).collect();
        Assignment { periods: q.periods.clone(), h_moduli, values }
    }

    pub fn from_fn(q: &Quotient, h_moduli: Vec<i64>, f: impl Fn(&[i64]) -> Vec<i64>) -> Self {
        let values = q.points().iter().flat_map(|x| f(x)).collect();
        Assignment::new(q, h_moduli, values)
    }

    pub fn dim(&self) -> usize {
        self.h_moduli.len()
    }

    pub fn at(&self, point: usize) -> &[i64] {
        let d = self.dim();
        &self.values[point * d..(point + 1) * d]
    }

    /// Keeps only the listed coordinates.
    pub fn restrict(&self, coords: &[usize]) -> Assignment {
        let d = self.dim();
        let points = if d == 0 { 0 } else { self.values.len() / d };
        Assignment {
            periods: self.periods.clone(),
            h_moduli: coords.iter().map(|&k| self.h_moduli[k]).collect(),
            values: (0..points)
                .flat_map(|p| coords.iter().map(move |&k| (p, k)))
                .map(|(p, k)| self.values[p * d + k])
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Eval {
    Holds,
    Fails,
    Indeterminate,
}

/// Decides ⨄_j (a_j + E_j) = T, where every element may be covered once.
pub fn disjoint_union_equals(terms: &[(Elem, &SetExpr)], target: &SetExpr) -> Eval {
    let mut sets: Vec<&SetExpr> = terms.iter().map(|t| t.1).collect();
    sets.push(target);
    let (keep, proj) = set::project_common_support(&sets);
    let (tproj, eproj) = proj.split_last().expect("target present");
    let moduli = tproj.moduli();
    let shifts: Vec<Elem> =
        terms.iter().map(|(a, _)| keep.iter().zip(&moduli).map(|(&k, &m)| a[k].rem_euclid(m)).collect()).collect();
    let add = |a: &[i64], e: &[i64]| -> Elem {
        a.iter().zip(e).zip(&moduli).map(|((x, y), m)| (x + y).rem_euclid(*m)).collect()
    };

    if let Some(lists) = eproj.iter().map(|s| s.enumerate()).collect::<Option<Vec<_>>>() {
        let mut seen = HashSet::new();
        for (a, list) in shifts.iter().zip(&lists) {
            for e in list {
                let x = add(a, e);
                if !tproj.contains(&x) || !seen.insert(x) {
                    return Eval::Fails;
                }
            }
        }
        return match tproj.size() {
            Some(s) if s == seen.len() as u128 => Eval::Holds,
            Some(_) => Eval::Fails,
            None => Eval::Indeterminate,
        };
    }
    if eproj.len() == 1 && eproj[0] == *tproj && tproj.is_subgroup() {
        return if tproj.contains(&shifts[0]) { Eval::Holds } else { Eval::Fails };
    }
    if let Some(tl) = tproj.enumerate() {
        let Some(total) = eproj.iter().try_fold(0u128, |acc, s| s.size().map(|n| acc + n)) else {
            return Eval::Indeterminate;
        };
        if total != tl.len() as u128 {
            return Eval::Fails;
        }
        for t in &tl {
            let hits = shifts
                .iter()
                .zip(eproj)
                .filter(|(a, s)| {
                    let back: Elem =
                        t.iter().zip(a.iter()).zip(&moduli).map(|((x, y), m)| (x - y).rem_euclid(*m)).collect();
                    s.contains(&back)
                })
                .count();
            if hits != 1 {
                return Eval::Fails;
            }
        }
        return Eval::Holds;
    }
    Eval::Indeterminate
}

/// Evaluates one equation at one point of the quotient.
pub fn eval_equation(eq: &FunctionalEquation, q: &Quotient, alpha: &Assignment, point: usize) -> Eval {
    let terms: Vec<(Elem, &SetExpr)> = eq
        .terms
        .iter()
        .map(|t| {
            let y = q.shift(point, &t.shift);
            let v = alpha.at(y);
            (eq.scope.iter().map(|&k| v[k]).collect(), &t.set)
        })
        .collect();
    disjoint_union_equals(&terms, &eq.target)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CheckReport {
    /// (equation index, point index) pairs that fail.
    pub failures: Vec<(usize, usize)>,
    pub indeterminate: Vec<(usize, usize)>,
    /// (constraint index, point index) pairs that fail.
    pub constraint_failures: Vec<(usize, usize)>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.indeterminate.is_empty() && self.constraint_failures.is_empty()
    }
}

/// Checks every equation and compact constraint at every quotient point.
/// Existential components must be present in `alpha` for the equations
/// that mention them.
pub fn check_assignment(p: &Property, q: &Quotient, alpha: &Assignment) -> CheckReport {
    let mut report = CheckReport::default();
    for (i, eq) in p.equations.iter().enumerate() {
        for y in 0..q.size() {
            match eval_equation(eq, q, alpha, y) {
                Eval::Holds => {}
                Eval::Fails => report.failures.push((i, y)),
                Eval::Indeterminate => report.indeterminate.push((i, y)),
            }
        }
    }
    for (i, c) in p.constraints.iter().enumerate() {
        for y in 0..q.size() {
            let v = alpha.at(y);
            let w = alpha.at(q.shift(y, &c.e));
            let tuple: Elem = c.scope.iter().map(|&k| v[k]).collect();
            let boolean = c.scope.iter().all(|&k| {
                let x = v[k].rem_euclid(c.modulus);
                (x == 1 || x == c.modulus - 1) && (x + w[k]).rem_euclid(c.modulus) == 0
            });
            if !boolean || !c.omega.contains(&tuple) {
                report.constraint_failures.push((i, y));
            }
        }
    }
    report
}
