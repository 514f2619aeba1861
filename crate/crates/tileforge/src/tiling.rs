//! Systems of tiling equations A ⊕ F_i = G × E′_i over G × H with a shared
//! unknown A ⊂ G × H, the graph correspondence with functional equations,
//! verification and periodic exact-cover solving.
//!
//! Tiles are kept as pieces {s_j} × E_j with E_j given on a scope of H
//! coordinates and full on the rest. A system built from a functional
//! equation system stays intensional; small systems can be materialized
//! into explicit cells. Merging a system into a single tiling equation is
//! not implemented; the system with a shared unknown is the final form.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::feq::program::SudokuProgramSpec;
use crate::feq::set::cartesian;
use crate::feq::solve::{check_satisfiable_bounded, SolveOutcome};
use crate::feq::{
    disjoint_union_equals, materialize_cap, Assignment, Component, Elem, Eval, FeqError, FunctionalEquation, GroupSpec,
    Property, Quotient, SetExpr, Term,
};
use crate::json::{JsonError, Versioned};

#[derive(Debug, Error)]
pub enum TilingError {
    #[error(transparent)]
    Feq(#[from] FeqError),
    #[error("base point {point:?} carries {count} fiber elements")]
    NotAGraph { point: Vec<i64>, count: usize },
    #[error("cell {0:?} lies outside the quotient")]
    OutOfBounds(Vec<i64>),
    #[error("{0} exceeds the materialization cap")]
    TooLarge(String),
    #[error("invalid system: {0}")]
    Invalid(String),
    #[error(transparent)]
    Json(#[from] JsonError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TilePiece {
    /// Base translate s_j; for a functional equation term α(x + h) this is -h.
    pub shift: Vec<i64>,
    pub set: SetExpr,
}

/// A ⊕ (⨄_j {s_j} × E_j) = G × E′, all sets read on `scope`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TilingEquation {
    pub scope: Vec<usize>,
    pub pieces: Vec<TilePiece>,
    pub target: SetExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TilingSystem {
    pub base: GroupSpec,
    pub fiber: GroupSpec,
    /// Names for blocks of fiber coordinates, used when decoding.
    pub components: Vec<Component>,
    /// Whether the graph equation A ⊕ ({0} × H) = G × H is part of the system.
    pub graph: bool,
    pub equations: Vec<TilingEquation>,
    /// The Sudoku program the system was compiled from, for decoding.
    pub program: Option<SudokuProgramSpec>,
}

impl TilingEquation {
    /// The equation with explicit tile cells (base, fiber) over the whole fiber.
    pub fn from_cells(fiber: &GroupSpec, cells: impl IntoIterator<Item = (Vec<i64>, Elem)>, target: SetExpr) -> Self {
        let mut by_shift: Vec<(Vec<i64>, Vec<Elem>)> = Vec::new();
        for (s, h) in cells {
            match by_shift.iter_mut().find(|(t, _)| *t == s) {
                Some((_, v)) => v.push(h),
                None => by_shift.push((s, vec![h])),
            }
        }
        TilingEquation {
            scope: (0..fiber.dim()).collect(),
            pieces: by_shift
                .into_iter()
                .map(|(shift, hs)| TilePiece { shift, set: SetExpr::explicit(fiber.torsion.clone(), hs) })
                .collect(),
            target,
        }
    }
}

impl TilingSystem {
    pub fn new(base: GroupSpec, fiber: GroupSpec, graph: bool) -> Result<Self, TilingError> {
        if fiber.free_rank != 0 {
            return Err(TilingError::Invalid("fiber group must be finite".into()));
        }
        Ok(TilingSystem { base, fiber, components: Vec::new(), graph, equations: Vec::new(), program: None })
    }

    pub fn push(&mut self, eq: TilingEquation) -> Result<(), TilingError> {
        let moduli = &self.fiber.torsion;
        if eq.pieces.is_empty() {
            return Err(TilingError::Invalid("empty tile".into()));
        }
        if eq.scope.iter().any(|&k| k >= moduli.len()) {
            return Err(TilingError::Invalid(format!("scope {:?} outside the fiber", eq.scope)));
        }
        let want: Vec<i64> = eq.scope.iter().map(|&k| moduli[k]).collect();
        for set in eq.pieces.iter().map(|p| &p.set).chain([&eq.target]) {
            set.validate()?;
            if set.moduli() != want {
                return Err(TilingError::Invalid(format!("set over {:?}, scope needs {want:?}", set.moduli())));
            }
        }
        for p in &eq.pieces {
            if p.shift.len() != self.base.dim() {
                return Err(FeqError::BadShift(p.shift.clone()).into());
            }
            if p.set.size() == Some(0) {
                return Err(TilingError::Invalid("empty tile piece".into()));
            }
        }
        self.equations.push(eq);
        Ok(())
    }

    /// The graph equation ({0} × H, H) as an ordinary equation.
    pub fn graph_equation(&self) -> TilingEquation {
        TilingEquation {
            scope: vec![],
            pieces: vec![TilePiece { shift: vec![0; self.base.dim()], set: SetExpr::Full { moduli: vec![] } }],
            target: SetExpr::Full { moduli: vec![] },
        }
    }

    /// All equations, the graph equation first when present.
    pub fn all_equations(&self) -> Vec<TilingEquation> {
        let mut out = Vec::with_capacity(self.equations.len() + 1);
        if self.graph {
            out.push(self.graph_equation());
        }
        out.extend(self.equations.iter().cloned());
        out
    }

    /// Explicit tile cells of every equation, graph equation included.
    pub fn materialize(&self, cap: usize) -> Result<Vec<Vec<(Vec<i64>, Elem)>>, TilingError> {
        let fiber_size = self.fiber.torsion.iter().try_fold(1usize, |a, &m| a.checked_mul(m as usize));
        if fiber_size.is_none_or(|n| n > cap) {
            return Err(TilingError::TooLarge(format!("fiber {:?}", self.fiber.torsion)));
        }
        let fiber = cartesian(&self.fiber.torsion);
        let mut out = Vec::new();
        for eq in self.all_equations() {
            let mut cells = Vec::new();
            for p in &eq.pieces {
                for h in &fiber {
                    let on_scope: Elem = eq.scope.iter().map(|&k| h[k]).collect();
                    if p.set.contains(&on_scope) {
                        cells.push((p.shift.clone(), h.clone()));
                    }
                }
                if cells.len() > cap {
                    return Err(TilingError::TooLarge("tile".into()));
                }
            }
            out.push(cells);
        }
        Ok(out)
    }

    /// Reads a graph system back as functional equations: the piece {s} × E
    /// becomes the term α(x - s) + E.
    pub fn to_property(&self) -> Result<Property, TilingError> {
        if !self.graph {
            return Err(TilingError::Invalid("not a graph system".into()));
        }
        let comps = if self.components.is_empty() {
            vec![Component { name: "alpha".into(), torsion: self.fiber.torsion.clone() }]
        } else {
            self.components.clone()
        };
        let mut p = Property::new(self.base.clone(), comps)?;
        if p.h_moduli() != self.fiber.torsion {
            return Err(TilingError::Invalid("components do not cover the fiber".into()));
        }
        for eq in &self.equations {
            p.push(FunctionalEquation {
                scope: eq.scope.clone(),
                terms: eq
                    .pieces
                    .iter()
                    .map(|t| Term { shift: t.shift.iter().map(|x| -x).collect(), set: t.set.clone() })
                    .collect(),
                target: eq.target.clone(),
            })?;
        }
        Ok(p)
    }

    pub fn to_doc(&self) -> TilingSystemDoc {
        TilingSystemDoc {
            schema: TilingSystemDoc::SCHEMA.into(),
            base: self.base.clone(),
            fiber: self.fiber.clone(),
            components: self.components.clone(),
            graph: self.graph,
            equations: self.equations.clone(),
            program: self.program.clone(),
        }
    }

    pub fn from_doc(doc: TilingSystemDoc) -> Result<Self, TilingError> {
        let base = GroupSpec::new(doc.base.free_rank, doc.base.torsion)?;
        let fiber = GroupSpec::new(doc.fiber.free_rank, doc.fiber.torsion)?;
        let mut sys = TilingSystem::new(base, fiber, doc.graph)?;
        sys.components = doc.components;
        sys.program = doc.program;
        for eq in doc.equations {
            sys.push(eq)?;
        }
        Ok(sys)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TilingSystemDoc {
    pub schema: String,
    pub base: GroupSpec,
    pub fiber: GroupSpec,
    #[serde(default)]
    pub components: Vec<Component>,
    pub graph: bool,
    pub equations: Vec<TilingEquation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub program: Option<SudokuProgramSpec>,
}

impl Versioned for TilingSystemDoc {
    const SCHEMA: &'static str = "tiling-system.v1";
    fn schema(&self) -> &str {
        &self.schema
    }
}

/// A periodic candidate A: cells (base point of the quotient, fiber element).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodicSet {
    pub periods: Vec<i64>,
    /// Sorted lexicographically, without repeats.
    pub cells: Vec<(Vec<i64>, Elem)>,
}

impl PeriodicSet {
    pub fn new(periods: Vec<i64>, cells: impl IntoIterator<Item = (Vec<i64>, Elem)>) -> Self {
        let cells: BTreeSet<_> = cells.into_iter().collect();
        PeriodicSet { periods, cells: cells.into_iter().collect() }
    }

    /// Checks the cells against the quotient of `base` and the fiber moduli.
    pub fn check_bounds(&self, base: &GroupSpec, fiber: &GroupSpec) -> Result<Quotient, TilingError> {
        let q = Quotient::new(base, &self.periods)?;
        let bm = q.moduli();
        for (x, h) in &self.cells {
            let inside = |v: &[i64], m: &[i64]| v.len() == m.len() && v.iter().zip(m).all(|(a, m)| (0..*m).contains(a));
            if !inside(x, &bm) || !inside(h, &fiber.torsion) {
                return Err(TilingError::OutOfBounds(x.iter().chain(h).copied().collect()));
            }
        }
        Ok(q)
    }

    pub fn to_doc(&self) -> PeriodicSetDoc {
        PeriodicSetDoc {
            schema: PeriodicSetDoc::SCHEMA.into(),
            periods: self.periods.clone(),
            cells: self.cells.clone(),
        }
    }

    pub fn from_doc(doc: PeriodicSetDoc) -> Self {
        PeriodicSet::new(doc.periods, doc.cells)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodicSetDoc {
    pub schema: String,
    pub periods: Vec<i64>,
    pub cells: Vec<(Vec<i64>, Elem)>,
}

impl Versioned for PeriodicSetDoc {
    const SCHEMA: &'static str = "periodic-set.v1";
    fn schema(&self) -> &str {
        &self.schema
    }
}

/// The graph equation plus one tiling equation per functional equation.
/// Compact constraints are expanded first, so existential components become
/// part of the fiber.
pub fn feq_to_tiling(p: &Property) -> Result<TilingSystem, TilingError> {
    let program = p.constraints.iter().find_map(|c| match &c.omega {
        SetExpr::SudokuOmega(o) => Some(o.program().clone()),
        _ => None,
    });
    let p = p.expand()?;
    let fiber = GroupSpec::finite(p.h_moduli())?;
    let mut sys = TilingSystem::new(p.group.clone(), fiber, true)?;
    sys.components = p.components.clone();
    sys.program = program;
    for eq in &p.equations {
        sys.push(TilingEquation {
            scope: eq.scope.clone(),
            pieces: eq
                .terms
                .iter()
                .map(|t| TilePiece { shift: t.shift.iter().map(|x| -x).collect(), set: t.set.clone() })
                .collect(),
            target: eq.target.clone(),
        })?;
    }
    Ok(sys)
}

/// {(x, α(x))} on the quotient.
pub fn graph_of(q: &Quotient, alpha: &Assignment) -> PeriodicSet {
    PeriodicSet::new(q.periods.clone(), (0..q.size()).map(|y| (q.coords(y), alpha.at(y).to_vec())))
}

/// Inverse of [`graph_of`].
pub fn extract_function(a: &PeriodicSet, base: &GroupSpec, fiber: &GroupSpec) -> Result<Assignment, TilingError> {
    let q = a.check_bounds(base, fiber)?;
    let mut fibers: Vec<Vec<&Elem>> = vec![Vec::new(); q.size()];
    for (x, h) in &a.cells {
        fibers[q.index(x)].push(h);
    }
    let mut values = Vec::with_capacity(q.size() * fiber.dim());
    for (y, f) in fibers.iter().enumerate() {
        if f.len() != 1 {
            return Err(TilingError::NotAGraph { point: q.coords(y), count: f.len() });
        }
        values.extend(f[0].iter().copied());
    }
    Ok(Assignment::new(&q, fiber.torsion.clone(), values))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TilingFailure {
    /// Index into [`TilingSystem::all_equations`].
    pub equation: usize,
    pub point: Vec<i64>,
    pub verdict: Eval,
    /// Target points covered zero times, when the sets could be listed.
    pub missed: Option<usize>,
    /// Points covered more than once or outside the target.
    pub excess: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TilingReport {
    pub failures: Vec<TilingFailure>,
}

impl TilingReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn coverage(terms: &[(Elem, &SetExpr)], target: &SetExpr) -> Option<(usize, usize)> {
    let moduli = target.moduli();
    let targets: BTreeSet<Elem> = target.enumerate()?.into_iter().collect();
    let mut counts: HashMap<Elem, usize> = HashMap::new();
    for (a, s) in terms {
        for e in s.enumerate()? {
            let x: Elem = a.iter().zip(&e).zip(&moduli).map(|((x, y), m)| (x + y).rem_euclid(*m)).collect();
            *counts.entry(x).or_default() += 1;
        }
    }
    let missed = targets.iter().filter(|t| !counts.contains_key(*t)).count();
    let excess = counts.iter().map(|(x, &c)| if targets.contains(x) { c - 1 } else { c }).sum();
    Some((missed, excess))
}

/// Checks every equation at every base point: the translates must cover
/// each target point exactly once and nothing else.
pub fn verify_tiling(a: &PeriodicSet, sys: &TilingSystem) -> Result<TilingReport, TilingError> {
    let q = a.check_bounds(&sys.base, &sys.fiber)?;
    let mut fibers: Vec<Vec<&Elem>> = vec![Vec::new(); q.size()];
    for (x, h) in &a.cells {
        fibers[q.index(x)].push(h);
    }
    let mut report = TilingReport::default();
    for (i, eq) in sys.all_equations().iter().enumerate() {
        for y in 0..q.size() {
            let mut terms: Vec<(Elem, &SetExpr)> = Vec::new();
            for p in &eq.pieces {
                let back: Vec<i64> = p.shift.iter().map(|x| -x).collect();
                for h in &fibers[q.shift(y, &back)] {
                    terms.push((eq.scope.iter().map(|&k| h[k]).collect(), &p.set));
                }
            }
            let verdict = if terms.is_empty() {
                if eq.target.size() == Some(0) {
                    Eval::Holds
                } else {
                    Eval::Fails
                }
            } else {
                disjoint_union_equals(&terms, &eq.target)
            };
            if verdict != Eval::Holds {
                let detail = coverage(&terms, &eq.target);
                report.failures.push(TilingFailure {
                    equation: i,
                    point: q.coords(y),
                    verdict,
                    missed: detail.map(|d| d.0),
                    excess: detail.map(|d| d.1),
                });
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TilingOutcome {
    Witness(PeriodicSet),
    NoPeriodicWitness,
    BudgetExhausted,
}

struct Cover {
    /// Per candidate cell: the covered points (global index).
    covers: Vec<Vec<usize>>,
    /// Per point: 1 inside a target, 0 outside.
    allowed: Vec<u8>,
    /// Per candidate cell: points whose last possible coverer it is.
    closes: Vec<Vec<usize>>,
    cells: Vec<(Vec<i64>, Elem)>,
}

fn build_cover(sys: &TilingSystem, q: &Quotient) -> Result<Option<Cover>, TilingError> {
    let cap = materialize_cap();
    let too_large = || TilingError::TooLarge(format!("quotient {:?} with fiber {:?}", q.periods, sys.fiber.torsion));
    let fiber_size =
        sys.fiber.torsion.iter().try_fold(1usize, |a, &m| a.checked_mul(m as usize)).ok_or_else(too_large)?;
    if fiber_size.checked_mul(q.size()).is_none_or(|n| n > cap) {
        return Err(too_large());
    }
    let fiber = cartesian(&sys.fiber.torsion);
    let ncells = q.size() * fiber.len();
    let mut covers: Vec<Vec<usize>> = vec![Vec::new(); ncells];
    let mut allowed = Vec::new();
    for eq in sys.all_equations() {
        let smod: Vec<i64> = eq.scope.iter().map(|&k| sys.fiber.torsion[k]).collect();
        let points = cartesian(&smod);
        let index: HashMap<Elem, usize> = points.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let offset = allowed.len();
        if offset + q.size() * points.len() > cap {
            return Err(too_large());
        }
        for _ in 0..q.size() {
            allowed.extend(points.iter().map(|p| eq.target.contains(p) as u8));
        }
        let lists: Vec<Vec<Elem>> = eq
            .pieces
            .iter()
            .map(|p| p.set.enumerate().ok_or_else(|| TilingError::TooLarge("tile piece".into())))
            .collect::<Result<_, _>>()?;
        for (c, cover) in covers.iter_mut().enumerate() {
            let (x, h) = (c / fiber.len(), &fiber[c % fiber.len()]);
            let on_scope: Elem = eq.scope.iter().map(|&k| h[k]).collect();
            for (p, list) in eq.pieces.iter().zip(&lists) {
                let y = q.shift(x, &p.shift);
                for e in list {
                    let v: Elem = on_scope.iter().zip(e).zip(&smod).map(|((a, b), m)| (a + b).rem_euclid(*m)).collect();
                    cover.push(offset + y * points.len() + index[&v]);
                }
            }
        }
    }
    let mut last: Vec<Option<usize>> = vec![None; allowed.len()];
    for (c, cover) in covers.iter().enumerate() {
        for &pt in cover {
            last[pt] = Some(c);
        }
    }
    let mut closes = vec![Vec::new(); ncells];
    for (pt, l) in last.iter().enumerate() {
        match l {
            Some(c) => closes[*c].push(pt),
            None if allowed[pt] == 1 => return Ok(None),
            None => {}
        }
    }
    let cells = (0..ncells).map(|c| (q.coords(c / fiber.len()), fiber[c % fiber.len()].clone())).collect();
    Ok(Some(Cover { covers, allowed, closes, cells }))
}

/// Include-first exact cover over cells in lexicographic order. All
/// solutions have the same size, so the first one found is the
/// lexicographically least.
fn exact_cover(cover: &Cover, budget: u64, limit: usize) -> (Vec<Vec<usize>>, bool) {
    let n = cover.covers.len();
    let mut count = vec![0u8; cover.allowed.len()];
    let mut chosen: Vec<bool> = Vec::with_capacity(n);
    let mut found = Vec::new();
    let mut nodes = 0u64;
    // decision stack: (cell, included, next option to try)
    let mut k = 0usize;
    let mut try_include = true;
    loop {
        if k == n {
            found.push((0..n).filter(|&c| chosen[c]).collect());
            if found.len() >= limit {
                return (found, false);
            }
        } else {
            nodes += 1;
            if nodes > budget {
                return (found, true);
            }
            let fits = !try_include || cover.covers[k].iter().all(|&pt| count[pt] < cover.allowed[pt]);
            if fits {
                if try_include {
                    for &pt in &cover.covers[k] {
                        count[pt] += 1;
                    }
                }
                chosen.push(try_include);
                if cover.closes[k].iter().all(|&pt| count[pt] == cover.allowed[pt]) {
                    k += 1;
                    try_include = true;
                    continue;
                }
                chosen.pop();
                if try_include {
                    for &pt in &cover.covers[k] {
                        count[pt] -= 1;
                    }
                }
            }
            if try_include {
                try_include = false;
                continue;
            }
        }
        // backtrack to the latest inclusion
        loop {
            let Some(inc) = chosen.pop() else {
                return (found, false);
            };
            k -= 1;
            if inc {
                for &pt in &cover.covers[k] {
                    count[pt] -= 1;
                }
                try_include = false;
                break;
            }
        }
    }
}

fn to_set(cover: &Cover, q: &Quotient, picked: &[usize]) -> PeriodicSet {
    PeriodicSet::new(q.periods.clone(), picked.iter().map(|&c| cover.cells[c].clone()))
}

/// Searches periodic tilings on the quotient with the given periods. Small
/// fibers go through exact cover; graph systems with large fibers go
/// through the functional-equation search, which returns the same
/// lexicographically least witness.
pub fn solve_tiling_periodic(sys: &TilingSystem, periods: &[i64], budget: u64) -> Result<TilingOutcome, TilingError> {
    let q = Quotient::new(&sys.base, periods)?;
    match build_cover(sys, &q) {
        Ok(None) => Ok(TilingOutcome::NoPeriodicWitness),
        Ok(Some(cover)) => {
            let (found, out) = exact_cover(&cover, budget, 1);
            Ok(match found.first() {
                Some(p) => TilingOutcome::Witness(to_set(&cover, &q, p)),
                None if out => TilingOutcome::BudgetExhausted,
                None => TilingOutcome::NoPeriodicWitness,
            })
        }
        Err(TilingError::TooLarge(_)) if sys.graph => solve_graph_system(sys, periods, budget),
        Err(e) => Err(e),
    }
}

/// Solves a graph system as functional equations and returns the graph.
pub fn solve_graph_system(sys: &TilingSystem, periods: &[i64], budget: u64) -> Result<TilingOutcome, TilingError> {
    let p = sys.to_property()?;
    let q = Quotient::new(&sys.base, periods)?;
    Ok(match check_satisfiable_bounded(&p, periods, budget)? {
        SolveOutcome::Witness(a) => TilingOutcome::Witness(graph_of(&q, &a)),
        SolveOutcome::NoPeriodicWitness => TilingOutcome::NoPeriodicWitness,
        SolveOutcome::BudgetExhausted => TilingOutcome::BudgetExhausted,
    })
}

/// Every periodic tiling on the quotient, by exact cover. Errors with
/// `TooLarge` past `limit` solutions or when the fiber cannot be listed.
pub fn all_tilings(sys: &TilingSystem, periods: &[i64], limit: usize) -> Result<Vec<PeriodicSet>, TilingError> {
    let q = Quotient::new(&sys.base, periods)?;
    let Some(cover) = build_cover(sys, &q)? else {
        return Ok(Vec::new());
    };
    let (found, _) = exact_cover(&cover, u64::MAX, limit + 1);
    if found.len() > limit {
        return Err(TilingError::TooLarge(format!("more than {limit} tilings")));
    }
    Ok(found.iter().map(|p| to_set(&cover, &q, p)).collect())
}
