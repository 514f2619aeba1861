//! Decorated p1×p2-adic Sudoku: the rule built from a domino set, the
//! forward encoding of a domino function, extraction of the domino function
//! from a solution window, and the initial condition with period p1·p2.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domino::{
    verify_domino_function, DominoError, DominoFunction, DominoFunctionDoc, DominoSet, DominoSetDoc, Rect, Violation,
};
use crate::json::{JsonError, Versioned};
use crate::padic::{crt, PadicError, Prime, Valuation};
use crate::padic_sudoku::{has_nonconstant_columns, recover_higher, PadicSudokuError};
use crate::sudoku::{
    check_initial_condition, InitialCondition, InitialOutcome, SolutionWindow, SudokuError, SudokuRule, Verdict,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecoratedError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Domino(#[from] DominoError),
    #[error(transparent)]
    Sudoku(#[from] SudokuError),
    #[error("the two primes must differ, got {0} twice")]
    EqualPrimes(i64),
    #[error("unit c = {0} is not coprime to p1·p2")]
    NotUnit(i64),
    #[error("domino function must live on a rectangle anchored at (0,0)")]
    NotAnchored,
    #[error("pip {0:?} is not in the domino set")]
    UnknownPip(String),
    #[error("domino function has {} violations", .0.len())]
    NotADominoFunction(Vec<Violation>),
    #[error("valuation pair {required:?} at cell {cell:?} lies outside the domino rectangle")]
    ValuationOutOfRange { cell: (i64, i64), required: (u32, u32) },
    #[error("component {component} could not be classified: {source}")]
    RecoveryFailed { component: usize, source: PadicSudokuError },
    #[error("cells {first:?} and {second:?} share valuation pair {pair:?} but carry different pips")]
    InconsistentDecoration { pair: (u32, u32), first: (i64, i64), second: (i64, i64) },
    #[error("no cell of the window has valuation pair {0:?}")]
    Unobserved((u32, u32)),
}

/// A digit (f_{p1}, f_{p2}, pip index into the sorted pips).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DecoratedDigit {
    pub u1: i64,
    pub u2: i64,
    pub pip: u16,
}

/// The rule S^R: width p1²p2², digits units × units × pips.
#[derive(Debug, Clone)]
pub struct DecoratedRule {
    p1: Prime,
    p2: Prime,
    width: usize,
    domino: DominoSet,
    horiz: Vec<bool>,
    vert: Vec<bool>,
    /// Upper bound on candidate (form, domino function) checks per line.
    pub budget: u64,
}

/// Witness for a line: the affine form and the domino function on [(0,0),(t1,t2)].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LineMembership {
    Member { a: i64, b: i64, tiling: DominoFunction },
    NonMember,
    Indeterminate,
}

pub const DEFAULT_MEMBERSHIP_BUDGET: u64 = 10_000_000;

impl DecoratedRule {
    pub fn new(p1: i64, p2: i64, domino: DominoSet) -> Result<Self, DecoratedError> {
        let (q1, q2) = (Prime::new(p1)?, Prime::new(p2)?);
        if p1 == p2 {
            return Err(DecoratedError::EqualPrimes(p1));
        }
        let width = (q1.pow(2) * q2.pow(2)) as usize;
        let k = domino.pips().len();
        let mut horiz = vec![false; k * k];
        let mut vert = vec![false; k * k];
        for (a, b) in domino.horiz() {
            horiz[domino.index_of(a).unwrap() * k + domino.index_of(b).unwrap()] = true;
        }
        for (a, b) in domino.vert() {
            vert[domino.index_of(a).unwrap() * k + domino.index_of(b).unwrap()] = true;
        }
        Ok(DecoratedRule { p1: q1, p2: q2, width, domino, horiz, vert, budget: DEFAULT_MEMBERSHIP_BUDGET })
    }

    pub fn p1(&self) -> Prime {
        self.p1
    }

    pub fn p2(&self) -> Prime {
        self.p2
    }

    pub fn domino(&self) -> &DominoSet {
        &self.domino
    }

    pub fn pip_index(&self, pip: &str) -> Result<u16, DecoratedError> {
        self.domino.index_of(pip).map(|i| i as u16).ok_or_else(|| DecoratedError::UnknownPip(pip.to_string()))
    }

    pub fn pip_label(&self, idx: u16) -> &str {
        &self.domino.pips()[idx as usize]
    }

    pub fn digit_count(&self) -> usize {
        (self.p1.get() as usize - 1) * (self.p2.get() as usize - 1) * self.domino.pips().len()
    }

    fn component_candidates(&self, p: Prime, g: &[i64]) -> Vec<(i64, i64, u32)> {
        let pv = p.get();
        let q = pv * pv;
        let mut out = Vec::new();
        for a in 0..q {
            let t = u32::from(a % pv != 0);
            for b in 0..q {
                if a % pv == 0 && b % pv == 0 {
                    continue;
                }
                let fits = g.iter().enumerate().all(|(n, &d)| {
                    let u = (a * n as i64 + b) % q;
                    if u == 0 {
                        return true;
                    }
                    let v = u32::from(u % pv == 0);
                    v > t || p.digit(u) == d
                });
                if fits {
                    out.push((a, b, t));
                }
            }
        }
        out
    }

    /// Decides membership of the line g = (g1, g2, w). Forms (a, b) are
    /// searched by their residues mod p1² and mod p2²; the domino function is
    /// read off the line and its unobserved entries are filled by search.
    pub fn line_membership(&self, g: &[DecoratedDigit]) -> LineMembership {
        let k = self.domino.pips().len();
        if g.len() != self.width
            || g.iter().any(|d| {
                d.u1 <= 0 || d.u1 >= self.p1.get() || d.u2 <= 0 || d.u2 >= self.p2.get() || d.pip as usize >= k
            })
        {
            return LineMembership::NonMember;
        }
        let g1: Vec<i64> = g.iter().map(|d| d.u1).collect();
        let g2: Vec<i64> = g.iter().map(|d| d.u2).collect();
        let c1 = self.component_candidates(self.p1, &g1);
        let c2 = self.component_candidates(self.p2, &g2);
        let (pv1, pv2) = (self.p1.get(), self.p2.get());
        let (q1, q2) = (pv1 * pv1, pv2 * pv2);
        let val = |u: i64, pv: i64| -> u32 {
            if u == 0 {
                2
            } else {
                u32::from(u % pv == 0)
            }
        };
        let mut spent = 0u64;
        for &(a1, b1, t1) in &c1 {
            for &(a2, b2, t2) in &c2 {
                spent += 1;
                if spent > self.budget {
                    return LineMembership::Indeterminate;
                }
                let mut table: [[Option<u16>; 2]; 2] = [[None; 2]; 2];
                let consistent = g.iter().enumerate().all(|(n, d)| {
                    let v1 = val((a1 * n as i64 + b1) % q1, pv1);
                    let v2 = val((a2 * n as i64 + b2) % q2, pv2);
                    if v1 > t1 || v2 > t2 {
                        return true;
                    }
                    let slot = &mut table[v1 as usize][v2 as usize];
                    match slot {
                        Some(x) => *x == d.pip,
                        None => {
                            *slot = Some(d.pip);
                            true
                        }
                    }
                });
                if !consistent {
                    continue;
                }
                match self.complete_tiling(table, t1, t2, &mut spent) {
                    Fill::Done(tiling) => {
                        let a = crt(&[(q1, a1), (q2, a2)]).expect("distinct primes");
                        let b = crt(&[(q1, b1), (q2, b2)]).expect("distinct primes");
                        return LineMembership::Member { a, b, tiling };
                    }
                    Fill::None => {}
                    Fill::OutOfBudget => return LineMembership::Indeterminate,
                }
            }
        }
        LineMembership::NonMember
    }

    fn complete_tiling(&self, table: [[Option<u16>; 2]; 2], t1: u32, t2: u32, spent: &mut u64) -> Fill {
        let k = self.domino.pips().len();
        let cells: Vec<(usize, usize)> =
            (0..=t2 as usize).flat_map(|y| (0..=t1 as usize).map(move |x| (x, y))).collect();
        let free: Vec<usize> = (0..cells.len()).filter(|&i| table[cells[i].0][cells[i].1].is_none()).collect();
        let total = (k as u64).pow(free.len() as u32);
        for code in 0..total {
            *spent += 1;
            if *spent > self.budget {
                return Fill::OutOfBudget;
            }
            let mut t = table;
            let mut c = code;
            for &i in free.iter().rev() {
                t[cells[i].0][cells[i].1] = Some((c % k as u64) as u16);
                c /= k as u64;
            }
            let at = |x: usize, y: usize| t[x][y].unwrap() as usize;
            let ok_h = t1 == 0 || (0..=t2 as usize).all(|y| self.horiz[at(0, y) * k + at(1, y)]);
            let ok_v = t2 == 0 || (0..=t1 as usize).all(|x| self.vert[at(x, 0) * k + at(x, 1)]);
            if ok_h && ok_v {
                let rect = Rect::new((0, 0), (t1 as i64, t2 as i64)).unwrap();
                let values =
                    cells.iter().map(|&(x, y)| ((x as i64, y as i64), self.domino.pips()[at(x, y)].clone())).collect();
                return Fill::Done(DominoFunction { rect, values });
            }
        }
        Fill::None
    }
}

enum Fill {
    Done(DominoFunction),
    None,
    OutOfBudget,
}

impl SudokuRule for DecoratedRule {
    type Digit = DecoratedDigit;

    fn width(&self) -> usize {
        self.width
    }

    fn digits(&self) -> Vec<DecoratedDigit> {
        let mut out = Vec::with_capacity(self.digit_count());
        for u1 in 1..self.p1.get() {
            for u2 in 1..self.p2.get() {
                for pip in 0..self.domino.pips().len() as u16 {
                    out.push(DecoratedDigit { u1, u2, pip });
                }
            }
        }
        out
    }

    fn member(&self, g: &[DecoratedDigit]) -> Verdict {
        match self.line_membership(g) {
            LineMembership::Member { .. } => Verdict::Member,
            LineMembership::NonMember => Verdict::NonMember,
            LineMembership::Indeterminate => Verdict::Indeterminate,
        }
    }
}

/// Data of the forward encoding: m' = c·(m − D·n − E), and the solution
/// (f_{p1}(m'), f_{p2}(m'), T(ν_{p1}(m'), ν_{p2}(m'))).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecoratedSolutionSpec {
    pub domino_fn: DominoFunction,
    pub infinity_pip: String,
    pub c: i64,
    pub d: i64,
    pub e: i64,
}

#[derive(Debug, Clone)]
pub struct DecoratedSolution {
    p1: Prime,
    p2: Prime,
    width: usize,
    c: i64,
    d: i64,
    e: i64,
    bound: (u32, u32),
    table: BTreeMap<(u32, u32), u16>,
    infinity: u16,
}

pub fn encode(spec: &DecoratedSolutionSpec, rule: &DecoratedRule) -> Result<DecoratedSolution, DecoratedError> {
    let t = &spec.domino_fn;
    if t.rect.lo != (0, 0) {
        return Err(DecoratedError::NotAnchored);
    }
    let violations = verify_domino_function(rule.domino(), t)?;
    if !violations.is_empty() {
        return Err(DecoratedError::NotADominoFunction(violations));
    }
    let q = rule.p1.get() * rule.p2.get();
    if crate::padic::gcd(spec.c, q) != 1 {
        return Err(DecoratedError::NotUnit(spec.c));
    }
    let mut table = BTreeMap::new();
    for (&(s1, s2), pip) in &t.values {
        table.insert((s1 as u32, s2 as u32), rule.pip_index(pip)?);
    }
    Ok(DecoratedSolution {
        p1: rule.p1,
        p2: rule.p2,
        width: rule.width,
        c: spec.c,
        d: spec.d,
        e: spec.e,
        bound: (t.rect.hi.0 as u32, t.rect.hi.1 as u32),
        table,
        infinity: rule.pip_index(&spec.infinity_pip)?,
    })
}

impl DecoratedSolution {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shifted(&self, n: i64, m: i64) -> i64 {
        self.c * (m - self.d * n - self.e)
    }

    pub fn valuations(&self, n: i64, m: i64) -> (Valuation, Valuation) {
        let x = self.shifted(n, m);
        (self.p1.nu(x), self.p2.nu(x))
    }

    pub fn eval(&self, n: i64, m: i64) -> Result<DecoratedDigit, DecoratedError> {
        let x = self.shifted(n, m);
        let pip = if x == 0 {
            self.infinity
        } else {
            let s = (self.p1.nu(x).finite().unwrap(), self.p2.nu(x).finite().unwrap());
            match self.table.get(&s) {
                Some(&pip) => pip,
                None => {
                    return Err(DecoratedError::ValuationOutOfRange {
                        cell: (n, m),
                        required: (s.0.max(self.bound.0), s.1.max(self.bound.1)),
                    })
                }
            }
        };
        Ok(DecoratedDigit { u1: self.p1.digit(x), u2: self.p2.digit(x), pip })
    }

    pub fn window(&self, m_lo: i64, m_hi: i64) -> Result<SolutionWindow<DecoratedDigit>, DecoratedError> {
        let mut values = Vec::with_capacity(self.width * (m_hi - m_lo + 1).max(0) as usize);
        for m in m_lo..=m_hi {
            for n in 0..self.width as i64 {
                values.push(self.eval(n, m)?);
            }
        }
        Ok(SolutionWindow::new(self.width, m_lo, m_hi, values)?)
    }
}

/// Smallest rectangle [(0,0), r] holding every finite valuation pair of
/// c·(m − D·n − E) over the window rows.
pub fn required_rect(
    p1: i64,
    p2: i64,
    width: usize,
    c: i64,
    d: i64,
    e: i64,
    m_lo: i64,
    m_hi: i64,
) -> Result<Rect, DecoratedError> {
    let (q1, q2) = (Prime::new(p1)?, Prime::new(p2)?);
    let mut hi = (0u32, 0u32);
    for m in m_lo..=m_hi {
        for n in 0..width as i64 {
            let x = c * (m - d * n - e);
            if x != 0 {
                hi.0 = hi.0.max(q1.nu(x).finite().unwrap());
                hi.1 = hi.1.max(q2.nu(x).finite().unwrap());
            }
        }
    }
    Ok(Rect::new((0, 0), (hi.0 as i64, hi.1 as i64))?)
}

/// Default extraction height 4·(p1·p2)^{max(r1, r2) + 1}.
pub fn default_extract_height(p1: i64, p2: i64, r: (u32, u32)) -> i64 {
    4 * (p1 * p2).pow(r.0.max(r.1) + 1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    pub tiling: DominoFunction,
    pub c: i64,
    pub d: i64,
    pub e: i64,
}

/// Classifies both unit components, undoes the shear, and reads the domino
/// function on [(0,0), r] from the decoration.
pub fn extract(
    w: &SolutionWindow<DecoratedDigit>,
    rule: &DecoratedRule,
    r: (u32, u32),
) -> Result<Extraction, DecoratedError> {
    let (p1, p2) = (rule.p1.get(), rule.p2.get());
    let f1 = recover_higher(&w.map(|d| d.u1), p1, r.0)
        .map_err(|source| DecoratedError::RecoveryFailed { component: 1, source })?;
    let f2 = recover_higher(&w.map(|d| d.u2), p2, r.1)
        .map_err(|source| DecoratedError::RecoveryFailed { component: 2, source })?;
    let (m1, m2) = (rule.p1.pow(r.0 + 1), rule.p2.pow(r.1 + 1));
    let c = crt(&[(p1, f1.canonical.c), (p2, f2.canonical.c)])?;
    let d = crt(&[(m1, f1.canonical.d), (m2, f2.canonical.d)])?;
    let e = crt(&[(m1, f1.canonical.e), (m2, f2.canonical.e)])?;

    let mut seen: BTreeMap<(u32, u32), (u16, (i64, i64))> = BTreeMap::new();
    for m in w.m_lo()..=w.m_hi() {
        for n in 0..w.width() as i64 {
            let x = m - d * n - e;
            if x == 0 {
                continue;
            }
            let s = (rule.p1.nu(x).finite().unwrap(), rule.p2.nu(x).finite().unwrap());
            if s.0 > r.0 || s.1 > r.1 {
                continue;
            }
            let pip = w.at(n, m).pip;
            match seen.get(&s) {
                Some(&(prev, first)) if prev != pip => {
                    return Err(DecoratedError::InconsistentDecoration { pair: s, first, second: (n, m) })
                }
                Some(_) => {}
                None => {
                    seen.insert(s, (pip, (n, m)));
                }
            }
        }
    }
    let rect = Rect::new((0, 0), (r.0 as i64, r.1 as i64))?;
    let mut values = BTreeMap::new();
    for (s1, s2) in rect.cells() {
        let s = (s1 as u32, s2 as u32);
        let (pip, _) = seen.get(&s).ok_or(DecoratedError::Unobserved(s))?;
        values.insert((s1, s2), rule.pip_label(*pip).to_string());
    }
    let tiling = DominoFunction { rect, values };
    let violations = verify_domino_function(rule.domino(), &tiling)?;
    if !violations.is_empty() {
        return Err(DecoratedError::NotADominoFunction(violations));
    }
    Ok(Extraction { tiling, c, d, e })
}

/// The period-p1·p2 initial condition: (a, (b1, b2, w)) is allowed iff a is
/// not coprime to p1·p2, or b1 ≡ a mod p1 and b2 ≡ a mod p2.
pub fn build_initial_condition(rule: &DecoratedRule) -> InitialCondition<DecoratedDigit> {
    let (p1, p2) = (rule.p1.get(), rule.p2.get());
    let q = p1 * p2;
    let digits = rule.digits();
    let pairs = (0..q).flat_map(|a| {
        digits
            .iter()
            .filter(move |d| initial_condition_allows(p1, p2, a, d.u1, d.u2))
            .map(move |d| (a as usize, *d))
            .collect::<Vec<_>>()
    });
    InitialCondition::new(q as usize, pairs).expect("q >= 1")
}

pub fn initial_condition_allows(p1: i64, p2: i64, a: i64, b1: i64, b2: i64) -> bool {
    crate::padic::gcd(a, p1 * p2) > 1 || ((b1 - a).rem_euclid(p1) == 0 && (b2 - a).rem_euclid(p2) == 0)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub initial_condition_holds: bool,
    pub nonconstant_columns: bool,
    pub agree: bool,
    pub outcome: InitialOutcome,
}

/// Compares the initial-condition check with the non-constant-columns test
/// on both unit components of the window.
pub fn equivalence_harness(
    ic: &InitialCondition<DecoratedDigit>,
    w: &SolutionWindow<DecoratedDigit>,
) -> Result<EquivalenceReport, DecoratedError> {
    let report = check_initial_condition(w, ic)?;
    let holds = matches!(report.outcome, InitialOutcome::Consistent(_));
    let nonconstant = has_nonconstant_columns(&w.map(|d| d.u1)) && has_nonconstant_columns(&w.map(|d| d.u2));
    Ok(EquivalenceReport {
        initial_condition_holds: holds,
        nonconstant_columns: nonconstant,
        agree: holds == nonconstant,
        outcome: report.outcome,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoratedInstanceDoc {
    pub schema: String,
    pub p1: i64,
    pub p2: i64,
    #[serde(rename = "dominoSet")]
    pub domino_set: DominoSetDoc,
    #[serde(rename = "dominoFn")]
    pub domino_fn: DominoFunctionDoc,
    #[serde(rename = "infinityPip")]
    pub infinity_pip: String,
    pub c: i64,
    #[serde(rename = "D")]
    pub d: i64,
    #[serde(rename = "E")]
    pub e: i64,
}

impl Versioned for DecoratedInstanceDoc {
    const SCHEMA: &'static str = "decorated-instance.v1";
    fn schema(&self) -> &str {
        &self.schema
    }
}

/// A rule together with the data of one encoded solution.
#[derive(Debug, Clone)]
pub struct DecoratedInstance {
    pub rule: DecoratedRule,
    pub spec: DecoratedSolutionSpec,
}

impl DecoratedInstance {
    pub fn to_json(&self) -> Result<DecoratedInstanceDoc, DecoratedError> {
        Ok(DecoratedInstanceDoc {
            schema: DecoratedInstanceDoc::SCHEMA.to_string(),
            p1: self.rule.p1.get(),
            p2: self.rule.p2.get(),
            domino_set: self.rule.domino.to_json(),
            domino_fn: DominoFunctionDoc::from_fn(&self.spec.domino_fn)?,
            infinity_pip: self.spec.infinity_pip.clone(),
            c: self.spec.c,
            d: self.spec.d,
            e: self.spec.e,
        })
    }

    pub fn from_json(doc: DecoratedInstanceDoc) -> Result<Self, JsonError> {
        let invalid = |e: DecoratedError| JsonError::Invalid(e.to_string());
        if doc.domino_set.schema != DominoSetDoc::SCHEMA {
            return Err(JsonError::Schema { expected: DominoSetDoc::SCHEMA, found: doc.domino_set.schema });
        }
        let set = DominoSet::from_json(doc.domino_set)?;
        let rule = DecoratedRule::new(doc.p1, doc.p2, set).map_err(invalid)?;
        let domino_fn = doc.domino_fn.into_fn().map_err(|e| JsonError::Invalid(e.to_string()))?;
        rule.pip_index(&doc.infinity_pip).map_err(invalid)?;
        Ok(DecoratedInstance {
            rule,
            spec: DecoratedSolutionSpec { domino_fn, infinity_pip: doc.infinity_pip, c: doc.c, d: doc.d, e: doc.e },
        })
    }
}

/// A six-pip stand-in for the illustrated (3, 5) instance: pips "1".."5"
/// step by one horizontally and by two vertically (mod 5); pip "6" is only
/// used for T(∞, ∞).
pub fn six_pip_set() -> DominoSet {
    let label = |x: i64| (x.rem_euclid(5) + 1).to_string();
    let horiz = (0..5).map(|x| (label(x), label(x + 1))).collect::<Vec<_>>();
    let vert = (0..5).map(|x| (label(x), label(x + 2))).collect::<Vec<_>>();
    DominoSet::new((1..=6).map(|i| i.to_string()), horiz, vert).expect("non-empty")
}

/// The six-pip domino function T(s1, s2) = 1 + (s1 + 2·s2 mod 5) on `rect`.
pub fn six_pip_function(rect: Rect) -> DominoFunction {
    let values = rect.cells().map(|(s1, s2)| ((s1, s2), ((s1 + 2 * s2).rem_euclid(5) + 1).to_string())).collect();
    DominoFunction { rect, values }
}
