//! Compiling a Sudoku puzzle (rule plus initial condition) into functional
//! equations over Z² × Z/2, and decoding assignments back into lines.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::library::{boolean_equation, period_equation, push_periodized_permutation};
use super::set::Elem;
use super::{materialize_cap, Assignment, BooleanConstraint, Component, FeqError, GroupSpec, Property, Quotient};
use crate::decorated::{initial_condition_allows, DecoratedDigit, DecoratedRule};
use crate::domino::{DominoSet, DominoSetDoc};
use crate::json::Versioned;
use crate::padic_sudoku::PAdicRule;
use crate::sudoku::{SudokuRule, TableRule, Verdict};

/// A Sudoku rule that can be rebuilt from JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum RuleSpec {
    PAdic {
        p: i64,
        width: usize,
    },
    Decorated {
        p1: i64,
        p2: i64,
        #[serde(rename = "dominoSet")]
        domino_set: DominoSetDoc,
    },
    Table {
        width: usize,
        digits: Vec<String>,
        members: Vec<Vec<String>>,
    },
}

/// An initial condition that can be rebuilt from JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum IcSpec {
    /// Every (residue, digit) pair is allowed.
    Trivial {
        q: usize,
    },
    /// Period p1·p2: units must agree with the residue mod each prime.
    Decorated {
        p1: i64,
        p2: i64,
    },
    Table {
        q: usize,
        pairs: Vec<(usize, String)>,
    },
}

/// Rule and initial condition over digit indices 0..#Σ.
#[derive(Clone)]
pub struct BuiltPuzzle {
    pub width: usize,
    pub labels: Vec<String>,
    pub q: usize,
    /// allowed[a][digit] for residues a in 0..q.
    pub allowed: Vec<Vec<bool>>,
    member: Arc<dyn Fn(&[usize]) -> Verdict + Send + Sync>,
}

impl fmt::Debug for BuiltPuzzle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BuiltPuzzle")
            .field("width", &self.width)
            .field("labels", &self.labels)
            .field("q", &self.q)
            .finish()
    }
}

impl BuiltPuzzle {
    pub fn member(&self, g: &[usize]) -> Verdict {
        (self.member)(g)
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

pub fn decorated_label(rule: &DecoratedRule, d: &DecoratedDigit) -> String {
    format!("{},{},{}", d.u1, d.u2, rule.pip_label(d.pip))
}

fn indexed<R>(rule: R, label: impl Fn(&R, &R::Digit) -> String) -> (Vec<String>, Vec<R::Digit>, Arc<R>)
where
    R: SudokuRule,
{
    let digits = rule.digits();
    let labels = digits.iter().map(|d| label(&rule, d)).collect();
    (labels, digits, Arc::new(rule))
}

pub fn build_puzzle(rule: &RuleSpec, ic: &IcSpec) -> Result<BuiltPuzzle, FeqError> {
    let err = |e: String| FeqError::Rule(e);
    let (width, labels, member, dec): (
        usize,
        Vec<String>,
        Arc<dyn Fn(&[usize]) -> Verdict + Send + Sync>,
        Option<Vec<DecoratedDigit>>,
    ) = match rule {
        RuleSpec::PAdic { p, width } => {
            let r = PAdicRule::new(*p, *width).map_err(|e| err(e.to_string()))?;
            let (labels, digits, r) = indexed(r, |_, d| d.to_string());
            let m = move |g: &[usize]| r.member(&g.iter().map(|&k| digits[k]).collect::<Vec<_>>());
            (*width, labels, Arc::new(m), None)
        }
        RuleSpec::Decorated { p1, p2, domino_set } => {
            let set = DominoSet::from_json(domino_set.clone()).map_err(|e| err(e.to_string()))?;
            let r = DecoratedRule::new(*p1, *p2, set).map_err(|e| err(e.to_string()))?;
            let width = r.width();
            let (labels, digits, r) = indexed(r, decorated_label);
            let keep = digits.clone();
            let m = move |g: &[usize]| r.member(&g.iter().map(|&k| digits[k]).collect::<Vec<_>>());
            (width, labels, Arc::new(m), Some(keep))
        }
        RuleSpec::Table { width, digits, members } => {
            let r = TableRule::new(*width, digits.iter().cloned(), members.iter().cloned());
            let (labels, digits, r) = indexed(r, |_, d| d.clone());
            let m = move |g: &[usize]| r.member(&g.iter().map(|&k| digits[k].clone()).collect::<Vec<_>>());
            (*width, labels, Arc::new(m), None)
        }
    };
    let (q, allowed) = match ic {
        IcSpec::Trivial { q } => (*q, vec![vec![true; labels.len()]; *q]),
        IcSpec::Decorated { p1, p2 } => {
            let Some(digits) = dec.as_ref() else {
                return Err(err("decorated initial condition needs a decorated rule".into()));
            };
            if !matches!(rule, RuleSpec::Decorated { p1: a, p2: b, .. } if a == p1 && b == p2) {
                return Err(err("initial condition primes differ from the rule".into()));
            }
            let q = (p1 * p2) as usize;
            let allowed = (0..q)
                .map(|a| digits.iter().map(|d| initial_condition_allows(*p1, *p2, a as i64, d.u1, d.u2)).collect())
                .collect();
            (q, allowed)
        }
        IcSpec::Table { q, pairs } => {
            let mut allowed = vec![vec![false; labels.len()]; *q];
            for (a, d) in pairs {
                let k = labels.iter().position(|l| l == d).ok_or_else(|| err(format!("unknown digit {d:?}")))?;
                if *a >= *q {
                    return Err(err(format!("residue {a} not below q = {q}")));
                }
                allowed[*a][k] = true;
            }
            (*q, allowed)
        }
    };
    if q == 0 {
        return Err(err("q must be at least 1".into()));
    }
    Ok(BuiltPuzzle { width, labels, q, allowed, member })
}

/// ι(k): a leading +1 followed by k in binary over s0 - 1 places, most
/// significant first, with bit 0 as +1 and bit 1 as -1.
pub fn iota(k: usize, s0: usize) -> Vec<i64> {
    let mut v = vec![1];
    for b in (0..s0 - 1).rev() {
        v.push(if k >> b & 1 == 0 { 1 } else { -1 });
    }
    v
}

/// Inverse of `iota` on sign vectors reduced mod L.
pub fn iota_inverse(block: &[i64], l: i64) -> Option<usize> {
    if block.first().map(|x| x.rem_euclid(l)) != Some(1) {
        return None;
    }
    let mut k = 0usize;
    for &x in &block[1..] {
        k = k.checked_mul(2)?;
        match x.rem_euclid(l) {
            1 => {}
            y if y == l - 1 => k += 1,
            _ => return None,
        }
    }
    Some(k)
}

/// A Sudoku puzzle as a pipeline document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SudokuRuleDoc {
    pub schema: String,
    pub rule: RuleSpec,
    pub ic: IcSpec,
}

impl Versioned for SudokuRuleDoc {
    const SCHEMA: &'static str = "sudoku-rule.v1";
    fn schema(&self) -> &str {
        &self.schema
    }
}

impl SudokuRuleDoc {
    pub fn new(rule: RuleSpec, ic: IcSpec) -> Self {
        SudokuRuleDoc { schema: Self::SCHEMA.into(), rule, ic }
    }
}

/// The decorated puzzle S^R with its period-p1·p2 initial condition.
pub fn decorated_puzzle(set: &DominoSet, p1: i64, p2: i64) -> SudokuRuleDoc {
    SudokuRuleDoc::new(RuleSpec::Decorated { p1, p2, domino_set: set.to_json() }, IcSpec::Decorated { p1, p2 })
}

/// A small stand-in puzzle on pips: a line of the given width is accepted
/// iff each consecutive pair is a horizontal domino; the initial condition
/// is trivial. Reflexive relations make the constant lines members.
pub fn chain_puzzle(set: &DominoSet, width: usize) -> Result<SudokuRuleDoc, FeqError> {
    let k = set.pips().len();
    let total = (k as u128).checked_pow(width as u32);
    if width == 0 || total.is_none_or(|t| t > materialize_cap() as u128) {
        return Err(FeqError::TooLarge(format!("{k}^{width} lines")));
    }
    let mut members = Vec::new();
    for mut code in 0..total.unwrap() as usize {
        let mut line = Vec::with_capacity(width);
        for _ in 0..width {
            line.push(set.pips()[code % k].clone());
            code /= k;
        }
        line.reverse();
        if line.windows(2).all(|w| set.allows_horiz(&w[0], &w[1])) {
            members.push(line);
        }
    }
    Ok(SudokuRuleDoc::new(RuleSpec::Table { width, digits: set.pips().to_vec(), members }, IcSpec::Trivial { q: 1 }))
}

/// Smallest admissible (s0, L): 2^{s0-1} covers both the digits and q,
/// and L = 4·s0·N + 5.
pub fn minimal_parameters(built: &BuiltPuzzle) -> (usize, i64) {
    let needed = built.labels.len().max(built.q).max(1);
    let mut s0 = 1;
    while 1usize << (s0 - 1) < needed {
        s0 += 1;
    }
    (s0, 4 * (s0 * built.width) as i64 + 5)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SudokuProgramSpec {
    pub rule: RuleSpec,
    pub ic: IcSpec,
    pub s0: usize,
    #[serde(rename = "L")]
    pub l: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct SudokuOmegaDoc {
    program: SudokuProgramSpec,
    signed: bool,
}

/// The set Ω of sign tuples (ω_{a,b,n}) encoding an accepted line g and
/// residues c_n with (c_n, g(n)) allowed; with `signed`, Ω ⊎ -Ω.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(into = "SudokuOmegaDoc", try_from = "SudokuOmegaDoc")]
pub struct SudokuOmega {
    program: SudokuProgramSpec,
    signed: bool,
    built: Arc<BuiltPuzzle>,
}

impl PartialEq for SudokuOmega {
    fn eq(&self, other: &Self) -> bool {
        self.program == other.program && self.signed == other.signed
    }
}

impl Eq for SudokuOmega {}

impl From<SudokuOmega> for SudokuOmegaDoc {
    fn from(o: SudokuOmega) -> Self {
        SudokuOmegaDoc { program: o.program, signed: o.signed }
    }
}

impl TryFrom<SudokuOmegaDoc> for SudokuOmega {
    type Error = FeqError;
    fn try_from(doc: SudokuOmegaDoc) -> Result<Self, FeqError> {
        SudokuOmega::new(doc.program, doc.signed)
    }
}

impl SudokuOmega {
    pub fn new(program: SudokuProgramSpec, signed: bool) -> Result<Self, FeqError> {
        let built = Arc::new(build_puzzle(&program.rule, &program.ic)?);
        Ok(SudokuOmega { program, signed, built })
    }

    pub fn program(&self) -> &SudokuProgramSpec {
        &self.program
    }

    pub fn built(&self) -> &BuiltPuzzle {
        &self.built
    }

    pub fn modulus(&self) -> i64 {
        self.program.l
    }

    pub fn dim(&self) -> usize {
        2 * self.program.s0 * self.built.width
    }

    fn block<'a>(&self, h: &'a [i64], a: usize, n: usize) -> &'a [i64] {
        let s0 = self.program.s0;
        let at = coord_index(s0, self.built.width, a, 0, n);
        &h[at..at + s0]
    }

    /// The decoded line and residues when h ∈ Ω (unsigned).
    pub fn decode(&self, h: &[i64]) -> Option<(Vec<usize>, Vec<usize>)> {
        let l = self.program.l;
        let mut g = Vec::with_capacity(self.built.width);
        let mut c = Vec::with_capacity(self.built.width);
        for n in 0..self.built.width {
            let d = iota_inverse(self.block(h, 1, n), l).filter(|&d| d < self.built.labels.len())?;
            let r = iota_inverse(self.block(h, 0, n), l).filter(|&r| r < self.built.q)?;
            if !self.built.allowed[r][d] {
                return None;
            }
            g.push(d);
            c.push(r);
        }
        Some((g, c))
    }

    fn contains_unsigned(&self, h: &[i64]) -> bool {
        match self.decode(h) {
            Some((g, _)) => self.built.member(&g) == Verdict::Member,
            None => false,
        }
    }

    pub fn contains(&self, h: &[i64]) -> bool {
        if h.len() != self.dim() {
            return false;
        }
        if self.contains_unsigned(h) {
            return true;
        }
        self.signed && {
            let neg: Elem = h.iter().map(|x| -x).collect();
            self.contains_unsigned(&neg)
        }
    }

    fn accepted_lines(&self, cap: usize) -> Option<Vec<Vec<usize>>> {
        let k = self.built.labels.len();
        let total = (k as u128).checked_pow(self.built.width as u32)?;
        if total > cap as u128 {
            return None;
        }
        let mut out = Vec::new();
        for code in 0..total as usize {
            let mut g = vec![0; self.built.width];
            let mut c = code;
            for slot in g.iter_mut().rev() {
                *slot = c % k;
                c /= k;
            }
            if self.built.member(&g) == Verdict::Member {
                out.push(g);
            }
        }
        Some(out)
    }

    pub fn size(&self) -> Option<u128> {
        let lines = self.accepted_lines(super::materialize_cap())?;
        let mut total = 0u128;
        for g in lines {
            let mut ways = 1u128;
            for &d in &g {
                ways *= (0..self.built.q).filter(|&r| self.built.allowed[r][d]).count() as u128;
            }
            total += ways;
        }
        Some(if self.signed { 2 * total } else { total })
    }

    pub fn enumerate(&self, cap: usize) -> Option<Vec<Elem>> {
        if self.size()? > cap as u128 {
            return None;
        }
        let s0 = self.program.s0;
        let l = self.program.l;
        let width = self.built.width;
        let mut out = std::collections::BTreeSet::new();
        for g in self.accepted_lines(cap)? {
            let choices: Vec<Vec<usize>> =
                g.iter().map(|&d| (0..self.built.q).filter(|&r| self.built.allowed[r][d]).collect()).collect();
            let mut idx = vec![0usize; width];
            'outer: loop {
                let mut h = vec![0i64; self.dim()];
                for n in 0..width {
                    for (b, x) in iota(g[n], s0).into_iter().enumerate() {
                        h[coord_index(s0, width, 1, b, n)] = x.rem_euclid(l);
                    }
                    for (b, x) in iota(choices[n][idx[n]], s0).into_iter().enumerate() {
                        h[coord_index(s0, width, 0, b, n)] = x.rem_euclid(l);
                    }
                }
                if self.signed {
                    out.insert(h.iter().map(|x| (-x).rem_euclid(l)).collect::<Elem>());
                }
                out.insert(h);
                for n in (0..width).rev() {
                    idx[n] += 1;
                    if idx[n] < choices[n].len() {
                        continue 'outer;
                    }
                    idx[n] = 0;
                }
                break;
            }
        }
        Some(out.into_iter().collect())
    }
}

/// Coordinate of α_{a,b,n}: the a = 0 block for all columns, then a = 1.
pub fn coord_index(s0: usize, width: usize, a: usize, b: usize, n: usize) -> usize {
    a * s0 * width + n * s0 + b
}

pub fn component_name(a: usize, b: usize, n: usize) -> String {
    format!("a{a}.b{b}.n{n}")
}

/// G = Z² × Z/2 with e = ((0, 0), 1).
pub fn program_group() -> GroupSpec {
    GroupSpec { free_rank: 2, torsion: vec![2] }
}

pub const PROGRAM_E: [i64; 3] = [0, 0, 1];

/// Builds the property over Z² × Z/2 that is satisfiable iff the puzzle is
/// solvable: the 2·s0·N components are ((0,0),1)-boolean, α_{a,b,n} is
/// ((-n,1),0)-periodic, the tuple lies in Ω ⊎ -Ω, and each a = 0 block is a
/// periodized permutation of ι0 along the first coordinate.
pub fn program_sudoku(spec: &SudokuProgramSpec) -> Result<Property, FeqError> {
    let omega = SudokuOmega::new(spec.clone(), true)?;
    let built = omega.built().clone();
    let (s0, l, width) = (spec.s0, spec.l, built.width);
    let needed = built.labels.len().max(built.q);
    if s0 == 0 || (s0 <= 64 && needed as u128 > 1u128 << (s0 - 1)) {
        return Err(FeqError::S0TooSmall { s0, needed });
    }
    let bound = 4 * (s0 * width) as i64 + 4;
    if l <= bound {
        return Err(FeqError::ModulusTooSmall { found: l, bound });
    }
    let count = 2 * s0 as u128 * width as u128;
    if count > materialize_cap() as u128 {
        return Err(FeqError::TooLarge(format!("{count} components")));
    }
    let g = program_group();
    let mut comps = Vec::with_capacity(2 * s0 * width);
    for a in 0..2 {
        for n in 0..width {
            for b in 0..s0 {
                comps.push(Component::cyclic(component_name(a, b, n), l));
            }
        }
    }
    let mut p = Property::new(g.clone(), comps)?;
    let all: Vec<usize> = (0..2 * s0 * width).collect();
    for &k in &all {
        p.push(boolean_equation(&g, k, &PROGRAM_E, l))?;
    }
    for a in 0..2 {
        for n in 0..width {
            for b in 0..s0 {
                let k = coord_index(s0, width, a, b, n);
                p.push(period_equation(&g, vec![k], vec![l], &[-(n as i64), 1, 0])?)?;
            }
        }
    }
    p.constraints.push(BooleanConstraint {
        label: "omega".into(),
        scope: all,
        e: PROGRAM_E.to_vec(),
        modulus: l,
        omega: super::SetExpr::SudokuOmega(Box::new(omega)),
    });
    let table: Vec<Vec<i64>> = (0..built.q).map(|k| iota(k, s0)).collect();
    for n in 0..width {
        let coords: Vec<usize> = (0..s0).map(|b| coord_index(s0, width, 0, b, n)).collect();
        push_periodized_permutation(&mut p, &coords, &[1, 0, 0], &PROGRAM_E, l, &table, false)?;
    }
    Ok(p)
}

/// The main components built from a Sudoku solution F and permutations σ_n:
/// α_{1,·,n}((i,j),t) = (-1)^t ι1(F(n, jn+i)) and
/// α_{0,·,n}((i,j),t) = (-1)^t ι0(σ_n(jn+i mod q)).
pub fn forward_assignment(
    spec: &SudokuProgramSpec,
    built: &BuiltPuzzle,
    q: &Quotient,
    f: impl Fn(i64, i64) -> usize,
    sigma: &[Vec<usize>],
) -> Assignment {
    let (s0, width, l) = (spec.s0, built.width, spec.l);
    let dim = 2 * s0 * width;
    Assignment::from_fn(q, vec![l; dim], |x| {
        let (i, j, t) = (x[0], x[1], x[2]);
        let sgn = if t == 0 { 1 } else { -1 };
        let mut v = vec![0; dim];
        for n in 0..width {
            let m = j * n as i64 + i;
            let d = f(n as i64, m);
            let r = sigma[n][m.rem_euclid(built.q as i64) as usize];
            for (b, s) in iota(d, s0).into_iter().enumerate() {
                v[coord_index(s0, width, 1, b, n)] = sgn * s;
            }
            for (b, s) in iota(r, s0).into_iter().enumerate() {
                v[coord_index(s0, width, 0, b, n)] = sgn * s;
            }
        }
        v
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedLine {
    pub i: i64,
    pub j: i64,
    /// +1 when the tuple lies in Ω, -1 when in -Ω.
    pub sign: i64,
    pub digits: Vec<String>,
    pub residues: Vec<usize>,
    pub verdict: Verdict,
}

/// Reads the line n ↦ F(n, jn + i) at every quotient point ((i, j), 0).
pub fn decode_lines(spec: &SudokuProgramSpec, q: &Quotient, alpha: &Assignment) -> Result<Vec<DecodedLine>, FeqError> {
    let omega = SudokuOmega::new(spec.clone(), false)?;
    let dim = omega.dim();
    let mut out = Vec::new();
    for y in 0..q.size() {
        let x = q.coords(y);
        if x[2] != 0 {
            continue;
        }
        let tuple: Elem = alpha.at(y)[..dim].to_vec();
        let neg: Elem = tuple.iter().map(|v| -v).collect();
        let (sign, decoded) = match omega.decode(&tuple) {
            Some(d) => (1, Some(d)),
            None => (-1, omega.decode(&neg)),
        };
        let (g, c) = decoded.ok_or_else(|| FeqError::Rule(format!("point {x:?} does not encode a line")))?;
        out.push(DecodedLine {
            i: x[0],
            j: x[1],
            sign,
            digits: g.iter().map(|&d| omega.built().labels[d].clone()).collect(),
            residues: c,
            verdict: omega.built().member(&g),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(members: Vec<Vec<String>>) -> SudokuProgramSpec {
        SudokuProgramSpec {
            rule: RuleSpec::Table { width: 2, digits: vec!["A".into(), "B".into()], members },
            ic: IcSpec::Trivial { q: 1 },
            s0: 2,
            l: 21,
        }
    }

    fn constant_members() -> Vec<Vec<String>> {
        vec![vec!["A".into(), "A".into()], vec!["B".into(), "B".into()]]
    }

    #[test]
    fn iota_roundtrip() {
        for s0 in 1..6 {
            for k in 0..1usize << (s0 - 1) {
                let v = iota(k, s0);
                assert_eq!(v[0], 1);
                assert_eq!(iota_inverse(&v.iter().map(|x| x.rem_euclid(7)).collect::<Vec<_>>(), 7), Some(k));
                let neg: Vec<i64> = v.iter().map(|x| (-x).rem_euclid(7)).collect();
                assert_eq!(iota_inverse(&neg, 7), None);
            }
        }
    }

    #[test]
    fn toy_shapes() {
        let spec = toy(constant_members());
        let p = program_sudoku(&spec).unwrap();
        assert_eq!(p.components.len(), 8);
        assert_eq!(p.constraints.len(), 1);
        let omega = SudokuOmega::new(spec.clone(), true).unwrap();
        assert_eq!(omega.size(), Some(4));
        assert_eq!(omega.enumerate(1000).unwrap().len(), 4);
        for h in omega.enumerate(1000).unwrap() {
            assert!(omega.contains(&h));
        }
        let mut bad = spec.clone();
        bad.l = 20;
        assert!(matches!(program_sudoku(&bad), Err(FeqError::ModulusTooSmall { .. })));
        bad = spec.clone();
        bad.s0 = 1;
        assert!(matches!(program_sudoku(&bad), Err(FeqError::S0TooSmall { .. })));
    }

    #[test]
    fn omega_json_roundtrip() {
        let o = SudokuOmega::new(toy(constant_members()), true).unwrap();
        let s = serde_json::to_string(&super::super::SetExpr::SudokuOmega(Box::new(o.clone()))).unwrap();
        let back: super::super::SetExpr = serde_json::from_str(&s).unwrap();
        assert_eq!(back, super::super::SetExpr::SudokuOmega(Box::new(o)));
    }
}
