//! Sudoku boards {0..N-1} × Z, line rules, solution windows and initial
//! conditions.

use std::collections::BTreeSet;
use std::fmt::Debug;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::json::Versioned;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SudokuError {
    #[error("rule width {rule} does not match window width {window}")]
    WidthMismatch { rule: usize, window: usize },
    #[error("window height {height} is smaller than the period {q}")]
    WindowTooShort { height: usize, q: usize },
    #[error("window needs width >= 1 and m_lo <= m_hi")]
    EmptyWindow,
    #[error("window has {found} values, expected {expected}")]
    WrongSize { expected: usize, found: usize },
    #[error("period must be at least 1")]
    BadPeriod,
}

/// The non-vertical line m = j·n + i.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Line {
    pub j: i64,
    pub i: i64,
}

pub fn line_cells(n_width: usize, line: Line) -> Vec<(i64, i64)> {
    (0..n_width as i64).map(|n| (n, line.j * n + line.i)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Member,
    NonMember,
    /// The membership search ran out of budget.
    Indeterminate,
}

/// A Sudoku rule given by a membership procedure on line functions.
pub trait SudokuRule {
    type Digit: Clone + Eq + Ord + Debug;
    fn width(&self) -> usize;
    fn digits(&self) -> Vec<Self::Digit>;
    fn member(&self, g: &[Self::Digit]) -> Verdict;
}

/// A rule given by an explicit list of accepted line functions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableRule {
    pub width: usize,
    pub digits: Vec<String>,
    pub members: BTreeSet<Vec<String>>,
}

impl TableRule {
    pub fn new(
        width: usize,
        digits: impl IntoIterator<Item = impl Into<String>>,
        members: impl IntoIterator<Item = Vec<String>>,
    ) -> Self {
        let digits: BTreeSet<String> = digits.into_iter().map(Into::into).collect();
        TableRule { width, digits: digits.into_iter().collect(), members: members.into_iter().collect() }
    }

    /// Accepts exactly the constant line functions.
    pub fn constant(width: usize, digits: &[&str]) -> Self {
        let members = digits.iter().map(|d| vec![d.to_string(); width]);
        TableRule::new(width, digits.iter().copied(), members)
    }
}

impl SudokuRule for TableRule {
    type Digit = String;

    fn width(&self) -> usize {
        self.width
    }

    fn digits(&self) -> Vec<String> {
        self.digits.clone()
    }

    fn member(&self, g: &[String]) -> Verdict {
        if self.members.contains(g) {
            Verdict::Member
        } else {
            Verdict::NonMember
        }
    }
}

/// Values of a solution on {0..N-1} × [m_lo, m_hi], stored row by row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionWindow<D> {
    width: usize,
    m_lo: i64,
    m_hi: i64,
    values: Vec<D>,
}

impl<D: Clone> SolutionWindow<D> {
    pub fn new(width: usize, m_lo: i64, m_hi: i64, values: Vec<D>) -> Result<Self, SudokuError> {
        if width == 0 || m_lo > m_hi {
            return Err(SudokuError::EmptyWindow);
        }
        let expected = width * (m_hi - m_lo + 1) as usize;
        if values.len() != expected {
            return Err(SudokuError::WrongSize { expected, found: values.len() });
        }
        Ok(SolutionWindow { width, m_lo, m_hi, values })
    }

    pub fn from_fn(width: usize, m_lo: i64, m_hi: i64, f: impl Fn(i64, i64) -> D) -> Self {
        assert!(width > 0 && m_lo <= m_hi);
        let values = (m_lo..=m_hi).flat_map(|m| (0..width as i64).map(move |n| (n, m))).map(|(n, m)| f(n, m)).collect();
        SolutionWindow { width, m_lo, m_hi, values }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn m_lo(&self) -> i64 {
        self.m_lo
    }

    pub fn m_hi(&self) -> i64 {
        self.m_hi
    }

    pub fn height(&self) -> usize {
        (self.m_hi - self.m_lo + 1) as usize
    }

    pub fn values(&self) -> &[D] {
        &self.values
    }

    pub fn contains(&self, n: i64, m: i64) -> bool {
        n >= 0 && (n as usize) < self.width && self.m_lo <= m && m <= self.m_hi
    }

    pub fn get(&self, n: i64, m: i64) -> Option<&D> {
        if !self.contains(n, m) {
            return None;
        }
        Some(&self.values[(m - self.m_lo) as usize * self.width + n as usize])
    }

    pub fn at(&self, n: i64, m: i64) -> &D {
        self.get(n, m).unwrap_or_else(|| panic!("cell ({n}, {m}) outside window"))
    }

    /// Sub-window on [m_lo, m_hi]; None if it does not fit.
    pub fn slice(&self, m_lo: i64, m_hi: i64) -> Option<Self> {
        if m_lo > m_hi || m_lo < self.m_lo || m_hi > self.m_hi {
            return None;
        }
        Some(SolutionWindow::from_fn(self.width, m_lo, m_hi, |n, m| self.at(n, m).clone()))
    }

    pub fn map<E: Clone>(&self, f: impl Fn(&D) -> E) -> SolutionWindow<E> {
        SolutionWindow {
            width: self.width,
            m_lo: self.m_lo,
            m_hi: self.m_hi,
            values: self.values.iter().map(f).collect(),
        }
    }

    /// Every line lying entirely inside the window, sorted by (j, i).
    pub fn contained_lines(&self) -> Vec<Line> {
        let span = self.m_hi - self.m_lo;
        let last = self.width as i64 - 1;
        let max_j = if last == 0 { 0 } else { span / last };
        let mut out = Vec::new();
        for j in -max_j..=max_j {
            let (lo_off, hi_off) = if j >= 0 { (0, j * last) } else { (j * last, 0) };
            for i in (self.m_lo - lo_off)..=(self.m_hi - hi_off) {
                out.push(Line { j, i });
            }
        }
        out
    }

    pub fn line_values(&self, line: Line) -> Option<Vec<D>> {
        line_cells(self.width, line).into_iter().map(|(n, m)| self.get(n, m).cloned()).collect()
    }

    pub fn to_doc(&self, digit_encoding: &str) -> SudokuWindowDoc<D> {
        SudokuWindowDoc {
            schema: "sudoku-window.v1".to_string(),
            width: self.width,
            m_lo: self.m_lo,
            m_hi: self.m_hi,
            digit_encoding: digit_encoding.to_string(),
            digits: self.values.clone(),
        }
    }

    pub fn from_doc(doc: SudokuWindowDoc<D>) -> Result<Self, SudokuError> {
        SolutionWindow::new(doc.width, doc.m_lo, doc.m_hi, doc.digits)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SudokuWindowDoc<D> {
    pub schema: String,
    pub width: usize,
    #[serde(rename = "mLo")]
    pub m_lo: i64,
    #[serde(rename = "mHi")]
    pub m_hi: i64,
    #[serde(rename = "digitEncoding")]
    pub digit_encoding: String,
    /// Row-major, lowest row first.
    pub digits: Vec<D>,
}

impl<D: Serialize + serde::de::DeserializeOwned> Versioned for SudokuWindowDoc<D> {
    const SCHEMA: &'static str = "sudoku-window.v1";
    fn schema(&self) -> &str {
        &self.schema
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WindowReport {
    pub checked_lines: usize,
    pub failures: Vec<Line>,
    pub indeterminate: Vec<Line>,
}

impl WindowReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.indeterminate.is_empty()
    }
}

pub fn verify_window<R: SudokuRule>(rule: &R, w: &SolutionWindow<R::Digit>) -> Result<WindowReport, SudokuError> {
    if rule.width() != w.width() {
        return Err(SudokuError::WidthMismatch { rule: rule.width(), window: w.width() });
    }
    let mut report = WindowReport::default();
    for line in w.contained_lines() {
        let g = w.line_values(line).expect("contained line");
        report.checked_lines += 1;
        match rule.member(&g) {
            Verdict::Member => {}
            Verdict::NonMember => report.failures.push(line),
            Verdict::Indeterminate => report.indeterminate.push(line),
        }
    }
    Ok(report)
}

/// A total function on the board, evaluated on demand.
pub struct LazySolution<D> {
    pub width: usize,
    eval: Arc<dyn Fn(i64, i64) -> D + Send + Sync>,
}

impl<D> Clone for LazySolution<D> {
    fn clone(&self) -> Self {
        LazySolution { width: self.width, eval: Arc::clone(&self.eval) }
    }
}

impl<D: Clone + 'static> LazySolution<D> {
    pub fn new(width: usize, eval: impl Fn(i64, i64) -> D + Send + Sync + 'static) -> Self {
        LazySolution { width, eval: Arc::new(eval) }
    }

    pub fn eval(&self, n: i64, m: i64) -> D {
        (self.eval)(n, m)
    }

    pub fn window(&self, m_lo: i64, m_hi: i64) -> SolutionWindow<D> {
        SolutionWindow::from_fn(self.width, m_lo, m_hi, |n, m| self.eval(n, m))
    }
}

/// (n, m) ↦ s(n, a·n + b·m + c).
pub fn apply_affine<D: Clone + 'static>(s: &LazySolution<D>, a: i64, b: i64, c: i64) -> LazySolution<D> {
    let inner = s.clone();
    LazySolution::new(s.width, move |n, m| inner.eval(n, a * n + b * m + c))
}

/// Pairs (residue mod q, digit) allowed by the initial condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitialCondition<D> {
    q: usize,
    pairs: BTreeSet<(usize, D)>,
}

impl<D: Ord + Clone> InitialCondition<D> {
    pub fn new(q: usize, pairs: impl IntoIterator<Item = (usize, D)>) -> Result<Self, SudokuError> {
        if q == 0 {
            return Err(SudokuError::BadPeriod);
        }
        Ok(InitialCondition { q, pairs: pairs.into_iter().map(|(a, d)| (a % q, d)).collect() })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn allows(&self, a: usize, d: &D) -> bool {
        self.pairs.contains(&(a, d.clone()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitialOutcome {
    /// σ_n per column, as the image of each residue class of m.
    Consistent(Vec<Vec<usize>>),
    Inconsistent {
        column: usize,
    },
}

/// Consistency is decided only on the rows of the window, not the whole column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitialReport {
    pub window_relative: bool,
    pub m_lo: i64,
    pub m_hi: i64,
    pub outcome: InitialOutcome,
}

pub fn check_initial_condition<D: Clone + Ord>(
    w: &SolutionWindow<D>,
    ic: &InitialCondition<D>,
) -> Result<InitialReport, SudokuError> {
    let q = ic.q();
    if w.height() < q {
        return Err(SudokuError::WindowTooShort { height: w.height(), q });
    }
    let mut sigmas = Vec::with_capacity(w.width());
    for n in 0..w.width() {
        let allowed: Vec<Vec<usize>> = (0..q)
            .map(|r| {
                (0..q)
                    .filter(|&a| {
                        (w.m_lo()..=w.m_hi())
                            .filter(|m| m.rem_euclid(q as i64) as usize == r)
                            .all(|m| ic.allows(a, w.at(n as i64, m)))
                    })
                    .collect()
            })
            .collect();
        match perfect_matching(q, &allowed) {
            Some(sigma) => sigmas.push(sigma),
            None => {
                return Ok(InitialReport {
                    window_relative: true,
                    m_lo: w.m_lo(),
                    m_hi: w.m_hi(),
                    outcome: InitialOutcome::Inconsistent { column: n },
                })
            }
        }
    }
    Ok(InitialReport {
        window_relative: true,
        m_lo: w.m_lo(),
        m_hi: w.m_hi(),
        outcome: InitialOutcome::Consistent(sigmas),
    })
}

/// Kuhn's augmenting-path matching of left vertices 0..k into right 0..k.
/// Returns the partner of each left vertex if the matching is perfect.
pub fn perfect_matching(k: usize, adj: &[Vec<usize>]) -> Option<Vec<usize>> {
    fn augment(u: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &v in &adj[u] {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if owner[v].is_none_or(|w| augment(w, adj, seen, owner)) {
                owner[v] = Some(u);
                return true;
            }
        }
        false
    }
    let mut owner = vec![None; k];
    for u in 0..k {
        let mut seen = vec![false; k];
        if !augment(u, adj, &mut seen, &mut owner) {
            return None;
        }
    }
    let mut partner = vec![0; k];
    for (v, u) in owner.iter().enumerate() {
        partner[u.expect("perfect")] = v;
    }
    Some(partner)
}
