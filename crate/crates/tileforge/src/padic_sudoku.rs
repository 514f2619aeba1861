//! The p-adic Sudoku rule S_{p,N}, solution generation, and structure
//! recovery from solution windows.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::json::{JsonError, Versioned};
use crate::padic::{AffineForm1, AffineForm2, CanonicalForm, PadicError, Prime, Valuation};
use crate::sudoku::{LazySolution, Line, SolutionWindow, SudokuRule, Verdict};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PadicSudokuError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("width {n} is not a positive multiple of p^2 = {p2}")]
    BadWidth { n: usize, p2: i64 },
    #[error("digit {digit} at position {at} is not a unit mod {p}")]
    NotUnit { digit: i64, at: usize, p: i64 },
    #[error("coefficients vanish modulo p^precision")]
    AllZero,
    #[error("precision must be at least 1")]
    BadPrecision,
    #[error("no good 4x4 square in the window")]
    NoGoodSquare,
    #[error("square at {origin:?} is inconsistent at cell {cell:?}")]
    InconsistentSquare { origin: (i64, i64), cell: (i64, i64) },
    #[error("extension contradicted at cell {0:?}")]
    ContradictionAt((i64, i64)),
    #[error("no vertically non-degenerate form fits at precision {0}")]
    NoForm(u32),
    #[error("{} inequivalent forms fit at precision {precision}", forms.len())]
    Ambiguous { precision: u32, forms: Vec<CanonicalForm> },
}

/// The rule S_{p,N} with digits 1..p-1.
#[derive(Debug, Clone)]
pub struct PAdicRule {
    p: Prime,
    n: usize,
    table: Vec<Option<i64>>,
}

impl PAdicRule {
    pub fn new(p: i64, n: usize) -> Result<Self, PadicSudokuError> {
        let p = Prime::new(p)?;
        let p2 = p.pow(2);
        if n == 0 || n as i64 % p2 != 0 {
            return Err(PadicSudokuError::BadWidth { n, p2 });
        }
        Ok(PAdicRule { p, n, table: digit_table(p, 1) })
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn witness(&self, g: &[i64]) -> Result<Option<AffineForm1>, PadicSudokuError> {
        membership_with(self.p, &self.table, g)
    }
}

impl SudokuRule for PAdicRule {
    type Digit = i64;

    fn width(&self) -> usize {
        self.n
    }

    fn digits(&self) -> Vec<i64> {
        (1..self.p.get()).collect()
    }

    fn member(&self, g: &[i64]) -> Verdict {
        match self.witness(g) {
            Ok(Some(_)) => Verdict::Member,
            _ => Verdict::NonMember,
        }
    }
}

/// f_p(u) for residues u mod p^{r+1} with ν_p(u) ≤ r; None otherwise.
pub fn digit_table(p: Prime, r: u32) -> Vec<Option<i64>> {
    let q = p.pow(r + 1);
    (0..q).map(|u| if u == 0 { None } else { Some(p.digit(u)) }).collect()
}

/// Least (a, b) mod p^2, non-degenerate mod p, with g(n) = f_p(an + b)
/// wherever ν_p(an + b) ≤ 1.
pub fn membership_witness(p: i64, g: &[i64]) -> Result<Option<AffineForm1>, PadicSudokuError> {
    let p = Prime::new(p)?;
    membership_with(p, &digit_table(p, 1), g)
}

pub fn membership(p: i64, g: &[i64]) -> Result<bool, PadicSudokuError> {
    Ok(membership_witness(p, g)?.is_some())
}

fn membership_with(p: Prime, table: &[Option<i64>], g: &[i64]) -> Result<Option<AffineForm1>, PadicSudokuError> {
    let pv = p.get();
    for (at, &digit) in g.iter().enumerate() {
        if digit <= 0 || digit >= pv {
            return Err(PadicSudokuError::NotUnit { digit, at, p: pv });
        }
    }
    let q = pv * pv;
    for a in 0..q {
        for b in 0..q {
            if a % pv == 0 && b % pv == 0 {
                continue;
            }
            let fits = g.iter().enumerate().all(|(n, &d)| {
                let u = (a * n as i64 + b) % q;
                table[u as usize].is_none_or(|f| f == d)
            });
            if fits {
                return Ok(Some(AffineForm1::new(a, b)));
            }
        }
    }
    Ok(None)
}

/// Coefficients A, B, C read modulo p^precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PAdicSolutionSpec {
    pub p: i64,
    pub precision: u32,
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PAdicSolutionDoc {
    pub schema: String,
    pub p: i64,
    pub precision: u32,
    #[serde(rename = "A")]
    pub a: i64,
    #[serde(rename = "B")]
    pub b: i64,
    #[serde(rename = "C")]
    pub c: i64,
}

impl Versioned for PAdicSolutionDoc {
    const SCHEMA: &'static str = "padic-solution.v1";
    fn schema(&self) -> &str {
        &self.schema
    }
}

impl PAdicSolutionSpec {
    pub fn to_json(&self) -> PAdicSolutionDoc {
        PAdicSolutionDoc {
            schema: PAdicSolutionDoc::SCHEMA.to_string(),
            p: self.p,
            precision: self.precision,
            a: self.a,
            b: self.b,
            c: self.c,
        }
    }

    pub fn from_json(doc: PAdicSolutionDoc) -> Result<Self, JsonError> {
        Ok(PAdicSolutionSpec { p: doc.p, precision: doc.precision, a: doc.a, b: doc.b, c: doc.c })
    }
}

/// F(n, m) = f_p(An + Bm + C), with the f_p(0) = 1 convention at cells
/// where the combination vanishes to the working precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PAdicSolution {
    pub p: Prime,
    pub precision: u32,
    pub form: AffineForm2,
    pub width: usize,
}

impl PAdicSolution {
    pub fn new(spec: PAdicSolutionSpec, width: usize) -> Result<Self, PadicSudokuError> {
        let p = Prime::new(spec.p)?;
        if spec.precision == 0 {
            return Err(PadicSudokuError::BadPrecision);
        }
        let q = p.pow(spec.precision);
        let form = AffineForm2::new(spec.a, spec.b, spec.c).reduce(q);
        if form == AffineForm2::new(0, 0, 0) {
            return Err(PadicSudokuError::AllZero);
        }
        let p2 = p.pow(2);
        if width == 0 || width as i64 % p2 != 0 {
            return Err(PadicSudokuError::BadWidth { n: width, p2 });
        }
        Ok(PAdicSolution { p, precision: spec.precision, form, width })
    }

    fn modulus(&self) -> i64 {
        self.p.pow(self.precision)
    }

    pub fn is_low_confidence(&self, n: i64, m: i64) -> bool {
        self.form.eval(n, m).rem_euclid(self.modulus()) == 0
    }

    pub fn eval(&self, n: i64, m: i64) -> i64 {
        if self.is_low_confidence(n, m) {
            1
        } else {
            self.p.digit(self.form.eval(n, m))
        }
    }

    /// ν_p of the cell, reported as infinite when it reaches the precision.
    pub fn valuation(&self, n: i64, m: i64) -> Valuation {
        if self.is_low_confidence(n, m) {
            Valuation::Infinity
        } else {
            self.p.nu(self.form.eval(n, m))
        }
    }

    pub fn lazy(&self) -> LazySolution<i64> {
        let s = *self;
        LazySolution::new(self.width, move |n, m| s.eval(n, m))
    }

    pub fn window(&self, m_lo: i64, m_hi: i64) -> SolutionWindow<i64> {
        SolutionWindow::from_fn(self.width, m_lo, m_hi, |n, m| self.eval(n, m))
    }
}

pub fn generate(spec: PAdicSolutionSpec, width: usize) -> Result<LazySolution<i64>, PadicSudokuError> {
    Ok(PAdicSolution::new(spec, width)?.lazy())
}

/// Every column of the window takes at least two values.
pub fn has_nonconstant_columns(w: &SolutionWindow<i64>) -> bool {
    (0..w.width() as i64).all(|n| {
        let first = *w.at(n, w.m_lo());
        (w.m_lo()..=w.m_hi()).any(|m| *w.at(n, m) != first)
    })
}

/// Best one-variable form mod p for a line: most agreements, then least (a, b).
fn fit_line(p: i64, values: &[i64]) -> AffineForm1 {
    let mut best = (0usize, AffineForm1::new(0, 1));
    for a in 0..p {
        for b in 0..p {
            if a == 0 && b == 0 {
                continue;
            }
            let hits = values.iter().enumerate().filter(|(n, &v)| (a * *n as i64 + b).rem_euclid(p) == v).count();
            if hits > best.0 {
                best = (hits, AffineForm1::new(a, b));
            }
        }
    }
    best.1
}

/// A 4x4 square on which F agrees with π_p of an affine form mod p.
///
/// The square is taken in the frame sheared by `shear`: its cells are
/// (n0 + dx, m0 + dy + shear·dx) for 0 ≤ dx, dy ≤ 3, and its rows,
/// diagonals and anti-diagonals are lines of slope shear, shear + 1 and
/// shear − 1. `form` is expressed in the original coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SquareFit {
    pub origin: (i64, i64),
    pub shear: i64,
    pub form: AffineForm2,
}

impl SquareFit {
    pub fn cells(&self) -> Vec<(i64, i64)> {
        let (n0, m0) = self.origin;
        (0..4).flat_map(|dy| (0..4).map(move |dx| (n0 + dx, m0 + dy + self.shear * dx))).collect()
    }
}

struct LineFits<'a> {
    w: &'a SolutionWindow<i64>,
    p: i64,
    fits: HashMap<Line, Option<AffineForm1>>,
}

impl LineFits<'_> {
    /// False when the line leaves the window or the cell lies in its bad set.
    fn cell_ok(&mut self, line: Line, n: i64) -> bool {
        let (w, p) = (self.w, self.p);
        let fit = *self.fits.entry(line).or_insert_with(|| w.line_values(line).map(|g| fit_line(p, &g)));
        match fit {
            None => false,
            Some(f) => f.eval(n).rem_euclid(p) == *w.at(n, line.j * n + line.i),
        }
    }
}

/// Shears tried by the square scan, smallest slopes first.
fn shear_order(p: i64) -> Vec<i64> {
    let mut out = vec![0];
    for k in 1..=p / 2 {
        out.push(k);
        out.push(-k);
    }
    out
}

/// Scans for a good square (one avoiding the bad set of every row, diagonal
/// and anti-diagonal through it) and solves the square from its bottom row
/// and diagonal. Sheared frames are tried when the unsheared one has none.
pub fn recover_square(w: &SolutionWindow<i64>, p: i64) -> Result<SquareFit, PadicSudokuError> {
    let pp = Prime::new(p)?;
    if w.width() < 4 || w.height() < 4 {
        return Err(PadicSudokuError::NoGoodSquare);
    }
    let mut fits = LineFits { w, p, fits: HashMap::new() };
    for s in shear_order(p) {
        let mut good =
            |n: i64, m: i64| [s, s + 1, s - 1].into_iter().all(|j| fits.cell_ok(Line { j, i: m - j * n }, n));
        for m0 in w.m_lo() - 3 * s.abs()..=w.m_hi() {
            for n0 in 0..=w.width() as i64 - 4 {
                let base = m0 + s * n0;
                let is_good = (0..4).all(|dy| (0..4).all(|dx| good(n0 + dx, base + dy + s * dx)));
                if is_good {
                    return fit_square(w, pp, (n0, base), s);
                }
            }
        }
    }
    Err(PadicSudokuError::NoGoodSquare)
}

fn fit_square(
    w: &SolutionWindow<i64>,
    p: Prime,
    origin: (i64, i64),
    shear: i64,
) -> Result<SquareFit, PadicSudokuError> {
    let pv = p.get();
    let (n0, m0) = origin;
    let cell = |dx: i64, dy: i64| (n0 + dx, m0 + dy + shear * dx);
    let f = |dx: i64, dy: i64| {
        let (n, m) = cell(dx, dy);
        *w.at(n, m)
    };
    // solve in the sheared frame (n, m') with m = m' + shear·n
    let a = (f(1, 0) - f(0, 0)).rem_euclid(pv);
    let b = (f(1, 1) - f(0, 0) - a).rem_euclid(pv);
    let c = (f(0, 0) - a * n0 - b * (m0 - shear * n0)).rem_euclid(pv);
    let form = AffineForm2::new(a - shear * b, b, c).reduce(pv);
    let check = |dx: i64, dy: i64| {
        let (n, m) = cell(dx, dy);
        if form.eval(n, m).rem_euclid(pv) == f(dx, dy) {
            Ok(())
        } else {
            Err(PadicSudokuError::InconsistentSquare { origin, cell: (n, m) })
        }
    };
    // bottom row and diagonal, then the four propagation steps
    let order: [(i64, i64); 16] = [
        (0, 0),
        (1, 0),
        (2, 0),
        (3, 0),
        (1, 1),
        (2, 2),
        (3, 3),
        (0, 2),
        (1, 2),
        (3, 2),
        (0, 3),
        (2, 1),
        (0, 1),
        (3, 1),
        (1, 3),
        (2, 3),
    ];
    for (dx, dy) in order {
        check(dx, dy)?;
    }
    Ok(SquareFit { origin, shear, form })
}

/// Cells of the window where F = π_p(A⁰n + B⁰m + C⁰) with ν_p = 0 was
/// established, and the rows the extension reached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coverage {
    /// Range of rows that ended up entirely good.
    pub rows: Option<(i64, i64)>,
    pub certified: BTreeSet<(i64, i64)>,
    pub good: BTreeSet<(i64, i64)>,
}

/// Spreads the square's form over the window using the extension property:
/// a line with four consecutive good cells is good throughout. Lines are
/// swept upward then downward through the window until nothing changes;
/// every cell is checked before it is marked.
pub fn extend_structure(w: &SolutionWindow<i64>, p: i64, seed: &SquareFit) -> Result<Coverage, PadicSudokuError> {
    Prime::new(p)?;
    let width = w.width() as i64;
    let form = seed.form;
    let is_good = |n: i64, m: i64| -> bool {
        let h = form.eval(n, m).rem_euclid(p);
        h == 0 || h == *w.at(n, m)
    };
    let mut good: BTreeSet<(i64, i64)> = BTreeSet::new();
    for (n, m) in seed.cells() {
        if w.contains(n, m) {
            if !is_good(n, m) {
                return Err(PadicSudokuError::ContradictionAt((n, m)));
            }
            good.insert((n, m));
        }
    }
    let reach = 2.max(seed.shear.abs() + 1);
    let slopes: Vec<i64> = std::iter::once(0).chain((1..=reach).flat_map(|k| [k, -k])).collect();
    let intercepts = |j: i64| {
        let (lo, hi) =
            if j >= 0 { (w.m_lo() - j * (width - 1), w.m_hi()) } else { (w.m_lo(), w.m_hi() - j * (width - 1)) };
        lo..=hi
    };
    let mut done: BTreeSet<Line> = BTreeSet::new();
    loop {
        let mut changed = false;
        let up = intercepts_by_sweep(&slopes, &intercepts, false);
        let down = intercepts_by_sweep(&slopes, &intercepts, true);
        for line in up.into_iter().chain(down) {
            if done.contains(&line) {
                continue;
            }
            let cells: Vec<(i64, i64)> =
                (0..width).map(|n| (n, line.j * n + line.i)).filter(|&(n, m)| w.contains(n, m)).collect();
            let triggered = cells.windows(4).any(|q| q[3].0 - q[0].0 == 3 && q.iter().all(|c| good.contains(c)));
            if !triggered {
                continue;
            }
            for &(n, m) in &cells {
                if !is_good(n, m) {
                    return Err(PadicSudokuError::ContradictionAt((n, m)));
                }
                changed |= good.insert((n, m));
            }
            done.insert(line);
        }
        if !changed {
            break;
        }
    }
    let full_rows: Vec<i64> = (w.m_lo()..=w.m_hi()).filter(|&m| (0..width).all(|n| good.contains(&(n, m)))).collect();
    let rows = match (full_rows.first(), full_rows.last()) {
        (Some(&a), Some(&b)) => Some((a, b)),
        _ => None,
    };
    let certified = good.iter().copied().filter(|&(n, m)| form.eval(n, m).rem_euclid(p) != 0).collect();
    Ok(Coverage { rows, certified, good })
}

/// Lines ordered by intercept, upward or downward, each intercept visiting
/// every slope.
fn intercepts_by_sweep(
    slopes: &[i64],
    intercepts: &impl Fn(i64) -> std::ops::RangeInclusive<i64>,
    downward: bool,
) -> Vec<Line> {
    let mut out: Vec<Line> = slopes.iter().flat_map(|&j| intercepts(j).map(move |i| Line { j, i })).collect();
    out.sort_by_key(|l| (if downward { -l.i } else { l.i }, l.j.abs(), l.j));
    out
}

/// A vertically non-degenerate form fitting the window to precision r.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecoveredForm {
    pub level: u32,
    /// Coefficients mod p^{level+1}, with B = c.
    pub form: AffineForm2,
    pub canonical: CanonicalForm,
    pub vertically_nondegenerate: bool,
}

/// Searches every class of forms An + Bm + C mod p^{r+1} with B a unit and
/// keeps those with F(n, m) = f_p(An + Bm + C) at every cell where
/// ν_p(An + Bm + C) ≤ r. Forms sharing (c, D, E) predict identical values, so
/// one representative per class is tried.
pub fn recover_higher(w: &SolutionWindow<i64>, p: i64, r: u32) -> Result<RecoveredForm, PadicSudokuError> {
    let pp = Prime::new(p)?;
    let q = pp.pow(r + 1);
    let table = digit_table(pp, r);
    let mut found = Vec::new();
    for c in 1..p {
        for d in 0..q {
            for e in 0..q {
                let fits = (w.m_lo()..=w.m_hi()).all(|m| {
                    (0..w.width() as i64).all(|n| {
                        let u = (m - d * n - e).rem_euclid(q);
                        table[u as usize].is_none_or(|f| (c * f) % p == *w.at(n, m))
                    })
                });
                if fits {
                    found.push(CanonicalForm { c, d, e });
                }
            }
        }
    }
    match found.len() {
        0 => Err(PadicSudokuError::NoForm(r)),
        1 => {
            let cf = found[0];
            Ok(RecoveredForm {
                level: r,
                form: AffineForm2::new(-cf.d * cf.c, cf.c, -cf.e * cf.c).reduce(q),
                canonical: cf,
                vertically_nondegenerate: true,
            })
        }
        _ => Err(PadicSudokuError::Ambiguous { precision: r, forms: found }),
    }
}
