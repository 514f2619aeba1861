//! Domino sets, Wang tile sets and bounded solvability on rectangles.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::json::{JsonError, Versioned};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DominoError {
    #[error("domino set has no pips")]
    NoPips,
    #[error("relation mentions unknown pip {0:?}")]
    UnknownPip(String),
    #[error("Wang tile set has no tiles")]
    NoTiles,
    #[error("tile uses undeclared color {0:?}")]
    UnknownColor(String),
    #[error("color {0:?} contains the reserved character '|'")]
    ReservedColor(String),
    #[error("rectangle lo {lo:?} is not below hi {hi:?}")]
    BadRect { lo: (i64, i64), hi: (i64, i64) },
    #[error("domino function has no value at {0:?}")]
    Partial((i64, i64)),
    #[error("domino function has a value outside its rectangle at {0:?}")]
    OutsideRect((i64, i64)),
}

pub type Pair = (String, String);

/// Pips together with the horizontal and vertical permitted pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominoSet {
    pips: Vec<String>,
    horiz: BTreeSet<Pair>,
    vert: BTreeSet<Pair>,
}

impl DominoSet {
    pub fn new<I, P>(pips: I, horiz: P, vert: P) -> Result<Self, DominoError>
    where
        I: IntoIterator,
        I::Item: Into<String>,
        P: IntoIterator<Item = Pair>,
    {
        let pips: BTreeSet<String> = pips.into_iter().map(Into::into).collect();
        if pips.is_empty() {
            return Err(DominoError::NoPips);
        }
        let check = |rel: P| -> Result<BTreeSet<Pair>, DominoError> {
            let rel: BTreeSet<Pair> = rel.into_iter().collect();
            for (a, b) in &rel {
                for x in [a, b] {
                    if !pips.contains(x) {
                        return Err(DominoError::UnknownPip(x.clone()));
                    }
                }
            }
            Ok(rel)
        };
        let horiz = check(horiz)?;
        let vert = check(vert)?;
        Ok(DominoSet { pips: pips.into_iter().collect(), horiz, vert })
    }

    /// Pips in sorted order.
    pub fn pips(&self) -> &[String] {
        &self.pips
    }

    pub fn horiz(&self) -> &BTreeSet<Pair> {
        &self.horiz
    }

    pub fn vert(&self) -> &BTreeSet<Pair> {
        &self.vert
    }

    pub fn index_of(&self, pip: &str) -> Option<usize> {
        self.pips.binary_search_by(|p| p.as_str().cmp(pip)).ok()
    }

    pub fn allows_horiz(&self, a: &str, b: &str) -> bool {
        self.horiz.contains(&(a.to_string(), b.to_string()))
    }

    pub fn allows_vert(&self, a: &str, b: &str) -> bool {
        self.vert.contains(&(a.to_string(), b.to_string()))
    }

    pub fn to_json(&self) -> DominoSetDoc {
        DominoSetDoc {
            schema: DominoSetDoc::SCHEMA.to_string(),
            pips: self.pips.clone(),
            horiz: self.horiz.iter().map(|(a, b)| [a.clone(), b.clone()]).collect(),
            vert: self.vert.iter().map(|(a, b)| [a.clone(), b.clone()]).collect(),
        }
    }

    pub fn from_json(doc: DominoSetDoc) -> Result<Self, JsonError> {
        let pairs = |v: Vec<[String; 2]>| -> Vec<Pair> { v.into_iter().map(|[a, b]| (a, b)).collect() };
        DominoSet::new(doc.pips, pairs(doc.horiz), pairs(doc.vert)).map_err(|e| JsonError::Invalid(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DominoSetDoc {
    pub schema: String,
    pub pips: Vec<String>,
    pub horiz: Vec<[String; 2]>,
    pub vert: Vec<[String; 2]>,
}

impl Versioned for DominoSetDoc {
    const SCHEMA: &'static str = "domino-set.v1";
    fn schema(&self) -> &str {
        &self.schema
    }
}

/// Every pair of l-relations (a,b), (a,b'), (a',b) forces (a',b').
pub fn rectangular_closure_check(d: &DominoSet) -> bool {
    [&d.horiz, &d.vert].into_iter().all(|rel| {
        let mut succ: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for (a, b) in rel {
            succ.entry(a).or_default().insert(b);
        }
        // Closure holds iff any two successor sets are equal or disjoint.
        let sets: Vec<&BTreeSet<&str>> = succ.values().collect();
        sets.iter().enumerate().all(|(i, s)| sets[i + 1..].iter().all(|t| s == t || s.is_disjoint(t)))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub lo: (i64, i64),
    pub hi: (i64, i64),
}

impl Rect {
    pub fn new(lo: (i64, i64), hi: (i64, i64)) -> Result<Self, DominoError> {
        if lo.0 > hi.0 || lo.1 > hi.1 {
            return Err(DominoError::BadRect { lo, hi });
        }
        Ok(Rect { lo, hi })
    }

    pub fn width(&self) -> usize {
        (self.hi.0 - self.lo.0 + 1) as usize
    }

    pub fn height(&self) -> usize {
        (self.hi.1 - self.lo.1 + 1) as usize
    }

    pub fn contains(&self, s: (i64, i64)) -> bool {
        self.lo.0 <= s.0 && s.0 <= self.hi.0 && self.lo.1 <= s.1 && s.1 <= self.hi.1
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.contains(other.lo) && self.contains(other.hi)
    }

    /// Cells in row-major order, bottom row first.
    pub fn cells(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        (self.lo.1..=self.hi.1).flat_map(move |y| (self.lo.0..=self.hi.0).map(move |x| (x, y)))
    }

    pub fn shift(&self, d: (i64, i64)) -> Rect {
        Rect { lo: (self.lo.0 + d.0, self.lo.1 + d.1), hi: (self.hi.0 + d.0, self.hi.1 + d.1) }
    }
}

/// A pip assignment on a rectangle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominoFunction {
    pub rect: Rect,
    pub values: BTreeMap<(i64, i64), String>,
}

impl DominoFunction {
    pub fn constant(rect: Rect, pip: &str) -> Self {
        DominoFunction { rect, values: rect.cells().map(|s| (s, pip.to_string())).collect() }
    }

    pub fn get(&self, s: (i64, i64)) -> Option<&str> {
        self.values.get(&s).map(String::as_str)
    }

    /// Rows bottom to top; None where a value is missing.
    pub fn rows(&self) -> Vec<Vec<Option<String>>> {
        (self.rect.lo.1..=self.rect.hi.1)
            .map(|y| (self.rect.lo.0..=self.rect.hi.0).map(|x| self.values.get(&(x, y)).cloned()).collect())
            .collect()
    }

    pub fn from_rows(rect: Rect, rows: Vec<Vec<String>>) -> Result<Self, DominoError> {
        let mut values = BTreeMap::new();
        if rows.len() != rect.height() {
            return Err(DominoError::Partial((rect.lo.0, rect.lo.1 + rows.len() as i64)));
        }
        for (dy, row) in rows.into_iter().enumerate() {
            let y = rect.lo.1 + dy as i64;
            if row.len() != rect.width() {
                return Err(DominoError::Partial((rect.lo.0 + row.len() as i64, y)));
            }
            for (dx, v) in row.into_iter().enumerate() {
                values.insert((rect.lo.0 + dx as i64, y), v);
            }
        }
        Ok(DominoFunction { rect, values })
    }

    fn check_total(&self) -> Result<(), DominoError> {
        for s in self.rect.cells() {
            if !self.values.contains_key(&s) {
                return Err(DominoError::Partial(s));
            }
        }
        if let Some(s) = self.values.keys().find(|s| !self.rect.contains(**s)) {
            return Err(DominoError::OutsideRect(*s));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DominoFunctionDoc {
    pub rect: Rect,
    /// Bottom row first.
    pub rows: Vec<Vec<String>>,
}

impl DominoFunctionDoc {
    pub fn from_fn(t: &DominoFunction) -> Result<Self, DominoError> {
        t.check_total()?;
        let rows = t.rows().into_iter().map(|r| r.into_iter().map(|v| v.unwrap_or_default()).collect()).collect();
        Ok(DominoFunctionDoc { rect: t.rect, rows })
    }

    pub fn into_fn(self) -> Result<DominoFunction, DominoError> {
        let rect = Rect::new(self.rect.lo, self.rect.hi)?;
        DominoFunction::from_rows(rect, self.rows)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Horizontal,
    Vertical,
}

/// A domino tile [s, s + e_i] whose pip pair is not permitted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    pub direction: Direction,
    pub at: (i64, i64),
    pub pair: Pair,
}

pub fn verify_domino_function(d: &DominoSet, t: &DominoFunction) -> Result<Vec<Violation>, DominoError> {
    t.check_total()?;
    for v in t.values.values() {
        if d.index_of(v).is_none() {
            return Err(DominoError::UnknownPip(v.clone()));
        }
    }
    let mut out = Vec::new();
    for s in t.rect.cells() {
        let a = &t.values[&s];
        let right = (s.0 + 1, s.1);
        if let Some(b) = t.values.get(&right) {
            if !d.allows_horiz(a, b) {
                out.push(Violation { direction: Direction::Horizontal, at: s, pair: (a.clone(), b.clone()) });
            }
        }
        let up = (s.0, s.1 + 1);
        if let Some(b) = t.values.get(&up) {
            if !d.allows_vert(a, b) {
                out.push(Violation { direction: Direction::Vertical, at: s, pair: (a.clone(), b.clone()) });
            }
        }
    }
    Ok(out)
}

pub fn translate_domino_function(t: &DominoFunction, shift: (i64, i64)) -> DominoFunction {
    DominoFunction {
        rect: t.rect.shift(shift),
        values: t.values.iter().map(|(s, v)| ((s.0 + shift.0, s.1 + shift.1), v.clone())).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Solution(DominoFunction),
    Unsolvable,
    BudgetExhausted,
}

enum Search {
    Found,
    Dead,
    OutOfBudget,
}

struct RectSolver {
    k: usize,
    w: usize,
    h: usize,
    horiz: Vec<bool>,
    vert: Vec<bool>,
    budget: u64,
    nodes: u64,
    dead: HashSet<(usize, Vec<u16>)>,
    rows: Vec<Vec<u16>>,
}

impl RectSolver {
    fn solve_from(&mut self, r: usize) -> Search {
        if r == self.h {
            return Search::Found;
        }
        let mut row = vec![0u16; self.w];
        self.fill(r, 0, &mut row)
    }

    fn fill(&mut self, r: usize, col: usize, row: &mut Vec<u16>) -> Search {
        if col == self.w {
            let key = (r, row.clone());
            if self.dead.contains(&key) {
                return Search::Dead;
            }
            self.rows.push(row.clone());
            match self.solve_from(r + 1) {
                Search::Found => return Search::Found,
                Search::OutOfBudget => return Search::OutOfBudget,
                Search::Dead => {
                    self.rows.pop();
                    self.dead.insert(key);
                    return Search::Dead;
                }
            }
        }
        for a in 0..self.k {
            if col > 0 && !self.horiz[row[col - 1] as usize * self.k + a] {
                continue;
            }
            if r > 0 && !self.vert[self.rows[r - 1][col] as usize * self.k + a] {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.budget {
                return Search::OutOfBudget;
            }
            row[col] = a as u16;
            match self.fill(r, col + 1, row) {
                Search::Dead => {}
                other => return other,
            }
        }
        Search::Dead
    }
}

/// Row-by-row search for the lexicographically least domino function on `r`
/// (cells ordered bottom row first, left to right; pips in sorted order).
/// `budget` bounds the number of cell assignments tried.
pub fn solve_rectangle(d: &DominoSet, r: Rect, budget: u64) -> SolveOutcome {
    let k = d.pips.len();
    let mut horiz = vec![false; k * k];
    let mut vert = vec![false; k * k];
    for (a, b) in &d.horiz {
        horiz[d.index_of(a).unwrap() * k + d.index_of(b).unwrap()] = true;
    }
    for (a, b) in &d.vert {
        vert[d.index_of(a).unwrap() * k + d.index_of(b).unwrap()] = true;
    }
    let mut s = RectSolver {
        k,
        w: r.width(),
        h: r.height(),
        horiz,
        vert,
        budget,
        nodes: 0,
        dead: HashSet::new(),
        rows: Vec::new(),
    };
    match s.solve_from(0) {
        Search::Found => {
            let rows = s.rows.iter().map(|row| row.iter().map(|&i| d.pips[i as usize].clone()).collect()).collect();
            SolveOutcome::Solution(DominoFunction::from_rows(r, rows).expect("solver fills every cell"))
        }
        Search::Dead => SolveOutcome::Unsolvable,
        Search::OutOfBudget => SolveOutcome::BudgetExhausted,
    }
}

/// A Wang tile (west, east, south, north).
pub type WangTile = [String; 4];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WangTileSet {
    pub h_colors: BTreeSet<String>,
    pub v_colors: BTreeSet<String>,
    pub tiles: BTreeSet<WangTile>,
}

impl WangTileSet {
    pub fn new<C, T>(h_colors: C, v_colors: C, tiles: T) -> Result<Self, DominoError>
    where
        C: IntoIterator,
        C::Item: Into<String>,
        T: IntoIterator<Item = WangTile>,
    {
        let h_colors: BTreeSet<String> = h_colors.into_iter().map(Into::into).collect();
        let v_colors: BTreeSet<String> = v_colors.into_iter().map(Into::into).collect();
        for c in h_colors.iter().chain(&v_colors) {
            if c.contains('|') {
                return Err(DominoError::ReservedColor(c.clone()));
            }
        }
        let tiles: BTreeSet<WangTile> = tiles.into_iter().collect();
        for [w, e, s, n] in &tiles {
            for c in [w, e] {
                if !h_colors.contains(c) {
                    return Err(DominoError::UnknownColor(c.clone()));
                }
            }
            for c in [s, n] {
                if !v_colors.contains(c) {
                    return Err(DominoError::UnknownColor(c.clone()));
                }
            }
        }
        Ok(WangTileSet { h_colors, v_colors, tiles })
    }

    pub fn to_json(&self) -> WangSetDoc {
        WangSetDoc {
            schema: WangSetDoc::SCHEMA.to_string(),
            h_colors: self.h_colors.iter().cloned().collect(),
            v_colors: self.v_colors.iter().cloned().collect(),
            tiles: self.tiles.iter().cloned().collect(),
        }
    }

    pub fn from_json(doc: WangSetDoc) -> Result<Self, JsonError> {
        WangTileSet::new(doc.h_colors, doc.v_colors, doc.tiles).map_err(|e| JsonError::Invalid(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WangSetDoc {
    pub schema: String,
    #[serde(rename = "hColors")]
    pub h_colors: Vec<String>,
    #[serde(rename = "vColors")]
    pub v_colors: Vec<String>,
    pub tiles: Vec<WangTile>,
}

impl Versioned for WangSetDoc {
    const SCHEMA: &'static str = "wang-set.v1";
    fn schema(&self) -> &str {
        &self.schema
    }
}

/// Pip label of a Wang tile: its four colors joined by '|'.
pub fn wang_pip(t: &WangTile) -> String {
    t.join("|")
}

pub fn wang_to_domino(w: &WangTileSet) -> Result<DominoSet, DominoError> {
    if w.tiles.is_empty() {
        return Err(DominoError::NoTiles);
    }
    let mut horiz = Vec::new();
    let mut vert = Vec::new();
    for t in &w.tiles {
        for u in &w.tiles {
            if t[1] == u[0] {
                horiz.push((wang_pip(t), wang_pip(u)));
            }
            if t[3] == u[2] {
                vert.push((wang_pip(t), wang_pip(u)));
            }
        }
    }
    DominoSet::new(w.tiles.iter().map(wang_pip), horiz, vert)
}

/// Young-tableau domino set on pips "1".."k": rows weakly increase,
/// columns strictly increase.
pub fn young_tableau_set(k: usize) -> DominoSet {
    let pips: Vec<String> = (1..=k).map(|i| i.to_string()).collect();
    let mut horiz = Vec::new();
    let mut vert = Vec::new();
    for i in 1..=k {
        for j in 1..=k {
            if i <= j {
                horiz.push((i.to_string(), j.to_string()));
            }
            if i < j {
                vert.push((i.to_string(), j.to_string()));
            }
        }
    }
    DominoSet::new(pips, horiz, vert).expect("k >= 1")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(a: &str, b: &str) -> Pair {
        (a.to_string(), b.to_string())
    }

    fn tile(w: &str, e: &str, s: &str, n: &str) -> WangTile {
        [w.into(), e.into(), s.into(), n.into()]
    }

    #[test]
    fn single_tile_self_compatible() {
        let w = WangTileSet::new(["a"], ["b"], [tile("a", "a", "b", "b")]).unwrap();
        let d = wang_to_domino(&w).unwrap();
        let t = wang_pip(&tile("a", "a", "b", "b"));
        assert_eq!(d.horiz().iter().collect::<Vec<_>>(), vec![&(t.clone(), t.clone())]);
        assert_eq!(d.vert().len(), 1);
    }

    #[test]
    fn directed_horizontal_relation() {
        let t1 = tile("a", "b", "x", "y");
        let t2 = tile("b", "c", "z", "z");
        let w = WangTileSet::new(["a", "b", "c"], ["x", "y", "z"], [t1.clone(), t2.clone()]).unwrap();
        let d = wang_to_domino(&w).unwrap();
        assert!(d.allows_horiz(&wang_pip(&t1), &wang_pip(&t2)));
        assert!(!d.allows_horiz(&wang_pip(&t2), &wang_pip(&t1)));
        assert!(rectangular_closure_check(&d));
    }

    #[test]
    fn empty_tiles_rejected() {
        let w = WangTileSet::new(["a"], ["b"], []).unwrap();
        assert_eq!(wang_to_domino(&w), Err(DominoError::NoTiles));
        assert!(DominoSet::new(Vec::<String>::new(), vec![], vec![]).is_err());
    }

    #[test]
    fn closure_examples() {
        let d = DominoSet::new(["x", "y"], vec![pair("x", "x"), pair("x", "y"), pair("y", "x")], vec![]).unwrap();
        assert!(!rectangular_closure_check(&d));
        let d = DominoSet::new(["x", "y"], vec![], vec![]).unwrap();
        assert!(rectangular_closure_check(&d));
    }

    #[test]
    fn verify_examples() {
        let d = young_tableau_set(3);
        let r = Rect::new((0, 0), (1, 1)).unwrap();
        let t = DominoFunction::from_rows(r, vec![vec!["1".into(), "1".into()], vec!["2".into(), "3".into()]]).unwrap();
        assert_eq!(verify_domino_function(&d, &t).unwrap(), vec![]);

        let r = Rect::new((0, 0), (0, 1)).unwrap();
        let t = DominoFunction::constant(r, "2");
        let v = verify_domino_function(&d, &t).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].direction, Direction::Vertical);
        assert_eq!(v[0].at, (0, 0));

        let r = Rect::new((5, 5), (5, 5)).unwrap();
        let t = DominoFunction::constant(r, "3");
        assert!(verify_domino_function(&d, &t).unwrap().is_empty());

        let mut partial = DominoFunction::constant(Rect::new((0, 0), (1, 0)).unwrap(), "1");
        partial.values.remove(&(1, 0));
        assert_eq!(verify_domino_function(&d, &partial), Err(DominoError::Partial((1, 0))));
    }

    #[test]
    fn young_tableau_height() {
        let d = young_tableau_set(3);
        let r3 = Rect::new((0, 0), (3, 2)).unwrap();
        let r4 = Rect::new((0, 0), (3, 3)).unwrap();
        match solve_rectangle(&d, r3, 1_000_000) {
            SolveOutcome::Solution(t) => {
                assert!(verify_domino_function(&d, &t).unwrap().is_empty());
                assert_eq!(t.get((0, 0)), Some("1"));
                assert_eq!(t.get((3, 2)), Some("3"));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(solve_rectangle(&d, r4, 1_000_000), SolveOutcome::Unsolvable);
    }

    #[test]
    fn constant_set_solves() {
        let d = DominoSet::new(["x"], vec![pair("x", "x")], vec![pair("x", "x")]).unwrap();
        let r = Rect::new((-2, 3), (4, 7)).unwrap();
        assert_eq!(solve_rectangle(&d, r, 1000), SolveOutcome::Solution(DominoFunction::constant(r, "x")));
    }

    #[test]
    fn budget_is_reported() {
        let d = young_tableau_set(4);
        let r = Rect::new((0, 0), (5, 4)).unwrap();
        assert_eq!(solve_rectangle(&d, r, 3), SolveOutcome::BudgetExhausted);
    }

    #[test]
    fn translation() {
        let d = young_tableau_set(2);
        let r = Rect::new((0, 0), (1, 1)).unwrap();
        let t = DominoFunction::constant(r, "1");
        assert_eq!(translate_domino_function(&t, (0, 0)), t);
        let moved = translate_domino_function(&t, (3, -2));
        assert_eq!(moved, DominoFunction::constant(r.shift((3, -2)), "1"));
        assert_eq!(verify_domino_function(&d, &t).unwrap().len(), verify_domino_function(&d, &moved).unwrap().len());
    }

    #[test]
    fn json_roundtrip() {
        let d = young_tableau_set(2);
        let text = crate::json::render(&d.to_json());
        let back = DominoSet::from_json(crate::json::parse(&text).unwrap()).unwrap();
        assert_eq!(back, d);
        let bad = text.replace("\"pips\"", "\"extra\": 1, \"pips\"");
        assert!(crate::json::parse::<DominoSetDoc>(&bad).is_err());
        let wrong = text.replace("domino-set.v1", "domino-set.v2");
        assert!(crate::json::parse::<DominoSetDoc>(&wrong).is_err());
    }
}
