//! Colored grids of solution windows as SVG or binary PPM.
//!
//! The cell fill encodes valuation tiers: gray for ν = ∞, white for ν = 0,
//! then a per-prime ramp clamped at its last color: pink and red for the
//! warm ramp, cyan for the cool one. Decorated cells superpose the two
//! ramps multiplicatively, so (1, 1) comes out light purple. Digits are
//! drawn with a hue that depends on their residue.

use std::fmt::Write as _;

use crate::decorated::{DecoratedError, DecoratedRule, DecoratedSolution};
use crate::padic::Valuation;
use crate::padic_sudoku::PAdicSolution;

pub type Rgb = (u8, u8, u8);

pub const GRAY: Rgb = (160, 160, 160);
pub const WHITE: Rgb = (255, 255, 255);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ramp {
    Warm,
    Cool,
}

impl Ramp {
    fn colors(self) -> &'static [Rgb] {
        match self {
            Ramp::Warm => &[WHITE, (255, 150, 220), (220, 40, 60)],
            Ramp::Cool => &[WHITE, (150, 235, 255)],
        }
    }

    pub fn color(self, v: Valuation) -> Rgb {
        let c = self.colors();
        match v {
            Valuation::Infinity => GRAY,
            Valuation::Finite(k) => c[(k as usize).min(c.len() - 1)],
        }
    }

    /// Distinguishable tier of a valuation: ∞ is -1, finite values clamp.
    pub fn tier(self, v: Valuation) -> i32 {
        match v {
            Valuation::Infinity => -1,
            Valuation::Finite(k) => (k as usize).min(self.colors().len() - 1) as i32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridCell {
    pub n: i64,
    pub m: i64,
    /// One unit digit per prime.
    pub digits: Vec<i64>,
    pub valuations: Vec<Valuation>,
    pub pip: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    pub width: usize,
    pub m_lo: i64,
    pub m_hi: i64,
    pub primes: Vec<i64>,
    pub ramps: Vec<Ramp>,
    /// Row-major: m ascending, then n.
    pub cells: Vec<GridCell>,
}

impl Grid {
    pub fn height(&self) -> usize {
        (self.m_hi - self.m_lo + 1) as usize
    }

    pub fn cell(&self, n: usize, m: i64) -> &GridCell {
        &self.cells[(m - self.m_lo) as usize * self.width + n]
    }

    pub fn fill(&self, c: &GridCell) -> Rgb {
        if c.valuations.iter().any(|v| !v.is_finite()) {
            return GRAY;
        }
        c.valuations.iter().zip(&self.ramps).fold(WHITE, |acc, (&v, r)| {
            let x = r.color(v);
            let mix = |a: u8, b: u8| ((a as u16 * b as u16) / 255) as u8;
            (mix(acc.0, x.0), mix(acc.1, x.1), mix(acc.2, x.2))
        })
    }

    /// Distinct tier tuples present in the grid.
    pub fn tier_count(&self) -> usize {
        let mut seen: Vec<Vec<i32>> = self
            .cells
            .iter()
            .map(|c| c.valuations.iter().zip(&self.ramps).map(|(&v, r)| r.tier(v)).collect())
            .collect();
        seen.sort();
        seen.dedup();
        seen.len()
    }
}

/// F(n, m) = f_p(An + Bm + C) over rows m_lo..=m_hi.
pub fn padic_grid(sol: &PAdicSolution, ramp: Ramp, m_lo: i64, m_hi: i64) -> Grid {
    let mut cells = Vec::new();
    for m in m_lo..=m_hi {
        for n in 0..sol.width as i64 {
            cells.push(GridCell {
                n,
                m,
                digits: vec![sol.eval(n, m)],
                valuations: vec![sol.valuation(n, m)],
                pip: None,
            });
        }
    }
    Grid { width: sol.width, m_lo, m_hi, primes: vec![sol.p.get()], ramps: vec![ramp], cells }
}

/// Superposed tiers of both primes plus the pip of each cell.
pub fn decorated_grid(
    sol: &DecoratedSolution,
    rule: &DecoratedRule,
    m_lo: i64,
    m_hi: i64,
) -> Result<Grid, DecoratedError> {
    let w = sol.window(m_lo, m_hi)?;
    let width = w.width();
    let mut cells = Vec::new();
    for m in m_lo..=m_hi {
        for n in 0..width as i64 {
            let d = w.get(n, m).expect("inside the window");
            let (v1, v2) = sol.valuations(n, m);
            cells.push(GridCell {
                n,
                m,
                digits: vec![d.u1, d.u2],
                valuations: vec![v1, v2],
                pip: Some(rule.pip_label(d.pip).to_string()),
            });
        }
    }
    Ok(Grid {
        width,
        m_lo,
        m_hi,
        primes: vec![rule.p1().get(), rule.p2().get()],
        ramps: vec![Ramp::Warm, Ramp::Cool],
        cells,
    })
}

fn hex(c: Rgb) -> String {
    format!("#{:02x}{:02x}{:02x}", c.0, c.1, c.2)
}

fn digit_hue(d: i64, p: i64) -> i64 {
    360 * d.rem_euclid(p) / p
}

const CELL: usize = 24;

/// SVG with one square per cell, m increasing downward.
pub fn to_svg(g: &Grid) -> String {
    let (w, h) = (g.width * CELL, g.height() * CELL);
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#).unwrap();
    writeln!(s, r#"<g font-family="monospace" text-anchor="middle" dominant-baseline="central">"#).unwrap();
    for c in &g.cells {
        let x = c.n as usize * CELL;
        let y = (c.m - g.m_lo) as usize * CELL;
        writeln!(
            s,
            r##"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{}" stroke="#606060" stroke-width="0.5"/>"##,
            hex(g.fill(c))
        )
        .unwrap();
        let (cx, cy) = (x + CELL / 2, y + CELL / 2);
        match &c.pip {
            Some(pip) => {
                writeln!(s, r#"<text x="{cx}" y="{cy}" font-size="12" fill="black">{}</text>"#, escape(pip)).unwrap();
            }
            None => {
                let d = c.digits[0];
                writeln!(
                    s,
                    r#"<text x="{cx}" y="{cy}" font-size="12" fill="hsl({},70%,35%)">{d}</text>"#,
                    digit_hue(d, g.primes[0])
                )
                .unwrap();
            }
        }
    }
    s.push_str("</g>\n</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Binary PPM with `scale` × `scale` pixels per cell; fills only.
pub fn to_ppm(g: &Grid, scale: usize) -> Vec<u8> {
    let scale = scale.max(1);
    let (w, h) = (g.width * scale, g.height() * scale);
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    for row in 0..h {
        let m = g.m_lo + (row / scale) as i64;
        for col in 0..w {
            let c = g.fill(g.cell(col / scale, m));
            out.extend([c.0, c.1, c.2]);
        }
    }
    out
}
