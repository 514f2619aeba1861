use rand::Rng;
use tileforge::decorated::*;
use tileforge::domino::*;
use tileforge::padic_sudoku::{PAdicSolution, PAdicSolutionSpec};
use tileforge::render::{decorated_grid, padic_grid, Ramp, Rgb};

use super::padic::{naive_fp, naive_nu};

/// Every domino set on pips {a} or {a, b}.
pub fn small_domino_sets() -> Vec<DominoSet> {
    let mut out = Vec::new();
    for pips in [vec!["a"], vec!["a", "b"]] {
        let pairs: Vec<Pair> =
            pips.iter().flat_map(|x| pips.iter().map(move |y| (x.to_string(), y.to_string()))).collect();
        let subsets = 1u32 << pairs.len();
        let pick = |mask: u32| -> Vec<Pair> {
            pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, p)| p.clone()).collect()
        };
        for h in 0..subsets {
            for v in 0..subsets {
                out.push(DominoSet::new(pips.clone(), pick(h), pick(v)).unwrap());
            }
        }
    }
    out
}

fn restrict(t: &DominoFunction, rect: Rect) -> DominoFunction {
    DominoFunction { rect, values: rect.cells().map(|s| (s, t.get(s).unwrap().to_string())).collect() }
}

pub struct RoundtripCounts {
    pub sets: usize,
    pub solvable: usize,
    pub roundtrips: usize,
}

/// For (p1, p2) = (3, 5) and every set in `sets` solvable on [(0,0),(2,2)]:
/// extract(encode(T)) = T on [(0,0),(2,2)] at (c, D, E) = (1, 0, 0) and at
/// `normalizations` seeded random (c, D, E). T is the lex-least solution on
/// the smallest rectangle all windows need.
pub fn roundtrips(sets: &[DominoSet], normalizations: usize, seed: u64) -> RoundtripCounts {
    let (p1, p2) = (3, 5);
    let r = (2u32, 2u32);
    let height = default_extract_height(p1, p2, r);
    let width = (p1 * p1 * p2 * p2) as usize;
    let modulus = 27 * 125;
    let mut rng = super::rng(seed);
    let mut norms = vec![(1, 0, 0)];
    while norms.len() < normalizations + 1 {
        let c = rng.gen_range(1..15);
        if c % 3 != 0 && c % 5 != 0 {
            norms.push((c, rng.gen_range(0..modulus), rng.gen_range(0..modulus)));
        }
    }
    let target = Rect::new((0, 0), (r.0 as i64, r.1 as i64)).unwrap();
    let mut hi = (r.0 as i64, r.1 as i64);
    for &(c, d, e) in &norms {
        let need = required_rect(p1, p2, width, c, d, e, 0, height - 1).unwrap();
        hi = (hi.0.max(need.hi.0), hi.1.max(need.hi.1));
    }
    let big = Rect::new((0, 0), hi).unwrap();
    let mut counts = RoundtripCounts { sets: sets.len(), solvable: 0, roundtrips: 0 };
    for set in sets {
        if !matches!(solve_rectangle(set, target, 10_000_000), SolveOutcome::Solution(_)) {
            continue;
        }
        counts.solvable += 1;
        let SolveOutcome::Solution(t) = solve_rectangle(set, big, 10_000_000) else {
            panic!("{set:?} solvable on {target:?} but not on {big:?}");
        };
        let expected = restrict(&t, target);
        let rule = DecoratedRule::new(p1, p2, set.clone()).unwrap();
        for &(c, d, e) in &norms {
            let spec = DecoratedSolutionSpec { domino_fn: t.clone(), infinity_pip: set.pips()[0].clone(), c, d, e };
            let w = encode(&spec, &rule).unwrap().window(0, height - 1).unwrap();
            let got = extract(&w, &rule, r).unwrap_or_else(|err| panic!("{set:?} at {:?}: {err}", (c, d, e)));
            assert_eq!(got.tiling, expected, "{set:?} at {:?}", (c, d, e));
            assert_eq!((got.c, got.d, got.e), (c, d, e), "{set:?}");
            counts.roundtrips += 1;
        }
    }
    counts
}

pub const GRAY: Rgb = (160, 160, 160);
pub const WHITE: Rgb = (255, 255, 255);
pub const PINK: Rgb = (255, 150, 220);
pub const RED: Rgb = (220, 40, 60);
pub const CYAN: Rgb = (150, 235, 255);

fn tier_color(p: i64, nu: Option<u32>) -> Rgb {
    match (p, nu) {
        (_, None) => GRAY,
        (_, Some(0)) => WHITE,
        (3, Some(1)) => PINK,
        (3, Some(_)) => RED,
        (_, Some(_)) => CYAN,
    }
}

fn blend(a: Rgb, b: Rgb) -> Rgb {
    let m = |x: u8, y: u8| ((x as u16 * y as u16) / 255) as u8;
    (m(a.0, b.0), m(a.1, b.1), m(a.2, b.2))
}

/// F(n, m) = f_p(m) on width p², rows 0..=m_hi, cell for cell against the
/// closed form. Returns the number of distinct colors.
pub fn padic_figure(p: i64, m_hi: i64) -> usize {
    let spec = PAdicSolutionSpec { p, precision: 8, a: 0, b: 1, c: 0 };
    let sol = PAdicSolution::new(spec, (p * p) as usize).unwrap();
    let ramp = if p == 3 { Ramp::Warm } else { Ramp::Cool };
    let g = padic_grid(&sol, ramp, 0, m_hi);
    assert_eq!((g.width, g.height()), ((p * p) as usize, m_hi as usize + 1));
    let mut colors = std::collections::BTreeSet::new();
    for m in 0..=m_hi {
        for n in 0..(p * p) as usize {
            let cell = g.cell(n, m);
            assert_eq!(cell.digits, vec![naive_fp(p, m)], "({n},{m})");
            let want = tier_color(p, naive_nu(p, m));
            assert_eq!(g.fill(cell), want, "({n},{m})");
            colors.insert(want);
        }
    }
    assert_eq!(g.tier_count(), colors.len());
    colors.len()
}

/// The decorated window w(n, m) = T(ν_{3,5}(m)) with T(s1, s2) =
/// 1 + (s1 + 2·s2 mod 5) and pip 6 at (∞, ∞), over rows 1..=25.
pub fn decorated_figure() -> usize {
    let rule = DecoratedRule::new(3, 5, six_pip_set()).unwrap();
    let spec = DecoratedSolutionSpec {
        domino_fn: six_pip_function(Rect::new((0, 0), (4, 4)).unwrap()),
        infinity_pip: "6".into(),
        c: 1,
        d: 0,
        e: 0,
    };
    let sol = encode(&spec, &rule).unwrap();
    let g = decorated_grid(&sol, &rule, 1, 25).unwrap();
    assert_eq!(g.width, 225);
    let mut purple = 0;
    for m in 1..=25 {
        let (v1, v2) = (naive_nu(3, m).unwrap(), naive_nu(5, m).unwrap());
        let pip = ((v1 + 2 * v2) % 5 + 1).to_string();
        let want = blend(tier_color(3, Some(v1)), tier_color(5, Some(v2)));
        for n in 0..225 {
            let cell = g.cell(n, m);
            assert_eq!(cell.digits, vec![naive_fp(3, m), naive_fp(5, m)], "({n},{m})");
            assert_eq!(cell.pip.as_deref(), Some(pip.as_str()), "({n},{m})");
            assert_eq!(g.fill(cell), want, "({n},{m})");
        }
        purple += usize::from((v1, v2) == (1, 1));
    }
    assert_eq!(purple, 1);
    let pale = blend(PINK, CYAN);
    assert!(pale.2 > pale.0 && pale.0 > pale.1);
    g.tier_count()
}
