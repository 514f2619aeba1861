use rand::Rng;
use tileforge::domino::{DominoSet, Pair};
use tileforge::feq::program::*;
use tileforge::feq::{FeqError, FeqSystemDoc, Property, Quotient, SetExpr};
use tileforge::json::{parse, render};
use tileforge::sudoku::Verdict;
use tileforge::tiling::*;

use super::padic::{naive_fp, naive_nu};

/// Pips {a, b}; vertical relation reflexive, horizontal reflexive or empty.
pub fn two_pip(horizontal: bool) -> DominoSet {
    let refl = |on: bool| -> Vec<Pair> {
        if on {
            vec![("a".into(), "a".into()), ("b".into(), "b".into())]
        } else {
            vec![]
        }
    };
    DominoSet::new(["a", "b"], refl(horizontal), refl(true)).unwrap()
}

/// domino2sudoku (chain puzzle of width 2), sudoku2feq at minimal
/// parameters and feq2tiling, each stage passed through its JSON document.
pub fn compile_toy(set: &DominoSet) -> TilingSystem {
    let doc: SudokuRuleDoc = parse(&render(&chain_puzzle(set, 2).unwrap())).unwrap();
    let built = build_puzzle(&doc.rule, &doc.ic).unwrap();
    let (s0, l) = minimal_parameters(&built);
    assert_eq!((s0, l), (2, 21));
    let p = program_sudoku(&SudokuProgramSpec { rule: doc.rule, ic: doc.ic, s0, l }).unwrap();
    let p = Property::from_doc(parse::<FeqSystemDoc>(&render(&p.to_doc())).unwrap()).unwrap();
    let sys = feq_to_tiling(&p).unwrap();
    TilingSystem::from_doc(parse(&render(&sys.to_doc())).unwrap()).unwrap()
}

/// Reflexive two-pip set: a witness on the 1×1 quotient whose decoded
/// lines are all members, each also checked against the horizontal
/// relation directly. Returns the number of decoded lines.
pub fn toy_witness() -> usize {
    let set = two_pip(true);
    let sys = compile_toy(&set);
    let TilingOutcome::Witness(a) = solve_tiling_periodic(&sys, &[1, 1], 10_000_000).unwrap() else {
        panic!("no witness");
    };
    assert!(verify_tiling(&a, &sys).unwrap().passed());
    let alpha = extract_function(&a, &sys.base, &sys.fiber).unwrap();
    let q = Quotient::new(&sys.base, &[1, 1]).unwrap();
    let lines = decode_lines(sys.program.as_ref().unwrap(), &q, &alpha).unwrap();
    assert!(!lines.is_empty());
    for l in &lines {
        assert_eq!(l.verdict, Verdict::Member, "{l:?}");
        assert!(l.digits.windows(2).all(|w| set.allows_horiz(&w[0], &w[1])), "{l:?}");
    }
    lines.len()
}

/// Empty horizontal relation: NoPeriodicWitness on every quotient
/// a×b with 1 ≤ a, b ≤ side. Returns the number of quotients.
pub fn never_rule(side: i64) -> usize {
    let sys = compile_toy(&two_pip(false));
    let mut n = 0;
    for a in 1..=side {
        for b in 1..=side {
            let out = solve_tiling_periodic(&sys, &[a, b], u64::MAX).unwrap();
            assert_eq!(out, TilingOutcome::NoPeriodicWitness, "{a}x{b}");
            n += 1;
        }
    }
    n
}

/// The decorated puzzle at (p1, p2) = (2, 3): compiles to an FEQ system in
/// compact form, then feq2tiling stops because the boolean constraint over
/// all 2·s0·N coordinates cannot be expanded. Returns the error text.
pub fn decorated_route() -> String {
    let doc = decorated_puzzle(&two_pip(true), 2, 3);
    let built = build_puzzle(&doc.rule, &doc.ic).unwrap();
    assert_eq!((built.width, built.labels.len(), built.q), (36, 4, 6));
    let (s0, l) = minimal_parameters(&built);
    assert_eq!((s0, l), (4, 4 * 4 * 36 + 5));
    let p = program_sudoku(&SudokuProgramSpec { rule: doc.rule, ic: doc.ic, s0, l }).unwrap();
    assert_eq!(p.components.len(), 2 * s0 * 36);
    match feq_to_tiling(&p) {
        Err(TilingError::Feq(FeqError::TooLarge(msg))) => msg,
        other => panic!("expected TooLarge, got {:?}", other.map(|s| s.equations.len())),
    }
}

pub struct FullScale {
    pub components: usize,
    pub equations: usize,
    pub members: usize,
    pub non_members: usize,
}

fn encode_block(h: &mut [i64], at: usize, k: usize, s0: usize, l: i64) {
    h[at] = 1;
    for b in 1..s0 {
        let bit = k >> (s0 - 1 - b) & 1;
        h[at + b] = if bit == 0 { 1 } else { l - 1 };
    }
}

/// Brute-force S_{p,N} membership from the definition.
fn padic_member(p: i64, g: &[i64]) -> bool {
    let q = p * p;
    (0..q).any(|a| {
        (0..q).any(|b| {
            (a % p != 0 || b % p != 0)
                && g.iter().enumerate().all(|(n, &d)| {
                    let u = (a * n as i64 + b) % q;
                    u == 0 || naive_nu(p, u).unwrap() > 1 || naive_fp(p, u) == d
                })
        })
    })
}

/// The program for S_{53, 53²} with the trivial initial condition, built in
/// full: component and equation counts, equation arities, and membership
/// of Ω at `points` seeded points against construction or brute force.
pub fn full_scale_padic(points: usize, seed: u64) -> FullScale {
    let (p, width) = (53i64, 53 * 53usize);
    let rule = RuleSpec::PAdic { p, width };
    let ic = IcSpec::Trivial { q: 1 };
    let built = build_puzzle(&rule, &ic).unwrap();
    let (s0, l) = minimal_parameters(&built);
    assert_eq!((s0, l), (7, 4 * 7 * width as i64 + 5));
    let prog = program_sudoku(&SudokuProgramSpec { rule, ic, s0, l }).unwrap();
    let dim = 2 * s0 * width;
    assert_eq!(prog.components.len(), dim);
    assert!(prog.components.iter().all(|c| c.torsion == vec![l]));
    assert!(prog.existential.is_empty());

    let (mut boolean, mut period, mut perm) = (0, 0, 0);
    for eq in &prog.equations {
        match (&eq.target, eq.scope.len(), eq.terms.len()) {
            (SetExpr::Explicit { elements, .. }, 1, 2) if elements.len() == 2 => boolean += 1,
            (SetExpr::Full { .. }, 1, 2) => {
                let n = eq.scope[0] % (s0 * width) / s0;
                assert_eq!(eq.terms[0].shift, vec![-(n as i64), 1, 0]);
                assert!(matches!(eq.terms[1].set, SetExpr::Nonzero { .. }));
                period += 1;
            }
            (SetExpr::Image { signed: true, table, .. }, k, 2) if k == s0 && table.len() == 1 => perm += 1,
            other => panic!("unexpected equation shape {:?}", (other.1, other.2)),
        }
    }
    assert_eq!((boolean, period, perm), (dim, dim, width));
    assert_eq!(prog.constraints.len(), 1);
    let omega = &prog.constraints[0].omega;
    assert_eq!(prog.constraints[0].scope.len(), dim);
    assert_eq!(omega.dim(), dim);

    let mut rng = super::rng(seed);
    let mut line = || -> Vec<i64> {
        let (a, b, c) = (rng.gen_range(0..53 * 53), rng.gen_range(1..53 * 53), rng.gen_range(0..53 * 53));
        let (j, i) = (rng.gen_range(-3i64..=3), rng.gen_range(-10_000i64..10_000));
        let (x, y) = (a + b * j, b * i + c);
        (0..width as i64).map(|n| naive_fp(p, x * n + y)).collect()
    };
    let encode = |g: &[i64], sign: bool| -> Vec<i64> {
        let mut h = vec![0i64; dim];
        for (n, &d) in g.iter().enumerate() {
            encode_block(&mut h, n * s0, 0, s0, l);
            encode_block(&mut h, s0 * width + n * s0, (d - 1) as usize, s0, l);
        }
        if sign {
            h.iter_mut().for_each(|x| *x = (l - *x) % l);
        }
        h
    };
    let mut rng = super::rng(seed + 1);
    let mut counts = FullScale { components: dim, equations: prog.equations.len(), members: 0, non_members: 0 };
    for k in 0..points {
        let g = line();
        let sign = rng.gen_bool(0.5);
        let (h, want) = match k % 10 {
            0..=3 => (encode(&g, sign), true),
            4 => {
                let mut g2 = g.clone();
                let n = rng.gen_range(0..width);
                g2[n] = g2[n] % (p - 1) + 1;
                let want = padic_member(p, &g2);
                (encode(&g2, sign), want)
            }
            5 => {
                let mut h = encode(&g, sign);
                let n = rng.gen_range(0..width);
                encode_block(&mut h, s0 * width + n * s0, rng.gen_range(52..64), s0, l);
                (h, false)
            }
            6 | 7 => {
                let mut h = encode(&g, sign);
                let at = rng.gen_range(0..dim);
                h[at] = rng.gen_range(2..l - 1);
                (h, false)
            }
            _ => ((0..dim).map(|_| rng.gen_range(0..l)).collect(), false),
        };
        assert_eq!(omega.contains(&h), want, "point {k}");
        if want {
            counts.members += 1;
        } else {
            counts.non_members += 1;
        }
    }
    counts
}

/// The decorated rule at (53, 59): width (53·59)², digits 52·58·|W|,
/// q = 53·59, minimal s0 and L, and the refusal to build 2·s0·N
/// components in memory.
pub fn full_scale_decorated() -> (usize, usize, usize, usize, i64) {
    let doc = decorated_puzzle(&two_pip(true), 53, 59);
    let built = build_puzzle(&doc.rule, &doc.ic).unwrap();
    let width = 53usize * 53 * 59 * 59;
    assert_eq!((built.width, built.labels.len(), built.q), (width, 52 * 58 * 2, 53 * 59));
    let (s0, l) = minimal_parameters(&built);
    assert_eq!(s0, 14);
    assert_eq!(l, 4 * 14 * width as i64 + 5);
    let count = 2 * s0 * width;
    match program_sudoku(&SudokuProgramSpec { rule: doc.rule, ic: doc.ic, s0, l }) {
        Err(FeqError::TooLarge(msg)) => assert_eq!(msg, format!("{count} components")),
        other => panic!("expected TooLarge, got {:?}", other.map(|p| p.components.len())),
    }
    (built.width, built.labels.len(), built.q, count, l)
}
