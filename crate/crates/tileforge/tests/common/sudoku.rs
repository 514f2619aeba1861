use rand::Rng;
use tileforge::padic::{AffineForm2, Prime};
use tileforge::padic_sudoku::*;
use tileforge::sudoku::verify_window;

/// Smallest precision with p^precision above every |An + Bm + C| on the
/// window, so that only exact zeros take the f_p(0) = 1 convention.
pub fn exact_precision(p: i64, bound: i64) -> u32 {
    let mut k = 1;
    while p.pow(k) <= bound {
        k += 1;
    }
    k
}

/// Every (A, B, C) in (Z/p²)³ with B a unit (or a seeded sample of
/// `sample` of them): the generated solution passes verify_window on a
/// height-3p² window. Returns (triples, lines checked).
pub fn generation_sweep(p: i64, sample: Option<(usize, u64)>) -> (usize, usize) {
    let q = p * p;
    let width = q as usize;
    let height = 3 * q;
    let mut triples = Vec::new();
    for a in 0..q {
        for b in (0..q).filter(|b| b % p != 0) {
            for c in 0..q {
                triples.push((a, b, c));
            }
        }
    }
    if let Some((k, seed)) = sample {
        let mut rng = super::rng(seed);
        let mut picked = Vec::with_capacity(k);
        for _ in 0..k {
            picked.push(triples.swap_remove(rng.gen_range(0..triples.len())));
        }
        triples = picked;
    }
    let precision = exact_precision(p, (q - 1) * (width as i64 + height + 1));
    let rule = PAdicRule::new(p, width).unwrap();
    let mut lines = 0;
    for &(a, b, c) in &triples {
        let sol = PAdicSolution::new(PAdicSolutionSpec { p, precision, a, b, c }, width).unwrap();
        let report = verify_window(&rule, &sol.window(0, height - 1)).unwrap();
        assert!(report.passed(), "({a},{b},{c}): {:?}", report.failures);
        lines += report.checked_lines;
    }
    (triples.len(), lines)
}

/// Seeded instances at p = 5 with random (A, B, C) mod 125, B a unit, and
/// r alternating 0, 1: constructive recovery and the brute-force oracle
/// agree with each other and with the generating form.
pub fn recovery_agreement(count: usize, seed: u64) -> usize {
    let p = 5;
    let pp = Prime::new(p).unwrap();
    let (width, height) = (25usize, 100i64);
    let mut rng = super::rng(seed);
    let precision = exact_precision(p, 124 * (width as i64 + height + 1));
    for k in 0..count {
        let r = (k % 2) as u32;
        let a = rng.gen_range(0..125);
        let b = loop {
            let b = rng.gen_range(1..125);
            if b % p != 0 {
                break b;
            }
        };
        let c = rng.gen_range(0..125);
        let truth = AffineForm2::new(a, b, c);
        let w = PAdicSolution::new(PAdicSolutionSpec { p, precision, a, b, c }, width).unwrap().window(0, height - 1);

        let fit = recover_square(&w, p).unwrap_or_else(|e| panic!("{truth:?}: {e}"));
        let cov = extend_structure(&w, p, &fit).unwrap();
        assert_eq!(cov.rows, Some((0, height - 1)), "{truth:?}");
        assert_eq!(cov.good.len(), width * height as usize);
        let constructive = fit.form.canonical(pp, 1).unwrap();

        let oracle = recover_higher(&w, p, r).unwrap_or_else(|e| panic!("{truth:?} r={r}: {e}"));
        assert!(oracle.vertically_nondegenerate);
        assert_eq!(oracle.canonical, truth.canonical(pp, r + 1).unwrap(), "{truth:?} r={r}");
        let reduced = (oracle.canonical.c, oracle.canonical.d % p, oracle.canonical.e % p);
        assert_eq!(reduced, (constructive.c, constructive.d, constructive.e), "{truth:?} r={r}");
    }
    count
}
