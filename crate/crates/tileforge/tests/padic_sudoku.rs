mod common;

use common::sudoku::{generation_sweep, recovery_agreement};

#[test]
fn full_sweep_p3() {
    let (triples, lines) = generation_sweep(3, None);
    assert_eq!(triples, 9 * 6 * 9);
    assert!(lines > 0);
}

#[test]
fn sampled_sweep_p5() {
    assert_eq!(generation_sweep(5, Some((20, 11))).0, 20);
}

#[test]
fn recovery_agrees() {
    assert_eq!(recovery_agreement(6, 99), 6);
}
