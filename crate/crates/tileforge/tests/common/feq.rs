use std::collections::BTreeSet;

use tileforge::feq::library::*;
use tileforge::feq::solve::all_solutions;
use tileforge::feq::{check_assignment, conjoin, Assignment, GroupSpec, Property, Quotient, SetExpr};

use super::odometer;

fn main_values(a: &Assignment, keep: usize) -> Vec<i64> {
    a.restrict(&(0..keep).collect::<Vec<_>>()).values
}

/// Checks every map of `values` against `oracle` and the solver's
/// solution count against the oracle count. Returns the number of maps.
fn sweep(p: &Property, periods: &[i64], base: i64, oracle: impl Fn(&[i64]) -> bool) -> usize {
    let q = Quotient::new(&p.group, periods).unwrap();
    let h = p.h_moduli();
    let mut total = 0;
    let mut count = 0;
    for vals in odometer(q.size() * h.len(), base) {
        let want = oracle(&vals);
        count += want as usize;
        total += 1;
        let a = Assignment::new(&q, h.clone(), vals.clone());
        assert_eq!(check_assignment(p, &q, &a).passed(), want, "{vals:?}");
    }
    assert_eq!(all_solutions(p, periods, 1 << 20).unwrap().len(), count);
    total
}

/// Periodicity: period 2 on Z/4 over Z/2 values, and Z²-periodicity
/// (constancy) on the 2×2 quotient.
pub fn periodicity() -> usize {
    let z = GroupSpec::new(1, vec![]).unwrap();
    let p = express_period(&z, &[2], &[vec![2]]).unwrap();
    assert_eq!(p.equations.len(), 1);
    let mut n = sweep(&p, &[4], 2, |v| (0..4).all(|x| v[x] == v[(x + 2) % 4]));
    let z2 = GroupSpec::new(2, vec![]).unwrap();
    let p = express_period(&z2, &[2], &[vec![1, 0], vec![0, 1]]).unwrap();
    n += sweep(&p, &[2, 2], 2, |v| v.iter().all(|&x| x == v[0]));
    let p = express_period(&z, &[2], &[]).unwrap();
    n += sweep(&p, &[3], 2, |_| true);
    n
}

/// Linear relations: the kernel of c·a = 0 mod L.
pub fn linear() -> usize {
    let z = GroupSpec::new(1, vec![]).unwrap();
    let mut n = 0;
    for (l, coeffs) in [(3, vec![1, 2]), (6, vec![1, 2, 3]), (4, vec![0, 0]), (2, vec![1])] {
        let p = express_linear(&z, l, &coeffs).unwrap();
        let periods = if coeffs.len() == 1 { vec![2] } else { vec![1] };
        n += sweep(&p, &periods, l, |v| {
            v.chunks(coeffs.len()).all(|a| a.iter().zip(&coeffs).map(|(x, c)| x * c).sum::<i64>() % l == 0)
        });
    }
    n
}

/// Booleanness on Z × Z/2 with e = (0, 1), L = 5, over all 5⁴ maps.
pub fn booleanness() -> usize {
    let g = GroupSpec::new(1, vec![2]).unwrap();
    let p = express_boolean(&g, &[0, 1], 5).unwrap();
    sweep(&p, &[2], 5, |v| {
        (0..2).all(|n| {
            let (a, b) = (v[2 * n], v[2 * n + 1]);
            (a == 1 || a == 4) && (a + b) % 5 == 0
        })
    })
}

/// Boolean constraints for U = 3, L = 11 and every symmetric Ω ⊆ {±1}³:
/// the projections of all solutions to the main components equal Ω.
pub fn boolean_constraints() -> usize {
    let g = GroupSpec::new(1, vec![2]).unwrap();
    let cube = odometer(3, 2).map(|v| v.iter().map(|&b| if b == 0 { 1 } else { -1 }).collect::<Vec<i64>>());
    let reps: Vec<Vec<i64>> = cube.filter(|v| v[0] == 1).collect();
    let mut checked = 0;
    for mask in 0..1u32 << reps.len() {
        let omega: Vec<Vec<i64>> = reps
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .flat_map(|(_, v)| [v.clone(), v.iter().map(|x| -x).collect()])
            .collect();
        let reduced: BTreeSet<Vec<i64>> = omega.iter().map(|v| v.iter().map(|x| x.rem_euclid(11)).collect()).collect();
        let p = express_boolean_constraint(&g, &[0, 1], 3, SetExpr::explicit(vec![11; 3], omega.clone()), 11).unwrap();
        assert!(p.components[3..].iter().all(|c| p.existential.contains(&c.name)));
        let oracle: BTreeSet<Vec<i64>> = odometer(6, 11)
            .filter(|v| {
                (0..3).all(|k| (v[k] == 1 || v[k] == 10) && (v[k] + v[k + 3]) % 11 == 0) && reduced.contains(&v[..3])
            })
            .collect();
        let solved: BTreeSet<Vec<i64>> =
            all_solutions(&p, &[1], 10_000).unwrap().iter().map(|a| main_values(a, 3)).collect();
        assert_eq!(solved, oracle, "mask {mask}");
        checked += 1;
    }
    checked
}

/// Periodized permutations: q = 2, U = 2, L = 9 on periods 2 and 4 against
/// the ±ι(σ(n mod q)) description, and q = 1, U = 1 against booleanness.
pub fn periodized_permutations() -> usize {
    let iota = vec![vec![1, 1], vec![1, -1]];
    let p = express_periodized_permutation(2, 2, 9, &iota).unwrap();
    let mut checked = 0;
    for period in [2usize, 4] {
        let points = 2 * period;
        let oracle: BTreeSet<Vec<i64>> = odometer(2 * points, 2)
            .map(|v| v.iter().map(|&b| if b == 0 { 1 } else { 8 }).collect::<Vec<i64>>())
            .filter(|v| {
                let at = |n: usize, t: usize| -> Vec<i64> {
                    let y = 2 * (n % period) + t;
                    v[2 * y..2 * y + 2].iter().map(|&x| if x == 8 { -1 } else { 1 }).collect()
                };
                let boolean = (0..period).all(|n| at(n, 1) == at(n, 0).iter().map(|x| -x).collect::<Vec<_>>());
                let perm = (0..period).all(|n| {
                    let norm = |w: Vec<i64>| if w[0] == 1 { w } else { w.iter().map(|x| -x).collect() };
                    let (a, b) = (norm(at(n, 0)), norm(at(n + 1, 0)));
                    a != b && iota.contains(&a) && iota.contains(&b)
                });
                boolean && perm
            })
            .collect();
        let solved: BTreeSet<Vec<i64>> =
            all_solutions(&p, &[period as i64], 10_000).unwrap().into_iter().map(|a| a.values).collect();
        assert_eq!(solved, oracle, "period {period}");
        assert!(!solved.is_empty());
        checked += 1;
    }
    assert!(matches!(
        express_periodized_permutation(2, 2, 8, &iota),
        Err(tileforge::feq::FeqError::ModulusTooSmall { .. })
    ));
    let p = express_periodized_permutation(1, 1, 7, &[vec![1]]).unwrap();
    checked += sweep(&p, &[3], 7, |v| v.chunks(2).all(|w| (w[0] == 1 || w[0] == 6) && (w[0] + w[1]) % 7 == 0));
    checked
}

/// Conjunction of booleanness of α with the relation α + β = 0 mod 5.
pub fn conjunction() -> usize {
    let g = GroupSpec::new(1, vec![2]).unwrap();
    let b = express_boolean(&g, &[0, 1], 5).unwrap();
    let mut l = express_linear(&g, 5, &[1, 1]).unwrap();
    l.components[0].name = b.components[0].name.clone();
    let p = conjoin(&b, &l).unwrap();
    assert_eq!(p.components.len(), 2);
    sweep(&p, &[1], 5, |v| {
        let (a0, b0, a1, b1) = (v[0], v[1], v[2], v[3]);
        (a0 == 1 || a0 == 4) && (a0 + a1) % 5 == 0 && (a0 + b0) % 5 == 0 && (a1 + b1) % 5 == 0
    })
}
