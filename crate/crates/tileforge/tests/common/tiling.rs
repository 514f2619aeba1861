use std::collections::BTreeSet;

use tileforge::feq::library::*;
use tileforge::feq::solve::all_solutions;
use tileforge::feq::{conjoin, Component, GroupSpec, Property, Quotient};
use tileforge::tiling::*;

/// Library properties with the quotients they are checked on.
pub fn library() -> Vec<(&'static str, Property, Vec<Vec<i64>>)> {
    let z = GroupSpec::new(1, vec![]).unwrap();
    let z2 = GroupSpec::new(2, vec![]).unwrap();
    let zt = GroupSpec::new(1, vec![2]).unwrap();
    let z2t = GroupSpec::new(2, vec![2]).unwrap();
    let iota = vec![vec![1, 1], vec![1, -1]];
    let period = express_period(&z2t, &[2], &[vec![1, 1, 0]]).unwrap();
    let boolean = express_boolean(&z2t, &[0, 0, 1], 5).unwrap();
    let boolean = Property { components: vec![Component::cyclic("alpha", 5)], ..boolean };
    let period5 = express_period(&z2t, &[5], &[vec![1, 1, 0]]).unwrap();
    vec![
        ("period on Z", express_period(&z, &[2], &[vec![2]]).unwrap(), vec![vec![1], vec![2], vec![3], vec![4]]),
        ("linear on Z^2", express_linear(&z2, 3, &[1, 2]).unwrap(), vec![vec![1, 1], vec![2, 1], vec![1, 2]]),
        ("boolean on Z x Z/2", express_boolean(&zt, &[0, 1], 5).unwrap(), vec![vec![1], vec![2], vec![4]]),
        ("periodized permutation", express_periodized_permutation(2, 2, 9, &iota).unwrap(), vec![vec![2], vec![4]]),
        (
            "boolean and diagonal period on Z^2 x Z/2",
            conjoin(&boolean, &Property { components: vec![Component::cyclic("alpha", 5)], ..period5 }).unwrap(),
            vec![vec![2, 2], vec![4, 4], vec![4, 2]],
        ),
        ("period on Z^2 x Z/2", period, vec![vec![2, 2], vec![3, 3]]),
    ]
}

/// For every library property and quotient: the graphs of the satisfying
/// assignments are exactly the tilings of the compiled system, extraction
/// inverts graph_of, every tiling verifies, and the solver returns the
/// least tiling. Returns (properties, quotients, tilings).
pub fn correspondence() -> (usize, usize, usize) {
    let lib = library();
    let mut quotients = 0;
    let mut total = 0;
    for (name, p, periods_list) in &lib {
        let sys = feq_to_tiling(p).unwrap();
        for periods in periods_list {
            let q = Quotient::new(&p.group, periods).unwrap();
            let sols = all_solutions(p, periods, 100_000).unwrap();
            let graphs: BTreeSet<PeriodicSet> = sols.iter().map(|a| graph_of(&q, a)).collect();
            let tilings: BTreeSet<PeriodicSet> = all_tilings(&sys, periods, 100_000).unwrap().into_iter().collect();
            assert_eq!(graphs.len(), sols.len(), "{name}: graph_of not injective");
            assert_eq!(graphs, tilings, "{name} on {periods:?}");
            for t in &tilings {
                let alpha = extract_function(t, &sys.base, &sys.fiber).unwrap();
                assert_eq!(graph_of(&q, &alpha), *t);
                assert!(verify_tiling(t, &sys).unwrap().passed());
            }
            match solve_tiling_periodic(&sys, periods, u64::MAX).unwrap() {
                TilingOutcome::Witness(w) => assert_eq!(Some(&w), tilings.first(), "{name}"),
                other => assert!(tilings.is_empty(), "{name}: {other:?}"),
            }
            quotients += 1;
            total += tilings.len();
        }
    }
    assert!(total > 0);
    (lib.len(), quotients, total)
}
