//! Bounded satisfiability over periodic assignments: backtracking with
//! conflict-directed backjumping over (point, coordinate) variables.

use std::collections::BTreeSet;

use super::set::Elem;
use super::{disjoint_union_equals, Assignment, Eval, FeqError, Property, Quotient, SetExpr};

/// Sets listed for partial checks must be at most this large.
const PARTIAL_LIST_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    /// A satisfying assignment on the quotient, including existential components.
    Witness(Assignment),
    /// No assignment with these periods exists. Says nothing about other periods.
    NoPeriodicWitness,
    BudgetExhausted,
}

struct Instance {
    eq: usize,
    point: usize,
    /// Variables of each term, in scope order.
    term_vars: Vec<Vec<usize>>,
    term_max: Vec<usize>,
    max: usize,
}

struct Search<'a> {
    p: &'a Property,
    q: Quotient,
    moduli: Vec<i64>,
    instances: Vec<Instance>,
    /// Per variable: instances to check once it is assigned.
    triggers: Vec<Vec<usize>>,
    listed: Vec<Vec<Option<Vec<Elem>>>>,
    domains: Vec<Vec<i64>>,
}

impl<'a> Search<'a> {
    fn new(p: &'a Property, q: Quotient, pins: Option<&[Option<i64>]>) -> Self {
        let dim = p.h_dim();
        let moduli = p.h_moduli();
        let nvars = q.size() * dim;
        let mut instances = Vec::new();
        let mut triggers = vec![Vec::new(); nvars];
        for (e, eq) in p.equations.iter().enumerate() {
            for y in 0..q.size() {
                let term_vars: Vec<Vec<usize>> = eq
                    .terms
                    .iter()
                    .map(|t| {
                        let z = q.shift(y, &t.shift);
                        eq.scope.iter().map(|&k| z * dim + k).collect()
                    })
                    .collect();
                let term_max: Vec<usize> = term_vars.iter().map(|v| *v.iter().max().unwrap_or(&0)).collect();
                let max = *term_max.iter().max().unwrap_or(&0);
                let id = instances.len();
                let mut fire: BTreeSet<usize> = term_max.iter().copied().collect();
                fire.insert(max);
                for v in fire {
                    triggers[v].push(id);
                }
                instances.push(Instance { eq: e, point: y, term_vars, term_max, max });
            }
        }
        let listed = p
            .equations
            .iter()
            .map(|eq| eq.terms.iter().map(|t| t.set.enumerate_with_cap(PARTIAL_LIST_CAP)).collect())
            .collect();
        let mut s = Search { p, q, moduli, instances, triggers, listed, domains: Vec::new() };
        s.domains = (0..nvars)
            .map(|v| {
                let m = s.moduli[v % dim];
                let pinned = pins.and_then(|p| p[v]);
                (0..m).filter(|&x| pinned.is_none_or(|y| y.rem_euclid(m) == x)).filter(|&x| s.unary_ok(v, x)).collect()
            })
            .collect();
        s
    }

    /// Checks terms whose variables are all `v`, with value x.
    fn unary_ok(&self, v: usize, x: i64) -> bool {
        for &id in &self.triggers[v] {
            let inst = &self.instances[id];
            let eq = &self.p.equations[inst.eq];
            for (j, vars) in inst.term_vars.iter().enumerate() {
                if !vars.iter().all(|&w| w == v) {
                    continue;
                }
                let Some(list) = &self.listed[inst.eq][j] else { continue };
                let a: Elem = vec![x; vars.len()];
                if !list.iter().all(|e| eq.target.contains(&add(&a, e, &eq.target))) {
                    return false;
                }
            }
        }
        true
    }

    fn term_value(&self, vals: &[i64], vars: &[usize]) -> Elem {
        vars.iter().map(|&w| vals[w]).collect()
    }

    /// Returns the variables responsible for a failure, or None when the
    /// instance is consistent so far.
    fn check(&self, id: usize, v: usize, vals: &[i64]) -> Result<Option<Vec<usize>>, FeqError> {
        let inst = &self.instances[id];
        let eq = &self.p.equations[inst.eq];
        if inst.max <= v {
            let terms: Vec<(Elem, &SetExpr)> =
                inst.term_vars.iter().zip(&eq.terms).map(|(vars, t)| (self.term_value(vals, vars), &t.set)).collect();
            return match disjoint_union_equals(&terms, &eq.target) {
                Eval::Holds => Ok(None),
                Eval::Fails => Ok(Some(inst.term_vars.iter().flatten().copied().collect())),
                Eval::Indeterminate => Err(FeqError::Indeterminate { equation: inst.eq, point: inst.point }),
            };
        }
        let done: Vec<usize> = (0..inst.term_vars.len()).filter(|&j| inst.term_max[j] <= v).collect();
        if done.iter().any(|&j| self.listed[inst.eq][j].is_none()) {
            return Ok(None);
        }
        let mut seen = std::collections::HashSet::new();
        for &j in &done {
            let a = self.term_value(vals, &inst.term_vars[j]);
            for e in self.listed[inst.eq][j].as_ref().unwrap() {
                let x = add(&a, e, &eq.target);
                if !eq.target.contains(&x) || !seen.insert(x) {
                    return Ok(Some(done.iter().flat_map(|&j| inst.term_vars[j].iter().copied()).collect()));
                }
            }
        }
        Ok(None)
    }

    fn assignment(&self, vals: &[i64]) -> Assignment {
        Assignment::new(&self.q, self.moduli.clone(), vals.to_vec())
    }

    /// Tries the values of `v` after position `from` in its domain. Returns
    /// the position of a consistent value, collecting conflicts otherwise.
    fn next_value(
        &self,
        v: usize,
        from: usize,
        vals: &mut [i64],
        conflict: &mut BTreeSet<usize>,
        nodes: &mut u64,
        budget: u64,
    ) -> Result<Option<usize>, Stop> {
        for pos in from..self.domains[v].len() {
            *nodes += 1;
            if *nodes > budget {
                return Err(Stop::Budget);
            }
            vals[v] = self.domains[v][pos];
            let mut ok = true;
            for &id in &self.triggers[v] {
                match self.check(id, v, vals) {
                    Ok(None) => {}
                    Ok(Some(culprits)) => {
                        conflict.extend(culprits.into_iter().filter(|&w| w < v));
                        ok = false;
                        break;
                    }
                    Err(e) => return Err(Stop::Error(e)),
                }
            }
            if ok {
                return Ok(Some(pos));
            }
        }
        vals[v] = -1;
        Ok(None)
    }
}

enum Stop {
    Budget,
    Error(FeqError),
}

fn add(a: &[i64], e: &[i64], target: &SetExpr) -> Elem {
    let m = target.moduli();
    a.iter().zip(e).zip(&m).map(|((x, y), m)| (x + y).rem_euclid(*m)).collect()
}

fn run(search: &Search, budget: u64, backjump: bool, limit: usize) -> Result<(Vec<Assignment>, bool), FeqError> {
    let n = search.domains.len();
    let mut vals = vec![-1i64; n];
    let mut pos = vec![0usize; n];
    let mut conflict: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut nodes = 0u64;
    let mut found = Vec::new();
    if n == 0 {
        found.push(search.assignment(&vals));
        return Ok((found, false));
    }
    let mut v = 0usize;
    let mut from = 0usize;
    loop {
        match search.next_value(v, from, &mut vals, &mut conflict[v], &mut nodes, budget) {
            Err(Stop::Budget) => return Ok((found, true)),
            Err(Stop::Error(e)) => return Err(e),
            Ok(Some(p)) => {
                pos[v] = p;
                if v + 1 == n {
                    found.push(search.assignment(&vals));
                    if found.len() >= limit {
                        return Ok((found, false));
                    }
                    from = p + 1;
                    continue;
                }
                v += 1;
                from = 0;
                conflict[v].clear();
            }
            Ok(None) => {
                let jump = if backjump {
                    conflict[v].iter().copied().max()
                } else if v == 0 {
                    None
                } else {
                    Some(v - 1)
                };
                let Some(h) = jump else {
                    return Ok((found, false));
                };
                let carried: Vec<usize> = conflict[v].iter().copied().filter(|&w| w != h).collect();
                conflict[h].extend(carried);
                for w in h + 1..=v {
                    vals[w] = -1;
                    conflict[w].clear();
                }
                v = h;
                from = pos[h] + 1;
            }
        }
    }
}

fn quotient_for(p: &Property, periods: &[i64]) -> Result<Quotient, FeqError> {
    Quotient::new(&p.group, periods)
}

/// Searches (periods)-periodic assignments of the expanded property. The
/// first witness in (point, coordinate, value) order is returned, which is
/// the lexicographically least one.
pub fn check_satisfiable_bounded(p: &Property, periods: &[i64], budget: u64) -> Result<SolveOutcome, FeqError> {
    let p = p.expand()?;
    let q = quotient_for(&p, periods)?;
    let search = Search::new(&p, q, None);
    let (found, out_of_budget) = run(&search, budget, true, 1)?;
    Ok(match found.into_iter().next() {
        Some(a) => SolveOutcome::Witness(a),
        None if out_of_budget => SolveOutcome::BudgetExhausted,
        None => SolveOutcome::NoPeriodicWitness,
    })
}

/// Extends values given on the leading coordinates (the non-auxiliary
/// components) to a witness of the expanded property.
pub fn complete_assignment(p: &Property, partial: &Assignment, budget: u64) -> Result<SolveOutcome, FeqError> {
    let p = p.expand()?;
    let q = quotient_for(&p, &partial.periods)?;
    let dim = p.h_dim();
    let known = partial.dim();
    let pins: Vec<Option<i64>> = (0..q.size() * dim)
        .map(|v| {
            let (y, k) = (v / dim, v % dim);
            (k < known).then(|| partial.at(y)[k])
        })
        .collect();
    let search = Search::new(&p, q, Some(&pins));
    let (found, out_of_budget) = run(&search, budget, true, 1)?;
    Ok(match found.into_iter().next() {
        Some(a) => SolveOutcome::Witness(a),
        None if out_of_budget => SolveOutcome::BudgetExhausted,
        None => SolveOutcome::NoPeriodicWitness,
    })
}

/// Every satisfying assignment of the expanded property on the quotient, in
/// lexicographic order, by plain chronological backtracking. Errors with
/// `TooLarge` past `limit` solutions.
pub fn all_solutions(p: &Property, periods: &[i64], limit: usize) -> Result<Vec<Assignment>, FeqError> {
    let p = p.expand()?;
    let q = quotient_for(&p, periods)?;
    let search = Search::new(&p, q, None);
    let (found, _) = run(&search, u64::MAX, false, limit + 1)?;
    if found.len() > limit {
        return Err(FeqError::TooLarge(format!("more than {limit} solutions")));
    }
    Ok(found)
}
