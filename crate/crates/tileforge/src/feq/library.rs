//! Constructive expressions of periodicity, linear relations, booleanness,
//! boolean constraints and periodized permutations.

use super::set::{sign_vectors, SetExpr};
use super::{BooleanConstraint, Component, FeqError, FunctionalEquation, GroupSpec, Property, Term};

fn zero_shift(g: &GroupSpec) -> Vec<i64> {
    vec![0; g.dim()]
}

/// Checks that e is a non-zero element with 2e = 0.
pub fn check_order_two(g: &GroupSpec, e: &[i64]) -> Result<(), FeqError> {
    let r = g.reduce(e)?;
    let doubled: Vec<i64> = r.iter().map(|x| 2 * x).collect();
    if g.is_zero(&r) || !g.is_zero(&doubled) {
        return Err(FeqError::NotOrderTwo(e.to_vec()));
    }
    Ok(())
}

/// (α(x + e) + {0}) ⊎ (α(x) + {0}) = {-1, +1} on one Z/L coordinate.
pub fn boolean_equation(g: &GroupSpec, coord: usize, e: &[i64], l: i64) -> FunctionalEquation {
    FunctionalEquation {
        scope: vec![coord],
        terms: vec![
            Term { shift: e.to_vec(), set: SetExpr::zero(vec![l]) },
            Term { shift: zero_shift(g), set: SetExpr::zero(vec![l]) },
        ],
        target: SetExpr::plus_minus_one(l),
    }
}

/// (α(x + h) + {0}) ⊎ (α(x) + (H \ {0})) = H on the coordinates `coords`.
pub fn period_equation(
    g: &GroupSpec,
    coords: Vec<usize>,
    moduli: Vec<i64>,
    h: &[i64],
) -> Result<FunctionalEquation, FeqError> {
    let full = SetExpr::Full { moduli: moduli.clone() };
    let nonzero = SetExpr::Nonzero { moduli: moduli.clone() };
    Ok(FunctionalEquation {
        scope: coords,
        terms: vec![
            Term { shift: h.to_vec(), set: SetExpr::zero(moduli) },
            Term { shift: zero_shift(g), set: nonzero },
        ],
        target: full,
    })
}

/// α is periodic under the subgroup generated by `generators`; one
/// equation per generator.
pub fn express_period(g: &GroupSpec, h: &[i64], generators: &[Vec<i64>]) -> Result<Property, FeqError> {
    let mut p = Property::new(g.clone(), vec![Component { name: "alpha".into(), torsion: h.to_vec() }])?;
    for gen in generators {
        let eq = period_equation(g, (0..h.len()).collect(), h.to_vec(), gen)?;
        p.push(eq)?;
    }
    Ok(p)
}

/// Σ c_u α_u(x) = 0 in Z/L, as (α_1(x), ..., α_U(x)) + E = E with E the kernel.
pub fn express_linear(g: &GroupSpec, l: i64, coeffs: &[i64]) -> Result<Property, FeqError> {
    if l < 1 {
        return Err(FeqError::ModulusTooSmall { found: l, bound: 0 });
    }
    let comps = (1..=coeffs.len()).map(|u| Component::cyclic(format!("alpha{u}"), l)).collect();
    let mut p = Property::new(g.clone(), comps)?;
    let kernel = SetExpr::Kernel { modulus: l, coeffs: coeffs.iter().map(|c| c.rem_euclid(l)).collect() };
    p.push(FunctionalEquation {
        scope: (0..coeffs.len()).collect(),
        terms: vec![Term { shift: zero_shift(g), set: kernel.clone() }],
        target: kernel,
    })?;
    Ok(p)
}

/// α takes values in {-1, +1} ⊂ Z/L and α(x + e) = -α(x).
pub fn express_boolean(g: &GroupSpec, e: &[i64], l: i64) -> Result<Property, FeqError> {
    check_order_two(g, e)?;
    if l <= 2 {
        return Err(FeqError::ModulusTooSmall { found: l, bound: 2 });
    }
    let mut p = Property::new(g.clone(), vec![Component::cyclic("alpha", l)])?;
    p.push(boolean_equation(g, 0, e, l))?;
    Ok(p)
}

/// The α_u are e-boolean and (α_1, ..., α_U)(x) ∈ Ω everywhere. The result
/// carries auxiliary existential components, U - 2 per excluded pair ±ε
/// after padding U to an odd number ≥ 3.
pub fn express_boolean_constraint(
    g: &GroupSpec,
    e: &[i64],
    u: usize,
    omega: SetExpr,
    l: i64,
) -> Result<Property, FeqError> {
    check_order_two(g, e)?;
    if omega.dim() != u {
        return Err(FeqError::BadSet(format!("constraint set has dimension {}, expected {u}", omega.dim())));
    }
    let comps = (1..=u).map(|k| Component::cyclic(format!("alpha{k}"), l)).collect();
    let mut p = Property::new(g.clone(), comps)?;
    p.constraints.push(BooleanConstraint {
        label: "omega".into(),
        scope: (0..u).collect(),
        e: e.to_vec(),
        modulus: l,
        omega,
    });
    p.expand()
}

/// Number of padding coordinates that make U odd and at least 3.
pub fn padding(u: usize) -> usize {
    if u <= 1 {
        3 - u
    } else if u.is_multiple_of(2) {
        1
    } else {
        0
    }
}

/// Adds the auxiliary components and equations standing for `c`.
pub fn expand_boolean_constraint(p: &mut Property, c: &BooleanConstraint) -> Result<(), FeqError> {
    let u = c.scope.len();
    let l = c.modulus;
    let bound = 2 * u as i64 + 4;
    if l <= bound {
        return Err(FeqError::ModulusTooSmall { found: l, bound });
    }
    check_order_two(&p.group, &c.e)?;
    let pad = padding(u);
    let up = u + pad;
    if up > 64 || 1u128 << (up - 1) > super::materialize_cap() as u128 {
        return Err(FeqError::TooLarge(format!("2^{} sign pairs of constraint {:?}", up - 1, c.label)));
    }
    let mut excluded = Vec::new();
    for eps in sign_vectors(up).into_iter().filter(|v| v[0] == 1) {
        let head: Vec<i64> = eps[..u].iter().map(|x| x.rem_euclid(l)).collect();
        let neg: Vec<i64> = eps[..u].iter().map(|x| (-x).rem_euclid(l)).collect();
        let inside = c.omega.contains(&head);
        if inside != c.omega.contains(&neg) {
            return Err(FeqError::Asymmetric);
        }
        if !inside {
            excluded.push(eps);
        }
    }

    let mut alpha_coords = c.scope.clone();
    for k in 0..pad {
        let name = format!("{}.pad{k}", c.label);
        add_aux(p, &name, l)?;
        alpha_coords.push(p.coords_of(&name)?.start);
    }
    for &k in &alpha_coords {
        let eq = boolean_equation(&p.group, k, &c.e, l);
        p.push(eq)?;
    }
    for (x, eps) in excluded.iter().enumerate() {
        let mut scope = alpha_coords.clone();
        for b in 0..up - 2 {
            let name = format!("{}.x{x}.beta{b}", c.label);
            add_aux(p, &name, l)?;
            let k = p.coords_of(&name)?.start;
            scope.push(k);
            let eq = boolean_equation(&p.group, k, &c.e, l);
            p.push(eq)?;
        }
        let mut coeffs: Vec<i64> = eps.iter().map(|x| x.rem_euclid(l)).collect();
        coeffs.extend(std::iter::repeat_n(l - 1, up - 2));
        let kernel = SetExpr::Kernel { modulus: l, coeffs };
        p.push(FunctionalEquation {
            scope,
            terms: vec![Term { shift: zero_shift(&p.group), set: kernel.clone() }],
            target: kernel,
        })?;
    }
    Ok(())
}

fn add_aux(p: &mut Property, name: &str, l: i64) -> Result<(), FeqError> {
    if p.component_index(name).is_some() {
        return Err(FeqError::ComponentCollision(name.to_string()));
    }
    p.components.push(Component::cyclic(name, l));
    p.existential.insert(name.to_string());
    Ok(())
}

/// Checks that ι is an injection into {-1, +1}^U whose image misses its
/// own negation.
pub fn check_injection(iota: &[Vec<i64>], u: usize) -> Result<(), FeqError> {
    let mut seen = std::collections::BTreeSet::new();
    for row in iota {
        if row.len() != u || row.iter().any(|&x| x != 1 && x != -1) {
            return Err(FeqError::BadInjection);
        }
        if !seen.insert(row.clone()) {
            return Err(FeqError::BadInjection);
        }
    }
    for row in iota {
        let neg: Vec<i64> = row.iter().map(|x| -x).collect();
        if seen.contains(&neg) {
            return Err(FeqError::BadInjection);
        }
    }
    Ok(())
}

/// Pushes (optionally) booleanness of `coords` and the window equation
/// ⨄_{i<q} ⨄_{j<2} (α(x + i·dir + j·e) + {0}) = ι(Z/q) ⊎ -ι(Z/q).
pub fn push_periodized_permutation(
    p: &mut Property,
    coords: &[usize],
    dir: &[i64],
    e: &[i64],
    l: i64,
    iota: &[Vec<i64>],
    with_boolean: bool,
) -> Result<(), FeqError> {
    let u = coords.len();
    let q = iota.len();
    if u == 0 || q == 0 || (u <= 64 && q as u128 > 1u128 << (u - 1)) {
        return Err(FeqError::PeriodTooLarge { q, u });
    }
    let bound = 2 * u as i64 + 4;
    if l <= bound {
        return Err(FeqError::ModulusTooSmall { found: l, bound });
    }
    check_order_two(&p.group, e)?;
    check_injection(iota, u)?;
    if with_boolean {
        for &k in coords {
            let eq = boolean_equation(&p.group, k, e, l);
            p.push(eq)?;
        }
    }
    let mut terms = Vec::with_capacity(2 * q);
    for i in 0..q as i64 {
        for j in 0..2 {
            let shift = dir.iter().zip(e).map(|(d, t)| i * d + j * t).collect();
            terms.push(Term { shift, set: SetExpr::zero(vec![l; u]) });
        }
    }
    p.push(FunctionalEquation {
        scope: coords.to_vec(),
        terms,
        target: SetExpr::Image { modulus: l, table: iota.to_vec(), signed: true },
    })
}

/// On G = Z × Z/2: the α_u are (0,1)-boolean and
/// (α_1, ..., α_U)(n, t) = ±ι(σ(n mod q)) for a permutation σ.
pub fn express_periodized_permutation(q: usize, u: usize, l: i64, iota: &[Vec<i64>]) -> Result<Property, FeqError> {
    if iota.len() != q {
        return Err(FeqError::BadInjection);
    }
    let g = GroupSpec::new(1, vec![2])?;
    let comps = (1..=u).map(|k| Component::cyclic(format!("alpha{k}"), l)).collect();
    let mut p = Property::new(g, comps)?;
    let coords: Vec<usize> = (0..u).collect();
    push_periodized_permutation(&mut p, &coords, &[1, 0], &[0, 1], l, iota, true)?;
    Ok(p)
}
