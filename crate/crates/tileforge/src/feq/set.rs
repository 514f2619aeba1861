//! Subsets of finite Abelian groups (Z/m_1) × ... × (Z/m_k), kept
//! intensional unless small enough to list.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::program::SudokuOmega;
use super::FeqError;

/// Default upper bound on the number of elements a set may be listed with.
pub const DEFAULT_MATERIALIZE_CAP: usize = 1 << 20;

/// The listing cap, read once from `TILEFORGE_MATERIALIZE_CAP`.
pub fn materialize_cap() -> usize {
    static CAP: OnceLock<usize> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var("TILEFORGE_MATERIALIZE_CAP")
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_MATERIALIZE_CAP)
    })
}

pub type Elem = Vec<i64>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum SetExpr {
    /// A listed set; elements are kept reduced and sorted.
    Explicit {
        moduli: Vec<i64>,
        elements: Vec<Elem>,
    },
    Full {
        moduli: Vec<i64>,
    },
    /// Every element except zero.
    Nonzero {
        moduli: Vec<i64>,
    },
    /// Cartesian product over consecutive coordinate blocks.
    Product {
        factors: Vec<SetExpr>,
    },
    /// {a ∈ (Z/L)^U : Σ c_u a_u = 0}.
    Kernel {
        modulus: i64,
        coeffs: Vec<i64>,
    },
    /// {-1, +1}^U with the pair ±ε removed.
    PairComplement {
        modulus: i64,
        eps: Vec<i64>,
    },
    /// ι(Z/q) when unsigned, ι(Z/q) ⊎ -ι(Z/q) when signed.
    Image {
        modulus: i64,
        table: Vec<Vec<i64>>,
        signed: bool,
    },
    Union {
        children: Vec<SetExpr>,
    },
    Intersection {
        children: Vec<SetExpr>,
    },
    /// Sign vectors encoding accepted Sudoku lines.
    SudokuOmega(Box<SudokuOmega>),
}

fn reduce(x: i64, m: i64) -> i64 {
    x.rem_euclid(m)
}

impl SetExpr {
    pub fn explicit(moduli: Vec<i64>, elements: impl IntoIterator<Item = Elem>) -> Self {
        let set: BTreeSet<Elem> =
            elements.into_iter().map(|e| e.iter().zip(&moduli).map(|(&x, &m)| reduce(x, m)).collect()).collect();
        SetExpr::Explicit { moduli, elements: set.into_iter().collect() }
    }

    pub fn singleton(moduli: Vec<i64>, e: Elem) -> Self {
        SetExpr::explicit(moduli, [e])
    }

    pub fn zero(moduli: Vec<i64>) -> Self {
        let z = vec![0; moduli.len()];
        SetExpr::explicit(moduli, [z])
    }

    /// {-1, +1} inside Z/L.
    pub fn plus_minus_one(l: i64) -> Self {
        SetExpr::explicit(vec![l], [vec![1], vec![-1]])
    }

    pub fn moduli(&self) -> Vec<i64> {
        match self {
            SetExpr::Explicit { moduli, .. } | SetExpr::Full { moduli } | SetExpr::Nonzero { moduli } => moduli.clone(),
            SetExpr::Product { factors } => factors.iter().flat_map(|f| f.moduli()).collect(),
            SetExpr::Kernel { modulus, coeffs } => vec![*modulus; coeffs.len()],
            SetExpr::PairComplement { modulus, eps } => vec![*modulus; eps.len()],
            SetExpr::Image { modulus, table, .. } => {
                vec![*modulus; table.first().map_or(0, |t| t.len())]
            }
            SetExpr::Union { children } | SetExpr::Intersection { children } => {
                children.first().map_or_else(Vec::new, |c| c.moduli())
            }
            SetExpr::SudokuOmega(o) => vec![o.modulus(); o.dim()],
        }
    }

    pub fn dim(&self) -> usize {
        self.moduli().len()
    }

    /// Checks shapes: matching dimensions, moduli ≥ 1, Image rows of equal length.
    pub fn validate(&self) -> Result<(), FeqError> {
        let bad = |msg: &str| Err(FeqError::BadSet(msg.to_string()));
        match self {
            SetExpr::Explicit { moduli, elements } => {
                if moduli.iter().any(|&m| m < 1) {
                    return bad("modulus below 1");
                }
                if elements.iter().any(|e| e.len() != moduli.len()) {
                    return bad("element of wrong length");
                }
            }
            SetExpr::Full { moduli } | SetExpr::Nonzero { moduli } => {
                if moduli.iter().any(|&m| m < 1) {
                    return bad("modulus below 1");
                }
            }
            SetExpr::Product { factors } => {
                for f in factors {
                    f.validate()?;
                }
            }
            SetExpr::Kernel { modulus, .. } | SetExpr::PairComplement { modulus, .. } => {
                if *modulus < 1 {
                    return bad("modulus below 1");
                }
            }
            SetExpr::Image { modulus, table, .. } => {
                if *modulus < 1 {
                    return bad("modulus below 1");
                }
                if table.iter().any(|t| t.len() != table[0].len()) {
                    return bad("image rows of different lengths");
                }
            }
            SetExpr::Union { children } | SetExpr::Intersection { children } => {
                if children.is_empty() {
                    return bad("empty union or intersection");
                }
                let m = children[0].moduli();
                for c in children {
                    c.validate()?;
                    if c.moduli() != m {
                        return bad("children live in different groups");
                    }
                }
            }
            SetExpr::SudokuOmega(_) => {}
        }
        Ok(())
    }

    pub fn contains(&self, h: &[i64]) -> bool {
        match self {
            SetExpr::Explicit { moduli, elements } => {
                let r: Elem = h.iter().zip(moduli).map(|(&x, &m)| reduce(x, m)).collect();
                elements.binary_search(&r).is_ok()
            }
            SetExpr::Full { moduli } => h.len() == moduli.len(),
            SetExpr::Nonzero { moduli } => {
                h.len() == moduli.len() && h.iter().zip(moduli).any(|(&x, &m)| reduce(x, m) != 0)
            }
            SetExpr::Product { factors } => {
                let mut at = 0;
                for f in factors {
                    let d = f.dim();
                    if !f.contains(&h[at..at + d]) {
                        return false;
                    }
                    at += d;
                }
                true
            }
            SetExpr::Kernel { modulus, coeffs } => {
                let s: i128 = coeffs.iter().zip(h).map(|(&c, &a)| c as i128 * a as i128).sum();
                s.rem_euclid(*modulus as i128) == 0
            }
            SetExpr::PairComplement { modulus, eps } => {
                let l = *modulus;
                if !h.iter().all(|&x| reduce(x, l) == reduce(1, l) || reduce(x, l) == reduce(-1, l)) {
                    return false;
                }
                let same = h.iter().zip(eps).all(|(&x, &e)| reduce(x, l) == reduce(e, l));
                let opp = h.iter().zip(eps).all(|(&x, &e)| reduce(x, l) == reduce(-e, l));
                !same && !opp
            }
            SetExpr::Image { modulus, table, signed } => {
                let l = *modulus;
                table.iter().any(|t| {
                    t.iter().zip(h).all(|(&a, &x)| reduce(a, l) == reduce(x, l))
                        || (*signed && t.iter().zip(h).all(|(&a, &x)| reduce(-a, l) == reduce(x, l)))
                })
            }
            SetExpr::Union { children } => children.iter().any(|c| c.contains(h)),
            SetExpr::Intersection { children } => children.iter().all(|c| c.contains(h)),
            SetExpr::SudokuOmega(o) => o.contains(h),
        }
    }

    /// Exact cardinality when it can be computed without listing a large set.
    pub fn size(&self) -> Option<u128> {
        match self {
            SetExpr::Explicit { elements, .. } => Some(elements.len() as u128),
            SetExpr::Full { moduli } => moduli.iter().try_fold(1u128, |acc, &m| acc.checked_mul(m as u128)),
            SetExpr::Nonzero { moduli } => SetExpr::Full { moduli: moduli.clone() }.size().map(|n| n - 1),
            SetExpr::Product { factors } => {
                factors.iter().try_fold(1u128, |acc, f| f.size().and_then(|s| acc.checked_mul(s)))
            }
            SetExpr::Kernel { modulus, coeffs } => {
                let l = *modulus;
                if coeffs.is_empty() {
                    return Some(1);
                }
                let g = coeffs.iter().fold(l, |g, &c| crate::padic::gcd(g, c.rem_euclid(l)));
                (l as u128).checked_pow(coeffs.len() as u32 - 1).and_then(|x| x.checked_mul(g as u128))
            }
            SetExpr::PairComplement { modulus, eps } => {
                if *modulus <= 2 {
                    return self.enumerate().map(|v| v.len() as u128);
                }
                2u128.checked_pow(eps.len() as u32).map(|x| x - 2)
            }
            SetExpr::Image { .. } | SetExpr::Union { .. } | SetExpr::Intersection { .. } => {
                self.enumerate().map(|v| v.len() as u128)
            }
            SetExpr::SudokuOmega(o) => o.size(),
        }
    }

    /// Lists the set in sorted order when it has at most `materialize_cap()`
    /// elements (or a listable superset of that size).
    pub fn enumerate(&self) -> Option<Vec<Elem>> {
        self.enumerate_with_cap(materialize_cap())
    }

    pub fn enumerate_with_cap(&self, cap: usize) -> Option<Vec<Elem>> {
        let out = match self {
            SetExpr::Explicit { elements, .. } => {
                if elements.len() > cap {
                    return None;
                }
                elements.clone()
            }
            SetExpr::Full { moduli } => {
                let n = self.size()?;
                if n > cap as u128 {
                    return None;
                }
                cartesian(moduli)
            }
            SetExpr::Nonzero { moduli } => {
                let n = self.size()?;
                if n > cap as u128 {
                    return None;
                }
                cartesian(moduli).into_iter().filter(|h| h.iter().any(|&x| x != 0)).collect()
            }
            SetExpr::Product { factors } => {
                let n = self.size()?;
                if n > cap as u128 {
                    return None;
                }
                let mut acc: Vec<Elem> = vec![Vec::new()];
                for f in factors {
                    let part = f.enumerate_with_cap(cap)?;
                    acc = acc
                        .iter()
                        .flat_map(|a| {
                            part.iter().map(move |b| {
                                let mut v = a.clone();
                                v.extend_from_slice(b);
                                v
                            })
                        })
                        .collect();
                }
                acc
            }
            SetExpr::Kernel { modulus, coeffs } => {
                let ambient = (*modulus as u128).checked_pow(coeffs.len() as u32)?;
                if ambient > cap as u128 {
                    return None;
                }
                cartesian(&vec![*modulus; coeffs.len()]).into_iter().filter(|h| self.contains(h)).collect()
            }
            SetExpr::PairComplement { modulus, eps } => {
                let ambient = 2u128.checked_pow(eps.len() as u32)?;
                if ambient > cap as u128 {
                    return None;
                }
                let set: BTreeSet<Elem> = sign_vectors(eps.len())
                    .into_iter()
                    .map(|v| v.iter().map(|&x| reduce(x, *modulus)).collect::<Elem>())
                    .filter(|h| self.contains(h))
                    .collect();
                set.into_iter().collect()
            }
            SetExpr::Image { modulus, table, signed } => {
                let mut set = BTreeSet::new();
                for t in table {
                    set.insert(t.iter().map(|&x| reduce(x, *modulus)).collect::<Elem>());
                    if *signed {
                        set.insert(t.iter().map(|&x| reduce(-x, *modulus)).collect::<Elem>());
                    }
                }
                if set.len() > cap {
                    return None;
                }
                set.into_iter().collect()
            }
            SetExpr::Union { children } => {
                let mut set = BTreeSet::new();
                for c in children {
                    set.extend(c.enumerate_with_cap(cap)?);
                    if set.len() > cap {
                        return None;
                    }
                }
                set.into_iter().collect()
            }
            SetExpr::Intersection { children } => {
                let base = children.iter().find_map(|c| c.enumerate_with_cap(cap))?;
                base.into_iter().filter(|h| children.iter().all(|c| c.contains(h))).collect()
            }
            SetExpr::SudokuOmega(o) => o.enumerate(cap)?,
        };
        Some(out)
    }

    /// Whether the set is a subgroup, so that a + E = E iff a ∈ E.
    pub fn is_subgroup(&self) -> bool {
        match self {
            SetExpr::Full { .. } | SetExpr::Kernel { .. } => true,
            SetExpr::Product { factors } => factors.iter().all(|f| f.is_subgroup()),
            SetExpr::Explicit { elements, .. } => elements.len() == 1 && elements[0].iter().all(|&x| x == 0),
            _ => false,
        }
    }

    /// Top-level factor blocks, with nested products flattened.
    pub fn blocks(&self) -> Vec<SetExpr> {
        match self {
            SetExpr::Product { factors } => factors.iter().flat_map(|f| f.blocks()).collect(),
            other => vec![other.clone()],
        }
    }

    /// Negation of every element, as a predicate on the set.
    pub fn is_symmetric(&self) -> Option<bool> {
        let moduli = self.moduli();
        let elems = self.enumerate()?;
        Some(elems.iter().all(|h| {
            let neg: Elem = h.iter().zip(&moduli).map(|(&x, &m)| reduce(-x, m)).collect();
            self.contains(&neg)
        }))
    }
}

/// All vectors of Z/m_1 × ... × Z/m_k in lexicographic order.
pub fn cartesian(moduli: &[i64]) -> Vec<Elem> {
    let mut out: Vec<Elem> = vec![Vec::new()];
    for &m in moduli {
        out = out
            .iter()
            .flat_map(|a| {
                (0..m).map(move |x| {
                    let mut v = a.clone();
                    v.push(x);
                    v
                })
            })
            .collect();
    }
    out
}

/// All of {-1, +1}^u, with +1 before -1 in each coordinate.
pub fn sign_vectors(u: usize) -> Vec<Vec<i64>> {
    (0..1u64 << u).map(|bits| (0..u).map(|k| if bits >> (u - 1 - k) & 1 == 0 { 1 } else { -1 }).collect()).collect()
}

/// Restricts every set to the coordinates where at least one of them is
/// not full. Returns the kept coordinates and the projected sets.
pub fn project_common_support(sets: &[&SetExpr]) -> (Vec<usize>, Vec<SetExpr>) {
    let dim = sets.first().map_or(0, |s| s.dim());
    let mut needed = vec![false; dim];
    let blocked: Vec<Vec<SetExpr>> = sets.iter().map(|s| s.blocks()).collect();
    for blocks in &blocked {
        let mut at = 0;
        for b in blocks {
            let d = b.dim();
            if !matches!(b, SetExpr::Full { .. }) {
                for k in at..at + d {
                    needed[k] = true;
                }
            }
            at += d;
        }
    }
    let keep: Vec<usize> = (0..dim).filter(|&k| needed[k]).collect();
    let projected = blocked
        .iter()
        .map(|blocks| {
            let mut at = 0;
            let mut factors = Vec::new();
            for b in blocks {
                let d = b.dim();
                match b {
                    SetExpr::Full { moduli } => {
                        let kept: Vec<i64> = (at..at + d).filter(|&k| needed[k]).map(|k| moduli[k - at]).collect();
                        if !kept.is_empty() {
                            factors.push(SetExpr::Full { moduli: kept });
                        }
                    }
                    other => factors.push(other.clone()),
                }
                at += d;
            }
            if factors.len() == 1 {
                factors.pop().unwrap()
            } else {
                SetExpr::Product { factors }
            }
        })
        .collect();
    (keep, projected)
}
