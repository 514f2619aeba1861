//! p-adic valuations, last non-zero digits, CRT and affine forms.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PadicError {
    #[error("{0} is not a prime")]
    NotPrime(i64),
    #[error("moduli {0} and {1} are not coprime")]
    NonCoprimeModuli(i64, i64),
    #[error("modulus must be positive, got {0}")]
    BadModulus(i64),
}

/// A prime checked by trial division.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub struct Prime(i64);

impl Prime {
    pub fn new(p: i64) -> Result<Self, PadicError> {
        if is_prime(p) {
            Ok(Prime(p))
        } else {
            Err(PadicError::NotPrime(p))
        }
    }

    pub fn get(self) -> i64 {
        self.0
    }

    /// p^k as an i64. Panics on overflow.
    pub fn pow(self, k: u32) -> i64 {
        self.0.checked_pow(k).expect("prime power overflows i64")
    }

    pub fn nu(self, n: i64) -> Valuation {
        if n == 0 {
            return Valuation::Infinity;
        }
        if self.0 == 2 {
            return Valuation::Finite(n.trailing_zeros());
        }
        let mut n = n;
        let mut k = 0;
        while n % self.0 == 0 {
            n /= self.0;
            k += 1;
        }
        Valuation::Finite(k)
    }

    /// Last non-zero base-p digit of n, with the convention f_p(0) = 1.
    pub fn fp(self, n: i64) -> UnitResidue {
        if n == 0 {
            return UnitResidue { p: self.0, r: 1 };
        }
        if self.0 == 2 {
            return UnitResidue { p: 2, r: 1 };
        }
        let mut n = n;
        while n % self.0 == 0 {
            n /= self.0;
        }
        UnitResidue { p: self.0, r: n.rem_euclid(self.0) }
    }

    /// `fp` returned as a bare residue in 1..p.
    pub fn digit(self, n: i64) -> i64 {
        self.fp(n).r
    }

    pub fn is_unit(self, n: i64) -> bool {
        n.rem_euclid(self.0) != 0
    }
}

impl TryFrom<i64> for Prime {
    type Error = PadicError;
    fn try_from(p: i64) -> Result<Self, PadicError> {
        Prime::new(p)
    }
}

impl From<Prime> for i64 {
    fn from(p: Prime) -> i64 {
        p.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn is_prime(n: i64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2i64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(u32),
    Infinity,
}

impl Valuation {
    pub fn is_finite(self) -> bool {
        matches!(self, Valuation::Finite(_))
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(k) => Some(k),
            Valuation::Infinity => None,
        }
    }

    /// True iff the valuation is at most `k`.
    pub fn le(self, k: u32) -> bool {
        matches!(self, Valuation::Finite(v) if v <= k)
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        use Valuation::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.cmp(b),
            (Finite(_), Infinity) => Ordering::Less,
            (Infinity, Finite(_)) => Ordering::Greater,
            (Infinity, Infinity) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::ops::Add for Valuation {
    type Output = Valuation;
    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinity,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(k) => write!(f, "{k}"),
            Valuation::Infinity => write!(f, "inf"),
        }
    }
}

/// An element of (Z/pZ)^x, stored as its representative in 1..p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UnitResidue {
    pub p: i64,
    pub r: i64,
}

impl UnitResidue {
    pub fn mul(self, other: UnitResidue) -> UnitResidue {
        assert_eq!(self.p, other.p);
        UnitResidue { p: self.p, r: (self.r * other.r) % self.p }
    }
}

pub fn nu(p: i64, n: i64) -> Result<Valuation, PadicError> {
    Ok(Prime::new(p)?.nu(n))
}

pub fn fp(p: i64, n: i64) -> Result<UnitResidue, PadicError> {
    Ok(Prime::new(p)?.fp(n))
}

/// n ↦ a·n + b.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineForm1 {
    pub a: i64,
    pub b: i64,
}

impl AffineForm1 {
    pub fn new(a: i64, b: i64) -> Self {
        AffineForm1 { a, b }
    }

    pub fn eval(&self, n: i64) -> i64 {
        self.a * n + self.b
    }

    pub fn is_nondegenerate(&self, p: Prime) -> bool {
        p.is_unit(self.a) || p.is_unit(self.b)
    }

    pub fn identical_mod(&self, p: Prime, other: &AffineForm1) -> bool {
        congruent(self.a, other.a, p.get()) && congruent(self.b, other.b, p.get())
    }
}

/// (n, m) ↦ A·n + B·m + C.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineForm2 {
    #[serde(rename = "A")]
    pub a: i64,
    #[serde(rename = "B")]
    pub b: i64,
    #[serde(rename = "C")]
    pub c: i64,
}

/// The normalised data (c, D, E) of a vertically non-degenerate form:
/// A·n + B·m + C = B·(m − D·n − E), with c = f_p(B).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub c: i64,
    #[serde(rename = "D")]
    pub d: i64,
    #[serde(rename = "E")]
    pub e: i64,
}

impl AffineForm2 {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        AffineForm2 { a, b, c }
    }

    pub fn eval(&self, n: i64, m: i64) -> i64 {
        self.a * n + self.b * m + self.c
    }

    pub fn is_nondegenerate(&self, p: Prime) -> bool {
        p.is_unit(self.a) || p.is_unit(self.b) || p.is_unit(self.c)
    }

    pub fn is_vertically_nondegenerate(&self, p: Prime) -> bool {
        p.is_unit(self.b)
    }

    pub fn identical_mod(&self, p: Prime, other: &AffineForm2) -> bool {
        let q = p.get();
        congruent(self.a, other.a, q) && congruent(self.b, other.b, q) && congruent(self.c, other.c, q)
    }

    /// Restriction to the line m = j·n + i.
    pub fn restrict(&self, j: i64, i: i64) -> AffineForm1 {
        AffineForm1::new(self.a + self.b * j, self.b * i + self.c)
    }

    /// Coefficients reduced into 0..modulus.
    pub fn reduce(&self, modulus: i64) -> AffineForm2 {
        AffineForm2::new(self.a.rem_euclid(modulus), self.b.rem_euclid(modulus), self.c.rem_euclid(modulus))
    }

    /// (c, D, E) with D, E reduced mod p^precision. None unless B is a unit.
    pub fn canonical(&self, p: Prime, precision: u32) -> Option<CanonicalForm> {
        if !self.is_vertically_nondegenerate(p) {
            return None;
        }
        let q = p.pow(precision);
        let binv = mod_inv(self.b, q)?;
        Some(CanonicalForm { c: p.digit(self.b), d: mul_mod(-self.a, binv, q), e: mul_mod(-self.c, binv, q) })
    }
}

pub fn forms_identical_mod_p(p: Prime, f: &AffineForm1, g: &AffineForm1) -> bool {
    f.identical_mod(p, g)
}

pub fn congruent(x: i64, y: i64, q: i64) -> bool {
    (x - y).rem_euclid(q) == 0
}

pub fn mul_mod(x: i64, y: i64, q: i64) -> i64 {
    ((x as i128 * y as i128).rem_euclid(q as i128)) as i64
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Returns (g, x, y) with a·x + b·y = g = gcd(a, b).
fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// Inverse of x modulo q, if it exists.
pub fn mod_inv(x: i64, q: i64) -> Option<i64> {
    if q == 1 {
        return Some(0);
    }
    let (g, s, _) = ext_gcd((x as i128).rem_euclid(q as i128), q as i128);
    if g != 1 {
        return None;
    }
    Some(s.rem_euclid(q as i128) as i64)
}

/// Least non-negative solution of x ≡ r_i (mod m_i) for pairwise coprime m_i.
pub fn crt(pairs: &[(i64, i64)]) -> Result<i64, PadicError> {
    for &(m, _) in pairs {
        if m <= 0 {
            return Err(PadicError::BadModulus(m));
        }
    }
    for (i, &(m1, _)) in pairs.iter().enumerate() {
        for &(m2, _) in &pairs[i + 1..] {
            if gcd(m1, m2) != 1 {
                return Err(PadicError::NonCoprimeModuli(m1, m2));
            }
        }
    }
    let mut x: i128 = 0;
    let mut modulus: i128 = 1;
    for &(m, r) in pairs {
        let m = m as i128;
        let r = (r as i128).rem_euclid(m);
        let (_, inv, _) = ext_gcd(modulus.rem_euclid(m), m);
        let t = ((r - x).rem_euclid(m) * inv.rem_euclid(m)).rem_euclid(m);
        x += modulus * t;
        modulus *= m;
        x = x.rem_euclid(modulus);
    }
    i64::try_from(x).map_err(|_| PadicError::BadModulus(i64::MAX))
}
