use tileforge::padic::{Prime, Valuation};

/// ν_p by repeated division; None for zero.
pub fn naive_nu(p: i64, n: i64) -> Option<u32> {
    if n == 0 {
        return None;
    }
    let (mut n, mut k) = (n, 0);
    while n % p == 0 {
        n /= p;
        k += 1;
    }
    Some(k)
}

/// Last nonzero base-p digit of |n| read with its sign, as a residue in
/// 1..p; 1 at zero.
pub fn naive_fp(p: i64, n: i64) -> i64 {
    if n == 0 {
        return 1;
    }
    let mut n = n;
    while n % p == 0 {
        n /= p;
    }
    n.rem_euclid(p)
}

pub struct LawCounts {
    pub values: u64,
    pub products: u64,
    pub shifts: u64,
}

/// Checks the library against the naive oracle on |n| ≤ 2·bound, then
/// multiplicativity/additivity on |n|, |m| ≤ bound with m restricted to
/// |m| ≤ mult_bound, and almost periodicity on every pair |n|, |h| ≤ bound
/// with ν(h) > ν(n).
pub fn check_laws(p: i64, bound: i64, mult_bound: i64) -> LawCounts {
    let pp = Prime::new(p).unwrap();
    let reach = 2 * bound;
    let size = (2 * reach + 1) as usize;
    let idx = |n: i64| (n + reach) as usize;
    let mut nu = Vec::with_capacity(size);
    let mut fp = Vec::with_capacity(size);
    for n in -reach..=reach {
        let v = pp.nu(n);
        let f = pp.digit(n);
        assert_eq!(v.finite(), naive_nu(p, n), "nu({n})");
        assert_eq!(v == Valuation::Infinity, n == 0);
        assert_eq!(f, naive_fp(p, n), "f({n})");
        nu.push(v);
        fp.push(f);
    }
    let mut counts = LawCounts { values: size as u64, products: 0, shifts: 0 };
    for n in (-bound..=bound).filter(|&n| n != 0) {
        for m in (-mult_bound..=mult_bound).filter(|&m| m != 0) {
            let nm = n * m;
            assert_eq!(pp.nu(nm), nu[idx(n)] + nu[idx(m)], "nu({n}·{m})");
            assert_eq!(pp.digit(nm), fp[idx(n)] * fp[idx(m)] % p, "f({n}·{m})");
            counts.products += 1;
        }
    }
    for n in (-bound..=bound).filter(|&n| n != 0) {
        let k = nu[idx(n)].finite().unwrap();
        let step = p.pow(k + 1);
        let mut h = -(bound / step) * step;
        while h <= bound {
            let x = n + h;
            assert_eq!(nu[idx(x)], nu[idx(n)], "nu({n}+{h})");
            assert_eq!(fp[idx(x)], fp[idx(n)], "f({n}+{h})");
            counts.shifts += 1;
            h += step;
        }
    }
    counts
}
