//! Integer and modular primitives: sieves, factorization, residue symbols and
//! the binary representations `2g² − h²` and `u² − 2v²`.

use crate::error::{Result, TmodError};
use num_bigint::BigInt;
use num_integer::Integer;

/// Largest bound accepted by the sieves.
pub const SIEVE_BUDGET: u64 = 2_000_000_000;

#[inline]
pub fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn powmod(mut b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b, m);
        }
        b = mulmod(b, b, m);
        e >>= 1;
    }
    r
}

/// Reduces a signed value into `[0, m)`.
#[inline]
pub fn modi(a: i128, m: u64) -> u64 {
    a.rem_euclid(m as i128) as u64
}

pub fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

pub fn is_square(n: u128) -> Option<u128> {
    let r = isqrt(n);
    (r * r == n).then_some(r)
}

/// p-adic valuation of a nonzero integer.
pub fn val_p(mut n: u128, p: u64) -> u32 {
    debug_assert!(n != 0);
    let mut v = 0;
    while n.is_multiple_of(p as u128) {
        n /= p as u128;
        v += 1;
    }
    v
}

pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let g = (a as i128).extended_gcd(&(m as i128));
    (g.gcd == 1).then(|| modi(g.x, m))
}

/// Deterministic Miller–Rabin, exact for all `n < 3.3·10²⁴` and so for all `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'outer: for &a in &BASES {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

pub fn sieve_primes(bound: u64) -> Result<Vec<u64>> {
    if bound > SIEVE_BUDGET {
        return Err(TmodError::Capacity { bound, budget: SIEVE_BUDGET });
    }
    if bound < 2 {
        return Ok(Vec::new());
    }
    let n = bound as usize;
    // odd-only sieve
    let half = (n - 1) / 2;
    let mut composite = vec![false; half + 1];
    let mut i = 1;
    while (2 * i + 1) * (2 * i + 1) <= n {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = (p * p - 1) / 2;
            while j <= half {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut out = vec![2];
    out.extend((1..=half).filter(|&i| !composite[i]).map(|i| (2 * i + 1) as u64));
    Ok(out)
}

/// Smallest-prime-factor table, built once and shared read-only.
pub struct Spf {
    spf: Vec<u32>,
}

impl Spf {
    pub fn new(bound: u64) -> Result<Self> {
        if bound > SIEVE_BUDGET / 4 {
            return Err(TmodError::Capacity { bound, budget: SIEVE_BUDGET / 4 });
        }
        let n = bound as usize + 1;
        let mut spf = vec![0u32; n];
        for i in 2..n {
            if spf[i] == 0 {
                let mut j = i;
                while j < n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        Ok(Spf { spf })
    }

    pub fn bound(&self) -> u64 {
        self.spf.len() as u64 - 1
    }

    /// Factorization of `n` as (prime, exponent) pairs, `n` within the table.
    pub fn factor(&self, mut n: u64) -> Vec<(u64, u32)> {
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            n /= p;
            match out.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    pub fn is_squarefree(&self, mut n: u64) -> bool {
        let mut last = 0;
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            if p == last {
                return false;
            }
            last = p;
            n /= p;
        }
        true
    }
}

pub fn divisors(fac: &[(u64, u32)]) -> Vec<u64> {
    let mut ds = vec![1u64];
    for &(p, e) in fac {
        let len = ds.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                ds.push(ds[i] * pk);
            }
        }
    }
    ds
}

/// Trial-division factorization of `n < 2^64`.
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut push = |p: u64, n: &mut u64| {
        let mut e = 0;
        while (*n).is_multiple_of(p) {
            *n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    };
    push(2, &mut n);
    push(3, &mut n);
    let mut p = 5;
    while p * p <= n {
        push(p, &mut n);
        push(p + 2, &mut n);
        p += 6;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredInt {
    pub value: BigInt,
    pub factors: Vec<(u64, u32)>,
}

impl FactoredInt {
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|f| f.0)
    }

    pub fn is_negative(&self) -> bool {
        self.value < BigInt::from(0)
    }
}

pub fn squarefree_factor(n: i64) -> Result<FactoredInt> {
    if n == 0 {
        return Err(TmodError::Invalid("zero has no factorization".into()));
    }
    let factors = factor_u64(n.unsigned_abs());
    if factors.iter().any(|&(_, e)| e > 1) {
        return Err(TmodError::NotSquarefree(n));
    }
    Ok(FactoredInt { value: BigInt::from(n), factors })
}

/// Multiplicative Jacobi symbol, 0 when not coprime.
pub fn jacobi(a: i64, n: u64) -> i8 {
    assert!(n % 2 == 1, "jacobi modulus must be odd");
    let mut a = modi(a as i128, n);
    let mut n = n;
    let mut s = 1i8;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz % 2 == 1 && (n % 8 == 3 || n % 8 == 5) {
            s = -s;
        }
        if a % 4 == 3 && n % 4 == 3 {
            s = -s;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        s
    } else {
        0
    }
}

/// Additive Jacobi symbol `[a/n]`.
pub fn jacobi_additive(a: i64, n: u64) -> Result<u8> {
    match jacobi(a, n) {
        1 => Ok(0),
        -1 => Ok(1),
        _ => Err(TmodError::NonCoprime { a, n }),
    }
}

/// Kronecker symbol `(D/p)` for a prime `p`.
pub fn kronecker_prime(d: i64, p: u64) -> i8 {
    if p == 2 {
        match d.rem_euclid(8) {
            1 | 7 => 1,
            3 | 5 => -1,
            _ => 0,
        }
    } else {
        jacobi(d, p)
    }
}

/// Square root modulo an odd prime (Tonelli–Shanks).
pub fn sqrt_mod_prime(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    if powmod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(powmod(a, (p + 1) / 4, p));
    }
    let s = (p - 1).trailing_zeros();
    let q = (p - 1) >> s;
    let mut z = 2;
    while powmod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = powmod(z, q, p);
    let mut t = powmod(a, q, p);
    let mut r = powmod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mulmod(tt, tt, p);
            i += 1;
        }
        let b = powmod(c, 1 << (m - i - 1), p);
        m = i;
        c = mulmod(b, b, p);
        t = mulmod(t, c, p);
        r = mulmod(r, b, p);
    }
    Some(r)
}

/// Rational quartic residue symbol `(a/l)₄ = a^((l−1)/4) mod l`.
pub fn quartic_symbol(a: i64, l: u64) -> Result<i8> {
    if l % 4 != 1 {
        return Err(TmodError::Invalid(format!("{l} is not 1 mod 4")));
    }
    let r = modi(a as i128, l);
    if r == 0 {
        return Err(TmodError::NonCoprime { a, n: l });
    }
    if powmod(r, (l - 1) / 2, l) != 1 {
        return Err(TmodError::NotQuadraticResidue { a, l });
    }
    let q = powmod(r, (l - 1) / 4, l);
    if q == 1 {
        Ok(1)
    } else if q == l - 1 {
        Ok(-1)
    } else {
        Err(TmodError::Internal(format!("quartic symbol of {a} mod {l}")))
    }
}

/// `m = 2g² − h²` with `g, h > 0`, `gcd(g, h) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rep2GH {
    pub g: u64,
    pub h: u64,
    pub m: u64,
}

/// `l = u² − 2v²` with `v > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RepUV {
    pub u: i64,
    pub v: u64,
    pub l: u64,
}

/// Element `x + y√2` of `Z[√2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZSqrt2 {
    pub x: i128,
    pub y: i128,
}

impl ZSqrt2 {
    pub const UNIT: ZSqrt2 = ZSqrt2 { x: 1, y: 1 };

    pub fn norm(self) -> i128 {
        self.x * self.x - 2 * self.y * self.y
    }

    pub fn mul(self, o: ZSqrt2) -> ZSqrt2 {
        ZSqrt2 { x: self.x * o.x + 2 * self.y * o.y, y: self.x * o.y + self.y * o.x }
    }

    pub fn conj(self) -> ZSqrt2 {
        ZSqrt2 { x: self.x, y: -self.y }
    }

    fn rem(self, d: ZSqrt2) -> ZSqrt2 {
        let n = d.norm();
        let num = self.mul(d.conj());
        let qx = div_round(num.x, n);
        let qy = div_round(num.y, n);
        let q = ZSqrt2 { x: qx, y: qy };
        let qd = q.mul(d);
        ZSqrt2 { x: self.x - qd.x, y: self.y - qd.y }
    }

    pub fn gcd(mut a: ZSqrt2, mut b: ZSqrt2) -> ZSqrt2 {
        while b.x != 0 || b.y != 0 {
            let r = a.rem(b);
            a = b;
            b = r;
        }
        a
    }
}

fn div_round(a: i128, b: i128) -> i128 {
    let (a, b) = if b < 0 { (-a, -b) } else { (a, b) };
    (2 * a + b).div_euclid(2 * b)
}

/// An element of `Z[√2]` of norm `±q` for a prime `q ≡ ±1 mod 8` or `q = 2`.
pub fn zsqrt2_prime_element(q: u64) -> Option<ZSqrt2> {
    if q == 2 {
        return Some(ZSqrt2 { x: 0, y: 1 });
    }
    let s = sqrt_mod_prime(2, q)?;
    let g = ZSqrt2::gcd(ZSqrt2 { x: q as i128, y: 0 }, ZSqrt2 { x: s as i128, y: 1 });
    (g.norm().unsigned_abs() == q as u128).then_some(g)
}

/// Multiplies by powers of `3 + 2√2` until `|y|` is minimal in the unit orbit.
fn minimize_y(mut e: ZSqrt2) -> ZSqrt2 {
    let eps = ZSqrt2 { x: 3, y: 2 };
    loop {
        let up = e.mul(eps);
        let down = e.mul(eps.conj());
        if down.y.abs() < e.y.abs() {
            e = down;
        } else if up.y.abs() < e.y.abs() {
            e = up;
        } else {
            return e;
        }
    }
}

pub const REP_SEARCH_CAP: u64 = 1 << 26;

pub fn rep_2g2_h2(m: u64) -> Result<Rep2GH> {
    rep_2g2_h2_capped(m, REP_SEARCH_CAP)
}

pub fn rep_2g2_h2_capped(m: u64, cap: u64) -> Result<Rep2GH> {
    if m == 0 {
        return Err(TmodError::NoRepresentation(0));
    }
    for (q, _) in factor_u64(m) {
        if q != 2 && q % 8 != 1 && q % 8 != 7 {
            return Err(TmodError::NoRepresentation(m as i64));
        }
    }
    let g0 = isqrt(m as u128 / 2) as u64;
    let mut g = g0.max(1);
    while g <= g0 + cap {
        let t = 2 * (g as u128) * (g as u128);
        if t > m as u128 {
            if let Some(h) = is_square(t - m as u128) {
                let h = h as u64;
                if h > 0 && g.gcd(&h) == 1 {
                    return Ok(Rep2GH { g, h, m });
                }
            }
        }
        g += 1;
    }
    rep_2g2_h2_lattice(m)
}

/// Builds `h + g√2` of norm `−m` from prime elements of `Z[√2]`.
pub fn rep_2g2_h2_lattice(m: u64) -> Result<Rep2GH> {
    let mut e = ZSqrt2 { x: 1, y: 0 };
    for (q, k) in factor_u64(m) {
        if k > 1 {
            return Err(TmodError::NoRepresentation(m as i64));
        }
        let pq = zsqrt2_prime_element(q).ok_or(TmodError::NoRepresentation(m as i64))?;
        e = e.mul(pq);
    }
    if e.norm() > 0 {
        e = e.mul(ZSqrt2::UNIT);
    }
    let e = minimize_y(e);
    let (h, g) = (e.x.unsigned_abs() as u64, e.y.unsigned_abs() as u64);
    if g == 0 || h == 0 || 2 * (g as u128) * (g as u128) - (h as u128) * (h as u128) != m as u128 {
        return Err(TmodError::NoRepresentation(m as i64));
    }
    Ok(Rep2GH { g, h, m })
}

/// Representation `l = u² − 2v²` with the smallest `v` in its unit orbit;
/// `u ≡ 1 mod 4` when `l ≡ 1 mod 8`, `u > 0` when `l ≡ 7 mod 8`.
pub fn rep_u2_2v2(l: u64) -> Result<RepUV> {
    if l % 8 != 1 && l % 8 != 7 {
        return Err(TmodError::NoRepresentation(l as i64));
    }
    let mut e = zsqrt2_prime_element(l).ok_or(TmodError::NoRepresentation(l as i64))?;
    if e.norm() < 0 {
        e = e.mul(ZSqrt2::UNIT);
    }
    let e = minimize_y(e);
    let v = e.y.unsigned_abs() as u64;
    let mut u = e.x.abs() as i64;
    if l % 8 == 1 && u.rem_euclid(4) != 1 {
        u = -u;
    }
    debug_assert_eq!((u as i128) * (u as i128) - 2 * (v as i128) * (v as i128), l as i128);
    Ok(RepUV { u, v, l })
}

/// All representations `l = u² − 2v²` with `u, v > 0` in the first `count` unit-orbit steps.
pub fn rep_u2_2v2_orbit(l: u64, count: usize) -> Result<Vec<RepUV>> {
    let r = rep_u2_2v2(l)?;
    let eps = ZSqrt2 { x: 3, y: 2 };
    let mut out = Vec::new();
    for base in [ZSqrt2 { x: r.u as i128, y: r.v as i128 }, ZSqrt2 { x: r.u as i128, y: -(r.v as i128) }] {
        let mut e = base;
        for _ in 0..count {
            let rep = RepUV { u: e.x.abs() as i64, v: e.y.unsigned_abs() as u64, l };
            if rep.v > 0 && !out.contains(&rep) {
                out.push(rep);
            }
            e = e.mul(eps);
            if e.x.abs() > i64::MAX as i128 / 4 {
                break;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieve_small() {
        assert_eq!(sieve_primes(10).unwrap(), vec![2, 3, 5, 7]);
        assert_eq!(sieve_primes(2).unwrap(), vec![2]);
        assert!(matches!(sieve_primes(SIEVE_BUDGET + 1), Err(TmodError::Capacity { .. })));
    }

    #[test]
    fn sieve_count_matches_primality() {
        let ps = sieve_primes(1_000_000).unwrap();
        assert_eq!(ps.len(), 78498);
        let naive = (0..20_000u64).filter(|&n| n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)).count();
        assert_eq!(ps.iter().filter(|&&p| p < 20_000).count(), naive);
    }

    #[test]
    fn squarefree() {
        assert_eq!(squarefree_factor(105).unwrap().factors, vec![(3, 1), (5, 1), (7, 1)]);
        assert_eq!(squarefree_factor(12), Err(TmodError::NotSquarefree(12)));
        let f = squarefree_factor(-446).unwrap();
        assert!(f.is_negative());
        assert_eq!(f.factors, vec![(2, 1), (223, 1)]);
    }

    #[test]
    fn jacobi_examples() {
        assert_eq!(jacobi_additive(2, 7).unwrap(), 0);
        assert_eq!(jacobi_additive(1, 35).unwrap(), 0);
        assert_eq!(jacobi_additive(3, 35).unwrap(), 0);
        assert!(jacobi_additive(5, 35).is_err());
        for n in (3..200u64).step_by(2) {
            for a in -50i64..50 {
                let brute: i8 = factor_u64(n)
                    .iter()
                    .map(|&(p, e)| {
                        let r = modi(a as i128, p);
                        let l = if r == 0 {
                            0
                        } else if (1..p).any(|x| x * x % p == r) {
                            1
                        } else {
                            -1
                        };
                        if e % 2 == 0 && l != 0 {
                            1
                        } else {
                            l
                        }
                    })
                    .product();
                assert_eq!(jacobi(a, n), brute, "({a}/{n})");
            }
        }
    }

    #[test]
    fn quartic_examples() {
        assert_eq!(quartic_symbol(4, 17).unwrap(), 1);
        assert_eq!(quartic_symbol(1, 41).unwrap(), 1);
        assert_eq!(quartic_symbol(13, 17).unwrap(), 1);
        assert_eq!(quartic_symbol(2, 17).unwrap(), -1);
        assert!(matches!(quartic_symbol(3, 17), Err(TmodError::NotQuadraticResidue { .. })));
    }

    #[test]
    fn tonelli() {
        for p in sieve_primes(2000).unwrap().into_iter().skip(1) {
            for a in 1..p.min(60) {
                if let Some(r) = sqrt_mod_prime(a, p) {
                    assert_eq!(r * r % p, a);
                } else {
                    assert_eq!(jacobi(a as i64, p), -1);
                }
            }
        }
    }

    #[test]
    fn rep_examples() {
        assert_eq!(rep_2g2_h2(17).unwrap(), Rep2GH { g: 3, h: 1, m: 17 });
        assert_eq!(rep_2g2_h2(7).unwrap(), Rep2GH { g: 2, h: 1, m: 7 });
        assert_eq!(rep_2g2_h2(2).unwrap(), Rep2GH { g: 3, h: 4, m: 2 });
        assert!(rep_2g2_h2(15).is_err());
        assert_eq!(rep_u2_2v2(7).unwrap(), RepUV { u: 3, v: 1, l: 7 });
        assert_eq!(rep_u2_2v2(17).unwrap(), RepUV { u: 5, v: 2, l: 17 });
        assert_eq!(rep_u2_2v2(23).unwrap(), RepUV { u: 5, v: 1, l: 23 });
    }

    #[test]
    fn lattice_fallback_agrees_with_equation() {
        for m in [7u64, 14, 17, 23, 34, 119, 161, 7 * 17 * 23, 2 * 31 * 41] {
            let r = rep_2g2_h2_lattice(m).unwrap();
            assert_eq!(2 * r.g * r.g - r.h * r.h, m);
            assert_eq!(r.g.gcd(&r.h), 1);
            let s = rep_2g2_h2_capped(m, 0).unwrap();
            assert_eq!(2 * s.g * s.g - s.h * s.h, m);
        }
    }

    #[test]
    fn uv_minimal_matches_brute_force() {
        for l in sieve_primes(5000).unwrap() {
            if l % 8 != 1 && l % 8 != 7 {
                continue;
            }
            let r = rep_u2_2v2(l).unwrap();
            assert_eq!(r.u as i128 * r.u as i128 - 2 * (r.v as i128).pow(2), l as i128);
            let vmin = (1u64..).find(|&v| is_square(l as u128 + 2 * (v as u128).pow(2)).is_some()).unwrap();
            assert_eq!(r.v, vmin, "l={l}");
            if l % 8 == 1 {
                assert_eq!(r.u.rem_euclid(4), 1);
            }
        }
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn jacobi_reciprocity(m in (1u64..200_000).prop_map(|x| 2 * x + 1), n in (1u64..200_000).prop_map(|x| 2 * x + 1)) {
            let (a, b) = (jacobi(m as i64, n), jacobi(n as i64, m));
            if a == 0 {
                prop_assert_eq!(b, 0);
            } else {
                let sign = if m % 4 == 3 && n % 4 == 3 { -1 } else { 1 };
                prop_assert_eq!(a * b, sign);
            }
        }

        #[test]
        fn jacobi_multiplicative(a in -100_000i64..100_000, b in -100_000i64..100_000, n in (1u64..50_000).prop_map(|x| 2 * x + 1)) {
            prop_assert_eq!(jacobi(a * b, n), jacobi(a, n) * jacobi(b, n));
        }

        #[test]
        fn jacobi_supplements(n in (1u64..1_000_000).prop_map(|x| 2 * x + 1)) {
            prop_assert_eq!(jacobi(-1, n), if n % 4 == 1 { 1 } else { -1 });
            prop_assert_eq!(jacobi(2, n), if n % 8 == 1 || n % 8 == 7 { 1 } else { -1 });
        }

        #[test]
        fn euler_criterion(a in 1u64..1_000_000, i in 1usize..2000) {
            let primes = sieve_primes(20_000).unwrap();
            let p = primes[i];
            let e = powmod(a % p, (p - 1) / 2, p);
            let expected = if a % p == 0 { 0 } else if e == 1 { 1 } else { -1 };
            prop_assert_eq!(jacobi(a as i64, p), expected);
        }
    }
}
