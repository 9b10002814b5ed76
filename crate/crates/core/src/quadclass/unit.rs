use super::QuadElem;
use crate::arith::{isqrt, mulmod};
use crate::error::{Result, TmodError};
use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Fundamental unit of `Q(√m)`, `m > 1`, through the continued fraction of `ω` or `√m`.
#[derive(Debug, Clone)]
pub struct FundUnit {
    pub m: i64,
    pub period: usize,
    pub norm: i8,
    /// `ε = (x + y√m)/2` when true, `ε = x + y√m` otherwise.
    pub half: bool,
    quotients: Vec<u64>,
    exact: Option<(BigInt, BigInt)>,
}

impl FundUnit {
    /// Period length up to which exact coordinates are kept.
    pub const EXACT_PERIOD_CAP: usize = 4096;

    pub fn quotients(&self) -> &[u64] {
        &self.quotients
    }

    /// Last convergent `(p, q)` reduced modulo `modulus`.
    fn convergent_mod(&self, modulus: u64) -> (u64, u64) {
        let (mut p0, mut p1) = (1u64 % modulus, 0u64);
        let (mut q0, mut q1) = (0u64, 1u64 % modulus);
        // p_{-1} = 1, p_{-2} = 0; q_{-1} = 0, q_{-2} = 1
        for &a in &self.quotients {
            let a = a % modulus;
            let p = (mulmod(a, p0, modulus) + p1) % modulus;
            let q = (mulmod(a, q0, modulus) + q1) % modulus;
            p1 = p0;
            p0 = p;
            q1 = q0;
            q0 = q;
        }
        (p0, q0)
    }

    fn convergent_wrapping(&self) -> (u64, u64) {
        let (mut p0, mut p1) = (1u64, 0u64);
        let (mut q0, mut q1) = (0u64, 1u64);
        for &a in &self.quotients {
            let p = a.wrapping_mul(p0).wrapping_add(p1);
            let q = a.wrapping_mul(q0).wrapping_add(q1);
            p1 = p0;
            p0 = p;
            q1 = q0;
            q0 = q;
        }
        (p0, q0)
    }

    fn convergent_exact(&self) -> (BigInt, BigInt) {
        let (mut p0, mut p1) = (BigInt::one(), BigInt::zero());
        let (mut q0, mut q1) = (BigInt::zero(), BigInt::one());
        for &a in &self.quotients {
            let p = &p0 * a + &p1;
            let q = &q0 * a + &q1;
            p1 = std::mem::replace(&mut p0, p);
            q1 = std::mem::replace(&mut q0, q);
        }
        (p0, q0)
    }

    fn xy_from_pq(&self, p: BigInt, q: BigInt) -> (BigInt, BigInt) {
        if self.half {
            (p * 2 - &q, q)
        } else {
            (p, q)
        }
    }

    /// Exact `(x, y)`; computed on demand when the period is long.
    pub fn exact(&self) -> (BigInt, BigInt) {
        match &self.exact {
            Some(e) => e.clone(),
            None => {
                let (p, q) = self.convergent_exact();
                self.xy_from_pq(p, q)
            }
        }
    }

    pub fn elem(&self) -> QuadElem {
        let (x, y) = self.exact();
        if self.half {
            QuadElem { x, y }
        } else {
            QuadElem { x: x * 2, y: y * 2 }
        }
    }

    fn convergent_big(&self, modulus: &BigInt) -> (BigInt, BigInt) {
        let (mut p0, mut p1) = (BigInt::one() % modulus, BigInt::zero());
        let (mut q0, mut q1) = (BigInt::zero(), BigInt::one() % modulus);
        for &a in &self.quotients {
            let p = (&p0 * a + &p1) % modulus;
            let q = (&q0 * a + &q1) % modulus;
            p1 = std::mem::replace(&mut p0, p);
            q1 = std::mem::replace(&mut q0, q);
        }
        (p0, q0)
    }

    /// Coordinates `(u, v)` of `ε = u + vω` modulo a big modulus, both in `[0, modulus)`.
    pub fn omega_coords_big(&self, disc: i64, modulus: &BigInt) -> (BigInt, BigInt) {
        use num_integer::Integer;
        if let Some(e) = &self.exact {
            let (u, v) = QuadElem { x: if self.half { e.0.clone() } else { &e.0 * 2 }, y: if self.half { e.1.clone() } else { &e.1 * 2 } }
                .to_omega(disc);
            return (u.mod_floor(modulus), v.mod_floor(modulus));
        }
        let m2 = modulus * 2;
        let (p, q) = self.convergent_big(&m2);
        let (x, y): (BigInt, BigInt) = if self.half { ((BigInt::from(2) * &p - &q).mod_floor(&m2), q) } else { (p, q) };
        if self.half {
            let num = (&x - &y * disc).mod_floor(&m2);
            ((num / 2u32).mod_floor(modulus), y.mod_floor(modulus))
        } else {
            ((&x - &y * (2 * self.m)).mod_floor(modulus), y.mod_floor(modulus))
        }
    }

    /// `(x, y)` modulo `2^64`.
    pub fn xy_wrapping(&self) -> (u64, u64) {
        let (p, q) = self.convergent_wrapping();
        if self.half {
            (p.wrapping_mul(2).wrapping_sub(q), q)
        } else {
            (p, q)
        }
    }

    /// `(x, y)` modulo an arbitrary modulus.
    pub fn xy_mod(&self, modulus: u64) -> (u64, u64) {
        let (p, q) = self.convergent_mod(modulus);
        if self.half {
            ((mulmod(2, p, modulus) + modulus - q) % modulus, q)
        } else {
            (p, q)
        }
    }

    /// Coordinates `(u, v)` of `ε = u + vω`, `ω = (D + √D)/2`, modulo `modulus`.
    pub fn omega_coords_mod(&self, disc: i64, modulus: u64) -> (u64, u64) {
        let (x, y) = self.xy_mod(modulus);
        let dm = crate::arith::modi(disc as i128, modulus);
        if self.half {
            // u = (x − yD)/2
            let num = (x + modulus - mulmod(y, dm, modulus)) % modulus;
            let u = if modulus % 2 == 1 {
                mulmod(num, modulus.div_ceil(2), modulus)
            } else {
                // exact halving of the true integer; recompute with doubled modulus
                let m2 = modulus.checked_mul(2).expect("modulus too large for halving");
                let (x2, y2) = self.xy_mod(m2);
                let d2 = crate::arith::modi(disc as i128, m2);
                ((x2 + m2 - mulmod(y2, d2, m2)) % m2) / 2
            };
            (u, y)
        } else {
            // ε = x + y√m = (x − 2my) + yω with D = 4m
            let m2 = mulmod(2 % modulus, crate::arith::modi(self.m as i128, modulus), modulus);
            ((x + modulus - mulmod(m2, y, modulus)) % modulus, y)
        }
    }

    /// `ε = a + b√m` modulo `2^64` with integral `a, b`; `None` when `ε` is half-integral.
    pub fn ab_wrapping(&self) -> Option<(u64, u64)> {
        let (x, y) = self.xy_wrapping();
        if !self.half {
            return Some((x, y));
        }
        if x & 1 == 1 {
            return None;
        }
        // halves are exact modulo 2^63
        Some((x >> 1, y >> 1))
    }

    /// 2-adic valuations of `(a, b)` in `ε = a + b√m`; `None` when `ε` is half-integral.
    pub fn nu2_ab(&self) -> Result<Option<(u32, u32)>> {
        let (x, y) = self.xy_wrapping();
        let shift = if self.half {
            if x & 1 == 1 {
                return Ok(None);
            }
            1
        } else {
            0
        };
        if x == 0 || y == 0 {
            return Err(TmodError::Precision { bits: 64, what: "2-adic valuation of a unit coordinate" });
        }
        Ok(Some((x.trailing_zeros() - shift, y.trailing_zeros() - shift)))
    }
}

/// Continued-fraction expansion of `(P0 + √m)/Q0`.
pub fn fundamental_unit(m: i64) -> Result<FundUnit> {
    if m < 2 {
        return Err(TmodError::Invalid(format!("no fundamental unit for m = {m}")));
    }
    let d = m as i128;
    let s = isqrt(m as u128) as i128;
    if s * s == d {
        return Err(TmodError::Invalid(format!("{m} is a square")));
    }
    let half = m % 4 == 1;
    let (p0, q0): (i128, i128) = if half { (1, 2) } else { (0, 1) };
    let (mut pp, mut qq) = (p0, q0);
    let mut quotients = Vec::new();
    loop {
        let a = (pp + s).div_euclid(qq);
        quotients.push(a as u64);
        let np = a * qq - pp;
        let nq = (d - np * np) / qq;
        pp = np;
        qq = nq;
        if qq == q0 {
            break;
        }
        if quotients.len() > 50_000_000 {
            return Err(TmodError::Capacity { bound: m as u64, budget: 50_000_000 });
        }
    }
    let period = quotients.len();
    let norm = if period % 2 == 0 { 1 } else { -1 };
    let mut u = FundUnit { m, period, norm, half, quotients, exact: None };
    if period <= FundUnit::EXACT_PERIOD_CAP {
        u.exact = Some(u.exact());
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_units() {
        let u = fundamental_unit(7).unwrap();
        assert_eq!(u.exact(), (BigInt::from(8), BigInt::from(3)));
        assert_eq!(u.norm, 1);
        let u = fundamental_unit(17).unwrap();
        assert_eq!(u.exact(), (BigInt::from(8), BigInt::from(2)));
        assert_eq!(u.norm, -1);
        assert_eq!(u.ab_wrapping(), Some((4, 1)));
        assert_eq!(u.nu2_ab().unwrap(), Some((2, 0)));
        assert_eq!(fundamental_unit(7).unwrap().nu2_ab().unwrap(), Some((3, 0)));
        let u = fundamental_unit(5).unwrap();
        assert_eq!(u.exact(), (BigInt::from(1), BigInt::from(1)));
        let u = fundamental_unit(2).unwrap();
        assert_eq!(u.exact(), (BigInt::from(1), BigInt::from(1)));
        let u = fundamental_unit(13).unwrap();
        assert_eq!(u.exact(), (BigInt::from(3), BigInt::from(1)));
        let u = fundamental_unit(94).unwrap();
        assert_eq!(u.exact(), (BigInt::from(2143295), BigInt::from(221064)));
    }

    #[test]
    fn norms_are_units() {
        for m in 2..600i64 {
            if crate::arith::factor_u64(m as u64).iter().any(|f| f.1 > 1) {
                continue;
            }
            let u = fundamental_unit(m).unwrap();
            let e = u.elem();
            assert_eq!(e.norm(m), BigInt::from(u.norm), "m={m}");
            let (x, y) = u.xy_mod(1_000_003);
            let (bx, by) = u.exact();
            let md = BigInt::from(1_000_003u64);
            assert_eq!(BigInt::from(x), ((bx % &md) + &md) % &md);
            assert_eq!(BigInt::from(y), ((by % &md) + &md) % &md);
        }
    }

    #[test]
    fn big_coords_without_exact() {
        for m in [5i64, 17, 7, 94, 229] {
            let disc = if m % 4 == 1 { m } else { 4 * m };
            let u = fundamental_unit(m).unwrap();
            let mut lazy = u.clone();
            lazy.exact = None;
            for md in [BigInt::from(1u64 << 40), BigInt::from(3u64).pow(30)] {
                assert_eq!(u.omega_coords_big(disc, &md), lazy.omega_coords_big(disc, &md), "m={m}");
            }
        }
    }

    #[test]
    fn omega_coords() {
        for m in [5i64, 13, 17, 21, 2, 3, 7, 94] {
            let disc = if m % 4 == 1 { m } else { 4 * m };
            let u = fundamental_unit(m).unwrap();
            let (bu, bv) = u.elem().to_omega(disc);
            for md in [1_000_003u64, 1 << 20, 81] {
                let (cu, cv) = u.omega_coords_mod(disc, md);
                let bm = BigInt::from(md);
                assert_eq!(BigInt::from(cu), ((&bu % &bm) + &bm) % &bm, "m={m} md={md}");
                assert_eq!(BigInt::from(cv), ((&bv % &bm) + &bm) % &bm);
            }
        }
    }
}
