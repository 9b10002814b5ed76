//! Finite-precision arithmetic in `Q_p` and in `O_F ⊗ Z_p` for quadratic `F`.

use crate::arith::{sqrt_mod_prime, val_p};
use crate::error::{Result, TmodError};
use crate::quadclass::{two_adic_sqrt, FundUnit, QuadField, Splitting};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use std::fmt;

/// A valuation in `½Z`, stored doubled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfVal(pub i64);

impl HalfVal {
    pub fn int(n: i64) -> Self {
        HalfVal(2 * n)
    }

    pub fn is_integral(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl fmt::Display for HalfVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PadicField {
    Qp,
    Unramified,
    Ramified,
}

/// `u + vω` modulo `p^prec`, with `ω = (D + √D)/2`; `v = 0` over `Q_p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicElem {
    pub p: u64,
    pub field: PadicField,
    pub disc: i64,
    pub u: BigInt,
    pub v: BigInt,
    pub prec: u32,
}

pub const DEFAULT_PREC: u32 = 64;
pub const MAX_PREC: u32 = 1024;

impl PadicElem {
    pub fn modulus(&self) -> BigInt {
        BigInt::from(self.p).pow(self.prec)
    }

    pub fn rational(p: u64, x: &BigInt, prec: u32) -> Self {
        let md = BigInt::from(p).pow(prec);
        PadicElem { p, field: PadicField::Qp, disc: 0, u: x.mod_floor(&md), v: BigInt::zero(), prec }
    }

    pub fn quadratic(p: u64, field: PadicField, disc: i64, u: &BigInt, v: &BigInt, prec: u32) -> Self {
        let md = BigInt::from(p).pow(prec);
        PadicElem { p, field, disc, u: u.mod_floor(&md), v: v.mod_floor(&md), prec }
    }

    fn like(&self, u: BigInt, v: BigInt) -> Self {
        let md = self.modulus();
        PadicElem { u: u.mod_floor(&md), v: v.mod_floor(&md), ..self.clone() }
    }

    pub fn one_like(&self) -> Self {
        self.like(BigInt::one(), BigInt::zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        self.like(&self.u + &o.u, &self.v + &o.v)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.like(&self.u - &o.u, &self.v - &o.v)
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.field == PadicField::Qp {
            return self.like(&self.u * &o.u, BigInt::zero());
        }
        // ω² = Dω − e, e = (D² − D)/4
        let d = self.disc as i128;
        let e = BigInt::from((d * d - d) / 4);
        let vv = &self.v * &o.v;
        let u = &self.u * &o.u - &vv * &e;
        let v = &self.u * &o.v + &self.v * &o.u + vv * self.disc;
        self.like(u, v)
    }

    pub fn pow(&self, mut k: u64) -> Self {
        let mut acc = self.one_like();
        let mut b = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            k >>= 1;
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.u.is_zero() && self.v.is_zero()
    }

    /// Norm to `Q_p`, modulo `p^prec`.
    pub fn norm(&self) -> BigInt {
        if self.field == PadicField::Qp {
            return self.u.clone();
        }
        let d = self.disc as i128;
        let e = BigInt::from((d * d - d) / 4);
        (&self.u * &self.u + &self.u * &self.v * self.disc + &self.v * &self.v * e).mod_floor(&self.modulus())
    }

    /// Normalized valuation `ν(p) = 1`; `None` when the element vanishes to the working precision.
    pub fn valuation(&self) -> Option<HalfVal> {
        let vp = |x: &BigInt| -> Option<u32> {
            if x.is_zero() {
                None
            } else {
                let mut n = x.clone();
                let mut c = 0;
                let pb = BigInt::from(self.p);
                while (&n % &pb).is_zero() {
                    n /= &pb;
                    c += 1;
                }
                Some(c)
            }
        };
        match self.field {
            PadicField::Qp => vp(&self.u).map(|c| HalfVal::int(c as i64)),
            _ => vp(&self.norm()).map(|c| HalfVal(c as i64)),
        }
    }

    /// Divides by `p^k`, losing `k` digits of precision.
    fn div_p_pow(&self, k: u32) -> Self {
        if k == 0 {
            return self.clone();
        }
        let pk = BigInt::from(self.p).pow(k);
        debug_assert!((&self.u % &pk).is_zero() && (&self.v % &pk).is_zero());
        PadicElem { u: &self.u / &pk, v: &self.v / &pk, prec: self.prec - k, ..self.clone() }
    }

    fn reduce_prec(&self, prec: u32) -> Self {
        let md = BigInt::from(self.p).pow(prec);
        PadicElem { u: self.u.mod_floor(&md), v: self.v.mod_floor(&md), prec, ..self.clone() }
    }

    fn scale(&self, c: &BigInt) -> Self {
        self.like(&self.u * c, &self.v * c)
    }
}

/// `log x` by its power series around 1; needs `ν(x − 1) > 1/(p − 1)`.
pub fn padic_log(x: &PadicElem) -> Result<PadicElem> {
    let z = x.sub(&x.one_like());
    let Some(h) = z.valuation() else {
        return Ok(PadicElem { u: BigInt::zero(), v: BigInt::zero(), ..x.clone() });
    };
    let p = x.p;
    if h.0 * (p as i64 - 1) <= 2 {
        return Err(TmodError::Invalid("log series does not converge".into()));
    }
    let prec = x.prec;
    let logp = |n: u64| (n as f64).ln() / (p as f64).ln();
    // last term index: n·ν(z) − log_p n ≥ prec for all larger n
    let mut nmax = 1u64;
    while (nmax as f64) * h.as_f64() - logp(nmax) < prec as f64 + 1.0 {
        nmax += 1;
    }
    let vmax = (1..=nmax).map(|n| val_p(n as u128, p)).max().unwrap_or(0);
    if vmax >= prec {
        return Err(TmodError::Precision { bits: prec, what: "log series" });
    }
    let out_prec = prec - vmax;
    let md = BigInt::from(p).pow(out_prec);
    let mut acc = PadicElem { u: BigInt::zero(), v: BigInt::zero(), ..x.clone() }.reduce_prec(out_prec);
    let mut zn = z.clone();
    for n in 1..=nmax {
        let vn = val_p(n as u128, p);
        let unit = BigInt::from(n / p.pow(vn));
        let inv = unit.modinv(&md).expect("unit");
        let term = zn.div_p_pow(vn).reduce_prec(out_prec).scale(&inv);
        acc = if n % 2 == 1 { acc.add(&term) } else { acc.sub(&term) };
        zn = zn.mul(&z);
    }
    Ok(acc)
}

fn qp_sqrt(a: &BigInt, p: u64, prec: u32) -> Option<BigInt> {
    if p == 2 {
        return Some(two_adic_sqrt(a, prec));
    }
    let md = BigInt::from(p).pow(prec);
    let a0 = a.mod_floor(&BigInt::from(p));
    let r0 = sqrt_mod_prime(u64::try_from(a0).ok()?, p)?;
    let r0 = r0.min(p - r0);
    let mut r = BigInt::from(r0);
    let mut modk = BigInt::from(p);
    while modk < md {
        modk = (&modk * &modk).min(md.clone());
        let inv = (&r * 2u32).modinv(&modk)?;
        r = (&r - (&r * &r - a) * inv).mod_floor(&modk);
    }
    Some(r)
}

/// The unit in the completion at one place above `p`, modulo `p^prec`.
fn unit_at_place(field: &QuadField, p: u64, eps: &FundUnit, prec: u32) -> Result<PadicElem> {
    let disc = field.disc;
    let md = BigInt::from(p).pow(prec);
    let (u, v) = eps.omega_coords_big(disc, &md);
    match field.splitting(p) {
        Splitting::Split => {
            // ω ↦ (D + s)/2 with s² = D
            let work = prec + 1;
            let s = qp_sqrt(&BigInt::from(disc), p, work)
                .ok_or_else(|| TmodError::Internal(format!("no square root of {disc} mod {p}")))?;
            let w = if p == 2 {
                (s + disc).mod_floor(&(BigInt::one() << work)) / 2u32
            } else {
                let inv2 = BigInt::from(2).modinv(&md).expect("odd p");
                (s + disc) * inv2
            };
            Ok(PadicElem::rational(p, &(u + v * w), prec))
        }
        Splitting::Inert => Ok(PadicElem::quadratic(p, PadicField::Unramified, disc, &u, &v, prec)),
        Splitting::Ramified => Ok(PadicElem::quadratic(p, PadicField::Ramified, disc, &u, &v, prec)),
    }
}

fn regulator_valuation_at(field: &QuadField, p: u64, eps: &FundUnit, prec: u32) -> Result<HalfVal> {
    let x = unit_at_place(field, p, eps, prec)?;
    let k = match field.splitting(p) {
        Splitting::Split => {
            if p == 2 {
                2
            } else {
                p - 1
            }
        }
        Splitting::Inert => p * p - 1,
        Splitting::Ramified => p - 1,
    };
    let mut y = x.pow(k);
    let mut total_vp = val_p(k as u128, p) as i64;
    loop {
        let z = y.sub(&y.one_like());
        let h = z.valuation().ok_or(TmodError::Precision { bits: prec, what: "regulator valuation" })?;
        if h.0 * (p as i64 - 1) > 2 {
            return Ok(HalfVal(h.0 - 2 * total_vp));
        }
        y = y.pow(p);
        total_vp += 1;
    }
}

/// `ν_p(log_p ε)` at a place above `p`, escalating precision as needed.
pub fn regulator_valuation(field: &QuadField, p: u64, eps: &FundUnit) -> Result<HalfVal> {
    regulator_valuation_from(field, p, eps, DEFAULT_PREC)
}

/// As [`regulator_valuation`], starting at `prec` digits.
pub fn regulator_valuation_from(field: &QuadField, p: u64, eps: &FundUnit, prec: u32) -> Result<HalfVal> {
    if field.m < 0 {
        return Err(TmodError::Invalid("regulator of an imaginary field".into()));
    }
    let mut prec = prec.clamp(8, MAX_PREC);
    loop {
        match regulator_valuation_at(field, p, eps, prec) {
            Err(TmodError::Precision { .. }) if prec < MAX_PREC => prec *= 2,
            r => return r,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadclass::fundamental_unit;

    fn reg(m: i64, p: u64) -> HalfVal {
        let f = QuadField::new(m).unwrap();
        regulator_valuation(&f, p, &fundamental_unit(m).unwrap()).unwrap()
    }

    #[test]
    fn regulator_examples() {
        assert_eq!(reg(17, 2), HalfVal::int(2));
        assert_eq!(reg(7, 2), HalfVal::int(3));
        assert_eq!(reg(2, 2), HalfVal(1));
    }

    #[test]
    fn log_basics() {
        let one = PadicElem::rational(5, &BigInt::one(), 20);
        assert!(padic_log(&one).unwrap().is_zero());
        let x = PadicElem::rational(5, &BigInt::from(6), 20);
        assert_eq!(padic_log(&x).unwrap().valuation(), Some(HalfVal::int(1)));
        assert!(padic_log(&PadicElem::rational(3, &BigInt::from(2), 20)).is_err());
    }

    #[test]
    fn log_of_unit_matches_regulator() {
        // log(ε^k) valuation minus ν(k) equals the shortcut
        for m in [17i64, 41, 73, 7, 23, 2, 3, 6, 14] {
            let f = QuadField::new(m).unwrap();
            let eps = fundamental_unit(m).unwrap();
            let x = unit_at_place(&f, 2, &eps, 80).unwrap();
            let y = x.pow(8);
            let l = padic_log(&y).unwrap();
            let v = l.valuation().unwrap();
            assert_eq!(HalfVal(v.0 - 6), reg(m, 2), "m={m}");
        }
    }

    #[test]
    fn log_is_additive() {
        let p = 3;
        for (a, b) in [(4i64, 7i64), (10, 31), (28, 55)] {
            let x = PadicElem::rational(p, &BigInt::from(a), 30);
            let y = PadicElem::rational(p, &BigInt::from(b), 30);
            let lhs = padic_log(&x.mul(&y)).unwrap();
            let rhs = padic_log(&x).unwrap().add(&padic_log(&y).unwrap());
            let md = BigInt::from(p).pow(lhs.prec.min(rhs.prec));
            assert_eq!(lhs.u.mod_floor(&md), rhs.u.mod_floor(&md));
        }
    }
}
