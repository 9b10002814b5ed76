//! Quadratic fields, binary quadratic forms, class groups and fundamental units.

mod forms;
mod imag;
mod real;
mod unit;

pub use forms::BQForm;
pub use imag::{
    class_representative_prime, form_order, frak_p_order_and_pi, prime_power_form, principal_generator,
    sqrt_disc_mod_q, two_adic_sqrt, ClassGroup, FrakP,
};
pub use real::{narrow_class_number_real, NarrowClassGroup};
pub use unit::{fundamental_unit, FundUnit};

use crate::arith::{factor_u64, kronecker_prime};
use crate::error::{Result, TmodError};
use num_bigint::BigInt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Splitting {
    Split,
    Inert,
    Ramified,
}

/// `F = Q(√m)` for a squarefree `m ≠ 0, 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadField {
    pub m: i64,
    pub disc: i64,
    /// Odd primes dividing `m`: those `≡ ±1 mod 8` first (ascending), then the rest.
    pub odd_primes: Vec<u64>,
    /// Number of odd primes `≡ ±1 mod 8`.
    pub k: usize,
    pub two: Splitting,
}

impl QuadField {
    pub fn new(m: i64) -> Result<Self> {
        if m == 0 || m == 1 {
            return Err(TmodError::Invalid(format!("Q(√{m}) is not a quadratic field")));
        }
        let fac = factor_u64(m.unsigned_abs());
        if fac.iter().any(|&(_, e)| e > 1) {
            return Err(TmodError::NotSquarefree(m));
        }
        let disc = if m.rem_euclid(4) == 1 { m } else { 4 * m };
        let (mut good, bad): (Vec<u64>, Vec<u64>) =
            fac.iter().map(|f| f.0).filter(|&p| p != 2).partition(|&q| q % 8 == 1 || q % 8 == 7);
        let k = good.len();
        good.extend(bad);
        let two = splitting_of(disc, 2);
        Ok(QuadField { m, disc, odd_primes: good, k, two })
    }

    /// Number of odd primes dividing `m`.
    pub fn t(&self) -> usize {
        self.odd_primes.len()
    }

    pub fn is_imaginary(&self) -> bool {
        self.m < 0
    }

    pub fn splitting(&self, p: u64) -> Splitting {
        splitting_of(self.disc, p)
    }

    pub fn all_odd_pm1(&self) -> bool {
        self.k == self.t()
    }
}

pub fn splitting_of(disc: i64, p: u64) -> Splitting {
    match kronecker_prime(disc, p) {
        1 => Splitting::Split,
        -1 => Splitting::Inert,
        _ => Splitting::Ramified,
    }
}

/// Field element `(x + y√m)/2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadElem {
    pub x: BigInt,
    pub y: BigInt,
}

impl QuadElem {
    /// From coordinates on `{1, ω}`, `ω = (D + √D)/2`.
    pub fn from_omega(disc: i64, u: &BigInt, v: &BigInt) -> Self {
        let x = u * 2 + v * disc;
        let y = if disc % 4 == 0 { v * 2 } else { v.clone() };
        QuadElem { x, y }
    }

    /// Coordinates `(u, v)` on `{1, ω}`.
    pub fn to_omega(&self, disc: i64) -> (BigInt, BigInt) {
        let v = if disc % 4 == 0 { &self.y / 2 } else { self.y.clone() };
        let u = (&self.x - &v * disc) / 2;
        (u, v)
    }

    pub fn norm(&self, m: i64) -> BigInt {
        (&self.x * &self.x - &self.y * &self.y * m) / 4
    }

    pub fn neg(&self) -> Self {
        QuadElem { x: -&self.x, y: -&self.y }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_data() {
        let f = QuadField::new(-105).unwrap();
        assert_eq!(f.disc, -420);
        assert_eq!(f.odd_primes, vec![7, 3, 5]);
        assert_eq!(f.k, 1);
        assert_eq!(f.two, Splitting::Ramified);
        assert_eq!(QuadField::new(-7).unwrap().two, Splitting::Split);
        assert_eq!(QuadField::new(-3).unwrap().two, Splitting::Inert);
        assert!(QuadField::new(12).is_err());
    }

    #[test]
    fn omega_round_trip() {
        for d in [-7i64, -4, -20, 5, 8, 12] {
            let e = QuadElem::from_omega(d, &BigInt::from(3), &BigInt::from(-5));
            assert_eq!(e.to_omega(d), (BigInt::from(3), BigInt::from(-5)));
        }
    }
}
