//! Rank formulas, Rédei matrices, the Coates order and the prime-family classifiers.
#![allow(non_snake_case)]

mod redei;
mod report;

pub use redei::{
    fast_path_legal, redei_fast_path, redei_matrix_T2, redei_matrix_T2_with_two, redei_matrix_classgroup, rk4_K2_matrix,
    rk4_T2, rk4_T2_full, KummerElem, KummerTag, RedeiGenerator, RedeiMatrix,
};
pub use report::{Method, Tagged, TpReport, TP_REPORT_HEADER};

use crate::arith::{factor_u64, jacobi, quartic_symbol, rep_2g2_h2, rep_u2_2v2, rep_u2_2v2_orbit, val_p, Spf};
use crate::error::{Result, TmodError};
use crate::linalg::F2Mat;
use crate::localsym::tame_symbol;
use crate::padic::{regulator_valuation_from, HalfVal, DEFAULT_PREC};
use crate::quadclass::{
    fundamental_unit, frak_p_order_and_pi, narrow_class_number_real, BQForm, ClassGroup, FundUnit, NarrowClassGroup,
    QuadField, Splitting,
};
use num_bigint::BigInt;
use num_integer::Integer;

/// Norm conditions for `Q(√±m)`, `m > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormCriteria {
    /// `2 ∈ N(Q(√m))`, equivalently `2 ∈ N(Q(√−m))`.
    pub two: bool,
    /// `−2 ∈ N(Q(√m))`.
    pub minus_two: bool,
    /// `−1 ∈ N(Q(√m))`.
    pub minus_one: bool,
}

pub fn norm_criteria(m: u64) -> NormCriteria {
    let qs: Vec<u64> = factor_u64(m).into_iter().map(|f| f.0).filter(|&q| q != 2).collect();
    NormCriteria {
        two: qs.iter().all(|q| q % 8 == 1 || q % 8 == 7),
        minus_two: qs.iter().all(|q| q % 8 == 1 || q % 8 == 3),
        minus_one: qs.iter().all(|q| q % 4 == 1),
    }
}

/// `rk₂ 𝒯₂(Q(√m))`: `t`, or `t − 1` when some odd `q | m` is `±3 mod 8`.
pub fn rk2_T2(field: &QuadField) -> usize {
    if field.all_odd_pm1() {
        field.t()
    } else {
        field.t() - 1
    }
}

/// `rk₂ 𝒯₂ = #S + rk₂(Cl⁺/⟨[𝔭] : 𝔭 | 2⟩) − 1` from class-group data.
pub fn rk2_T2_via_narrow_S(field: &QuadField, spf: Option<&Spf>) -> Result<usize> {
    let s = if field.two == Splitting::Split { 2 } else { 1 };
    let (rk, dyadic_in_squares) = if field.is_imaginary() {
        let cg = ClassGroup::new(field.disc)?;
        let rk = cg.structure().rank_divisible(2);
        let inside = match field.two {
            Splitting::Inert => true,
            _ => {
                let i = cg.index_of(&BQForm::prime_form(field.disc, 2).expect("2 not inert"));
                (0..cg.h()).any(|j| cg.mul(j, j) == i)
            }
        };
        (rk, inside)
    } else {
        let g = NarrowClassGroup::new(field.disc, spf)?;
        let rk = g.rank2() as usize;
        let inside = match field.two {
            Splitting::Inert => true,
            _ => {
                let c = g.class_of(&BQForm::prime_form(field.disc, 2).expect("2 not inert"));
                g.squares().contains(&c)
            }
        };
        (rk, inside)
    };
    let quotient = if dyadic_in_squares { rk } else { rk - 1 };
    Ok(s + quotient - 1)
}

/// `β = ([√−m, π]_{𝔮_i})_i` for `F = Q(√−m)`, `m ≡ 7 mod 8`.
pub fn beta_column(field: &QuadField) -> Result<F2Mat> {
    if field.two != Splitting::Split || !field.is_imaginary() {
        return Err(TmodError::Invalid("β needs an imaginary field where 2 splits".into()));
    }
    let fp = frak_p_order_and_pi(field)?;
    let mut col = F2Mat::zeros(field.t(), 1);
    for (i, &q) in field.odd_primes.iter().enumerate() {
        let qb = BigInt::from(q);
        let r = (&fp.pi.x * BigInt::from(q.div_ceil(2))).mod_floor(&qb);
        let r: u64 = r.try_into().expect("residue fits");
        col.set(i, 0, tame_symbol(q, (1, 1), (0, r)));
    }
    Ok(col)
}

/// `ν_p(t_p(F))` for real `F` by the Coates formula; requires Leopoldt, which holds here.
pub fn coates_order_valuation(field: &QuadField, p: u64) -> Result<i64> {
    let eps = fundamental_unit(field.m)?;
    coates_with_unit(field, p, &eps, None)
}

pub fn coates_with_unit(field: &QuadField, p: u64, eps: &FundUnit, spf: Option<&Spf>) -> Result<i64> {
    coates_with_unit_prec(field, p, eps, spf, DEFAULT_PREC)
}

/// As [`coates_with_unit`], with the p-adic logarithm starting at `prec` digits.
pub fn coates_with_unit_prec(field: &QuadField, p: u64, eps: &FundUnit, spf: Option<&Spf>, prec: u32) -> Result<i64> {
    if field.is_imaginary() {
        return Err(TmodError::Invalid("Coates formula needs a real field".into()));
    }
    let (_, h) = narrow_class_number_real(field.m, spf)?;
    let reg = regulator_valuation_from(field, p, eps, prec)?;
    let cyc = (p == 2 && field.m == 2) as i64;
    let nu_h = val_p(h as u128, p) as i64;
    let nu_d = val_p(field.disc.unsigned_abs() as u128, p) as i64;
    let nu_norms = match field.splitting(p) {
        Splitting::Ramified => 1,
        _ => 2,
    };
    let doubled = 2 * (1 + cyc + nu_h - nu_norms) + reg.0 - nu_d;
    let v = HalfVal(doubled);
    if !v.is_integral() || v.0 < 0 {
        return Err(TmodError::Internal(format!("Coates valuation {v} for m = {}", field.m)));
    }
    Ok(v.0 / 2)
}

/// A 2-power order known exactly, bounded below, or left to computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderTag {
    Exact(u64),
    AtLeast(u64),
    Compute,
}

impl OrderTag {
    /// Whether a computed order is consistent with the tag.
    pub fn admits(self, order: u64) -> bool {
        match self {
            OrderTag::Exact(n) => order == n,
            OrderTag::AtLeast(n) => order >= n,
            OrderTag::Compute => true,
        }
    }
}

impl std::fmt::Display for OrderTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OrderTag::Exact(n) => write!(f, "{n}"),
            OrderTag::AtLeast(n) => write!(f, ">={n}"),
            OrderTag::Compute => write!(f, "compute"),
        }
    }
}

fn require_pm1_prime(l: u64) -> Result<()> {
    if !crate::arith::is_prime(l) || (l % 8 != 1 && l % 8 != 7) {
        return Err(TmodError::Invalid(format!("{l} is not a prime ≡ ±1 mod 8")));
    }
    Ok(())
}

/// `(t₂(−l), t₂(−2l))` from congruences.
pub fn classify_imaginary_prime_family(l: u64) -> Result<(OrderTag, OrderTag)> {
    require_pm1_prime(l)?;
    Ok(match l % 16 {
        7 | 15 => (OrderTag::Exact(2), OrderTag::Exact(2)),
        9 => (OrderTag::Exact(4), OrderTag::Exact(2)),
        _ => (OrderTag::AtLeast(8), OrderTag::AtLeast(4)),
    })
}

/// Tags for `t₂(l)`, `t₂(2l)` and `h₂` of `Q(√−l)` (`l ≡ 1 mod 8`) or `Q(√−2l)` (`l ≡ 7 mod 8`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RealFamilyTags {
    pub t2_l: OrderTag,
    pub t2_2l: OrderTag,
    pub h2_imag: OrderTag,
}

pub fn classify_real_prime_family(l: u64) -> Result<RealFamilyTags> {
    require_pm1_prime(l)?;
    if l % 8 == 7 {
        if l % 16 == 7 {
            return Ok(RealFamilyTags {
                t2_l: OrderTag::Exact(4),
                t2_2l: OrderTag::Exact(2),
                h2_imag: OrderTag::Exact(4),
            });
        }
        let r = rep_u2_2v2(l)?;
        let sign = if ((l + 1) / 16).is_multiple_of(2) { 1 } else { -1 };
        let s = sign * jacobi(2 * r.u, r.v) as i32;
        return Ok(if s == -1 {
            RealFamilyTags { t2_l: OrderTag::Exact(8), t2_2l: OrderTag::Exact(4), h2_imag: OrderTag::Exact(8) }
        } else {
            RealFamilyTags { t2_l: OrderTag::AtLeast(16), t2_2l: OrderTag::AtLeast(8), h2_imag: OrderTag::AtLeast(16) }
        });
    }
    let sign = if ((l - 1) / 8).is_multiple_of(2) { 1 } else { -1 };
    let gh = rep_2g2_h2(l)?;
    let (t2_l, h2_imag) = if gh.g % 4 == 3 {
        (OrderTag::Exact(2), OrderTag::Exact(4))
    } else {
        let s = sign * jacobi(2 * gh.h as i64, gh.g) as i32 * quartic_symbol(gh.g as i64, l)? as i32;
        if s == -1 {
            let h2 = if l % 16 == 1 { OrderTag::Exact(8) } else { OrderTag::AtLeast(16) };
            (OrderTag::Exact(4), h2)
        } else {
            (OrderTag::AtLeast(8), OrderTag::AtLeast(8))
        }
    };
    let u = rep_u2_2v2_orbit(l, 8)?
        .into_iter()
        .filter(|r| r.u % 4 == 1)
        .map(|r| r.u)
        .min()
        .ok_or(TmodError::NoRepresentation(l as i64))?;
    let t2_2l = if jacobi(u, l) == -1 {
        OrderTag::Exact(2)
    } else if sign * quartic_symbol(u, l)? as i32 == -1 {
        OrderTag::Exact(4)
    } else {
        OrderTag::AtLeast(8)
    };
    Ok(RealFamilyTags { t2_l, t2_2l, h2_imag })
}

/// `ν₂(t₂(l)) = ν₂(a_l) − 1` with `ε_l = a_l + b_l√l`, for `l ≡ ±1 mod 8`.
pub fn nu2_t2_l_from_unit(eps: &FundUnit) -> Result<i64> {
    let (na, _) = eps.nu2_ab()?.ok_or_else(|| TmodError::Invalid(format!("ε of Q(√{}) is half-integral", eps.m)))?;
    Ok(na as i64 - 1)
}

/// `ν₂(t₂(2l)) = ν₂(h(2l)) + ν₂(b_{2l}) − 1`.
pub fn nu2_t2_2l_from_unit(eps: &FundUnit, h: usize) -> Result<i64> {
    let (_, nb) = eps.nu2_ab()?.ok_or_else(|| TmodError::Invalid(format!("ε of Q(√{}) is half-integral", eps.m)))?;
    Ok(val_p(h as u128, 2) as i64 + nb as i64 - 1)
}

/// `(t₂(l), 2·t₂(2l), h₂(−2l))` for a prime `l ≡ 7 mod 8`.
pub fn real_prime_triple(l: u64) -> Result<(u64, u64, u64)> {
    if l % 8 != 7 {
        return Err(TmodError::Invalid(format!("{l} is not 7 mod 8")));
    }
    let t_l = coates_order_valuation(&QuadField::new(l as i64)?, 2)?;
    let t_2l = coates_order_valuation(&QuadField::new(2 * l as i64)?, 2)?;
    let h = ClassGroup::new(-8 * l as i64)?.h() as u128;
    Ok((1 << t_l, 2 << t_2l, 1 << val_p(h, 2)))
}

/// `t₂(l) ≡ 2t₂(2l) ≡ h₂(−2l) mod 16`.
pub fn congruence_identity_check(l: u64) -> bool {
    match real_prime_triple(l) {
        Ok((a, b, c)) => a % 16 == b % 16 && b % 16 == c % 16,
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests;
