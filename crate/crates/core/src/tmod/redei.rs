use crate::arith::{jacobi_additive, rep_2g2_h2};
use crate::error::{Result, TmodError};
use crate::linalg::F2Mat;
use crate::localsym::{hilbert_additive_int, hilbert_additive_local, rational_at_ramified, tame_symbol, DyadicKind, LocalElem, Place};
use crate::quadclass::{frak_p_order_and_pi, two_adic_sqrt, QuadElem, QuadField, Splitting};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{norm_criteria, rk2_T2};

/// Kummer generators of the maximal elementary 2-extension unramified outside 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KummerTag {
    MinusOne,
    Q(u64),
    Pi,
    Alpha,
    Two,
}

#[derive(Debug, Clone)]
pub struct KummerElem {
    pub tag: KummerTag,
    pub value: QuadElem,
}

/// A component `a_v` of a generating idèle.
#[derive(Debug, Clone)]
enum Component {
    /// At the prime over an odd `q | m`, as `(valuation, residue)` for the uniformizer `√−m`.
    Odd(u64, (i64, u64)),
    /// At the dyadic place with the given embedding sign.
    Dyadic(i8, LocalElem),
}

#[derive(Debug, Clone)]
pub struct RedeiGenerator {
    pub index: usize,
    components: Vec<Component>,
}

impl RedeiGenerator {
    pub fn is_trivial(&self) -> bool {
        self.components.is_empty()
    }

    pub fn support_size(&self) -> usize {
        self.components.len()
    }
}

/// Rédei matrix with row generators and column labels.
#[derive(Debug, Clone)]
pub struct RedeiMatrix {
    pub rows: Vec<RedeiGenerator>,
    pub cols: Vec<KummerElem>,
    pub mat: F2Mat,
}

/// Completion of `Q(√−m)` at a dyadic place, with `√−m = s·θ'`.
struct Dyadic {
    kind: DyadicKind,
    split: bool,
    s: BigInt,
    bits: u32,
}

fn mask_big(x: &BigInt, bits: u32) -> BigInt {
    x.mod_floor(&(BigInt::one() << bits))
}

fn low_u64(x: &BigInt) -> u64 {
    let (_, digits) = x.to_u64_digits();
    digits.first().copied().unwrap_or(0)
}

fn odd_part_inverse_ratio(num: i64, den: i64, bits: u32) -> BigInt {
    // num/den as an odd 2-adic unit modulo 2^bits; both share the power of 2
    let (mut n, mut d) = (num, den);
    while n % 2 == 0 && d % 2 == 0 {
        n /= 2;
        d /= 2;
    }
    let md = BigInt::one() << bits;
    let dinv = BigInt::from(d).modinv(&md).expect("odd denominator");
    (BigInt::from(n) * dinv).mod_floor(&md)
}

/// Local element from 2-adic coordinates known modulo `2^bits`.
pub(crate) fn local_from_big(kind: DyadicKind, c0: &BigInt, c1: &BigInt, bits: u32) -> Result<LocalElem> {
    let c0 = mask_big(c0, bits);
    let c1 = if kind == DyadicKind::Q2 { BigInt::zero() } else { mask_big(c1, bits) };
    let tz = |x: &BigInt| x.trailing_zeros().map(|t| t as u32);
    let t = match (tz(&c0), tz(&c1)) {
        (None, None) => return Err(TmodError::Precision { bits, what: "dyadic element vanishes" }),
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (Some(a), Some(b)) => a.min(b),
    };
    let (c0, c1) = (c0 >> t, c1 >> t);
    let rem = (bits - t).min(64);
    let mut e = kind.elem(low_u64(&c0), low_u64(&c1), rem)?;
    match kind {
        DyadicKind::Q2 | DyadicKind::Unramified => e.val += t as i64,
        DyadicKind::Ramified(_) => {
            let two = kind.from_int(2)?;
            for _ in 0..t {
                e = kind.mul(e, two);
            }
        }
    }
    Ok(e)
}

impl Dyadic {
    fn new(field: &QuadField, s_split: Option<&BigInt>, bits: u32) -> Result<Self> {
        let m = -field.m;
        match field.two {
            Splitting::Split => {
                let s = s_split.cloned().unwrap_or_else(|| two_adic_sqrt(&BigInt::from(-m), bits));
                Ok(Dyadic { kind: DyadicKind::Q2, split: true, s: mask_big(&s, bits), bits })
            }
            Splitting::Inert => {
                let w = odd_part_inverse_ratio(m, 3, bits + 3);
                Ok(Dyadic { kind: DyadicKind::Unramified, split: false, s: two_adic_sqrt(&w, bits), bits })
            }
            Splitting::Ramified => {
                let kind = DyadicKind::from_radicand(-m).ok_or_else(|| TmodError::Internal(format!("radicand {}", -m)))?;
                let DyadicKind::Ramified(d) = kind else {
                    return Err(TmodError::Internal("ramified field with unramified completion".into()));
                };
                let w = odd_part_inverse_ratio(-m, d, bits + 3);
                if (&w % 8u32) != BigInt::one() {
                    return Err(TmodError::Internal(format!("{} / {d} is not a 2-adic square", -m)));
                }
                Ok(Dyadic { kind, split: false, s: two_adic_sqrt(&w, bits), bits })
            }
        }
    }

    fn signs(&self) -> &'static [i8] {
        if self.split {
            &[1, -1]
        } else {
            &[1]
        }
    }

    /// Image of `(x + y√−m)/2` under the embedding with the given sign.
    fn embed(&self, e: &QuadElem, sign: i8) -> Result<LocalElem> {
        let ys = &e.y * &self.s * BigInt::from(sign);
        let w = self.bits + 1;
        match self.kind {
            DyadicKind::Q2 => {
                let v = mask_big(&(&e.x + ys), w) >> 1;
                local_from_big(self.kind, &v, &BigInt::zero(), self.bits)
            }
            DyadicKind::Unramified => {
                // √−m = s(2ω + 1)
                let c0 = mask_big(&(&e.x + &ys), w) >> 1;
                local_from_big(self.kind, &c0, &ys, self.bits)
            }
            DyadicKind::Ramified(_) => {
                if e.x.is_odd() || e.y.is_odd() {
                    return Err(TmodError::Internal("half-integral element in a ramified field".into()));
                }
                let c0: BigInt = &e.x / 2;
                let c1: BigInt = ys / 2;
                local_from_big(self.kind, &c0, &c1, self.bits)
            }
        }
    }

    fn embed_z2(&self, x: &BigInt) -> Result<LocalElem> {
        local_from_big(self.kind, x, &BigInt::zero(), self.bits)
    }
}

fn rational_elem(r: i64) -> QuadElem {
    QuadElem { x: BigInt::from(2 * r), y: BigInt::zero() }
}

fn q_star(q: u64) -> i64 {
    if q % 4 == 1 {
        q as i64
    } else {
        -(q as i64)
    }
}

fn symbol_at(field_m: i64, dy: &Dyadic, comp: &Component, b: &KummerElem) -> Result<u8> {
    match comp {
        Component::Odd(q, a) => {
            let q = *q;
            let bv = if b.value.y.is_zero() {
                let r: BigInt = &b.value.x / 2;
                let r: i128 = r.try_into().map_err(|_| TmodError::Internal("rational too large".into()))?;
                rational_at_ramified(field_m, q, r)
            } else {
                let qb = BigInt::from(q);
                let inv2 = BigInt::from(q.div_ceil(2));
                let res = (&b.value.x * inv2).mod_floor(&qb);
                (0, low_u64(&res))
            };
            Ok(tame_symbol(q, *a, bv))
        }
        Component::Dyadic(sign, a) => {
            let bv = dy.embed(&b.value, *sign)?;
            hilbert_additive_local(dy.kind, *a, bv)
        }
    }
}

fn build_generators(field: &QuadField, dy: &Dyadic) -> Result<Vec<RedeiGenerator>> {
    let t = field.t();
    let k = field.k;
    let qs = &field.odd_primes;
    let sqrt_m = (1i64, 1u64);
    let mut rows = Vec::with_capacity(t + 1);
    let mut a0 = Vec::new();
    match (field.two, dy.kind) {
        (Splitting::Split, _) => a0.push(Component::Dyadic(1, dy.embed_z2(&BigInt::from(-1))?)),
        (Splitting::Ramified, DyadicKind::Ramified(-1)) => {
            a0.push(Component::Dyadic(1, local_from_big(dy.kind, &BigInt::zero(), &BigInt::one(), dy.bits)?))
        }
        _ => {}
    }
    rows.push(RedeiGenerator { index: 0, components: a0 });
    let dyadic_all = |val: &BigInt| -> Result<Vec<Component>> {
        let e = dy.embed_z2(val)?;
        Ok(dy.signs().iter().map(|&s| Component::Dyadic(s, e)).collect())
    };
    for i in 1..=t {
        let qi = qs[i - 1];
        let mut comps = Vec::new();
        if i <= k {
            comps.push(Component::Odd(qi, sqrt_m));
            comps.extend(dyadic_all(&two_adic_sqrt(&BigInt::from(q_star(qi)), dy.bits))?);
        } else if i < t {
            let qt = qs[t - 1];
            comps.push(Component::Odd(qi, sqrt_m));
            comps.push(Component::Odd(qt, sqrt_m));
            let prod = BigInt::from(q_star(qi)) * q_star(qt);
            comps.extend(dyadic_all(&two_adic_sqrt(&prod, dy.bits))?);
        }
        rows.push(RedeiGenerator { index: i, components: comps });
    }
    Ok(rows)
}

/// Entries `[a_i, b]` as sums of local symbols.
fn artin_matrix(m: i64, dy: &Dyadic, rows: &[RedeiGenerator], cols: &[KummerElem]) -> Result<F2Mat> {
    let mut mat = F2Mat::zeros(rows.len(), cols.len());
    for (i, r) in rows.iter().enumerate() {
        for (j, b) in cols.iter().enumerate() {
            let mut s = 0u8;
            for c in &r.components {
                s ^= symbol_at(m, dy, c, b)?;
            }
            mat.set(i, j, s);
        }
    }
    Ok(mat)
}

fn full_matrix(field: &QuadField, include_two: bool) -> Result<RedeiMatrix> {
    if field.m >= 0 {
        return Err(TmodError::Invalid("the Rédei matrix is defined for imaginary fields".into()));
    }
    let m = -field.m;
    let mut cols = vec![KummerElem { tag: KummerTag::MinusOne, value: rational_elem(-1) }];
    for &q in &field.odd_primes {
        cols.push(KummerElem { tag: KummerTag::Q(q), value: rational_elem(q as i64) });
    }
    let mut bits = 96;
    let mut s_split = None;
    if field.two != Splitting::Inert {
        let fp = frak_p_order_and_pi(field)?;
        if let Some(s) = &fp.s2 {
            bits = fp.prec;
            s_split = Some(s.clone());
        }
        let two_in_nes = fp.two_in_nes;
        cols.push(KummerElem { tag: KummerTag::Pi, value: fp.pi });
        if field.all_odd_pm1() && !two_in_nes {
            let r = rep_2g2_h2(m as u64)?;
            cols.push(KummerElem {
                tag: KummerTag::Alpha,
                value: QuadElem { x: BigInt::from(2 * r.h as i64), y: BigInt::from(2) },
            });
        }
    }
    if include_two {
        cols.push(KummerElem { tag: KummerTag::Two, value: rational_elem(2) });
    }
    let dy = Dyadic::new(field, s_split.as_ref(), bits)?;
    let rows = build_generators(field, &dy)?;
    let mat = artin_matrix(m, &dy, &rows, &cols)?;
    Ok(RedeiMatrix { rows, cols, mat })
}

/// The full local-symbol Rédei matrix of `𝒯₂(Q(√m))`, `m < 0`.
pub fn redei_matrix_T2(field: &QuadField) -> Result<RedeiMatrix> {
    full_matrix(field, false)
}

/// The full matrix with an extra column for `b = 2`, which must vanish.
pub fn redei_matrix_T2_with_two(field: &QuadField) -> Result<RedeiMatrix> {
    full_matrix(field, true)
}

/// `R^Cl = ([q_i, −m]_{q_j})`, `m > 0` with `F = Q(√−m)`.
pub fn redei_matrix_classgroup(field: &QuadField) -> Result<F2Mat> {
    if field.m >= 0 {
        return Err(TmodError::Invalid("R^Cl is defined for imaginary fields".into()));
    }
    let qs = &field.odd_primes;
    let t = qs.len();
    let mut mat = F2Mat::zeros(t, t);
    for i in 0..t {
        for j in 0..t {
            mat.set(i, j, hilbert_additive_int(qs[i] as i128, field.m as i128, Place::Finite(qs[j])));
        }
    }
    Ok(mat)
}

/// True when `m ≡ 3 mod 4` and `±2 ∉ N(Q(√m))`, `F = Q(√−m)`.
pub fn fast_path_legal(field: &QuadField) -> bool {
    let m = -field.m;
    if m <= 0 || m % 4 != 3 {
        return false;
    }
    let nc = norm_criteria(m as u64);
    !nc.two && !nc.minus_two
}

/// Rational-symbol matrix `([−2/q_i] | R^Cl)` for `m ≡ 3 mod 8`, `([2/q_i] | R^Cl)` for `m ≡ 7 mod 8`.
pub fn redei_fast_path(field: &QuadField) -> Result<F2Mat> {
    if !fast_path_legal(field) {
        return Err(TmodError::WrongPath(format!("fast path needs m ≡ 3 mod 4 and ±2 ∉ N(Q(√m)), m = {}", -field.m)));
    }
    let m = -field.m;
    let first: i64 = if m % 8 == 3 { -2 } else { 2 };
    let rcl = redei_matrix_classgroup(field)?;
    let qs = &field.odd_primes;
    let mut col = F2Mat::zeros(qs.len(), 1);
    for (i, &q) in qs.iter().enumerate() {
        col.set(i, 0, jacobi_additive(first, q)?);
    }
    Ok(col.hcat(&rcl))
}

/// `rk₄ 𝒯₂(Q(√m))` for `m < 0`, by the fast path when legal.
pub fn rk4_T2(field: &QuadField) -> Result<usize> {
    let rk2 = rk2_T2(field);
    if rk2 == 0 {
        return Ok(0);
    }
    let rank = if fast_path_legal(field) { redei_fast_path(field)?.rank() } else { redei_matrix_T2(field)?.mat.rank() };
    rk2.checked_sub(rank).ok_or_else(|| TmodError::Internal(format!("rank {rank} exceeds rk2 {rk2}")))
}

/// `rk₄ 𝒯₂` from the full matrix only.
pub fn rk4_T2_full(field: &QuadField) -> Result<usize> {
    let rk2 = rk2_T2(field);
    if rk2 == 0 {
        return Ok(0);
    }
    let rank = redei_matrix_T2(field)?.mat.rank();
    rk2.checked_sub(rank).ok_or_else(|| TmodError::Internal(format!("rank {rank} exceeds rk2 {rk2}")))
}

/// `rk₄ K₂(O_{Q(√m)}) = t − rank(R″)` for positive `m ≡ 3 mod 4` with `±2 ∉ N(Q(√m))`.
pub fn rk4_K2_matrix(m: u64) -> Result<usize> {
    let field = QuadField::new(-(m as i64))?;
    let mat = redei_fast_path(&field)?;
    Ok(field.t() - mat.rank())
}
