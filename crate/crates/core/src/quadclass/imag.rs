use super::{BQForm, QuadElem, QuadField, Splitting};
use crate::arith::{sqrt_mod_prime, val_p};
use crate::error::{Result, TmodError};
use crate::linalg::AbGroup;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::HashMap;

/// Class group of an imaginary quadratic order of discriminant `D < 0`, by enumeration.
#[derive(Debug, Clone)]
pub struct ClassGroup {
    pub disc: i64,
    pub forms: Vec<BQForm>,
    index: HashMap<(i64, i64), usize>,
}

fn gcd3(a: i64, b: i64, c: i64) -> i64 {
    a.gcd(&b).gcd(&c)
}

impl ClassGroup {
    pub const MAX_ABS_DISC: i64 = 1 << 40;

    pub fn new(disc: i64) -> Result<Self> {
        if disc >= 0 || disc.rem_euclid(4) > 1 {
            return Err(TmodError::Invalid(format!("bad negative discriminant {disc}")));
        }
        if -disc > Self::MAX_ABS_DISC {
            return Err(TmodError::Capacity { bound: (-disc) as u64, budget: Self::MAX_ABS_DISC as u64 });
        }
        let mut forms = vec![BQForm::identity(disc)];
        let amax = ((-disc) as f64 / 3.0).sqrt() as i64 + 1;
        for a in 1..=amax {
            let mut b = -a + 1;
            if (b - disc).rem_euclid(2) != 0 {
                b += 1;
            }
            while b <= a {
                let n = b * b - disc;
                if n % (4 * a) == 0 {
                    let c = n / (4 * a);
                    let f = BQForm::new(a, b, c);
                    if c >= a && f.is_reduced_definite() && gcd3(a, b, c) == 1 && f != forms[0] {
                        forms.push(f);
                    }
                }
                b += 2;
            }
        }
        let index = forms.iter().enumerate().map(|(i, f)| ((f.a, f.b), i)).collect();
        Ok(ClassGroup { disc, forms, index })
    }

    pub fn h(&self) -> usize {
        self.forms.len()
    }

    pub fn index_of(&self, f: &BQForm) -> usize {
        let r = f.reduce_definite();
        self.index[&(r.a, r.b)]
    }

    pub fn mul(&self, i: usize, j: usize) -> usize {
        self.index_of(&self.forms[i].compose_raw(&self.forms[j]))
    }

    pub fn inv(&self, i: usize) -> usize {
        self.index_of(&self.forms[i].inverse())
    }

    pub fn pow(&self, i: usize, mut e: u64) -> usize {
        let mut acc = 0;
        let mut b = i;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }

    pub fn order_of(&self, i: usize) -> u64 {
        let mut o = 1;
        let mut x = i;
        while x != 0 {
            x = self.mul(x, i);
            o += 1;
        }
        o
    }

    /// Projection onto the p-Sylow subgroup that is the identity on it.
    pub fn p_projection(&self, i: usize, p: u64) -> usize {
        let h = self.h() as u64;
        let v = val_p(h as u128, p);
        let pv = p.pow(v);
        let hp = h / pv;
        if pv == 1 {
            return 0;
        }
        // hp * t ≡ 1 mod pv
        let t = crate::arith::inv_mod(hp % pv, pv).unwrap_or(1);
        self.pow(i, hp * t)
    }

    /// Basis `(g_i, p^{k_i})` of the p-Sylow subgroup, largest orders first.
    pub fn sylow_basis(&self, p: u64) -> Vec<(usize, u64)> {
        let mut elems: Vec<usize> = (0..self.h()).map(|i| self.p_projection(i, p)).collect();
        elems.sort_unstable();
        elems.dedup();
        let mut basis: Vec<(usize, u64)> = Vec::new();
        let mut coords: HashMap<usize, Vec<u64>> = HashMap::from([(0, Vec::new())]);
        while coords.len() < elems.len() {
            // element of maximal order modulo the current subgroup
            let mut best = (0usize, 0usize, 1u64);
            for &x in &elems {
                let mut y = x;
                let mut e = 1u64;
                while !coords.contains_key(&y) {
                    y = self.pow(y, p);
                    e *= p;
                }
                if e > best.2 {
                    best = (x, y, e);
                }
            }
            let (x, y, e) = best;
            let c = &coords[&y];
            let mut xa = x;
            for (j, &cj) in c.iter().enumerate() {
                assert_eq!(cj % e, 0, "sylow basis divisibility");
                let (g, og) = basis[j];
                let k = (og - (cj / e) % og) % og;
                xa = self.mul(xa, self.pow(g, k));
            }
            basis.push((xa, e));
            let old: Vec<(usize, Vec<u64>)> = coords.iter().map(|(k, v)| (*k, v.clone())).collect();
            let mut pw = 0usize;
            for t in 0..e {
                for (k, v) in &old {
                    let mut nv = v.clone();
                    nv.resize(basis.len() - 1, 0);
                    nv.push(t);
                    coords.insert(self.mul(*k, pw), nv);
                }
                pw = self.mul(pw, xa);
            }
        }
        basis.sort_by(|a, b| b.1.cmp(&a.1));
        basis
    }

    pub fn sylow(&self, p: u64) -> AbGroup {
        let orders: Vec<u64> = self.sylow_basis(p).iter().map(|b| b.1).collect();
        AbGroup::from_cyclic_orders(&orders)
    }

    pub fn structure(&self) -> AbGroup {
        let mut orders = Vec::new();
        for (p, _) in crate::arith::factor_u64(self.h() as u64) {
            orders.extend(self.sylow_basis(p).iter().map(|b| b.1));
        }
        AbGroup::from_cyclic_orders(&orders)
    }
}

/// Order of the class of a form, by repeated composition.
pub fn form_order(f: &BQForm) -> u64 {
    let id = BQForm::identity(f.disc());
    let f = f.reduce_definite();
    let mut x = f;
    let mut o = 1;
    while x != id {
        x = x.compose_definite(&f);
        o += 1;
    }
    o
}

/// Form `(q^e, B, C)` attached to the e-th power of a prime ideal above `q`, `(D/q) = 1`, odd `q`.
pub fn prime_power_form(disc: i64, q: u64, b0: i64, e: u32) -> (BigInt, BigInt, BigInt) {
    let d = BigInt::from(disc);
    let n = BigInt::from(q).pow(e);
    // sqrt of D mod q^e lifted from b0
    let mut r = BigInt::from(b0).mod_floor(&n);
    let mut modk = BigInt::from(q);
    while modk < n {
        modk = (&modk * &modk).min(n.clone());
        let two_r_inv = (BigInt::from(2) * &r).modinv(&modk).expect("unit");
        r = (&r - (&r * &r - &d) * two_r_inv).mod_floor(&modk);
    }
    if (&r - &d).is_odd() {
        r += &n;
    }
    let c = (&r * &r - &d) / (BigInt::from(4) * &n);
    (n, r, c)
}

/// Generator of the ideal `N Z + ((−B + √D)/2) Z` when principal, `D < 0`.
pub fn principal_generator(disc: i64, n: &BigInt, b: &BigInt) -> Option<QuadElem> {
    let d = BigInt::from(disc);
    let four_n = BigInt::from(4) * n;
    let num = b * b - &d;
    if !(&num % &four_n).is_zero() {
        return None;
    }
    let (mut fa, mut fb, mut fc) = (n.clone(), -b.clone(), num / four_n);
    let (mut m11, mut m12, mut m21, mut m22) = (BigInt::one(), BigInt::zero(), BigInt::zero(), BigInt::one());
    loop {
        if fb > fa || fb <= -fa.clone() {
            let s = (&fa - &fb).div_floor(&(BigInt::from(2) * &fa));
            fc += &s * (&fa * &s + &fb);
            fb += BigInt::from(2) * &fa * &s;
            m12 += &s * &m11;
            m22 += &s * &m21;
        }
        if fa > fc {
            let (a, b2, c) = (fc.clone(), -fb.clone(), fa.clone());
            fa = a;
            fb = b2;
            fc = c;
            let (o11, o21) = (m11.clone(), m21.clone());
            m11 = m12.clone();
            m21 = m22.clone();
            m12 = -o11;
            m22 = -o21;
        } else {
            break;
        }
    }
    if !fa.is_one() {
        return None;
    }
    let (x, y) = (m11, m21);
    let u = &x * n + &y * ((-b - &d) / 2);
    let mut e = QuadElem::from_omega(disc, &u, &y);
    if e.x.is_negative() || (e.x.is_zero() && e.y.is_negative()) {
        e = e.neg();
    }
    debug_assert_eq!(e.norm(if disc % 4 == 0 { disc / 4 } else { disc }), *n);
    Some(e)
}

/// Order of the class of a dyadic prime and a generator of its power.
#[derive(Debug, Clone)]
pub struct FrakP {
    pub splitting: Splitting,
    pub f: u64,
    /// Generator of `𝔭^f`; `2` when inert.
    pub pi: QuadElem,
    pub two_in_nes: bool,
    /// Split case: `s ∈ Z_2` with `s² = m` and `v_2(π(s)) > 0`, modulo `2^prec`.
    pub s2: Option<BigInt>,
    pub prec: u32,
}

/// `√a` in `Z_2` modulo `2^k` for `a ≡ 1 mod 8`, the root `≡ 1 mod 4`.
pub fn two_adic_sqrt(a: &BigInt, k: u32) -> BigInt {
    let mut r = BigInt::one();
    // r² ≡ a mod 2^j for j = 3.. ; lift one bit at a time
    for j in 3..=k + 1 {
        let mj1 = BigInt::one() << (j + 1);
        if !((&r * &r - a).mod_floor(&mj1)).is_zero() {
            r += BigInt::one() << (j - 1);
        }
    }
    let out = r.mod_floor(&(BigInt::one() << k));
    if (&out % 4u32) == BigInt::from(3) {
        (-out).mod_floor(&(BigInt::one() << k))
    } else {
        out
    }
}

fn elem_val2_at(e: &QuadElem, s: &BigInt, prec: u32) -> (u32, BigInt) {
    let md = BigInt::one() << (prec + 1);
    let v = (&e.x + &e.y * s).mod_floor(&md);
    if v.is_zero() {
        return (prec, BigInt::zero());
    }
    let tz = v.trailing_zeros().unwrap() as u32;
    // value of (x + y s)/2 has valuation tz - 1
    (tz - 1, v >> tz)
}

/// Dyadic prime data for `F = Q(√m)`, `m < 0`.
pub fn frak_p_order_and_pi(field: &QuadField) -> Result<FrakP> {
    let m = field.m;
    let disc = field.disc;
    if m >= 0 {
        return Err(TmodError::Invalid("frak_p_order_and_pi needs an imaginary field".into()));
    }
    let two = BigInt::from(2);
    let two_elem = QuadElem { x: BigInt::from(4), y: BigInt::zero() };
    match field.two {
        Splitting::Inert => Ok(FrakP {
            splitting: Splitting::Inert,
            f: 1,
            pi: two_elem,
            two_in_nes: false,
            s2: None,
            prec: 0,
        }),
        Splitting::Ramified => {
            let p2 = BQForm::prime_form(disc, 2).expect("ramified");
            let f = form_order(&p2);
            let pi = if f == 1 {
                principal_generator(disc, &two, &BigInt::from(p2.b)).ok_or_else(|| TmodError::Internal("dyadic generator".into()))?
            } else {
                two_elem
            };
            Ok(FrakP { splitting: Splitting::Ramified, f, pi, two_in_nes: f % 2 == 1, s2: None, prec: 0 })
        }
        Splitting::Split => {
            let p2 = BQForm::prime_form(disc, 2).expect("split");
            let f = form_order(&p2);
            let fu = f as u32;
            let d = BigInt::from(disc);
            let mut r = BigInt::from(p2.b);
            for k in 3..=fu + 1 {
                let mk = BigInt::one() << (k + 1);
                if !((&r * &r - &d).mod_floor(&mk)).is_zero() {
                    r += BigInt::one() << (k - 1);
                }
            }
            let n = BigInt::one() << fu;
            let mut pi = principal_generator(disc, &n, &r).ok_or_else(|| TmodError::Internal("dyadic generator".into()))?;
            let prec = fu + 64;
            let mut s = two_adic_sqrt(&d, prec);
            let (mut v, mut unit) = elem_val2_at(&pi, &s, prec);
            if v == 0 {
                s = (-s).mod_floor(&(BigInt::one() << prec));
                (v, unit) = elem_val2_at(&pi, &s, prec);
            }
            if v as u64 != f {
                return Err(TmodError::Internal(format!("dyadic valuation {v} != {f}")));
            }
            if (&unit % 4u32) == BigInt::from(3) {
                pi = pi.neg();
            }
            Ok(FrakP { splitting: Splitting::Split, f, pi, two_in_nes: f % 2 == 1, s2: Some(s), prec })
        }
    }
}

/// Least odd split prime `q ≠ p` whose class has the given p-component up to a unit exponent,
/// together with the prime-to-p order `r` of `[𝔮]^{p^k}` and the sign of `b`.
pub fn class_representative_prime(cg: &ClassGroup, target: usize, order: u64, p: u64) -> Option<(u64, i64, u64)> {
    let disc = cg.disc;
    let powers: Vec<usize> = (1..order).filter(|u| u % p != 0).map(|u| cg.pow(target, u)).collect();
    let mut q = 3u64;
    while q < 1 << 24 {
        if q != p && crate::arith::is_prime(q) && crate::arith::kronecker_prime(disc, q) == 1 {
            let f = BQForm::prime_form(disc, q).unwrap();
            for sign in [1i64, -1] {
                let g = BQForm::new(f.a, sign * f.b, f.c);
                let i = cg.index_of(&g);
                if powers.contains(&cg.p_projection(i, p)) {
                    let rest = cg.pow(i, order);
                    let r = cg.order_of(rest);
                    return Some((q, sign * f.b, r));
                }
            }
        }
        q += 2;
    }
    None
}

pub fn sqrt_disc_mod_q(disc: i64, q: u64) -> Option<i64> {
    sqrt_mod_prime(disc.rem_euclid(q as i64) as u64, q).map(|r| r as i64)
}
