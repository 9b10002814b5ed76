//! Hilbert symbols in additive form: over `Q_p` (including 2 and ∞), tame
//! symbols at ramified odd primes of a quadratic field, and symbols over `Q₂`
//! and its seven quadratic extensions.

use crate::arith::{jacobi, modi};
use crate::error::{Result, TmodError};
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Place {
    Finite(u64),
    Infinite,
    /// A prime of a quadratic field over `p` with ramification index `e` and residue degree `f`.
    OfField { p: u64, e: u8, f: u8, index: u8 },
}

fn eps2(u: i128) -> u8 {
    (u.rem_euclid(4) == 3) as u8
}

fn omega2(u: i128) -> u8 {
    let r = u.rem_euclid(8);
    (r == 3 || r == 5) as u8
}

fn split_val(mut a: i128, p: i128) -> (u32, i128) {
    let mut v = 0;
    while a % p == 0 {
        a /= p;
        v += 1;
    }
    (v, a)
}

/// Additive Hilbert symbol `[a, b]_p` of nonzero integers.
pub fn hilbert_additive_int(a: i128, b: i128, place: Place) -> u8 {
    assert!(a != 0 && b != 0, "Hilbert symbol of zero");
    match place {
        Place::Infinite => (a < 0 && b < 0) as u8,
        Place::Finite(2) => {
            let (al, u) = split_val(a, 2);
            let (be, v) = split_val(b, 2);
            (eps2(u) * eps2(v) + (al as u8 & 1) * omega2(v) + (be as u8 & 1) * omega2(u)) & 1
        }
        Place::Finite(p) => {
            let pi = p as i128;
            let (al, u) = split_val(a, pi);
            let (be, v) = split_val(b, pi);
            let (al, be) = (al as u64 & 1, be as u64 & 1);
            let mut s = (al * be * ((p - 1) / 2) % 2) as u8;
            if be == 1 {
                s ^= (jacobi(modi(u, p) as i64, p) == -1) as u8;
            }
            if al == 1 {
                s ^= (jacobi(modi(v, p) as i64, p) == -1) as u8;
            }
            s
        }
        Place::OfField { .. } => panic!("rational symbol at a field place"),
    }
}

/// Additive Hilbert symbol of nonzero rationals given as `(num, den)`.
pub fn hilbert_additive_q(a: (i128, i128), b: (i128, i128), place: Place) -> u8 {
    // a/d ≡ a·d modulo squares
    hilbert_additive_int(a.0 * a.1, b.0 * b.1, place)
}

fn odd_primes_of(n: i128) -> Vec<u64> {
    crate::arith::factor_u64(n.unsigned_abs() as u64).into_iter().map(|f| f.0).filter(|&p| p != 2).collect()
}

/// Sum of `[a, b]_v` over all places; the product formula makes it zero.
pub fn product_formula_check(a: (i128, i128), b: (i128, i128)) -> Result<u8> {
    let mut places = vec![Place::Infinite, Place::Finite(2)];
    let mut ps: Vec<u64> = [a.0, a.1, b.0, b.1].iter().flat_map(|&x| odd_primes_of(x)).collect();
    ps.sort_unstable();
    ps.dedup();
    places.extend(ps.into_iter().map(Place::Finite));
    let s = places.iter().fold(0u8, |s, &v| s ^ hilbert_additive_q(a, b, v));
    if s != 0 {
        return Err(TmodError::Internal(format!("product formula fails for {a:?}, {b:?}")));
    }
    Ok(s)
}

/// Tame symbol at the prime over an odd `q` ramified in a quadratic field with
/// uniformizer `ϖ`: arguments are `(valuation, unit residue mod q)`.
pub fn tame_symbol(q: u64, x: (i64, u64), y: (i64, u64)) -> u8 {
    let (a, u) = x;
    let (b, v) = y;
    let mut r: u64 = 1;
    if (a * b).rem_euclid(2) == 1 {
        r = q - 1;
    }
    if b.rem_euclid(2) == 1 {
        r = crate::arith::mulmod(r, u % q, q);
    }
    if a.rem_euclid(2) == 1 {
        r = crate::arith::mulmod(r, v % q, q);
    }
    assert!(r != 0, "tame symbol of a non-unit residue");
    (jacobi(r as i64, q) == -1) as u8
}

/// `[√−m, y]` at the prime over `q | m` of `Q(√−m)` for a nonzero rational integer `y`.
pub fn tame_symbol_ramified(m: i64, q: u64, x: (i64, u64), y: i128) -> u8 {
    tame_symbol(q, x, rational_at_ramified(m, q, y))
}

/// Valuation and unit residue of a rational integer at the prime over `q | m`
/// of `Q(√−m)`, uniformizer `√−m`.
pub fn rational_at_ramified(m: i64, q: u64, y: i128) -> (i64, u64) {
    let (be, w) = split_val(y, q as i128);
    // q = ϖ²·(−1/m') with m = q·m'
    let mp = (m as i128 / q as i128).rem_euclid(q as i128) as u64;
    let minv = crate::arith::inv_mod(mp, q).expect("squarefree m");
    let unit_q = (q - minv) % q;
    let mut r = modi(w, q);
    for _ in 0..be {
        r = crate::arith::mulmod(r, unit_q, q);
    }
    (2 * be as i64, r)
}

/// The 2-adic fields of degree ≤ 2, `O = Z₂[θ]`, `θ² = tθ + n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DyadicKind {
    Q2,
    /// `Q₂(√d)`, `d ∈ {−1, 3, 2, −2, 6, −6}`.
    Ramified(i64),
    /// `Q₂(ζ₃)`, `θ² = −θ − 1`.
    Unramified,
}

impl DyadicKind {
    pub const ALL: [DyadicKind; 8] = [
        DyadicKind::Q2,
        DyadicKind::Ramified(-1),
        DyadicKind::Ramified(3),
        DyadicKind::Ramified(2),
        DyadicKind::Ramified(-2),
        DyadicKind::Ramified(6),
        DyadicKind::Ramified(-6),
        DyadicKind::Unramified,
    ];

    fn index(self) -> usize {
        DyadicKind::ALL.iter().position(|&k| k == self).expect("known field")
    }

    fn tn(self) -> (u64, u64) {
        match self {
            DyadicKind::Q2 => (0, 0),
            DyadicKind::Ramified(d) => (0, d as u64),
            DyadicKind::Unramified => (u64::MAX, u64::MAX),
        }
    }

    pub fn degree(self) -> u32 {
        if self == DyadicKind::Q2 {
            1
        } else {
            2
        }
    }

    /// The field `Q₂(√x)` for a squarefree integer `x` that is not a 2-adic square.
    pub fn from_radicand(x: i64) -> Option<DyadicKind> {
        let e = x.trailing_zeros();
        let w = (x >> e).rem_euclid(8);
        let sign_w = match w {
            1 => 1,
            3 => 3,
            5 => -3,
            _ => -1,
        };
        match (e % 2, sign_w) {
            (0, 1) => None,
            (0, -3) => Some(DyadicKind::Unramified),
            (0, d) => Some(DyadicKind::Ramified(d)),
            (_, d) => Some(DyadicKind::Ramified(2 * d)),
        }
    }
}

/// Element of a dyadic field: `ϖ^val · (c0 + c1 θ)` with the unit part known
/// modulo `2^prec`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalElem {
    pub val: i64,
    pub c0: u64,
    pub c1: u64,
    pub prec: u32,
}

const UNIT_BITS: u32 = 3;

fn emul(k: DyadicKind, a: (u64, u64), b: (u64, u64)) -> (u64, u64) {
    let (t, n) = k.tn();
    let p11 = a.1.wrapping_mul(b.1);
    (
        a.0.wrapping_mul(b.0).wrapping_add(n.wrapping_mul(p11)),
        a.0.wrapping_mul(b.1).wrapping_add(a.1.wrapping_mul(b.0)).wrapping_add(t.wrapping_mul(p11)),
    )
}

fn enorm(k: DyadicKind, a: (u64, u64)) -> u64 {
    let (t, n) = k.tn();
    a.0.wrapping_mul(a.0).wrapping_add(t.wrapping_mul(a.0).wrapping_mul(a.1)).wrapping_sub(n.wrapping_mul(a.1).wrapping_mul(a.1))
}

fn inv_odd(a: u64) -> u64 {
    // Newton iteration for the inverse mod 2^64
    let mut x = a;
    for _ in 0..6 {
        x = x.wrapping_mul(2u64.wrapping_sub(a.wrapping_mul(x)));
    }
    x
}

fn mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

impl DyadicKind {
    fn uniformizer(self) -> (u64, u64) {
        match self {
            DyadicKind::Q2 | DyadicKind::Unramified => (2, 0),
            DyadicKind::Ramified(d) if d % 2 != 0 => (1, 1),
            DyadicKind::Ramified(_) => (0, 1),
        }
    }

    fn conj(self, a: (u64, u64)) -> (u64, u64) {
        let (t, _) = self.tn();
        // conj θ = t − θ
        (a.0.wrapping_add(a.1.wrapping_mul(t)), a.1.wrapping_neg())
    }

    fn is_unit(self, a: (u64, u64)) -> bool {
        match self {
            DyadicKind::Q2 => a.0 & 1 == 1,
            _ => enorm(self, a) & 1 == 1,
        }
    }

    /// Divides by the uniformizer; requires `a` in the maximal ideal.
    fn div_uniformizer(self, a: (u64, u64)) -> (u64, u64) {
        match self {
            DyadicKind::Q2 | DyadicKind::Unramified => (a.0 >> 1, a.1 >> 1),
            DyadicKind::Ramified(_) => {
                let w = self.uniformizer();
                let z = emul(self, a, self.conj(w));
                let nw = enorm(self, w) as i64; // ±2 or ±6
                let h = inv_odd((nw / 2) as u64);
                let z = (z.0 >> 1, z.1 >> 1);
                (z.0.wrapping_mul(h), z.1.wrapping_mul(h))
            }
        }
    }

    /// Normalizes raw coordinates known modulo `2^prec`.
    pub fn elem(self, c0: u64, c1: u64, prec: u32) -> Result<LocalElem> {
        let mut a = (c0 & mask(prec), if self == DyadicKind::Q2 { 0 } else { c1 & mask(prec) });
        let mut prec = prec.min(64);
        let mut val = 0;
        while !self.is_unit(a) {
            if prec <= UNIT_BITS || (a.0 & mask(prec) == 0 && a.1 & mask(prec) == 0) {
                return Err(TmodError::Precision { bits: prec, what: "dyadic valuation" });
            }
            a = self.div_uniformizer(a);
            prec -= 1;
            a = (a.0 & mask(prec), a.1 & mask(prec));
            val += 1;
        }
        if prec < UNIT_BITS {
            return Err(TmodError::Precision { bits: prec, what: "dyadic unit part" });
        }
        Ok(LocalElem { val, c0: a.0, c1: a.1, prec })
    }

    pub fn from_int(self, x: i128) -> Result<LocalElem> {
        assert!(x != 0);
        let (v, u) = split_val(x, 2);
        let mut e = self.elem(u as u64, 0, 64)?;
        // 2 = ϖ^e·unit
        let e2 = if matches!(self, DyadicKind::Ramified(_)) { 2 } else { 1 };
        if v > 0 {
            let two = self.elem(2, 0, 64)?;
            let mut w = (two.c0, two.c1);
            for _ in 1..v {
                w = emul(self, w, (two.c0, two.c1));
            }
            let u = emul(self, (e.c0, e.c1), w);
            e = LocalElem { val: (v as i64) * e2, c0: u.0, c1: u.1, prec: 62 };
        }
        Ok(e)
    }

    pub fn mul(self, x: LocalElem, y: LocalElem) -> LocalElem {
        let u = emul(self, (x.c0, x.c1), (y.c0, y.c1));
        let prec = x.prec.min(y.prec);
        LocalElem { val: x.val + y.val, c0: u.0 & mask(prec), c1: u.1 & mask(prec), prec }
    }

    fn table(self) -> &'static SquareClassTable {
        static TABLES: OnceLock<Vec<SquareClassTable>> = OnceLock::new();
        &TABLES.get_or_init(|| DyadicKind::ALL.iter().map(|&k| SquareClassTable::build(k)).collect())[self.index()]
    }

    /// Index of the square class of `x` in `0..2·#(U/U²)`.
    pub fn square_class(self, x: LocalElem) -> Result<usize> {
        if x.prec < UNIT_BITS {
            return Err(TmodError::Precision { bits: x.prec, what: "square class" });
        }
        let t = self.table();
        let id = t.unit_class[((x.c0 & 7) * 8 + (x.c1 & 7)) as usize];
        assert!(id != u8::MAX, "unit part is not a unit");
        Ok((x.val.rem_euclid(2) as usize) * t.unit_classes + id as usize)
    }

    pub fn square_class_count(self) -> usize {
        2 * self.table().unit_classes
    }

    /// Representative `(c0, c1)` and valuation of a square class.
    pub fn class_rep(self, c: usize) -> LocalElem {
        let t = self.table();
        let (c0, c1) = t.unit_reps[c % t.unit_classes];
        let u = LocalElem { val: 0, c0, c1, prec: 62 };
        if c >= t.unit_classes {
            LocalElem { val: 1, ..u }
        } else {
            u
        }
    }
}

/// Square classes of a dyadic field and the Hilbert pairing on them.
struct SquareClassTable {
    unit_classes: usize,
    unit_class: Vec<u8>,
    unit_reps: Vec<(u64, u64)>,
    pairing: Vec<Vec<u8>>,
}

impl SquareClassTable {
    fn build(k: DyadicKind) -> Self {
        let deg1 = k == DyadicKind::Q2;
        let coords: Vec<(u64, u64)> =
            (0..8u64).flat_map(|a| (0..if deg1 { 1 } else { 8 }).map(move |b| (a, b))).collect();
        let mut units: Vec<(u64, u64)> = coords.iter().copied().filter(|&a| k.is_unit(a)).collect();
        // class 0 must be the square class
        units.sort_by_key(|&u| u != (1, 0));
        let red = |a: (u64, u64)| (a.0 & 7, a.1 & 7);
        // U² · (1 + 𝔭^(2e+1)) modulo 8
        let mut tails = vec![(0u64, 0u64)];
        if let DyadicKind::Ramified(_) = k {
            let w = k.uniformizer();
            let four_w = (4 * w.0, 4 * w.1);
            for a in &coords {
                tails.push(red(emul(k, four_w, *a)));
            }
        }
        let mut sq: Vec<(u64, u64)> = Vec::new();
        for w in &units {
            let w2 = emul(k, *w, *w);
            for z in &tails {
                let s = red(emul(k, w2, (1 + z.0, z.1)));
                if !sq.contains(&s) {
                    sq.push(s);
                }
            }
        }
        let mut unit_class = vec![u8::MAX; 64];
        let mut unit_reps = Vec::new();
        for u in &units {
            let idx = (u.0 * 8 + u.1) as usize;
            if unit_class[idx] != u8::MAX {
                continue;
            }
            let id = unit_reps.len() as u8;
            unit_reps.push(*u);
            for s in &sq {
                let v = red(emul(k, *u, *s));
                unit_class[(v.0 * 8 + v.1) as usize] = id;
            }
        }
        let uc = unit_reps.len();
        assert_eq!(uc, if deg1 { 4 } else { 8 }, "unit square classes of {k:?}");
        let mut t = SquareClassTable { unit_classes: uc, unit_class, unit_reps, pairing: Vec::new() };
        t.pairing = t.build_pairing(k);
        t
    }

    fn class_of(&self, k: DyadicKind, a: (u64, u64), prec: u32) -> Option<usize> {
        let e = k.elem(a.0, a.1, prec).ok()?;
        let id = self.unit_class[((e.c0 & 7) * 8 + (e.c1 & 7)) as usize];
        Some((e.val.rem_euclid(2) as usize) * self.unit_classes + id as usize)
    }

    fn rep(&self, k: DyadicKind, c: usize) -> (u64, u64) {
        let u = self.unit_reps[c % self.unit_classes];
        if c >= self.unit_classes {
            emul(k, u, k.uniformizer())
        } else {
            u
        }
    }

    /// `pairing[x][y] = 0` iff `y` is a norm from `K(√x)`, by residue search
    /// for `a² − x b²` and closure of the hits under multiplication.
    fn build_pairing(&self, k: DyadicKind) -> Vec<Vec<u8>> {
        let n = 2 * self.unit_classes;
        let deg1 = k == DyadicKind::Q2;
        let mut pairing = vec![vec![0u8; n]; n];
        for x in 1..n {
            let xr = self.rep(k, x);
            let mut prec = if deg1 { 7 } else { 4 };
            loop {
                let m = 1u64 << prec;
                let mut hits = vec![false; n];
                let range = |deg1: bool| -> Vec<(u64, u64)> {
                    (0..m).flat_map(move |a| (0..if deg1 { 1 } else { m }).map(move |b| (a, b))).collect()
                };
                let elems = range(deg1);
                for a in &elems {
                    let a2 = emul(k, *a, *a);
                    for b in &elems {
                        let b2 = emul(k, *b, *b);
                        let xb2 = emul(k, xr, b2);
                        let z = (a2.0.wrapping_sub(xb2.0), a2.1.wrapping_sub(xb2.1));
                        if let Some(c) = self.class_of(k, z, prec) {
                            hits[c] = true;
                        }
                    }
                }
                let group = self.close(k, &hits);
                if group.iter().filter(|&&h| h).count() == n / 2 {
                    for y in 0..n {
                        pairing[x][y] = (!group[y]) as u8;
                    }
                    break;
                }
                prec += 1;
                assert!(prec <= 8, "norm group search did not converge for {k:?}");
            }
        }
        for x in 0..n {
            for y in 0..n {
                assert_eq!(pairing[x][y], pairing[y][x], "pairing not symmetric for {k:?}");
            }
        }
        pairing
    }

    fn close(&self, k: DyadicKind, hits: &[bool]) -> Vec<bool> {
        let n = hits.len();
        let mut g = vec![false; n];
        g[0] = true;
        let mut changed = true;
        while changed {
            changed = false;
            for a in 0..n {
                for b in 0..n {
                    if g[a] && hits[b] {
                        let p = emul(k, self.rep(k, a), self.rep(k, b));
                        let c = self.class_of(k, p, 62).expect("class of product");
                        if !g[c] {
                            g[c] = true;
                            changed = true;
                        }
                    }
                }
            }
        }
        g
    }
}

/// Additive Hilbert symbol `[x, y]` over a dyadic field.
pub fn hilbert_additive_local(k: DyadicKind, x: LocalElem, y: LocalElem) -> Result<u8> {
    let cx = k.square_class(x)?;
    let cy = k.square_class(y)?;
    Ok(k.table().pairing[cx][cy])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_examples() {
        assert_eq!(hilbert_additive_int(2, -21, Place::Finite(3)), 1);
        assert_eq!(hilbert_additive_int(1, 77, Place::Finite(7)), 0);
        assert_eq!(hilbert_additive_int(-1, -1, Place::Infinite), 1);
        assert_eq!(hilbert_additive_int(2, 17, Place::Finite(2)), 0);
        assert_eq!(hilbert_additive_int(2, 5, Place::Finite(2)), 1);
        assert_eq!(hilbert_additive_int(-1, -1, Place::Finite(2)), 1);
        for (a, b) in [(2, -21), (-1, -1), (6, 35)] {
            assert_eq!(product_formula_check((a, 1), (b, 1)).unwrap(), 0);
        }
    }

    #[test]
    fn rational_matches_brute_force_at_odd_p() {
        // (a,b)_p = 1 iff a x² + b y² = z² has a primitive solution mod p^3
        for p in [3u64, 5, 7] {
            let m = p.pow(3) as i128;
            for a in [-6i128, -3, -1, 1, 2, 3, 5, 6, 7, 10, 14, 15] {
                for b in [-7i128, -5, -2, -1, 1, 3, 5, 6, 21] {
                    let mut sol = false;
                    'f: for x in 0..m {
                        for y in 0..m {
                            if (x % p as i128 == 0) && (y % p as i128 == 0) {
                                continue;
                            }
                            let r = (a * x * x + b * y * y).rem_euclid(m);
                            if (0..m).any(|z| (z * z - r).rem_euclid(m) == 0) {
                                sol = true;
                                break 'f;
                            }
                        }
                    }
                    // primitive solutions with p | x, y force p | z; modulus p^3 suffices for squarefree inputs
                    assert_eq!(hilbert_additive_int(a, b, Place::Finite(p)) == 0, sol, "({a},{b})_{p}");
                }
            }
        }
    }

    #[test]
    fn dyadic_q2_agrees_with_formula() {
        let k = DyadicKind::Q2;
        for a in -40i128..40 {
            for b in -40i128..40 {
                if a == 0 || b == 0 {
                    continue;
                }
                let x = k.from_int(a).unwrap();
                let y = k.from_int(b).unwrap();
                assert_eq!(hilbert_additive_local(k, x, y).unwrap(), hilbert_additive_int(a, b, Place::Finite(2)), "({a},{b})");
            }
        }
    }

    #[test]
    fn dyadic_norm_shortcut() {
        // for y ∈ Q₂: [x, y]_E = [N x, y]_Q₂
        for k in DyadicKind::ALL.into_iter().skip(1) {
            for c in 0..k.square_class_count() {
                let x = k.class_rep(c);
                let full = emul(k, (x.c0, x.c1), if x.val == 1 { k.uniformizer() } else { (1, 0) });
                let n = enorm(k, full) as i64 as i128;
                for y in [-6i128, -5, -3, -2, -1, 2, 3, 5, 6, 10] {
                    let ye = k.from_int(y).unwrap();
                    assert_eq!(
                        hilbert_additive_local(k, x, ye).unwrap(),
                        hilbert_additive_int(n, y, Place::Finite(2)),
                        "{k:?} class {c} y {y}"
                    );
                }
            }
        }
    }

    #[test]
    fn gaussian_example() {
        let k = DyadicKind::Ramified(-1);
        let x = k.elem(1, 1, 64).unwrap();
        let two = k.from_int(2).unwrap();
        assert_eq!(hilbert_additive_local(k, x, two).unwrap(), 0);
        let sq = k.from_int(9).unwrap();
        assert_eq!(hilbert_additive_local(k, sq, x).unwrap(), 0);
    }

    #[test]
    fn radicand_fields() {
        assert_eq!(DyadicKind::from_radicand(-1), Some(DyadicKind::Ramified(-1)));
        assert_eq!(DyadicKind::from_radicand(-7), None);
        assert_eq!(DyadicKind::from_radicand(-3), Some(DyadicKind::Unramified));
        assert_eq!(DyadicKind::from_radicand(-5), Some(DyadicKind::Ramified(3)));
        assert_eq!(DyadicKind::from_radicand(-10), Some(DyadicKind::Ramified(6)));
    }

    #[test]
    fn tame_examples() {
        // (√−15, 5) at the prime over 3 of Q(√−15)
        assert_eq!(tame_symbol_ramified(15, 3, (1, 1), 5), 1);
        assert_eq!(tame_symbol_ramified(15, 3, (1, 1), 1), 0);
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn rational() -> impl Strategy<Value = (i128, i128)> {
        (1i128..2_000_000, any::<bool>(), 1i128..5_000).prop_map(|(n, neg, d)| (if neg { -n } else { n }, d))
    }

    fn place() -> impl Strategy<Value = Place> {
        prop_oneof![
            Just(Place::Infinite),
            Just(Place::Finite(2)),
            prop::sample::select(vec![3u64, 5, 7, 11, 13, 17, 19, 23]).prop_map(Place::Finite),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn product_formula(a in rational(), b in rational()) {
            prop_assert_eq!(product_formula_check(a, b), Ok(0));
        }

        #[test]
        fn symmetric_and_bilinear(a in rational(), b in rational(), c in rational(), v in place()) {
            let h = |x, y| hilbert_additive_q(x, y, v);
            prop_assert_eq!(h(a, b), h(b, a));
            prop_assert_eq!(h(a, (b.0 * c.0, b.1 * c.1)), h(a, b) ^ h(a, c));
            prop_assert_eq!(h(a, (-a.0, a.1)), 0);
            prop_assert_eq!(h(a, (b.0 * b.0, 1)), 0);
        }
    }
}
