//! Ray class groups `Cl_F(p^n)` of quadratic fields and the `𝒯_p` structure by
//! stabilization over increasing levels.

use crate::arith::{factor_u64, inv_mod, modi, powmod, val_p};
use crate::error::{Result, TmodError};
use crate::linalg::{local_snf, AbGroup};
use crate::quadclass::{
    class_representative_prime, fundamental_unit, narrow_class_number_real, prime_power_form, principal_generator,
    ClassGroup, FundUnit, QuadField, Splitting,
};
use num_bigint::BigInt;
use num_integer::Integer;

/// Default highest level tried by [`tp_structure`].
pub const DEFAULT_NMAX: u32 = 24;

const MAX_MODULUS_BITS: u32 = 62;

/// `a + bω` modulo `p^w`.
type Elem = (u64, u64);

fn mulm(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// `(O_F / p^n)^×` with polycyclic generators of its p-Sylow subgroup `1 + J`,
/// `J` the radical, filtered by `1 + J^k`.
#[derive(Debug, Clone)]
pub struct ResidueUnitGroup {
    pub p: u64,
    pub n: u32,
    pub disc: i64,
    pub splitting: Splitting,
    modulus: u64,
    /// `ω² = Dω − c0`.
    dm: u64,
    c0: u64,
    /// Ramified case: `π = ω − r`, `N(π) = p·unit`, inverse of that unit mod `p`.
    r: u64,
    pi: Elem,
    pibar: Elem,
    unit_inv: u64,
    /// Filtration length: `1 + J^top` is trivial.
    top: u32,
    /// Generators `1 + b·J^k` by level.
    pub gens: Vec<Elem>,
    inv_gens: Vec<Elem>,
    /// Level `k` of each generator.
    pub gen_level: Vec<u32>,
    /// Order of `(O/J)^×`, prime to `p`.
    pub residue_order: u64,
}

impl ResidueUnitGroup {
    pub fn new(field: &QuadField, p: u64, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(TmodError::Invalid("level must be at least 1".into()));
        }
        let splitting = field.splitting(p);
        let e = if splitting == Splitting::Ramified { 2 } else { 1 };
        let w = e * n;
        let bits = (w as f64 * (p as f64).log2()).ceil() as u32;
        if bits > MAX_MODULUS_BITS {
            return Err(TmodError::Precision { bits, what: "residue ring modulus" });
        }
        let modulus = p.pow(w);
        let disc = field.disc;
        let dm = modi(disc as i128, modulus);
        let c0 = modi(((disc as i128) * (disc as i128) - disc as i128) / 4, modulus);
        let mut g = ResidueUnitGroup {
            p,
            n,
            disc,
            splitting,
            modulus,
            dm,
            c0,
            r: 0,
            pi: (0, 1),
            pibar: (0, 1),
            unit_inv: 1,
            top: e * n,
            gens: Vec::new(),
            inv_gens: Vec::new(),
            gen_level: Vec::new(),
            residue_order: match splitting {
                Splitting::Split => (p - 1) * (p - 1),
                Splitting::Inert => p * p - 1,
                Splitting::Ramified => p - 1,
            },
        };
        if splitting == Splitting::Ramified {
            let c0_full = ((disc as i128) * (disc as i128) - disc as i128) / 4;
            let r = (0..p * p)
                .find(|&r| {
                    let nr = (r as i128) * (r as i128) - disc as i128 * r as i128 + c0_full;
                    val_p(nr.unsigned_abs(), p) == 1
                })
                .expect("uniformizer exists");
            g.r = r % p;
            g.pi = ((modulus - r % modulus) % modulus, 1);
            g.pibar = g.conj(g.pi);
            let np = (r as i128) * (r as i128) - disc as i128 * r as i128 + c0_full;
            let unit = modi(np / p as i128, p);
            g.unit_inv = inv_mod(unit, p).expect("unit");
        }
        for k in 1..g.top {
            match splitting {
                Splitting::Ramified => {
                    let pk = g.pow(g.pi, k as u64);
                    g.gens.push(g.add_one(pk));
                    g.gen_level.push(k);
                }
                _ => {
                    let pk = p.pow(k);
                    g.gens.push(((1 + pk) % modulus, 0));
                    g.gens.push((1, pk));
                    g.gen_level.push(k);
                    g.gen_level.push(k);
                }
            }
        }
        g.inv_gens = g.gens.iter().map(|&x| g.inv(x).expect("unit generator")).collect();
        Ok(g)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// `#(O/p^n)^×`.
    pub fn order(&self) -> u128 {
        self.residue_order as u128 * (self.p as u128).pow(self.gens.len() as u32)
    }

    /// `ν_p #(1 + J)`.
    pub fn p_valuation(&self) -> u32 {
        self.gens.len() as u32
    }

    pub fn elem(&self, a: i128, b: i128) -> Elem {
        (modi(a, self.modulus), modi(b, self.modulus))
    }

    pub fn elem_big(&self, a: &BigInt, b: &BigInt) -> Elem {
        let m = BigInt::from(self.modulus);
        let a: u64 = a.mod_floor(&m).try_into().expect("reduced");
        let b: u64 = b.mod_floor(&m).try_into().expect("reduced");
        (a, b)
    }

    pub fn mul(&self, x: Elem, y: Elem) -> Elem {
        let m = self.modulus;
        let bd = mulm(x.1, y.1, m);
        let a = (mulm(x.0, y.0, m) + m - mulm(bd, self.c0, m)) % m;
        let b = (mulm(x.0, y.1, m) + mulm(x.1, y.0, m) + mulm(bd, self.dm, m)) % m;
        (a, b)
    }

    pub fn pow(&self, mut x: Elem, mut e: u64) -> Elem {
        let mut acc = (1 % self.modulus, 0);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, x);
            }
            x = self.mul(x, x);
            e >>= 1;
        }
        acc
    }

    fn add_one(&self, x: Elem) -> Elem {
        ((x.0 + 1) % self.modulus, x.1)
    }

    fn conj(&self, x: Elem) -> Elem {
        let m = self.modulus;
        ((x.0 + mulm(x.1, self.dm, m)) % m, (m - x.1) % m)
    }

    fn norm(&self, x: Elem) -> u64 {
        self.mul(x, self.conj(x)).0
    }

    pub fn is_unit(&self, x: Elem) -> bool {
        !self.norm(x).is_multiple_of(self.p)
    }

    pub fn inv(&self, x: Elem) -> Option<Elem> {
        let ni = inv_mod(self.norm(x), self.modulus)?;
        let c = self.conj(x);
        Some((mulm(c.0, ni, self.modulus), mulm(c.1, ni, self.modulus)))
    }

    pub fn is_one(&self, x: Elem) -> bool {
        x == (1 % self.modulus, 0)
    }

    /// Residue coordinates of `y ∈ J^k` in `J^k / J^{k+1}`; `None` when `y ∉ J^k`.
    fn level_coords(&self, y: Elem, k: u32) -> Option<Vec<u64>> {
        let p = self.p;
        match self.splitting {
            Splitting::Ramified => {
                let z = self.mul(y, self.pow(self.pibar, k as u64));
                let pk = p.pow(k);
                if !z.0.is_multiple_of(pk) || !z.1.is_multiple_of(pk) {
                    return None;
                }
                let (a, b) = (z.0 / pk, z.1 / pk);
                let res = (a % p + mulm(b % p, self.r, p)) % p;
                Some(vec![mulm(res, powmod(self.unit_inv, k as u64, p), p)])
            }
            _ => {
                let pk = p.pow(k);
                if !y.0.is_multiple_of(pk) || !y.1.is_multiple_of(pk) {
                    return None;
                }
                Some(vec![(y.0 / pk) % p, (y.1 / pk) % p])
            }
        }
    }

    /// Exponents on the generators expressing `x ∈ 1 + J` modulo `1 + J^top`.
    pub fn dlog(&self, x: Elem) -> Result<Vec<u64>> {
        let mut out = vec![0u64; self.gens.len()];
        let mut x = x;
        let mut idx = 0;
        for k in 1..self.top {
            let y = ((x.0 + self.modulus - 1) % self.modulus, x.1);
            let c = self
                .level_coords(y, k)
                .ok_or_else(|| TmodError::Internal(format!("element not in 1 + J^{k}")))?;
            for (j, &cj) in c.iter().enumerate() {
                out[idx + j] = cj;
                for _ in 0..cj {
                    x = self.mul(x, self.inv_gens[idx + j]);
                }
            }
            idx += c.len();
        }
        if !self.is_one(self.reduce_top(x)) {
            return Err(TmodError::Internal("filtration discrete log did not terminate at 1".into()));
        }
        Ok(out)
    }

    /// Representative modulo `J^top = p^n O`.
    fn reduce_top(&self, x: Elem) -> Elem {
        let pn = self.p.pow(self.n);
        (x.0 % pn, x.1 % pn)
    }

    /// Projection to `1 + J` followed by the discrete log.
    pub fn dlog_projected(&self, x: Elem) -> Result<Vec<u64>> {
        if !self.is_unit(x) {
            return Err(TmodError::NonCoprime { a: x.0 as i64, n: self.p });
        }
        self.dlog(self.pow(x, self.residue_order))
    }

    /// Relations `p·e_g − dlog(g^p)` presenting `1 + J`.
    pub fn relations(&self) -> Result<Vec<Vec<i128>>> {
        let mut rows = Vec::with_capacity(self.gens.len());
        for (i, &g) in self.gens.iter().enumerate() {
            let d = self.dlog(self.pow(g, self.p))?;
            let mut row: Vec<i128> = d.iter().map(|&x| -(x as i128)).collect();
            row[i] += self.p as i128;
            rows.push(row);
        }
        Ok(rows)
    }

    /// Structure of the p-Sylow subgroup `1 + J`.
    pub fn p_structure(&self) -> Result<AbGroup> {
        let rels = self.relations()?;
        snf_group(&rels, self.gens.len(), self.p, self.n + 2)
    }

    /// Multiplicative order of a unit.
    pub fn order_of(&self, x: Elem) -> u64 {
        let total = self.order() as u64;
        let mut ord = total;
        for (q, _) in factor_u64(total) {
            while ord.is_multiple_of(q) && self.is_one(self.reduce_top(self.pow(x, ord / q))) {
                ord /= q;
            }
        }
        ord
    }
}

fn snf_group(rows: &[Vec<i128>], cols: usize, p: u64, k: u32) -> Result<AbGroup> {
    let modulus = p.pow(k);
    let mat: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|&x| modi(x, modulus)).collect()).collect();
    let (vals, zero) = local_snf(&mat, cols, p, k);
    if zero > 0 {
        return Err(TmodError::Internal(format!("relation matrix degenerate modulo {p}^{k}")));
    }
    if vals.iter().any(|&v| v + 1 >= k) {
        return Err(TmodError::Internal(format!("invariant factor too close to {p}^{k}")));
    }
    Ok(AbGroup::from_cyclic_orders(&vals.iter().map(|&v| p.pow(v)).collect::<Vec<_>>()))
}

/// A class generator `c` of `Cl(F)_p`: the class of `𝔮` with `𝔮^{e} = (α)`.
#[derive(Debug, Clone)]
struct ClassGen {
    exponent: u64,
    alpha: (BigInt, BigInt),
}

/// Data independent of the level.
#[derive(Debug, Clone)]
pub struct RayClassSetup {
    pub field: QuadField,
    pub p: u64,
    pub h: u64,
    units: Vec<UnitSource>,
    classes: Vec<ClassGen>,
}

#[derive(Debug, Clone)]
enum UnitSource {
    Fixed(i128, i128),
    Fundamental(Box<FundUnit>),
}

impl RayClassSetup {
    pub fn new(field: &QuadField, p: u64) -> Result<Self> {
        let disc = field.disc;
        if field.is_imaginary() {
            let cg = ClassGroup::new(disc)?;
            let h = cg.h() as u64;
            let torsion = match field.m {
                -1 | -3 => UnitSource::Fixed(2, 1),
                _ => UnitSource::Fixed(-1, 0),
            };
            let mut classes = Vec::new();
            for (target, order) in cg.sylow_basis(p) {
                let (q, b, r) = class_representative_prime(&cg, target, order, p)
                    .ok_or_else(|| TmodError::Internal("no prime in class".into()))?;
                let e = order * r;
                let (nn, bb, _) = prime_power_form(disc, q, b, e as u32);
                let a = principal_generator(disc, &nn, &bb)
                    .ok_or_else(|| TmodError::Internal(format!("𝔮^{e} not principal, q = {q}")))?;
                classes.push(ClassGen { exponent: e, alpha: a.to_omega(disc) });
            }
            Ok(RayClassSetup { field: field.clone(), p, h, units: vec![torsion], classes })
        } else {
            let (_, h) = narrow_class_number_real(field.m, None)?;
            if (h as u64).is_multiple_of(p) {
                return Err(TmodError::Unsupported(format!("real field Q(√{}) with p | h = {h}", field.m)));
            }
            let eps = fundamental_unit(field.m)?;
            Ok(RayClassSetup {
                field: field.clone(),
                p,
                h: h as u64,
                units: vec![UnitSource::Fixed(-1, 0), UnitSource::Fundamental(Box::new(eps))],
                classes: Vec::new(),
            })
        }
    }

    fn unit_elems(&self, g: &ResidueUnitGroup) -> Vec<Elem> {
        self.units
            .iter()
            .map(|u| match u {
                UnitSource::Fixed(a, b) => g.elem(*a, *b),
                UnitSource::Fundamental(eps) => eps.omega_coords_mod(self.field.disc, g.modulus()),
            })
            .collect()
    }
}

/// `Cl_F(p^n) ⊗ Z_p` with the exact-sequence cardinality checked.
#[derive(Debug, Clone)]
pub struct RayClassGroup {
    pub p: u64,
    pub n: u32,
    pub p_part: AbGroup,
    /// `#Cl_F(p^n) = h·#(O/p^n)^× / #image(O^×)`.
    pub order: u128,
}

pub fn ray_class_group(field: &QuadField, p: u64, n: u32) -> Result<RayClassGroup> {
    let setup = RayClassSetup::new(field, p)?;
    ray_class_group_with(&setup, n)
}

pub fn ray_class_group_with(setup: &RayClassSetup, n: u32) -> Result<RayClassGroup> {
    let p = setup.p;
    let g = ResidueUnitGroup::new(&setup.field, p, n)?;
    let ng = g.gens.len();
    let nc = setup.classes.len();
    let cols = ng + nc;
    let mut rows: Vec<Vec<i128>> = g.relations()?.into_iter().map(|mut r| {
        r.resize(cols, 0);
        r
    }).collect();
    let units = setup.unit_elems(&g);
    for &u in &units {
        let mut r: Vec<i128> = g.dlog_projected(u)?.into_iter().map(|x| x as i128).collect();
        r.resize(cols, 0);
        rows.push(r);
    }
    let k = n + val_p(setup.h as u128, p) + 3;
    let trimmed: Vec<Vec<i128>> = rows.iter().map(|r| r[..ng].to_vec()).collect();
    let g_mod_units = snf_group(&trimmed, ng, p, k)?;
    for (j, c) in setup.classes.iter().enumerate() {
        let a = g.elem_big(&c.alpha.0, &c.alpha.1);
        let mut r: Vec<i128> = g.dlog_projected(a)?.into_iter().map(|x| -(x as i128)).collect();
        r.resize(cols, 0);
        r[ng + j] = (c.exponent as i128) * (g.residue_order as i128);
        rows.push(r);
    }
    let p_part = snf_group(&rows, cols, p, k)?;
    let image: u128 = unit_image_order(&g, &units) as u128;
    let order = setup.h as u128 * g.order() / image;
    let expect = (p as u128).pow(val_p(order, p));
    if p_part.order() != expect || p_part.order() != g_mod_units.order() * (p as u128).pow(val_p(setup.h as u128, p)) {
        return Err(TmodError::Internal(format!(
            "exact sequence violated at level {n}: #Cl_p = {}, expected {expect}",
            p_part.order()
        )));
    }
    Ok(RayClassGroup { p, n, p_part, order })
}

/// Order of the subgroup generated by the images of the given units.
fn unit_image_order(g: &ResidueUnitGroup, units: &[Elem]) -> u64 {
    match units {
        [z] => g.order_of(*z),
        [minus_one, eps] => {
            let oe = g.order_of(*eps);
            let om = g.order_of(*minus_one);
            let inside = om == 1 || (oe.is_multiple_of(2) && g.reduce_top(g.pow(*eps, oe / 2)) == g.reduce_top(*minus_one));
            if inside {
                oe
            } else {
                oe * om
            }
        }
        _ => unreachable!("one or two unit generators"),
    }
}

/// Level-by-level data of a stabilization run.
#[derive(Debug, Clone)]
pub struct Stabilization {
    pub torsion: AbGroup,
    pub level: u32,
    pub history: Vec<AbGroup>,
}

fn split_growing(g: &AbGroup, r: usize) -> (Vec<u64>, Vec<u64>) {
    let inv = &g.invariants;
    let cut = inv.len().saturating_sub(r);
    (inv[..cut].to_vec(), inv[cut..].to_vec())
}

/// `𝒯_p(F)` from `Cl_F(p^n)_p` for `n = 2, 3, …, nmax`.
pub fn tp_structure(field: &QuadField, p: u64) -> Result<AbGroup> {
    tp_structure_run(field, p, DEFAULT_NMAX, 0).map(|s| s.torsion)
}

/// Runs until stabilization, then `extra` further levels that must agree.
pub fn tp_structure_run(field: &QuadField, p: u64, nmax: u32, extra: u32) -> Result<Stabilization> {
    let setup = RayClassSetup::new(field, p)?;
    let r = if field.is_imaginary() { 2 } else { 1 };
    let mut history = Vec::new();
    let mut prev: Option<(Vec<u64>, Vec<u64>)> = None;
    let mut n = 2;
    while n <= nmax {
        let g = ray_class_group_with(&setup, n)?.p_part;
        let (tors, free) = split_growing(&g, r);
        history.push(g);
        if let Some((pt, pf)) = &prev {
            let grew = free.len() == r && pf.len() == r && free.iter().zip(pf).all(|(a, b)| *a == p * *b);
            if grew && &tors == pt {
                let torsion = AbGroup { invariants: tors.clone() };
                for m in n + 1..=n + extra {
                    let g = ray_class_group_with(&setup, m)?.p_part;
                    let (t2, _) = split_growing(&g, r);
                    history.push(g);
                    if t2 != tors {
                        return Err(TmodError::Internal(format!("torsion changed after stabilization at level {m}")));
                    }
                }
                return Ok(Stabilization { torsion, level: n, history });
            }
        }
        prev = Some((tors, free));
        n += 1;
    }
    Err(TmodError::Stabilization(nmax))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn field(m: i64) -> QuadField {
        QuadField::new(m).unwrap()
    }

    /// Element orders of `(O/p^n)^×` by enumeration.
    fn brute_order_profile(g: &ResidueUnitGroup) -> HashMap<u64, usize> {
        let pn = g.p.pow(g.n);
        let mut prof = HashMap::new();
        for a in 0..pn {
            for b in 0..pn {
                let x = (a, b);
                if g.is_unit(x) {
                    *prof.entry(g.order_of(x)).or_insert(0) += 1;
                }
            }
        }
        prof
    }

    fn group_order_profile(gr: &AbGroup) -> HashMap<u64, usize> {
        let mut elems = vec![1u64];
        for &d in &gr.invariants {
            let mut next = Vec::new();
            for &o in &elems {
                for i in 0..d {
                    let oi = d / d.gcd(&i);
                    next.push(o.lcm(&oi));
                }
            }
            elems = next;
        }
        let mut prof = HashMap::new();
        for o in elems {
            *prof.entry(o).or_insert(0) += 1;
        }
        prof
    }

    #[test]
    fn residue_groups_small() {
        let g = ResidueUnitGroup::new(&field(-1), 2, 1).unwrap();
        assert_eq!(g.order(), 2);
        let g = ResidueUnitGroup::new(&field(-7), 2, 3).unwrap();
        assert_eq!(g.order(), 16);
        assert_eq!(g.p_structure().unwrap(), AbGroup::from_cyclic_orders(&[2, 2, 2, 2]));
        for m in [-1i64, -3, -5, -7, 2, 3, 5, 7, -15, 21] {
            for p in [2u64, 3, 5] {
                let g = ResidueUnitGroup::new(&field(m), p, 1).unwrap();
                if g.splitting == Splitting::Split {
                    assert_eq!(g.order(), ((p - 1) * (p - 1)) as u128);
                }
            }
        }
    }

    #[test]
    fn residue_groups_match_enumeration() {
        for m in [-1i64, -2, -3, -5, -7, -15, 2, 3, 5, 6, 17] {
            for (p, nmax) in [(2u64, 4u32), (3, 3), (5, 2)] {
                for n in 1..=nmax {
                    let g = ResidueUnitGroup::new(&field(m), p, n).unwrap();
                    let prof = brute_order_profile(&g);
                    let count: usize = prof.values().sum();
                    assert_eq!(count as u128, g.order(), "m={m} p={p} n={n}");
                    let sylow = g.p_structure().unwrap();
                    let rest = match g.splitting {
                        Splitting::Split => vec![p - 1, p - 1],
                        Splitting::Inert => vec![p * p - 1],
                        Splitting::Ramified => vec![p - 1],
                    };
                    let mut all = sylow.invariants.clone();
                    all.extend(rest);
                    let full = AbGroup::from_cyclic_orders(&all);
                    assert_eq!(group_order_profile(&full), prof, "m={m} p={p} n={n}");
                }
            }
        }
    }

    #[test]
    fn dlog_of_generators_is_basis() {
        let g = ResidueUnitGroup::new(&field(-6), 2, 5).unwrap();
        for (i, &x) in g.gens.iter().enumerate() {
            let d = g.dlog(x).unwrap();
            for (j, &c) in d.iter().enumerate() {
                assert_eq!(c, (i == j) as u64);
            }
        }
    }

    #[test]
    fn tp_examples() {
        assert!(tp_structure(&field(-1), 2).unwrap().is_trivial());
        assert_eq!(tp_structure(&field(-7), 2).unwrap(), AbGroup::from_cyclic_orders(&[2]));
        assert_eq!(tp_structure(&field(-41), 2).unwrap(), AbGroup::from_cyclic_orders(&[4]));
        assert_eq!(tp_structure(&field(7), 2).unwrap(), AbGroup::from_cyclic_orders(&[4]));
        assert_eq!(tp_structure(&field(-105), 2).unwrap().rank_divisible(2), 2);
    }

    #[test]
    fn free_rank_of_gaussian_field() {
        let s = tp_structure_run(&field(-1), 2, 24, 2).unwrap();
        for g in &s.history[2..] {
            assert_eq!(g.invariants.len(), 2);
        }
    }

    #[test]
    fn real_unsupported_when_p_divides_h() {
        // h(Q(√10)) = 2
        assert!(matches!(tp_structure(&field(10), 2), Err(TmodError::Unsupported(_))));
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn levels_respect_the_exact_sequence(m in -3000i64..3000, pi in 0usize..4) {
            let p = [2u64, 3, 5, 7][pi];
            let Ok(field) = QuadField::new(m) else { return Ok(()) };
            let setup = match RayClassSetup::new(&field, p) {
                Ok(s) => s,
                Err(TmodError::Unsupported(_)) => return Ok(()),
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            };
            let mut prev: Option<u128> = None;
            for n in 1..=5 {
                let g = ray_class_group_with(&setup, n).map_err(|e| TestCaseError::fail(e.to_string()))?;
                prop_assert_eq!(g.p_part.order(), (p as u128).pow(val_p(g.order, p)));
                if let Some(o) = prev {
                    // Cl(p^n) surjects onto Cl(p^{n-1})
                    prop_assert_eq!(g.p_part.order() % o, 0);
                }
                prev = Some(g.p_part.order());
            }
        }
    }
}
