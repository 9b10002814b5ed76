//! Named verification suites; failures are report content, never errors.

use crate::arith::{is_prime, jacobi, powmod, sieve_primes, val_p, Spf};
use crate::localsym::{hilbert_additive_q, product_formula_check, Place};
use crate::padic::regulator_valuation;
use crate::quadclass::{fundamental_unit, narrow_class_number_real, QuadField};
use crate::rayclass::{ray_class_group, tp_structure_run, DEFAULT_NMAX};
use crate::tmod::{
    classify_imaginary_prime_family, coates_with_unit, congruence_identity_check, fast_path_legal,
    nu2_t2_2l_from_unit, nu2_t2_l_from_unit, real_prime_triple, rk2_T2, rk2_T2_via_narrow_S, rk4_K2_matrix,
    rk4_T2, rk4_T2_full,
};
use crate::error::TmodError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

/// Suite names with their default bounds.
pub const SUITES: [(&str, u64); 13] = [
    ("classifier-oracle", 10_000),
    ("congruence-mod16", 100_000),
    ("l223", 0),
    ("redei-vs-rayclass", 4_000),
    ("comparison", 10_000),
    ("two-route", 10_000),
    ("product-formula", 10_000),
    ("jacobi-reciprocity", 400),
    ("hilbert", 10_000),
    ("exact-sequence", 200),
    ("a-even", 100_000),
    ("lemma-units", 10_000),
    ("coates-vs-rayclass", 100_000),
];

const SEED: u64 = 0x7_2d0d;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub suite: String,
    pub bound: u64,
    pub checked: usize,
    pub skipped: usize,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
}

impl VerifyReport {
    fn new(suite: &str, bound: u64) -> Self {
        VerifyReport { suite: suite.into(), bound, checked: 0, skipped: 0, failures: Vec::new(), notes: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.checked > 0
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{status} {} (bound {}): {} checked", self.suite, self.bound, self.checked)?;
        if self.skipped > 0 {
            write!(f, ", {} skipped", self.skipped)?;
        }
        if !self.failures.is_empty() {
            write!(f, ", {} failures", self.failures.len())?;
        }
        for n in &self.notes {
            write!(f, "\n  {n}")?;
        }
        for x in self.failures.iter().take(20) {
            write!(f, "\n  counterexample: {x}")?;
        }
        Ok(())
    }
}

fn squarefree_upto(b: u64) -> Vec<u64> {
    match Spf::new(b.max(2)) {
        Ok(spf) => (1..=b).filter(|&m| spf.is_squarefree(m)).collect(),
        Err(_) => Vec::new(),
    }
}

fn primes_pm1_mod8(b: u64) -> Vec<u64> {
    sieve_primes(b).unwrap_or_default().into_iter().filter(|l| l % 8 == 1 || l % 8 == 7).collect()
}

/// Runs a registered suite; `bound = None` uses its default.
pub fn verify_suite(name: &str, bound: Option<u64>) -> Option<VerifyReport> {
    let default = SUITES.iter().find(|s| s.0 == name)?.1;
    let b = bound.unwrap_or(default);
    let mut r = VerifyReport::new(name, b);
    match name {
        "classifier-oracle" => classifier_oracle(&mut r, b),
        "congruence-mod16" => congruence(&mut r, b),
        "l223" => l223(&mut r),
        "redei-vs-rayclass" => redei_vs_rayclass(&mut r, b),
        "comparison" => comparison(&mut r, b),
        "two-route" => two_route(&mut r, b),
        "product-formula" => product_formula(&mut r, b),
        "jacobi-reciprocity" => jacobi_reciprocity(&mut r, b),
        "hilbert" => hilbert(&mut r, b),
        "exact-sequence" => exact_sequence(&mut r, b),
        "a-even" => a_even(&mut r, b),
        "lemma-units" => lemma_units(&mut r, b),
        "coates-vs-rayclass" => coates_vs_rayclass(&mut r, b),
        _ => return None,
    }
    Some(r)
}

fn classifier_oracle(r: &mut VerifyReport, b: u64) {
    for l in primes_pm1_mod8(b.saturating_sub(1)) {
        let (tl, t2l) = match classify_imaginary_prime_family(l) {
            Ok(t) => t,
            Err(e) => return r.failures.push(format!("l={l}: {e}")),
        };
        for (m, tag) in [(-(l as i64), tl), (-2 * l as i64, t2l)] {
            match QuadField::new(m).and_then(|f| tp_structure_run(&f, 2, DEFAULT_NMAX, 0)) {
                Ok(s) => {
                    let g = s.torsion;
                    let ok = g.invariants.len() == 1 && tag.admits(g.order() as u64);
                    r.check(ok, || format!("m={m}: oracle {g}, classifier {tag}"));
                }
                Err(e) => r.check(false, || format!("m={m}: {e}")),
            }
        }
    }
}

fn congruence(r: &mut VerifyReport, b: u64) {
    for l in sieve_primes(b.saturating_sub(1)).unwrap_or_default().into_iter().filter(|l| l % 8 == 7) {
        r.check(congruence_identity_check(l), || match real_prime_triple(l) {
            Ok(t) => format!("l={l}: {t:?}"),
            Err(e) => format!("l={l}: {e}"),
        });
    }
    l223(r);
}

fn l223(r: &mut VerifyReport) {
    match real_prime_triple(223) {
        Ok(t) => {
            r.notes.push(format!("l=223: (t2(l), 2t2(2l), h2(-2l)) = {t:?}"));
            r.check(t == (16, 256, 32), || format!("l=223: {t:?} != (16, 256, 32)"));
        }
        Err(e) => r.check(false, || format!("l=223: {e}")),
    }
}

fn redei_vs_rayclass(r: &mut VerifyReport, b: u64) {
    for m in squarefree_upto(b) {
        let res = QuadField::new(-(m as i64)).and_then(|f| {
            let redei = rk4_T2(&f)?;
            let oracle = tp_structure_run(&f, 2, DEFAULT_NMAX, 0)?.torsion;
            Ok((redei, oracle))
        });
        match res {
            Ok((k, g)) => r.check(k == g.rank_divisible(4), || format!("m={m}: Rédei {k}, oracle {g}")),
            Err(e) => r.check(false, || format!("m={m}: {e}")),
        }
    }
}

fn comparison(r: &mut VerifyReport, b: u64) {
    for m in squarefree_upto(b).into_iter().filter(|m| m % 4 == 3) {
        let Ok(f) = QuadField::new(-(m as i64)) else { continue };
        if !fast_path_legal(&f) {
            continue;
        }
        let res = rk4_T2_full(&f).and_then(|t| Ok((t, rk4_K2_matrix(m)?)));
        match res {
            Ok((t, k)) => {
                r.check(t + 1 == k && rk2_T2(&f) + 1 == f.t(), || format!("m={m}: rk4 T2 {t}, rk4 K2 {k}"))
            }
            Err(e) => r.check(false, || format!("m={m}: {e}")),
        }
    }
}

fn two_route(r: &mut VerifyReport, b: u64) {
    let spf = Spf::new(4 * b.max(2)).ok();
    for m in squarefree_upto(b) {
        for s in [-(m as i64), m as i64] {
            if s == 1 {
                continue;
            }
            match QuadField::new(s).and_then(|f| Ok((rk2_T2(&f), rk2_T2_via_narrow_S(&f, spf.as_ref())?))) {
                Ok((a, c)) => r.check(a == c, || format!("m={s}: formula {a}, narrow S-class route {c}")),
                Err(e) => r.check(false, || format!("m={s}: {e}")),
            }
        }
    }
}

fn random_rational(rng: &mut ChaCha8Rng) -> (i128, i128) {
    let mut num: i128 = rng.gen_range(1..=1_000_000);
    if rng.gen_bool(0.5) {
        num = -num;
    }
    (num, rng.gen_range(1..=1_000))
}

fn product_formula(r: &mut VerifyReport, b: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..b {
        let (x, y) = (random_rational(&mut rng), random_rational(&mut rng));
        r.check(product_formula_check(x, y).is_ok(), || format!("{x:?}, {y:?}"));
    }
}

fn jacobi_reciprocity(r: &mut VerifyReport, b: u64) {
    for m in (3..b).step_by(2) {
        for n in (3..b).step_by(2) {
            let (a, c) = (jacobi(m as i64, n), jacobi(n as i64, m));
            if a == 0 {
                r.check(c == 0, || format!("({m}/{n}) = 0 but ({n}/{m}) = {c}"));
                continue;
            }
            let sign = if (m % 4 == 3) && (n % 4 == 3) { -1 } else { 1 };
            r.check(a * c == sign, || format!("({m}/{n})({n}/{m}) = {}", a * c));
            if is_prime(n) && m % n != 0 {
                let euler = powmod(m % n, (n - 1) / 2, n);
                let e = if euler == 1 { 1 } else { -1 };
                r.check(a == e, || format!("({m}/{n}) = {a}, Euler criterion {e}"));
            }
        }
    }
}

fn hilbert(r: &mut VerifyReport, b: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let places = [Place::Infinite, Place::Finite(2), Place::Finite(3), Place::Finite(5), Place::Finite(7), Place::Finite(13)];
    for _ in 0..b {
        let v = places[rng.gen_range(0..places.len())];
        let (x, y, z) = (random_rational(&mut rng), random_rational(&mut rng), random_rational(&mut rng));
        let h = |a, c| hilbert_additive_q(a, c, v);
        let yz = (y.0 * z.0, y.1 * z.1);
        r.check(h(x, y) == h(y, x), || format!("symmetry at {v:?}: {x:?}, {y:?}"));
        r.check(h(x, yz) == h(x, y) ^ h(x, z), || format!("bilinearity at {v:?}: {x:?}, {y:?}, {z:?}"));
        let minus_x = (-x.0, x.1);
        r.check(h(x, minus_x) == 0, || format!("[x, −x] ≠ 0 at {v:?}: {x:?}"));
    }
}

fn exact_sequence(r: &mut VerifyReport, b: u64) {
    for m in squarefree_upto(b) {
        for s in [-(m as i64), m as i64] {
            let Ok(f) = QuadField::new(s) else { continue };
            for p in [2u64, 3, 5] {
                for n in 1..=6u32 {
                    match ray_class_group(&f, p, n) {
                        Ok(_) => r.check(true, String::new),
                        Err(TmodError::Unsupported(_)) => {
                            r.skipped += 1;
                            break;
                        }
                        Err(TmodError::Precision { .. }) => break,
                        Err(e) => r.check(false, || format!("m={s} p={p} n={n}: {e}")),
                    }
                }
            }
        }
    }
}

fn a_even(r: &mut VerifyReport, b: u64) {
    for l in sieve_primes(b.saturating_sub(1)).unwrap_or_default().into_iter().filter(|l| l % 4 == 3) {
        match fundamental_unit(l as i64).map(|e| e.ab_wrapping()) {
            Ok(Some((a, _))) => r.check(a % 2 == 0, || format!("l={l}: a_l odd")),
            Ok(None) => r.check(false, || format!("l={l}: half-integral unit")),
            Err(e) => r.check(false, || format!("l={l}: {e}")),
        }
    }
}

fn lemma_units(r: &mut VerifyReport, b: u64) {
    let spf = Spf::new(2 * b.max(2)).ok();
    for l in primes_pm1_mod8(b.saturating_sub(1)) {
        let res = (|| {
            let fl = QuadField::new(l as i64)?;
            let f2l = QuadField::new(2 * l as i64)?;
            let el = fundamental_unit(l as i64)?;
            let e2l = fundamental_unit(2 * l as i64)?;
            let (a_l, _) = el.nu2_ab()?.ok_or(TmodError::Invalid("half-integral".into()))?;
            let (_, b_2l) = e2l.nu2_ab()?.ok_or(TmodError::Invalid("half-integral".into()))?;
            let reg_l = regulator_valuation(&fl, 2, &el)?.0;
            let reg_2l = regulator_valuation(&f2l, 2, &e2l)?.0;
            let (_, h2l) = narrow_class_number_real(2 * l as i64, spf.as_ref())?;
            let t_l = coates_with_unit(&fl, 2, &el, spf.as_ref())?;
            let t_2l = coates_with_unit(&f2l, 2, &e2l, spf.as_ref())?;
            Ok::<_, TmodError>([
                (reg_l, 2 * a_l as i64, "2ν₂(log ε_l) vs 2ν₂(a_l)"),
                (reg_2l, 1 + 2 * b_2l as i64, "2ν₂(log ε_2l) vs 1 + 2ν₂(b_2l)"),
                (t_l, nu2_t2_l_from_unit(&el)?, "ν₂(t₂(l)) vs ν₂(a_l) − 1"),
                (t_2l, nu2_t2_2l_from_unit(&e2l, h2l)?, "ν₂(t₂(2l)) vs ν₂(h(2l)) + ν₂(b_2l) − 1"),
            ])
        })();
        match res {
            Ok(pairs) => {
                for (x, y, what) in pairs {
                    r.check(x == y, || format!("l={l}: {what}: {x} ≠ {y}"));
                }
            }
            Err(e) => r.check(false, || format!("l={l}: {e}")),
        }
    }
}

fn coates_vs_rayclass(r: &mut VerifyReport, b: u64) {
    let p = 5;
    let spf = Spf::new(b.max(2)).ok();
    for m in squarefree_upto(b).into_iter().filter(|&m| m > 1) {
        let disc = if m % 4 == 1 { m } else { 4 * m };
        if disc > b {
            continue;
        }
        let Ok(f) = QuadField::new(m as i64) else { continue };
        let oracle = match tp_structure_run(&f, p, DEFAULT_NMAX, 0) {
            Ok(s) => s.torsion,
            Err(TmodError::Unsupported(_)) => {
                r.skipped += 1;
                continue;
            }
            Err(e) => {
                r.check(false, || format!("m={m}: oracle {e}"));
                continue;
            }
        };
        match fundamental_unit(m as i64).and_then(|e| coates_with_unit(&f, p, &e, spf.as_ref())) {
            Ok(v) => {
                let ov = val_p(oracle.order(), p) as i64;
                r.check(v == ov, || format!("m={m}: Coates ν₅ = {v}, oracle {oracle}"));
            }
            Err(e) => r.check(false, || format!("m={m}: Coates {e}")),
        }
    }
    r.notes.push(format!("p = {p}; fields with 5 | h skipped"));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        for (name, b) in [
            ("classifier-oracle", 300),
            ("congruence-mod16", 500),
            ("l223", 0),
            ("redei-vs-rayclass", 200),
            ("comparison", 600),
            ("two-route", 200),
            ("product-formula", 300),
            ("jacobi-reciprocity", 60),
            ("hilbert", 500),
            ("exact-sequence", 15),
            ("a-even", 2000),
            ("lemma-units", 600),
            ("coates-vs-rayclass", 1500),
        ] {
            let rep = verify_suite(name, Some(b)).unwrap();
            assert!(rep.passed(), "{rep}");
        }
        assert!(verify_suite("nope", None).is_none());
    }
}
