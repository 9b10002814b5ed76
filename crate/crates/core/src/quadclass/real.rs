use super::{fundamental_unit, BQForm};
use crate::arith::{divisors, factor_u64, isqrt, Spf};
use crate::error::{Result, TmodError};
use num_integer::Integer;
use std::collections::HashMap;

/// Narrow class group of a real quadratic order, from cycles of reduced forms.
#[derive(Debug, Clone)]
pub struct NarrowClassGroup {
    pub disc: i64,
    sqrt_floor: i64,
    forms: Vec<BQForm>,
    index: HashMap<(i64, i64), usize>,
    cycle_of: Vec<usize>,
    /// Representative with `a > 0` for each cycle; cycle 0 is the identity class.
    reps: Vec<BQForm>,
}

impl NarrowClassGroup {
    pub fn new(disc: i64, spf: Option<&Spf>) -> Result<Self> {
        if disc <= 0 || disc.rem_euclid(4) > 1 {
            return Err(TmodError::Invalid(format!("bad positive discriminant {disc}")));
        }
        let s = isqrt(disc as u128) as i64;
        if s * s == disc {
            return Err(TmodError::Invalid(format!("{disc} is a square")));
        }
        let mut forms = Vec::new();
        let mut b = if (s - disc).rem_euclid(2) == 0 { s } else { s - 1 };
        while b > 0 {
            let n = ((disc - b * b) / 4) as u64;
            let fac = match spf {
                Some(t) if n <= t.bound() => t.factor(n),
                _ => factor_u64(n),
            };
            for a in divisors(&fac) {
                let a = a as i64;
                if 2 * a + b > s && 2 * a - b <= s {
                    let c = n as i64 / a;
                    if a.gcd(&b).gcd(&c) != 1 {
                        continue;
                    }
                    forms.push(BQForm::new(a, b, -c));
                    forms.push(BQForm::new(-a, b, c));
                }
            }
            b -= 2;
        }
        let index: HashMap<(i64, i64), usize> = forms.iter().enumerate().map(|(i, f)| ((f.a, f.b), i)).collect();
        let mut cycle_of = vec![usize::MAX; forms.len()];
        let mut reps = Vec::new();
        let start = index[&{
            let id = BQForm::identity(disc).reduce_indefinite();
            (id.a, id.b)
        }];
        let order: Vec<usize> = std::iter::once(start).chain((0..forms.len()).filter(|&i| i != start)).collect();
        for i in order {
            if cycle_of[i] != usize::MAX {
                continue;
            }
            let cid = reps.len();
            let mut rep = None;
            let mut j = i;
            loop {
                cycle_of[j] = cid;
                if forms[j].a > 0 && rep.is_none() {
                    rep = Some(forms[j]);
                }
                let nf = forms[j].rho(disc, s);
                j = index[&(nf.a, nf.b)];
                if j == i {
                    break;
                }
            }
            reps.push(rep.expect("cycle without positive form"));
        }
        Ok(NarrowClassGroup { disc, sqrt_floor: s, forms, index, cycle_of, reps })
    }

    pub fn h_plus(&self) -> usize {
        self.reps.len()
    }

    pub fn class_of(&self, f: &BQForm) -> usize {
        let mut g = *f;
        while !g.is_reduced_indefinite(self.sqrt_floor) {
            g = g.rho(self.disc, self.sqrt_floor);
        }
        self.cycle_of[self.index[&(g.a, g.b)]]
    }

    pub fn mul(&self, i: usize, j: usize) -> usize {
        self.class_of(&self.reps[i].compose_raw(&self.reps[j]))
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

    /// Classes that are squares.
    pub fn squares(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.h_plus()).map(|i| self.mul(i, i)).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn rank2(&self) -> u32 {
        let q = self.h_plus() / self.squares().len();
        q.trailing_zeros()
    }

    /// Number of reduced forms enumerated.
    pub fn reduced_count(&self) -> usize {
        self.forms.len()
    }
}

/// `(h⁺, h)` for `Q(√m)`, `m > 1` squarefree.
pub fn narrow_class_number_real(m: i64, spf: Option<&Spf>) -> Result<(usize, usize)> {
    let disc = if m % 4 == 1 { m } else { 4 * m };
    let ncg = NarrowClassGroup::new(disc, spf)?;
    let hp = ncg.h_plus();
    let u = fundamental_unit(m)?;
    let h = if u.norm == 1 { hp / 2 } else { hp };
    Ok((hp, h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_narrow_numbers() {
        assert_eq!(narrow_class_number_real(2, None).unwrap(), (1, 1));
        assert_eq!(narrow_class_number_real(14, None).unwrap(), (2, 1));
        assert_eq!(narrow_class_number_real(3, None).unwrap(), (2, 1));
        assert_eq!(narrow_class_number_real(10, None).unwrap(), (2, 2));
        assert_eq!(narrow_class_number_real(79, None).unwrap(), (6, 3));
        assert_eq!(narrow_class_number_real(229, None).unwrap(), (3, 3));
        assert_eq!(narrow_class_number_real(34, None).unwrap(), (4, 2));
    }

    #[test]
    fn group_law() {
        let g = NarrowClassGroup::new(4 * 79, None).unwrap();
        assert_eq!(g.h_plus(), 6);
        for i in 0..6 {
            assert_eq!(g.mul(0, i), i);
            assert_eq!(g.pow(i, 6), 0);
        }
        assert_eq!(g.rank2(), 1);
    }
}
