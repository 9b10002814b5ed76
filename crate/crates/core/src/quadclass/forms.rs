use crate::arith::isqrt;

/// Primitive binary quadratic form `ax² + bxy + cy²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BQForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-s0, -t0, -r0)
    } else {
        (s0, t0, r0)
    }
}

impl BQForm {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        BQForm { a, b, c }
    }

    pub fn disc(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn identity(disc: i64) -> Self {
        let b = disc.rem_euclid(2);
        BQForm { a: 1, b, c: (b * b - disc) / 4 }
    }

    /// Form attached to a prime ideal above `p` with `(D/p) ≠ -1`, `b ≥ 0` minimal.
    pub fn prime_form(disc: i64, p: u64) -> Option<Self> {
        let p = p as i64;
        let four_p = 4 * p;
        (0..=p).find(|&b| (b * b - disc).rem_euclid(four_p) == 0).map(|b| BQForm {
            a: p,
            b,
            c: (b * b - disc) / four_p,
        })
    }

    pub fn inverse(&self) -> Self {
        BQForm { a: self.a, b: -self.b, c: self.c }
    }

    /// Gauss composition without reduction. Both forms need `a > 0`.
    pub fn compose_raw(&self, other: &BQForm) -> BQForm {
        let (f1, f2) = if self.a > other.a { (other, self) } else { (self, other) };
        let (a1, b1) = (f1.a as i128, f1.b as i128);
        let (a2, b2, c2) = (f2.a as i128, f2.b as i128, f2.c as i128);
        let s = (b1 + b2) / 2;
        let n = b2 - s;
        let (y1, d) = if a2 % a1 == 0 {
            (0, a1)
        } else {
            let (u, _v, d) = egcd(a2, a1);
            (u, d)
        };
        let (x2, y2, d1) = if s % d == 0 {
            (0, -1, d)
        } else {
            let (x2, y2, d1) = egcd(s, d);
            (x2, -y2, d1)
        };
        let v1 = a1 / d1;
        let v2 = a2 / d1;
        let r = (y1 * y2 * n - x2 * c2).rem_euclid(v1);
        let b3 = b2 + 2 * v2 * r;
        let a3 = v1 * v2;
        let c3 = (c2 * d1 + r * (b2 + v2 * r)) / v1;
        let out = BQForm { a: a3 as i64, b: b3 as i64, c: c3 as i64 };
        debug_assert_eq!(out.disc(), self.disc());
        out
    }

    /// Reduction of a positive definite form.
    pub fn reduce_definite(&self) -> BQForm {
        let (mut a, mut b, mut c) = (self.a as i128, self.b as i128, self.c as i128);
        loop {
            if b > a || b <= -a {
                let s = (a - b).div_euclid(2 * a);
                c += s * (a * s + b);
                b += 2 * a * s;
            }
            if a > c {
                (a, b, c) = (c, -b, a);
            } else {
                break;
            }
        }
        if (a == c || b == a) && b < 0 {
            b = -b;
        }
        if b == -a {
            b = a;
        }
        BQForm { a: a as i64, b: b as i64, c: c as i64 }
    }

    pub fn compose_definite(&self, other: &BQForm) -> BQForm {
        self.compose_raw(other).reduce_definite()
    }

    pub fn is_reduced_definite(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        b.abs() <= a && a <= c && (b >= 0 || (b.abs() != a && a != c))
    }

    /// Reducedness for indefinite forms: `|√D − 2|a|| < b < √D`.
    pub fn is_reduced_indefinite(&self, sqrt_floor: i64) -> bool {
        let (a, b) = (self.a.abs(), self.b);
        b > 0 && b <= sqrt_floor && b + 2 * a > sqrt_floor && 2 * a - b <= sqrt_floor
    }

    /// One step of the indefinite reduction operator.
    pub fn rho(&self, disc: i64, sqrt_floor: i64) -> BQForm {
        let c = self.c;
        let ac = c.abs();
        let m2 = 2 * ac;
        let b = -self.b;
        let nb = if ac > sqrt_floor {
            let mut r = b.rem_euclid(m2);
            if r > ac {
                r -= m2;
            }
            r
        } else {
            let lo = sqrt_floor + 1 - m2;
            lo + (b - lo).rem_euclid(m2)
        };
        let nc = ((nb as i128 * nb as i128 - disc as i128) / (4 * c as i128)) as i64;
        BQForm { a: c, b: nb, c: nc }
    }

    pub fn reduce_indefinite(&self) -> BQForm {
        let d = self.disc();
        let s = isqrt(d as u128) as i64;
        let mut f = *self;
        while !f.is_reduced_indefinite(s) {
            f = f.rho(d, s);
        }
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn definite_reduction() {
        let f = BQForm::new(6, 5, 2).reduce_definite();
        assert!(f.is_reduced_definite());
        assert_eq!(f.disc(), 25 - 48);
    }

    #[test]
    fn composition_disc_and_identity() {
        let d = -23;
        let g = BQForm::prime_form(d, 2).unwrap().reduce_definite();
        assert_eq!(g, BQForm::new(2, 1, 3));
        let g2 = g.compose_definite(&g);
        let g3 = g2.compose_definite(&g);
        assert_eq!(g3, BQForm::identity(d));
        assert_eq!(g.compose_definite(&g.inverse()), BQForm::identity(d));
    }

    #[test]
    fn indefinite_rho_stays_reduced() {
        let d = 4 * 79;
        let s = isqrt(d as u128) as i64;
        let f = BQForm::identity(d).reduce_indefinite();
        assert!(f.is_reduced_indefinite(s));
        let mut g = f;
        for _ in 0..50 {
            g = g.rho(d, s);
            assert!(g.is_reduced_indefinite(s));
            assert_eq!(g.disc(), d);
        }
    }
}
