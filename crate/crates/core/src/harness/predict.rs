//! Closed-form densities: the 4-rank law and the Cohen–Lenstra style weights.

use crate::linalg::AbGroup;

/// `η_s(q) = ∏_{i=1}^{s} (1 − q^{−i})`; `None` gives `η_∞`.
pub fn eta(s: Option<u32>, q: f64) -> f64 {
    let mut acc = 1.0;
    let mut term = 1.0;
    let mut i = 0u32;
    loop {
        if let Some(s) = s {
            if i >= s {
                return acc;
            }
        }
        term /= q;
        if term < 1e-20 {
            return acc;
        }
        acc *= 1.0 - term;
        i += 1;
    }
}

/// `d_r = η_∞(2) / (2^{r(r+1)} η_r(2) η_{r+1}(2))`.
pub fn predicted_density_rk4(r: u32) -> f64 {
    let e = (r * (r + 1)) as i32;
    eta(None, 2.0) / (2f64.powi(e) * eta(Some(r), 2.0) * eta(Some(r + 1), 2.0))
}

/// `#Aut(G)` for a finite abelian p-group with invariants `p^{e_1} | … | p^{e_n}`.
pub fn aut_order(p: u64, g: &AbGroup) -> f64 {
    let e: Vec<i32> = g.invariants.iter().map(|&d| crate::arith::val_p(d as u128, p) as i32).collect();
    let n = e.len();
    let pf = p as f64;
    let mut out = 1.0;
    for k in 0..n {
        let d = (0..n).filter(|&l| e[l] <= e[k]).count();
        let c = (0..n).filter(|&l| e[l] < e[k]).count() + 1;
        out *= pf.powi(d as i32) - pf.powi(k as i32);
        out *= pf.powi(e[k] * (n - d) as i32);
        out *= pf.powi((e[k] - 1) * (n - c + 1) as i32);
    }
    out
}

/// Targets of the closed-form and conjectural densities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Conjecture {
    /// `6𝒯_p(F) ≅ G` over all imaginary or all real quadratic fields.
    FullFamily { p: u64, imaginary: bool, group: AbGroup },
    /// `t₂(−l) = 2^{i+3}` among `l ≡ 1 mod 16`.
    MinusL { i: u32 },
    /// `t₂(−2l) = 2^{i+2}` among `l ≡ 1 mod 16`.
    MinusTwoL { i: u32 },
    /// `t₂(l) = 2^{i+1+e}` among `l ≡ (−1)^e mod 8`.
    PlusL { e: u32, i: u32 },
    /// `t₂(2l) = 2^{i+1}` among `l ≡ (−1)^e mod 8`.
    PlusTwoL { e: u32, i: u32 },
    /// `t₂(l) = 2^{i+1}` among `l ≡ a mod 16`, `a ∈ {1, 9}`.
    PlusLResidue { a: u32, i: u32 },
}

pub fn predicted_density_conjecture(target: &Conjecture) -> f64 {
    match target {
        Conjecture::FullFamily { p, imaginary, group } => {
            let q = *p as f64;
            let aut = aut_order(*p, group);
            if *imaginary {
                eta(None, q) / eta(Some(1), q) / (group.order() as f64 * aut)
            } else {
                eta(None, q) / aut
            }
        }
        Conjecture::MinusL { i } | Conjecture::MinusTwoL { i } => 3.0 / 4f64.powi(*i as i32 + 1),
        Conjecture::PlusL { i, .. } | Conjecture::PlusTwoL { i, .. } | Conjecture::PlusLResidue { i, .. } => {
            0.5f64.powi(*i as i32 + 1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rk4_values() {
        assert!((predicted_density_rk4(0) - 0.5776).abs() < 5e-5);
        assert!((predicted_density_rk4(1) - 0.3851).abs() < 5e-5);
        assert!((predicted_density_rk4(2) - 0.0367).abs() < 5e-5);
        let total: f64 = (0..30).map(predicted_density_rk4).sum();
        assert!((total - 1.0).abs() < 1e-6);
        assert!(predicted_density_rk4(8) < 1e-15);
    }

    #[test]
    fn aut_orders() {
        let g = |v: &[u64]| AbGroup { invariants: v.to_vec() };
        assert_eq!(aut_order(5, &g(&[5])), 4.0);
        assert_eq!(aut_order(5, &g(&[5, 5])), 480.0);
        assert_eq!(aut_order(5, &g(&[5, 25])), 2000.0);
        assert_eq!(aut_order(2, &g(&[2, 2, 2])), 168.0);
        assert_eq!(aut_order(2, &g(&[2, 4])), 8.0);
        assert_eq!(aut_order(3, &AbGroup::trivial()), 1.0);
    }

    #[test]
    fn table_rows() {
        let d = |p, imaginary, v: &[u64]| {
            predicted_density_conjecture(&Conjecture::FullFamily { p, imaginary, group: AbGroup { invariants: v.to_vec() } })
        };
        let close = |a: f64, b: f64| ((a - b) / b).abs() < 5e-4;
        assert!(close(d(5, false, &[5]), 0.1901));
        assert!(close(d(5, false, &[25]), 0.03802));
        assert!(close(d(5, false, &[5, 5]), 1.584e-3));
        assert!(close(d(5, false, &[5, 25]), 3.802e-4));
        assert!(close(d(5, false, &[5, 5, 5]), 5.110e-7));
        assert!(close(d(7, false, &[7]), 0.1395));
        assert!(close(d(5, true, &[5]), 0.04752));
        assert!(close(d(5, true, &[25]), 1.901e-3));
        assert!(close(d(7, true, &[7]), 0.02324));
        assert!(close(d(7, true, &[7, 7]), 9.883e-6));
        assert_eq!(predicted_density_conjecture(&Conjecture::MinusL { i: 0 }), 0.75);
        assert_eq!(predicted_density_conjecture(&Conjecture::PlusL { e: 0, i: 1 }), 0.25);
        assert!(close(predicted_density_conjecture(&Conjecture::MinusL { i: 2 }), 0.04688));
    }

    #[test]
    fn weights_are_probabilities() {
        // all groups of exponent ≤ p³ and rank ≤ 3 carry almost all of the mass
        for (p, imaginary) in [(5u64, true), (5, false), (7, true)] {
            let mut total = 0.0;
            let orders = [1u64, p, p * p, p * p * p];
            for a in 0..4 {
                for b in a..4 {
                    for c in b..4 {
                        let inv: Vec<u64> = [a, b, c].iter().map(|&i| orders[i]).filter(|&d| d > 1).collect();
                        total += predicted_density_conjecture(&Conjecture::FullFamily {
                            p,
                            imaginary,
                            group: AbGroup { invariants: inv },
                        });
                    }
                }
            }
            assert!(total > 0.99 && total < 1.0 + 1e-12, "p={p} {total}");
        }
    }
}
