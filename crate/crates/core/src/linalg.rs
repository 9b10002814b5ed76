//! Dense F₂ matrices, finite abelian groups and Smith normal form over `Z/p^K`.

use crate::arith::{inv_mod, mulmod};
use std::fmt;

/// Dense matrix over F₂, rows bit-packed into `u64` words.
#[derive(Clone, PartialEq, Eq)]
pub struct F2Mat {
    rows: usize,
    cols: usize,
    words: usize,
    bits: Vec<u64>,
}

impl F2Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64).max(1);
        F2Mat { rows, cols, words, bits: vec![0; rows * words] }
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = F2Mat::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged rows");
            for (j, &b) in r.iter().enumerate() {
                m.set(i, j, b & 1);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        ((self.bits[i * self.words + j / 64] >> (j % 64)) & 1) as u8
    }

    pub fn set(&mut self, i: usize, j: usize, b: u8) {
        let w = &mut self.bits[i * self.words + j / 64];
        if b & 1 == 1 {
            *w |= 1 << (j % 64);
        } else {
            *w &= !(1 << (j % 64));
        }
    }

    pub fn row(&self, i: usize) -> Vec<u8> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    pub fn column(&self, j: usize) -> Vec<u8> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Horizontal concatenation.
    pub fn hcat(&self, other: &F2Mat) -> F2Mat {
        assert_eq!(self.rows, other.rows);
        let mut m = F2Mat::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j));
            }
            for j in 0..other.cols {
                m.set(i, self.cols + j, other.get(i, j));
            }
        }
        m
    }

    pub fn rank(&self) -> usize {
        let mut b = self.bits.clone();
        let w = self.words;
        let mut rank = 0;
        for col in 0..self.cols {
            let (cw, cb) = (col / 64, 1u64 << (col % 64));
            let Some(piv) = (rank..self.rows).find(|&r| b[r * w + cw] & cb != 0) else { continue };
            if piv != rank {
                for k in 0..w {
                    b.swap(piv * w + k, rank * w + k);
                }
            }
            for r in 0..self.rows {
                if r != rank && b[r * w + cw] & cb != 0 {
                    for k in 0..w {
                        b[r * w + k] ^= b[rank * w + k];
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}

impl fmt::Debug for F2Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "F2Mat {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let s: String = self.row(i).iter().map(|&b| if b == 1 { '1' } else { '0' }).collect();
            writeln!(f, "  {s}")?;
        }
        Ok(())
    }
}

/// Finite abelian group `Z/d_1 × ... × Z/d_r` with `d_1 | d_2 | ... | d_r`, all `d_i ≥ 2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct AbGroup {
    pub invariants: Vec<u64>,
}

impl AbGroup {
    pub fn trivial() -> Self {
        AbGroup { invariants: Vec::new() }
    }

    /// Builds the invariant-factor form from arbitrary cyclic orders.
    pub fn from_cyclic_orders(orders: &[u64]) -> Self {
        use std::collections::BTreeMap;
        // prime-power decomposition per prime
        let mut pp: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for &o in orders {
            for (p, e) in crate::arith::factor_u64(o) {
                pp.entry(p).or_default().push(p.pow(e));
            }
        }
        let r = pp.values().map(|v| v.len()).max().unwrap_or(0);
        let mut inv = vec![1u64; r];
        for v in pp.values_mut() {
            v.sort_unstable();
            let off = r - v.len();
            for (i, q) in v.iter().enumerate() {
                inv[off + i] *= q;
            }
        }
        AbGroup { invariants: inv }
    }

    pub fn order(&self) -> u128 {
        self.invariants.iter().map(|&d| d as u128).product()
    }

    /// Number of invariant factors divisible by `n`.
    pub fn rank_divisible(&self, n: u64) -> usize {
        self.invariants.iter().filter(|&&d| d % n == 0).count()
    }

    pub fn p_part(&self, p: u64) -> AbGroup {
        let inv: Vec<u64> = self
            .invariants
            .iter()
            .map(|&d| p.pow(crate::arith::val_p(d as u128, p)))
            .filter(|&q| q > 1)
            .collect();
        AbGroup { invariants: inv }
    }

    pub fn is_trivial(&self) -> bool {
        self.invariants.is_empty()
    }
}

impl fmt::Display for AbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.invariants.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.invariants.iter().map(|d| format!("Z/{d}")).collect();
        write!(f, "{}", parts.join("x"))
    }
}

impl AbGroup {
    /// Parses the output of `Display`.
    pub fn parse(s: &str) -> Option<AbGroup> {
        if s == "1" {
            return Some(AbGroup::trivial());
        }
        let inv: Option<Vec<u64>> = s.split('x').map(|t| t.strip_prefix("Z/")?.parse().ok()).collect();
        inv.map(|invariants| AbGroup { invariants })
    }
}

/// Smith normal form of an integer relation matrix over the local ring `Z/p^k`.
/// Returns the p-adic valuations of the nonzero non-unit diagonal entries and the
/// number of diagonal entries that vanish modulo `p^k`.
pub fn local_snf(mat: &[Vec<u64>], cols: usize, p: u64, k: u32) -> (Vec<u32>, usize) {
    let modulus = p.pow(k);
    let mut a: Vec<Vec<u64>> = mat.iter().map(|r| r.iter().map(|&x| x % modulus).collect()).collect();
    let rows = a.len();
    let val = |x: u64| -> u32 {
        if x == 0 {
            k
        } else {
            crate::arith::val_p(x as u128, p)
        }
    };
    let mut out = Vec::new();
    let mut r0 = 0;
    let mut c0 = 0;
    while r0 < rows && c0 < cols {
        let mut best = (k, 0, 0);
        'search: for (i, row) in a.iter().enumerate().skip(r0) {
            for (j, &x) in row.iter().enumerate().skip(c0) {
                let v = val(x);
                if v < best.0 {
                    best = (v, i, j);
                    if v == 0 {
                        break 'search;
                    }
                }
            }
        }
        let (v, pi, pj) = best;
        if v == k {
            break;
        }
        a.swap(r0, pi);
        for row in a.iter_mut() {
            row.swap(c0, pj);
        }
        let pv = p.pow(v);
        let unit = a[r0][c0] / pv;
        let uinv = inv_mod(unit % modulus, modulus).expect("unit");
        for x in a[r0].iter_mut() {
            *x = mulmod(*x, uinv, modulus);
        }
        // pivot is now p^v; eliminate column then row
        for i in 0..rows {
            if i != r0 && a[i][c0] != 0 {
                let w = a[i][c0] / pv;
                for j in c0..cols {
                    let s = mulmod(w, a[r0][j], modulus);
                    a[i][j] = (a[i][j] + modulus - s) % modulus;
                }
            }
        }
        let prow: Vec<u64> = a[r0].clone();
        for j in c0 + 1..cols {
            if prow[j] != 0 {
                let w = prow[j] / pv;
                for row in a.iter_mut().skip(r0) {
                    let s = mulmod(w, row[c0], modulus);
                    row[j] = (row[j] + modulus - s) % modulus;
                }
            }
        }
        if v > 0 {
            out.push(v);
        }
        r0 += 1;
        c0 += 1;
    }
    let zero = cols - c0;
    (out, zero)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_basic() {
        let m = F2Mat::from_rows(&[vec![1, 1, 1], vec![1, 1, 1]]);
        assert_eq!(m.rank(), 1);
        let id = F2Mat::from_rows(&[vec![1, 0], vec![0, 1]]);
        assert_eq!(id.rank(), 2);
        assert_eq!(F2Mat::zeros(3, 0).rank(), 0);
        let wide = F2Mat::zeros(2, 130);
        assert_eq!(wide.rank(), 0);
    }

    #[test]
    fn abgroup_invariants() {
        let g = AbGroup::from_cyclic_orders(&[2, 3, 4]);
        assert_eq!(g.invariants, vec![2, 12]);
        assert_eq!(g.to_string(), "Z/2xZ/12");
        assert_eq!(AbGroup::parse("Z/2xZ/12"), Some(g));
        assert_eq!(AbGroup::parse("1"), Some(AbGroup::trivial()));
    }

    #[test]
    fn snf_local() {
        // Z^2 / <(2,0),(0,4)> has 2-part [1,2]
        let (v, z) = local_snf(&[vec![2, 0], vec![0, 4]], 2, 2, 10);
        let mut v = v;
        v.sort();
        assert_eq!((v, z), (vec![1, 2], 0));
        // Z^2/<(2,4),(6,8)>: det -8, gcd 2 -> Z/2 x Z/4
        let mut r = local_snf(&[vec![2, 4], vec![6, 8]], 2, 2, 10).0;
        r.sort();
        assert_eq!(r, vec![1, 2]);
        let (_, z) = local_snf(&[vec![3, 0]], 2, 3, 5);
        assert_eq!(z, 1);
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn cyclic_decomposition_keeps_order(orders in prop::collection::vec(2u64..200, 0..6)) {
            let g = AbGroup::from_cyclic_orders(&orders);
            prop_assert_eq!(g.order(), orders.iter().map(|&d| d as u128).product::<u128>());
            prop_assert!(g.invariants.windows(2).all(|w| w[1] % w[0] == 0));
            prop_assert_eq!(AbGroup::parse(&g.to_string()), Some(g.clone()));
        }

        #[test]
        fn p_parts_multiply_to_order(orders in prop::collection::vec(2u64..200, 0..6)) {
            let g = AbGroup::from_cyclic_orders(&orders);
            let total: u128 = [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
                101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199]
                .iter()
                .map(|&p| g.p_part(p).order())
                .product();
            prop_assert_eq!(total, g.order());
        }
    }
}
