//! Fixtures shared by the benchmarks.

use tmod_core::arith::Spf;
use tmod_core::quadclass::QuadField;

/// The first `n` squarefree `m ≥ start`, as fields `Q(√−m)`.
pub fn imaginary_fields(start: u64, n: usize) -> Vec<QuadField> {
    let spf = Spf::new(start + 4 * n as u64 + 16).expect("small sieve");
    (start..)
        .filter(|&m| spf.is_squarefree(m))
        .take(n)
        .map(|m| QuadField::new(-(m as i64)).expect("squarefree"))
        .collect()
}

/// Primes `l ≡ r mod 16` in `[lo, hi)`.
pub fn primes_in_class(lo: u64, hi: u64, r: u64) -> Vec<u64> {
    tmod_core::arith::sieve_primes(hi).expect("small sieve").into_iter().filter(|&l| l >= lo && l % 16 == r).collect()
}
