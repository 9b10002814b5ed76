use crate::arith::{sieve_primes, Spf};
use crate::error::{Result, TmodError};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyTag {
    ImagAll,
    RealAll,
    /// `Q(√−l)`, `l` an odd prime.
    MinusL,
    MinusTwoL,
    PlusL,
    PlusTwoL,
}

impl FamilyTag {
    pub const ALL: [FamilyTag; 6] =
        [FamilyTag::ImagAll, FamilyTag::RealAll, FamilyTag::MinusL, FamilyTag::MinusTwoL, FamilyTag::PlusL, FamilyTag::PlusTwoL];

    pub fn is_prime_family(self) -> bool {
        !matches!(self, FamilyTag::ImagAll | FamilyTag::RealAll)
    }

    pub fn is_imaginary(self) -> bool {
        matches!(self, FamilyTag::ImagAll | FamilyTag::MinusL | FamilyTag::MinusTwoL)
    }

    /// The radicand `m` of the field attached to the prime `l`.
    pub fn radicand(self, l: u64) -> i64 {
        let l = l as i64;
        match self {
            FamilyTag::MinusL => -l,
            FamilyTag::MinusTwoL => -2 * l,
            FamilyTag::PlusL => l,
            FamilyTag::PlusTwoL => 2 * l,
            FamilyTag::ImagAll => -l,
            FamilyTag::RealAll => l,
        }
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyTag::ImagAll => "imag-all",
            FamilyTag::RealAll => "real-all",
            FamilyTag::MinusL => "minus-l",
            FamilyTag::MinusTwoL => "minus-2l",
            FamilyTag::PlusL => "plus-l",
            FamilyTag::PlusTwoL => "plus-2l",
        })
    }
}

impl FromStr for FamilyTag {
    type Err = TmodError;

    fn from_str(s: &str) -> Result<Self> {
        FamilyTag::ALL
            .into_iter()
            .find(|t| t.to_string() == s)
            .ok_or_else(|| TmodError::Invalid(format!("unknown family `{s}`")))
    }
}

/// What the bound `B` applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    /// `|m| ≤ B`, or `l ≤ B` for the prime families.
    Radicand,
    /// `|D_F| ≤ B`.
    Disc,
}

/// A sieved family of quadratic fields.
///
/// The congruence filter applies to `l` for the prime families and to `|m|`
/// otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Family {
    pub tag: FamilyTag,
    pub modulus: u64,
    pub residues: Vec<u64>,
    pub bound: u64,
    pub p: u64,
    pub measure: Measure,
}

impl Family {
    /// The default measure is `|D|` for the full families at odd `p` and the
    /// radicand otherwise.
    pub fn new(tag: FamilyTag, p: u64, bound: u64) -> Self {
        let measure = if tag.is_prime_family() || p == 2 { Measure::Radicand } else { Measure::Disc };
        Family { tag, modulus: 1, residues: vec![0], bound, p, measure }
    }

    pub fn with_filter(mut self, modulus: u64, residues: &[u64]) -> Self {
        self.modulus = modulus.max(1);
        let mut r: Vec<u64> = residues.iter().map(|&x| x % self.modulus).collect();
        r.sort_unstable();
        r.dedup();
        self.residues = r;
        self
    }

    pub fn with_measure(mut self, measure: Measure) -> Self {
        self.measure = measure;
        self
    }

    pub fn admits(&self, x: u64) -> bool {
        self.residues.contains(&(x % self.modulus))
    }

    pub fn validate(&self) -> Result<()> {
        if !crate::arith::is_prime(self.p) {
            return Err(TmodError::Invalid(format!("p = {} is not prime", self.p)));
        }
        if self.residues.is_empty() {
            return Err(TmodError::Invalid("empty residue filter".into()));
        }
        if self.bound > crate::arith::SIEVE_BUDGET {
            return Err(TmodError::Capacity { bound: self.bound, budget: crate::arith::SIEVE_BUDGET });
        }
        Ok(())
    }

    fn within(&self, m: i64) -> bool {
        let a = m.unsigned_abs();
        match self.measure {
            Measure::Radicand => a <= self.bound,
            Measure::Disc => {
                let d = if m.rem_euclid(4) == 1 { a } else { 4 * a };
                d <= self.bound
            }
        }
    }

    /// Radicands of the members, ascending in `|m|`.
    pub fn members(&self) -> Result<Vec<i64>> {
        self.validate()?;
        if self.tag.is_prime_family() {
            return Ok(sieve_primes(self.bound)?
                .into_iter()
                .filter(|&l| l > 2 && self.admits(l))
                .map(|l| self.tag.radicand(l))
                .filter(|&m| self.measure == Measure::Radicand || self.within(m))
                .collect());
        }
        let spf = Spf::new(self.bound.max(2))?;
        let start = if self.tag == FamilyTag::ImagAll { 1 } else { 2 };
        Ok((start..=self.bound)
            .filter(|&a| spf.is_squarefree(a) && self.admits(a))
            .map(|a| self.tag.radicand(a))
            .filter(|&m| self.within(m))
            .collect())
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} p={} B={}", self.tag, self.p, self.bound)?;
        if self.modulus > 1 {
            let r: Vec<String> = self.residues.iter().map(|r| r.to_string()).collect();
            write!(f, " ≡ {} mod {}", r.join(","), self.modulus)?;
        }
        if self.measure == Measure::Disc {
            write!(f, " (|D| ≤ B)")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_tags() {
        for t in FamilyTag::ALL {
            assert_eq!(t.to_string().parse::<FamilyTag>().unwrap(), t);
        }
        assert!("minus-3l".parse::<FamilyTag>().is_err());
    }

    #[test]
    fn members_small() {
        let f = Family::new(FamilyTag::MinusL, 2, 100).with_filter(16, &[1]);
        assert_eq!(f.members().unwrap(), vec![-17, -97]);
        let f = Family::new(FamilyTag::PlusTwoL, 2, 30).with_filter(8, &[7]);
        assert_eq!(f.members().unwrap(), vec![14, 46]);
        let f = Family::new(FamilyTag::ImagAll, 2, 10);
        assert_eq!(f.members().unwrap(), vec![-1, -2, -3, -5, -6, -7, -10]);
        let f = Family::new(FamilyTag::ImagAll, 5, 20);
        assert_eq!(f.measure, Measure::Disc);
        assert_eq!(f.members().unwrap(), vec![-1, -2, -3, -5, -7, -11, -15, -19]);
        let f = Family::new(FamilyTag::RealAll, 5, 30);
        assert_eq!(f.members().unwrap(), vec![2, 3, 5, 6, 7, 13, 17, 21, 29]);
    }

    #[test]
    fn sizes_match_squarefree_counts() {
        // 6/π² of integers are squarefree
        let n = Family::new(FamilyTag::ImagAll, 2, 100_000).members().unwrap().len();
        assert!((n as f64 / 1e5 - 6.0 / std::f64::consts::PI.powi(2)).abs() < 1e-3);
    }
}
