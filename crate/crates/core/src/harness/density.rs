use super::cache::Cache;
use super::family::{Family, FamilyTag};
use super::predict::{predicted_density_conjecture, predicted_density_rk4, Conjecture};
use crate::arith::Spf;
use crate::error::{Result, TmodError};
use crate::linalg::AbGroup;
use crate::quadclass::{fundamental_unit, QuadField};
use crate::rayclass::tp_structure_run;
use crate::tmod::{
    classify_imaginary_prime_family, classify_real_prime_family, coates_with_unit_prec, rk2_T2, rk4_T2, OrderTag,
};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

/// Bumped whenever a method can change its output for a cached key.
pub const METHOD_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodChoice {
    /// Classifiers first, then formulas and Coates, then the ray-class oracle below the cutoff.
    Auto,
    Redei,
    Coates,
    RayClass,
}

impl fmt::Display for MethodChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MethodChoice::Auto => "auto",
            MethodChoice::Redei => "redei",
            MethodChoice::Coates => "coates",
            MethodChoice::RayClass => "rayclass",
        })
    }
}

impl FromStr for MethodChoice {
    type Err = TmodError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(MethodChoice::Auto),
            "redei" => Ok(MethodChoice::Redei),
            "coates" => Ok(MethodChoice::Coates),
            "rayclass" => Ok(MethodChoice::RayClass),
            _ => Err(TmodError::Invalid(format!("unknown method `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    /// Starting p-adic precision for logarithms, in bits.
    pub precision_bits: u32,
    /// Highest ray-class level tried before giving up on stabilization.
    pub nmax: u32,
    /// `auto` uses the ray-class oracle only for `|D|` up to this bound.
    pub rayclass_cutoff: u64,
    pub cache: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config { precision_bits: 128, nmax: crate::rayclass::DEFAULT_NMAX, rayclass_cutoff: 1_000_000, cache: None }
    }
}

impl Config {
    pub fn padic_digits(&self, p: u64) -> u32 {
        (self.precision_bits as f64 / (p as f64).log2()).ceil() as u32
    }
}

/// The invariant tabulated for a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    /// `rk₄ 𝒯₂`.
    Rk4,
    /// `6𝒯_p` up to isomorphism.
    Structure,
}

impl TableKind {
    pub fn of(family: &Family) -> TableKind {
        if family.tag == FamilyTag::ImagAll && family.p == 2 {
            TableKind::Rk4
        } else {
            TableKind::Structure
        }
    }

    fn key(self) -> &'static str {
        match self {
            TableKind::Rk4 => "rk4",
            TableKind::Structure => "structure",
        }
    }
}

/// Per-field outcome; `label` is `None` when undetermined.
///
/// Full-family labels are `6𝒯_p`; prime-family labels are `𝒯₂` itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldRecord {
    pub m: i64,
    pub label: Option<String>,
    pub method: String,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityRow {
    pub label: String,
    pub count: usize,
    pub ratio: f64,
    pub predicted: Option<f64>,
    pub deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyRun {
    pub family: Family,
    pub kind: TableKind,
    pub total: usize,
    pub undetermined: usize,
    pub rows: Vec<DensityRow>,
    pub fields: Vec<FieldRecord>,
}

impl FamilyRun {
    pub fn row(&self, label: &str) -> Option<&DensityRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn ratio(&self, label: &str) -> f64 {
        self.row(label).map_or(0.0, |r| r.ratio)
    }
}

/// `6G` for a p-group `G`: multiplication by `p` when `p ≤ 3`.
fn six_times(p: u64, g: &AbGroup) -> AbGroup {
    if p > 3 {
        return g.clone();
    }
    AbGroup { invariants: g.invariants.iter().map(|&d| d / p).filter(|&d| d > 1).collect() }
}

fn cyclic(n: u64) -> AbGroup {
    if n == 1 {
        AbGroup::trivial()
    } else {
        AbGroup { invariants: vec![n] }
    }
}

struct Ctx<'a> {
    family: &'a Family,
    kind: TableKind,
    choice: MethodChoice,
    cfg: &'a Config,
    spf: Option<Spf>,
}

type Outcome = Result<(String, &'static str)>;

impl Ctx<'_> {
    fn structure_label(&self, g: &AbGroup) -> String {
        if self.family.tag.is_prime_family() {
            g.to_string()
        } else {
            six_times(self.family.p, g).to_string()
        }
    }

    fn rayclass(&self, field: &QuadField) -> Result<AbGroup> {
        tp_structure_run(field, self.family.p, self.cfg.nmax, 0).map(|s| s.torsion)
    }

    fn below_cutoff(&self, field: &QuadField) -> bool {
        self.choice == MethodChoice::RayClass || field.disc.unsigned_abs() <= self.cfg.rayclass_cutoff
    }

    fn coates(&self, field: &QuadField) -> Result<i64> {
        let eps = fundamental_unit(field.m)?;
        let p = self.family.p;
        coates_with_unit_prec(field, p, &eps, self.spf.as_ref(), self.cfg.padic_digits(p))
    }

    fn eval(&self, m: i64) -> Outcome {
        let field = QuadField::new(m)?;
        match self.kind {
            TableKind::Rk4 => self.eval_rk4(&field),
            TableKind::Structure => self.eval_structure(&field),
        }
    }

    fn eval_rk4(&self, field: &QuadField) -> Outcome {
        match self.choice {
            MethodChoice::Auto | MethodChoice::Redei => Ok((format!("rk4={}", rk4_T2(field)?), "redei")),
            MethodChoice::RayClass => Ok((format!("rk4={}", self.rayclass(field)?.rank_divisible(4)), "rayclass")),
            MethodChoice::Coates => Err(TmodError::Unsupported("Coates formula gives no 4-rank".into())),
        }
    }

    fn eval_structure(&self, field: &QuadField) -> Outcome {
        let p = self.family.p;
        match self.choice {
            MethodChoice::RayClass => return Ok((self.structure_label(&self.rayclass(field)?), "rayclass")),
            MethodChoice::Redei => return Err(TmodError::Unsupported("Rédei matrices give only rk₄".into())),
            MethodChoice::Coates => {
                let v = self.coates(field)?;
                return match self.rank_known(field) {
                    Some(r) if r <= 1 => Ok((self.structure_label(&cyclic(p.pow(v as u32))), "coates")),
                    _ if v <= 1 => Ok((self.structure_label(&cyclic(p.pow(v as u32))), "coates")),
                    _ => Err(TmodError::Unsupported(format!("order p^{v} without the rank"))),
                };
            }
            MethodChoice::Auto => {}
        }
        if p == 2 && self.family.tag.is_prime_family() {
            if let Some(r) = self.classify_prime(field)? {
                return Ok(r);
            }
        }
        if !field.is_imaginary() {
            match self.coates(field) {
                Ok(v) => {
                    let rank_ok = v <= 1 || self.rank_known(field).is_some_and(|r| r <= 1);
                    if rank_ok {
                        return Ok((self.structure_label(&cyclic(p.pow(v as u32))), "coates"));
                    }
                }
                Err(e) if !self.below_cutoff(field) => return Err(e),
                Err(_) => {}
            }
        }
        if self.below_cutoff(field) {
            return Ok((self.structure_label(&self.rayclass(field)?), "rayclass"));
        }
        Err(TmodError::Unsupported(format!("|D| = {} above the ray-class cutoff", field.disc.unsigned_abs())))
    }

    fn rank_known(&self, field: &QuadField) -> Option<usize> {
        (self.family.p == 2).then(|| rk2_T2(field))
    }

    /// Classifier tags for `±l`, `±2l`.
    fn classify_prime(&self, field: &QuadField) -> Result<Option<(String, &'static str)>> {
        let l = field.odd_primes[0];
        if l % 8 == 3 || l % 8 == 5 {
            return Ok(Some((AbGroup::trivial().to_string(), "formula")));
        }
        let tag = match self.family.tag {
            FamilyTag::MinusL => classify_imaginary_prime_family(l)?.0,
            FamilyTag::MinusTwoL => classify_imaginary_prime_family(l)?.1,
            FamilyTag::PlusL => classify_real_prime_family(l)?.t2_l,
            FamilyTag::PlusTwoL => classify_real_prime_family(l)?.t2_2l,
            _ => return Ok(None),
        };
        Ok(match tag {
            OrderTag::Exact(n) => Some((self.structure_label(&cyclic(n)), "classifier")),
            _ => None,
        })
    }
}

/// Predicted probabilities for the prime families, averaged over the residue
/// classes of `l` modulo `lcm(modulus, 16)`.
fn prime_family_prediction(family: &Family, support: usize) -> Option<BTreeMap<AbGroup, f64>> {
    let big = num_integer::lcm(family.modulus, 16);
    let classes: Vec<u64> =
        (0..big).filter(|&c| c % 2 == 1 && family.admits(c % family.modulus)).collect();
    if classes.is_empty() {
        return None;
    }
    let mut acc: BTreeMap<AbGroup, f64> = BTreeMap::new();
    let w = 1.0 / classes.len() as f64;
    for c in classes {
        let r = c % 16;
        let dist: Vec<(u64, f64)> = if r % 8 == 3 || r % 8 == 5 {
            vec![(1, 1.0)]
        } else {
            match (family.tag, r) {
                (FamilyTag::MinusL | FamilyTag::MinusTwoL, 7 | 15) => vec![(2, 1.0)],
                (FamilyTag::MinusL, 9) => vec![(4, 1.0)],
                (FamilyTag::MinusTwoL, 9) => vec![(2, 1.0)],
                (FamilyTag::MinusL, _) => (0..support as u32)
                    .map(|i| (8 << i, predicted_density_conjecture(&Conjecture::MinusL { i })))
                    .collect(),
                (FamilyTag::MinusTwoL, _) => (0..support as u32)
                    .map(|i| (4 << i, predicted_density_conjecture(&Conjecture::MinusTwoL { i })))
                    .collect(),
                (FamilyTag::PlusL, _) => {
                    let e = (r % 8 == 7) as u32;
                    (0..support as u32)
                        .map(|i| (2 << (i + e), predicted_density_conjecture(&Conjecture::PlusL { e, i })))
                        .collect()
                }
                (FamilyTag::PlusTwoL, _) => {
                    let e = (r % 8 == 7) as u32;
                    (0..support as u32)
                        .map(|i| (2 << i, predicted_density_conjecture(&Conjecture::PlusTwoL { e, i })))
                        .collect()
                }
                _ => return None,
            }
        };
        for (n, d) in dist {
            *acc.entry(cyclic(n)).or_default() += w * d;
        }
    }
    Some(acc)
}

fn group_sort_key(label: &str) -> (u128, Vec<u64>) {
    match AbGroup::parse(label) {
        Some(g) => (g.order(), g.invariants),
        None => (u128::MAX, Vec::new()),
    }
}

fn tabulate(family: &Family, kind: TableKind, fields: &[FieldRecord]) -> (Vec<DensityRow>, usize) {
    let total = fields.len();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut undetermined = 0;
    for f in fields {
        match &f.label {
            Some(l) => *counts.entry(l.clone()).or_default() += 1,
            None => undetermined += 1,
        }
    }
    let support = 6;
    let mut predicted: BTreeMap<String, f64> = BTreeMap::new();
    match kind {
        TableKind::Rk4 => {
            for r in 0..4 {
                predicted.insert(format!("rk4={r}"), predicted_density_rk4(r));
            }
        }
        TableKind::Structure if family.tag.is_prime_family() && family.p == 2 => {
            if let Some(d) = prime_family_prediction(family, support) {
                predicted.extend(d.into_iter().map(|(g, v)| (g.to_string(), v)));
            }
        }
        TableKind::Structure if !family.tag.is_prime_family() => {
            let p = family.p;
            let imaginary = family.tag.is_imaginary();
            let mut groups: Vec<AbGroup> = vec![AbGroup::trivial(), cyclic(p), cyclic(p * p), AbGroup { invariants: vec![p, p] }];
            groups.extend(counts.keys().filter_map(|l| AbGroup::parse(l)));
            for g in groups {
                let d = predicted_density_conjecture(&Conjecture::FullFamily { p, imaginary, group: g.clone() });
                predicted.insert(g.to_string(), d);
            }
        }
        TableKind::Structure => {}
    }
    let mut labels: Vec<String> = counts.keys().chain(predicted.keys()).cloned().collect();
    match kind {
        TableKind::Rk4 => labels.sort(),
        TableKind::Structure => labels.sort_by_key(|l| group_sort_key(l)),
    }
    labels.dedup();
    let rows = labels
        .into_iter()
        .map(|label| {
            let count = counts.get(&label).copied().unwrap_or(0);
            let ratio = if total == 0 { 0.0 } else { count as f64 / total as f64 };
            let predicted = predicted.get(&label).copied();
            DensityRow { deviation: predicted.map(|d| (ratio - d).abs()), label, count, ratio, predicted }
        })
        .collect();
    (rows, undetermined)
}

fn cache_method(choice: MethodChoice) -> String {
    format!("{choice}-v{METHOD_VERSION}")
}

/// Computes the family's invariants and tabulates them.
///
/// Per-field failures are recorded as undetermined and never abort the batch.
pub fn run_family(family: &Family, choice: MethodChoice, cfg: &Config) -> Result<FamilyRun> {
    let members = family.members()?;
    let kind = TableKind::of(family);
    let needs_spf = !family.tag.is_imaginary() && kind == TableKind::Structure;
    let spf = match members.iter().map(|m| m.unsigned_abs()).max() {
        Some(top) if needs_spf => Some(Spf::new(top.max(2))?),
        _ => None,
    };
    let ctx = Ctx { family, kind, choice, cfg, spf };
    let method_key = cache_method(choice);
    let mut cache = match &cfg.cache {
        Some(path) => Some(Cache::open(path)?),
        None => None,
    };
    let p = family.p;
    let fields: Vec<FieldRecord> = members
        .par_iter()
        .map(|&m| {
            if let Some(hit) = cache.as_ref().and_then(|c| c.get(m, p, kind.key(), &method_key)) {
                return hit.clone();
            }
            match ctx.eval(m) {
                Ok((label, method)) => FieldRecord { m, label: Some(label), method: method.into(), note: String::new() },
                Err(e) => FieldRecord { m, label: None, method: String::new(), note: e.to_string() },
            }
        })
        .collect();
    if let Some(c) = cache.as_mut() {
        c.append(p, kind.key(), &method_key, &fields)?;
    }
    let (rows, undetermined) = tabulate(family, kind, &fields);
    Ok(FamilyRun { family: family.clone(), kind, total: fields.len(), undetermined, rows, fields })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_times_bad_primes() {
        let g = AbGroup { invariants: vec![2, 8] };
        assert_eq!(six_times(2, &g), AbGroup { invariants: vec![4] });
        assert_eq!(six_times(5, &AbGroup { invariants: vec![5] }), AbGroup { invariants: vec![5] });
    }

    #[test]
    fn small_minus_l_run() {
        let fam = Family::new(FamilyTag::MinusL, 2, 3000).with_filter(16, &[1]);
        let run = run_family(&fam, MethodChoice::Auto, &Config::default()).unwrap();
        assert_eq!(run.undetermined, 0);
        assert_eq!(run.rows.iter().map(|r| r.count).sum::<usize>(), run.total);
        assert!(run.fields.iter().all(|f| f.method == "rayclass"));
        assert_eq!(run.row("Z/8").unwrap().predicted, Some(0.75));
        let forced = run_family(&fam, MethodChoice::RayClass, &Config::default()).unwrap();
        assert_eq!(forced.rows, run.rows);
    }

    #[test]
    fn prime_predictions_average_classes() {
        let fam = Family::new(FamilyTag::PlusL, 2, 10).with_filter(8, &[1, 7]);
        let d = prime_family_prediction(&fam, 6).unwrap();
        assert!((d[&cyclic(2)] - 0.25).abs() < 1e-12);
        assert!((d[&cyclic(4)] - (0.125 + 0.25)).abs() < 1e-12);
        let all = Family::new(FamilyTag::MinusL, 2, 10);
        let d = prime_family_prediction(&all, 6).unwrap();
        assert!((d[&AbGroup::trivial()] - 0.5).abs() < 1e-12);
        assert!((d[&cyclic(2)] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn classifier_paths_agree_with_oracle() {
        for tag in [FamilyTag::MinusTwoL, FamilyTag::PlusL, FamilyTag::PlusTwoL] {
            let fam = Family::new(tag, 2, 600);
            let auto = run_family(&fam, MethodChoice::Auto, &Config::default()).unwrap();
            for f in &auto.fields {
                let field = QuadField::new(f.m).unwrap();
                match tp_structure_run(&field, 2, 24, 0) {
                    Ok(s) => assert_eq!(f.label.as_deref(), Some(s.torsion.to_string().as_str()), "m={}", f.m),
                    Err(TmodError::Unsupported(_)) => {}
                    Err(e) => panic!("m={}: {e}", f.m),
                }
            }
        }
    }

    #[test]
    fn real_odd_p_partition() {
        let fam = Family::new(FamilyTag::RealAll, 5, 3000);
        let run = run_family(&fam, MethodChoice::Auto, &Config::default()).unwrap();
        let determined: usize = run.rows.iter().map(|r| r.count).sum();
        assert_eq!(determined + run.undetermined, run.total);
        assert!(run.ratio("1") > 0.6);
    }
}
