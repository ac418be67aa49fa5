//! Explicit builders. Each returns the (C,F) parameters together with a
//! trace of every inequality its construction relies on, decided with
//! certified arithmetic.

mod infinite;
mod search;
mod thm41;
mod thm45;

pub use infinite::{build_infinite_rigid, build_infinite_zerotype, partition_index};
pub use thm41::{build_problem2_general, build_problem2_twocut};
pub use thm45::{build_problem1_wellapprox, m_sequence, MSequence};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::certified::{decide_with_values, pi, CertifiedAngle, Decision, Dyadic, PrecisionPolicy};
use crate::cf_params::{decimal_digits, CFParams};
use crate::contfrac::{Theta, ThetaSpec};
use crate::serde_dec;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BuildConfig {
    pub levels: usize,
    /// Largest number of decimal digits allowed in any `h_n`.
    pub digit_cap: usize,
    pub precision: PrecisionPolicy,
    /// Scan bound for the `k`, `q` and `Q` searches.
    pub search_cap: usize,
    /// Largest `#C_n` that will be materialized.
    pub cardinality_cap: usize,
    /// How many coefficient indices the m-sequence search may inspect.
    pub m_window: usize,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            levels: 8,
            digit_cap: 4096,
            precision: PrecisionPolicy::default(),
            search_cap: 1_000_000,
            cardinality_cap: 1 << 20,
            m_window: 4000,
        }
    }
}

impl BuildConfig {
    pub fn with_levels(levels: usize) -> Self {
        BuildConfig {
            levels,
            ..Default::default()
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.digit_cap < 64 {
            return Err(Error::InvalidParams(format!(
                "digit_cap must be at least 64, got {}",
                self.digit_cap
            )));
        }
        if self.precision.initial_bits < 16 {
            return Err(Error::InvalidParams("initial precision below 16 bits".into()));
        }
        Ok(())
    }

    pub(crate) fn check_digits(&self, h: &BigInt) -> Result<()> {
        let digits = decimal_digits(h);
        if digits > self.digit_cap {
            return Err(Error::DigitCapExceeded {
                digits,
                cap: self.digit_cap,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BuilderKind {
    #[serde(rename = "thm41")]
    General,
    #[serde(rename = "thm42")]
    TwoCut,
    #[serde(rename = "thm45")]
    WellApprox,
    #[serde(rename = "thmB")]
    Rigid,
    #[serde(rename = "thmC")]
    ZeroType,
}

impl BuilderKind {
    pub const ALL: [BuilderKind; 5] = [
        BuilderKind::General,
        BuilderKind::TwoCut,
        BuilderKind::WellApprox,
        BuilderKind::Rigid,
        BuilderKind::ZeroType,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuilderKind::General => "thm41",
            BuilderKind::TwoCut => "thm42",
            BuilderKind::WellApprox => "thm45",
            BuilderKind::Rigid => "thmB",
            BuilderKind::ZeroType => "thmC",
        }
    }
}

impl fmt::Display for BuilderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BuilderKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BuilderKind::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown builder {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Less,
    #[serde(rename = ">")]
    Greater,
    #[serde(rename = "<=")]
    LessEq,
    #[serde(rename = ">=")]
    GreaterEq,
    #[serde(rename = "=")]
    Equal,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Less => "<",
            Relation::Greater => ">",
            Relation::LessEq => "<=",
            Relation::GreaterEq => ">=",
            Relation::Equal => "=",
        }
    }

    fn holds_exact(self, a: &BigRational, b: &BigRational) -> bool {
        match self {
            Relation::Less => a < b,
            Relation::Greater => a > b,
            Relation::LessEq => a <= b,
            Relation::GreaterEq => a >= b,
            Relation::Equal => a == b,
        }
    }
}

/// One decided inequality `lhs relation rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub level: usize,
    pub name: String,
    pub relation: Relation,
    pub lhs: CertifiedAngle,
    pub rhs: CertifiedAngle,
    /// Certified lower bound of the gap between the two sides.
    pub margin: String,
    /// Exact rational sides, present for integer and rational conditions.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "serde_dec::opt_rat_pair")]
    pub exact: Option<(BigRational, BigRational)>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
    /// The exponent `c` whose angle appears on the left, when there is one.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "serde_dec::opt")]
    pub exponent: Option<BigInt>,
    /// Construction step `n` used in the right-hand side formula.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    /// Convergent index the inequality refers to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
}

impl Certificate {
    /// Re-checks the relation from the stored data alone.
    pub fn holds(&self) -> bool {
        if let Some((a, b)) = &self.exact {
            return self.relation.holds_exact(a, b);
        }
        match self.relation {
            Relation::Less => self.lhs.hi() < self.rhs.lo(),
            Relation::Greater => self.lhs.lo() > self.rhs.hi(),
            Relation::LessEq => self.lhs.hi() <= self.rhs.lo(),
            Relation::GreaterEq => self.lhs.lo() >= self.rhs.hi(),
            Relation::Equal => self.lhs.is_exact() && self.lhs == self.rhs,
        }
    }
}

impl Certificate {
    /// Same enclosures under another relation, with the margin recomputed.
    pub(crate) fn with_relation(mut self, rel: Relation) -> Certificate {
        self.relation = rel;
        self.margin = sci_lower(&gap_lower(rel, &self.lhs, &self.rhs).to_rational());
        self
    }
}

fn gap_lower(rel: Relation, lhs: &CertifiedAngle, rhs: &CertifiedAngle) -> Dyadic {
    match rel {
        Relation::Less | Relation::LessEq => rhs.lo().sub(lhs.hi()),
        Relation::Greater | Relation::GreaterEq => lhs.lo().sub(rhs.hi()),
        Relation::Equal => Dyadic::zero(),
    }
}

/// Decimal scientific notation, truncated toward zero (so a lower bound for
/// positive input).
pub fn sci_lower(r: &BigRational) -> String {
    if r.is_zero() {
        return "0".into();
    }
    let neg = r.is_negative();
    let a = r.abs();
    // Estimate the decimal exponent, then fix it up exactly.
    let bits = a.numer().bits() as i64 - a.denom().bits() as i64;
    let mut e = (bits as f64 * std::f64::consts::LOG10_2).floor() as i64;
    let ten = BigRational::from_integer(BigInt::from(10));
    let pow = |k: i64| -> BigRational {
        if k >= 0 {
            num_traits::pow(ten.clone(), k as usize)
        } else {
            num_traits::pow(ten.clone(), (-k) as usize).recip()
        }
    };
    while a < pow(e) {
        e -= 1;
    }
    while a >= pow(e + 1) {
        e += 1;
    }
    let scaled = (&a / pow(e - 11)).to_integer();
    let s = scaled.to_string();
    let body = format!("{}.{}e{}", &s[..1], &s[1..], e);
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

/// Majorant for `Σ_{k>K} b_k` where `b_k` bounds a per-level quantity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Majorant {
    /// `b_j <= scale / (j − offset)²`.
    InverseSquare { scale: CertifiedAngle, offset: usize },
    /// `b_j <= scale · 2^{-j}`.
    Geometric { scale: CertifiedAngle },
    /// `Σ_{j>after} b_j <= bound`; only usable for `K >= after`.
    Fixed { after: usize, bound: CertifiedAngle },
}

impl Majorant {
    /// Upper enclosure of the tail after level `k`.
    pub fn tail_after(&self, k: usize, prec: u32) -> Result<CertifiedAngle> {
        match self {
            Majorant::InverseSquare { scale, offset } => {
                if k > *offset {
                    Ok(scale.div_int(&BigInt::from(k - offset), prec))
                } else {
                    // Σ_{n>=1} 1/n² < 2.
                    Ok(scale.mul_pow2(1).add(&scale.mul_int(&BigInt::from(offset - k))))
                }
            }
            Majorant::Geometric { scale } => Ok(scale.mul_pow2(-(k as i64))),
            Majorant::Fixed { after, bound } => {
                if k >= *after {
                    Ok(bound.clone())
                } else {
                    Err(Error::NoTailMajorant)
                }
            }
        }
    }
}

/// Tail majorants a builder attaches to its output. They are valid for the
/// infinite continuation of the same rule, not just the built window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailBounds {
    /// Number of built levels.
    pub window: usize,
    /// Bounds `max_{c ∈ C_k} |1 − λ^c|`.
    pub max_c: Majorant,
    /// Bounds `max_{c ∈ C_k} |Arg λ^c|`.
    pub max_c_arg: Majorant,
    /// Bounds `max_{c,c' ∈ C_k} |1 − λ^{c−c'}|`.
    pub max_diff: Majorant,
    /// Bounds `max_{c,c' ∈ C_k} |Arg λ^{c−c'}|`.
    pub max_diff_arg: Majorant,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelRecord {
    /// Index into the parameter levels (1-based).
    pub level: usize,
    /// Index in the construction's own numbering; 0 for bootstrap fillers.
    pub step: usize,
    #[serde(with = "serde_dec::rat")]
    pub increment: BigRational,
    pub cuts: usize,
    /// Builder-specific witnesses (chosen k, q, Q, m, good/bad flags, ...).
    pub extras: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateTrace {
    pub builder: BuilderKind,
    pub theta: ThetaSpec,
    pub config: BuildConfig,
    pub config_hash: String,
    pub bootstrap_levels: usize,
    pub levels: Vec<LevelRecord>,
    pub certificates: Vec<Certificate>,
    pub tails: Option<TailBounds>,
}

impl CertificateTrace {
    pub fn at_level(&self, level: usize) -> impl Iterator<Item = &Certificate> {
        self.certificates.iter().filter(move |c| c.level == level)
    }

    pub fn named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Certificate> {
        self.certificates.iter().filter(move |c| c.name == name)
    }

    pub fn all_hold(&self) -> bool {
        self.certificates.iter().all(Certificate::holds)
    }

    pub fn certificates_json(&self) -> String {
        serde_json::to_string_pretty(&self.certificates).expect("certificates serialize")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Build {
    pub params: CFParams,
    pub trace: CertificateTrace,
    /// Split two-cut sequence (rigid builder only).
    pub two_cut: Option<CFParams>,
}

pub fn config_hash(kind: BuilderKind, theta: &ThetaSpec, cfg: &BuildConfig, extra: &str) -> String {
    let blob = serde_json::json!({
        "builder": kind,
        "theta": theta,
        "config": cfg,
        "extra": extra,
    });
    hex::encode(Sha256::digest(blob.to_string().as_bytes()))
}

/// Runs a builder by name. `big_n` is only used by the two-cut builder; when
/// absent it is taken from `minimal_window_n`.
pub fn build(kind: BuilderKind, theta: &Theta, cfg: &BuildConfig, big_n: Option<&BigInt>) -> Result<Build> {
    match kind {
        BuilderKind::General => build_problem2_general(theta, cfg),
        BuilderKind::TwoCut => {
            let n = match big_n {
                Some(n) => n.clone(),
                None => crate::torus::minimal_window_n(theta, cfg.levels.max(1) + 1, &cfg.precision)?,
            };
            build_problem2_twocut(theta, &n, cfg)
        }
        BuilderKind::WellApprox => build_problem1_wellapprox(theta, cfg),
        BuilderKind::Rigid => build_infinite_rigid(theta, cfg),
        BuilderKind::ZeroType => build_infinite_zerotype(theta, cfg),
    }
}

pub(crate) fn two_pi(prec: u32) -> CertifiedAngle {
    pi(prec + 2).mul_pow2(1)
}

/// Collects certificates as a builder goes.
pub(crate) struct Recorder {
    pub policy: PrecisionPolicy,
    pub certs: Vec<Certificate>,
}

impl Recorder {
    pub fn new(policy: PrecisionPolicy) -> Self {
        Recorder {
            policy,
            certs: Vec::new(),
        }
    }

    /// Decides a strict comparison without recording it. `None` when the
    /// comparison could not be decided.
    pub fn probe<F>(&self, eval: F) -> Result<Option<(bool, Certificate)>>
    where
        F: FnMut(u32) -> Result<(CertifiedAngle, CertifiedAngle)>,
    {
        self.probe_rel(Relation::Less, eval)
    }

    pub fn probe_rel<F>(&self, rel: Relation, eval: F) -> Result<Option<(bool, Certificate)>>
    where
        F: FnMut(u32) -> Result<(CertifiedAngle, CertifiedAngle)>,
    {
        let (d, lhs, rhs) = decide_with_values(&self.policy, eval)?;
        let holds = match (d, rel) {
            (Decision::Undecidable, _) => return Ok(None),
            (Decision::Less, Relation::Less) | (Decision::Greater, Relation::Greater) => true,
            _ => false,
        };
        let margin = sci_lower(&gap_lower(rel, &lhs, &rhs).to_rational());
        Ok(Some((
            holds,
            Certificate {
                level: 0,
                name: String::new(),
                relation: rel,
                lhs,
                rhs,
                margin,
                exact: None,
                note: String::new(),
                exponent: None,
                step: None,
                index: None,
            },
        )))
    }

    /// Decides `lhs rel rhs` (strict) and records it; fails if it is false or
    /// undecidable.
    pub fn require<F>(&mut self, level: usize, name: &str, rel: Relation, note: String, eval: F) -> Result<()>
    where
        F: FnMut(u32) -> Result<(CertifiedAngle, CertifiedAngle)>,
    {
        match self.probe_rel(rel, eval)? {
            None => Err(Error::Undecidable(format!("{name} at level {level}"))),
            Some((false, c)) => Err(Error::CertificateFailed {
                level,
                name: name.into(),
                detail: format!("lhs {} vs rhs {}", c.lhs, c.rhs),
            }),
            Some((true, mut c)) => {
                c.level = level;
                c.name = name.into();
                c.note = note;
                self.certs.push(c);
                Ok(())
            }
        }
    }

    /// Records an already decided comparison.
    pub fn push(&mut self, level: usize, name: &str, note: String, mut c: Certificate) {
        c.level = level;
        c.name = name.into();
        c.note = note;
        self.certs.push(c);
    }

    /// Exact comparison of rationals.
    pub fn exact(
        &mut self,
        level: usize,
        name: &str,
        rel: Relation,
        lhs: BigRational,
        rhs: BigRational,
        note: String,
    ) -> Result<()> {
        if !rel.holds_exact(&lhs, &rhs) {
            return Err(Error::CertificateFailed {
                level,
                name: name.into(),
                detail: format!("{lhs} {rel:?} {rhs} is false"),
            });
        }
        let l = CertifiedAngle::from_rational(&lhs, 64);
        let r = CertifiedAngle::from_rational(&rhs, 64);
        let margin = match rel {
            Relation::Less | Relation::LessEq => sci_lower(&(&rhs - &lhs)),
            Relation::Greater | Relation::GreaterEq => sci_lower(&(&lhs - &rhs)),
            Relation::Equal => "0".into(),
        };
        self.certs.push(Certificate {
            level,
            name: name.into(),
            relation: rel,
            lhs: l,
            rhs: r,
            margin,
            exact: Some((lhs, rhs)),
            note,
            exponent: None,
            step: None,
            index: None,
        });
        Ok(())
    }

    /// Attaches replay data to the most recent certificate.
    pub fn tag(&mut self, exponent: Option<BigInt>, step: Option<usize>, index: Option<usize>) {
        if let Some(c) = self.certs.last_mut() {
            c.exponent = exponent;
            c.step = step;
            c.index = index;
        }
    }

    pub fn exact_int(&mut self, level: usize, name: &str, rel: Relation, lhs: &BigInt, rhs: &BigInt, note: String) -> Result<()> {
        self.exact(
            level,
            name,
            rel,
            BigRational::from_integer(lhs.clone()),
            BigRational::from_integer(rhs.clone()),
            note,
        )
    }
}

pub(crate) fn rat(n: &BigInt) -> BigRational {
    BigRational::from_integer(n.clone())
}

pub(crate) fn increment(h_prev: &BigInt, cuts: usize, h: &BigInt) -> BigRational {
    BigRational::new(h - h_prev * BigInt::from(cuts), h.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sci_lower_truncates() {
        let r = BigRational::new(BigInt::from(2), BigInt::from(3));
        assert_eq!(sci_lower(&r), "6.66666666666e-1");
        let r = BigRational::from_integer(BigInt::from(12345));
        assert_eq!(sci_lower(&r), "1.23450000000e4");
    }

    #[test]
    fn builder_names_round_trip() {
        for b in BuilderKind::ALL {
            assert_eq!(b.name().parse::<BuilderKind>().unwrap(), b);
        }
        assert!("thm99".parse::<BuilderKind>().is_err());
    }

    #[test]
    fn inverse_square_tail() {
        let m = Majorant::InverseSquare {
            scale: CertifiedAngle::from_i64(1),
            offset: 2,
        };
        let t = m.tail_after(6, 64).unwrap();
        assert!(t.hi().to_f64() >= 0.25 - 1e-12);
    }
}
