//! (C,F) parameter sequences: `F_n = {0, ..., h_n − 1}` and offset sets `C_n`.

use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::serde_dec;

/// Largest sumset any operation here will materialize.
pub const DEFAULT_SUMSET_CAP: usize = 1 << 22;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default)]
    pub builder: String,
    #[serde(default)]
    pub config_hash: String,
}

/// `h[0] = 1` and `h[n]` for `n = 1..=L`; `c[n-1] = C_n` sorted with minimum 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CFParams {
    #[serde(with = "serde_dec::vec")]
    pub h: Vec<BigInt>,
    #[serde(rename = "C", with = "serde_dec::vec_vec")]
    pub c: Vec<Vec<BigInt>>,
    #[serde(default)]
    pub provenance: Provenance,
}

impl CFParams {
    /// Level-0 system: `F_0 = {0}`, no cuts yet.
    pub fn base() -> Self {
        CFParams {
            h: vec![BigInt::one()],
            c: Vec::new(),
            provenance: Provenance::default(),
        }
    }

    pub fn from_parts(h: Vec<BigInt>, c: Vec<Vec<BigInt>>) -> Self {
        CFParams {
            h,
            c,
            provenance: Provenance::default(),
        }
    }

    pub fn from_i64(h: &[i64], c: &[&[i64]]) -> Self {
        CFParams::from_parts(
            h.iter().map(|&x| x.into()).collect(),
            c.iter().map(|s| s.iter().map(|&x| x.into()).collect()).collect(),
        )
    }

    pub fn with_provenance(mut self, builder: &str, config_hash: &str) -> Self {
        self.provenance = Provenance {
            builder: builder.to_string(),
            config_hash: config_hash.to_string(),
        };
        self
    }

    /// Number of levels `L` (so `C_1..C_L`, `h_0..h_L`).
    pub fn levels(&self) -> usize {
        self.c.len()
    }

    pub fn h(&self, n: usize) -> &BigInt {
        &self.h[n]
    }

    /// `C_n`, `n >= 1`.
    pub fn cuts(&self, n: usize) -> &[BigInt] {
        &self.c[n - 1]
    }

    pub fn push_level(&mut self, c: Vec<BigInt>, h: BigInt) {
        self.c.push(c);
        self.h.push(h);
    }

    /// First `levels` levels.
    pub fn truncated(&self, levels: usize) -> CFParams {
        let l = levels.min(self.levels());
        CFParams {
            h: self.h[..=l].to_vec(),
            c: self.c[..l].to_vec(),
            provenance: self.provenance.clone(),
        }
    }

    /// Parses and checks the shape (`#h = #C + 1`, `h_0 = 1`). Conditions
    /// (2.1)–(2.3) are left to [`validate`].
    pub fn from_json(s: &str) -> Result<CFParams> {
        let p: CFParams = serde_json::from_str(s)?;
        p.check_shape()?;
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("params serialize")
    }

    pub fn check_shape(&self) -> Result<()> {
        if self.h.len() != self.c.len() + 1 {
            return Err(Error::InvalidParams(format!(
                "{} heights for {} cut sets (expected one more height)",
                self.h.len(),
                self.c.len()
            )));
        }
        if !self.h[0].is_one() {
            return Err(Error::InvalidParams(format!("h_0 = {}, expected 1", self.h[0])));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON of `h` and `C` (provenance excluded).
    pub fn content_hash(&self) -> String {
        let bare = CFParams::from_parts(self.h.clone(), self.c.clone());
        let s = serde_json::to_string(&bare).expect("params serialize");
        hex::encode(Sha256::digest(s.as_bytes()))
    }

    /// Translates every `C_n` so its minimum is 0.
    pub fn normalized(&self) -> Result<CFParams> {
        let mut out = self.clone();
        for set in out.c.iter_mut() {
            set.sort();
            set.dedup();
            if let Some(m) = set.first().cloned() {
                for x in set.iter_mut() {
                    *x -= &m;
                }
            }
        }
        let r = validate(&out);
        if let Some(v) = r.first_violation {
            return Err(Error::InvalidParams(format!(
                "normalization breaks {} at level {}: {}",
                v.condition, v.level, v.witness
            )));
        }
        Ok(out)
    }

    /// `μ([A]_n) = #A / (#C_1 ⋯ #C_n)`.
    pub fn cylinder_measure(&self, n: usize, size: &BigInt) -> BigRational {
        BigRational::new(size.clone(), self.cut_product(n))
    }

    /// `#C_1 ⋯ #C_n`.
    pub fn cut_product(&self, n: usize) -> BigInt {
        self.c[..n].iter().map(|s| BigInt::from(s.len())).product()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub level: usize,
    pub condition: String,
    pub witness: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelValidation {
    pub level: usize,
    pub cuts_gt_one: bool,
    pub nested: bool,
    pub disjoint: bool,
    pub canonical: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub pass: bool,
    pub levels: Vec<LevelValidation>,
    pub first_violation: Option<Violation>,
}

/// Checks `#C_n > 1`, `F_{n-1} + C_n ⊆ F_n` and disjointness of the
/// translates `F_{n-1} + c`, plus the canonical form (sorted, minimum 0).
pub fn validate(p: &CFParams) -> ValidationReport {
    let mut levels = Vec::new();
    let mut first: Option<Violation> = None;
    let mut note = |level: usize, condition: &str, witness: String| {
        if first.is_none() {
            first = Some(Violation {
                level,
                condition: condition.to_string(),
                witness,
            });
        }
    };
    if let Err(e) = p.check_shape() {
        note(0, "shape", e.to_string());
        return ValidationReport {
            pass: false,
            levels,
            first_violation: first,
        };
    }
    for (n, h) in p.h.iter().enumerate() {
        if !h.is_positive() {
            note(n, "shape", format!("h_{n} = {h} is not positive"));
        }
    }
    for n in 1..=p.levels() {
        let c = p.cuts(n);
        let hp = p.h(n - 1);
        let hn = p.h(n);
        let canonical = c.first().is_some_and(|x| x.is_zero()) && c.windows(2).all(|w| w[0] < w[1]);
        if !canonical {
            note(n, "shape", format!("C_{n} is not strictly increasing from 0"));
        }
        let cuts_gt_one = c.len() > 1;
        if !cuts_gt_one {
            note(n, "(2.1)", format!("#C_{n} = {}", c.len()));
        }
        let max_c = c.iter().max().cloned().unwrap_or_default();
        let nested = hp + &max_c <= *hn;
        if !nested {
            note(
                n,
                "(2.2)",
                format!("h_{} - 1 + max C_{n} = {} > h_{n} - 1 = {}", n - 1, hp - 1 + &max_c, hn - 1),
            );
        }
        let bad_gap = c.windows(2).find(|w| &w[1] - &w[0] < *hp);
        let disjoint = bad_gap.is_none();
        if let Some(w) = bad_gap {
            note(
                n,
                "(2.3)",
                format!("cuts {} and {} are closer than h_{} = {hp}", w[0], w[1], n - 1),
            );
        }
        levels.push(LevelValidation {
            level: n,
            cuts_gt_one,
            nested,
            disjoint,
            canonical,
        });
    }
    ValidationReport {
        pass: first.is_none(),
        levels,
        first_violation: first,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MassVerdict {
    /// Every window level has `h_n >= 2 h_{n-1} #C_n`, so increments stay at
    /// least 1/2 and the series in the finiteness criterion diverges.
    InfiniteCertified,
    /// Nothing is claimed beyond the listed increments.
    WindowOnly,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureReport {
    /// `(h_n − h_{n-1} #C_n) / h_n` for `n = 1..=L`.
    #[serde(with = "serde_dec::rat_vec")]
    pub increments: Vec<BigRational>,
    #[serde(with = "serde_dec::rat_vec")]
    pub partial_sums: Vec<BigRational>,
    pub verdict: MassVerdict,
}

pub fn measure_increment(p: &CFParams, n: usize) -> BigRational {
    let hn = p.h(n);
    let used = p.h(n - 1) * BigInt::from(p.cuts(n).len());
    BigRational::new(hn - used, hn.clone())
}

pub fn measure_tail(p: &CFParams) -> MeasureReport {
    let increments: Vec<BigRational> = (1..=p.levels()).map(|n| measure_increment(p, n)).collect();
    let mut acc = BigRational::zero();
    let partial_sums = increments
        .iter()
        .map(|x| {
            acc += x;
            acc.clone()
        })
        .collect();
    let infinite = p.levels() > 0
        && (1..=p.levels()).all(|n| *p.h(n) >= BigInt::from(2) * p.h(n - 1) * BigInt::from(p.cuts(n).len()));
    MeasureReport {
        increments,
        partial_sums,
        verdict: if infinite {
            MassVerdict::InfiniteCertified
        } else {
            MassVerdict::WindowOnly
        },
    }
}

/// Sorted, deduplicated `{a + b}`.
pub fn sumset(a: &[BigInt], b: &[BigInt], cap: usize) -> Result<Vec<BigInt>> {
    let size = a.len().saturating_mul(b.len());
    if size > cap {
        return Err(Error::SumsetTooLarge {
            size: size.to_string(),
            cap,
        });
    }
    let mut out: Vec<BigInt> = a.iter().flat_map(|x| b.iter().map(move |y| x + y)).collect();
    out.sort();
    out.dedup();
    Ok(out)
}

/// `C_i + C_{i+1} + ⋯ + C_j`.
pub fn level_sumset(p: &CFParams, levels: RangeInclusive<usize>, cap: usize) -> Result<Vec<BigInt>> {
    let est: f64 = levels.clone().map(|n| p.cuts(n).len() as f64).product();
    if est > cap as f64 {
        return Err(Error::SumsetTooLarge {
            size: format!("{est:.0}"),
            cap,
        });
    }
    let mut acc = vec![BigInt::zero()];
    for n in levels {
        acc = sumset(&acc, p.cuts(n), cap)?;
    }
    Ok(acc)
}

/// Merges each block `i..=j` of levels into one level with `C = C_i + ⋯ + C_j`
/// and `h = h_j`. Blocks must be consecutive and cover `1..=L`.
pub fn telescope(p: &CFParams, blocks: &[RangeInclusive<usize>]) -> Result<CFParams> {
    let mut next = 1usize;
    for b in blocks {
        if *b.start() != next || b.end() < b.start() {
            return Err(Error::BlockNotConsecutive(format!(
                "block {}..={} does not start at level {next}",
                b.start(),
                b.end()
            )));
        }
        next = b.end() + 1;
    }
    if next != p.levels() + 1 {
        return Err(Error::BlockNotConsecutive(format!(
            "blocks cover levels up to {} of {}",
            next - 1,
            p.levels()
        )));
    }
    let mut out = CFParams::base();
    out.provenance = p.provenance.clone();
    for b in blocks {
        let c = level_sumset(p, b.clone(), DEFAULT_SUMSET_CAP)?;
        out.push_level(c, p.h(*b.end()).clone());
    }
    Ok(out)
}

/// Blocks of the given sizes, in order.
pub fn blocks_of_sizes(sizes: &[usize]) -> Vec<RangeInclusive<usize>> {
    let mut start = 1;
    sizes
        .iter()
        .map(|&s| {
            let r = start..=start + s - 1;
            start += s;
            r
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundednessStats {
    /// `sup #C_n` over the window.
    pub max_cuts: usize,
    /// `sup (h_n − h_{n-1} #C_n)` over the window.
    #[serde(with = "serde_dec")]
    pub max_spacers: BigInt,
    pub cuts: Vec<usize>,
}

pub fn boundedness_stats(p: &CFParams) -> BoundednessStats {
    let cuts: Vec<usize> = p.c.iter().map(|s| s.len()).collect();
    let max_spacers = (1..=p.levels())
        .map(|n| p.h(n) - p.h(n - 1) * BigInt::from(p.cuts(n).len()))
        .max()
        .unwrap_or_default();
    BoundednessStats {
        max_cuts: cuts.iter().copied().max().unwrap_or(0),
        max_spacers,
        cuts,
    }
}

/// Positive differences `c' − c` over pairs of distinct cuts, sorted.
pub fn positive_differences(c: &[BigInt]) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(c.len() * c.len().saturating_sub(1) / 2);
    for (i, a) in c.iter().enumerate() {
        for b in &c[i + 1..] {
            out.push((b - a).abs());
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Decimal digit count of `|x|`.
pub fn decimal_digits(x: &BigInt) -> usize {
    if x.is_zero() {
        return 1;
    }
    // bits * log10(2), corrected by one exact comparison.
    let est = (x.bits() as f64 * std::f64::consts::LOG10_2).floor() as usize;
    let ten = BigInt::from(10);
    if num_traits::pow(ten, est) <= x.abs() {
        est + 1
    } else {
        est.max(1)
    }
}

/// Machine value of a small height, for enumeration loops.
pub fn small(x: &BigInt) -> Option<u64> {
    x.to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn validate_examples() {
        assert!(validate(&CFParams::from_i64(&[1, 10], &[&[0, 5]])).pass);
        let v = validate(&CFParams::from_i64(&[1, 10], &[&[0]]));
        assert_eq!(v.first_violation.unwrap().condition, "(2.1)");
        assert!(validate(&CFParams::from_i64(&[1, 3, 30], &[&[0, 2], &[0, 4]])).pass);
        let v = validate(&CFParams::from_i64(&[1, 3, 30], &[&[0, 2], &[0, 2]]));
        let f = v.first_violation.unwrap();
        assert_eq!((f.level, f.condition.as_str()), (2, "(2.3)"));
        let v = validate(&CFParams::from_i64(&[1, 3, 5], &[&[0, 2], &[0, 3]]));
        assert_eq!(v.first_violation.unwrap().condition, "(2.2)");
    }

    #[test]
    fn increments() {
        let m = measure_tail(&CFParams::from_i64(&[1, 10], &[&[0, 5]]));
        assert_eq!(m.increments, vec![r(4, 5)]);
        assert_eq!(m.verdict, MassVerdict::InfiniteCertified);
        let m = measure_tail(&CFParams::from_i64(&[1, 2, 4], &[&[0, 1], &[0, 2]]));
        assert_eq!(m.increments, vec![r(0, 1), r(0, 1)]);
        assert_eq!(m.verdict, MassVerdict::WindowOnly);
    }

    #[test]
    fn telescope_examples() {
        let p = CFParams::from_i64(&[1, 4, 16, 64], &[&[0, 2], &[0, 4], &[0, 16]]);
        assert_eq!(telescope(&p, &blocks_of_sizes(&[1, 1, 1])).unwrap(), p);
        let t = telescope(&p, &blocks_of_sizes(&[1, 2])).unwrap();
        let want: Vec<BigInt> = [0, 4, 16, 20].iter().map(|&x| x.into()).collect();
        assert_eq!(t.c[1], want);
        assert_eq!(t.h, vec![BigInt::from(1), 4.into(), 64.into()]);
        assert!(validate(&t).pass);
        assert!(matches!(
            telescope(&p, &[1..=1, 3..=3]),
            Err(Error::BlockNotConsecutive(_))
        ));
        assert!(telescope(&p, &[1..=2]).is_err());
    }

    #[test]
    fn boundedness() {
        let s = boundedness_stats(&CFParams::from_i64(&[1, 2, 4], &[&[0, 1], &[0, 2]]));
        assert_eq!((s.max_cuts, s.max_spacers), (2, BigInt::zero()));
    }

    #[test]
    fn json_round_trip_and_shape() {
        let p = CFParams::from_i64(&[1, 10], &[&[0, 5]]).with_provenance("test", "abc");
        let back = CFParams::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
        assert!(CFParams::from_json(r#"{"h":["1","2"],"C":[]}"#).is_err());
        assert!(CFParams::from_json(r#"{"h":["1"],"C":[["x"]]}"#).is_err());
    }

    #[test]
    fn normalization_translates() {
        let p = CFParams::from_i64(&[1, 10], &[&[3, 8]]).normalized().unwrap();
        assert_eq!(p.c[0], vec![BigInt::zero(), 5.into()]);
    }

    #[test]
    fn digit_counts() {
        assert_eq!(decimal_digits(&BigInt::from(9)), 1);
        assert_eq!(decimal_digits(&BigInt::from(10)), 2);
        assert_eq!(decimal_digits(&BigInt::from(999_999)), 6);
        assert_eq!(decimal_digits(&num_traits::pow(BigInt::from(10), 64)), 65);
    }
}
