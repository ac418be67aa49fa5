//! Finite level-`N` tower model: exact cylinder correlations, truncated
//! eigenfunction values and their defects.

use std::collections::BTreeSet;

use num_bigint::{BigInt, RandBigInt};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certified::{CertifiedAngle, Dyadic};
use crate::cf_params::{level_sumset, CFParams};
use crate::constructions::TailBounds;
use crate::contfrac::Theta;
use crate::serde_dec;
use crate::torus::{abs_arg, arg_of_signed, chord_of_norm, delta_min, delta_prec, norm_of, signed_rep, AngleSource};
use crate::verifier::{level_fracs, max_norm, spread};
use crate::{Error, Result};

pub const DEFAULT_SUMSET_CAP: usize = 1 << 20;

/// Level-`N` approximation: `h_N` rungs of weight `1/(#C_1⋯#C_N)` each.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tower {
    pub level: usize,
    #[serde(with = "serde_dec")]
    pub height: BigInt,
    #[serde(with = "serde_dec::rat")]
    pub weight: BigRational,
}

impl Tower {
    pub fn new(params: &CFParams, level: usize) -> Result<Tower> {
        if level > params.levels() {
            return Err(Error::OutOfRange(format!(
                "tower level {level} beyond {} built levels",
                params.levels()
            )));
        }
        Ok(Tower {
            level,
            height: params.h(level).clone(),
            weight: BigRational::new(BigInt::one(), params.cut_product(level)),
        })
    }

    /// Mass of the rungs, `w_N · h_N`.
    pub fn mass(&self) -> BigRational {
        &self.weight * BigRational::from_integer(self.height.clone())
    }
}

/// The `n`-cylinder over the base point `f ∈ F_n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cylinder {
    pub level: usize,
    #[serde(with = "serde_dec")]
    pub base: BigInt,
}

impl Cylinder {
    pub fn new(level: usize, base: impl Into<BigInt>) -> Self {
        Cylinder {
            level,
            base: base.into(),
        }
    }

    fn check(&self, params: &CFParams) -> Result<()> {
        if self.level > params.levels() {
            return Err(Error::OutOfRange(format!("cylinder level {}", self.level)));
        }
        if self.base.is_negative() || &self.base >= params.h(self.level) {
            return Err(Error::OutOfRange(format!(
                "cylinder base {} outside F_{}",
                self.base, self.level
            )));
        }
        Ok(())
    }

    /// `μ([f]_n) = 1/(#C_1⋯#C_n)`.
    pub fn measure(&self, params: &CFParams) -> BigRational {
        params.cylinder_measure(self.level, &BigInt::one())
    }
}

/// A point `(f, c_{n+1}, …, c_K)` of `X_n`, truncated at `K = n + digits.len()`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointSample {
    pub level: usize,
    #[serde(with = "serde_dec")]
    pub base: BigInt,
    #[serde(with = "serde_dec::vec")]
    pub digits: Vec<BigInt>,
}

impl PointSample {
    pub fn depth(&self) -> usize {
        self.level + self.digits.len()
    }

    fn check(&self, params: &CFParams) -> Result<()> {
        Cylinder::new(self.level, self.base.clone()).check(params)?;
        if self.depth() > params.levels() {
            return Err(Error::OutOfRange(format!("sample depth {}", self.depth())));
        }
        for (i, c) in self.digits.iter().enumerate() {
            let k = self.level + 1 + i;
            if params.cuts(k).binary_search(c).is_err() {
                return Err(Error::InvalidParams(format!("digit {c} not in C_{k}")));
            }
        }
        Ok(())
    }

    /// Rung of the point in the level-`K` tower.
    pub fn position(&self) -> BigInt {
        self.digits.iter().fold(self.base.clone(), |acc, c| acc + c)
    }
}

/// Sorted rungs of `F_N` occupied by the cylinder: `f + C_{n+1} + ⋯ + C_N`.
pub fn cylinder_positions(params: &CFParams, cyl: &Cylinder, level: usize, cap: usize) -> Result<Vec<BigInt>> {
    cyl.check(params)?;
    if level < cyl.level || level > params.levels() {
        return Err(Error::OutOfRange(format!(
            "tower level {level} for a level-{} cylinder",
            cyl.level
        )));
    }
    let s = level_sumset(params, cyl.level + 1..=level, cap)?;
    Ok(s.into_iter().map(|x| x + &cyl.base).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correlation {
    #[serde(with = "serde_dec")]
    pub m: BigInt,
    /// `w_N · #((S_A + m) ∩ S_B)`.
    #[serde(with = "serde_dec::rat")]
    pub value: BigRational,
    /// `w_N · #{s ∈ S_A : s + m ≥ h_N}`.
    #[serde(with = "serde_dec::rat")]
    pub error_bound: BigRational,
}

fn count_shifted(sa: &[BigInt], sb: &[BigInt], m: &BigInt, top: &BigInt) -> (usize, usize) {
    let mut hits = 0;
    let mut spill = 0;
    for s in sa {
        let t = s + m;
        if &t >= top {
            spill += 1;
        } else if sb.binary_search(&t).is_ok() {
            hits += 1;
        }
    }
    (hits, spill)
}

fn correlation_from(tower: &Tower, sa: &[BigInt], sb: &[BigInt], m: &BigInt) -> Result<Correlation> {
    if m.is_negative() || m >= &tower.height {
        return Err(Error::OutOfRange(format!("time {m} outside [0, h_N)")));
    }
    let (hits, spill) = count_shifted(sa, sb, m, &tower.height);
    Ok(Correlation {
        m: m.clone(),
        value: &tower.weight * BigInt::from(hits),
        error_bound: &tower.weight * BigInt::from(spill),
    })
}

/// Lower bound for `μ(T^m A ∩ B)`; the true value lies in
/// `[value, value + error_bound]`.
pub fn correlation(
    params: &CFParams,
    a: &Cylinder,
    b: &Cylinder,
    m: &BigInt,
    level: usize,
    cap: usize,
) -> Result<Correlation> {
    let tower = Tower::new(params, level)?;
    let sa = cylinder_positions(params, a, level, cap)?;
    let sb = cylinder_positions(params, b, level, cap)?;
    correlation_from(&tower, &sa, &sb, m)
}

/// Correlations at each of `times`, in input order.
pub fn correlation_profile(
    params: &CFParams,
    a: &Cylinder,
    b: &Cylinder,
    times: &[BigInt],
    level: usize,
    cap: usize,
) -> Result<Vec<Correlation>> {
    if times.is_empty() {
        return Ok(Vec::new());
    }
    let tower = Tower::new(params, level)?;
    let sa = cylinder_positions(params, a, level, cap)?;
    let sb = cylinder_positions(params, b, level, cap)?;
    times.par_iter().map(|m| correlation_from(&tower, &sa, &sb, m)).collect()
}

pub fn profile_csv(rows: &[Correlation]) -> String {
    let mut out = String::from("m,value_num,value_den,err_num,err_den\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.m,
            r.value.numer(),
            r.value.denom(),
            r.error_bound.numer(),
            r.error_bound.denom()
        ));
    }
    out
}

/// Sampled times of one decay window `[h_k, h_{k+1} − h_k]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecayWindow {
    pub k: usize,
    pub samples: usize,
    /// Largest `value/μ(A)` over the sampled times.
    #[serde(with = "serde_dec::rat")]
    pub max_ratio: BigRational,
    #[serde(with = "serde_dec")]
    pub argmax: BigInt,
    #[serde(with = "serde_dec::rat")]
    pub error_at_max: BigRational,
}

/// Times to probe in `[lo, hi]`: a full sweep when short, else powers of two
/// from both ends, the positive differences of `C_{k+1}` that fall inside,
/// and `extra` seeded uniform draws.
pub fn decay_times(params: &CFParams, k: usize, extra: usize, rng: &mut ChaCha8Rng) -> Vec<BigInt> {
    let lo = params.h(k).clone();
    let hi = params.h(k + 1) - params.h(k);
    if hi < lo {
        return Vec::new();
    }
    let mut out = BTreeSet::new();
    if &hi - &lo <= BigInt::from(4096) {
        let mut m = lo.clone();
        while m <= hi {
            out.insert(m.clone());
            m += 1;
        }
        return out.into_iter().collect();
    }
    let mut step = BigInt::one();
    while step <= &hi - &lo {
        out.insert(&lo + &step - 1);
        out.insert(&hi - &step + 1);
        step <<= 1;
    }
    let c = params.cuts(k + 1);
    for x in c {
        for y in c {
            let d = x - y;
            if d >= lo && d <= hi {
                out.insert(d);
            }
        }
    }
    let top = &hi + 1;
    for _ in 0..extra {
        out.insert(rng.gen_bigint_range(&lo, &top));
    }
    out.into_iter().collect()
}

/// Window maxima `e_k = max_m corr([0]_1, [0]_1, m)/μ([0]_1)` over sampled
/// `m ∈ [h_k, h_{k+1} − h_k]`, for each `k` in `ks`, on the level-`N` tower.
pub fn decay_windows(
    params: &CFParams,
    ks: &[usize],
    level: usize,
    extra: usize,
    seed: u64,
    cap: usize,
) -> Result<Vec<DecayWindow>> {
    let a = Cylinder::new(1, 0);
    let mu = a.measure(params);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &k in ks {
        if k + 1 > level {
            return Err(Error::OutOfRange(format!("decay window {k} needs level {}", k + 1)));
        }
        let times = decay_times(params, k, extra, &mut rng);
        let rows = correlation_profile(params, &a, &a, &times, level, cap)?;
        let mut best: Option<&Correlation> = None;
        for r in &rows {
            if best.map_or(true, |b| r.value > b.value) {
                best = Some(r);
            }
        }
        let (max_ratio, argmax, error_at_max) = match best {
            Some(b) => (&b.value / &mu, b.m.clone(), b.error_bound.clone()),
            None => (BigRational::zero(), BigInt::zero(), BigRational::zero()),
        };
        out.push(DecayWindow {
            k,
            samples: rows.len(),
            max_ratio,
            argmax,
            error_at_max,
        });
    }
    Ok(out)
}

/// Tail majorants for the truncated eigenfunction: the built levels past
/// `K` are evaluated directly, the unbuilt ones come from the builder bound.
pub struct EigenModel<'a> {
    params: &'a CFParams,
    theta: &'a Theta,
    prec: u32,
    /// `Σ_{k>K} max_{c∈C_k} |1 − λ^c|`, indexed by `K`.
    chord_tail: Vec<CertifiedAngle>,
    /// `Σ_{k>K} max_{c∈C_k} |Arg λ^c|`, indexed by `K`.
    arg_tail: Vec<CertifiedAngle>,
    /// `Σ_{k>K} max_{c,c'∈C_k} |Arg λ^{c−c'}|`, indexed by `K`.
    diff_tail: Vec<CertifiedAngle>,
}

impl<'a> EigenModel<'a> {
    pub fn new(params: &'a CFParams, theta: &'a Theta, tails: Option<&TailBounds>, prec: u32) -> Result<Self> {
        let levels = params.levels();
        let tails = tails
            .filter(|t| t.window == levels)
            .ok_or(Error::NoTailMajorant)?;
        let mut chord_tail = vec![CertifiedAngle::zero(); levels + 1];
        let mut arg_tail = vec![CertifiedAngle::zero(); levels + 1];
        let mut diff_tail = vec![CertifiedAngle::zero(); levels + 1];
        diff_tail[levels] = tails.max_diff_arg.tail_after(levels, prec)?;
        chord_tail[levels] = tails.max_c.tail_after(levels, prec)?;
        arg_tail[levels] = tails.max_c_arg.tail_after(levels, prec)?;
        for k in (1..=levels).rev() {
            let cuts = params.cuts(k);
            let p = prec + 2 * params.h(k).bits() as u32 + 8;
            let fr = level_fracs(theta, cuts, p)?;
            let (norm, _) = max_norm(&fr);
            chord_tail[k - 1] = chord_tail[k].add(&chord_of_norm(&norm, prec));
            arg_tail[k - 1] = arg_tail[k].add(&arg_of_signed(&norm, prec));
            let sp = spread(&fr)?.norm;
            diff_tail[k - 1] = diff_tail[k].add(&arg_of_signed(&sp, prec));
        }
        Ok(EigenModel {
            params,
            theta,
            prec,
            chord_tail,
            arg_tail,
            diff_tail,
        })
    }

    pub fn chord_tail(&self, k: usize) -> &CertifiedAngle {
        &self.chord_tail[k.min(self.params.levels())]
    }

    pub fn arg_tail(&self, k: usize) -> &CertifiedAngle {
        &self.arg_tail[k.min(self.params.levels())]
    }

    pub fn diff_tail(&self, k: usize) -> &CertifiedAngle {
        &self.diff_tail[k.min(self.params.levels())]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EigenValue {
    /// `f + c_{n+1} + ⋯ + c_K`.
    #[serde(with = "serde_dec")]
    pub exponent: BigInt,
    /// `Arg λ^{exponent} ∈ (−π, π]`.
    pub arg: CertifiedAngle,
    /// `|φ(x) − λ^{exponent}|` is at most this.
    pub tail: CertifiedAngle,
}

/// Truncation of `φ(x) = λ^f ∏_{k>n} λ^{c_k}` at the sample depth.
pub fn eigen_eval(model: &EigenModel, x: &PointSample) -> Result<EigenValue> {
    x.check(model.params)?;
    let e = x.position();
    let p = model.prec + 2 * e.bits() as u32;
    let frac = model.theta.frac_mul(&e, p + 8)?;
    Ok(EigenValue {
        arg: arg_of_signed(&signed_rep(&frac), model.prec),
        exponent: e,
        tail: model.chord_tail(x.depth()).clone(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefectReport {
    pub depth: usize,
    pub seed: u64,
    pub evaluated: usize,
    /// Samples whose image leaves the level-`K` tower.
    pub skipped: usize,
    /// Largest upper end of `|φ_K(Tx) − λ φ_K(x)|`.
    pub max_defect: CertifiedAngle,
    /// `2·tail + radii`.
    pub bound: CertifiedAngle,
    pub within_bound: bool,
}

/// Seeded sample of depth-`K` points, with base level drawn from `0..=K`.
pub fn sample_points(params: &CFParams, depth: usize, count: usize, seed: u64) -> Vec<PointSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let level = rng.gen_range(0..=depth);
            let base = rng.gen_bigint_range(&BigInt::zero(), params.h(level));
            let digits = (level + 1..=depth)
                .map(|k| {
                    let c = params.cuts(k);
                    c[rng.gen_range(0..c.len())].clone()
                })
                .collect();
            PointSample { level, base, digits }
        })
        .collect()
}

/// `max |φ_K(Tx) − λ φ_K(x)|` over seeded samples, `T` acting inside the
/// level-`K` tower.
pub fn eigen_defect(model: &EigenModel, depth: usize, count: usize, seed: u64) -> Result<DefectReport> {
    let params = model.params;
    if depth > params.levels() {
        return Err(Error::OutOfRange(format!("depth {depth}")));
    }
    let top = params.h(depth);
    let points = sample_points(params, depth, count, seed);
    let tail = model.chord_tail(depth);
    let lam = model.theta.frac_mul(&BigInt::one(), model.prec + 8)?;
    let rows: Vec<Option<(Dyadic, Dyadic)>> = points
        .par_iter()
        .map(|x| -> Result<Option<(Dyadic, Dyadic)>> {
            let e = x.position();
            if &(&e + 1) >= top {
                return Ok(None);
            }
            let p = model.prec + 2 * e.bits() as u32 + 8;
            let fx = model.theta.frac_mul(&e, p)?;
            let ftx = model.theta.frac_mul(&(&e + 1), p)?;
            let d = ftx.sub(&fx).sub(&lam);
            let chord = chord_of_norm(&norm_of(&d), model.prec);
            let radii = d.width().add(&chord.width()).mul_pow2(3);
            Ok(Some((chord.hi().clone(), tail.hi().mul_pow2(1).add(&radii))))
        })
        .collect::<Result<_>>()?;
    let mut rep = DefectReport {
        depth,
        seed,
        evaluated: 0,
        skipped: 0,
        max_defect: CertifiedAngle::zero(),
        bound: CertifiedAngle::exact(tail.hi().mul_pow2(1)),
        within_bound: true,
    };
    for r in rows {
        match r {
            None => rep.skipped += 1,
            Some((d, b)) => {
                rep.evaluated += 1;
                rep.within_bound &= d <= b;
                if &d > rep.max_defect.hi() {
                    rep.max_defect = CertifiedAngle::exact(d);
                }
                if &b > rep.bound.hi() {
                    rep.bound = CertifiedAngle::exact(b);
                }
            }
        }
    }
    Ok(rep)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapMethod {
    /// No pairs.
    Vacuous,
    /// All of `F_n` sorted on the circle.
    Enumerated,
    /// `h_n` too large: the closest pair comes from the convergent minimizer.
    Convergent,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapReport {
    pub level: usize,
    pub method: GapMethod,
    /// Circle distance of the closest pair; `None` is `+∞`.
    pub gap: Option<CertifiedAngle>,
    /// `Σ_{k>n} max |Arg λ^c|`.
    pub tail: CertifiedAngle,
    /// `gap > 2·tail` decided.
    pub certified: bool,
    /// `Σ_{k>n} max |Arg λ^{c−c'}|`, the bound the cocycle relation needs.
    pub diff_tail: CertifiedAngle,
    /// `gap > diff_tail` decided.
    pub separated: bool,
}

/// Smallest circle distance between `φ(f, 0, 0, …)` over `f ≠ f' ∈ F_n`.
pub fn injectivity_gap(model: &EigenModel, level: usize, cap: usize) -> Result<GapReport> {
    let params = model.params;
    if level > params.levels() {
        return Err(Error::OutOfRange(format!("level {level}")));
    }
    let h = params.h(level);
    let tail = model.arg_tail(level).clone();
    let diff_tail = model.diff_tail(level).clone();
    let vacuous = GapReport {
        level,
        method: GapMethod::Vacuous,
        gap: None,
        tail: tail.clone(),
        certified: true,
        diff_tail: diff_tail.clone(),
        separated: true,
    };
    if h <= &BigInt::one() {
        return Ok(vacuous);
    }
    let p = model.prec + 2 * h.bits() as u32 + 8;
    let (method, gap) = match crate::cf_params::small(h).filter(|&s| s as usize <= cap) {
        Some(s) => {
            let fs: Vec<BigInt> = (0..s).map(BigInt::from).collect();
            let mut fr = level_fracs(model.theta, &fs, p)?;
            fr.sort_by(|a, b| a.center().cmp(&b.center()));
            let mut best = fr[0].add(&CertifiedAngle::from_i64(1)).sub(&fr[fr.len() - 1]);
            for w in fr.windows(2) {
                let d = w[1].sub(&w[0]);
                if d.lo() < best.lo() {
                    best = d;
                }
            }
            if best.lo() <= &Dyadic::zero() {
                return Err(Error::Undecidable(format!("F_{level} angles not separated at {p} bits")));
            }
            (GapMethod::Enumerated, arg_of_signed(&best, model.prec))
        }
        None => {
            let j = delta_min(model.theta, &(h - 1), model.prec + delta_prec(h))?.j;
            (GapMethod::Convergent, abs_arg(model.theta, &j, p)?)
        }
    };
    let certified = gap.lo() > &tail.hi().mul_pow2(1);
    let separated = gap.lo() > diff_tail.hi();
    Ok(GapReport {
        method,
        certified,
        separated,
        gap: Some(gap),
        ..vacuous
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> CFParams {
        CFParams::from_i64(&[1, 3, 20], &[&[0, 2], &[0, 4, 16]])
    }

    #[test]
    fn positions_are_the_translated_sumset() {
        let p = toy();
        let pos = cylinder_positions(&p, &Cylinder::new(1, 1), 2, 100).unwrap();
        assert_eq!(pos, [1, 5, 17].map(BigInt::from));
        let same = cylinder_positions(&p, &Cylinder::new(2, 7), 2, 100).unwrap();
        assert_eq!(same, vec![BigInt::from(7)]);
    }

    #[test]
    fn zero_time_self_correlation_is_the_measure() {
        let p = toy();
        let a = Cylinder::new(1, 0);
        let c = correlation(&p, &a, &a, &BigInt::zero(), 2, 100).unwrap();
        assert_eq!(c.value, a.measure(&p));
        assert!(c.error_bound.is_zero());
        let b = Cylinder::new(1, 1);
        assert!(correlation(&p, &a, &b, &BigInt::zero(), 2, 100).unwrap().value.is_zero());
    }

    #[test]
    fn spill_is_counted() {
        let p = toy();
        let a = Cylinder::new(1, 2);
        // positions 2, 6, 18; shifting by 3 pushes 18 out of [0, 20).
        let c = correlation(&p, &a, &a, &BigInt::from(3), 2, 100).unwrap();
        assert_eq!(c.error_bound, BigRational::new(1.into(), 6.into()));
        assert!(profile_csv(&[c]).starts_with("m,value_num"));
    }

    #[test]
    fn empty_profile() {
        let p = toy();
        let a = Cylinder::new(0, 0);
        assert!(correlation_profile(&p, &a, &a, &[], 2, 10).unwrap().is_empty());
    }
}
