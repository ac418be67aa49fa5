//! Certified geometry of the orbit `c ↦ λ^c`, `λ = e^{2πiθ}`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::certified::{
    cmp_certified, decide_with_values, pi, sin_first_quadrant, CertifiedAngle, Decision, Dyadic,
    PrecisionPolicy,
};
use crate::contfrac::Theta;
use crate::error::{Error, Result};
use crate::serde_dec;

/// Anything that can enclose `frac(c·x)` for integer `c`.
pub trait AngleSource: Send + Sync {
    /// Enclosure of `c·x mod 1` with center in `[0, 1)` and radius `<= 2^-prec`.
    fn frac_mul(&self, c: &BigInt, prec: u32) -> Result<CertifiedAngle>;

    fn describe(&self) -> String;
}

/// Greedy Ostrowski digits of `c >= 0`: pairs `(k, b_k)` with
/// `c = Σ b_k q_k`, largest index first.
pub fn ostrowski(theta: &Theta, c: &BigInt) -> Result<Vec<(usize, BigInt)>> {
    if c.is_negative() {
        return Err(Error::InvalidParams("ostrowski digits of a negative integer".into()));
    }
    if c.is_zero() {
        return Ok(Vec::new());
    }
    let top = theta.index_above(c)?;
    theta.with_convergents(top, |_, q| {
        let mut rem = c.clone();
        let mut out = Vec::new();
        let mut k = top;
        while !rem.is_zero() && k >= 1 {
            if q[k] <= rem {
                let (b, r) = rem.div_rem(&q[k]);
                out.push((k, b));
                rem = r;
            }
            k -= 1;
        }
        out
    })
}

impl AngleSource for Theta {
    fn frac_mul(&self, c: &BigInt, prec: u32) -> Result<CertifiedAngle> {
        if c.is_zero() {
            return Ok(CertifiedAngle::zero().mark_reduced());
        }
        let m = c.abs();
        let digits = ostrowski(self, &m)?;
        // c θ = Σ b_k (q_k θ − p_k) + Σ b_k p_k; the first sum is small.
        let int_part: BigInt = self.with_convergents(digits[0].0, |p, _| {
            digits.iter().map(|(k, b)| b * &p[*k]).sum()
        })?;
        let work = prec + m.bits() as u32 + 4;
        let t = self.bracket(work)?;
        let mut s = t.mul_int(&m).sub(&CertifiedAngle::from_int(&int_part));
        if c.is_negative() {
            s = s.neg();
        }
        Ok(reduce(&s).round(prec + 2))
    }

    fn describe(&self) -> String {
        serde_json::to_string(self.spec()).unwrap_or_default()
    }
}

/// An exactly known rational angle, e.g. `1/2` for `λ = −1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalAngle(pub BigRational);

impl RationalAngle {
    pub fn new(num: i64, den: i64) -> Self {
        RationalAngle(BigRational::new(num.into(), den.into()))
    }
}

impl AngleSource for RationalAngle {
    fn frac_mul(&self, c: &BigInt, prec: u32) -> Result<CertifiedAngle> {
        let x = &self.0 * BigRational::from_integer(c.clone());
        let f = &x - x.floor();
        Ok(CertifiedAngle::from_rational(&f, prec + 2).mark_reduced())
    }

    fn describe(&self) -> String {
        format!("rational:{}", self.0)
    }
}

/// Shifts an enclosure by an integer so that its center lies in `[0, 1)`.
pub fn reduce(x: &CertifiedAngle) -> CertifiedAngle {
    let n = x.center().floor();
    x.sub(&CertifiedAngle::from_int(&n)).mark_reduced()
}

fn half() -> Dyadic {
    Dyadic::new(BigInt::one(), -1)
}

/// Representative of a reduced fraction in `(−1/2, 1/2]` (by center).
pub fn signed_rep(frac: &CertifiedAngle) -> CertifiedAngle {
    let f = reduce(frac);
    if f.center() > half() {
        f.sub(&CertifiedAngle::from_i64(1))
    } else {
        f
    }
}

/// `‖x‖`, the distance to the nearest integer.
pub fn norm_of(frac: &CertifiedAngle) -> CertifiedAngle {
    let a = signed_rep(frac).abs();
    let hi = a.hi().clone().min(half());
    let lo = a.lo().clone().min(hi.clone());
    CertifiedAngle::from_bounds(lo, hi)
}

/// `2 sin(π t)` for `t ∈ [0, 1/2]`, radius below `2^-prec` when `t` is tight enough.
pub fn chord_of_norm(norm: &CertifiedAngle, prec: u32) -> CertifiedAngle {
    if norm.is_exact() && norm.lo().is_zero() {
        return CertifiedAngle::zero();
    }
    let y = pi(prec + 6).mul(norm);
    sin_first_quadrant(&y, prec + 4).mul_pow2(1)
}

/// `2π t`.
pub fn arg_of_signed(signed: &CertifiedAngle, prec: u32) -> CertifiedAngle {
    pi(prec + 6).mul(signed).mul_pow2(1).round(prec + 3)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowGeometry {
    /// `c θ mod 1`.
    pub frac: CertifiedAngle,
    /// `‖c θ‖`.
    pub norm: CertifiedAngle,
    /// `|1 − λ^c|`.
    pub dist_one: CertifiedAngle,
    /// `Arg λ^c ∈ (−π, π]`.
    pub arg: CertifiedAngle,
}

pub fn pow_geometry<S: AngleSource + ?Sized>(src: &S, c: &BigInt, prec: u32) -> Result<PowGeometry> {
    let frac = src.frac_mul(c, prec + 8)?;
    let signed = signed_rep(&frac);
    let norm = norm_of(&frac);
    Ok(PowGeometry {
        dist_one: chord_of_norm(&norm, prec),
        arg: arg_of_signed(&signed, prec),
        frac,
        norm,
    })
}

/// `|1 − λ^c|` with radius at most about `2^-prec`.
pub fn dist_one<S: AngleSource + ?Sized>(src: &S, c: &BigInt, prec: u32) -> Result<CertifiedAngle> {
    let frac = src.frac_mul(c, prec + 8)?;
    Ok(chord_of_norm(&norm_of(&frac), prec))
}

/// `|Arg λ^c| = 2π ‖cθ‖`.
pub fn abs_arg<S: AngleSource + ?Sized>(src: &S, c: &BigInt, prec: u32) -> Result<CertifiedAngle> {
    let frac = src.frac_mul(c, prec + 8)?;
    Ok(arg_of_signed(&norm_of(&frac), prec))
}

/// Precision that resolves quantities of size about `1/x` to `extra` bits.
pub fn scale_prec(x: &BigInt, extra: u32) -> u32 {
    extra + 2 * x.bits() as u32
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaRecord {
    #[serde(with = "serde_dec")]
    pub n: BigInt,
    #[serde(with = "serde_dec")]
    pub j: BigInt,
    /// Index `k` with `j = q_k`.
    pub k: usize,
    pub delta: CertifiedAngle,
}

/// `δ_n = min_{1<=j<=n} |1 − λ^j|` together with its minimizer.
///
/// The minimizer is the largest convergent denominator `q_k <= n`; the
/// previous convergent is checked to be strictly worse as a sanity guard.
pub fn delta_min(theta: &Theta, n: &BigInt, prec: u32) -> Result<DeltaRecord> {
    if !n.is_positive() {
        return Err(Error::InvalidParams(format!("delta_min needs n >= 1, got {n}")));
    }
    let above = theta.index_above(n)?;
    let k = above - 1;
    let j = theta.q(k)?;
    let delta = dist_one(theta, &j, prec)?;
    if k >= 3 {
        let prev = theta.q(k - 1)?;
        let policy = PrecisionPolicy {
            initial_bits: prec,
            refinement_rounds: 3,
        };
        let d = cmp_certified(&policy, |p| Ok((dist_one(theta, &j, p)?, dist_one(theta, &prev, p)?)))?;
        if d != Decision::Less {
            return Err(Error::Undecidable(format!(
                "delta_min: |1-λ^{j}| not certified below |1-λ^{prev}|"
            )));
        }
    }
    Ok(DeltaRecord {
        n: n.clone(),
        j,
        k,
        delta,
    })
}

/// Default precision used for `δ_n`.
pub fn delta_prec(n: &BigInt) -> u32 {
    scale_prec(n, 64)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetParams {
    #[serde(with = "serde_dec")]
    pub j: BigInt,
    /// `⌈2π/δ_n⌉`.
    #[serde(with = "serde_dec")]
    pub count: BigInt,
    pub delta: CertifiedAngle,
}

/// Data for the net `{λ^{j_n k} : 1 <= k <= 2π/δ_n}`.
pub fn net_params(theta: &Theta, n: &BigInt, policy: &PrecisionPolicy) -> Result<NetParams> {
    for prec in policy.schedule() {
        let rec = delta_min(theta, n, prec + delta_prec(n))?;
        let two_pi = pi(prec + 8).mul_pow2(1);
        let inv = rec
            .delta
            .recip(prec + 8)
            .ok_or_else(|| Error::Undecidable("δ_n not certified positive".into()))?;
        let ratio = two_pi.mul(&inv);
        let lo = ratio.lo().ceil();
        let hi = ratio.hi().ceil();
        if lo == hi {
            return Ok(NetParams {
                j: rec.j,
                count: hi,
                delta: rec.delta,
            });
        }
    }
    Err(Error::Undecidable(format!("⌈2π/δ_{n}⌉ not resolved")))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EWindowEntry {
    pub n: usize,
    /// `n^4 / (N 2^{n-1})`.
    pub lhs: CertifiedAngle,
    /// `δ_{n²}`.
    pub rhs: CertifiedAngle,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EWindowReport {
    #[serde(with = "serde_dec")]
    pub big_n: BigInt,
    pub window: usize,
    pub pass: bool,
    pub first_failure: Option<usize>,
    pub entries: Vec<EWindowEntry>,
}

fn e_lhs(n: usize, big_n: &BigInt) -> BigRational {
    let n4 = BigInt::from(n).pow(4);
    BigRational::new(n4, big_n * (BigInt::one() << (n - 1)))
}

/// Tests `n^4 / (N 2^{n-1}) < δ_{n²}` for `n = 1..=K`. Passing is evidence
/// on a finite window only.
pub fn e_membership_window(
    theta: &Theta,
    big_n: &BigInt,
    k: usize,
    policy: &PrecisionPolicy,
) -> Result<EWindowReport> {
    if !big_n.is_positive() || k == 0 {
        return Err(Error::InvalidParams("e-window needs N >= 1 and K >= 1".into()));
    }
    let mut entries = Vec::new();
    let mut first_failure = None;
    for n in 1..=k {
        let n2 = BigInt::from(n * n);
        let lhs_q = e_lhs(n, big_n);
        let (d, lhs, rhs) = decide_with_values(policy, |prec| {
            let lhs = CertifiedAngle::from_rational(&lhs_q, prec + 8);
            let rhs = delta_min(theta, &n2, prec + delta_prec(&n2))?.delta;
            Ok((lhs, rhs))
        })?;
        let holds = match d {
            Decision::Less => true,
            Decision::Greater => false,
            Decision::Undecidable => {
                return Err(Error::Undecidable(format!("e-window comparison at n = {n}")))
            }
        };
        if !holds && first_failure.is_none() {
            first_failure = Some(n);
        }
        entries.push(EWindowEntry { n, lhs, rhs, holds });
    }
    Ok(EWindowReport {
        big_n: big_n.clone(),
        window: k,
        pass: first_failure.is_none(),
        first_failure,
        entries,
    })
}

/// Smallest `N` for which the window `1..=K` passes.
pub fn minimal_window_n(theta: &Theta, k: usize, policy: &PrecisionPolicy) -> Result<BigInt> {
    let mut best = BigInt::one();
    for n in 1..=k {
        let n2 = BigInt::from(n * n);
        let prec = policy.initial_bits + delta_prec(&n2);
        let delta = delta_min(theta, &n2, prec)?.delta;
        // N > n^4 / (2^{n-1} δ): take floor of an upper bound, plus one.
        let inv = delta
            .recip(prec)
            .ok_or_else(|| Error::Undecidable("δ not certified positive".into()))?;
        let bound = inv
            .mul_int(&BigInt::from(n).pow(4))
            .mul_pow2(-(n as i64 - 1));
        let cand = bound.hi().floor() + 1;
        if cand > best {
            best = cand;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contfrac::ThetaSpec;

    #[test]
    fn zero_exponent_is_exact() {
        let g = pow_geometry(&Theta::golden(), &BigInt::zero(), 64).unwrap();
        assert!(g.frac.is_exact() && g.dist_one.is_exact() && g.arg.is_exact());
    }

    #[test]
    fn golden_ten() {
        let g = pow_geometry(&Theta::golden(), &BigInt::from(10), 64).unwrap();
        assert!((g.frac.to_f64() - 0.180340).abs() < 1e-6);
        let oracle = 2.0 * (std::f64::consts::PI * 0.18033988749894848).sin();
        assert!((g.dist_one.to_f64() - oracle).abs() < 1e-12);
        assert!((g.dist_one.to_f64() - 1.07337).abs() < 1e-3);
        assert!((g.arg.to_f64() - 2.0 * std::f64::consts::PI * 0.180340).abs() < 1e-5);
        assert!(g.frac.radius() <= Dyadic::new(BigInt::one(), -64));
    }

    #[test]
    fn golden_five_arg_follows_error_sign() {
        let g = pow_geometry(&Theta::golden(), &BigInt::from(5), 64).unwrap();
        let oracle = 2.0 * (std::f64::consts::PI * (5.0 * 0.6180339887498949 - 3.0)).sin();
        assert!((g.dist_one.to_f64() - oracle).abs() < 1e-12);
        // 5θ − 3 > 0, so the argument is on the positive side.
        assert!(g.arg.lo() > &Dyadic::zero());
    }

    #[test]
    fn negative_exponent_mirrors() {
        let t = Theta::golden();
        let a = t.frac_mul(&BigInt::from(7), 64).unwrap();
        let b = t.frac_mul(&BigInt::from(-7), 64).unwrap();
        assert!((a.to_f64() + b.to_f64() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ostrowski_digits_sum_back() {
        let t = Theta::golden();
        let c = BigInt::from(1000);
        let d = ostrowski(&t, &c).unwrap();
        let s: BigInt = d.iter().map(|(k, b)| b * t.q(*k).unwrap()).sum();
        assert_eq!(s, c);
        // Zeckendorf: all digits are 1 for the golden ratio.
        assert!(d.iter().all(|(_, b)| b.is_one()));
    }

    #[test]
    fn delta_examples() {
        let g = Theta::golden();
        let r = delta_min(&g, &BigInt::from(5), 64).unwrap();
        assert_eq!(r.j, BigInt::from(5));
        assert!((r.delta.to_f64() - 0.559).abs() < 1e-3);
        let r = delta_min(&g, &BigInt::one(), 64).unwrap();
        assert_eq!(r.j, BigInt::one());
        let s = delta_min(&Theta::sqrt2_minus_1(), &BigInt::from(12), 64).unwrap();
        assert_eq!(s.j, BigInt::from(12));
    }

    #[test]
    fn net_count_golden_five() {
        let n = net_params(&Theta::golden(), &BigInt::from(5), &PrecisionPolicy::default()).unwrap();
        assert_eq!(n.count, BigInt::from(12));
    }

    #[test]
    fn e_window_behaviour() {
        let p = PrecisionPolicy::default();
        let g = Theta::golden();
        let n = minimal_window_n(&g, 8, &p).unwrap();
        assert!(e_membership_window(&g, &n, 8, &p).unwrap().pass);
        assert!(e_membership_window(&g, &BigInt::from(10).pow(6), 1, &p).unwrap().pass);
        let liouville = Theta::new(ThetaSpec::cf(&[0, 1, 10, 10_000, 100_000_000, 1_000_000_000_000, 3])).unwrap();
        let r = e_membership_window(&liouville, &BigInt::from(10), 8, &p).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn rational_candidate() {
        let h = RationalAngle::new(1, 2);
        let d = dist_one(&h, &BigInt::from(3), 64).unwrap();
        assert!((d.to_f64() - 2.0).abs() < 1e-12);
        let d = dist_one(&h, &BigInt::from(4), 64).unwrap();
        assert!(d.to_f64().abs() < 1e-12);
    }
}
