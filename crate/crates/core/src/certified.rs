//! Certified real arithmetic on exact dyadic endpoints.
//!
//! Every quantity that feeds a strict inequality is carried as a closed interval
//! `[lo, hi]` of dyadic rationals that is guaranteed to contain the true value.
//! Precision is absolute: a value computed "at `prec` bits" has radius about
//! `2^-prec`. Comparisons are only decided when intervals are disjoint.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Mutex;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact value `mant * 2^exp`, kept normalized (odd mantissa or zero).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Self {
        let mut d = Dyadic { mant, exp };
        d.normalize();
        d
    }

    fn normalize(&mut self) {
        if self.mant.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mant >>= tz as usize;
            self.exp += tz as i64;
        }
    }

    pub fn zero() -> Self {
        Dyadic {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic::from_int(BigInt::one())
    }

    pub fn from_int(n: BigInt) -> Self {
        Dyadic::new(n, 0)
    }

    pub fn from_i64(n: i64) -> Self {
        Dyadic::from_int(BigInt::from(n))
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    /// `self * 2^k`, exact.
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            mant: self.mant.clone(),
            exp: self.exp + k,
        }
    }

    fn aligned(&self, other: &Dyadic) -> (BigInt, BigInt, i64) {
        let e = self.exp.min(other.exp);
        let a = &self.mant << ((self.exp - e) as usize);
        let b = &other.mant << ((other.exp - e) as usize);
        (a, b, e)
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (a, b, e) = self.aligned(other);
        Dyadic::new(a + b, e)
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Dyadic {
        Dyadic {
            mant: -&self.mant,
            exp: self.exp,
        }
    }

    pub fn abs(&self) -> Dyadic {
        Dyadic {
            mant: self.mant.abs(),
            exp: self.exp,
        }
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic::new(&self.mant * &other.mant, self.exp + other.exp)
    }

    pub fn mul_int(&self, n: &BigInt) -> Dyadic {
        Dyadic::new(&self.mant * n, self.exp)
    }

    /// Largest multiple of `2^-prec` that is `<= self`.
    pub fn floor_to(&self, prec: u32) -> Dyadic {
        let target = -(prec as i64);
        if self.exp >= target {
            return self.clone();
        }
        let shift = (target - self.exp) as usize;
        let q = self.mant.div_floor(&(BigInt::one() << shift));
        Dyadic::new(q, target)
    }

    /// Smallest multiple of `2^-prec` that is `>= self`.
    pub fn ceil_to(&self, prec: u32) -> Dyadic {
        self.neg().floor_to(prec).neg()
    }

    /// Integer floor.
    pub fn floor(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << (self.exp as usize)
        } else {
            self.mant.div_floor(&(BigInt::one() << ((-self.exp) as usize)))
        }
    }

    pub fn ceil(&self) -> BigInt {
        -self.neg().floor()
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << (self.exp as usize))
        } else {
            BigRational::new(self.mant.clone(), BigInt::one() << ((-self.exp) as usize))
        }
    }

    pub fn from_rational_floor(r: &BigRational, prec: u32) -> Dyadic {
        let scaled = r.numer() << (prec as usize);
        Dyadic::new(scaled.div_floor(r.denom()), -(prec as i64))
    }

    pub fn from_rational_ceil(r: &BigRational, prec: u32) -> Dyadic {
        Dyadic::from_rational_floor(&-r, prec).neg()
    }

    /// Approximate base-2 magnitude: `floor(log2|x|)` up to one, `i64::MIN` for 0.
    pub fn log2_magnitude(&self) -> i64 {
        if self.is_zero() {
            return i64::MIN;
        }
        self.mant.bits() as i64 - 1 + self.exp
    }

    pub fn to_f64(&self) -> f64 {
        let bits = self.mant.bits() as i64;
        let (m, e) = if bits > 60 {
            let s = (bits - 60) as usize;
            (&self.mant >> s, self.exp + s as i64)
        } else {
            (self.mant.clone(), self.exp)
        };
        m.to_f64().unwrap_or(0.0) * 2f64.powi(e.clamp(-2000, 2000) as i32)
    }

    /// Exact decimal expansion (dyadic rationals have finite decimal forms).
    pub fn to_decimal_string(&self) -> String {
        if self.exp >= 0 {
            return (&self.mant << (self.exp as usize)).to_string();
        }
        let k = (-self.exp) as usize;
        let digits = (self.mant.abs() * num_traits::pow(BigInt::from(5), k)).to_string();
        let neg = self.mant.is_negative();
        let (int_part, frac_part) = if digits.len() > k {
            let split = digits.len() - k;
            (digits[..split].to_string(), digits[split..].to_string())
        } else {
            ("0".to_string(), format!("{}{}", "0".repeat(k - digits.len()), digits))
        };
        let frac = frac_part.trim_end_matches('0');
        let mut s = String::new();
        if neg {
            s.push('-');
        }
        s.push_str(&int_part);
        if !frac.is_empty() {
            s.push('.');
            s.push_str(frac);
        }
        s
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

/// Parse a plain decimal literal (`-12.5`, `3`, `1e-3`) into an exact rational.
pub fn parse_decimal(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a decimal number: {s:?}"));
    let (mantissa, exp10) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = s[i + 1..].parse().map_err(|_| bad())?;
            if e.abs() > 100_000 {
                return Err(bad());
            }
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (ip, fp) = match body.find('.') {
        Some(i) => (&body[..i], &body[i + 1..]),
        None => (body, ""),
    };
    if ip.is_empty() && fp.is_empty() {
        return Err(bad());
    }
    if !ip.bytes().all(|b| b.is_ascii_digit()) || !fp.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{ip}{fp}");
    let mut n: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| bad())?
    };
    if neg {
        n = -n;
    }
    let scale = exp10 - fp.len() as i64;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        BigRational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(n, num_traits::pow(ten, (-scale) as usize))
    })
}

/// A real number known to lie in `[lo, hi]`.
///
/// Used for every orbit quantity: `frac(cθ)`, `‖cθ‖`, `|1-λ^c|`, `Arg λ^c`.
/// `reduced` marks values whose center was normalized into `[0,1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertifiedAngle {
    lo: Dyadic,
    hi: Dyadic,
    reduced: bool,
}

impl CertifiedAngle {
    pub fn from_bounds(lo: Dyadic, hi: Dyadic) -> Self {
        debug_assert!(lo <= hi, "inverted interval {lo} > {hi}");
        CertifiedAngle {
            lo,
            hi,
            reduced: false,
        }
    }

    pub fn exact(d: Dyadic) -> Self {
        CertifiedAngle::from_bounds(d.clone(), d)
    }

    pub fn from_int(n: &BigInt) -> Self {
        CertifiedAngle::exact(Dyadic::from_int(n.clone()))
    }

    pub fn from_i64(n: i64) -> Self {
        CertifiedAngle::exact(Dyadic::from_i64(n))
    }

    pub fn zero() -> Self {
        CertifiedAngle::exact(Dyadic::zero())
    }

    /// Enclosure of an exact rational; exact when the rational is dyadic.
    pub fn from_rational(r: &BigRational, prec: u32) -> Self {
        let d = r.denom();
        if d.is_one() {
            return CertifiedAngle::from_int(r.numer());
        }
        if d.magnitude().count_ones() == 1 {
            let k = d.trailing_zeros().unwrap_or(0) as i64;
            return CertifiedAngle::exact(Dyadic::new(r.numer().clone(), -k));
        }
        CertifiedAngle::from_bounds(
            Dyadic::from_rational_floor(r, prec),
            Dyadic::from_rational_ceil(r, prec),
        )
    }

    /// Ball form: `[center - radius, center + radius]`.
    pub fn from_center_radius(center: Dyadic, radius: Dyadic) -> Self {
        let r = radius.abs();
        CertifiedAngle::from_bounds(center.sub(&r), center.add(&r))
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub(crate) fn mark_reduced(mut self) -> Self {
        self.reduced = true;
        self
    }

    pub fn center(&self) -> Dyadic {
        self.lo.add(&self.hi).mul_pow2(-1)
    }

    pub fn radius(&self) -> Dyadic {
        self.hi.sub(&self.lo).mul_pow2(-1)
    }

    pub fn width(&self) -> Dyadic {
        self.hi.sub(&self.lo)
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Dyadic) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_rational(&self, x: &BigRational) -> bool {
        &self.lo.to_rational() <= x && x <= &self.hi.to_rational()
    }

    /// Outward rounding to the `2^-prec` grid.
    pub fn round(&self, prec: u32) -> Self {
        CertifiedAngle {
            lo: self.lo.floor_to(prec),
            hi: self.hi.ceil_to(prec),
            reduced: self.reduced,
        }
    }

    pub fn add(&self, o: &CertifiedAngle) -> Self {
        CertifiedAngle::from_bounds(self.lo.add(&o.lo), self.hi.add(&o.hi))
    }

    pub fn sub(&self, o: &CertifiedAngle) -> Self {
        CertifiedAngle::from_bounds(self.lo.sub(&o.hi), self.hi.sub(&o.lo))
    }

    pub fn neg(&self) -> Self {
        CertifiedAngle::from_bounds(self.hi.neg(), self.lo.neg())
    }

    pub fn mul(&self, o: &CertifiedAngle) -> Self {
        let c = [
            self.lo.mul(&o.lo),
            self.lo.mul(&o.hi),
            self.hi.mul(&o.lo),
            self.hi.mul(&o.hi),
        ];
        let lo = c.iter().min().cloned().unwrap_or_else(Dyadic::zero);
        let hi = c.iter().max().cloned().unwrap_or_else(Dyadic::zero);
        CertifiedAngle::from_bounds(lo, hi)
    }

    pub fn mul_int(&self, n: &BigInt) -> Self {
        let a = self.lo.mul_int(n);
        let b = self.hi.mul_int(n);
        if n.is_negative() {
            CertifiedAngle::from_bounds(b, a)
        } else {
            CertifiedAngle::from_bounds(a, b)
        }
    }

    pub fn mul_pow2(&self, k: i64) -> Self {
        CertifiedAngle::from_bounds(self.lo.mul_pow2(k), self.hi.mul_pow2(k))
    }

    /// Division by a positive integer, rounded outward at `prec` bits.
    pub fn div_int(&self, n: &BigInt, prec: u32) -> Self {
        assert!(n.is_positive(), "div_int by non-positive");
        let n = BigRational::from_integer(n.clone());
        let lo = Dyadic::from_rational_floor(&(self.lo.to_rational() / &n), prec);
        let hi = Dyadic::from_rational_ceil(&(self.hi.to_rational() / &n), prec);
        CertifiedAngle::from_bounds(lo, hi)
    }

    /// Reciprocal of a strictly positive interval, rounded outward.
    pub fn recip(&self, prec: u32) -> Option<Self> {
        if !self.lo.mantissa().is_positive() {
            return None;
        }
        let one = BigRational::one();
        let lo = Dyadic::from_rational_floor(&(&one / self.hi.to_rational()), prec);
        let hi = Dyadic::from_rational_ceil(&(&one / self.lo.to_rational()), prec);
        Some(CertifiedAngle::from_bounds(lo, hi))
    }

    pub fn abs(&self) -> Self {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.mantissa().is_positive() {
            self.neg()
        } else {
            let m = self.lo.abs().max(self.hi.clone());
            CertifiedAngle::from_bounds(Dyadic::zero(), m)
        }
    }

    pub fn max(&self, o: &CertifiedAngle) -> Self {
        CertifiedAngle::from_bounds(self.lo.clone().max(o.lo.clone()), self.hi.clone().max(o.hi.clone()))
    }

    pub fn min(&self, o: &CertifiedAngle) -> Self {
        CertifiedAngle::from_bounds(self.lo.clone().min(o.lo.clone()), self.hi.clone().min(o.hi.clone()))
    }

    /// Smallest interval containing both.
    pub fn hull(&self, o: &CertifiedAngle) -> Self {
        CertifiedAngle::from_bounds(self.lo.clone().min(o.lo.clone()), self.hi.clone().max(o.hi.clone()))
    }

    /// `Some(Less)` / `Some(Greater)` only for disjoint intervals; `Some(Equal)`
    /// only for identical exact points.
    pub fn certified_cmp(&self, o: &CertifiedAngle) -> Option<Ordering> {
        if self.hi < o.lo {
            Some(Ordering::Less)
        } else if self.lo > o.hi {
            Some(Ordering::Greater)
        } else if self.is_exact() && o.is_exact() && self.lo == o.lo {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.center().to_f64()
    }
}

impl fmt::Display for CertifiedAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.12e} ± {:.3e}", self.center().to_f64(), self.radius().to_f64())
    }
}

#[derive(Serialize, Deserialize)]
struct BallRepr {
    center: String,
    radius: String,
}

impl Serialize for CertifiedAngle {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BallRepr {
            center: self.center().to_decimal_string(),
            radius: self.radius().to_decimal_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CertifiedAngle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = BallRepr::deserialize(d)?;
        CertifiedAngle::from_decimal_ball(&repr.center, &repr.radius).map_err(serde::de::Error::custom)
    }
}

impl CertifiedAngle {
    /// Smallest dyadic enclosure of a decimal ball.
    pub fn from_decimal_ball(center: &str, radius: &str) -> Result<Self> {
        if center.len() > 100_000 || radius.len() > 100_000 {
            return Err(Error::Parse("decimal string too long".into()));
        }
        let c = parse_decimal(center)?;
        let r = parse_decimal(radius)?;
        if r.is_negative() {
            return Err(Error::Parse("negative radius".into()));
        }
        let bits = 4 * (center.len() + radius.len()) as u32 + 64;
        Ok(CertifiedAngle::from_bounds(
            Dyadic::from_rational_floor(&(&c - &r), bits),
            Dyadic::from_rational_ceil(&(&c + &r), bits),
        ))
    }
}

/// Starting precision and refinement budget for certified decisions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionPolicy {
    /// Bits of absolute precision in the first attempt.
    pub initial_bits: u32,
    /// How many times precision may be doubled before giving up.
    pub refinement_rounds: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy {
            initial_bits: 64,
            refinement_rounds: 6,
        }
    }
}

pub const PRECISION_CAP_ENV: &str = "CFRANK_PRECISION_CAP";

impl PrecisionPolicy {
    /// The sequence of working precisions: `initial, 2*initial, ...`.
    pub fn schedule(&self) -> impl Iterator<Item = u32> + '_ {
        (0..=self.refinement_rounds).map(move |i| self.initial_bits.saturating_mul(1 << i.min(20)))
    }

    pub fn max_bits(&self) -> u32 {
        self.schedule().last().unwrap_or(self.initial_bits)
    }

    /// Applies `CFRANK_PRECISION_CAP` (refinement rounds) when set.
    pub fn with_env_override(mut self) -> Self {
        if let Ok(v) = std::env::var(PRECISION_CAP_ENV) {
            if let Ok(r) = v.trim().parse::<u32>() {
                self.refinement_rounds = r.min(16);
            }
        }
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Less,
    Greater,
    Undecidable,
}

/// Decides `a < b` or `a > b` by re-evaluating both sides at increasing
/// precision until the enclosures separate or the policy's cap is hit.
pub fn cmp_certified<F>(policy: &PrecisionPolicy, mut eval: F) -> Result<Decision>
where
    F: FnMut(u32) -> Result<(CertifiedAngle, CertifiedAngle)>,
{
    for prec in policy.schedule() {
        let (a, b) = eval(prec)?;
        match a.certified_cmp(&b) {
            Some(Ordering::Less) => return Ok(Decision::Less),
            Some(Ordering::Greater) => return Ok(Decision::Greater),
            _ => {}
        }
    }
    Ok(Decision::Undecidable)
}

/// Like [`cmp_certified`] but also hands back the separating enclosures.
pub fn decide_with_values<F>(
    policy: &PrecisionPolicy,
    mut eval: F,
) -> Result<(Decision, CertifiedAngle, CertifiedAngle)>
where
    F: FnMut(u32) -> Result<(CertifiedAngle, CertifiedAngle)>,
{
    let mut last = None;
    for prec in policy.schedule() {
        let (a, b) = eval(prec)?;
        match a.certified_cmp(&b) {
            Some(Ordering::Less) => return Ok((Decision::Less, a, b)),
            Some(Ordering::Greater) => return Ok((Decision::Greater, a, b)),
            _ => last = Some((a, b)),
        }
    }
    let (a, b) = last.unwrap_or_else(|| (CertifiedAngle::zero(), CertifiedAngle::zero()));
    Ok((Decision::Undecidable, a, b))
}

// ---------------------------------------------------------------------------
// Transcendental enclosures.

const GUARD_BITS: u32 = 32;

fn atan_inv_fixed(x: u32, work: u32) -> (BigInt, BigInt) {
    let x2 = BigInt::from(x) * BigInt::from(x);
    let mut power = (BigInt::one() << work as usize) / BigInt::from(x);
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    loop {
        let term = &power / BigInt::from(2 * k + 1);
        if term.is_zero() {
            break;
        }
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &x2;
        k += 1;
    }
    (sum, BigInt::from(4 * (k + 2)))
}

static PI_CACHE: Mutex<BTreeMap<u32, CertifiedAngle>> = Mutex::new(BTreeMap::new());

/// Enclosure of π with radius below `2^-prec` (Machin's formula).
pub fn pi(prec: u32) -> CertifiedAngle {
    if let Some(v) = PI_CACHE.lock().ok().and_then(|c| c.get(&prec).cloned()) {
        return v;
    }
    let work = prec + GUARD_BITS;
    let (a, ea) = atan_inv_fixed(5, work);
    let (b, eb) = atan_inv_fixed(239, work);
    let v = BigInt::from(16) * a - BigInt::from(4) * b;
    let err = BigInt::from(16) * ea + BigInt::from(4) * eb;
    let e = -(work as i64);
    let out = CertifiedAngle::from_bounds(Dyadic::new(&v - &err, e), Dyadic::new(&v + &err, e)).round(prec + 2);
    if let Ok(mut c) = PI_CACHE.lock() {
        c.insert(prec, out.clone());
    }
    out
}

/// sin(Y / 2^work) for 0 <= Y/2^work <= 2, as (value, error) in units of 2^-work.
fn sin_fixed(y: &BigInt, work: u32) -> (BigInt, BigInt) {
    let w = work as usize;
    let y2 = (y * y) >> w;
    let mut term = y.clone();
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    while !term.is_zero() {
        if k % 2 == 0 {
            sum += &term;
        } else {
            sum -= &term;
        }
        term = ((&term * &y2) >> w) / BigInt::from((2 * k + 2) * (2 * k + 3));
        k += 1;
    }
    (sum, BigInt::from(10 * (k + 2)))
}

/// Enclosure of `sin(y)` for an interval `y ⊂ [0, π/2 + small]`.
pub fn sin_first_quadrant(y: &CertifiedAngle, prec: u32) -> CertifiedAngle {
    let work = prec + GUARD_BITS;
    let e = -(work as i64);
    let lo_y = y.lo().clone().max(Dyadic::zero());
    let ylo = lo_y.floor_to(work).mantissa().clone() << ((lo_y.floor_to(work).exponent() - e).max(0) as usize);
    let (slo, elo) = sin_fixed(&ylo, work);
    let lower = Dyadic::new(slo - elo, e).max(Dyadic::zero());
    // 1.5707963 < π/2: above it sin is bounded by 1 on the remaining sliver.
    let near_top = Dyadic::from_rational_floor(
        &BigRational::new(BigInt::from(15_707_963), BigInt::from(10_000_000)),
        40,
    );
    let upper = if y.hi() > &near_top {
        Dyadic::one()
    } else {
        let hi_y = y.hi().ceil_to(work);
        let yhi = hi_y.mantissa().clone() << ((hi_y.exponent() - e).max(0) as usize);
        let (shi, ehi) = sin_fixed(&yhi, work);
        Dyadic::new(shi + ehi, e).min(Dyadic::one())
    };
    let lower = lower.min(upper.clone());
    CertifiedAngle::from_bounds(lower, upper).round(prec + 2)
}

/// Sign of an integer as -1, 0, 1.
pub fn sign_of(n: &BigInt) -> i32 {
    match n.sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn dyadic_floor_ceil_bracket_rationals() {
        let x = r(1, 3);
        let lo = Dyadic::from_rational_floor(&x, 20);
        let hi = Dyadic::from_rational_ceil(&x, 20);
        assert!(lo.to_rational() < x && x < hi.to_rational());
        assert_eq!(hi.sub(&lo), Dyadic::new(BigInt::one(), -20));
    }

    #[test]
    fn decimal_strings_are_exact() {
        let d = Dyadic::new(BigInt::from(-3), -3);
        assert_eq!(d.to_decimal_string(), "-0.375");
        assert_eq!(Dyadic::from_i64(12).to_decimal_string(), "12");
        assert_eq!(Dyadic::new(BigInt::from(5), -1).to_decimal_string(), "2.5");
        let back = parse_decimal(&d.to_decimal_string()).unwrap();
        assert_eq!(back, d.to_rational());
    }

    #[test]
    fn parse_decimal_rejects_garbage() {
        assert!(parse_decimal("1.2.3").is_err());
        assert!(parse_decimal("").is_err());
        assert!(parse_decimal("abc").is_err());
        assert!(parse_decimal("1e999999").is_err());
        assert_eq!(parse_decimal("1e-3").unwrap(), r(1, 1000));
        assert_eq!(parse_decimal("-.5").unwrap(), r(-1, 2));
    }

    #[test]
    fn pi_enclosure_is_tight_and_correct() {
        let p = pi(200);
        assert!(p.radius() < Dyadic::new(BigInt::one(), -199));
        // 3.14159265358979323846264338327950288
        let approx = parse_decimal("3.14159265358979323846264338327950288419716939937510").unwrap();
        let tol = r(1, 1_000_000_000_000_000);
        assert!(p.lo().to_rational() <= &approx + &tol);
        assert!(p.hi().to_rational() >= &approx - &tol);
    }

    #[test]
    fn sin_matches_f64() {
        for &x in &[0.0, 0.1, 0.5, 1.0, 1.3, 1.57] {
            let y = CertifiedAngle::exact(Dyadic::from_rational_floor(
                &BigRational::from_float(x).unwrap(),
                60,
            ));
            let s = sin_first_quadrant(&y, 80);
            let v = y.to_f64().sin();
            assert!(s.lo().to_f64() <= v + 1e-15 && v - 1e-15 <= s.hi().to_f64(), "x={x}");
            assert!(s.radius().to_f64() < 1e-20);
        }
    }

    #[test]
    fn cmp_disjoint_and_overlapping() {
        let a = CertifiedAngle::from_decimal_ball("0.1", "0.01").unwrap();
        let b = CertifiedAngle::from_decimal_ball("0.5", "0.01").unwrap();
        assert_eq!(a.certified_cmp(&b), Some(Ordering::Less));
        let c = CertifiedAngle::from_decimal_ball("0.3", "0.2").unwrap();
        let d = CertifiedAngle::from_decimal_ball("0.31", "0.2").unwrap();
        assert_eq!(c.certified_cmp(&d), None);
    }

    #[test]
    fn refinement_decides_close_values() {
        // 0.3 vs 0.31 sources whose radius shrinks as 2^-prec.
        let policy = PrecisionPolicy::default();
        let d = cmp_certified(&policy, |prec| {
            let rad = Dyadic::new(BigInt::one(), -(prec as i64) + 58);
            let a = CertifiedAngle::from_center_radius(
                Dyadic::from_rational_floor(&r(3, 10), prec),
                rad.clone(),
            );
            let b = CertifiedAngle::from_center_radius(Dyadic::from_rational_floor(&r(31, 100), prec), rad);
            Ok((a, b))
        })
        .unwrap();
        assert_eq!(d, Decision::Less);
    }

    #[test]
    fn equal_reals_are_undecidable() {
        let policy = PrecisionPolicy {
            initial_bits: 16,
            refinement_rounds: 3,
        };
        let d = cmp_certified(&policy, |_| Ok((CertifiedAngle::from_i64(1), CertifiedAngle::from_i64(1)))).unwrap();
        assert_eq!(d, Decision::Undecidable);
    }

    #[test]
    fn serde_ball_round_trip() {
        let a = CertifiedAngle::from_bounds(Dyadic::new(BigInt::from(1), -4), Dyadic::new(BigInt::from(3), -4));
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"center":"0.125","radius":"0.0625"}"#);
        let b: CertifiedAngle = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
    }
}
