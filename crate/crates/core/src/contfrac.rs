//! Continued-fraction engine for an irrational θ ∈ (0,1).
//!
//! Indexing: `p_0 = 1, q_0 = 0, p_1 = a_0, q_1 = 1` and for `k >= 2`
//! `p_k = a_{k-1} p_{k-1} + p_{k-2}`, `q_k = a_{k-1} q_{k-1} + q_{k-2}`,
//! so that `p_k / q_k = [a_0; a_1, ..., a_{k-1}]`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, MutexGuard};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::certified::{parse_decimal, CertifiedAngle, Dyadic};
use crate::error::{Error, Result};
use crate::serde_dec;

/// Coefficient budget used when a source does not state one.
pub const DEFAULT_BUDGET: usize = 20_000;

const MAX_FLAG_LEN: usize = 1 << 16;
const PERIOD_SEARCH_CAP: usize = 100_000;

fn default_budget() -> usize {
    DEFAULT_BUDGET
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ThetaSource {
    /// Finite list `a_0, ..., a_K`; nothing beyond it is certified.
    Cf {
        #[serde(with = "serde_dec::vec")]
        coefficients: Vec<BigInt>,
    },
    /// `a_0..` from `preperiod`, then `period` repeated forever.
    Periodic {
        #[serde(with = "serde_dec::vec")]
        preperiod: Vec<BigInt>,
        #[serde(with = "serde_dec::vec")]
        period: Vec<BigInt>,
    },
    /// θ = (p + √d) / q.
    Surd {
        #[serde(with = "serde_dec")]
        p: BigInt,
        #[serde(with = "serde_dec")]
        d: BigInt,
        #[serde(with = "serde_dec")]
        q: BigInt,
    },
    /// Decimal value whose first `digits` fractional digits are correct up to
    /// one unit in the last place. `digits` defaults to the written length.
    Decimal {
        value: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        digits: Option<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaSpec {
    #[serde(flatten)]
    pub source: ThetaSource,
    /// Never hand out more than this many coefficients.
    #[serde(default = "default_budget")]
    pub budget: usize,
}

fn ints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

impl ThetaSpec {
    pub fn new(source: ThetaSource) -> Self {
        ThetaSpec {
            source,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn cf(coefficients: &[i64]) -> Self {
        ThetaSpec::new(ThetaSource::Cf {
            coefficients: ints(coefficients),
        })
    }

    pub fn periodic(preperiod: &[i64], period: &[i64]) -> Self {
        ThetaSpec::new(ThetaSource::Periodic {
            preperiod: ints(preperiod),
            period: ints(period),
        })
    }

    pub fn surd(p: i64, d: i64, q: i64) -> Self {
        ThetaSpec::new(ThetaSource::Surd {
            p: p.into(),
            d: d.into(),
            q: q.into(),
        })
    }

    pub fn decimal(value: &str) -> Self {
        ThetaSpec::new(ThetaSource::Decimal {
            value: value.to_string(),
            digits: None,
        })
    }

    /// (√5 − 1)/2 = [0; 1, 1, 1, ...].
    pub fn golden() -> Self {
        ThetaSpec::periodic(&[0], &[1])
    }

    /// √2 − 1 = [0; 2, 2, 2, ...].
    pub fn sqrt2_minus_1() -> Self {
        ThetaSpec::periodic(&[0], &[2])
    }

    /// [0; 1, 2, 3, ..., n] (a_k = k), certified up to `a_n` only.
    pub fn index_coefficients(n: usize) -> Self {
        ThetaSpec::new(ThetaSource::Cf {
            coefficients: (0..=n).map(BigInt::from).collect(),
        })
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    /// Parses the command-line form: `cf:0,1,2`, `periodic:0|1`,
    /// `surd:P,D,Q`, `decimal:0.6180339887` or `decimal:0.618@3`.
    pub fn parse_flag(s: &str) -> Result<Self> {
        if s.len() > MAX_FLAG_LEN {
            return Err(Error::InvalidTheta("theta flag too long".into()));
        }
        let (kind, body) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidTheta(format!("expected KIND:VALUE, got {s:?}")))?;
        let list = |t: &str| -> Result<Vec<BigInt>> {
            if t.trim().is_empty() {
                return Ok(Vec::new());
            }
            t.split(',')
                .map(|x| {
                    let x = x.trim();
                    let digits = x.strip_prefix('-').unwrap_or(x);
                    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                        return Err(Error::InvalidTheta(format!("not an integer: {x:?}")));
                    }
                    x.parse::<BigInt>()
                        .map_err(|e| Error::InvalidTheta(e.to_string()))
                })
                .collect()
        };
        let source = match kind.trim() {
            "cf" => ThetaSource::Cf {
                coefficients: list(body)?,
            },
            "periodic" => {
                let (pre, per) = body
                    .split_once('|')
                    .ok_or_else(|| Error::InvalidTheta("periodic needs PRE|PERIOD".into()))?;
                ThetaSource::Periodic {
                    preperiod: list(pre)?,
                    period: list(per)?,
                }
            }
            "surd" => {
                let v = list(body)?;
                if v.len() != 3 {
                    return Err(Error::InvalidTheta("surd needs P,D,Q".into()));
                }
                ThetaSource::Surd {
                    p: v[0].clone(),
                    d: v[1].clone(),
                    q: v[2].clone(),
                }
            }
            "decimal" => {
                let (value, digits) = match body.split_once('@') {
                    Some((v, g)) => (
                        v.trim().to_string(),
                        Some(
                            g.trim()
                                .parse::<usize>()
                                .map_err(|e| Error::InvalidTheta(e.to_string()))?,
                        ),
                    ),
                    None => (body.trim().to_string(), None),
                };
                ThetaSource::Decimal { value, digits }
            }
            other => return Err(Error::InvalidTheta(format!("unknown theta kind {other:?}"))),
        };
        Ok(ThetaSpec::new(source))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Convergent {
    pub k: usize,
    #[serde(with = "serde_dec")]
    pub p: BigInt,
    #[serde(with = "serde_dec")]
    pub q: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Stream {
    Finite(Vec<BigInt>),
    Periodic { pre: Vec<BigInt>, period: Vec<BigInt> },
}

impl Stream {
    fn len(&self) -> Option<usize> {
        match self {
            Stream::Finite(v) => Some(v.len()),
            Stream::Periodic { .. } => None,
        }
    }

    fn get(&self, j: usize) -> Option<BigInt> {
        match self {
            Stream::Finite(v) => v.get(j).cloned(),
            Stream::Periodic { pre, period } => Some(if j < pre.len() {
                pre[j].clone()
            } else {
                period[(j - pre.len()) % period.len()].clone()
            }),
        }
    }
}

#[derive(Debug)]
struct Cache {
    p: Vec<BigInt>,
    q: Vec<BigInt>,
    brackets: BTreeMap<u32, CertifiedAngle>,
}

/// A validated θ with a lazily extended convergent table.
///
/// Cloning is cheap and clones share the cache; every accessor is a pure
/// function of the spec.
#[derive(Clone, Debug)]
pub struct Theta {
    spec: Arc<ThetaSpec>,
    stream: Arc<Stream>,
    available: usize,
    cache: Arc<Mutex<Cache>>,
}

fn check_coefficients(a: &[BigInt], what: &str) -> Result<()> {
    if let Some(a0) = a.first() {
        if !a0.is_zero() {
            return Err(Error::OutOfRange(format!("{what}: a_0 = {a0}, expected 0")));
        }
    }
    if let Some((j, aj)) = a.iter().enumerate().skip(1).find(|(_, x)| !x.is_positive()) {
        return Err(Error::InvalidTheta(format!("{what}: a_{j} = {aj} is not positive")));
    }
    Ok(())
}

impl Theta {
    pub fn new(spec: ThetaSpec) -> Result<Theta> {
        if spec.budget == 0 {
            return Err(Error::InvalidTheta("coefficient budget must be positive".into()));
        }
        let stream = match &spec.source {
            ThetaSource::Cf { coefficients } => {
                check_coefficients(coefficients, "cf")?;
                Stream::Finite(coefficients.clone())
            }
            ThetaSource::Periodic { preperiod, period } => {
                if period.is_empty() {
                    return Err(Error::InvalidTheta("empty period".into()));
                }
                if preperiod.is_empty() {
                    return Err(Error::OutOfRange("preperiod must start with a_0 = 0".into()));
                }
                let mut all = preperiod.clone();
                all.extend(period.iter().cloned());
                check_coefficients(&all, "periodic")?;
                Stream::Periodic {
                    pre: preperiod.clone(),
                    period: period.clone(),
                }
            }
            ThetaSource::Surd { p, d, q } => {
                let e = expand_quadratic(p, d, q, 0)?;
                Stream::Periodic {
                    pre: e.coefficients[..e.preperiod].to_vec(),
                    period: e.coefficients[e.preperiod..e.preperiod + e.period].to_vec(),
                }
            }
            ThetaSource::Decimal { value, digits } => Stream::Finite(decimal_prefix(value, *digits, spec.budget)?),
        };
        let available = stream.len().map_or(spec.budget, |n| n.min(spec.budget));
        Ok(Theta {
            spec: Arc::new(spec),
            stream: Arc::new(stream),
            available,
            cache: Arc::new(Mutex::new(Cache {
                p: vec![BigInt::one()],
                q: vec![BigInt::zero()],
                brackets: BTreeMap::new(),
            })),
        })
    }

    pub fn golden() -> Theta {
        Theta::new(ThetaSpec::golden()).expect("golden spec is valid")
    }

    pub fn sqrt2_minus_1() -> Theta {
        Theta::new(ThetaSpec::sqrt2_minus_1()).expect("sqrt2 spec is valid")
    }

    pub fn spec(&self) -> &ThetaSpec {
        &self.spec
    }

    /// Number of coefficients `a_0, ..., a_{n-1}` the source certifies.
    pub fn available(&self) -> usize {
        self.available
    }

    fn lock(&self) -> MutexGuard<'_, Cache> {
        self.cache.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn coefficient(&self, j: usize) -> Result<BigInt> {
        if j >= self.available {
            return Err(Error::CoefficientBudgetExhausted {
                needed: j + 1,
                available: self.available,
            });
        }
        Ok(self.stream.get(j).expect("index below available"))
    }

    /// `a_0, ..., a_{n-1}`.
    pub fn coefficients(&self, n: usize) -> Result<Vec<BigInt>> {
        (0..n).map(|j| self.coefficient(j)).collect()
    }

    fn extend_to(&self, cache: &mut Cache, k: usize) -> Result<()> {
        while cache.q.len() <= k {
            let i = cache.q.len();
            let (p, q) = if i == 1 {
                (self.coefficient(0)?, BigInt::one())
            } else {
                let a = self.coefficient(i - 1)?;
                (
                    &a * &cache.p[i - 1] + &cache.p[i - 2],
                    &a * &cache.q[i - 1] + &cache.q[i - 2],
                )
            };
            cache.p.push(p);
            cache.q.push(q);
        }
        Ok(())
    }

    pub fn q(&self, k: usize) -> Result<BigInt> {
        let mut c = self.lock();
        self.extend_to(&mut c, k)?;
        Ok(c.q[k].clone())
    }

    pub fn p(&self, k: usize) -> Result<BigInt> {
        let mut c = self.lock();
        self.extend_to(&mut c, k)?;
        Ok(c.p[k].clone())
    }

    pub fn convergent(&self, k: usize) -> Result<Convergent> {
        let mut c = self.lock();
        self.extend_to(&mut c, k)?;
        Ok(Convergent {
            k,
            p: c.p[k].clone(),
            q: c.q[k].clone(),
        })
    }

    /// Convergents with indices `0..=k`; needs `k` certified coefficients.
    pub fn convergents(&self, k: usize) -> Result<Vec<Convergent>> {
        let mut c = self.lock();
        self.extend_to(&mut c, k)?;
        Ok((0..=k)
            .map(|i| Convergent {
                k: i,
                p: c.p[i].clone(),
                q: c.q[i].clone(),
            })
            .collect())
    }

    /// Runs `f` on the tables `p_0..=p_k`, `q_0..=q_k` without cloning them.
    pub fn with_convergents<R>(&self, k: usize, f: impl FnOnce(&[BigInt], &[BigInt]) -> R) -> Result<R> {
        let mut c = self.lock();
        self.extend_to(&mut c, k)?;
        Ok(f(&c.p[..=k], &c.q[..=k]))
    }

    /// Smallest `k >= 1` with `q_k > c`.
    pub fn index_above(&self, c: &BigInt) -> Result<usize> {
        let mut cache = self.lock();
        let mut k = 1usize;
        loop {
            self.extend_to(&mut cache, k)?;
            if &cache.q[k] > c {
                return Ok(k);
            }
            k += 1;
        }
    }

    /// Largest index whose convergent is computable from the certified coefficients.
    pub fn max_index(&self) -> usize {
        self.available
    }

    /// Enclosure of θ of width at most `2^-prec`.
    pub fn bracket(&self, prec: u32) -> Result<CertifiedAngle> {
        let mut c = self.lock();
        if let Some(b) = c.brackets.get(&prec) {
            return Ok(b.clone());
        }
        // θ lies strictly between p_k/q_k and p_{k+1}/q_{k+1}, which are
        // 1/(q_k q_{k+1}) apart.
        let mut k = 1usize;
        loop {
            if k + 1 > self.available {
                return Err(Error::CoefficientBudgetExhausted {
                    needed: k + 1,
                    available: self.available,
                });
            }
            self.extend_to(&mut c, k + 1)?;
            let bits = c.q[k].bits() + c.q[k + 1].bits();
            if bits >= prec as u64 + 3 {
                break;
            }
            k += 1;
        }
        let a = BigRational::new(c.p[k].clone(), c.q[k].clone());
        let b = BigRational::new(c.p[k + 1].clone(), c.q[k + 1].clone());
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let out = CertifiedAngle::from_bounds(
            Dyadic::from_rational_floor(&lo, prec + 2),
            Dyadic::from_rational_ceil(&hi, prec + 2),
        );
        c.brackets.insert(prec, out.clone());
        Ok(out)
    }

    /// Rational interval `[lo, hi]` containing θ obtained from convergents
    /// `k` and `k+1`.
    pub fn rational_bracket(&self, k: usize) -> Result<(BigRational, BigRational)> {
        let a = self.convergent(k)?;
        let b = self.convergent(k + 1)?;
        let ra = BigRational::new(a.p, a.q);
        let rb = BigRational::new(b.p, b.q);
        Ok(if ra < rb { (ra, rb) } else { (rb, ra) })
    }

    /// Enclosure of `q_k θ − p_k` of width at most `2^-prec`.
    pub fn approx_error(&self, k: usize, prec: u32) -> Result<CertifiedAngle> {
        let cv = self.convergent(k)?;
        if cv.q.is_zero() {
            return Ok(CertifiedAngle::from_int(&-cv.p));
        }
        let t = self.bracket(prec + cv.q.bits() as u32 + 1)?;
        Ok(t.mul_int(&cv.q).sub(&CertifiedAngle::from_int(&cv.p)))
    }
}

/// Window statistics over `a_1..a_K`; a diagnostic, not a proof of
/// bad or good approximability.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowDiagnostics {
    pub window: usize,
    #[serde(with = "serde_dec")]
    pub max_coefficient: BigInt,
    /// Exact rational lower bound for `min_{1<=k<=K} q_k ‖q_k θ‖`.
    pub min_qk_norm_lower: String,
    pub label: String,
}

fn norm_lower_on_interval(lo: &BigRational, hi: &BigRational) -> BigRational {
    let one = BigRational::one();
    let f = |x: &BigRational| {
        let y = x - x.floor();
        let z = &one - &y;
        if y < z {
            y
        } else {
            z
        }
    };
    let a = f(lo);
    let b = f(hi);
    if a < b {
        a
    } else {
        b
    }
}

pub fn classify_window(theta: &Theta, k_max: usize) -> Result<WindowDiagnostics> {
    if k_max == 0 {
        return Err(Error::InvalidParams("window must be positive".into()));
    }
    let a = theta.coefficients(k_max + 1)?;
    let max_coefficient = a[1..].iter().max().cloned().unwrap_or_default();
    let q = |k: usize| theta.q(k);
    // k = 1: θ sits in the cylinder between 1/a_1 and 1/(a_1+1).
    let a1 = &a[1];
    let mut best = norm_lower_on_interval(
        &BigRational::new(BigInt::one(), a1 + 1),
        &BigRational::new(BigInt::one(), a1.clone()),
    );
    for k in 2..=k_max {
        let qk = q(k)?;
        let b = BigRational::new(qk.clone(), &qk + q(k + 1)?);
        if b < best {
            best = b;
        }
    }
    Ok(WindowDiagnostics {
        window: k_max,
        max_coefficient,
        min_qk_norm_lower: format!("{}", best),
        label: "window diagnostic".into(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadraticExpansion {
    /// `a_0, ..., a_K`.
    #[serde(with = "serde_dec::vec")]
    pub coefficients: Vec<BigInt>,
    pub preperiod: usize,
    pub period: usize,
}

/// Periodic continued fraction of θ = (P + √D)/Q.
pub fn expand_quadratic(p: &BigInt, d: &BigInt, q: &BigInt, k: usize) -> Result<QuadraticExpansion> {
    if q.is_zero() {
        return Err(Error::InvalidTheta("Q = 0".into()));
    }
    if d.is_negative() {
        return Err(Error::InvalidTheta(format!("D = {d} is negative")));
    }
    if d.bits() > 4096 || p.bits() > 4096 || q.bits() > 4096 {
        return Err(Error::InvalidTheta("surd parameters too large".into()));
    }
    let s = d.sqrt();
    if &s * &s == *d {
        return Err(Error::NotIrrational(format!("D = {d} is a perfect square")));
    }
    let (mut pp, mut dd, mut qq) = (p.clone(), d.clone(), q.clone());
    if !(&dd - &pp * &pp).is_multiple_of(&qq) {
        let aq = qq.abs();
        pp *= &aq;
        dd *= &qq * &qq;
        qq *= &aq;
    }
    let s = dd.sqrt();
    let floor_at = |pp: &BigInt, qq: &BigInt| -> BigInt {
        if qq.is_positive() {
            (pp + &s).div_floor(qq)
        } else {
            (pp + &s + BigInt::one()).div_floor(qq)
        }
    };
    let mut seen: HashMap<(BigInt, BigInt), usize> = HashMap::new();
    let mut coefficients = Vec::new();
    let mut found = None;
    let mut i = 0usize;
    loop {
        if found.is_none() {
            if let Some(&j) = seen.get(&(pp.clone(), qq.clone())) {
                found = Some((j, i - j));
            } else {
                seen.insert((pp.clone(), qq.clone()), i);
            }
        }
        if found.is_some() && coefficients.len() > k {
            break;
        }
        if i > PERIOD_SEARCH_CAP + k {
            return Err(Error::InvalidTheta("period not found within search cap".into()));
        }
        let a = floor_at(&pp, &qq);
        if i == 0 && !a.is_zero() {
            return Err(Error::OutOfRange(format!("floor(θ) = {a}")));
        }
        let np = &a * &qq - &pp;
        let nq = (&dd - &np * &np) / &qq;
        coefficients.push(a);
        pp = np;
        qq = nq;
        i += 1;
    }
    let (preperiod, period) = found.expect("loop exits only after detection");
    coefficients.truncate((k + 1).max(preperiod + period));
    Ok(QuadraticExpansion {
        coefficients,
        preperiod,
        period,
    })
}

/// Coefficients shared by every irrational in `[lo, hi]`.
///
/// A prefix `a_0..a_j` is accepted only when the whole interval lies in the
/// closed cylinder between `p_{j+1}/q_{j+1}` and `(p_{j+1}+p_j)/(q_{j+1}+q_j)`.
pub fn certified_prefix(lo: &BigRational, hi: &BigRational, max_terms: usize) -> Vec<BigInt> {
    let mut out = Vec::new();
    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (BigInt::zero(), BigInt::one());
    let mut first = true;
    let mut x = lo.clone();
    while out.len() < max_terms {
        let a = x.floor().to_integer();
        let (np, nq) = if first {
            (a.clone(), BigInt::one())
        } else {
            (&a * &p1 + &p0, &a * &q1 + &q0)
        };
        let (cp, cq) = if first {
            (BigInt::one(), BigInt::zero())
        } else {
            (p1.clone(), q1.clone())
        };
        let e1 = BigRational::new(np.clone(), nq.clone());
        let e2 = BigRational::new(&np + &cp, &nq + &cq);
        let (lo_c, hi_c) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        if !(lo_c <= *lo && *hi <= hi_c) {
            break;
        }
        out.push(a.clone());
        p0 = cp;
        q0 = cq;
        p1 = np;
        q1 = nq;
        first = false;
        let frac = &x - BigRational::from_integer(a);
        if frac.is_zero() {
            break;
        }
        x = frac.recip();
    }
    out
}

/// Certified prefix of a decimal source.
fn decimal_prefix(value: &str, digits: Option<usize>, budget: usize) -> Result<Vec<BigInt>> {
    let v = value.trim();
    if v.len() > MAX_FLAG_LEN {
        return Err(Error::InvalidTheta("decimal value too long".into()));
    }
    if v.contains(['e', 'E']) {
        return Err(Error::InvalidTheta("decimal source must be positional".into()));
    }
    let written = v.split_once('.').map_or(0, |(_, f)| f.len());
    let g = digits.unwrap_or(written);
    if g > written || g == 0 {
        return Err(Error::InvalidTheta(format!(
            "declared {g} guaranteed digits but {written} written"
        )));
    }
    let x = parse_decimal(v).map_err(|e| Error::InvalidTheta(e.to_string()))?;
    let ulp = BigRational::new(BigInt::one(), num_traits::pow(BigInt::from(10), g));
    let lo = &x - &ulp;
    let hi = &x + &ulp;
    if !lo.is_positive() || hi >= BigRational::one() {
        return Err(Error::OutOfRange(format!("decimal {v} not certified inside (0,1)")));
    }
    let a = certified_prefix(&lo, &hi, budget);
    if a.len() < 2 {
        return Err(Error::CoefficientBudgetExhausted {
            needed: 2,
            available: a.len(),
        });
    }
    Ok(a)
}

/// Convenience for tests and diagnostics.
pub fn to_f64(theta: &Theta) -> f64 {
    theta.bracket(60).map(|b| b.to_f64()).unwrap_or(f64::NAN)
}

/// Sign of `q_k θ − p_k` predicted by alternation: negative for even `k`.
pub fn alternation_sign(k: usize) -> i32 {
    if k % 2 == 0 {
        -1
    } else {
        1
    }
}
