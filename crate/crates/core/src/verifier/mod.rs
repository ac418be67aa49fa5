//! Independent checks of the spectral premises and shape conditions, usable
//! on any parameters, not only builder output.

pub mod oracle;
mod replay;
mod shape;
mod window;

pub use replay::{replay_trace, ReplayReport};
pub use shape::{
    check_finite_order_necessity, check_rigidity_shape, check_torsion_obstruction, check_zerotype_shape,
    TORSION_THRESHOLD,
};
pub use window::{eigenvalue_window_test, WindowEigenResult};

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certified::{decide_with_values, pi, CertifiedAngle, Decision, Dyadic, PrecisionPolicy};
use crate::cf_params::CFParams;
use crate::constructions::{sci_lower, Majorant, TailBounds};
use crate::contfrac::Theta;
use crate::torus::{arg_of_signed, chord_of_norm, delta_min, delta_prec, norm_of, reduce, AngleSource};
use crate::{Error, Result};

/// Largest level on which the O(size²) pair fallback is attempted.
const PAIR_FALLBACK_CAP: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Summability,
    InjectivityDist,
    InjectivityArg,
    WindowEigen,
    RigidityShape,
    ZerotypeShape,
    TorsionObstruction,
    FiniteOrderNecessity,
}

impl CheckKind {
    pub const ALL: [CheckKind; 8] = [
        CheckKind::Summability,
        CheckKind::InjectivityDist,
        CheckKind::InjectivityArg,
        CheckKind::WindowEigen,
        CheckKind::RigidityShape,
        CheckKind::ZerotypeShape,
        CheckKind::TorsionObstruction,
        CheckKind::FiniteOrderNecessity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Summability => "summability",
            CheckKind::InjectivityDist => "injectivity-dist",
            CheckKind::InjectivityArg => "injectivity-arg",
            CheckKind::WindowEigen => "window-eigen",
            CheckKind::RigidityShape => "rigidity-shape",
            CheckKind::ZerotypeShape => "zerotype-shape",
            CheckKind::TorsionObstruction => "torsion-obstruction",
            CheckKind::FiniteOrderNecessity => "finite-order-necessity",
        }
    }
}

impl std::str::FromStr for CheckKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CheckKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown check {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Nothing certified beyond the built levels.
    WindowOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailSource {
    Builder,
    User,
    Absent,
}

/// A tail majorant together with where it came from.
#[derive(Clone, Copy, Debug)]
pub struct Tail<'a> {
    pub bounds: &'a TailBounds,
    pub source: TailSource,
}

impl<'a> Tail<'a> {
    pub fn builder(bounds: &'a TailBounds) -> Self {
        Tail {
            bounds,
            source: TailSource::Builder,
        }
    }

    /// Tail bounds are only trusted for the exact window they were built for.
    fn usable(tail: Option<Tail<'a>>, window: usize) -> Option<Tail<'a>> {
        tail.filter(|t| t.bounds.window == window)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelMargin {
    pub level: usize,
    pub lhs: Option<CertifiedAngle>,
    pub rhs: Option<CertifiedAngle>,
    pub holds: bool,
    pub margin: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub witness: String,
}

impl LevelMargin {
    fn value(level: usize, v: CertifiedAngle, witness: String) -> Self {
        LevelMargin {
            level,
            lhs: Some(v),
            rhs: None,
            holds: true,
            margin: String::new(),
            witness,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectralCertificate {
    pub kind: CheckKind,
    /// Levels covered.
    pub window: usize,
    pub verdict: Verdict,
    pub summary: String,
    pub levels: Vec<LevelMargin>,
    pub tail: Option<CertifiedAngle>,
    pub tail_source: TailSource,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, String>,
}

impl SpectralCertificate {
    pub fn pass(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub(crate) fn new(kind: CheckKind, window: usize, verdict: Verdict, summary: String) -> Self {
        SpectralCertificate {
            kind,
            window,
            verdict,
            summary,
            levels: Vec::new(),
            tail: None,
            tail_source: TailSource::Absent,
            values: BTreeMap::new(),
        }
    }
}

fn half() -> Dyadic {
    Dyadic::new(BigInt::one(), -1)
}

/// `c θ mod 1` for each cut.
pub fn level_fracs<S: AngleSource + ?Sized>(src: &S, cuts: &[BigInt], prec: u32) -> Result<Vec<CertifiedAngle>> {
    cuts.par_iter().map(|c| src.frac_mul(c, prec)).collect()
}

/// Spread of a level: `max_{c,c'} ‖(c − c')θ‖` with the extremal pair.
#[derive(Clone, Debug)]
pub struct Spread {
    pub norm: CertifiedAngle,
    pub pair: (usize, usize),
}

/// Largest pairwise circular distance among `fracs`. When the points fit in
/// a certified half-circle the extremes give the answer directly; otherwise
/// all pairs are compared.
pub fn spread(fracs: &[CertifiedAngle]) -> Result<Spread> {
    let n = fracs.len();
    if n <= 1 {
        return Ok(Spread {
            norm: CertifiedAngle::zero(),
            pair: (0, 0),
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    let centers: Vec<Dyadic> = fracs.iter().map(|f| reduce(f).center()).collect();
    order.sort_by(|&a, &b| centers[a].cmp(&centers[b]));
    // Start just after the widest gap between sorted centers.
    let mut best_gap = centers[order[0]].add(&Dyadic::one()).sub(&centers[order[n - 1]]);
    let mut start = 0;
    for i in 1..n {
        let g = centers[order[i]].sub(&centers[order[i - 1]]);
        if g > best_gap {
            best_gap = g;
            start = i;
        }
    }
    let r = order[start];
    let mut top: Option<(usize, CertifiedAngle)> = None;
    for i in 0..n {
        let off = if i == r {
            CertifiedAngle::zero()
        } else {
            reduce(&fracs[i].sub(&fracs[r]))
        };
        let replace = match &top {
            None => true,
            Some((_, t)) => off.center() > t.center(),
        };
        if replace {
            top = Some((i, off.clone()));
        }
        if off.hi() >= &half() {
            return pair_spread(fracs);
        }
    }
    // All offsets lie in [0, 1/2): the max pairwise distance is the max offset.
    let mut lo = Dyadic::zero();
    let mut hi = Dyadic::zero();
    for i in 0..n {
        if i == r {
            continue;
        }
        let off = reduce(&fracs[i].sub(&fracs[r]));
        lo = lo.max(off.lo().clone());
        hi = hi.max(off.hi().clone());
    }
    let (arg_i, _) = top.expect("n >= 2");
    Ok(Spread {
        norm: CertifiedAngle::from_bounds(lo, hi),
        pair: (r, arg_i),
    })
}

fn pair_spread(fracs: &[CertifiedAngle]) -> Result<Spread> {
    let n = fracs.len();
    if n > PAIR_FALLBACK_CAP {
        return Err(Error::SumsetTooLarge {
            size: n.to_string(),
            cap: PAIR_FALLBACK_CAP,
        });
    }
    let mut lo = Dyadic::zero();
    let mut hi = Dyadic::zero();
    let mut pair = (0, 0);
    let mut best_center = Dyadic::zero();
    for i in 0..n {
        for j in i + 1..n {
            let d = norm_of(&fracs[i].sub(&fracs[j]));
            if d.center() > best_center {
                best_center = d.center();
                pair = (i, j);
            }
            lo = lo.max(d.lo().clone());
            hi = hi.max(d.hi().clone());
        }
    }
    Ok(Spread {
        norm: CertifiedAngle::from_bounds(lo, hi),
        pair,
    })
}

/// `max_{c ∈ C} ‖c θ‖` with its argmax.
pub fn max_norm(fracs: &[CertifiedAngle]) -> (CertifiedAngle, usize) {
    let mut lo = Dyadic::zero();
    let mut hi = Dyadic::zero();
    let mut best = (Dyadic::zero(), 0);
    for (i, f) in fracs.iter().enumerate() {
        let v = norm_of(f);
        if i == 0 || v.center() > best.0 {
            best = (v.center(), i);
        }
        lo = lo.max(v.lo().clone());
        hi = hi.max(v.hi().clone());
    }
    (CertifiedAngle::from_bounds(lo, hi), best.1)
}

fn level_prec(p: &CFParams, prec: u32) -> u32 {
    prec + 2 * p.h(p.levels()).bits() as u32 + 16
}

/// Premise of the summability criterion: `Σ_n max_{c∈C_n} |1 − λ^c| < ∞`.
pub fn check_summability(
    params: &CFParams,
    theta: &Theta,
    tail: Option<Tail<'_>>,
    policy: &PrecisionPolicy,
) -> Result<SpectralCertificate> {
    let l = params.levels();
    let prec = level_prec(params, policy.initial_bits);
    let mut cert = SpectralCertificate::new(CheckKind::Summability, l, Verdict::WindowOnly, String::new());
    let mut sum = CertifiedAngle::zero();
    for n in 1..=l {
        let fr = level_fracs(theta, params.cuts(n), prec)?;
        let (m, i) = max_norm(&fr);
        let v = chord_of_norm(&m, policy.initial_bits + 8);
        sum = sum.add(&v);
        cert.levels
            .push(LevelMargin::value(n, v, format!("c = {}", params.cuts(n)[i])));
    }
    cert.values.insert("partial_sum".into(), format!("{sum}"));
    match Tail::usable(tail, l) {
        Some(t) => {
            let tb = t.bounds.max_c.tail_after(l, policy.initial_bits)?;
            let total = sum.add(&tb);
            cert.values.insert("total_bound".into(), format!("{}", total.hi()));
            cert.tail = Some(tb);
            cert.tail_source = t.source;
            cert.verdict = Verdict::Pass;
            cert.summary = "premise holds on window + majorant".into();
        }
        None => {
            cert.summary = "window only: no tail majorant".into();
        }
    }
    Ok(cert)
}

/// Injectivity premise with chord distances.
pub fn check_injective_dist(
    params: &CFParams,
    theta: &Theta,
    n: usize,
    tail: Option<Tail<'_>>,
    policy: &PrecisionPolicy,
) -> Result<SpectralCertificate> {
    injectivity(params, theta, n, tail, policy, false)
}

/// Injectivity premise with arguments.
pub fn check_injective_arg(
    params: &CFParams,
    theta: &Theta,
    n: usize,
    tail: Option<Tail<'_>>,
    policy: &PrecisionPolicy,
) -> Result<SpectralCertificate> {
    injectivity(params, theta, n, tail, policy, true)
}

fn tail_majorant(t: &TailBounds, arg: bool) -> &Majorant {
    if arg {
        &t.max_diff_arg
    } else {
        &t.max_diff
    }
}

fn injectivity(
    params: &CFParams,
    theta: &Theta,
    n: usize,
    tail: Option<Tail<'_>>,
    policy: &PrecisionPolicy,
    arg: bool,
) -> Result<SpectralCertificate> {
    let kind = if arg {
        CheckKind::InjectivityArg
    } else {
        CheckKind::InjectivityDist
    };
    let l = params.levels();
    if n > l {
        return Err(Error::InvalidParams(format!("level {n} outside the window 0..={l}")));
    }
    let h_n = params.h(n).clone();
    if h_n <= BigInt::one() {
        return Ok(SpectralCertificate::new(
            kind,
            l,
            Verdict::Pass,
            "vacuous: F_n has no pair f ≠ f'".into(),
        ));
    }
    let tail = Tail::usable(tail, l);
    let d_arg = h_n - 1;
    let mut witness_pairs = vec![(0usize, 0usize); l + 1];
    let mut level_vals: Vec<CertifiedAngle> = vec![CertifiedAngle::zero(); l + 1];
    let mut minimizer = BigInt::one();
    let mut tail_val = None;
    let (d, lhs, rhs) = decide_with_values(policy, |prec| {
        let rec = delta_min(theta, &d_arg, prec + delta_prec(&d_arg))?;
        minimizer = rec.j.clone();
        let lhs = if arg {
            let f = theta.frac_mul(&rec.j, prec + delta_prec(&d_arg))?;
            arg_of_signed(&norm_of(&f), prec + 8)
        } else {
            rec.delta
        };
        let lp = level_prec(params, prec);
        let mut sum = CertifiedAngle::zero();
        for k in n + 1..=l {
            let fr = level_fracs(theta, params.cuts(k), lp)?;
            let sp = spread(&fr)?;
            let v = if arg {
                arg_of_signed(&sp.norm, prec + 8)
            } else {
                chord_of_norm(&sp.norm, prec + 8)
            };
            witness_pairs[k] = sp.pair;
            level_vals[k] = v.clone();
            sum = sum.add(&v);
        }
        if let Some(t) = &tail {
            let tv = tail_majorant(t.bounds, arg).tail_after(l, prec + 8)?;
            tail_val = Some(tv.clone());
            sum = sum.add(&tv);
        }
        Ok((lhs, sum))
    })?;
    let verdict = match (d, tail.is_some()) {
        (Decision::Undecidable, _) => {
            return Err(Error::Undecidable(format!("{} at n = {n}", kind.name())));
        }
        (Decision::Less, _) => Verdict::Fail,
        (Decision::Greater, true) => Verdict::Pass,
        (Decision::Greater, false) => Verdict::WindowOnly,
    };
    let margin = match d {
        Decision::Greater => lhs.lo().sub(rhs.hi()),
        _ => rhs.lo().sub(lhs.hi()),
    };
    let mut cert = SpectralCertificate::new(
        kind,
        l,
        verdict,
        match verdict {
            Verdict::Pass => format!("premise holds at n = {n}"),
            Verdict::Fail => format!("premise fails at n = {n}"),
            Verdict::WindowOnly => format!("window part below the minimum at n = {n}; no tail bound"),
        },
    );
    cert.levels.push(LevelMargin {
        level: n,
        lhs: Some(lhs),
        rhs: Some(rhs),
        holds: verdict != Verdict::Fail,
        margin: sci_lower(&margin.to_rational()),
        witness: format!("closest return d = {minimizer}"),
    });
    for k in n + 1..=l {
        let (i, j) = witness_pairs[k];
        let cuts = params.cuts(k);
        cert.levels.push(LevelMargin::value(
            k,
            level_vals[k].clone(),
            format!("pair ({}, {})", cuts[i], cuts[j]),
        ));
    }
    if verdict == Verdict::Fail {
        // Point at the level contributing most.
        if let Some(k) = (n + 1..=l).max_by(|&a, &b| {
            level_vals[a]
                .center()
                .partial_cmp(&level_vals[b].center())
                .unwrap_or(Ordering::Equal)
        }) {
            let (i, j) = witness_pairs[k];
            cert.values.insert(
                "witness".into(),
                format!("level {k}: c = {}, c' = {}", params.cuts(k)[i], params.cuts(k)[j]),
            );
        }
    }
    cert.tail = tail_val;
    cert.tail_source = tail.map_or(TailSource::Absent, |t| t.source);
    Ok(cert)
}

pub(crate) fn two_pi(prec: u32) -> CertifiedAngle {
    pi(prec + 2).mul_pow2(1)
}
