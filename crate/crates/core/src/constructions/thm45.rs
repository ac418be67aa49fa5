//! Rank-one models isomorphic to the rotation for well approximable angles:
//! heights are convergent denominators `q_{m_n}`, cuts follow a good/bad walk.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{
    config_hash, increment, two_pi, Build, BuildConfig, BuilderKind, Certificate, CertificateTrace,
    LevelRecord, Majorant, Recorder, Relation, TailBounds,
};
use crate::certified::{CertifiedAngle, Dyadic, PrecisionPolicy};
use crate::cf_params::CFParams;
use crate::contfrac::Theta;
use crate::torus::{delta_min, signed_rep, AngleSource};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MSequence {
    /// `m_1, m_2, ...` (one more than the number of levels: the last entry is
    /// the look-ahead used by the tail bound).
    pub m: Vec<usize>,
    pub certificates: Vec<Certificate>,
}

fn threshold(k: usize) -> BigInt {
    BigInt::from((2 * k * k).max(4))
}

/// `|q_m θ − p_m|` with absolute radius about `2^-(prec + 2 bits(q_{m+1}))`.
fn err_abs(theta: &Theta, m: usize, prec: u32) -> Result<CertifiedAngle> {
    let extra = 2 * theta.q(m + 1)?.bits() as u32;
    Ok(theta.approx_error(m, prec + extra)?.abs())
}

/// `A(m) = |Arg λ^{q_m}| = 2π |q_m θ − p_m|`.
fn big_a(theta: &Theta, m: usize, prec: u32) -> Result<CertifiedAngle> {
    Ok(two_pi(prec + 8).mul(&err_abs(theta, m, prec + 8)?))
}

/// Finds `count` indices with `A(m_k−1)/A(m_k) > max(2k², 4)` and
/// `A(m_{k−1}) > A(m_k−1)`, smallest first, inspecting indices up to `window`.
pub fn m_sequence(theta: &Theta, count: usize, window: usize, policy: &PrecisionPolicy) -> Result<MSequence> {
    let mut rec = Recorder::new(*policy);
    let mut m = Vec::new();
    let limit = window.min(theta.max_index().saturating_sub(2));
    for k in 1..=count {
        let thr = threshold(k);
        let start = m.last().map_or(2, |&prev: &usize| prev + 2);
        let mut found = None;
        let mut cand = start;
        while cand <= limit {
            let qm = theta.q(cand)?;
            let qm1 = theta.q(cand + 1)?;
            // Ratio < (q_m + q_{m+1}) / q_m; skip when that cannot exceed thr.
            if &qm + &qm1 > &thr * &qm {
                let c = cand;
                let t = thr.clone();
                if let Some((true, cert)) = rec.probe_rel(Relation::Greater, |prec| {
                    Ok((big_a(theta, c - 1, prec)?, big_a(theta, c, prec)?.mul_int(&t)))
                })? {
                    found = Some((cand, cert));
                    break;
                }
            }
            cand += 1;
        }
        let (mk, cert) = found.ok_or(Error::MSequenceNotFound { k, window: limit })?;
        rec.push(k, "(4.6)", format!("m_{k} = {mk}, threshold {thr}"), cert);
        rec.tag(None, Some(k), Some(mk));
        if let Some(&prev) = m.last() {
            rec.require(k, "(final)", Relation::Greater, format!("m_{} = {prev}, m_{k} = {mk}", k - 1), |prec| {
                Ok((big_a(theta, prev, prec)?, big_a(theta, mk - 1, prec)?))
            })?;
            rec.tag(None, Some(k), Some(mk));
        }
        m.push(mk);
    }
    Ok(MSequence {
        m,
        certificates: rec.certs,
    })
}

/// Span of a family of signed fractions: enclosure of `max − min`.
fn span(vals: &[CertifiedAngle]) -> CertifiedAngle {
    let mut max_lo = vals[0].lo().clone();
    let mut max_hi = vals[0].hi().clone();
    let mut min_lo = vals[0].lo().clone();
    let mut min_hi = vals[0].hi().clone();
    for v in &vals[1..] {
        max_lo = max_lo.max(v.lo().clone());
        max_hi = max_hi.max(v.hi().clone());
        min_lo = min_lo.min(v.lo().clone());
        min_hi = min_hi.min(v.hi().clone());
    }
    let lo = max_lo.sub(&min_hi);
    let lo = if lo.is_negative() { Dyadic::zero() } else { lo };
    CertifiedAngle::from_bounds(lo, max_hi.sub(&min_lo))
}

struct Walked {
    cuts: Vec<BigInt>,
    fracs: Vec<CertifiedAngle>,
    bad: Vec<usize>,
}

/// The good/bad walk `b(0) = 0`, `b += h` when `|Arg λ^b| < A(m−1)/2`, else
/// `b += q_{m−1} + 2h`, kept while `b + h < h_next`.
fn walk_level(theta: &Theta, m: usize, h_next: &BigInt, level: usize, cfg: &BuildConfig) -> Result<Walked> {
    let h = theta.q(m)?;
    let qprev = theta.q(m - 1)?;
    let bad_step = &qprev + (&h << 1);
    // Every step is at least h, at most 3h: bracket the count.
    let lower = (h_next - &h) / &bad_step;
    if lower > BigInt::from(cfg.cardinality_cap) {
        return Err(Error::CardinalityCapExceeded {
            level,
            estimate: ((h_next - &h) / &h).to_string(),
            cap: cfg.cardinality_cap,
        });
    }
    let cap_bits = usize::BITS - cfg.cardinality_cap.leading_zeros();
    let mut prec = 64 + cap_bits + 2 * h_next.bits() as u32;
    for _ in 0..=cfg.precision.refinement_rounds {
        let half = theta.approx_error(m - 1, prec)?.abs().mul_pow2(-1);
        let s_good = signed_rep(&theta.frac_mul(&h, prec)?);
        let s_bad = signed_rep(&theta.frac_mul(&bad_step, prec)?);
        let mut b = BigInt::zero();
        let mut f = CertifiedAngle::zero();
        let mut out = Walked {
            cuts: Vec::new(),
            fracs: Vec::new(),
            bad: Vec::new(),
        };
        let mut undecided = false;
        while &b + &h < *h_next {
            if out.cuts.len() >= cfg.cardinality_cap {
                return Err(Error::CardinalityCapExceeded {
                    level,
                    estimate: format!(">{}", cfg.cardinality_cap),
                    cap: cfg.cardinality_cap,
                });
            }
            let a = f.abs();
            let good = if a.hi() < half.lo() {
                true
            } else if a.lo() > half.hi() {
                false
            } else {
                undecided = true;
                break;
            };
            out.cuts.push(b.clone());
            out.fracs.push(f.clone());
            if good {
                b += &h;
                f = signed_rep(&f.add(&s_good));
            } else {
                out.bad.push(out.cuts.len() - 1);
                b += &bad_step;
                f = signed_rep(&f.add(&s_bad));
            }
        }
        if !undecided {
            return Ok(out);
        }
        prec *= 2;
    }
    Err(Error::Undecidable(format!("good/bad test at level {level}")))
}

/// Builds `cfg.levels` levels. For badly approximable input the m-sequence
/// search fails with `MSequenceNotFound`.
pub fn build_problem1_wellapprox(theta: &Theta, cfg: &BuildConfig) -> Result<Build> {
    cfg.check()?;
    let hash = config_hash(BuilderKind::WellApprox, theta.spec(), cfg, "");
    let mut params = CFParams::base();
    let mut records = Vec::new();
    let levels = cfg.levels;
    if levels == 0 {
        return Ok(finish(theta, cfg, hash, params, records, Vec::new(), None));
    }
    let mseq = m_sequence(theta, levels + 1, cfg.m_window, &cfg.precision)?;
    let ms = &mseq.m;
    let mut rec = Recorder::new(cfg.precision);
    rec.certs.extend(mseq.certificates.iter().cloned());

    // Level 1: every integer below q_{m_1}.
    let h1 = theta.q(ms[0])?;
    cfg.check_digits(&h1)?;
    if h1 > BigInt::from(cfg.cardinality_cap) {
        return Err(Error::CardinalityCapExceeded {
            level: 1,
            estimate: h1.to_string(),
            cap: cfg.cardinality_cap,
        });
    }
    let n1: usize = h1.to_string().parse().expect("small");
    params.push_level((0..n1).map(BigInt::from).collect(), h1.clone());
    records.push(LevelRecord {
        level: 1,
        step: 1,
        increment: BigRational::zero(),
        cuts: n1,
        extras: BTreeMap::from([("m".to_string(), ms[0].to_string())]),
    });

    // Per-level spans of Arg over C_n (in turns), used by the master inequality.
    let mut spans: Vec<CertifiedAngle> = vec![CertifiedAngle::zero()];
    for n in 2..=levels {
        let m = ms[n - 2];
        let h_prev = theta.q(m)?;
        let h_n = theta.q(ms[n - 1])?;
        cfg.check_digits(&h_n)?;
        let w = walk_level(theta, m, &h_n, n, cfg)?;
        let r_n = w.cuts.len();
        let sp = span(&w.fracs);
        let sp_c = sp.clone();
        rec.require(n, "(aux_con3)", Relation::Less, format!("m = {m}"), |prec| {
            let lhs = two_pi(prec + 8).mul(&sp_c);
            let rhs = big_a(theta, m - 1, prec)?.sub(&big_a(theta, m, prec)?);
            Ok((lhs, rhs))
        })?;
        rec.tag(None, Some(n), Some(m));
        spans.push(sp);

        let inc = increment(&h_prev, r_n, &h_n);
        if n >= 3 {
            let bound = BigRational::new(BigInt::from(5), BigInt::from((n - 1) * (n - 1)));
            rec.exact(n, "increment", Relation::LessEq, inc.clone(), bound, String::new())?;
            rec.tag(None, Some(n), None);
        }
        let mut extras = BTreeMap::new();
        extras.insert("m".to_string(), ms[n - 1].to_string());
        extras.insert("r_n".to_string(), r_n.to_string());
        extras.insert("bad_count".to_string(), w.bad.len().to_string());
        extras.insert(
            "bad_indices".to_string(),
            w.bad.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","),
        );
        records.push(LevelRecord {
            level: n,
            step: n,
            increment: inc,
            cuts: r_n,
            extras,
        });
        params.push_level(w.cuts, h_n);
    }

    // Separation: the closest return below h_n is at q_{m_n − 1}.
    for n in 1..=levels {
        let h_n = params.h(n).clone();
        let d = delta_min(theta, &(&h_n - 1), 64 + 2 * h_n.bits() as u32)?;
        let want = theta.q(ms[n - 1] - 1)?;
        rec.exact_int(n, "(4.11)", Relation::Equal, &d.j, &want, format!("minimizer below h_{n}"))?;
    }

    // Tail after the window: A(m_L − 1) − A(m_L) + A(m_{L+1} − 1).
    let big_l = levels;
    let tail = |prec: u32| -> Result<CertifiedAngle> {
        Ok(big_a(theta, ms[big_l - 1] - 1, prec)?
            .sub(&big_a(theta, ms[big_l - 1], prec)?)
            .add(&big_a(theta, ms[big_l] - 1, prec)?))
    };
    for n in 1..=levels {
        let mut window_sum = CertifiedAngle::zero();
        for s in &spans[n..] {
            window_sum = window_sum.add(s);
        }
        rec.require(n, "injectivity-arg", Relation::Greater, String::new(), |prec| {
            let lhs = big_a(theta, ms[n - 1] - 1, prec)?;
            let rhs = two_pi(prec + 8).mul(&window_sum).add(&tail(prec)?);
            Ok((lhs, rhs))
        })?;
        rec.tag(None, Some(n), Some(ms[n - 1]));
    }
    let t = tail(128)?;
    let tails = TailBounds {
        window: levels,
        max_c: Majorant::Fixed {
            after: levels,
            bound: t.clone(),
        },
        max_c_arg: Majorant::Fixed {
            after: levels,
            bound: t.clone(),
        },
        max_diff: Majorant::Fixed {
            after: levels,
            bound: t.clone(),
        },
        max_diff_arg: Majorant::Fixed { after: levels, bound: t },
    };
    Ok(finish(theta, cfg, hash, params, records, rec.certs, Some(tails)))
}

fn finish(
    theta: &Theta,
    cfg: &BuildConfig,
    hash: String,
    params: CFParams,
    levels: Vec<LevelRecord>,
    certificates: Vec<Certificate>,
    tails: Option<TailBounds>,
) -> Build {
    Build {
        params: params.with_provenance(BuilderKind::WellApprox.name(), &hash),
        trace: CertificateTrace {
            builder: BuilderKind::WellApprox,
            theta: theta.spec().clone(),
            config: cfg.clone(),
            config_hash: hash,
            bootstrap_levels: 0,
            levels,
            certificates,
            tails,
        },
        two_cut: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contfrac::ThetaSpec;

    #[test]
    fn badly_approximable_has_no_m_sequence() {
        let e = build_problem1_wellapprox(&Theta::sqrt2_minus_1(), &BuildConfig::with_levels(2)).unwrap_err();
        assert!(matches!(e, Error::MSequenceNotFound { k: 1, .. }), "{e}");
    }

    #[test]
    fn index_coefficients_two_levels() {
        let t = Theta::new(ThetaSpec::index_coefficients(400)).unwrap();
        let b = build_problem1_wellapprox(&t, &BuildConfig::with_levels(2)).unwrap();
        assert!(crate::cf_params::validate(&b.params).pass);
        assert!(b.trace.all_hold());
    }
}
