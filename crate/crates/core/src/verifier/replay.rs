//! Recomputes builder certificates from the parameters with the rational
//! angle oracle and compares verdicts.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::oracle::{brute_delta, oracle_chord, oracle_frac};
use super::{check_injective_arg, spread, two_pi, Tail};
use crate::certified::{decide_with_values, pi, CertifiedAngle, Decision, PrecisionPolicy};
use crate::cf_params::{measure_increment, CFParams};
use crate::constructions::{BuilderKind, Certificate, CertificateTrace, Relation};
use crate::contfrac::Theta;
use crate::torus::{arg_of_signed, delta_min, delta_prec, norm_of};
use crate::{Error, Result};

/// Largest `n` for which `δ_n` is recomputed by a full scan.
const BRUTE_DELTA_CAP: u64 = 200_000;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub checked: usize,
    /// Recomputed independently and matched.
    pub reproduced: usize,
    /// Only the stored data could be re-checked (exact integer conditions
    /// and names without an independent formula).
    pub stored_only: usize,
    pub mismatches: Vec<String>,
}

impl ReplayReport {
    pub fn all_agree(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// `min_{0<d<=n} |1 − λ^d|` via the oracle: full scan for small `n`, else
/// the oracle chord at the convergent minimizer.
fn gap_oracle(theta: &Theta, n: &BigInt, prec: u32) -> Result<CertifiedAngle> {
    let small: Option<u64> = crate::cf_params::small(n);
    match small {
        Some(s) if s <= BRUTE_DELTA_CAP => Ok(brute_delta(theta, s, prec)?.1),
        _ => {
            let j = delta_min(theta, n, 64 + delta_prec(n))?.j;
            oracle_chord(theta, &j, prec + 2 * n.bits() as u32)
        }
    }
}

/// `A(m) = 2π ‖q_m θ‖` via the oracle.
fn a_oracle(theta: &Theta, m: usize, prec: u32) -> Result<CertifiedAngle> {
    let q = theta.q(m)?;
    let f = oracle_frac(theta, &q, prec + 2 * q.bits() as u32 + 8)?;
    Ok(arg_of_signed(&norm_of(&f), prec + 8))
}

fn threshold_general(theta: &Theta, s: usize, prec: u32) -> Result<CertifiedAngle> {
    let d = brute_delta(theta, (s * s) as u64, prec + 16)?.1;
    let inv = d
        .recip(prec + 8)
        .ok_or_else(|| Error::Undecidable("δ not positive".into()))?;
    Ok(inv.mul_int(&BigInt::from(s).pow(4)))
}

fn rat_angle(r: &BigRational, prec: u32) -> CertifiedAngle {
    CertifiedAngle::from_rational(r, prec + 8)
}

struct Ctx<'a> {
    params: &'a CFParams,
    theta: &'a Theta,
    trace: &'a CertificateTrace,
    m_of_k: BTreeMap<usize, usize>,
}

impl Ctx<'_> {
    fn big_n(&self, level: usize) -> Option<BigInt> {
        self.trace
            .levels
            .iter()
            .find(|r| r.level == level)
            .and_then(|r| r.extras.get("N"))
            .and_then(|s| s.parse().ok())
    }

    /// Independent `(lhs, rhs)` at precision `prec`, when a formula is known.
    fn eval(&self, c: &Certificate, prec: u32) -> Result<Option<(CertifiedAngle, CertifiedAngle)>> {
        let t = self.theta;
        let level = c.level;
        let two_cut = self.trace.builder == BuilderKind::TwoCut;
        Ok(match (c.name.as_str(), c.step, c.index, &c.exponent) {
            ("(4.3)", Some(n), _, Some(a)) => {
                let rhs = two_pi(prec + 4).div_int(&BigInt::from(n * n), prec + 4);
                Some((oracle_chord(t, a, prec + 8)?, rhs))
            }
            ("(4.1)" | "(4.4)" | "r_n stop" | "r_n continue", Some(s), _, _) => {
                let h = if c.name.starts_with("r_n") {
                    // a(r_n − 1) + h_{n−1}: the top of the level so far.
                    c.lhs.lo().floor()
                } else {
                    self.params.h(level - 1).clone()
                };
                let rhs = if two_cut {
                    let n = self.big_n(level).ok_or_else(|| Error::Parse("missing N in trace".into()))?;
                    CertifiedAngle::from_int(&(n << s))
                } else {
                    threshold_general(t, s, prec)?
                };
                Some((CertifiedAngle::from_int(&h), rhs))
            }
            ("increment", Some(n), _, _) if self.trace.builder != BuilderKind::WellApprox => {
                let inc = measure_increment(self.params, level);
                let n2 = BigInt::from(n * n);
                let rhs = if two_cut {
                    pi(prec + 4).mul_pow2(-1).div_int(&n2, prec + 4)
                } else {
                    two_pi(prec + 4).div_int(&n2, prec + 4)
                };
                Some((rat_angle(&inc, prec), rhs))
            }
            ("first/k≤n−1", Some(n), _, Some(d)) => {
                let g = gap_oracle(t, &(self.params.h(n - 1) - 1), prec)?;
                let mut m = CertifiedAngle::zero();
                let p = prec + 2 * d.bits() as u32 + 16;
                for j in 1..(1u64 << n) {
                    m = m.max(&oracle_chord(t, &(d * BigInt::from(j)), p)?);
                }
                Some((g, m.mul_int(&(BigInt::from(1) << n))))
            }
            ("(v)", Some(e), _, Some(a)) => {
                let h = self.params.h(level - 1);
                let lhs = oracle_chord(t, a, prec + e as u32 + 2 * h.bits() as u32)?.mul_pow2(e as i64);
                Some((lhs, gap_oracle(t, &(h - 1), prec)?))
            }
            ("(4.6)", Some(k), Some(m), _) => {
                let thr = BigInt::from((2 * k * k).max(4));
                Some((a_oracle(t, m - 1, prec)?, a_oracle(t, m, prec)?.mul_int(&thr)))
            }
            ("(final)", Some(k), Some(m), _) => {
                let prev = *self
                    .m_of_k
                    .get(&(k - 1))
                    .ok_or_else(|| Error::Parse("missing m_{k-1}".into()))?;
                Some((a_oracle(t, prev, prec)?, a_oracle(t, m - 1, prec)?))
            }
            ("(aux_con3)", _, Some(m), _) => {
                let cuts = self.params.cuts(level);
                let p = prec + 2 * self.params.h(level).bits() as u32 + 16;
                let fr: Vec<CertifiedAngle> = cuts.iter().map(|x| oracle_frac(t, x, p)).collect::<Result<_>>()?;
                let sp = spread(&fr)?;
                let lhs = two_pi(prec + 8).mul(&sp.norm);
                Some((lhs, a_oracle(t, m - 1, prec)?.sub(&a_oracle(t, m, prec)?)))
            }
            _ => None,
        })
    }
}

fn expected(rel: Relation) -> Option<Decision> {
    match rel {
        Relation::Less | Relation::LessEq => Some(Decision::Less),
        Relation::Greater | Relation::GreaterEq => Some(Decision::Greater),
        Relation::Equal => None,
    }
}

/// Re-derives every certificate it has a formula for and checks that the
/// verdict matches and the recomputed enclosures overlap the stored ones.
pub fn replay_trace(
    params: &CFParams,
    theta: &Theta,
    trace: &CertificateTrace,
    policy: &PrecisionPolicy,
) -> Result<ReplayReport> {
    let m_of_k = trace
        .named("(4.6)")
        .filter_map(|c| Some((c.step?, c.index?)))
        .collect();
    let ctx = Ctx {
        params,
        theta,
        trace,
        m_of_k,
    };
    let mut rep = ReplayReport::default();
    for c in &trace.certificates {
        rep.checked += 1;
        if !c.holds() {
            rep.mismatches.push(format!("level {} {}: stored relation fails", c.level, c.name));
            continue;
        }
        if c.name == "injectivity-arg" {
            let tail = trace.tails.as_ref().map(Tail::builder);
            let v = check_injective_arg(params, theta, c.level, tail, policy)?;
            if v.pass() {
                rep.reproduced += 1;
            } else {
                rep.mismatches
                    .push(format!("level {} injectivity-arg: verifier verdict {:?}", c.level, v.verdict));
            }
            continue;
        }
        if c.exact.is_some() || ctx.eval(c, policy.initial_bits)?.is_none() {
            rep.stored_only += 1;
            continue;
        }
        let Some(want) = expected(c.relation) else {
            rep.stored_only += 1;
            continue;
        };
        let (d, lhs, rhs) = decide_with_values(policy, |prec| {
            ctx.eval(c, prec)?.ok_or_else(|| Error::Parse("formula vanished".into()))
        })?;
        let overlap = |a: &CertifiedAngle, b: &CertifiedAngle| !(a.hi() < b.lo() || b.hi() < a.lo());
        if d != want {
            rep.mismatches
                .push(format!("level {} {}: recomputed {:?}, stored {:?}", c.level, c.name, d, c.relation));
        } else if !overlap(&lhs, &c.lhs) || !overlap(&rhs, &c.rhs) {
            rep.mismatches
                .push(format!("level {} {}: recomputed enclosures disjoint from stored", c.level, c.name));
        } else {
            rep.reproduced += 1;
        }
    }
    Ok(rep)
}
