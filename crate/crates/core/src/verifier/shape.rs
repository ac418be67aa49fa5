//! Integer shape conditions: arithmetic-progression levels, zero-type
//! disjointness, residue concentration, and the bounded-parameter drift.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;

use super::{level_fracs, max_norm, CheckKind, LevelMargin, SpectralCertificate, Verdict};
use crate::certified::{CertifiedAngle, PrecisionPolicy};
use crate::cf_params::{boundedness_stats, CFParams};
use crate::constructions::sci_lower;
use crate::contfrac::Theta;
use crate::torus::{chord_of_norm, delta_min, delta_prec};
use crate::{Error, Result};

/// Residue concentration at or below this excludes an order-p eigenvalue on
/// the level (any concentration `1 − ε` with `ε < 0.3` is impossible).
pub const TORSION_THRESHOLD: (u32, u32) = (7, 10);

fn exact_margin(level: usize, holds: bool, lhs: &BigInt, rhs: &BigInt, witness: String) -> LevelMargin {
    LevelMargin {
        level,
        lhs: Some(CertifiedAngle::from_int(lhs)),
        rhs: Some(CertifiedAngle::from_int(rhs)),
        holds,
        margin: (rhs - lhs).to_string(),
        witness,
    }
}

/// Strictly increasing over the last three levels of the window.
fn growing(v: &[usize]) -> bool {
    v.len() >= 2 && v[v.len().saturating_sub(3)..].windows(2).all(|w| w[1] > w[0])
}

/// Levels whose cuts form an arithmetic progression, with the common
/// differences as candidate rigidity times. Passes when those levels have
/// strictly growing cardinality across the window.
pub fn check_rigidity_shape(params: &CFParams) -> SpectralCertificate {
    let l = params.levels();
    let mut cert = SpectralCertificate::new(CheckKind::RigidityShape, l, Verdict::Fail, String::new());
    let mut sizes = Vec::new();
    let mut times = Vec::new();
    for n in 1..=l {
        let c = params.cuts(n);
        let diff = if c.len() >= 2 { &c[1] - &c[0] } else { BigInt::zero() };
        let ap = c.len() >= 2 && c.windows(2).all(|w| &w[1] - &w[0] == diff);
        cert.levels.push(LevelMargin {
            level: n,
            lhs: None,
            rhs: None,
            holds: ap,
            margin: if ap { diff.to_string() } else { String::new() },
            witness: format!("#C = {}", c.len()),
        });
        if ap {
            sizes.push(c.len());
            times.push(diff.to_string());
        }
    }
    let grows = sizes.len() >= 2 && sizes.windows(2).all(|w| w[1] > w[0]);
    cert.verdict = if grows { Verdict::Pass } else { Verdict::Fail };
    cert.summary = format!(
        "{} arithmetic-progression levels; cardinality growth {}",
        sizes.len(),
        if grows { "yes" } else { "no" }
    );
    cert.values.insert("rigidity_times".into(), times.join(","));
    cert
}

/// `F_n + F_n + C_{n+1} ⊂ F_{n+1}`, disjointness of `F_n − F_n + c − c'`
/// (c ≠ c') and `F_n − F_n`, and growth of `#C_n` over the window.
pub fn check_zerotype_shape(params: &CFParams) -> SpectralCertificate {
    let l = params.levels();
    let mut cert = SpectralCertificate::new(CheckKind::ZerotypeShape, l, Verdict::Pass, String::new());
    let mut ok = true;
    for n in 0..l {
        let h = params.h(n);
        let c = params.cuts(n + 1);
        let max_c = c.iter().max().expect("nonempty");
        let top = (h - 1) * 2 + max_c;
        let bound = params.h(n + 1) - 1;
        let fits = top <= bound;
        ok &= fits;
        cert.levels.push(exact_margin(n + 1, fits, &top, &bound, "F_n+F_n+C_{n+1} top".into()));
        // Translates (−h, h) + d, d ∈ {0} ∪ (C − C) \ {0}: need centers 2h − 1 apart.
        let mut centers = vec![(BigInt::zero(), BigInt::zero(), BigInt::zero())];
        for x in c {
            for y in c {
                if x != y {
                    centers.push((x - y, x.clone(), y.clone()));
                }
            }
        }
        centers.sort();
        let need = (h << 1) - 1;
        let mut worst: Option<(BigInt, String)> = None;
        for w in centers.windows(2) {
            let sep = &w[1].0 - &w[0].0;
            if worst.as_ref().map_or(true, |(s, _)| &sep < s) {
                worst = Some((
                    sep,
                    format!("differences {} ({}−{}) and {} ({}−{})", w[0].0, w[0].1, w[0].2, w[1].0, w[1].1, w[1].2),
                ));
            }
        }
        if let Some((sep, wit)) = worst {
            let holds = sep >= need;
            ok &= holds;
            cert.levels.push(LevelMargin {
                level: n + 1,
                lhs: Some(CertifiedAngle::from_int(&sep)),
                rhs: Some(CertifiedAngle::from_int(&need)),
                holds,
                margin: (&sep - &need).to_string(),
                witness: if holds { String::new() } else { wit },
            });
        }
    }
    let sizes: Vec<usize> = params.c.iter().map(|c| c.len()).collect();
    let grows = l < 2 || sizes.windows(2).all(|w| w[1] > w[0]);
    cert.values.insert("cuts_growing".into(), grows.to_string());
    cert.verdict = if ok && grows { Verdict::Pass } else { Verdict::Fail };
    cert.summary = if ok && grows {
        "zero-type shape holds on window".into()
    } else if !ok {
        "disjointness or containment fails".into()
    } else {
        "#C_n not growing over window".into()
    };
    cert
}

/// Residue concentration `max_r #{c ≡ r mod p}/#C_n` per level. Levels at or
/// below 0.7 are obstructed; the verdict passes when at least two levels are
/// obstructed and one of them lies in the upper half of the window.
pub fn check_torsion_obstruction(params: &CFParams, p: u64) -> Result<SpectralCertificate> {
    if p < 2 {
        return Err(Error::InvalidParams("p must be at least 2".into()));
    }
    let l = params.levels();
    let pb = BigInt::from(p);
    let thr = BigRational::new(BigInt::from(TORSION_THRESHOLD.0), BigInt::from(TORSION_THRESHOLD.1));
    let mut cert = SpectralCertificate::new(CheckKind::TorsionObstruction, l, Verdict::Fail, String::new());
    let mut obstructed = Vec::new();
    for n in 1..=l {
        let c = params.cuts(n);
        let mut counts = std::collections::BTreeMap::<BigInt, usize>::new();
        for x in c {
            *counts.entry(x.mod_floor(&pb)).or_default() += 1;
        }
        let (r, top) = counts.iter().max_by_key(|(_, k)| **k).map(|(r, k)| (r.clone(), *k)).unwrap();
        let conc = BigRational::new(BigInt::from(top), BigInt::from(c.len()));
        let holds = conc <= thr;
        if holds {
            obstructed.push(n);
        }
        cert.levels.push(LevelMargin {
            level: n,
            lhs: Some(CertifiedAngle::from_rational(&conc, 64)),
            rhs: Some(CertifiedAngle::from_rational(&thr, 64)),
            holds,
            margin: sci_lower(&(&thr - &conc)),
            witness: format!("residue {r}: {top} of {}", c.len()),
        });
    }
    let late = obstructed.iter().any(|&n| 2 * n > l);
    let pass = obstructed.len() >= 2 && late;
    cert.verdict = if pass { Verdict::Pass } else { Verdict::Fail };
    cert.summary = if pass {
        format!("order-{p} eigenvalue excluded on window")
    } else {
        format!("no order-{p} obstruction on window")
    };
    cert.values.insert(
        "obstructed_levels".into(),
        obstructed.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","),
    );
    cert.values.insert("threshold".into(), thr.to_string());
    Ok(cert)
}

/// For bounded cut counts: the per-level `max_c |1 − λ^c|`. When spacers are
/// bounded too, also the drift `|c_{n+1} − c_n #C_n| <= 2M + M²` and its
/// angle against `δ = min_{k <= 2M+M²} |1 − λ^k|`.
pub fn check_finite_order_necessity(
    params: &CFParams,
    theta: &Theta,
    policy: &PrecisionPolicy,
) -> Result<SpectralCertificate> {
    let l = params.levels();
    let stats = boundedness_stats(params);
    if growing(&stats.cuts) {
        return Err(Error::NotApplicable("#C_n grows over the window".into()));
    }
    let spacers: Vec<BigInt> = (1..=l)
        .map(|n| params.h(n) - params.h(n - 1) * BigInt::from(params.cuts(n).len()))
        .collect();
    let spacer_growth = spacers.len() >= 2 && spacers[spacers.len().saturating_sub(3)..].windows(2).all(|w| w[1] > w[0]);
    let prec = policy.initial_bits + 2 * params.h(l).bits() as u32 + 16;
    let mut cert = SpectralCertificate::new(CheckKind::FiniteOrderNecessity, l, Verdict::Fail, String::new());
    let mut min_lo: Option<CertifiedAngle> = None;
    for n in 1..=l {
        let fr = level_fracs(theta, params.cuts(n), prec)?;
        let (m, _) = max_norm(&fr);
        let v = chord_of_norm(&m, policy.initial_bits);
        min_lo = Some(match min_lo {
            None => v.clone(),
            Some(x) => x.min(&v),
        });
        cert.levels.push(LevelMargin {
            level: n,
            lhs: Some(v),
            rhs: None,
            holds: true,
            margin: String::new(),
            witness: String::new(),
        });
    }
    let bounded_params = !spacer_growth;
    cert.values.insert("bounded_parameters".into(), bounded_params.to_string());
    if bounded_params && l >= 1 {
        let m = BigInt::from(stats.max_cuts).max(stats.max_spacers.clone());
        let bound = &m * 2 + &m * &m;
        let mut drift_ok = true;
        for n in 1..l {
            let least = |k: usize| params.cuts(k).iter().find(|c| !c.is_zero()).cloned();
            if let (Some(cn), Some(cn1)) = (least(n), least(n + 1)) {
                let drift = (&cn1 - &cn * BigInt::from(params.cuts(n + 1).len())).magnitude().clone();
                let drift = BigInt::from(drift);
                drift_ok &= drift <= bound;
                cert.values.insert(format!("drift_{}", n + 1), drift.to_string());
            }
        }
        cert.values.insert("drift_bound".into(), bound.to_string());
        cert.values.insert("drift_within_bound".into(), drift_ok.to_string());
        let delta = if bound.is_zero() {
            None
        } else {
            Some(delta_min(theta, &bound, policy.initial_bits + delta_prec(&bound))?.delta)
        };
        let away = match (&min_lo, &delta) {
            (Some(v), Some(_)) => v.lo() > &crate::certified::Dyadic::zero(),
            _ => false,
        };
        if let Some(d) = &delta {
            cert.values.insert("delta".into(), format!("{d}"));
        }
        cert.verdict = if away && drift_ok { Verdict::Pass } else { Verdict::Fail };
        cert.summary = if cert.pass() {
            "λ ∉ e(T) consistent on window: max|1−λ^c| bounded away from 0 with bounded parameters".into()
        } else {
            "no obstruction on window".into()
        };
    } else {
        cert.summary = "cut counts bounded; max|1−λ^c| recorded (window evidence only)".into();
    }
    if let Some(v) = min_lo {
        cert.values.insert("min_level_max".into(), format!("{}", v.lo().to_f64()));
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zerotype_small_case() {
        let p = CFParams::from_i64(&[1, 3], &[&[0, 2]]);
        assert!(check_zerotype_shape(&p).pass());
    }

    #[test]
    fn all_multiples_of_p_not_obstructed() {
        let p = CFParams::from_i64(&[1, 5, 30], &[&[0, 2, 4], &[0, 10, 20]]);
        let c = check_torsion_obstruction(&p, 2).unwrap();
        assert!(!c.pass());
        assert!(c.levels.iter().all(|m| !m.holds));
    }

    #[test]
    fn large_p_spreads_residues() {
        let p = CFParams::from_i64(&[1, 3, 12, 60], &[&[0, 2], &[0, 3, 6, 9], &[0, 12, 24, 36, 48]]);
        let c = check_torsion_obstruction(&p, 1000).unwrap();
        assert!(c.pass());
    }
}
