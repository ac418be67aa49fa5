//! Infinite-measure models: a rigid one with arithmetic-progression cuts and
//! a zero-type one whose cuts alternate residues modulo `p`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::search::{beta_denominators, linear_scan, walk};
use super::{
    config_hash, increment, rat, Build, BuildConfig, BuilderKind, Certificate, CertificateTrace, LevelRecord,
    Majorant, Recorder, Relation, TailBounds,
};
use crate::certified::{pi, CertifiedAngle, Dyadic};
use crate::cf_params::CFParams;
use crate::contfrac::Theta;
use crate::torus::{chord_of_norm, delta_min, delta_prec, dist_one, norm_of, AngleSource};
use crate::{Error, Result};

/// Size of the local scan used when the approximation walks come up empty.
const LOCAL_SCAN: usize = 10_000;

/// `p = 2 + (trailing zero bits of n)`; the fibers `{n : p(n) = p}` partition
/// the positive integers into infinite sets.
pub fn partition_index(n: u64) -> u64 {
    assert!(n >= 1, "partition_index needs n >= 1");
    2 + u64::from(n.trailing_zeros())
}

/// `min_{0<d<h} |1 − λ^d|`, or `None` when `h = 1` (no differences).
fn gap(theta: &Theta, h: &BigInt, prec: u32) -> Result<Option<CertifiedAngle>> {
    if h <= &BigInt::one() {
        return Ok(None);
    }
    let n = h - 1;
    Ok(Some(delta_min(theta, &n, prec + delta_prec(&n))?.delta))
}

/// `max_{1<=j<=jmax} |1 − λ^{j x}|`.
fn max_power_chord(theta: &Theta, x: &BigInt, jmax: u64, prec: u32) -> Result<CertifiedAngle> {
    let p = prec + 2 * x.bits() as u32 + 16;
    let t = norm_of(&theta.frac_mul(x, p)?);
    let scaled = t.mul_int(&BigInt::from(jmax));
    if scaled.hi() < &Dyadic::new(BigInt::one(), -1) {
        // j‖x θ‖ stays below 1/2, so ‖j x θ‖ = j‖x θ‖ grows with j.
        return Ok(chord_of_norm(&scaled, p));
    }
    let mut best = CertifiedAngle::zero();
    for j in 1..=jmax {
        best = best.max(&dist_one(theta, &(x * BigInt::from(j)), p)?);
    }
    Ok(best)
}

fn trace(
    kind: BuilderKind,
    theta: &Theta,
    cfg: &BuildConfig,
    hash: String,
    levels: Vec<LevelRecord>,
    certificates: Vec<Certificate>,
    tails: Option<TailBounds>,
) -> CertificateTrace {
    CertificateTrace {
        builder: kind,
        theta: theta.spec().clone(),
        config: cfg.clone(),
        config_hash: hash,
        bootstrap_levels: 0,
        levels,
        certificates,
        tails,
    }
}

/// Geometric tails from the final gap `G`: level `k` contributes at most
/// `scale · G · 2^{-k}`.
fn geometric_tails(window: usize, g: &CertifiedAngle, c_scale: i64) -> TailBounds {
    let half_pi = pi(128).mul_pow2(-1);
    let c = g.mul_pow2(c_scale);
    TailBounds {
        window,
        max_c: Majorant::Geometric { scale: c.clone() },
        max_c_arg: Majorant::Geometric {
            scale: c.mul(&half_pi),
        },
        max_diff: Majorant::Geometric { scale: g.clone() },
        max_diff_arg: Majorant::Geometric {
            scale: g.mul(&half_pi),
        },
    }
}

/// Cuts `{0, d, 2d, …, (2^n − 1)d}` with `d = q_n h_{n−1}`, `q_n` chosen so
/// that `2^n max_{|j|<2^n} |1 − λ^{j d}|` is below the gap of `F_{n−1}`.
pub fn build_infinite_rigid(theta: &Theta, cfg: &BuildConfig) -> Result<Build> {
    cfg.check()?;
    if cfg.levels > 30 {
        return Err(Error::InvalidParams("rigid builder supports at most 30 levels".into()));
    }
    let hash = config_hash(BuilderKind::Rigid, theta.spec(), cfg, "");
    let mut params = CFParams::base();
    let mut split = CFParams::base();
    let mut rec = Recorder::new(cfg.precision);
    let mut records = Vec::new();
    let mut h = BigInt::one();

    for n in 1..=cfg.levels {
        let two_n = 1u64 << n;
        let q = if n == 1 {
            BigInt::from(2)
        } else {
            let hh = h.clone();
            let mut accept = |d: &BigInt| -> Result<bool> {
                if d <= &BigInt::one() {
                    return Ok(false);
                }
                let x = d * &hh;
                let r = rec.probe_rel(Relation::Greater, |prec| {
                    let g = gap(theta, &hh, prec)?.expect("h > 1");
                    Ok((g, max_power_chord(theta, &x, two_n - 1, prec)?.mul_int(&BigInt::from(two_n))))
                })?;
                Ok(matches!(r, Some((true, _))))
            };
            let mut found = None;
            let mut prec = 64 + 4 * (h.bits() as u32 + 2 * n as u32 + 8);
            for _ in 0..4 {
                for d in beta_denominators(theta, &h, prec)? {
                    if accept(&d)? {
                        found = Some(d);
                        break;
                    }
                }
                if found.is_some() {
                    break;
                }
                prec *= 2;
            }
            if found.is_none() {
                found = linear_scan(&BigInt::one(), &BigInt::zero(), &BigInt::from(2), LOCAL_SCAN.min(cfg.search_cap), &mut accept)?;
            }
            found.ok_or_else(|| Error::SearchCapExceeded {
                what: "q_n".into(),
                level: n,
            })?
        };
        let d = &q * &h;
        if n >= 2 {
            let x = d.clone();
            rec.require(n, "first/k≤n−1", Relation::Greater, format!("q_{n} = {q}"), |prec| {
                let g = gap(theta, &h, prec)?.expect("h > 1");
                Ok((g, max_power_chord(theta, &x, two_n - 1, prec)?.mul_int(&BigInt::from(two_n))))
            })?;
            rec.tag(Some(d.clone()), Some(n), None);
        }
        let cuts: Vec<BigInt> = (0..two_n).map(|j| &d * BigInt::from(j)).collect();
        let h_n = &d * BigInt::from(two_n);
        cfg.check_digits(&h_n)?;
        rec.exact_int(
            n,
            "infinite-mass",
            Relation::GreaterEq,
            &h_n,
            &(&h * BigInt::from(2 * two_n)),
            String::new(),
        )?;
        for k in 0..n {
            split.push_level(vec![BigInt::zero(), &d << k], &d << (k + 1));
        }
        let mut extras = BTreeMap::new();
        extras.insert("q_n".to_string(), q.to_string());
        extras.insert("gap".to_string(), d.to_string());
        records.push(LevelRecord {
            level: n,
            step: n,
            increment: increment(&h, cuts.len(), &h_n),
            cuts: cuts.len(),
            extras,
        });
        params.push_level(cuts, h_n.clone());
        h = h_n;
    }

    let tails = match gap(theta, &h, 128)? {
        Some(g) if cfg.levels > 0 => Some(geometric_tails(cfg.levels, &g, 0)),
        _ => None,
    };
    let params = params.with_provenance(BuilderKind::Rigid.name(), &hash);
    let split = split.with_provenance(BuilderKind::Rigid.name(), &hash);
    Ok(Build {
        params,
        trace: trace(BuilderKind::Rigid, theta, cfg, hash, records, rec.certs, tails),
        two_cut: Some(split),
    })
}

/// Smallest admissible `Q >= q0` found by the approximation searches with
/// `2^{e} |1 − λ^{pQ + r}| < G`.
#[allow(clippy::too_many_arguments)]
fn find_q(
    theta: &Theta,
    rec: &Recorder,
    p: &BigInt,
    r: &BigInt,
    q0: &BigInt,
    h: &BigInt,
    e: u32,
    level: usize,
    cfg: &BuildConfig,
) -> Result<BigInt> {
    let mut accept = |x: &BigInt| -> Result<bool> {
        let res = rec.probe(|prec| {
            let lhs = dist_one(theta, x, prec + e + 2 * h.bits() as u32)?.mul_pow2(i64::from(e));
            Ok((lhs, gap(theta, h, prec)?.expect("h > 1")))
        })?;
        Ok(matches!(res, Some((true, _))))
    };
    let target_bits = 2 * (h.bits() as u32 + q0.bits() as u32 + e + 8);
    let mut prec = 64 + target_bits;
    for _ in 0..4 {
        let denoms = beta_denominators(theta, p, prec)?;
        if r.is_zero() {
            for d in denoms.iter().filter(|d| *d >= q0) {
                if accept(&(p * d))? {
                    return Ok(d.clone());
                }
            }
        } else if let Some(q) = walk(theta, p, r, q0, &denoms, prec, cfg.search_cap, &mut accept)? {
            return Ok(q);
        }
        prec *= 2;
    }
    linear_scan(p, r, q0, LOCAL_SCAN.min(cfg.search_cap), &mut accept)?.ok_or_else(|| Error::SearchCapExceeded {
        what: "Q".into(),
        level,
    })
}

/// Zero-type construction: level `L` has `L + 1` cuts `a(0) < … < a(L)` with
/// `a(j) ≡ 0` (j even) or `1` (j odd) modulo `p = partition_index(L)`.
pub fn build_infinite_zerotype(theta: &Theta, cfg: &BuildConfig) -> Result<Build> {
    cfg.check()?;
    let hash = config_hash(BuilderKind::ZeroType, theta.spec(), cfg, "");
    let mut params = CFParams::base();
    let mut rec = Recorder::new(cfg.precision);
    let mut records = Vec::new();
    let mut h = BigInt::one();

    for level in 1..=cfg.levels {
        let p_small = partition_index(level as u64);
        let p = BigInt::from(p_small);
        let e = level as u32 + 1;
        let mut a = vec![BigInt::zero()];
        let mut qs = Vec::new();
        for l in 0..level {
            let r = if (l + 1) % 2 == 0 { BigInt::zero() } else { BigInt::one() };
            let need = (&h + &a[l]) * 3;
            // smallest Q >= 1 with pQ + r > need
            let diff: BigInt = &need - &r;
            let q0: BigInt = (diff.div_floor(&p) + BigInt::one()).max(BigInt::one());
            let q = if level == 1 {
                q0
            } else {
                find_q(theta, &rec, &p, &r, &q0, &h, e, level, cfg)?
            };
            let next = &p * &q + &r;
            rec.exact_int(level, "growth", Relation::Greater, &next, &need, format!("a({})", l + 1))?;
            qs.push(q);
            a.push(next);
        }
        if level >= 2 {
            for (j, c) in a.iter().enumerate().skip(1) {
                let c = c.clone();
                rec.require(level, "(v)", Relation::Less, format!("a({j}), exponent 2^{e}"), |prec| {
                    let lhs = dist_one(theta, &c, prec + e + 2 * h.bits() as u32)?.mul_pow2(i64::from(e));
                    Ok((lhs, gap(theta, &h, prec)?.expect("h > 1")))
                })?;
                rec.tag(Some(c.clone()), Some(e as usize), None);
            }
        }
        let max_c = a.last().unwrap().clone();
        let h_n = (&h << 1) + &max_c;
        cfg.check_digits(&h_n)?;
        zero_type_shape(&mut rec, level, &a, &h, &h_n, p_small)?;
        if level >= 2 {
            let prev = params.cuts(level - 1).len();
            rec.exact_int(
                level,
                "(iv)",
                Relation::Greater,
                &BigInt::from(a.len()),
                &BigInt::from(prev),
                String::new(),
            )?;
        }
        rec.exact_int(
            level,
            "infinite-mass",
            Relation::GreaterEq,
            &h_n,
            &(&h * BigInt::from(2 * a.len())),
            String::new(),
        )?;
        let mut extras = BTreeMap::new();
        extras.insert("p".to_string(), p_small.to_string());
        extras.insert(
            "Q".to_string(),
            qs.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(","),
        );
        records.push(LevelRecord {
            level,
            step: level,
            increment: increment(&h, a.len(), &h_n),
            cuts: a.len(),
            extras,
        });
        params.push_level(a, h_n.clone());
        h = h_n;
    }

    let tails = match gap(theta, &h, 128)? {
        Some(g) if cfg.levels > 0 => Some(geometric_tails(cfg.levels, &g, -1)),
        _ => None,
    };
    let params = params.with_provenance(BuilderKind::ZeroType.name(), &hash);
    Ok(Build {
        params,
        trace: trace(BuilderKind::ZeroType, theta, cfg, hash, records, rec.certs, tails),
        two_cut: None,
    })
}

/// Exact conditions (i), (ii), (iii) and (vi) for one level.
fn zero_type_shape(rec: &mut Recorder, level: usize, a: &[BigInt], h: &BigInt, h_n: &BigInt, p: u64) -> Result<()> {
    let len = BigInt::from(a.len());
    rec.exact_int(level, "(i)", Relation::Greater, &len, &BigInt::one(), String::new())?;
    let max_c = a.iter().max().unwrap();
    let top = (h - 1) * 2 + max_c;
    rec.exact_int(level, "(ii)", Relation::LessEq, &top, &(h_n - 1), String::new())?;
    // (iii): the translates (−h, h) + d for d ∈ {0} ∪ (C − C) are disjoint
    // iff those centers are pairwise at least 2h − 1 apart.
    let mut centers = vec![BigInt::zero()];
    for x in a {
        for y in a {
            if x != y {
                centers.push(x - y);
            }
        }
    }
    centers.sort();
    let min_sep = centers.windows(2).map(|w| &w[1] - &w[0]).min().unwrap_or_else(|| h.clone() * 2);
    rec.exact_int(level, "(iii)", Relation::GreaterEq, &min_sep, &((h << 1) - 1), String::new())?;
    let pb = BigInt::from(p);
    let mut even = 0usize;
    let mut odd = 0usize;
    for (j, c) in a.iter().enumerate() {
        let want = if j % 2 == 0 { BigInt::zero() } else { BigInt::one() };
        if c.mod_floor(&pb) != want {
            return Err(Error::CertificateFailed {
                level,
                name: "(vi)".into(),
                detail: format!("a({j}) = {c} has the wrong residue mod {p}"),
            });
        }
        if j % 2 == 0 {
            even += 1;
        } else {
            odd += 1;
        }
    }
    let third = |k: usize| rat(&BigInt::from(k));
    let bound = rat(&len) * num_rational::BigRational::new(BigInt::from(3), BigInt::from(10));
    rec.exact(level, "(vi) residue 0", Relation::Greater, third(even), bound.clone(), format!("p = {p}"))?;
    rec.exact(level, "(vi) residue 1", Relation::Greater, third(odd), bound, format!("p = {p}"))?;
    Ok(())
}
