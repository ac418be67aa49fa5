//! Rank-one models with a prescribed eigenvalue for every irrational angle:
//! spacers chosen from a finite net of powers of `λ`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::One;

use super::{
    config_hash, increment, two_pi, Build, BuildConfig, BuilderKind, CertificateTrace, LevelRecord, Majorant,
    Recorder, Relation, TailBounds,
};
use crate::certified::{pi, CertifiedAngle};
use crate::cf_params::CFParams;
use crate::contfrac::Theta;
use crate::torus::{delta_min, delta_prec, dist_one, e_membership_window, net_params, scale_prec};
use crate::{Error, Result};

#[derive(Clone)]
enum Rule {
    /// `h > n^4 / δ_{n²}`.
    General,
    /// `h > N 2^n`.
    TwoCut(BigInt),
}

impl Rule {
    fn kind(&self) -> BuilderKind {
        match self {
            Rule::General => BuilderKind::General,
            Rule::TwoCut(_) => BuilderKind::TwoCut,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Rule::General => "(4.1)",
            Rule::TwoCut(_) => "(4.4)",
        }
    }

    fn threshold(&self, theta: &Theta, n: usize, prec: u32) -> Result<CertifiedAngle> {
        match self {
            Rule::General => {
                let n2 = BigInt::from(n * n);
                let d = delta_min(theta, &n2, prec + delta_prec(&n2))?.delta;
                let inv = d
                    .recip(prec + 8)
                    .ok_or_else(|| Error::Undecidable(format!("δ_{n2} not certified positive")))?;
                Ok(inv.mul_int(&BigInt::from(n).pow(4)))
            }
            Rule::TwoCut(big_n) => Ok(CertifiedAngle::from_int(&(big_n << n))),
        }
    }

    /// Certified `x > threshold(n)`; `None` when undecidable.
    fn exceeds(&self, rec: &Recorder, theta: &Theta, x: &BigInt, n: usize) -> Result<Option<(bool, super::Certificate)>> {
        let xv = CertifiedAngle::from_int(x);
        rec.probe_rel(Relation::Greater, |prec| Ok((xv.clone(), self.threshold(theta, n, prec)?)))
    }

    /// Increment bound `2π/n²` or `π/(2n²)`.
    fn increment_bound(&self, n: usize, prec: u32) -> CertifiedAngle {
        let n2 = BigInt::from(n * n);
        match self {
            Rule::General => two_pi(prec + 4).div_int(&n2, prec + 4),
            Rule::TwoCut(_) => pi(prec + 4).mul_pow2(-1).div_int(&n2, prec + 4),
        }
    }
}

/// Spacers from the net `{λ^{j k}}` with the general stopping rule. Any
/// irrational `θ` works.
pub fn build_problem2_general(theta: &Theta, cfg: &BuildConfig) -> Result<Build> {
    build_net(theta, cfg, Rule::General)
}

/// Two cuts at every level; requires the `N`-window membership test to pass.
pub fn build_problem2_twocut(theta: &Theta, big_n: &BigInt, cfg: &BuildConfig) -> Result<Build> {
    if big_n < &BigInt::one() {
        return Err(Error::InvalidParams("N must be positive".into()));
    }
    if cfg.levels > 0 {
        let report = e_membership_window(theta, big_n, cfg.levels, &cfg.precision)?;
        if let Some(n) = report.first_failure {
            return Err(Error::EMembershipFailed { n });
        }
    }
    build_net(theta, cfg, Rule::TwoCut(big_n.clone()))
}

fn build_net(theta: &Theta, cfg: &BuildConfig, rule: Rule) -> Result<Build> {
    cfg.check()?;
    let extra = match &rule {
        Rule::General => String::new(),
        Rule::TwoCut(n) => n.to_string(),
    };
    let hash = config_hash(rule.kind(), theta.spec(), cfg, &extra);
    let mut params = CFParams::base();
    let mut rec = Recorder::new(cfg.precision);
    let mut records = Vec::new();
    let mut h = BigInt::one();
    let mut bootstrap = 0usize;

    if cfg.levels > 0 {
        // Filler levels {0, h} until the first hypothesis holds.
        loop {
            match rule.exceeds(&rec, theta, &h, 1)? {
                None => return Err(Error::Undecidable(format!("{} bootstrap test", rule.name()))),
                Some((true, _)) => break,
                Some((false, _)) => {}
            }
            bootstrap += 1;
            if bootstrap > cfg.search_cap {
                return Err(Error::SearchCapExceeded {
                    what: "bootstrap".into(),
                    level: bootstrap,
                });
            }
            let next = &h << 1;
            cfg.check_digits(&next)?;
            params.push_level(vec![BigInt::from(0), h.clone()], next.clone());
            records.push(LevelRecord {
                level: bootstrap,
                step: 0,
                increment: increment(&h, 2, &next),
                cuts: 2,
                extras: BTreeMap::from([("kind".to_string(), "bootstrap".to_string())]),
            });
            h = next;
        }
    }

    for n in 1..=cfg.levels {
        let level = bootstrap + n;
        // Induction hypothesis at n.
        match rule.exceeds(&rec, theta, &h, n)? {
            Some((true, c)) => {
                rec.push(level, rule.name(), format!("h_{{n-1}} = {h}"), c);
                rec.tag(None, Some(n), None);
            }
            Some((false, _)) => {
                return Err(Error::CertificateFailed {
                    level,
                    name: rule.name().into(),
                    detail: "stopping hypothesis fails".into(),
                })
            }
            None => return Err(Error::Undecidable(format!("{} at level {level}", rule.name()))),
        }

        let n2 = BigInt::from(n * n);
        let net = net_params(theta, &n2, &cfg.precision)?;
        let count = net.count.clone();
        let bound = |prec: u32| two_pi(prec + 4).div_int(&n2, prec + 4);

        let mut cuts = vec![BigInt::from(0)];
        let mut ks = Vec::new();
        let mut skipped = 0usize;
        let r_n;
        loop {
            let base = cuts.last().unwrap() + &h;
            let mut chosen = None;
            let mut k = BigInt::one();
            let mut scanned = 0usize;
            while k <= count {
                scanned += 1;
                if scanned > cfg.search_cap {
                    break;
                }
                let a = &base + &k * &net.j;
                let p = rec.probe(|prec| Ok((dist_one(theta, &a, prec + scale_prec(&n2, 8))?, bound(prec))))?;
                match p {
                    Some((true, c)) => {
                        chosen = Some((k.clone(), a, c));
                        break;
                    }
                    Some((false, _)) => {}
                    None => skipped += 1,
                }
                k += 1;
            }
            let (k, a, c) = chosen.ok_or_else(|| Error::SearchCapExceeded {
                what: "k".into(),
                level,
            })?;
            let l = cuts.len();
            rec.push(level, "(4.3)", format!("l = {l}, a(l) = {a}"), c);
            rec.tag(Some(a.clone()), Some(n), None);
            rec.exact_int(level, "k_l <= net size", Relation::LessEq, &k, &count, format!("l = {l}"))?;
            ks.push(k);
            cuts.push(a);
            // Stopping test for r_n = cuts.len().
            let top = cuts.last().unwrap() + &h;
            match rule.exceeds(&rec, theta, &top, n + 1)? {
                None => return Err(Error::Undecidable(format!("stopping test at level {level}"))),
                Some((stop, c)) => {
                    let name = if stop { "r_n stop" } else { "r_n continue" };
                    let c = if stop { c } else { c.with_relation(Relation::Less) };
                    rec.push(level, name, format!("l = {}", cuts.len()), c);
                    rec.tag(None, Some(n + 1), None);
                    if stop {
                        r_n = cuts.len();
                        break;
                    }
                }
            }
            if cuts.len() > cfg.cardinality_cap {
                return Err(Error::CardinalityCapExceeded {
                    level,
                    estimate: format!(">{}", cfg.cardinality_cap),
                    cap: cfg.cardinality_cap,
                });
            }
        }

        let h_next = cuts.last().unwrap() + &h;
        cfg.check_digits(&h_next)?;
        let inc = increment(&h, r_n, &h_next);
        let inc_v = inc.clone();
        rec.require(level, "increment", Relation::Less, String::new(), |prec| {
            Ok((CertifiedAngle::from_rational(&inc_v, prec + 8), rule.increment_bound(n, prec)))
        })?;
        rec.tag(None, Some(n), None);

        let mut extras = BTreeMap::new();
        extras.insert("j".to_string(), net.j.to_string());
        extras.insert("net_size".to_string(), count.to_string());
        extras.insert(
            "k".to_string(),
            ks.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","),
        );
        extras.insert("r_n".to_string(), r_n.to_string());
        if let Rule::TwoCut(big_n) = &rule {
            extras.insert("N".to_string(), big_n.to_string());
        }
        if skipped > 0 {
            extras.insert("undecided_candidates".to_string(), skipped.to_string());
        }
        records.push(LevelRecord {
            level,
            step: n,
            increment: inc,
            cuts: r_n,
            extras,
        });
        params.push_level(cuts, h_next.clone());
        h = h_next;
    }

    let tails = (cfg.levels > 0).then(|| {
        let p = 128;
        let pi_v = pi(p);
        let pi_sq = pi_v.mul(&pi_v);
        TailBounds {
            window: params.levels(),
            max_c: Majorant::InverseSquare {
                scale: pi_v.mul_pow2(1),
                offset: bootstrap,
            },
            max_c_arg: Majorant::InverseSquare {
                scale: pi_sq.clone(),
                offset: bootstrap,
            },
            max_diff: Majorant::InverseSquare {
                scale: pi_v.mul_pow2(2),
                offset: bootstrap,
            },
            max_diff_arg: Majorant::InverseSquare {
                scale: pi_sq.mul_pow2(1),
                offset: bootstrap,
            },
        }
    });

    let params = params.with_provenance(rule.kind().name(), &hash);
    Ok(Build {
        params,
        trace: CertificateTrace {
            builder: rule.kind(),
            theta: theta.spec().clone(),
            config: cfg.clone(),
            config_hash: hash,
            bootstrap_levels: bootstrap,
            levels: records,
            certificates: rec.certs,
            tails,
        },
        two_cut: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf_params::validate;

    #[test]
    fn zero_levels_is_trivial() {
        let b = build_problem2_general(&Theta::sqrt2_minus_1(), &BuildConfig::with_levels(0)).unwrap();
        assert_eq!(b.params.levels(), 0);
        assert!(b.trace.certificates.is_empty());
    }

    #[test]
    fn small_general_build_validates() {
        let b = build_problem2_general(&Theta::golden(), &BuildConfig::with_levels(3)).unwrap();
        assert!(validate(&b.params).pass);
        assert!(b.trace.all_hold());
        assert_eq!(b.params.levels(), b.trace.bootstrap_levels + 3);
    }

    #[test]
    fn two_cut_has_two_cuts() {
        let t = Theta::sqrt2_minus_1();
        let cfg = BuildConfig::with_levels(4);
        let n = crate::torus::minimal_window_n(&t, 5, &cfg.precision).unwrap();
        let b = build_problem2_twocut(&t, &n, &cfg).unwrap();
        for l in b.trace.bootstrap_levels + 1..=b.params.levels() {
            assert_eq!(b.params.cuts(l).len(), 2);
        }
    }
}
