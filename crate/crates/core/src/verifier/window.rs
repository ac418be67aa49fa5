//! Concentration of `λ^s`, `s ∈ C_n + … + C_m`, in a short arc.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::level_fracs;
use crate::certified::{CertifiedAngle, Dyadic};
use crate::cf_params::CFParams;
use crate::serde_dec;
use crate::torus::{chord_of_norm, reduce, AngleSource};
use crate::{Error, Result};

/// Members are only listed for sumsets up to this size.
const MEMBER_LIST_CAP: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowEigenResult {
    pub pass: bool,
    pub n: usize,
    pub m: usize,
    pub size: usize,
    /// Points inside the best arc.
    pub count: usize,
    #[serde(with = "serde_dec::rat")]
    pub density: BigRational,
    /// Chord between the extreme points of the best arc.
    pub diameter: CertifiedAngle,
    #[serde(with = "serde_dec::vec")]
    pub members: Vec<BigInt>,
}

/// Bracket `[lo, hi]` around the turn length `t` with `2 sin(π t) = ε`.
fn eps_turns(eps: &BigRational, prec: u32) -> (Dyadic, Dyadic) {
    let mut lo = Dyadic::zero();
    let mut hi = Dyadic::new(BigInt::one(), -1);
    let target = CertifiedAngle::from_rational(eps, prec + 8);
    for _ in 0..prec {
        let mid = lo.add(&hi).mul_pow2(-1);
        let c = chord_of_norm(&CertifiedAngle::exact(mid.clone()), prec + 8);
        if c.hi() < target.lo() {
            lo = mid;
        } else if c.lo() > target.hi() {
            hi = mid;
        } else {
            break;
        }
    }
    (lo, hi)
}

/// Sweeps the sorted angles of the sumset for the largest subset inside an
/// arc of chord diameter `< ε`; passes when that subset has density `> 1 − ε`.
pub fn eigenvalue_window_test<S: AngleSource + ?Sized>(
    params: &CFParams,
    candidate: &S,
    eps: &BigRational,
    n: usize,
    m: usize,
    size_cap: usize,
) -> Result<WindowEigenResult> {
    let l = params.levels();
    if n == 0 || n > m || m > l {
        return Err(Error::InvalidParams(format!("need 1 <= n <= m <= {l}, got n = {n}, m = {m}")));
    }
    if !(eps > &BigRational::zero()) {
        return Err(Error::InvalidParams("ε must be positive".into()));
    }
    let mut size = BigInt::one();
    for k in n..=m {
        size *= BigInt::from(params.cuts(k).len());
    }
    let size_u = size.to_usize().filter(|&s| s <= size_cap).ok_or_else(|| Error::SumsetTooLarge {
        size: size.to_string(),
        cap: size_cap,
    })?;
    let prec = 96 + 2 * params.h(m).bits() as u32;
    let mut pts: Vec<(BigInt, CertifiedAngle)> = vec![(BigInt::zero(), CertifiedAngle::zero())];
    for k in n..=m {
        let cuts = params.cuts(k);
        let fr = level_fracs(candidate, cuts, prec)?;
        let mut next = Vec::with_capacity(pts.len() * cuts.len());
        for (s, f) in &pts {
            for (c, g) in cuts.iter().zip(&fr) {
                next.push((s + c, reduce(&f.add(g))));
            }
        }
        pts = next;
    }
    debug_assert_eq!(pts.len(), size_u);
    let two = BigRational::from_integer(BigInt::from(2));
    let one_minus = BigRational::one() - eps;
    if eps > &two {
        let density = BigRational::one();
        return Ok(WindowEigenResult {
            pass: density > one_minus,
            n,
            m,
            size: size_u,
            count: size_u,
            density,
            diameter: CertifiedAngle::from_i64(2),
            members: if size_u <= MEMBER_LIST_CAP {
                pts.into_iter().map(|p| p.0).collect()
            } else {
                Vec::new()
            },
        });
    }
    let (t_lo, t_hi) = eps_turns(eps, 120);
    pts.sort_by(|a, b| a.1.center().cmp(&b.1.center()).then_with(|| a.0.cmp(&b.0)));
    let len = pts.len();
    let one = CertifiedAngle::from_i64(1);
    // Angle of the j-th point on the doubled circle.
    let at = |j: usize| -> CertifiedAngle {
        if j < len {
            pts[j].1.clone()
        } else {
            pts[j - len].1.add(&one)
        }
    };
    let mut best = (1usize, 0usize);
    let mut j = 1usize;
    for i in 0..len {
        if j < i + 1 {
            j = i + 1;
        }
        let fi = at(i);
        while j < i + len {
            let d = at(j).sub(&fi);
            if d.hi() < &t_lo {
                j += 1;
            } else if d.lo() > &t_hi {
                break;
            } else {
                return Err(Error::Undecidable(format!(
                    "point pair at the ε boundary (positions {} and {})",
                    pts[i].0,
                    pts[j % len].0
                )));
            }
        }
        if j - i > best.0 {
            best = (j - i, i);
        }
    }
    let (count, start) = best;
    let span = if count > 1 {
        at(start + count - 1).sub(&at(start))
    } else {
        CertifiedAngle::zero()
    };
    let diameter = chord_of_norm(&span, 64);
    let density = BigRational::new(BigInt::from(count), BigInt::from(len));
    let members = if len <= MEMBER_LIST_CAP {
        let mut v: Vec<BigInt> = (start..start + count).map(|k| pts[k % len].0.clone()).collect();
        v.sort();
        v
    } else {
        Vec::new()
    };
    Ok(WindowEigenResult {
        pass: density > one_minus,
        n,
        m,
        size: len,
        count,
        density,
        diameter,
        members,
    })
}
