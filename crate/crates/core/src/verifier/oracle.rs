//! Angle oracle by direct rational multiplication, independent of the
//! Ostrowski path used by `frac_mul`.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::certified::{CertifiedAngle, Dyadic};
use crate::contfrac::Theta;
use crate::torus::{chord_of_norm, norm_of, reduce};
use crate::Result;

/// `c θ mod 1` from `c · p_k/q_k` and `c · p_{k+1}/q_{k+1}` with `q_k` large
/// enough that the two products are within about `2^-prec`.
pub fn oracle_frac(theta: &Theta, c: &BigInt, prec: u32) -> Result<CertifiedAngle> {
    if c.is_zero() {
        return Ok(CertifiedAngle::zero());
    }
    let m = c.abs();
    let x = (&m << (prec as usize + 4)).sqrt() + 1;
    let k = theta.index_above(&x)?;
    let (lo, hi) = theta.rational_bracket(k)?;
    let (mut a, mut b) = (&lo * &m, &hi * &m);
    if c.is_negative() {
        let na = -b;
        b = -a;
        a = na;
    }
    let f = a.floor();
    a -= &f;
    b -= &f;
    let enc = CertifiedAngle::from_bounds(
        Dyadic::from_rational_floor(&a, prec + 4),
        Dyadic::from_rational_ceil(&b, prec + 4),
    );
    Ok(reduce(&enc))
}

/// `|1 − λ^c|` through [`oracle_frac`].
pub fn oracle_chord(theta: &Theta, c: &BigInt, prec: u32) -> Result<CertifiedAngle> {
    let f = oracle_frac(theta, c, prec + 8)?;
    Ok(chord_of_norm(&norm_of(&f), prec))
}

/// `δ_n` by scanning every `1 <= j <= n` with the oracle (small `n` only).
pub fn brute_delta(theta: &Theta, n: u64, prec: u32) -> Result<(u64, CertifiedAngle)> {
    let mut best: Option<(u64, CertifiedAngle)> = None;
    for j in 1..=n {
        let v = oracle_chord(theta, &BigInt::from(j), prec)?;
        let better = match &best {
            None => true,
            Some((_, b)) => v.hi() < b.lo() || (v.center() < b.center() && !(v.lo() > b.hi())),
        };
        if better {
            best = Some((j, v));
        }
    }
    Ok(best.expect("n >= 1"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::AngleSource;

    #[test]
    fn agrees_with_frac_mul() {
        let t = Theta::golden();
        for c in [1i64, 7, -13, 1_000_003, -987_654_321] {
            let c = BigInt::from(c);
            let a = oracle_frac(&t, &c, 100).unwrap();
            let b = t.frac_mul(&c, 100).unwrap();
            assert!((a.center().to_f64() - b.center().to_f64()).abs() < 1e-20, "{c}");
        }
    }
}
