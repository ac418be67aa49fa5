//! Diophantine searches: multipliers `Q` making `‖(xQ + r)θ‖` small.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::certified::Dyadic;
use crate::contfrac::{certified_prefix, Theta};
use crate::torus::{signed_rep, AngleSource};
use crate::Result;

/// Increasing convergent denominators of `frac(xθ)`, certified from an
/// enclosure of radius `2^-prec`. Empty when the enclosure is too wide.
pub(crate) fn beta_denominators(theta: &Theta, x: &BigInt, prec: u32) -> Result<Vec<BigInt>> {
    let f = theta.frac_mul(x, prec)?;
    let lo = f.lo().to_rational();
    let hi = f.hi().to_rational();
    if !lo.is_positive() || hi >= BigRational::one() {
        return Ok(Vec::new());
    }
    let a = certified_prefix(&lo, &hi, prec as usize);
    let mut out: Vec<BigInt> = Vec::new();
    let (mut q0, mut q1) = (BigInt::zero(), BigInt::one());
    out.push(q1.clone());
    for ak in a.iter().skip(1) {
        let q2 = ak * &q1 + &q0;
        q0 = std::mem::replace(&mut q1, q2);
        if out.last() != Some(&q1) {
            out.push(q1.clone());
        }
    }
    Ok(out)
}

fn signed_center(theta: &Theta, c: &BigInt, prec: u32) -> Result<Dyadic> {
    Ok(signed_rep(&theta.frac_mul(c, prec)?).center())
}

/// Greedy Ostrowski-style walk: starting from `Q = q0`, adds multiples of the
/// denominators `d` of `frac(xθ)` whenever that moves `(xQ + r)θ` closer to an
/// integer. `accept` is consulted after every stage and decides (certified)
/// whether the current exponent is good enough. Steering uses centers only.
pub(crate) fn walk(
    theta: &Theta,
    x: &BigInt,
    r: &BigInt,
    q0: &BigInt,
    denoms: &[BigInt],
    prec: u32,
    cap: usize,
    accept: &mut dyn FnMut(&BigInt) -> Result<bool>,
) -> Result<Option<BigInt>> {
    let exponent = |q: &BigInt| x * q + r;
    let mut q = q0.clone();
    if accept(&exponent(&q))? {
        return Ok(Some(q));
    }
    let mut cur = signed_center(theta, &exponent(&q), prec)?;
    let mut budget = BigInt::from(cap);
    for d in denoms {
        let e = signed_center(theta, &(x * d), prec)?;
        if e.is_zero() || cur.is_zero() || e.is_negative() == cur.is_negative() {
            continue;
        }
        // t = round(|cur| / |e|)
        let ratio = cur.abs().to_rational() / e.abs().to_rational();
        let t = (ratio + BigRational::new(BigInt::one(), BigInt::from(2))).floor().to_integer();
        if t.is_zero() {
            continue;
        }
        budget -= &t;
        if budget.is_negative() {
            return Ok(None);
        }
        q += &t * d;
        if accept(&exponent(&q))? {
            return Ok(Some(q));
        }
        cur = signed_center(theta, &exponent(&q), prec)?;
    }
    Ok(None)
}

/// Smallest `Q >= q0` in a plain scan of `count` candidates.
pub(crate) fn linear_scan(
    x: &BigInt,
    r: &BigInt,
    q0: &BigInt,
    count: usize,
    accept: &mut dyn FnMut(&BigInt) -> Result<bool>,
) -> Result<Option<BigInt>> {
    let mut q = q0.clone();
    for _ in 0..count {
        if accept(&(x * &q + r))? {
            return Ok(Some(q));
        }
        q += 1;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::norm_of;

    #[test]
    fn denominators_of_theta_itself() {
        let t = Theta::golden();
        let d = beta_denominators(&t, &BigInt::one(), 80).unwrap();
        let fib: Vec<BigInt> = [1, 2, 3, 5, 8, 13].iter().map(|&v| BigInt::from(v)).collect();
        assert_eq!(&d[..6], &fib[..]);
    }

    #[test]
    fn walk_reaches_small_inhomogeneous_target() {
        let t = Theta::golden();
        let x = BigInt::from(3);
        let r = BigInt::one();
        let denoms = beta_denominators(&t, &x, 200).unwrap();
        let target = 1e-9;
        let mut accept = |e: &BigInt| -> Result<bool> {
            Ok(norm_of(&t.frac_mul(e, 96)?).hi().to_f64() < target)
        };
        let q = walk(&t, &x, &r, &BigInt::from(100), &denoms, 128, 1 << 20, &mut accept)
            .unwrap()
            .expect("walk converges");
        assert!(q >= BigInt::from(100));
        let e = &x * &q + &r;
        assert!(norm_of(&t.frac_mul(&e, 96).unwrap()).hi().to_f64() < target);
    }
}
