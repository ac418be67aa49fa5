use cfrank::certified::CertifiedAngle;
use cfrank::cf_params::{blocks_of_sizes, level_sumset, telescope, validate, CFParams};
use cfrank::contfrac::{Theta, ThetaSpec};
use cfrank::simulator::{correlation, cylinder_positions, Cylinder, Tower};
use cfrank::torus::{ostrowski, signed_rep, AngleSource, RationalAngle};
use cfrank::verifier::eigenvalue_window_test;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

/// Random valid parameters: cut gaps at least `h_{n−1}`, a few spacers on top.
fn params_strategy() -> impl Strategy<Value = CFParams> {
    prop::collection::vec((prop::collection::vec(0u64..4, 1..4), 0u64..4), 1..4).prop_map(|levels| {
        let mut h = vec![BigInt::one()];
        let mut c = Vec::new();
        for (gaps, spacer) in levels {
            let prev = h.last().unwrap().clone();
            let mut cuts = vec![BigInt::zero()];
            for g in gaps {
                let next = cuts.last().unwrap() + &prev + BigInt::from(g);
                cuts.push(next);
            }
            h.push(cuts.last().unwrap() + &prev + BigInt::from(spacer));
            c.push(cuts);
        }
        CFParams::from_parts(h, c)
    })
}

fn periodic_theta() -> impl Strategy<Value = Theta> {
    prop::collection::vec(1i64..6, 1..4).prop_map(|period| Theta::new(ThetaSpec::periodic(&[0], &period)).unwrap())
}

fn circ_agree(a: &CertifiedAngle, b: &CertifiedAngle) -> bool {
    let d = signed_rep(&a.sub(b));
    d.lo() <= &cfrank::certified::Dyadic::zero() && d.hi() >= &cfrank::certified::Dyadic::zero()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn convergent_determinant_is_unit(t in periodic_theta(), k in 1usize..25) {
        let a = t.convergent(k).unwrap();
        let b = t.convergent(k + 1).unwrap();
        let det = &b.p * &a.q - &a.p * &b.q;
        prop_assert_eq!(det.abs(), BigInt::one());
    }

    #[test]
    fn ostrowski_digits_sum_back(t in periodic_theta(), c in 0u64..1_000_000_000) {
        let c = BigInt::from(c);
        let digits = ostrowski(&t, &c).unwrap();
        let mut sum = BigInt::zero();
        for (k, b) in &digits {
            sum += b * t.q(*k).unwrap();
        }
        prop_assert_eq!(sum, c);
    }

    #[test]
    fn frac_mul_is_additive(t in periodic_theta(), a in -10i64.pow(15)..10i64.pow(15), b in -10i64.pow(15)..10i64.pow(15)) {
        let fa = t.frac_mul(&BigInt::from(a), 80).unwrap();
        let fb = t.frac_mul(&BigInt::from(b), 80).unwrap();
        let fab = t.frac_mul(&BigInt::from(a + b), 80).unwrap();
        prop_assert!(circ_agree(&fa.add(&fb), &fab));
    }

    #[test]
    fn rational_enclosures_contain_the_value(n in -10_000i64..10_000, d in 1i64..10_000, prec in 8u32..200) {
        let r = BigRational::new(n.into(), d.into());
        let x = CertifiedAngle::from_rational(&r, prec);
        prop_assert!(x.contains_rational(&r));
        let y = x.mul(&x);
        prop_assert!(y.contains_rational(&(&r * &r)));
    }

    #[test]
    fn generated_params_validate_and_round_trip(p in params_strategy()) {
        prop_assert!(validate(&p).pass);
        let back = CFParams::from_json(&p.to_json()).unwrap();
        prop_assert_eq!(&back, &p);
    }

    #[test]
    fn telescoping_preserves_the_sumset(p in params_strategy()) {
        let l = p.levels();
        let t = telescope(&p, &blocks_of_sizes(&[l])).unwrap();
        prop_assert_eq!(t.levels(), 1);
        prop_assert_eq!(t.cuts(1).to_vec(), level_sumset(&p, 1..=l, 1 << 16).unwrap());
        prop_assert_eq!(t.h(1), p.h(l));
    }

    #[test]
    fn rungs_partition_the_cylinder(p in params_strategy(), m in 0u64..8) {
        let l = p.levels();
        let a = Cylinder::new(0, 0);
        let tower = Tower::new(&p, l).unwrap();
        prop_assume!(BigInt::from(m) < tower.height);
        let m = BigInt::from(m);
        let mut total = BigRational::zero();
        let mut spill = BigRational::zero();
        let mut b = BigInt::zero();
        while &b < p.h(l) {
            let c = correlation(&p, &a, &Cylinder::new(l, b.clone()), &m, l, 1 << 16).unwrap();
            total += c.value;
            spill = c.error_bound;
            b += 1;
        }
        // Every rung of [0]_0 lands in exactly one level-L rung unless it spills.
        prop_assert_eq!(total + spill, a.measure(&p));
    }

    #[test]
    fn shift_invariance_inside_the_tower(p in params_strategy(), m in 1u64..6) {
        let l = p.levels();
        let m = BigInt::from(m);
        let a = Cylinder::new(l, 0);
        let b = Cylinder::new(0, 0);
        let a1 = Cylinder::new(l, 1);
        prop_assume!(p.h(l) > &(&m + 1));
        let c0 = correlation(&p, &a, &b, &m, l, 1 << 16).unwrap();
        let c1 = correlation(&p, &a1, &b, &(&m - 1), l, 1 << 16).unwrap();
        prop_assume!(c0.error_bound.is_zero() && c1.error_bound.is_zero());
        prop_assert_eq!(c0.value, c1.value);
    }

    #[test]
    fn cylinder_positions_count(p in params_strategy(), n in 0usize..3) {
        let l = p.levels();
        let n = n.min(l);
        let pos = cylinder_positions(&p, &Cylinder::new(n, 0), l, 1 << 16).unwrap();
        let want: usize = (n + 1..=l).map(|k| p.cuts(k).len()).product();
        prop_assert_eq!(pos.len(), want);
        prop_assert!(pos.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn window_sweep_matches_pair_count(p in params_strategy(), num in 1i64..12, den in 2i64..13, e in 1i64..20) {
        let cand = RationalAngle::new(num, den);
        let eps = BigRational::new(e.into(), 10.into());
        let l = p.levels();
        let res = eigenvalue_window_test(&p, &cand, &eps, 1, l, 1 << 12);
        prop_assume!(res.is_ok());
        let res = res.unwrap();
        // Exact rational brute force over left endpoints.
        let pts = level_sumset(&p, 1..=l, 1 << 12).unwrap();
        let fr: Vec<BigRational> = pts
            .iter()
            .map(|s| {
                let x = BigRational::new(num.into(), den.into()) * BigRational::from_integer(s.clone());
                &x - x.floor()
            })
            .collect();
        let t = (e as f64 / 20.0).asin() / std::f64::consts::PI;
        let mut best = 0;
        for a in &fr {
            let c = fr
                .iter()
                .filter(|b| {
                    let mut d = *b - a;
                    if d < BigRational::zero() {
                        d += BigRational::one();
                    }
                    use num_traits::ToPrimitive;
                    d.to_f64().unwrap() < t
                })
                .count();
            best = best.max(c);
        }
        prop_assert_eq!(res.count, best);
    }
}
