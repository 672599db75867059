use dashu_int::IBig;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wpa_core::polycore::{remainder_integral, roots, taylor_section, ComplexPolynomial, PrecisionContext};

fn factorial(n: usize) -> IBig {
    (1..=n).fold(IBig::ONE, |acc, k| acc * IBig::from(k))
}

#[test]
fn leading_coefficient_is_half_central_binomial() {
    for n in 1..=30 {
        let s = taylor_section(n);
        let lead = s.exact().unwrap().numerators.last().unwrap().clone();
        let expected = factorial(2 * n) / (factorial(n) * factorial(n)) / IBig::from(2u8);
        let abs = if lead < IBig::ZERO { -lead } else { lead };
        assert_eq!(abs, expected, "n = {n}");
    }
}

#[test]
fn remainder_integral_matches_direct_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let zs: Vec<Complex64> = (0..20)
        .map(|_| Complex64::new(-0.25, 0.0) + Complex64::from_polar(0.2 * rng.gen::<f64>().sqrt(), std::f64::consts::TAU * rng.gen::<f64>()))
        .collect();
    for n in 1..=40 {
        let ctx = PrecisionContext::for_section_order(n);
        let s = taylor_section(n);
        for &z in &zs {
            let zm = ctx.complex(z);
            let inv = ctx.one().div(&ctx.one().add(&zm).powu(n, &ctx)).unwrap();
            let direct = inv.sub(&s.eval_mp(&zm, &ctx)).to_c64();
            let quad = remainder_integral(n, z, (4 * n).max(16)).unwrap();
            let rel = (quad - direct).norm() / direct.norm();
            assert!(rel <= 1e-8, "n = {n}, z = {z}: rel {rel:e}");
        }
    }
}

/// Up to `deg` points in the unit disk, pairwise at least 0.25 apart.
fn separated_roots(deg: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Complex64> = Vec::new();
    while out.len() < deg {
        let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if z.norm() <= 1.0 && out.iter().all(|r| (r - z).norm() >= 0.25) {
            out.push(z);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn roots_recover_their_polynomial(deg in 1usize..=15, seed in any::<u64>()) {
        let truth = separated_roots(deg, seed);
        let found = roots(&ComplexPolynomial::from_roots(&truth), 1e-12).unwrap();
        prop_assert_eq!(found.len(), deg);
        let mut unused = found.clone();
        for r in &truth {
            let (i, d) = unused
                .iter()
                .enumerate()
                .map(|(i, f)| (i, (f - r).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            prop_assert!(d <= 1e-8, "root {} recovered only to {:e}", r, d);
            unused.swap_remove(i);
        }
    }

    #[test]
    fn doubling_precision_moves_eval_within_bound(
        coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..=21),
        zr in -1.5f64..1.5,
        zi in -1.5f64..1.5,
    ) {
        let p = ComplexPolynomial::new(coeffs.iter().map(|&(a, b)| Complex64::new(a, b)).collect());
        let deg = p.degree();
        let z = Complex64::new(zr, zi);
        let bits = 64;
        let (lo, hi) = (PrecisionContext::new(bits).unwrap(), PrecisionContext::new(2 * bits).unwrap());
        let a = p.eval_mp(&lo.complex(z), &lo);
        let b = p.eval_mp(&hi.complex(z), &hi);
        let diff = a.sub(&b).to_c64().norm();
        // scale of the Horner sum; |p(z)| itself may cancel to nothing
        let scale: f64 = p.coeffs().iter().enumerate().map(|(k, c)| c.norm() * z.norm().powi(k as i32)).sum();
        let bound = 2f64.powi(-(bits as i32) + deg as i32 + 4);
        prop_assert!(diff <= bound * scale, "diff {:e} > {:e}", diff, bound * scale);
    }
}
