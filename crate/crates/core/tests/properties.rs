use dirichlet_lab::arith::{euler_phi, factorize, gcd, moebius, moebius_divisors};
use dirichlet_lab::chars::build_character_table;
use dirichlet_lab::expsum::{lemma2_defect, Polynomial};
use dirichlet_lab::lfun::{self, Method};
use dirichlet_lab::meanval::{self, Target};
use dirichlet_lab::specfun::{digamma, floor_ratio, hurwitz_zeta, ShiftParam};
use num_complex::Complex64;
use proptest::prelude::*;

fn shift_strategy() -> impl Strategy<Value = ShiftParam> {
    (1u64..40, 1u64..8).prop_map(|(n, d)| ShiftParam::new(n, d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phi_and_moebius_are_multiplicative(m in 1u64..3000, n in 1u64..3000) {
        prop_assume!(gcd(m, n) == 1);
        let (fm, fn_, fmn) = (factorize(m).unwrap(), factorize(n).unwrap(), factorize(m * n).unwrap());
        prop_assert_eq!(euler_phi(&fmn), euler_phi(&fm) * euler_phi(&fn_));
        prop_assert_eq!(moebius(&fmn), moebius(&fm) * moebius(&fn_));
    }

    #[test]
    fn moebius_sum_over_divisors_vanishes(n in 2u64..100_000) {
        let s: i64 = moebius_divisors(&factorize(n).unwrap()).iter().map(|&(_, mu)| mu as i64).sum();
        prop_assert_eq!(s, 0);
    }

    #[test]
    fn digamma_recurrence(x in 0.01f64..200.0) {
        let lhs = digamma(x + 1.0).unwrap() - digamma(x).unwrap();
        prop_assert!((lhs - 1.0 / x).abs() < 1e-12 * (1.0 / x).max(1.0));
    }

    #[test]
    fn hurwitz_shift(alpha in 0.05f64..50.0) {
        let d = hurwitz_zeta(2.0, alpha).unwrap() - hurwitz_zeta(2.0, alpha + 1.0).unwrap();
        prop_assert!((d - alpha.powi(-2)).abs() < 1e-12 * alpha.powi(-2).max(1.0));
    }

    #[test]
    fn shift_parse_round_trip(a in shift_strategy()) {
        let back: ShiftParam = a.to_string().parse().unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn floor_ratio_is_exact(a in shift_strategy(), d in 1u64..50) {
        let f = floor_ratio(&a, d);
        // f <= a/d < f + 1 in exact integer arithmetic
        prop_assert!(f * d * a.denominator() <= a.numerator());
        prop_assert!(a.numerator() < (f + 1) * d * a.denominator());
    }

    #[test]
    fn characters_are_multiplicative(q in 3u64..300, m in 0i64..2000, n in 0i64..2000) {
        let t = build_character_table(q).unwrap();
        for j in [0, t.len() / 2, t.len() - 1] {
            let lhs = t.value(j, m * n);
            let rhs = t.value(j, m) * t.value(j, n);
            prop_assert!((lhs - rhs).norm() < 1e-12);
            prop_assert!((t.value(t.conjugate(j), m) - t.value(j, m).conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn conjugate_characters_give_conjugate_l_values(q in 3u64..120, a in shift_strategy()) {
        let t = build_character_table(q).unwrap();
        let v = lfun::l_vector(&t, &a, Method::ClosedDirect).unwrap();
        for j in t.nonprincipal() {
            let (x, y) = (v.get(j).unwrap(), v.get(t.conjugate(j)).unwrap());
            prop_assert!((x - y.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn squared_sum_identity_on_random_polynomials(
        p in prop::sample::select(vec![5u64, 7, 11, 13, 17, 19, 23]),
        coeffs in prop::collection::vec(-100i64..100, 2..6),
    ) {
        let f = Polynomial::new(coeffs).unwrap();
        prop_assume!(!f.vanishes_mod(p));
        let t = build_character_table(p).unwrap();
        prop_assert!(lemma2_defect(&t, &f).unwrap() < 1e-7 * p as f64);
    }

    #[test]
    fn weighted_moments_are_real(q in 3u64..150, k in 2u64..40, a in shift_strategy()) {
        prop_assume!(gcd(k, q) == 1);
        let t = build_character_table(q).unwrap();
        let l = lfun::l_vector(&t, &a, Method::ClosedDirect).unwrap();
        let v: Complex64 = meanval::thm1_lhs(&t, &l, k);
        prop_assert!(v.im.abs() < 1e-8 * t.len() as f64);
        prop_assert!(meanval::eq1_lhs(&l) >= 0.0);
    }
}

#[test]
fn target_names_round_trip() {
    for t in Target::ALL {
        assert_eq!(t.as_str().parse::<Target>().unwrap(), t);
    }
    assert!("thm3".parse::<Target>().is_err());
}
