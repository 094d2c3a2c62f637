use consensus_core::odd_power::{
    check_binomial_envelope, check_separation_inequality, coefficients_for_d, odd_pow, separation_sums,
    SeparationCoefficients,
};
use proptest::prelude::*;

fn coeffs(r: u32) -> SeparationCoefficients {
    coefficients_for_d(r, 0.5).unwrap()
}

fn odd_power() -> impl Strategy<Value = u32> {
    prop::sample::select(vec![3u32, 5, 7, 9])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn envelope_implies_separation(x1 in -10.0f64..10.0, x2 in -10.0f64..10.0, r in odd_power()) {
        prop_assume!(x1.abs() > 1e-3);
        let c = coeffs(r);
        if check_binomial_envelope(x2 / x1, &c) {
            prop_assert!(check_separation_inequality(x1, x2, &c));
        }
    }

    #[test]
    fn odd_power_is_multiplicative(x1 in -5.0f64..5.0, x2 in -5.0f64..5.0, r in prop::sample::select(vec![1u32, 3, 5, 7, 9])) {
        let lhs = odd_pow(x1 * x2, r).unwrap();
        let rhs = odd_pow(x1, r).unwrap() * odd_pow(x2, r).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(f64::MIN_POSITIVE), "{lhs} vs {rhs}");
    }
}

#[test]
fn d_increases_and_upsilon_decreases_in_l() {
    for r in [3, 5, 7, 9] {
        let grid: Vec<f64> = (1..=400).map(|i| f64::from(i) * 0.0025).collect();
        let sums: Vec<(f64, f64)> = grid.iter().map(|&l| separation_sums(r, l)).collect();
        for w in sums.windows(2) {
            assert!(w[1].0 > w[0].0, "r={r}: d not increasing");
            assert!(w[1].1 < w[0].1, "r={r}: upsilon not decreasing");
        }
    }
}

#[test]
fn log_upsilon_grows_at_most_linearly_in_r() {
    // upsilon <= sum_k C(r,k) l^{-r} <= (2/l)^r for l < 1
    for l in [0.05, 0.1, 0.3, 0.7] {
        let cap = (2.0f64 / l).ln();
        for r in (1..=15).step_by(2) {
            let (_, upsilon) = separation_sums(r, l);
            let ratio = upsilon.ln() / f64::from(r);
            assert!(ratio <= cap, "l={l} r={r}: {ratio} > {cap}");
        }
    }
}
