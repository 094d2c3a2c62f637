//! Seeded randomized checks of the power inequalities the controller design
//! rests on. Used by `consensus-sim verify-lemmas` and the acceptance tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::odd_power::{
    check_binomial_envelope, check_separation_inequality, lemma2_bounds, separation_coefficients,
    solve_l_for_d, young_holds, SeparationCoefficients,
};

const SEPARATION_POWERS: [u32; 4] = [3, 5, 7, 9];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub samples: usize,
    pub violations: usize,
    /// Inputs of the first violating sample, if any.
    pub first_violation: Option<String>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn run<F>(name: &'static str, samples: usize, seed: u64, mut check: F) -> SuiteResult
where
    F: FnMut(&mut ChaCha8Rng) -> Option<String>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut first_violation = None;
    for _ in 0..samples {
        if let Some(msg) = check(&mut rng) {
            violations += 1;
            first_violation.get_or_insert(msg);
        }
    }
    SuiteResult {
        name,
        samples,
        violations,
        first_violation,
    }
}

/// Coefficients at `d = 0.5` for each of the powers 3, 5, 7, 9.
pub fn half_separation_coefficients() -> Vec<SeparationCoefficients> {
    SEPARATION_POWERS
        .iter()
        .map(|&r| {
            let l = solve_l_for_d(r, 0.5).expect("d = 0.5 is attainable for every odd r > 1");
            separation_coefficients(r, l).expect("solved l is admissible")
        })
        .collect()
}

pub fn young_suite(samples: usize, seed: u64) -> SuiteResult {
    run("young_bound", samples, seed, |rng| {
        let x1 = rng.random_range(-10.0..=10.0);
        let x2 = rng.random_range(-10.0..=10.0);
        let b1 = rng.random_range(1..=5u32);
        let b2 = rng.random_range(1..=5u32);
        let xi = rng.random_range(0.1..=10.0);
        (!young_holds(x1, x2, b1, b2, xi)).then(|| format!("x1={x1} x2={x2} b1={b1} b2={b2} xi={xi}"))
    })
}

pub fn lemma2_suite(samples: usize, seed: u64) -> SuiteResult {
    run("lemma2_bounds", samples, seed, |rng| {
        let x1 = rng.random_range(-10.0..=10.0);
        let x2 = rng.random_range(-10.0..=10.0);
        let h = SEPARATION_POWERS[rng.random_range(0..4)];
        let lam = f64::from(rng.random_range(1..=3u32));
        let ok = lemma2_bounds(x1, x2, h, lam).is_ok_and(|s| s.holds());
        (!ok).then(|| format!("x1={x1} x2={x2} h={h} lam={lam}"))
    })
}

pub fn separation_suite(samples: usize, seed: u64) -> SuiteResult {
    let coeffs = half_separation_coefficients();
    run("check_separation_inequality", samples, seed, |rng| {
        let x1 = rng.random_range(-10.0..=10.0);
        let x2 = rng.random_range(-10.0..=10.0);
        let c = &coeffs[rng.random_range(0..coeffs.len())];
        (!check_separation_inequality(x1, x2, c)).then(|| format!("x1={x1} x2={x2} r={}", c.r()))
    })
}

pub fn envelope_suite(samples: usize, seed: u64) -> SuiteResult {
    let coeffs = half_separation_coefficients();
    run("check_binomial_envelope", samples, seed, |rng| {
        let p = rng.random_range(-50.0..=50.0);
        let c = &coeffs[rng.random_range(0..coeffs.len())];
        (!check_binomial_envelope(p, c)).then(|| format!("p={p} r={}", c.r()))
    })
}

/// All four suites, each with its own stream derived from `seed`.
pub fn run_all(samples: usize, seed: u64) -> Vec<SuiteResult> {
    vec![
        young_suite(samples, seed),
        lemma2_suite(samples, seed.wrapping_add(1)),
        separation_suite(samples, seed.wrapping_add(2)),
        envelope_suite(samples, seed.wrapping_add(3)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_batches_pass() {
        for r in run_all(2000, 11) {
            assert!(r.passed(), "{r:?}");
            assert_eq!(r.samples, 2000);
        }
    }
}
