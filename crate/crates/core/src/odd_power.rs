//! Power inequalities for odd-power chains and the constructive separation
//! coefficients `(d, ῡ(d))` for `F(z) = z^r`.
//!
//! The separation property says that for odd `r` and `d ∈ (0, 1)`,
//!
//! ```text
//! |F(x1 + x2) − F(x1)| ≤ d·|F(x1)| + ῡ(d)·|F(x2)|
//! ```
//!
//! with `ῡ(d)` independent of `x1, x2`. Both constants are finite binomial
//! sums in an auxiliary parameter `l > 0` (see [`separation_sums`]); small `l`
//! buys a small `d` at the cost of a large `ῡ`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute and relative round-off slack applied to every right-hand side.
pub const INEQUALITY_SLACK: f64 = 1e-12;

const BISECTION_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum OddPowerError {
    #[error("power {0} is not a positive odd integer")]
    NotOdd(i64),
    #[error("l must be positive and finite, got {0}")]
    BadL(f64),
    #[error("l = {l} gives d = {d}, which is not below 1")]
    DTooLarge { l: f64, d: f64 },
    #[error("l = {l} gives upsilon_bar = {upsilon_bar} < 1; the x1 = 0 case needs upsilon_bar >= 1")]
    UpsilonBelowOne { l: f64, upsilon_bar: f64 },
    #[error("target d must lie in (0, 1), got {0}")]
    BadTarget(f64),
    #[error("power 1 has d = 0 for every l; no l reaches d = {0}")]
    LinearPower(f64),
}

fn check_odd(r: u32) -> Result<(), OddPowerError> {
    if r % 2 == 1 {
        Ok(())
    } else {
        Err(OddPowerError::NotOdd(i64::from(r)))
    }
}

/// `sign(z)·|z|^r` for odd `r`.
pub fn odd_pow(z: f64, r: u32) -> Result<f64, OddPowerError> {
    check_odd(r)?;
    Ok(odd_pow_unchecked(z, r))
}

/// [`odd_pow`] without the parity check, for callers holding a validated power.
#[inline]
pub fn odd_pow_unchecked(z: f64, r: u32) -> f64 {
    z.powi(r as i32)
}

fn within(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + INEQUALITY_SLACK + INEQUALITY_SLACK * rhs.abs()
}

/// Both sides of Young's inequality
/// `|x1|^b1 |x2|^b2 ≤ (b1 ξ |x1|^(b1+b2) + b2 ξ^(−b1/b2) |x2|^(b1+b2)) / (b1+b2)`.
pub fn young_bound(x1: f64, x2: f64, b1: u32, b2: u32, xi: f64) -> (f64, f64) {
    let (a1, a2) = (x1.abs(), x2.abs());
    let (f1, f2) = (f64::from(b1), f64::from(b2));
    let total = (b1 + b2) as i32;
    let lhs = a1.powi(b1 as i32) * a2.powi(b2 as i32);
    let rhs = (f1 * xi * a1.powi(total) + f2 * xi.powf(-f1 / f2) * a2.powi(total)) / (f1 + f2);
    (lhs, rhs)
}

pub fn young_holds(x1: f64, x2: f64, b1: u32, b2: u32, xi: f64) -> bool {
    let (lhs, rhs) = young_bound(x1, x2, b1, b2, xi);
    within(lhs, rhs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma2Sides {
    pub diff_lhs: f64,
    pub diff_rhs: f64,
    pub sum_lhs: f64,
    pub sum_rhs: f64,
}

impl Lemma2Sides {
    pub fn holds(&self) -> bool {
        within(self.diff_lhs, self.diff_rhs) && within(self.sum_lhs, self.sum_rhs)
    }
}

/// Difference bound `|x1^h − x2^h| ≤ h|x1 − x2||x1^(h−1) + x2^(h−1)|` and the
/// power-mean bound `|x1 + x2|^λ ≤ 2^(λ−1)(|x1|^λ + |x2|^λ)`.
pub fn lemma2_bounds(x1: f64, x2: f64, h: u32, lam: f64) -> Result<Lemma2Sides, OddPowerError> {
    check_odd(h)?;
    let hi = h as i32;
    Ok(Lemma2Sides {
        diff_lhs: (x1.powi(hi) - x2.powi(hi)).abs(),
        diff_rhs: f64::from(h) * (x1 - x2).abs() * (x1.powi(hi - 1) + x2.powi(hi - 1)).abs(),
        sum_lhs: (x1 + x2).abs().powf(lam),
        sum_rhs: 2f64.powf(lam - 1.0) * (x1.abs().powf(lam) + x2.abs().powf(lam)),
    })
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Raw `(d, ῡ)` sums for power `r` at tuning constant `l`, with no admissibility
/// checks:
///
/// ```text
/// d = Σ_{k=1}^{r} C(r,k)·((r−k)/r)·l^(r/(r−k))     (k = r term is 0)
/// ῡ = Σ_{k=1}^{r} C(r,k)·(k/r)·l^(−r/k)
/// ```
pub fn separation_sums(r: u32, l: f64) -> (f64, f64) {
    let rf = f64::from(r);
    let mut d = 0.0;
    let mut upsilon = 0.0;
    for k in 1..=r {
        let c = binomial(r, k);
        let kf = f64::from(k);
        if k < r {
            d += c * ((rf - kf) / rf) * l.powf(rf / (rf - kf));
        }
        upsilon += c * (kf / rf) * l.powf(-rf / kf);
    }
    (d, upsilon)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationCoefficients {
    r: u32,
    l: f64,
    d: f64,
    upsilon_bar: f64,
}

impl SeparationCoefficients {
    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn upsilon_bar(&self) -> f64 {
        self.upsilon_bar
    }

    /// `(1 − d, 1 + d)`, the admissible range of the separation factor `ℓ`.
    pub fn ell_range(&self) -> (f64, f64) {
        (1.0 - self.d, 1.0 + self.d)
    }
}

pub fn separation_coefficients(r: u32, l: f64) -> Result<SeparationCoefficients, OddPowerError> {
    check_odd(r)?;
    if !(l > 0.0 && l.is_finite()) {
        return Err(OddPowerError::BadL(l));
    }
    let (d, upsilon_bar) = separation_sums(r, l);
    if !(d < 1.0) {
        return Err(OddPowerError::DTooLarge { l, d });
    }
    if upsilon_bar < 1.0 {
        return Err(OddPowerError::UpsilonBelowOne { l, upsilon_bar });
    }
    Ok(SeparationCoefficients {
        r,
        l,
        d,
        upsilon_bar,
    })
}

/// Finds `l` with `d(l)` within `1e-9` of `d_target` by bisection on the
/// strictly increasing map `l ↦ d(l)`.
pub fn solve_l_for_d(r: u32, d_target: f64) -> Result<f64, OddPowerError> {
    check_odd(r)?;
    if !(d_target > 0.0 && d_target < 1.0) {
        return Err(OddPowerError::BadTarget(d_target));
    }
    if r == 1 {
        return Err(OddPowerError::LinearPower(d_target));
    }
    let d_of = |l: f64| separation_sums(r, l).0;
    let mut hi = 1.0;
    while d_of(hi) < d_target {
        hi *= 2.0;
    }
    // d(0) = 0 < d_target
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let d = d_of(mid);
        if (d - d_target).abs() <= BISECTION_TOL * 1e-3 {
            return Ok(mid);
        }
        if d < d_target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Coefficients for power `r` at separation level `d`. Power 1 is exactly
/// additive, so it gets `d = 0`, `ῡ = 1` (`l = 1`) whatever `d` is requested.
pub fn coefficients_for_d(r: u32, d: f64) -> Result<SeparationCoefficients, OddPowerError> {
    if r == 1 {
        return separation_coefficients(1, 1.0);
    }
    separation_coefficients(r, solve_l_for_d(r, d)?)
}

/// `|F(x1 + x2) − F(x1)| ≤ d|F(x1)| + ῡ|F(x2)|` with `F(z) = z^r`.
///
/// At `x1 = 0` this reads `|F(x2)| ≤ ῡ|F(x2)|`, which holds because admissible
/// coefficients carry `ῡ ≥ 1`.
pub fn check_separation_inequality(x1: f64, x2: f64, coeffs: &SeparationCoefficients) -> bool {
    let r = coeffs.r;
    let f1 = odd_pow_unchecked(x1, r);
    let lhs = (odd_pow_unchecked(x1 + x2, r) - f1).abs();
    let rhs = coeffs.d * f1.abs() + coeffs.upsilon_bar * odd_pow_unchecked(x2, r).abs();
    within(lhs, rhs)
}

/// `|(1 + p)^r − 1| ≤ d + ῡ|p|^r`.
pub fn check_binomial_envelope(p: f64, coeffs: &SeparationCoefficients) -> bool {
    let r = coeffs.r;
    let lhs = (odd_pow_unchecked(1.0 + p, r) - 1.0).abs();
    let rhs = coeffs.d + coeffs.upsilon_bar * odd_pow_unchecked(p, r).abs();
    within(lhs, rhs)
}
