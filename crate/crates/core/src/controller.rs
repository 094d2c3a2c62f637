//! Distributed adaptive controller for one follower.
//!
//! For step `k = 1..n` the controller forms the surface error `s_k`, the
//! virtual control `v_k = −s_k·ς_k`, and hands `v_n` to the plant as `u`.
//! The gain
//!
//! ```text
//! ς_k = Im_k^{1/r_k} · (c_k + ζ_k^{r̄_k} Ξ̂_k Θ_k^{r̄_k} + b_k^{r̄_k})^{1/r_k}
//! ```
//!
//! grows with the adaptive estimate `Ξ̂_k`, which follows
//! `dΞ̂_k/dt = β_k ζ_k^{r̄_k} s_k^{r_f+1} Θ_k^{r̄_k} − β_k σ_k Ξ̂_k`.
//!
//! Nothing here reads the plant's active mode.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::approximators::{ApproxError, RbfNetwork};
use crate::graph::GraphTopology;

#[derive(Debug, Error, PartialEq)]
pub enum ControllerError {
    #[error("power r_{k} = {r} is not a positive odd integer")]
    EvenPower { k: usize, r: u32 },
    #[error("power profile is empty")]
    NoSteps,
    #[error("gain `{name}` at step {k} must be positive, got {value}")]
    NonPositiveGain {
        name: &'static str,
        k: usize,
        value: f64,
    },
    #[error("gain vector `{name}` has {found} entries, expected {expected}")]
    GainLength {
        name: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("d must lie in (0, 1), got {0}")]
    BadD(f64),
    #[error("follower has no information source (d_f + mu_f = 0)")]
    Disconnected,
    #[error("no output supplied for neighbor {0}")]
    MissingNeighbor(usize),
    #[error("expected {expected} {what}, got {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("approximator for step {k}: {source}")]
    Approximator { k: usize, source: ApproxError },
    #[error("initial estimate xi_hat_{k} = {value} is negative")]
    NegativeEstimate { k: usize, value: f64 },
}

/// `r_{f,k}` and the derived exponents `r_f`, `r̄_k`, `r̲_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerProfile {
    powers: Vec<u32>,
    r_max: u32,
    rbar: Vec<f64>,
    runder: Vec<f64>,
}

impl PowerProfile {
    pub fn new(powers: Vec<u32>) -> Result<Self, ControllerError> {
        if powers.is_empty() {
            return Err(ControllerError::NoSteps);
        }
        for (k, &r) in powers.iter().enumerate() {
            if r % 2 == 0 {
                return Err(ControllerError::EvenPower { k: k + 1, r });
            }
        }
        let r_max = *powers.iter().max().expect("nonempty");
        let rf = f64::from(r_max);
        let rbar = powers
            .iter()
            .map(|&r| (rf + 1.0) / (rf - f64::from(r) + 1.0))
            .collect();
        let runder = powers.iter().map(|&r| (rf + 1.0) / f64::from(r)).collect();
        Ok(Self {
            powers,
            r_max,
            rbar,
            runder,
        })
    }

    pub fn powers(&self) -> &[u32] {
        &self.powers
    }

    pub fn order(&self) -> usize {
        self.powers.len()
    }

    /// `r_f = max_k r_{f,k}`.
    pub fn r_max(&self) -> u32 {
        self.r_max
    }

    /// `r̄_k = (r_f + 1)/(r_f − r_k + 1)` (0-based `k`).
    pub fn rbar(&self, k: usize) -> f64 {
        self.rbar[k]
    }

    /// `r̲_k = (r_f + 1)/r_k` (0-based `k`).
    pub fn runder(&self, k: usize) -> f64 {
        self.runder[k]
    }

    /// Exponent `r_f − r_k + 1` on `s_k` in the step-`k` Lyapunov derivative.
    pub fn surface_exponent(&self, k: usize) -> u32 {
        self.r_max - self.powers[k] + 1
    }
}

/// Per-step design constants of one follower plus the shared separation level `d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FollowerGainSet {
    pub c: Vec<f64>,
    pub zeta: Vec<f64>,
    pub b: Vec<f64>,
    pub beta: Vec<f64>,
    pub sigma: Vec<f64>,
    /// `h̲_k`, the smallest input-gain lower bound over all modes.
    pub h_lower: Vec<f64>,
    pub d: f64,
}

impl FollowerGainSet {
    pub fn validate(&self, steps: usize) -> Result<(), ControllerError> {
        for (name, v) in [
            ("c", &self.c),
            ("zeta", &self.zeta),
            ("b", &self.b),
            ("beta", &self.beta),
            ("sigma", &self.sigma),
            ("h_lower", &self.h_lower),
        ] {
            if v.len() != steps {
                return Err(ControllerError::GainLength {
                    name,
                    expected: steps,
                    found: v.len(),
                });
            }
            if let Some((k, &value)) = v.iter().enumerate().find(|(_, &x)| !(x > 0.0 && x.is_finite())) {
                return Err(ControllerError::NonPositiveGain {
                    name,
                    k: k + 1,
                    value,
                });
            }
        }
        if !(self.d > 0.0 && self.d < 1.0) {
            return Err(ControllerError::BadD(self.d));
        }
        Ok(())
    }
}

/// Adaptive estimates `Ξ̂_{f,1..n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerState {
    xi_hat: Vec<f64>,
}

impl ControllerState {
    pub fn new(xi_hat: Vec<f64>) -> Result<Self, ControllerError> {
        if let Some((k, &value)) = xi_hat.iter().enumerate().find(|(_, &v)| !(v >= 0.0)) {
            return Err(ControllerError::NegativeEstimate { k: k + 1, value });
        }
        Ok(Self { xi_hat })
    }

    pub fn xi_hat(&self) -> &[f64] {
        &self.xi_hat
    }
}

/// `base^e` for `base ≥ 0`, with `0^e = 0`.
#[inline]
fn nonneg_pow(base: f64, e: f64) -> f64 {
    if base == 0.0 {
        0.0
    } else {
        base.powf(e)
    }
}

/// `s_{f,1} = Σ_l a_{fl}(y_f − y_l) + μ_f(y_f − y_r)`.
///
/// `neighbor_ys` pairs 0-based follower indices with their outputs and must
/// cover every `l` with `a_{fl} = 1`.
pub fn tracking_error_s1(
    y_f: f64,
    neighbor_ys: &[(usize, f64)],
    adjacency_row: &[u8],
    mu_f: u8,
    y_r: f64,
) -> Result<f64, ControllerError> {
    let mut s = 0.0;
    for (l, &a) in adjacency_row.iter().enumerate() {
        if a == 0 {
            continue;
        }
        let y_l = neighbor_ys
            .iter()
            .find(|(idx, _)| *idx == l)
            .map(|&(_, y)| y)
            .ok_or(ControllerError::MissingNeighbor(l))?;
        s += f64::from(a) * (y_f - y_l);
    }
    Ok(s + f64::from(mu_f) * (y_f - y_r))
}

/// `s_{f,k} = x_{f,k} − v_{f,k−1}`.
#[inline]
pub fn surface_error(x_k: f64, v_prev: f64) -> f64 {
    x_k - v_prev
}

/// `Im_1 = [h̲_1 (d_f + μ_f)(1 − d)]⁻¹`, `Im_k = [h̲_k (1 − d)]⁻¹` for `k ≥ 2`.
/// `k` is 1-based.
pub fn gain_im(
    k: usize,
    d_f: usize,
    mu_f: u8,
    gains: &FollowerGainSet,
) -> Result<f64, ControllerError> {
    let h = gains.h_lower[k - 1];
    if k == 1 {
        let sources = d_f + usize::from(mu_f);
        if sources == 0 {
            return Err(ControllerError::Disconnected);
        }
        Ok(1.0 / (h * sources as f64 * (1.0 - gains.d)))
    } else {
        Ok(1.0 / (h * (1.0 - gains.d)))
    }
}

/// `ς_k`; `k` is 1-based.
pub fn virtual_gain(
    k: usize,
    xi_hat: f64,
    theta: f64,
    im: f64,
    gains: &FollowerGainSet,
    powers: &PowerProfile,
) -> f64 {
    let i = k - 1;
    let rbar = powers.rbar(i);
    let inv_r = 1.0 / f64::from(powers.powers()[i]);
    let inner = gains.c[i]
        + gains.zeta[i].powf(rbar) * xi_hat * nonneg_pow(theta, rbar)
        + gains.b[i].powf(rbar);
    im.powf(inv_r) * inner.powf(inv_r)
}

/// `v = −s·ς`.
#[inline]
pub fn virtual_control(s: f64, varsigma: f64) -> f64 {
    -s * varsigma
}

/// `dΞ̂_k/dt`; `k` is 1-based.
pub fn adaptation_rate(
    k: usize,
    s: f64,
    theta: f64,
    xi_hat: f64,
    gains: &FollowerGainSet,
    powers: &PowerProfile,
) -> f64 {
    let i = k - 1;
    let rbar = powers.rbar(i);
    let even = (powers.r_max() + 1) as i32;
    gains.beta[i] * gains.zeta[i].powf(rbar) * s.powi(even) * nonneg_pow(theta, rbar)
        - gains.beta[i] * gains.sigma[i] * xi_hat
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlOutput {
    pub u: f64,
    pub s: Vec<f64>,
    pub v: Vec<f64>,
    pub theta: Vec<f64>,
    pub varsigma: Vec<f64>,
}

/// Everything one follower needs to compute its input from local information.
#[derive(Debug, Clone, PartialEq)]
pub struct FollowerController {
    neighbors: Vec<usize>,
    adjacency_row: Vec<u8>,
    mu: u8,
    im: Vec<f64>,
    gains: FollowerGainSet,
    powers: PowerProfile,
    nets: Vec<RbfNetwork>,
}

/// Length of the regressor `Z_k` (1-based `k`) fed to step `k`'s basis:
/// own `x_1..x_k`, the first two states of each neighbor, `Ξ̂_1..Ξ̂_{k−1}`,
/// and `μ_f·y_r`.
pub fn regressor_dim(k: usize, neighbor_orders: &[usize]) -> usize {
    let from_neighbors: usize = neighbor_orders.iter().map(|&n| n.min(2)).sum();
    k + from_neighbors + (k - 1) + 1
}

impl FollowerController {
    pub fn new(
        f: usize,
        topology: &GraphTopology,
        gains: FollowerGainSet,
        powers: PowerProfile,
        nets: Vec<RbfNetwork>,
    ) -> Result<Self, ControllerError> {
        let n = powers.order();
        gains.validate(n)?;
        if nets.len() != n {
            return Err(ControllerError::Dimension {
                what: "approximators",
                expected: n,
                found: nets.len(),
            });
        }
        let d_f = topology.in_degree(f);
        let mu = topology.mu(f);
        let im = (1..=n)
            .map(|k| gain_im(k, d_f, mu, &gains))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            neighbors: topology.neighbors(f),
            adjacency_row: topology.adjacency()[f].clone(),
            mu,
            im,
            gains,
            powers,
            nets,
        })
    }

    pub fn neighbors(&self) -> &[usize] {
        &self.neighbors
    }

    pub fn gains(&self) -> &FollowerGainSet {
        &self.gains
    }

    pub fn powers(&self) -> &PowerProfile {
        &self.powers
    }

    pub fn nets(&self) -> &[RbfNetwork] {
        &self.nets
    }

    pub fn im(&self) -> &[f64] {
        &self.im
    }

    fn regressor(
        &self,
        k: usize,
        own: &[f64],
        neighbor_states: &[&[f64]],
        xi_hat: &[f64],
        y_r: f64,
    ) -> Vec<f64> {
        let mut z = Vec::with_capacity(self.nets[k - 1].input_dim());
        z.extend_from_slice(&own[..k]);
        for st in neighbor_states {
            z.extend_from_slice(&st[..st.len().min(2)]);
        }
        z.extend_from_slice(&xi_hat[..k - 1]);
        z.push(f64::from(self.mu) * y_r);
        z
    }

    /// Runs the full design chain. `neighbor_states[i]` is the state of
    /// follower `self.neighbors()[i]`.
    pub fn control(
        &self,
        own: &[f64],
        neighbor_states: &[&[f64]],
        y_r: f64,
        xi_hat: &[f64],
    ) -> Result<ControlOutput, ControllerError> {
        let n = self.powers.order();
        for (what, found) in [("states", own.len()), ("estimates", xi_hat.len())] {
            if found != n {
                return Err(ControllerError::Dimension {
                    what,
                    expected: n,
                    found,
                });
            }
        }
        if neighbor_states.len() != self.neighbors.len() {
            return Err(ControllerError::Dimension {
                what: "neighbor states",
                expected: self.neighbors.len(),
                found: neighbor_states.len(),
            });
        }
        let neighbor_ys: Vec<(usize, f64)> = self
            .neighbors
            .iter()
            .zip(neighbor_states)
            .map(|(&l, st)| (l, st[0]))
            .collect();

        let mut out = ControlOutput {
            u: 0.0,
            s: Vec::with_capacity(n),
            v: Vec::with_capacity(n),
            theta: Vec::with_capacity(n),
            varsigma: Vec::with_capacity(n),
        };
        let mut v_prev = 0.0;
        for k in 1..=n {
            let s = if k == 1 {
                tracking_error_s1(own[0], &neighbor_ys, &self.adjacency_row, self.mu, y_r)?
            } else {
                surface_error(own[k - 1], v_prev)
            };
            let z = self.regressor(k, own, neighbor_states, xi_hat, y_r);
            let theta = self.nets[k - 1]
                .theta(&z)
                .map_err(|source| ControllerError::Approximator { k, source })?;
            let varsigma = virtual_gain(k, xi_hat[k - 1], theta, self.im[k - 1], &self.gains, &self.powers);
            let v = virtual_control(s, varsigma);
            out.s.push(s);
            out.theta.push(theta);
            out.varsigma.push(varsigma);
            out.v.push(v);
            v_prev = v;
        }
        out.u = v_prev;
        Ok(out)
    }

    /// `dΞ̂/dt` for every step, given the signals of a [`Self::control`] call.
    pub fn adaptation(&self, out: &ControlOutput, xi_hat: &[f64]) -> Vec<f64> {
        (1..=self.powers.order())
            .map(|k| {
                adaptation_rate(
                    k,
                    out.s[k - 1],
                    out.theta[k - 1],
                    xi_hat[k - 1],
                    &self.gains,
                    &self.powers,
                )
            })
            .collect()
    }
}
