//! Switched odd-power-integrator agent dynamics:
//!
//! ```text
//! ẋ_k = φ_k^σ(x_1..x_k) + h_k^σ(x_1..x_k) · x_{k+1}^{r_k},   x_{n+1} := u
//! ```

pub mod expr;
pub mod switching;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use expr::{Expr, ParseError};
pub use switching::{generate_schedule, SwitchingSchedule};

use crate::odd_power::odd_pow_unchecked;

#[derive(Debug, Error, PartialEq)]
pub enum PlantError {
    #[error("state has {found} entries, dynamics have order {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("{which}_{k} evaluated to {value} at x = {x:?}")]
    NonFinite {
        which: &'static str,
        k: usize,
        value: f64,
        x: Vec<f64>,
    },
    #[error("mode needs {expected} {what} expressions, got {found}")]
    Shape {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("h bounds for step {k}: need 0 < lo <= hi, got ({lo}, {hi})")]
    BadBounds { k: usize, lo: f64, hi: f64 },
    #[error("expression for {which}_{k} references x{index}, but the agent has order {n}")]
    StateIndex {
        which: &'static str,
        k: usize,
        index: usize,
        n: usize,
    },
}

/// One mode `j` of a follower: drift `φ_k^j` and input gain `h_k^j` for every
/// step, plus the declared bounds `h̲_k^j ≤ h_k^j ≤ h̄_k^j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeDynamics {
    phi: Vec<Expr>,
    h: Vec<Expr>,
    h_bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HBoundViolation {
    pub k: usize,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

impl ModeDynamics {
    pub fn new(
        phi: Vec<Expr>,
        h: Vec<Expr>,
        h_bounds: Vec<(f64, f64)>,
    ) -> Result<Self, PlantError> {
        let n = phi.len();
        if h.len() != n {
            return Err(PlantError::Shape {
                what: "h",
                expected: n,
                found: h.len(),
            });
        }
        if h_bounds.len() != n {
            return Err(PlantError::Shape {
                what: "h_bounds",
                expected: n,
                found: h_bounds.len(),
            });
        }
        for (k, &(lo, hi)) in h_bounds.iter().enumerate() {
            if !(lo > 0.0 && lo <= hi) {
                return Err(PlantError::BadBounds { k: k + 1, lo, hi });
            }
        }
        for (which, list) in [("phi", &phi), ("h", &h)] {
            for (k, e) in list.iter().enumerate() {
                let index = e.max_state_index();
                if index > n {
                    return Err(PlantError::StateIndex {
                        which,
                        k: k + 1,
                        index,
                        n,
                    });
                }
            }
        }
        Ok(Self { phi, h, h_bounds })
    }

    pub fn order(&self) -> usize {
        self.phi.len()
    }

    pub fn phi(&self) -> &[Expr] {
        &self.phi
    }

    pub fn h(&self) -> &[Expr] {
        &self.h
    }

    pub fn h_bounds(&self) -> &[(f64, f64)] {
        &self.h_bounds
    }

    /// Steps whose `φ_k` or `h_k` read a state beyond `x_k`, as
    /// `(which, k, highest index)` with 1-based `k`.
    pub fn triangularity_violations(&self) -> Vec<(&'static str, usize, usize)> {
        let mut out = Vec::new();
        for (which, list) in [("phi", &self.phi), ("h", &self.h)] {
            for (k, e) in list.iter().enumerate() {
                let index = e.max_state_index();
                if index > k + 1 {
                    out.push((which, k + 1, index));
                }
            }
        }
        out
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), PlantError> {
        if x.len() == self.order() {
            Ok(())
        } else {
            Err(PlantError::Dimension {
                expected: self.order(),
                found: x.len(),
            })
        }
    }

    /// `h_k(x)` for every step.
    pub fn h_values(&self, x: &[f64]) -> Result<Vec<f64>, PlantError> {
        self.check_dim(x)?;
        Ok(self.h.iter().map(|e| e.eval(x, 0.0)).collect())
    }

    pub fn h_bound_violations(&self, x: &[f64]) -> Result<Vec<HBoundViolation>, PlantError> {
        Ok(self
            .h_values(x)?
            .into_iter()
            .zip(&self.h_bounds)
            .enumerate()
            .filter(|(_, (v, &(lo, hi)))| !(*v >= lo && *v <= hi))
            .map(|(k, (value, &(lo, hi)))| HBoundViolation {
                k: k + 1,
                value,
                lo,
                hi,
            })
            .collect())
    }

    /// `ẋ_k = φ_k(x) + h_k(x)·next_channel[k]^{r_k}`, where `next_channel[k]`
    /// is `x_{k+1}` for `k < n` and the input `u` at `k = n`.
    pub fn derivative(
        &self,
        x: &[f64],
        next_channel: &[f64],
        powers: &[u32],
    ) -> Result<Vec<f64>, PlantError> {
        self.check_dim(x)?;
        if next_channel.len() != x.len() || powers.len() != x.len() {
            return Err(PlantError::Dimension {
                expected: x.len(),
                found: next_channel.len().min(powers.len()),
            });
        }
        let mut out = Vec::with_capacity(x.len());
        for k in 0..x.len() {
            let phi = self.phi[k].eval(x, 0.0);
            let h = self.h[k].eval(x, 0.0);
            for (which, value) in [("phi", phi), ("h", h)] {
                if !value.is_finite() {
                    return Err(PlantError::NonFinite {
                        which,
                        k: k + 1,
                        value,
                        x: x.to_vec(),
                    });
                }
            }
            out.push(phi + h * odd_pow_unchecked(next_channel[k], powers[k]));
        }
        Ok(out)
    }
}

/// `x_2, …, x_n, u`: the signal that drives each integrator of the chain.
pub fn next_channel(x: &[f64], u: f64) -> Vec<f64> {
    let mut v: Vec<f64> = x.iter().skip(1).copied().collect();
    v.push(u);
    v
}

/// Leader output `y_r(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LeaderSignal(Expr);

impl LeaderSignal {
    pub fn new(expr: Expr) -> Result<Self, PlantError> {
        let index = expr.max_state_index();
        if index > 0 {
            return Err(PlantError::StateIndex {
                which: "y_r",
                k: 0,
                index,
                n: 0,
            });
        }
        Ok(Self(expr))
    }

    pub fn expr(&self) -> &Expr {
        &self.0
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.0.eval(&[], t)
    }

    /// Largest `|y_r|` on a uniform sampling of `[0, horizon]`, or `None` if
    /// some sample is not finite.
    pub fn sampled_sup(&self, horizon: f64, samples: usize) -> Option<f64> {
        let samples = samples.max(2);
        let mut sup: f64 = 0.0;
        for i in 0..samples {
            let t = horizon * i as f64 / (samples - 1) as f64;
            let v = self.eval(t);
            if !v.is_finite() {
                return None;
            }
            sup = sup.max(v.abs());
        }
        Some(sup)
    }
}
