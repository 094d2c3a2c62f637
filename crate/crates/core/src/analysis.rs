//! Post-run consensus metrics and the what-if bound calculator.
//!
//! The bound calculator composes the closed-loop decay rate `ᾱ`, the
//! residual `χ` and the radius of the residual set `Ω₃` from constants the
//! user assumes (optimal-weight norms, approximation errors, Young
//! constants, ...). None of these are observable at runtime and none of them
//! ever feed back into the controller.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::{FollowerGainSet, PowerProfile};
use crate::graph::{conservative_lambda_min_bound, min_singular_value, GraphError};
use crate::linalg::Matrix;
use crate::odd_power::{coefficients_for_d, OddPowerError};
use crate::simulator::{NetworkScenario, Trajectory};

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("trajectory is malformed: {0}")]
    Grid(String),
    #[error("matrix is {rows}x{cols}, trajectory has {followers} followers")]
    MatrixShape {
        rows: usize,
        cols: usize,
        followers: usize,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("assumed constants: {0}")]
    Constants(String),
    #[error("default upsilon_bar for follower {f}, step {k}: {source}")]
    Upsilon {
        f: usize,
        k: usize,
        source: OddPowerError,
    },
}

fn check_grid(traj: &Trajectory) -> Result<(), AnalysisError> {
    let len = traj.times.len();
    if traj.y_r.len() != len {
        return Err(AnalysisError::Grid(format!(
            "{} leader samples on a {len}-point grid",
            traj.y_r.len()
        )));
    }
    for (f, track) in traj.followers.iter().enumerate() {
        let columns = track
            .x
            .iter()
            .chain(&track.xi_hat)
            .map(Vec::len)
            .chain([track.u.len(), track.s1.len(), track.mode.len()]);
        for found in columns {
            if found != len {
                return Err(AnalysisError::Grid(format!(
                    "follower {} has a column with {found} samples on a {len}-point grid",
                    f + 1
                )));
            }
        }
        if track.x.is_empty() {
            return Err(AnalysisError::Grid(format!("follower {} has no states", f + 1)));
        }
    }
    Ok(())
}

/// Pairwise output disagreement between followers `a < b` (1-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseMetric {
    pub a: usize,
    pub b: usize,
    pub max: f64,
    pub final_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusMetrics {
    pub times: Vec<f64>,
    /// `s₁(t) = H·δ(t)` per sample, one vector per time.
    pub s1: Vec<Vec<f64>>,
    pub s1_norm: Vec<f64>,
    /// `|y_f − y_r|` per follower, per sample.
    pub tracking_error: Vec<Vec<f64>>,
    /// `‖s₁‖ / σ_min(H)`, an upper bound on `‖δ‖`.
    pub delta_envelope: Vec<f64>,
    /// Same envelope with the topology-free lower bound on `σ_min(H)`.
    pub conservative_envelope: Vec<f64>,
    pub sigma_min: f64,
    pub lambda_bound: f64,
    pub max_s1_norm: f64,
    pub final_s1_norm: f64,
    pub max_abs_tracking_error: Vec<f64>,
    pub final_abs_tracking_error: Vec<f64>,
    pub pairwise: Vec<PairwiseMetric>,
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

fn last_of(v: &[f64]) -> f64 {
    v.last().copied().unwrap_or(0.0)
}

pub fn consensus_metrics(traj: &Trajectory, h: &Matrix) -> Result<ConsensusMetrics, AnalysisError> {
    check_grid(traj)?;
    let n = traj.followers.len();
    if h.rows() != n || h.cols() != n {
        return Err(AnalysisError::MatrixShape {
            rows: h.rows(),
            cols: h.cols(),
            followers: n,
        });
    }
    let sigma_min = min_singular_value(h)?;
    let lambda_bound = conservative_lambda_min_bound(n)?;
    let len = traj.times.len();

    let mut s1 = Vec::with_capacity(len);
    let mut s1_norm = Vec::with_capacity(len);
    let mut delta_envelope = Vec::with_capacity(len);
    let mut conservative_envelope = Vec::with_capacity(len);
    let mut tracking_error = vec![Vec::with_capacity(len); n];
    let mut pair_series: Vec<(usize, usize, Vec<f64>)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b, Vec::with_capacity(len))))
        .collect();

    for i in 0..len {
        let y: Vec<f64> = traj.followers.iter().map(|tr| tr.x[0][i]).collect();
        let delta: Vec<f64> = y.iter().map(|yf| yf - traj.y_r[i]).collect();
        let s = h
            .mul_vec(&delta)
            .map_err(|e| AnalysisError::Grid(e.to_string()))?;
        let norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (f, d) in delta.iter().enumerate() {
            tracking_error[f].push(d.abs());
        }
        for (a, b, series) in &mut pair_series {
            series.push((y[*a] - y[*b]).abs());
        }
        delta_envelope.push(if sigma_min > 0.0 { norm / sigma_min } else { f64::INFINITY });
        conservative_envelope.push(norm / lambda_bound);
        s1_norm.push(norm);
        s1.push(s);
    }

    Ok(ConsensusMetrics {
        max_s1_norm: max_of(&s1_norm),
        final_s1_norm: last_of(&s1_norm),
        max_abs_tracking_error: tracking_error.iter().map(|e| max_of(e)).collect(),
        final_abs_tracking_error: tracking_error.iter().map(|e| last_of(e)).collect(),
        pairwise: pair_series
            .iter()
            .map(|(a, b, series)| PairwiseMetric {
                a: a + 1,
                b: b + 1,
                max: max_of(series),
                final_value: last_of(series),
            })
            .collect(),
        times: traj.times.clone(),
        s1,
        s1_norm,
        tracking_error,
        delta_envelope,
        conservative_envelope,
        sigma_min,
        lambda_bound,
    })
}

/// Per-follower headline numbers for a run, independent of the topology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FollowerSummary {
    pub follower: usize,
    pub max_abs_tracking_error: f64,
    pub final_abs_tracking_error: f64,
    pub max_abs_s1: f64,
    pub final_abs_s1: f64,
    pub max_abs_u: f64,
    pub max_abs_state: f64,
    pub max_xi_hat: f64,
    pub min_xi_hat: f64,
    pub mode_switches: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub samples: usize,
    pub t_end: f64,
    pub followers: Vec<FollowerSummary>,
    pub max_abs_tracking_error: Vec<f64>,
    pub final_abs_tracking_error: Vec<f64>,
}

impl TrajectorySummary {
    pub fn from_trajectory(traj: &Trajectory) -> Result<Self, AnalysisError> {
        check_grid(traj)?;
        let abs_max = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let followers: Vec<FollowerSummary> = traj
            .followers
            .iter()
            .enumerate()
            .map(|(f, tr)| {
                let err: Vec<f64> = tr.x[0].iter().zip(&traj.y_r).map(|(y, r)| (y - r).abs()).collect();
                FollowerSummary {
                    follower: f + 1,
                    max_abs_tracking_error: max_of(&err),
                    final_abs_tracking_error: last_of(&err),
                    max_abs_s1: abs_max(&tr.s1),
                    final_abs_s1: tr.s1.last().map_or(0.0, |v| v.abs()),
                    max_abs_u: abs_max(&tr.u),
                    max_abs_state: tr.x.iter().map(|c| abs_max(c)).fold(0.0, f64::max),
                    max_xi_hat: tr.xi_hat.iter().flatten().copied().fold(0.0, f64::max),
                    min_xi_hat: tr
                        .xi_hat
                        .iter()
                        .flatten()
                        .copied()
                        .fold(f64::INFINITY, f64::min),
                    mode_switches: tr.mode.windows(2).filter(|w| w[0] != w[1]).count(),
                }
            })
            .collect();
        Ok(Self {
            samples: traj.times.len(),
            t_end: last_of(&traj.times),
            max_abs_tracking_error: followers.iter().map(|s| s.max_abs_tracking_error).collect(),
            final_abs_tracking_error: followers.iter().map(|s| s.final_abs_tracking_error).collect(),
            followers,
        })
    }
}

/// Proof constants for one follower, one entry per step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FollowerConstants {
    pub gamma: f64,
    /// Assumed `‖W*‖^{r̄}`.
    #[serde(rename = "Xi")]
    pub xi: Vec<f64>,
    pub eps_bar: Vec<f64>,
    pub eps: Vec<f64>,
    pub rho: Vec<f64>,
    pub varrho: Vec<f64>,
    pub h_bar: Vec<f64>,
    /// Defaults to the separation bound at the controller's `d`.
    #[serde(default)]
    pub upsilon_bar: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PsiReading {
    /// `ψ̄_f = ψ̲_f = r_f − r_{f,1} + 2`.
    #[default]
    Literal,
    /// `ψ̄_f`, `ψ̲_f` as the max and min of `r_f − r_{f,k} + 2` over `k`.
    Extremum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssumedConstants {
    #[serde(default)]
    pub psi_reading: PsiReading,
    pub followers: Vec<FollowerConstants>,
}

impl AssumedConstants {
    pub fn from_toml_str(s: &str) -> Result<Self, AnalysisError> {
        toml::from_str(s).map_err(|e| AnalysisError::Constants(e.to_string()))
    }

    /// Every constant set to `value` (and `γ_f = value`), `ῡ` left to default.
    pub fn uniform(orders: &[usize], value: f64) -> Self {
        Self {
            psi_reading: PsiReading::Literal,
            followers: orders
                .iter()
                .map(|&n| FollowerConstants {
                    gamma: value,
                    xi: vec![value; n],
                    eps_bar: vec![value; n],
                    eps: vec![value; n],
                    rho: vec![value; n],
                    varrho: vec![value; n],
                    h_bar: vec![value; n],
                    upsilon_bar: None,
                })
                .collect(),
        }
    }

    fn validate(&self, orders: &[usize]) -> Result<(), AnalysisError> {
        let mut problems = Vec::new();
        if self.followers.len() != orders.len() {
            problems.push(format!(
                "{} follower entries for {} followers",
                self.followers.len(),
                orders.len()
            ));
        }
        for (f, (c, &n)) in self.followers.iter().zip(orders).enumerate() {
            if !(c.gamma > 0.0 && c.gamma.is_finite()) {
                problems.push(format!("followers[{f}].gamma must be positive, got {}", c.gamma));
            }
            let mut fields: Vec<(&str, &Vec<f64>, bool)> = vec![
                ("Xi", &c.xi, false),
                ("eps_bar", &c.eps_bar, true),
                ("eps", &c.eps, true),
                ("rho", &c.rho, true),
                ("varrho", &c.varrho, true),
                ("h_bar", &c.h_bar, true),
            ];
            if let Some(u) = &c.upsilon_bar {
                fields.push(("upsilon_bar", u, true));
            }
            for (name, v, strict) in fields {
                if v.len() != n {
                    problems.push(format!("followers[{f}].{name} has {} entries, expected {n}", v.len()));
                }
                for (k, &x) in v.iter().enumerate() {
                    let ok = x.is_finite() && if strict { x > 0.0 } else { x >= 0.0 };
                    if !ok {
                        problems.push(format!(
                            "followers[{f}].{name}[{k}] = {x} must be {}",
                            if strict { "positive" } else { "nonnegative" }
                        ));
                    }
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(AnalysisError::Constants(problems.join("; ")))
        }
    }
}

/// Design quantities the bound needs from one follower.
#[derive(Debug, Clone, PartialEq)]
pub struct FollowerDesign {
    pub powers: PowerProfile,
    pub gains: FollowerGainSet,
    /// `d_f + μ_f`.
    pub dmu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepBound {
    pub follower: usize,
    pub step: usize,
    pub tau_bar: f64,
    pub theta: f64,
    pub vartheta: f64,
    pub kappa: f64,
    pub hbar: f64,
    /// `c_{f,k} − θ_{f,k} − ϑ_{f,k−1}`.
    pub margin: f64,
    pub zeta_prime: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FollowerBound {
    pub follower: usize,
    pub alpha: f64,
    pub varpi: f64,
    pub psi_bar: f64,
    pub psi_under: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub psi_reading: PsiReading,
    pub alpha_bar: f64,
    pub chi: f64,
    /// `None` when some step is infeasible.
    pub gamma: Option<f64>,
    pub omega3_radius: Option<f64>,
    pub feasible: bool,
    pub followers: Vec<FollowerBound>,
    pub steps: Vec<StepBound>,
}

impl BoundReport {
    pub fn infeasible_steps(&self) -> impl Iterator<Item = &StepBound> {
        self.steps.iter().filter(|s| !s.feasible)
    }
}

/// `Γ = sqrt(Σ_f ((χ/ᾱ)·ψ̄_f)^{2/ψ̲_f})`.
pub fn gamma_radius(alpha_bar: f64, chi: f64, psi: &[(f64, f64)]) -> f64 {
    psi.iter()
        .map(|&(hi, lo)| (chi / alpha_bar * hi).powf(2.0 / lo))
        .sum::<f64>()
        .sqrt()
}

/// Radius of `Ω₃` for `N = psi.len()` followers.
pub fn omega3_radius(alpha_bar: f64, chi: f64, psi: &[(f64, f64)]) -> f64 {
    let n = psi.len() as i32;
    let nf = f64::from(n);
    let sum: f64 = psi
        .iter()
        .map(|&(hi, lo)| (chi / alpha_bar * hi).powf(2.0 / lo))
        .sum();
    (nf.powi(n - 1) * (nf * nf + nf - 1.0).powi(2) * sum / (nf - 1.0).powi(n - 1)).sqrt()
}

/// The bound composition over explicit design data; see
/// [`compose_theorem1_constants`] for the scenario-driven entry point.
pub fn compose_bound(
    designs: &[FollowerDesign],
    assumed: &AssumedConstants,
) -> Result<BoundReport, AnalysisError> {
    let orders: Vec<usize> = designs.iter().map(|d| d.powers.order()).collect();
    assumed.validate(&orders)?;

    let mut steps = Vec::new();
    let mut followers = Vec::new();
    for (f, (design, consts)) in designs.iter().zip(&assumed.followers).enumerate() {
        let p = &design.powers;
        let g = &design.gains;
        let n = p.order();
        let r_f = f64::from(p.r_max());
        let upsilon: Vec<f64> = match &consts.upsilon_bar {
            Some(u) => u.clone(),
            None => (0..n)
                .map(|k| {
                    coefficients_for_d(p.powers()[k], g.d)
                        .map(|c| c.upsilon_bar())
                        .map_err(|source| AnalysisError::Upsilon {
                            f: f + 1,
                            k: k + 1,
                            source,
                        })
                })
                .collect::<Result<_, _>>()?,
        };

        let mut alpha = f64::INFINITY;
        let mut varpi = 0.0;
        let mut vartheta_prev = 0.0;
        for k in 0..n {
            let rbar = p.rbar(k);
            let runder = p.runder(k);
            let r_k = f64::from(p.powers()[k]);
            let scale = if k == 0 { design.dmu } else { 1.0 };
            let tau_bar = consts.h_bar[k] * upsilon[k];
            let theta = scale * tau_bar * consts.rho[k].powf(rbar);
            let vartheta = scale * tau_bar * consts.varrho[k].powf(-runder);
            let kappa = g.zeta[k].powf(-runder) + g.b[k].powf(-runder) * consts.eps_bar[k].powf(runder);
            let hbar = kappa + consts.eps[k];
            let margin = g.c[k] - theta - vartheta_prev;
            let zeta_prime = consts.gamma.powf((r_k - 1.0) / (r_f + 1.0)) * margin;

            alpha = alpha
                .min((r_f - r_k + 2.0) * zeta_prime)
                .min(g.beta[k] * g.sigma[k]);
            varpi += g.sigma[k] * consts.xi[k].powi(2) / 2.0 + hbar + consts.gamma * margin;
            steps.push(StepBound {
                follower: f + 1,
                step: k + 1,
                tau_bar,
                theta,
                vartheta,
                kappa,
                hbar,
                margin,
                zeta_prime,
                feasible: margin > 0.0,
            });
            vartheta_prev = vartheta;
        }

        let psi_of = |k: usize| r_f - f64::from(p.powers()[k]) + 2.0;
        let (psi_bar, psi_under) = match assumed.psi_reading {
            PsiReading::Literal => (psi_of(0), psi_of(0)),
            PsiReading::Extremum => (0..n).map(psi_of).fold((f64::MIN, f64::MAX), |(hi, lo), v| {
                (hi.max(v), lo.min(v))
            }),
        };
        followers.push(FollowerBound {
            follower: f + 1,
            alpha,
            varpi,
            psi_bar,
            psi_under,
        });
    }

    let alpha_bar = followers.iter().map(|b| b.alpha).fold(f64::INFINITY, f64::min);
    let chi: f64 = followers.iter().map(|b| b.varpi).sum();
    let feasible = steps.iter().all(|s| s.feasible) && alpha_bar > 0.0;
    let psi: Vec<(f64, f64)> = followers.iter().map(|b| (b.psi_bar, b.psi_under)).collect();
    let (gamma, omega3) = if feasible {
        (
            Some(gamma_radius(alpha_bar, chi, &psi)),
            Some(omega3_radius(alpha_bar, chi, &psi)),
        )
    } else {
        (None, None)
    };
    Ok(BoundReport {
        psi_reading: assumed.psi_reading,
        alpha_bar,
        chi,
        gamma,
        omega3_radius: omega3,
        feasible,
        followers,
        steps,
    })
}

pub fn follower_designs(scenario: &NetworkScenario) -> Vec<FollowerDesign> {
    scenario
        .followers
        .iter()
        .enumerate()
        .map(|(f, spec)| FollowerDesign {
            powers: spec.powers.clone(),
            gains: spec.gains.clone(),
            dmu: (scenario.topology.in_degree(f) + usize::from(scenario.topology.mu(f))) as f64,
        })
        .collect()
}

pub fn compose_theorem1_constants(
    scenario: &NetworkScenario,
    assumed: &AssumedConstants,
) -> Result<BoundReport, AnalysisError> {
    compose_bound(&follower_designs(scenario), assumed)
}

/// Caps on recorded magnitudes; `None` checks finiteness only.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundednessThresholds {
    pub state: Option<f64>,
    pub estimate: Option<f64>,
    pub control: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundednessViolation {
    pub time: f64,
    pub signal: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundednessReport {
    pub pass: bool,
    pub first_violation: Option<BoundednessViolation>,
}

pub fn check_boundedness(traj: &Trajectory, thresholds: &BoundednessThresholds) -> BoundednessReport {
    let exceeds = |v: f64, cap: Option<f64>| !v.is_finite() || cap.is_some_and(|c| v.abs() > c);
    let mut first: Option<BoundednessViolation> = None;
    let mut note = |i: usize, signal: String, value: f64| {
        if first.as_ref().is_none_or(|v| traj.times[i] < v.time) {
            first = Some(BoundednessViolation {
                time: traj.times[i],
                signal,
                value,
            });
        }
    };
    for (f, tr) in traj.followers.iter().enumerate() {
        let groups = [
            ("x", &tr.x, thresholds.state),
            ("xi_hat", &tr.xi_hat, thresholds.estimate),
        ];
        for (name, cols, cap) in groups {
            for (k, col) in cols.iter().enumerate() {
                if let Some(i) = col.iter().position(|&v| exceeds(v, cap)) {
                    note(i, format!("f{}_{name}{}", f + 1, k + 1), col[i]);
                }
            }
        }
        if let Some(i) = tr.u.iter().position(|&v| exceeds(v, thresholds.control)) {
            note(i, format!("f{}_u", f + 1), tr.u[i]);
        }
        if let Some(i) = tr.s1.iter().position(|v| !v.is_finite()) {
            note(i, format!("f{}_s1", f + 1), tr.s1[i]);
        }
    }
    if let Some(i) = traj.y_r.iter().position(|v| !v.is_finite()) {
        note(i, "y_r".into(), traj.y_r[i]);
    }
    BoundednessReport {
        pass: first.is_none(),
        first_violation: first,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::FollowerTrack;

    fn toy_designs(c: f64) -> Vec<FollowerDesign> {
        let gains = FollowerGainSet {
            c: vec![c],
            zeta: vec![1.0],
            b: vec![1.0],
            beta: vec![1.0],
            sigma: vec![1.0],
            h_lower: vec![1.0],
            d: 0.5,
        };
        let design = FollowerDesign {
            powers: PowerProfile::new(vec![1]).unwrap(),
            gains,
            dmu: 1.0,
        };
        vec![design.clone(), design]
    }

    fn toy_constants() -> AssumedConstants {
        let mut a = AssumedConstants::uniform(&[1, 1], 1.0);
        for f in &mut a.followers {
            f.upsilon_bar = Some(vec![1.0]);
        }
        a
    }

    #[test]
    fn toy_instance_by_hand() {
        let report = compose_bound(&toy_designs(3.0), &toy_constants()).unwrap();
        let s = &report.steps[0];
        assert_eq!((s.theta, s.vartheta, s.kappa, s.hbar, s.zeta_prime), (1.0, 1.0, 2.0, 3.0, 2.0));
        assert_eq!(report.followers[0].varpi, 5.5);
        assert_eq!(report.alpha_bar, 1.0);
        assert_eq!(report.chi, 11.0);
        assert!((report.gamma.unwrap() - 44f64.sqrt()).abs() < 1e-12);
        assert!((report.omega3_radius.unwrap() - 2200f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn low_gain_is_flagged() {
        let report = compose_bound(&toy_designs(0.5), &toy_constants()).unwrap();
        assert!(!report.feasible);
        assert_eq!(report.infeasible_steps().count(), 2);
        assert_eq!(report.omega3_radius, None);
    }

    #[test]
    fn single_follower_radius_is_gamma() {
        let designs = vec![toy_designs(3.0).remove(0)];
        let mut consts = toy_constants();
        consts.followers.truncate(1);
        let report = compose_bound(&designs, &consts).unwrap();
        assert_eq!(report.omega3_radius, report.gamma);
    }

    #[test]
    fn constants_validated() {
        let mut consts = toy_constants();
        consts.followers[1].rho = vec![0.0];
        assert!(matches!(compose_bound(&toy_designs(3.0), &consts), Err(AnalysisError::Constants(_))));
        assert!(AssumedConstants::from_toml_str("followers = []\nextra = 1").is_err());
    }

    #[test]
    fn boundedness_flags_first_inf() {
        let mut traj = Trajectory::empty(&[1]);
        traj.times = vec![0.0, 1.0, 2.0];
        traj.y_r = vec![0.0; 3];
        traj.followers[0] = FollowerTrack {
            x: vec![vec![0.0, 0.0, f64::INFINITY]],
            xi_hat: vec![vec![0.0; 3]],
            u: vec![0.0; 3],
            s1: vec![0.0; 3],
            mode: vec![1; 3],
        };
        let r = check_boundedness(&traj, &BoundednessThresholds::default());
        assert!(!r.pass);
        assert_eq!(r.first_violation.unwrap().time, 2.0);
        traj.followers[0].x[0][2] = 0.0;
        assert!(check_boundedness(&traj, &BoundednessThresholds::default()).pass);
    }
}
