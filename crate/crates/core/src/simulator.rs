//! Fixed-step closed-loop integration of the follower network.
//!
//! The global state stacks, for every follower, its plant states followed by
//! its adaptive estimates. Controllers are evaluated inside every RK4 stage;
//! each follower's mode is frozen for the whole step at the value it has at
//! the step's left endpoint (switch times are snapped to the grid).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::approximators::RbfNetwork;
use crate::controller::{ControlOutput, ControllerError, FollowerController, FollowerGainSet, PowerProfile};
use crate::graph::GraphTopology;
use crate::plant::{next_channel, LeaderSignal, ModeDynamics, PlantError, SwitchingSchedule};

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("follower {f}: {source}")]
    Controller { f: usize, source: ControllerError },
    #[error("follower {f}, mode {mode}, t = {t}: {source}")]
    Plant {
        f: usize,
        mode: usize,
        t: f64,
        source: PlantError,
    },
    #[error("non-finite {signal} at t = {t}; the step may be too large, try halving dt (currently {dt})")]
    NonFinite { t: f64, signal: String, dt: f64 },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("convergence study: {0}")]
    Convergence(String),
}

/// One follower as configured: dynamics per mode, controller design and
/// initial conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct FollowerSpec {
    pub modes: Vec<ModeDynamics>,
    pub powers: PowerProfile,
    pub gains: FollowerGainSet,
    pub nets: Vec<RbfNetwork>,
    pub schedule: SwitchingSchedule,
    pub x0: Vec<f64>,
    pub xi0: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkScenario {
    pub topology: GraphTopology,
    pub followers: Vec<FollowerSpec>,
    pub leader: LeaderSignal,
    pub dt: f64,
    pub horizon: f64,
    pub record_every: usize,
    pub seed: u64,
}

/// Recorded signals of one follower, one entry per recorded time.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FollowerTrack {
    /// `x[k][i]` is state `k+1` at sample `i`.
    pub x: Vec<Vec<f64>>,
    pub xi_hat: Vec<Vec<f64>>,
    pub u: Vec<f64>,
    pub s1: Vec<f64>,
    pub mode: Vec<usize>,
}

impl FollowerTrack {
    fn with_order(n: usize) -> Self {
        Self {
            x: vec![Vec::new(); n],
            xi_hat: vec![Vec::new(); n],
            ..Self::default()
        }
    }

    pub fn order(&self) -> usize {
        self.x.len()
    }

    pub fn output(&self) -> &[f64] {
        &self.x[0]
    }
}

/// Aggregated out-of-bounds `h_k^j` evaluations seen at recorded samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HBoundReport {
    pub follower: usize,
    pub step: usize,
    pub mode: usize,
    pub count: usize,
    pub first_time: f64,
    pub worst_value: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub followers: Vec<FollowerTrack>,
    pub y_r: Vec<f64>,
    #[serde(default)]
    pub h_bound_reports: Vec<HBoundReport>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn orders(&self) -> Vec<usize> {
        self.followers.iter().map(FollowerTrack::order).collect()
    }

    /// Empty trajectory with the column layout for the given follower orders.
    pub fn empty(orders: &[usize]) -> Self {
        Self {
            followers: orders.iter().map(|&n| FollowerTrack::with_order(n)).collect(),
            ..Self::default()
        }
    }
}

/// A scenario prepared for evaluation: controllers built, schedules snapped
/// to the integration grid.
#[derive(Debug, Clone)]
pub struct Network {
    scenario: NetworkScenario,
    controllers: Vec<FollowerController>,
    /// Start index of each follower's block in the global state.
    offsets: Vec<usize>,
    /// `(first step, mode)` per follower.
    switch_steps: Vec<Vec<(usize, usize)>>,
    steps: usize,
}

impl Network {
    pub fn new(scenario: NetworkScenario) -> Result<Self, SimError> {
        if !(scenario.dt > 0.0 && scenario.dt.is_finite()) {
            return Err(SimError::Invalid(format!("dt must be positive, got {}", scenario.dt)));
        }
        if !(scenario.horizon >= 0.0 && scenario.horizon.is_finite()) {
            return Err(SimError::Invalid(format!(
                "horizon must be nonnegative, got {}",
                scenario.horizon
            )));
        }
        if scenario.record_every == 0 {
            return Err(SimError::Invalid("record_every must be at least 1".into()));
        }
        if scenario.followers.len() != scenario.topology.follower_count() {
            return Err(SimError::Invalid(format!(
                "{} followers configured for a {}-follower topology",
                scenario.followers.len(),
                scenario.topology.follower_count()
            )));
        }
        let mut controllers = Vec::with_capacity(scenario.followers.len());
        let mut offsets = Vec::with_capacity(scenario.followers.len());
        let mut switch_steps = Vec::with_capacity(scenario.followers.len());
        let mut offset = 0;
        for (f, spec) in scenario.followers.iter().enumerate() {
            let n = spec.powers.order();
            if spec.x0.len() != n || spec.xi0.len() != n {
                return Err(SimError::Invalid(format!(
                    "follower {}: initial state/estimate length does not match order {n}",
                    f + 1
                )));
            }
            if let Some(v) = spec.xi0.iter().find(|&&v| !(v >= 0.0)) {
                return Err(SimError::Invalid(format!(
                    "follower {}: initial estimate {v} is negative",
                    f + 1
                )));
            }
            if spec.modes.is_empty() || spec.modes.iter().any(|m| m.order() != n) {
                return Err(SimError::Invalid(format!(
                    "follower {}: every mode must have order {n}",
                    f + 1
                )));
            }
            if spec.schedule.mode_count() != spec.modes.len() {
                return Err(SimError::Invalid(format!(
                    "follower {}: schedule expects {} modes, {} configured",
                    f + 1,
                    spec.schedule.mode_count(),
                    spec.modes.len()
                )));
            }
            let ctl = FollowerController::new(
                f,
                &scenario.topology,
                spec.gains.clone(),
                spec.powers.clone(),
                spec.nets.clone(),
            )
            .map_err(|source| SimError::Controller { f: f + 1, source })?;
            controllers.push(ctl);
            offsets.push(offset);
            offset += 2 * n;

            let mut steps: Vec<(usize, usize)> = Vec::new();
            for &(start, mode) in spec.schedule.segments() {
                let idx = (start / scenario.dt).round() as usize;
                match steps.last_mut() {
                    Some(last) if idx <= last.0 => last.1 = mode,
                    _ => steps.push((idx, mode)),
                }
            }
            switch_steps.push(steps);
        }
        let steps = (scenario.horizon / scenario.dt).round() as usize;
        Ok(Self {
            scenario,
            controllers,
            offsets,
            switch_steps,
            steps,
        })
    }

    pub fn scenario(&self) -> &NetworkScenario {
        &self.scenario
    }

    pub fn controllers(&self) -> &[FollowerController] {
        &self.controllers
    }

    pub fn state_len(&self) -> usize {
        self.offsets
            .last()
            .map_or(0, |&o| o + 2 * self.controllers.last().expect("nonempty").powers().order())
    }

    pub fn initial_state(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(self.state_len());
        for spec in &self.scenario.followers {
            y.extend_from_slice(&spec.x0);
            y.extend_from_slice(&spec.xi0);
        }
        y
    }

    fn order(&self, f: usize) -> usize {
        self.controllers[f].powers().order()
    }

    /// Plant states of follower `f` inside a global state vector.
    pub fn states<'a>(&self, y: &'a [f64], f: usize) -> &'a [f64] {
        let o = self.offsets[f];
        &y[o..o + self.order(f)]
    }

    /// Adaptive estimates of follower `f` inside a global state vector.
    pub fn estimates<'a>(&self, y: &'a [f64], f: usize) -> &'a [f64] {
        let o = self.offsets[f] + self.order(f);
        &y[o..o + self.order(f)]
    }

    /// Modes active during grid step `step`.
    pub fn modes_at_step(&self, step: usize) -> Vec<usize> {
        self.switch_steps
            .iter()
            .map(|segs| {
                let idx = segs.partition_point(|&(s, _)| s <= step);
                segs[idx - 1].1
            })
            .collect()
    }

    /// Modes at time `t` after snapping `t` to the grid step it falls in.
    pub fn modes_at(&self, t: f64) -> Vec<usize> {
        let step = (t / self.scenario.dt + 1e-9).floor().max(0.0) as usize;
        self.modes_at_step(step)
    }

    /// Control signals of every follower. No mode information is involved.
    pub fn controls(&self, y: &[f64], t: f64) -> Result<Vec<ControlOutput>, SimError> {
        let y_r = self.scenario.leader.eval(t);
        self.controllers
            .iter()
            .enumerate()
            .map(|(f, ctl)| {
                let neighbor_states: Vec<&[f64]> =
                    ctl.neighbors().iter().map(|&l| self.states(y, l)).collect();
                ctl.control(self.states(y, f), &neighbor_states, y_r, self.estimates(y, f))
                    .map_err(|source| SimError::Controller { f: f + 1, source })
            })
            .collect()
    }

    /// Closed-loop right-hand side with explicitly given modes, plus the
    /// control signals it used.
    pub fn derivative_with_modes(
        &self,
        y: &[f64],
        t: f64,
        modes: &[usize],
    ) -> Result<(Vec<f64>, Vec<ControlOutput>), SimError> {
        let controls = self.controls(y, t)?;
        let mut dy = Vec::with_capacity(y.len());
        for (f, (ctl, out)) in self.controllers.iter().zip(&controls).enumerate() {
            let x = self.states(y, f);
            let mode = modes[f];
            let dynamics = &self.scenario.followers[f].modes[mode - 1];
            let dx = dynamics
                .derivative(x, &next_channel(x, out.u), ctl.powers().powers())
                .map_err(|source| SimError::Plant {
                    f: f + 1,
                    mode,
                    t,
                    source,
                })?;
            dy.extend(dx);
            dy.extend(ctl.adaptation(out, self.estimates(y, f)));
        }
        Ok((dy, controls))
    }

    /// Closed-loop right-hand side at `t` with the scheduled modes.
    pub fn closed_loop_derivative(&self, y: &[f64], t: f64) -> Result<Vec<f64>, SimError> {
        Ok(self.derivative_with_modes(y, t, &self.modes_at(t))?.0)
    }

    fn rk4_step(&self, y: &[f64], t: f64, dt: f64, modes: &[usize]) -> Result<Vec<f64>, SimError> {
        let axpy = |a: f64, k: &[f64]| -> Vec<f64> { y.iter().zip(k).map(|(yi, ki)| yi + a * ki).collect() };
        let k1 = self.derivative_with_modes(y, t, modes)?.0;
        let k2 = self.derivative_with_modes(&axpy(0.5 * dt, &k1), t + 0.5 * dt, modes)?.0;
        let k3 = self.derivative_with_modes(&axpy(0.5 * dt, &k2), t + 0.5 * dt, modes)?.0;
        let k4 = self.derivative_with_modes(&axpy(dt, &k3), t + dt, modes)?.0;
        Ok((0..y.len())
            .map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect())
    }

    fn clamp_estimates(&self, y: &mut [f64]) {
        for f in 0..self.controllers.len() {
            let o = self.offsets[f] + self.order(f);
            for v in &mut y[o..o + self.order(f)] {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
    }

    fn check_finite(&self, y: &[f64], t: f64) -> Result<(), SimError> {
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            let f = self.offsets.partition_point(|&o| o <= i) - 1;
            let local = i - self.offsets[f];
            let n = self.order(f);
            let signal = if local < n {
                format!("x_{{{},{}}}", f + 1, local + 1)
            } else {
                format!("xi_hat_{{{},{}}}", f + 1, local - n + 1)
            };
            return Err(SimError::NonFinite {
                t,
                signal,
                dt: self.scenario.dt,
            });
        }
        Ok(())
    }

    fn record(
        &self,
        traj: &mut Trajectory,
        h_reports: &mut Vec<HBoundReport>,
        y: &[f64],
        t: f64,
        modes: &[usize],
    ) -> Result<(), SimError> {
        let controls = self.controls(y, t)?;
        for v in controls.iter().flat_map(|c| [c.u, c.s[0]]) {
            if !v.is_finite() {
                return Err(SimError::NonFinite {
                    t,
                    signal: "control".into(),
                    dt: self.scenario.dt,
                });
            }
        }
        traj.times.push(t);
        traj.y_r.push(self.scenario.leader.eval(t));
        for (f, (track, out)) in traj.followers.iter_mut().zip(&controls).enumerate() {
            let x = self.states(y, f);
            let xi = self.estimates(y, f);
            for k in 0..x.len() {
                track.x[k].push(x[k]);
                track.xi_hat[k].push(xi[k]);
            }
            track.u.push(out.u);
            track.s1.push(out.s[0]);
            track.mode.push(modes[f]);

            let mode = modes[f];
            let dynamics = &self.scenario.followers[f].modes[mode - 1];
            let violations = dynamics.h_bound_violations(x).map_err(|source| SimError::Plant {
                f: f + 1,
                mode,
                t,
                source,
            })?;
            for v in violations {
                let key = (f + 1, v.k, mode);
                match h_reports
                    .iter_mut()
                    .find(|r| (r.follower, r.step, r.mode) == key)
                {
                    Some(r) => {
                        r.count += 1;
                        if (v.value - v.lo).min(v.hi - v.value) < (r.worst_value - r.lo).min(r.hi - r.worst_value) {
                            r.worst_value = v.value;
                        }
                    }
                    None => {
                        log::warn!(
                            "follower {} step {} mode {}: h = {} outside declared bounds [{}, {}] at t = {}",
                            f + 1,
                            v.k,
                            mode,
                            v.value,
                            v.lo,
                            v.hi,
                            t
                        );
                        h_reports.push(HBoundReport {
                            follower: f + 1,
                            step: v.k,
                            mode,
                            count: 1,
                            first_time: t,
                            worst_value: v.value,
                            lo: v.lo,
                            hi: v.hi,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Classical RK4 over `[0, horizon]`, recording every `record_every`-th
    /// grid point (the initial point included).
    pub fn integrate(&self) -> Result<Trajectory, SimError> {
        let dt = self.scenario.dt;
        let orders: Vec<usize> = (0..self.controllers.len()).map(|f| self.order(f)).collect();
        let mut traj = Trajectory::empty(&orders);
        let mut h_reports = Vec::new();
        let mut y = self.initial_state();
        self.check_finite(&y, 0.0)?;
        for step in 0..=self.steps {
            let t = step as f64 * dt;
            let modes = self.modes_at_step(step);
            if step % self.scenario.record_every == 0 {
                self.record(&mut traj, &mut h_reports, &y, t, &modes)?;
            }
            if step == self.steps {
                break;
            }
            y = self.rk4_step(&y, t, dt, &modes)?;
            self.clamp_estimates(&mut y);
            self.check_finite(&y, t + dt)?;
        }
        traj.h_bound_reports = h_reports;
        Ok(traj)
    }

    /// Final state after integrating to `t_end` with step `dt`, modes frozen
    /// at their initial values. Used for order studies on switch-free windows.
    fn integrate_to(&self, t_end: f64, dt: f64) -> Result<Vec<f64>, SimError> {
        let steps = (t_end / dt).round() as usize;
        let modes = self.modes_at_step(0);
        let mut y = self.initial_state();
        for step in 0..steps {
            y = self.rk4_step(&y, step as f64 * dt, dt, &modes)?;
            self.check_finite(&y, (step + 1) as f64 * dt)?;
        }
        Ok(y)
    }

    /// Richardson estimate of the integrator order on `[0, t_end]`.
    /// Rejects windows in which any follower switches.
    pub fn convergence_order(&self, t_end: f64, dt_list: &[f64]) -> Result<f64, SimError> {
        for (f, spec) in self.scenario.followers.iter().enumerate() {
            if let Some(ts) = spec.schedule.switch_times().find(|&ts| ts <= t_end) {
                return Err(SimError::Convergence(format!(
                    "follower {} switches at t = {ts}, inside the probed window",
                    f + 1
                )));
            }
        }
        let finals = dt_list
            .iter()
            .map(|&dt| self.integrate_to(t_end, dt))
            .collect::<Result<Vec<_>, _>>()?;
        richardson_order(dt_list, &finals)
    }
}

/// Convenience wrapper: prepare and integrate.
pub fn integrate(scenario: &NetworkScenario) -> Result<Trajectory, SimError> {
    Network::new(scenario.clone())?.integrate()
}

/// One classical RK4 step of `ẏ = f(t, y)`.
pub fn rk4_step<F>(f: &F, t: f64, y: &[f64], dt: f64) -> Vec<f64>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let axpy = |a: f64, k: &[f64]| -> Vec<f64> { y.iter().zip(k).map(|(yi, ki)| yi + a * ki).collect() };
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * dt, &axpy(0.5 * dt, &k1));
    let k3 = f(t + 0.5 * dt, &axpy(0.5 * dt, &k2));
    let k4 = f(t + dt, &axpy(dt, &k3));
    (0..y.len())
        .map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Integrates `ẏ = f(t, y)` from `t = 0` to `t_end` with fixed step `dt`.
pub fn integrate_ode<F>(f: &F, y0: &[f64], t_end: f64, dt: f64) -> Vec<f64>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let steps = (t_end / dt).round() as usize;
    let mut y = y0.to_vec();
    for step in 0..steps {
        y = rk4_step(f, step as f64 * dt, &y, dt);
    }
    y
}

fn richardson_order(dt_list: &[f64], finals: &[Vec<f64>]) -> Result<f64, SimError> {
    if dt_list.len() < 3 {
        return Err(SimError::Convergence(format!(
            "need at least 3 step sizes, got {}",
            dt_list.len()
        )));
    }
    let dist = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    };
    let mut estimates = Vec::new();
    for i in 0..dt_list.len() - 2 {
        let q1 = dt_list[i] / dt_list[i + 1];
        let q2 = dt_list[i + 1] / dt_list[i + 2];
        if !(q1 > 1.0) || (q1 - q2).abs() > 1e-9 * q1 {
            return Err(SimError::Convergence(
                "step sizes must decrease by a constant ratio".into(),
            ));
        }
        let e1 = dist(&finals[i], &finals[i + 1]);
        let e2 = dist(&finals[i + 1], &finals[i + 2]);
        if e2 == 0.0 || e1 == 0.0 {
            return Err(SimError::Convergence(
                "successive solutions agree exactly; refine the step sizes".into(),
            ));
        }
        estimates.push((e1 / e2).ln() / q1.ln());
    }
    Ok(estimates.iter().sum::<f64>() / estimates.len() as f64)
}

/// Richardson order estimate for `ẏ = f(t, y)` on `[0, t_end]` from solutions
/// at successively refined step sizes (constant refinement ratio, ≥ 3 sizes).
pub fn convergence_order<F>(f: &F, y0: &[f64], t_end: f64, dt_list: &[f64]) -> Result<f64, SimError>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    if dt_list.len() < 3 {
        return richardson_order(dt_list, &[]);
    }
    let finals: Vec<Vec<f64>> = dt_list
        .iter()
        .map(|&dt| integrate_ode(f, y0, t_end, dt))
        .collect();
    richardson_order(dt_list, &finals)
}
