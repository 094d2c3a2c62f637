//! Scenario files: schema, strict loading with aggregated validation, and
//! the built-in three-follower demonstration network.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! [sim]
//! dt = 1e-4
//! horizon = 30.0
//! record_every = 10
//! seed = 7
//!
//! [controller]
//! d = 0.5
//!
//! [topology]
//! followers = 3
//! edges = [[1, 2], [2, 3], [3, 1]]   # [from, to], 1-based
//! leader_to = [1]
//!
//! [leader]
//! y_r = "2*sin(t) + 2*sin(0.5*t)"
//!
//! [[followers]]
//! powers = [3, 5]
//! x0 = [0.1, -0.1]
//! xi0 = [5.0, 5.0]
//! gains = { c = [3.0, 1.5], beta = [15.0, 1.0], sigma = [0.5, 1.0], zeta = [0.5, 0.75], b = [0.5, 1.0] }
//! switching = { dwell_min = 0.5 }     # or { segments = [[0.0, 1], [2.5, 3]] }
//!
//! [[followers.modes]]
//! phi = ["1 - cos(x1)", "x1*x2 + 0.5"]
//! h = ["abs(tanh(x1^2)) + 4", "2*(abs(cos(x1^3*x2)) + 1)"]
//! h_bounds = [[4.0, 5.0], [2.0, 4.0]]
//! ```
//!
//! Unknown keys anywhere are rejected.

mod builtin;
pub mod output;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::approximators::{grid_network, random_network, RbfNetwork};
use crate::controller::{regressor_dim, FollowerGainSet, PowerProfile};
use crate::graph::GraphTopology;
use crate::plant::{generate_schedule, Expr, LeaderSignal, ModeDynamics, SwitchingSchedule};
use crate::simulator::{FollowerSpec, NetworkScenario};

pub use builtin::{builtin_paper_scenario, paper_scenario_file};
pub use output::{
    csv_header, read_trajectory_csv, write_outputs, write_trajectory, OutputError, OutputFormat,
};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Syntax(String),
    #[error("scenario is invalid:\n  - {}", .0.join("\n  - "))]
    Invalid(Vec<String>),
}

impl ScenarioError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Io { .. } => 3,
            ScenarioError::Syntax(_) | ScenarioError::Invalid(_) => 1,
        }
    }
}

fn default_dt() -> f64 {
    1e-4
}
fn default_horizon() -> f64 {
    30.0
}
fn default_record_every() -> usize {
    10
}
fn default_seed() -> u64 {
    7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            dt: default_dt(),
            horizon: default_horizon(),
            record_every: default_record_every(),
            seed: default_seed(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSection {
    /// Separation level shared by every follower's gain `Im_k`.
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySection {
    pub followers: usize,
    pub edges: Vec<[usize; 2]>,
    pub leader_to: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeaderSection {
    pub y_r: String,
}

fn default_out_dir() -> String {
    "out".into()
}
fn default_stem() -> String {
    "trajectory".into()
}
fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv, OutputFormat::JsonSummary, OutputFormat::GnuplotScript]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out_dir")]
    pub dir: String,
    #[serde(default = "default_stem")]
    pub stem: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: default_out_dir(),
            stem: default_stem(),
            formats: default_formats(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainSection {
    pub c: Vec<f64>,
    pub beta: Vec<f64>,
    pub sigma: Vec<f64>,
    pub zeta: Vec<f64>,
    pub b: Vec<f64>,
}

/// Either a generated schedule (`dwell_min`) or explicit `[start, mode]` segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchingSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dwell_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segments: Option<Vec<(f64, usize)>>,
}

fn default_nodes_per_axis() -> usize {
    3
}
fn default_box_half_width() -> f64 {
    10.0
}
fn default_width() -> f64 {
    5.0
}
fn default_max_lattice_dim() -> usize {
    4
}
fn default_random_nodes() -> usize {
    96
}

/// Gaussian basis geometry. Regressors of dimension up to `max_lattice_dim`
/// get a full lattice on `[-box_half_width, box_half_width]^dim`; larger ones
/// get `random_nodes` seeded centers in the same box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproximatorSection {
    #[serde(default = "default_nodes_per_axis")]
    pub nodes_per_axis: usize,
    #[serde(default = "default_box_half_width")]
    pub box_half_width: f64,
    #[serde(default = "default_width")]
    pub width: f64,
    #[serde(default = "default_max_lattice_dim")]
    pub max_lattice_dim: usize,
    #[serde(default = "default_random_nodes")]
    pub random_nodes: usize,
}

impl Default for ApproximatorSection {
    fn default() -> Self {
        Self {
            nodes_per_axis: default_nodes_per_axis(),
            box_half_width: default_box_half_width(),
            width: default_width(),
            max_lattice_dim: default_max_lattice_dim(),
            random_nodes: default_random_nodes(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSection {
    pub phi: Vec<String>,
    pub h: Vec<String>,
    pub h_bounds: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FollowerSection {
    pub powers: Vec<u32>,
    pub x0: Vec<f64>,
    pub xi0: Vec<f64>,
    pub gains: GainSection,
    pub switching: SwitchingSection,
    #[serde(default)]
    pub approximator: ApproximatorSection,
    pub modes: Vec<ModeSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub sim: SimSection,
    pub controller: ControllerSection,
    pub topology: TopologySection,
    pub leader: LeaderSection,
    #[serde(default)]
    pub outputs: OutputSection,
    pub followers: Vec<FollowerSection>,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of an independent stream derived from `(seed, stream)`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream))
}

/// Schedule seed of follower `f` (0-based).
pub fn follower_seed(seed: u64, f: usize) -> u64 {
    derive_seed(seed, f as u64 + 1)
}

fn check_positive(problems: &mut Vec<String>, what: String, v: f64) {
    if !(v > 0.0 && v.is_finite()) {
        problems.push(format!("{what} must be positive, got {v}"));
    }
}

fn parse_expr(problems: &mut Vec<String>, what: String, text: &str) -> Option<Expr> {
    match Expr::parse(text) {
        Ok(e) => Some(e),
        Err(err) => {
            problems.push(format!("{what}: cannot parse \"{text}\": {err}"));
            None
        }
    }
}

impl ScenarioFile {
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        toml::from_str(text).map_err(|e| ScenarioError::Syntax(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario is always representable as TOML")
    }

    /// Validates everything and assembles the runnable scenario. The second
    /// element lists non-fatal findings (e.g. input gains that read states
    /// beyond their own step).
    pub fn build(&self) -> Result<(NetworkScenario, Vec<String>), ScenarioError> {
        let mut problems = Vec::new();
        let mut warnings = Vec::new();

        let sim = &self.sim;
        check_positive(&mut problems, "sim.dt".into(), sim.dt);
        check_positive(&mut problems, "sim.horizon".into(), sim.horizon);
        if sim.record_every == 0 {
            problems.push("sim.record_every must be at least 1".into());
        }
        let d = self.controller.d;
        if !(d > 0.0 && d < 1.0) {
            problems.push(format!("controller.d must lie in (0, 1), got {d}"));
        }

        let topology = match GraphTopology::from_edges(
            self.topology.followers,
            &self.topology.edges,
            &self.topology.leader_to,
        ) {
            Ok(t) => {
                if !t.has_leader_rooted_spanning_tree() {
                    problems.push(
                        "topology: the leader does not reach every follower along directed edges".into(),
                    );
                }
                Some(t)
            }
            Err(e) => {
                problems.push(format!("topology: {e}"));
                None
            }
        };
        if self.followers.len() != self.topology.followers {
            problems.push(format!(
                "topology declares {} followers but {} [[followers]] entries are given",
                self.topology.followers,
                self.followers.len()
            ));
        }

        let leader = parse_expr(&mut problems, "leader.y_r".into(), &self.leader.y_r).and_then(|e| {
            LeaderSignal::new(e)
                .map_err(|_| problems.push("leader.y_r may depend on t only".into()))
                .ok()
        });

        let mut specs = Vec::with_capacity(self.followers.len());
        for (f, fs) in self.followers.iter().enumerate() {
            let tag = format!("follower {}", f + 1);
            let powers = match PowerProfile::new(fs.powers.clone()) {
                Ok(p) => Some(p),
                Err(e) => {
                    problems.push(format!("{tag}: powers: {e}"));
                    None
                }
            };
            let n = fs.powers.len();
            if fs.x0.len() != n {
                problems.push(format!("{tag}: x0 has {} entries, expected {n}", fs.x0.len()));
            }
            if fs.xi0.len() != n {
                problems.push(format!("{tag}: xi0 has {} entries, expected {n}", fs.xi0.len()));
            }
            for (k, &v) in fs.xi0.iter().enumerate() {
                if !(v >= 0.0) {
                    problems.push(format!(
                        "{tag}: xi0[{}] = {v}; initial adaptive estimates must be nonnegative \
                         for the boundedness guarantee to apply",
                        k + 1
                    ));
                }
            }
            for (k, &v) in fs.x0.iter().enumerate() {
                if !v.is_finite() {
                    problems.push(format!("{tag}: x0[{}] = {v} is not finite", k + 1));
                }
            }
            let g = &fs.gains;
            for (name, v) in [("c", &g.c), ("beta", &g.beta), ("sigma", &g.sigma), ("zeta", &g.zeta), ("b", &g.b)] {
                if v.len() != n {
                    problems.push(format!("{tag}: gains.{name} has {} entries, expected {n}", v.len()));
                }
                for (k, &x) in v.iter().enumerate() {
                    check_positive(&mut problems, format!("{tag}: gains.{name}[{}]", k + 1), x);
                }
            }

            if fs.modes.is_empty() {
                problems.push(format!("{tag}: at least one mode is required"));
            }
            let mut modes = Vec::with_capacity(fs.modes.len());
            for (j, ms) in fs.modes.iter().enumerate() {
                let mtag = format!("{tag}, mode {}", j + 1);
                for (what, len) in [("phi", ms.phi.len()), ("h", ms.h.len()), ("h_bounds", ms.h_bounds.len())] {
                    if len != n {
                        problems.push(format!("{mtag}: {what} has {len} entries, expected {n}"));
                    }
                }
                let phi: Vec<Option<Expr>> = ms
                    .phi
                    .iter()
                    .enumerate()
                    .map(|(k, s)| parse_expr(&mut problems, format!("{mtag}: phi[{}]", k + 1), s))
                    .collect();
                let h: Vec<Option<Expr>> = ms
                    .h
                    .iter()
                    .enumerate()
                    .map(|(k, s)| parse_expr(&mut problems, format!("{mtag}: h[{}]", k + 1), s))
                    .collect();
                if phi.iter().chain(&h).any(Option::is_none) {
                    continue;
                }
                let bounds = ms.h_bounds.iter().map(|&[lo, hi]| (lo, hi)).collect();
                match ModeDynamics::new(phi.into_iter().flatten().collect(), h.into_iter().flatten().collect(), bounds) {
                    Ok(m) => {
                        for (which, k, index) in m.triangularity_violations() {
                            warnings.push(format!(
                                "{mtag}: {which}_{k} reads x{index}, beyond its own step x{k}"
                            ));
                        }
                        modes.push(m);
                    }
                    Err(e) if ms.phi.len() == n && ms.h.len() == n && ms.h_bounds.len() == n => {
                        problems.push(format!("{mtag}: {e}"))
                    }
                    Err(_) => {}
                }
            }

            let schedule = match (&fs.switching.dwell_min, &fs.switching.segments) {
                (Some(dwell), None) => generate_schedule(
                    follower_seed(sim.seed, f),
                    fs.modes.len().max(1),
                    *dwell,
                    sim.horizon,
                )
                .map_err(|e| problems.push(format!("{tag}: switching: {e}")))
                .ok(),
                (None, Some(segs)) => SwitchingSchedule::new(fs.modes.len().max(1), segs.clone())
                    .map_err(|e| problems.push(format!("{tag}: switching: {e}")))
                    .ok(),
                _ => {
                    problems.push(format!(
                        "{tag}: switching needs exactly one of `dwell_min` or `segments`"
                    ));
                    None
                }
            };

            let ap = &fs.approximator;
            check_positive(&mut problems, format!("{tag}: approximator.width"), ap.width);
            check_positive(&mut problems, format!("{tag}: approximator.box_half_width"), ap.box_half_width);
            if ap.nodes_per_axis == 0 || ap.random_nodes == 0 {
                problems.push(format!("{tag}: approximator node counts must be positive"));
            }

            specs.push((powers, schedule, modes));
        }

        if !problems.is_empty() {
            return Err(ScenarioError::Invalid(problems));
        }
        let topology = topology.expect("validated");
        let leader = leader.expect("validated");

        let mut followers = Vec::with_capacity(specs.len());
        for (f, ((powers, schedule, modes), fs)) in specs.into_iter().zip(&self.followers).enumerate() {
            let powers = powers.expect("validated");
            let n = powers.order();
            let h_lower = (0..n)
                .map(|k| modes.iter().map(|m| m.h_bounds()[k].0).fold(f64::INFINITY, f64::min))
                .collect();
            let gains = FollowerGainSet {
                c: fs.gains.c.clone(),
                zeta: fs.gains.zeta.clone(),
                b: fs.gains.b.clone(),
                beta: fs.gains.beta.clone(),
                sigma: fs.gains.sigma.clone(),
                h_lower,
                d,
            };
            let neighbor_orders: Vec<usize> = topology
                .neighbors(f)
                .iter()
                .map(|&l| self.followers[l].powers.len())
                .collect();
            let nets = (1..=n)
                .map(|k| build_network(&fs.approximator, regressor_dim(k, &neighbor_orders), sim.seed, f, k))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| ScenarioError::Invalid(vec![format!("follower {}: approximator: {e}", f + 1)]))?;
            followers.push(FollowerSpec {
                modes,
                powers,
                gains,
                nets,
                schedule: schedule.expect("validated"),
                x0: fs.x0.clone(),
                xi0: fs.xi0.clone(),
            });
        }

        Ok((
            NetworkScenario {
                topology,
                followers,
                leader,
                dt: sim.dt,
                horizon: sim.horizon,
                record_every: sim.record_every,
                seed: sim.seed,
            },
            warnings,
        ))
    }
}

fn build_network(
    ap: &ApproximatorSection,
    dim: usize,
    seed: u64,
    f: usize,
    k: usize,
) -> Result<RbfNetwork, crate::approximators::ApproxError> {
    let lo = vec![-ap.box_half_width; dim];
    let hi = vec![ap.box_half_width; dim];
    if dim <= ap.max_lattice_dim {
        grid_network(dim, ap.nodes_per_axis, &lo, &hi, ap.width)
    } else {
        let stream = derive_seed(follower_seed(seed, f), 1000 + k as u64);
        random_network(dim, ap.random_nodes, &lo, &hi, ap.width, stream)
    }
}

/// Reads a scenario file and returns the scenario plus its output settings.
pub fn load_scenario_file(path: &Path) -> Result<ScenarioFile, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ScenarioFile::from_toml_str(&text)
}

/// Loads and fully validates a scenario file. Warnings are logged.
pub fn load_scenario(path: &Path) -> Result<NetworkScenario, ScenarioError> {
    let (scenario, warnings) = load_scenario_file(path)?.build()?;
    for w in warnings {
        log::warn!("{w}");
    }
    Ok(scenario)
}
