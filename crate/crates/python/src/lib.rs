//! Python bindings: scenarios, simulation runs, trajectories and the
//! numerical checks of `consensus-core`.

use pyo3::prelude::*;

#[pymodule]
mod consensus_py {
    use std::path::PathBuf;

    use consensus_core::analysis::{
        check_boundedness, compose_theorem1_constants, consensus_metrics, AssumedConstants,
        BoundednessThresholds, TrajectorySummary,
    };
    use consensus_core::graph::{conservative_lambda_min_bound, min_singular_value, GraphTopology};
    use consensus_core::{approximators, lemma_suites, odd_power, scenario, simulator};
    use pyo3::exceptions::{PyIndexError, PyOSError, PyRuntimeError, PyValueError};
    use pyo3::prelude::*;
    use serde::Serialize;

    fn value_err(e: impl ToString) -> PyErr {
        PyValueError::new_err(e.to_string())
    }

    fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
        let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        py.import("json")?.call_method1("loads", (text,))
    }

    fn scenario_err(e: scenario::ScenarioError) -> PyErr {
        match e.exit_code() {
            3 => PyOSError::new_err(e.to_string()),
            _ => PyValueError::new_err(e.to_string()),
        }
    }

    fn output_err(e: scenario::OutputError) -> PyErr {
        match e {
            scenario::OutputError::Io { .. } => PyOSError::new_err(e.to_string()),
            scenario::OutputError::Format { .. } => PyValueError::new_err(e.to_string()),
        }
    }

    fn sim_err(e: simulator::SimError) -> PyErr {
        match e {
            simulator::SimError::Invalid(_) | simulator::SimError::Controller { .. } => value_err(e),
            _ => PyRuntimeError::new_err(e.to_string()),
        }
    }

    /// An editable scenario description; nothing is validated until `run`
    /// or `validate` is called.
    #[pyclass(module = "consensus_py")]
    struct Scenario {
        file: scenario::ScenarioFile,
    }

    #[pymethods]
    impl Scenario {
        /// The built-in three-follower network.
        #[staticmethod]
        fn builtin() -> Self {
            Self {
                file: scenario::paper_scenario_file(),
            }
        }

        #[staticmethod]
        fn from_toml(text: &str) -> PyResult<Self> {
            scenario::ScenarioFile::from_toml_str(text)
                .map(|file| Self { file })
                .map_err(scenario_err)
        }

        #[staticmethod]
        fn load(path: PathBuf) -> PyResult<Self> {
            scenario::load_scenario_file(&path)
                .map(|file| Self { file })
                .map_err(scenario_err)
        }

        fn to_toml(&self) -> String {
            self.file.to_toml_string()
        }

        #[getter]
        fn dt(&self) -> f64 {
            self.file.sim.dt
        }

        #[setter]
        fn set_dt(&mut self, dt: f64) {
            self.file.sim.dt = dt;
        }

        #[getter]
        fn horizon(&self) -> f64 {
            self.file.sim.horizon
        }

        #[setter]
        fn set_horizon(&mut self, horizon: f64) {
            self.file.sim.horizon = horizon;
        }

        #[getter]
        fn seed(&self) -> u64 {
            self.file.sim.seed
        }

        #[setter]
        fn set_seed(&mut self, seed: u64) {
            self.file.sim.seed = seed;
        }

        #[getter]
        fn record_every(&self) -> usize {
            self.file.sim.record_every
        }

        #[setter]
        fn set_record_every(&mut self, n: usize) {
            self.file.sim.record_every = n;
        }

        #[getter]
        fn follower_count(&self) -> usize {
            self.file.followers.len()
        }

        /// Full validation; returns the non-fatal warnings.
        fn validate(&self) -> PyResult<Vec<String>> {
            self.file.build().map(|(_, w)| w).map_err(scenario_err)
        }

        /// Integrates the closed loop. The GIL is released while running.
        fn run(&self, py: Python<'_>) -> PyResult<Trajectory> {
            let (built, _) = self.file.build().map_err(scenario_err)?;
            let traj = py
                .detach(move || simulator::Network::new(built).and_then(|n| n.integrate()))
                .map_err(sim_err)?;
            Ok(Trajectory { inner: traj })
        }

        /// What-if bound composition from a TOML constants document.
        fn compose_bound<'py>(&self, py: Python<'py>, constants_toml: &str) -> PyResult<Bound<'py, PyAny>> {
            let (built, _) = self.file.build().map_err(scenario_err)?;
            let assumed = AssumedConstants::from_toml_str(constants_toml).map_err(value_err)?;
            let report = compose_theorem1_constants(&built, &assumed).map_err(value_err)?;
            to_py(py, &report)
        }

        /// Consensus metrics of a trajectory produced from this scenario's topology.
        fn consensus_metrics<'py>(&self, py: Python<'py>, trajectory: &Trajectory) -> PyResult<Bound<'py, PyAny>> {
            let t = &self.file.topology;
            let topology = GraphTopology::from_edges(t.followers, &t.edges, &t.leader_to).map_err(value_err)?;
            let metrics = consensus_metrics(&trajectory.inner, &topology.laplacian().h_matrix()).map_err(value_err)?;
            to_py(py, &metrics)
        }

        fn __repr__(&self) -> String {
            format!(
                "Scenario(followers={}, dt={}, horizon={}, seed={})",
                self.file.followers.len(),
                self.file.sim.dt,
                self.file.sim.horizon,
                self.file.sim.seed
            )
        }
    }

    /// Recorded samples of a run. Follower and state indices are 1-based.
    #[pyclass(module = "consensus_py")]
    struct Trajectory {
        inner: simulator::Trajectory,
    }

    impl Trajectory {
        fn track(&self, f: usize) -> PyResult<&simulator::FollowerTrack> {
            f.checked_sub(1)
                .and_then(|i| self.inner.followers.get(i))
                .ok_or_else(|| PyIndexError::new_err(format!("no follower {f}")))
        }

        fn column(cols: &[Vec<f64>], k: usize) -> PyResult<Vec<f64>> {
            k.checked_sub(1)
                .and_then(|i| cols.get(i))
                .cloned()
                .ok_or_else(|| PyIndexError::new_err(format!("no step {k}")))
        }
    }

    #[pymethods]
    impl Trajectory {
        #[staticmethod]
        fn read_csv(path: PathBuf) -> PyResult<Self> {
            scenario::read_trajectory_csv(&path)
                .map(|inner| Self { inner })
                .map_err(output_err)
        }

        fn __len__(&self) -> usize {
            self.inner.len()
        }

        #[getter]
        fn times(&self) -> Vec<f64> {
            self.inner.times.clone()
        }

        #[getter]
        fn y_r(&self) -> Vec<f64> {
            self.inner.y_r.clone()
        }

        #[getter]
        fn orders(&self) -> Vec<usize> {
            self.inner.orders()
        }

        fn state(&self, f: usize, k: usize) -> PyResult<Vec<f64>> {
            Self::column(&self.track(f)?.x, k)
        }

        fn estimate(&self, f: usize, k: usize) -> PyResult<Vec<f64>> {
            Self::column(&self.track(f)?.xi_hat, k)
        }

        fn control(&self, f: usize) -> PyResult<Vec<f64>> {
            Ok(self.track(f)?.u.clone())
        }

        fn s1(&self, f: usize) -> PyResult<Vec<f64>> {
            Ok(self.track(f)?.s1.clone())
        }

        fn modes(&self, f: usize) -> PyResult<Vec<usize>> {
            Ok(self.track(f)?.mode.clone())
        }

        fn summary<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
            let summary = TrajectorySummary::from_trajectory(&self.inner).map_err(value_err)?;
            to_py(py, &summary)
        }

        fn h_bound_reports<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
            to_py(py, &self.inner.h_bound_reports)
        }

        /// Finiteness plus optional caps on |x|, Xi-hat and |u|.
        #[pyo3(signature = (state=None, estimate=None, control=None))]
        fn check_boundedness<'py>(
            &self,
            py: Python<'py>,
            state: Option<f64>,
            estimate: Option<f64>,
            control: Option<f64>,
        ) -> PyResult<Bound<'py, PyAny>> {
            let report = check_boundedness(&self.inner, &BoundednessThresholds { state, estimate, control });
            to_py(py, &report)
        }

        /// Writes `<dir>/<stem>.{csv,json,gp}` and returns the paths.
        #[pyo3(signature = (dir, stem="trajectory"))]
        fn write(&self, dir: PathBuf, stem: &str) -> PyResult<Vec<PathBuf>> {
            let formats = [
                scenario::OutputFormat::Csv,
                scenario::OutputFormat::JsonSummary,
                scenario::OutputFormat::GnuplotScript,
            ];
            scenario::write_outputs(&self.inner, &dir, stem, &formats).map_err(output_err)
        }
    }

    #[pyfunction]
    fn odd_pow(z: f64, r: u32) -> PyResult<f64> {
        odd_power::odd_pow(z, r).map_err(value_err)
    }

    #[pyfunction]
    fn solve_l_for_d(r: u32, d: f64) -> PyResult<f64> {
        odd_power::solve_l_for_d(r, d).map_err(value_err)
    }

    /// `{"r", "l", "d", "upsilon_bar"}` for power `r` at parameter `l`.
    #[pyfunction]
    fn separation_coefficients<'py>(py: Python<'py>, r: u32, l: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &odd_power::separation_coefficients(r, l).map_err(value_err)?)
    }

    #[pyfunction]
    fn check_separation_inequality(x1: f64, x2: f64, r: u32, d: f64) -> PyResult<bool> {
        let c = odd_power::coefficients_for_d(r, d).map_err(value_err)?;
        Ok(odd_power::check_separation_inequality(x1, x2, &c))
    }

    #[pyfunction]
    fn check_binomial_envelope(p: f64, r: u32, d: f64) -> PyResult<bool> {
        let c = odd_power::coefficients_for_d(r, d).map_err(value_err)?;
        Ok(odd_power::check_binomial_envelope(p, &c))
    }

    #[pyfunction]
    #[pyo3(signature = (samples=100_000, seed=1))]
    fn verify_lemmas<'py>(py: Python<'py>, samples: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let results = py.detach(|| lemma_suites::run_all(samples, seed));
        to_py(py, &results)
    }

    /// `H`, its determinant, reachability and singular-value diagnostics.
    #[pyfunction]
    fn graph_check<'py>(
        py: Python<'py>,
        followers: usize,
        edges: Vec<[usize; 2]>,
        leader_to: Vec<usize>,
    ) -> PyResult<Bound<'py, PyAny>> {
        #[derive(Serialize)]
        struct Report {
            h: Vec<Vec<i64>>,
            det: i128,
            spanning_tree: bool,
            sigma_min: f64,
            lambda_bound: f64,
        }
        let topology = GraphTopology::from_edges(followers, &edges, &leader_to).map_err(value_err)?;
        let lap = topology.laplacian();
        let report = Report {
            det: lap.det_h(),
            spanning_tree: topology.has_leader_rooted_spanning_tree(),
            sigma_min: min_singular_value(&lap.h_matrix()).map_err(value_err)?,
            lambda_bound: conservative_lambda_min_bound(followers).map_err(value_err)?,
            h: lap.h,
        };
        to_py(py, &report)
    }

    /// `‖φ(z)‖` of a Gaussian basis with the given centers and widths.
    #[pyfunction]
    fn rbf_theta(centers: Vec<Vec<f64>>, widths: Vec<f64>, z: Vec<f64>) -> PyResult<f64> {
        approximators::RbfNetwork::new(centers, widths)
            .and_then(|net| net.theta(&z))
            .map_err(value_err)
    }
}
