use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use consensus_core::analysis::{compose_theorem1_constants, consensus_metrics, AssumedConstants, TrajectorySummary};
use consensus_core::graph::{conservative_lambda_min_bound, min_singular_value};
use consensus_core::lemma_suites;
use consensus_core::scenario::{
    load_scenario_file, paper_scenario_file, read_trajectory_csv, write_outputs, OutputError, ScenarioError,
    ScenarioFile,
};
use consensus_core::simulator::{Network, SimError};

/// Overrides the output directory of `run`, `paper-demo` and `analyze`
/// unless `--out` is given.
const OUT_DIR_ENV: &str = "CONSENSUS_OUT_DIR";

#[derive(Parser)]
#[command(name = "consensus-sim", version, about = "Adaptive consensus tracking for switched power-integrator networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario file and write its trajectory.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized checks of the power inequalities.
    VerifyLemmas {
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Consensus metrics of a recorded trajectory plus the bound calculator.
    Analyze {
        trajectory: PathBuf,
        constants: PathBuf,
        /// Scenario the trajectory came from (defaults to the built-in one).
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the interaction matrix and connectivity diagnostics.
    GraphCheck { scenario: PathBuf },
    /// Run the built-in three-follower scenario end to end.
    PaperDemo {
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Validation(String),
    Runtime(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Runtime(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Runtime(m) | Failure::Io(m) => m,
        }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        match e.exit_code() {
            3 => Failure::Io(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<OutputError> for Failure {
    fn from(e: OutputError) -> Self {
        match e {
            OutputError::Io { .. } => Failure::Io(e.to_string()),
            OutputError::Format { .. } => Failure::Validation(e.to_string()),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Invalid(_) | SimError::Controller { .. } => Failure::Validation(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn out_dir(flag: Option<PathBuf>, fallback: &str) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(fallback))
}

fn simulate(mut file: ScenarioFile, dt: Option<f64>, horizon: Option<f64>, out: Option<PathBuf>) -> Result<(), Failure> {
    if let Some(dt) = dt {
        file.sim.dt = dt;
    }
    if let Some(h) = horizon {
        file.sim.horizon = h;
    }
    let (scenario, warnings) = file.build()?;
    for w in &warnings {
        log::warn!("{w}");
    }
    let dir = out_dir(out, &file.outputs.dir);
    let network = Network::new(scenario)?;
    let started = Instant::now();
    let traj = network.integrate()?;
    let elapsed = started.elapsed();
    for r in &traj.h_bound_reports {
        log::warn!(
            "follower {} step {} mode {}: h left its declared bounds [{}, {}] at {} recorded samples (first at t = {})",
            r.follower,
            r.step,
            r.mode,
            r.lo,
            r.hi,
            r.count,
            r.first_time
        );
    }
    let paths = write_outputs(&traj, &dir, &file.outputs.stem, &file.outputs.formats)?;
    let summary = TrajectorySummary::from_trajectory(&traj).map_err(|e| Failure::Runtime(e.to_string()))?;
    println!(
        "integrated {} s at dt = {} in {:.2} s, {} samples recorded",
        network.scenario().horizon,
        network.scenario().dt,
        elapsed.as_secs_f64(),
        summary.samples
    );
    for s in &summary.followers {
        println!(
            "  follower {}: max |y - y_r| = {:.4e}, final |y - y_r| = {:.4e}, max |u| = {:.4e}, switches = {}",
            s.follower, s.max_abs_tracking_error, s.final_abs_tracking_error, s.max_abs_u, s.mode_switches
        );
    }
    for p in paths {
        println!("  wrote {}", p.display());
    }
    Ok(())
}

fn verify_lemmas(samples: usize, seed: u64) -> Result<(), Failure> {
    let started = Instant::now();
    let results = lemma_suites::run_all(samples, seed);
    println!("{:<30} {:>10} {:>10}  result", "suite", "samples", "violations");
    for r in &results {
        println!(
            "{:<30} {:>10} {:>10}  {}",
            r.name,
            r.samples,
            r.violations,
            if r.passed() { "pass" } else { "FAIL" }
        );
        if let Some(v) = &r.first_violation {
            println!("    first violation: {v}");
        }
    }
    println!("({:.2} s)", started.elapsed().as_secs_f64());
    if results.iter().all(|r| r.passed()) {
        Ok(())
    } else {
        Err(Failure::Validation("inequality violations found".into()))
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn analyze(trajectory: PathBuf, constants: PathBuf, scenario: Option<PathBuf>, out: Option<PathBuf>) -> Result<(), Failure> {
    let file = match &scenario {
        Some(p) => load_scenario_file(p)?,
        None => paper_scenario_file(),
    };
    let (scenario, _) = file.build()?;
    let traj = read_trajectory_csv(&trajectory)?;
    let assumed = AssumedConstants::from_toml_str(&read_text(&constants)?)
        .map_err(|e| Failure::Validation(format!("{}: {e}", constants.display())))?;

    let h = scenario.topology.laplacian().h_matrix();
    let metrics = consensus_metrics(&traj, &h).map_err(|e| Failure::Validation(e.to_string()))?;
    let report = compose_theorem1_constants(&scenario, &assumed).map_err(|e| Failure::Validation(e.to_string()))?;

    let dir = out_dir(out, &file.outputs.dir);
    std::fs::create_dir_all(&dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    let report_path = dir.join("bound_report.json");
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    std::fs::write(&report_path, format!("{json}\n")).map_err(|e| Failure::Io(format!("{}: {e}", report_path.display())))?;

    let metrics_path = dir.join("metrics.csv");
    let io_err = |e: std::io::Error| Failure::Io(format!("{}: {e}", metrics_path.display()));
    let mut w = std::io::BufWriter::new(std::fs::File::create(&metrics_path).map_err(io_err)?);
    let n = traj.followers.len();
    let mut header = vec!["t".to_string(), "s1_norm".into(), "delta_envelope".into(), "conservative_envelope".into()];
    header.extend((1..=n).map(|f| format!("e{f}")));
    writeln!(w, "{}", header.join(",")).map_err(io_err)?;
    for i in 0..metrics.times.len() {
        let mut row = vec![
            metrics.times[i].to_string(),
            metrics.s1_norm[i].to_string(),
            metrics.delta_envelope[i].to_string(),
            metrics.conservative_envelope[i].to_string(),
        ];
        row.extend(metrics.tracking_error.iter().map(|e| e[i].to_string()));
        writeln!(w, "{}", row.join(",")).map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;

    println!("{json}");
    println!("max ||s1|| = {:.4e}, final ||s1|| = {:.4e}", metrics.max_s1_norm, metrics.final_s1_norm);
    for (f, (mx, fin)) in metrics
        .max_abs_tracking_error
        .iter()
        .zip(&metrics.final_abs_tracking_error)
        .enumerate()
    {
        println!("  follower {}: max |y - y_r| = {mx:.4e}, final = {fin:.4e}", f + 1);
    }
    if !report.feasible {
        for s in report.infeasible_steps() {
            println!(
                "  infeasible: follower {} step {}: c - theta - vartheta_prev = {:.4e} <= 0",
                s.follower, s.step, s.margin
            );
        }
    }
    println!("wrote {} and {}", report_path.display(), metrics_path.display());
    Ok(())
}

fn graph_check(path: PathBuf) -> Result<(), Failure> {
    let file = load_scenario_file(&path)?;
    let topo = &file.topology;
    let topology = consensus_core::graph::GraphTopology::from_edges(topo.followers, &topo.edges, &topo.leader_to)
        .map_err(|e| Failure::Validation(e.to_string()))?;
    let lap = topology.laplacian();
    println!("H = L + B:");
    for row in &lap.h {
        println!("  {row:?}");
    }
    let det = lap.det_h();
    let sigma = min_singular_value(&lap.h_matrix()).map_err(|e| Failure::Validation(e.to_string()))?;
    let bound = conservative_lambda_min_bound(topology.follower_count()).map_err(|e| Failure::Validation(e.to_string()))?;
    let tree = topology.has_leader_rooted_spanning_tree();
    println!("det(H) = {det}");
    println!("leader-rooted spanning tree: {tree}");
    println!("min singular value of H: {sigma:.6}");
    println!("topology-free lower bound: {bound:.6}");
    match file.build() {
        Ok((_, warnings)) => warnings.iter().for_each(|w| println!("warning: {w}")),
        Err(e) => println!("note: the rest of the scenario does not validate:\n{e}"),
    }
    if tree && det != 0 {
        Ok(())
    } else {
        Err(Failure::Validation("the leader cannot reach every follower".into()))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            scenario,
            dt,
            horizon,
            out,
        } => load_scenario_file(&scenario)
            .map_err(Failure::from)
            .and_then(|file| simulate(file, dt, horizon, out)),
        Command::VerifyLemmas { samples, seed } => verify_lemmas(samples, seed),
        Command::Analyze {
            trajectory,
            constants,
            scenario,
            out,
        } => analyze(trajectory, constants, scenario, out),
        Command::GraphCheck { scenario } => graph_check(scenario),
        Command::PaperDemo { dt, horizon, out } => simulate(paper_scenario_file(), dt, horizon, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
