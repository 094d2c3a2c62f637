//! Trajectory serialization: CSV samples, a JSON summary and a gnuplot
//! script laid out as switching signals / outputs and inputs / estimates.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::TrajectorySummary;
use crate::simulator::{HBoundReport, Trajectory};

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl OutputError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        OutputError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn format(path: &Path, message: impl Into<String>) -> Self {
        OutputError::Format {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    JsonSummary,
    GnuplotScript,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::JsonSummary => "json",
            OutputFormat::GnuplotScript => "gp",
        }
    }
}

pub fn csv_header(orders: &[usize]) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for (f, &n) in orders.iter().enumerate() {
        let f = f + 1;
        h.extend((1..=n).map(|j| format!("f{f}_x{j}")));
        h.extend((1..=n).map(|j| format!("f{f}_xi{j}")));
        h.push(format!("f{f}_u"));
        h.push(format!("f{f}_s1"));
        h.push(format!("f{f}_mode"));
    }
    h.push("y_r".into());
    h
}

fn csv_error(path: &Path, e: csv::Error) -> OutputError {
    let message = e.to_string();
    match e.into_kind() {
        csv::ErrorKind::Io(io) => OutputError::io(path, io),
        _ => OutputError::format(path, message),
    }
}

fn write_csv(traj: &Trajectory, path: &Path) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(csv_header(&traj.orders())).map_err(|e| csv_error(path, e))?;
    let mut row: Vec<String> = Vec::new();
    for i in 0..traj.times.len() {
        row.clear();
        row.push(traj.times[i].to_string());
        for tr in &traj.followers {
            row.extend(tr.x.iter().map(|c| c[i].to_string()));
            row.extend(tr.xi_hat.iter().map(|c| c[i].to_string()));
            row.push(tr.u[i].to_string());
            row.push(tr.s1[i].to_string());
            row.push(tr.mode[i].to_string());
        }
        row.push(traj.y_r[i].to_string());
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| OutputError::io(path, e))
}

#[derive(Serialize)]
struct JsonSummary<'a> {
    #[serde(flatten)]
    summary: TrajectorySummary,
    h_bound_reports: &'a [HBoundReport],
}

fn write_json_summary(traj: &Trajectory, path: &Path) -> Result<(), OutputError> {
    let summary =
        TrajectorySummary::from_trajectory(traj).map_err(|e| OutputError::format(path, e.to_string()))?;
    let file = File::create(path).map_err(|e| OutputError::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(
        &mut w,
        &JsonSummary {
            summary,
            h_bound_reports: &traj.h_bound_reports,
        },
    )
    .map_err(|e| OutputError::format(path, e.to_string()))?;
    w.write_all(b"\n").map_err(|e| OutputError::io(path, e))?;
    w.flush().map_err(|e| OutputError::io(path, e))
}

fn gnuplot_script(orders: &[usize], csv_name: &str) -> String {
    let n = orders.len();
    let mut s = String::new();
    let col = |name: String| format!("(column(\"{name}\"))");
    let _ = writeln!(s, "# gnuplot -persist {}", csv_name.replace(".csv", ".gp"));
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "data = '{csv_name}'");
    let _ = writeln!(s, "set xlabel 't (s)'");
    let _ = writeln!(s);

    let _ = writeln!(s, "set terminal pngcairo size 900,{} noenhanced", 220 * n.max(1));
    let _ = writeln!(s, "set output 'switching.png'");
    let _ = writeln!(s, "set multiplot layout {n},1 title 'switching signals'");
    for f in 1..=n {
        let _ = writeln!(s, "set ytics 1");
        let _ = writeln!(
            s,
            "plot data using {}:{} with steps title 'sigma_{f}'",
            col("t".into()),
            col(format!("f{f}_mode"))
        );
    }
    let _ = writeln!(s, "unset multiplot");
    let _ = writeln!(s, "set ytics autofreq");
    let _ = writeln!(s);

    let _ = writeln!(s, "set terminal pngcairo size 900,600 noenhanced");
    let _ = writeln!(s, "set output 'tracking.png'");
    let _ = writeln!(s, "set multiplot layout 2,1");
    let outputs: Vec<String> = (1..=n)
        .map(|f| format!("data using {}:{} with lines title 'y_{f}'", col("t".into()), col(format!("f{f}_x1"))))
        .chain([format!("data using {}:{} with lines dt 2 title 'y_r'", col("t".into()), col("y_r".into()))])
        .collect();
    let _ = writeln!(s, "set title 'outputs and leader'");
    let _ = writeln!(s, "plot {}", outputs.join(", \\\n     "));
    let inputs: Vec<String> = (1..=n)
        .map(|f| format!("data using {}:{} with lines title 'u_{f}'", col("t".into()), col(format!("f{f}_u"))))
        .collect();
    let _ = writeln!(s, "set title 'control inputs'");
    let _ = writeln!(s, "plot {}", inputs.join(", \\\n     "));
    let _ = writeln!(s, "unset multiplot");
    let _ = writeln!(s);

    let max_n = orders.iter().copied().max().unwrap_or(0);
    let _ = writeln!(s, "set terminal pngcairo size 900,{} noenhanced", 300 * max_n.max(1));
    let _ = writeln!(s, "set output 'estimates.png'");
    let _ = writeln!(s, "set multiplot layout {},1", max_n.max(1));
    for k in 1..=max_n {
        let curves: Vec<String> = orders
            .iter()
            .enumerate()
            .filter(|(_, &nf)| nf >= k)
            .map(|(f, _)| {
                format!(
                    "data using {}:{} with lines title 'xi_hat_{},{k}'",
                    col("t".into()),
                    col(format!("f{}_xi{k}", f + 1)),
                    f + 1
                )
            })
            .collect();
        let _ = writeln!(s, "set title 'adaptive estimates, step {k}'");
        let _ = writeln!(s, "plot {}", curves.join(", \\\n     "));
    }
    let _ = writeln!(s, "unset multiplot");
    s
}

fn write_gnuplot(traj: &Trajectory, path: &Path) -> Result<(), OutputError> {
    let csv_name = path
        .with_extension("csv")
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "trajectory.csv".into());
    std::fs::write(path, gnuplot_script(&traj.orders(), &csv_name)).map_err(|e| OutputError::io(path, e))
}

pub fn write_trajectory(traj: &Trajectory, format: OutputFormat, path: &Path) -> Result<(), OutputError> {
    match format {
        OutputFormat::Csv => write_csv(traj, path),
        OutputFormat::JsonSummary => write_json_summary(traj, path),
        OutputFormat::GnuplotScript => write_gnuplot(traj, path),
    }
}

/// Writes `<dir>/<stem>.<ext>` for every requested format, creating `dir`.
pub fn write_outputs(
    traj: &Trajectory,
    dir: &Path,
    stem: &str,
    formats: &[OutputFormat],
) -> Result<Vec<PathBuf>, OutputError> {
    std::fs::create_dir_all(dir).map_err(|e| OutputError::io(dir, e))?;
    formats
        .iter()
        .map(|&fmt| {
            let path = dir.join(format!("{stem}.{}", fmt.extension()));
            write_trajectory(traj, fmt, &path).map(|()| path)
        })
        .collect()
}

/// Follower orders implied by a header, checked against the canonical layout.
fn orders_from_header(header: &csv::StringRecord) -> Option<Vec<usize>> {
    let mut orders = Vec::new();
    for f in 1.. {
        let prefix = format!("f{f}_x");
        let n = header
            .iter()
            .filter(|h| h.strip_prefix(&prefix).is_some_and(|j| j.parse::<usize>().is_ok()))
            .count();
        if n == 0 {
            break;
        }
        orders.push(n);
    }
    let expected = csv_header(&orders);
    (header.len() == expected.len() && header.iter().zip(&expected).all(|(a, b)| a == b)).then_some(orders)
}

pub fn read_trajectory_csv(path: &Path) -> Result<Trajectory, OutputError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = r.headers().map_err(|e| csv_error(path, e))?.clone();
    let orders = orders_from_header(&header)
        .ok_or_else(|| OutputError::format(path, "header is not a trajectory header"))?;
    let mut traj = Trajectory::empty(&orders);
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let bad = |col: usize| OutputError::format(path, format!("row {}: bad value in column {}", line + 1, col + 1));
        let num = |col: usize| -> Result<f64, OutputError> {
            rec.get(col).and_then(|s| s.parse::<f64>().ok()).ok_or_else(|| bad(col))
        };
        let mut col = 0;
        traj.times.push(num(col)?);
        col += 1;
        for (tr, &n) in traj.followers.iter_mut().zip(&orders) {
            for k in 0..n {
                tr.x[k].push(num(col)?);
                col += 1;
            }
            for k in 0..n {
                tr.xi_hat[k].push(num(col)?);
                col += 1;
            }
            tr.u.push(num(col)?);
            tr.s1.push(num(col + 1)?);
            let mode = rec.get(col + 2).and_then(|s| s.parse::<usize>().ok()).ok_or_else(|| bad(col + 2))?;
            tr.mode.push(mode);
            col += 3;
        }
        traj.y_r.push(num(col)?);
    }
    Ok(traj)
}
