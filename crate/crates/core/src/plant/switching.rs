//! Piecewise-constant, right-continuous switching signals `σ_f(t)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SwitchingError {
    #[error("time {0} is negative")]
    NegativeTime(f64),
    #[error("schedule has no segments")]
    Empty,
    #[error("first segment starts at {0}, must start at 0")]
    LateStart(f64),
    #[error("segment {index} starts at {start}, not after the previous one")]
    NotIncreasing { index: usize, start: f64 },
    #[error("segment {index} uses mode {mode}, valid modes are 1..={mode_count}")]
    ModeOutOfRange {
        index: usize,
        mode: usize,
        mode_count: usize,
    },
    #[error("dwell_min must be positive, got {0}")]
    BadDwell(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchingSchedule {
    mode_count: usize,
    /// `(start_time, mode)`, 1-based modes.
    segments: Vec<(f64, usize)>,
}

impl SwitchingSchedule {
    pub fn new(mode_count: usize, segments: Vec<(f64, usize)>) -> Result<Self, SwitchingError> {
        let first = segments.first().ok_or(SwitchingError::Empty)?;
        if first.0 != 0.0 {
            return Err(SwitchingError::LateStart(first.0));
        }
        for (index, w) in segments.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(SwitchingError::NotIncreasing {
                    index: index + 1,
                    start: w[1].0,
                });
            }
        }
        for (index, &(_, mode)) in segments.iter().enumerate() {
            if mode == 0 || mode > mode_count {
                return Err(SwitchingError::ModeOutOfRange {
                    index,
                    mode,
                    mode_count,
                });
            }
        }
        Ok(Self {
            mode_count,
            segments,
        })
    }

    pub fn constant(mode_count: usize, mode: usize) -> Result<Self, SwitchingError> {
        Self::new(mode_count, vec![(0.0, mode)])
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn segments(&self) -> &[(f64, usize)] {
        &self.segments
    }

    /// Mode of the last segment with `start_time <= t`.
    pub fn mode_at(&self, t: f64) -> Result<usize, SwitchingError> {
        if t < 0.0 {
            return Err(SwitchingError::NegativeTime(t));
        }
        let idx = self.segments.partition_point(|&(start, _)| start <= t);
        Ok(self.segments[idx - 1].1)
    }

    /// Switch instants (excluding `t = 0`).
    pub fn switch_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.segments.iter().skip(1).map(|&(s, _)| s)
    }

    /// Same schedule with every start time rounded to the nearest multiple
    /// of `dt`. Segments that collapse onto an earlier grid point are dropped.
    pub fn snapped(&self, dt: f64) -> Self {
        let mut segments: Vec<(f64, usize)> = Vec::with_capacity(self.segments.len());
        for &(start, mode) in &self.segments {
            let snapped = (start / dt).round() * dt;
            match segments.last_mut() {
                Some(last) if snapped <= last.0 => last.1 = mode,
                _ => segments.push((snapped, mode)),
            }
        }
        Self {
            mode_count: self.mode_count,
            segments,
        }
    }
}

/// Seeded schedule on `[0, horizon]`: segment lengths uniform in
/// `[dwell_min, 3·dwell_min]`, modes uniform over `1..=mode_count` with no
/// immediate repeats.
pub fn generate_schedule(
    seed: u64,
    mode_count: usize,
    dwell_min: f64,
    horizon: f64,
) -> Result<SwitchingSchedule, SwitchingError> {
    if !(dwell_min > 0.0 && dwell_min.is_finite()) {
        return Err(SwitchingError::BadDwell(dwell_min));
    }
    if mode_count == 0 {
        return Err(SwitchingError::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mode = rng.random_range(1..=mode_count);
    let mut segments = vec![(0.0, mode)];
    if mode_count == 1 {
        return SwitchingSchedule::new(1, segments);
    }
    let mut t = 0.0;
    loop {
        t += rng.random_range(dwell_min..=3.0 * dwell_min);
        if t >= horizon {
            break;
        }
        // uniform over the other mode_count - 1 modes
        let mut next = rng.random_range(1..mode_count);
        if next >= mode {
            next += 1;
        }
        mode = next;
        segments.push((t, mode));
    }
    SwitchingSchedule::new(mode_count, segments)
}
