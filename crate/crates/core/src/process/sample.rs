use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{ProcessError, ProcessFamily};
use crate::par::{self, Execution};

/// A trajectory sampled on the dyadic grid `T * i / 2^level`, `i = 0..=2^level`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub start_x: f64,
    pub horizon: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub refinement_level: u32,
}

fn grid_time(horizon: f64, i: usize, n: usize) -> f64 {
    // i / n is an exact dyadic, so the same point has the same time at every level
    horizon * (i as f64 / n as f64)
}

/// Samples `t -> X_t^x` on `[0, horizon]` at `2^level + 1` points.
pub fn sample_path<F: ProcessFamily + ?Sized>(
    family: &F,
    x: f64,
    horizon: f64,
    level: u32,
    exec: Execution,
) -> Result<PathSample, ProcessError> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(ProcessError::BadTime(horizon));
    }
    if level > 30 {
        return Err(ProcessError::Integrity(format!("refinement level {level} exceeds 30")));
    }
    let n = 1usize << level;
    let times: Vec<f64> = (0..=n).map(|i| grid_time(horizon, i, n)).collect();
    let values = par::map(exec, &times, |&t| family.position(x, t)).into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(PathSample { start_x: x, horizon, times, values, refinement_level: level })
}

impl PathSample {
    /// The sample at `level + 1`: midpoints are inserted and evaluated,
    /// existing values are kept bit for bit.
    pub fn refine<F: ProcessFamily + ?Sized>(&self, family: &F, exec: Execution) -> Result<PathSample, ProcessError> {
        let level = self.refinement_level + 1;
        if level > 30 {
            return Err(ProcessError::Integrity(format!("refinement level {level} exceeds 30")));
        }
        let n = 1usize << level;
        let mids: Vec<f64> = (0..n / 2).map(|k| grid_time(self.horizon, 2 * k + 1, n)).collect();
        let new_values =
            par::map(exec, &mids, |&t| family.position(self.start_x, t)).into_iter().collect::<Result<Vec<_>, _>>()?;
        let mut times = Vec::with_capacity(n + 1);
        let mut values = Vec::with_capacity(n + 1);
        for k in 0..n / 2 {
            times.push(self.times[k]);
            values.push(self.values[k]);
            times.push(mids[k]);
            values.push(new_values[k]);
        }
        times.push(self.times[n / 2]);
        values.push(self.values[n / 2]);
        Ok(PathSample { start_x: self.start_x, horizon: self.horizon, times, values, refinement_level: level })
    }

    /// The values at a coarser level, taking every `2^(level - coarse)`-th point.
    pub fn coarsened_values(&self, coarse: u32) -> Vec<f64> {
        let stride = 1usize << (self.refinement_level - coarse.min(self.refinement_level));
        self.values.iter().step_by(stride).copied().collect()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Two columns `t,value` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,value\n");
        for (t, v) in self.times.iter().zip(&self.values) {
            let _ = writeln!(out, "{t:.16e},{v:.16e}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_level_one() {
        let ps = sample_path(&|x: f64, t: f64| x + t, 0.0, 1.0, 1, Execution::Sequential).unwrap();
        assert_eq!(ps.values, vec![0.0, 0.5, 1.0]);
        assert_eq!(ps.times, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn refinement_keeps_values() {
        let f = |x: f64, t: f64| (x + t).sin();
        let coarse = sample_path(&f, 0.3, 3.0, 4, Execution::Parallel).unwrap();
        let fine = coarse.refine(&f, Execution::Parallel).unwrap();
        let direct = sample_path(&f, 0.3, 3.0, 5, Execution::Sequential).unwrap();
        assert_eq!(fine, direct);
        assert_eq!(fine.coarsened_values(4), coarse.values);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let ps = sample_path(&|x: f64, t: f64| x + t, 0.0, 1.0, 1, Execution::Sequential).unwrap();
        let csv = ps.to_csv();
        assert!(csv.starts_with("t,value\n0.0000000000000000e0,"));
        assert_eq!(csv.lines().count(), 4);
    }
}
