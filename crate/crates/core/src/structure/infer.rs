//! Reconstruction of a structure from a family sampled on an `(x, t)` grid.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{canonicalize, validate_structure, Domain, Structure, ValidationFault};
use crate::par::{self, Execution};
use crate::paths::{polyline_inverse, GeneratingPath, Interval, PathError, PathRule};
use crate::process::{check_path_shape, evaluate, PathSample, ProcessError};
use crate::report::{PropertyReport, Verdict, Witness};

/// Values `values[i][j] = f(xs[i], ts[j])` of a process family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFamily {
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl SampledFamily {
    pub fn from_fn(f: impl Fn(f64, f64) -> f64 + Sync, xs: Vec<f64>, ts: Vec<f64>, exec: Execution) -> Self {
        let values = par::map(exec, &xs, |&x| ts.iter().map(|&t| f(x, t)).collect());
        SampledFamily { xs, ts, values }
    }

    fn row_sample(&self, i: usize) -> PathSample {
        PathSample {
            start_x: self.xs[i],
            horizon: *self.ts.last().unwrap_or(&0.0),
            times: self.ts.clone(),
            values: self.values[i].clone(),
            refinement_level: 0,
        }
    }

    fn check(&self) -> Result<(), InferError> {
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if self.xs.len() < 2 || !increasing(&self.xs) || self.xs.iter().any(|x| !x.is_finite()) {
            return Err(InferError::BadGrid("need at least two finite, strictly increasing x values".into()));
        }
        if self.ts.len() < 2 || self.ts[0] != 0.0 || !increasing(&self.ts) || !self.ts.iter().all(|t| t.is_finite()) {
            return Err(InferError::BadGrid("times must start at 0 and increase strictly".into()));
        }
        if self.values.len() != self.xs.len() || self.values.iter().any(|r| r.len() != self.ts.len()) {
            return Err(InferError::BadGrid("value table does not match the grid".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InferError {
    #[error("bad grid: {0}")]
    BadGrid(String),
    #[error("not a Hunt structure: trajectory from {} is not monotone-then-constant", .0.witnesses.first().map_or(f64::NAN, |w| w.inputs[0]))]
    NotHunt(PropertyReport),
    #[error("inferred candidate is invalid: {}", .0.iter().map(|f| f.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<ValidationFault>),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Process(#[from] ProcessError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferenceOutcome {
    pub structure: Structure,
    pub report: PropertyReport,
    /// `Some(a)` when every trajectory is `x + a t` within tolerance.
    pub levy_slope: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Motion {
    Up,
    Down,
    Still,
}

/// Classifies the initial motion of every sampled trajectory, groups runs
/// into domains and fits piecewise-linear generating paths by stitching the
/// trajectories of each monotone run. The report carries the largest
/// relative deviation between the samples and the candidate.
pub fn infer_structure(fam: &SampledFamily, tol: f64, exec: Execution) -> Result<InferenceOutcome, InferError> {
    fam.check()?;
    if !(tol > 0.0) {
        return Err(InferError::Path(PathError::BadTolerance(tol)));
    }
    let shapes = par::map_range(exec, fam.xs.len(), |i| check_path_shape(&fam.row_sample(i), tol));
    if let Some(bad) = shapes.iter().find(|s| s.report.verdict == Verdict::Fails) {
        return Err(InferError::NotHunt(bad.report.clone()));
    }

    if let Some(a) = levy_slope(fam, tol) {
        let domain = if a.abs() <= tol {
            Domain::constant(Interval::real_line())
        } else {
            Domain::from_path(GeneratingPath::linear(a, 0.0)?)
        };
        let s = validate_structure(vec![domain]).map_err(InferError::Invalid)?;
        let report = residual_report(fam, &s, tol, exec)?.with_note(format!("linear family, slope {a}"));
        return Ok(InferenceOutcome { structure: canonicalize(&s), report, levy_slope: Some(a) });
    }

    let motions: Vec<Motion> = fam
        .xs
        .iter()
        .zip(&fam.values)
        .map(|(&x, row)| {
            let d = row[1] - x;
            let thr = tol * (1.0 + x.abs());
            if d > thr {
                Motion::Up
            } else if d < -thr {
                Motion::Down
            } else {
                Motion::Still
            }
        })
        .collect();

    let mut runs: Vec<(Motion, usize, usize)> = Vec::new();
    for (i, &m) in motions.iter().enumerate() {
        match runs.last_mut() {
            Some((rm, _, end)) if *rm == m => *end = i,
            _ => runs.push((m, i, i)),
        }
    }

    // boundaries: (value, owned by the lower side), plus inserted meeting points
    let mut domains = Vec::new();
    let mut lower: (f64, bool) = (f64::NEG_INFINITY, false);
    for (r, &(m, a, b)) in runs.iter().enumerate() {
        let next = runs.get(r + 1);
        let upper: (f64, bool, Option<f64>) = match (m, next) {
            (_, None) => (f64::INFINITY, false, None),
            (Motion::Still, Some(_)) => (fam.xs[b], true, None),
            (_, Some((Motion::Still, c, _))) => (fam.xs[*c], false, None),
            (Motion::Down, Some(_)) => (0.5 * (fam.xs[b] + fam.xs[b + 1]), true, None),
            (Motion::Up, Some(_)) => {
                let c = meeting_point(fam, b);
                (c, false, Some(c))
            }
        };
        let j = Interval::new(lower.0, upper.0, lower.1, upper.1)?;
        let domain = match m {
            Motion::Still => Domain::constant(j),
            Motion::Up | Motion::Down => fit_domain(fam, &shapes_t0(&shapes, a, b), a, b, m, j)?,
        };
        domains.push(domain);
        lower = match upper.2 {
            Some(c) => {
                domains.push(Domain::constant(Interval::point(c)?));
                (c, false)
            }
            None => (upper.0, !upper.1),
        };
    }

    let s = validate_structure(domains).map_err(InferError::Invalid)?;
    let report = residual_report(fam, &s, tol, exec)?;
    Ok(InferenceOutcome { structure: canonicalize(&s), report, levy_slope: None })
}

fn shapes_t0(shapes: &[crate::process::ShapeOutcome], a: usize, b: usize) -> Vec<Option<f64>> {
    shapes[a..=b].iter().map(|s| s.t0).collect()
}

/// Least-squares slope `a` when every sample is `x + a t` within tolerance.
fn levy_slope(fam: &SampledFamily, tol: f64) -> Option<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for (&x, row) in fam.xs.iter().zip(&fam.values) {
        for (&t, &v) in fam.ts.iter().zip(row) {
            num += (v - x) * t;
            den += t * t;
        }
    }
    let a = num / den;
    let fits = fam
        .xs
        .iter()
        .zip(&fam.values)
        .all(|(&x, row)| fam.ts.iter().zip(row).all(|(&t, &v)| (v - x - a * t).abs() <= tol * (1.0 + v.abs())));
    fits.then_some(a)
}

/// Where the increasing trajectory from `xs[b]` and the decreasing one from
/// `xs[b + 1]` come to rest.
fn meeting_point(fam: &SampledFamily, b: usize) -> f64 {
    let below = fam.values[b].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let above = fam.values[b + 1].iter().copied().fold(f64::INFINITY, f64::min);
    if below <= above {
        0.5 * (below + above)
    } else {
        0.5 * (fam.xs[b] + fam.xs[b + 1])
    }
}

/// Fits a polyline path through the stitched trajectories of rows `a..=b`.
fn fit_domain(
    fam: &SampledFamily,
    t0s: &[Option<f64>],
    a: usize,
    b: usize,
    motion: Motion,
    j: Interval,
) -> Result<Domain, InferError> {
    let sign = if motion == Motion::Up { 1.0 } else { -1.0 };
    let rows: Vec<usize> = if motion == Motion::Up { (a..=b).collect() } else { (a..=b).rev().collect() };
    let mut nodes: Vec<(f64, f64)> = Vec::new();
    for &i in &rows {
        let x = fam.xs[i];
        let sigma = if nodes.len() >= 2 { polyline_inverse(&nodes, x) } else { 0.0 };
        let moving_until = t0s[i - a].unwrap_or(f64::INFINITY);
        let mut fresh: Vec<(f64, f64)> = fam
            .ts
            .iter()
            .zip(&fam.values[i])
            .filter(|(&t, _)| t < moving_until)
            .map(|(&t, &v)| (sigma + t, v))
            .filter(|(_, v)| j.contains(*v))
            .collect();
        if fresh.is_empty() {
            continue;
        }
        nodes.append(&mut fresh);
        nodes.sort_by(|p, q| p.0.total_cmp(&q.0));
        nodes = monotone_subsequence(&nodes, sign);
    }
    let rule = if nodes.len() >= 2 {
        PathRule::polyline(nodes.clone())?
    } else {
        let slope = (fam.values[a][1] - fam.xs[a]) / fam.ts[1];
        PathRule::Linear { slope, intercept: fam.xs[a] }
    };
    let inverse = |v: f64| match &rule {
        PathRule::Polyline(n) => polyline_inverse(n, v),
        PathRule::Linear { slope, intercept } => (v - intercept) / slope,
        _ => unreachable!(),
    };
    // J endpoints reached at the low / high end of I
    let (first, first_closed, last, last_closed) =
        if sign > 0.0 { (j.lo, j.lo_closed, j.hi, j.hi_closed) } else { (j.hi, j.hi_closed, j.lo, j.lo_closed) };
    let lo = if first.is_finite() { inverse(first) } else { f64::NEG_INFINITY };
    let hi = if last.is_finite() { inverse(last) } else { f64::INFINITY };
    let i = Interval::new(lo, hi, first_closed, last_closed)?;
    let path = GeneratingPath::new(rule, i, j)?;
    Domain::monotone(j, path).map_err(|e| InferError::BadGrid(e.to_string()))
}

/// Keeps nodes with strictly increasing abscissa and strictly monotone values.
fn monotone_subsequence(nodes: &[(f64, f64)], sign: f64) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(nodes.len());
    for &(s, v) in nodes {
        match out.last() {
            Some(&(ps, pv)) if s - ps <= 1e-12 * (1.0 + s.abs()) || (v - pv) * sign <= 0.0 => {}
            _ => out.push((s, v)),
        }
    }
    out
}

fn residual_report(fam: &SampledFamily, s: &Structure, tol: f64, exec: Execution) -> Result<PropertyReport, InferError> {
    let rows = par::map_range(exec, fam.xs.len(), |i| -> Result<(f64, Option<Witness>), ProcessError> {
        let x = fam.xs[i];
        let mut worst = (0.0f64, None);
        for (&t, &v) in fam.ts.iter().zip(&fam.values[i]) {
            let e = evaluate(s, x, t)?;
            let dev = (e - v).abs() / (1.0 + v.abs());
            if dev > worst.0 {
                worst = (dev, Some(Witness { inputs: vec![x, t], observed: e, expected: v }));
            }
        }
        Ok(worst)
    });
    let mut residual = 0.0f64;
    let mut witnesses = Vec::new();
    for r in rows {
        let (dev, w) = r?;
        residual = residual.max(dev);
        if dev > tol {
            witnesses.extend(w);
        }
    }
    let verdict = Verdict::from_bool(witnesses.is_empty());
    Ok(PropertyReport::new("inference", verdict, residual).with_witnesses(witnesses))
}
