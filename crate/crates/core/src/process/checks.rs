use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use super::{evaluate, linspace, sample_path, GridConfig, PathSample, ProcessError, ProcessFamily};
use crate::par::{self, Execution};
use crate::paths::Direction;
use crate::report::{PropertyReport, Verdict, Witness};
use crate::structure::Structure;

/// Variation estimates above this count as divergent.
pub const VARIATION_CAP: f64 = 1e6;
/// Relative increment between the last two levels below which the
/// variation estimate counts as stabilized.
pub const STABLE_REL_INCREMENT: f64 = 1e-3;
/// Minimum shrink factor of the largest gap per refinement.
const GAP_SHRINK: f64 = 1.5;
/// Number of largest gaps followed by the zoom.
const ZOOM_CANDIDATES: usize = 16;
/// A zoomed gap that shrank by this factor is attributed to a continuous function.
const ZOOM_SHRINK: f64 = 1e-3;
const ZOOM_STEPS: u32 = 60;

fn rel_dev(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

/// Max over the grid of `|X(X(x, t1), t2) - X(x, t1 + t2)|`; holds when it is at most `tol`.
pub fn flow_law_residual(
    s: &Structure,
    xs: &[f64],
    ts: &[f64],
    tol: f64,
    exec: Execution,
) -> Result<PropertyReport, ProcessError> {
    let rows = par::map(exec, xs, |&x| -> Result<Vec<(f64, Witness)>, ProcessError> {
        let mut out = Vec::with_capacity(ts.len() * ts.len());
        for &t1 in ts {
            let mid = evaluate(s, x, t1)?;
            for &t2 in ts {
                let two_step = evaluate(s, mid, t2)?;
                let direct = evaluate(s, x, t1 + t2)?;
                out.push(((two_step - direct).abs(), Witness { inputs: vec![x, t1, t2], observed: two_step, expected: direct }));
            }
        }
        Ok(out)
    });
    let mut all = Vec::new();
    for r in rows {
        all.extend(r?);
    }
    let residual = all.iter().map(|(d, _)| *d).fold(0.0, f64::max);
    all.sort_by(|a, b| b.0.total_cmp(&a.0));
    let worst: Vec<Witness> = all.into_iter().take(4).map(|(_, w)| w).collect();
    let verdict = Verdict::from_bool(residual <= tol);
    let worst = if verdict == Verdict::Fails { worst } else { Vec::new() };
    Ok(PropertyReport::new("flow_law", verdict, residual).with_witnesses(worst))
}

/// Two trajectories that meet: `X_s^x = X_t^y`. Homogeneity demands
/// `X_{s+h}^x = X_{t+h}^y` for every `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityProbe {
    pub x: f64,
    pub y: f64,
    pub s: f64,
    pub t: f64,
    pub hs: Vec<f64>,
}

/// Probes `x = path(path^{-1}(z) - t)`, `y = z`: the trajectory from `x`
/// meets `z` after time `t`. `t` is halved until the preimage stays in
/// the parameter interval; starting points in constant domains use `x = z`.
pub fn homogeneity_probes(s: &Structure, count: usize, cfg: &GridConfig) -> Vec<HomogeneityProbe> {
    const LAGS: [f64; 8] = [1.0 / 16.0, 1.0 / 8.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0];
    let n_z = count.div_ceil(LAGS.len()).max(1);
    let zs = linspace(cfg.x_lo, cfg.x_hi, n_z);
    let hs = vec![0.125, 0.5, 1.0, 2.0];
    let mut probes = Vec::with_capacity(n_z * LAGS.len());
    for &z in &zs {
        for &lag in &LAGS {
            if probes.len() == count {
                return probes;
            }
            let (x, meet) = preimage(s, z, lag * cfg.horizon / 4.0);
            probes.push(HomogeneityProbe { x, y: z, s: meet, t: 0.0, hs: hs.clone() });
        }
    }
    probes
}

fn preimage(s: &Structure, z: f64, lag: f64) -> (f64, f64) {
    let d = s.domain(s.locate(z).index);
    let Some(path) = d.path() else {
        return (z, lag);
    };
    let Ok(sigma) = path.invert_precise(z) else {
        return (z, 0.0);
    };
    let mut lag = lag;
    for _ in 0..40 {
        let tau = sigma - lag;
        if path.domain().contains(tau) {
            return (path.eval_unchecked(tau), lag);
        }
        lag *= 0.5;
    }
    (z, 0.0)
}

/// Checks `X_{s+h}^x = X_{t+h}^y` on meeting probes, relative to `1 + |value|`.
/// Probes whose trajectories do not meet within `tol` are rejected and make
/// the verdict inconclusive.
pub fn check_time_homogeneity<F: ProcessFamily + ?Sized>(
    family: &F,
    probes: &[HomogeneityProbe],
    tol: f64,
    exec: Execution,
) -> Result<PropertyReport, ProcessError> {
    let results = par::map(exec, probes, |p| -> Result<(bool, f64, Vec<Witness>), ProcessError> {
        let a = family.position(p.x, p.s)?;
        let b = family.position(p.y, p.t)?;
        if rel_dev(a, b) > tol {
            return Ok((false, 0.0, vec![]));
        }
        let mut worst = 0.0f64;
        let mut witnesses = Vec::new();
        for &h in &p.hs {
            let u = family.position(p.x, p.s + h)?;
            let v = family.position(p.y, p.t + h)?;
            let dev = rel_dev(u, v);
            worst = worst.max(dev);
            if dev > tol {
                witnesses.push(Witness { inputs: vec![p.x, p.y, p.s, p.t, h], observed: u, expected: v });
            }
        }
        Ok((true, worst, witnesses))
    });
    let mut residual = 0.0f64;
    let mut rejected = 0usize;
    let mut witnesses = Vec::new();
    for r in results {
        let (accepted, worst, w) = r?;
        if !accepted {
            rejected += 1;
        }
        residual = residual.max(worst);
        witnesses.extend(w);
    }
    let verdict = if !witnesses.is_empty() {
        Verdict::Fails
    } else if rejected > 0 || probes.is_empty() {
        Verdict::Inconclusive
    } else {
        Verdict::Holds
    };
    let mut report = PropertyReport::new("homogeneity", verdict, residual).with_witnesses(witnesses);
    if rejected > 0 {
        report = report.with_note(format!("{rejected} of {} probes rejected: trajectories do not meet", probes.len()));
    }
    Ok(report)
}

/// Result of [`check_path_shape`]. `t0` is the start of the constant tail,
/// `None` when the path still moves at the end of the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeOutcome {
    pub report: PropertyReport,
    pub t0: Option<f64>,
    pub direction: Option<Direction>,
}

/// Tests that a sampled path is strictly monotone up to some `t0` and
/// constant afterwards. Steps smaller than `tol * (1 + |value|)` count as
/// constant.
pub fn check_path_shape(ps: &PathSample, tol: f64) -> ShapeOutcome {
    let (t, v) = (&ps.times, &ps.values);
    let mut direction: Option<i8> = None;
    let mut flat_since: Option<usize> = None;
    let fail = |inputs: [usize; 3], note: &str, direction: Option<i8>| {
        let [a, b, c] = inputs;
        let witness =
            Witness { inputs: vec![ps.start_x, t[a], t[b], t[c]], observed: v[c], expected: v[b] };
        let residual = (v[c] - v[b]).abs();
        ShapeOutcome {
            report: PropertyReport::fails("path_shape", residual, witness).with_note(note.to_string()),
            t0: None,
            direction: direction.map(to_direction),
        }
    };
    for k in 0..v.len().saturating_sub(1) {
        let d = v[k + 1] - v[k];
        if d.is_nan() {
            return fail([k, k, k + 1], "path value is not a number", direction);
        }
        let thr = tol * (1.0 + v[k].abs().max(v[k + 1].abs()));
        let class: i8 = if d > thr {
            1
        } else if d < -thr {
            -1
        } else {
            0
        };
        if class == 0 {
            flat_since.get_or_insert(k);
            continue;
        }
        if let Some(f) = flat_since {
            return fail([f, f + 1, k + 1], "path moves again after being constant", direction);
        }
        match direction {
            None => direction = Some(class),
            Some(d0) if d0 != class => {
                return fail([k - 1, k, k + 1], "path changes direction", direction);
            }
            _ => {}
        }
    }
    let t0 = match (direction, flat_since) {
        (None, _) => Some(0.0),
        (Some(_), Some(f)) => Some(t[f]),
        (Some(_), None) => None,
    };
    let mut report = PropertyReport::holds("path_shape", 0.0);
    if t0.is_none() {
        report = report.with_note("still moving at the end of the window");
    }
    ShapeOutcome { report, t0, direction: direction.map(to_direction) }
}

fn to_direction(sign: i8) -> Direction {
    if sign > 0 {
        Direction::Increasing
    } else {
        Direction::Decreasing
    }
}

/// Sum of absolute increments of a path on the dyadic grids of `levels`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationEstimate {
    pub start_x: f64,
    pub horizon: f64,
    pub levels: Vec<u32>,
    pub estimates: Vec<f64>,
    pub diverging: bool,
}

impl VariationEstimate {
    /// Relative increment of the last estimate over the one two levels
    /// earlier, or one level earlier when only two exist.
    pub fn last_increment(&self) -> f64 {
        match self.estimates.as_slice() {
            [.., a, _, b] | [a, b] => (b - a) / a.abs().max(f64::MIN_POSITIVE),
            _ => 0.0,
        }
    }

    pub fn to_report(&self) -> PropertyReport {
        let residual = self.last_increment();
        if !self.diverging {
            return PropertyReport::holds("finite_variation", residual);
        }
        let n = self.levels.len();
        let inputs = if n >= 2 {
            let back = if n >= 3 { n - 3 } else { n - 2 };
            vec![self.start_x, self.levels[back] as f64, self.levels[n - 1] as f64]
        } else {
            vec![self.start_x]
        };
        let expected = match n {
            0 | 1 => 0.0,
            2 => self.estimates[0],
            _ => self.estimates[n - 3],
        };
        PropertyReport::fails(
            "finite_variation",
            residual,
            Witness { inputs, observed: self.estimates[n - 1], expected },
        )
        .with_note("variation estimate keeps growing under refinement")
    }
}

/// Variation of `t -> X_t^x` on `[0, horizon]` at each level. The flag is
/// set when the last estimate exceeds [`VARIATION_CAP`] or
/// [`VariationEstimate::last_increment`] is at least [`STABLE_REL_INCREMENT`].
pub fn total_variation<F: ProcessFamily + ?Sized>(
    family: &F,
    x: f64,
    horizon: f64,
    levels: RangeInclusive<u32>,
    exec: Execution,
) -> Result<VariationEstimate, ProcessError> {
    let finest = *levels.end();
    let ps = sample_path(family, x, horizon, finest, exec)?;
    let levels: Vec<u32> = levels.collect();
    let estimates: Vec<f64> = levels
        .iter()
        .map(|&l| ps.coarsened_values(l).windows(2).map(|w| (w[1] - w[0]).abs()).sum())
        .collect();
    let mut est = VariationEstimate { start_x: x, horizon, levels, estimates, diverging: false };
    let last = est.estimates.last().copied().unwrap_or(0.0);
    est.diverging = !last.is_finite()
        || last > VARIATION_CAP
        || (est.estimates.len() >= 2 && est.last_increment() >= STABLE_REL_INCREMENT);
    Ok(est)
}

fn max_gap(values: &[f64]) -> (f64, usize) {
    values
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let g = (w[1] - w[0]).abs();
            (if g.is_nan() { f64::INFINITY } else { g }, i)
        })
        .fold((0.0, 0), |acc, cur| if cur.0 > acc.0 { cur } else { acc })
}

/// Follows the larger half of `[a, b]` down to float resolution and
/// returns the first and last gap.
fn zoom(f: &(dyn Fn(f64) -> f64 + Sync), mut a: f64, mut b: f64) -> (f64, f64, f64) {
    let (mut fa, mut fb) = (f(a), f(b));
    let first = (fb - fa).abs();
    for _ in 0..ZOOM_STEPS {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if (fm - fa).abs() >= (fb - fm).abs() {
            b = m;
            fb = fm;
        } else {
            a = m;
            fa = fm;
        }
    }
    let last = (fb - fa).abs();
    (first, if last.is_nan() { f64::INFINITY } else { last }, 0.5 * (a + b))
}

/// Continuity of `f` on `[lo, hi]` from its samples on the dyadic grids of
/// levels `level - 2 ..= level`.
///
/// Holds when the largest adjacent gap shrinks by at least 1.5 per level and
/// ends below `tol * (1 + scale)`. Otherwise the largest gaps are zoomed into
/// by bisection; a gap that does not shrink under zooming is reported as a
/// discontinuity.
pub fn check_continuity(
    f: &(dyn Fn(f64) -> f64 + Sync),
    lo: f64,
    hi: f64,
    level: u32,
    tol: f64,
    exec: Execution,
) -> PropertyReport {
    if !(2..=30).contains(&level) || !(hi > lo) {
        return PropertyReport::new("continuity", Verdict::Inconclusive, f64::MAX)
            .with_note("needs a nondegenerate window and at least two refinement levels");
    }
    let n = 1usize << level;
    let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * (i as f64 / n as f64)).collect();
    let values = par::map(exec, &xs, |&x| f(x));
    let scale = values.iter().filter(|v| v.is_finite()).fold(0.0f64, |m, v| m.max(v.abs()));
    let bound = tol * (1.0 + scale);
    let gaps: Vec<f64> =
        (0..3).map(|k| max_gap(&values.iter().step_by(1 << (2 - k)).copied().collect::<Vec<_>>()).0).collect();
    let shrinks = gaps.windows(2).all(|w| w[0] <= bound || w[1] * GAP_SHRINK <= w[0]);
    if shrinks && gaps[2] <= bound {
        return PropertyReport::holds("continuity", gaps[2]);
    }

    let mut order: Vec<usize> = (0..n).collect();
    let gap_at = |i: usize| {
        let g = (values[i + 1] - values[i]).abs();
        if g.is_nan() {
            f64::INFINITY
        } else {
            g
        }
    };
    order.sort_by(|&i, &j| gap_at(j).total_cmp(&gap_at(i)).then(i.cmp(&j)));
    order.truncate(ZOOM_CANDIDATES);
    let zoomed = par::map(exec, &order, |&i| (i, zoom(f, xs[i], xs[i + 1])));
    let mut witnesses = Vec::new();
    let mut residual = 0.0f64;
    for (_, (first, last, at)) in zoomed {
        residual = residual.max(last);
        let continuous = last <= bound || last <= first * ZOOM_SHRINK;
        if !continuous {
            witnesses.push(Witness { inputs: vec![at], observed: last, expected: 0.0 });
        }
    }
    if witnesses.is_empty() {
        PropertyReport::holds("continuity", residual).with_note("largest gaps vanish under zooming")
    } else {
        PropertyReport::new("continuity", Verdict::Fails, residual)
            .with_witnesses(witnesses)
            .with_note("gap does not shrink under zooming")
    }
}

/// [`check_continuity`] for `t -> X_t^x` on `[0, horizon]`.
pub fn check_path_continuity<F: ProcessFamily + ?Sized>(
    family: &F,
    x: f64,
    horizon: f64,
    level: u32,
    tol: f64,
    exec: Execution,
) -> PropertyReport {
    let f = |t: f64| family.position(x, t).unwrap_or(f64::NAN);
    let mut r = check_continuity(&f, 0.0, horizon, level, tol, exec);
    for w in &mut r.witnesses {
        w.inputs.insert(0, x);
    }
    r
}
