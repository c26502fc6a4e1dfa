use serde::{Deserialize, Serialize};

use super::{drift_estimate, generator_apply, TestFunction};
use crate::par::{self, Execution};
use crate::paths::Interval;
use crate::process::check_continuity;
use crate::report::{PropertyReport, Verdict, Witness};
use crate::structure::{Domain, Structure};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RichConfig {
    /// Checks run on `[-radius, radius]`.
    pub radius: f64,
    /// Dyadic level of the derivative grid.
    pub level: u32,
    pub tol: f64,
    /// Allowed mismatch of the one-sided drift limits at a domain boundary.
    pub transition_tol: f64,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for RichConfig {
    fn default() -> Self {
        RichConfig { radius: 8.0, level: 10, tol: 1e-6, transition_tol: 1e-4, exec: Execution::default() }
    }
}

const APPROACH_EXPONENTS: [i32; 3] = [10, 20, 30];

/// Converged drift at `x` inside domain `d`, zero for constant domains.
fn drift_in(s: &Structure, d: &Domain, x: f64) -> Option<f64> {
    if d.path().is_none() {
        return Some(0.0);
    }
    drift_estimate(s, x).ok().filter(|e| e.converged).map(|e| e.value)
}

/// Limit of the drift at the endpoint `b` of `d`, approached from inside.
fn one_sided_limit(s: &Structure, d: &Domain, b: f64) -> Option<f64> {
    let j = d.interval();
    if j.contains(b) {
        return drift_in(s, d, b);
    }
    let inward = if b <= j.lo { 1.0 } else { -1.0 };
    let width = if j.is_bounded() { j.hi - j.lo } else { 1.0 };
    let mut last = None;
    for k in APPROACH_EXPONENTS {
        last = drift_in(s, d, b + inward * width * 2f64.powi(-k));
    }
    last
}

/// The part of `j` inside `[-r, r]`, pulled inward at open ends.
fn window(j: &Interval, r: f64) -> Option<(f64, f64)> {
    let nudge = |e: f64| 1e-9 * e.abs().max(1.0);
    let lo = if j.lo < -r { -r } else if j.lo_closed { j.lo } else { j.lo + nudge(j.lo) };
    let hi = if j.hi > r { r } else if j.hi_closed { j.hi } else { j.hi - nudge(j.hi) };
    (hi > lo).then_some((lo, hi))
}

/// Richness: the drift `x -> path'(path^{-1}(x))` exists and is continuous
/// in every monotone domain, its one-sided limits agree across every
/// boundary (so it tends to zero next to a constant domain), and `Au` is
/// continuous for every catalog function.
pub fn is_rich(s: &Structure, cfg: &RichConfig) -> PropertyReport {
    let r = cfg.radius;
    let n = 1usize << cfg.level;
    let xs: Vec<f64> = (0..=n).map(|i| -r + 2.0 * r * (i as f64 / n as f64)).collect();
    let mut verdict = Verdict::Holds;
    let mut residual = 0.0f64;
    let mut notes = Vec::new();

    let drifts = par::map(cfg.exec, &xs, |&x| {
        let d = s.domain(s.locate(x).index);
        (x, drift_in(s, d, x))
    });
    let undefined: Vec<Witness> = drifts
        .iter()
        .filter(|(_, v)| v.is_none())
        .map(|&(x, _)| Witness { inputs: vec![x], observed: f64::NAN, expected: 0.0 })
        .collect();
    if !undefined.is_empty() {
        let count = undefined.len();
        return PropertyReport::new("rich", Verdict::Fails, f64::INFINITY)
            .with_witnesses(undefined)
            .with_note(format!("derivative of the generating path does not converge at {count} grid points"));
    }

    for (i, d) in s.domains().iter().enumerate() {
        if d.path().is_none() {
            continue;
        }
        let Some((lo, hi)) = window(d.interval(), r) else { continue };
        let f = |x: f64| drift_in(s, d, x).unwrap_or(f64::NAN);
        let rep = check_continuity(&f, lo, hi, cfg.level, cfg.tol, cfg.exec);
        residual = residual.max(rep.residual);
        if rep.verdict != Verdict::Holds {
            notes.push(format!("drift in domain {i} is not continuous: {}", rep.verdict));
            if rep.verdict == Verdict::Fails {
                return PropertyReport::new("rich", Verdict::Fails, rep.residual)
                    .with_witnesses(rep.witnesses)
                    .with_note(notes.remove(0));
            }
        }
        verdict = verdict.and(rep.verdict);
    }

    for (i, w) in s.domains().windows(2).enumerate() {
        let b = w[0].interval().hi;
        let below = one_sided_limit(s, &w[0], b);
        let above = one_sided_limit(s, &w[1], b);
        let (Some(below), Some(above)) = (below, above) else {
            return PropertyReport::fails("rich", f64::INFINITY, Witness {
                inputs: vec![b],
                observed: f64::NAN,
                expected: 0.0,
            })
            .with_note(format!("drift has no limit at the boundary between domains {i} and {}", i + 1));
        };
        let jump = (below - above).abs();
        residual = residual.max(jump);
        if jump > cfg.transition_tol {
            return PropertyReport::fails("rich", jump, Witness { inputs: vec![b], observed: below, expected: above })
                .with_note(format!("no smooth transition between domains {i} and {}", i + 1));
        }
    }

    for u in TestFunction::catalog() {
        let f = |x: f64| generator_apply(s, &u, x).unwrap_or(f64::NAN);
        let rep = check_continuity(&f, -r, r, cfg.level, cfg.tol, cfg.exec);
        residual = residual.max(rep.residual);
        if rep.verdict == Verdict::Fails {
            return PropertyReport::new("rich", Verdict::Fails, rep.residual)
                .with_witnesses(rep.witnesses)
                .with_note(format!("Au is not continuous for u = {}", u.name()));
        }
        verdict = verdict.and(rep.verdict);
    }

    let mut report = PropertyReport::new("rich", verdict, residual);
    report.notes = notes;
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::{BuiltinPath, GeneratingPath, PathRule};
    use crate::structure::validate_structure;

    fn single(rule: PathRule) -> Structure {
        validate_structure(vec![Domain::from_path(GeneratingPath::onto(rule, Interval::real_line()).unwrap())]).unwrap()
    }

    fn quick() -> RichConfig {
        RichConfig { level: 8, ..RichConfig::default() }
    }

    #[test]
    fn smooth_single_paths_are_rich() {
        assert_eq!(is_rich(&single(PathRule::Linear { slope: 2.0, intercept: 1.0 }), &quick()).verdict, Verdict::Holds);
        assert_eq!(is_rich(&single(PathRule::Builtin(BuiltinPath::Cubic)), &quick()).verdict, Verdict::Holds);
    }

    #[test]
    fn knick_fails_at_zero() {
        let r = is_rich(&single(PathRule::knick()), &quick());
        assert_eq!(r.verdict, Verdict::Fails);
        assert!(r.witnesses.iter().any(|w| w.inputs[0].abs() < 1e-3), "{r:?}");
    }

    #[test]
    fn cantor_fails_on_the_grid() {
        let r = is_rich(&single(PathRule::Cantor { depth: 64 }), &quick());
        assert_eq!(r.verdict, Verdict::Fails);
        assert!(r.witnesses.iter().any(|w| w.inputs[0] == -8.0));
    }

    #[test]
    fn flat_starts_give_a_smooth_transition() {
        let half = Interval::closed_open(0.0, f64::INFINITY).unwrap();
        let down = GeneratingPath::onto(PathRule::Builtin(BuiltinPath::ParabolaDown), half).unwrap();
        let up = GeneratingPath::onto(PathRule::Builtin(BuiltinPath::ParabolaUp), half).unwrap();
        let s = validate_structure(vec![
            Domain::from_path(down),
            Domain::constant(Interval::open(-1.0, 1.0).unwrap()),
            Domain::from_path(up),
        ])
        .unwrap();
        let r = is_rich(&s, &quick());
        assert_eq!(r.verdict, Verdict::Holds, "{r:?}");

        let pos = Interval::open(0.0, f64::INFINITY).unwrap();
        let lin = |a: f64| GeneratingPath::onto(PathRule::Linear { slope: a, intercept: 0.0 }, pos).unwrap();
        let s = validate_structure(vec![
            Domain::from_path(lin(-1.0)),
            Domain::constant(Interval::point(0.0).unwrap()),
            Domain::from_path(lin(1.0)),
        ])
        .unwrap();
        let r = is_rich(&s, &quick());
        assert_eq!(r.verdict, Verdict::Fails);
        assert_eq!(r.witnesses[0].inputs, vec![0.0]);
    }
}
