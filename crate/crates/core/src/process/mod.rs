//! Trajectories `t -> X_t^x` of a structure, and numerical checks on
//! sampled trajectories.

mod checks;
mod sample;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par::Execution;
use crate::paths::PathError;
use crate::structure::{DomainKind, Structure};

pub use checks::{
    check_continuity, check_path_continuity, check_path_shape, check_time_homogeneity, flow_law_residual,
    homogeneity_probes, total_variation, HomogeneityProbe, ShapeOutcome, VariationEstimate, STABLE_REL_INCREMENT,
    VARIATION_CAP,
};
pub use sample::{sample_path, PathSample};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProcessError {
    #[error("time {0} is not a finite nonnegative number")]
    BadTime(f64),
    #[error("starting point {0} is not finite")]
    BadStart(f64),
    #[error("structure integrity: {0}")]
    Integrity(String),
    #[error(transparent)]
    Path(#[from] PathError),
}

/// Anything that assigns a position to a starting point and a time.
pub trait ProcessFamily: Sync {
    fn position(&self, x: f64, t: f64) -> Result<f64, ProcessError>;
}

impl ProcessFamily for Structure {
    fn position(&self, x: f64, t: f64) -> Result<f64, ProcessError> {
        evaluate(self, x, t)
    }
}

impl<F: Fn(f64, f64) -> f64 + Sync> ProcessFamily for F {
    fn position(&self, x: f64, t: f64) -> Result<f64, ProcessError> {
        Ok(self(x, t))
    }
}

/// Grid and tolerance settings shared by the sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub horizon: f64,
    pub level: u32,
    pub x_lo: f64,
    pub x_hi: f64,
    pub x_points: usize,
    pub tol: f64,
    pub exec: Execution,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { horizon: 4.0, level: 10, x_lo: -8.0, x_hi: 8.0, x_points: 257, tol: 1e-8, exec: Execution::default() }
    }
}

impl GridConfig {
    pub fn xs(&self) -> Vec<f64> {
        linspace(self.x_lo, self.x_hi, self.x_points)
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * (i as f64 / (n - 1) as f64)).collect(),
    }
}

/// `X_t^x`: the position at time `t` of the trajectory started at `x`.
///
/// A monotone path leaving its parameter interval through a finite right
/// endpoint is absorbed by the constant domain it runs into.
pub fn evaluate(s: &Structure, x: f64, t: f64) -> Result<f64, ProcessError> {
    if !x.is_finite() {
        return Err(ProcessError::BadStart(x));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(ProcessError::BadTime(t));
    }
    let loc = s.locate(x);
    let domain = s.domain(loc.index);
    let path = match domain.path() {
        None => return Ok(x),
        Some(p) => p,
    };
    if t == 0.0 {
        return Ok(x);
    }
    let sigma = path.invert_precise(x)?;
    let tau = t + sigma;
    let i = path.domain();
    if i.contains(tau) {
        return Ok(path.eval_unchecked(tau));
    }
    if tau < i.hi {
        return Err(ProcessError::Integrity(format!("time {tau} fell below the parameter interval {i}")));
    }
    absorption_value(s, loc.index)
}

fn absorption_value(s: &Structure, index: usize) -> Result<f64, ProcessError> {
    let domain = s.domain(index);
    let neighbour = match domain.kind() {
        DomainKind::Plus => s.domains().get(index + 1),
        DomainKind::Minus => index.checked_sub(1).map(|k| s.domain(k)),
        DomainKind::Const => return Err(ProcessError::Integrity("constant domain has no path".into())),
    };
    match neighbour {
        Some(n) if n.kind() == DomainKind::Const => {
            let j = n.interval();
            Ok(if domain.kind() == DomainKind::Plus { j.lo } else { j.hi })
        }
        _ => Err(ProcessError::Integrity(format!(
            "domain {index} leaves its parameter interval with no constant domain to absorb it"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::{BuiltinPath, GeneratingPath, Interval, PathRule};
    use crate::structure::{validate_structure, Domain};

    fn cantor() -> Structure {
        validate_structure(vec![Domain::from_path(
            GeneratingPath::onto(PathRule::Cantor { depth: 64 }, Interval::real_line()).unwrap(),
        )])
        .unwrap()
    }

    fn mid_deriv_zero() -> Structure {
        let up = GeneratingPath::onto(
            PathRule::Builtin(BuiltinPath::ParabolaUp),
            Interval::closed_open(0.0, f64::INFINITY).unwrap(),
        )
        .unwrap();
        let down = GeneratingPath::onto(
            PathRule::Builtin(BuiltinPath::ParabolaDown),
            Interval::closed_open(0.0, f64::INFINITY).unwrap(),
        )
        .unwrap();
        validate_structure(vec![
            Domain::from_path(down),
            Domain::constant(Interval::open(-1.0, 1.0).unwrap()),
            Domain::from_path(up),
        ])
        .unwrap()
    }

    #[test]
    fn pure_const_stays() {
        let s = validate_structure(vec![Domain::constant(Interval::real_line())]).unwrap();
        assert_eq!(evaluate(&s, 3.5, 10.0).unwrap(), 3.5);
    }

    #[test]
    fn cantor_from_zero_reaches_one() {
        assert_eq!(evaluate(&cantor(), 0.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn parabola_domain_never_enters_plateau() {
        let s = mid_deriv_zero();
        for k in 0..20 {
            let t = k as f64 * 0.25;
            let want = 1.0 + (t + 1.0) * (t + 1.0);
            let got = evaluate(&s, 2.0, t).unwrap();
            assert!((got - want).abs() < 1e-12 * want, "t={t}: {got} vs {want}");
        }
        assert_eq!(evaluate(&s, 0.3, 7.0).unwrap(), 0.3);
        assert_eq!(evaluate(&s, -1.0, 2.0).unwrap(), -5.0);
    }

    #[test]
    fn plus_domain_is_absorbed_by_constant_domain_above() {
        let p = GeneratingPath::onto(
            PathRule::Linear { slope: 1.0, intercept: 0.0 },
            Interval::open(f64::NEG_INFINITY, 2.0).unwrap(),
        )
        .unwrap();
        let s = validate_structure(vec![
            Domain::from_path(p),
            Domain::constant(Interval::closed_open(2.0, f64::INFINITY).unwrap()),
        ])
        .unwrap();
        assert_eq!(evaluate(&s, 0.0, 1.5).unwrap(), 1.5);
        assert_eq!(evaluate(&s, 0.0, 2.0).unwrap(), 2.0);
        assert_eq!(evaluate(&s, 0.0, 50.0).unwrap(), 2.0);
        assert_eq!(evaluate(&s, 1.9, 0.1).unwrap(), 2.0);
    }

    #[test]
    fn minus_domain_is_absorbed_from_above() {
        let p = GeneratingPath::onto(
            PathRule::Linear { slope: -1.0, intercept: 0.0 },
            Interval::open(f64::NEG_INFINITY, 1.0).unwrap(),
        )
        .unwrap();
        let s = validate_structure(vec![
            Domain::constant(Interval::open_closed(f64::NEG_INFINITY, -1.0).unwrap()),
            Domain::from_path(p),
        ])
        .unwrap();
        assert_eq!(evaluate(&s, 3.0, 1.0).unwrap(), 2.0);
        assert_eq!(evaluate(&s, 3.0, 10.0).unwrap(), -1.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        let s = cantor();
        assert_eq!(evaluate(&s, 0.0, -1.0), Err(ProcessError::BadTime(-1.0)));
        assert!(evaluate(&s, f64::NAN, 1.0).is_err());
        assert!(evaluate(&s, 0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn linspace_endpoints_exact() {
        let xs = linspace(-8.0, 8.0, 257);
        assert_eq!(xs[0], -8.0);
        assert_eq!(xs[128], 0.0);
        assert_eq!(xs[256], 8.0);
    }
}
