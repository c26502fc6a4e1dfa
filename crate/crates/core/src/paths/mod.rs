//! Generating paths: strictly monotone continuous maps `I -> J`.
//!
//! A [`GeneratingPath`] pairs a [`PathRule`] (the formula) with a time
//! shift and the interval `I` on which it is used, so that
//! `path(s) = rule(s + shift)` for `s` in `I`. Re-anchoring a path only
//! changes the shift and translates `I`.

mod cantor;
mod interval;
mod table;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cantor::{cantor_h, cantor_phi, DEFAULT_DEPTH};
pub use interval::Interval;
pub use table::{parse_nodes, MonotoneCubic};
pub(crate) use table::polyline_inverse;

/// Default tolerance for [`GeneratingPath::invert`].
pub const DEFAULT_INVERT_TOL: f64 = 1e-12;
/// Infinite bracket ends are searched no further than this.
pub const SEARCH_BOUND: f64 = 1e12;
/// Default first step of [`GeneratingPath::right_derivative`].
pub const DEFAULT_DERIVATIVE_STEP: f64 = 1.0 / 64.0;
const DERIVATIVE_HALVINGS: u32 = 40;
const DERIVATIVE_REL_TOL: f64 = 1e-6;
const DERIVATIVE_ABS_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathError {
    #[error("invalid interval: {0}")]
    InvalidInterval(String),
    #[error("invalid path rule: {0}")]
    InvalidRule(String),
    #[error("{value} lies outside the domain (violated endpoint {endpoint})")]
    OutOfDomain { value: f64, endpoint: f64 },
    #[error("{value} lies outside the range (violated endpoint {endpoint})")]
    OutOfRange { value: f64, endpoint: f64 },
    #[error("no bracket for {target} within |s| <= {bound}")]
    SearchFailure { target: f64, bound: f64 },
    #[error("inverse of {target} only reached residual {residual} (best {best})")]
    ToleranceUnreachable { target: f64, best: f64, residual: f64 },
    #[error("right derivative undefined at {at}: no room for forward steps")]
    DerivativeUndefined { at: f64 },
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Increasing => 1.0,
            Direction::Decreasing => -1.0,
        }
    }

    fn from_sign(sign: f64) -> Self {
        if sign > 0.0 {
            Direction::Increasing
        } else {
            Direction::Decreasing
        }
    }
}

/// Closed-form paths available by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinPath {
    /// `s + s^3`
    Cubic,
    /// `1 + s^2`, increasing for `s >= 0`
    ParabolaUp,
    /// `-1 - s^2`, decreasing for `s >= 0`
    ParabolaDown,
}

impl BuiltinPath {
    pub const ALL: [BuiltinPath; 3] = [BuiltinPath::Cubic, BuiltinPath::ParabolaUp, BuiltinPath::ParabolaDown];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinPath::Cubic => "cubic",
            BuiltinPath::ParabolaUp => "parabola_up",
            BuiltinPath::ParabolaDown => "parabola_down",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.name() == name)
    }

    fn eval(self, u: f64) -> f64 {
        match self {
            BuiltinPath::Cubic => u + u * u * u,
            BuiltinPath::ParabolaUp => 1.0 + u * u,
            BuiltinPath::ParabolaDown => -1.0 - u * u,
        }
    }

    fn direction(self) -> Direction {
        match self {
            BuiltinPath::ParabolaDown => Direction::Decreasing,
            _ => Direction::Increasing,
        }
    }
}

/// A user-supplied monotone function. Cannot be written to spec files.
#[derive(Clone)]
pub struct CallablePath {
    pub name: String,
    pub direction: Direction,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl CallablePath {
    pub fn new(
        name: impl Into<String>,
        direction: Direction,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        CallablePath { name: name.into(), direction, f: Arc::new(f) }
    }
}

impl fmt::Debug for CallablePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CallablePath")
            .field("name", &self.name)
            .field("direction", &self.direction)
            .finish_non_exhaustive()
    }
}

impl PartialEq for CallablePath {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.f, &other.f)
    }
}

/// The formula of a generating path, in its own (unshifted) parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum PathRule {
    Linear { slope: f64, intercept: f64 },
    Polyline(Vec<(f64, f64)>),
    Table(MonotoneCubic),
    Cantor { depth: u32 },
    /// `outer_scale * cantor(inner_scale * u + inner_offset) + outer_offset`
    AffineCantor { depth: u32, outer_scale: f64, outer_offset: f64, inner_scale: f64, inner_offset: f64 },
    Builtin(BuiltinPath),
    Callable(CallablePath),
}

impl PathRule {
    pub fn polyline(nodes: Vec<(f64, f64)>) -> Result<Self, PathError> {
        table::check_nodes(&nodes)?;
        Ok(PathRule::Polyline(nodes))
    }

    pub fn table(nodes: Vec<(f64, f64)>) -> Result<Self, PathError> {
        Ok(PathRule::Table(MonotoneCubic::new(nodes)?))
    }

    /// `s/2` for `s < 0`, `s` for `s >= 0`.
    pub fn knick() -> Self {
        PathRule::Polyline(vec![(-1.0, -0.5), (0.0, 0.0), (1.0, 1.0)])
    }

    pub fn direction(&self) -> Result<Direction, PathError> {
        let sign = match self {
            PathRule::Linear { slope, intercept } => {
                if !slope.is_finite() || !intercept.is_finite() || *slope == 0.0 {
                    return Err(PathError::InvalidRule(format!("linear slope {slope} is not usable")));
                }
                slope.signum()
            }
            PathRule::Polyline(nodes) => table::check_nodes(nodes)?,
            PathRule::Table(c) => table::check_nodes(c.nodes())?,
            PathRule::Cantor { depth } => {
                if *depth == 0 {
                    return Err(PathError::InvalidRule("Cantor depth must be at least 1".into()));
                }
                1.0
            }
            PathRule::AffineCantor { depth, outer_scale, inner_scale, .. } => {
                if *depth == 0 || *outer_scale == 0.0 || *inner_scale == 0.0 {
                    return Err(PathError::InvalidRule("degenerate affine Cantor rule".into()));
                }
                (outer_scale * inner_scale).signum()
            }
            PathRule::Builtin(b) => b.direction().sign(),
            PathRule::Callable(c) => c.direction.sign(),
        };
        Ok(Direction::from_sign(sign))
    }

    /// Whether the rule can be written to a spec file.
    pub fn is_serializable(&self) -> bool {
        !matches!(self, PathRule::Callable(_))
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self {
            PathRule::Linear { slope, intercept } => slope * u + intercept,
            PathRule::Polyline(nodes) => table::polyline_eval(nodes, u),
            PathRule::Table(c) => c.eval(u),
            PathRule::Cantor { depth } => cantor::cantor_phi_unchecked(u, *depth),
            PathRule::AffineCantor { depth, outer_scale, outer_offset, inner_scale, inner_offset } => {
                outer_scale * cantor::cantor_phi_unchecked(inner_scale * u + inner_offset, *depth) + outer_offset
            }
            PathRule::Builtin(b) => b.eval(u),
            PathRule::Callable(c) => (c.f)(u),
        }
    }

    /// Exact right derivative where a closed form exists.
    fn closed_form_right_derivative(&self, u: f64) -> Option<f64> {
        match self {
            PathRule::Linear { slope, .. } => Some(*slope),
            PathRule::Polyline(nodes) => Some(table::polyline_right_slope(nodes, u)),
            PathRule::Builtin(BuiltinPath::Cubic) => Some(1.0 + 3.0 * u * u),
            PathRule::Builtin(BuiltinPath::ParabolaUp) => Some(2.0 * u),
            PathRule::Builtin(BuiltinPath::ParabolaDown) => Some(-2.0 * u),
            _ => None,
        }
    }

    /// Exact inverse where a closed form exists.
    fn closed_form_inverse(&self, x: f64) -> Option<f64> {
        match self {
            PathRule::Linear { slope, intercept } => Some((x - intercept) / slope),
            PathRule::Polyline(nodes) => Some(table::polyline_inverse(nodes, x)),
            PathRule::Cantor { depth } => Some(cantor::cantor_phi_inverse(x, *depth)),
            PathRule::AffineCantor { depth, outer_scale, outer_offset, inner_scale, inner_offset } => {
                let v = cantor::cantor_phi_inverse((x - outer_offset) / outer_scale, *depth);
                Some((v - inner_offset) / inner_scale)
            }
            PathRule::Builtin(BuiltinPath::ParabolaUp) => Some((x - 1.0).max(0.0).sqrt()),
            PathRule::Builtin(BuiltinPath::ParabolaDown) => Some((-1.0 - x).max(0.0).sqrt()),
            _ => None,
        }
    }
}

/// Result of [`GeneratingPath::right_derivative`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeEstimate {
    pub value: f64,
    pub step_used: f64,
    pub converged: bool,
}

/// A strictly monotone continuous surjection from `domain` onto `range`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingPath {
    rule: PathRule,
    shift: f64,
    domain: Interval,
    range: Interval,
    direction: Direction,
}

impl GeneratingPath {
    /// A path using `rule` on `domain`, claimed to map onto `range`.
    ///
    /// Surjectivity is checked separately by [`GeneratingPath::surjectivity_defect`]
    /// so that structure validation can report it.
    pub fn new(rule: PathRule, domain: Interval, range: Interval) -> Result<Self, PathError> {
        Self::with_shift(rule, 0.0, domain, range)
    }

    pub fn with_shift(rule: PathRule, shift: f64, domain: Interval, range: Interval) -> Result<Self, PathError> {
        let direction = rule.direction()?;
        if !shift.is_finite() {
            return Err(PathError::InvalidRule(format!("shift {shift} is not finite")));
        }
        if domain.is_singleton() {
            return Err(PathError::InvalidInterval("a generating path needs a nondegenerate domain".into()));
        }
        Ok(GeneratingPath { rule, shift, domain, range, direction })
    }

    /// A path on `domain` whose range is computed from the rule: finite
    /// domain ends are evaluated, infinite ones are taken to be unbounded.
    pub fn onto(rule: PathRule, domain: Interval) -> Result<Self, PathError> {
        let direction = rule.direction()?;
        let end = |s: f64, closed: bool| -> (f64, bool) {
            if s.is_finite() {
                (rule.eval(s), closed)
            } else {
                (s * direction.sign(), false)
            }
        };
        let (a, a_closed) = end(domain.lo, domain.lo_closed);
        let (b, b_closed) = end(domain.hi, domain.hi_closed);
        let range = match direction {
            Direction::Increasing => Interval::new(a, b, a_closed, b_closed)?,
            Direction::Decreasing => Interval::new(b, a, b_closed, a_closed)?,
        };
        Self::new(rule, domain, range)
    }

    pub fn linear(slope: f64, intercept: f64) -> Result<Self, PathError> {
        Self::onto(PathRule::Linear { slope, intercept }, Interval::real_line())
    }

    pub fn rule(&self) -> &PathRule {
        &self.rule
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn domain(&self) -> &Interval {
        &self.domain
    }

    pub fn range(&self) -> &Interval {
        &self.range
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// `path(s)`; `s` must lie in the domain.
    pub fn eval(&self, s: f64) -> Result<f64, PathError> {
        if !self.domain.contains(s) {
            let endpoint = if s <= self.domain.lo { self.domain.lo } else { self.domain.hi };
            return Err(PathError::OutOfDomain { value: s, endpoint });
        }
        Ok(self.eval_unchecked(s))
    }

    pub(crate) fn eval_unchecked(&self, s: f64) -> f64 {
        self.rule.eval(s + self.shift)
    }

    fn check_range(&self, x: f64) -> Result<(), PathError> {
        if !self.range.contains(x) {
            let endpoint = if x <= self.range.lo { self.range.lo } else { self.range.hi };
            return Err(PathError::OutOfRange { value: x, endpoint });
        }
        Ok(())
    }

    /// `path^{-1}(x)` with `|path(s) - x| <= tol`. Rules with closed-form
    /// inverses skip the bisection.
    pub fn invert(&self, x: f64, tol: f64) -> Result<f64, PathError> {
        if !(tol > 0.0) {
            return Err(PathError::BadTolerance(tol));
        }
        self.check_range(x)?;
        let s = self.solve(x, tol)?;
        let residual = (self.eval_unchecked(s) - x).abs();
        if residual > tol {
            return Err(PathError::ToleranceUnreachable { target: x, best: s, residual });
        }
        Ok(s)
    }

    /// Inverse refined until the bisection bracket collapses to adjacent
    /// floats. Used by trajectory evaluation.
    pub fn invert_precise(&self, x: f64) -> Result<f64, PathError> {
        self.check_range(x)?;
        self.solve(x, 0.0)
    }

    fn solve(&self, x: f64, tol: f64) -> Result<f64, PathError> {
        let s = match self.rule.closed_form_inverse(x) {
            Some(u) => u - self.shift,
            None => self.bisect(x, tol)?,
        };
        Ok(self.clamp_to_domain(s))
    }

    fn clamp_to_domain(&self, s: f64) -> f64 {
        let mut s = s.clamp(self.domain.lo, self.domain.hi);
        if !self.domain.contains(s) {
            s = if s <= self.domain.lo { self.domain.lo.next_up() } else { self.domain.hi.next_down() };
        }
        s
    }

    fn bisect(&self, x: f64, tol: f64) -> Result<f64, PathError> {
        let sign = self.direction.sign();
        // g is increasing in s with root at the inverse
        let g = |s: f64| sign * (self.eval_unchecked(s) - x);
        let lo = self.bracket_end(&g, self.domain.lo, -1.0, x)?;
        let hi = self.bracket_end(&g, self.domain.hi, 1.0, x)?;
        let (mut lo, mut hi) = (lo, hi);
        if g(lo) == 0.0 {
            return Ok(lo);
        }
        if g(hi) == 0.0 {
            return Ok(hi);
        }
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let v = g(mid);
            if v == 0.0 || (tol > 0.0 && v.abs() <= tol) {
                return Ok(mid);
            }
            if v < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(if g(lo).abs() <= g(hi).abs() { lo } else { hi })
    }

    /// Finds a bracket end on side `side` (-1 low, +1 high) where `g` has the
    /// sign of `side`.
    fn bracket_end(&self, g: &impl Fn(f64) -> f64, end: f64, side: f64, x: f64) -> Result<f64, PathError> {
        if end.is_finite() {
            return Ok(end);
        }
        let mut b = side;
        loop {
            if g(b) * side >= 0.0 {
                return Ok(b);
            }
            if b.abs() >= SEARCH_BOUND {
                return Err(PathError::SearchFailure { target: x, bound: SEARCH_BOUND });
            }
            b = (b * 2.0).clamp(-SEARCH_BOUND, SEARCH_BOUND);
        }
    }

    /// Right derivative at `s`. Rules with a closed form return it exactly;
    /// otherwise a second-order one-sided difference is halved from `h0`
    /// until three consecutive quotients agree within relative 1e-6
    /// (absolute floor 1e-9).
    pub fn right_derivative(&self, s: f64, h0: f64) -> Result<DerivativeEstimate, PathError> {
        if !self.domain.contains(s) {
            let endpoint = if s <= self.domain.lo { self.domain.lo } else { self.domain.hi };
            return Err(PathError::OutOfDomain { value: s, endpoint });
        }
        if s >= self.domain.hi || !(h0 > 0.0) {
            return Err(PathError::DerivativeUndefined { at: s });
        }
        if let Some(d) = self.rule.closed_form_right_derivative(s + self.shift) {
            return Ok(DerivativeEstimate { value: d, step_used: 0.0, converged: true });
        }
        let mut h = h0;
        if s + 2.0 * h >= self.domain.hi {
            h = 0.25 * (self.domain.hi - s);
        }
        let f0 = self.eval_unchecked(s);
        let quotient = |h: f64| {
            let d1 = self.eval_unchecked(s + h) - f0;
            let d2 = self.eval_unchecked(s + 2.0 * h) - f0;
            (4.0 * d1 - d2) / (2.0 * h)
        };
        let mut prev = quotient(h);
        let mut agreements = 0;
        for _ in 0..DERIVATIVE_HALVINGS {
            h *= 0.5;
            let cur = quotient(h);
            if (cur - prev).abs() <= (DERIVATIVE_REL_TOL * cur.abs()).max(DERIVATIVE_ABS_TOL) {
                agreements += 1;
                if agreements == 2 {
                    return Ok(DerivativeEstimate { value: cur, step_used: h, converged: true });
                }
            } else {
                agreements = 0;
            }
            prev = cur;
        }
        Ok(DerivativeEstimate { value: prev, step_used: h, converged: false })
    }

    /// The same path re-parameterized so that `path(0) = anchor`.
    pub fn anchored_at(&self, anchor: f64) -> Result<GeneratingPath, PathError> {
        let sigma = self.invert_precise(anchor)?;
        if sigma == 0.0 {
            return Ok(self.clone());
        }
        Ok(GeneratingPath {
            rule: self.rule.clone(),
            shift: self.shift + sigma,
            domain: self.domain.shifted_down(sigma),
            range: self.range,
            direction: self.direction,
        })
    }

    /// Largest mismatch between the endpoint behaviour of the path on its
    /// domain and the claimed range, or a description of why it is not onto.
    pub fn surjectivity_defect(&self) -> Result<(), String> {
        let dir = self.direction.sign();
        // range end reached at the low / high end of the domain
        let (at_lo, at_lo_closed, at_hi, at_hi_closed) = match self.direction {
            Direction::Increasing => (self.range.lo, self.range.lo_closed, self.range.hi, self.range.hi_closed),
            Direction::Decreasing => (self.range.hi, self.range.hi_closed, self.range.lo, self.range.lo_closed),
        };
        if at_lo_closed != self.domain.lo_closed || at_hi_closed != self.domain.hi_closed {
            return Err(format!(
                "closure of range {} does not match domain {}",
                self.range, self.domain
            ));
        }
        let check = |s: f64, target: f64, toward: f64| -> Result<(), String> {
            if s.is_finite() {
                let v = self.eval_unchecked(s);
                // a finite open end may carry an infinite range end only if the rule blows up there
                if target.is_infinite() && v == target {
                    return Ok(());
                }
                if target.is_infinite() || (v - target).abs() > 1e-9 * (1.0 + target.abs()) {
                    return Err(format!("path({s}) = {v} but the range endpoint is {target}"));
                }
                return Ok(());
            }
            let far = toward * SEARCH_BOUND;
            let v = self.eval_unchecked(far - self.shift);
            if target.is_infinite() {
                if v * target.signum() < 1e6 {
                    return Err(format!("path stays bounded ({v}) where the range is unbounded"));
                }
            } else if (v - target).abs() > 1e-6 * (1.0 + target.abs()) {
                return Err(format!("path tends to {v}, not to the range endpoint {target}"));
            }
            Ok(())
        };
        check(self.domain.lo, at_lo, -1.0)?;
        check(self.domain.hi, at_hi, 1.0)?;
        // interior sanity: strictly monotone on a few probes
        let probes = self.interior_probes();
        for w in probes.windows(2) {
            let (a, b) = (self.eval_unchecked(w[0]), self.eval_unchecked(w[1]));
            if (b - a) * dir <= 0.0 {
                return Err(format!("path is not strictly monotone between {} and {}", w[0], w[1]));
            }
            if !self.range.closure_contains(a) || !self.range.closure_contains(b) {
                return Err(format!("path leaves its range near {}", w[0]));
            }
        }
        Ok(())
    }

    fn interior_probes(&self) -> Vec<f64> {
        let lo = if self.domain.lo.is_finite() { self.domain.lo } else { self.domain.hi.min(0.0) - 16.0 };
        let hi = if self.domain.hi.is_finite() { self.domain.hi } else { lo.max(0.0) + 16.0 };
        (1..32).map(|k| lo + (hi - lo) * k as f64 / 32.0).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cantor_path() -> GeneratingPath {
        GeneratingPath::onto(PathRule::Cantor { depth: 64 }, Interval::real_line()).unwrap()
    }

    fn knick_path() -> GeneratingPath {
        GeneratingPath::onto(PathRule::knick(), Interval::real_line()).unwrap()
    }

    #[test]
    fn eval_examples() {
        let id = GeneratingPath::linear(1.0, 0.0).unwrap();
        assert_eq!(id.eval(0.0).unwrap(), 0.0);
        let c = cantor_path();
        assert_eq!(c.eval(0.0).unwrap(), 0.0);
        assert_eq!(c.eval(1.0).unwrap(), 1.0);
        assert_eq!(knick_path().eval(-1.0).unwrap(), -0.5);
    }

    #[test]
    fn eval_outside_domain_names_endpoint() {
        let p = GeneratingPath::onto(PathRule::Builtin(BuiltinPath::ParabolaUp), Interval::closed_open(0.0, f64::INFINITY).unwrap())
            .unwrap();
        assert_eq!(p.eval(-0.5), Err(PathError::OutOfDomain { value: -0.5, endpoint: 0.0 }));
    }

    #[test]
    fn invert_examples() {
        let id = GeneratingPath::linear(1.0, 0.0).unwrap();
        assert_eq!(id.invert(0.7, 1e-12).unwrap(), 0.7);
        assert_eq!(knick_path().invert(-1.0, 1e-12).unwrap(), -2.0);
        let s = cantor_path().invert(5.0 / 12.0, 1e-12).unwrap();
        assert!((s - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn invert_errors() {
        let p = GeneratingPath::onto(PathRule::Builtin(BuiltinPath::ParabolaUp), Interval::closed_open(0.0, f64::INFINITY).unwrap())
            .unwrap();
        assert!(matches!(p.invert(0.5, 1e-12), Err(PathError::OutOfRange { .. })));
        assert!(matches!(p.invert(2.0, 0.0), Err(PathError::BadTolerance(_))));
        // claims an unbounded range the rule never reaches
        let bounded = GeneratingPath::new(
            PathRule::Callable(CallablePath::new("atan", Direction::Increasing, f64::atan)),
            Interval::real_line(),
            Interval::real_line(),
        )
        .unwrap();
        assert!(matches!(bounded.invert(5.0, 1e-12), Err(PathError::SearchFailure { .. })));
    }

    #[test]
    fn bisection_for_callables_and_cubic() {
        let cubic = GeneratingPath::onto(PathRule::Builtin(BuiltinPath::Cubic), Interval::real_line()).unwrap();
        let s = cubic.invert(10.0, 1e-12).unwrap();
        assert!((s + s * s * s - 10.0).abs() <= 1e-12);
        let down = GeneratingPath::new(
            PathRule::Callable(CallablePath::new("neg-exp", Direction::Decreasing, |u: f64| -u.exp())),
            Interval::real_line(),
            Interval::open(f64::NEG_INFINITY, 0.0).unwrap(),
        )
        .unwrap();
        let s = down.invert(-3.0, 1e-12).unwrap();
        assert!((s - 3f64.ln()).abs() < 1e-11);
    }

    #[test]
    fn derivative_examples() {
        let half = GeneratingPath::linear(0.5, 0.0).unwrap();
        let d = half.right_derivative(3.0, DEFAULT_DERIVATIVE_STEP).unwrap();
        assert!(d.converged && (d.value - 0.5).abs() < 1e-12);
        // inside the removed middle third h is flat, so g' = 1/2
        let c = cantor_path();
        let d = c.right_derivative(0.5, DEFAULT_DERIVATIVE_STEP).unwrap();
        assert!(d.converged && (d.value - 0.5).abs() < 1e-9, "{d:?}");
        let d = c.right_derivative(0.0, DEFAULT_DERIVATIVE_STEP).unwrap();
        assert!(!d.converged, "{d:?}");
    }

    #[test]
    fn derivative_needs_forward_room() {
        let p = GeneratingPath::new(
            PathRule::Linear { slope: 1.0, intercept: 0.0 },
            Interval::closed(0.0, 1.0).unwrap(),
            Interval::closed(0.0, 1.0).unwrap(),
        )
        .unwrap();
        assert_eq!(p.right_derivative(1.0, 0.1), Err(PathError::DerivativeUndefined { at: 1.0 }));
        assert!(p.right_derivative(0.99, 0.1).unwrap().converged);
    }

    #[test]
    fn derivative_at_flat_start_of_parabola_is_zero() {
        let p = GeneratingPath::onto(PathRule::Builtin(BuiltinPath::ParabolaUp), Interval::closed_open(0.0, f64::INFINITY).unwrap())
            .unwrap();
        let d = p.right_derivative(0.0, DEFAULT_DERIVATIVE_STEP).unwrap();
        assert!(d.converged && d.value.abs() < 1e-8, "{d:?}");
    }

    #[test]
    fn anchoring_shifts_domain() {
        let p = GeneratingPath::new(
            PathRule::Linear { slope: 2.0, intercept: 0.0 },
            Interval::closed_open(1.0, 2.0).unwrap(),
            Interval::closed_open(2.0, 4.0).unwrap(),
        )
        .unwrap();
        let q = p.anchored_at(3.0).unwrap();
        assert!((q.eval(0.0).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(q.domain().lo, -0.5);
        assert!(q.surjectivity_defect().is_ok());
    }

    #[test]
    fn surjectivity() {
        assert!(cantor_path().surjectivity_defect().is_ok());
        let wrong = GeneratingPath::new(
            PathRule::Linear { slope: 1.0, intercept: 0.0 },
            Interval::open(0.0, f64::INFINITY).unwrap(),
            Interval::open(1.0, f64::INFINITY).unwrap(),
        )
        .unwrap();
        assert!(wrong.surjectivity_defect().is_err());
        let closure = GeneratingPath::new(
            PathRule::Linear { slope: 1.0, intercept: 0.0 },
            Interval::open(0.0, f64::INFINITY).unwrap(),
            Interval::closed_open(0.0, f64::INFINITY).unwrap(),
        )
        .unwrap();
        assert!(closure.surjectivity_defect().is_err());
    }
}
