use std::fmt;

use serde::{Deserialize, Serialize};

use super::PathError;

/// An interval of the extended real line.
///
/// Infinite endpoints are stored as `f64::INFINITY` / `f64::NEG_INFINITY`
/// and are always open. A degenerate interval `[a, a]` is allowed and
/// represents a single point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Result<Self, PathError> {
        if lo.is_nan() || hi.is_nan() {
            return Err(PathError::InvalidInterval("NaN endpoint".into()));
        }
        if lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(PathError::InvalidInterval(format!(
                "endpoints ({lo}, {hi}) are not ordered"
            )));
        }
        if (lo.is_infinite() && lo_closed) || (hi.is_infinite() && hi_closed) {
            return Err(PathError::InvalidInterval(
                "an infinite endpoint cannot be closed".into(),
            ));
        }
        if lo > hi || (lo == hi && !(lo_closed && hi_closed)) {
            return Err(PathError::InvalidInterval(format!(
                "{} is empty",
                Interval { lo, hi, lo_closed, hi_closed }
            )));
        }
        Ok(Interval { lo, hi, lo_closed, hi_closed })
    }

    /// The whole real line `(-inf, inf)`.
    pub const fn real_line() -> Self {
        Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY, lo_closed: false, hi_closed: false }
    }

    pub fn open(lo: f64, hi: f64) -> Result<Self, PathError> {
        Self::new(lo, hi, false, false)
    }

    pub fn closed(lo: f64, hi: f64) -> Result<Self, PathError> {
        Self::new(lo, hi, true, true)
    }

    /// `[lo, hi)`
    pub fn closed_open(lo: f64, hi: f64) -> Result<Self, PathError> {
        Self::new(lo, hi, true, false)
    }

    /// `(lo, hi]`
    pub fn open_closed(lo: f64, hi: f64) -> Result<Self, PathError> {
        Self::new(lo, hi, false, true)
    }

    pub fn point(x: f64) -> Result<Self, PathError> {
        Self::new(x, x, true, true)
    }

    pub fn is_singleton(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    /// Whether `x` lies in the closure of the interval.
    pub fn closure_contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// The interval translated by `-offset`.
    pub fn shifted_down(&self, offset: f64) -> Interval {
        Interval { lo: self.lo - offset, hi: self.hi - offset, ..*self }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{},{}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_flags_decide_membership() {
        let i = Interval::closed_open(0.0, 1.0).unwrap();
        assert!(i.contains(0.0));
        assert!(!i.contains(1.0));
        assert!(i.closure_contains(1.0));
        let p = Interval::point(2.0).unwrap();
        assert!(p.contains(2.0) && p.is_singleton());
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Interval::new(f64::NEG_INFINITY, 0.0, true, false).is_err());
        assert!(Interval::open(1.0, 1.0).is_err());
        assert!(Interval::open(2.0, 1.0).is_err());
        assert!(Interval::new(f64::NAN, 1.0, false, false).is_err());
    }

    #[test]
    fn display_uses_inf_tokens() {
        assert_eq!(Interval::real_line().to_string(), "(-inf,inf)");
        assert_eq!(Interval::closed_open(0.0, 1.5).unwrap().to_string(), "[0,1.5)");
    }
}
