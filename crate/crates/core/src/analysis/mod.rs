//! Semigroup, generator, symbol and classification of structures.

mod defect;
mod feller;
mod rich;
mod testfn;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::paths::{DerivativeEstimate, PathError, DEFAULT_DERIVATIVE_STEP};
use crate::process::{evaluate, ProcessError};
use crate::report::fmt_f64;
use crate::structure::{DomainKind, Structure};

pub use defect::{ac_defect, ac_defect_closed_form, AcDefect};
pub use feller::{is_cb_feller, is_feller, numeric_feller_check, FellerCheckConfig, NumericFellerOutcome};
pub use rich::{is_rich, RichConfig};
pub use testfn::TestFunction;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("generator undefined at {x}: derivative estimate did not converge ({estimate:?})")]
    GeneratorUndefined { x: f64, estimate: DerivativeEstimate },
    #[error("symbol undefined at {x}: derivative estimate did not converge ({estimate:?})")]
    SymbolUndefined { x: f64, estimate: DerivativeEstimate },
    #[error("unsupported representation: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Process(#[from] ProcessError),
    #[error(transparent)]
    Path(#[from] PathError),
}

/// `T_t u(x) = u(X_t^x)`.
pub fn semigroup_apply(s: &Structure, u: &TestFunction, t: f64, x: f64) -> Result<f64, ProcessError> {
    Ok(u.value(evaluate(s, x, t)?))
}

/// Speed `path'(path^{-1}(x))` of the trajectory through `x`; zero in
/// constant domains.
pub fn drift_estimate(s: &Structure, x: f64) -> Result<DerivativeEstimate, AnalysisError> {
    let d = s.domain(s.locate(x).index);
    let Some(path) = d.path() else {
        return Ok(DerivativeEstimate { value: 0.0, step_used: 0.0, converged: true });
    };
    let sigma = path.invert_precise(x)?;
    Ok(path.right_derivative(sigma, DEFAULT_DERIVATIVE_STEP)?)
}

/// The drift coefficient `l(x)`, or `None` where the derivative estimate
/// does not converge.
pub fn ito_drift(s: &Structure, x: f64) -> Result<Option<f64>, AnalysisError> {
    let est = drift_estimate(s, x)?;
    Ok(est.converged.then_some(est.value))
}

/// `Au(x) = u'(x) path'(path^{-1}(x))`, zero in constant domains.
pub fn generator_apply(s: &Structure, u: &TestFunction, x: f64) -> Result<f64, AnalysisError> {
    let est = drift_estimate(s, x)?;
    if !est.converged {
        return Err(AnalysisError::GeneratorUndefined { x, estimate: est });
    }
    Ok(u.derivative(x) * est.value)
}

/// `(T_t u(x) - u(x)) / t`, the difference quotient whose limit is `Au(x)`.
pub fn generator_quotient(s: &Structure, u: &TestFunction, x: f64, t: f64) -> Result<f64, ProcessError> {
    Ok((semigroup_apply(s, u, t, x)? - u.value(x)) / t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolValue {
    pub real_part: f64,
    pub imag_part: f64,
}

impl SymbolValue {
    pub const ZERO: SymbolValue = SymbolValue { real_part: 0.0, imag_part: 0.0 };

    pub fn distance(&self, other: &SymbolValue) -> f64 {
        (self.real_part - other.real_part).hypot(self.imag_part - other.imag_part)
    }
}

/// `p(x, xi) = -i xi path'(path^{-1}(x))`; zero in constant domains.
pub fn symbol(s: &Structure, x: f64, xi: f64) -> Result<SymbolValue, AnalysisError> {
    if s.domain(s.locate(x).index).kind() == DomainKind::Const {
        return Ok(SymbolValue::ZERO);
    }
    let est = drift_estimate(s, x)?;
    if !est.converged {
        return Err(AnalysisError::SymbolUndefined { x, estimate: est });
    }
    Ok(SymbolValue { real_part: 0.0, imag_part: -xi * est.value })
}

/// Estimate of the symbol from the stopped trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolLimit {
    pub estimate: SymbolValue,
    /// `(t, -(exp(i (X_t - x) xi) - 1) / t)` for each time.
    pub quotients: Vec<(f64, SymbolValue)>,
    pub converged: bool,
}

/// Times `2^-lo, ..., 2^-hi`.
pub fn dyadic_times(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| 2f64.powi(-k)).collect()
}

/// Limit of `-(exp(i (X_{t ^ sigma} - x) xi) - 1) / t` as `t -> 0`, where
/// `sigma` is the exit time from `[x - r, x + r]`. Uses linear
/// extrapolation in `t` over the last three times; the estimate is flagged
/// unconverged when the two extrapolants differ by more than `10 tol`.
pub fn symbol_via_limit(
    s: &Structure,
    x: f64,
    xi: f64,
    ts: &[f64],
    r: f64,
    tol: f64,
) -> Result<SymbolLimit, AnalysisError> {
    if ts.len() < 3 || ts.windows(2).any(|w| !(w[1] < w[0])) || ts.iter().any(|t| !(*t > 0.0)) {
        return Err(AnalysisError::Unsupported("need at least three strictly decreasing positive times".into()));
    }
    if !(r > 0.0) {
        return Err(AnalysisError::Unsupported(format!("neighbourhood radius {r} must be positive")));
    }
    let mut quotients = Vec::with_capacity(ts.len());
    for &t in ts {
        // a continuous monotone-then-constant path stopped at its exit time is the clamped path
        let stopped = evaluate(s, x, t)?.clamp(x - r, x + r);
        let phase = (stopped - x) * xi;
        let q = SymbolValue { real_part: (1.0 - phase.cos()) / t, imag_part: -phase.sin() / t };
        quotients.push((t, q));
    }
    let n = quotients.len();
    let extrapolate = |a: (f64, SymbolValue), b: (f64, SymbolValue)| {
        let (ta, qa) = a;
        let (tb, qb) = b;
        SymbolValue {
            real_part: (ta * qb.real_part - tb * qa.real_part) / (ta - tb),
            imag_part: (ta * qb.imag_part - tb * qa.imag_part) / (ta - tb),
        }
    };
    let first = extrapolate(quotients[n - 3], quotients[n - 2]);
    let estimate = extrapolate(quotients[n - 2], quotients[n - 1]);
    let converged = first.distance(&estimate) <= 10.0 * tol;
    Ok(SymbolLimit { estimate, quotients, converged })
}

/// Rows `x,xi,re,im`; undefined symbols are written as `nan`.
pub fn symbol_table_csv(s: &Structure, xs: &[f64], xis: &[f64]) -> String {
    let mut out = String::from("x,xi,re,im\n");
    for &x in xs {
        for &xi in xis {
            match symbol(s, x, xi) {
                Ok(p) => {
                    let _ = writeln!(out, "{},{},{},{}", fmt_f64(x), fmt_f64(xi), fmt_f64(p.real_part), fmt_f64(p.imag_part));
                }
                Err(_) => {
                    let _ = writeln!(out, "{},{},nan,nan", fmt_f64(x), fmt_f64(xi));
                }
            }
        }
    }
    out
}

/// Semimartingale characteristics `(B, C, nu)` of the trajectory from `x`
/// at time `t`. `C` and `nu` vanish for continuous finite-variation paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Characteristics {
    pub drift: f64,
    pub quadratic: f64,
    pub jump_mass: f64,
}

pub fn characteristics(s: &Structure, x: f64, t: f64) -> Result<Characteristics, ProcessError> {
    Ok(Characteristics { drift: evaluate(s, x, t)? - x, quadratic: 0.0, jump_mass: 0.0 })
}

/// Trapezoid approximation of `int_0^t l(X_r^x) dr` with `steps` intervals.
pub fn drift_integral(s: &Structure, x: f64, t: f64, steps: usize) -> Result<f64, AnalysisError> {
    let h = t / steps as f64;
    let mut sum = 0.0;
    for k in 0..=steps {
        let y = evaluate(s, x, h * k as f64)?;
        let l = ito_drift(s, y)?.ok_or_else(|| AnalysisError::Unsupported(format!("drift undefined at {y}")))?;
        sum += if k == 0 || k == steps { 0.5 * l } else { l };
    }
    Ok(sum * h)
}

/// `Y_{A(u)} = X_u^x` with `Y_t = path(t)` and `A(u) = u + path^{-1}(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeChange {
    pub a_of_u: f64,
    pub y_value: f64,
    pub residual: f64,
}

/// Time change representation of a single monotone domain structure.
pub fn time_change_representation(s: &Structure, x: f64, u: f64) -> Result<TimeChange, AnalysisError> {
    if !s.is_pure() {
        return Err(AnalysisError::Unsupported(format!("structure {} has more than one domain", s.type_string())));
    }
    let path = s
        .domain(0)
        .path()
        .ok_or_else(|| AnalysisError::Unsupported("a constant structure has no generating path".into()))?;
    let a_of_u = u + path.invert_precise(x)?;
    let y_value = path.eval(a_of_u)?;
    let residual = (y_value - evaluate(s, x, u)?).abs();
    Ok(TimeChange { a_of_u, y_value, residual })
}
