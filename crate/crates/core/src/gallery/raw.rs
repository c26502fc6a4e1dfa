//! Process families defined by one explicit path and first hitting times.
//! These are Markov but not Hunt, so they have no domain structure.
//!
//! Block membership is decided on `u = 1 - t`, which is exact for
//! `t >= 1/2`; the first block (`t < 1/2`) is handled directly.

use serde::{Deserialize, Serialize};

use crate::process::{ProcessError, ProcessFamily};

/// `(e, m)` with `u = m * 2^e`, `1 <= m < 2`, for positive normal `u`.
fn split_binary(u: f64) -> (i32, f64) {
    let bits = u.to_bits();
    let e = ((bits >> 52) & 0x7ff) as i32 - 1023;
    let m = f64::from_bits((bits & ((1u64 << 52) - 1)) | (1023u64 << 52));
    (e, m)
}

/// The `n` with `2^-(n+1) < u <= 2^-n`, for `0 < u <= 1`.
fn dyadic_block(u: f64) -> u32 {
    let (e, m) = split_binary(u);
    if m == 1.0 {
        (-e) as u32
    } else {
        (-e - 1) as u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RawFamily {
    /// From 0: `t` on `[1 - 2^-k, 1 - 2^-(k+1))` for even `k`, `-t` for
    /// odd `k`, and 0 from time 1 on.
    ZigZag,
    /// From -1: `-1 + t` on the blocks of `A`, `1 - t` on the blocks of
    /// `B`, 0 from time 1 on. Region `n` is `[1 - 2^-n, 1 - 2^-(n+1))`,
    /// cut into blocks of length `4^-(n+1)` that alternate between `A`
    /// and `B`, starting with `A`.
    CadlagCrossing,
}

impl RawFamily {
    pub fn base_start(self) -> f64 {
        match self {
            RawFamily::ZigZag => 0.0,
            RawFamily::CadlagCrossing => -1.0,
        }
    }

    /// The defining path from [`RawFamily::base_start`].
    pub fn base_path(self, t: f64) -> f64 {
        if t >= 1.0 {
            return 0.0;
        }
        match self {
            RawFamily::ZigZag => {
                let k = if t < 0.5 { 0 } else { dyadic_block(1.0 - t) };
                if k % 2 == 0 {
                    t
                } else {
                    -t
                }
            }
            RawFamily::CadlagCrossing => {
                if cadlag_in_a(t) {
                    -1.0 + t
                } else {
                    1.0 - t
                }
            }
        }
    }

    /// Smallest `t >= 0` with `base_path(t) = x`.
    pub fn hitting_time(self, x: f64) -> Option<f64> {
        if x == self.base_start() {
            return Some(0.0);
        }
        match self {
            RawFamily::ZigZag => {
                if x == 0.0 {
                    return Some(1.0);
                }
                let t = x.abs();
                if t >= 1.0 {
                    return None;
                }
                let k = if t < 0.5 { 0 } else { dyadic_block(1.0 - t) };
                ((k % 2 == 0) == (x > 0.0)).then_some(t)
            }
            RawFamily::CadlagCrossing => {
                if x == 0.0 {
                    return Some(1.0);
                }
                if !(x > -1.0 && x <= 1.0) {
                    return None;
                }
                // u = 1 - t is exact: -x on A, x on B
                let (u, want_a) = if x < 0.0 { (-x, true) } else { (x, false) };
                (cadlag_in_a_from_u(u) == want_a).then_some(1.0 - u)
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RawFamily::ZigZag => "zig_zag",
            RawFamily::CadlagCrossing => "cadlag_crossing",
        }
    }
}

fn cadlag_in_a(t: f64) -> bool {
    if t < 0.5 {
        // region 0, blocks of length 1/4
        return ((t * 4.0).floor() as u64).is_multiple_of(2);
    }
    cadlag_in_a_from_u(1.0 - t)
}

/// Membership in `A` of `t = 1 - u` for `0 < u <= 1`.
fn cadlag_in_a_from_u(u: f64) -> bool {
    if u > 0.5 {
        return (((1.0 - u) * 4.0).floor() as u64).is_multiple_of(2);
    }
    let n = dyadic_block(u) as i32;
    let offset = 2f64.powi(-n) - u;
    let block = (offset * 4f64.powi(n + 1)).floor() as u64;
    block.is_multiple_of(2)
}

impl ProcessFamily for RawFamily {
    fn position(&self, x: f64, t: f64) -> Result<f64, ProcessError> {
        if !x.is_finite() {
            return Err(ProcessError::BadStart(x));
        }
        if !(t >= 0.0) || !t.is_finite() {
            return Err(ProcessError::BadTime(t));
        }
        Ok(match self.hitting_time(x) {
            Some(tx) => self.base_path(tx + t),
            None => x,
        })
    }
}
