//! The Cantor function and the strictly increasing path built from it.
//!
//! `cantor_h` reads the ternary expansion of its argument exactly: every
//! finite `f64` in `[0, 1]` is a dyadic rational `m / 2^k`, so the ternary
//! digits can be produced with integer arithmetic instead of repeated
//! floating-point multiplication by three.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::PathError;

/// Default number of ternary digits scanned.
pub const DEFAULT_DEPTH: u32 = 64;

/// Digits beyond this position cannot change an `f64` result.
const MAX_DIGITS: u32 = 128;

/// Cantor function `h` on `[0, 1]`, truncated after `depth` ternary digits.
///
/// Scans the ternary digits of `y`; each digit `0` or `2` contributes a
/// binary digit `0` or `1`, and the first digit `1` contributes a binary
/// `1` and ends the expansion.
pub fn cantor_h(y: f64, depth: u32) -> Result<f64, PathError> {
    if depth == 0 {
        return Err(PathError::InvalidRule("Cantor depth must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&y) {
        return Err(PathError::OutOfDomain { value: y, endpoint: if y < 0.0 { 0.0 } else { 1.0 } });
    }
    Ok(cantor_h_unchecked(y, depth))
}

pub(crate) fn cantor_h_unchecked(y: f64, depth: u32) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    if y >= 1.0 {
        return 1.0;
    }
    let digits = depth.min(MAX_DIGITS);
    let (m, k) = dyadic_parts(y);
    let bits = if k <= 125 {
        binary_digits_u128(m as u128, k, digits)
    } else {
        binary_digits_big(m, k, digits)
    };
    bits as f64 * (-(MAX_DIGITS as f64)).exp2()
}

/// Writes `y = m / 2^k` with `m` odd.
fn dyadic_parts(y: f64) -> (u64, u32) {
    let bits = y.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
    let tz = mant.trailing_zeros();
    let m = mant >> tz;
    let e = e + tz as i64;
    // y < 1 so the exponent is negative
    (m, (-e) as u32)
}

fn emit(acc: &mut u128, position: u32) {
    *acc |= 1u128 << (MAX_DIGITS - position);
}

fn binary_digits_u128(mut r: u128, k: u32, digits: u32) -> u128 {
    let mask = (1u128 << k) - 1;
    let mut acc = 0u128;
    for i in 1..=digits {
        r *= 3;
        let d = r >> k;
        r &= mask;
        match d {
            0 => {}
            1 => {
                emit(&mut acc, i);
                break;
            }
            _ => emit(&mut acc, i),
        }
        if r == 0 {
            break;
        }
    }
    acc
}

fn binary_digits_big(m: u64, k: u32, digits: u32) -> u128 {
    let denom = BigUint::one() << k;
    let three = BigUint::from(3u32);
    let mut r = BigUint::from(m);
    let mut acc = 0u128;
    for i in 1..=digits {
        r *= &three;
        let d = (&r >> k).to_u32().unwrap_or(0);
        r %= &denom;
        match d {
            0 => {}
            1 => {
                emit(&mut acc, i);
                break;
            }
            _ => emit(&mut acc, i),
        }
        if r.is_zero() {
            break;
        }
    }
    acc
}

/// `g(y) = (h(y) + y) / 2`, strictly increasing from `g(0) = 0` to `g(1) = 1`.
pub(crate) fn cantor_g(y: f64, depth: u32) -> f64 {
    0.5 * (cantor_h_unchecked(y, depth) + y)
}

/// The Cantor generating path `x -> g(x - floor(x)) + floor(x)` on the real line.
pub fn cantor_phi(x: f64, depth: u32) -> Result<f64, PathError> {
    if depth == 0 {
        return Err(PathError::InvalidRule("Cantor depth must be at least 1".into()));
    }
    if !x.is_finite() || x.abs() >= 2f64.powi(52) {
        return Err(PathError::InvalidRule(format!("cannot split {x} into integer and fractional part")));
    }
    Ok(cantor_phi_unchecked(x, depth))
}

pub(crate) fn cantor_phi_unchecked(x: f64, depth: u32) -> f64 {
    let n = x.floor();
    cantor_g(x - n, depth) + n
}

/// Inverse of the Cantor path, bisecting `g` on the unit interval containing
/// the fractional part until the bracket cannot shrink further.
pub(crate) fn cantor_phi_inverse(x: f64, depth: u32) -> f64 {
    let n = x.floor();
    let y = x - n;
    if y == 0.0 {
        return n;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = cantor_g(mid, depth);
        if v == y {
            return n + mid;
        }
        if v < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let best = if (y - cantor_g(lo, depth)).abs() <= (cantor_g(hi, depth) - y).abs() { lo } else { hi };
    n + best
}
