//! Bracketing and bisection for monotone scalar functions.

use crate::error::{Error, Result};

const MAX_ITER: usize = 400;

/// Bisection on `[lo, hi]` where `f(lo)` and `f(hi)` have opposite signs.
///
/// Stops when the bracket width drops below `rel_tol * max(|lo|, |hi|)` or
/// when the midpoint no longer moves in floating point.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::NotBracketed { lo, hi });
    }
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || (hi - lo) <= rel_tol * lo.abs().max(hi.abs()) {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Finds a bracket for an increasing sign change of `f` on `(0, ∞)`.
///
/// `f` must be negative just above zero and positive for large arguments.
/// Starting from `guess`, the upper end is doubled until `f > 0` and the
/// lower end is halved until `f < 0`.
pub fn bracket_positive_axis<F>(f: F, guess: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let guess = if guess.is_finite() && guess > 0.0 { guess } else { 1.0 };
    let mut lo = guess;
    let mut hi = guess;
    let mut tries = 0;
    while f(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        tries += 1;
        if tries > 1100 || !hi.is_finite() {
            return Err(Error::NotBracketed { lo: guess, hi });
        }
    }
    if lo == hi {
        tries = 0;
        lo = 0.5 * hi;
        while f(lo) >= 0.0 {
            hi = lo;
            lo *= 0.5;
            tries += 1;
            if tries > 1100 || lo == 0.0 {
                return Err(Error::NotBracketed { lo, hi: guess });
            }
        }
    }
    Ok((lo, hi))
}
