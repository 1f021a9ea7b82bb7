//! Bracketed bisection for scalar equations with a known sign change.

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOutcome<T> {
    pub root: T,
    pub residual: T,
    pub iterations: usize,
    /// Final bracket, always containing the sign change.
    pub lo: T,
    pub hi: T,
}

/// Bisects `[lo, hi]` where `f(lo)` and `f(hi)` have opposite signs.
///
/// Stops when `|f(mid)| <= ftol`, when the bracket is narrower than `xtol`,
/// or when the midpoint is no longer representable between the endpoints.
/// Returns `None` if the endpoints do not bracket a sign change.
pub fn bisect<T: Real, F: Fn(T) -> T>(f: F, mut lo: T, mut hi: T, ftol: T, xtol: T) -> Option<RootOutcome<T>> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == T::zero() {
        return Some(RootOutcome { root: lo, residual: f_lo, iterations: 0, lo, hi: lo });
    }
    if f_hi == T::zero() {
        return Some(RootOutcome { root: hi, residual: f_hi, iterations: 0, lo: hi, hi });
    }
    if (f_lo < T::zero()) == (f_hi < T::zero()) {
        return None;
    }
    let two = T::one() + T::one();
    let mut iterations = 0;
    loop {
        let mid = lo + (hi - lo) / two;
        let f_mid = f(mid);
        iterations += 1;
        if f_mid.abs() <= ftol || (hi - lo) <= xtol || mid <= lo || mid >= hi {
            return Some(RootOutcome { root: mid, residual: f_mid, iterations, lo, hi });
        }
        if (f_mid < T::zero()) == (f_lo < T::zero()) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
}
