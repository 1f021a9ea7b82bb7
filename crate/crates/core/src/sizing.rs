//! Grid-resolution selection.
//!
//! The refined rule (RUGNIK) picks the per-axis resolution `m` minimizing the
//! bound `(d r^2 / K) h(m)` on the expected deviation of the K-means objective
//! between the noisy grid synopsis and the raw data, where
//!
//! ```text
//! h(m) = sqrt(2) m^(d/2) / (eps K^(2/d)) + 2 sqrt(N/3) / (m K^(1/d)) + N / (3 m^2)
//! ```
//!
//! `h` is convex for `d >= 2`, and `h'(m) = d / (sqrt(2) eps K^(2/d) m^3) * xi(m)`
//! with
//!
//! ```text
//! xi(m) = m^(d/2+2) - rho K^(1/d) m - rho sqrt(N/3) K^(2/d),   rho = (eps/d) sqrt(8N/3)
//! ```
//!
//! `xi` has exactly one positive root, which is found by bisection. The
//! baseline rule (EUGkM) is `M = (N eps / 10)^(2d/(2+d))`, independent of K.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::root::bisect;
use crate::scalar::Real;

/// Default stopping tolerance on `|xi|`.
pub const DEFAULT_XI_TOL: f64 = 1e-10;
const BRACKET_LO: f64 = 1e-6;
const BRACKET_LIMIT: f64 = 1e15;
const BRACKET_XTOL: f64 = 1e-12;

/// Derived constants for one `(N, d, K, epsilon)` configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizingParams<T> {
    n: usize,
    d: usize,
    k: usize,
    epsilon: T,
    rho: T,
    eta: T,
    gamma: T,
    eps0: T,
    eps1: T,
}

impl<T: Real> SizingParams<T> {
    pub fn new(n: usize, d: usize, k: usize, epsilon: T) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension {
                d,
                reason: "grid sizing requires d >= 2 (h is convex only for d >= 2)",
            });
        }
        if n == 0 || k == 0 {
            return Err(Error::InvalidParameter(format!(
                "N and K must be positive, got N = {n}, K = {k}"
            )));
        }
        if !(epsilon > T::zero()) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive and finite, got {epsilon}"
            )));
        }
        let nf = T::of_usize(n);
        let df = T::of_usize(d);
        let kf = T::of_usize(k);
        let three = T::of(3.0);
        let root_n3 = (nf / three).sqrt();
        let rho = epsilon / df * (T::of(8.0) * nf / three).sqrt();
        let eta = rho * (T::one() + root_n3);
        let gamma = T::one() / (T::one() + root_n3);
        let eps0 = df * (three * kf / (T::of(8.0) * nf)).sqrt() * gamma;
        let eps1 = df * (T::of(2.0) * kf).sqrt() / three
            * (T::of(4.0) * nf / three).powf(df / T::of(4.0));
        Ok(Self {
            n,
            d,
            k,
            epsilon,
            rho,
            eta,
            gamma,
            eps0,
            eps1,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn epsilon(&self) -> T {
        self.epsilon
    }
    /// `(eps/d) sqrt(8N/3)`
    pub fn rho(&self) -> T {
        self.rho
    }
    /// `rho (1 + sqrt(N/3))`
    pub fn eta(&self) -> T {
        self.eta
    }
    /// `(1 + sqrt(N/3))^-1`
    pub fn gamma(&self) -> T {
        self.gamma
    }
    /// Smallest epsilon for which the lower bound on M holds.
    pub fn eps0(&self) -> T {
        self.eps0
    }
    /// Largest epsilon for which the upper bound on M holds.
    pub fn eps1(&self) -> T {
        self.eps1
    }

    /// `[eps0, eps1]` rounded outward to `decimals` places: eps0 up, eps1 down,
    /// so the printed range never claims more than holds.
    pub fn threshold_range_rounded(&self, decimals: i32) -> (f64, f64) {
        let scale = 10f64.powi(decimals);
        // snap away representation noise before directed rounding
        let snap = |x: f64| (x * scale * 1e9).round() / 1e9;
        (
            snap(self.eps0.as_f64()).ceil() / scale,
            snap(self.eps1.as_f64()).floor() / scale,
        )
    }

    pub(crate) fn k_pow(&self, num: f64) -> T {
        T::of_usize(self.k).powf(T::of(num) / T::of_usize(self.d))
    }

    pub(crate) fn root_n3(&self) -> T {
        (T::of_usize(self.n) / T::of(3.0)).sqrt()
    }
}

/// Builds [`SizingParams`]; `d < 2` is rejected.
pub fn make_params<T: Real>(n: usize, d: usize, k: usize, epsilon: T) -> Result<SizingParams<T>> {
    SizingParams::new(n, d, k, epsilon)
}

/// `xi(m) = m^(d/2+2) - rho K^(1/d) m - rho sqrt(N/3) K^(2/d)`.
pub fn xi<T: Real>(m: T, p: &SizingParams<T>) -> T {
    let d = T::of_usize(p.d);
    let two = T::of(2.0);
    m.powf(d / two + two) - p.rho * p.k_pow(1.0) * m - p.rho * p.root_n3() * p.k_pow(2.0)
}

/// The deviation-bound shape `h(m)`; the bound itself is `(d r^2 / K) h(m)`.
pub fn h<T: Real>(m: T, p: &SizingParams<T>) -> T {
    let d = T::of_usize(p.d);
    let two = T::of(2.0);
    let nf = T::of_usize(p.n);
    two.sqrt() * m.powf(d / two) / (p.epsilon * p.k_pow(2.0))
        + two / (m * p.k_pow(1.0)) * p.root_n3()
        + nf / (T::of(3.0) * m * m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizingMethod {
    Rugnik,
    Eugkm,
}

/// How the continuous root is turned into an integer resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridRounding {
    /// `max(1, floor(m + 1/2))`.
    HalfUp,
    /// Whichever of `floor(m)` and `ceil(m)` has the smaller `h`; the exact
    /// integer minimizer since `h` is convex. Ties go to the coarser grid.
    #[default]
    BoundArgmin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridChoice<T> {
    pub m_continuous: T,
    pub m: usize,
    /// `m^d`
    pub cells: usize,
    pub method: SizingMethod,
}

impl<T> GridChoice<T> {
    /// Fewer cells than clusters: K distinct grid centres cannot exist.
    pub fn is_degenerate(&self, k: usize) -> bool {
        self.cells < k
    }
}

pub fn round_half_up<T: Real>(x: T) -> usize {
    (x + T::of(0.5)).floor().to_usize().unwrap_or(0).max(1)
}

fn pow_cells(m: usize, d: usize) -> Result<usize> {
    u32::try_from(d)
        .ok()
        .and_then(|e| m.checked_pow(e))
        .ok_or(Error::Overflow {
            m,
            d,
            limit: usize::MAX,
        })
}

/// Solves `xi(m) = 0` by bisection and rounds with [`GridRounding::BoundArgmin`].
pub fn solve_rugnik<T: Real>(p: &SizingParams<T>, tol: T) -> Result<GridChoice<T>> {
    solve_rugnik_with(p, tol, GridRounding::default())
}

/// Continuous positive root of `xi`.
///
/// The bracket starts at `[1e-6, 1]` and `hi` doubles until `xi(hi) > 0`.
/// Bisection stops at `|xi| <= tol` or bracket width `<= 1e-12`.
pub fn rugnik_root<T: Real>(p: &SizingParams<T>, tol: T) -> Result<T> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let f = |m: T| xi(m, p);
    let mut lo = T::of(BRACKET_LO);
    while f(lo) >= T::zero() && lo > T::min_positive_value() {
        lo = lo / T::of(2.0);
    }
    let mut hi = T::one();
    while f(hi) <= T::zero() {
        hi = hi * T::of(2.0);
        if hi > T::of(BRACKET_LIMIT) || !hi.is_finite() {
            return Err(Error::BracketFailure { hi: hi.as_f64() });
        }
    }
    let lo = if hi > T::one() { (hi / T::of(2.0)).max(lo) } else { lo };
    let out = bisect(f, lo, hi, tol, T::of(BRACKET_XTOL))
        .ok_or(Error::BracketFailure { hi: hi.as_f64() })?;
    Ok(out.root)
}

pub fn solve_rugnik_with<T: Real>(
    p: &SizingParams<T>,
    tol: T,
    rounding: GridRounding,
) -> Result<GridChoice<T>> {
    let m_continuous = rugnik_root(p, tol)?;
    let m = match rounding {
        GridRounding::HalfUp => round_half_up(m_continuous),
        GridRounding::BoundArgmin => {
            let lower = m_continuous.floor().to_usize().unwrap_or(0).max(1);
            let upper = lower + 1;
            if h(T::of_usize(upper), p) < h(T::of_usize(lower), p) {
                upper
            } else {
                lower
            }
        }
    };
    Ok(GridChoice {
        m_continuous,
        m,
        cells: pow_cells(m, p.d)?,
        method: SizingMethod::Rugnik,
    })
}

/// Baseline rule: `M_raw = (N eps / 10)^(2d/(2+d))`, rounded per axis as
/// `m = max(1, round_half_up(M_raw^(1/d)))`, then `M = m^d`.
pub fn eugkm<T: Real>(n: usize, d: usize, epsilon: T) -> Result<GridChoice<T>> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidParameter(format!(
            "N and d must be positive, got N = {n}, d = {d}"
        )));
    }
    if !(epsilon > T::zero()) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    let df = T::of_usize(d);
    let two = T::of(2.0);
    let m_raw = (T::of_usize(n) * epsilon / T::of(10.0)).powf(two * df / (two + df));
    let m_continuous = m_raw.powf(T::one() / df);
    let m = round_half_up(m_continuous);
    Ok(GridChoice {
        m_continuous,
        m,
        cells: pow_cells(m, d)?,
        method: SizingMethod::Eugkm,
    })
}

/// Per-axis bounds on the optimal resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremBounds<T> {
    /// `(eta K^(2/d))^(2/(4+d))`, present when `eps >= eps0`.
    pub m_lower: Option<T>,
    /// `(gamma sqrt(3N) eta K^(2/d))^(2/(4+d))`, present when `eps <= eps1`.
    pub m_upper: Option<T>,
    pub d: usize,
}

impl<T: Real> TheoremBounds<T> {
    /// `floor(m_lower^d)`
    pub fn cells_lower(&self) -> Option<u64> {
        self.m_lower
            .and_then(|m| m.powi(self.d as i32).floor().to_u64())
    }

    /// `ceil(m_upper^d)`
    pub fn cells_upper(&self) -> Option<u64> {
        self.m_upper
            .and_then(|m| m.powi(self.d as i32).ceil().to_u64())
    }
}

pub fn theorem_bounds<T: Real>(p: &SizingParams<T>) -> TheoremBounds<T> {
    let d = T::of_usize(p.d);
    let expo = T::of(2.0) / (T::of(4.0) + d);
    let base = p.eta * p.k_pow(2.0);
    let m_lower = (p.epsilon >= p.eps0).then(|| base.powf(expo));
    let m_upper = (p.epsilon <= p.eps1).then(|| {
        (p.gamma * (T::of(3.0) * T::of_usize(p.n)).sqrt() * base).powf(expo)
    });
    TheoremBounds {
        m_lower,
        m_upper,
        d: p.d,
    }
}

/// The three terms bounding the expected objective deviation at resolution `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationBound<T> {
    pub m: T,
    /// Noise term: `(d r^2 / K^(2/d)) sqrt(2 m^d) / eps`.
    pub t1_bound: T,
    /// Cross term: `sqrt(N/3) d r^2 / (m K^(1/d))`.
    pub t2_bound: T,
    /// Quantization term: `N d r^2 / (3 m^2)`.
    pub t3_exact: T,
    pub h_value: T,
    /// `(1/K)(t1 + 2 t2 + t3)`, equal to `(d r^2 / K) h(m)`.
    pub objective_bound: T,
}

pub fn deviation_bound<T: Real>(m: T, p: &SizingParams<T>, r: T) -> Result<DeviationBound<T>> {
    if !(m > T::zero()) || !(r > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "m and r must be positive, got m = {m}, r = {r}"
        )));
    }
    let d = T::of_usize(p.d);
    let nf = T::of_usize(p.n);
    let dr2 = d * r * r;
    let t1_bound = dr2 / p.k_pow(2.0) * (T::of(2.0) * m.powf(d)).sqrt() / p.epsilon;
    let t2_bound = p.root_n3() * dr2 / (m * p.k_pow(1.0));
    let t3_exact = nf * dr2 / (T::of(3.0) * m * m);
    let kf = T::of_usize(p.k);
    Ok(DeviationBound {
        m,
        t1_bound,
        t2_bound,
        t3_exact,
        h_value: h(m, p),
        objective_bound: (t1_bound + T::of(2.0) * t2_bound + t3_exact) / kf,
    })
}

/// Asymptotic grid size `(N eps)^(2d/(4+d)) K^(4/(4+d))`.
pub fn theta_scaling<T: Real>(n: usize, d: usize, k: usize, epsilon: T) -> T {
    let df = T::of_usize(d);
    let denom = T::of(4.0) + df;
    (T::of_usize(n) * epsilon).powf(T::of(2.0) * df / denom)
        * T::of_usize(k).powf(T::of(4.0) / denom)
}
