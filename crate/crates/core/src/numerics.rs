//! Standard normal distribution, the tail-accuracy cutoff `nu`, and the
//! one-dimensional search routines used by the critical-price code.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// Default number of uniform samples in the coarse scan of [`maximize_on_interval`].
pub const SCAN_SAMPLES: usize = 1001;
/// Default golden-section tolerance in the argument.
pub const GOLDEN_TOL: f64 = 1e-10;

const INV_GOLDEN: f64 = 0.618_033_988_749_894_9;

/// `Φ(x)`, computed through the complementary error function so that both
/// tails keep full relative precision.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 - Φ(x)` without cancellation.
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// `P(a < Z < b)` for a standard normal `Z`, evaluated in whichever tail avoids
/// subtracting numbers close to one.
pub fn normal_interval_prob(a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let p = if a >= 0.0 {
        std_normal_sf(a) - std_normal_sf(b)
    } else if b <= 0.0 {
        std_normal_cdf(b) - std_normal_cdf(a)
    } else {
        1.0 - std_normal_sf(b) - std_normal_cdf(a)
    };
    p.max(0.0)
}

// Acklam's rational approximation, relative error ~1.15e-9 before refinement.
const A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.38357751867269e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];

fn acklam(p: f64) -> f64 {
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Solves `1 - Φ(x) = q` for `q` in `(0, 1)`, refining in the upper tail.
fn upper_quantile(q: f64) -> f64 {
    let mut x = -acklam(q);
    for _ in 0..3 {
        // f(x) = sf(x) - q, f' = -pdf(x); Halley step
        let err = std_normal_sf(x) - q;
        let u = -err / std_normal_pdf(x);
        let step = u / (1.0 + 0.5 * x * u);
        if !step.is_finite() {
            break;
        }
        x -= step;
    }
    x
}

/// `Φ^{-1}(p)`.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Probability(p));
    }
    if p > 0.5 {
        // 1 - p is exact for p in [0.5, 1)
        Ok(upper_quantile(1.0 - p))
    } else {
        Ok(-upper_quantile(p))
    }
}

/// Smallest `nu` (to one ulp) with `Φ(nu) >= 1 - pi`, i.e. `1 - Φ(nu) <= pi`.
pub fn nu_for_accuracy(pi: f64) -> Result<f64> {
    if !(pi > 0.0 && pi < 0.5) {
        return Err(Error::Probability(pi));
    }
    let mut nu = upper_quantile(pi);
    for _ in 0..64 {
        if std_normal_sf(nu) <= pi {
            break;
        }
        nu = nu.next_up();
    }
    for _ in 0..64 {
        let down = nu.next_down();
        if down > 0.0 && std_normal_sf(down) <= pi {
            nu = down;
        } else {
            break;
        }
    }
    Ok(nu)
}

/// Result of a one-dimensional search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalResult {
    pub argument: f64,
    pub value: f64,
    pub iterations: usize,
}

fn check_interval(a: f64, b: f64, tol: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidInterval { a, b });
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    Ok(())
}

/// Global maximum of a continuous `f` on `[a, b]`: a uniform scan of
/// [`SCAN_SAMPLES`] points picks the best sample, then golden-section search
/// refines inside its neighbouring bracket.
pub fn maximize_on_interval<F>(f: F, a: f64, b: f64, tol_t: f64) -> Result<IntervalResult>
where
    F: Fn(f64) -> f64,
{
    maximize_on_interval_with(f, a, b, tol_t, SCAN_SAMPLES)
}

pub fn maximize_on_interval_with<F>(
    f: F,
    a: f64,
    b: f64,
    tol_t: f64,
    samples: usize,
) -> Result<IntervalResult>
where
    F: Fn(f64) -> f64,
{
    check_interval(a, b, tol_t)?;
    if samples < 2 {
        return Err(Error::InvalidInput(
            "scan needs at least two samples".into(),
        ));
    }
    let n = samples - 1;
    let at = |i: usize| {
        if i == n {
            b
        } else {
            a + (b - a) * i as f64 / n as f64
        }
    };

    // strict comparison keeps the smallest t on ties
    let mut best = 0;
    let mut best_value = f(a);
    for i in 1..=n {
        let v = f(at(i));
        if v > best_value {
            best = i;
            best_value = v;
        }
    }

    let mut lo = at(best.saturating_sub(1));
    let mut hi = at((best + 1).min(n));
    let mut c = hi - INV_GOLDEN * (hi - lo);
    let mut d = lo + INV_GOLDEN * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut iterations = 0;
    while hi - lo > tol_t && iterations < 500 {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_GOLDEN * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_GOLDEN * (hi - lo);
            fd = f(d);
        }
        iterations += 1;
    }

    let mut result = IntervalResult {
        argument: at(best),
        value: best_value,
        iterations,
    };
    for t in [lo, 0.5 * (lo + hi), hi] {
        let v = f(t);
        if v > result.value {
            result.argument = t;
            result.value = v;
        }
    }
    Ok(result)
}

/// Minimum of `f` on `[a, b]` via [`maximize_on_interval`] on `-f`.
pub fn minimize_on_interval<F>(f: F, a: f64, b: f64, tol_t: f64) -> Result<IntervalResult>
where
    F: Fn(f64) -> f64,
{
    let r = maximize_on_interval(|t| -f(t), a, b, tol_t)?;
    Ok(IntervalResult {
        value: -r.value,
        ..r
    })
}

/// Bisection for a sign change of `f` on `[a, b]`; returns the midpoint of the
/// final bracket, whose width is at most `tol_x`.
pub fn find_root_bisect<F>(f: F, a: f64, b: f64, tol_x: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    check_interval(a, b, tol_x)?;
    let (mut lo, mut hi) = (a, b);
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::NoSignChange { a, b });
    }
    for _ in 0..2000 {
        if hi - lo <= tol_x {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
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
