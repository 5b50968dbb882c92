//! Critical initial asset prices.
//!
//! For a lower barrier `B_l(t)` the critical curve
//! `S_l(t) = B_l(t) exp(nu sigma sqrt(t) - mu1 t)` is the smallest initial price
//! for which `P(S_t > B_l(t))` reaches `Φ(nu)`; its maximum over `[0, T]` is
//! `s_ml`, the price above which the lower barrier is worthless. The upper side
//! mirrors this with `S_u(t) = B_u(t) exp(-(nu sigma sqrt(t) + mu1 t))` and its
//! minimum `s_mu`.

use crate::error::{Error, Result};
use crate::model::{BarrierCurve, BarrierSet, CriticalPrice, CriticalPrices, MarketParams};
use crate::numerics::{self, GOLDEN_TOL};

/// Drift of the log price, `mu - sigma^2 / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftAdjusted(pub f64);

impl DriftAdjusted {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn mu1(params: &MarketParams) -> DriftAdjusted {
    DriftAdjusted(params.log_drift())
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive {
            name: "t",
            value: t,
        })
    }
}

/// `P(S_t > B_l(t)) = Φ((mu1 t + ln(s0 / B_l(t))) / (sigma sqrt(t)))`.
pub fn prob_above_lower(
    params: &MarketParams,
    lower: &BarrierCurve,
    s0: f64,
    t: f64,
) -> Result<f64> {
    check_time(t)?;
    let b = lower.barrier_at(t, params.horizon())?;
    let omega = (params.log_drift() * t + (s0 / b).ln()) / (params.sigma() * t.sqrt());
    Ok(numerics::std_normal_cdf(omega))
}

/// `P(S_t < B_u(t)) = Φ((ln(B_u(t) / s0) - mu1 t) / (sigma sqrt(t)))`.
pub fn prob_below_upper(
    params: &MarketParams,
    upper: &BarrierCurve,
    s0: f64,
    t: f64,
) -> Result<f64> {
    check_time(t)?;
    let b = upper.barrier_at(t, params.horizon())?;
    let omega = ((b / s0).ln() - params.log_drift() * t) / (params.sigma() * t.sqrt());
    Ok(numerics::std_normal_cdf(omega))
}

pub fn lower_critical_curve(params: &MarketParams, lower: &BarrierCurve, nu: f64, t: f64) -> f64 {
    let exponent = nu * params.sigma() * t.sqrt() - params.log_drift() * t;
    lower.value(t) * exponent.exp()
}

pub fn upper_critical_curve(params: &MarketParams, upper: &BarrierCurve, nu: f64, t: f64) -> f64 {
    let exponent = nu * params.sigma() * t.sqrt() + params.log_drift() * t;
    upper.value(t) * (-exponent).exp()
}

/// Stationary time `(nu sigma / (2 mu1))^2` shared by both flat-barrier critical
/// curves; `None` when `mu1 == 0` and the curves are monotone.
pub fn turning_point(params: &MarketParams, nu: f64) -> Option<f64> {
    let mu1 = params.log_drift();
    if mu1 == 0.0 {
        return None;
    }
    let root = nu * params.sigma() / (2.0 * mu1);
    Some(root * root)
}

/// `s_ml` for a flat lower barrier, with the time at which `S_l` peaks.
pub fn s_ml_flat(params: &MarketParams, level: f64, nu: f64) -> CriticalPrice {
    let mu1 = params.log_drift();
    let horizon = params.horizon();
    let time = match turning_point(params, nu) {
        Some(tp) if mu1 > 0.0 && tp < horizon => tp,
        _ => horizon,
    };
    let exponent = nu * params.sigma() * time.sqrt() - mu1 * time;
    CriticalPrice {
        price: level * exponent.exp(),
        time,
    }
}

/// `s_mu` for a flat upper barrier, with the time at which `S_u` bottoms out.
pub fn s_mu_flat(params: &MarketParams, level: f64, nu: f64) -> CriticalPrice {
    let mu1 = params.log_drift();
    let horizon = params.horizon();
    let time = match turning_point(params, nu) {
        Some(tp) if mu1 < 0.0 && tp < horizon => tp,
        _ => horizon,
    };
    let exponent = nu * params.sigma() * time.sqrt() + mu1 * time;
    CriticalPrice {
        price: level * (-exponent).exp(),
        time,
    }
}

/// Critical prices for every barrier present: the maximum of `S_l` and the
/// minimum of `S_u` over `[0, T]`. Flat barriers use the closed forms; any other
/// curve goes through a scan-and-refine search.
pub fn critical_prices(
    params: &MarketParams,
    barriers: &BarrierSet,
    nu: f64,
) -> Result<CriticalPrices> {
    if barriers.is_empty() {
        return Err(Error::EmptyBarrierSet);
    }
    if !(nu.is_finite() && nu >= 0.0) {
        return Err(Error::NonPositive {
            name: "nu",
            value: nu,
        });
    }
    let horizon = params.horizon();
    let lower = match &barriers.lower {
        None => None,
        Some(BarrierCurve::Flat(level)) => Some(s_ml_flat(params, *level, nu)),
        Some(curve) => {
            let r = numerics::maximize_on_interval(
                |t| lower_critical_curve(params, curve, nu, t),
                0.0,
                horizon,
                GOLDEN_TOL,
            )?;
            Some(CriticalPrice {
                price: r.value,
                time: r.argument,
            })
        }
    };
    let upper = match &barriers.upper {
        None => None,
        Some(BarrierCurve::Flat(level)) => Some(s_mu_flat(params, *level, nu)),
        Some(curve) => {
            let r = numerics::minimize_on_interval(
                |t| upper_critical_curve(params, curve, nu, t),
                0.0,
                horizon,
                GOLDEN_TOL,
            )?;
            Some(CriticalPrice {
                price: r.value,
                time: r.argument,
            })
        }
    };
    Ok(CriticalPrices { lower, upper })
}
