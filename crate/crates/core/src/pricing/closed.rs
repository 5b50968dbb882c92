//! Closed-form European prices under GBM with continuous barrier monitoring.
//!
//! The knock-in values are evaluated directly rather than as
//! `vanilla - knock_out`, so that tiny barrier effects (down to the
//! underflow range) keep their relative precision.

use crate::error::{Error, Result};
use crate::model::{MarketParams, Payoff, PriceEstimate, Side};
use crate::numerics::{normal_interval_prob, std_normal_cdf as cdf};

/// Shared pieces of every formula.
struct Inputs {
    s0: f64,
    strike: f64,
    /// `sigma * sqrt(T)`
    vol: f64,
    /// `exp(-q T)`
    carry_df: f64,
    /// `exp(-r T)`
    df: f64,
    /// `(b + sigma^2 / 2) / sigma^2` with carry `b = r - q`
    lambda: f64,
}

impl Inputs {
    fn new(params: &MarketParams, strike: f64, s0: f64) -> Self {
        let sigma = params.sigma();
        let horizon = params.horizon();
        Inputs {
            s0,
            strike,
            vol: sigma * horizon.sqrt(),
            carry_df: (-params.dividend_yield() * horizon).exp(),
            df: (-params.r() * horizon).exp(),
            lambda: (params.mu() + 0.5 * sigma * sigma) / (sigma * sigma),
        }
    }

    /// `(ln(x) / vol) + lambda * vol`
    fn arg(&self, ratio: f64) -> f64 {
        ratio.ln() / self.vol + self.lambda * self.vol
    }

    fn forward_spot(&self) -> f64 {
        self.s0 * self.carry_df
    }

    fn discounted_strike(&self) -> f64 {
        self.strike * self.df
    }
}

fn call_value(x: &Inputs) -> f64 {
    let d1 = x.arg(x.s0 / x.strike);
    let d2 = d1 - x.vol;
    (x.forward_spot() * cdf(d1) - x.discounted_strike() * cdf(d2)).max(0.0)
}

fn put_value(x: &Inputs) -> f64 {
    let d1 = x.arg(x.s0 / x.strike);
    let d2 = d1 - x.vol;
    (x.discounted_strike() * cdf(-d2) - x.forward_spot() * cdf(-d1)).max(0.0)
}

/// Black-Scholes price of a European call or put.
pub fn bs_vanilla(params: &MarketParams, payoff: Payoff, strike: f64, s0: f64) -> PriceEstimate {
    let x = Inputs::new(params, strike, s0);
    PriceEstimate::closed(match payoff {
        Payoff::Call => call_value(&x),
        Payoff::Put => put_value(&x),
    })
}

fn check_alive(side: Side, s0: f64, barrier: f64) -> Result<()> {
    let alive = match side {
        Side::Lower => s0 > barrier,
        Side::Upper => s0 < barrier,
    };
    if alive {
        Ok(())
    } else {
        Err(Error::KnockedOut { side, s0, barrier })
    }
}

/// Down-and-in call with a flat barrier `barrier < s0`: the value the lower
/// barrier removes from the vanilla call.
pub fn down_and_in_call_closed(
    params: &MarketParams,
    strike: f64,
    barrier: f64,
    s0: f64,
) -> Result<f64> {
    check_alive(Side::Lower, s0, barrier)?;
    let x = Inputs::new(params, strike, s0);
    let h = barrier / s0;
    let image_spot = x.forward_spot() * h.powf(2.0 * x.lambda);
    let image_strike = x.discounted_strike() * h.powf(2.0 * x.lambda - 2.0);
    let value = if barrier <= strike {
        let y = x.arg(barrier * barrier / (s0 * strike));
        image_spot * cdf(y) - image_strike * cdf(y - x.vol)
    } else {
        let x1 = x.arg(s0 / barrier);
        let d1 = x.arg(s0 / strike);
        let y1 = x.arg(barrier / s0);
        x.forward_spot() * normal_interval_prob(x1, d1)
            - x.discounted_strike() * normal_interval_prob(x1 - x.vol, d1 - x.vol)
            + image_spot * cdf(y1)
            - image_strike * cdf(y1 - x.vol)
    };
    Ok(value.max(0.0))
}

/// Up-and-in call with a flat barrier `barrier > s0`.
pub fn up_and_in_call_closed(
    params: &MarketParams,
    strike: f64,
    barrier: f64,
    s0: f64,
) -> Result<f64> {
    check_alive(Side::Upper, s0, barrier)?;
    let x = Inputs::new(params, strike, s0);
    if barrier <= strike {
        return Ok(call_value(&x));
    }
    let h = barrier / s0;
    let x1 = x.arg(s0 / barrier);
    let y = x.arg(barrier * barrier / (s0 * strike));
    let y1 = x.arg(barrier / s0);
    let value = x.forward_spot() * cdf(x1) - x.discounted_strike() * cdf(x1 - x.vol)
        + x.forward_spot() * h.powf(2.0 * x.lambda) * normal_interval_prob(-y, -y1)
        - x.discounted_strike()
            * h.powf(2.0 * x.lambda - 2.0)
            * normal_interval_prob(-y + x.vol, -y1 + x.vol);
    Ok(value.max(0.0))
}

/// Down-and-out call, flat barrier, no rebate.
pub fn down_and_out_call_closed(
    params: &MarketParams,
    strike: f64,
    barrier: f64,
    s0: f64,
) -> Result<PriceEstimate> {
    let knock_in = down_and_in_call_closed(params, strike, barrier, s0)?;
    let vanilla = bs_vanilla(params, Payoff::Call, strike, s0).value;
    Ok(PriceEstimate::closed((vanilla - knock_in).max(0.0)))
}

/// Up-and-out call, flat barrier, no rebate. Zero whenever `barrier <= strike`.
pub fn up_and_out_call_closed(
    params: &MarketParams,
    strike: f64,
    barrier: f64,
    s0: f64,
) -> Result<PriceEstimate> {
    check_alive(Side::Upper, s0, barrier)?;
    if barrier <= strike {
        return Ok(PriceEstimate::closed(0.0));
    }
    let knock_in = up_and_in_call_closed(params, strike, barrier, s0)?;
    let vanilla = bs_vanilla(params, Payoff::Call, strike, s0).value;
    Ok(PriceEstimate::closed((vanilla - knock_in).max(0.0)))
}

/// Relative size below which a pair of image terms no longer counts.
pub const IMAGE_SERIES_TOL: f64 = 1e-12;
const MAX_IMAGES: i64 = 10_000;

/// Double knock-out call with barriers `lower * exp(delta_l t)` and
/// `upper * exp(delta_u t)` (flat when `curvature` is `None`), priced by the
/// Kunitomo-Ikeda image series. Terms are added symmetrically in `n` until two
/// consecutive pairs contribute less than `IMAGE_SERIES_TOL * s0`.
pub fn double_knockout_closed(
    params: &MarketParams,
    strike: f64,
    lower: f64,
    upper: f64,
    s0: f64,
    curvature: Option<(f64, f64)>,
) -> Result<PriceEstimate> {
    check_alive(Side::Lower, s0, lower)?;
    check_alive(Side::Upper, s0, upper)?;
    let (delta_l, delta_u) = curvature.unwrap_or((0.0, 0.0));
    let horizon = params.horizon();
    let lower_end = lower * (delta_l * horizon).exp();
    let upper_end = upper * (delta_u * horizon).exp();
    if lower_end >= upper_end {
        return Err(Error::BarrierOrdering {
            t: horizon,
            lower: lower_end,
            upper: upper_end,
        });
    }
    // payoff is collected on (max(K, L_T), U_T)
    let floor = strike.max(lower_end);
    if floor >= upper_end {
        return Ok(PriceEstimate::closed(0.0));
    }

    let sigma2 = params.sigma() * params.sigma();
    let carry = params.mu();
    let vol = params.sigma() * horizon.sqrt();
    let drift = (carry + 0.5 * sigma2) * horizon;
    let (ln_l, ln_u, ln_s) = (lower.ln(), upper.ln(), s0.ln());
    let (ln_floor, ln_cap) = (floor.ln(), upper_end.ln());
    let spot_weight = s0 * ((carry - params.r()) * horizon).exp();
    let strike_weight = strike * (-params.r() * horizon).exp();

    let term = |n: i64| -> f64 {
        let nf = n as f64;
        let mu1 = 2.0 * (carry - delta_l - nf * (delta_u - delta_l)) / sigma2 + 1.0;
        let mu2 = 2.0 * nf * (delta_u - delta_l) / sigma2;
        let mu3 = 2.0 * (carry - delta_l + nf * (delta_u - delta_l)) / sigma2 + 1.0;
        // ln(U^n / L^n), ln(L / S), ln(L^{n+1} / (U^n S))
        let ratio = nf * (ln_u - ln_l);
        let lower_over_spot = ln_l - ln_s;
        let reflected = (nf + 1.0) * ln_l - nf * ln_u - ln_s;

        let shift = 2.0 * nf * (ln_u - ln_l);
        let d1 = (ln_s + shift - ln_floor + drift) / vol;
        let d2 = (ln_s + shift - ln_cap + drift) / vol;
        let mirror = 2.0 * (nf + 1.0) * ln_l - 2.0 * nf * ln_u - ln_s;
        let d3 = (mirror - ln_floor + drift) / vol;
        let d4 = (mirror - ln_cap + drift) / vol;

        let weighted = |log_coeff: f64, prob: f64| -> f64 {
            if prob > 0.0 {
                (log_coeff + prob.ln()).exp()
            } else {
                0.0
            }
        };
        let spot_part = weighted(
            mu1 * ratio + mu2 * lower_over_spot,
            normal_interval_prob(d2, d1),
        ) - weighted(mu3 * reflected, normal_interval_prob(d4, d3));
        let strike_part = weighted(
            (mu1 - 2.0) * ratio + mu2 * lower_over_spot,
            normal_interval_prob(d2 - vol, d1 - vol),
        ) - weighted(
            (mu3 - 2.0) * reflected,
            normal_interval_prob(d4 - vol, d3 - vol),
        );
        spot_weight * spot_part - strike_weight * strike_part
    };

    let mut value = term(0);
    let mut quiet = 0;
    for n in 1..=MAX_IMAGES {
        let pair = term(n) + term(-n);
        value += pair;
        if pair.abs() < IMAGE_SERIES_TOL * s0 {
            quiet += 1;
            if quiet == 2 {
                return Ok(PriceEstimate::closed(value.max(0.0)));
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::ResourceLimit(format!(
        "image series did not settle within {MAX_IMAGES} terms"
    )))
}

/// A pricer for single-barrier knock-out calls, as used by the critical-price
/// search.
pub trait KnockOutPricer: Sync {
    fn knock_out(
        &self,
        params: &MarketParams,
        strike: f64,
        side: Side,
        barrier: f64,
        s0: f64,
    ) -> Result<f64>;

    /// How much the barrier takes off the vanilla price.
    fn barrier_premium(
        &self,
        params: &MarketParams,
        strike: f64,
        side: Side,
        barrier: f64,
        s0: f64,
    ) -> Result<f64> {
        let vanilla = bs_vanilla(params, Payoff::Call, strike, s0).value;
        Ok(vanilla - self.knock_out(params, strike, side, barrier, s0)?)
    }
}

/// The closed forms above, with the knock-in value computed directly.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClosedFormCall;

impl KnockOutPricer for ClosedFormCall {
    fn knock_out(
        &self,
        params: &MarketParams,
        strike: f64,
        side: Side,
        barrier: f64,
        s0: f64,
    ) -> Result<f64> {
        let price = match side {
            Side::Lower => down_and_out_call_closed(params, strike, barrier, s0)?,
            Side::Upper => up_and_out_call_closed(params, strike, barrier, s0)?,
        };
        Ok(price.value)
    }

    fn barrier_premium(
        &self,
        params: &MarketParams,
        strike: f64,
        side: Side,
        barrier: f64,
        s0: f64,
    ) -> Result<f64> {
        match side {
            Side::Lower => down_and_in_call_closed(params, strike, barrier, s0),
            Side::Upper => up_and_in_call_closed(params, strike, barrier, s0),
        }
    }
}
