//! Trial-and-error critical prices from an actual pricer, and the cutoff `nu`
//! they imply.
//!
//! A barrier is numerically worthless at `s0` when the knock-out price and the
//! vanilla price agree to within half a unit of the last displayed digit.

use std::cell::RefCell;

use rayon::prelude::*;

use crate::critical::{s_ml_flat, s_mu_flat};
use crate::error::{Error, Result};
use crate::model::{MarketParams, Payoff, Side};
use crate::numerics::find_root_bisect;
use crate::pricing::{bs_vanilla, ClosedFormCall, KnockOutPricer};

/// Bisection tolerance on the initial price.
pub const PRICE_TOL: f64 = 1e-6;
/// Bisection tolerance on `nu`.
pub const NU_TOL: f64 = 1e-10;
pub const NU_MAX: f64 = 20.0;
pub const SWEEP_POINTS: usize = 64;
const BRACKET_SDS: f64 = 10.0;
const MAX_RESTARTS: usize = 64;

pub const TABLE_STRIKE: f64 = 100.0;
pub const TABLE_BARRIER: f64 = 70.0;
pub const TABLE_RATE: f64 = 0.10;
/// `(T, sigma)` for each row of the reference table.
pub const TABLE_ROWS: [(f64, f64); 4] = [(0.25, 0.15), (0.25, 0.30), (0.5, 0.15), (0.5, 0.30)];

pub const PRECISION_NOTE: &str =
    "note: double precision resolves price differences down to about 2.2e-16 of the \
     vanilla price; rows whose critical price needs finer accuracy stop short of it";

/// How closely a knock-out price must match the vanilla price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriceAccuracy {
    /// Absolute accuracy `theta` in currency units.
    Absolute(f64),
    /// Accuracy as a fraction of the vanilla price.
    Relative(f64),
}

impl PriceAccuracy {
    /// `theta = 10^-digits` in absolute terms.
    pub fn digits(digits: u32) -> Self {
        PriceAccuracy::Absolute(10f64.powi(-(digits as i32)))
    }

    /// The finest accuracy double precision can express for a price.
    pub fn double_precision_floor() -> Self {
        PriceAccuracy::Relative(f64::EPSILON)
    }

    fn validate(&self) -> Result<()> {
        let theta = match *self {
            PriceAccuracy::Absolute(t) | PriceAccuracy::Relative(t) => t,
        };
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::InvalidTolerance(theta));
        }
        Ok(())
    }

    /// Largest price difference that still displays as equal.
    pub fn threshold(&self, vanilla: f64) -> f64 {
        match *self {
            PriceAccuracy::Absolute(theta) => 0.5 * theta,
            PriceAccuracy::Relative(theta) => 0.5 * theta * vanilla,
        }
    }
}

/// Whether the barrier at `level` leaves the call price unchanged at `s0`.
pub fn barrier_is_worthless(
    params: &MarketParams,
    strike: f64,
    level: f64,
    side: Side,
    s0: f64,
    accuracy: PriceAccuracy,
    pricer: &dyn KnockOutPricer,
) -> Result<bool> {
    let vanilla = bs_vanilla(params, Payoff::Call, strike, s0).value;
    let premium = pricer.barrier_premium(params, strike, side, level, s0)?;
    Ok(premium.abs() < accuracy.threshold(vanilla))
}

/// Smallest (lower side) or largest (upper side) initial price from which the
/// barrier no longer changes the call price at the given accuracy.
pub fn numeric_critical_price(
    params: &MarketParams,
    strike: f64,
    level: f64,
    side: Side,
    accuracy: PriceAccuracy,
    pricer: &dyn KnockOutPricer,
) -> Result<f64> {
    params.validate()?;
    accuracy.validate()?;
    for (name, value) in [("strike", strike), ("barrier", level)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::NonPositive { name, value });
        }
    }
    let reach = (BRACKET_SDS * params.sigma() * params.horizon().sqrt()).exp();
    // Work in a coordinate where "further from the barrier" is always increasing.
    let (near, far) = match side {
        Side::Lower => (level * (1.0 + 1e-9), level * reach),
        Side::Upper => (level * (1.0 - 1e-9), level / reach),
    };
    let worthless =
        |s0: f64| barrier_is_worthless(params, strike, level, side, s0, accuracy, pricer);
    let at = |u: f64| near + u * (far - near);

    if worthless(near)? {
        return Ok(near);
    }
    if !worthless(far)? {
        return Err(Error::NoBracket { lo: near, hi: far });
    }

    let tol = PRICE_TOL / (far - near).abs();
    let mut lo = 0.0;
    for _ in 0..MAX_RESTARTS {
        let failure = RefCell::new(None);
        let indicator = |u: f64| match worthless(at(u)) {
            Ok(true) => 1.0,
            Ok(false) => -1.0,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                -1.0
            }
        };
        let u = find_root_bisect(indicator, lo, 1.0, tol)?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        // Confirm that nothing further out re-enters the non-worthless region.
        let mut relapse = None;
        for k in 1..=SWEEP_POINTS {
            let v = u + (1.0 - u) * k as f64 / SWEEP_POINTS as f64;
            if !worthless(at(v))? {
                relapse = Some(v);
            }
        }
        match relapse {
            None => {
                let hi = (u + tol).min(1.0);
                return Ok(if worthless(at(u))? { at(u) } else { at(hi) });
            }
            Some(v) => lo = v,
        }
    }
    Err(Error::ResourceLimit(format!(
        "critical price sweep kept finding re-crossings after {MAX_RESTARTS} restarts"
    )))
}

/// The cutoff `nu` at which the flat-barrier critical price equals `s_crit`.
pub fn implied_nu(params: &MarketParams, level: f64, side: Side, s_crit: f64) -> Result<f64> {
    params.validate()?;
    let critical = |nu: f64| match side {
        Side::Lower => s_ml_flat(params, level, nu).price,
        Side::Upper => s_mu_flat(params, level, nu).price,
    };
    // s_ml grows with nu, s_mu shrinks with it
    let gap = |nu: f64| match side {
        Side::Lower => critical(nu) - s_crit,
        Side::Upper => s_crit - critical(nu),
    };
    if !(s_crit.is_finite() && gap(0.0) <= 0.0 && gap(NU_MAX) >= 0.0) {
        return Err(Error::Unattainable(s_crit));
    }
    if gap(0.0) == 0.0 {
        return Ok(0.0);
    }
    find_root_bisect(gap, 0.0, NU_MAX, NU_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationRow {
    pub horizon: f64,
    pub sigma: f64,
    pub analytic_s_ml: f64,
    pub numeric_s_ml: f64,
    pub implied_nu: f64,
}

/// One row of the calibration experiment for a lower barrier.
pub fn calibration_row(
    params: &MarketParams,
    strike: f64,
    level: f64,
    reference_nu: f64,
    accuracy: PriceAccuracy,
) -> Result<CalibrationRow> {
    let analytic = s_ml_flat(params, level, reference_nu).price;
    let numeric = numeric_critical_price(
        params,
        strike,
        level,
        Side::Lower,
        accuracy,
        &ClosedFormCall,
    )?;
    let nu = implied_nu(params, level, Side::Lower, numeric)?;
    Ok(CalibrationRow {
        horizon: params.horizon(),
        sigma: params.sigma(),
        analytic_s_ml: analytic,
        numeric_s_ml: numeric,
        implied_nu: nu,
    })
}

/// The four-row down-and-out table at `K = 100`, `B = 70`, `r = 0.10`.
pub fn reproduce_table1(reference_nu: f64, accuracy: PriceAccuracy) -> Result<Vec<CalibrationRow>> {
    TABLE_ROWS
        .par_iter()
        .map(|&(horizon, sigma)| {
            let params = MarketParams::new(TABLE_RATE, sigma, horizon)?;
            calibration_row(&params, TABLE_STRIKE, TABLE_BARRIER, reference_nu, accuracy)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn experiment() -> MarketParams {
        MarketParams::new(0.10, 0.30, 0.25).unwrap()
    }

    #[test]
    fn tighter_accuracy_moves_critical_price_out() {
        let p = experiment();
        let mut last = 0.0;
        for digits in [2, 4, 6] {
            let s = numeric_critical_price(
                &p,
                100.0,
                70.0,
                Side::Lower,
                PriceAccuracy::digits(digits),
                &ClosedFormCall,
            )
            .unwrap();
            assert!(s >= last, "{digits} digits: {s} < {last}");
            last = s;
        }
    }

    #[test]
    fn found_price_is_worthless_and_just_below_is_not() {
        let p = experiment();
        let acc = PriceAccuracy::digits(4);
        let s = numeric_critical_price(&p, 100.0, 70.0, Side::Lower, acc, &ClosedFormCall).unwrap();
        assert!(
            barrier_is_worthless(&p, 100.0, 70.0, Side::Lower, s, acc, &ClosedFormCall).unwrap()
        );
        assert!(!barrier_is_worthless(
            &p,
            100.0,
            70.0,
            Side::Lower,
            s - 1e-5,
            acc,
            &ClosedFormCall
        )
        .unwrap());
    }

    #[test]
    fn upper_side_search() {
        let p = experiment();
        let acc = PriceAccuracy::digits(4);
        let s =
            numeric_critical_price(&p, 100.0, 130.0, Side::Upper, acc, &ClosedFormCall).unwrap();
        assert!(s < 130.0);
        assert!(
            barrier_is_worthless(&p, 100.0, 130.0, Side::Upper, s, acc, &ClosedFormCall).unwrap()
        );
        assert!(!barrier_is_worthless(
            &p,
            100.0,
            130.0,
            Side::Upper,
            s + 1e-5,
            acc,
            &ClosedFormCall
        )
        .unwrap());
    }

    #[test]
    fn implied_nu_round_trip() {
        let p = experiment();
        for nu in [0.5, 2.0, 4.9, 6.0] {
            let s = s_ml_flat(&p, 70.0, nu).price;
            assert!((implied_nu(&p, 70.0, Side::Lower, s).unwrap() - nu).abs() < 1e-4);
            let s = s_mu_flat(&p, 130.0, nu).price;
            assert!((implied_nu(&p, 130.0, Side::Upper, s).unwrap() - nu).abs() < 1e-4);
        }
    }

    #[test]
    fn implied_nu_examples() {
        let p = experiment();
        assert!((implied_nu(&p, 70.0, Side::Lower, 156.744).unwrap() - 5.465).abs() < 5e-3);
        let p = MarketParams::new(0.10, 0.15, 0.5).unwrap();
        assert!((implied_nu(&p, 70.0, Side::Lower, 112.0).unwrap() - 4.850).abs() < 5e-3);
    }

    #[test]
    fn implied_nu_out_of_range() {
        let p = experiment();
        assert!(matches!(
            implied_nu(&p, 70.0, Side::Lower, 60.0),
            Err(Error::Unattainable(_))
        ));
        assert!(matches!(
            implied_nu(&p, 70.0, Side::Lower, 1e9),
            Err(Error::Unattainable(_))
        ));
    }

    #[test]
    fn bad_accuracy_rejected() {
        let p = experiment();
        let r = numeric_critical_price(
            &p,
            100.0,
            70.0,
            Side::Lower,
            PriceAccuracy::Absolute(0.0),
            &ClosedFormCall,
        );
        assert!(matches!(r, Err(Error::InvalidTolerance(_))));
    }
}
