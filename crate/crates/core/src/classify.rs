//! Which simpler option a knock-out barrier option degenerates into.
//!
//! A lower barrier is worthless once `s0 >= s_ml`, an upper one once
//! `s0 <= s_mu`. The classifiers only ever look at the initial price, the
//! barrier values at inception and the critical prices; strike, payoff and
//! rebates play no role. Starting on a barrier counts as knocked out.

use crate::critical::critical_prices;
use crate::error::{Error, Result};
use crate::model::{BarrierSet, Classification, MarketParams};

pub fn classify_down_and_out(s0: f64, lower_at_inception: f64, s_ml: f64) -> Classification {
    if s0 <= lower_at_inception {
        Classification::KnockedOutAtInception
    } else if s0 >= s_ml {
        Classification::Vanilla
    } else {
        Classification::DownAndOut
    }
}

pub fn classify_up_and_out(s0: f64, upper_at_inception: f64, s_mu: f64) -> Classification {
    if s0 >= upper_at_inception {
        Classification::KnockedOutAtInception
    } else if s0 <= s_mu {
        Classification::Vanilla
    } else {
        Classification::UpAndOut
    }
}

pub fn classify_double(
    s0: f64,
    lower_at_inception: f64,
    upper_at_inception: f64,
    s_ml: f64,
    s_mu: f64,
) -> Classification {
    if s0 <= lower_at_inception || s0 >= upper_at_inception {
        return Classification::KnockedOutAtInception;
    }
    let lower_worthless = s0 >= s_ml;
    let upper_worthless = s0 <= s_mu;
    match (lower_worthless, upper_worthless) {
        (true, true) => Classification::Vanilla,
        (false, true) => Classification::DownAndOut,
        (true, false) => Classification::UpAndOut,
        (false, false) => Classification::TypicalDoubleBarrier,
    }
}

/// Computes the critical prices for `barriers` at cutoff `nu` and classifies `s0`.
pub fn classify(
    params: &MarketParams,
    barriers: &BarrierSet,
    s0: f64,
    nu: f64,
) -> Result<Classification> {
    let critical = critical_prices(params, barriers, nu)?;
    let class = match (
        &barriers.lower,
        &barriers.upper,
        critical.s_ml(),
        critical.s_mu(),
    ) {
        (Some(l), Some(u), Some(s_ml), Some(s_mu)) => {
            classify_double(s0, l.initial(), u.initial(), s_ml, s_mu)
        }
        (Some(l), None, Some(s_ml), _) => classify_down_and_out(s0, l.initial(), s_ml),
        (None, Some(u), _, Some(s_mu)) => classify_up_and_out(s0, u.initial(), s_mu),
        _ => return Err(Error::EmptyBarrierSet),
    };
    Ok(class)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BarrierCurve;
    use Classification::*;

    #[test]
    fn down_and_out_cases() {
        assert_eq!(classify_down_and_out(110.0, 70.0, 98.87), Vanilla);
        assert_eq!(classify_down_and_out(80.0, 70.0, 98.87), DownAndOut);
        assert_eq!(
            classify_down_and_out(70.0, 70.0, 98.87),
            KnockedOutAtInception
        );
        assert_eq!(classify_down_and_out(98.87, 70.0, 98.87), Vanilla);
    }

    #[test]
    fn up_and_out_cases() {
        assert_eq!(classify_up_and_out(85.0, 130.0, 88.04), Vanilla);
        assert_eq!(classify_up_and_out(100.0, 130.0, 88.04), UpAndOut);
        assert_eq!(
            classify_up_and_out(130.0, 130.0, 88.04),
            KnockedOutAtInception
        );
        assert_eq!(classify_up_and_out(88.04, 130.0, 88.04), Vanilla);
    }

    #[test]
    fn double_cases() {
        assert_eq!(
            classify_double(95.0, 70.0, 130.0, 98.87, 88.04),
            TypicalDoubleBarrier
        );
        assert_eq!(classify_double(80.0, 70.0, 130.0, 98.87, 88.04), DownAndOut);
        assert_eq!(classify_double(110.0, 70.0, 130.0, 98.87, 88.04), UpAndOut);
        assert_eq!(classify_double(100.0, 70.0, 130.0, 80.0, 120.0), Vanilla);
        assert_eq!(classify_double(100.0, 70.0, 130.0, 100.0, 100.0), Vanilla);
        assert_eq!(
            classify_double(130.0, 70.0, 130.0, 80.0, 120.0),
            KnockedOutAtInception
        );
        assert_eq!(
            classify_double(70.0, 70.0, 130.0, 80.0, 120.0),
            KnockedOutAtInception
        );
    }

    #[test]
    fn double_closed_boundaries() {
        // s0 sits exactly on s_mu while the lower barrier still matters
        assert_eq!(
            classify_double(88.04, 70.0, 130.0, 98.87, 88.04),
            DownAndOut
        );
        assert_eq!(classify_double(98.87, 70.0, 130.0, 98.87, 88.04), UpAndOut);
    }

    #[test]
    fn classify_from_market_inputs() {
        let p = MarketParams::new(0.10, 0.15, 0.25).unwrap();
        let lower = BarrierSet::lower(BarrierCurve::Flat(70.0));
        assert_eq!(classify(&p, &lower, 110.0, 4.9).unwrap(), Vanilla);
        assert_eq!(classify(&p, &lower, 90.0, 4.9).unwrap(), DownAndOut);
        let both = BarrierSet::double(BarrierCurve::Flat(70.0), BarrierCurve::Flat(130.0));
        assert_eq!(
            classify(&p, &both, 95.0, 4.9).unwrap(),
            TypicalDoubleBarrier
        );
        assert!(classify(&p, &BarrierSet::none(), 95.0, 4.9).is_err());
    }
}
