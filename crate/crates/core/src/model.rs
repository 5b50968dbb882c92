//! Domain types shared by every other module: market parameters, barrier
//! curves, option contracts, the accuracy triple and the results of the
//! critical-price analysis.
//!
//! Time is a plain real measured in years from inception; there are no
//! calendar conventions. All types are immutable once constructed.

use std::fmt;

use crate::error::{Error, Result};
use crate::numerics;

/// Number of uniform points used when checking that two curves never touch.
pub const ORDERING_GRID_POINTS: usize = 1001;

/// Which barrier of a contract is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Lower,
    Upper,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Lower => "lower",
            Side::Upper => "upper",
        })
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::NonPositive { name, value })
    }
}

fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { name, value })
    }
}

/// Geometric Brownian motion parameters, `dS = mu S dt + sigma S dW`, over `[0, horizon]`.
///
/// Built risk-neutrally: the drift is always `r - dividend_yield`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    mu: f64,
    sigma: f64,
    r: f64,
    horizon: f64,
    dividend_yield: f64,
}

impl MarketParams {
    pub fn new(r: f64, sigma: f64, horizon: f64) -> Result<Self> {
        let params = MarketParams {
            mu: r,
            sigma,
            r,
            horizon,
            dividend_yield: 0.0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_dividend_yield(self, dividend_yield: f64) -> Result<Self> {
        let params = MarketParams {
            mu: self.r - dividend_yield,
            dividend_yield,
            ..self
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_horizon(self, horizon: f64) -> Result<Self> {
        let params = MarketParams { horizon, ..self };
        params.validate()?;
        Ok(params)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dividend_yield(&self) -> f64 {
        self.dividend_yield
    }

    /// Drift of `ln S`, `mu - sigma^2 / 2`.
    pub fn log_drift(&self) -> f64 {
        self.mu - 0.5 * self.sigma * self.sigma
    }

    pub fn validate(&self) -> Result<()> {
        positive("sigma", self.sigma)?;
        positive("T", self.horizon)?;
        finite("r", self.r)?;
        finite("dividend_yield", self.dividend_yield)?;
        finite("mu", self.mu)?;
        Ok(())
    }
}

/// Piecewise log-linear curve through strictly increasing knots.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLinear {
    times: Vec<f64>,
    log_levels: Vec<f64>,
}

impl LogLinear {
    pub fn new(knots: &[(f64, f64)]) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidInput(
                "a tabulated barrier needs at least two knots".into(),
            ));
        }
        let mut times = Vec::with_capacity(knots.len());
        let mut log_levels = Vec::with_capacity(knots.len());
        for (index, &(t, level)) in knots.iter().enumerate() {
            finite("knot time", t)?;
            positive("barrier level", level)?;
            if let Some(&prev) = times.last() {
                if t <= prev {
                    return Err(Error::KnotOrder { index });
                }
            }
            times.push(t);
            log_levels.push(level.ln());
        }
        Ok(LogLinear { times, log_levels })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times
            .iter()
            .zip(&self.log_levels)
            .map(|(&t, &l)| (t, l.exp()))
    }

    /// Log-level at `t`; constant extrapolation beyond the end knots.
    fn log_value(&self, t: f64) -> f64 {
        let n = self.times.len();
        if t <= self.times[0] {
            return self.log_levels[0];
        }
        if t >= self.times[n - 1] {
            return self.log_levels[n - 1];
        }
        let hi = self.times.partition_point(|&x| x <= t);
        let lo = hi - 1;
        if t == self.times[lo] {
            return self.log_levels[lo];
        }
        let w = (t - self.times[lo]) / (self.times[hi] - self.times[lo]);
        self.log_levels[lo] + w * (self.log_levels[hi] - self.log_levels[lo])
    }
}

/// A time-dependent absorbing boundary `B(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum BarrierCurve {
    Flat(f64),
    /// `level * exp(growth * t)`.
    Exponential {
        level: f64,
        growth: f64,
    },
    Tabulated(LogLinear),
}

impl BarrierCurve {
    pub fn flat(level: f64) -> Result<Self> {
        positive("barrier level", level)?;
        Ok(BarrierCurve::Flat(level))
    }

    pub fn exponential(level: f64, growth: f64) -> Result<Self> {
        positive("barrier level", level)?;
        finite("barrier growth", growth)?;
        Ok(BarrierCurve::Exponential { level, growth })
    }

    pub fn tabulated(knots: &[(f64, f64)]) -> Result<Self> {
        Ok(BarrierCurve::Tabulated(LogLinear::new(knots)?))
    }

    /// Unchecked evaluation. Tabulated curves are held constant outside their knots.
    pub fn value(&self, t: f64) -> f64 {
        match self {
            BarrierCurve::Flat(b) => *b,
            BarrierCurve::Exponential { level, growth } => level * (growth * t).exp(),
            BarrierCurve::Tabulated(table) => table.log_value(t).exp(),
        }
    }

    pub fn log_value(&self, t: f64) -> f64 {
        match self {
            BarrierCurve::Flat(b) => b.ln(),
            BarrierCurve::Exponential { level, growth } => level.ln() + growth * t,
            BarrierCurve::Tabulated(table) => table.log_value(t),
        }
    }

    /// `B(t)` for `t` in `[0, horizon]`.
    pub fn barrier_at(&self, t: f64, horizon: f64) -> Result<f64> {
        if !(0.0..=horizon).contains(&t) {
            return Err(Error::TimeOutOfRange { t, horizon });
        }
        Ok(self.value(t))
    }

    pub fn initial(&self) -> f64 {
        self.value(0.0)
    }

    pub fn flat_level(&self) -> Option<f64> {
        match self {
            BarrierCurve::Flat(b) => Some(*b),
            _ => None,
        }
    }

    /// `(level, growth)` when the curve is flat or exponential.
    pub fn as_exponential(&self) -> Option<(f64, f64)> {
        match self {
            BarrierCurve::Flat(b) => Some((*b, 0.0)),
            BarrierCurve::Exponential { level, growth } => Some((*level, *growth)),
            BarrierCurve::Tabulated(_) => None,
        }
    }

    pub fn knot_times(&self) -> &[f64] {
        match self {
            BarrierCurve::Tabulated(table) => table.times(),
            _ => &[],
        }
    }

    pub fn validate(&self, horizon: f64) -> Result<()> {
        match self {
            BarrierCurve::Flat(b) => {
                positive("barrier level", *b)?;
            }
            BarrierCurve::Exponential { level, growth } => {
                positive("barrier level", *level)?;
                finite("barrier growth", *growth)?;
                positive("barrier level at T", self.value(horizon))?;
            }
            BarrierCurve::Tabulated(table) => {
                let first = table.times[0];
                let last = *table.times.last().expect("at least two knots");
                if first > 0.0 || last < horizon {
                    return Err(Error::KnotCoverage {
                        first,
                        last,
                        horizon,
                    });
                }
                for w in table.times.windows(2).enumerate() {
                    if w.1[1] <= w.1[0] {
                        return Err(Error::KnotOrder { index: w.0 + 1 });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Lower and/or upper barrier of a contract.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BarrierSet {
    pub lower: Option<BarrierCurve>,
    pub upper: Option<BarrierCurve>,
}

impl BarrierSet {
    pub fn none() -> Self {
        BarrierSet::default()
    }

    pub fn lower(curve: BarrierCurve) -> Self {
        BarrierSet {
            lower: Some(curve),
            upper: None,
        }
    }

    pub fn upper(curve: BarrierCurve) -> Self {
        BarrierSet {
            lower: None,
            upper: Some(curve),
        }
    }

    pub fn double(lower: BarrierCurve, upper: BarrierCurve) -> Self {
        BarrierSet {
            lower: Some(lower),
            upper: Some(upper),
        }
    }

    pub fn get(&self, side: Side) -> Option<&BarrierCurve> {
        match side {
            Side::Lower => self.lower.as_ref(),
            Side::Upper => self.upper.as_ref(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_none() && self.upper.is_none()
    }

    /// Validates each curve and, when both are present, checks `lower(t) < upper(t)`
    /// on a uniform grid plus every tabulated knot.
    pub fn validate(&self, horizon: f64) -> Result<()> {
        if let Some(lower) = &self.lower {
            lower.validate(horizon)?;
        }
        if let Some(upper) = &self.upper {
            upper.validate(horizon)?;
        }
        if let (Some(lower), Some(upper)) = (&self.lower, &self.upper) {
            let n = ORDERING_GRID_POINTS - 1;
            let grid = (0..=n).map(|i| horizon * i as f64 / n as f64);
            let knots = lower
                .knot_times()
                .iter()
                .chain(upper.knot_times())
                .copied()
                .filter(|t| (0.0..=horizon).contains(t));
            for t in grid.chain(knots) {
                let (l, u) = (lower.value(t), upper.value(t));
                if l >= u {
                    return Err(Error::BarrierOrdering {
                        t,
                        lower: l,
                        upper: u,
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Payoff {
    Call,
    Put,
}

impl Payoff {
    pub fn intrinsic(self, spot: f64, strike: f64) -> f64 {
        match self {
            Payoff::Call => (spot - strike).max(0.0),
            Payoff::Put => (strike - spot).max(0.0),
        }
    }
}

impl fmt::Display for Payoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Payoff::Call => "call",
            Payoff::Put => "put",
        })
    }
}

/// A European knock-out contract. Rebates are paid at expiry on breach.
#[derive(Debug, Clone, PartialEq)]
pub struct OptionSpec {
    pub payoff: Payoff,
    pub strike: f64,
    pub barriers: BarrierSet,
    pub rebate_lower: f64,
    pub rebate_upper: f64,
}

impl OptionSpec {
    pub fn new(payoff: Payoff, strike: f64, barriers: BarrierSet) -> Self {
        OptionSpec {
            payoff,
            strike,
            barriers,
            rebate_lower: 0.0,
            rebate_upper: 0.0,
        }
    }

    pub fn with_rebates(mut self, lower: f64, upper: f64) -> Self {
        self.rebate_lower = lower;
        self.rebate_upper = upper;
        self
    }

    pub fn rebate(&self, side: Side) -> f64 {
        match side {
            Side::Lower => self.rebate_lower,
            Side::Upper => self.rebate_upper,
        }
    }

    pub fn validate(&self, horizon: f64) -> Result<()> {
        positive("K", self.strike)?;
        for side in [Side::Lower, Side::Upper] {
            let rebate = self.rebate(side);
            if !(rebate.is_finite() && rebate >= 0.0) {
                return Err(Error::NegativeRebate(rebate));
            }
            if rebate > 0.0 && self.barriers.get(side).is_none() {
                return Err(Error::RebateWithoutBarrier { side });
            }
        }
        self.barriers.validate(horizon)
    }
}

/// Market parameters and contract that passed [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Validated {
    pub params: MarketParams,
    pub spec: OptionSpec,
}

impl Validated {
    pub fn revalidate(self) -> Result<Validated> {
        validate(self.params, self.spec)
    }
}

/// Checks every invariant of the market parameters and the contract.
pub fn validate(params: MarketParams, spec: OptionSpec) -> Result<Validated> {
    params.validate()?;
    spec.validate(params.horizon())?;
    Ok(Validated { params, spec })
}

/// Price accuracy `theta = 10^-digits`, tail accuracy `pi` and the normal cutoff `nu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracySpec {
    pub digits: u32,
    pub theta: f64,
    pub pi: f64,
    pub nu: f64,
}

impl AccuracySpec {
    /// Resolution used when checking that `nu` is the smallest admissible cutoff.
    pub const NU_RESOLUTION: f64 = 1e-9;

    pub fn new(digits: u32, pi: f64) -> Result<Self> {
        if digits == 0 {
            return Err(Error::InvalidInput("digits must be positive".into()));
        }
        let nu = numerics::nu_for_accuracy(pi)?;
        Ok(AccuracySpec {
            digits,
            theta: theta_for_digits(digits),
            pi,
            nu,
        })
    }

    /// Uses the same number of digits for the tail accuracy, `pi = 10^-digits`.
    pub fn from_digits(digits: u32) -> Result<Self> {
        Self::new(digits, theta_for_digits(digits))
    }

    pub fn validate(&self) -> Result<()> {
        if self.theta != theta_for_digits(self.digits) {
            return Err(Error::InvalidInput(format!(
                "theta {} does not match {} digits",
                self.theta, self.digits
            )));
        }
        let tail = numerics::std_normal_sf(self.nu);
        let below = numerics::std_normal_sf(self.nu - Self::NU_RESOLUTION);
        if tail > self.pi || below <= self.pi {
            return Err(Error::InvalidInput(format!(
                "nu {} is not the cutoff for pi {}",
                self.nu, self.pi
            )));
        }
        Ok(())
    }
}

pub fn theta_for_digits(digits: u32) -> f64 {
    10f64.powi(-(digits as i32))
}

/// One extremum of a critical curve: the price and the time it is attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPrice {
    pub price: f64,
    pub time: f64,
}

/// `s_ml` (maximum of the lower critical curve) and `s_mu` (minimum of the upper one).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CriticalPrices {
    pub lower: Option<CriticalPrice>,
    pub upper: Option<CriticalPrice>,
}

impl CriticalPrices {
    pub fn s_ml(&self) -> Option<f64> {
        self.lower.map(|c| c.price)
    }

    pub fn s_mu(&self) -> Option<f64> {
        self.upper.map(|c| c.price)
    }
}

/// The simpler option a barrier option degenerates into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Vanilla,
    DownAndOut,
    UpAndOut,
    TypicalDoubleBarrier,
    KnockedOutAtInception,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Vanilla => "Vanilla",
            Classification::DownAndOut => "DownAndOut",
            Classification::UpAndOut => "UpAndOut",
            Classification::TypicalDoubleBarrier => "TypicalDoubleBarrier",
            Classification::KnockedOutAtInception => "KnockedOutAtInception",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriceMethod {
    Closed,
    MonteCarlo,
    Pde,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceEstimate {
    pub value: f64,
    pub std_error: f64,
    pub method: PriceMethod,
}

impl PriceEstimate {
    pub fn closed(value: f64) -> Self {
        PriceEstimate {
            value,
            std_error: 0.0,
            method: PriceMethod::Closed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> MarketParams {
        MarketParams::new(0.10, 0.30, 0.25).unwrap()
    }

    #[test]
    fn risk_neutral_drift() {
        let p = params();
        assert_eq!(p.mu(), 0.10);
        let q = p.with_dividend_yield(0.03).unwrap();
        assert!((q.mu() - 0.07).abs() < 1e-15);
    }

    #[test]
    fn validate_accepts_plain_down_and_out() {
        let spec = OptionSpec::new(
            Payoff::Call,
            100.0,
            BarrierSet::lower(BarrierCurve::Flat(70.0)),
        );
        let v = validate(params(), spec).unwrap();
        assert!(v.clone().revalidate().is_ok());
    }

    #[test]
    fn validate_rejects_crossed_barriers() {
        let spec = OptionSpec::new(
            Payoff::Call,
            100.0,
            BarrierSet::double(BarrierCurve::Flat(120.0), BarrierCurve::Flat(110.0)),
        );
        assert!(matches!(
            validate(params(), spec),
            Err(Error::BarrierOrdering { .. })
        ));
    }

    #[test]
    fn validate_rejects_bad_domain() {
        assert!(matches!(
            MarketParams::new(0.1, 0.0, 0.25),
            Err(Error::NonPositive { name: "sigma", .. })
        ));
        assert!(matches!(
            MarketParams::new(0.1, 0.2, -1.0),
            Err(Error::NonPositive { name: "T", .. })
        ));
        let spec = OptionSpec::new(Payoff::Put, 0.0, BarrierSet::none());
        assert!(matches!(
            validate(params(), spec),
            Err(Error::NonPositive { name: "K", .. })
        ));
    }

    #[test]
    fn validate_rejects_rebate_without_barrier() {
        let spec = OptionSpec::new(
            Payoff::Call,
            100.0,
            BarrierSet::lower(BarrierCurve::Flat(70.0)),
        )
        .with_rebates(1.0, 2.0);
        assert_eq!(
            validate(params(), spec),
            Err(Error::RebateWithoutBarrier { side: Side::Upper })
        );
    }

    #[test]
    fn tabulated_knots_must_increase_and_cover() {
        assert!(matches!(
            BarrierCurve::tabulated(&[(0.0, 70.0), (0.5, 71.0), (0.5, 72.0)]),
            Err(Error::KnotOrder { index: 2 })
        ));
        let short = BarrierCurve::tabulated(&[(0.0, 70.0), (0.1, 71.0)]).unwrap();
        assert!(matches!(
            short.validate(0.25),
            Err(Error::KnotCoverage { .. })
        ));
    }

    #[test]
    fn barrier_at_examples() {
        assert_eq!(BarrierCurve::Flat(70.0).barrier_at(0.2, 1.0).unwrap(), 70.0);
        let e = BarrierCurve::exponential(70.0, 0.1).unwrap();
        assert_eq!(e.barrier_at(0.0, 1.0).unwrap(), 70.0);
        let tab = BarrierCurve::tabulated(&[(0.0, 70.0), (1.0, 77.0)]).unwrap();
        let mid = tab.barrier_at(0.5, 1.0).unwrap();
        // geometric mean of the end levels
        assert!((mid - (70.0f64 * 77.0).sqrt()).abs() < 1e-12);
        assert!((mid - 73.4166).abs() < 1e-3);
        assert!(matches!(
            tab.barrier_at(1.5, 1.0),
            Err(Error::TimeOutOfRange { .. })
        ));
    }

    #[test]
    fn degenerate_exponential_is_flat() {
        let e = BarrierCurve::exponential(70.0, 0.0).unwrap();
        for i in 0..=100 {
            let t = i as f64 / 100.0;
            assert_eq!(e.value(t), 70.0);
        }
    }

    #[test]
    fn tabulated_reproduces_exponential() {
        let e = BarrierCurve::exponential(70.0, 0.3).unwrap();
        let knots: Vec<(f64, f64)> = (0..1000)
            .map(|i| {
                let t = i as f64 / 999.0;
                (t, e.value(t))
            })
            .collect();
        let tab = BarrierCurve::tabulated(&knots).unwrap();
        for &(t, b) in &knots {
            assert!((tab.value(t) - b).abs() <= 1e-12 * b);
        }
        for i in 0..5000 {
            let t = i as f64 / 4999.0;
            let rel = (tab.value(t) / e.value(t) - 1.0).abs();
            assert!(rel < 1e-12, "t={t} rel={rel}");
        }
    }

    #[test]
    fn accuracy_spec_invariants() {
        let acc = AccuracySpec::from_digits(6).unwrap();
        assert_eq!(acc.theta, 1e-6);
        assert!((acc.nu - 4.753424).abs() < 1e-5);
        acc.validate().unwrap();
        let mut bad = acc;
        bad.nu += 0.01;
        assert!(bad.validate().is_err());
    }
}
