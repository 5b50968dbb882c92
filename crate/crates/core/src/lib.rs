//! Critical initial asset prices for barrier options.
//!
//! Given a tail cutoff `nu`, the lower barrier of a knock-out option is worthless
//! (it cannot move the price at the stated accuracy) once the initial price is
//! at least `s_ml`, and the upper barrier once it is at most `s_mu`. The
//! [`critical`] module computes these prices for flat and curved barriers,
//! [`classify`] turns them into the simpler contract an option degenerates
//! into, and [`pricing`], [`passage`] and [`calibrate`] check the thresholds
//! against actual prices and breach probabilities.

pub mod calibrate;
pub mod classify;
pub mod cli;
pub mod critical;
pub mod error;
pub mod model;
pub mod numerics;
pub mod passage;
pub mod pricing;

pub use error::{Error, Result};
pub use model::{
    AccuracySpec, BarrierCurve, BarrierSet, Classification, CriticalPrice, CriticalPrices,
    MarketParams, OptionSpec, Payoff, PriceEstimate, PriceMethod, Side,
};
