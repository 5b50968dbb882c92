//! Monte Carlo simulation of knock-out contracts.
//!
//! Paths use exact lognormal transitions on a uniform grid. Barrier crossings
//! between grid nodes are caught with the Brownian-bridge crossing probability
//! against the straight line joining the log-barrier values at both nodes,
//! which is exact for flat and exponential barriers.
//!
//! Every path owns two ChaCha8 streams derived from the seed and the path
//! index (one for the Gaussian increments, one for the bridge draws), and the
//! running sums are kept in fixed point. The estimate therefore does not
//! depend on how paths are split into chunks or spread across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{BarrierSet, MarketParams, OptionSpec, PriceEstimate, PriceMethod, Side};

/// Upper bound on `paths * steps`.
pub const MAX_PATH_STEPS: u64 = 1 << 40;

const FIXED_SCALE: f64 = (1u64 << 40) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub paths: u64,
    pub steps_per_year: u32,
    pub seed: u64,
    /// Paths per unit of parallel work.
    pub chunk: u64,
    /// Brownian-bridge crossing correction between grid nodes.
    pub bridge: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            paths: 100_000,
            steps_per_year: 200,
            seed: 42,
            chunk: 4096,
            bridge: true,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.paths == 0 {
            return Err(Error::InvalidInput("paths must be at least 1".into()));
        }
        if self.steps_per_year == 0 {
            return Err(Error::InvalidInput(
                "steps per year must be at least 1".into(),
            ));
        }
        if self.chunk == 0 {
            return Err(Error::InvalidInput("chunk must be at least 1".into()));
        }
        Ok(())
    }

    pub fn steps(&self, horizon: f64) -> usize {
        ((self.steps_per_year as f64 * horizon).ceil() as usize).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Outcome {
    Survived(f64),
    Breached(Side),
}

/// Per-path simulation state shared by all paths of a run.
pub(crate) struct PathEngine {
    steps: usize,
    drift: f64,
    vol: f64,
    /// `sigma^2 * dt`
    variance: f64,
    log_s0: f64,
    lower: Option<Vec<f64>>,
    upper: Option<Vec<f64>>,
    bridge: bool,
    base: ChaCha8Rng,
}

impl PathEngine {
    pub(crate) fn new(
        params: &MarketParams,
        barriers: &BarrierSet,
        s0: f64,
        cfg: &McConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        let horizon = params.horizon();
        let steps = cfg.steps(horizon);
        (steps as u64)
            .checked_mul(cfg.paths)
            .filter(|&n| n <= MAX_PATH_STEPS)
            .ok_or_else(|| {
                Error::ResourceLimit(format!("{} paths x {} steps", cfg.paths, steps))
            })?;
        let dt = horizon / steps as f64;
        let sigma = params.sigma();
        let nodes = |curve: &crate::model::BarrierCurve| -> Vec<f64> {
            (0..=steps)
                .map(|i| curve.log_value(horizon * i as f64 / steps as f64))
                .collect()
        };
        Ok(PathEngine {
            steps,
            drift: params.log_drift() * dt,
            vol: sigma * dt.sqrt(),
            variance: sigma * sigma * dt,
            log_s0: s0.ln(),
            lower: barriers.lower.as_ref().map(nodes),
            upper: barriers.upper.as_ref().map(nodes),
            bridge: cfg.bridge,
            base: ChaCha8Rng::seed_from_u64(cfg.seed),
        })
    }

    /// Side already breached at inception, if any.
    pub(crate) fn inception(&self) -> Option<Side> {
        if self.lower.as_ref().is_some_and(|l| self.log_s0 <= l[0]) {
            Some(Side::Lower)
        } else if self.upper.as_ref().is_some_and(|u| self.log_s0 >= u[0]) {
            Some(Side::Upper)
        } else {
            None
        }
    }

    fn streams(&self, path: u64) -> (ChaCha8Rng, ChaCha8Rng) {
        let mut normals = self.base.clone();
        normals.set_stream(2 * path);
        let mut uniforms = self.base.clone();
        uniforms.set_stream(2 * path + 1);
        (normals, uniforms)
    }

    pub(crate) fn run(&self, path: u64) -> Outcome {
        if let Some(side) = self.inception() {
            return Outcome::Breached(side);
        }
        let (mut normals, mut uniforms) = self.streams(path);
        let mut x = self.log_s0;
        for i in 0..self.steps {
            let z: f64 = normals.sample(StandardNormal);
            let next = x + self.drift + self.vol * z;
            if let Some(side) = self.node_breach(i + 1, next) {
                return Outcome::Breached(side);
            }
            if self.bridge {
                if let Some(side) = self.bridge_breach(i, x, next, &mut uniforms) {
                    return Outcome::Breached(side);
                }
            }
            x = next;
        }
        Outcome::Survived(x.exp())
    }

    fn node_breach(&self, node: usize, x: f64) -> Option<Side> {
        if self.lower.as_ref().is_some_and(|l| x <= l[node]) {
            Some(Side::Lower)
        } else if self.upper.as_ref().is_some_and(|u| x >= u[node]) {
            Some(Side::Upper)
        } else {
            None
        }
    }

    /// Bridge crossing probabilities for one sub-interval with the given
    /// endpoints, variance and barrier values.
    fn crossing(
        &self,
        (x0, x1): (f64, f64),
        variance: f64,
        lower: Option<(f64, f64)>,
        upper: Option<(f64, f64)>,
    ) -> (f64, f64) {
        let p_lower = lower.map_or(0.0, |(b0, b1)| {
            (-2.0 * (x0 - b0) * (x1 - b1) / variance).exp()
        });
        let p_upper = upper.map_or(0.0, |(b0, b1)| {
            (-2.0 * (b0 - x0) * (b1 - x1) / variance).exp()
        });
        (p_lower, p_upper)
    }

    fn bridge_breach(&self, i: usize, x0: f64, x1: f64, uniforms: &mut ChaCha8Rng) -> Option<Side> {
        let lower = self.lower.as_ref().map(|l| (l[i], l[i + 1]));
        let upper = self.upper.as_ref().map(|u| (u[i], u[i + 1]));
        let (p_lower, p_upper) = self.crossing((x0, x1), self.variance, lower, upper);
        if p_lower == 0.0 || p_upper == 0.0 {
            let u: f64 = uniforms.random();
            return if u < p_lower {
                Some(Side::Lower)
            } else if u < p_upper {
                Some(Side::Upper)
            } else {
                None
            };
        }

        // Both sides reachable: split the step at the bridge midpoint and test
        // the halves in time order.
        let z: f64 = uniforms.sample(StandardNormal);
        let mid = 0.5 * (x0 + x1) + 0.5 * self.vol * z;
        let half = 0.5 * self.variance;
        let lower_mid = lower.map(|(a, b)| 0.5 * (a + b));
        let upper_mid = upper.map(|(a, b)| 0.5 * (a + b));
        if lower_mid.is_some_and(|b| mid <= b) {
            return Some(Side::Lower);
        }
        if upper_mid.is_some_and(|b| mid >= b) {
            return Some(Side::Upper);
        }
        let halves = [
            (
                (x0, mid),
                lower.map(|l| (l.0, lower_mid.unwrap())),
                upper.map(|u| (u.0, upper_mid.unwrap())),
            ),
            (
                (mid, x1),
                lower.map(|l| (lower_mid.unwrap(), l.1)),
                upper.map(|u| (upper_mid.unwrap(), u.1)),
            ),
        ];
        for (ends, lo, up) in halves {
            let (p_lower, p_upper) = self.crossing(ends, half, lo, up);
            let hit_lower = uniforms.random::<f64>() < p_lower;
            let hit_upper = uniforms.random::<f64>() < p_upper;
            match (hit_lower, hit_upper) {
                (true, true) if p_upper > p_lower => return Some(Side::Upper),
                (true, _) => return Some(Side::Lower),
                (false, true) => return Some(Side::Upper),
                (false, false) => {}
            }
        }
        None
    }
}

/// Exact (associative) accumulator of path statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Tally {
    pub paths: u64,
    pub sum: i128,
    pub sum_sq: i128,
    pub lower_hits: u64,
    pub upper_hits: u64,
}

impl Tally {
    fn add(&mut self, value: f64, outcome: Outcome) {
        self.paths += 1;
        self.sum += (value * FIXED_SCALE).round() as i128;
        self.sum_sq += (value * value * FIXED_SCALE).round() as i128;
        match outcome {
            Outcome::Breached(Side::Lower) => self.lower_hits += 1,
            Outcome::Breached(Side::Upper) => self.upper_hits += 1,
            Outcome::Survived(_) => {}
        }
    }

    fn merge(self, other: Tally) -> Tally {
        Tally {
            paths: self.paths + other.paths,
            sum: self.sum + other.sum,
            sum_sq: self.sum_sq + other.sum_sq,
            lower_hits: self.lower_hits + other.lower_hits,
            upper_hits: self.upper_hits + other.upper_hits,
        }
    }

    /// Sample mean and standard error of the mean of the tallied values.
    pub(crate) fn mean_and_error(&self) -> (f64, f64) {
        let n = self.paths as f64;
        let mean = self.sum as f64 / FIXED_SCALE / n;
        if self.paths < 2 {
            return (mean, 0.0);
        }
        let second = self.sum_sq as f64 / FIXED_SCALE / n;
        let variance = ((second - mean * mean) * n / (n - 1.0)).max(0.0);
        (mean, (variance / n).sqrt())
    }
}

/// Runs `cfg.paths` paths in parallel chunks and tallies `value(outcome)`.
pub(crate) fn simulate<F>(engine: &PathEngine, cfg: &McConfig, value: F) -> Tally
where
    F: Fn(Outcome) -> f64 + Sync,
{
    let chunks = cfg.paths.div_ceil(cfg.chunk);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * cfg.chunk;
            let end = (start + cfg.chunk).min(cfg.paths);
            let mut tally = Tally::default();
            for path in start..end {
                let outcome = engine.run(path);
                tally.add(value(outcome), outcome);
            }
            tally
        })
        .reduce(Tally::default, Tally::merge)
}

/// Monte Carlo price of a knock-out contract: breached paths pay the rebate of
/// the barrier hit first, surviving paths the vanilla payoff, both at expiry.
pub fn mc_price(
    params: &MarketParams,
    spec: &OptionSpec,
    s0: f64,
    cfg: &McConfig,
) -> Result<PriceEstimate> {
    crate::model::validate(*params, spec.clone())?;
    let engine = PathEngine::new(params, &spec.barriers, s0, cfg)?;
    let df = (-params.r() * params.horizon()).exp();
    if let Some(side) = engine.inception() {
        return Ok(PriceEstimate {
            value: df * spec.rebate(side),
            std_error: 0.0,
            method: PriceMethod::MonteCarlo,
        });
    }
    let tally = simulate(&engine, cfg, |outcome| match outcome {
        Outcome::Survived(spot) => df * spec.payoff.intrinsic(spot, spec.strike),
        Outcome::Breached(side) => df * spec.rebate(side),
    });
    let (value, std_error) = tally.mean_and_error();
    Ok(PriceEstimate {
        value,
        std_error,
        method: PriceMethod::MonteCarlo,
    })
}
