//! Probability that the price path breaches a barrier before the horizon.
//!
//! Three independent routes: the reflection-principle closed form for a
//! flat barrier, the bridged Monte Carlo engine, and a finite-difference
//! solution of the backward Kolmogorov equation
//!
//! ```text
//! dQ/dt + mu S dQ/dS + 1/2 sigma^2 S^2 d2Q/dS2 = 0,   Q(S, T) = 0,   Q = 1 on the barriers
//! ```
//!
//! The solver works in `x = ln S`, where the operator has constant
//! coefficients, and in a boundary-fitted coordinate `z = (x - a(t)) / w(t)`
//! so that curved barriers stay on grid nodes at every time step.

use crate::error::{Error, Result};
use crate::model::{BarrierCurve, BarrierSet, MarketParams, Side, ORDERING_GRID_POINTS};
use crate::numerics::std_normal_cdf as cdf;
use crate::pricing::mc::{simulate, PathEngine};
use crate::pricing::McConfig;

/// Breach probability for a flat barrier at `level`.
pub fn breach_prob_closed_flat(
    params: &MarketParams,
    side: Side,
    level: f64,
    s0: f64,
) -> Result<f64> {
    let wrong_side = match side {
        Side::Lower => s0 < level,
        Side::Upper => s0 > level,
    };
    if wrong_side {
        return Err(Error::KnockedOut {
            side,
            s0,
            barrier: level,
        });
    }
    if s0 == level {
        return Ok(1.0);
    }
    let mu1 = params.log_drift();
    let sigma = params.sigma();
    let horizon = params.horizon();
    let vol = sigma * horizon.sqrt();
    let reflection = (level / s0).powf(2.0 * mu1 / (sigma * sigma));
    let p = match side {
        Side::Lower => {
            let a = (level / s0).ln();
            cdf((a - mu1 * horizon) / vol) + reflection * cdf((a + mu1 * horizon) / vol)
        }
        Side::Upper => {
            let a = (s0 / level).ln();
            cdf((a + mu1 * horizon) / vol) + reflection * cdf((a - mu1 * horizon) / vol)
        }
    };
    Ok(p.clamp(0.0, 1.0))
}

/// Monte Carlo estimate of the exclusive events "lower hit first" and
/// "upper hit first".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BreachEstimate {
    pub lower: f64,
    pub upper: f64,
    pub lower_std_error: f64,
    pub upper_std_error: f64,
}

impl BreachEstimate {
    pub fn total(&self) -> f64 {
        self.lower + self.upper
    }

    /// Standard error of `lower + upper` (a single Bernoulli estimate).
    pub fn total_std_error(&self, paths: u64) -> f64 {
        let p = self.total();
        let n = paths as f64;
        if paths < 2 {
            return 0.0;
        }
        (p * (1.0 - p) / (n - 1.0)).max(0.0).sqrt()
    }
}

pub fn breach_prob_mc(
    params: &MarketParams,
    barriers: &BarrierSet,
    s0: f64,
    cfg: &McConfig,
) -> Result<BreachEstimate> {
    barriers.validate(params.horizon())?;
    let engine = PathEngine::new(params, barriers, s0, cfg)?;
    if let Some(side) = engine.inception() {
        let barrier = barriers.get(side).map_or(f64::NAN, BarrierCurve::initial);
        return Err(Error::KnockedOut { side, s0, barrier });
    }
    let tally = simulate(&engine, cfg, |_| 0.0);
    let n = tally.paths as f64;
    let se = |hits: u64| {
        let p = hits as f64 / n;
        if tally.paths < 2 {
            0.0
        } else {
            (p * (1.0 - p) / (n - 1.0)).sqrt()
        }
    };
    Ok(BreachEstimate {
        lower: tally.lower_hits as f64 / n,
        upper: tally.upper_hits as f64 / n,
        lower_std_error: se(tally.lower_hits),
        upper_std_error: se(tally.upper_hits),
    })
}

/// Finite-difference grid for [`breach_prob_pde`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeGrid {
    /// Space intervals between the two ends of the domain.
    pub n_space: usize,
    pub n_time: usize,
    /// Distance of an artificial far boundary from the initial price, in units of `sigma sqrt(T)`.
    pub far_field_sds: f64,
}

impl Default for PdeGrid {
    fn default() -> Self {
        PdeGrid {
            n_space: 400,
            n_time: 400,
            far_field_sds: 6.0,
        }
    }
}

impl PdeGrid {
    pub const MIN_NODES: usize = 16;

    pub fn new(n_space: usize, n_time: usize) -> Self {
        PdeGrid {
            n_space,
            n_time,
            ..PdeGrid::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_space < Self::MIN_NODES || self.n_time < Self::MIN_NODES {
            return Err(Error::GridTooCoarse(format!(
                "{} space x {} time steps, need at least {} each",
                self.n_space,
                self.n_time,
                Self::MIN_NODES
            )));
        }
        if self.far_field_sds.is_nan() || self.far_field_sds <= 0.0 {
            return Err(Error::NonPositive {
                name: "far field distance",
                value: self.far_field_sds,
            });
        }
        Ok(())
    }
}

/// What happens at one end of the space grid.
#[derive(Debug, Clone, Copy, PartialEq)]
enum End {
    /// Absorbing barrier, `Q = 1`.
    Barrier,
    /// Artificial far boundary, `d2Q/dz2 = 0`.
    Linear,
}

/// Time-dependent map `x = offset(t) + width(t) z`, `z` in `[0, 1]`.
struct Frame<'a> {
    lower: Option<&'a BarrierCurve>,
    upper: Option<&'a BarrierCurve>,
    far: f64,
}

impl Frame<'_> {
    fn offset(&self, t: f64) -> f64 {
        self.lower.map_or(self.far, |c| c.log_value(t))
    }

    fn width(&self, t: f64) -> f64 {
        let top = self.upper.map_or(self.far, |c| c.log_value(t));
        top - self.offset(t)
    }
}

/// Probability of breaching any barrier before `T`, starting from `s0`.
pub fn breach_prob_pde(
    params: &MarketParams,
    barriers: &BarrierSet,
    s0: f64,
    grid: &PdeGrid,
) -> Result<f64> {
    grid.validate()?;
    if barriers.is_empty() {
        return Err(Error::EmptyBarrierSet);
    }
    let horizon = params.horizon();
    barriers.validate(horizon)?;
    for side in [Side::Lower, Side::Upper] {
        if let Some(curve) = barriers.get(side) {
            let barrier = curve.initial();
            let outside = match side {
                Side::Lower => s0 <= barrier,
                Side::Upper => s0 >= barrier,
            };
            if outside {
                return Err(Error::KnockedOut { side, s0, barrier });
            }
        }
    }

    let sigma = params.sigma();
    let mu1 = params.log_drift();
    let reach = grid.far_field_sds * sigma * horizon.sqrt();
    let sample_times: Vec<f64> = (0..ORDERING_GRID_POINTS)
        .map(|i| horizon * i as f64 / (ORDERING_GRID_POINTS - 1) as f64)
        .collect();
    let extreme = |curve: &BarrierCurve, pick: fn(f64, f64) -> f64| {
        sample_times
            .iter()
            .chain(curve.knot_times())
            .map(|&t| curve.log_value(t))
            .fold(s0.ln(), pick)
    };
    let n = grid.n_space;
    let x0 = s0.ln();
    // Widen the single-barrier domain just enough for s0 to sit on a node.
    let align = |gap: f64, width: f64| {
        let nodes = (n as f64 * gap / width).floor();
        if nodes < 1.0 {
            width
        } else {
            n as f64 * gap / nodes
        }
    };
    let (lower_end, upper_end, far) = match (&barriers.lower, &barriers.upper) {
        (Some(_), Some(_)) => (End::Barrier, End::Barrier, f64::NAN),
        (Some(l), None) => {
            let b0 = l.log_value(0.0);
            let width = align(x0 - b0, extreme(l, f64::max) + reach - b0);
            (End::Barrier, End::Linear, b0 + width)
        }
        (None, Some(u)) => {
            let b0 = u.log_value(0.0);
            let width = align(b0 - x0, b0 - (extreme(u, f64::min) - reach));
            (End::Linear, End::Barrier, b0 - width)
        }
        (None, None) => unreachable!(),
    };
    let frame = Frame {
        lower: barriers.lower.as_ref(),
        upper: barriers.upper.as_ref(),
        far,
    };

    let dz = 1.0 / n as f64;
    let dt = horizon / grid.n_time as f64;
    let mut q = vec![0.0; n + 1];
    if lower_end == End::Barrier {
        q[0] = 1.0;
    }
    if upper_end == End::Barrier {
        q[n] = 1.0;
    }

    let mut solver = Tridiagonal::new(n + 1);
    let mut t_end = horizon;
    // Two implicit half-steps per full step for the first two steps damp the
    // corner discontinuity, then Crank-Nicolson.
    let mut schedule = Vec::with_capacity(grid.n_time + 2);
    for k in 0..grid.n_time {
        if k < 2 {
            schedule.push((0.5 * dt, 1.0));
            schedule.push((0.5 * dt, 1.0));
        } else {
            schedule.push((dt, 0.5));
        }
    }
    for (step, theta) in schedule {
        let t_start = (t_end - step).max(0.0);
        let t_mid = 0.5 * (t_start + t_end);
        let width = frame.width(t_mid);
        let offset_rate = (frame.offset(t_end) - frame.offset(t_start)) / step;
        let width_rate = (frame.width(t_end) - frame.width(t_start)) / step;
        let diffusion = 0.5 * sigma * sigma / (width * width);
        let coeffs = |j: usize| -> (f64, f64, f64) {
            let z = j as f64 * dz;
            let advection = (mu1 - offset_rate - z * width_rate) / width;
            let a = diffusion / (dz * dz);
            let b = advection / (2.0 * dz);
            (a - b, -2.0 * a, a + b)
        };
        solver.step(&mut q, coeffs, step, theta, lower_end, upper_end);
        t_end = t_start;
    }

    let z0 = (x0 - frame.offset(0.0)) / frame.width(0.0);
    Ok(interpolate(&q, z0 * n as f64).clamp(0.0, 1.0))
}

/// Linear interpolation of node values at fractional index `pos`; linear in
/// `z` is linear in `ln S`.
fn interpolate(q: &[f64], pos: f64) -> f64 {
    let n = q.len() - 1;
    let pos = pos.clamp(0.0, n as f64);
    let j = (pos.floor() as usize).min(n - 1);
    let w = pos - j as f64;
    (1.0 - w) * q[j] + w * q[j + 1]
}

/// Scratch space for one theta-scheme step on a tridiagonal system.
struct Tridiagonal {
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
    rhs: Vec<f64>,
}

impl Tridiagonal {
    fn new(len: usize) -> Self {
        Tridiagonal {
            sub: vec![0.0; len],
            diag: vec![0.0; len],
            sup: vec![0.0; len],
            rhs: vec![0.0; len],
        }
    }

    /// Advances `q` by `dt` in time-to-expiry: `(I - theta dt L) q' = (I + (1 - theta) dt L) q`.
    fn step<F>(&mut self, q: &mut [f64], coeffs: F, dt: f64, theta: f64, lower: End, upper: End)
    where
        F: Fn(usize) -> (f64, f64, f64),
    {
        let n = q.len() - 1;
        let implicit = theta * dt;
        let explicit = (1.0 - theta) * dt;
        for j in 1..n {
            let (l, d, u) = coeffs(j);
            self.rhs[j] = q[j] + explicit * (l * q[j - 1] + d * q[j] + u * q[j + 1]);
            self.sub[j] = -implicit * l;
            self.diag[j] = 1.0 - implicit * d;
            self.sup[j] = -implicit * u;
        }

        // Fold the end conditions into the first and last interior rows.
        match lower {
            End::Barrier => {
                self.rhs[1] -= self.sub[1];
                self.sub[1] = 0.0;
            }
            End::Linear => {
                // q0 = 2 q1 - q2
                self.diag[1] += 2.0 * self.sub[1];
                self.sup[1] -= self.sub[1];
                self.sub[1] = 0.0;
            }
        }
        match upper {
            End::Barrier => {
                self.rhs[n - 1] -= self.sup[n - 1];
                self.sup[n - 1] = 0.0;
            }
            End::Linear => {
                // qn = 2 q(n-1) - q(n-2)
                self.diag[n - 1] += 2.0 * self.sup[n - 1];
                self.sub[n - 1] -= self.sup[n - 1];
                self.sup[n - 1] = 0.0;
            }
        }

        // Thomas algorithm on rows 1..n-1.
        for j in 2..n {
            let m = self.sub[j] / self.diag[j - 1];
            self.diag[j] -= m * self.sup[j - 1];
            self.rhs[j] -= m * self.rhs[j - 1];
        }
        q[n - 1] = self.rhs[n - 1] / self.diag[n - 1];
        for j in (1..n - 1).rev() {
            q[j] = (self.rhs[j] - self.sup[j] * q[j + 1]) / self.diag[j];
        }

        q[0] = match lower {
            End::Barrier => 1.0,
            End::Linear => 2.0 * q[1] - q[2],
        };
        q[n] = match upper {
            End::Barrier => 1.0,
            End::Linear => 2.0 * q[n - 1] - q[n - 2],
        };
    }
}
