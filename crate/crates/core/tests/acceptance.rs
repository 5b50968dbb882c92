//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so each criterion reports on its own line
//! and a red criterion does not hide the others.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use barrier_critical::calibrate::{
    barrier_is_worthless, implied_nu, numeric_critical_price, reproduce_table1, PriceAccuracy,
    PRECISION_NOTE,
};
use barrier_critical::classify::{classify_double, classify_down_and_out, classify_up_and_out};
use barrier_critical::critical::{
    critical_prices, lower_critical_curve, prob_above_lower, prob_below_upper, s_ml_flat,
    upper_critical_curve,
};
use barrier_critical::numerics::std_normal_cdf;
use barrier_critical::passage::{
    breach_prob_closed_flat, breach_prob_mc, breach_prob_pde, PdeGrid,
};
use barrier_critical::pricing::{
    bs_vanilla, double_knockout_closed, down_and_out_call_closed, mc_price, up_and_out_call_closed,
    ClosedFormCall, McConfig,
};
use barrier_critical::{
    BarrierCurve, BarrierSet, Classification, MarketParams, OptionSpec, Payoff, Side,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn params(r: f64, sigma: f64, horizon: f64) -> MarketParams {
    MarketParams::new(r, sigma, horizon).unwrap()
}

/// `max_t B exp(nu sigma sqrt(t) - mu1 t)` by brute force on a fine grid.
fn grid_s_ml(p: &MarketParams, level: f64, nu: f64) -> f64 {
    let n = 1_000_000;
    let mu1 = p.r() - 0.5 * p.sigma() * p.sigma();
    (0..=n)
        .map(|i| p.horizon() * i as f64 / n as f64)
        .map(|t| level * (nu * p.sigma() * t.sqrt() - mu1 * t).exp())
        .fold(f64::MIN, f64::max)
}

fn criterion_1() -> Outcome {
    let printed = [
        (0.25, 0.15, 98.87),
        (0.25, 0.30, 144.00),
        (0.5, 0.15, 112.60),
    ];
    let mut pass = true;
    let mut detail = String::new();
    for (t, sigma, expected) in printed {
        let got = s_ml_flat(&params(0.10, sigma, t), 70.0, 4.9).price;
        pass &= (got - expected).abs() <= 0.01;
        detail += &format!("{got:.4} vs {expected}; ");
    }
    let p = params(0.10, 0.30, 0.5);
    let got = s_ml_flat(&p, 70.0, 4.9).price;
    let oracle = grid_s_ml(&p, 70.0, 4.9);
    pass &= ((got - oracle) / oracle).abs() <= 0.005;
    detail += &format!(
        "row 4 {got:.4} vs direct {oracle:.4}, printed 192.00 differs by {:.2}%",
        100.0 * (got - 192.0) / 192.0
    );
    outcome(pass, detail)
}

fn criterion_2() -> Outcome {
    let p = params(0.10, 0.30, 0.25);
    let mut pass = true;
    let mut detail = String::new();
    for (digits, s_expected, nu_expected) in [(2, 77.182, 0.76), (6, 97.000, 2.267)] {
        let s = numeric_critical_price(
            &p,
            100.0,
            70.0,
            Side::Lower,
            PriceAccuracy::digits(digits),
            &ClosedFormCall,
        )
        .unwrap();
        let nu = implied_nu(&p, 70.0, Side::Lower, s).unwrap();
        pass &= (s - s_expected).abs() <= 0.01 && (nu - nu_expected).abs() <= 0.02;
        detail += &format!(
            "theta 1e-{digits}: s {s:.3} (want {s_expected}), nu {nu:.3} (want {nu_expected}); "
        );
    }
    outcome(pass, detail)
}

fn criterion_3() -> Outcome {
    let rows = reproduce_table1(4.9, PriceAccuracy::double_precision_floor()).unwrap();
    let nu: Vec<f64> = rows.iter().map(|r| r.implied_nu).collect();
    let row1 = (nu[0] - 4.347).abs() <= 0.05;
    let row3 = (nu[2] - 4.850).abs() <= 0.05;
    let above = nu[1] > 4.9 && nu[3] > 4.9;
    let grows = nu[1] > nu[0] && nu[3] > nu[2];
    let numeric: Vec<String> = rows
        .iter()
        .map(|r| format!("{:.3}", r.numeric_s_ml))
        .collect();
    outcome(
        row1 && row3 && above && grows,
        format!(
            "implied nu {:.3} (want 4.347), {:.3}, {:.3} (want 4.850), {:.3}; rows 2/4 above 4.9: {above}; grows with sigma: {grows}; numeric s_ml {}; {PRECISION_NOTE}",
            nu[0],
            nu[1],
            nu[2],
            nu[3],
            numeric.join(", ")
        ),
    )
}

fn criterion_4() -> Outcome {
    let p = params(0.10, 0.30, 1.0);
    let curves = [
        (BarrierCurve::Flat(70.0), BarrierCurve::Flat(130.0)),
        (
            BarrierCurve::exponential(70.0, 0.05).unwrap(),
            BarrierCurve::exponential(130.0, -0.02).unwrap(),
        ),
    ];
    let mut worst: f64 = 0.0;
    for (lower, upper) in &curves {
        for i in 1..=10 {
            let t = i as f64 / 10.0;
            for j in 0..10 {
                let nu = 0.5 + 0.6 * j as f64;
                let target = std_normal_cdf(nu);
                let s_l = lower_critical_curve(&p, lower, nu, t);
                let s_u = upper_critical_curve(&p, upper, nu, t);
                worst = worst.max((prob_above_lower(&p, lower, s_l, t).unwrap() - target).abs());
                worst = worst.max((prob_below_upper(&p, upper, s_u, t).unwrap() - target).abs());
            }
        }
    }
    outcome(
        worst <= 1e-12,
        format!("max deviation {worst:.2e} over 2 x 100 points per side"),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 100_000;
    let mut violations = 0usize;
    let mut counts = [0usize; 5];
    for _ in 0..n {
        let r = rng.random_range(-0.05..0.15);
        let sigma = rng.random_range(0.05..0.6);
        let horizon = rng.random_range(0.05..3.0);
        let nu = rng.random_range(0.0..8.0);
        let l0 = rng.random_range(40.0..95.0);
        let u0 = rng.random_range(105.0..200.0);
        let s0 = rng.random_range(0.95 * l0..1.05 * u0);
        let p = params(r, sigma, horizon);
        let both = BarrierSet::double(BarrierCurve::Flat(l0), BarrierCurve::Flat(u0));
        let crit = critical_prices(&p, &both, nu).unwrap();
        let (s_ml, s_mu) = (crit.s_ml().unwrap(), crit.s_mu().unwrap());
        let class = classify_double(s0, l0, u0, s_ml, s_mu);
        counts[match class {
            Classification::Vanilla => 0,
            Classification::DownAndOut => 1,
            Classification::UpAndOut => 2,
            Classification::TypicalDoubleBarrier => 3,
            Classification::KnockedOutAtInception => 4,
        }] += 1;

        // independent restatement of the partition
        let expected = if s0 <= l0 || s0 >= u0 {
            Classification::KnockedOutAtInception
        } else {
            match (s0 < s_ml, s0 > s_mu) {
                (false, false) => Classification::Vanilla,
                (true, false) => Classification::DownAndOut,
                (false, true) => Classification::UpAndOut,
                (true, true) => Classification::TypicalDoubleBarrier,
            }
        };
        let down = classify_down_and_out(s0, l0, s_ml);
        let up = classify_up_and_out(s0, u0, s_mu);
        let consistent = match class {
            Classification::KnockedOutAtInception => {
                down == Classification::KnockedOutAtInception
                    || up == Classification::KnockedOutAtInception
            }
            Classification::Vanilla => {
                down == Classification::Vanilla && up == Classification::Vanilla
            }
            Classification::DownAndOut => {
                down == Classification::DownAndOut && up == Classification::Vanilla
            }
            Classification::UpAndOut => {
                down == Classification::Vanilla && up == Classification::UpAndOut
            }
            Classification::TypicalDoubleBarrier => {
                down == Classification::DownAndOut && up == Classification::UpAndOut
            }
        };
        // moving away from a worthless barrier keeps it worthless
        let further = s0 * rng.random_range(1.0..1.5);
        let nearer = s0 / rng.random_range(1.0..1.5);
        let monotone = (down != Classification::Vanilla
            || classify_down_and_out(further, l0, s_ml) == Classification::Vanilla)
            && (up != Classification::Vanilla
                || classify_up_and_out(nearer, u0, s_mu) == Classification::Vanilla);
        if class != expected || !consistent || !monotone {
            violations += 1;
        }
    }
    outcome(
        violations == 0,
        format!("{violations} violations in {n} draws; category counts {counts:?}"),
    )
}

fn criterion_6() -> Outcome {
    // (r, sigma, T, s0, K, L, U)
    let sets = [
        (0.10, 0.15, 0.25, 100.0, 100.0, 70.0, 130.0),
        (0.10, 0.30, 0.25, 100.0, 100.0, 70.0, 130.0),
        (0.05, 0.25, 0.5, 100.0, 95.0, 85.0, 125.0),
        (0.03, 0.40, 0.25, 90.0, 90.0, 75.0, 120.0),
        (0.08, 0.20, 0.5, 105.0, 100.0, 90.0, 130.0),
    ];
    let cfg = McConfig {
        paths: 1_000_000,
        steps_per_year: 200,
        ..McConfig::default()
    };
    let mut worst_z: f64 = 0.0;
    let mut lines = Vec::new();
    for (k, &(r, sigma, horizon, s0, strike, l, u)) in sets.iter().enumerate() {
        let p = params(r, sigma, horizon);
        let cases = [
            (
                "vanilla",
                BarrierSet::none(),
                bs_vanilla(&p, Payoff::Call, strike, s0).value,
            ),
            (
                "down-and-out",
                BarrierSet::lower(BarrierCurve::Flat(l)),
                down_and_out_call_closed(&p, strike, l, s0).unwrap().value,
            ),
            (
                "up-and-out",
                BarrierSet::upper(BarrierCurve::Flat(u)),
                up_and_out_call_closed(&p, strike, u, s0).unwrap().value,
            ),
            (
                "double",
                BarrierSet::double(BarrierCurve::Flat(l), BarrierCurve::Flat(u)),
                double_knockout_closed(&p, strike, l, u, s0, None)
                    .unwrap()
                    .value,
            ),
        ];
        for (name, barriers, closed) in cases {
            let spec = OptionSpec::new(Payoff::Call, strike, barriers);
            let mc = mc_price(
                &p,
                &spec,
                s0,
                &McConfig {
                    seed: 1000 + k as u64,
                    ..cfg
                },
            )
            .unwrap();
            let z = (mc.value - closed).abs() / mc.std_error.max(1e-300);
            worst_z = worst_z.max(z);
            if z > 3.0 {
                lines.push(format!(
                    "set {} {name}: closed {closed:.6} mc {:.6} z {z:.2}",
                    k + 1,
                    mc.value
                ));
            }
        }
    }
    let p = params(0.10, 0.15, 0.25);
    let doc = down_and_out_call_closed(&p, 100.0, 70.0, 100.0)
        .unwrap()
        .value;
    let dko_doc = double_knockout_closed(&p, 100.0, 70.0, 1e6, 100.0, None)
        .unwrap()
        .value;
    let uoc = up_and_out_call_closed(&p, 100.0, 130.0, 100.0)
        .unwrap()
        .value;
    let dko_uoc = double_knockout_closed(&p, 100.0, 1e-6, 130.0, 100.0, None)
        .unwrap()
        .value;
    let limit_gap = (doc - dko_doc).abs().max((uoc - dko_uoc).abs());
    outcome(
        worst_z <= 3.0 && limit_gap <= 1e-8,
        format!(
            "worst |mc - closed| = {worst_z:.2} SE over 20 comparisons; degenerate double limits within {limit_gap:.1e} {}",
            lines.join("; ")
        ),
    )
}

fn criterion_7() -> Outcome {
    // (r, sigma, T, side, level, s0)
    let sets = [
        (0.10, 0.30, 0.25, Side::Lower, 70.0, 80.0),
        (0.10, 0.30, 0.25, Side::Upper, 130.0, 115.0),
        (0.05, 0.20, 1.0, Side::Lower, 90.0, 100.0),
    ];
    let cfg = McConfig {
        paths: 200_000,
        ..McConfig::default()
    };
    let mut pass = true;
    let mut detail = String::new();
    for (k, &(r, sigma, horizon, side, level, s0)) in sets.iter().enumerate() {
        let p = params(r, sigma, horizon);
        let barriers = match side {
            Side::Lower => BarrierSet::lower(BarrierCurve::Flat(level)),
            Side::Upper => BarrierSet::upper(BarrierCurve::Flat(level)),
        };
        let closed = breach_prob_closed_flat(&p, side, level, s0).unwrap();
        let pde = breach_prob_pde(&p, &barriers, s0, &PdeGrid::new(400, 400)).unwrap();
        let mc = breach_prob_mc(
            &p,
            &barriers,
            s0,
            &McConfig {
                seed: 77 + k as u64,
                ..cfg
            },
        )
        .unwrap();
        let z = (mc.total() - closed).abs() / mc.total_std_error(cfg.paths);
        let errors: Vec<f64> = [100, 200, 400]
            .iter()
            .map(|&n| {
                (breach_prob_pde(&p, &barriers, s0, &PdeGrid::new(n, n)).unwrap() - closed).abs()
            })
            .collect();
        let order = (errors[0] / errors[1])
            .log2()
            .min((errors[1] / errors[2]).log2());
        pass &= (pde - closed).abs() <= 1e-3 && z <= 3.0 && order >= 1.0;
        detail += &format!(
            "set {}: closed {closed:.6} pde {pde:.6} mc z {z:.2} order {order:.2}; ",
            k + 1
        );
    }
    outcome(pass, detail)
}

fn criterion_8() -> Outcome {
    let p = params(0.10, 0.30, 0.25);
    let acc = PriceAccuracy::digits(6);
    let gap = |s0: f64| {
        let vanilla = bs_vanilla(&p, Payoff::Call, 100.0, s0).value;
        (down_and_out_call_closed(&p, 100.0, 70.0, s0).unwrap().value - vanilla).abs()
    };
    let mut worst: f64 = 0.0;
    let mut all_hold = true;
    for i in 0..64 {
        let s0 = 97.0 + (150.0 - 97.0) * i as f64 / 63.0;
        worst = worst.max(gap(s0));
        all_hold &=
            barrier_is_worthless(&p, 100.0, 70.0, Side::Lower, s0, acc, &ClosedFormCall).unwrap();
    }
    let fails_below =
        !barrier_is_worthless(&p, 100.0, 70.0, Side::Lower, 96.9, acc, &ClosedFormCall).unwrap();
    outcome(
        all_hold && fails_below,
        format!(
            "largest |down-and-out - vanilla| on [97, 150] is {worst:.3e} (limit 5e-7, at 97: {:.3e}); fails at 96.9: {fails_below}",
            gap(97.0)
        ),
    )
}

fn criterion_9() -> Outcome {
    let p = params(0.10, 0.30, 0.25);
    let spec = OptionSpec::new(
        Payoff::Call,
        100.0,
        BarrierSet::double(BarrierCurve::Flat(80.0), BarrierCurve::Flat(125.0)),
    );
    let cfg = McConfig {
        paths: 200_000,
        chunk: 1000,
        ..McConfig::default()
    };
    let runs: Vec<(u64, u64)> = [1, 2, 8, 1, 8]
        .iter()
        .map(|&threads| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            let est = pool.install(|| mc_price(&p, &spec, 100.0, &cfg).unwrap());
            (est.value.to_bits(), est.std_error.to_bits())
        })
        .collect();
    let identical = runs.windows(2).all(|w| w[0] == w[1]);
    outcome(
        identical,
        format!("price bits {:#x} across 1, 2, 8, 1, 8 workers", runs[0].0),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut failed = 0;
    for (n, check) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let status = if result.pass { "PASS" } else { "FAIL" };
        if !result.pass {
            failed += 1;
        }
        println!(
            "criterion {n}: {status} ({:.2}s) {}",
            start.elapsed().as_secs_f64(),
            result.detail
        );
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
