//! Command-line front end.
//!
//! Every subcommand accepts `--config PATH`, a file of `key=value` lines
//! (`#` starts a comment) whose keys are the long flag names. File values are
//! placed before the command-line flags, so explicit flags win.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use crate::calibrate::{
    calibration_row, reproduce_table1, CalibrationRow, PriceAccuracy, PRECISION_NOTE,
};
use crate::classify::classify;
use crate::critical::critical_prices;
use crate::error::{Error, Result};
use crate::model::{
    BarrierCurve, BarrierSet, MarketParams, OptionSpec, Payoff, PriceEstimate, Side,
};
use crate::numerics::nu_for_accuracy;
use crate::passage::{breach_prob_closed_flat, breach_prob_mc, breach_prob_pde, PdeGrid};
use crate::pricing::{
    bs_vanilla, double_knockout_closed, down_and_out_call_closed, mc_price, up_and_out_call_closed,
    McConfig,
};

const SIG_DIGITS: usize = 10;

#[derive(Parser, Debug)]
#[command(
    name = "barrier-critical",
    version,
    about = "Critical initial prices and pricing for knock-out barrier options"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify an option as vanilla, single-barrier or typical double-barrier
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Classify {
        #[command(flatten)]
        market: MarketArgs,
        #[command(flatten)]
        cutoff: CutoffArgs,
    },
    /// Critical initial prices of the lower and upper barriers
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Critical {
        #[command(flatten)]
        market: MarketArgs,
        #[command(flatten)]
        cutoff: CutoffArgs,
    },
    /// Price a knock-out option
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Price {
        #[command(flatten)]
        market: MarketArgs,
        #[command(flatten)]
        contract: ContractArgs,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Probability of touching a barrier before expiry
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Breach {
        #[command(flatten)]
        market: MarketArgs,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Numeric critical price from the pricer and the cutoff it implies
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Calibrate {
        #[command(flatten)]
        market: MarketArgs,
        #[command(flatten)]
        contract: ContractArgs,
        #[command(flatten)]
        price_accuracy: PriceAccuracyArgs,
        /// Reference cutoff for the analytic critical price
        #[arg(long, default_value_t = 4.9)]
        nu: f64,
    },
    /// Analytic vs numeric critical prices for the K=100, B=70, r=0.10 reference grid
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Table1 {
        #[command(flatten)]
        price_accuracy: PriceAccuracyArgs,
        /// Reference cutoff for the analytic column
        #[arg(long, default_value_t = 4.9)]
        nu: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Classification and prices over a range of initial prices
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Sweep {
        #[command(flatten)]
        market: MarketArgs,
        #[command(flatten)]
        cutoff: CutoffArgs,
        #[command(flatten)]
        contract: ContractArgs,
        #[command(flatten)]
        sim: SimArgs,
        /// First initial price
        #[arg(long)]
        from: f64,
        /// Last initial price
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 11)]
        points: usize,
    },
}

#[derive(Args, Debug)]
struct MarketArgs {
    /// Initial asset price
    #[arg(long)]
    s0: Option<f64>,
    /// Flat lower barrier, or its value at t=0 with --lower-growth
    #[arg(long, conflicts_with = "lower_file")]
    lower: Option<f64>,
    /// Flat upper barrier, or its value at t=0 with --upper-growth
    #[arg(long, conflicts_with = "upper_file")]
    upper: Option<f64>,
    /// Exponential growth rate of the lower barrier
    #[arg(long, requires = "lower")]
    lower_growth: Option<f64>,
    #[arg(long, requires = "upper")]
    upper_growth: Option<f64>,
    /// Two-column t,level CSV for a tabulated lower barrier
    #[arg(long)]
    lower_file: Option<PathBuf>,
    #[arg(long)]
    upper_file: Option<PathBuf>,
    /// Volatility
    #[arg(long)]
    sigma: f64,
    /// Risk-free rate
    #[arg(long = "r")]
    rate: f64,
    /// Continuous dividend yield
    #[arg(long = "q", default_value_t = 0.0)]
    dividend_yield: f64,
    /// Horizon in years
    #[arg(long = "T")]
    horizon: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Write CSV instead of text
    #[arg(long)]
    csv: bool,
    /// key=value file merged under the command-line flags
    #[arg(long)]
    config: Option<PathBuf>,
}

/// The normal cutoff, given directly or through a tail accuracy.
#[derive(Args, Debug)]
struct CutoffArgs {
    #[arg(long)]
    nu: Option<f64>,
    /// Tail accuracy; nu is the smallest x with 1 - N(x) <= pi
    #[arg(long)]
    pi: Option<f64>,
    /// Tail accuracy as a digit count, pi = 10^-digits
    #[arg(long)]
    digits: Option<u32>,
}

#[derive(Args, Debug)]
struct ContractArgs {
    #[arg(long, default_value_t = 100.0)]
    strike: f64,
    #[arg(long, value_enum, default_value_t = PayoffArg::Call)]
    payoff: PayoffArg,
    /// Paid at expiry when the lower barrier is hit first
    #[arg(long, default_value_t = 0.0)]
    rebate_lower: f64,
    #[arg(long, default_value_t = 0.0)]
    rebate_upper: f64,
}

/// Price accuracy for the numeric critical price.
#[derive(Args, Debug)]
struct PriceAccuracyArgs {
    /// Absolute price accuracy; defaults to the double-precision floor
    #[arg(long, conflicts_with = "digits")]
    theta: Option<f64>,
    /// Price accuracy as displayed decimals, theta = 10^-digits
    #[arg(long)]
    digits: Option<u32>,
}

#[derive(Args, Debug)]
struct SimArgs {
    #[arg(long, value_enum, default_value_t = Method::Closed)]
    method: Method,
    /// Monte Carlo paths
    #[arg(long, default_value_t = 100_000)]
    paths: u64,
    /// Monte Carlo steps per year
    #[arg(long, default_value_t = 200)]
    steps: u32,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Finite-difference nodes in space and time
    #[arg(long, default_value_t = 400)]
    grid: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Method {
    Closed,
    Mc,
    Pde,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum PayoffArg {
    Call,
    Put,
}

impl From<PayoffArg> for Payoff {
    fn from(p: PayoffArg) -> Self {
        match p {
            PayoffArg::Call => Payoff::Call,
            PayoffArg::Put => Payoff::Put,
        }
    }
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Num(f64),
    Text(String),
}

impl From<f64> for Field {
    fn from(x: f64) -> Self {
        Field::Num(x)
    }
}

impl From<&str> for Field {
    fn from(s: &str) -> Self {
        Field::Text(s.to_string())
    }
}

impl From<String> for Field {
    fn from(s: String) -> Self {
        Field::Text(s)
    }
}

/// `x` with [`SIG_DIGITS`] significant digits and no trailing zeros.
pub fn format_number(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 {
            "0".to_string()
        } else {
            x.to_string()
        };
    }
    let exponent = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exponent) {
        let decimals = (SIG_DIGITS as i32 - 1 - exponent).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{:.*e}", SIG_DIGITS - 1, x)
    }
}

fn csv_cell(field: &Field) -> String {
    match field {
        Field::Num(x) => format_number(*x),
        Field::Text(s) if s.contains([',', '"', '\n', '\r']) => {
            format!("\"{}\"", s.replace('"', "\"\""))
        }
        Field::Text(s) => s.clone(),
    }
}

/// CSV text with a header line, `.` decimals and LF line endings.
pub fn emit_csv(header: &[&str], rows: &[Vec<Field>]) -> Result<String> {
    let mut out = header.join(",");
    out.push('\n');
    for (i, row) in rows.iter().enumerate() {
        if row.len() != header.len() {
            return Err(Error::RaggedRow {
                row: i,
                got: row.len(),
                expected: header.len(),
            });
        }
        let cells: Vec<String> = row.iter().map(csv_cell).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Runs the command line and returns the process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_io(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with_io<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let argv = match merge_config(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    0
                }
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = write!(err, "{}", e.render());
                    2
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    2
                }
            };
            return code;
        }
    };
    let mut warnings = Vec::new();
    match dispatch(cli.command, &mut warnings) {
        Ok(text) => {
            for w in warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            if out.write_all(text.as_bytes()).is_err() {
                return 2;
            }
            0
        }
        Err(e) => {
            for w in warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            let _ = writeln!(err, "error: {e}");
            if e.is_numerical() {
                3
            } else {
                2
            }
        }
    }
}

/// Expands `--config PATH` into flags placed right after the subcommand.
fn merge_config(argv: Vec<String>) -> Result<Vec<String>> {
    let mut path = None;
    let mut iter = argv.iter().skip(2);
    while let Some(arg) = iter.next() {
        if arg == "--config" {
            path = iter.next().cloned();
        } else if let Some(p) = arg.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else {
        return Ok(argv);
    };
    let subcommand = argv[1].clone();
    let command = Cli::command();
    let Some(sub) = command.find_subcommand(&subcommand) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Error::InvalidInput(format!("cannot read config file {path}: {e}")))?;

    let mut extra = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("{path}:{}: expected key=value", n + 1)))?;
        let key = key.trim().trim_start_matches("--");
        let value = value.trim();
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key) && key != "config")
            .ok_or_else(|| Error::InvalidInput(format!("{path}:{}: unknown key '{key}'", n + 1)))?;
        if arg.get_action().takes_values() {
            extra.push(format!("--{key}"));
            extra.push(value.to_string());
        } else {
            match value {
                "true" => extra.push(format!("--{key}")),
                "false" => {}
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "{path}:{}: '{key}' takes true or false",
                        n + 1
                    )))
                }
            }
        }
    }
    let mut merged = argv[..2].to_vec();
    merged.extend(extra);
    merged.extend(argv[2..].iter().cloned());
    Ok(merged)
}

fn dispatch(command: Command, warnings: &mut Vec<String>) -> Result<String> {
    match command {
        Command::Classify { market, cutoff } => {
            let setup = Setup::from_args(&market)?;
            let nu = resolve_nu(&cutoff, warnings)?;
            let s0 = require_s0(&market)?;
            let class = classify(&setup.params, &setup.barriers, s0, nu)?;
            if market.output.csv {
                emit_csv(
                    &["s0", "classification"],
                    &[vec![s0.into(), class.to_string().into()]],
                )
            } else {
                Ok(format!("{class}\n"))
            }
        }
        Command::Critical { market, cutoff } => {
            let setup = Setup::from_args(&market)?;
            let nu = resolve_nu(&cutoff, warnings)?;
            let prices = critical_prices(&setup.params, &setup.barriers, nu)?;
            let mut rows = Vec::new();
            for (side, price) in [(Side::Lower, prices.lower), (Side::Upper, prices.upper)] {
                if let Some(p) = price {
                    rows.push((side, p.price, p.time));
                }
            }
            if market.output.csv {
                let rows: Vec<Vec<Field>> = rows
                    .iter()
                    .map(|&(side, price, time)| {
                        vec![side.to_string().into(), price.into(), time.into()]
                    })
                    .collect();
                emit_csv(&["side", "critical_price", "time"], &rows)
            } else {
                let mut text = String::new();
                for (side, price, time) in rows {
                    let name = match side {
                        Side::Lower => "s_ml",
                        Side::Upper => "s_mu",
                    };
                    let _ = writeln!(
                        text,
                        "{name} = {} (at t = {})",
                        format_number(price),
                        format_number(time)
                    );
                }
                Ok(text)
            }
        }
        Command::Price {
            market,
            contract,
            sim,
        } => {
            let setup = Setup::from_args(&market)?;
            let s0 = require_s0(&market)?;
            let spec = contract_spec(&contract, &setup.barriers);
            let estimate = price(&setup.params, &spec, s0, &sim)?;
            if market.output.csv {
                emit_csv(
                    &["price", "std_error"],
                    &[vec![estimate.value.into(), estimate.std_error.into()]],
                )
            } else {
                let mut text = format!("price = {}\n", format_number(estimate.value));
                if sim.method == Method::Mc {
                    let _ = writeln!(text, "std_error = {}", format_number(estimate.std_error));
                }
                Ok(text)
            }
        }
        Command::Breach { market, sim } => {
            let setup = Setup::from_args(&market)?;
            let s0 = require_s0(&market)?;
            let (p, se) = breach(&setup, s0, &sim)?;
            if market.output.csv {
                emit_csv(
                    &["breach_probability", "std_error"],
                    &[vec![p.into(), se.into()]],
                )
            } else {
                let mut text = format!("breach probability = {}\n", format_number(p));
                if sim.method == Method::Mc {
                    let _ = writeln!(text, "std_error = {}", format_number(se));
                }
                Ok(text)
            }
        }
        Command::Calibrate {
            market,
            contract,
            price_accuracy,
            nu,
        } => {
            let setup = Setup::from_args(&market)?;
            let accuracy = resolve_price_accuracy(&price_accuracy)?;
            let row = match (&setup.barriers.lower, &setup.barriers.upper) {
                (Some(BarrierCurve::Flat(level)), None) => {
                    calibration_row(&setup.params, contract.strike, *level, nu, accuracy)?
                }
                _ => {
                    return Err(Error::Unsupported(
                        "calibration needs a single flat lower barrier".to_string(),
                    ))
                }
            };
            render_calibration(&[row], market.output.csv, &price_accuracy)
        }
        Command::Table1 {
            price_accuracy,
            nu,
            output,
        } => {
            let accuracy = resolve_price_accuracy(&price_accuracy)?;
            let rows = reproduce_table1(nu, accuracy)?;
            if output.csv && price_accuracy.theta.is_none() && price_accuracy.digits.is_none() {
                warnings.push(PRECISION_NOTE.trim_start_matches("note: ").to_string());
            }
            render_calibration(&rows, output.csv, &price_accuracy)
        }
        Command::Sweep {
            market,
            cutoff,
            contract,
            sim,
            from,
            to,
            points,
        } => {
            let setup = Setup::from_args(&market)?;
            let nu = resolve_nu(&cutoff, warnings)?;
            if points < 2 || !(from.is_finite() && to.is_finite() && from < to) {
                return Err(Error::InvalidInput(
                    "sweep needs --from < --to and at least two points".to_string(),
                ));
            }
            let spec = contract_spec(&contract, &setup.barriers);
            let mut rows = Vec::with_capacity(points);
            for i in 0..points {
                let s0 = from + (to - from) * i as f64 / (points - 1) as f64;
                let class = classify(&setup.params, &setup.barriers, s0, nu)?;
                let vanilla = bs_vanilla(&setup.params, spec.payoff, spec.strike, s0).value;
                let knock_out = price(&setup.params, &spec, s0, &sim)?.value;
                rows.push(vec![
                    s0.into(),
                    class.to_string().into(),
                    vanilla.into(),
                    knock_out.into(),
                    (vanilla - knock_out).into(),
                ]);
            }
            let header = ["s0", "classification", "vanilla", "knock_out", "difference"];
            if market.output.csv {
                emit_csv(&header, &rows)
            } else {
                let mut text = String::new();
                let _ = writeln!(text, "{}", header.join("\t"));
                for row in rows {
                    let cells: Vec<String> = row.iter().map(csv_cell).collect();
                    let _ = writeln!(text, "{}", cells.join("\t"));
                }
                Ok(text)
            }
        }
    }
}

struct Setup {
    params: MarketParams,
    barriers: BarrierSet,
}

impl Setup {
    fn from_args(args: &MarketArgs) -> Result<Self> {
        let params = MarketParams::new(args.rate, args.sigma, args.horizon)?
            .with_dividend_yield(args.dividend_yield)?;
        let barriers = BarrierSet {
            lower: curve(args.lower, args.lower_growth, args.lower_file.as_deref())?,
            upper: curve(args.upper, args.upper_growth, args.upper_file.as_deref())?,
        };
        barriers.validate(params.horizon())?;
        Ok(Setup { params, barriers })
    }
}

fn curve(
    level: Option<f64>,
    growth: Option<f64>,
    file: Option<&Path>,
) -> Result<Option<BarrierCurve>> {
    match (level, growth, file) {
        (_, _, Some(path)) => Ok(Some(BarrierCurve::tabulated(&read_knots(path)?)?)),
        (Some(level), Some(growth), None) => Ok(Some(BarrierCurve::exponential(level, growth)?)),
        (Some(level), None, None) => Ok(Some(BarrierCurve::flat(level)?)),
        (None, _, None) => Ok(None),
    }
}

/// Reads `t,level` pairs; a non-numeric first line is taken as a header.
fn read_knots(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    let mut knots = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        if record.len() != 2 {
            return Err(Error::RaggedRow {
                row: i,
                got: record.len(),
                expected: 2,
            });
        }
        let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
        match parsed {
            (Ok(t), Ok(level)) => knots.push((t, level)),
            _ if i == 0 => continue,
            _ => {
                return Err(Error::InvalidInput(format!(
                    "{}: line {} is not a pair of numbers",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(knots)
}

fn require_s0(args: &MarketArgs) -> Result<f64> {
    args.s0
        .ok_or_else(|| Error::InvalidInput("--s0 is required for this command".to_string()))
}

fn resolve_nu(args: &CutoffArgs, warnings: &mut Vec<String>) -> Result<f64> {
    if let Some(nu) = args.nu {
        if args.pi.is_some() || args.digits.is_some() {
            warnings.push("--nu overrides --pi and --digits".to_string());
        }
        if !(nu.is_finite() && nu >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "nu must be a non-negative number, got {nu}"
            )));
        }
        return Ok(nu);
    }
    if args.pi.is_some() && args.digits.is_some() {
        warnings.push("--pi overrides --digits".to_string());
    }
    match (args.pi, args.digits) {
        (Some(pi), _) => nu_for_accuracy(pi),
        (None, Some(digits)) => nu_for_accuracy(10f64.powi(-(digits as i32))),
        (None, None) => Err(Error::InvalidInput(
            "one of --nu, --pi or --digits is required".to_string(),
        )),
    }
}

fn resolve_price_accuracy(args: &PriceAccuracyArgs) -> Result<PriceAccuracy> {
    Ok(match (args.theta, args.digits) {
        (Some(theta), _) => PriceAccuracy::Absolute(theta),
        (None, Some(digits)) => PriceAccuracy::digits(digits),
        (None, None) => PriceAccuracy::double_precision_floor(),
    })
}

fn contract_spec(args: &ContractArgs, barriers: &BarrierSet) -> OptionSpec {
    OptionSpec::new(args.payoff.into(), args.strike, barriers.clone())
        .with_rebates(args.rebate_lower, args.rebate_upper)
}

fn mc_config(sim: &SimArgs) -> McConfig {
    McConfig {
        paths: sim.paths,
        steps_per_year: sim.steps,
        seed: sim.seed,
        ..McConfig::default()
    }
}

fn price(
    params: &MarketParams,
    spec: &OptionSpec,
    s0: f64,
    sim: &SimArgs,
) -> Result<PriceEstimate> {
    match sim.method {
        Method::Mc => mc_price(params, spec, s0, &mc_config(sim)),
        Method::Pde => Err(Error::Unsupported(
            "pricing by finite differences; use closed or mc".to_string(),
        )),
        Method::Closed => closed_price(params, spec, s0),
    }
}

fn closed_price(params: &MarketParams, spec: &OptionSpec, s0: f64) -> Result<PriceEstimate> {
    crate::model::validate(*params, spec.clone())?;
    let unsupported = || {
        Err(Error::Unsupported(
            "closed forms cover vanilla options, calls with one flat barrier and calls with two flat or \
             exponential barriers, without rebates; use --method mc"
                .to_string(),
        ))
    };
    if spec.rebate_lower > 0.0 || spec.rebate_upper > 0.0 {
        return unsupported();
    }
    let barriers = &spec.barriers;
    match (spec.payoff, &barriers.lower, &barriers.upper) {
        (payoff, None, None) => Ok(bs_vanilla(params, payoff, spec.strike, s0)),
        (Payoff::Call, Some(BarrierCurve::Flat(l)), None) => {
            down_and_out_call_closed(params, spec.strike, *l, s0)
        }
        (Payoff::Call, None, Some(BarrierCurve::Flat(u))) => {
            up_and_out_call_closed(params, spec.strike, *u, s0)
        }
        (Payoff::Call, Some(l), Some(u)) => match (l.as_exponential(), u.as_exponential()) {
            (Some((l0, gl)), Some((u0, gu))) => {
                double_knockout_closed(params, spec.strike, l0, u0, s0, Some((gl, gu)))
            }
            _ => unsupported(),
        },
        _ => unsupported(),
    }
}

fn breach(setup: &Setup, s0: f64, sim: &SimArgs) -> Result<(f64, f64)> {
    match sim.method {
        Method::Closed => match (&setup.barriers.lower, &setup.barriers.upper) {
            (Some(BarrierCurve::Flat(l)), None) => Ok((
                breach_prob_closed_flat(&setup.params, Side::Lower, *l, s0)?,
                0.0,
            )),
            (None, Some(BarrierCurve::Flat(u))) => Ok((
                breach_prob_closed_flat(&setup.params, Side::Upper, *u, s0)?,
                0.0,
            )),
            (None, None) => Err(Error::EmptyBarrierSet),
            _ => Err(Error::Unsupported(
                "the closed form covers a single flat barrier; use --method mc or pde".to_string(),
            )),
        },
        Method::Mc => {
            let cfg = mc_config(sim);
            if setup.barriers.is_empty() {
                return Err(Error::EmptyBarrierSet);
            }
            let est = breach_prob_mc(&setup.params, &setup.barriers, s0, &cfg)?;
            Ok((est.total(), est.total_std_error(cfg.paths)))
        }
        Method::Pde => {
            let grid = PdeGrid::new(sim.grid, sim.grid);
            Ok((
                breach_prob_pde(&setup.params, &setup.barriers, s0, &grid)?,
                0.0,
            ))
        }
    }
}

fn render_calibration(
    rows: &[CalibrationRow],
    csv: bool,
    accuracy: &PriceAccuracyArgs,
) -> Result<String> {
    if csv {
        let rows: Vec<Vec<Field>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.horizon.into(),
                    r.sigma.into(),
                    r.analytic_s_ml.into(),
                    r.numeric_s_ml.into(),
                    r.implied_nu.into(),
                ]
            })
            .collect();
        return emit_csv(
            &["T", "sigma", "analytic_sml", "numeric_sml", "implied_nu"],
            &rows,
        );
    }
    let mut text = format!(
        "{:>6} {:>6} {:>14} {:>14} {:>10}\n",
        "T", "sigma", "analytic_sml", "numeric_sml", "implied_nu"
    );
    for r in rows {
        let _ = writeln!(
            text,
            "{:>6} {:>6} {:>14.6} {:>14.6} {:>10.4}",
            r.horizon, r.sigma, r.analytic_s_ml, r.numeric_s_ml, r.implied_nu
        );
    }
    if accuracy.theta.is_none() && accuracy.digits.is_none() {
        let _ = writeln!(text, "{PRECISION_NOTE}");
    }
    Ok(text)
}
