//! Argument parsing and the four subcommands.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use pelve_core::{
    check_c_tol, check_rel_tol, empirical_es_n, empirical_pelve, empirical_var, es_n, es_n_closed, pelve,
    pelve_closed, run_study, DistributionModel, EsMethod, Level, Order, OrderedSample, PelveResult,
    RiskError, StudyConfig, DEFAULT_C_TOL, DEFAULT_REL_TOL,
};

use crate::dist_arg::parse_distribution;
use crate::error::CliError;
use crate::output::{render, Cell, Format, Table};
use crate::rolling::{rolling_pelve, RollingConfig};
use crate::series::{ingest_prices, ingest_returns, ReturnSeries};

#[derive(Debug, Parser)]
#[command(
    name = "pelve",
    version,
    about = "VaR, higher-order Expected Shortfall and PELVE"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Bisection tolerance on c, relative to 1/eps - 1.
    #[arg(long, global = true, default_value_t = DEFAULT_C_TOL, value_parser = parse_c_tol)]
    ctol: f64,
    /// Relative tolerance of numerical Expected Shortfall integrals.
    #[arg(long, global = true, default_value_t = DEFAULT_REL_TOL, value_parser = parse_rel_tol)]
    reltol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// VaR, an ES_n grid and PELVE_n of an analytic distribution.
    Analytic(AnalyticArgs),
    /// Empirical VaR, ES_n and PELVE_n of a whole CSV series.
    Empirical(EmpiricalArgs),
    /// Monte Carlo study of the empirical PELVE_n.
    Simulate(SimulateArgs),
    /// Rolling-window empirical PELVE over a CSV series.
    Rolling(RollingArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Prices,
    Returns,
}

#[derive(Debug, Args)]
struct AnalyticArgs {
    /// Distribution, e.g. `normal:0,1` or `excessgpd:u,kappa,beta,Fu`.
    #[arg(long, value_parser = parse_distribution)]
    dist: DistributionModel,
    #[arg(long, value_parser = parse_order)]
    order: Order,
    #[arg(long, value_parser = parse_eps)]
    epsilon: Level,
    /// Fail instead of falling back to numerical methods.
    #[arg(long)]
    closed_only: bool,
}

#[derive(Debug, Args)]
struct EmpiricalArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long, value_parser = parse_order)]
    order: Order,
    #[arg(long, value_parser = parse_eps)]
    epsilon: Level,
    /// Use negated returns as losses.
    #[arg(long)]
    negate: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_parser = parse_distribution)]
    dist: DistributionModel,
    #[arg(long, value_parser = parse_order)]
    order: Order,
    #[arg(long, value_parser = parse_eps)]
    epsilon: Level,
    #[arg(long)]
    replicates: usize,
    /// Sample length of each replicate.
    #[arg(long)]
    length: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = pelve_core::montecarlo::DEFAULT_BINS)]
    bins: usize,
}

#[derive(Debug, Args)]
struct RollingArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long, default_value_t = 100)]
    window: usize,
    #[arg(long, default_value = "0.05", value_parser = parse_eps)]
    epsilon: Level,
    /// Comma-separated orders.
    #[arg(long, default_value = "1,2", value_delimiter = ',', value_parser = parse_order)]
    orders: Vec<Order>,
    /// Use negated returns as losses.
    #[arg(long)]
    negate: bool,
}

fn parse_order(s: &str) -> Result<Order, String> {
    let n: u32 = s
        .trim()
        .parse()
        .map_err(|_| format!("`{s}` is not a positive integer"))?;
    Order::new(n).map_err(|e| e.to_string())
}

fn parse_eps(s: &str) -> Result<Level, String> {
    let e: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    Level::tail(e).map_err(|e| e.to_string())
}

fn parse_c_tol(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    check_c_tol(x).map(|_| x).map_err(|e| e.to_string())
}

fn parse_rel_tol(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    check_rel_tol(x).map(|_| x).map_err(|e| e.to_string())
}

fn load_series(path: &Path, kind: Kind) -> Result<ReturnSeries, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(match kind {
        Kind::Prices => ingest_prices(&text)?,
        Kind::Returns => ingest_returns(&text)?,
    })
}

fn method_name(m: EsMethod) -> &'static str {
    match m {
        EsMethod::ClosedForm => "closed",
        EsMethod::Quadrature => "numeric",
    }
}

/// Levels of the printed ES_n grid.
fn es_levels(dist: &DistributionModel, eps: f64) -> Vec<f64> {
    let base = dist.level_floor();
    let mut levels: Vec<f64> = [0.0, 0.5, 0.9, 0.95, 0.975, 0.99, 1.0 - eps]
        .into_iter()
        .filter(|&p| p >= base)
        .collect();
    if base > 0.0 {
        levels.push(base);
    }
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    levels
}

fn analytic(cli: &Cli, a: &AnalyticArgs) -> Result<Vec<Table>, CliError> {
    let eps = a.epsilon.value();
    let mut table = Table::new("analytic", &["quantity", "order", "level", "value", "method"]);
    let var = a.dist.quantile(1.0 - eps)?;
    table.push(vec![
        "var".into(),
        Cell::Empty,
        (1.0 - eps).into(),
        var.into(),
        "closed".into(),
    ]);

    let order = u64::from(a.order.get());
    for p in es_levels(&a.dist, eps) {
        let level = Level::prob(p)?;
        let (value, method) = if a.closed_only {
            (es_n_closed(&a.dist, a.order, level)?, EsMethod::ClosedForm)
        } else {
            let r = es_n(&a.dist, a.order, level, cli.reltol)?;
            (r.value, r.method)
        };
        table.push(vec![
            "es".into(),
            order.into(),
            p.into(),
            value.into(),
            method_name(method).into(),
        ]);
    }

    let (result, method): (PelveResult, &str) = match pelve_closed(&a.dist, a.order, a.epsilon) {
        Ok(r) => (r, "closed"),
        Err(RiskError::NoClosedForm { .. }) if !a.closed_only => (
            pelve(&a.dist, a.order, a.epsilon, cli.ctol, cli.reltol)?,
            "numeric",
        ),
        Err(e) => return Err(e.into()),
    };
    table.push(vec![
        "pelve".into(),
        order.into(),
        eps.into(),
        result.outcome.into(),
        method.into(),
    ]);
    Ok(vec![table])
}

fn empirical(cli: &Cli, a: &EmpiricalArgs) -> Result<Vec<Table>, CliError> {
    let series = load_series(&a.input, a.kind)?;
    let sign = if a.negate { -1.0 } else { 1.0 };
    let sample = OrderedSample::new(series.returns().iter().map(|r| sign * r).collect())?;
    let eps = a.epsilon.value();
    let est = empirical_pelve(&sample, a.order, a.epsilon, cli.ctol)?;
    let mut table = Table::new(
        "empirical",
        &[
            "observations",
            "order",
            "epsilon",
            "var",
            "es",
            "pelve",
            "small_sample",
        ],
    );
    table.push(vec![
        (sample.len() as u64).into(),
        u64::from(a.order.get()).into(),
        eps.into(),
        empirical_var(&sample, 1.0 - eps)?.into(),
        empirical_es_n(&sample, a.order, 1.0 - eps)?.into(),
        est.result.outcome.into(),
        est.small_sample.into(),
    ]);
    Ok(vec![table])
}

fn simulate(cli: &Cli, a: &SimulateArgs) -> Result<Vec<Table>, CliError> {
    if a.bins == 0 {
        return Err(CliError::Usage("--bins must be at least 1".into()));
    }
    let cfg = StudyConfig {
        c_tol: cli.ctol,
        ..StudyConfig::new(a.dist, a.order, a.epsilon, a.replicates, a.length, a.seed)
    };
    let res = run_study(&cfg).map_err(|e| match e {
        RiskError::InvalidConfig(msg) => CliError::Usage(msg),
        other => other.into(),
    })?;
    let errors = res.estimates.iter().filter(|e| e.outcome.is_err()).count();
    if errors == res.estimates.len() {
        if let Some(Err(e)) = res.estimates.first().map(|e| &e.outcome) {
            return Err(e.clone().into());
        }
    }
    let small = res.estimates.iter().filter(|e| e.small_sample).count();
    let finite = res.finite_count > 0;
    let mut summary = Table::new(
        "summary",
        &["replicates", "finite", "errors", "small_sample", "mean", "stddev"],
    );
    summary.push(vec![
        (res.estimates.len() as u64).into(),
        (res.finite_count as u64).into(),
        (errors as u64).into(),
        (small as u64).into(),
        if finite { res.mean.into() } else { Cell::Empty },
        if finite { res.stddev.into() } else { Cell::Empty },
    ]);
    let mut histogram = Table::new("histogram", &["bin_low", "bin_high", "count"]);
    if finite {
        for bin in pelve_core::export_histogram(&res, a.bins)? {
            histogram.push(vec![bin.low.into(), bin.high.into(), (bin.count as u64).into()]);
        }
    }
    Ok(vec![summary, histogram])
}

fn rolling(cli: &Cli, a: &RollingArgs) -> Result<Vec<Table>, CliError> {
    let series = load_series(&a.input, a.kind)?;
    let cfg = RollingConfig {
        window: a.window,
        eps: a.epsilon,
        orders: a.orders.clone(),
        negate: a.negate,
        c_tol: cli.ctol,
    };
    let mut table = Table::new("rolling", &["date", "order", "pelve", "small_sample"]);
    for row in rolling_pelve(&series, &cfg)? {
        table.push(vec![
            Cell::Text(row.date.to_string()),
            u64::from(row.order.get()).into(),
            row.result.outcome.into(),
            row.small_sample.into(),
        ]);
    }
    Ok(vec![table])
}

fn execute(cli: &Cli) -> Result<String, CliError> {
    let tables = match &cli.command {
        Command::Analytic(a) => analytic(cli, a)?,
        Command::Empirical(a) => empirical(cli, a)?,
        Command::Simulate(a) => simulate(cli, a)?,
        Command::Rolling(a) => rolling(cli, a)?,
    };
    Ok(render(&tables, cli.format))
}

/// Runs the command line `args` (program name first), writing results to
/// `out` and diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    match execute(&cli) {
        Ok(text) => match out.write_all(text.as_bytes()) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                2
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
