//! Rolling-window empirical PELVE over a return series.

use chrono::NaiveDate;
use pelve_core::{empirical_pelve, Level, Order, OrderedSample, PelveResult, DEFAULT_C_TOL};
use rayon::prelude::*;

use crate::error::CliError;
use crate::series::ReturnSeries;

#[derive(Debug, Clone, PartialEq)]
pub struct RollingConfig {
    pub window: usize,
    pub eps: Level,
    pub orders: Vec<Order>,
    /// Treat losses as negated returns.
    pub negate: bool,
    pub c_tol: f64,
}

impl Default for RollingConfig {
    fn default() -> Self {
        Self {
            window: 100,
            eps: Level::tail(0.05).expect("valid default level"),
            orders: vec![Order::ONE, Order::TWO],
            negate: false,
            c_tol: DEFAULT_C_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RollingRow {
    pub date: NaiveDate,
    pub order: Order,
    pub result: PelveResult,
    /// `window * eps < 1`: the estimate is degenerate.
    pub small_sample: bool,
}

/// For every window of `cfg.window` returns ending at `t`, the empirical
/// PELVE of each order, dated at `t`.
///
/// Rows come out by date and then in the order of `cfg.orders`; windows are
/// evaluated in parallel.
pub fn rolling_pelve(series: &ReturnSeries, cfg: &RollingConfig) -> Result<Vec<RollingRow>, CliError> {
    if cfg.window < 2 {
        return Err(CliError::Usage(format!(
            "window must be at least 2, got {}",
            cfg.window
        )));
    }
    if cfg.orders.is_empty() {
        return Err(CliError::Usage("at least one order is required".into()));
    }
    if series.len() < cfg.window {
        return Err(CliError::SeriesTooShort {
            len: series.len(),
            window: cfg.window,
        });
    }
    let sign = if cfg.negate { -1.0 } else { 1.0 };
    let returns = series.returns();
    let blocks = (cfg.window - 1..series.len())
        .into_par_iter()
        .map(|end| {
            let window = &returns[end + 1 - cfg.window..=end];
            let sample = OrderedSample::new(window.iter().map(|r| sign * r).collect())?;
            cfg.orders
                .iter()
                .map(|&order| {
                    let est = empirical_pelve(&sample, order, cfg.eps, cfg.c_tol)?;
                    Ok(RollingRow {
                        date: series.dates()[end],
                        order,
                        result: est.result,
                        small_sample: est.small_sample,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(blocks.into_iter().flatten().collect())
}
