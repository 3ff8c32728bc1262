//! Command-line front end for `pelve_core`: analytic queries, empirical
//! estimates from CSV series, Monte Carlo studies and rolling-window PELVE.

mod app;
pub mod dist_arg;
pub mod error;
pub mod output;
pub mod rolling;
pub mod series;

pub use app::{run, Cli};
pub use dist_arg::parse_distribution;
pub use error::{CliError, IngestError};
pub use rolling::{rolling_pelve, RollingConfig, RollingRow};
pub use series::{ingest_prices, ingest_returns, ReturnSeries};
