//! Value at Risk, n-th order Expected Shortfall, Gini Shortfall and the
//! probability equivalent level PELVE_n.
//!
//! * [`distributions`]: analytic families, levels, orders, sampling.
//! * [`risk_measures`]: ES_n in closed form or by quadrature, tail-Gini,
//!   Gini Shortfall.
//! * [`pelve_solver`]: PELVE_n by bisection, closed forms, the regularly
//!   varying limit and the Karamata ratio.
//! * [`empirical`]: estimators from ordered samples.
//! * [`montecarlo`]: seeded replicate studies of the empirical estimator.

pub mod distributions;
pub mod empirical;
pub mod error;
pub mod montecarlo;
pub mod pelve_solver;
mod quadrature;
pub mod risk_measures;
pub mod special;

pub use distributions::{DistributionModel, Level, Order};
pub use empirical::{
    empirical_es_n, empirical_pelve, empirical_var, es_n_weights, EmpiricalPelve, OrderedSample, WeightVector,
};
pub use error::{Result, RiskError};
pub use montecarlo::{
    export_histogram, replicate_seed, run_study, HistogramBin, ReplicateEstimate, StudyConfig, StudyResult,
};
pub use pelve_solver::{
    check_c_tol, karamata_ratio, karamata_ratio_with, pelve, pelve2_rv_limit, pelve_closed, pelve_exists,
    pelve_from_quantile, PelveOutcome, PelveResult, DEFAULT_C_TOL,
};
pub use risk_measures::{
    check_rel_tol, es_n, es_n_closed, es_n_quadrature, gini_shortfall, gini_shortfall_from_quantile,
    harmonic_number, tail_gini, tail_gini_from_quantile, EsMethod, EsResult, GiniParams, DEFAULT_REL_TOL,
};
