//! Probability equivalent level of VaR and ES_n (PELVE_n).
//!
//! For a tail size `eps` the PELVE_n is
//!
//! ```text
//! inf { c in [1, 1/eps] : ES_n(1 - c eps) <= VaR(1 - eps) }
//! ```
//!
//! with `inf {} = inf`. It is finite exactly when `ES_n(0) <= VaR(1 - eps)`.
//! `c -> ES_n(1 - c eps)` is continuous and nonincreasing, which is all the
//! bisection in [`pelve`] relies on.

use std::fmt;

use crate::distributions::{DistributionModel, Level, Order};
use crate::error::{Result, RiskError};
use crate::quadrature::{integrate_graded, MAX_NODES};
use crate::risk_measures::{check_rel_tol, es_n_closed, es_n_quadrature, harmonic_number, pareto_es_factor};

/// Default bisection tolerance on `c`, relative to the search width `1/eps - 1`.
pub const DEFAULT_C_TOL: f64 = 1e-9;

const MIN_C_TOL: f64 = 1e-12;
const MAX_C_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PelveOutcome {
    Finite(f64),
    Infinite,
}

impl PelveOutcome {
    pub fn finite(self) -> Option<f64> {
        match self {
            Self::Finite(c) => Some(c),
            Self::Infinite => None,
        }
    }
}

impl fmt::Display for PelveOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(c) => write!(f, "{c}"),
            Self::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PelveResult {
    pub outcome: PelveOutcome,
    pub iterations: u32,
    /// `|ES_n(1 - c eps) - VaR(1 - eps)|` at the returned `c`; zero for
    /// closed forms and infinite outcomes.
    pub residual: f64,
}

impl PelveResult {
    pub(crate) fn infinite() -> Self {
        Self {
            outcome: PelveOutcome::Infinite,
            iterations: 0,
            residual: 0.0,
        }
    }

    fn closed(c: f64) -> Self {
        Self {
            outcome: PelveOutcome::Finite(c),
            iterations: 0,
            residual: 0.0,
        }
    }

    pub fn value(&self) -> Option<f64> {
        self.outcome.finite()
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.outcome, PelveOutcome::Finite(_))
    }
}

/// Accepts a bisection tolerance in `[1e-12, 1e-3]`.
pub fn check_c_tol(c_tol: f64) -> Result<()> {
    if (MIN_C_TOL..=MAX_C_TOL).contains(&c_tol) {
        Ok(())
    } else {
        Err(RiskError::ToleranceOutOfRange {
            value: c_tol,
            min: MIN_C_TOL,
            max: MAX_C_TOL,
        })
    }
}

/// Level `1 - c eps`, pinned to `floor` at the right end of the search range.
fn level_for(c: f64, eps: f64, c_max: f64, floor: f64) -> f64 {
    if c >= c_max {
        floor
    } else {
        (1.0 - c * eps).max(floor)
    }
}

/// Bisection on the nonincreasing excess `g(c) = ES_n(1 - c eps) - VaR(1 - eps)`
/// over `[1, c_max]`. The caller has established `g(c_max) <= 0`.
pub(crate) fn bisect_excess<G>(mut excess: G, eps: f64, c_max: f64, c_tol: f64) -> Result<PelveResult>
where
    G: FnMut(f64) -> Result<f64>,
{
    let at_one = excess(1.0)?;
    if at_one <= 0.0 {
        return Ok(PelveResult {
            outcome: PelveOutcome::Finite(1.0),
            iterations: 0,
            residual: at_one.abs(),
        });
    }
    let width_goal = c_tol * (1.0 / eps - 1.0);
    let (mut lo, mut hi) = (1.0, c_max);
    let mut iterations = 0;
    while hi - lo > width_goal {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let c = 0.5 * (lo + hi);
    let residual = excess(c)?.abs();
    Ok(PelveResult {
        outcome: PelveOutcome::Finite(c),
        iterations,
        residual,
    })
}

/// `ES_n(p) - target`. On the quadrature path the shifted quantile
/// `q - target` is integrated instead, which is the same quantity by
/// translation equivariance but keeps the integration error on the scale of
/// the spread rather than the location of the distribution.
fn es_excess(dist: &DistributionModel, n: Order, p: f64, target: f64, rel_tol: f64) -> Result<f64> {
    let level = Level::prob(p)?;
    match es_n_closed(dist, n, level) {
        Ok(v) => Ok(v - target),
        Err(RiskError::NoClosedForm { .. }) => {
            let model = *dist;
            Ok(es_n_quadrature(move |s| model.quantile_unchecked(s) - target, n, level, rel_tol)?.value)
        }
        Err(e) => Err(e),
    }
}

/// Whether PELVE_n is finite: `ES_n(0) <= VaR(1 - eps)`.
///
/// For an excess-GPD model with `F_X(u) > 0` only `ES_n(F_X(u))` is known;
/// when that already satisfies the inequality the answer is `true`, and
/// otherwise [`RiskError::PelveUndetermined`] is returned.
pub fn pelve_exists(dist: &DistributionModel, n: Order, eps: Level, rel_tol: f64) -> Result<bool> {
    let eps = Level::tail(eps.value())?.value();
    let floor = dist.level_floor();
    let target = var_target(dist, eps)?;
    check_rel_tol(rel_tol)?;
    let holds = es_excess(dist, n, floor, target, rel_tol)? <= 0.0;
    if !holds && floor > 0.0 {
        return Err(RiskError::PelveUndetermined { epsilon: eps });
    }
    Ok(holds)
}

fn var_target(dist: &DistributionModel, eps: f64) -> Result<f64> {
    match dist.quantile(1.0 - eps) {
        Err(RiskError::ExcessGpdLevelBelowBase { .. }) => Err(RiskError::PelveUndetermined { epsilon: eps }),
        other => other,
    }
}

/// PELVE_n of an analytic model, by bisection on `c`.
///
/// ES values come from closed forms where available and otherwise from
/// quadrature of the quantile shifted by `VaR(1 - eps)`. The bracket is
/// shrunk until its width is at most `c_tol (1/eps - 1)`; the midpoint is
/// returned.
pub fn pelve(
    dist: &DistributionModel,
    n: Order,
    eps: Level,
    c_tol: f64,
    rel_tol: f64,
) -> Result<PelveResult> {
    check_c_tol(c_tol)?;
    check_rel_tol(rel_tol)?;
    let eps = Level::tail(eps.value())?.value();
    if !pelve_exists(dist, n, Level::tail(eps)?, rel_tol)? {
        return Ok(PelveResult::infinite());
    }
    let floor = dist.level_floor();
    let c_max = (1.0 - floor) / eps;
    let target = var_target(dist, eps)?;
    let excess = |c: f64| -> Result<f64> {
        let p = level_for(c, eps, c_max, floor);
        es_excess(dist, n, p, target, rel_tol)
    };
    let at_max = excess(c_max)?;
    if at_max > 0.0 {
        return Err(RiskError::BracketFailure { excess: at_max });
    }
    bisect_excess(excess, eps, c_max, c_tol)
}

/// PELVE_n of an arbitrary quantile function, with every ES by quadrature.
pub fn pelve_from_quantile<Q>(
    quantile: Q,
    n: Order,
    eps: Level,
    c_tol: f64,
    rel_tol: f64,
) -> Result<PelveResult>
where
    Q: Fn(f64) -> f64,
{
    check_c_tol(c_tol)?;
    check_rel_tol(rel_tol)?;
    let eps = Level::tail(eps.value())?.value();
    let c_max = 1.0 / eps;
    let target = quantile(1.0 - eps);
    let excess = |c: f64| -> Result<f64> {
        let p = level_for(c, eps, c_max, 0.0);
        Ok(es_n_quadrature(|s| quantile(s) - target, n, Level::prob(p)?, rel_tol)?.value)
    };
    if excess(c_max)? > 0.0 {
        return Ok(PelveResult::infinite());
    }
    bisect_excess(excess, eps, c_max, c_tol)
}

/// Closed-form PELVE_n.
///
/// | family | orders | value | finite for `eps <=` |
/// |---|---|---|---|
/// | uniform | all | `n + 1` | `1/(n+1)` |
/// | exponential | all | `exp(H_n)` | `exp(-H_n)` |
/// | Pareto, `alpha > 1` | all | `A^alpha` | `A^-alpha` |
/// | GPD / excess GPD, `kappa < 1` | 2 | `(2/((1-k)(2-k)))^(1/k)` | `(1-F_X(u)) / value` |
///
/// with `A = n B(1 - 1/alpha, n)` and `e^{3/2}` at `kappa = 0`. Thresholds
/// are inclusive. Above the threshold the result is infinite, except for an
/// excess GPD with `F_X(u) > 0`, where it depends on the unknown base law and
/// [`RiskError::PelveUndetermined`] is returned.
pub fn pelve_closed(dist: &DistributionModel, n: Order, eps: Level) -> Result<PelveResult> {
    dist.validate()?;
    let eps = Level::tail(eps.value())?.value();
    if !dist.has_first_moment() {
        return Err(RiskError::NoFirstMoment {
            family: dist.family(),
        });
    }
    let order = n.get();
    let (value, threshold, base) = match *dist {
        DistributionModel::Uniform { .. } => {
            let v = order as f64 + 1.0;
            (v, 1.0 / v, 0.0)
        }
        DistributionModel::Exponential { .. } => {
            let h = harmonic_number(n);
            (h.exp(), (-h).exp(), 0.0)
        }
        DistributionModel::Pareto { tail, .. } => {
            let log_a = pareto_es_factor(tail, order).ln();
            ((tail * log_a).exp(), (-tail * log_a).exp(), 0.0)
        }
        DistributionModel::GeneralizedPareto { .. } | DistributionModel::ExcessGpd { .. } => {
            if order != 2 {
                return Err(RiskError::NoClosedForm {
                    family: dist.family(),
                    order,
                });
            }
            let (_, kappa, _, base) = dist.gpd_tail().expect("gpd variant");
            let log_value = gpd_log_pelve2(kappa);
            (log_value.exp(), (1.0 - base) * (-log_value).exp(), base)
        }
        DistributionModel::Normal { .. } => {
            return Err(RiskError::NoClosedForm {
                family: dist.family(),
                order,
            })
        }
    };
    if eps <= threshold {
        Ok(PelveResult::closed(value))
    } else if base > 0.0 {
        Err(RiskError::PelveUndetermined { epsilon: eps })
    } else {
        Ok(PelveResult::infinite())
    }
}

/// `ln((2/((1-k)(2-k)))^(1/k))`, continuous through `k = 0` where it is 3/2.
fn gpd_log_pelve2(kappa: f64) -> f64 {
    if kappa == 0.0 {
        return 1.5;
    }
    // ln(2/((1-k)(2-k))) = -ln(1-k) - ln(1-k/2)
    (-(-kappa).ln_1p() - (-0.5 * kappa).ln_1p()) / kappa
}

/// Small-eps limit of PELVE_2 for a regularly varying loss with tail index
/// `alpha > 1`: `(2 alpha^2 / ((alpha-1)(2 alpha-1)))^alpha`.
///
/// Strictly decreasing in `alpha`, with infimum `e^{3/2}` as `alpha -> inf`.
pub fn pelve2_rv_limit(alpha: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(RiskError::AlphaOutOfRange(alpha));
    }
    let x = 1.0 / alpha;
    // ln(2a^2/((a-1)(2a-1))) = -ln(1 - 1/a) - ln(1 - 1/(2a))
    let log_base = -(-x).ln_1p() - (-0.5 * x).ln_1p();
    Ok((alpha * log_base).exp())
}

/// Karamata ratio `int_0^eps v^kappa dv / (eps * eps^kappa)` for the power
/// kernel, computed numerically. For `kappa > -1` it equals `1/(kappa + 1)`.
pub fn karamata_ratio(kappa: f64, eps: Level, rel_tol: f64) -> Result<f64> {
    if !(kappa.is_finite() && kappa > -1.0) {
        return Err(RiskError::KappaOutOfRange(kappa));
    }
    let eps = Level::tail(eps.value())?.value();
    karamata_ratio_with(|v: f64| v.powf(kappa), eps, rel_tol)
}

/// Karamata ratio `int_0^eps f(v) dv / (eps f(eps))` for a general kernel `f`.
pub fn karamata_ratio_with<F: Fn(f64) -> f64>(kernel: F, eps: f64, rel_tol: f64) -> Result<f64> {
    check_rel_tol(rel_tol)?;
    let denom = eps * kernel(eps);
    let integral = integrate_graded(&kernel, eps, rel_tol, 52, MAX_NODES)?;
    Ok(integral.value / denom)
}
