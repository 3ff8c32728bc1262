//! Higher-order Expected Shortfall, tail-Gini and Gini Shortfall.
//!
//! The n-th order Expected Shortfall at level `p` averages the quantile
//! function over `(p, 1)` with the kernel `n (s - p)^(n-1) / (1 - p)^n`:
//!
//! ```text
//! ES_n(p) = n / (1-p) * int_p^1 ((s-p)/(1-p))^(n-1) VaR(s) ds
//! ```
//!
//! `ES_1` is the ordinary Expected Shortfall. Closed forms are provided for
//! the analytic families where they exist; anything else goes through
//! [`es_n_quadrature`].

use std::f64::consts::PI;

use crate::distributions::{DistributionModel, Level, Order};
use crate::error::{Result, RiskError};
use crate::quadrature::{integrate_graded, MAX_NODES};
use crate::special::{normal_pdf, normal_quantile, normal_sf};

/// Default relative tolerance for quadrature-backed ES evaluations.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

const MIN_REL_TOL: f64 = 1e-14;
const MAX_REL_TOL: f64 = 1e-2;

// Panels closer to s = 1 than (1-p) 2^-41 cannot be resolved in double precision.
const UPPER_DEPTH: usize = 40;
const LOWER_DEPTH: usize = 52;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EsMethod {
    ClosedForm,
    Quadrature,
}

/// An Expected Shortfall value together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsResult {
    pub value: f64,
    pub method: EsMethod,
    /// Zero for closed forms; otherwise the change between the last two
    /// refinement levels, bounded by `rel_tol` times the integral's scale.
    pub est_abs_error: f64,
}

impl EsResult {
    fn closed(value: f64) -> Self {
        Self {
            value,
            method: EsMethod::ClosedForm,
            est_abs_error: 0.0,
        }
    }
}

/// Loading parameter of the Gini Shortfall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GiniParams {
    loading: f64,
}

impl GiniParams {
    pub fn new(loading: f64) -> Result<Self> {
        if loading.is_finite() && loading >= 0.0 {
            Ok(Self { loading })
        } else {
            Err(RiskError::InvalidParameter(format!(
                "Gini loading must be >= 0, got {loading}"
            )))
        }
    }

    pub fn loading(&self) -> f64 {
        self.loading
    }

    /// Gini Shortfall is coherent for loadings up to 1/2.
    pub fn is_coherent(&self) -> bool {
        self.loading <= 0.5
    }
}

/// The n-th harmonic number `1 + 1/2 + ... + 1/n`.
pub fn harmonic_number(n: Order) -> f64 {
    // smallest terms first
    (1..=n.get()).rev().map(|k| 1.0 / k as f64).sum()
}

/// `ES_n(0) / k` for a Pareto(k, alpha) variable: `n * B(1 - 1/alpha, n)`.
///
/// Evaluated as the product `prod_{j=1..n} j / (j - 1/alpha)`, which equals the
/// alternating binomial sum form without its cancellation.
pub(crate) fn pareto_es_factor(tail: f64, n: u32) -> f64 {
    let x = 1.0 / tail;
    (1..=n).map(|j| j as f64 / (j as f64 - x)).product()
}

/// Accepts a quadrature tolerance in `[1e-14, 1e-2]`.
pub fn check_rel_tol(rel_tol: f64) -> Result<()> {
    if (MIN_REL_TOL..=MAX_REL_TOL).contains(&rel_tol) {
        Ok(())
    } else {
        Err(RiskError::ToleranceOutOfRange {
            value: rel_tol,
            min: MIN_REL_TOL,
            max: MAX_REL_TOL,
        })
    }
}

fn check_model_for_es(dist: &DistributionModel, p: f64) -> Result<()> {
    dist.validate()?;
    if !dist.has_first_moment() {
        return Err(RiskError::NoFirstMoment {
            family: dist.family(),
        });
    }
    if let Some((_, _, _, base)) = dist.gpd_tail() {
        // ES at p only looks at levels above p, so p = F_X(u) itself is fine.
        if p < base {
            return Err(RiskError::ExcessGpdLevelBelowBase { p, base });
        }
    }
    Ok(())
}

/// Closed-form `ES_n(p)`.
///
/// Available for uniform, exponential and Pareto (`alpha > 1`) at every order,
/// for the normal at orders 1 and 2, and for generalized Pareto / excess-GPD
/// models (`kappa < 1`) at orders 1 and 2. Other combinations return
/// [`RiskError::NoClosedForm`].
pub fn es_n_closed(dist: &DistributionModel, n: Order, p: Level) -> Result<f64> {
    let p = p.value();
    check_model_for_es(dist, p)?;
    let order = n.get();
    let nf = order as f64;
    let no_closed_form = || RiskError::NoClosedForm {
        family: dist.family(),
        order,
    };
    let value = match *dist {
        DistributionModel::Uniform { lower, upper } => lower + (upper - lower) * (p + nf) / (nf + 1.0),
        DistributionModel::Exponential { rate } => (harmonic_number(n) - (-p).ln_1p()) / rate,
        DistributionModel::Normal { mean, stddev } => {
            let z = normal_quantile(p);
            let tail = 1.0 - p;
            match order {
                1 => mean + stddev * normal_pdf(z) / tail,
                2 => mean + stddev * normal_sf(std::f64::consts::SQRT_2 * z) / (PI.sqrt() * tail * tail),
                _ => return Err(no_closed_form()),
            }
        }
        DistributionModel::Pareto { scale, tail } => {
            scale * (1.0 - p).powf(-1.0 / tail) * pareto_es_factor(tail, order)
        }
        DistributionModel::GeneralizedPareto { .. } | DistributionModel::ExcessGpd { .. } => {
            let (u, kappa, beta, base) = dist.gpd_tail().expect("gpd variant");
            let t = (1.0 - p) / (1.0 - base);
            let var = if kappa == 0.0 {
                u - beta * t.ln()
            } else {
                u + beta / kappa * (t.powf(-kappa) - 1.0)
            };
            match order {
                1 => (var + beta - kappa * u) / (1.0 - kappa),
                2 => var + beta * (3.0 - kappa) / ((1.0 - kappa) * (2.0 - kappa)) * t.powf(-kappa),
                _ => return Err(no_closed_form()),
            }
        }
    };
    Ok(value)
}

/// `ES_n(p)` of an arbitrary quantile function by graded Gauss-Legendre quadrature.
///
/// The integral is split at the midpoint of `(p, 1)`; the upper half is
/// graded toward `s = 1` and the lower half toward `s = p`, so integrable
/// singularities at either end (heavy tails, or `p = 0` for unbounded-below
/// laws) are resolved. `quantile` must be integrable on `(p, 1)`; when it is
/// not, the panel contributions stop shrinking and
/// [`RiskError::QuadratureNonConvergence`] is returned.
pub fn es_n_quadrature<Q>(quantile: Q, n: Order, p: Level, rel_tol: f64) -> Result<EsResult>
where
    Q: Fn(f64) -> f64,
{
    check_rel_tol(rel_tol)?;
    let p = p.value();
    let tail = 1.0 - p;
    let order = n.get();
    let nf = order as f64;
    let budget = MAX_NODES / 2;

    // v = (1 - s) / (1 - p), weight n (1 - v)^(n-1)
    let upper = integrate_graded(
        |v: f64| nf * (1.0 - v).powi(order as i32 - 1) * quantile(1.0 - tail * v),
        0.5,
        rel_tol,
        UPPER_DEPTH,
        budget,
    )?;
    // w = (s - p) / (1 - p), weight n w^(n-1)
    let lower = integrate_graded(
        |w: f64| nf * w.powi(order as i32 - 1) * quantile(p + tail * w),
        0.5,
        rel_tol,
        LOWER_DEPTH,
        budget,
    )?;
    let value = upper.value + lower.value;
    if !value.is_finite() {
        return Err(RiskError::QuadratureNonConvergence {
            nodes: upper.nodes + lower.nodes,
            estimate: value,
        });
    }
    Ok(EsResult {
        value,
        method: EsMethod::Quadrature,
        est_abs_error: upper.abs_error + lower.abs_error,
    })
}

/// `ES_n(p)` by closed form when one exists, otherwise by quadrature.
pub fn es_n(dist: &DistributionModel, n: Order, p: Level, rel_tol: f64) -> Result<EsResult> {
    match es_n_closed(dist, n, p) {
        Ok(v) => Ok(EsResult::closed(v)),
        Err(RiskError::NoClosedForm { .. }) => {
            let model = *dist;
            es_n_quadrature(move |s| model.quantile_unchecked(s), n, p, rel_tol)
        }
        Err(e) => Err(e),
    }
}

/// Tail-Gini functional `2 / (1-p)^2 int_p^1 (2s - 1 - p) VaR(s) ds`,
/// evaluated as `2 (ES_2(p) - ES_1(p))`.
pub fn tail_gini(dist: &DistributionModel, p: Level, rel_tol: f64) -> Result<f64> {
    let es1 = es_n(dist, Order::ONE, p, rel_tol)?.value;
    let es2 = es_n(dist, Order::TWO, p, rel_tol)?.value;
    Ok(2.0 * (es2 - es1))
}

/// Gini Shortfall `ES(p) + lambda TGini(p) = (1 - 2 lambda) ES_1(p) + 2 lambda ES_2(p)`.
pub fn gini_shortfall(dist: &DistributionModel, p: Level, gini: GiniParams, rel_tol: f64) -> Result<f64> {
    let es1 = es_n(dist, Order::ONE, p, rel_tol)?.value;
    let es2 = es_n(dist, Order::TWO, p, rel_tol)?.value;
    Ok(combine_gini(es1, es2, gini.loading))
}

/// Tail-Gini of an arbitrary quantile function.
pub fn tail_gini_from_quantile<Q>(quantile: Q, p: Level, rel_tol: f64) -> Result<f64>
where
    Q: Fn(f64) -> f64,
{
    let es1 = es_n_quadrature(&quantile, Order::ONE, p, rel_tol)?.value;
    let es2 = es_n_quadrature(&quantile, Order::TWO, p, rel_tol)?.value;
    Ok(2.0 * (es2 - es1))
}

/// Gini Shortfall of an arbitrary quantile function.
pub fn gini_shortfall_from_quantile<Q>(quantile: Q, p: Level, gini: GiniParams, rel_tol: f64) -> Result<f64>
where
    Q: Fn(f64) -> f64,
{
    let es1 = es_n_quadrature(&quantile, Order::ONE, p, rel_tol)?.value;
    let es2 = es_n_quadrature(&quantile, Order::TWO, p, rel_tol)?.value;
    Ok(combine_gini(es1, es2, gini.loading))
}

fn combine_gini(es1: f64, es2: f64, loading: f64) -> f64 {
    if loading == 0.5 {
        return es2;
    }
    (1.0 - 2.0 * loading) * es1 + 2.0 * loading * es2
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lvl(p: f64) -> Level {
        Level::prob(p).unwrap()
    }

    fn ord(n: u32) -> Order {
        Order::new(n).unwrap()
    }

    #[test]
    fn harmonic_numbers() {
        assert_eq!(harmonic_number(ord(1)), 1.0);
        assert_eq!(harmonic_number(ord(2)), 1.5);
        assert!((harmonic_number(ord(3)) - 11.0 / 6.0).abs() < 1e-15);
    }

    /// The binomial-sum identity used for the exponential family, summed directly.
    #[test]
    fn harmonic_number_matches_binomial_sum() {
        for n in 1..=12u32 {
            let mut sum = 0.0;
            let mut binom = 1.0;
            for k in 0..n {
                if k > 0 {
                    binom *= (n - k) as f64 / k as f64;
                }
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sum += binom * sign / ((k + 1) as f64).powi(2);
            }
            let via_sum = n as f64 * sum;
            assert!((via_sum - harmonic_number(ord(n))).abs() < 1e-11, "n={n}");
        }
    }

    #[test]
    fn pareto_factor_matches_alternating_sum() {
        for tail in [1.5, 2.0, 3.0, 10.0] {
            for n in 1..=8u32 {
                let mut sum = 0.0;
                let mut binom = 1.0;
                for j in 0..n {
                    if j > 0 {
                        binom *= (n - j) as f64 / j as f64;
                    }
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    sum += binom * sign / (j as f64 - 1.0 / tail + 1.0);
                }
                let direct = n as f64 * sum;
                let product = pareto_es_factor(tail, n);
                assert!((direct - product).abs() < 1e-10 * product, "alpha={tail} n={n}");
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        let u = DistributionModel::uniform(0.0, 1.0).unwrap();
        assert!((es_n_closed(&u, ord(2), lvl(0.0)).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let e = DistributionModel::exponential(1.0).unwrap();
        assert_eq!(es_n_closed(&e, ord(2), lvl(0.0)).unwrap(), 1.5);
        let par = DistributionModel::pareto(1.0, 2.0).unwrap();
        assert!((es_n_closed(&par, ord(2), lvl(0.0)).unwrap() - 8.0 / 3.0).abs() < 1e-15);
        let n = DistributionModel::normal(0.0, 1.0).unwrap();
        let es2 = es_n_closed(&n, ord(2), lvl(0.0)).unwrap();
        assert!((es2 - 1.0 / PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn normal_closed_forms_agree_with_quadrature() {
        let n = DistributionModel::normal(0.0, 1.0).unwrap();
        for p in [0.0, 0.3, 0.9, 0.995] {
            for order in [1, 2] {
                let closed = es_n_closed(&n, ord(order), lvl(p)).unwrap();
                let quad = es_n_quadrature(normal_quantile, ord(order), lvl(p), 1e-12).unwrap();
                assert!(
                    (closed - quad.value).abs() <= 1e-9 * closed.abs().max(1.0),
                    "p={p} n={order}: {closed} vs {}",
                    quad.value
                );
            }
        }
    }

    #[test]
    fn no_closed_form_cases() {
        let n = DistributionModel::normal(0.0, 1.0).unwrap();
        assert!(matches!(
            es_n_closed(&n, ord(3), lvl(0.1)),
            Err(RiskError::NoClosedForm { .. })
        ));
        let g = DistributionModel::generalized_pareto(0.2, 1.0).unwrap();
        assert!(matches!(
            es_n_closed(&g, ord(3), lvl(0.1)),
            Err(RiskError::NoClosedForm { .. })
        ));
        let heavy = DistributionModel::pareto(1.0, 0.8).unwrap();
        assert!(matches!(
            es_n_closed(&heavy, ord(1), lvl(0.1)),
            Err(RiskError::NoFirstMoment { .. })
        ));
        let ex = DistributionModel::excess_gpd(1.0, 0.2, 1.0, 0.5).unwrap();
        assert!(matches!(
            es_n_closed(&ex, ord(2), lvl(0.4)),
            Err(RiskError::ExcessGpdLevelBelowBase { .. })
        ));
    }

    #[test]
    fn quadrature_examples() {
        let r = es_n_quadrature(|s| s, ord(3), lvl(0.2), 1e-10).unwrap();
        assert_eq!(r.method, EsMethod::Quadrature);
        assert!((r.value - 0.8).abs() < 1e-12);
        for order in [1, 2, 5] {
            for p in [0.0, 0.4, 0.97] {
                let r = es_n_quadrature(|_| 7.0, ord(order), lvl(p), 1e-10).unwrap();
                assert!((r.value - 7.0).abs() < 1e-12);
            }
        }
        let pareto_q = |s: f64| (1.0 - s).powf(-0.5);
        let r = es_n_quadrature(pareto_q, ord(2), lvl(0.5), 1e-10).unwrap();
        let expected = 8.0 / 3.0 * 0.5f64.powf(-0.5);
        assert!((r.value - expected).abs() < 1e-9 * expected, "{}", r.value);
        assert!(r.est_abs_error <= 1e-10 * 10.0 * expected);
    }

    #[test]
    fn quadrature_rejects_non_integrable_and_bad_tolerance() {
        let r = es_n_quadrature(|s: f64| 1.0 / (1.0 - s), ord(1), lvl(0.0), 1e-8);
        assert!(matches!(r, Err(RiskError::QuadratureNonConvergence { .. })));
        assert!(matches!(
            es_n_quadrature(|s| s, ord(1), lvl(0.0), 1e-1),
            Err(RiskError::ToleranceOutOfRange { .. })
        ));
        assert!(matches!(
            es_n_quadrature(|s| s, ord(1), lvl(0.0), 1e-15),
            Err(RiskError::ToleranceOutOfRange { .. })
        ));
    }

    #[test]
    fn dispatch_examples() {
        let n = DistributionModel::normal(0.0, 1.0).unwrap();
        let r = es_n(&n, ord(3), lvl(0.1), DEFAULT_REL_TOL).unwrap();
        assert_eq!(r.method, EsMethod::Quadrature);
        let e = DistributionModel::exponential(2.0).unwrap();
        let r = es_n(&e, ord(1), lvl(0.0), DEFAULT_REL_TOL).unwrap();
        assert_eq!(r.method, EsMethod::ClosedForm);
        assert_eq!(r.value, 0.5);
        let u = DistributionModel::uniform(3.0, 5.0).unwrap();
        let r = es_n(&u, ord(2), lvl(0.0), DEFAULT_REL_TOL).unwrap();
        assert!((r.value - 13.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn tail_gini_examples() {
        let e = DistributionModel::exponential(1.0).unwrap();
        assert!((tail_gini(&e, lvl(0.0), DEFAULT_REL_TOL).unwrap() - 1.0).abs() < 1e-15);
        let u = DistributionModel::uniform(0.0, 1.0).unwrap();
        assert!((tail_gini(&u, lvl(0.0), DEFAULT_REL_TOL).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let constant = tail_gini_from_quantile(|_| 4.2, lvl(0.3), DEFAULT_REL_TOL).unwrap();
        assert!(constant.abs() < 1e-12);
    }

    #[test]
    fn gini_shortfall_examples() {
        let e = DistributionModel::exponential(1.0).unwrap();
        let gs = gini_shortfall(&e, lvl(0.0), GiniParams::new(0.25).unwrap(), DEFAULT_REL_TOL).unwrap();
        assert!((gs - 1.25).abs() < 1e-15);
        for dist in [
            DistributionModel::normal(1.0, 2.0).unwrap(),
            DistributionModel::pareto(1.0, 3.0).unwrap(),
        ] {
            let p = lvl(0.4);
            let half = gini_shortfall(&dist, p, GiniParams::new(0.5).unwrap(), DEFAULT_REL_TOL).unwrap();
            assert_eq!(half, es_n(&dist, Order::TWO, p, DEFAULT_REL_TOL).unwrap().value);
            let zero = gini_shortfall(&dist, p, GiniParams::new(0.0).unwrap(), DEFAULT_REL_TOL).unwrap();
            assert_eq!(zero, es_n(&dist, Order::ONE, p, DEFAULT_REL_TOL).unwrap().value);
        }
        assert!(GiniParams::new(-0.1).is_err());
        assert!(GiniParams::new(0.5).unwrap().is_coherent());
        assert!(!GiniParams::new(0.6).unwrap().is_coherent());
    }
}
