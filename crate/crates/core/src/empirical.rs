//! Sample-based VaR, ES_n and PELVE_n estimators.
//!
//! The ES_n estimator is a distortion (spectral) estimator: the ordered
//! sample `X*_1 <= ... <= X*_m` is weighted by the mass the ES_n kernel puts
//! on each cell `((i-1)/m, i/m]`. With `h_p(s) = ((s-p)/(1-p))^n` on `[p, 1]`
//! the weight of cell `i` is `h_p(i/m) - h_p(max((i-1)/m, p))`.

use crate::distributions::{Level, Order};
use crate::error::{Result, RiskError};
use crate::pelve_solver::{bisect_excess, check_c_tol, PelveOutcome, PelveResult};

/// An ascending-sorted, non-empty sample of finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedSample {
    values: Vec<f64>,
}

impl OrderedSample {
    /// Sorts `raw` (stable, duplicates kept).
    pub fn new(mut raw: Vec<f64>) -> Result<Self> {
        if raw.is_empty() {
            return Err(RiskError::EmptySample);
        }
        if let Some(i) = raw.iter().position(|x| !x.is_finite()) {
            return Err(RiskError::NonFiniteSample(i));
        }
        raw.sort_by(f64::total_cmp);
        Ok(Self { values: raw })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The sample `scale * x + shift`, still ordered when `scale > 0`.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|x| scale * x + shift).collect())
    }
}

/// Distortion weights of the empirical ES_n; sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Outcome of [`empirical_pelve`]: the estimate plus a small-sample flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalPelve {
    pub result: PelveResult,
    /// Set when `m * eps < 1`: the VaR estimate is then the sample maximum
    /// and the PELVE estimate is degenerate.
    pub small_sample: bool,
}

fn check_prob(p: f64) -> Result<f64> {
    Level::prob(p).map(Level::value)
}

/// Index `i` (1-based) with `p` in `((i-1)/m, i/m]`, for `p` in `(0, 1)`.
fn var_index(m: usize, p: f64) -> usize {
    let mf = m as f64;
    let mut i = ((mf * p).ceil() as usize).clamp(1, m);
    // correct rounding in m*p against the defining cell boundaries
    while i > 1 && p <= (i - 1) as f64 / mf {
        i -= 1;
    }
    while i < m && p > i as f64 / mf {
        i += 1;
    }
    i
}

/// Empirical VaR: `X*_i` for the `i` with `p` in `((i-1)/m, i/m]`.
pub fn empirical_var(sample: &OrderedSample, p: f64) -> Result<f64> {
    let p = Level::tail(p)?.value();
    Ok(sample.values[var_index(sample.len(), p) - 1])
}

/// First 0-based index with a nonzero weight, i.e. `floor(m p)`.
fn first_weighted(m: usize, p: f64) -> usize {
    let mf = m as f64;
    let mut k = ((mf * p).floor() as usize).min(m - 1);
    while k > 0 && (k as f64) / mf > p {
        k -= 1;
    }
    while k + 1 < m && ((k + 1) as f64) / mf <= p {
        k += 1;
    }
    k
}

/// Visits the nonzero ES_n weights as `(0-based index, weight)`.
fn for_each_weight<F: FnMut(usize, f64)>(m: usize, n: u32, p: f64, mut visit: F) {
    let mf = m as f64;
    let tail = 1.0 - p;
    let exp = n as i32;
    let h = |s: f64| ((s - p) / tail).powi(exp);
    let start = first_weighted(m, p);
    if start == m - 1 {
        visit(m - 1, 1.0);
        return;
    }
    let mut lower = 0.0; // h_p(max((i-1)/m, p)) with i = start+1 gives h_p(p) = 0
    for i in start..m {
        let upper = if i + 1 == m { 1.0 } else { h((i + 1) as f64 / mf) };
        visit(i, (upper - lower).max(0.0));
        lower = upper;
    }
}

/// Weights of the empirical ES_n at level `p` for a sample of size `m`.
pub fn es_n_weights(m: usize, n: Order, p: f64) -> Result<WeightVector> {
    let p = check_prob(p)?;
    if m == 0 {
        return Err(RiskError::EmptySample);
    }
    let mut weights = vec![0.0; m];
    for_each_weight(m, n.get(), p, |i, w| weights[i] = w);
    Ok(WeightVector { weights })
}

/// Empirical ES_n: weighted sum of the ordered sample.
pub fn empirical_es_n(sample: &OrderedSample, n: Order, p: f64) -> Result<f64> {
    let p = check_prob(p)?;
    Ok(es_unchecked(sample, n.get(), p))
}

fn es_unchecked(sample: &OrderedSample, n: u32, p: f64) -> f64 {
    // summing deviations from the maximum keeps ties with the VaR exact even
    // though the weights add up to 1 only to rounding
    let top = sample.values[sample.len() - 1];
    let mut acc = 0.0;
    for_each_weight(sample.len(), n, p, |i, w| acc += w * (sample.values[i] - top));
    top + acc
}

/// Empirical PELVE_n:
/// `inf { c in [1, 1/eps] : ES_n-hat(1 - c eps) <= VaR-hat(1 - eps) }`.
///
/// Infinite when even `c = 1/eps` (level 0) fails. Otherwise the boundary is
/// found by bisection; the estimated ES is continuous and nonincreasing in
/// `c`. If the final bracket does not straddle the boundary (which would mean
/// the excess is not monotone, e.g. through rounding), the infimum is located
/// by a left-to-right scan at resolution `c_tol`.
pub fn empirical_pelve(sample: &OrderedSample, n: Order, eps: Level, c_tol: f64) -> Result<EmpiricalPelve> {
    check_c_tol(c_tol)?;
    let eps = Level::tail(eps.value())?.value();
    let order = n.get();
    let m = sample.len();
    let small_sample = (m as f64) * eps < 1.0;
    let target = sample.values[var_index(m, 1.0 - eps) - 1];
    let c_max = 1.0 / eps;
    let excess = |c: f64| -> f64 {
        let p = if c >= c_max { 0.0 } else { (1.0 - c * eps).max(0.0) };
        es_unchecked(sample, order, p) - target
    };

    if excess(c_max) > 0.0 {
        return Ok(EmpiricalPelve {
            result: PelveResult::infinite(),
            small_sample,
        });
    }
    let mut result = bisect_excess(|c| Ok(excess(c)), eps, c_max, c_tol)?;
    if let PelveOutcome::Finite(c) = result.outcome {
        let half = 0.5 * c_tol * (c_max - 1.0);
        let consistent = c == 1.0 || (excess(c - half) > 0.0 && excess((c + half).min(c_max)) <= 0.0);
        if !consistent {
            result = scan_infimum(&excess, c_max, c_tol);
        }
    }
    Ok(EmpiricalPelve { result, small_sample })
}

fn scan_infimum<G: Fn(f64) -> f64>(excess: &G, c_max: f64, c_tol: f64) -> PelveResult {
    let step = c_tol * (c_max - 1.0);
    let steps = ((c_max - 1.0) / step).ceil() as u64;
    for k in 0..=steps {
        let c = (1.0 + k as f64 * step).min(c_max);
        let g = excess(c);
        if g <= 0.0 {
            return PelveResult {
                outcome: PelveOutcome::Finite(c),
                iterations: k as u32,
                residual: g.abs(),
            };
        }
    }
    PelveResult::infinite()
}
