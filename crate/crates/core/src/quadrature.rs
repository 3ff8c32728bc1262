//! Composite Gauss-Legendre quadrature on geometrically graded panels.
//!
//! `integrate_graded` handles integrals over `(0, len]` whose integrand may
//! blow up (integrably) at 0. The interval is cut into panels
//! `[len 2^-(j+1), len 2^-j]`, each split into `2^level` equal sub-panels
//! carrying a 15-point Gauss-Legendre rule. Near a power or logarithmic
//! singularity the panel contributions form (mixtures of) geometric
//! sequences, so the missing piece below the deepest panel is recovered by
//! Wynn's epsilon algorithm applied to the partial sums. Levels are refined
//! until two successive estimates agree within the requested tolerance.

use std::sync::OnceLock;

use crate::error::{Result, RiskError};

const GAUSS_POINTS: usize = 15;

/// Hard cap on integrand evaluations for one call.
pub const MAX_NODES: usize = 1 << 20;

/// Number of trailing partial sums fed to the epsilon algorithm.
const EPSILON_WINDOW: usize = 13;

/// Outcome of a converged graded integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Difference between the last two refinement levels.
    pub abs_error: f64,
    /// Sum of absolute panel contributions, a scale for relative checks.
    pub l1: f64,
    pub nodes: usize,
}

fn gauss_legendre() -> &'static ([f64; GAUSS_POINTS], [f64; GAUSS_POINTS]) {
    static RULE: OnceLock<([f64; GAUSS_POINTS], [f64; GAUSS_POINTS])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GAUSS_POINTS;
        let mut nodes = [0.0; GAUSS_POINTS];
        let mut weights = [0.0; GAUSS_POINTS];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut deriv = 0.0;
            for _ in 0..100 {
                // Legendre recurrence for P_n(x) and P_n'(x)
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                deriv = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / deriv;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * deriv * deriv);
        }
        (nodes, weights)
    })
}

/// Gauss-Legendre approximation of `f` over `[a, b]` split into `pieces` equal parts.
fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, pieces: usize) -> f64 {
    let (nodes, weights) = gauss_legendre();
    let width = (b - a) / pieces as f64;
    let mut total = 0.0;
    for k in 0..pieces {
        let lo = a + width * k as f64;
        let half = 0.5 * width;
        let mid = lo + half;
        let mut acc = 0.0;
        for (x, w) in nodes.iter().zip(weights) {
            acc += w * f(mid + half * x);
        }
        total += half * acc;
    }
    total
}

/// Wynn's epsilon algorithm; returns the limit estimate of `sums`.
pub(crate) fn wynn_epsilon(sums: &[f64]) -> f64 {
    let n = sums.len();
    if n < 3 {
        return *sums.last().unwrap_or(&0.0);
    }
    // prev = column r-1, cur = column r; even columns hold limit estimates
    let mut prev = vec![0.0; n + 1];
    let mut cur: Vec<f64> = sums.to_vec();
    let mut best = sums[n - 1];
    let mut col = 0;
    while cur.len() >= 2 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for k in 0..cur.len() - 1 {
            let diff = cur[k + 1] - cur[k];
            if diff == 0.0 || !diff.is_finite() {
                // converged (or degenerate) at this column: keep the current best
                return if col % 2 == 0 { cur[cur.len() - 1] } else { best };
            }
            next.push(prev[k + 1] + 1.0 / diff);
        }
        col += 1;
        prev = cur;
        cur = next;
        if col % 2 == 0 {
            let candidate = cur[cur.len() - 1];
            if !candidate.is_finite() {
                return best;
            }
            best = candidate;
        }
    }
    best
}

/// Integrates `f` over `(0, len]`, grading panels toward 0.
///
/// `max_depth` bounds the number of geometric panels (the smallest panel
/// starts at `len 2^-max_depth`) and `budget` the integrand evaluations.
/// Convergence means successive refinement levels agree within
/// `rel_tol * max(|value|, l1)`.
pub(crate) fn integrate_graded<F: Fn(f64) -> f64>(
    f: F,
    len: f64,
    rel_tol: f64,
    max_depth: usize,
    budget: usize,
) -> Result<Integral> {
    const START_DEPTH: usize = 16;
    const DEPTH_STEP: usize = 6;

    let mut nodes = 0usize;
    let mut previous: Option<f64> = None;
    let mut level = 0u32;
    loop {
        let depth = (START_DEPTH + DEPTH_STEP * level as usize).min(max_depth);
        let pieces = 1usize << level;
        let cost = depth * pieces * GAUSS_POINTS;
        if nodes + cost > budget {
            return Err(RiskError::QuadratureNonConvergence {
                nodes,
                estimate: previous.unwrap_or(f64::NAN),
            });
        }
        nodes += cost;

        let mut contributions = Vec::with_capacity(depth);
        let mut hi = len;
        for _ in 0..depth {
            let lo = 0.5 * hi;
            contributions.push(panel(&f, lo, hi, pieces));
            hi = lo;
        }
        let l1: f64 = contributions.iter().map(|c| c.abs()).sum();
        if !l1.is_finite() {
            return Err(RiskError::QuadratureNonConvergence { nodes, estimate: l1 });
        }
        let last = contributions[depth - 1].abs();
        let before = contributions[depth - 2].abs();
        if before > 0.0 && last >= before * (1.0 - 1e-6) {
            // contributions are not shrinking toward the endpoint: not integrable
            return Err(RiskError::QuadratureNonConvergence {
                nodes,
                estimate: contributions.iter().sum(),
            });
        }

        let mut partial = 0.0;
        let sums: Vec<f64> = contributions
            .iter()
            .map(|c| {
                partial += c;
                partial
            })
            .collect();
        let tail_start = sums.len().saturating_sub(EPSILON_WINDOW);
        let value = if last <= 1e-17 * l1 {
            partial
        } else {
            wynn_epsilon(&sums[tail_start..])
        };

        if let Some(prev) = previous {
            let diff = (value - prev).abs();
            if diff <= rel_tol * value.abs().max(l1) {
                return Ok(Integral {
                    value,
                    abs_error: diff,
                    l1,
                    nodes,
                });
            }
        }
        previous = Some(value);
        level += 1;
    }
}
