//! Analytic distribution families, probability levels and orders.
//!
//! Every family exposes its distribution function, its quantile function
//! (the lower quantile `VaR_X(p) = inf{x : F_X(x) >= p}`) and inverse-transform
//! sampling driven by a ChaCha8 generator.

use std::fmt;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Result, RiskError};
use crate::special::{normal_cdf, normal_quantile};

/// A probability level.
///
/// Stored values always lie in `[0, 1)`. Use [`Level::prob`] for a level
/// `p` that may be zero and [`Level::tail`] for a tail size `eps` that must be
/// strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Level(f64);

impl Level {
    /// A level `p` in `[0, 1)`.
    pub fn prob(p: f64) -> Result<Self> {
        if p.is_finite() && (0.0..1.0).contains(&p) {
            Ok(Self(p))
        } else {
            Err(RiskError::LevelOutOfRange {
                value: p,
                expected: "[0, 1)",
            })
        }
    }

    /// A tail size `eps` in `(0, 1)`.
    pub fn tail(eps: f64) -> Result<Self> {
        if eps.is_finite() && eps > 0.0 && eps < 1.0 {
            Ok(Self(eps))
        } else {
            Err(RiskError::LevelOutOfRange {
                value: eps,
                expected: "(0, 1)",
            })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Order `n >= 1` of a higher-order Expected Shortfall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Order(u32);

impl Order {
    pub const ONE: Order = Order(1);
    pub const TWO: Order = Order(2);

    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            Err(RiskError::InvalidOrder(0))
        } else {
            Ok(Self(n))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An analytic distribution family together with its parameters.
///
/// Construct through the validating constructors ([`DistributionModel::uniform`]
/// and friends); every operation re-validates, so hand-built variants with bad
/// parameters are rejected rather than producing garbage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionModel {
    Uniform {
        lower: f64,
        upper: f64,
    },
    Exponential {
        rate: f64,
    },
    Normal {
        mean: f64,
        stddev: f64,
    },
    /// Classical Pareto with `F(x) = 1 - (scale/x)^tail` for `x >= scale`.
    Pareto {
        scale: f64,
        tail: f64,
    },
    /// Generalized Pareto `G_{shape, scale}` supported on `[0, x_F]`.
    GeneralizedPareto {
        shape: f64,
        scale: f64,
    },
    /// A variable whose excess distribution over `threshold` is
    /// `G_{shape, scale}`, with `base_cdf_at_threshold = F_X(u)`.
    ///
    /// Only the part of the law above the threshold is known.
    ExcessGpd {
        threshold: f64,
        shape: f64,
        scale: f64,
        base_cdf_at_threshold: f64,
    },
}

fn invalid(msg: impl Into<String>) -> RiskError {
    RiskError::InvalidParameter(msg.into())
}

impl DistributionModel {
    pub fn uniform(lower: f64, upper: f64) -> Result<Self> {
        Self::Uniform { lower, upper }.validated()
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::Exponential { rate }.validated()
    }

    pub fn normal(mean: f64, stddev: f64) -> Result<Self> {
        Self::Normal { mean, stddev }.validated()
    }

    pub fn pareto(scale: f64, tail: f64) -> Result<Self> {
        Self::Pareto { scale, tail }.validated()
    }

    pub fn generalized_pareto(shape: f64, scale: f64) -> Result<Self> {
        Self::GeneralizedPareto { shape, scale }.validated()
    }

    pub fn excess_gpd(threshold: f64, shape: f64, scale: f64, base_cdf_at_threshold: f64) -> Result<Self> {
        Self::ExcessGpd {
            threshold,
            shape,
            scale,
            base_cdf_at_threshold,
        }
        .validated()
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// Checks the parameter invariants of the family.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Uniform { lower, upper } => {
                if !(lower.is_finite() && upper.is_finite() && lower < upper) {
                    return Err(invalid(format!(
                        "uniform needs finite a < b, got a={lower}, b={upper}"
                    )));
                }
            }
            Self::Exponential { rate } => {
                if !(rate.is_finite() && rate > 0.0) {
                    return Err(invalid(format!("exponential rate must be > 0, got {rate}")));
                }
            }
            Self::Normal { mean, stddev } => {
                if !(mean.is_finite() && stddev.is_finite() && stddev > 0.0) {
                    return Err(invalid(format!(
                        "normal needs finite mean and sigma > 0, got m={mean}, sigma={stddev}"
                    )));
                }
            }
            Self::Pareto { scale, tail } => {
                if !(scale.is_finite() && scale > 0.0 && tail.is_finite() && tail > 0.0) {
                    return Err(invalid(format!(
                        "pareto needs k > 0 and alpha > 0, got k={scale}, alpha={tail}"
                    )));
                }
            }
            Self::GeneralizedPareto { shape, scale } => {
                if !(shape.is_finite() && scale.is_finite() && scale > 0.0) {
                    return Err(invalid(format!(
                        "generalized pareto needs finite kappa and beta > 0, got kappa={shape}, beta={scale}"
                    )));
                }
            }
            Self::ExcessGpd {
                threshold,
                shape,
                scale,
                base_cdf_at_threshold,
            } => {
                if !(threshold.is_finite() && threshold >= 0.0) {
                    return Err(invalid(format!("threshold u must be >= 0, got {threshold}")));
                }
                if !(shape.is_finite() && scale.is_finite() && scale > 0.0) {
                    return Err(invalid(format!(
                        "excess GPD needs finite kappa and beta > 0, got kappa={shape}, beta={scale}"
                    )));
                }
                if !(base_cdf_at_threshold.is_finite() && (0.0..1.0).contains(&base_cdf_at_threshold)) {
                    return Err(invalid(format!(
                        "F_X(u) must lie in [0, 1), got {base_cdf_at_threshold}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Short family name used in diagnostics.
    pub fn family(&self) -> &'static str {
        match self {
            Self::Uniform { .. } => "uniform",
            Self::Exponential { .. } => "exponential",
            Self::Normal { .. } => "normal",
            Self::Pareto { .. } => "pareto",
            Self::GeneralizedPareto { .. } => "generalized pareto",
            Self::ExcessGpd { .. } => "excess GPD",
        }
    }

    /// Whether the family has a finite first moment, which every ES_n needs.
    pub fn has_first_moment(&self) -> bool {
        match *self {
            Self::Pareto { tail, .. } => tail > 1.0,
            Self::GeneralizedPareto { shape, .. } | Self::ExcessGpd { shape, .. } => shape < 1.0,
            _ => true,
        }
    }

    /// Lowest level at which quantiles and ES are defined: `F_X(u)` for an
    /// excess GPD, 0 otherwise.
    pub fn level_floor(&self) -> f64 {
        self.gpd_tail().map_or(0.0, |(_, _, _, base)| base)
    }

    /// The GPD-tail view `(u, kappa, beta, F_X(u))`; a plain GPD is the case `u = 0`, `F_X(u) = 0`.
    pub(crate) fn gpd_tail(&self) -> Option<(f64, f64, f64, f64)> {
        match *self {
            Self::GeneralizedPareto { shape, scale } => Some((0.0, shape, scale, 0.0)),
            Self::ExcessGpd {
                threshold,
                shape,
                scale,
                base_cdf_at_threshold,
            } => Some((threshold, shape, scale, base_cdf_at_threshold)),
            _ => None,
        }
    }

    /// Distribution function `F_X(x)`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        self.validate()?;
        let value = match *self {
            Self::Uniform { lower, upper } => ((x - lower) / (upper - lower)).clamp(0.0, 1.0),
            Self::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Self::Normal { mean, stddev } => normal_cdf((x - mean) / stddev),
            Self::Pareto { scale, tail } => {
                if x < scale {
                    0.0
                } else {
                    1.0 - (scale / x).powf(tail)
                }
            }
            Self::GeneralizedPareto { shape, scale } => gpd_cdf(shape, scale, x),
            Self::ExcessGpd {
                threshold,
                shape,
                scale,
                base_cdf_at_threshold,
            } => {
                if x < threshold {
                    return Err(RiskError::ExcessGpdBelowThreshold { x, threshold });
                }
                base_cdf_at_threshold + (1.0 - base_cdf_at_threshold) * gpd_cdf(shape, scale, x - threshold)
            }
        };
        Ok(value)
    }

    /// Quantile function `VaR_X(p)` for `p` in `(0, 1)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        self.validate()?;
        if !(p.is_finite() && p > 0.0 && p < 1.0) {
            return Err(RiskError::LevelOutOfRange {
                value: p,
                expected: "(0, 1)",
            });
        }
        if let Self::ExcessGpd {
            base_cdf_at_threshold,
            ..
        } = *self
        {
            if p <= base_cdf_at_threshold {
                return Err(RiskError::ExcessGpdLevelBelowBase {
                    p,
                    base: base_cdf_at_threshold,
                });
            }
        }
        Ok(self.quantile_unchecked(p))
    }

    /// Quantile without validation; callers guarantee a valid model and level.
    /// Used by the quadrature and sampling inner loops.
    pub(crate) fn quantile_unchecked(&self, p: f64) -> f64 {
        match *self {
            Self::Uniform { lower, upper } => lower + (upper - lower) * p,
            Self::Exponential { rate } => -(-p).ln_1p() / rate,
            Self::Normal { mean, stddev } => mean + stddev * normal_quantile(p),
            Self::Pareto { scale, tail } => scale * (1.0 - p).powf(-1.0 / tail),
            Self::GeneralizedPareto { shape, scale } => gpd_excess_quantile(shape, scale, 1.0 - p),
            Self::ExcessGpd {
                threshold,
                shape,
                scale,
                base_cdf_at_threshold,
            } => threshold + gpd_excess_quantile(shape, scale, (1.0 - p) / (1.0 - base_cdf_at_threshold)),
        }
    }

    /// Draws `count` values by inverse-transform sampling.
    ///
    /// Uniforms come from `ChaCha8Rng::seed_from_u64(seed)`: each 64-bit draw
    /// `x` becomes `((x >> 11) + 0.5) * 2^-53`, which lies strictly inside
    /// (0, 1). Output is bit-identical across runs and platforms for a given seed.
    ///
    /// An `ExcessGpd` with `F_X(u) > 0` cannot be sampled because the law
    /// below the threshold is unknown.
    pub fn sample(&self, seed: u64, count: usize) -> Result<Vec<f64>> {
        self.validate()?;
        if count == 0 {
            return Err(invalid("sample count must be >= 1"));
        }
        if let Self::ExcessGpd {
            base_cdf_at_threshold,
            ..
        } = *self
        {
            if base_cdf_at_threshold > 0.0 {
                return Err(RiskError::SamplingUnsupported(
                    "an excess GPD with F_X(u) > 0 (unknown law below the threshold)",
                ));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..count)
            .map(|_| self.quantile_unchecked(open_unit(rng.next_u64())))
            .collect())
    }
}

impl fmt::Display for DistributionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Uniform { lower, upper } => write!(f, "uniform:{lower},{upper}"),
            Self::Exponential { rate } => write!(f, "exp:{rate}"),
            Self::Normal { mean, stddev } => write!(f, "normal:{mean},{stddev}"),
            Self::Pareto { scale, tail } => write!(f, "pareto:{scale},{tail}"),
            Self::GeneralizedPareto { shape, scale } => write!(f, "gpd:{shape},{scale}"),
            Self::ExcessGpd {
                threshold,
                shape,
                scale,
                base_cdf_at_threshold,
            } => write!(f, "excessgpd:{threshold},{shape},{scale},{base_cdf_at_threshold}"),
        }
    }
}

/// Maps 64 random bits to a double strictly inside (0, 1).
pub(crate) fn open_unit(bits: u64) -> f64 {
    // 52 bits keep the top value (1 - 2^-53) representable
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

fn gpd_cdf(shape: f64, scale: f64, x: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    if shape == 0.0 {
        return -(-x / scale).exp_m1();
    }
    let z = 1.0 + shape * x / scale;
    if z <= 0.0 {
        // beyond the right endpoint -beta/kappa of a negative-shape GPD
        return 1.0;
    }
    1.0 - z.powf(-1.0 / shape)
}

/// GPD quantile written in terms of the tail probability `tail = 1 - p`.
fn gpd_excess_quantile(shape: f64, scale: f64, tail: f64) -> f64 {
    if shape == 0.0 {
        -scale * tail.ln()
    } else {
        scale / shape * (tail.powf(-shape) - 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn families() -> Vec<DistributionModel> {
        vec![
            DistributionModel::uniform(-1.0, 3.0).unwrap(),
            DistributionModel::exponential(2.5).unwrap(),
            DistributionModel::normal(0.3, 1.7).unwrap(),
            DistributionModel::pareto(1.5, 2.0).unwrap(),
            DistributionModel::generalized_pareto(0.3, 2.0).unwrap(),
            DistributionModel::generalized_pareto(-0.5, 1.0).unwrap(),
            DistributionModel::generalized_pareto(0.0, 1.0).unwrap(),
            DistributionModel::excess_gpd(2.0, 0.25, 1.5, 0.0).unwrap(),
        ]
    }

    #[test]
    fn cdf_examples() {
        let pareto = DistributionModel::pareto(1.0, 2.0).unwrap();
        assert_eq!(pareto.cdf(2.0).unwrap(), 0.75);
        let exp_gpd = DistributionModel::generalized_pareto(0.0, 1.0).unwrap();
        assert!((exp_gpd.cdf(1.0).unwrap() - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        let bounded = DistributionModel::generalized_pareto(-1.0, 1.0).unwrap();
        assert_eq!(bounded.cdf(2.0).unwrap(), 1.0);
    }

    #[test]
    fn excess_gpd_cdf_below_threshold_is_an_error() {
        let d = DistributionModel::excess_gpd(1.0, 0.2, 1.0, 0.3).unwrap();
        assert!(matches!(
            d.cdf(0.5),
            Err(RiskError::ExcessGpdBelowThreshold { .. })
        ));
        assert!((d.cdf(1.0).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn quantile_examples() {
        let e = DistributionModel::exponential(1.0).unwrap();
        assert!((e.quantile(1.0 - (-1.0f64).exp()).unwrap() - 1.0).abs() < 1e-15);
        let pareto = DistributionModel::pareto(1.0, 2.0).unwrap();
        assert!((pareto.quantile(0.75).unwrap() - 2.0).abs() < 1e-15);
        let n = DistributionModel::normal(0.0, 1.0).unwrap();
        assert_eq!(n.quantile(0.5).unwrap(), 0.0);
        let x = DistributionModel::excess_gpd(0.0, 0.0, 1.0, 0.0).unwrap();
        assert!((x.quantile(0.5).unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn quantile_rejects_bad_levels() {
        let d = DistributionModel::normal(0.0, 1.0).unwrap();
        for p in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(matches!(d.quantile(p), Err(RiskError::LevelOutOfRange { .. })));
        }
        let x = DistributionModel::excess_gpd(1.0, 0.1, 1.0, 0.4).unwrap();
        assert!(matches!(
            x.quantile(0.4),
            Err(RiskError::ExcessGpdLevelBelowBase { .. })
        ));
        assert!(x.quantile(0.41).unwrap() > 1.0);
    }

    #[test]
    fn constructors_reject_invalid_parameters() {
        assert!(DistributionModel::uniform(1.0, 1.0).is_err());
        assert!(DistributionModel::exponential(0.0).is_err());
        assert!(DistributionModel::normal(0.0, -1.0).is_err());
        assert!(DistributionModel::pareto(0.0, 2.0).is_err());
        assert!(DistributionModel::pareto(1.0, -2.0).is_err());
        assert!(DistributionModel::generalized_pareto(0.1, 0.0).is_err());
        assert!(DistributionModel::excess_gpd(-1.0, 0.1, 1.0, 0.0).is_err());
        assert!(DistributionModel::excess_gpd(0.0, 0.1, 1.0, 1.0).is_err());
        let hand_built = DistributionModel::Exponential { rate: -1.0 };
        assert!(hand_built.quantile(0.5).is_err());
    }

    #[test]
    fn quantile_is_nondecreasing_on_grid() {
        for d in families() {
            let mut prev = f64::NEG_INFINITY;
            for i in 1..100 {
                let q = d.quantile(i as f64 / 100.0).unwrap();
                assert!(q >= prev, "{d}: not monotone at {i}");
                prev = q;
            }
        }
    }

    #[test]
    fn cdf_inverts_quantile() {
        for d in families() {
            for i in 1..100 {
                let p = i as f64 / 100.0;
                let back = d.cdf(d.quantile(p).unwrap()).unwrap();
                assert!((back - p).abs() <= 1e-12, "{d}: p={p} back={back}");
            }
        }
    }

    #[test]
    fn excess_gpd_at_origin_matches_gpd() {
        for shape in [-0.5, 0.0, 0.25, 0.8] {
            let gpd = DistributionModel::generalized_pareto(shape, 1.3).unwrap();
            let ex = DistributionModel::excess_gpd(0.0, shape, 1.3, 0.0).unwrap();
            for i in 1..100 {
                let p = i as f64 / 100.0;
                let a = gpd.quantile(p).unwrap();
                let b = ex.quantile(p).unwrap();
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_and_in_range() {
        let u = DistributionModel::uniform(0.0, 1.0).unwrap();
        let xs = u.sample(0, 3).unwrap();
        assert_eq!(xs.len(), 3);
        assert!(xs.iter().all(|&x| x > 0.0 && x < 1.0));
        assert_eq!(xs, u.sample(0, 3).unwrap());
        assert_ne!(xs, u.sample(1, 3).unwrap());
        assert!(u.sample(7, 0).is_err());
    }

    #[test]
    fn exponential_sample_mean() {
        let e = DistributionModel::exponential(1.0).unwrap();
        let xs = e.sample(2024, 100_000).unwrap();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn excess_gpd_sampling_needs_known_base() {
        let d = DistributionModel::excess_gpd(1.0, 0.2, 1.0, 0.5).unwrap();
        assert!(matches!(d.sample(1, 10), Err(RiskError::SamplingUnsupported(_))));
        let d = DistributionModel::excess_gpd(1.0, 0.2, 1.0, 0.0).unwrap();
        assert!(d.sample(1, 10).unwrap().iter().all(|&x| x >= 1.0));
    }

    #[test]
    fn open_unit_stays_inside() {
        assert!(open_unit(0) > 0.0);
        assert!(open_unit(u64::MAX) < 1.0);
    }

    #[test]
    fn levels_and_orders() {
        assert!(Level::prob(0.0).is_ok());
        assert!(Level::tail(0.0).is_err());
        assert!(Level::prob(1.0).is_err());
        assert!(Order::new(0).is_err());
        assert_eq!(Order::new(3).unwrap().get(), 3);
    }
}
