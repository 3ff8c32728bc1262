//! Replicate studies of the empirical PELVE_n estimator.
//!
//! Replicate `r` (1-based) draws its sample with seed
//! [`replicate_seed`]`(seed, r)`, so each replicate owns an independent
//! generator and results do not depend on how replicates are scheduled.

use rayon::prelude::*;

use crate::distributions::{DistributionModel, Level, Order};
use crate::empirical::{empirical_pelve, OrderedSample};
use crate::error::{Result, RiskError};
use crate::pelve_solver::{PelveResult, DEFAULT_C_TOL};

/// Histogram bins used for [`StudyResult::histogram`].
pub const DEFAULT_BINS: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub dist: DistributionModel,
    pub order: Order,
    pub eps: Level,
    pub replicates: usize,
    pub sample_len: usize,
    pub seed: u64,
    pub c_tol: f64,
}

impl StudyConfig {
    pub fn new(
        dist: DistributionModel,
        order: Order,
        eps: Level,
        replicates: usize,
        sample_len: usize,
        seed: u64,
    ) -> Self {
        Self {
            dist,
            order,
            eps,
            replicates,
            sample_len,
            seed,
            c_tol: DEFAULT_C_TOL,
        }
    }

    fn validate(&self) -> Result<()> {
        self.dist.validate()?;
        Level::tail(self.eps.value())?;
        if self.replicates == 0 {
            return Err(RiskError::InvalidConfig("replicates must be >= 1".into()));
        }
        if self.sample_len < 2 {
            return Err(RiskError::InvalidConfig("sample length must be >= 2".into()));
        }
        Ok(())
    }
}

/// One replicate of a study.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateEstimate {
    pub replicate: usize,
    pub seed: u64,
    pub outcome: std::result::Result<PelveResult, RiskError>,
    pub small_sample: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramBin {
    pub low: f64,
    pub high: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub estimates: Vec<ReplicateEstimate>,
    pub finite_count: usize,
    /// Mean over finite estimates (NaN when there are none).
    pub mean: f64,
    /// Sample standard deviation over finite estimates (0 for a single one).
    pub stddev: f64,
    pub histogram: Vec<HistogramBin>,
}

impl StudyResult {
    pub fn finite_values(&self) -> Vec<f64> {
        self.estimates
            .iter()
            .filter_map(|e| e.outcome.as_ref().ok().and_then(PelveResult::value))
            .collect()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replicate `r`: `splitmix64(seed XOR splitmix64(r))`.
pub fn replicate_seed(seed: u64, replicate: usize) -> u64 {
    splitmix64(seed ^ splitmix64(replicate as u64))
}

fn run_replicate(cfg: &StudyConfig, replicate: usize) -> ReplicateEstimate {
    let seed = replicate_seed(cfg.seed, replicate);
    let estimate = cfg
        .dist
        .sample(seed, cfg.sample_len)
        .and_then(OrderedSample::new)
        .and_then(|s| empirical_pelve(&s, cfg.order, cfg.eps, cfg.c_tol));
    let (outcome, small_sample) = match estimate {
        Ok(e) => (Ok(e.result), e.small_sample),
        Err(e) => (Err(e), false),
    };
    ReplicateEstimate {
        replicate,
        seed,
        outcome,
        small_sample,
    }
}

/// Runs `cfg.replicates` independent empirical PELVE_n estimates in parallel.
///
/// Per-replicate errors are recorded in the estimates rather than aborting
/// the study; infinite estimates count toward neither the mean nor the
/// histogram.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let estimates: Vec<ReplicateEstimate> = (1..=cfg.replicates)
        .into_par_iter()
        .map(|r| run_replicate(cfg, r))
        .collect();

    let mut result = StudyResult {
        estimates,
        finite_count: 0,
        mean: f64::NAN,
        stddev: f64::NAN,
        histogram: Vec::new(),
    };
    let finite = result.finite_values();
    result.finite_count = finite.len();
    if !finite.is_empty() {
        let mean = finite.iter().sum::<f64>() / finite.len() as f64;
        let var = if finite.len() > 1 {
            finite.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (finite.len() - 1) as f64
        } else {
            0.0
        };
        result.mean = mean;
        result.stddev = var.sqrt();
        result.histogram = export_histogram(&result, DEFAULT_BINS)?;
    }
    Ok(result)
}

/// Equal-width histogram of the finite estimates over `[min, max]`.
///
/// The last bin is closed on the right. When all estimates coincide every
/// bin has zero width and the first one holds all counts.
pub fn export_histogram(res: &StudyResult, bins: usize) -> Result<Vec<HistogramBin>> {
    if bins == 0 {
        return Err(RiskError::InvalidConfig("bins must be >= 1".into()));
    }
    let values = res.finite_values();
    if values.is_empty() {
        return Err(RiskError::NoFiniteEstimates);
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let mut hist: Vec<HistogramBin> = (0..bins)
        .map(|b| HistogramBin {
            low: lo + width * b as f64,
            high: if b + 1 == bins {
                hi
            } else {
                lo + width * (b + 1) as f64
            },
            count: 0,
        })
        .collect();
    for v in values {
        let idx = if width > 0.0 {
            (((v - lo) / width) as usize).min(bins - 1)
        } else {
            0
        };
        hist[idx].count += 1;
    }
    Ok(hist)
}
