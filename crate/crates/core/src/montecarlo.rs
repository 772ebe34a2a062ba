//! Monte Carlo estimators built on the two-row corner sampler.
//!
//! Replicate `k` always draws from stream `k` of the master seed and results
//! are reduced in replicate order, so every estimate is reproducible
//! bit-for-bit whatever the size of the rayon pool.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::lattice::CornerSampler;
use crate::params::ModelParams;
use crate::shape::{gpp, gpp_boundary};

/// Largest lattice side the engine will simulate.
pub const MAX_SIDE: usize = 1 << 24;
/// Normal quantile for two-sided 95% intervals.
pub const Z95: f64 = 1.959_963_984_540_054;
/// Number of batches used for log-mean-exp intervals.
pub const LMGF_BATCHES: usize = 20;
// Student t quantile, 19 degrees of freedom, 97.5%
const T19: f64 = 2.093_024_054_408_263;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Growth,
    RightTail,
    Lmgf,
    LeftTail,
}

/// Inputs shared by every estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub p: f64,
    pub u: Option<f64>,
    pub with_boundary: bool,
    pub s: f64,
    pub t: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub reps: u64,
    pub master_seed: u64,
}

impl Design {
    pub fn new(params: &ModelParams, with_boundary: bool, s: f64, t: f64, n: usize, reps: u64, master_seed: u64) -> Self {
        Design {
            p: params.p(),
            u: params.u(),
            with_boundary,
            s,
            t,
            n,
            reps,
            master_seed,
        }
    }

    fn dims(&self) -> Result<(usize, usize)> {
        if !(self.s >= 0.0 && self.t >= 0.0 && self.s.is_finite() && self.t.is_finite()) {
            return Err(out_of_range("s, t", self.s.min(self.t), "finite s, t >= 0"));
        }
        if self.reps < 2 {
            return Err(out_of_range("reps", self.reps as f64, "reps >= 2"));
        }
        let scale = self.n as f64;
        let (m, n) = ((scale * self.s).floor(), (scale * self.t).floor());
        if m.max(n) > MAX_SIDE as f64 {
            return Err(Error::BudgetExceeded(format!(
                "lattice side {} exceeds {MAX_SIDE}",
                m.max(n)
            )));
        }
        if m < 1.0 || n < 1.0 {
            return Err(Error::InvalidEnvironment(format!(
                "N = {} gives an empty {m}x{n} rectangle",
                self.n
            )));
        }
        Ok((m as usize, n as usize))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub quantity: Quantity,
    pub point: f64,
    pub half_width_95: f64,
    /// True when no replicate hit the event; `point` is then a lower bound
    /// on the rate and `half_width_95` is zero.
    pub censored: bool,
    /// Event probability and its Wilson interval, for tail estimates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probability: Option<ProbabilityEstimate>,
    /// The level `r` or the tilt `xi`, when the quantity has one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    #[serde(flatten)]
    pub design: Design,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityEstimate {
    pub hits: u64,
    pub estimate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

impl ProbabilityEstimate {
    pub fn new(hits: u64, trials: u64) -> Self {
        let (lo, hi) = wilson_interval(hits, trials, Z95);
        ProbabilityEstimate {
            hits,
            estimate: hits as f64 / trials as f64,
            wilson_low: lo,
            wilson_high: hi,
        }
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(hits: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let phat = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if hits == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if hits == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Corner passage times of `reps` independent environments, in replicate order.
pub fn sample_corners(params: &ModelParams, design: &Design) -> Result<Vec<u32>> {
    let (m, n) = design.dims()?;
    let with_boundary = design.with_boundary;
    // fail on bad parameters before spawning work
    CornerSampler::new(params, m, n, with_boundary)?;
    let seed = design.master_seed;
    Ok((0..design.reps)
        .into_par_iter()
        .map_init(
            || CornerSampler::new(params, m, n, with_boundary).expect("validated above"),
            |sampler, k| sampler.corner(seed, k),
        )
        .collect())
}

fn mean_and_half_width(values: impl ExactSizeIterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Z95 * (var / n).sqrt())
}

/// Mean of `G / N` over independent replicates.
pub fn estimate_growth(params: &ModelParams, design: Design) -> Result<McEstimate> {
    let corners = sample_corners(params, &design)?;
    let scale = design.n as f64;
    let (point, half) = mean_and_half_width(corners.iter().map(|&g| g as f64 / scale));
    Ok(McEstimate {
        quantity: Quantity::Growth,
        point,
        half_width_95: half,
        censored: false,
        probability: None,
        level: None,
        design,
    })
}

/// `-log(P) / N` with a delta-method half width, or a censored lower bound
/// taken from the upper Wilson limit when there are no hits.
fn rate_from_hits(hits: u64, design: &Design) -> (f64, f64, bool, ProbabilityEstimate) {
    let prob = ProbabilityEstimate::new(hits, design.reps);
    let scale = design.n as f64;
    if hits == 0 {
        return (-prob.wilson_high.ln() / scale, 0.0, true, prob);
    }
    let phat = prob.estimate;
    let se = (phat * (1.0 - phat) / design.reps as f64).sqrt();
    (-phat.ln() / scale, Z95 * se / (phat * scale), false, prob)
}

/// Right-tail rate `-N^{-1} log P{G >= N r}`.
pub fn estimate_tail(params: &ModelParams, design: Design, r: f64) -> Result<McEstimate> {
    if !r.is_finite() {
        return Err(out_of_range("r", r, "finite r"));
    }
    let corners = sample_corners(params, &design)?;
    let level = design.n as f64 * r;
    let hits = corners.iter().filter(|&&g| g as f64 >= level).count() as u64;
    let (point, half, censored, prob) = rate_from_hits(hits, &design);
    Ok(McEstimate {
        quantity: Quantity::RightTail,
        point,
        half_width_95: half,
        censored,
        probability: Some(prob),
        level: Some(r),
        design,
    })
}

/// `log(mean exp(xi x))`, shifted by the maximum for stability.
pub fn log_mean_exp(xi: f64, values: &[u32]) -> f64 {
    if xi == 0.0 || values.is_empty() {
        return 0.0;
    }
    let shift = values
        .iter()
        .map(|&g| xi * g as f64)
        .fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = values.iter().map(|&g| (xi * g as f64 - shift).exp()).sum();
    shift + (sum / values.len() as f64).ln()
}

/// Empirical `N^{-1} log E exp(xi G)`; the interval comes from 20
/// contiguous replicate batches.
pub fn estimate_lmgf(params: &ModelParams, design: Design, xi: f64) -> Result<McEstimate> {
    if !xi.is_finite() {
        return Err(out_of_range("xi", xi, "finite xi"));
    }
    if design.reps < LMGF_BATCHES as u64 {
        return Err(out_of_range("reps", design.reps as f64, "reps >= 20 for batching"));
    }
    let corners = sample_corners(params, &design)?;
    let scale = design.n as f64;
    let point = log_mean_exp(xi, &corners) / scale;
    let size = corners.len() / LMGF_BATCHES;
    let batches: Vec<f64> = corners
        .chunks(size)
        .take(LMGF_BATCHES)
        .map(|b| log_mean_exp(xi, b) / scale)
        .collect();
    let mean = batches.iter().sum::<f64>() / LMGF_BATCHES as f64;
    let var = batches.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (LMGF_BATCHES - 1) as f64;
    Ok(McEstimate {
        quantity: Quantity::Lmgf,
        point,
        half_width_95: T19 * (var / LMGF_BATCHES as f64).sqrt(),
        censored: false,
        probability: None,
        level: Some(xi),
        design,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeftTailRow {
    #[serde(rename = "N")]
    pub n: usize,
    /// `-log(P{G <= N r}) / N`, or its censored lower bound.
    pub normalized: f64,
    pub half_width_95: f64,
    pub censored: bool,
    pub probability: ProbabilityEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeftTailReport {
    pub r: f64,
    pub shape_value: f64,
    pub rows: Vec<LeftTailRow>,
    /// Number of rows with at least one hit.
    pub uncensored: usize,
    /// True when `normalized` strictly increases over the uncensored rows.
    pub increasing: bool,
    #[serde(flatten)]
    pub design: Design,
}

/// Normalised left-tail log-probabilities across the ascending sizes `sizes`.
/// A growing sequence indicates a speed faster than `N`.
pub fn left_tail_diagnostic(params: &ModelParams, design: Design, r: f64, sizes: &[usize]) -> Result<LeftTailReport> {
    let shape_value = if design.with_boundary {
        gpp_boundary(design.s, design.t, params)?
    } else {
        gpp(design.s, design.t, params.p())?.value
    };
    if !(r < shape_value) {
        return Err(Error::OutOfRange {
            name: "r",
            value: r,
            expected: "r below the limit shape",
        });
    }
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidEnvironment("sizes must be nonempty and strictly ascending".into()));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let d = Design { n, ..design };
        let corners = sample_corners(params, &d)?;
        let level = n as f64 * r;
        let hits = corners.iter().filter(|&&g| g as f64 <= level).count() as u64;
        let (normalized, half, censored, probability) = rate_from_hits(hits, &d);
        rows.push(LeftTailRow {
            n,
            normalized,
            half_width_95: half,
            censored,
            probability,
        });
    }
    let kept: Vec<f64> = rows.iter().filter(|r| !r.censored).map(|r| r.normalized).collect();
    Ok(LeftTailReport {
        r,
        shape_value,
        uncensored: kept.len(),
        increasing: kept.len() >= 2 && kept.windows(2).all(|w| w[0] < w[1]),
        rows,
        design,
    })
}
