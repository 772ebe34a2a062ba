//! Exhaustive oracles: path enumeration and exact laws by enumeration of
//! environment configurations.

use serde::{Deserialize, Serialize};

use super::dp::corner_passage_time;
use super::env::EnvironmentGrid;
use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Largest `m + n` accepted by [`brute_force_passage`]; `C(24, 12) = 2_704_156` paths.
pub const MAX_ENUMERATED_STEPS: usize = 24;

/// Largest number of environment configurations [`exact_law`] will visit.
pub const MAX_EXACT_CONFIGS: u64 = 1 << 22;

/// Maximum over all up-right paths from the origin to `(m, n)` of the weight
/// collected, scoring the arrival site of every horizontal step and, in the
/// boundary model, every vertical step along the vertical axis.
pub fn brute_force_passage(env: &EnvironmentGrid) -> Result<u32> {
    let (m, n) = (env.m(), env.n());
    if m + n > MAX_ENUMERATED_STEPS {
        return Err(Error::TooLarge(format!(
            "{m}x{n} has more than C({MAX_ENUMERATED_STEPS}, {}) paths",
            MAX_ENUMERATED_STEPS / 2
        )));
    }
    Ok(best_from(env, 0, 0))
}

fn best_from(env: &EnvironmentGrid, i: usize, j: usize) -> u32 {
    let right = (i < env.m()).then(|| env.horizontal_arrival(i + 1, j) + best_from(env, i + 1, j));
    let up = (j < env.n()).then(|| env.vertical_arrival(i, j + 1) + best_from(env, i, j + 1));
    match (right, up) {
        (Some(a), Some(b)) => a.max(b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => 0,
    }
}

/// Exact law of the corner passage time `G(m, n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactLaw {
    /// `probabilities[g] = P{G = g}` (up to `truncation_mass` in the boundary model).
    pub probabilities: Vec<f64>,
    /// Probability of the vertical-boundary configurations that were not visited.
    pub truncation_mass: f64,
    /// Largest vertical-boundary weight enumerated, when a boundary is present.
    pub y_cutoff: Option<u32>,
}

impl ExactLaw {
    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probabilities.iter().enumerate().map(|(g, &q)| g as f64 * q).sum()
    }

    /// `P{G >= k}`.
    pub fn tail(&self, k: u32) -> f64 {
        self.probabilities.iter().skip(k as usize).sum()
    }

    /// `P{G <= k}`.
    pub fn cdf(&self, k: u32) -> f64 {
        self.probabilities.iter().take(k as usize + 1).sum()
    }
}

/// Smallest `K` with `(1 - rho)^(K+1) < 1e-12`.
pub fn default_y_cutoff(params: &ModelParams) -> Result<u32> {
    let tail = params.one_minus_rho()?;
    if tail == 0.0 {
        return Ok(0);
    }
    let k = ((1e-12f64).ln() / tail.ln()).ceil() - 1.0;
    let mut k = k.max(0.0) as u32;
    while tail.powi(k as i32 + 1) >= 1e-12 {
        k += 1;
    }
    while k > 0 && tail.powi(k as i32) < 1e-12 {
        k -= 1;
    }
    Ok(k)
}

/// Exact distribution of `G(m, n)` by enumerating every environment
/// configuration, weighted by its probability.
///
/// In the i.i.d. model the random cells are the `m n` bulk weights and the
/// `m` axis-row weights. In the boundary model the vertical weights are
/// enumerated on `{0..=y_cutoff}` and the discarded mass is reported.
pub fn exact_law(
    params: &ModelParams,
    m: usize,
    n: usize,
    with_boundary: bool,
    y_cutoff: Option<u32>,
) -> Result<ExactLaw> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidEnvironment(format!("dimensions must be positive, got {m}x{n}")));
    }
    let p = params.p();
    let (axis_q, cutoff) = if with_boundary {
        let u = params.require_u()?;
        let k = match y_cutoff {
            Some(k) => k,
            None => default_y_cutoff(params)?,
        };
        (u, Some(k))
    } else {
        (p, None)
    };

    let bulk_bits = m * n;
    let bits = bulk_bits + m;
    let y_configs = cutoff.map_or(1f64, |k| (k as f64 + 1.0).powi(n as i32));
    let configs = 2f64.powi(bits as i32) * y_configs;
    if bits >= 63 || configs > MAX_EXACT_CONFIGS as f64 {
        return Err(Error::TooLarge(format!(
            "{configs:.3e} configurations exceed the budget of {MAX_EXACT_CONFIGS}"
        )));
    }

    // probability of a bit pattern depends only on its popcounts
    let bulk_pmf: Vec<f64> = (0..=bulk_bits)
        .map(|k| p.powi(k as i32) * (1.0 - p).powi((bulk_bits - k) as i32))
        .collect();
    let axis_pmf: Vec<f64> = (0..=m)
        .map(|k| axis_q.powi(k as i32) * (1.0 - axis_q).powi((m - k) as i32))
        .collect();

    let mut probabilities: Vec<f64> = Vec::new();
    let mut env_bulk = vec![0u8; bulk_bits];
    let mut env_axis = vec![0u8; m];

    let mut visit_y = |y: &[u32], y_prob: f64, probabilities: &mut Vec<f64>| -> Result<()> {
        for mask in 0u64..(1u64 << bits) {
            for (c, w) in env_bulk.iter_mut().enumerate() {
                *w = ((mask >> c) & 1) as u8;
            }
            for (c, w) in env_axis.iter_mut().enumerate() {
                *w = ((mask >> (bulk_bits + c)) & 1) as u8;
            }
            let bulk_ones = (mask & ((1u64 << bulk_bits) - 1)).count_ones() as usize;
            let axis_ones = (mask >> bulk_bits).count_ones() as usize;
            let prob = y_prob * bulk_pmf[bulk_ones] * axis_pmf[axis_ones];
            let env = if with_boundary {
                EnvironmentGrid::with_boundary(m, n, env_bulk.clone(), env_axis.clone(), y.to_vec())?
            } else {
                EnvironmentGrid::iid(m, n, env_bulk.clone(), env_axis.clone())?
            };
            let g = corner_passage_time(&env) as usize;
            if probabilities.len() <= g {
                probabilities.resize(g + 1, 0.0);
            }
            probabilities[g] += prob;
        }
        Ok(())
    };

    let truncation_mass = match cutoff {
        None => {
            visit_y(&[], 1.0, &mut probabilities)?;
            0.0
        }
        Some(k) => {
            let rho = params.require_rho()?;
            let tail = params.one_minus_rho()?;
            let pmf: Vec<f64> = (0..=k).map(|l| rho * tail.powi(l as i32)).collect();
            let mut y = vec![0u32; n];
            loop {
                let y_prob: f64 = y.iter().map(|&l| pmf[l as usize]).product();
                visit_y(&y, y_prob, &mut probabilities)?;
                // odometer over {0..=k}^n
                let mut pos = 0;
                while pos < n && y[pos] == k {
                    y[pos] = 0;
                    pos += 1;
                }
                if pos == n {
                    break;
                }
                y[pos] += 1;
            }
            1.0 - (1.0 - tail.powi(k as i32 + 1)).powi(n as i32)
        }
    };

    Ok(ExactLaw {
        probabilities,
        truncation_mass,
        y_cutoff: cutoff,
    })
}
