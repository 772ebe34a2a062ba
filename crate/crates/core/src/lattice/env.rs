use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::rng::{BernoulliBits, EnvStream, GeometricInverse};

/// Weights of a rectangular environment `{0..m} x {0..n}`.
///
/// Bulk sites `(i, j)` with `i, j >= 1` carry Bernoulli weights. Row `j = 0`
/// always carries 0/1 weights: Bernoulli(`p`) in the i.i.d. model, where they
/// are collected by horizontal steps like any bulk weight, and Bernoulli(`u`)
/// in the boundary model. Column `i = 0` carries Geometric(`rho`) weights in the
/// boundary model and nothing otherwise. The origin weight is zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvironmentGrid {
    m: usize,
    n: usize,
    bulk: Vec<u8>,
    axis_x: Vec<u8>,
    boundary_y: Option<Vec<u32>>,
    seed: u64,
    stream: u64,
}

impl EnvironmentGrid {
    /// I.i.d.-model environment. `bulk` is row-major over `j = 1..=n`, then
    /// `i = 1..=m`; `axis_row` holds the row-0 weights `i = 1..=m`.
    pub fn iid(m: usize, n: usize, bulk: Vec<u8>, axis_row: Vec<u8>) -> Result<Self> {
        Self::build(m, n, bulk, axis_row, None)
    }

    /// Boundary-model environment.
    pub fn with_boundary(
        m: usize,
        n: usize,
        bulk: Vec<u8>,
        boundary_x: Vec<u8>,
        boundary_y: Vec<u32>,
    ) -> Result<Self> {
        Self::build(m, n, bulk, boundary_x, Some(boundary_y))
    }

    /// I.i.d. environment with weights given by `f(i, j)`; `j = 0` is the axis row.
    pub fn iid_from_fn(m: usize, n: usize, f: impl Fn(usize, usize) -> u8) -> Result<Self> {
        let bulk = (1..=n).flat_map(|j| (1..=m).map(move |i| (i, j))).map(|(i, j)| f(i, j)).collect();
        let axis = (1..=m).map(|i| f(i, 0)).collect();
        Self::iid(m, n, bulk, axis)
    }

    fn build(
        m: usize,
        n: usize,
        bulk: Vec<u8>,
        axis_x: Vec<u8>,
        boundary_y: Option<Vec<u32>>,
    ) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidEnvironment(format!("dimensions must be positive, got {m}x{n}")));
        }
        if bulk.len() != m * n {
            return Err(Error::InvalidEnvironment(format!(
                "bulk has {} entries, expected {}",
                bulk.len(),
                m * n
            )));
        }
        if axis_x.len() != m {
            return Err(Error::InvalidEnvironment(format!(
                "horizontal axis has {} entries, expected {m}",
                axis_x.len()
            )));
        }
        if bulk.iter().chain(axis_x.iter()).any(|&w| w > 1) {
            return Err(Error::InvalidEnvironment("bulk and horizontal weights must be 0 or 1".into()));
        }
        if let Some(y) = &boundary_y {
            if y.len() != n {
                return Err(Error::InvalidEnvironment(format!(
                    "vertical boundary has {} entries, expected {n}",
                    y.len()
                )));
            }
        }
        Ok(EnvironmentGrid {
            m,
            n,
            bulk,
            axis_x,
            boundary_y,
            seed: 0,
            stream: 0,
        })
    }

    pub(crate) fn with_provenance(mut self, seed: u64, stream: u64) -> Self {
        self.seed = seed;
        self.stream = stream;
        self
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn has_boundary(&self) -> bool {
        self.boundary_y.is_some()
    }

    /// Bulk weight at `(i, j)`, `1 <= i <= m`, `1 <= j <= n`.
    #[inline]
    pub fn bulk(&self, i: usize, j: usize) -> u8 {
        debug_assert!((1..=self.m).contains(&i) && (1..=self.n).contains(&j));
        self.bulk[(j - 1) * self.m + (i - 1)]
    }

    /// Weight on the horizontal axis at `(i, 0)`.
    #[inline]
    pub fn axis_x(&self, i: usize) -> u8 {
        self.axis_x[i - 1]
    }

    /// Weight on the vertical axis at `(0, j)`; zero without boundary.
    #[inline]
    pub fn axis_y(&self, j: usize) -> u32 {
        self.boundary_y.as_ref().map_or(0, |y| y[j - 1])
    }

    pub fn bulk_weights(&self) -> &[u8] {
        &self.bulk
    }

    pub fn axis_row(&self) -> &[u8] {
        &self.axis_x
    }

    pub fn boundary_x(&self) -> Option<&[u8]> {
        self.boundary_y.as_ref().map(|_| self.axis_x.as_slice())
    }

    pub fn boundary_y(&self) -> Option<&[u32]> {
        self.boundary_y.as_deref()
    }

    /// Weight collected when a path arrives at `(i, j)` by a horizontal step.
    #[inline]
    pub(crate) fn horizontal_arrival(&self, i: usize, j: usize) -> u32 {
        if j == 0 {
            self.axis_x(i) as u32
        } else {
            self.bulk(i, j) as u32
        }
    }

    /// Weight collected when a path arrives at `(i, j)` by a vertical step.
    #[inline]
    pub(crate) fn vertical_arrival(&self, i: usize, j: usize) -> u32 {
        if i == 0 {
            self.axis_y(j)
        } else {
            0
        }
    }
}

/// The laws of one environment, prepared for sampling.
#[derive(Debug, Clone)]
pub(crate) struct EnvLaws {
    pub bulk: BernoulliBits,
    pub axis: BernoulliBits,
    pub vertical: Option<GeometricInverse>,
}

impl EnvLaws {
    pub fn new(params: &ModelParams, with_boundary: bool) -> Result<Self> {
        let p = params.p();
        if with_boundary {
            let u = params.require_u()?;
            Ok(EnvLaws {
                bulk: BernoulliBits::new(p),
                axis: BernoulliBits::new(u),
                vertical: Some(GeometricInverse::new(params.one_minus_rho()?)),
            })
        } else {
            Ok(EnvLaws {
                bulk: BernoulliBits::new(p),
                axis: BernoulliBits::new(p),
                vertical: None,
            })
        }
    }
}

/// Samples an environment from stream 0 of `seed`.
///
/// The draw order is fixed: horizontal axis, then vertical axis (boundary
/// model only), then bulk rows `j = 1..=n`. The grid is a pure function of
/// `(params, m, n, seed, with_boundary)`.
pub fn sample_environment(
    params: &ModelParams,
    m: usize,
    n: usize,
    seed: u64,
    with_boundary: bool,
) -> Result<EnvironmentGrid> {
    sample_environment_stream(params, m, n, seed, 0, with_boundary)
}

/// Like [`sample_environment`] on an explicit stream; Monte Carlo replicate
/// `k` under master seed `s` is `sample_environment_stream(.., s, k, ..)`.
pub fn sample_environment_stream(
    params: &ModelParams,
    m: usize,
    n: usize,
    seed: u64,
    stream: u64,
    with_boundary: bool,
) -> Result<EnvironmentGrid> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidEnvironment(format!("dimensions must be positive, got {m}x{n}")));
    }
    let laws = EnvLaws::new(params, with_boundary)?;
    let mut src = EnvStream::new(seed, stream);
    let mut words = Vec::with_capacity(m.div_ceil(64));

    src.fill_bernoulli(&laws.axis, m, &mut words);
    let axis: Vec<u8> = unpack(&words, m).collect();
    let vertical = laws
        .vertical
        .map(|law| (0..n).map(|_| src.geometric(&law)).collect::<Vec<_>>());
    let mut bulk = Vec::with_capacity(m * n);
    for _ in 0..n {
        src.fill_bernoulli(&laws.bulk, m, &mut words);
        bulk.extend(unpack(&words, m));
    }
    let grid = match vertical {
        Some(y) => EnvironmentGrid::with_boundary(m, n, bulk, axis, y)?,
        None => EnvironmentGrid::iid(m, n, bulk, axis)?,
    };
    Ok(grid.with_provenance(seed, stream))
}

fn unpack(words: &[u64], len: usize) -> impl Iterator<Item = u8> + '_ {
    (0..len).map(move |i| ((words[i >> 6] >> (i & 63)) & 1) as u8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::validate_params;

    #[test]
    fn sampling_is_deterministic() {
        let params = validate_params(0.25, None).unwrap();
        let a = sample_environment(&params, 1000, 1000, 0x5eed, false).unwrap();
        let b = sample_environment(&params, 1000, 1000, 0x5eed, false).unwrap();
        assert_eq!(a, b);
        let c = sample_environment(&params, 1000, 1000, 0x5eee, false).unwrap();
        assert_ne!(a.bulk_weights(), c.bulk_weights());
    }

    #[test]
    fn boundary_requires_u() {
        let params = validate_params(0.25, None).unwrap();
        assert_eq!(
            sample_environment(&params, 3, 3, 1, true),
            Err(Error::MissingBoundaryParam)
        );
    }

    #[test]
    fn empirical_means_match_the_laws() {
        let params = validate_params(0.25, Some(0.5)).unwrap();
        let env = sample_environment(&params, 400, 2000, 99, true).unwrap();
        let p = 0.25;
        let bulk = env.bulk_weights();
        let n = bulk.len() as f64;
        let mean = bulk.iter().map(|&w| w as f64).sum::<f64>() / n;
        assert!(((mean - p) / (p * (1.0 - p) / n).sqrt()).abs() < 3.0);

        // Geometric(2/3): mean 1/2, variance 3/4
        let y = env.boundary_y().unwrap();
        let n = y.len() as f64;
        let mean = y.iter().map(|&w| w as f64).sum::<f64>() / n;
        assert!(((mean - 0.5) / (0.75 / n).sqrt()).abs() < 3.0, "mean {mean}");

        let x = env.boundary_x().unwrap();
        let n = x.len() as f64;
        let mean = x.iter().map(|&w| w as f64).sum::<f64>() / n;
        assert!(((mean - 0.5) / (0.25 / n).sqrt()).abs() < 3.0);
    }

    #[test]
    fn rejects_malformed_grids() {
        assert!(EnvironmentGrid::iid(2, 2, vec![0, 1, 2, 0], vec![0, 0]).is_err());
        assert!(EnvironmentGrid::iid(2, 2, vec![0; 3], vec![0, 0]).is_err());
        assert!(EnvironmentGrid::with_boundary(2, 2, vec![0; 4], vec![0, 1], vec![3]).is_err());
        assert!(EnvironmentGrid::iid(0, 2, vec![], vec![]).is_err());
        let env = EnvironmentGrid::iid(2, 2, vec![0; 4], vec![1, 0]).unwrap();
        assert!(env.boundary_x().is_none() && env.boundary_y().is_none());
        assert_eq!(env.axis_row(), &[1, 0]);
    }
}
