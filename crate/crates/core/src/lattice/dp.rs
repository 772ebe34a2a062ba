use serde::{Deserialize, Serialize};

use super::env::{EnvLaws, EnvironmentGrid};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::rng::EnvStream;

/// Last passage times `G(i, j)` from the origin for every `(i, j)` in
/// `{0..m} x {0..n}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassageField {
    m: usize,
    n: usize,
    g: Vec<u32>,
    has_boundary: bool,
}

impl PassageField {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_boundary(&self) -> bool {
        self.has_boundary
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.g[j * (self.m + 1) + i]
    }

    pub fn corner(&self) -> u32 {
        self.get(self.m, self.n)
    }
}

/// Row-major dynamic programme `G(i, j) = max(G(i, j-1), G(i-1, j) + w(i, j))`
/// with the axes given by prefix sums of the axis weights.
pub fn passage_time(env: &EnvironmentGrid) -> PassageField {
    let (m, n) = (env.m(), env.n());
    let w = m + 1;
    let mut g = vec![0u32; w * (n + 1)];
    for i in 1..=m {
        g[i] = g[i - 1] + env.axis_x(i) as u32;
    }
    for j in 1..=n {
        let (prev, cur) = g.split_at_mut(j * w);
        let prev = &prev[(j - 1) * w..];
        let cur = &mut cur[..w];
        cur[0] = prev[0].saturating_add(env.axis_y(j));
        for i in 1..=m {
            cur[i] = prev[i].max(cur[i - 1] + env.bulk(i, j) as u32);
        }
    }
    PassageField {
        m,
        n,
        g,
        has_boundary: env.has_boundary(),
    }
}

/// Corner value `G(m, n)` keeping a single row of the table.
pub fn corner_passage_time(env: &EnvironmentGrid) -> u32 {
    let m = env.m();
    let mut row = vec![0u32; m + 1];
    for i in 1..=m {
        row[i] = row[i - 1] + env.axis_x(i) as u32;
    }
    for j in 1..=env.n() {
        row[0] = row[0].saturating_add(env.axis_y(j));
        for i in 1..=m {
            row[i] = row[i].max(row[i - 1] + env.bulk(i, j) as u32);
        }
    }
    row[m]
}

/// Which step a path takes out of the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FirstStep {
    /// `e1`: walk along the horizontal axis first.
    Horizontal,
    /// `e2`: walk up the vertical axis first.
    Vertical,
}

/// Passage time of the boundary model restricted to paths whose first step is
/// `first_step`.
///
/// Horizontal: `max_k { x_1 + .. + x_k + G_{(k,1),(m,n)} }`. Vertical:
/// `max_l { y_1 + .. + y_l + w(1,l) + G_{(1,l),(m,n)} }`. Here `G_{a,b}` is the
/// bulk passage time from `a` to `b`, which does not count the weight at `a`.
pub fn restricted_passage_time(env: &EnvironmentGrid, first_step: FirstStep) -> Result<u32> {
    if !env.has_boundary() {
        return Err(Error::MissingBoundaryParam);
    }
    let to_corner = bulk_to_corner(env);
    let (m, n) = (env.m(), env.n());
    let at = |i: usize, j: usize| to_corner[(j - 1) * m + (i - 1)];
    let best = match first_step {
        FirstStep::Horizontal => {
            let mut prefix = 0u32;
            (1..=m)
                .map(|k| {
                    prefix += env.axis_x(k) as u32;
                    prefix + at(k, 1)
                })
                .max()
        }
        FirstStep::Vertical => {
            let mut prefix = 0u32;
            (1..=n)
                .map(|l| {
                    prefix = prefix.saturating_add(env.axis_y(l));
                    prefix + env.bulk(1, l) as u32 + at(1, l)
                })
                .max()
        }
    };
    Ok(best.unwrap_or(0))
}

/// Reverse dynamic programme: bulk passage time from `(i, j)` to `(m, n)` for
/// `i` in `1..=m`, `j` in `1..=n`, row-major over `j`.
fn bulk_to_corner(env: &EnvironmentGrid) -> Vec<u32> {
    let (m, n) = (env.m(), env.n());
    let mut b = vec![0u32; m * n];
    for j in (1..=n).rev() {
        for i in (1..=m).rev() {
            let up = if j < n { Some(b[j * m + (i - 1)]) } else { None };
            let right = if i < m {
                Some(b[(j - 1) * m + i] + env.bulk(i + 1, j) as u32)
            } else {
                None
            };
            b[(j - 1) * m + (i - 1)] = match (up, right) {
                (Some(a), Some(c)) => a.max(c),
                (Some(a), None) | (None, Some(a)) => a,
                (None, None) => 0,
            };
        }
    }
    b
}

/// Horizontal and vertical gradients of a passage field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Increments {
    m: usize,
    n: usize,
    horizontal: Vec<u32>,
    vertical: Vec<u32>,
}

impl Increments {
    /// `I(i, j) = G(i, j) - G(i-1, j)` for `1 <= i <= m`, `0 <= j <= n`.
    #[inline]
    pub fn i(&self, i: usize, j: usize) -> u32 {
        self.horizontal[j * self.m + (i - 1)]
    }

    /// `J(i, j) = G(i, j) - G(i, j-1)` for `0 <= i <= m`, `1 <= j <= n`.
    #[inline]
    pub fn j(&self, i: usize, j: usize) -> u32 {
        self.vertical[(j - 1) * (self.m + 1) + i]
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

pub fn increment_fields(field: &PassageField) -> Increments {
    let (m, n) = (field.m(), field.n());
    let mut horizontal = Vec::with_capacity(m * (n + 1));
    for j in 0..=n {
        for i in 1..=m {
            horizontal.push(field.get(i, j) - field.get(i - 1, j));
        }
    }
    let mut vertical = Vec::with_capacity((m + 1) * n);
    for j in 1..=n {
        for i in 0..=m {
            vertical.push(field.get(i, j) - field.get(i, j - 1));
        }
    }
    Increments {
        m,
        n,
        horizontal,
        vertical,
    }
}

/// `alpha(i-1, j-1) = min(I(i, j-1), J(i-1, j) + w(i, j))` for `(i, j)` in the bulk,
/// indexed by `(i-1, j-1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphaField {
    m: usize,
    values: Vec<u8>,
}

impl AlphaField {
    /// `alpha(a, b)` for `0 <= a < m`, `0 <= b < n`.
    pub fn get(&self, a: usize, b: usize) -> u8 {
        self.values[b * self.m + a]
    }
}

pub fn alpha_field(increments: &Increments, env: &EnvironmentGrid) -> AlphaField {
    let (m, n) = (env.m(), env.n());
    let mut values = Vec::with_capacity(m * n);
    for j in 1..=n {
        for i in 1..=m {
            let a = increments.i(i, j - 1).min(increments.j(i - 1, j) + env.bulk(i, j) as u32);
            values.push(a as u8);
        }
    }
    AlphaField { m, values }
}

/// Output of one local update of the gradients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BurkeTriple {
    pub i_new: u8,
    pub j_new: u32,
    pub alpha: u8,
}

/// Maps the incoming gradients `(I(i, j-1), J(i-1, j))` and the weight `w(i, j)`
/// to `(I(i, j), J(i, j), alpha(i-1, j-1))`.
#[inline]
pub fn burke_step(i_old: u8, j_old: u32, omega: u8) -> BurkeTriple {
    debug_assert!(i_old <= 1 && omega <= 1);
    let (i, j, w) = (i_old as i64, j_old as i64, omega as i64);
    BurkeTriple {
        i_new: (i - j).max(w) as u8,
        j_new: (j - i + w).max(0) as u32,
        alpha: i.min(j + w) as u8,
    }
}

/// Corner-only passage times for freshly sampled environments, without
/// materialising the grid. Produces exactly
/// `corner_passage_time(&sample_environment_stream(params, m, n, seed, stream, ..))`.
pub struct CornerSampler {
    m: usize,
    n: usize,
    laws: EnvLaws,
    row: Vec<u32>,
    bits: Vec<u64>,
    column: Vec<u32>,
}

impl CornerSampler {
    pub fn new(params: &ModelParams, m: usize, n: usize, with_boundary: bool) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidEnvironment(format!("dimensions must be positive, got {m}x{n}")));
        }
        Ok(CornerSampler {
            m,
            n,
            laws: EnvLaws::new(params, with_boundary)?,
            row: vec![0; m + 1],
            bits: Vec::with_capacity(m.div_ceil(64)),
            column: Vec::with_capacity(n),
        })
    }

    pub fn corner(&mut self, seed: u64, stream: u64) -> u32 {
        let mut src = EnvStream::new(seed, stream);
        let m = self.m;

        src.fill_bernoulli(&self.laws.axis, m, &mut self.bits);
        self.row[0] = 0;
        let mut acc = 0u32;
        for i in 0..m {
            acc += ((self.bits[i >> 6] >> (i & 63)) & 1) as u32;
            self.row[i + 1] = acc;
        }
        self.column.clear();
        if let Some(law) = self.laws.vertical {
            for _ in 0..self.n {
                let y = src.geometric(&law);
                self.column.push(y);
            }
        }

        let mut col0 = 0u32;
        for j in 0..self.n {
            src.fill_bernoulli(&self.laws.bulk, m, &mut self.bits);
            if let Some(&y) = self.column.get(j) {
                col0 = col0.saturating_add(y);
            }
            row_update(&mut self.row, &self.bits, col0);
        }
        self.row[m]
    }
}

/// One DP row: `row[i] <- max(row[i], row[i-1] + bit(i-1))` with `row[0] = col0`.
#[inline]
fn row_update(row: &mut [u32], bits: &[u64], col0: u32) {
    row[0] = col0;
    let mut left = col0;
    for (chunk, &word) in row[1..].chunks_mut(64).zip(bits) {
        let mut w = word;
        for cell in chunk.iter_mut() {
            let v = (*cell).max(left + (w & 1) as u32);
            *cell = v;
            left = v;
            w >>= 1;
        }
    }
}
