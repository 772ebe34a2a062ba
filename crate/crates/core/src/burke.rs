//! Exact and Monte Carlo checks of the Burke property: the local update of
//! the gradients maps independent Ber(u) x Geom(rho) x Ber(p) inputs to
//! outputs with the same product law.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Result};
use crate::lattice::{
    alpha_field, burke_step, increment_fields, passage_time, sample_environment_stream, AlphaField,
    Increments,
};
use crate::params::ModelParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationReport {
    /// Largest `|P(output) - product law|` over all output cells.
    pub max_abs_deviation: f64,
    /// Input probability discarded by the cutoff on the geometric variable.
    pub truncation_mass: f64,
    pub cutoff: u32,
    /// Marginal deviations for the new horizontal gradient, the new vertical
    /// gradient and `alpha`, in that order.
    pub marginal_deviations: [f64; 3],
}

struct Laws {
    u: f64,
    p: f64,
    geom: Vec<f64>,
    truncation_mass: f64,
}

impl Laws {
    fn new(params: &ModelParams, cutoff: u32) -> Result<Self> {
        let u = params.require_u()?;
        if cutoff < 10 {
            return Err(out_of_range("cutoff", cutoff as f64, "cutoff >= 10"));
        }
        let rho = params.require_rho()?;
        let tail = params.one_minus_rho()?;
        // one extra cell so outputs up to cutoff + 1 can be compared
        let geom = (0..=cutoff + 1).map(|l| rho * tail.powi(l as i32)).collect();
        Ok(Laws {
            u,
            p: params.p(),
            geom,
            truncation_mass: tail.powi(cutoff as i32 + 1),
        })
    }

    fn bern(q: f64, x: u8) -> f64 {
        if x == 1 {
            q
        } else {
            1.0 - q
        }
    }
}

/// Exact law of `burke_step` applied to independent Ber(u), Geom(rho)
/// truncated at `cutoff`, and Ber(p) inputs, compared cell by cell with the
/// product of the same three laws.
pub fn exact_burke_factorization(params: &ModelParams, cutoff: u32) -> Result<FactorizationReport> {
    Ok(factorize(&Laws::new(params, cutoff)?, cutoff))
}

fn factorize(laws: &Laws, cutoff: u32) -> FactorizationReport {
    let width = cutoff as usize + 2;
    // joint[i][j][alpha]
    let mut joint = vec![[[0.0f64; 2]; 2]; width];
    for i in 0..2u8 {
        for j in 0..=cutoff {
            for w in 0..2u8 {
                let prob = Laws::bern(laws.u, i) * laws.geom[j as usize] * Laws::bern(laws.p, w);
                let out = burke_step(i, j, w);
                joint[out.j_new as usize][out.i_new as usize][out.alpha as usize] += prob;
            }
        }
    }
    let mut max_dev = 0.0f64;
    let mut marg_i = 0.0;
    let mut marg_alpha = 0.0;
    let mut marg_j = 0.0f64;
    for (j, cell) in joint.iter().enumerate() {
        let mut row = 0.0;
        for i in 0..2u8 {
            for a in 0..2u8 {
                let target = Laws::bern(laws.u, i) * laws.geom[j] * Laws::bern(laws.p, a);
                let got = cell[i as usize][a as usize];
                max_dev = max_dev.max((got - target).abs());
                row += got;
                marg_i += if i == 1 { got } else { 0.0 };
                marg_alpha += if a == 1 { got } else { 0.0 };
            }
        }
        marg_j = marg_j.max((row - laws.geom[j]).abs());
    }
    FactorizationReport {
        max_abs_deviation: max_dev,
        truncation_mass: laws.truncation_mass,
        cutoff,
        marginal_deviations: [(marg_i - laws.u).abs(), marg_j, (marg_alpha - laws.p).abs()],
    }
}

/// Two successive updates sharing the vertical gradient, each with fresh
/// horizontal and weight inputs. Returns the largest deviation of the joint
/// law of `(I~, alpha, I~', J~', alpha')` from the product law.
pub fn two_stage_factorization(params: &ModelParams, cutoff: u32) -> Result<FactorizationReport> {
    let laws = Laws::new(params, cutoff)?;
    let width = cutoff as usize + 3;
    // joint[j2][i1][a1][i2][a2]
    let mut joint = vec![[[[[0.0f64; 2]; 2]; 2]; 2]; width];
    for i in 0..2u8 {
        for j in 0..=cutoff {
            for w in 0..2u8 {
                let p1 = Laws::bern(laws.u, i) * laws.geom[j as usize] * Laws::bern(laws.p, w);
                let first = burke_step(i, j, w);
                for i2 in 0..2u8 {
                    for w2 in 0..2u8 {
                        let prob = p1 * Laws::bern(laws.u, i2) * Laws::bern(laws.p, w2);
                        let second = burke_step(i2, first.j_new, w2);
                        joint[second.j_new as usize][first.i_new as usize][first.alpha as usize]
                            [second.i_new as usize][second.alpha as usize] += prob;
                    }
                }
            }
        }
    }
    let geom = |j: usize| laws.geom.get(j).copied().unwrap_or(0.0);
    let mut max_dev = 0.0f64;
    let mut marg = [0.0f64; 3];
    let mut marg_j = 0.0f64;
    for (j2, block) in joint.iter().enumerate() {
        let mut row = 0.0;
        for (i1, b1) in block.iter().enumerate() {
            for (a1, b2) in b1.iter().enumerate() {
                for (i2, b3) in b2.iter().enumerate() {
                    for (a2, &got) in b3.iter().enumerate() {
                        let target = Laws::bern(laws.u, i1 as u8)
                            * Laws::bern(laws.p, a1 as u8)
                            * Laws::bern(laws.u, i2 as u8)
                            * geom(j2)
                            * Laws::bern(laws.p, a2 as u8);
                        max_dev = max_dev.max((got - target).abs());
                        row += got;
                        marg[0] += if i2 == 1 { got } else { 0.0 };
                        marg[2] += if a2 == 1 { got } else { 0.0 };
                    }
                }
            }
        }
        marg_j = marg_j.max((row - geom(j2)).abs());
    }
    Ok(FactorizationReport {
        max_abs_deviation: max_dev,
        truncation_mass: laws.truncation_mass,
        cutoff,
        marginal_deviations: [(marg[0] - laws.u).abs(), marg_j, (marg[2] - laws.p).abs()],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    I,
    J,
}

/// A down-right path: its edge labels in order, and interior `alpha` sites,
/// each paired with the index of a neighbouring edge label.
struct PathSpec {
    name: &'static str,
    labels: Vec<(Kind, usize, usize)>,
    alphas: Vec<((usize, usize), usize)>,
}

/// Alternating `e1, -e2` from `(0, n)`; the leftover steps go straight once
/// one coordinate is exhausted.
fn staircase(m: usize, n: usize) -> PathSpec {
    let (mut x, mut y) = (0usize, n);
    let mut labels = Vec::new();
    let mut alphas = Vec::new();
    let mut horizontal = true;
    while x < m || y > 0 {
        if (horizontal && x < m) || y == 0 {
            x += 1;
            labels.push((Kind::I, x, y));
            // w = (x-1, y-1) lies strictly below the vertex (x, y)
            if y > 0 {
                alphas.push(((x - 1, y - 1), labels.len() - 1));
            }
        } else {
            labels.push((Kind::J, x, y));
            y -= 1;
        }
        horizontal = !horizontal;
    }
    PathSpec {
        name: "staircase",
        labels,
        alphas,
    }
}

/// Along the top row to `(m, n)` and down the right column.
fn top_right(m: usize, n: usize) -> PathSpec {
    let mut labels: Vec<_> = (1..=m).map(|i| (Kind::I, i, n)).collect();
    labels.extend((1..=n).rev().map(|j| (Kind::J, m, j)));
    let alphas = (1..=m).map(|i| ((i - 1, n - 1), i - 1)).collect();
    PathSpec {
        name: "top_right",
        labels,
        alphas,
    }
}

/// Integer moment sums; exact, so the parallel reduction is order free.
#[derive(Debug, Clone, Default)]
struct Sums {
    i: [u64; 2],
    j: [u64; 3],
    alpha: [u64; 2],
    // per pair kind: n, sx, sy, sxx, syy, sxy
    pairs: [[u64; 6]; 5],
}

impl Sums {
    fn merge(mut self, o: Sums) -> Sums {
        for k in 0..2 {
            self.i[k] += o.i[k];
            self.alpha[k] += o.alpha[k];
        }
        for k in 0..3 {
            self.j[k] += o.j[k];
        }
        for (a, b) in self.pairs.iter_mut().zip(o.pairs.iter()) {
            for k in 0..6 {
                a[k] += b[k];
            }
        }
        self
    }

    fn add_pair(&mut self, kind: usize, x: u64, y: u64) {
        let a = &mut self.pairs[kind];
        a[0] += 1;
        a[1] += x;
        a[2] += y;
        a[3] += x * x;
        a[4] += y * y;
        a[5] += x * y;
    }

    fn record(&mut self, path: &PathSpec, inc: &Increments, alpha: &AlphaField) {
        let value = |&(kind, i, j): &(Kind, usize, usize)| -> u64 {
            match kind {
                Kind::I => inc.i(i, j) as u64,
                Kind::J => inc.j(i, j) as u64,
            }
        };
        let values: Vec<u64> = path.labels.iter().map(value).collect();
        for (label, &v) in path.labels.iter().zip(&values) {
            match label.0 {
                Kind::I => {
                    self.i[0] += 1;
                    self.i[1] += v;
                }
                Kind::J => {
                    self.j[0] += 1;
                    self.j[1] += v;
                    self.j[2] += (v == 0) as u64;
                }
            }
        }
        for w in path.labels.windows(2).zip(values.windows(2)) {
            let kind = match (w.0[0].0, w.0[1].0) {
                (Kind::I, Kind::I) => 0,
                (Kind::I, Kind::J) => 1,
                (Kind::J, Kind::I) => 2,
                (Kind::J, Kind::J) => 3,
            };
            self.add_pair(kind, w.1[0], w.1[1]);
        }
        for &((a, b), k) in &path.alphas {
            let x = alpha.get(a, b) as u64;
            self.alpha[0] += 1;
            self.alpha[1] += x;
            self.add_pair(4, x, values[k]);
        }
    }
}

const PAIR_NAMES: [&str; 5] = ["I-I", "I-J", "J-I", "J-J", "alpha-label"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalCheck {
    pub label: String,
    pub samples: u64,
    pub empirical: f64,
    pub expected: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCheck {
    pub pair: String,
    pub samples: u64,
    pub correlation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathReport {
    pub path: String,
    pub marginals: Vec<MarginalCheck>,
    pub correlations: Vec<CorrelationCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub p: f64,
    pub u: f64,
    pub m: usize,
    pub n: usize,
    pub reps: u64,
    pub master_seed: u64,
    pub z_threshold: f64,
    /// Correlations are flagged beyond `4 / sqrt(reps)`.
    pub correlation_threshold: f64,
    pub paths: Vec<PathReport>,
    pub passed: bool,
}

fn z_score(empirical: f64, expected: f64, sd: f64, n: u64) -> f64 {
    let diff = empirical - expected;
    if sd == 0.0 {
        if diff.abs() < 1e-15 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / (sd / (n as f64).sqrt())
    }
}

/// Simulates `reps` boundary environments and checks the empirical marginals
/// and adjacent-label correlations along two down-right paths ending at
/// `(m, n)`.
pub fn mc_stationarity_check(
    params: &ModelParams,
    m: usize,
    n: usize,
    reps: u64,
    master_seed: u64,
) -> Result<StationarityReport> {
    let u = params.require_u()?;
    let rho = params.require_rho()?;
    let tail = params.one_minus_rho()?;
    let p = params.p();
    if m == 0 || n == 0 {
        return Err(out_of_range("m, n", m.min(n) as f64, "m, n >= 1"));
    }
    if reps < 2 {
        return Err(out_of_range("reps", reps as f64, "reps >= 2"));
    }
    let paths = [staircase(m, n), top_right(m, n)];
    let sums = (0..reps)
        .into_par_iter()
        .map(|k| -> Result<Vec<Sums>> {
            let env = sample_environment_stream(params, m, n, master_seed, k, true)?;
            let inc = increment_fields(&passage_time(&env));
            let alpha = alpha_field(&inc, &env);
            Ok(paths
                .iter()
                .map(|path| {
                    let mut s = Sums::default();
                    s.record(path, &inc, &alpha);
                    s
                })
                .collect())
        })
        .try_reduce(
            || vec![Sums::default(); 2],
            |a, b| Ok(a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect()),
        )?;

    let z_threshold = 4.0;
    let correlation_threshold = 4.0 / (reps as f64).sqrt();
    let mean_j = tail / rho;
    let mut passed = true;
    let mut reports = Vec::new();
    for (path, s) in paths.iter().zip(&sums) {
        let mut marginals = Vec::new();
        let mut push = |label: &str, count: u64, total: u64, expected: f64, sd: f64| {
            let empirical = total as f64 / count as f64;
            marginals.push(MarginalCheck {
                label: label.into(),
                samples: count,
                empirical,
                expected,
                z: z_score(empirical, expected, sd, count),
            });
        };
        push("I ~ Ber(u)", s.i[0], s.i[1], u, (u * (1.0 - u)).sqrt());
        push("J ~ Geom(rho): mean", s.j[0], s.j[1], mean_j, tail.sqrt() / rho);
        push("J ~ Geom(rho): P{J=0}", s.j[0], s.j[2], rho, (rho * tail).sqrt());
        push("alpha ~ Ber(p)", s.alpha[0], s.alpha[1], p, (p * (1.0 - p)).sqrt());

        let correlations: Vec<CorrelationCheck> = s
            .pairs
            .iter()
            .zip(PAIR_NAMES)
            .filter(|(a, _)| a[0] > 1)
            .map(|(a, name)| {
                let n = a[0] as f64;
                let (mx, my) = (a[1] as f64 / n, a[2] as f64 / n);
                let vx = a[3] as f64 / n - mx * mx;
                let vy = a[4] as f64 / n - my * my;
                let cov = a[5] as f64 / n - mx * my;
                let correlation = if vx > 0.0 && vy > 0.0 {
                    cov / (vx * vy).sqrt()
                } else {
                    0.0
                };
                CorrelationCheck {
                    pair: name.into(),
                    samples: a[0],
                    correlation,
                }
            })
            .collect();
        passed &= marginals.iter().all(|c| c.z.abs() < z_threshold);
        passed &= correlations.iter().all(|c| c.correlation.abs() < correlation_threshold);
        reports.push(PathReport {
            path: path.name.into(),
            marginals,
            correlations,
        });
    }
    Ok(StationarityReport {
        p,
        u,
        m,
        n,
        reps,
        master_seed,
        z_threshold,
        correlation_threshold,
        paths: reports,
        passed,
    })
}
