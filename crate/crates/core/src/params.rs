//! Model parameters and the two elementary laws of the model.
//!
//! Bulk weights are Bernoulli(`p`). The stationary boundary model puts
//! Bernoulli(`u`) weights on the horizontal axis and Geometric(`rho`) weights
//! on the vertical axis, where `rho = (u - p) / (u (1 - p))` and the geometric
//! law lives on `{0, 1, 2, ...}` with pmf `rho (1 - rho)^l`.

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::extended::Extended;

/// Validated `(p, u)` pair with the derived geometric parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    p: f64,
    u: Option<f64>,
    rho: Option<f64>,
}

impl ModelParams {
    pub fn new(p: f64, u: Option<f64>) -> Result<Self> {
        validate_params(p, u)
    }

    /// Bulk-only parameters.
    pub fn iid(p: f64) -> Result<Self> {
        validate_params(p, None)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn u(&self) -> Option<f64> {
        self.u
    }

    pub fn rho(&self) -> Option<f64> {
        self.rho
    }

    pub fn require_u(&self) -> Result<f64> {
        self.u.ok_or(Error::MissingBoundaryParam)
    }

    pub fn require_rho(&self) -> Result<f64> {
        self.rho.ok_or(Error::MissingBoundaryParam)
    }

    /// `1 - rho = p (1 - u) / (u (1 - p))`, evaluated without cancellation.
    pub fn one_minus_rho(&self) -> Result<f64> {
        let u = self.require_u()?;
        Ok(self.p * (1.0 - u) / (u * (1.0 - self.p)))
    }

    /// Mean of a vertical boundary weight, `p (1 - u) / (u - p)`.
    pub fn mean_vertical(&self) -> Result<f64> {
        let u = self.require_u()?;
        Ok(self.p * (1.0 - u) / (u - self.p))
    }

    /// `log(u (1 - p) / (p (1 - u)))`: the boundary l.m.g.f. is infinite at and
    /// above this value. Equals `+∞` when `u = 1`.
    pub fn geometric_pole(&self) -> Result<f64> {
        let u = self.require_u()?;
        Ok((u * (1.0 - self.p)).ln() - (self.p * (1.0 - u)).ln())
    }

    /// Same `p` with a different boundary parameter.
    pub fn with_u(&self, u: f64) -> Result<Self> {
        validate_params(self.p, Some(u))
    }
}

pub fn validate_params(p: f64, u: Option<f64>) -> Result<ModelParams> {
    if !(p > 0.0 && p < 1.0) {
        return Err(out_of_range("p", p, "0 < p < 1"));
    }
    let rho = match u {
        None => None,
        Some(u) => {
            if !(u > p && u <= 1.0) {
                return Err(out_of_range("u", u, "p < u <= 1"));
            }
            Some(rho_of(p, u))
        }
    };
    Ok(ModelParams { p, u, rho })
}

/// `(u - p) / (u (1 - p))`.
pub fn rho_of(p: f64, u: f64) -> f64 {
    (u - p) / (u * (1.0 - p))
}

/// Bernoulli(`q`) cumulant generating function `log(1 - q + q e^xi)`.
pub fn bernoulli_cgf(q: f64, xi: f64) -> Result<f64> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(out_of_range("q", q, "0 < q <= 1"));
    }
    Ok(bernoulli_cgf_unchecked(q, xi))
}

pub(crate) fn bernoulli_cgf_unchecked(q: f64, xi: f64) -> f64 {
    if xi > 0.0 {
        // xi + log(q + (1 - q) e^{-xi}) stays finite for large xi
        xi + (q + (1.0 - q) * (-xi).exp()).ln()
    } else {
        (q * xi.exp_m1()).ln_1p()
    }
}

/// Geometric(`rho`) cumulant generating function on `{0, 1, ...}`.
///
/// Infinite for `xi >= -log(1 - rho)`; identically zero when `rho = 1`.
pub fn geometric_cgf(rho: f64, xi: f64) -> Result<Extended> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(out_of_range("rho", rho, "0 < rho <= 1"));
    }
    Ok(geometric_cgf_with(rho, 1.0 - rho, xi))
}

/// Same as [`geometric_cgf`] but with `1 - rho` supplied by the caller, which
/// avoids cancellation when `rho` is close to one.
pub(crate) fn geometric_cgf_with(rho: f64, one_minus_rho: f64, xi: f64) -> Extended {
    if one_minus_rho <= 0.0 {
        return Extended::ZERO;
    }
    let pole = -one_minus_rho.ln();
    if xi >= pole {
        return Extended::Infinite;
    }
    let tail = one_minus_rho * xi.exp();
    Extended::Finite(rho.ln() - (-tail).ln_1p())
}

/// Cramér rate for sums of Bernoulli(`q`) variables, as a right-tail rate:
/// zero below the mean, infinite above one.
pub fn bernoulli_rate(q: f64, r: f64) -> Result<Extended> {
    if !(q > 0.0 && q < 1.0) {
        return Err(out_of_range("q", q, "0 < q < 1"));
    }
    Ok(bernoulli_rate_unchecked(q, r))
}

pub(crate) fn bernoulli_rate_unchecked(q: f64, r: f64) -> Extended {
    if r > 1.0 {
        Extended::Infinite
    } else if r <= q {
        Extended::ZERO
    } else if r == 1.0 {
        Extended::Finite(-q.ln())
    } else {
        Extended::Finite(r * (r / q).ln() + (1.0 - r) * ((1.0 - r) / (1.0 - q)).ln())
    }
}

/// Cramér rate for sums of Geometric(`rho`) variables as a right-tail rate:
/// zero at or below the mean `(1 - rho) / rho`, infinite for `r < 0`.
///
/// `rho = 1` is the point mass at zero.
pub fn geometric_rate(rho: f64, r: f64) -> Result<Extended> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(out_of_range("rho", rho, "0 < rho <= 1"));
    }
    if r < 0.0 {
        return Ok(Extended::Infinite);
    }
    if rho == 1.0 {
        return Ok(if r == 0.0 {
            Extended::ZERO
        } else {
            Extended::Infinite
        });
    }
    let mean = (1.0 - rho) / rho;
    if r <= mean {
        return Ok(Extended::ZERO);
    }
    Ok(Extended::Finite(geometric_cramer(rho, 1.0 - rho, r)))
}

/// Two-sided Cramér rate of the geometric law for `r >= 0`, finite and
/// vanishing at the mean. `r = 0` is evaluated by its limit `-log rho`.
pub(crate) fn geometric_cramer(rho: f64, one_minus_rho: f64, r: f64) -> f64 {
    debug_assert!(r >= 0.0);
    if r == 0.0 {
        return -rho.ln();
    }
    r * (r / (one_minus_rho * (1.0 + r))).ln() - ((1.0 + r) * rho).ln()
}

/// `d/dxi log(1 - q + q e^xi)`: the mean of the tilted Bernoulli law.
pub(crate) fn bernoulli_cgf_slope(q: f64, xi: f64) -> f64 {
    if xi > 0.0 {
        q / (q + (1.0 - q) * (-xi).exp())
    } else {
        let e = xi.exp();
        q * e / (1.0 - q + q * e)
    }
}

/// `d/dxi` of the geometric cumulant generating function below its pole.
pub(crate) fn geometric_cgf_slope(one_minus_rho: f64, xi: f64) -> f64 {
    let tail = one_minus_rho * xi.exp();
    tail / (1.0 - tail)
}

/// `(e^xi - 1)^2 e^{-xi} = e^xi + e^{-xi} - 2`, written as `(2 sinh(xi/2))^2`.
pub(crate) fn cosh_gap(xi: f64) -> f64 {
    let h = 2.0 * (0.5 * xi).sinh();
    h * h
}
