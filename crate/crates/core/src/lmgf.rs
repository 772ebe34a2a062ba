//! Limiting log-moment generating functions of the boundary model.

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::extended::Extended;
use crate::ldp::istar;
use crate::params::{bernoulli_cgf_unchecked, geometric_cgf_with, ModelParams};
use crate::shape::{characteristic_slope, check_direction};

/// Values of `xi` this close to the geometric pole are reported as infinite.
pub const POLE_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Hor,
    Ver,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    BoundaryHor,
    BoundaryVer,
    Bulk,
    Infinite,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::BoundaryHor => "boundary_hor",
            Regime::BoundaryVer => "boundary_ver",
            Regime::Bulk => "bulk",
            Regime::Infinite => "infinite",
        }
    }
}

/// `k(xi)`, `k(-xi)` and `ell(xi)`; the last two only below the pole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub k_plus: f64,
    pub k_minus: Option<f64>,
    pub ell: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmgfResult {
    pub value: Extended,
    pub regime: Regime,
    pub thresholds: Thresholds,
}

/// `d/du` of the Bernoulli(u) cumulant generating function at `eta`.
#[cfg(test)]
fn d_bernoulli_du(u: f64, eta: f64) -> f64 {
    let e = eta.exp_m1();
    e / (1.0 + u * e)
}

/// `d/du` of the Geometric(rho(u)) cumulant generating function at `eta`,
/// below the pole.
#[cfg(test)]
fn d_geometric_du(p: f64, u: f64, eta: f64) -> f64 {
    -p * (1.0 - p) * eta.exp_m1() / ((u - p) * (u * (1.0 - p) - p * (1.0 - u) * eta.exp()))
}

/// Ratio `d_bernoulli_du(eta) / d_geometric_du(-eta)` with the `expm1`
/// factors cancelled, so it is regular at `eta = 0`.
fn k_ratio(p: f64, u: f64, eta: f64) -> f64 {
    let q = p * (1.0 - p);
    eta.exp() * (u - p) * (u * (1.0 - p) - p * (1.0 - u) * (-eta).exp()) / (q * (1.0 + u * eta.exp_m1()))
}

fn pole(params: &ModelParams) -> Result<f64> {
    params.geometric_pole()
}

fn check_xi(xi: f64) -> Result<()> {
    if xi >= 0.0 && !xi.is_nan() {
        Ok(())
    } else {
        Err(out_of_range("xi", xi, "xi >= 0"))
    }
}

/// `k^(u)(xi)` (plus) or `k^(u)(-xi)` (minus). At `xi = 0` both equal the
/// characteristic slope.
pub fn k_threshold(params: &ModelParams, xi: f64, sign: Sign) -> Result<f64> {
    let u = params.require_u()?;
    check_xi(xi)?;
    let p = params.p();
    match sign {
        Sign::Plus => Ok(k_ratio(p, u, xi)),
        Sign::Minus => {
            let threshold = pole(params)?;
            if xi >= threshold - POLE_GUARD {
                return Err(Error::DomainError { xi, threshold });
            }
            Ok(k_ratio(p, u, -xi))
        }
    }
}

/// `ell^(u)(xi) = (C_B(xi) + C_B(-xi)) / (C_G(xi) + C_G(-xi))`, the slope
/// where the full l.m.g.f. switches from the horizontal to the vertical formula.
pub fn ell_threshold(params: &ModelParams, xi: f64) -> Result<f64> {
    let u = params.require_u()?;
    check_xi(xi)?;
    let threshold = pole(params)?;
    if xi >= threshold - POLE_GUARD {
        return Err(Error::DomainError { xi, threshold });
    }
    let p = params.p();
    if xi == 0.0 || u == 1.0 {
        return if u == 1.0 {
            Ok((1.0 - p) / p)
        } else {
            characteristic_slope(params)
        };
    }
    let c = crate::params::cosh_gap(xi);
    let rho = params.require_rho()?;
    let tail = params.one_minus_rho()?;
    // (1 + u a)(1 - u b) = 1 + u(1-u)c and (1 - tail e^xi)(1 - tail e^-xi) = rho² - tail c
    let num = (u * (1.0 - u) * c).ln_1p();
    let den = -(-tail * c / (rho * rho)).ln_1p();
    Ok(num / den)
}

pub fn thresholds(params: &ModelParams, xi: f64) -> Result<Thresholds> {
    Ok(Thresholds {
        k_plus: k_threshold(params, xi, Sign::Plus)?,
        k_minus: k_threshold(params, xi, Sign::Minus).ok(),
        ell: ell_threshold(params, xi).ok(),
    })
}

/// `s C_B(xi) - t C_G(-xi)`.
fn horizontal_formula(s: f64, t: f64, params: &ModelParams, xi: f64) -> Result<f64> {
    let u = params.require_u()?;
    let geo = geometric_cgf_with(params.require_rho()?, params.one_minus_rho()?, -xi).to_f64();
    Ok(s * bernoulli_cgf_unchecked(u, xi) - if t == 0.0 { 0.0 } else { t * geo })
}

/// `t C_G(xi) - s C_B(-xi)`, finite below the pole.
fn vertical_formula(s: f64, t: f64, params: &ModelParams, xi: f64) -> Result<f64> {
    let u = params.require_u()?;
    let geo = geometric_cgf_with(params.require_rho()?, params.one_minus_rho()?, xi).to_f64();
    Ok(if t == 0.0 { 0.0 } else { t * geo } - s * bernoulli_cgf_unchecked(u, -xi))
}

/// Limiting l.m.g.f. `lim N^-1 log E exp(xi G)` of the boundary model, for
/// paths restricted to a first horizontal step (`Hor`), a first vertical step
/// (`Ver`), or unrestricted (`Full`).
pub fn lambda_boundary(s: f64, t: f64, params: &ModelParams, xi: f64, part: Part) -> Result<LmgfResult> {
    check_direction(s, t)?;
    check_xi(xi)?;
    let p = params.p();
    let th = thresholds(params, xi)?;
    if xi == 0.0 {
        return Ok(LmgfResult {
            value: Extended::ZERO,
            regime: Regime::Bulk,
            thresholds: th,
        });
    }
    let beyond_pole = xi >= pole(params)? - POLE_GUARD;
    let infinite = LmgfResult {
        value: Extended::Infinite,
        regime: Regime::Infinite,
        thresholds: th,
    };
    let finite = |value: f64, regime| LmgfResult {
        value: Extended::Finite(value),
        regime,
        thresholds: th,
    };
    match part {
        Part::Hor => {
            if t < th.k_plus * s {
                Ok(finite(horizontal_formula(s, t, params, xi)?, Regime::BoundaryHor))
            } else {
                Ok(finite(istar(s, t, p, xi)?, Regime::Bulk))
            }
        }
        Part::Ver => match th.k_minus {
            _ if beyond_pole => Ok(infinite),
            Some(k) if t > k * s => Ok(finite(vertical_formula(s, t, params, xi)?, Regime::BoundaryVer)),
            _ => Ok(finite(istar(s, t, p, xi)?, Regime::Bulk)),
        },
        Part::Full => match th.ell {
            _ if beyond_pole => Ok(infinite),
            Some(ell) if t < ell * s => Ok(finite(horizontal_formula(s, t, params, xi)?, Regime::BoundaryHor)),
            _ => Ok(finite(vertical_formula(s, t, params, xi)?, Regime::BoundaryVer)),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::validate_params;
    use approx::assert_abs_diff_eq;

    const CASES: [(f64, f64); 3] = [(0.25, 0.5), (0.1, 0.9), (0.5, 0.75)];

    fn xi_grid(params: &ModelParams) -> Vec<f64> {
        let top = params.geometric_pole().unwrap().min(6.0);
        (1..=15).map(|k| top * 0.99 * k as f64 / 15.0).collect()
    }

    #[test]
    fn k_matches_the_ratio_of_derivatives() {
        let params = validate_params(0.25, Some(0.5)).unwrap();
        let (p, u, xi) = (0.25, 0.5, 0.5);
        let direct = d_bernoulli_du(u, xi) / d_geometric_du(p, u, -xi);
        assert_abs_diff_eq!(k_threshold(&params, xi, Sign::Plus).unwrap(), direct, epsilon = 1e-12);

        // centered finite differences in u
        let h = 1e-6;
        let cb = |u: f64, x: f64| bernoulli_cgf_unchecked(u, x);
        let cg = |u: f64, x: f64| {
            let q = validate_params(p, Some(u)).unwrap();
            geometric_cgf_with(q.rho().unwrap(), q.one_minus_rho().unwrap(), x).to_f64()
        };
        let fd = |f: &dyn Fn(f64, f64) -> f64, x: f64| (f(u + h, x) - f(u - h, x)) / (2.0 * h);
        let plus = fd(&cb, xi) / fd(&cg, -xi);
        let minus = fd(&cb, -xi) / fd(&cg, xi);
        assert_abs_diff_eq!(k_threshold(&params, xi, Sign::Plus).unwrap(), plus, epsilon = 1e-6);
        assert_abs_diff_eq!(k_threshold(&params, xi, Sign::Minus).unwrap(), minus, epsilon = 1e-6);
    }

    #[test]
    fn thresholds_tend_to_the_characteristic_slope() {
        for &(p, u) in &CASES {
            let params = validate_params(p, Some(u)).unwrap();
            let slope = characteristic_slope(&params).unwrap();
            for value in [
                k_threshold(&params, 1e-3, Sign::Plus).unwrap(),
                k_threshold(&params, 1e-3, Sign::Minus).unwrap(),
                ell_threshold(&params, 1e-3).unwrap(),
            ] {
                assert!((value / slope - 1.0).abs() < 5e-3);
            }
            assert_eq!(k_threshold(&params, 0.0, Sign::Minus).unwrap(), slope);
            assert_eq!(ell_threshold(&params, 0.0).unwrap(), slope);
        }
    }

    #[test]
    fn sandwich_and_ell_identity() {
        for &(p, u) in &CASES {
            let params = validate_params(p, Some(u)).unwrap();
            let rho = params.rho().unwrap();
            let tail = params.one_minus_rho().unwrap();
            for xi in xi_grid(&params) {
                let th = thresholds(&params, xi).unwrap();
                let (km, ell) = (th.k_minus.unwrap(), th.ell.unwrap());
                assert!(km <= ell && ell <= th.k_plus, "{p} {u} {xi}: {km} {ell} {}", th.k_plus);
                let bern = bernoulli_cgf_unchecked(u, xi) + bernoulli_cgf_unchecked(u, -xi);
                let geo = geometric_cgf_with(rho, tail, xi).to_f64() + geometric_cgf_with(rho, tail, -xi).to_f64();
                assert_abs_diff_eq!(bern, ell * geo, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_boundary() {
        let params = validate_params(0.25, Some(1.0)).unwrap();
        assert_eq!(params.geometric_pole().unwrap(), f64::INFINITY);
        for &xi in &[0.1, 1.0, 5.0] {
            assert_abs_diff_eq!(k_threshold(&params, xi, Sign::Plus).unwrap(), 3.0, epsilon = 1e-12);
            assert_abs_diff_eq!(k_threshold(&params, xi, Sign::Minus).unwrap(), 3.0, epsilon = 1e-12);
            assert_eq!(ell_threshold(&params, xi).unwrap(), 3.0);
            for &(s, t) in &[(1.0, 1.0), (1.0, 5.0)] {
                let full = lambda_boundary(s, t, &params, xi, Part::Full).unwrap();
                assert_abs_diff_eq!(full.value.to_f64(), s * xi, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn infinite_exactly_beyond_ln3() {
        let params = validate_params(0.25, Some(0.5)).unwrap();
        let ln3 = 3f64.ln();
        assert_abs_diff_eq!(params.geometric_pole().unwrap(), ln3, epsilon = 1e-15);
        for &xi in &[ln3, ln3 + 1e-9, 2.0, 10.0] {
            for part in [Part::Ver, Part::Full] {
                let r = lambda_boundary(1.0, 1.0, &params, xi, part).unwrap();
                assert_eq!((r.value, r.regime), (Extended::Infinite, Regime::Infinite));
            }
        }
        for &xi in &[0.5, ln3 - 1e-6] {
            assert!(lambda_boundary(1.0, 1.0, &params, xi, Part::Full).unwrap().value.is_finite());
        }
        assert!(matches!(ell_threshold(&params, ln3), Err(Error::DomainError { .. })));
    }

    #[test]
    fn full_is_the_larger_restriction_and_dominates_istar() {
        for &(p, u) in &CASES {
            let params = validate_params(p, Some(u)).unwrap();
            for xi in xi_grid(&params) {
                for i in 1..=12 {
                    for j in 1..=12 {
                        let (s, t) = (0.25 * i as f64, 0.25 * j as f64);
                        let full = lambda_boundary(s, t, &params, xi, Part::Full).unwrap().value.to_f64();
                        let hor = lambda_boundary(s, t, &params, xi, Part::Hor).unwrap().value.to_f64();
                        let ver = lambda_boundary(s, t, &params, xi, Part::Ver).unwrap().value.to_f64();
                        assert!((full - hor.max(ver)).abs() <= 1e-9 * (1.0 + full.abs()));
                        assert!(full >= istar(s, t, p, xi).unwrap() - 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn continuity_across_the_switching_line() {
        for &(p, u) in &CASES {
            let params = validate_params(p, Some(u)).unwrap();
            for xi in xi_grid(&params) {
                let ell = ell_threshold(&params, xi).unwrap();
                for &s in &[0.5, 1.0, 2.0] {
                    let t = ell * s;
                    let h = horizontal_formula(s, t, &params, xi).unwrap();
                    let v = vertical_formula(s, t, &params, xi).unwrap();
                    assert!((h - v).abs() <= 1e-10 * (1.0 + h.abs()), "{h} {v}");
                }
            }
        }
    }

    #[test]
    fn zero_at_the_origin_and_convex() {
        let params = validate_params(0.25, Some(0.5)).unwrap();
        for part in [Part::Hor, Part::Ver, Part::Full] {
            let r = lambda_boundary(1.3, 0.4, &params, 0.0, part).unwrap();
            assert_eq!((r.value, r.regime), (Extended::ZERO, Regime::Bulk));
            let f = |x| lambda_boundary(1.0, 1.0, &params, x, part).unwrap().value.to_f64();
            for k in 1..20 {
                let x = 0.05 * k as f64;
                assert!(f(x - 0.02) + f(x + 0.02) - 2.0 * f(x) >= -1e-9);
            }
        }
    }

    #[test]
    fn horizontal_part_increases_with_u() {
        let p = 0.25;
        let (s, t, xi) = (1.0, 0.05, 0.1);
        let mut prev = f64::NEG_INFINITY;
        for k in 1..=30 {
            let u = p + (1.0 - p) * k as f64 / 30.0;
            let params = validate_params(p, Some(u)).unwrap();
            let r = lambda_boundary(s, t, &params, xi, Part::Hor).unwrap();
            if r.regime == Regime::BoundaryHor {
                assert!(r.value.to_f64() >= prev);
                prev = r.value.to_f64();
            }
        }
        assert!(prev.is_finite());
    }
}
