//! Law-of-large-numbers limits of the passage time.

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Result};
use crate::lattice::FirstStep;
use crate::optimize::{minimize_convex, Minimum};
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    StrictConcave,
    FlatEdge,
    BoundaryDominated,
    BulkDominated,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::StrictConcave => "strict_concave",
            Branch::FlatEdge => "flat_edge",
            Branch::BoundaryDominated => "boundary_dominated",
            Branch::BulkDominated => "bulk_dominated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeResult {
    pub value: f64,
    pub branch: Branch,
    pub minimizer_u: Option<f64>,
}

pub(crate) fn check_direction(s: f64, t: f64) -> Result<()> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(out_of_range("s", s, "finite s >= 0"));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(out_of_range("t", t, "finite t >= 0"));
    }
    if s == 0.0 && t == 0.0 {
        return Err(out_of_range("s + t", 0.0, "(s, t) != (0, 0)"));
    }
    Ok(())
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(out_of_range("p", p, "0 < p < 1"))
    }
}

/// `t >= s (1 - p) / p`, written without division.
#[inline]
pub(crate) fn in_flat_edge(s: f64, t: f64, p: f64) -> bool {
    p * t >= s * (1.0 - p)
}

/// Shape function of the i.i.d. model: `(√(ps) + √((1-p)t))² - t` below the
/// flat edge and `s` on it. The minimizer is the boundary parameter `u*` that
/// attains the variational formula.
pub fn gpp(s: f64, t: f64, p: f64) -> Result<ShapeResult> {
    check_direction(s, t)?;
    check_p(p)?;
    if in_flat_edge(s, t, p) {
        return Ok(ShapeResult {
            value: s,
            branch: Branch::FlatEdge,
            minimizer_u: Some(1.0),
        });
    }
    // expanded to avoid cancelling `t`
    let value = p * s - p * t + 2.0 * (p * (1.0 - p) * s * t).sqrt();
    Ok(ShapeResult {
        value,
        branch: Branch::StrictConcave,
        minimizer_u: Some(p + (t * p * (1.0 - p) / s).sqrt()),
    })
}

pub(crate) fn gpp_value(s: f64, t: f64, p: f64) -> f64 {
    if in_flat_edge(s, t, p) {
        s
    } else {
        p * s - p * t + 2.0 * (p * (1.0 - p) * s * t).sqrt()
    }
}

/// Shape function of the boundary model, `s u + t p(1-u)/(u-p)`.
pub fn gpp_boundary(s: f64, t: f64, params: &ModelParams) -> Result<f64> {
    let u = params.require_u()?;
    if !(s >= 0.0 && t >= 0.0) {
        return Err(out_of_range("s, t", s.min(t), "s, t >= 0"));
    }
    Ok(s * u + t * params.mean_vertical()?)
}

/// Slope `(u-p)² / (p(1-p))` of the characteristic direction.
pub fn characteristic_slope(params: &ModelParams) -> Result<f64> {
    let u = params.require_u()?;
    let p = params.p();
    Ok((u - p) * (u - p) / (p * (1.0 - p)))
}

pub fn characteristic_direction(params: &ModelParams) -> Result<(f64, f64)> {
    Ok((1.0, characteristic_slope(params)?))
}

/// Limit shape of the boundary model restricted to paths whose first step is
/// `first_step`. Each restriction follows the boundary shape on its own side of
/// the characteristic direction and the i.i.d. shape on the other.
pub fn gpp_restricted(
    s: f64,
    t: f64,
    params: &ModelParams,
    first_step: FirstStep,
) -> Result<ShapeResult> {
    check_direction(s, t)?;
    let slope_t = characteristic_slope(params)? * s;
    let boundary_side = match first_step {
        FirstStep::Horizontal => t < slope_t,
        FirstStep::Vertical => t > slope_t,
    };
    if boundary_side {
        Ok(ShapeResult {
            value: gpp_boundary(s, t, params)?,
            branch: Branch::BoundaryDominated,
            minimizer_u: params.u(),
        })
    } else {
        let bulk = gpp(s, t, params.p())?;
        Ok(ShapeResult {
            value: bulk.value,
            branch: Branch::BulkDominated,
            minimizer_u: bulk.minimizer_u,
        })
    }
}

/// Minimizes `s h(v) + t g(v)` over `(a, b]` to tolerance `1e-10` in `v`.
/// Reports whether the minimum is interior or sits at `b` because the
/// derivative is negative throughout.
pub fn minimize_scalarized(
    h: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    s: f64,
    t: f64,
    a: f64,
    b: f64,
) -> Result<Minimum> {
    let f = |v: f64| {
        // 0 · ∞ = 0 for the vanishing weight
        let hv = if s == 0.0 { 0.0 } else { s * h(v) };
        let gv = if t == 0.0 { 0.0 } else { t * g(v) };
        hv + gv
    };
    minimize_convex(f, a, b, 1e-10)
}

/// The i.i.d. shape as `inf_{p<u<=1}` of the boundary shape.
pub fn variational_gpp(s: f64, t: f64, p: f64) -> Result<ShapeResult> {
    check_direction(s, t)?;
    check_p(p)?;
    let h = |u: f64| u;
    let g = |u: f64| if u <= p { f64::INFINITY } else { p * (1.0 - u) / (u - p) };
    let m = minimize_scalarized(h, g, s, t, p, 1.0)?;
    Ok(ShapeResult {
        value: m.value,
        branch: if in_flat_edge(s, t, p) {
            Branch::FlatEdge
        } else {
            Branch::StrictConcave
        },
        minimizer_u: Some(m.argmin),
    })
}

/// Converts an LPP value into the first-passage value
/// `(lambda - kappa) g + kappa m + tau0 n` of the associated two-valued model.
pub fn translate_first_passage(
    g_value: f64,
    kappa: f64,
    lambda: f64,
    tau0: f64,
    m: f64,
    n: f64,
) -> Result<f64> {
    if kappa <= lambda {
        return Err(out_of_range("kappa", kappa, "kappa > lambda"));
    }
    Ok((lambda - kappa) * g_value + kappa * m + tau0 * n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::optimize::MinimizerCase;
    use crate::params::validate_params;
    use approx::assert_abs_diff_eq;

    const SQRT3_2: f64 = 0.866_025_403_784_438_6;

    #[test]
    fn gpp_examples() {
        let r = gpp(1.0, 1.0, 0.25).unwrap();
        assert_abs_diff_eq!(r.value, SQRT3_2, epsilon = 1e-15);
        assert_eq!(r.branch, Branch::StrictConcave);
        let r = gpp(1.0, 3.0, 0.5).unwrap();
        assert_eq!((r.value, r.branch), (1.0, Branch::FlatEdge));
        assert_abs_diff_eq!(gpp(1.0, 0.0, 0.25).unwrap().value, 0.25, epsilon = 1e-15);
        assert!(gpp(0.0, 0.0, 0.25).is_err());
        assert!(gpp(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn gpp_matches_the_unexpanded_formula() {
        for &(s, t, p) in &[(1.0f64, 1.0f64, 0.25f64), (2.0, 0.3, 0.6), (0.5, 0.1, 0.1)] {
            let direct = ((p * s).sqrt() + ((1.0 - p) * t).sqrt()).powi(2) - t;
            assert_abs_diff_eq!(gpp(s, t, p).unwrap().value, direct, epsilon = 1e-14);
        }
    }

    #[test]
    fn homogeneity_and_concavity() {
        for &p in &[0.1, 0.25, 0.5, 0.9] {
            for k in 0..20 {
                let (s, t) = (0.1 + 0.2 * k as f64, 2.0 - 0.09 * k as f64);
                let g = gpp(s, t, p).unwrap().value;
                assert_abs_diff_eq!(gpp(3.5 * s, 3.5 * t, p).unwrap().value, 3.5 * g, epsilon = 1e-12);
                let (s2, t2) = (t, s + 0.3);
                let mid = gpp(0.5 * (s + s2), 0.5 * (t + t2), p).unwrap().value;
                assert!(mid >= 0.5 * (g + gpp(s2, t2, p).unwrap().value) - 1e-10);
            }
        }
    }

    #[test]
    fn boundary_shape() {
        let params = validate_params(0.25, Some(0.5)).unwrap();
        assert_abs_diff_eq!(gpp_boundary(1.0, 1.0, &params).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(gpp_boundary(2.0, 0.0, &params).unwrap(), 1.0, epsilon = 1e-15);
        let one = validate_params(0.25, Some(1.0)).unwrap();
        assert_eq!(gpp_boundary(1.7, 3.0, &one).unwrap(), 1.7);
        assert_eq!(
            gpp_boundary(1.0, 1.0, &validate_params(0.25, None).unwrap()),
            Err(Error::MissingBoundaryParam)
        );
    }

    #[test]
    fn domination_with_equality_at_the_minimizer() {
        for &p in &[0.1, 0.25, 0.5] {
            for &(s, t) in &[(1.0, 1.0), (1.0, 0.2), (0.3, 2.0), (2.0, 0.05)] {
                let g = gpp(s, t, p).unwrap();
                for k in 1..=40 {
                    let u = p + (1.0 - p) * k as f64 / 40.0;
                    let b = gpp_boundary(s, t, &validate_params(p, Some(u)).unwrap()).unwrap();
                    assert!(g.value <= b + 1e-12);
                }
                let u_star = g.minimizer_u.unwrap().min(1.0);
                let b = gpp_boundary(s, t, &validate_params(p, Some(u_star)).unwrap()).unwrap();
                assert_abs_diff_eq!(g.value, b, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn characteristic_direction_examples() {
        let d = characteristic_direction(&validate_params(0.25, Some(0.5)).unwrap()).unwrap();
        assert_abs_diff_eq!(d.1, 1.0 / 3.0, epsilon = 1e-15);
        let d = characteristic_direction(&validate_params(0.5, Some(1.0)).unwrap()).unwrap();
        assert_eq!(d, (1.0, 1.0));
        let d = characteristic_direction(&validate_params(0.25, Some(0.25 + 1e-9)).unwrap()).unwrap();
        assert!(d.1 < 1e-16);
    }

    #[test]
    fn restricted_shapes() {
        let params = validate_params(0.25, Some(0.5)).unwrap();
        let hor = gpp_restricted(1.0, 0.1, &params, FirstStep::Horizontal).unwrap();
        assert_eq!(hor.branch, Branch::BoundaryDominated);
        assert_abs_diff_eq!(hor.value, 0.55, epsilon = 1e-15);
        let ver = gpp_restricted(1.0, 0.1, &params, FirstStep::Vertical).unwrap();
        assert_eq!(ver.branch, Branch::BulkDominated);
        assert!(ver.value <= hor.value);

        // on the characteristic line every formula agrees
        for &(p, u) in &[(0.25, 0.5), (0.1, 0.9), (0.5, 0.75)] {
            let params = validate_params(p, Some(u)).unwrap();
            for &s in &[0.5, 1.0, 3.0] {
                let t = characteristic_slope(&params).unwrap() * s;
                let b = gpp_boundary(s, t, &params).unwrap();
                let g = gpp(s, t, p).unwrap().value;
                assert_abs_diff_eq!(b, g, epsilon = 1e-9);
                for step in [FirstStep::Horizontal, FirstStep::Vertical] {
                    assert_abs_diff_eq!(gpp_restricted(s, t, &params, step).unwrap().value, g, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn the_larger_restriction_is_the_boundary_shape() {
        let params = validate_params(0.25, Some(0.5)).unwrap();
        for k in 0..30 {
            let t = 0.05 * k as f64;
            let hor = gpp_restricted(1.0, t, &params, FirstStep::Horizontal).unwrap().value;
            let ver = gpp_restricted(1.0, t, &params, FirstStep::Vertical).unwrap().value;
            assert_abs_diff_eq!(hor.max(ver), gpp_boundary(1.0, t, &params).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn scalarized_minimizer_examples() {
        let p = 0.25;
        let g = |v: f64| if v <= p { f64::INFINITY } else { p * (1.0 - v) / (v - p) };
        let m = minimize_scalarized(|v| v, g, 1.0, 1.0, p, 1.0).unwrap();
        assert_abs_diff_eq!(m.argmin, 0.683_012_701_892_219, epsilon = 1e-8);
        assert_abs_diff_eq!(m.value, SQRT3_2, epsilon = 1e-12);
        assert_eq!(m.case, MinimizerCase::Interior);

        // critical slope -h'(1)/g'(1) = (1-p)/p = 3
        let m = minimize_scalarized(|v| v, g, 1.0, 3.5, p, 1.0).unwrap();
        assert_eq!((m.argmin, m.case), (1.0, MinimizerCase::Boundary));
        let m = minimize_scalarized(|v| v, g, 1.0, 0.0, p, 1.0).unwrap();
        assert!(m.argmin - p < 1e-6);
    }

    #[test]
    fn variational_formula_recovers_gpp() {
        let r = variational_gpp(1.0, 1.0, 0.25).unwrap();
        assert_abs_diff_eq!(r.value, SQRT3_2, epsilon = 1e-12);
        assert_abs_diff_eq!(r.minimizer_u.unwrap(), 0.683_012_701_892_219, epsilon = 1e-8);
        let flat = variational_gpp(1.0, 3.0, 0.5).unwrap();
        assert_eq!(flat.branch, Branch::FlatEdge);
        assert_eq!(flat.minimizer_u, Some(1.0));
        assert_abs_diff_eq!(flat.value, 1.0, epsilon = 1e-15);

        for &p in &[0.1, 0.3, 0.5, 0.8] {
            for &(s, t) in &[(1.0, 2.0), (2.0, 1.0), (0.4, 0.1), (0.1, 0.4)] {
                let v = variational_gpp(s, t, p).unwrap();
                let c = gpp(s, t, p).unwrap();
                assert_abs_diff_eq!(v.value, c.value, epsilon = 1e-10);
                assert_abs_diff_eq!(v.minimizer_u.unwrap(), c.minimizer_u.unwrap().min(1.0), epsilon = 1e-7);
            }
        }
        // not symmetric in (s, t) away from the diagonal
        assert!((gpp(1.0, 2.0, 0.25).unwrap().value - gpp(2.0, 1.0, 0.25).unwrap().value).abs() > 0.1);
    }

    #[test]
    fn first_passage_translation() {
        assert_eq!(translate_first_passage(0.0, 1.0, 0.0, 0.0, 5.0, 3.0).unwrap(), 5.0);
        assert_eq!(translate_first_passage(5.0, 1.0, 0.0, 0.0, 5.0, 3.0).unwrap(), 0.0);
        assert_eq!(translate_first_passage(2.0, 3.0, 1.0, 0.5, 4.0, 2.0).unwrap(), 9.0);
        assert!(translate_first_passage(2.0, 1.0, 1.0, 0.5, 4.0, 2.0).is_err());
    }
}
