//! Rate-function calculus: the dual `J*` of the right-tail rate, its
//! minimizer `u*`, the rate function `I`, the boundary duals `kappa_a`, the
//! functions `H^{a,b}` and the whole-pipeline identity check.

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::extended::Extended;
use crate::optimize::{bisect_decreasing, minimize_convex};
use crate::params::{
    bernoulli_cgf_slope, bernoulli_cgf_unchecked, bernoulli_rate_unchecked, cosh_gap,
    geometric_cgf_slope, geometric_cgf_with, ModelParams,
};
use crate::shape::{check_direction, check_p, gpp_value, in_flat_edge, minimize_scalarized};

/// Default cap of the Legendre search in [`rate_i`].
pub const XI_MAX: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JstarMethod {
    Closed,
    Variational,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JstarValue {
    pub value: f64,
    pub u_star: Option<f64>,
    pub flat: bool,
}

/// Convex dual `J*_{s,t}(xi)` of the right-tail rate for `xi >= 0`.
pub fn jstar(s: f64, t: f64, p: f64, xi: f64, method: JstarMethod) -> Result<JstarValue> {
    check_direction(s, t)?;
    check_p(p)?;
    if !(xi >= 0.0 && xi.is_finite()) {
        return Err(out_of_range("xi", xi, "finite xi >= 0"));
    }
    let flat = in_flat_edge(s, t, p);
    if flat && method == JstarMethod::Closed {
        return Ok(JstarValue {
            value: s * xi,
            u_star: Some(1.0),
            flat: true,
        });
    }
    if xi == 0.0 && !flat {
        return Ok(JstarValue {
            value: 0.0,
            u_star: Some(p + (t * p * (1.0 - p) / s).sqrt()),
            flat: false,
        });
    }
    match method {
        JstarMethod::Closed => Ok(JstarValue {
            value: jstar_closed(s, t, p, xi),
            u_star: Some(ustar_unchecked(s, t, p, xi)),
            flat: false,
        }),
        JstarMethod::Variational => {
            let objective = |u: f64| {
                if u <= p {
                    return f64::INFINITY;
                }
                let tail = p * (1.0 - u) / (u * (1.0 - p));
                let rho = (u - p) / (u * (1.0 - p));
                let geo = geometric_cgf_with(rho, tail, -xi).to_f64();
                let geo_term = if t == 0.0 { 0.0 } else { t * geo };
                s * bernoulli_cgf_unchecked(u, xi) - geo_term
            };
            let m = minimize_scalarized(objective, |_| 0.0, 1.0, 0.0, p, 1.0)?;
            Ok(JstarValue {
                value: m.value,
                u_star: Some(m.argmin),
                flat,
            })
        }
    }
}

/// Closed form below the flat edge, for `xi > 0`.
fn jstar_closed(s: f64, t: f64, p: f64, xi: f64) -> f64 {
    let q = p * (1.0 - p);
    let c = cosh_gap(xi);
    let sd = delta_sqrt(s, t, p, c);
    let big_a = q * (s + t) * c;
    let ln_e = (-p * -(-xi).exp_m1()).ln_1p();
    let term_s = ((big_a + sd) / (2.0 * s)).ln_1p() - ln_e;
    let term_t = if t == 0.0 {
        0.0
    } else {
        (2.0 * s * q * c / (q * (t - s) * c + sd)).ln_1p() + ln_e
    };
    s * term_s + t * term_t
}

/// `√Δ`, factored so it cannot overflow before `Δ` itself would.
fn delta_sqrt(s: f64, t: f64, p: f64, c: f64) -> f64 {
    let q = p * (1.0 - p);
    (q * c).sqrt() * (q * (s + t) * (s + t) * c + 4.0 * s * t).sqrt()
}

/// The discriminant `Δ = p(1-p) c [p(1-p)(s+t)² c + 4st]` with
/// `c = e^xi + e^-xi - 2`.
pub fn delta(s: f64, t: f64, p: f64, xi: f64) -> f64 {
    let q = p * (1.0 - p);
    let c = cosh_gap(xi);
    q * c * (q * (s + t) * (s + t) * c + 4.0 * s * t)
}

/// Minimizing boundary parameter of the variational formula for `J*`.
pub fn ustar(s: f64, t: f64, p: f64, xi: f64) -> Result<f64> {
    check_direction(s, t)?;
    check_p(p)?;
    if in_flat_edge(s, t, p) {
        return Err(Error::FlatRegime { s, t });
    }
    if !(xi >= 0.0 && xi.is_finite()) {
        return Err(out_of_range("xi", xi, "finite xi >= 0"));
    }
    if xi == 0.0 {
        return Ok(p + (t * p * (1.0 - p) / s).sqrt());
    }
    Ok(ustar_unchecked(s, t, p, xi))
}

fn ustar_unchecked(s: f64, t: f64, p: f64, xi: f64) -> f64 {
    let q = p * (1.0 - p);
    let (up, down) = (xi.exp_m1(), -(-xi).exp_m1());
    let c = up * down;
    let num = q * (s + t) * c + 2.0 * s * p * down + delta_sqrt(s, t, p, c);
    let den = 2.0 * s * ((1.0 - p) * up + p * down);
    (num / den).min(1.0)
}

/// `d/dxi J*(xi)` for `xi >= 0`, by the envelope theorem at `u*`.
/// Equals the shape function at `xi = 0` and increases to `s`.
pub fn jstar_derivative(s: f64, t: f64, p: f64, xi: f64) -> Result<f64> {
    check_direction(s, t)?;
    check_p(p)?;
    if in_flat_edge(s, t, p) {
        return Ok(s);
    }
    Ok(jstar_slope(s, t, p, xi))
}

fn jstar_slope(s: f64, t: f64, p: f64, xi: f64) -> f64 {
    if xi == 0.0 {
        return gpp_value(s, t, p);
    }
    let u = ustar_unchecked(s, t, p, xi);
    let tail = p * (1.0 - u) / (u * (1.0 - p));
    s * bernoulli_cgf_slope(u, xi) + t * geometric_cgf_slope(tail, -xi)
}

/// Dual of the full rate function: `xi gpp` for `xi < 0` and `J*` otherwise.
pub fn istar(s: f64, t: f64, p: f64, xi: f64) -> Result<f64> {
    check_direction(s, t)?;
    check_p(p)?;
    if xi < 0.0 {
        Ok(xi * gpp_value(s, t, p))
    } else {
        Ok(jstar(s, t, p, xi, JstarMethod::Closed)?.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateValue {
    pub value: Extended,
    /// Maximizing `xi` of the Legendre transform, when one was searched for.
    pub argmax_xi: Option<f64>,
    /// The maximizer reached `xi_max`: `r` is so close to `s` that the value
    /// is only a lower bound of the limit.
    pub saturated: bool,
}

impl RateValue {
    fn exact(value: Extended) -> Self {
        RateValue {
            value,
            argmax_xi: None,
            saturated: false,
        }
    }
}

/// Rate function `I_{s,t}(r)`: the Legendre transform of `J*` on
/// `[gpp, s]` and infinite elsewhere.
pub fn rate_i(s: f64, t: f64, p: f64, r: f64, xi_max: f64) -> Result<RateValue> {
    check_direction(s, t)?;
    check_p(p)?;
    if !(xi_max > 0.0) {
        return Err(out_of_range("xi_max", xi_max, "xi_max > 0"));
    }
    let g = gpp_value(s, t, p);
    if r < g || r > s || r.is_nan() {
        return Ok(RateValue::exact(Extended::Infinite));
    }
    if in_flat_edge(s, t, p) {
        return Ok(RateValue::exact(Extended::ZERO));
    }
    if t == 0.0 {
        return Ok(RateValue::exact(bernoulli_rate_unchecked(p, r / s).scale(s)));
    }
    let xi = bisect_decreasing(|x| r - jstar_slope(s, t, p, x), 0.0, xi_max, 1e-15);
    let value = (r * xi - jstar_closed_or_zero(s, t, p, xi)).max(0.0);
    Ok(RateValue {
        value: Extended::Finite(value),
        argmax_xi: Some(xi),
        saturated: xi >= xi_max * (1.0 - 1e-9),
    })
}

fn jstar_closed_or_zero(s: f64, t: f64, p: f64, xi: f64) -> f64 {
    if xi == 0.0 {
        0.0
    } else {
        jstar_closed(s, t, p, xi)
    }
}

/// Right-tail rate of `G` on an `s x t` rectangle, allowing degenerate sides:
/// zero up to the shape value and infinite beyond `s`.
pub fn right_tail_rate(s: f64, t: f64, p: f64, y: f64) -> Result<Extended> {
    if s == 0.0 {
        return Ok(if y <= 0.0 {
            Extended::ZERO
        } else {
            Extended::Infinite
        });
    }
    if y <= gpp_value(s, t, p) {
        return Ok(Extended::ZERO);
    }
    Ok(rate_i(s, t, p, y, XI_MAX)?.value)
}

/// `J*` and `u*` along a grid of `xi >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCurve {
    pub xi: Vec<f64>,
    pub jstar: Vec<f64>,
    pub u_star: Vec<Option<f64>>,
    pub flat: Vec<bool>,
}

pub fn dual_curve(s: f64, t: f64, p: f64, xis: &[f64]) -> Result<DualCurve> {
    let mut curve = DualCurve {
        xi: Vec::with_capacity(xis.len()),
        jstar: Vec::with_capacity(xis.len()),
        u_star: Vec::with_capacity(xis.len()),
        flat: Vec::with_capacity(xis.len()),
    };
    for &xi in xis {
        let j = jstar(s, t, p, xi, JstarMethod::Closed)?;
        curve.xi.push(xi);
        curve.jstar.push(j.value);
        curve.u_star.push(j.u_star);
        curve.flat.push(j.flat);
    }
    Ok(curve)
}

fn check_a(a: f64, t: f64) -> Result<()> {
    if a >= -t && a.is_finite() {
        Ok(())
    } else {
        Err(out_of_range("a", a, "a >= -t"))
    }
}

/// `kappa*_a(xi)`: the dual of the boundary contribution when the path leaves
/// the axes at macroscopic position `a` (negative: up the vertical axis).
pub fn kappa_dual(a: f64, t: f64, params: &ModelParams, xi: f64) -> Result<Extended> {
    check_a(a, t)?;
    let u = params.require_u()?;
    let rho = params.require_rho()?;
    let tail = params.one_minus_rho()?;
    let geo = geometric_cgf_with(rho, tail, -xi);
    Ok(if a <= 0.0 {
        geo.scale(t + a)
    } else {
        geo.scale(t) + a * bernoulli_cgf_unchecked(u, xi)
    })
}

/// Rightmost zero of `kappa_a`: the derivative of `kappa*_a` at zero,
/// `-(t+a) E[J]` for `a <= 0` and `a u - t E[J]` otherwise, with
/// `E[J] = p(1-u)/(u-p)`.
pub fn m_kappa(a: f64, t: f64, params: &ModelParams) -> Result<f64> {
    check_a(a, t)?;
    let u = params.require_u()?;
    let mean = params.mean_vertical()?;
    Ok(if a <= 0.0 {
        -(t + a) * mean
    } else {
        a * u - t * mean
    })
}

/// Largest `x` with `kappa_a(x)` finite, and the value there.
fn kappa_upper(a: f64, t: f64, params: &ModelParams) -> Result<(f64, f64)> {
    let u = params.require_u()?;
    let ln_rho = params.require_rho()?.ln();
    Ok(if a <= 0.0 {
        (0.0, -(t + a) * ln_rho)
    } else {
        (a, -a * u.ln() - t * ln_rho)
    })
}

fn kappa_dual_slope(a: f64, t: f64, u: f64, tail: f64, xi: f64) -> f64 {
    let geo = -geometric_cgf_slope(tail, -xi);
    if a <= 0.0 {
        (t + a) * geo
    } else {
        t * geo + a * bernoulli_cgf_slope(u, xi)
    }
}

/// `kappa_a(x) = sup_{xi >= 0} {x xi - kappa*_a(xi)}`.
pub fn kappa_rate(a: f64, t: f64, params: &ModelParams, x: f64) -> Result<Extended> {
    let m = m_kappa(a, t, params)?;
    if x <= m {
        return Ok(Extended::ZERO);
    }
    let (upper, at_upper) = kappa_upper(a, t, params)?;
    if x > upper {
        return Ok(Extended::Infinite);
    }
    if x == upper {
        return Ok(Extended::Finite(at_upper));
    }
    let u = params.require_u()?;
    let tail = params.one_minus_rho()?;
    let slope = |xi: f64| kappa_dual_slope(a, t, u, tail, xi);
    let mut hi = 1.0;
    while slope(hi) < x && hi < 700.0 {
        hi *= 2.0;
    }
    let xi = bisect_decreasing(|z| x - slope(z), 0.0, hi.min(700.0), 1e-15);
    let dual = kappa_dual(a, t, params, xi)?.to_f64();
    Ok(Extended::Finite((x * xi - dual).max(0.0)))
}

/// Rectangle left for the bulk after leaving the axes at `b`.
fn shifted_rectangle(b: f64, s: f64, t: f64) -> (f64, f64) {
    if b <= 0.0 {
        (s, t + b)
    } else {
        (s - b, t)
    }
}

/// `H^{a,b}(r)`: right-tail rate of the boundary contribution at `a` plus the
/// bulk passage time from the exit point `b` to `(s, t)`, combined by infimal
/// convolution.
pub fn h_rate(a: f64, b: f64, s: f64, t: f64, params: &ModelParams, r: f64) -> Result<Extended> {
    check_direction(s, t)?;
    for (name, v) in [("a", a), ("b", b)] {
        if !(v >= -t && v <= s) {
            return Err(out_of_range(name, v, "-t <= a, b <= s"));
        }
    }
    let p = params.p();
    let (s2, t2) = shifted_rectangle(b, s, t);
    let m_k = m_kappa(a, t, params)?;
    let m_j = if s2 == 0.0 { 0.0 } else { gpp_value(s2, t2, p) };
    if r <= m_k + m_j {
        return Ok(Extended::ZERO);
    }
    let (upper, _) = kappa_upper(a, t, params)?;
    let lo = m_k.max(r - s2);
    let hi = (r - m_j).min(upper);
    if lo > hi {
        return Ok(Extended::Infinite);
    }
    let objective = |x: f64| -> f64 {
        let k = kappa_rate(a, t, params, x).map(Extended::to_f64).unwrap_or(f64::INFINITY);
        let j = right_tail_rate(s2, t2, p, r - x).map(Extended::to_f64).unwrap_or(f64::INFINITY);
        k + j
    };
    if hi - lo <= 1e-13 * (1.0 + r.abs()) {
        return Ok(Extended::from_f64(objective(lo).min(objective(hi))));
    }
    let m = minimize_convex(objective, lo, hi, 1e-12)?;
    Ok(Extended::from_f64(m.value.min(objective(lo))))
}

/// `|s I_B^{(u)}(r/s) - min_a H^{a,a}(r)|` over an `a_grid_size`-point uniform
/// grid on `[-t, s]`.
pub fn rlem_gap(s: f64, t: f64, params: &ModelParams, r: f64, a_grid_size: usize) -> Result<RlemReport> {
    check_direction(s, t)?;
    let u = params.require_u()?;
    if !(0.0..=s).contains(&r) {
        return Err(out_of_range("r", r, "0 <= r <= s"));
    }
    if a_grid_size < 2 {
        return Err(out_of_range("a_grid_size", a_grid_size as f64, ">= 2"));
    }
    let left = bernoulli_rate_unchecked(u, r / s).scale(s);
    let mut best = Extended::Infinite;
    let mut best_a = -t;
    for k in 0..a_grid_size {
        let a = -t + (s + t) * k as f64 / (a_grid_size - 1) as f64;
        let h = h_rate(a, a, s, t, params, r)?;
        if h < best {
            best = h;
            best_a = a;
        }
    }
    let gap = match (left, best) {
        (Extended::Finite(x), Extended::Finite(y)) => (x - y).abs(),
        (Extended::Infinite, Extended::Infinite) => 0.0,
        _ => f64::INFINITY,
    };
    Ok(RlemReport {
        left,
        right: best,
        argmin_a: best_a,
        gap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RlemReport {
    /// `s I_B^{(u)}(r/s)`.
    pub left: Extended,
    /// `min_a H^{a,a}(r)` over the grid.
    pub right: Extended,
    pub argmin_a: f64,
    pub gap: f64,
}

/// A function sampled on the uniform grid `x0 + k step`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    pub x0: f64,
    pub step: f64,
    pub values: Vec<Extended>,
}

impl SampledFunction {
    pub fn from_fn(x0: f64, step: f64, len: usize, f: impl Fn(f64) -> Extended) -> Self {
        let values = (0..len).map(|k| f(x0 + step * k as f64)).collect();
        SampledFunction { x0, step, values }
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x0 + self.step * k as f64
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index of the grid point nearest to `x`, if it lies on the grid's span.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let k = ((x - self.x0) / self.step).round();
        (k >= 0.0 && (k as usize) < self.len()).then_some(k as usize)
    }

    /// Largest grid point where the function vanishes.
    pub fn rightmost_zero(&self) -> Option<usize> {
        self.values.iter().rposition(|v| *v == Extended::ZERO)
    }

    /// `sup_k {x_k xi - f(x_k)}` over the finite samples.
    pub fn legendre(&self, xi: f64) -> Extended {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(k, v)| v.finite().map(|f| self.x(k) * xi - f))
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
            .map_or(Extended::Infinite, Extended::Finite)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvolutionMode {
    /// Minimum over every split of the grid.
    General,
    /// Right-tail rates: zero up to the sum of the rightmost zeros, and the
    /// first argument restricted to `[z_f, r - z_g]` beyond it.
    RightTail,
}

/// Infimal convolution `(f □ g)(r) = min_x f(x) + g(r - x)` on the grid
/// `f.x0 + g.x0 + k step`.
pub fn inf_convolution(
    f: &SampledFunction,
    g: &SampledFunction,
    mode: ConvolutionMode,
) -> Result<SampledFunction> {
    if f.is_empty() || g.is_empty() {
        return Err(Error::GridMismatch("empty sample".into()));
    }
    if (f.step - g.step).abs() > 1e-12 * f.step.abs().max(g.step.abs()) || !(f.step > 0.0) {
        return Err(Error::GridMismatch(format!("steps {} and {} differ", f.step, g.step)));
    }
    let zeros = match mode {
        ConvolutionMode::General => None,
        ConvolutionMode::RightTail => {
            let zf = f.rightmost_zero().ok_or_else(|| Error::GridMismatch("first function has no zero".into()))?;
            let zg = g.rightmost_zero().ok_or_else(|| Error::GridMismatch("second function has no zero".into()))?;
            Some((zf, zg))
        }
    };
    let len = f.len() + g.len() - 1;
    let values = (0..len)
        .map(|k| {
            let (mut i_lo, mut i_hi) = (k.saturating_sub(g.len() - 1), k.min(f.len() - 1));
            if let Some((zf, zg)) = zeros {
                if k <= zf + zg {
                    return Extended::ZERO;
                }
                i_lo = i_lo.max(zf);
                i_hi = i_hi.min(k - zg);
            }
            (i_lo..=i_hi)
                .map(|i| f.values[i] + g.values[k - i])
                .fold(Extended::Infinite, Extended::min)
        })
        .collect();
    Ok(SampledFunction {
        x0: f.x0 + g.x0,
        step: f.step,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::validate_params;
    use crate::shape::gpp;
    use approx::assert_abs_diff_eq;

    const SQRT3_2: f64 = 0.866_025_403_784_438_6;

    #[test]
    fn jstar_examples() {
        let flat = jstar(1.0, 2.0, 0.5, 1.0, JstarMethod::Closed).unwrap();
        assert_eq!((flat.value, flat.flat), (1.0, true));
        for &(s, t, p) in &[(1.0, 1.0, 0.25), (2.0, 1.0, 0.5), (1.0, 9.0, 0.5)] {
            assert_eq!(jstar(s, t, p, 0.0, JstarMethod::Closed).unwrap().value, 0.0);
            assert_eq!(jstar(s, t, p, 0.0, JstarMethod::Variational).unwrap().value, 0.0);
        }
        let c = jstar(2.0, 1.0, 0.5, 1.0, JstarMethod::Closed).unwrap();
        let v = jstar(2.0, 1.0, 0.5, 1.0, JstarMethod::Variational).unwrap();
        assert_abs_diff_eq!(c.value, v.value, epsilon = 1e-8);
        assert_abs_diff_eq!(c.u_star.unwrap(), v.u_star.unwrap(), epsilon = 1e-7);
        assert!(jstar(1.0, 1.0, 0.25, -0.1, JstarMethod::Closed).is_err());
    }

    #[test]
    fn jstar_closed_matches_variational_on_a_grid() {
        for &p in &[0.1, 0.25, 0.5, 0.75] {
            for i in 1..=5 {
                for j in 0..=5 {
                    let s = 0.4 * i as f64;
                    let t = s * (1.0 - p) / p * j as f64 / 6.0;
                    for &xi in &[1e-4, 0.01, 0.3, 1.0, 2.5, 6.0] {
                        let c = jstar(s, t, p, xi, JstarMethod::Closed).unwrap();
                        let v = jstar(s, t, p, xi, JstarMethod::Variational).unwrap();
                        assert!((c.value - v.value).abs() < 1e-8, "{s} {t} {p} {xi}: {} {}", c.value, v.value);
                        assert!(c.value <= s * xi + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn t_zero_is_the_bernoulli_cgf() {
        for &xi in &[0.01, 1.0, 4.0] {
            let j = jstar(2.0, 0.0, 0.3, xi, JstarMethod::Closed).unwrap().value;
            assert_abs_diff_eq!(j, 2.0 * bernoulli_cgf_unchecked(0.3, xi), epsilon = 1e-13);
            assert_abs_diff_eq!(ustar(2.0, 0.0, 0.3, xi).unwrap(), 0.3, epsilon = 1e-13);
        }
    }

    #[test]
    fn ustar_properties() {
        let p: f64 = 0.25;
        let lim = p + (p * (1.0 - p)).sqrt();
        assert_abs_diff_eq!(ustar(1.0, 1.0, p, 1e-7).unwrap(), lim, epsilon = 1e-6);
        assert_abs_diff_eq!(ustar(1.0, 1.0, p, 0.0).unwrap(), 0.683_012_701_892_219, epsilon = 1e-12);
        assert!(matches!(ustar(1.0, 3.0, p, 1.0), Err(Error::FlatRegime { .. })));
        for &p in &[0.1, 0.5, 0.9] {
            for k in 1..=10 {
                let t = (1.0 - p) / p * k as f64 / 10.5;
                for &xi in &[1e-3, 0.5, 3.0, 20.0] {
                    let u = ustar(1.0, t, p, xi).unwrap();
                    assert!(u > p && u <= 1.0, "{p} {t} {xi}: {u}");
                    assert!(delta(1.0, t, p, xi) >= 0.0);
                }
            }
        }
    }

    #[test]
    fn convexity_in_xi_and_concavity_in_direction() {
        let p = 0.25;
        for k in 1..40 {
            let xi = 0.1 * k as f64;
            let f = |x| jstar(1.0, 1.0, p, x, JstarMethod::Closed).unwrap().value;
            assert!(f(xi - 0.05) + f(xi + 0.05) - 2.0 * f(xi) >= -1e-9);
            let g = |s: f64, t: f64| jstar(s, t, p, xi, JstarMethod::Closed).unwrap().value;
            assert!(g(1.0, 0.5) - 0.5 * (g(0.8, 0.2) + g(1.2, 0.8)) >= -1e-9);
        }
    }

    #[test]
    fn istar_branches() {
        assert_abs_diff_eq!(istar(1.0, 1.0, 0.25, -1.0).unwrap(), -SQRT3_2, epsilon = 1e-15);
        assert_eq!(istar(1.0, 1.0, 0.25, 0.0).unwrap(), 0.0);
        let h = 1e-6;
        let right = istar(1.0, 1.0, 0.25, h).unwrap() / h;
        assert_abs_diff_eq!(right, SQRT3_2, epsilon = 1e-5);
        assert_abs_diff_eq!(jstar_derivative(1.0, 1.0, 0.25, 0.0).unwrap(), SQRT3_2, epsilon = 1e-15);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        for &(s, t, p) in &[(1.0, 1.0, 0.25), (2.0, 1.0, 0.5), (1.0, 0.1, 0.8)] {
            for &xi in &[0.05, 0.7, 3.0] {
                let h = 1e-5;
                let f = |x| jstar(s, t, p, x, JstarMethod::Closed).unwrap().value;
                let fd = (f(xi + h) - f(xi - h)) / (2.0 * h);
                assert_abs_diff_eq!(jstar_derivative(s, t, p, xi).unwrap(), fd, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn rate_function_examples() {
        let g = gpp(1.0, 1.0, 0.25).unwrap().value;
        assert_eq!(rate_i(1.0, 1.0, 0.25, g, XI_MAX).unwrap().value, Extended::ZERO);
        assert_eq!(rate_i(1.0, 1.0, 0.25, g - 0.01, XI_MAX).unwrap().value, Extended::Infinite);
        assert_eq!(rate_i(1.0, 1.0, 0.25, 1.01, XI_MAX).unwrap().value, Extended::Infinite);
        let v = rate_i(1.0, 1.0, 0.25, 0.95, XI_MAX).unwrap();
        assert!(v.value.finite().unwrap() > 0.0 && !v.saturated);
        let edge = rate_i(1.0, 1.0, 0.25, 1.0, XI_MAX).unwrap();
        assert!(edge.saturated && edge.value.is_finite());
    }

    #[test]
    fn rate_function_is_monotone_and_convex() {
        let (s, t, p) = (1.0, 1.0, 0.25);
        let g = gpp(s, t, p).unwrap().value;
        let vals: Vec<f64> = (0..=50)
            .map(|k| g + (s - g) * k as f64 / 51.0)
            .map(|r| rate_i(s, t, p, r, XI_MAX).unwrap().value.to_f64())
            .collect();
        for w in vals.windows(3) {
            assert!(w[1] >= w[0] && w[2] >= w[1]);
            assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-10);
        }
    }

    #[test]
    fn rate_function_at_t_zero_and_its_limit() {
        let (s, p, r) = (2.0, 0.3, 1.1);
        let direct = 2.0 * bernoulli_rate_unchecked(p, r / s).to_f64();
        assert_abs_diff_eq!(rate_i(s, 0.0, p, r, XI_MAX).unwrap().value.to_f64(), direct, epsilon = 1e-15);
        let near = rate_i(s, 1e-7, p, r, XI_MAX).unwrap().value.to_f64();
        assert_abs_diff_eq!(near, direct, epsilon = 1e-3);
    }

    #[test]
    fn legendre_of_the_rate_recovers_jstar() {
        let (s, t, p) = (2.0, 1.0, 0.5);
        let g = gpp(s, t, p).unwrap().value;
        for &xi in &[0.25, 1.0, 2.5] {
            let neg = |r: f64| -(r * xi - rate_i(s, t, p, r, XI_MAX).unwrap().value.to_f64());
            let m = minimize_convex(neg, g, s, 1e-12).unwrap();
            let back = (-m.value).max(g * xi);
            let j = jstar(s, t, p, xi, JstarMethod::Closed).unwrap().value;
            assert_abs_diff_eq!(back, j, epsilon = 1e-6);
        }
    }

    #[test]
    fn kappa_examples() {
        let params = validate_params(0.25, Some(0.5)).unwrap();
        let v = kappa_dual(0.0, 1.0, &params, 2f64.ln()).unwrap().to_f64();
        assert_abs_diff_eq!(v, 0.8f64.ln(), epsilon = 1e-14);
        // threshold log(p(1-u)/(u(1-p))) = -ln 3
        assert_eq!(kappa_dual(0.0, 1.0, &params, -1.2).unwrap(), Extended::Infinite);
        assert!(kappa_dual(0.0, 1.0, &params, -1.0).unwrap().is_finite());
        assert_abs_diff_eq!(m_kappa(0.0, 1.0, &params).unwrap(), -0.5, epsilon = 1e-15);
        assert!(m_kappa(-2.0, 1.0, &params).is_err());
    }

    #[test]
    fn m_kappa_is_the_slope_at_zero() {
        let params = validate_params(0.25, Some(0.6)).unwrap();
        for &a in &[-1.0, -0.4, 0.0, 0.3, 1.0] {
            let h = 1e-6;
            let f = |x| kappa_dual(a, 1.0, &params, x).unwrap().to_f64();
            let fd = (f(h) - f(-h)) / (2.0 * h);
            assert_abs_diff_eq!(m_kappa(a, 1.0, &params).unwrap(), fd, epsilon = 1e-8);
        }
    }

    #[test]
    fn kappa_rate_is_the_dual_and_matches_its_limits() {
        let params = validate_params(0.25, Some(0.6)).unwrap();
        for &a in &[-0.5, 0.0, 0.4] {
            let m = m_kappa(a, 1.0, &params).unwrap();
            let (upper, at_upper) = kappa_upper(a, 1.0, &params).unwrap();
            assert_eq!(kappa_rate(a, 1.0, &params, m - 0.1).unwrap(), Extended::ZERO);
            assert_eq!(kappa_rate(a, 1.0, &params, upper + 1e-9).unwrap(), Extended::Infinite);
            let near = kappa_rate(a, 1.0, &params, upper - 1e-9).unwrap().to_f64();
            assert_abs_diff_eq!(near, at_upper, epsilon = 1e-5);
            let x = 0.5 * (m + upper);
            let by_grid = (0..=20_000)
                .map(|k| k as f64 * 1e-3)
                .map(|xi| x * xi - kappa_dual(a, 1.0, &params, xi).unwrap().to_f64())
                .fold(f64::NEG_INFINITY, f64::max);
            assert_abs_diff_eq!(kappa_rate(a, 1.0, &params, x).unwrap().to_f64(), by_grid, epsilon = 1e-6);
        }
    }

    #[test]
    fn h_rate_basics() {
        let params = validate_params(0.25, Some(0.6)).unwrap();
        assert_eq!(h_rate(0.0, 0.0, 1.0, 1.0, &params, 0.0).unwrap(), Extended::ZERO);
        assert!(h_rate(-1.5, 0.0, 1.0, 1.0, &params, 0.5).is_err());
        let h = h_rate(0.2, 0.2, 1.0, 1.0, &params, 0.9).unwrap().to_f64();
        assert!(h > 0.0 && h.is_finite());
        // continuity in b
        for &b in &[-0.5, 0.1, 0.6] {
            let x = h_rate(0.1, b, 1.0, 1.0, &params, 0.45).unwrap().to_f64();
            let y = h_rate(0.1, b + 1e-6, 1.0, 1.0, &params, 0.45).unwrap().to_f64();
            assert!(x.is_finite() && (x - y).abs() < 1e-4, "b={b}: {x} {y}");
        }
    }

    #[test]
    fn h_rate_agrees_with_sampled_convolution() {
        let params = validate_params(0.25, Some(0.6)).unwrap();
        let (s, t, p) = (1.0, 1.0, 0.25);
        let h = 1e-3;
        let kappa = SampledFunction::from_fn(-3.0, h, 3001, |x| kappa_rate(0.0, t, &params, x).unwrap());
        let j = SampledFunction::from_fn(0.0, h, 1001, |y| right_tail_rate(s, t, p, y).unwrap());
        let conv = inf_convolution(&kappa, &j, ConvolutionMode::RightTail).unwrap();
        for &r in &[0.5, 0.7, 0.9] {
            let k = conv.index_of(r).unwrap();
            let direct = h_rate(0.0, 0.0, s, t, &params, r).unwrap().to_f64();
            assert_abs_diff_eq!(conv.values[k].to_f64(), direct, epsilon = 2e-4);
        }
    }

    #[test]
    fn rlem_identity_holds() {
        let params = validate_params(0.25, Some(0.6)).unwrap();
        let rep = rlem_gap(1.0, 1.0, &params, 0.7, 201).unwrap();
        assert_abs_diff_eq!(rep.left.to_f64(), 0.021_601, epsilon = 1e-6);
        assert!(rep.gap < 1e-3, "{rep:?}");
        let below = rlem_gap(1.0, 1.0, &params, 0.3, 21).unwrap();
        assert_eq!((below.left, below.right, below.gap), (Extended::ZERO, Extended::ZERO, 0.0));
    }

    #[test]
    fn inf_convolution_identity_and_quadratics() {
        let h = 0.01;
        let f = SampledFunction::from_fn(-2.0, h, 401, |x| Extended::Finite(x * x));
        let delta = SampledFunction::from_fn(-1.0, h, 201, |x| {
            if x.abs() < h / 2.0 {
                Extended::ZERO
            } else {
                Extended::Infinite
            }
        });
        let id = inf_convolution(&f, &delta, ConvolutionMode::General).unwrap();
        for k in 0..f.len() {
            let j = id.index_of(f.x(k)).unwrap();
            assert_eq!(id.values[j], f.values[k]);
        }
        let q = inf_convolution(&f, &f, ConvolutionMode::General).unwrap();
        for k in (0..q.len()).step_by(37) {
            let r = q.x(k);
            if r.abs() <= 2.0 {
                assert!((q.values[k].to_f64() - r * r / 2.0).abs() <= h);
            }
        }
        for &xi in &[-1.0, 0.3, 1.5] {
            let lhs = q.legendre(xi).to_f64();
            let rhs = f.legendre(xi).to_f64() * 2.0;
            assert!((lhs - rhs).abs() < 1e-3, "{xi}: {lhs} {rhs}");
        }
        let coarse = SampledFunction::from_fn(0.0, 0.02, 10, |_| Extended::ZERO);
        assert!(matches!(
            inf_convolution(&f, &coarse, ConvolutionMode::General),
            Err(Error::GridMismatch(_))
        ));
    }
}
