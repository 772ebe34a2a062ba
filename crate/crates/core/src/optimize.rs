//! One-dimensional convex minimization and root bracketing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which case of the minimization fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimizerCase {
    /// The derivative changes sign inside the interval.
    Interior,
    /// The derivative is negative up to the right endpoint, which is the minimizer.
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub value: f64,
    pub argmin: f64,
    pub case: MinimizerCase,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const SCAN_POINTS: usize = 64;

/// Minimizes a convex `f` over `(a, b]` to absolute tolerance `tol` in the
/// argument. `f` may return `+∞` on a subinterval at either end.
///
/// A coarse scan brackets the minimizer, golden-section search shrinks the
/// bracket, and bisection on the sign of a central difference finishes the
/// job. The right endpoint is returned as [`MinimizerCase::Boundary`] when the
/// one-sided derivative there is nonpositive.
pub fn minimize_convex(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<Minimum> {
    assert!(a < b, "empty interval ({a}, {b}]");
    let width = b - a;
    let fb = f(b);
    if fb.is_finite() {
        let h = (width * 1e-6).max(1e-9).min(width / 4.0);
        let (f1, f2) = (f(b - h), f(b - 2.0 * h));
        if f1.is_finite() && f2.is_finite() && (3.0 * fb - 4.0 * f1 + f2) / (2.0 * h) <= 0.0 {
            return Ok(Minimum {
                value: fb,
                argmin: b,
                case: MinimizerCase::Boundary,
            });
        }
    }

    // scan the half-open interval; the left end itself is excluded
    let grid: Vec<f64> = (1..=SCAN_POINTS)
        .map(|k| a + width * k as f64 / SCAN_POINTS as f64)
        .collect();
    let (best, best_val) = grid
        .iter()
        .map(|&x| (x, f(x)))
        .enumerate()
        .filter(|(_, (_, v))| v.is_finite())
        .min_by(|x, y| x.1 .1.total_cmp(&y.1 .1))
        .map(|(k, (_, v))| (k, v))
        .ok_or(Error::NonFinite { lower: a, upper: b })?;
    let mut lo = if best == 0 { a } else { grid[best - 1] };
    let mut hi = grid[(best + 1).min(SCAN_POINTS - 1)];
    if best == SCAN_POINTS - 1 {
        hi = b;
    }

    let eval = |x: f64| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let coarse = tol.max(1e-7 * width).max(1e-7);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (eval(x1), eval(x2));
    while hi - lo > coarse {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = eval(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = eval(x2);
        }
    }

    // derivative-sign bisection, kept only if it improves the value
    let h = (1e-3 * coarse).max(1e-12 * (1.0 + b.abs()));
    let (mut l, mut r) = (lo, hi);
    while r - l > tol {
        let mid = 0.5 * (l + r);
        let (fp, fm) = (eval(mid + h), eval(mid - h));
        if fp.is_infinite() && fm.is_infinite() {
            break;
        }
        if fp - fm > 0.0 {
            r = mid;
        } else {
            l = mid;
        }
    }
    let refined = 0.5 * (l + r);
    let mut candidates = [(refined, eval(refined)), (x1, f1), (x2, f2), (grid[best], best_val)];
    candidates.sort_by(|x, y| x.1.total_cmp(&y.1));
    let (argmin, value) = candidates[0];
    Ok(Minimum {
        value,
        argmin,
        case: MinimizerCase::Interior,
    })
}

/// Root of a nonincreasing function on `[lo, hi]` by bisection; returns the
/// endpoint when there is no sign change.
pub fn bisect_decreasing(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    if f(lo) <= 0.0 {
        return lo;
    }
    if f(hi) >= 0.0 {
        return hi;
    }
    while hi - lo > tol * (1.0 + lo.abs().max(hi.abs())) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_minimum() {
        let m = minimize_convex(|x| (x - 0.3).powi(2) + 1.0, 0.0, 1.0, 1e-10).unwrap();
        assert_eq!(m.case, MinimizerCase::Interior);
        assert!((m.argmin - 0.3).abs() < 1e-8);
        assert!((m.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn boundary_minimum() {
        let m = minimize_convex(|x| -x, 0.0, 2.0, 1e-10).unwrap();
        assert_eq!(m.case, MinimizerCase::Boundary);
        assert_eq!(m.argmin, 2.0);
    }

    #[test]
    fn infinite_near_the_open_end() {
        let p = 0.25;
        let f = |v: f64| if v <= p { f64::INFINITY } else { v + p * (1.0 - v) / (v - p) };
        let m = minimize_convex(f, p, 1.0, 1e-10).unwrap();
        let expected = p + (p * (1.0 - p)).sqrt();
        assert!((m.argmin - expected).abs() < 1e-8, "{}", m.argmin);
        assert!((m.value - 0.75f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn infinite_near_the_closed_end() {
        let f = |x: f64| if x >= 0.8 { f64::INFINITY } else { (x - 0.5).powi(2) };
        let m = minimize_convex(f, 0.0, 1.0, 1e-10).unwrap();
        assert!((m.argmin - 0.5).abs() < 1e-8);
    }

    #[test]
    fn nowhere_finite() {
        assert!(matches!(
            minimize_convex(|_| f64::INFINITY, 0.0, 1.0, 1e-10),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn bisection() {
        let x = bisect_decreasing(|x| 2.0 - x * x, 0.0, 2.0, 1e-14);
        assert!((x - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(bisect_decreasing(|x| -1.0 - x, 0.0, 1.0, 1e-12), 0.0);
        assert_eq!(bisect_decreasing(|x| 5.0 - x, 0.0, 1.0, 1e-12), 1.0);
    }
}
