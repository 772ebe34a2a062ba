//! Extended reals `R ∪ {+∞}`.
//!
//! Rate functions and log-moment generating functions in this crate take the
//! value `+∞` off their effective domain. [`Extended`] keeps that case explicit
//! so callers never have to reason about `NaN` coming out of `∞ - ∞`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Extended {
    Finite(f64),
    Infinite,
}

impl Extended {
    pub const ZERO: Extended = Extended::Finite(0.0);

    /// Maps `+∞` to [`Extended::Infinite`]. `NaN` and `-∞` are rejected
    /// because no exposed operation is allowed to produce them.
    pub fn from_f64(x: f64) -> Extended {
        assert!(!x.is_nan(), "NaN cannot be an extended value");
        assert!(x != f64::NEG_INFINITY, "-inf cannot be an extended value");
        if x == f64::INFINITY {
            Extended::Infinite
        } else {
            Extended::Finite(x)
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn is_infinite(self) -> bool {
        !self.is_finite()
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(x) => Some(x),
            Extended::Infinite => None,
        }
    }

    /// Lossy view as an `f64`, with `+∞` for [`Extended::Infinite`].
    pub fn to_f64(self) -> f64 {
        match self {
            Extended::Finite(x) => x,
            Extended::Infinite => f64::INFINITY,
        }
    }

    /// Multiplication by a nonnegative scalar with the convex-analysis
    /// convention `0 · ∞ = 0`.
    pub fn scale(self, c: f64) -> Extended {
        assert!(c >= 0.0, "scale factor must be nonnegative, got {c}");
        match self {
            Extended::Finite(x) => Extended::Finite(c * x),
            Extended::Infinite if c == 0.0 => Extended::ZERO,
            Extended::Infinite => Extended::Infinite,
        }
    }

    pub fn min(self, other: Extended) -> Extended {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Extended) -> Extended {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl From<f64> for Extended {
    fn from(x: f64) -> Self {
        Extended::from_f64(x)
    }
}

impl Add for Extended {
    type Output = Extended;

    fn add(self, rhs: Extended) -> Extended {
        match (self, rhs) {
            (Extended::Finite(a), Extended::Finite(b)) => Extended::from_f64(a + b),
            _ => Extended::Infinite,
        }
    }
}

impl Add<f64> for Extended {
    type Output = Extended;

    fn add(self, rhs: f64) -> Extended {
        self + Extended::from_f64(rhs)
    }
}

impl PartialOrd for Extended {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Extended::Finite(a), Extended::Finite(b)) => a.partial_cmp(b),
            (Extended::Finite(_), Extended::Infinite) => Some(Ordering::Less),
            (Extended::Infinite, Extended::Finite(_)) => Some(Ordering::Greater),
            (Extended::Infinite, Extended::Infinite) => Some(Ordering::Equal),
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(x) => write!(f, "{x}"),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_dominates_every_finite_value() {
        assert!(Extended::Infinite > Extended::Finite(f64::MAX));
        assert!(Extended::Finite(-1e300) < Extended::Infinite);
        assert_eq!(Extended::Infinite.max(Extended::Finite(3.0)), Extended::Infinite);
        assert_eq!(Extended::Infinite.min(Extended::Finite(3.0)), Extended::Finite(3.0));
    }

    #[test]
    fn arithmetic_never_yields_nan() {
        assert_eq!(Extended::Infinite + Extended::Infinite, Extended::Infinite);
        assert_eq!(Extended::Infinite + -5.0, Extended::Infinite);
        assert_eq!(Extended::Infinite.scale(0.0), Extended::ZERO);
        assert_eq!(Extended::Finite(2.0).scale(1.5), Extended::Finite(3.0));
        assert_eq!(Extended::from_f64(f64::INFINITY), Extended::Infinite);
    }

    #[test]
    fn display_uses_inf_literal() {
        assert_eq!(Extended::Infinite.to_string(), "inf");
        assert_eq!(Extended::Finite(0.5).to_string(), "0.5");
    }
}
