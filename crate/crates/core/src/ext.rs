use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Mul};

/// A nonnegative real number or `+∞`.
///
/// Arithmetic follows the conventions `r·∞ = ∞` for `r > 0`, `0·∞ = 0` and
/// `∞^α = ∞` for `α > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExtReal {
    Finite(f64),
    Infinite(Infinity),
}

/// Serialises as the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Infinity {
    #[serde(rename = "inf")]
    Inf,
}

impl ExtReal {
    pub const INFINITY: ExtReal = ExtReal::Infinite(Infinity::Inf);

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtReal::Infinite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::Infinite(_) => None,
        }
    }

    /// Finite value, panicking on `∞`. Test helper.
    pub fn unwrap(self) -> f64 {
        self.finite().expect("ExtReal::unwrap on infinity")
    }

    /// `r · self` with `0·∞ = 0`.
    pub fn scale(self, r: f64) -> ExtReal {
        debug_assert!(r >= 0.0);
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(r * v),
            ExtReal::Infinite(_) if r == 0.0 => ExtReal::Finite(0.0),
            inf => inf,
        }
    }

    /// `self^alpha` for `alpha > 0`.
    pub fn powf(self, alpha: f64) -> ExtReal {
        debug_assert!(alpha > 0.0);
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(v.powf(alpha)),
            inf => inf,
        }
    }

    /// Lossy conversion for reporting: `∞` maps to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        if v.is_infinite() && v > 0.0 {
            ExtReal::INFINITY
        } else {
            ExtReal::Finite(v)
        }
    }
}

impl Mul for ExtReal {
    type Output = ExtReal;

    fn mul(self, other: ExtReal) -> ExtReal {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a * b),
            (ExtReal::Finite(a), inf) | (inf, ExtReal::Finite(a)) => inf.scale(a),
            (inf, _) => inf,
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, other: ExtReal) -> ExtReal {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::INFINITY,
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::Infinite(_) => write!(f, "inf"),
        }
    }
}
