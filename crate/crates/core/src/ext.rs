//! Extended nonnegative reals `[0, inf]` with saturating arithmetic.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};

/// A value in `[0, inf]`. Infinity is a variant, never an `f64` sentinel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ExtReal {
    Finite(f64),
    Infinity,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtReal::Infinity)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::Infinity => None,
        }
    }

    /// `e^{-x}`, with `e^{-inf} = 0`.
    pub fn exp_neg(self) -> f64 {
        match self {
            ExtReal::Finite(x) => (-x).exp(),
            ExtReal::Infinity => 0.0,
        }
    }

    /// `-log p` for `p` in `[0, 1]`; `p = 0` maps to infinity.
    pub fn neg_log(p: f64) -> ExtReal {
        if p <= 0.0 {
            ExtReal::Infinity
        } else {
            ExtReal::Finite((-p.ln()).max(0.0))
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if self <= other {
            self
        } else {
            other
        }
    }
}

/// `(w - b)_+` with `(w - inf)_+ = 0`.
pub fn positive_gap(w: f64, b: ExtReal) -> f64 {
    match b {
        ExtReal::Finite(b) => (w - b).max(0.0),
        ExtReal::Infinity => 0.0,
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        if x == f64::INFINITY {
            ExtReal::Infinity
        } else {
            ExtReal::Finite(x)
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::Infinity,
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
            (ExtReal::Finite(_), ExtReal::Infinity) => Some(Ordering::Less),
            (ExtReal::Infinity, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (ExtReal::Infinity, ExtReal::Infinity) => Some(Ordering::Equal),
        }
    }
}

impl PartialEq<f64> for ExtReal {
    fn eq(&self, other: &f64) -> bool {
        matches!(self, ExtReal::Finite(x) if x == other)
    }
}

impl PartialOrd<f64> for ExtReal {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.partial_cmp(&ExtReal::Finite(*other))
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::Infinity => f.write_str("inf"),
        }
    }
}
