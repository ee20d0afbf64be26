//! Extended reals `ℝ ∪ {−∞, +∞}` with the inf-addition conventions used
//! throughout convex analysis:
//!
//! * `(+∞) + (−∞) = (−∞) + (+∞) = +∞`
//! * `0 · (+∞) = +∞` and `0 · (−∞) = 0`
//!
//! The value is stored as an `f64` whose infinities encode `±∞`. NaN cannot
//! be constructed, so every operation here is total.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Neg, Sub};

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default absolute/relative tolerance for cross-module comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, PartialEq)]
pub struct ExtReal(f64);

/// Nonnegative scalar multiplier (simplex weights, radii).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct NonNegative(f64);

impl NonNegative {
    pub fn new(t: f64) -> Result<Self> {
        if t >= 0.0 && t.is_finite() {
            Ok(NonNegative(t))
        } else {
            Err(Error::NegativeScale(t))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl ExtReal {
    pub const POS_INF: ExtReal = ExtReal(f64::INFINITY);
    pub const NEG_INF: ExtReal = ExtReal(f64::NEG_INFINITY);
    pub const ZERO: ExtReal = ExtReal(0.0);

    /// Wraps an `f64`; `±inf` map to `±∞`.
    ///
    /// Panics on NaN, which always signals an upstream arithmetic bug.
    pub fn new(x: f64) -> Self {
        assert!(!x.is_nan(), "NaN is not an extended real");
        ExtReal(x)
    }

    pub fn try_new(x: f64) -> Result<Self> {
        if x.is_nan() {
            Err(Error::InvalidArgument("NaN is not an extended real".into()))
        } else {
            Ok(ExtReal(x))
        }
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn is_pos_inf(self) -> bool {
        self.0 == f64::INFINITY
    }

    pub fn is_neg_inf(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    pub fn finite(self) -> Option<f64> {
        self.is_finite().then_some(self.0)
    }

    /// The underlying `f64` (infinite for `±∞`).
    pub fn to_f64(self) -> f64 {
        self.0
    }

    /// `t · self` for `t ≥ 0` under `0·(+∞)=+∞`, `0·(−∞)=0`.
    pub fn scale(self, t: NonNegative) -> ExtReal {
        let t = t.get();
        if t == 0.0 {
            if self.is_pos_inf() {
                ExtReal::POS_INF
            } else {
                ExtReal::ZERO
            }
        } else {
            ExtReal(t * self.0)
        }
    }

    /// Checked variant of [`ExtReal::scale`] taking a raw `f64`.
    pub fn scale_by(self, t: f64) -> Result<ExtReal> {
        Ok(self.scale(NonNegative::new(t)?))
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if other > self {
            other
        } else {
            self
        }
    }

    /// `self ≤ other` up to `tol`, scaled by the magnitude of finite operands.
    pub fn approx_le(self, other: ExtReal, tol: f64) -> bool {
        if self <= other {
            return true;
        }
        match (self.finite(), other.finite()) {
            (Some(a), Some(b)) => a - b <= tol * 1f64.max(a.abs()).max(b.abs()),
            _ => false,
        }
    }

    pub fn approx_eq(self, other: ExtReal, tol: f64) -> bool {
        self.approx_le(other, tol) && other.approx_le(self, tol)
    }

    /// Distance used in discrepancy reports: 0 for equal infinities, `+inf`
    /// when exactly one side is infinite.
    pub fn discrepancy(self, other: ExtReal) -> f64 {
        match (self.finite(), other.finite()) {
            (Some(a), Some(b)) => (a - b).abs() / 1f64.max(a.abs()).max(b.abs()),
            _ if self == other => 0.0,
            _ => f64::INFINITY,
        }
    }
}

/// Infimum under the total order; `inf ∅ = +∞`.
pub fn fold_inf<I: IntoIterator<Item = ExtReal>>(values: I) -> ExtReal {
    values.into_iter().fold(ExtReal::POS_INF, ExtReal::min)
}

/// Supremum under the total order; `sup ∅ = −∞`.
pub fn fold_sup<I: IntoIterator<Item = ExtReal>>(values: I) -> ExtReal {
    values.into_iter().fold(ExtReal::NEG_INF, ExtReal::max)
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        if self.is_pos_inf() || rhs.is_pos_inf() {
            ExtReal::POS_INF
        } else {
            ExtReal(self.0 + rhs.0)
        }
    }
}

impl Neg for ExtReal {
    type Output = ExtReal;

    fn neg(self) -> ExtReal {
        ExtReal(-self.0)
    }
}

/// `a − b := a + (−b)`, so `(+∞) − (+∞) = +∞`.
impl Sub for ExtReal {
    type Output = ExtReal;

    fn sub(self, rhs: ExtReal) -> ExtReal {
        self + (-rhs)
    }
}

impl Sum for ExtReal {
    fn sum<I: Iterator<Item = ExtReal>>(iter: I) -> ExtReal {
        iter.fold(ExtReal::ZERO, Add::add)
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.partial_cmp(&other.0).expect("ExtReal never holds NaN")
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        ExtReal::new(x)
    }
}

impl fmt::Debug for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_pos_inf() {
            f.write_str("+inf")
        } else if self.is_neg_inf() {
            f.write_str("-inf")
        } else {
            fmt::Display::fmt(&self.0, f)
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_pos_inf() {
            serializer.serialize_str("inf")
        } else if self.is_neg_inf() {
            serializer.serialize_str("-inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

struct ExtRealVisitor;

impl<'de> Visitor<'de> for ExtRealVisitor {
    type Value = ExtReal;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or one of the strings \"inf\", \"-inf\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<ExtReal, E> {
        if v.is_finite() {
            Ok(ExtReal(v))
        } else {
            Err(E::custom("non-finite JSON number"))
        }
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ExtReal, E> {
        Ok(ExtReal(v as f64))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ExtReal, E> {
        Ok(ExtReal(v as f64))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ExtReal, E> {
        match v {
            "inf" | "+inf" => Ok(ExtReal::POS_INF),
            "-inf" => Ok(ExtReal::NEG_INF),
            other => Err(E::custom(format!("expected \"inf\" or \"-inf\", got {other:?}"))),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        deserializer.deserialize_any(ExtRealVisitor)
    }
}
