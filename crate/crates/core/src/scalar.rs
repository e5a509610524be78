//! Scalar abstraction shared by the numerical modules, and the extended
//! reals used for boosted rates and event times.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + Serialize
    + de::DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("integer representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// A non-negative quantity that may take the distinguished value `Infinite`.
///
/// Infinity never enters floating point arithmetic: every formula that
/// consumes an `Extended` matches on it explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Extended<T> {
    Finite(T),
    Infinite,
}

impl<T: Real> Extended<T> {
    #[inline]
    pub fn zero() -> Self {
        Extended::Finite(T::zero())
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    #[inline]
    pub fn is_infinite(&self) -> bool {
        matches!(self, Extended::Infinite)
    }

    #[inline]
    pub fn finite(self) -> Option<T> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Infinite => None,
        }
    }

    /// Shifts a finite value by `dt`; infinity is absorbing.
    #[inline]
    pub fn shifted(self, dt: T) -> Self {
        match self {
            Extended::Finite(v) => Extended::Finite(v + dt),
            Extended::Infinite => Extended::Infinite,
        }
    }

    /// `self < other`, treating `Infinite` as the top element.
    #[inline]
    pub fn lt(self, other: Self) -> bool {
        self.cmp_ext(other) == Ordering::Less
    }

    #[inline]
    pub fn le(self, other: Self) -> bool {
        self.cmp_ext(other) != Ordering::Greater
    }

    pub fn cmp_ext(self, other: Self) -> Ordering {
        match (self, other) {
            (Extended::Infinite, Extended::Infinite) => Ordering::Equal,
            (Extended::Infinite, _) => Ordering::Greater,
            (_, Extended::Infinite) => Ordering::Less,
            (Extended::Finite(a), Extended::Finite(b)) => a.partial_cmp(&b).unwrap_or(Ordering::Equal),
        }
    }

    #[inline]
    pub fn min(self, other: Self) -> Self {
        if other.lt(self) {
            other
        } else {
            self
        }
    }

    /// Lossy conversion for reporting; `Infinite` maps to `f64::INFINITY`.
    pub fn to_f64_lossy(self) -> f64 {
        match self {
            Extended::Finite(v) => v.to_f64().unwrap_or(f64::NAN),
            Extended::Infinite => f64::INFINITY,
        }
    }

    /// Builds an extended value from a float, mapping `+inf` to `Infinite`.
    pub fn from_float(v: T) -> Self {
        if v.is_infinite() && v > T::zero() {
            Extended::Infinite
        } else {
            Extended::Finite(v)
        }
    }

    pub fn cast<U: Real>(self) -> Extended<U> {
        match self {
            Extended::Finite(v) => Extended::Finite(U::lit(v.to_f64().unwrap_or(f64::NAN))),
            Extended::Infinite => Extended::Infinite,
        }
    }
}

impl<T: Real> From<T> for Extended<T> {
    fn from(v: T) -> Self {
        Extended::from_float(v)
    }
}

impl<T: Real> fmt::Display for Extended<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}

// JSON form: a number, or the string "inf".
impl<T: Real> Serialize for Extended<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Extended::Finite(v) => serializer.serialize_f64(v.to_f64().unwrap_or(f64::NAN)),
            Extended::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de, T: Real> Deserialize<'de> for Extended<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Num(v) => Ok(Extended::Finite(T::lit(v))),
            Repr::Str(s) => s.parse::<Extended<f64>>().map(|e| e.cast()).map_err(de::Error::custom),
        }
    }
}

impl std::str::FromStr for Extended<f64> {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" | "∞" => Ok(Extended::Infinite),
            other => other
                .parse::<f64>()
                .map(Extended::from_float)
                .map_err(|e| format!("invalid extended value {s:?}: {e}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_is_top() {
        let one = Extended::Finite(1.0_f64);
        assert!(one.lt(Extended::Infinite));
        assert!(!Extended::<f64>::Infinite.lt(one));
        assert_eq!(one.min(Extended::Infinite), one);
        assert_eq!(Extended::<f64>::Infinite.shifted(3.0), Extended::Infinite);
    }

    #[test]
    fn json_accepts_number_or_inf() {
        let v: Vec<Extended<f64>> = serde_json::from_str(r#"[1.5, "inf", "Infinity"]"#).unwrap();
        assert_eq!(v, vec![Extended::Finite(1.5), Extended::Infinite, Extended::Infinite]);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"[1.5,"inf","inf"]"#);
        assert!(serde_json::from_str::<Extended<f64>>(r#""lots""#).is_err());
    }
}
