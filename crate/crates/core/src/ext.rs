//! Extended reals `[-inf, +inf]` without NaN.

use core::cmp::Ordering;
use core::fmt;

use crate::error::{Error, Result};

/// A value of the extended real line.
///
/// `Finite` never holds NaN or an infinity; use [`ExtReal::new`] or
/// [`ExtReal::from_f64`] to construct from raw floats.
#[derive(Debug, Clone, Copy)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Maps `±inf` to the symbolic variants and rejects NaN.
    pub fn new(x: f64) -> Result<Self> {
        Self::from_f64(x).ok_or(Error::NotANumber("extended real"))
    }

    pub fn from_f64(x: f64) -> Option<Self> {
        if x.is_nan() {
            None
        } else if x == f64::INFINITY {
            Some(ExtReal::PosInf)
        } else if x == f64::NEG_INFINITY {
            Some(ExtReal::NegInf)
        } else {
            Some(ExtReal::Finite(x))
        }
    }

    /// The IEEE representation (`±inf` for the symbolic variants).
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(x) => x,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }
}

impl core::ops::Neg for ExtReal {
    type Output = ExtReal;

    fn neg(self) -> Self {
        match self {
            ExtReal::NegInf => ExtReal::PosInf,
            ExtReal::Finite(x) => ExtReal::Finite(-x),
            ExtReal::PosInf => ExtReal::NegInf,
        }
    }
}

impl From<ExtReal> for f64 {
    fn from(v: ExtReal) -> f64 {
        v.to_f64()
    }
}

impl PartialEq for ExtReal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
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
        use ExtReal::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            (Finite(a), Finite(b)) => a.total_cmp(b),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => f.write_str("-inf"),
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::PosInf => f.write_str("inf"),
        }
    }
}

/// Extended-real sum; `(+inf) + (-inf)` is an error.
pub fn ext_add(a: ExtReal, b: ExtReal) -> Result<ExtReal> {
    use ExtReal::*;
    match (a, b) {
        (PosInf, NegInf) | (NegInf, PosInf) => Err(Error::IndeterminateSum),
        (PosInf, _) | (_, PosInf) => Ok(PosInf),
        (NegInf, _) | (_, NegInf) => Ok(NegInf),
        (Finite(x), Finite(y)) => ExtReal::new(x + y),
    }
}

/// Product of a finite nonnegative weight with a value in `[0, +inf]`,
/// using `0 * inf = 0`.
pub fn ext_mul_conv(c: f64, a: ExtReal) -> Result<ExtReal> {
    if c.is_nan() {
        return Err(Error::NotANumber("convexity weight"));
    }
    if c < 0.0 || !c.is_finite() {
        return Err(Error::NegativeCoefficient(c));
    }
    if c == 0.0 {
        return Ok(ExtReal::ZERO);
    }
    match a {
        ExtReal::Finite(x) => ExtReal::new(c * x),
        other => Ok(other),
    }
}

/// General product with `0 * (±inf) = 0`.
pub fn ext_mul(c: f64, a: ExtReal) -> Result<ExtReal> {
    if c.is_nan() {
        return Err(Error::NotANumber("product"));
    }
    if c == 0.0 {
        return Ok(ExtReal::ZERO);
    }
    match a {
        ExtReal::Finite(x) => ExtReal::new(c * x),
        inf if c > 0.0 => Ok(inf),
        inf => Ok(-inf),
    }
}

#[cfg(feature = "serde")]
mod serde_impl {
    use super::ExtReal;
    use serde::de::{self, Visitor};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    impl Serialize for ExtReal {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            match self {
                ExtReal::NegInf => s.serialize_str("-inf"),
                ExtReal::Finite(x) => s.serialize_f64(*x),
                ExtReal::PosInf => s.serialize_str("inf"),
            }
        }
    }

    struct ExtVisitor;

    impl<'de> Visitor<'de> for ExtVisitor {
        type Value = ExtReal;

        fn expecting(&self, f: &mut core::fmt::Formatter) -> core::fmt::Result {
            f.write_str("a number or one of \"inf\", \"+inf\", \"-inf\"")
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtReal, E> {
            ExtReal::from_f64(v).ok_or_else(|| E::custom("NaN is not an extended real"))
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtReal, E> {
            Ok(ExtReal::Finite(v as f64))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtReal, E> {
            Ok(ExtReal::Finite(v as f64))
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtReal, E> {
            match v {
                "inf" | "+inf" | "infinity" | "+infinity" => Ok(ExtReal::PosInf),
                "-inf" | "-infinity" => Ok(ExtReal::NegInf),
                _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
            }
        }
    }

    impl<'de> Deserialize<'de> for ExtReal {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<ExtReal, D::Error> {
            d.deserialize_any(ExtVisitor)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ext() -> impl Strategy<Value = ExtReal> {
        prop_oneof![
            1 => Just(ExtReal::NegInf),
            1 => Just(ExtReal::PosInf),
            6 => (-1e6f64..1e6).prop_map(ExtReal::Finite),
        ]
    }

    #[test]
    fn sums() {
        let f = ExtReal::Finite;
        assert_eq!(ext_add(f(2.0), f(3.0)).unwrap(), f(5.0));
        assert_eq!(ext_add(ExtReal::PosInf, f(7.0)).unwrap(), ExtReal::PosInf);
        assert_eq!(
            ext_add(ExtReal::NegInf, ExtReal::NegInf).unwrap(),
            ExtReal::NegInf
        );
        assert_eq!(
            ext_add(ExtReal::PosInf, ExtReal::NegInf),
            Err(Error::IndeterminateSum)
        );
        assert_eq!(
            ext_add(ExtReal::NegInf, ExtReal::PosInf),
            Err(Error::IndeterminateSum)
        );
    }

    #[test]
    fn convex_products() {
        assert_eq!(ext_mul_conv(0.0, ExtReal::PosInf).unwrap(), ExtReal::ZERO);
        assert_eq!(
            ext_mul_conv(0.5, ExtReal::Finite(4.0)).unwrap(),
            ExtReal::Finite(2.0)
        );
        assert_eq!(ext_mul_conv(2.0, ExtReal::PosInf).unwrap(), ExtReal::PosInf);
        assert_eq!(
            ext_mul_conv(-1.0, ExtReal::ZERO),
            Err(Error::NegativeCoefficient(-1.0))
        );
        assert_eq!(ext_mul(-2.0, ExtReal::PosInf).unwrap(), ExtReal::NegInf);
    }

    #[test]
    fn nan_rejected() {
        assert!(ExtReal::new(f64::NAN).is_err());
        assert_eq!(ExtReal::new(f64::INFINITY).unwrap(), ExtReal::PosInf);
    }

    #[test]
    fn total_order() {
        assert!(ExtReal::NegInf < ExtReal::Finite(-1e300));
        assert!(ExtReal::Finite(1e300) < ExtReal::PosInf);
        assert!(ExtReal::Finite(1.0) < ExtReal::Finite(2.0));
    }

    proptest! {
        #[test]
        fn add_commutes(a in ext(), b in ext()) {
            prop_assert_eq!(ext_add(a, b), ext_add(b, a));
        }

        #[test]
        fn add_associates(a in ext(), b in ext(), c in ext()) {
            let l = ext_add(a, b).and_then(|ab| ext_add(ab, c));
            let r = ext_add(b, c).and_then(|bc| ext_add(a, bc));
            if let (Ok(l), Ok(r)) = (l, r) {
                match (l, r) {
                    (ExtReal::Finite(x), ExtReal::Finite(y)) => {
                        prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()))
                    }
                    _ => prop_assert_eq!(l, r),
                }
            }
        }

        #[test]
        fn mul_conv_monotone(c in 0.0f64..10.0, x in 0.0f64..1e6, y in 0.0f64..1e6, inf in any::<bool>()) {
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            let hi = if inf { ExtReal::PosInf } else { ExtReal::Finite(hi) };
            let a = ext_mul_conv(c, ExtReal::Finite(lo)).unwrap();
            let b = ext_mul_conv(c, hi).unwrap();
            prop_assert!(a <= b);
        }
    }
}
