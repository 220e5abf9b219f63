//! Thin wrappers over `libm` so the rest of the crate reads like `f64` methods.

pub(crate) use core::f64::consts::PI;

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}
#[inline]
pub(crate) fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}
#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}
#[inline]
pub(crate) fn ln1p(x: f64) -> f64 {
    libm::log1p(x)
}
#[inline]
pub(crate) fn sin(x: f64) -> f64 {
    libm::sin(x)
}
#[inline]
pub(crate) fn cos(x: f64) -> f64 {
    libm::cos(x)
}
#[inline]
pub(crate) fn tan(x: f64) -> f64 {
    libm::tan(x)
}
#[inline]
pub(crate) fn sinh(x: f64) -> f64 {
    libm::sinh(x)
}
#[inline]
pub(crate) fn cosh(x: f64) -> f64 {
    libm::cosh(x)
}
#[inline]
pub(crate) fn tanh(x: f64) -> f64 {
    libm::tanh(x)
}
#[inline]
pub(crate) fn asin(x: f64) -> f64 {
    libm::asin(x)
}
#[inline]
pub(crate) fn asinh(x: f64) -> f64 {
    libm::asinh(x)
}
#[inline]
pub(crate) fn acosh(x: f64) -> f64 {
    libm::acosh(x)
}
#[inline]
pub(crate) fn atan(x: f64) -> f64 {
    libm::atan(x)
}
#[inline]
pub(crate) fn atanh(x: f64) -> f64 {
    libm::atanh(x)
}
#[inline]
pub(crate) fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// `ln(cosh(x))` without overflow for large `|x|`.
pub(crate) fn ln_cosh(x: f64) -> f64 {
    let ax = x.abs();
    ax + ln1p(exp(-2.0 * ax)) - core::f64::consts::LN_2
}

/// `ln(sinh(x))` for `x >= 0`; `-inf` at zero.
pub(crate) fn ln_sinh(x: f64) -> f64 {
    if x <= 0.0 {
        f64::NEG_INFINITY
    } else if x > 20.0 {
        x + ln1p(-exp(-2.0 * x)) - core::f64::consts::LN_2
    } else {
        ln(sinh(x))
    }
}

/// Euclidean norm of a slice.
pub(crate) fn norm(v: &[f64]) -> f64 {
    sqrt(v.iter().map(|x| x * x).sum())
}

/// Median of a non-empty scratch slice (reorders it).
pub(crate) fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
