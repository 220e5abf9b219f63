//! The kernels `s_{K,N}`, `c_{K,N}` and the distortion coefficients
//! `sigma_{K,N}^{(t)}(theta)` for negative `N`.
//!
//! With `a = sqrt(|K/N|)` the kernels are `sin(a x)/a`, `x`, `sinh(a x)/a`
//! and `cos(a x)`, `1`, `cosh(a x)` for `K < 0`, `K = 0`, `K > 0`.
//! Small arguments use a Taylor expansion to keep quotients accurate.

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::math::{self, PI};

const TAYLOR_CROSSOVER: f64 = 1e-4;

/// Curvature `K` and (negative) dimension `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurvatureParams {
    #[cfg_attr(feature = "serde", serde(rename = "K"))]
    k: f64,
    #[cfg_attr(feature = "serde", serde(rename = "N"))]
    n: f64,
}

impl CurvatureParams {
    pub fn new(k: f64, n: f64) -> Result<Self> {
        if !k.is_finite() {
            return Err(Error::InvalidParams("K must be finite"));
        }
        if !(n < 0.0) || !n.is_finite() {
            return Err(Error::InvalidParams(
                "N must be finite and strictly negative",
            ));
        }
        Ok(CurvatureParams { k, n })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    /// `sqrt(|K/N|)`.
    pub fn a(&self) -> f64 {
        math::sqrt((self.k / self.n).abs())
    }

    /// Distance cap `pi sqrt(N/K)` when `K < 0`, `None` otherwise.
    pub fn distance_cap(&self) -> Option<f64> {
        (self.k < 0.0).then(|| PI / self.a())
    }

    /// True when `K theta^2 <= N pi^2`.
    pub fn is_singular(&self, theta: f64) -> bool {
        self.k * theta * theta <= self.n * PI * PI
    }

    /// Same parameters with `(cK, cN)`, `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::ParamOutOfRange {
                name: "c",
                value: c,
            });
        }
        Self::new(c * self.k, c * self.n)
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta.is_nan() {
        Err(Error::NotANumber("theta"))
    } else if theta < 0.0 {
        Err(Error::NegativeTheta(theta))
    } else {
        Ok(())
    }
}

/// `s_{K,N}` without the sign check, valid for any real argument.
pub(crate) fn s_raw(p: &CurvatureParams, theta: f64) -> f64 {
    if p.k == 0.0 {
        return theta;
    }
    let a = p.a();
    let x = a * theta;
    let x2 = x * x;
    if x.abs() < TAYLOR_CROSSOVER {
        // sin / sinh share the series up to the sign of x^2
        let s = if p.k < 0.0 { -x2 } else { x2 };
        theta * (1.0 + s / 6.0 * (1.0 + s / 20.0 * (1.0 + s / 42.0 * (1.0 + s / 72.0))))
    } else if p.k < 0.0 {
        math::sin(x) / a
    } else {
        math::sinh(x) / a
    }
}

/// `c_{K,N}` without the sign check.
pub(crate) fn c_raw(p: &CurvatureParams, theta: f64) -> f64 {
    if p.k == 0.0 {
        return 1.0;
    }
    let x = p.a() * theta;
    let x2 = x * x;
    if x.abs() < TAYLOR_CROSSOVER {
        let s = if p.k < 0.0 { -x2 } else { x2 };
        1.0 + s / 2.0 * (1.0 + s / 12.0 * (1.0 + s / 30.0 * (1.0 + s / 56.0)))
    } else if p.k < 0.0 {
        math::cos(x)
    } else {
        math::cosh(x)
    }
}

/// `s_{K,N}(theta)` for `theta >= 0`.
pub fn s_kn(p: &CurvatureParams, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok(s_raw(p, theta))
}

/// `c_{K,N}(theta)` for `theta >= 0`.
pub fn c_kn(p: &CurvatureParams, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok(c_raw(p, theta))
}

/// A distortion coefficient in `[0, +inf]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SigmaValue(ExtReal);

impl SigmaValue {
    pub fn value(self) -> ExtReal {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0 == ExtReal::PosInf
    }

    pub fn to_f64(self) -> f64 {
        self.0.to_f64()
    }
}

/// `sigma_{K,N}^{(t)}(theta)`; `+inf` in the singular regime.
pub fn sigma(p: &CurvatureParams, t: f64, theta: f64) -> Result<SigmaValue> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::ParamOutOfRange {
            name: "t",
            value: t,
        });
    }
    if !(theta >= 0.0) || theta.is_infinite() {
        return Err(Error::ParamOutOfRange {
            name: "theta",
            value: theta,
        });
    }
    let kt2 = p.k * theta * theta;
    if kt2 == 0.0 {
        return Ok(SigmaValue(ExtReal::Finite(t)));
    }
    if p.is_singular(theta) {
        return Ok(SigmaValue(ExtReal::PosInf));
    }
    let v = s_raw(p, t * theta) / s_raw(p, theta);
    Ok(SigmaValue(ExtReal::new(v)?))
}

/// `(theta / s(theta), -theta c(theta) / s(theta))`: the slopes of
/// `t -> sigma^{(t)}` at `t = 0` and of `t -> sigma^{(1-t)}` at `t = 0`.
pub fn sigma_rate_limits(p: &CurvatureParams, theta: f64) -> Result<(f64, f64)> {
    if !(theta > 0.0) || theta.is_infinite() {
        return Err(Error::ParamOutOfRange {
            name: "theta",
            value: theta,
        });
    }
    if p.is_singular(theta) {
        return Err(Error::SingularTheta(theta));
    }
    let s = s_raw(p, theta);
    let c = c_raw(p, theta);
    Ok((theta / s, -theta * c / s))
}
