//! Closed-form examples of `(K,N)`-convex functionals.

use alloc::format;
use alloc::string::{String, ToString};

use crate::coefficients::CurvatureParams;
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::math::{self, PI};
use crate::spaces::{Interval, ModelSpace};

/// The built-in functionals.
///
/// With `a = sqrt(|K/N|)`: `LogCosh` is `-N log cosh(a x)` on `R` (`K > 0`),
/// `LogSinh` is `-N log sinh(a x)` on `(0, inf)` (`K > 0`), `LogX` is
/// `-N log x` on `(0, inf)` (`K = 0`) and `LogCos` is `-N log cos(a x)` on
/// `(-pi/(2a), pi/(2a))` (`K < 0`). The remaining variants are plain
/// `c |x|^2 / 2`, `a x_1` and a constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Library {
    LogCosh,
    LogSinh,
    LogX,
    LogCos,
    Quadratic { c: f64 },
    Linear { a: f64 },
    Constant { c: f64 },
}

impl Library {
    /// Parses `log-cosh`, `log-sinh`, `log-x`, `log-cos`, `quadratic(c)`,
    /// `linear(a)` and `constant(c)`; the argument defaults to 1 (0 for
    /// `constant`).
    pub fn from_name(name: &str) -> Result<Self> {
        let name = name.trim();
        let (head, arg) = match name.find('(') {
            Some(i) if name.ends_with(')') => {
                let inner = name[i + 1..name.len() - 1].trim();
                let v = inner
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::UnknownFunctional(name.to_string()))?;
                (name[..i].trim(), Some(v))
            }
            Some(_) => return Err(Error::UnknownFunctional(name.to_string())),
            None => (name, None),
        };
        let lib = match (head, arg) {
            ("log-cosh", None) => Library::LogCosh,
            ("log-sinh", None) => Library::LogSinh,
            ("log-x", None) => Library::LogX,
            ("log-cos", None) => Library::LogCos,
            ("quadratic", c) => Library::Quadratic {
                c: c.unwrap_or(1.0),
            },
            ("linear", a) => Library::Linear {
                a: a.unwrap_or(1.0),
            },
            ("constant", c) => Library::Constant {
                c: c.unwrap_or(0.0),
            },
            _ => return Err(Error::UnknownFunctional(name.to_string())),
        };
        Ok(lib)
    }

    pub fn name(&self) -> String {
        match self {
            Library::LogCosh => "log-cosh".to_string(),
            Library::LogSinh => "log-sinh".to_string(),
            Library::LogX => "log-x".to_string(),
            Library::LogCos => "log-cos".to_string(),
            Library::Quadratic { c } => format!("quadratic({c})"),
            Library::Linear { a } => format!("linear({a})"),
            Library::Constant { c } => format!("constant({c})"),
        }
    }

    /// True for the four logarithmic examples, whose shape depends on `(K,N)`.
    pub fn is_dimensional(&self) -> bool {
        matches!(
            self,
            Library::LogCosh | Library::LogSinh | Library::LogX | Library::LogCos
        )
    }

    pub(crate) fn check_sign(&self, p: &CurvatureParams) -> Result<()> {
        let (ok, requirement) = match self {
            Library::LogCosh => (p.k() > 0.0, "K > 0"),
            Library::LogSinh => (p.k() > 0.0, "K > 0"),
            Library::LogX => (p.k() == 0.0, "K = 0"),
            Library::LogCos => (p.k() < 0.0, "K < 0"),
            _ => (true, ""),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::IncompatibleSign {
                name: self.static_name(),
                requirement,
            })
        }
    }

    fn static_name(&self) -> &'static str {
        match self {
            Library::LogCosh => "log-cosh",
            Library::LogSinh => "log-sinh",
            Library::LogX => "log-x",
            Library::LogCos => "log-cos",
            Library::Quadratic { .. } => "quadratic",
            Library::Linear { .. } => "linear",
            Library::Constant { .. } => "constant",
        }
    }

    pub(crate) fn natural_space(&self, p: &CurvatureParams) -> ModelSpace {
        let open = |lo: f64, hi: f64| {
            ModelSpace::interval(
                Interval::new(
                    ExtReal::from_f64(lo).unwrap(),
                    ExtReal::from_f64(hi).unwrap(),
                    true,
                    true,
                )
                .expect("library domains are nonempty"),
            )
        };
        match self {
            Library::LogSinh | Library::LogX => open(0.0, f64::INFINITY),
            Library::LogCos => {
                let w = PI / (2.0 * p.a());
                open(-w, w)
            }
            _ => ModelSpace::real_line(),
        }
    }

    /// `-f/N0` for the logarithmic examples, where `N0` is the construction
    /// parameter; `None` for the others.
    pub(crate) fn log_value(&self, p: &CurvatureParams, x: f64) -> Option<f64> {
        let a = p.a();
        Some(match self {
            Library::LogCosh => math::ln_cosh(a * x),
            Library::LogSinh => math::ln_sinh(a * x),
            Library::LogX => {
                if x <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    math::ln(x)
                }
            }
            Library::LogCos => {
                let u = a * x;
                if u.abs() >= PI / 2.0 {
                    f64::NEG_INFINITY
                } else {
                    math::ln(math::cos(u))
                }
            }
            _ => return None,
        })
    }

    pub(crate) fn value(&self, p: Option<&CurvatureParams>, x: &[f64]) -> f64 {
        match self {
            Library::Quadratic { c } => 0.5 * c * x.iter().map(|v| v * v).sum::<f64>(),
            Library::Linear { a } => a * x[0],
            Library::Constant { c } => *c,
            lib => {
                let p = p.expect("logarithmic examples carry parameters");
                let g = lib.log_value(p, x[0]).expect("logarithmic example");
                if g == f64::NEG_INFINITY {
                    f64::NEG_INFINITY
                } else {
                    -p.n() * g
                }
            }
        }
    }

    pub(crate) fn grad(&self, p: Option<&CurvatureParams>, x: &[f64]) -> alloc::vec::Vec<f64> {
        let mut out = alloc::vec![0.0; x.len()];
        match self {
            Library::Quadratic { c } => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o = c * v;
                }
            }
            Library::Linear { a } => out[0] = *a,
            Library::Constant { .. } => {}
            lib => {
                let p = p.expect("logarithmic examples carry parameters");
                let (n, a, u) = (p.n(), p.a(), p.a() * x[0]);
                out[0] = match lib {
                    Library::LogCosh => -n * a * math::tanh(u),
                    Library::LogSinh => -n * a / math::tanh(u),
                    Library::LogX => -n / x[0],
                    Library::LogCos => n * a * math::tan(u),
                    _ => unreachable!(),
                };
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in [
            "log-cosh",
            "log-sinh",
            "log-x",
            "log-cos",
            "quadratic(2.5)",
            "linear(-1)",
            "constant(3)",
        ] {
            assert_eq!(Library::from_name(s).unwrap().name(), s);
        }
        assert_eq!(
            Library::from_name("quadratic").unwrap(),
            Library::Quadratic { c: 1.0 }
        );
        assert!(Library::from_name("log-tan").is_err());
        assert!(Library::from_name("quadratic(x)").is_err());
    }

    #[test]
    fn sign_requirements() {
        let pos = CurvatureParams::new(1.0, -1.0).unwrap();
        let neg = CurvatureParams::new(-1.0, -1.0).unwrap();
        assert!(Library::LogCos.check_sign(&pos).is_err());
        assert!(Library::LogCos.check_sign(&neg).is_ok());
        assert!(Library::LogCosh.check_sign(&neg).is_err());
        assert!(Library::Quadratic { c: -1.0 }.check_sign(&neg).is_ok());
    }
}
