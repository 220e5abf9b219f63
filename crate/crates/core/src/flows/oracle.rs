//! Closed-form gradient flows.
//!
//! With `u = a y`, `a = sqrt(|K/N|)`:
//!
//! | name       | solution                                  | boundary hit           |
//! |------------|-------------------------------------------|------------------------|
//! | `log-x`    | `y^2 = y0^2 + 2 N t`                      | `t = -y0^2 / (2N)`     |
//! | `log-cosh` | `sinh u = sinh u0 e^{-K t}`               | never                  |
//! | `log-sinh` | `cosh u = cosh u0 e^{-K t}`               | `u = 0`                |
//! | `log-cos`  | `sin u = sin u0 e^{-K t}`                 | `|sin u| = 1`          |
//! | `quadratic(c)` | `y = y0 e^{-c t}`                     | never                  |
//! | `linear(a)` | `y = y0 - a t e_1`                       | never                  |
//! | `fN-linear` | `z = z0 - s` on `[0, inf)`               | `s = z0`               |
//! | `fN-cos`   | `tan(u/2) = tan(u0/2) e^{(K/N) s}`        | `|u| = pi/2`           |
//! | `fN-cosh`  | `tanh(u/2) = tanh(u0/2) e^{(K/N) s}`      | never                  |
//! | `fN-sinh`  | `gd(u) = gd(u0) + (K/N) s`                | `u = 0`                |
//!
//! The `fN-*` entries are flows of `f_N` for the matching logarithmic example.

use alloc::string::ToString;
use alloc::vec::Vec;

use super::{Curve, CurveMeta, TimeGrid};
use crate::coefficients::CurvatureParams;
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::functionals::{Functional, Library};
use crate::math::{self, PI};
use crate::spaces::{Interval, ModelSpace, Point};

/// Registered oracle names (parametrized ones listed by stem).
pub const ORACLES: &[&str] = &[
    "log-x",
    "log-cosh",
    "log-sinh",
    "log-cos",
    "quadratic",
    "linear",
    "constant",
    "fN-linear",
    "fN-cos",
    "fN-cosh",
    "fN-sinh",
];

#[derive(Debug, Clone, Copy)]
enum Oracle {
    Lib(Library),
    FnLinear,
    FnCos,
    FnCosh,
    FnSinh,
}

fn lookup(name: &str) -> Result<Oracle> {
    match name.trim() {
        "fN-linear" => Ok(Oracle::FnLinear),
        "fN-cos" => Ok(Oracle::FnCos),
        "fN-cosh" => Ok(Oracle::FnCosh),
        "fN-sinh" => Ok(Oracle::FnSinh),
        other => Library::from_name(other)
            .map(Oracle::Lib)
            .map_err(|_| Error::NoOracle(other.to_string())),
    }
}

/// The functional whose gradient flow the named oracle is.
pub fn oracle_functional(name: &str, p: &CurvatureParams) -> Result<Functional> {
    let lifted = |lib: &str, k_sign: f64| -> Result<Functional> {
        if p.k() * k_sign <= 0.0 {
            return Err(Error::IncompatibleSign {
                name: "fN oracle",
                requirement: if k_sign > 0.0 { "K > 0" } else { "K < 0" },
            });
        }
        Ok(Functional::from_name(lib, *p)?.lifted(p.n())?.named(name))
    };
    match lookup(name)? {
        Oracle::Lib(lib) if lib.is_dimensional() => Functional::library(lib, *p),
        Oracle::Lib(lib) => Functional::plain(lib, ModelSpace::real_line()),
        Oracle::FnLinear => {
            let half = Interval::new(ExtReal::ZERO, ExtReal::PosInf, false, true)?;
            Ok(
                Functional::plain(Library::Linear { a: 1.0 }, ModelSpace::interval(half))?
                    .named("fN-linear"),
            )
        }
        Oracle::FnCos => lifted("log-cos", -1.0),
        Oracle::FnCosh => lifted("log-cosh", 1.0),
        Oracle::FnSinh => lifted("log-sinh", 1.0),
    }
}

/// Samples the closed-form flow from `y0` on `grid`.
pub fn oracle_flow(name: &str, p: &CurvatureParams, y0: &Point, grid: &TimeGrid) -> Result<Curve> {
    let oracle = lookup(name)?;
    let f = oracle_functional(name, p)?;
    f.space().check(y0)?;
    let (k, n, a) = (p.k(), p.n(), p.a());
    let x0 = y0.coords()[0];
    let u0 = a * x0;
    let one = |v: f64| Point::scalar(v);

    // (solution at t, stop time)
    type Sol<'a> = alloc::boxed::Box<dyn Fn(f64) -> Point + 'a>;
    let (sol, stop): (Sol, Option<f64>) = match oracle {
        Oracle::Lib(Library::LogX) => {
            let stop = -x0 * x0 / (2.0 * n);
            (
                alloc::boxed::Box::new(move |t| one(math::sqrt((x0 * x0 + 2.0 * n * t).max(0.0)))),
                Some(stop),
            )
        }
        Oracle::Lib(Library::LogCosh) => (
            alloc::boxed::Box::new(move |t| {
                one(math::asinh(math::sinh(u0) * math::exp(-k * t)) / a)
            }),
            None,
        ),
        Oracle::Lib(Library::LogSinh) => {
            let stop = math::ln(math::cosh(u0)) / k;
            let f = move |t: f64| {
                let c = math::cosh(u0) * math::exp(-k * t);
                one(if c <= 1.0 { 0.0 } else { math::acosh(c) / a })
            };
            (alloc::boxed::Box::new(f), Some(stop))
        }
        Oracle::Lib(Library::LogCos) => {
            let s0 = math::sin(u0);
            let stop = (s0 != 0.0).then(|| -math::ln(s0.abs()) / (-k));
            let f = move |t: f64| {
                let s = s0 * math::exp(-k * t);
                one(if s.abs() >= 1.0 {
                    s.signum() * PI / 2.0 / a
                } else {
                    math::asin(s) / a
                })
            };
            (alloc::boxed::Box::new(f), stop)
        }
        Oracle::Lib(Library::Quadratic { c }) => {
            let y = y0.clone();
            (
                alloc::boxed::Box::new(move |t| {
                    Point(y.coords().iter().map(|v| v * math::exp(-c * t)).collect())
                }),
                None,
            )
        }
        Oracle::Lib(Library::Linear { a: slope }) => {
            let y = y0.clone();
            let f = move |t: f64| {
                let mut v = y.clone();
                v.0[0] -= slope * t;
                v
            };
            (alloc::boxed::Box::new(f), None)
        }
        Oracle::Lib(Library::Constant { .. }) => {
            let y = y0.clone();
            (alloc::boxed::Box::new(move |_| y.clone()), None)
        }
        Oracle::FnLinear => (
            alloc::boxed::Box::new(move |s| one((x0 - s).max(0.0))),
            Some(x0),
        ),
        Oracle::FnCos => {
            let r = k / n;
            let q0 = math::tan(u0 / 2.0);
            let stop = (q0 != 0.0).then(|| -math::ln(q0.abs()) / r);
            let f = move |s: f64| one(2.0 * math::atan(q0 * math::exp(r * s)) / a);
            (alloc::boxed::Box::new(f), stop)
        }
        Oracle::FnCosh => {
            let r = k / n;
            let f =
                move |s: f64| one(2.0 * math::atanh(math::tanh(u0 / 2.0) * math::exp(r * s)) / a);
            (alloc::boxed::Box::new(f), None)
        }
        Oracle::FnSinh => {
            let r = k / n;
            let gd0 = 2.0 * math::atan(math::tanh(u0 / 2.0));
            let f = move |s: f64| {
                let gd = gd0 + r * s;
                one(if gd <= 0.0 {
                    0.0
                } else {
                    2.0 * math::atanh(math::tan(gd / 2.0)) / a
                })
            };
            (alloc::boxed::Box::new(f), Some(-gd0 / r))
        }
    };
    let points: Vec<Point> = grid
        .times()
        .iter()
        .map(|&t| match stop {
            Some(s) if t >= s => f.space().clamp(&sol(s)),
            _ => sol(t),
        })
        .collect();
    let curve = Curve::new(grid.times().to_vec(), points)?;
    let meta = CurveMeta {
        method: "oracle".to_string(),
        tau: None,
        functional: name.to_string(),
        k: Some(k),
        n: Some(n),
    };
    Ok(curve.with_stop_time(stop).with_meta(meta))
}
