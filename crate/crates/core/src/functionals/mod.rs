//! Extended-real functionals and their `f_N = exp(-f/N)` transform.
//!
//! `f_N` is never formed directly when it can be avoided: the log-domain
//! value `g = -f/N` is computed instead and ratios are `exp(g(z) - g(y))`.

mod expr;
mod library;

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

pub use expr::Expr;
pub use library::Library;

use crate::coefficients::CurvatureParams;
use crate::error::{Error, Result};
use crate::ext::{ext_add, ext_mul, ExtReal};
use crate::math;
use crate::policy::Tolerance;
use crate::spaces::{Geodesic, Interval, ModelSpace, Point};

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Library {
        lib: Library,
        p: Option<CurvatureParams>,
    },
    Expr(Expr),
    /// `exp(-h/N)` of an inner functional `h`.
    Lifted {
        inner: Box<Functional>,
        n: f64,
    },
}

/// An extended-real functional on a model space.
#[derive(Debug, Clone, PartialEq)]
pub struct Functional {
    name: String,
    space: ModelSpace,
    kind: Kind,
    params: Option<CurvatureParams>,
    scale: f64,
    shift: f64,
}

impl Functional {
    /// A library example with its natural domain. The logarithmic examples
    /// require a compatible sign of `K`.
    pub fn library(lib: Library, p: CurvatureParams) -> Result<Self> {
        lib.check_sign(&p)?;
        Ok(Functional {
            name: lib.name(),
            space: lib.natural_space(&p),
            kind: Kind::Library { lib, p: Some(p) },
            params: Some(p),
            scale: 1.0,
            shift: 0.0,
        })
    }

    /// Shorthand for [`Library::from_name`] followed by [`Functional::library`].
    pub fn from_name(name: &str, p: CurvatureParams) -> Result<Self> {
        Self::library(Library::from_name(name)?, p)
    }

    /// A parameter-free example (`quadratic`, `linear`, `constant`) on `space`.
    pub fn plain(lib: Library, space: ModelSpace) -> Result<Self> {
        if lib.is_dimensional() {
            return Err(Error::InvalidParams("logarithmic examples need (K, N)"));
        }
        Ok(Functional {
            name: lib.name(),
            space,
            kind: Kind::Library { lib, p: None },
            params: None,
            scale: 1.0,
            shift: 0.0,
        })
    }

    /// A user expression in `x` or `x1 .. xn` on `space`.
    pub fn expr(src: &str, space: ModelSpace) -> Result<Self> {
        let e = Expr::parse(src)?;
        if e.arity() > space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: e.arity(),
            });
        }
        Ok(Functional {
            name: src.to_string(),
            space,
            kind: Kind::Expr(e),
            params: None,
            scale: 1.0,
            shift: 0.0,
        })
    }

    /// The functional `f_N = exp(-f/N)` as a functional in its own right.
    pub fn lifted(&self, n: f64) -> Result<Self> {
        if !(n < 0.0) {
            return Err(Error::InvalidParams("N must be strictly negative"));
        }
        Ok(Functional {
            name: alloc::format!("exp(-({})/{})", self.name, n),
            space: self.space.clone(),
            kind: Kind::Lifted {
                inner: Box::new(self.clone()),
                n,
            },
            params: None,
            scale: 1.0,
            shift: 0.0,
        })
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    /// Declares the `(K,N)` the functional is claimed to be convex for.
    pub fn with_params(mut self, p: CurvatureParams) -> Self {
        self.params = Some(p);
        self
    }

    /// Moves the functional onto another space of the same dimension.
    pub fn on(mut self, space: ModelSpace) -> Result<Self> {
        if space.dim() != self.space.dim() && self.space.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: self.space.dim(),
                got: space.dim(),
            });
        }
        let one_d = matches!(self.kind, Kind::Library { lib, .. } if lib.is_dimensional())
            || matches!(&self.kind, Kind::Lifted { .. });
        if one_d && space.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: space.dim(),
            });
        }
        if let Kind::Expr(e) = &self.kind {
            if e.arity() > space.dim() {
                return Err(Error::DimensionMismatch {
                    expected: space.dim(),
                    got: e.arity(),
                });
            }
        }
        self.space = space;
        Ok(self)
    }

    /// Restricts an interval functional to `[lo, hi]` (closure of the
    /// intersection with the current domain).
    pub fn restricted(self, lo: f64, hi: f64) -> Result<Self> {
        let iv = self
            .space
            .as_interval()
            .ok_or(Error::InvalidSpace("restriction needs an interval"))?;
        let lo2 = lo.max(iv.lo());
        let hi2 = hi.min(iv.hi());
        let (oa, ob) = iv.open_flags();
        let open_lo = lo2 == iv.lo() && oa;
        let open_hi = hi2 == iv.hi() && ob;
        let sub = Interval::new(ExtReal::new(lo2)?, ExtReal::new(hi2)?, open_lo, open_hi)?;
        self.on(ModelSpace::interval(sub))
    }

    /// `f + a`.
    pub fn shifted(mut self, a: f64) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::ParamOutOfRange {
                name: "shift",
                value: a,
            });
        }
        self.shift += a;
        Ok(self)
    }

    /// `c f`, with declared parameters scaled to `(cK, cN)`.
    pub fn scaled(mut self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::ParamOutOfRange {
                name: "scale",
                value: c,
            });
        }
        self.scale *= c;
        self.shift *= c;
        self.params = self.params.map(|p| p.scaled(c)).transpose()?;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &ModelSpace {
        &self.space
    }

    pub fn params(&self) -> Option<CurvatureParams> {
        self.params
    }

    pub fn library_kind(&self) -> Option<Library> {
        match &self.kind {
            Kind::Library { lib, .. } => Some(*lib),
            _ => None,
        }
    }

    pub fn has_gradient(&self) -> bool {
        match &self.kind {
            Kind::Library { .. } => true,
            Kind::Expr(_) => false,
            Kind::Lifted { inner, .. } => inner.has_gradient(),
        }
    }

    /// `f(x)` with `x` in the closure of the space.
    pub fn eval(&self, x: &Point) -> Result<ExtReal> {
        self.space.check(x)?;
        self.eval_unchecked(x)
    }

    fn eval_unchecked(&self, x: &Point) -> Result<ExtReal> {
        let base = match &self.kind {
            Kind::Library { lib, p } => ExtReal::new(lib.value(p.as_ref(), x.coords()))
                .map_err(|_| Error::NotANumber("functional value"))?,
            Kind::Expr(e) => ExtReal::new(e.eval(x.coords()))
                .map_err(|_| Error::NotANumber("functional value"))?,
            Kind::Lifted { inner, n } => {
                let g = inner.log_value_unchecked(*n, x)?;
                ExtReal::new(math::exp(g.to_f64()))?
            }
        };
        let scaled = ext_mul(self.scale, base)?;
        ext_add(scaled, ExtReal::Finite(self.shift))
    }

    /// `g = -f(x)/N`, so that `f_N = exp(g)`.
    pub fn log_value(&self, n: f64, x: &Point) -> Result<ExtReal> {
        self.space.check(x)?;
        self.log_value_unchecked(n, x)
    }

    fn log_value_unchecked(&self, n: f64, x: &Point) -> Result<ExtReal> {
        if let Kind::Library { lib, p: Some(p) } = &self.kind {
            if let Some(g0) = lib.log_value(p, x.x()) {
                // f = scale * (-N0 g0) + shift
                let g0 = ExtReal::new(g0)?;
                let f = ext_add(
                    ext_mul(-self.scale * p.n(), g0)?,
                    ExtReal::Finite(self.shift),
                )?;
                return ext_mul(-1.0 / n, f);
            }
        }
        ext_mul(-1.0 / n, self.eval_unchecked(x)?)
    }

    /// `f` as a plain float (`±inf` allowed).
    pub fn value(&self, x: &Point) -> Result<f64> {
        self.eval(x).map(ExtReal::to_f64)
    }

    /// Analytic gradient of `f`.
    pub fn grad(&self, x: &Point) -> Result<Vec<f64>> {
        self.space.check(x)?;
        let mut g = match &self.kind {
            Kind::Library { lib, p } => lib.grad(p.as_ref(), x.coords()),
            Kind::Expr(_) => return Err(Error::MissingGradient),
            Kind::Lifted { inner, n } => {
                let fnv = math::exp(inner.log_value_unchecked(*n, x)?.to_f64());
                let gi = inner.grad(x)?;
                gi.into_iter().map(|v| -fnv * v / n).collect()
            }
        };
        for v in g.iter_mut() {
            *v *= self.scale;
        }
        if g.iter().any(|v| v.is_nan()) {
            return Err(Error::NotANumber("gradient"));
        }
        Ok(g)
    }

    /// `x` is in `D[f]` (finite value).
    pub fn in_domain(&self, x: &Point) -> bool {
        matches!(self.eval(x), Ok(ExtReal::Finite(_)))
    }

    /// `x` is in `D*[f]` (value below `+inf`).
    pub fn in_extended_domain(&self, x: &Point) -> bool {
        matches!(self.eval(x), Ok(v) if v < ExtReal::PosInf)
    }
}

/// `f_N(x) = exp(-f(x)/N)` in `[0, +inf]`.
pub fn eval_fn(f: &Functional, p: &CurvatureParams, x: &Point) -> Result<ExtReal> {
    let g = f.log_value(p.n(), x)?;
    Ok(match g {
        ExtReal::NegInf => ExtReal::ZERO,
        ExtReal::PosInf => ExtReal::PosInf,
        ExtReal::Finite(v) => ExtReal::new(math::exp(v))?,
    })
}

/// `f_N(z) / f_N(y)`, with `y` in `D[f]`.
pub fn fn_ratio(f: &Functional, p: &CurvatureParams, z: &Point, y: &Point) -> Result<ExtReal> {
    let gy = f
        .log_value(p.n(), y)?
        .finite()
        .ok_or(Error::BasePointOutsideDomain)?;
    Ok(match f.log_value(p.n(), z)? {
        ExtReal::NegInf => ExtReal::ZERO,
        ExtReal::PosInf => ExtReal::PosInf,
        ExtReal::Finite(gz) => ExtReal::new(math::exp(gz - gy))?,
    })
}

/// `1 - f_N(z)/f_N(y)` computed without cancellation.
pub fn one_minus_ratio(
    f: &Functional,
    p: &CurvatureParams,
    z: &Point,
    y: &Point,
) -> Result<ExtReal> {
    let gy = f
        .log_value(p.n(), y)?
        .finite()
        .ok_or(Error::BasePointOutsideDomain)?;
    Ok(match f.log_value(p.n(), z)? {
        ExtReal::NegInf => ExtReal::Finite(1.0),
        ExtReal::PosInf => ExtReal::NegInf,
        ExtReal::Finite(gz) => ExtReal::new(-math::expm1(gz - gy))?,
    })
}

/// Lower Dini derivative of `f` at the start of `g`, with the default step floor.
pub fn directional_derivative(f: &Functional, g: &Geodesic) -> Result<ExtReal> {
    directional_derivative_with(f, g, &Tolerance::default())
}

/// Difference quotients `(f(g_t) - f(g_0))/t` for `t = h_min 2^{11-k}`,
/// `k = 0..12`; the minimum over the three finest levels.
pub fn directional_derivative_with(
    f: &Functional,
    g: &Geodesic,
    tol: &Tolerance,
) -> Result<ExtReal> {
    let f0 = f
        .eval(g.start())?
        .finite()
        .ok_or(Error::BasePointOutsideDomain)?;
    if g.length() == 0.0 {
        return Ok(ExtReal::ZERO);
    }
    let mut best = ExtReal::PosInf;
    for k in 9..12 {
        let t = (tol.h_min * (1u64 << (11 - k)) as f64).min(1.0);
        let q = match f.eval(&g.at(t))? {
            ExtReal::Finite(v) => ExtReal::new((v - f0) / t)?,
            inf => inf,
        };
        best = best.min(q);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(k: f64, n: f64) -> CurvatureParams {
        CurvatureParams::new(k, n).unwrap()
    }

    fn pt(x: f64) -> Point {
        Point::scalar(x)
    }

    #[test]
    fn log_x_values() {
        let q = p(0.0, -1.0);
        let f = Functional::from_name("log-x", q).unwrap();
        assert!((f.value(&pt(2.0)).unwrap() - core::f64::consts::LN_2).abs() < 1e-15);
        assert!((eval_fn(&f, &q, &pt(2.0)).unwrap().to_f64() - 2.0).abs() < 1e-15);
        assert!((fn_ratio(&f, &q, &pt(1.0), &pt(2.0)).unwrap().to_f64() - 0.5).abs() < 1e-15);
        assert_eq!(
            fn_ratio(&f, &q, &pt(1.3), &pt(1.3)).unwrap(),
            ExtReal::Finite(1.0)
        );
        assert_eq!(f.eval(&pt(0.0)).unwrap(), ExtReal::NegInf);
        assert_eq!(eval_fn(&f, &q, &pt(0.0)).unwrap(), ExtReal::ZERO);
        assert_eq!(
            fn_ratio(&f, &q, &pt(1.0), &pt(0.0)),
            Err(Error::BasePointOutsideDomain)
        );
        assert_eq!(f.eval(&pt(-1.0)), Err(Error::PointOutsideSpace));
    }

    #[test]
    fn infinite_values_map_through() {
        let q = p(0.0, -1.0);
        let f = Functional::expr("1/x", ModelSpace::real_line()).unwrap();
        assert_eq!(f.eval(&pt(0.0)).unwrap(), ExtReal::PosInf);
        assert_eq!(eval_fn(&f, &q, &pt(0.0)).unwrap(), ExtReal::PosInf);
        assert_eq!(
            fn_ratio(&f, &q, &pt(0.0), &pt(1.0)).unwrap(),
            ExtReal::PosInf
        );
        assert!(f.in_domain(&pt(1.0)) && !f.in_extended_domain(&pt(0.0)));
    }

    #[test]
    fn library_examples() {
        let f = Functional::from_name("log-cos", p(-1.0, -1.0)).unwrap();
        assert_eq!(f.value(&pt(0.0)).unwrap(), 0.0);
        for x in [-1.2, -0.4, 0.3, 1.5] {
            assert!(f.value(&pt(x)).unwrap() < 0.0);
        }
        assert_eq!(
            f.eval(&pt(core::f64::consts::FRAC_PI_2)).unwrap(),
            ExtReal::NegInf
        );

        let f = Functional::from_name("log-cosh", p(1.0, -1.0)).unwrap();
        assert_eq!(f.value(&pt(0.0)).unwrap(), 0.0);
        for x in [-2.0, 0.5, 3.0] {
            assert!((f.grad(&pt(x)).unwrap()[0] - math::tanh(x)).abs() < 1e-15);
        }
        assert!(matches!(
            Functional::from_name("log-cos", p(1.0, -1.0)),
            Err(Error::IncompatibleSign { .. })
        ));
    }

    #[test]
    fn log_domain_survives_overflow() {
        let q = p(1.0, -1.0);
        let f = Functional::from_name("log-cosh", q).unwrap();
        // cosh(800) overflows, its logarithm does not
        let r = fn_ratio(&f, &q, &pt(801.0), &pt(800.0)).unwrap().to_f64();
        assert!((r - core::f64::consts::E).abs() < 1e-9);
    }

    #[test]
    fn directional_derivative_examples() {
        let r = ModelSpace::real_line();
        let quad = Functional::plain(Library::Quadratic { c: 1.0 }, r.clone()).unwrap();
        let g = r.geodesic(&pt(1.0), &pt(0.0)).unwrap();
        assert!((directional_derivative(&quad, &g).unwrap().to_f64() + 1.0).abs() < 1e-5);
        let c = Functional::plain(Library::Constant { c: 2.0 }, r.clone()).unwrap();
        assert_eq!(directional_derivative(&c, &g).unwrap(), ExtReal::ZERO);
        let lx = Functional::from_name("log-x", p(0.0, -1.0)).unwrap();
        let g = lx.space().geodesic(&pt(1.0), &pt(2.0)).unwrap();
        assert!((directional_derivative(&lx, &g).unwrap().to_f64() - 1.0).abs() < 1e-5);
        let abs = Functional::expr("abs(x)", r.clone()).unwrap();
        let g = r.geodesic(&pt(0.0), &pt(-1.0)).unwrap();
        assert!((directional_derivative(&abs, &g).unwrap().to_f64() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lifted_is_fn() {
        let q = p(-1.0, -1.0);
        let f = Functional::from_name("log-cos", q).unwrap();
        let fnn = f.lifted(q.n()).unwrap();
        for x in [-1.0, 0.0, 0.7] {
            assert!((fnn.value(&pt(x)).unwrap() - math::cos(x)).abs() < 1e-15);
            assert!((fnn.grad(&pt(x)).unwrap()[0] + math::sin(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn scale_and_shift() {
        let q = p(1.0, -1.0);
        let f = Functional::from_name("log-cosh", q).unwrap();
        let g = f.clone().scaled(2.0).unwrap().shifted(0.5).unwrap();
        assert_eq!(g.params().unwrap(), p(2.0, -2.0));
        let x = pt(0.8);
        assert!((g.value(&x).unwrap() - (2.0 * f.value(&x).unwrap() + 0.5)).abs() < 1e-14);
        let lg = g.log_value(-2.0, &x).unwrap().to_f64();
        assert!((lg - (-(g.value(&x).unwrap()) / -2.0)).abs() < 1e-14);
    }

    #[test]
    fn restriction() {
        let f = Functional::from_name("log-x", p(0.0, -1.0))
            .unwrap()
            .restricted(0.5, 2.0)
            .unwrap();
        assert!(f.eval(&pt(2.5)).is_err());
        assert!(f.eval(&pt(0.5)).is_ok());
    }

    fn smooth_library() -> impl Strategy<Value = (Functional, CurvatureParams)> {
        prop_oneof![
            Just(("log-x", p(0.0, -1.0))),
            Just(("log-cosh", p(1.0, -1.0))),
            Just(("log-sinh", p(2.0, -0.5))),
            Just(("log-cos", p(-1.0, -1.0))),
            Just(("log-cos", p(-0.5, -2.0))),
        ]
        .prop_map(|(n, q)| (Functional::from_name(n, q).unwrap(), q))
    }

    proptest! {
        #[test]
        fn chain_rule((f, q) in smooth_library(), u in 0.05f64..0.95, v in 0.05f64..0.95) {
            let (lo, hi) = f.space().sample_box(0.05, 3.0)[0];
            let x0 = pt(lo + u * (hi - lo));
            let x1 = pt(lo + v * (hi - lo));
            prop_assume!((x0.x() - x1.x()).abs() > 1e-3);
            let g = f.space().geodesic(&x0, &x1).unwrap();
            let df = directional_derivative(&f, &g).unwrap().to_f64();
            let fnn = f.lifted(q.n()).unwrap();
            let dfn = directional_derivative(&fnn, &g).unwrap().to_f64();
            let fn0 = eval_fn(&f, &q, &x0).unwrap().to_f64();
            let expect = -fn0 * df / q.n();
            prop_assert!((dfn - expect).abs() <= 1e-4 * (1.0 + expect.abs()), "{} vs {}", dfn, expect);
        }

        #[test]
        fn lower_semicontinuous_at_boundary(k in 1u32..40) {
            // f(x_k) stays above the limit value along x_k -> 0
            let f = Functional::from_name("log-x", p(0.0, -1.0)).unwrap();
            let xk = pt(libm::pow(2.0, -(k as f64)));
            prop_assert!(f.eval(&xk).unwrap() >= f.eval(&pt(0.0)).unwrap());
        }

        #[test]
        fn gradient_matches_difference((f, _q) in smooth_library(), u in 0.1f64..0.9) {
            let (lo, hi) = f.space().sample_box(0.1, 3.0)[0];
            let x = lo + u * (hi - lo);
            let h = 1e-6;
            let fd = (f.value(&pt(x + h)).unwrap() - f.value(&pt(x - h)).unwrap()) / (2.0 * h);
            let g = f.grad(&pt(x)).unwrap()[0];
            prop_assert!((fd - g).abs() <= 1e-5 * (1.0 + g.abs()));
        }
    }
}
