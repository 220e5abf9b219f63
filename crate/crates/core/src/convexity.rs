//! Sampled verification of `lambda`-convexity and `(K,N)`-convexity.
//!
//! Pairs are drawn from the sampling box of the domain, the geodesic
//! parameter runs over `k/32`, and the worst excess over the allowance
//! `abs + rel * max(|values|, 1)` is reported with its witness.

use alloc::vec::Vec;

use crate::coefficients::{sigma, CurvatureParams};
use crate::error::{Error, Result};
use crate::ext::{ext_mul_conv, ExtReal};
use crate::functionals::{eval_fn, Functional};
use crate::math;
use crate::policy::{SampleSpec, Tolerance};
use crate::spaces::{Point, DEFAULT_MARGIN, DEFAULT_SPAN};

/// Number of subintervals of the geodesic parameter grid.
pub const T_STEPS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConvexityKind {
    /// `f(g_t) <= (1-t) f(x0) + t f(x1) - lambda/2 t(1-t) d^2`.
    Lambda { lambda: f64 },
    /// `f_N(g_t) <= sigma^{(1-t)}(d) f_N(x0) + sigma^{(t)}(d) f_N(x1)`.
    KN { params: CurvatureParams },
}

/// The worst sampled triple.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub x0: Point,
    pub x1: Point,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityReport {
    pub kind: ConvexityKind,
    pub pairs_tested: usize,
    pub t_grid_size: usize,
    /// Largest raw `lhs - rhs`.
    pub max_residual: f64,
    /// Largest `lhs - rhs - allowance`; the check passes iff this is `<= 0`.
    pub max_violation: f64,
    pub worst_witness: Option<Witness>,
    pub pass: bool,
}

struct Tally {
    pairs: usize,
    max_residual: f64,
    max_violation: f64,
    worst: Option<Witness>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            pairs: 0,
            max_residual: f64::NEG_INFINITY,
            max_violation: f64::NEG_INFINITY,
            worst: None,
        }
    }

    fn record(&mut self, residual: f64, violation: f64, x0: &Point, x1: &Point, t: f64) {
        self.max_residual = self.max_residual.max(residual);
        if violation > self.max_violation {
            self.max_violation = violation;
            self.worst = Some(Witness {
                x0: x0.clone(),
                x1: x1.clone(),
                t,
            });
        }
    }

    fn finish(self, kind: ConvexityKind) -> ConvexityReport {
        let max_violation = if self.pairs == 0 {
            0.0
        } else {
            self.max_violation
        };
        ConvexityReport {
            kind,
            pairs_tested: self.pairs,
            t_grid_size: T_STEPS + 1,
            max_residual: if self.pairs == 0 {
                0.0
            } else {
                self.max_residual
            },
            max_violation,
            worst_witness: self.worst,
            pass: max_violation <= 0.0,
        }
    }
}

/// Draws up to `spec.count` pairs accepted by `keep`.
fn sample_pairs<F>(f: &Functional, spec: &SampleSpec, mut keep: F) -> Result<Vec<(Point, Point)>>
where
    F: FnMut(&Point, &Point) -> bool,
{
    let space = f.space();
    let bounds = space.sample_box(DEFAULT_MARGIN, DEFAULT_SPAN);
    let mut s = spec.sampler();
    let mut out = Vec::with_capacity(spec.count);
    let budget = spec.count.saturating_mul(50).max(1000);
    for _ in 0..budget {
        if out.len() == spec.count {
            break;
        }
        let x0 = space.sample(&mut s, &bounds);
        let x1 = space.sample(&mut s, &bounds);
        if keep(&x0, &x1) {
            out.push((x0, x1));
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyDomain);
    }
    Ok(out)
}

fn t_grid() -> impl Iterator<Item = f64> {
    (0..=T_STEPS).map(|k| k as f64 / T_STEPS as f64)
}

/// Checks the `lambda`-convexity inequality on sampled pairs of `D[f]`.
pub fn check_lambda_convex(
    f: &Functional,
    lambda: f64,
    spec: &SampleSpec,
    tol: &Tolerance,
) -> Result<ConvexityReport> {
    let pairs = sample_pairs(f, spec, |a, b| f.in_domain(a) && f.in_domain(b))?;
    let mut tally = Tally::new();
    for (x0, x1) in &pairs {
        tally.pairs += 1;
        let g = f.space().geodesic(x0, x1)?;
        let d = g.length();
        let f0 = f.value(x0)?;
        let f1 = f.value(x1)?;
        let allowance = tol.abs + tol.rel * f0.abs().max(f1.abs()).max(1.0);
        for t in t_grid() {
            let rhs = (1.0 - t) * f0 + t * f1 - 0.5 * lambda * t * (1.0 - t) * d * d;
            let residual = match f.eval(&g.at(t))? {
                ExtReal::NegInf => continue,
                ExtReal::PosInf => f64::INFINITY,
                ExtReal::Finite(v) => v - rhs,
            };
            tally.record(residual, residual - allowance, x0, x1, t);
        }
    }
    Ok(tally.finish(ConvexityKind::Lambda { lambda }))
}

/// Checks the `(K,N)`-convexity inequality on sampled pairs of `D*[f]`.
/// For `K < 0` only pairs closer than `pi sqrt(N/K)` are drawn.
pub fn check_kn_convex(
    f: &Functional,
    p: &CurvatureParams,
    spec: &SampleSpec,
    tol: &Tolerance,
) -> Result<ConvexityReport> {
    let cap = p.distance_cap();
    let pairs = sample_pairs(f, spec, |a, b| {
        let close = cap.is_none_or(|c| crate::spaces::raw_dist(a, b) < c);
        close && f.in_extended_domain(a) && f.in_extended_domain(b)
    })?;
    let mut tally = Tally::new();
    for (x0, x1) in &pairs {
        tally.pairs += 1;
        let g = f.space().geodesic(x0, x1)?;
        let d = g.length();
        let fn0 = eval_fn(f, p, x0)?;
        let fn1 = eval_fn(f, p, x1)?;
        let allowance = tol.allowance(fn0.max(fn1).to_f64().min(f64::MAX));
        for t in t_grid() {
            let s_hi = sigma(p, 1.0 - t, d)?.value().to_f64();
            let s_lo = sigma(p, t, d)?.value().to_f64();
            let rhs = crate::ext::ext_add(ext_mul_conv(s_hi, fn0)?, ext_mul_conv(s_lo, fn1)?)?;
            let rhs = match rhs {
                ExtReal::PosInf => continue,
                other => other.to_f64(),
            };
            let lhs = eval_fn(f, p, &g.at(t))?.to_f64();
            let residual = lhs - rhs;
            tally.record(residual, residual - allowance, x0, x1, t);
        }
    }
    Ok(tally.finish(ConvexityKind::KN { params: *p }))
}

/// Sample count used by [`check_gluing`].
pub const GLUING_SAMPLES: usize = 400;

/// Numerical form of the gluing property: `(K,N)`-convexity on `[a,c]`
/// and on `[b,d]` implies it on `[a,d]`. Returns the truth value of the
/// implication for the sampled checks.
pub fn check_gluing(
    f: &Functional,
    p: &CurvatureParams,
    abcd: [f64; 4],
    tol: &Tolerance,
) -> Result<bool> {
    check_gluing_with(f, p, abcd, &SampleSpec::new(0x9100, GLUING_SAMPLES), tol)
}

pub fn check_gluing_with(
    f: &Functional,
    p: &CurvatureParams,
    [a, b, c, d]: [f64; 4],
    spec: &SampleSpec,
    tol: &Tolerance,
) -> Result<bool> {
    let iv = f.space().as_interval().ok_or(Error::BadBracket)?;
    let ordered = a < b && b < c && c < d;
    if !ordered || !iv.in_closure(a) || !iv.in_closure(d) {
        return Err(Error::BadBracket);
    }
    let on = |lo: f64, hi: f64| -> Result<bool> {
        let piece = f.clone().restricted(lo, hi)?;
        Ok(check_kn_convex(&piece, p, spec, tol)?.pass)
    };
    let left = on(a, c)?;
    let right = on(b, d)?;
    let whole = on(a, d)?;
    Ok(!(left && right) || whole)
}

/// The convexity modulus of `f_N` implied by `(K,N)`-convexity of `f`:
/// `0` for `K >= 0`, `-(K/N) exp(-M/N)` for `K < 0` with `f <= M`.
pub fn lifting_lambda(p: &CurvatureParams, m: ExtReal) -> Result<f64> {
    if p.k() >= 0.0 {
        return Ok(0.0);
    }
    match m {
        ExtReal::Finite(m) => Ok(-(p.k() / p.n()) * math::exp(-m / p.n())),
        ExtReal::PosInf => Err(Error::UnboundedAbove),
        ExtReal::NegInf => Err(Error::ParamOutOfRange {
            name: "M",
            value: f64::NEG_INFINITY,
        }),
    }
}

/// Runs [`check_lambda_convex`] on `f_N` with the modulus from [`lifting_lambda`].
pub fn check_lifting(
    f: &Functional,
    p: &CurvatureParams,
    m: ExtReal,
    spec: &SampleSpec,
    tol: &Tolerance,
) -> Result<ConvexityReport> {
    let lambda = lifting_lambda(p, m)?;
    check_lambda_convex(&f.lifted(p.n())?, lambda, spec, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::Library;
    use crate::spaces::{Interval, ModelSpace};

    fn p(k: f64, n: f64) -> CurvatureParams {
        CurvatureParams::new(k, n).unwrap()
    }

    fn spec() -> SampleSpec {
        SampleSpec::new(7, 300)
    }

    fn quad(c: f64) -> Functional {
        Functional::plain(Library::Quadratic { c }, ModelSpace::real_line()).unwrap()
    }

    #[test]
    fn lambda_examples() {
        let tol = Tolerance::default();
        let r = check_lambda_convex(&quad(1.0), 1.0, &spec(), &tol).unwrap();
        assert!(r.pass);
        assert!(r.max_residual.abs() < 1e-12);
        assert_eq!(r.t_grid_size, 33);
        let r = check_lambda_convex(&quad(1.0), 1.5, &spec(), &tol).unwrap();
        assert!(!r.pass);
        let w = r.worst_witness.unwrap();
        let d = (w.x0.x() - w.x1.x()).abs();
        // the residual of the worst triple is (lambda - 1)/2 t(1-t) d^2
        assert!((r.max_residual - 0.25 * w.t * (1.0 - w.t) * d * d).abs() < 1e-9);
        let half_pi = core::f64::consts::FRAC_PI_2;
        let cos = Functional::expr(
            "cos(x)",
            ModelSpace::interval(Interval::open(-half_pi, half_pi).unwrap()),
        )
        .unwrap();
        assert!(check_lambda_convex(&cos, -1.0, &spec(), &tol).unwrap().pass);
    }

    #[test]
    fn kn_examples() {
        let tol = Tolerance::default();
        let lx = Functional::from_name("log-x", p(0.0, -1.0)).unwrap();
        assert!(
            check_kn_convex(&lx, &p(0.0, -1.0), &spec(), &tol)
                .unwrap()
                .pass
        );
        let lc = Functional::from_name("log-cos", p(-1.0, -1.0)).unwrap();
        let r = check_kn_convex(&lc, &p(-1.0, -1.0), &spec(), &tol).unwrap();
        assert!(r.pass && r.max_residual.abs() < 1e-12, "{r:?}");
        let r = check_kn_convex(&quad(-1.0), &p(0.0, -1.0), &spec(), &tol).unwrap();
        assert!(!r.pass && r.worst_witness.is_some());
    }

    #[test]
    fn concave_midpoint_violation() {
        // f = -x^2/2 with N = -1: f_N = exp(-x^2/2), x0 = -1, x1 = 1, t = 1/2
        let f = quad(-1.0);
        let q = p(0.0, -1.0);
        let lhs = eval_fn(&f, &q, &Point::scalar(0.0)).unwrap().to_f64();
        let rhs = eval_fn(&f, &q, &Point::scalar(1.0)).unwrap().to_f64();
        assert!((lhs - 1.0).abs() < 1e-15);
        assert!((rhs - math::exp(-0.5)).abs() < 1e-15);
        assert!(lhs > rhs);
    }

    #[test]
    fn gluing_examples() {
        let tol = Tolerance::default();
        let lx = Functional::from_name("log-x", p(0.0, -1.0)).unwrap();
        assert!(check_gluing(&lx, &p(0.0, -1.0), [0.5, 1.0, 1.5, 2.0], &tol).unwrap());
        let lc = Functional::from_name("log-cos", p(-1.0, -1.0)).unwrap();
        assert!(check_gluing(&lc, &p(-1.0, -1.0), [-1.0, -0.3, 0.3, 1.0], &tol).unwrap());
        let patched = Functional::expr("max(log(x), 40*(x - 2.5))", lx.space().clone()).unwrap();
        assert!(check_gluing(&patched, &p(0.0, -1.0), [0.5, 1.0, 1.5, 2.0], &tol).unwrap());
        assert_eq!(
            check_gluing(&lx, &p(0.0, -1.0), [1.0, 0.5, 1.5, 2.0], &tol),
            Err(Error::BadBracket)
        );
    }

    #[test]
    fn lifting_examples() {
        let tol = Tolerance::default();
        let lx = Functional::from_name("log-x", p(0.0, -1.0)).unwrap();
        assert!(
            check_lifting(&lx, &p(0.0, -1.0), ExtReal::PosInf, &spec(), &tol)
                .unwrap()
                .pass
        );
        let lc = Functional::from_name("log-cos", p(-1.0, -1.0)).unwrap();
        assert_eq!(lifting_lambda(&p(-1.0, -1.0), ExtReal::ZERO).unwrap(), -1.0);
        assert!(
            check_lifting(&lc, &p(-1.0, -1.0), ExtReal::ZERO, &spec(), &tol)
                .unwrap()
                .pass
        );
        assert_eq!(
            check_lifting(&lc, &p(-1.0, -1.0), ExtReal::PosInf, &spec(), &tol),
            Err(Error::UnboundedAbove)
        );
        let lch = Functional::from_name("log-cosh", p(1.0, -1.0)).unwrap();
        assert!(
            check_lifting(&lch, &p(1.0, -1.0), ExtReal::PosInf, &spec(), &tol)
                .unwrap()
                .pass
        );
    }

    #[test]
    fn quadratic_is_kn_convex_for_every_n() {
        let tol = Tolerance::default();
        for n in [-0.1, -1.0, -5.0, -40.0] {
            assert!(
                check_kn_convex(&quad(1.0), &p(1.0, n), &spec(), &tol)
                    .unwrap()
                    .pass,
                "N = {n}"
            );
        }
    }

    #[test]
    fn parameter_monotonicity() {
        let tol = Tolerance::default();
        let cases = [
            ("log-cosh", p(1.0, -1.0)),
            ("log-cos", p(-1.0, -1.0)),
            ("log-x", p(0.0, -1.0)),
        ];
        for (name, q) in cases {
            let f = Functional::from_name(name, q).unwrap();
            for (dk, nf) in [(0.0, 0.5), (0.5, 1.0), (1.0, 0.3), (0.2, 0.9)] {
                let q2 = p(q.k() - dk, q.n() * nf);
                let r = check_kn_convex(&f, &q2, &SampleSpec::new(3, 150), &tol).unwrap();
                assert!(r.pass, "{name} at ({}, {})", q2.k(), q2.n());
            }
        }
    }

    #[test]
    fn shift_and_scale_laws() {
        let tol = Tolerance::default();
        for (name, q) in [
            ("log-cosh", p(1.0, -1.0)),
            ("log-sinh", p(1.0, -1.0)),
            ("log-x", p(0.0, -1.0)),
            ("log-cos", p(-1.0, -1.0)),
        ] {
            let f = Functional::from_name(name, q).unwrap();
            let shifted = f.clone().shifted(3.0).unwrap();
            assert!(
                check_kn_convex(&shifted, &q, &spec(), &tol).unwrap().pass,
                "{name} + a"
            );
            let scaled = f.scaled(2.5).unwrap();
            let q2 = scaled.params().unwrap();
            assert!(
                check_kn_convex(&scaled, &q2, &spec(), &tol).unwrap().pass,
                "c {name}"
            );
        }
    }

    #[test]
    fn deterministic() {
        let tol = Tolerance::default();
        let a = check_kn_convex(&quad(-1.0), &p(0.0, -1.0), &spec(), &tol).unwrap();
        let b = check_kn_convex(&quad(-1.0), &p(0.0, -1.0), &spec(), &tol).unwrap();
        assert_eq!(a, b);
    }
}
