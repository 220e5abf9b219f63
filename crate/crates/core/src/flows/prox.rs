//! The proximal map `argmin_w d^2(v, w)/(2 tau) + f(w)`.
//!
//! In one dimension the minimizer is bracketed by marching downhill from
//! `v`, located by golden-section search and, when an analytic gradient
//! exists, polished by bisection on the optimality condition. In `R^n` a
//! damped Newton iteration with a finite-difference Hessian is used, falling
//! back to gradient steps. In both cases this is the local minimizer reached
//! by descent from `v`; reaching a point where `f = -inf` is an error.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::functionals::Functional;
use crate::math;
use crate::policy::Tolerance;
use crate::spaces::{ModelSpace, Point};

/// One implicit Euler step.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxStep {
    pub tau: f64,
    pub input: Point,
    pub output: Point,
    pub objective: f64,
}

const GOLDEN: f64 = 0.381_966_011_250_105_1;
const MAX_MARCH: usize = 400;

/// Computes one proximal step of `f` from `v`.
pub fn prox(f: &Functional, tau: f64, v: &Point, tol: &Tolerance) -> Result<ProxStep> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::ParamOutOfRange {
            name: "tau",
            value: tau,
        });
    }
    f.space().check(v)?;
    let output = if v.dim() == 1 {
        Point::scalar(prox_1d(f, tau, v.x(), tol)?)
    } else {
        prox_nd(f, tau, v, tol)?
    };
    let objective = objective(f, tau, v, &output)?;
    Ok(ProxStep {
        tau,
        input: v.clone(),
        output,
        objective,
    })
}

fn objective(f: &Functional, tau: f64, v: &Point, w: &Point) -> Result<f64> {
    let d2: f64 = v
        .coords()
        .iter()
        .zip(w.coords())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let fw = f.value(w)?;
    if fw == f64::NEG_INFINITY {
        return Err(Error::NotBoundedBelow { at: w.coords()[0] });
    }
    Ok(d2 / (2.0 * tau) + fw)
}

fn bounds(space: &ModelSpace) -> (f64, f64) {
    match space.as_interval() {
        Some(iv) => (iv.lo(), iv.hi()),
        None => (f64::NEG_INFINITY, f64::INFINITY),
    }
}

fn slope_1d(f: &Functional, x: f64, lo: f64, hi: f64) -> Result<f64> {
    let p = Point::scalar(x);
    if f.space().contains(&p) {
        if let Ok(g) = f.grad(&p) {
            if g[0].is_finite() {
                return Ok(g[0]);
            }
        }
    }
    let h = 1e-7 * x.abs().max(1.0);
    let a = (x - h).max(lo);
    let b = (x + h).min(hi);
    let fa = f.value(&Point::scalar(a))?;
    let fb = f.value(&Point::scalar(b))?;
    let s = (fb - fa) / (b - a);
    Ok(if s.is_nan() { 0.0 } else { s })
}

fn prox_1d(f: &Functional, tau: f64, v: f64, _tol: &Tolerance) -> Result<f64> {
    let (lo, hi) = bounds(f.space());
    let phi = |w: f64| -> Result<f64> {
        let fw = f.value(&Point::scalar(w))?;
        if fw == f64::NEG_INFINITY {
            return Err(Error::NotBoundedBelow { at: w });
        }
        Ok((w - v) * (w - v) / (2.0 * tau) + fw)
    };
    let phi_v = phi(v)?;
    if phi_v == f64::INFINITY {
        return Err(Error::PointOutsideDomain);
    }
    let clamp = |w: f64| w.max(lo).min(hi);
    let scale = v.abs().max(1.0);

    let mut g = slope_1d(f, v, lo, hi)?;
    if g == 0.0 {
        let probe = 1e-4 * math::sqrt(tau) * scale;
        let left = phi(clamp(v - probe))?;
        let right = phi(clamp(v + probe))?;
        if left >= phi_v && right >= phi_v {
            return Ok(v);
        }
        g = if left < right { 1.0 } else { -1.0 };
    }
    let dir = -g.signum();
    let mut step = (tau * g.abs()).max(1e-12 * scale);

    // march downhill until the objective turns up or the boundary is hit
    let (mut a, mut b) = (v, clamp(v + dir * step));
    let mut fb = phi(b)?;
    let (l, r) = if fb >= phi_v {
        (v.min(b), v.max(b))
    } else {
        let mut steps = 0;
        loop {
            if b == lo || b == hi {
                break (a.min(b), a.max(b));
            }
            step *= 2.0;
            let c = clamp(b + dir * step);
            let fc = phi(c)?;
            if fc >= fb {
                break (a.min(c), a.max(c));
            }
            a = b;
            b = c;
            fb = fc;
            steps += 1;
            if steps > MAX_MARCH || !b.is_finite() {
                return Err(Error::NotBoundedBelow { at: b });
            }
        }
    };

    let w = golden(&phi, l, r)?;
    let mut best = (w, phi(w)?);
    if let Some(wp) = polish(f, tau, v, w, l, r) {
        best = (wp, phi(wp)?);
    }
    for end in [l, r] {
        let fe = phi(end)?;
        let near = (end - best.0).abs() <= 1e-9 * scale;
        let slack = if near {
            8.0 * f64::EPSILON * best.1.abs().max(1.0)
        } else {
            0.0
        };
        if fe <= best.1 + slack {
            best = (end, fe);
        }
    }
    Ok(best.0)
}

fn golden<F: Fn(f64) -> Result<f64>>(phi: &F, mut a: f64, mut b: f64) -> Result<f64> {
    let mut x1 = a + GOLDEN * (b - a);
    let mut x2 = b - GOLDEN * (b - a);
    let mut f1 = phi(x1)?;
    let mut f2 = phi(x2)?;
    for _ in 0..300 {
        if b - a <= 4.0 * f64::EPSILON * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + GOLDEN * (b - a);
            f1 = phi(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - GOLDEN * (b - a);
            f2 = phi(x2)?;
        }
    }
    Ok(if f1 <= f2 { x1 } else { x2 })
}

// Bisection on psi(w) = (w - v)/tau + f'(w) around the golden-section estimate.
fn polish(f: &Functional, tau: f64, v: f64, w: f64, l: f64, r: f64) -> Option<f64> {
    if !f.has_gradient() {
        return None;
    }
    let psi = |x: f64| -> Option<f64> {
        let p = Point::scalar(x);
        if !f.space().contains(&p) {
            return None;
        }
        let g = f.grad(&p).ok()?[0];
        g.is_finite().then(|| (x - v) / tau + g)
    };
    let delta = 1e-6 * w.abs().max(1.0);
    let (mut a, mut b) = ((w - delta).max(l), (w + delta).min(r));
    let (mut pa, pb) = (psi(a)?, psi(b)?);
    if !(pa <= 0.0 && pb >= 0.0) {
        return None;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let pm = psi(m)?;
        if (pm <= 0.0) == (pa <= 0.0) {
            a = m;
            pa = pm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

fn grad_nd(f: &Functional, w: &Point) -> Result<Vec<f64>> {
    if f.has_gradient() {
        return f.grad(w);
    }
    let mut g = vec![0.0; w.dim()];
    for i in 0..w.dim() {
        let h = 1e-6 * w[i].abs().max(1.0);
        let mut a = w.clone();
        let mut b = w.clone();
        a.0[i] -= h;
        b.0[i] += h;
        g[i] = (f.value(&b)? - f.value(&a)?) / (2.0 * h);
    }
    Ok(g)
}

fn solve(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[piv][c].abs() < 1e-300 {
            return None;
        }
        m.swap(c, piv);
        rhs.swap(c, piv);
        for r in c + 1..n {
            let k = m[r][c] / m[c][c];
            for j in c..n {
                m[r][j] -= k * m[c][j];
            }
            rhs[r] -= k * rhs[c];
        }
    }
    let mut x = vec![0.0; n];
    for c in (0..n).rev() {
        let s: f64 = (c + 1..n).map(|j| m[c][j] * x[j]).sum();
        x[c] = (rhs[c] - s) / m[c][c];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn prox_nd(f: &Functional, tau: f64, v: &Point, _tol: &Tolerance) -> Result<Point> {
    let n = v.dim();
    let phi = |w: &Point| objective(f, tau, v, w);
    let mut w = v.clone();
    let mut fw = phi(&w)?;
    for _ in 0..500 {
        let gf = grad_nd(f, &w)?;
        let g: Vec<f64> = (0..n).map(|i| (w[i] - v[i]) / tau + gf[i]).collect();
        let gnorm = math::norm(&g);
        if gnorm <= 1e-12 * (1.0 + math::norm(w.coords()) / tau) {
            break;
        }
        let mut hess = vec![vec![0.0; n]; n];
        for j in 0..n {
            let h = 1e-5 * w[j].abs().max(1.0);
            let mut a = w.clone();
            let mut b = w.clone();
            a.0[j] -= h;
            b.0[j] += h;
            let (ga, gb) = (grad_nd(f, &a)?, grad_nd(f, &b)?);
            for i in 0..n {
                hess[i][j] = (gb[i] - ga[i]) / (2.0 * h);
            }
        }
        for i in 0..n {
            for j in 0..i {
                let s = 0.5 * (hess[i][j] + hess[j][i]);
                hess[i][j] = s;
                hess[j][i] = s;
            }
            hess[i][i] += 1.0 / tau;
        }
        let neg: Vec<f64> = g.iter().map(|x| -x).collect();
        let mut d = match solve(hess, neg.clone()) {
            Some(d) if d.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>() < 0.0 => d,
            _ => neg.iter().map(|x| x * tau).collect(),
        };
        let slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial = w.offset(&d, alpha);
            let ft = phi(&trial)?;
            if ft <= fw + 1e-4 * alpha * slope {
                w = trial;
                fw = ft;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // flat to machine precision
            d.clear();
            break;
        }
        if math::norm(w.coords()) > 1e12 {
            return Err(Error::NotBoundedBelow { at: w[0] });
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::CurvatureParams;
    use crate::ext::ExtReal;
    use crate::functionals::Library;
    use crate::spaces::Interval;

    fn half_line_linear() -> Functional {
        let half = Interval::new(ExtReal::ZERO, ExtReal::PosInf, false, true).unwrap();
        Functional::plain(Library::Linear { a: 1.0 }, ModelSpace::interval(half)).unwrap()
    }

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn examples() {
        let f = half_line_linear();
        let s = prox(&f, 0.1, &1.0.into(), &tol()).unwrap();
        assert!((s.output.x() - 0.9).abs() < 1e-12);
        let s = prox(&f, 0.5, &0.3.into(), &tol()).unwrap();
        assert_eq!(s.output.x(), 0.0);
        let q = Functional::plain(Library::Quadratic { c: 1.0 }, ModelSpace::real_line()).unwrap();
        let s = prox(&q, 1.0, &3.0.into(), &tol()).unwrap();
        assert!((s.output.x() - 1.5).abs() < 1e-12);
        assert!((s.objective - (1.5 * 1.5 / 2.0 + 1.125)).abs() < 1e-12);
    }

    #[test]
    fn log_x_local_minimizer() {
        // (w - v)/tau + 1/w = 0  =>  w = (v + sqrt(v^2 - 4 tau))/2
        let f = Functional::from_name("log-x", CurvatureParams::new(0.0, -1.0).unwrap()).unwrap();
        let (v, tau) = (0.7, 1e-2);
        let s = prox(&f, tau, &v.into(), &tol()).unwrap();
        let expect = 0.5 * (v + math::sqrt(v * v - 4.0 * tau));
        assert!((s.output.x() - expect).abs() < 1e-13);
    }

    #[test]
    fn not_bounded_below() {
        let f = Functional::from_name("log-x", CurvatureParams::new(0.0, -1.0).unwrap()).unwrap();
        // v^2 < 4 tau: no interior critical point, descent runs into f = -inf
        let r = prox(&f, 0.5, &0.5.into(), &tol());
        assert!(matches!(r, Err(Error::NotBoundedBelow { .. })), "{r:?}");
        let concave =
            Functional::plain(Library::Quadratic { c: -2.0 }, ModelSpace::real_line()).unwrap();
        assert!(matches!(
            prox(&concave, 1.0, &1.0.into(), &tol()),
            Err(Error::NotBoundedBelow { .. })
        ));
    }

    #[test]
    fn euclidean_newton() {
        let r2 = ModelSpace::euclidean(2).unwrap();
        let q = Functional::plain(Library::Quadratic { c: 2.0 }, r2.clone()).unwrap();
        let s = prox(&q, 0.5, &Point(vec![4.0, -2.0]), &tol()).unwrap();
        assert!((s.output[0] - 2.0).abs() < 1e-10 && (s.output[1] + 1.0).abs() < 1e-10);
        let e = Functional::expr("x1^4/4 + x2^2", r2).unwrap();
        let s = prox(&e, 1.0, &Point(vec![2.0, 1.0]), &tol()).unwrap();
        // optimality: w - v + grad f(w) = 0
        let w = &s.output;
        assert!((w[0] - 2.0 + w[0].powi(3)).abs() < 1e-6);
        assert!((w[1] - 1.0 + 2.0 * w[1]).abs() < 1e-6);
    }

    #[test]
    fn stationary_point_is_fixed() {
        let q = Functional::plain(Library::Quadratic { c: 1.0 }, ModelSpace::real_line()).unwrap();
        assert_eq!(prox(&q, 0.3, &0.0.into(), &tol()).unwrap().output.x(), 0.0);
    }
}
