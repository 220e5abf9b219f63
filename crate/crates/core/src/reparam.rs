//! Time changes between gradient curves of `f` and of `f_N`.
//!
//! `r1` maps a curve `y` to `z_s = y_{phi(s)}` with `phi` the inverse of
//! `alpha(t) = -N int_0^t 1/f_N(y_r) dr`; `r2` maps `z` to `y_t = z_{psi(t)}`
//! with `psi` the inverse of `beta(s) = -(1/N) int_0^s f_N(z_r) dr`. Both
//! integrals use the trapezoid rule on the curve's own grid, so each sample
//! keeps its point and only its time changes.

use alloc::format;
use alloc::vec::Vec;

use crate::coefficients::CurvatureParams;
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::flows::{Curve, CurveMeta};
use crate::functionals::{eval_fn, Functional};
use crate::math;
use crate::policy::Tolerance;
use crate::spaces::raw_dist;

/// `f_N` values below this are treated as extinct.
pub const EXTINCTION_FLOOR: f64 = 1e-12;
/// Relative change allowed when halving the grid of the `C''_N` integral.
pub const CSECOND_STABILITY: f64 = 1e-2;

/// Which curve classes a sampled curve belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Membership {
    /// Every sample before the stop time lies in `D[f]`.
    pub in_c: bool,
    /// `f` is non-increasing along the samples (up to `abs`).
    pub in_cprime: bool,
    /// `int_0^{T ^ 1} f_N` is finite and stable under halving the grid.
    pub in_csecond_n: bool,
}

pub fn class_membership(c: &Curve, f: &Functional, p: &CurvatureParams) -> Membership {
    class_membership_with(c, f, p, &Tolerance::default())
}

pub fn class_membership_with(
    c: &Curve,
    f: &Functional,
    p: &CurvatureParams,
    tol: &Tolerance,
) -> Membership {
    let stop = c.stop_time().unwrap_or(f64::INFINITY);
    let values: Vec<Option<ExtReal>> = c.points().iter().map(|x| f.eval(x).ok()).collect();
    let in_c = c
        .times()
        .iter()
        .zip(&values)
        .all(|(&t, v)| t >= stop || matches!(v, Some(ExtReal::Finite(_))));
    let in_cprime = values.iter().all(Option::is_some)
        && values.windows(2).all(|w| {
            let (a, b) = (w[0].unwrap(), w[1].unwrap());
            match (a, b) {
                (ExtReal::Finite(a), ExtReal::Finite(b)) => b <= a + tol.abs,
                _ => b <= a,
            }
        });
    let in_csecond_n = csecond_integral(c, f, p).is_some();
    Membership {
        in_c,
        in_cprime,
        in_csecond_n,
    }
}

// Trapezoid value of int f_N over [t_0, min(T, 1)], if finite and stable.
fn csecond_integral(c: &Curve, f: &Functional, p: &CurvatureParams) -> Option<f64> {
    let end = c.end().min(c.start().max(1.0));
    let pts: Vec<(f64, f64)> = c
        .times()
        .iter()
        .zip(c.points())
        .take_while(|(&t, _)| t <= end)
        .map(|(&t, x)| eval_fn(f, p, x).ok().map(|v| (t, v.to_f64())))
        .collect::<Option<Vec<_>>>()?;
    if pts.len() < 2 {
        return Some(0.0);
    }
    let trap = |stride: usize| -> f64 {
        let mut idx: Vec<usize> = (0..pts.len()).step_by(stride).collect();
        if *idx.last().unwrap() != pts.len() - 1 {
            idx.push(pts.len() - 1);
        }
        idx.windows(2)
            .map(|w| 0.5 * (pts[w[1]].0 - pts[w[0]].0) * (pts[w[0]].1 + pts[w[1]].1))
            .sum()
    };
    let fine = trap(1);
    if !fine.is_finite() {
        return None;
    }
    if pts.len() < 3 {
        return Some(fine);
    }
    let coarse = trap(2);
    ((fine - coarse).abs() <= CSECOND_STABILITY * fine.abs().max(f64::MIN_POSITIVE)).then_some(fine)
}

// Samples kept by the time changes: before the stop time and with f_N above the floor.
fn active_prefix(c: &Curve, f: &Functional, p: &CurvatureParams) -> Result<Vec<(f64, f64)>> {
    let stop = c.stop_time().unwrap_or(f64::INFINITY);
    let mut out = Vec::with_capacity(c.len());
    for (&t, x) in c.times().iter().zip(c.points()) {
        if t >= stop {
            break;
        }
        let g = f.log_value(p.n(), x)?;
        let fnv = math::exp(g.to_f64());
        if !(fnv > EXTINCTION_FLOOR) || !fnv.is_finite() {
            break;
        }
        out.push((t, g.to_f64()));
    }
    Ok(out)
}

fn retimed(
    c: &Curve,
    times: Vec<f64>,
    method: &str,
    f: &Functional,
    p: &CurvatureParams,
) -> Result<Curve> {
    let n = times.len();
    let pts = c.points()[..n].to_vec();
    let meta = CurveMeta {
        method: format!("{method}({})", c.meta().method),
        tau: c.meta().tau,
        functional: f.name().into(),
        k: Some(p.k()),
        n: Some(p.n()),
    };
    Curve::new(times, pts)
        .map(|c| c.with_meta(meta))
        .map_err(|_| Error::DivergentIntegrand)
}

fn cumulative(samples: &[(f64, f64)], integrand: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(samples.len());
    let (t0, g0) = samples[0];
    let mut acc = t0 * integrand(g0);
    let mut prev = integrand(g0);
    out.push(acc);
    for w in samples.windows(2) {
        let cur = integrand(w[1].1);
        acc += 0.5 * (w[1].0 - w[0].0) * (prev + cur);
        out.push(acc);
        prev = cur;
    }
    out
}

/// The time change `alpha`: same points on the grid `alpha(t_i)`.
pub fn r1(c: &Curve, f: &Functional, p: &CurvatureParams) -> Result<Curve> {
    if !class_membership(c, f, p).in_cprime {
        return Err(Error::NotInCPrime);
    }
    let samples = active_prefix(c, f, p)?;
    if samples.len() < 2 {
        return Err(Error::DivergentIntegrand);
    }
    let n = p.n();
    let times = cumulative(&samples, |g| -n * math::exp(-g));
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::DivergentIntegrand);
    }
    retimed(c, times, "r1", f, p)
}

/// The time change `beta`: same points on the grid `beta(s_i)`.
pub fn r2(c: &Curve, f: &Functional, p: &CurvatureParams) -> Result<Curve> {
    if !class_membership(c, f, p).in_csecond_n {
        return Err(Error::NotInCsecondN);
    }
    let samples = active_prefix(c, f, p)?;
    if samples.len() < 2 {
        return Err(Error::DivergentIntegrand);
    }
    let n = p.n();
    let times = cumulative(&samples, |g| -math::exp(g) / n);
    retimed(c, times, "r2", f, p)
}

/// `sup |t' - t| + sup d(c(t), rt(t))` over the samples, where `rt` is
/// `r2(r1(c))` (or `r1(r2(c))` when `c` is not in `C'`).
pub fn roundtrip_error(c: &Curve, f: &Functional, p: &CurvatureParams) -> Result<f64> {
    let rt = if class_membership(c, f, p).in_cprime {
        r2(&r1(c, f, p)?, f, p)?
    } else {
        r1(&r2(c, f, p)?, f, p)?
    };
    let mut time_err: f64 = 0.0;
    let mut space_err: f64 = 0.0;
    for (i, (&t_new, &t)) in rt.times().iter().zip(c.times()).enumerate() {
        time_err = time_err.max((t_new - t).abs());
        space_err = space_err.max(raw_dist(&c.points()[i], &rt.at(t)));
    }
    Ok(time_err + space_err)
}
