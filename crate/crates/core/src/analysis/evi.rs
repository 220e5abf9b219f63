//! Sampled checks of `EVI_lambda` and `EVI_{K,N}`.
//!
//! Each check visits up to [`TIME_SAMPLES`] grid times before the stop time
//! and `spec.count` reference points per time. Differential forms compare
//! the forward difference of the tested quantity against the right-hand
//! side plus `abs + rel (1 + |rhs| + |extra|)` and a bound on the
//! forward-difference error built from the local speed and acceleration.

use crate::coefficients::{c_raw, s_raw, CurvatureParams};
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::flows::Curve;
use crate::functionals::{one_minus_ratio, Functional};
use crate::math;
use crate::policy::{SampleSpec, Tolerance};
use crate::spaces::{raw_dist, Point};

use super::sampling::{
    draw_z, last_active, local_rates, sampler_for, time_indices, ZRegion, TIME_SAMPLES,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EviForm {
    Lambda,
    KnRaw,
    KnI,
    KnII,
    Integrated,
    Local,
}

impl EviForm {
    pub fn name(self) -> &'static str {
        match self {
            EviForm::Lambda => "evi_lambda",
            EviForm::KnRaw => "evi_kn_raw",
            EviForm::KnI => "evi_kn_i",
            EviForm::KnII => "evi_kn_ii",
            EviForm::Integrated => "evi_integrated",
            EviForm::Local => "evi_local",
        }
    }
}

/// The three equivalent differential forms of `EVI_{K,N}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnForm {
    /// `d+/dt s(d/2)^2 + K s(d/2)^2 <= (N/2)(1 - f_N(z)/f_N(y_t))`.
    Raw,
    /// `d+/dt d^2/2 <= d/s(d) (N (1 - f_N(z)/f_N(y_t)) - 2K s(d/2)^2)`.
    I,
    /// `d+/dt d^2/2 <= N d/s(d) (c(d) - f_N(z)/f_N(y_t))`.
    II,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EviParams {
    Lambda {
        lambda: f64,
    },
    KN {
        params: CurvatureParams,
    },
    Local {
        lambda: f64,
        radius: f64,
        level: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EviWitness {
    pub t: f64,
    pub z: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EviReport {
    pub form: EviForm,
    pub params: EviParams,
    pub time_samples: usize,
    pub z_samples: usize,
    /// Largest raw `lhs - rhs`.
    pub max_residual: f64,
    /// Largest `lhs - rhs - budget`; the check passes iff this is `<= 0`.
    pub max_violation: f64,
    pub worst: Option<EviWitness>,
    pub pass: bool,
}

struct Tally {
    times: usize,
    pairs: usize,
    max_residual: f64,
    max_violation: f64,
    worst: Option<EviWitness>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            times: 0,
            pairs: 0,
            max_residual: f64::NEG_INFINITY,
            max_violation: f64::NEG_INFINITY,
            worst: None,
        }
    }

    fn record(&mut self, residual: f64, violation: f64, t: f64, z: &Point) {
        self.pairs += 1;
        self.max_residual = self.max_residual.max(residual);
        if violation > self.max_violation || self.worst.is_none() {
            self.max_violation = self.max_violation.max(violation);
            self.worst = Some(EviWitness { t, z: z.clone() });
        }
    }

    fn finish(self, form: EviForm, params: EviParams) -> EviReport {
        let empty = self.pairs == 0;
        let max_violation = if empty { 0.0 } else { self.max_violation };
        EviReport {
            form,
            params,
            time_samples: self.times,
            z_samples: self.pairs,
            max_residual: if empty { 0.0 } else { self.max_residual },
            max_violation,
            worst: self.worst,
            pass: max_violation <= 0.0,
        }
    }
}

/// `x / s(x)`, continuous at 0.
fn d_over_s(p: &CurvatureParams, d: f64) -> f64 {
    if d == 0.0 {
        1.0
    } else {
        d / s_raw(p, d)
    }
}

fn finite(v: ExtReal) -> Option<f64> {
    v.finite()
}

/// A quantity `psi(d)` of the distance, with `psi'(d)` and
/// `kappa(d) = max(|psi''(d)|, |psi'(d)/d|)`, which bounds the Hessian of
/// `y -> psi(d(y, z))`.
#[derive(Clone, Copy)]
enum Quantity {
    HalfSquare,
    KernelSquare(CurvatureParams),
}

impl Quantity {
    fn eval(self, d: f64) -> (f64, f64, f64) {
        match self {
            Quantity::HalfSquare => (0.5 * d * d, d, 1.0),
            Quantity::KernelSquare(p) => {
                let s = s_raw(&p, 0.5 * d);
                let (sd, cd) = (s_raw(&p, d), c_raw(&p, d));
                let tangential = if d == 0.0 { 0.5 } else { 0.5 * sd / d };
                (s * s, 0.5 * sd, (0.5 * cd).abs().max(tangential.abs()))
            }
        }
    }
}

/// Runs a differential check of `D q + extra <= rhs` with `q = psi(d(y_t, z))`.
///
/// `terms(y, z)` returns `(extra, rhs)`, or `None` to skip the pair.
/// `base_ok(y)` rejects base points outside the domain (an infinite
/// violation). The allowance is `h (kappa L^2 + |psi'| A)`, twice the
/// leading forward-difference error bound.
#[allow(clippy::too_many_arguments)]
fn differential<T, B, A>(
    c: &Curve,
    space: &crate::spaces::ModelSpace,
    spec: &SampleSpec,
    tol: &Tolerance,
    ball: Option<f64>,
    quantity: Quantity,
    mut terms: T,
    base_ok: B,
    mut accept: A,
) -> Result<Tally>
where
    T: FnMut(&Point, &Point) -> Result<Option<(f64, f64)>>,
    B: Fn(&Point) -> bool,
    A: FnMut(&Point, &Point) -> bool,
{
    let mut tally = Tally::new();
    let Some(last) = last_active(c) else {
        return Ok(tally);
    };
    let (times, pts) = (c.times(), c.points());
    for i in time_indices(last, TIME_SAMPLES) {
        tally.times += 1;
        let (y, y1) = (&pts[i], &pts[i + 1]);
        let h = times[i + 1] - times[i];
        if !base_ok(y) || !base_ok(y1) {
            tally.record(f64::INFINITY, f64::INFINITY, times[i], y);
            continue;
        }
        let (speed, accel) = local_rates(times, pts, i, last);
        let region = ZRegion {
            space,
            near: raw_dist(y, y1).max(1e-6),
            ball,
        };
        let mut s = sampler_for(spec.seed, i);
        let zs = draw_z(&region, y, spec.count, &mut s, |z| accept(y, z));
        for z in &zs {
            let Some((extra, rhs)) = terms(y, z)? else {
                continue;
            };
            let (q0, slope, kappa) = quantity.eval(raw_dist(y, z));
            let (q1, _, _) = quantity.eval(raw_dist(y1, z));
            let lhs = (q1 - q0) / h + extra;
            let residual = lhs - rhs;
            let budget = tol.abs
                + tol.rel * (1.0 + rhs.abs() + extra.abs())
                + h * (kappa * speed * speed + slope.abs() * accel);
            tally.record(residual, residual - budget, times[i], z);
        }
    }
    Ok(tally)
}

/// `d+/dt d^2(z_t, z)/2 + (lambda/2) d^2(z_t, z) <= g(z) - g(z_t)` for `z` in `D[g]`.
pub fn check_evi_lambda(
    c: &Curve,
    gn: &Functional,
    lambda: f64,
    spec: &SampleSpec,
    tol: &Tolerance,
) -> Result<EviReport> {
    let tally = lambda_like(c, gn, lambda, None, None, spec, tol)?;
    Ok(tally.finish(EviForm::Lambda, EviParams::Lambda { lambda }))
}

/// `EVI_lambda` against reference points in `B_radius(z_t)` only.
pub fn check_evi_local(
    c: &Curve,
    gn: &Functional,
    lambda: f64,
    radius: f64,
    spec: &SampleSpec,
    tol: &Tolerance,
) -> Result<EviReport> {
    check_evi_sublevel(c, gn, lambda, radius, None, spec, tol)
}

/// Local `EVI_lambda` against `z` in `{g <= level} ∩ B_radius(z_t)`.
pub fn check_evi_sublevel(
    c: &Curve,
    gn: &Functional,
    lambda: f64,
    radius: f64,
    level: Option<f64>,
    spec: &SampleSpec,
    tol: &Tolerance,
) -> Result<EviReport> {
    if !(radius > 0.0) {
        return Err(Error::ParamOutOfRange {
            name: "radius",
            value: radius,
        });
    }
    let tally = lambda_like(c, gn, lambda, Some(radius), level, spec, tol)?;
    Ok(tally.finish(
        EviForm::Local,
        EviParams::Local {
            lambda,
            radius,
            level,
        },
    ))
}

fn lambda_like(
    c: &Curve,
    g: &Functional,
    lambda: f64,
    ball: Option<f64>,
    level: Option<f64>,
    spec: &SampleSpec,
    tol: &Tolerance,
) -> Result<Tally> {
    differential(
        c,
        g.space(),
        spec,
        tol,
        ball,
        Quantity::HalfSquare,
        |y, z| {
            let (Some(gz), Some(gy)) = (finite(g.eval(z)?), finite(g.eval(y)?)) else {
                return Ok(None);
            };
            let d = raw_dist(y, z);
            Ok(Some((0.5 * lambda * d * d, gz - gy)))
        },
        |y| g.in_domain(y),
        |_, z| matches!(g.eval(z), Ok(ExtReal::Finite(v)) if level.is_none_or(|m| v <= m)),
    )
}

/// Checks one differential form of `EVI_{K,N}` for `f`, with `z` in
/// `D*[f]` and, for `K < 0`, closer than `pi sqrt(N/K)` to `y_t`.
pub fn check_evi_kn(
    c: &Curve,
    f: &Functional,
    p: &CurvatureParams,
    form: KnForm,
    spec: &SampleSpec,
    tol: &Tolerance,
) -> Result<EviReport> {
    let cap = p.distance_cap().unwrap_or(f64::INFINITY);
    let (k, n) = (p.k(), p.n());
    let terms = |y: &Point, z: &Point| -> Result<Option<(f64, f64)>> {
        let Some(omr) = finite(one_minus_ratio(f, p, z, y)?) else {
            return Ok(None);
        };
        let d = raw_dist(y, z);
        let sh = s_raw(p, 0.5 * d);
        Ok(Some(match form {
            KnForm::Raw => (k * sh * sh, 0.5 * n * omr),
            KnForm::I => (0.0, d_over_s(p, d) * (n * omr - 2.0 * k * sh * sh)),
            KnForm::II => (0.0, n * d_over_s(p, d) * ((c_raw(p, d) - 1.0) + omr)),
        }))
    };
    let accept = |y: &Point, z: &Point| f.in_extended_domain(z) && raw_dist(y, z) < cap;
    let base_ok = |y: &Point| f.in_domain(y);
    let quantity = match form {
        KnForm::Raw => Quantity::KernelSquare(*p),
        KnForm::I | KnForm::II => Quantity::HalfSquare,
    };
    let tally = differential(
        c,
        f.space(),
        spec,
        tol,
        None,
        quantity,
        terms,
        base_ok,
        accept,
    )?;
    let kind = match form {
        KnForm::Raw => EviForm::KnRaw,
        KnForm::I => EviForm::KnI,
        KnForm::II => EviForm::KnII,
    };
    Ok(tally.finish(kind, EviParams::KN { params: *p }))
}

/// Integrated `EVI_{K,N}` over windows `[t_i, t_j]`:
/// `N (e^{Kt} - 1)/(2K) (1 - f_N(z)/f_N(y_{t_j})) >= e^{Kt} s(d_j/2)^2 - s(d_i/2)^2`
/// with `t = t_j - t_i` and `j - i` running over powers of two.
pub fn check_evi_integrated(
    c: &Curve,
    f: &Functional,
    p: &CurvatureParams,
    spec: &SampleSpec,
    tol: &Tolerance,
) -> Result<EviReport> {
    if p.k() == 0.0 {
        return Err(Error::KZero);
    }
    let cap = p.distance_cap().unwrap_or(f64::INFINITY);
    let (k, n) = (p.k(), p.n());
    let mut tally = Tally::new();
    let params = EviParams::KN { params: *p };
    let Some(last) = last_active(c) else {
        return Ok(tally.finish(EviForm::Integrated, params));
    };
    let (times, pts) = (c.times(), c.points());
    for i in time_indices(last, TIME_SAMPLES) {
        tally.times += 1;
        let y = &pts[i];
        if !f.in_domain(y) {
            tally.record(f64::INFINITY, f64::INFINITY, times[i], y);
            continue;
        }
        let near = raw_dist(y, &pts[i + 1]).max(1e-6);
        let region = ZRegion {
            space: f.space(),
            near,
            ball: None,
        };
        let mut s = sampler_for(spec.seed, i);
        let zs = draw_z(&region, y, spec.count, &mut s, |z| {
            f.in_extended_domain(z) && raw_dist(y, z) < cap
        });
        for z in &zs {
            let s0 = {
                let v = s_raw(p, 0.5 * raw_dist(y, z));
                v * v
            };
            let mut reach = raw_dist(y, z);
            let mut prev = i;
            let mut step = 1;
            while i + step <= last {
                let j = i + step;
                step *= 2;
                for q in &pts[prev + 1..=j] {
                    reach = reach.max(raw_dist(q, z));
                }
                prev = j;
                if reach >= cap {
                    break;
                }
                let yj = &pts[j];
                let Some(omr) = finite(one_minus_ratio(f, p, z, yj)?) else {
                    continue;
                };
                let t = times[j] - times[i];
                let ekt = math::exp(k * t);
                let lhs = n * math::expm1(k * t) / (2.0 * k) * omr;
                let sj = {
                    let v = s_raw(p, 0.5 * raw_dist(yj, z));
                    ekt * v * v
                };
                let residual = (sj - s0) - lhs;
                let budget = tol.abs + tol.rel * (1.0 + lhs.abs() + sj.abs() + s0.abs());
                tally.record(residual, residual - budget, times[i], z);
            }
        }
    }
    Ok(tally.finish(EviForm::Integrated, params))
}
