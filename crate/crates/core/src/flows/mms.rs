//! Minimizing movements: iterated proximal steps.

use alloc::boxed::Box;
use alloc::string::ToString;
use alloc::vec::Vec;

use super::{prox, Curve, CurveMeta};
use crate::error::{Error, Result};
use crate::functionals::Functional;
use crate::policy::Tolerance;
use crate::spaces::Point;

/// Iterates `U^n = prox_tau(U^{n-1})` for `n tau <= horizon` and returns the
/// values at the step times `n tau`.
pub fn minimizing_movement(
    f: &Functional,
    tau: f64,
    y0: &Point,
    horizon: f64,
    tol: &Tolerance,
) -> Result<Curve> {
    if !(tau > 0.0) {
        return Err(Error::ParamOutOfRange {
            name: "tau",
            value: tau,
        });
    }
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(Error::ParamOutOfRange {
            name: "horizon",
            value: horizon,
        });
    }
    f.space().check(y0)?;
    let steps = libm::floor(horizon / tau + 1e-9) as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut points = Vec::with_capacity(steps + 1);
    times.push(0.0);
    points.push(y0.clone());
    let mut u = y0.clone();
    for n in 1..=steps {
        let step = prox(f, tau, &u, tol).map_err(|e| Error::MmsStep {
            index: n,
            source: Box::new(e),
        })?;
        u = step.output;
        times.push(n as f64 * tau);
        points.push(u.clone());
    }
    let meta = CurveMeta {
        method: "mms".to_string(),
        tau: Some(tau),
        functional: f.name().to_string(),
        k: None,
        n: None,
    };
    Ok(Curve::new(times, points)?.with_meta(meta))
}
