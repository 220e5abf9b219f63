//! Verifiers for sampled curves: evolution variational inequalities,
//! metric derivative, descending slope, energy audits, the bracket
//! `[y', z]` and contraction certificates.
//!
//! Differential checks use forward differences on the curve's own grid and
//! add a discretization allowance from the median speed and acceleration of
//! the curve over the neighbouring grid points.

mod bracket;
mod contraction;
mod energy;
mod evi;
mod sampling;
mod slope;

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::flows::Curve;
use crate::policy::Tolerance;
use crate::spaces::raw_dist;

pub use bracket::{bracket, bracket_along, Bracket};
pub use contraction::{contraction_rate, ContractionReport};
pub use energy::{energy_audit, energy_audit_window, EnergyAudit};
pub use evi::{
    check_evi_integrated, check_evi_kn, check_evi_lambda, check_evi_local, check_evi_sublevel,
    EviForm, EviParams, EviReport, EviWitness, KnForm,
};
pub use sampling::TIME_SAMPLES;
pub use slope::{slope, SlopeMethod, RADIUS_LEVELS};

/// Upper right Dini derivative of `g` at `t`: the largest difference
/// quotient over the steps `4 h_min`, `2 h_min`, `h_min`.
pub fn forward_upper_derivative<F>(mut g: F, t: f64, tol: &Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let h_min = tol.h_min;
    if !(h_min > 0.0) || t + h_min == t {
        return Err(Error::StepUnderflow(h_min));
    }
    let g0 = g(t);
    let mut best = f64::NEG_INFINITY;
    for k in 0..3 {
        let h = h_min * (1u32 << k) as f64;
        best = best.max((g(t + h) - g0) / h);
    }
    if best.is_nan() {
        return Err(Error::NotANumber("difference quotient"));
    }
    Ok(best)
}

/// `|y'|` on the grid: central differences inside, one-sided at the ends.
pub fn metric_derivative(c: &Curve) -> Result<Vec<f64>> {
    let n = c.len();
    if n < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: n });
    }
    let (t, x) = (c.times(), c.points());
    Ok((0..n)
        .map(|i| {
            let (lo, hi) = (i.saturating_sub(1), (i + 1).min(n - 1));
            raw_dist(&x[lo], &x[hi]) / (t[hi] - t[lo])
        })
        .collect())
}
