//! Energy dissipation audits along sampled curves.
//!
//! The pointwise residual is `r = -df/dt - |y'|^2/2 - |D^- f|^2/2`: zero on
//! curves of maximal slope (EDE), non-negative under EDI. Derivatives use
//! stencils of half-width one grid step; the allowance compares them with
//! half-width two.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::flows::Curve;
use crate::functionals::Functional;
use crate::policy::{SampleSpec, Tolerance};
use crate::spaces::raw_dist;

use super::sampling::last_active;
use super::slope::{slope, SlopeMethod};

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyAudit {
    pub times: Vec<f64>,
    /// Metric speed `|y'|`.
    pub speed: Vec<f64>,
    /// Descending slope `|D^- f|(y_t)`.
    pub slope: Vec<f64>,
    /// `f(y_t)`.
    pub energy: Vec<f64>,
    pub residual: Vec<f64>,
    /// Per-sample allowance on `residual`.
    pub budget: Vec<f64>,
    /// `|f(y_end) - f(y_start) + int (|y'|^2/2 + |D^- f|^2/2)|` by trapezoid.
    pub ede_residual: f64,
}

impl EnergyAudit {
    /// Largest `|r| - budget` (EDE holds pointwise iff `<= 0`).
    pub fn ede_excess(&self) -> f64 {
        self.residual
            .iter()
            .zip(&self.budget)
            .map(|(r, b)| r.abs() - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest `-r - budget` (EDI holds pointwise iff `<= 0`).
    pub fn edi_excess(&self) -> f64 {
        self.residual
            .iter()
            .zip(&self.budget)
            .map(|(r, b)| -r - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn edi_holds(&self) -> bool {
        self.edi_excess() <= 0.0
    }
}

/// Audit over the whole pre-extinction window.
pub fn energy_audit(c: &Curve, f: &Functional) -> Result<EnergyAudit> {
    energy_audit_window(c, f, f64::NEG_INFINITY, f64::INFINITY)
}

/// Audit of the samples with `from <= t <= to` before the stop time.
/// Neighbours outside the window still enter the difference stencils.
pub fn energy_audit_window(c: &Curve, f: &Functional, from: f64, to: f64) -> Result<EnergyAudit> {
    let tol = Tolerance::default();
    let spec = SampleSpec::default();
    let last = last_active(c).ok_or(Error::TooFewSamples { needed: 3, got: 0 })?;
    let (t, x) = (c.times(), c.points());
    let mut energy = Vec::with_capacity(last + 1);
    let mut count = 0;
    for p in &x[..=last] {
        match f.eval(p)? {
            ExtReal::Finite(v) => energy.push(v),
            _ => break,
        }
        count += 1;
    }
    if count < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: count,
        });
    }
    let top = count - 1;
    let window: Vec<usize> = (0..=top).filter(|&i| t[i] >= from && t[i] <= to).collect();
    if window.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: window.len(),
        });
    }
    let stencil = |i: usize, w: usize| -> (usize, usize) {
        let w = w.min(top);
        if i >= w && i + w <= top {
            (i - w, i + w)
        } else if i + w <= top {
            (i, i + w)
        } else {
            (i - w, i)
        }
    };
    let rates = |i: usize, w: usize| -> (f64, f64) {
        let (a, b) = stencil(i, w);
        let dt = t[b] - t[a];
        (raw_dist(&x[a], &x[b]) / dt, (energy[b] - energy[a]) / dt)
    };
    let mut out = EnergyAudit {
        times: Vec::with_capacity(window.len()),
        speed: Vec::with_capacity(window.len()),
        slope: Vec::with_capacity(window.len()),
        energy: Vec::with_capacity(window.len()),
        residual: Vec::with_capacity(window.len()),
        budget: Vec::with_capacity(window.len()),
        ede_residual: 0.0,
    };
    for &i in &window {
        let sl = slope(f, &x[i], SlopeMethod::Definition, &spec)?;
        let (v1, df1) = rates(i, 1);
        let (v2, df2) = rates(i, 2);
        let r1 = -df1 - 0.5 * v1 * v1 - 0.5 * sl * sl;
        let r2 = -df2 - 0.5 * v2 * v2 - 0.5 * sl * sl;
        let scale = df1.abs() + 0.5 * v1 * v1 + 0.5 * sl * sl;
        out.times.push(t[i]);
        out.speed.push(v1);
        out.slope.push(sl);
        out.energy.push(energy[i]);
        out.residual.push(r1);
        out.budget
            .push(tol.abs + tol.rel * scale + 2.0 * (r2 - r1).abs());
    }
    let n = out.times.len();
    let mut integral = 0.0;
    for k in 1..n {
        let e = |j: usize| 0.5 * out.speed[j] * out.speed[j] + 0.5 * out.slope[j] * out.slope[j];
        integral += 0.5 * (out.times[k] - out.times[k - 1]) * (e(k - 1) + e(k));
    }
    out.ede_residual = (out.energy[n - 1] - out.energy[0] + integral).abs();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::CurvatureParams;
    use crate::flows::{oracle_flow, TimeGrid};
    use crate::spaces::Point;

    fn audit(name: &str, k: f64, y0: f64, t_end: f64, eps: f64) -> EnergyAudit {
        let p = CurvatureParams::new(k, -1.0).unwrap();
        let f = Functional::from_name(name, p).unwrap();
        let c = oracle_flow(
            name,
            &p,
            &y0.into(),
            &TimeGrid::uniform(t_end, 1001).unwrap(),
        )
        .unwrap();
        let stop = c.stop_time().unwrap_or(t_end);
        energy_audit_window(&c, &f, eps, stop - eps).unwrap()
    }

    #[test]
    fn log_x_dissipates_exactly() {
        let a = audit("log-x", 0.0, 1.0, 0.5, 0.01);
        assert!(a.ede_excess() <= 0.0, "{}", a.ede_excess());
        assert!(a.ede_residual <= 1e-3, "{}", a.ede_residual);
        // -df/dt = 1/y^2 at t = 0.25
        let i = a
            .times
            .iter()
            .position(|&t| (t - 0.25).abs() < 1e-12)
            .unwrap();
        assert!((a.speed[i] * a.speed[i] - 2.0).abs() < 1e-5);
        assert!((a.slope[i] * a.slope[i] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn log_cosh_dissipates_exactly() {
        let a = audit("log-cosh", 1.0, 1.5, 2.0, 0.01);
        assert!(a.ede_excess() <= 0.0, "{}", a.ede_excess());
        assert!(a.ede_residual <= 1e-3);
    }

    #[test]
    fn constant_curve_fails_edi() {
        let p = CurvatureParams::new(0.0, -1.0).unwrap();
        let f = Functional::from_name("log-x", p).unwrap();
        let c = Curve::constant(&Point::scalar(0.5), &TimeGrid::uniform(1.0, 50).unwrap()).unwrap();
        let a = energy_audit(&c, &f).unwrap();
        assert!(!a.edi_holds());
        assert!(a.residual.iter().all(|&r| (r + 2.0).abs() < 1e-6));
    }

    #[test]
    fn too_short() {
        let p = CurvatureParams::new(0.0, -1.0).unwrap();
        let f = Functional::from_name("log-x", p).unwrap();
        let c = Curve::constant(&Point::scalar(0.5), &TimeGrid::uniform(1.0, 2).unwrap()).unwrap();
        assert!(matches!(
            energy_audit(&c, &f),
            Err(Error::TooFewSamples { .. })
        ));
    }
}
