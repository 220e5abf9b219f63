//! Sampled curves and three ways to produce gradient curves: closed forms,
//! Runge–Kutta integration of `y' = -grad f(y)`, and minimizing movements.
//!
//! A flow that reaches the boundary of the closure (where `f = -inf`) is
//! continued constantly at the boundary point, and the hitting time is
//! recorded as the curve's `stop_time`.

mod mms;
mod ode;
mod oracle;
mod prox;

use alloc::string::{String, ToString};
use alloc::vec::Vec;

pub use mms::minimizing_movement;
pub use ode::{ode_flow, OdeOptions};
pub use oracle::{oracle_flow, oracle_functional, ORACLES};
pub use prox::{prox, ProxStep};

use crate::error::{Error, Result};
use crate::policy::Sampler;
use crate::spaces::{raw_dist, ModelSpace, Point};

/// Spacing of the samples moved by [`Curve::jittered`].
pub const JITTER_STRIDE: usize = 7;

/// Strictly increasing, nonnegative sample times.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(mut times: Vec<f64>) -> Result<Self> {
        times.sort_by(|a, b| a.total_cmp(b));
        times.dedup();
        if times.is_empty() {
            return Err(Error::InvalidCurve("empty time grid"));
        }
        if times.iter().any(|t| !t.is_finite()) || times[0] < 0.0 {
            return Err(Error::InvalidCurve("times must be finite and nonnegative"));
        }
        Ok(TimeGrid { times })
    }

    /// `samples` equispaced times from `0` to `t_end` inclusive.
    pub fn uniform(t_end: f64, samples: usize) -> Result<Self> {
        if samples < 2 || !(t_end > 0.0) || !t_end.is_finite() {
            return Err(Error::InvalidCurve(
                "uniform grid needs t_end > 0 and at least 2 samples",
            ));
        }
        let h = t_end / (samples - 1) as f64;
        let mut times: Vec<f64> = (0..samples).map(|i| i as f64 * h).collect();
        times[samples - 1] = t_end;
        Ok(TimeGrid { times })
    }

    /// Times `0, dt, 2 dt, ...` not exceeding `t_end`.
    pub fn stepped(dt: f64, t_end: f64) -> Result<Self> {
        if !(dt > 0.0) || !(t_end >= 0.0) {
            return Err(Error::InvalidCurve("step grid needs dt > 0"));
        }
        let n = libm::floor(t_end / dt + 1e-9) as usize;
        Ok(TimeGrid {
            times: (0..=n).map(|i| i as f64 * dt).collect(),
        })
    }

    /// Adds extra times (kept sorted and unique).
    pub fn including(self, extra: &[f64]) -> Result<Self> {
        let mut times = self.times;
        times.extend_from_slice(extra);
        Self::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn end(&self) -> f64 {
        *self.times.last().expect("grids are nonempty")
    }
}

/// Provenance of a curve.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurveMeta {
    pub method: String,
    pub tau: Option<f64>,
    pub functional: String,
    pub k: Option<f64>,
    pub n: Option<f64>,
}

/// A sampled curve on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    times: Vec<f64>,
    points: Vec<Point>,
    stop_time: Option<f64>,
    meta: CurveMeta,
}

impl Curve {
    pub fn new(times: Vec<f64>, points: Vec<Point>) -> Result<Self> {
        if times.is_empty() || times.len() != points.len() {
            return Err(Error::InvalidCurve(
                "times and points must be nonempty and aligned",
            ));
        }
        if times.iter().any(|t| !t.is_finite()) || times[0] < 0.0 {
            return Err(Error::InvalidCurve("times must be finite and nonnegative"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidCurve("times must be strictly increasing"));
        }
        let dim = points[0].dim();
        if points
            .iter()
            .any(|p| p.dim() != dim || p.coords().iter().any(|c| !c.is_finite()))
        {
            return Err(Error::InvalidCurve(
                "points must be finite and of equal dimension",
            ));
        }
        Ok(Curve {
            times,
            points,
            stop_time: None,
            meta: CurveMeta::default(),
        })
    }

    /// The constant curve at `x` on `grid`.
    pub fn constant(x: &Point, grid: &TimeGrid) -> Result<Self> {
        let c = Curve::new(
            grid.times().to_vec(),
            alloc::vec![x.clone(); grid.times().len()],
        )?;
        Ok(c.with_meta(CurveMeta {
            method: "constant".to_string(),
            ..CurveMeta::default()
        }))
    }

    pub fn with_stop_time(mut self, stop: Option<f64>) -> Self {
        self.stop_time = stop;
        self
    }

    pub fn with_meta(mut self, meta: CurveMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn stop_time(&self) -> Option<f64> {
        self.stop_time
    }

    pub fn meta(&self) -> &CurveMeta {
        &self.meta
    }

    pub fn meta_mut(&mut self) -> &mut CurveMeta {
        &mut self.meta
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// End of the pre-extinction window.
    pub fn active_end(&self) -> f64 {
        self.stop_time.map_or(self.end(), |s| s.min(self.end()))
    }

    /// Piecewise-linear interpolation, clamped to the time window.
    pub fn at(&self, t: f64) -> Point {
        let n = self.times.len();
        if n == 1 || t <= self.times[0] {
            return self.points[0].clone();
        }
        if t >= self.times[n - 1] {
            return self.points[n - 1].clone();
        }
        let i = self.times.partition_point(|&s| s <= t);
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        if t == t0 {
            return self.points[i - 1].clone();
        }
        self.points[i - 1].lerp(&self.points[i], (t - t0) / (t1 - t0))
    }

    /// Index of the grid time equal to `t`, if any.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let i = self.times.partition_point(|&s| s < t);
        (i < self.times.len() && self.times[i] == t).then_some(i)
    }

    /// Same points on the same grid in reverse order.
    pub fn time_reversed(&self) -> Curve {
        let mut pts = self.points.clone();
        pts.reverse();
        Curve {
            times: self.times.clone(),
            points: pts,
            stop_time: None,
            meta: self.meta.clone(),
        }
    }

    /// Keeps samples with `t <= t_end`.
    pub fn truncated(&self, t_end: f64) -> Result<Curve> {
        let k = self.times.partition_point(|&s| s <= t_end);
        if k == 0 {
            return Err(Error::InvalidCurve("truncation removes every sample"));
        }
        Ok(Curve {
            times: self.times[..k].to_vec(),
            points: self.points[..k].to_vec(),
            stop_time: self.stop_time.filter(|&s| s <= t_end),
            meta: self.meta.clone(),
        })
    }

    /// Replaces the points, keeping grid and metadata.
    pub fn with_points(&self, points: Vec<Point>) -> Result<Curve> {
        let mut c = Curve::new(self.times.clone(), points)?;
        c.stop_time = self.stop_time;
        c.meta = self.meta.clone();
        Ok(c)
    }

    /// Replaces the grid, keeping points and metadata.
    pub fn with_times(&self, times: Vec<f64>) -> Result<Curve> {
        let mut c = Curve::new(times, self.points.clone())?;
        c.meta = self.meta.clone();
        Ok(c)
    }

    /// Test fixture: moves every [`JITTER_STRIDE`]-th sample before the stop
    /// time (from index 3 on) by `amplitude` along a random direction,
    /// clamped to the closure of `space`.
    pub fn jittered(&self, space: &ModelSpace, amplitude: f64, seed: u64) -> Result<Curve> {
        let stop = self.stop_time.unwrap_or(f64::INFINITY);
        let mut s = Sampler::new(seed);
        let mut pts = self.points.clone();
        for (i, p) in pts.iter_mut().enumerate() {
            if self.times[i] >= stop {
                break;
            }
            if i % JITTER_STRIDE == 3 {
                let dir = s.direction(p.dim());
                *p = space.clamp(&p.offset(&dir, amplitude));
            }
        }
        self.with_points(pts)
    }

    /// Largest `d(x_i, x_{i+1}) / (t_{i+1} - t_i)` over the window `[from, to]`.
    pub fn lipschitz_on(&self, from: f64, to: f64) -> f64 {
        let mut l: f64 = 0.0;
        for i in 0..self.len().saturating_sub(1) {
            if self.times[i] >= from && self.times[i + 1] <= to {
                let q = raw_dist(&self.points[i], &self.points[i + 1])
                    / (self.times[i + 1] - self.times[i]);
                l = l.max(q);
            }
        }
        l
    }
}
