//! Model geodesic spaces: intervals of the real line and `R^n`.
//!
//! Both are uniquely geodesic, so the geodesic between two points is the
//! straight segment `(1 - t) x + t y`. Open endpoints are excluded from
//! [`ModelSpace::contains`] but every metric operation accepts points of
//! the closure, since flows can run into the boundary.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Index;

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::math;
use crate::policy::Sampler;

/// A point of a model space (one coordinate for intervals).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn scalar(x: f64) -> Self {
        Point(vec![x])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// First coordinate.
    pub fn x(&self) -> f64 {
        self.0[0]
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// `(1 - t) self + t other`.
    pub fn lerp(&self, other: &Point, t: f64) -> Point {
        Point(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + t * (b - a))
                .collect(),
        )
    }

    pub fn offset(&self, dir: &[f64], h: f64) -> Point {
        Point(self.0.iter().zip(dir).map(|(a, d)| a + h * d).collect())
    }
}

impl From<f64> for Point {
    fn from(x: f64) -> Self {
        Point::scalar(x)
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

impl Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// An interval `(a, b)` with optional closed finite endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    a: ExtReal,
    b: ExtReal,
    open_a: bool,
    open_b: bool,
}

impl Interval {
    /// Infinite endpoints are always treated as open.
    pub fn new(a: ExtReal, b: ExtReal, open_a: bool, open_b: bool) -> Result<Self> {
        if a >= b || a == ExtReal::PosInf || b == ExtReal::NegInf {
            return Err(Error::InvalidSpace("interval needs a < b"));
        }
        Ok(Interval {
            a,
            b,
            open_a: open_a || !a.is_finite(),
            open_b: open_b || !b.is_finite(),
        })
    }

    pub fn open(a: f64, b: f64) -> Result<Self> {
        Self::new(ExtReal::new(a)?, ExtReal::new(b)?, true, true)
    }

    pub fn closed(a: f64, b: f64) -> Result<Self> {
        Self::new(ExtReal::new(a)?, ExtReal::new(b)?, false, false)
    }

    pub fn real_line() -> Self {
        Interval {
            a: ExtReal::NegInf,
            b: ExtReal::PosInf,
            open_a: true,
            open_b: true,
        }
    }

    pub fn lo(&self) -> f64 {
        self.a.to_f64()
    }

    pub fn hi(&self) -> f64 {
        self.b.to_f64()
    }

    pub fn open_flags(&self) -> (bool, bool) {
        (self.open_a, self.open_b)
    }

    pub fn contains(&self, x: f64) -> bool {
        let lo_ok = if self.open_a {
            x > self.lo()
        } else {
            x >= self.lo()
        };
        let hi_ok = if self.open_b {
            x < self.hi()
        } else {
            x <= self.hi()
        };
        x.is_finite() && lo_ok && hi_ok
    }

    pub fn in_closure(&self, x: f64) -> bool {
        x.is_finite() && x >= self.lo() && x <= self.hi()
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.max(self.lo()).min(self.hi())
    }
}

/// A model geodesic space.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpace {
    Interval(Interval),
    Euclidean { n: usize },
}

/// Sampling box: infinite sides are replaced by this span.
pub const DEFAULT_SPAN: f64 = 5.0;
/// Distance kept from open endpoints when sampling.
pub const DEFAULT_MARGIN: f64 = 1e-3;

impl ModelSpace {
    pub fn interval(iv: Interval) -> Self {
        ModelSpace::Interval(iv)
    }

    pub fn real_line() -> Self {
        ModelSpace::Interval(Interval::real_line())
    }

    pub fn euclidean(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpace("dimension must be positive"));
        }
        Ok(ModelSpace::Euclidean { n })
    }

    pub fn dim(&self) -> usize {
        match self {
            ModelSpace::Interval(_) => 1,
            ModelSpace::Euclidean { n } => *n,
        }
    }

    pub fn as_interval(&self) -> Option<&Interval> {
        match self {
            ModelSpace::Interval(iv) => Some(iv),
            ModelSpace::Euclidean { .. } => None,
        }
    }

    /// Strict membership (open endpoints excluded).
    pub fn contains(&self, x: &Point) -> bool {
        x.dim() == self.dim()
            && match self {
                ModelSpace::Interval(iv) => iv.contains(x.x()),
                ModelSpace::Euclidean { .. } => x.0.iter().all(|c| c.is_finite()),
            }
    }

    pub fn in_closure(&self, x: &Point) -> bool {
        x.dim() == self.dim()
            && match self {
                ModelSpace::Interval(iv) => iv.in_closure(x.x()),
                ModelSpace::Euclidean { .. } => x.0.iter().all(|c| c.is_finite()),
            }
    }

    /// Accepts points of the closure.
    pub fn check(&self, x: &Point) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        if self.in_closure(x) {
            Ok(())
        } else {
            Err(Error::PointOutsideSpace)
        }
    }

    pub fn clamp(&self, x: &Point) -> Point {
        match self {
            ModelSpace::Interval(iv) => Point::scalar(iv.clamp(x.x())),
            ModelSpace::Euclidean { .. } => x.clone(),
        }
    }

    pub fn dist(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(raw_dist(x, y))
    }

    pub fn geodesic(&self, x: &Point, y: &Point) -> Result<Geodesic> {
        self.check(x)?;
        self.check(y)?;
        Ok(Geodesic {
            p0: x.clone(),
            p1: y.clone(),
        })
    }

    /// Per-coordinate sampling bounds: open ends pulled in by `margin`,
    /// infinite ends replaced by `span` from the finite end (or `±span`).
    pub fn sample_box(&self, margin: f64, span: f64) -> Vec<(f64, f64)> {
        match self {
            ModelSpace::Interval(iv) => {
                let (lo, hi) = (iv.lo(), iv.hi());
                let (lo, hi) = match (lo.is_finite(), hi.is_finite()) {
                    (true, true) => (lo, hi),
                    (true, false) => (lo, lo + span),
                    (false, true) => (hi - span, hi),
                    (false, false) => (-span, span),
                };
                let lo = if iv.open_a && iv.lo().is_finite() {
                    lo + margin
                } else {
                    lo
                };
                let hi = if iv.open_b && iv.hi().is_finite() {
                    hi - margin
                } else {
                    hi
                };
                vec![(lo, hi.max(lo))]
            }
            ModelSpace::Euclidean { n } => vec![(-span, span); *n],
        }
    }

    pub fn sample(&self, s: &mut Sampler, bounds: &[(f64, f64)]) -> Point {
        Point(bounds.iter().map(|&(lo, hi)| s.uniform(lo, hi)).collect())
    }

    /// Closure boundary points (finite interval endpoints).
    pub fn boundary(&self) -> Vec<f64> {
        match self {
            ModelSpace::Interval(iv) => [iv.lo(), iv.hi()]
                .into_iter()
                .filter(|x| x.is_finite())
                .collect(),
            ModelSpace::Euclidean { .. } => Vec::new(),
        }
    }
}

pub(crate) fn raw_dist(x: &Point, y: &Point) -> f64 {
    if x.dim() == 1 {
        (x.x() - y.x()).abs()
    } else {
        math::sqrt(x.0.iter().zip(&y.0).map(|(a, b)| (a - b) * (a - b)).sum())
    }
}

/// Constant-speed segment from `p0` to `p1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Geodesic {
    p0: Point,
    p1: Point,
}

impl Geodesic {
    pub fn start(&self) -> &Point {
        &self.p0
    }

    pub fn end(&self) -> &Point {
        &self.p1
    }

    pub fn length(&self) -> f64 {
        raw_dist(&self.p0, &self.p1)
    }

    pub fn eval(&self, t: f64) -> Result<Point> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::ParamOutOfRange {
                name: "t",
                value: t,
            });
        }
        Ok(self.at(t))
    }

    pub(crate) fn at(&self, t: f64) -> Point {
        if t == 1.0 {
            return self.p1.clone();
        }
        self.p0.lerp(&self.p1, t)
    }
}
