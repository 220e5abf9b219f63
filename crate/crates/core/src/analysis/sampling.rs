//! Time-sample selection and stratified reference-point sampling.

use alloc::vec::Vec;

use crate::flows::Curve;
use crate::math;
use crate::policy::Sampler;
use crate::spaces::{raw_dist, ModelSpace, Point, DEFAULT_MARGIN, DEFAULT_SPAN};

/// Time samples per check.
pub const TIME_SAMPLES: usize = 50;

/// Last grid index strictly before the stop time.
pub(crate) fn last_active(c: &Curve) -> Option<usize> {
    let stop = c.stop_time().unwrap_or(f64::INFINITY);
    let k = c.times().partition_point(|&t| t < stop);
    k.checked_sub(1)
}

/// Up to `count` evenly spaced indices in `0..last`.
pub(crate) fn time_indices(last: usize, count: usize) -> Vec<usize> {
    if last == 0 || count == 0 {
        return Vec::new();
    }
    if last <= count {
        return (0..last).collect();
    }
    let mut out: Vec<usize> = (0..count)
        .map(|k| libm::round(k as f64 * (last - 1) as f64 / (count - 1).max(1) as f64) as usize)
        .collect();
    out.dedup();
    out
}

pub(crate) fn sampler_for(seed: u64, i: usize) -> Sampler {
    Sampler::new(seed ^ (i as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Where reference points come from.
pub(crate) struct ZRegion<'a> {
    pub space: &'a ModelSpace,
    /// Radius of the "near" stratum.
    pub near: f64,
    /// Restrict every draw to this ball around the base point.
    pub ball: Option<f64>,
}

/// Draws up to `count` reference points around `y`: a third within the near
/// radius, a sixth in the band next to finite endpoints and the rest across
/// the sampling box (or the ball).
pub(crate) fn draw_z<A>(
    region: &ZRegion<'_>,
    y: &Point,
    count: usize,
    s: &mut Sampler,
    mut accept: A,
) -> Vec<Point>
where
    A: FnMut(&Point) -> bool,
{
    let space = region.space;
    let bounds = space.sample_box(DEFAULT_MARGIN, DEFAULT_SPAN);
    let boundary = space.boundary();
    let lo = bounds[0].0;
    let dim = space.dim();
    let mut out = Vec::with_capacity(count);
    let mut draws = 0usize;
    while out.len() < count && draws < 20 * count.max(1) {
        let stratum = draws % 6;
        draws += 1;
        let z = match stratum {
            0 | 1 => ball_point(y, region.near, dim, s),
            5 if !boundary.is_empty() => {
                let b = boundary[s.index(boundary.len())];
                let inward = if b <= lo { 1.0 } else { -1.0 };
                let u = if draws.is_multiple_of(4) {
                    0.0
                } else {
                    s.unit()
                };
                Point::scalar(b + inward * u * DEFAULT_MARGIN)
            }
            _ => match region.ball {
                Some(r) => ball_point(y, r, dim, s),
                None => space.sample(s, &bounds),
            },
        };
        if !space.in_closure(&z) {
            continue;
        }
        if let Some(r) = region.ball {
            if raw_dist(&z, y) > r {
                continue;
            }
        }
        if accept(&z) {
            out.push(z);
        }
    }
    out
}

fn ball_point(y: &Point, r: f64, dim: usize, s: &mut Sampler) -> Point {
    let dir = s.direction(dim);
    let rho = r * math::pow(s.unit(), 1.0 / dim as f64);
    y.offset(&dir, rho)
}

/// Median speed `L` and median acceleration `A` of the curve over the
/// segments and second differences within three steps of `i`.
pub(crate) fn local_rates(times: &[f64], pts: &[Point], i: usize, last: usize) -> (f64, f64) {
    let lo = i.saturating_sub(3);
    let hi = (i + 3).min(last.saturating_sub(1));
    let velocity = |j: usize| -> Vec<f64> {
        let h = times[j + 1] - times[j];
        pts[j + 1]
            .coords()
            .iter()
            .zip(pts[j].coords())
            .map(|(b, a)| (b - a) / h)
            .collect()
    };
    let mut speeds: Vec<f64> = (lo..=hi).map(|j| math::norm(&velocity(j))).collect();
    let mut accels: Vec<f64> = (lo.max(1)..=hi)
        .map(|j| {
            let (v0, v1) = (velocity(j - 1), velocity(j));
            let span = 0.5 * (times[j + 1] - times[j - 1]);
            let dv: Vec<f64> = v1.iter().zip(&v0).map(|(b, a)| (b - a) / span).collect();
            math::norm(&dv)
        })
        .collect();
    let med = |v: &mut Vec<f64>| {
        v.retain(|x| x.is_finite());
        if v.is_empty() {
            0.0
        } else {
            math::median(v)
        }
    };
    (med(&mut speeds), med(&mut accels))
}
