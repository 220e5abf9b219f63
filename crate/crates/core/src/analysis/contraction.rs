//! Exponential-rate certificates for the distance between two curves.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::flows::Curve;
use crate::math;
use crate::spaces::raw_dist;

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
    /// `max_{s > r} (ln d(s) - ln d(r)) / (s - r)`.
    pub max_log_slope: f64,
    /// Least-squares slope of `ln d` against `s`.
    pub fitted_rate: f64,
}

/// Compares `c1` and `c2` at `r` and at the points of `s_grid` after `r`
/// inside both pre-extinction windows.
pub fn contraction_rate(
    c1: &Curve,
    c2: &Curve,
    r: f64,
    s_grid: &[f64],
) -> Result<ContractionReport> {
    if c1.dim() != c2.dim() {
        return Err(Error::DimensionMismatch {
            expected: c1.dim(),
            got: c2.dim(),
        });
    }
    let lo = c1.start().max(c2.start());
    let hi = c1.active_end().min(c2.active_end());
    if lo > hi {
        return Err(Error::DisjointWindows);
    }
    if !(r >= lo && r <= hi) {
        return Err(Error::ParamOutOfRange {
            name: "r",
            value: r,
        });
    }
    let mut times = alloc::vec![r];
    times.extend(s_grid.iter().copied().filter(|&s| s > r && s <= hi));
    let distances: Vec<f64> = times
        .iter()
        .map(|&s| raw_dist(&c1.at(s), &c2.at(s)))
        .collect();
    let d0 = distances[0];
    let mut max_log_slope = if times.len() > 1 {
        f64::NEG_INFINITY
    } else {
        0.0
    };
    for (&s, &d) in times.iter().zip(&distances).skip(1) {
        let q = if d0 == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else if d == 0.0 {
            f64::NEG_INFINITY
        } else {
            (math::ln(d) - math::ln(d0)) / (s - r)
        };
        max_log_slope = max_log_slope.max(q);
    }
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(&distances)
        .filter(|(_, &d)| d > 0.0)
        .map(|(&s, &d)| (s, math::ln(d)))
        .collect();
    let fitted_rate = if pts.len() < 2 {
        0.0
    } else {
        let m = pts.len() as f64;
        let (sx, sy) = pts
            .iter()
            .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
        let (mx, my) = (sx / m, sy / m);
        let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| {
            (a + (x - mx) * (y - my), b + (x - mx) * (x - mx))
        });
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    };
    Ok(ContractionReport {
        times,
        distances,
        max_log_slope,
        fitted_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::CurvatureParams;
    use crate::flows::{oracle_flow, TimeGrid};

    fn pair(name: &str, k: f64, a: f64, b: f64, t_end: f64) -> (Curve, Curve, Vec<f64>) {
        let p = CurvatureParams::new(k, -1.0).unwrap();
        let g = TimeGrid::uniform(t_end, 201).unwrap();
        let c1 = oracle_flow(name, &p, &a.into(), &g).unwrap();
        let c2 = oracle_flow(name, &p, &b.into(), &g).unwrap();
        (c1, c2, g.times().to_vec())
    }

    #[test]
    fn parallel_translation() {
        let (c1, c2, s) = pair("fN-linear", 0.0, 2.0, 3.0, 1.5);
        let rep = contraction_rate(&c1, &c2, 0.0, &s).unwrap();
        assert!(rep.max_log_slope.abs() <= 1e-12 && rep.fitted_rate.abs() <= 1e-12);
        assert!(rep.distances.iter().all(|&d| (d - 1.0).abs() < 1e-12));
    }

    #[test]
    fn cosh_contracts() {
        let (c1, c2, s) = pair("fN-cosh", 1.0, 0.5, 2.0, 3.0);
        let rep = contraction_rate(&c1, &c2, 0.0, &s).unwrap();
        assert!(rep.max_log_slope <= 1e-9, "{}", rep.max_log_slope);
    }

    #[test]
    fn cos_expansion_bounded() {
        let (c1, c2, s) = pair("fN-cos", -1.0, 0.2, 0.3, 1.0);
        let rep = contraction_rate(&c1, &c2, 0.0, &s).unwrap();
        assert!(rep.max_log_slope <= 1.0 + 1e-9, "{}", rep.max_log_slope);
        assert!(rep.max_log_slope > 0.0);
    }

    #[test]
    fn disjoint() {
        let g1 = TimeGrid::new(alloc::vec![0.0, 1.0]).unwrap();
        let g2 = TimeGrid::new(alloc::vec![2.0, 3.0]).unwrap();
        let x = crate::spaces::Point::scalar(0.0);
        let c1 = Curve::constant(&x, &g1).unwrap();
        let c2 = Curve::constant(&x, &g2).unwrap();
        assert_eq!(
            contraction_rate(&c1, &c2, 0.5, &[1.0]),
            Err(Error::DisjointWindows)
        );
    }
}
