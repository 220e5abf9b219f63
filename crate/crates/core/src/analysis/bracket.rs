//! The quantity `[y', z]_{t0}`: the supremum over `s` in `{2^-k}` of
//! `(1/2s) d+/dt d^2(y_t, g_s)` at `t0`, for a geodesic `g` leaving `y_{t0}`.
//! The time step is `h_min * s`, so the `h/s` bias stays at the `h_min` scale.

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::flows::Curve;
use crate::policy::Tolerance;
use crate::spaces::{raw_dist, Geodesic, Point};

use super::forward_upper_derivative;

/// Levels of the `s` grid.
pub const S_LEVELS: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub value: ExtReal,
}

/// Bracket of a sampled curve at the grid time `t0`; the curve is read by
/// linear interpolation.
pub fn bracket(c: &Curve, t0: f64, g: &Geodesic, tol: &Tolerance) -> Result<Bracket> {
    let i = c.index_of(t0).ok_or(Error::ParamOutOfRange {
        name: "t0",
        value: t0,
    })?;
    let y0 = &c.points()[i];
    let gap = raw_dist(y0, g.start());
    if !(gap <= 1e-12 * (1.0 + crate::math::norm(y0.coords()))) {
        return Err(Error::ParamOutOfRange {
            name: "geodesic start",
            value: gap,
        });
    }
    bracket_along(|t| c.at(t), t0, g, tol)
}

/// Bracket of an arbitrary parametrised path `y`.
pub fn bracket_along<Y>(y: Y, t0: f64, g: &Geodesic, tol: &Tolerance) -> Result<Bracket>
where
    Y: Fn(f64) -> Point,
{
    if g.length() == 0.0 {
        return Ok(Bracket {
            value: ExtReal::ZERO,
        });
    }
    let mut best = f64::NEG_INFINITY;
    for k in 0..S_LEVELS {
        let s = 1.0 / (1u32 << k) as f64;
        let zs = g.eval(s)?;
        let scaled = Tolerance {
            h_min: tol.h_min * s,
            ..*tol
        };
        let d = forward_upper_derivative(
            |t| {
                let r = raw_dist(&y(t), &zs);
                r * r
            },
            t0,
            &scaled,
        )?;
        best = best.max(d / (2.0 * s));
    }
    Ok(Bracket {
        value: ExtReal::new(best)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::CurvatureParams;
    use crate::flows::TimeGrid;
    use crate::functionals::{directional_derivative, Functional};
    use crate::math;
    use crate::spaces::ModelSpace;

    fn log_x_path(t: f64) -> Point {
        Point::scalar(math::sqrt(1.0 - 2.0 * t))
    }

    #[test]
    fn below_directional_derivative() {
        let p = CurvatureParams::new(0.0, -1.0).unwrap();
        let f = Functional::from_name("log-x", p).unwrap();
        let y = log_x_path(0.2);
        let sp = ModelSpace::real_line();
        let g = sp.geodesic(&y, &Point::scalar(2.0)).unwrap();
        let b = bracket_along(log_x_path, 0.2, &g, &Tolerance::default())
            .unwrap()
            .value
            .to_f64();
        let dd = directional_derivative(&f, &g).unwrap().to_f64();
        let exact = (2.0 - y.x()) / y.x();
        assert!(b <= dd + 1e-4, "{b} {dd}");
        assert!((b - exact).abs() < 1e-4 && (dd - exact).abs() < 1e-4);
        assert!(b > 0.0 && dd > 0.0);
    }

    #[test]
    fn downstream_is_negative() {
        let y = log_x_path(0.2);
        let g = ModelSpace::real_line()
            .geodesic(&y, &Point::scalar(0.1))
            .unwrap();
        let b = bracket_along(log_x_path, 0.2, &g, &Tolerance::default())
            .unwrap()
            .value
            .to_f64();
        assert!(b < 0.0);
    }

    #[test]
    fn constant_curve() {
        let x = Point::scalar(0.4);
        let c = Curve::constant(&x, &TimeGrid::uniform(1.0, 11).unwrap()).unwrap();
        for z in [-3.0, 0.0, 0.4, 2.0] {
            let g = ModelSpace::real_line()
                .geodesic(&x, &Point::scalar(z))
                .unwrap();
            assert_eq!(
                bracket(&c, 0.5, &g, &Tolerance::default()).unwrap().value,
                ExtReal::ZERO
            );
        }
        let g = ModelSpace::real_line()
            .geodesic(&Point::scalar(1.0), &x)
            .unwrap();
        assert!(bracket(&c, 0.5, &g, &Tolerance::default()).is_err());
        assert!(bracket(&c, 0.55, &g, &Tolerance::default()).is_err());
    }
}
