//! Dormand–Prince 5(4) integration of `y' = -grad f(y)` with dense output.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use super::{Curve, CurveMeta, TimeGrid};
use crate::error::{Error, Result};
use crate::functionals::Functional;
use crate::math;
use crate::spaces::Point;

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    /// Local tolerance, used as both absolute and relative tolerance.
    pub rtol: f64,
    /// Distance to a boundary point treated as arrival.
    pub boundary_eps: f64,
    /// Boundary proximity accepted when the step size underflows.
    pub underflow_eps: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            boundary_eps: 1e-9,
            underflow_eps: 1e-6,
            max_steps: 2_000_000,
        }
    }
}

impl OdeOptions {
    pub fn with_rtol(rtol: f64) -> Self {
        OdeOptions {
            rtol,
            ..Self::default()
        }
    }
}

fn velocity(f: &Functional, y: &[f64]) -> Option<Vec<f64>> {
    let p = Point(y.to_vec());
    if !f.space().contains(&p) {
        return None;
    }
    let g = f.grad(&p).ok()?;
    g.iter()
        .all(|v| v.is_finite())
        .then(|| g.into_iter().map(|v| -v).collect())
}

// Local error target relative to the requested tolerance, so that the
// global error stays within a small multiple of it.
const LOCAL_SAFETY: f64 = 0.01;

// Continuous extension of the Dormand–Prince pair (fourth order).
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

fn dense(y0: &[f64], y1: &[f64], k: &[Vec<f64>], h: f64, theta: f64) -> Vec<f64> {
    (0..y0.len())
        .map(|i| {
            let diff = y1[i] - y0[i];
            let bspl = h * k[0][i] - diff;
            let r4 = diff - h * k[6][i] - bspl;
            let r5 = h * (0..7).map(|s| D[s] * k[s][i]).sum::<f64>();
            y0[i] + theta * (diff + (1.0 - theta) * (bspl + theta * (r4 + (1.0 - theta) * r5)))
        })
        .collect()
}

/// Nearest finite boundary point and its distance (1D spaces only).
fn boundary_gap(f: &Functional, y: &[f64]) -> Option<(f64, f64)> {
    f.space()
        .boundary()
        .into_iter()
        .map(|b| (b, (y[0] - b).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

/// Integrates the gradient flow of `f` from `y0` and samples it on `grid`.
///
/// When the state approaches a boundary point of the closure the curve is
/// stopped there, `stop_time` is recorded, and later samples stay at the
/// boundary. A step-size collapse away from the boundary is a
/// [`Error::BlowUp`].
pub fn ode_flow(f: &Functional, y0: &Point, grid: &TimeGrid, opts: &OdeOptions) -> Result<Curve> {
    if !f.has_gradient() {
        return Err(Error::MissingGradient);
    }
    f.space().check(y0)?;
    if !(opts.rtol > 0.0) {
        return Err(Error::ParamOutOfRange {
            name: "rtol",
            value: opts.rtol,
        });
    }
    let times = grid.times();
    let t_end = grid.end();
    let dim = y0.dim();
    let mut out: Vec<Point> = Vec::with_capacity(times.len());
    let mut next = 0usize;
    let meta = CurveMeta {
        method: "ode".to_string(),
        tau: None,
        functional: f.name().to_string(),
        k: None,
        n: None,
    };

    let mut t = 0.0;
    let mut y = y0.coords().to_vec();
    let mut stop: Option<f64> = None;

    let mut fy = match velocity(f, &y) {
        Some(v) => v,
        None => {
            // starting on the boundary: the flow stays there
            let c = Curve::new(times.to_vec(), vec![y0.clone(); times.len()])?;
            return Ok(c.with_stop_time(Some(0.0)).with_meta(meta));
        }
    };
    while next < times.len() && times[next] <= t {
        out.push(Point(y.clone()));
        next += 1;
    }

    let speed = math::norm(&fy);
    let scale = math::norm(&y).max(1.0);
    let mut h = if speed > 0.0 {
        (0.01 * scale / speed).min(t_end.max(1e-3))
    } else {
        t_end.max(1e-3)
    };
    h = h.max(1e-12);
    let mut k = vec![vec![0.0; dim]; 7];
    let mut steps = 0usize;

    while next < times.len() {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::BlowUp { t });
        }
        let h_floor = 1e-14 * t.abs().max(1.0);
        if h < h_floor {
            match boundary_gap(f, &y) {
                Some((b, gap)) if gap <= opts.underflow_eps => {
                    y[0] = b;
                    stop = Some(t);
                    break;
                }
                _ => return Err(Error::BlowUp { t }),
            }
        }
        let target = times[times.len() - 1];
        let h_step = h.min(target - t).max(h_floor);

        k[0].clone_from(&fy);
        let mut ok = true;
        let mut stage = vec![0.0; dim];
        for s in 1..7 {
            for i in 0..dim {
                let mut acc = y[i];
                for j in 0..s {
                    acc += h_step * A[s][j] * k[j][i];
                }
                stage[i] = acc;
            }
            match velocity(f, &stage) {
                Some(v) => k[s] = v,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            h = h_step * 0.25;
            continue;
        }
        let y_new = stage.clone(); // FSAL: last stage is the 5th-order solution
        let mut err = 0.0;
        for i in 0..dim {
            let e: f64 = (0..7).map(|s| E[s] * k[s][i]).sum::<f64>() * h_step;
            let sc = LOCAL_SAFETY * opts.rtol * (1.0 + y[i].abs().max(y_new[i].abs()));
            err += (e / sc) * (e / sc);
        }
        let err = math::sqrt(err / dim as f64);
        if !(err <= 1.0) {
            let fac = if err.is_finite() {
                (0.9 * math::pow(err, -0.2)).clamp(0.2, 1.0)
            } else {
                0.2
            };
            h = h_step * fac;
            continue;
        }
        let t_new = t + h_step;
        let f_new = k[6].clone();
        while next < times.len() && times[next] <= t_new {
            let v = dense(&y, &y_new, &k, h_step, (times[next] - t) / h_step);
            out.push(f.space().clamp(&Point(v)));
            next += 1;
        }
        t = t_new;
        y = y_new;
        fy = f_new;
        if let Some((b, gap)) = boundary_gap(f, &y) {
            if gap <= opts.boundary_eps {
                y[0] = b;
                stop = Some(t);
                break;
            }
        }
        let fac = if err > 0.0 {
            (0.9 * math::pow(err, -0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h = h_step * fac;
    }
    while next < times.len() {
        out.push(Point(y.clone()));
        next += 1;
    }
    let curve = Curve::new(times.to_vec(), out)?;
    Ok(curve.with_stop_time(stop).with_meta(meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::CurvatureParams;
    use crate::flows::oracle_flow;
    use crate::functionals::Library;
    use crate::spaces::ModelSpace;

    fn p(k: f64, n: f64) -> CurvatureParams {
        CurvatureParams::new(k, n).unwrap()
    }

    #[test]
    fn quadratic_decay() {
        let f = Functional::plain(Library::Quadratic { c: 1.0 }, ModelSpace::real_line()).unwrap();
        let grid = TimeGrid::new(vec![0.0, 0.5, 1.0]).unwrap();
        let c = ode_flow(&f, &2.0.into(), &grid, &OdeOptions::with_rtol(1e-8)).unwrap();
        assert!((c.points()[2].x() - 2.0 * math::exp(-1.0)).abs() < 1e-7);
        assert_eq!(c.stop_time(), None);
    }

    #[test]
    fn log_cos_expansion() {
        let f = Functional::from_name("log-cos", p(-1.0, -1.0)).unwrap();
        let grid = TimeGrid::new(vec![0.0, 1.0]).unwrap();
        let c = ode_flow(&f, &0.1.into(), &grid, &OdeOptions::with_rtol(1e-9)).unwrap();
        let expect = math::asin(math::sin(0.1) * core::f64::consts::E);
        assert!((c.points()[1].x() - expect).abs() < 1e-8);
        assert!((expect - 0.2748217312903422).abs() < 1e-15);
    }

    #[test]
    fn constant_functional() {
        let f = Functional::plain(
            Library::Constant { c: 1.0 },
            ModelSpace::euclidean(2).unwrap(),
        )
        .unwrap();
        let grid = TimeGrid::uniform(3.0, 7).unwrap();
        let y0 = Point(vec![0.3, -2.0]);
        let c = ode_flow(&f, &y0, &grid, &OdeOptions::default()).unwrap();
        assert!(c.points().iter().all(|q| *q == y0));
    }

    #[test]
    fn extinction_is_detected() {
        let q = p(0.0, -1.0);
        let f = Functional::from_name("log-x", q).unwrap();
        let grid = TimeGrid::uniform(0.8, 81).unwrap();
        let c = ode_flow(&f, &1.0.into(), &grid, &OdeOptions::with_rtol(1e-10)).unwrap();
        let stop = c.stop_time().unwrap();
        assert!((stop - 0.5).abs() < 1e-8, "{stop}");
        assert_eq!(c.points()[80], Point::scalar(0.0));
        let o = oracle_flow("log-x", &q, &1.0.into(), &grid).unwrap();
        for (a, b) in c.points().iter().zip(o.points()).take(45) {
            assert!((a.x() - b.x()).abs() < 1e-8);
        }
    }

    #[test]
    fn agrees_with_oracles() {
        let rtol = 1e-9;
        let cases: &[(&str, CurvatureParams, f64, f64)] = &[
            ("log-x", p(0.0, -1.0), 1.0, 0.45),
            ("log-cosh", p(1.0, -1.0), 1.0, 2.0),
            ("log-sinh", p(1.0, -1.0), 1.5, 0.8),
            ("log-cos", p(-1.0, -1.0), 0.4, 0.8),
            ("quadratic(0.5)", p(0.0, -1.0), -3.0, 2.0),
            ("fN-cos", p(-1.0, -1.0), 0.3, 2.0),
            ("fN-cosh", p(1.0, -1.0), 1.2, 2.0),
        ];
        for (name, q, y0, t_end) in cases {
            let f = crate::flows::oracle_functional(name, q).unwrap();
            let grid = TimeGrid::uniform(*t_end, 101).unwrap();
            let a = ode_flow(&f, &(*y0).into(), &grid, &OdeOptions::with_rtol(rtol)).unwrap();
            let b = oracle_flow(name, q, &(*y0).into(), &grid).unwrap();
            let sup = a
                .points()
                .iter()
                .zip(b.points())
                .map(|(u, v)| (u.x() - v.x()).abs())
                .fold(0.0, f64::max);
            assert!(sup <= 10.0 * rtol, "{name}: {sup}");
        }
    }

    #[test]
    fn blow_up_is_reported() {
        // log-cos moved onto the whole line: the flow reaches pi/2 in finite
        // time but there is no boundary to stop at
        let f = Functional::from_name("log-cos", p(-1.0, -1.0))
            .unwrap()
            .on(ModelSpace::real_line())
            .unwrap();
        let r = ode_flow(
            &f,
            &0.5.into(),
            &TimeGrid::uniform(2.0, 3).unwrap(),
            &OdeOptions::default(),
        );
        assert!(matches!(r, Err(Error::BlowUp { .. })), "{r:?}");
    }

    #[test]
    fn needs_gradient() {
        let f = Functional::expr("x^2", ModelSpace::real_line()).unwrap();
        let r = ode_flow(
            &f,
            &1.0.into(),
            &TimeGrid::uniform(1.0, 3).unwrap(),
            &OdeOptions::default(),
        );
        assert_eq!(r, Err(Error::MissingGradient));
    }
}
