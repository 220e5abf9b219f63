//! JSON experiment configs. Every object rejects unknown keys; each command
//! checks that the keys it needs are present.

use std::path::Path;

use knflow_core::flows::{oracle_functional, TimeGrid};
use knflow_core::{
    CurvatureParams, ExtReal, Functional, Interval, ModelSpace, Point, SampleSpec, Tolerance,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Coeff,
    Flow,
    CheckConvexity,
    CheckEvi,
    Reparam,
    Contract,
    AuditEnergy,
    Perturb,
    Pipeline,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Coeff => "coeff",
            Command::Flow => "flow",
            Command::CheckConvexity => "check-convexity",
            Command::CheckEvi => "check-evi",
            Command::Reparam => "reparam",
            Command::Contract => "contract",
            Command::AuditEnergy => "audit-energy",
            Command::Perturb => "perturb",
            Command::Pipeline => "pipeline",
        }
    }
}

/// `{"kind":"interval","a":0,"b":"inf","open":[true,false]}` or `{"kind":"euclidean","n":2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SpaceDesc {
    Interval {
        a: ExtReal,
        b: ExtReal,
        #[serde(default)]
        open: [bool; 2],
    },
    Euclidean {
        n: usize,
    },
}

impl SpaceDesc {
    pub fn build(&self) -> Result<ModelSpace> {
        Ok(match self {
            SpaceDesc::Interval { a, b, open } => {
                ModelSpace::interval(Interval::new(*a, *b, open[0], open[1])?)
            }
            SpaceDesc::Euclidean { n } => ModelSpace::euclidean(*n)?,
        })
    }
}

/// `{"library":"log-cos","K":-1,"N":-1}` or `{"expr":"log(cos(x))","domain":{...}}`.
/// `lift: true` turns `f` into `f_N` (library form only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalDesc {
    pub library: Option<String>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[serde(rename = "N")]
    pub n: Option<f64>,
    pub expr: Option<String>,
    pub domain: Option<SpaceDesc>,
    #[serde(default)]
    pub lift: bool,
}

impl FunctionalDesc {
    pub fn build(&self) -> Result<Functional> {
        match (&self.library, &self.expr) {
            (Some(name), None) => {
                let p = CurvatureParams::new(
                    self.k
                        .ok_or_else(|| CliError::config("library functional needs K"))?,
                    self.n
                        .ok_or_else(|| CliError::config("library functional needs N"))?,
                )?;
                let mut f = if name.starts_with("fN-") {
                    oracle_functional(name, &p)?
                } else {
                    Functional::from_name(name, p)?
                };
                if let Some(d) = &self.domain {
                    f = f.on(d.build()?)?;
                }
                if self.lift {
                    f = f.lifted(p.n())?;
                }
                Ok(f)
            }
            (None, Some(src)) => {
                if self.lift {
                    return Err(CliError::config("lift applies to library functionals only"));
                }
                let space = match &self.domain {
                    Some(d) => d.build()?,
                    None => ModelSpace::real_line(),
                };
                let mut f = Functional::expr(src, space)?;
                if let (Some(k), Some(n)) = (self.k, self.n) {
                    f = f.with_params(CurvatureParams::new(k, n)?);
                }
                Ok(f)
            }
            _ => Err(CliError::config(
                "functional needs exactly one of \"library\" and \"expr\"",
            )),
        }
    }
}

/// `{"t_end":0.49,"samples":400,"include":[0.375]}`, `{"times":[...]}` or `{"dt":0.01,"t_end":1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDesc {
    pub t_end: Option<f64>,
    pub samples: Option<usize>,
    pub dt: Option<f64>,
    pub times: Option<Vec<f64>>,
    #[serde(default)]
    pub include: Vec<f64>,
}

impl GridDesc {
    pub fn build(&self) -> Result<TimeGrid> {
        let g = match (&self.times, self.t_end, self.samples, self.dt) {
            (Some(ts), None, None, None) => TimeGrid::new(ts.clone())?,
            (None, Some(t), Some(n), None) => TimeGrid::uniform(t, n)?,
            (None, Some(t), None, Some(dt)) => TimeGrid::stepped(dt, t)?,
            _ => {
                return Err(CliError::config(
                    "grid needs \"times\", \"t_end\"+\"samples\" or \"t_end\"+\"dt\"",
                ))
            }
        };
        Ok(if self.include.is_empty() {
            g
        } else {
            g.including(&self.include)?
        })
    }
}

/// A point given as a number (1D) or an array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointDesc {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl From<&PointDesc> for Point {
    fn from(p: &PointDesc) -> Point {
        match p {
            PointDesc::Scalar(x) => Point::scalar(*x),
            PointDesc::Vector(v) => Point(v.clone()),
        }
    }
}

/// One experiment. Paths in `input`/`input2` are relative to the output
/// directory unless absolute; `output` is the base name of written files.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<Command>,
    pub functional: Option<FunctionalDesc>,
    pub space: Option<SpaceDesc>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[serde(rename = "N")]
    pub n: Option<f64>,
    pub lambda: Option<f64>,
    #[serde(rename = "M")]
    pub m: Option<ExtReal>,
    #[serde(rename = "R")]
    pub r: Option<f64>,
    pub tau: Option<f64>,
    pub horizon: Option<f64>,
    pub grid: Option<GridDesc>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub tolerance: Option<Tolerance>,
    pub rtol: Option<f64>,
    pub method: Option<String>,
    pub name: Option<String>,
    pub y0: Option<PointDesc>,
    pub direction: Option<String>,
    pub form: Option<String>,
    pub theta: Option<Vec<f64>>,
    pub t: Option<Vec<f64>>,
    pub amplitude: Option<f64>,
    pub window: Option<[f64; 2]>,
    pub bound: Option<f64>,
    /// Start time of a contraction window.
    pub start: Option<f64>,
    pub input: Option<String>,
    pub input2: Option<String>,
    pub output: Option<String>,
    pub stages: Option<Vec<ExperimentConfig>>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        let text = std::str::from_utf8(&bytes).map_err(|e| CliError::format(path, e))?;
        Ok((Self::from_json(text)?, bytes))
    }

    pub fn params(&self) -> Result<CurvatureParams> {
        let k = self
            .k
            .or_else(|| self.functional.as_ref().and_then(|f| f.k));
        let n = self
            .n
            .or_else(|| self.functional.as_ref().and_then(|f| f.n));
        match (k, n) {
            (Some(k), Some(n)) => Ok(CurvatureParams::new(k, n)?),
            _ => Err(CliError::config("K and N are required")),
        }
    }

    pub fn functional(&self) -> Result<Functional> {
        let f = self
            .functional
            .as_ref()
            .ok_or_else(|| CliError::config("\"functional\" is required"))?
            .build()?;
        match &self.space {
            Some(s) => Ok(f.on(s.build()?)?),
            None => Ok(f),
        }
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        self.grid
            .as_ref()
            .ok_or_else(|| CliError::config("\"grid\" is required"))?
            .build()
    }

    pub fn y0(&self) -> Result<Point> {
        self.y0
            .as_ref()
            .map(Point::from)
            .ok_or_else(|| CliError::config("\"y0\" is required"))
    }

    pub fn spec(&self, default_count: usize) -> SampleSpec {
        let d = SampleSpec::default();
        SampleSpec::new(
            self.seed.unwrap_or(d.seed),
            self.samples.unwrap_or(default_count),
        )
    }

    pub fn tolerance(&self) -> Result<Tolerance> {
        let t = self.tolerance.unwrap_or_default();
        t.validate_strict()?;
        Ok(t)
    }

    pub fn require<T: Copy>(&self, v: Option<T>, key: &str) -> Result<T> {
        v.ok_or_else(|| CliError::config(format!("\"{key}\" is required")))
    }

    pub fn require_str<'a>(&self, v: &'a Option<String>, key: &str) -> Result<&'a str> {
        v.as_deref()
            .ok_or_else(|| CliError::config(format!("\"{key}\" is required")))
    }
}
