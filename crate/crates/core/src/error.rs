use alloc::boxed::Box;
use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("indeterminate extended-real sum (+inf) + (-inf)")]
    IndeterminateSum,
    #[error("negative coefficient {0} in a convexity combination")]
    NegativeCoefficient(f64),
    #[error("NaN produced while computing {0}")]
    NotANumber(&'static str),
    #[error("negative angle {0}")]
    NegativeTheta(f64),
    #[error("parameter `{name}` = {value} is out of range")]
    ParamOutOfRange { name: &'static str, value: f64 },
    #[error("angle {0} lies in the singular regime of the distortion coefficients")]
    SingularTheta(f64),
    #[error("invalid curvature parameters: {0}")]
    InvalidParams(&'static str),
    #[error("invalid space: {0}")]
    InvalidSpace(&'static str),
    #[error("point lies outside the space")]
    PointOutsideSpace,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("base point is outside the finiteness domain")]
    BasePointOutsideDomain,
    #[error("point is outside the finiteness domain")]
    PointOutsideDomain,
    #[error("example `{name}` requires {requirement}")]
    IncompatibleSign {
        name: &'static str,
        requirement: &'static str,
    },
    #[error("unknown functional `{0}`")]
    UnknownFunctional(String),
    #[error("expression parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("functional has no analytic gradient")]
    MissingGradient,
    #[error("could not sample any point of the domain")]
    EmptyDomain,
    #[error("bracket points must satisfy a < b < c < d inside the interval")]
    BadBracket,
    #[error("an upper bound M is required when K < 0")]
    UnboundedAbove,
    #[error("no closed-form flow registered for `{0}`")]
    NoOracle(String),
    #[error("step size underflow at t = {t} away from the domain boundary")]
    BlowUp { t: f64 },
    #[error("proximal objective is not bounded below near {at}")]
    NotBoundedBelow { at: f64 },
    #[error("minimizing movement failed at step {index}: {source}")]
    MmsStep { index: usize, source: Box<Error> },
    #[error("curve is not in C' (energy increases)")]
    NotInCPrime,
    #[error("curve is not in C''_N")]
    NotInCsecondN,
    #[error("1/f_N diverges inside the window")]
    DivergentIntegrand,
    #[error("K must be nonzero for this check")]
    KZero,
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("finite-difference step underflow at t = {0}")]
    StepUnderflow(f64),
    #[error("curves have disjoint time windows")]
    DisjointWindows,
    #[error("invalid curve: {0}")]
    InvalidCurve(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
