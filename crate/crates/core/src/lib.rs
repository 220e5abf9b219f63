//! Gradient flows of `(K,N)`-convex functionals with negative dimension
//! parameter `N` on model geodesic spaces.
//!
//! The crate is `no_std` with `alloc`. It covers:
//!
//! * extended-real arithmetic and sampling policy ([`ext`], [`policy`]),
//! * the kernels `s_{K,N}`, `c_{K,N}` and distortion coefficients ([`coefficients`]),
//! * intervals and Euclidean spaces with their straight geodesics ([`spaces`]),
//! * extended-real functionals in log-domain form ([`functionals`]),
//! * numerical convexity verifiers ([`convexity`]),
//! * closed-form, Runge–Kutta and minimizing-movement flows ([`flows`]),
//! * the time changes between `f`-curves and `f_N`-curves ([`reparam`]),
//! * EVI / slope / energy verifiers and contraction certificates ([`analysis`]).
//!
//! Every check is deterministic given its [`SampleSpec`] seed.
#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

mod error;
mod math;

pub mod analysis;
pub mod coefficients;
pub mod convexity;
pub mod ext;
pub mod flows;
pub mod functionals;
pub mod policy;
pub mod reparam;
pub mod spaces;

pub use coefficients::{c_kn, s_kn, sigma, sigma_rate_limits, CurvatureParams, SigmaValue};
pub use error::{Error, Result};
pub use ext::{ext_add, ext_mul, ext_mul_conv, ExtReal};
pub use functionals::{Functional, Library};
pub use policy::{SampleSpec, Sampler, Tolerance};
pub use spaces::{Geodesic, Interval, ModelSpace, Point};
