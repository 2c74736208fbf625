//! One-sample location tests for high-dimensional Gaussian data.
//!
//! Three tests of `H₀: μ = μ₀` are provided:
//!
//! * Hotelling's `T²`, exact under normality but undefined when `p >= N`;
//! * Dempster's trace-normalised statistic `D_n` with a higher-order
//!   corrected normal critical point;
//! * the weighted average `T(ρ)` of the two standardised statistics, with the
//!   weight chosen to maximise local asymptotic power where the other two tests
//!   are equally powerful.
//!
//! Around them sit the trace-parameter estimators ([`spectral`]), closed-form
//! asymptotic power ([`power`]), Monte Carlo validation oracles ([`oracle`]) and
//! a deterministic parallel simulation harness ([`harness`]).

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod dist;
pub mod error;
pub mod fmt;
pub mod gauss;
pub mod harness;
pub mod io;
pub mod oracle;
pub mod power;
pub mod rng;
pub mod spectral;
pub mod testing;

pub use error::{Error, Result};
