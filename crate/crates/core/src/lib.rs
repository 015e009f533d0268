//! Energy-efficiency model and allocator for a downlink multi-user
//! massive-MIMO OFDM base station with nonlinear (soft-limiter) power
//! amplifiers.
//!
//! The crate provides, bottom to top:
//!
//! * [`pa`] -- closed-form soft-limiter statistics (Bussgang gain,
//!   distortion power, consumed amplifier power) and their analytic
//!   derivatives in the transmit power and the antenna count;
//! * [`link`] -- per-user SNDR and rate under zero-forcing precoding, the
//!   consumed-power model and the bit-per-joule objective;
//! * [`optimizer`] -- the DEEP-DEAL alternating optimizer: stationary-point
//!   searches for total power and relaxed antenna count via bracketed
//!   bisection, water-filling power shares, and integer finalization;
//! * [`baselines`] -- the REF-E and fixed-antenna DEEP references plus a
//!   brute-force grid oracle;
//! * [`mc`] -- a Monte-Carlo validator for the amplifier statistics.
//!
//! All model code is generic over the floating-point scalar through
//! [`scalar::Real`]; every public type defaults to `f64`, which is what the
//! solvers and the documented tolerances assume.

// Validation guards are written as negated comparisons (`!(v > 0)`) so that
// NaN inputs fail them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod erf;
pub mod error;
pub mod link;
pub mod mc;
pub mod optimizer;
pub mod pa;
pub mod rootfind;
pub mod scalar;
pub mod waterfill;

pub use baselines::{exhaustive_search, BaselineKind, BaselineSpec, GridSpec, PowerGrid};
pub use error::CoreError;
pub use link::{evaluate, rate, sndr, total_power, Allocation, Evaluation, SystemParams, UserLink};
pub use mc::{estimate_bussgang, soft_limit, BussgangEstimate, McConfig};
pub use optimizer::{
    alternating_optimize, default_antenna_probe, default_power_probe, f_m, f_p, finalize_integer_m,
    optimize_antennas, optimize_power, AoResult,
};
pub use pa::{
    dd_dm, dd_dp, distortion_total, dlambda_dm, dlambda_dp, dppa_dm, dppa_dp, ibo, lambda_of_psi,
    pa_power, PaClass, PaPoint,
};
pub use rootfind::{bracketed_bisection, sign_changes, RootSearchConfig};
pub use scalar::Real;
pub use waterfill::waterfill_shares;
