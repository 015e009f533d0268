//! Optimal power-share distribution for a fixed total power and antenna
//! count.
//!
//! With `P` and `M` fixed, the consumed power does not depend on the shares,
//! so maximizing EE over the simplex reduces to the classic water-filling
//! problem `max sum_k log2(1 + A_k w_k)` with per-user slopes
//! `A_k = (M - K) lambda P beta_k / (sigma_k^2 + beta_k D)`. The KKT solution
//! is
//!
//! ```text
//! w_k = max(0, W - b_k),    b_k = 1 / A_k,
//! ```
//!
//! with the water level `W` fixed by `sum_k w_k = 1`. Sorting the
//! breakpoints gives `W` in closed form per active set; a bisection fallback
//! guards the degenerate rounding cases at segment knots.

use crate::error::CoreError;
use crate::link::{SystemParams, UserLink};
use crate::pa::PaPoint;
use crate::scalar::Real;

/// Optimal shares for `scenario` at total power `total_power_w` and antenna
/// count `antennas`. The result is on the simplex and satisfies the
/// water-filling KKT conditions.
pub fn waterfill_shares<R: Real>(
    scenario: &[UserLink<R>],
    total_power_w: R,
    antennas: R,
    params: &SystemParams<R>,
) -> Result<Vec<R>, CoreError> {
    if scenario.is_empty() {
        return Err(CoreError::domain("scenario must contain at least one user"));
    }
    let k = R::from_usize(scenario.len()).expect("user count fits scalar");
    if !(antennas > k) {
        return Err(CoreError::domain(format!(
            "water-filling requires M > K, got M = {antennas} with K = {}",
            scenario.len()
        )));
    }
    let pa = PaPoint::compute(
        total_power_w,
        antennas,
        params.p_max_w,
        params.inband_fraction,
        params.pa_class,
    )?;

    let array_gain = antennas - k;
    let breakpoints: Vec<R> = scenario
        .iter()
        .map(|link| {
            (link.noise_power_w + link.beta * pa.d_total)
                / (array_gain * pa.lambda * total_power_w * link.beta)
        })
        .collect();

    let level = water_level(&breakpoints);
    Ok(breakpoints
        .iter()
        .map(|&b| (level - b).max(R::zero()))
        .collect())
}

/// Solve `sum_k max(0, W - b_k) = 1` for the water level `W`.
fn water_level<R: Real>(breakpoints: &[R]) -> R {
    let mut sorted = breakpoints.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("breakpoints are ordered"));

    // On the segment where the j smallest breakpoints are active the
    // constraint is linear: W = (1 + sum of those breakpoints) / j.
    let mut prefix = R::zero();
    for (i, &b) in sorted.iter().enumerate() {
        let j = i + 1;
        prefix = prefix + b;
        let level = (R::one() + prefix) / R::from_usize(j).unwrap();
        let lower_ok = level >= b;
        let upper_ok = j == sorted.len() || level <= sorted[j];
        if lower_ok && upper_ok {
            return level;
        }
    }

    // Rounding at a segment knot can make every closed-form candidate just
    // miss its validity window; fall back to bisection on the monotone
    // constraint.
    let fill = |w: R| -> R { sorted.iter().map(|&b| (w - b).max(R::zero())).sum::<R>() - R::one() };
    let mut lo = sorted[0];
    let mut hi = sorted[sorted.len() - 1] + R::one();
    for _ in 0..200 {
        let mid = (lo + hi) * R::of(0.5);
        if fill(mid) < R::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) * R::of(0.5)
}
