//! Alternating energy-efficiency optimizer.
//!
//! The joint problem over per-user powers and the antenna count is split
//! into three sub-steps that cycle until the objective settles:
//!
//! 1. total transmit power: root of [`f_p`] via bracketed bisection,
//! 2. power shares: closed-form water filling,
//! 3. relaxed antenna count: root of [`f_m`] via bracketed bisection,
//!
//! followed by integer finalization of the antenna count (the optimum of a
//! unimodal objective restricted to integers is at the floor or ceiling of
//! the relaxed root).
//!
//! `f_p` and `f_m` are the logarithmic derivatives of the objective,
//! `d/dx [ln(sum_k R_k) - ln(P_tot)]`, which share their roots with `dEE/dx`
//! and have a known sign pattern: positive toward the lower domain edge,
//! approaching zero from below at infinity. That pattern is what the bracket
//! search in [`crate::rootfind`] relies on.

use crate::error::CoreError;
use crate::link::{evaluate, Allocation, Evaluation, SystemParams, UserLink};
use crate::pa::kernel::Stats;
use crate::rootfind::{bracketed_bisection, RootSearchConfig};
use crate::scalar::Real;
use crate::waterfill::waterfill_shares;

/// Iteration cap for the alternating loops.
pub const AO_ITERATION_CAP: usize = 200;

/// Relative slack on the objective accepted as "no change" in addition to
/// the absolute tolerance; a pure absolute 1e-6 test may never trigger in
/// double precision when the objective is of order 1e5.
pub const AO_RELATIVE_TOL: f64 = 1e-9;

/// Outcome of an alternating optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct AoResult<R = f64> {
    /// Final allocation; the antenna count holds an integral value.
    pub allocation: Allocation<R>,
    /// Evaluation of the final allocation.
    pub evaluation: Evaluation<R>,
    /// Outer iterations performed.
    pub iterations: usize,
    /// Objective value after each outer iteration (at the relaxed antenna
    /// count). Non-decreasing up to bracket tolerance.
    pub ee_trace: Vec<R>,
    /// True when the loop exited through the tolerance test rather than the
    /// iteration cap.
    pub converged: bool,
}

impl<R: Real> AoResult<R> {
    /// Antenna count as an integer.
    pub fn antennas(&self) -> u32 {
        self.allocation
            .antennas_int()
            .expect("finalized allocation stores an integral antenna count")
    }
}

fn validate_scenario_shares<R: Real>(
    scenario: &[UserLink<R>],
    shares: &[R],
) -> Result<(), CoreError> {
    if scenario.is_empty() {
        return Err(CoreError::domain("scenario must contain at least one user"));
    }
    if shares.len() != scenario.len() {
        return Err(CoreError::DimensionMismatch {
            expected: scenario.len(),
            actual: shares.len(),
        });
    }
    let sum: R = shares.iter().copied().sum();
    if shares.iter().any(|w| !(*w >= R::zero())) || (sum - R::one()).abs() > R::of(1e-9) {
        return Err(CoreError::domain(format!(
            "shares must be a point on the simplex, sum = {sum}"
        )));
    }
    Ok(())
}

/// Logarithmic EE derivative in the total power,
/// `(sum_k dR_k/dP) / (sum_k R_k) - (dP_tot/dP) / P_tot`.
///
/// Returns `+inf` when the sum rate underflows to zero (consistent with the
/// sign of the derivative as `P -> 0`).
pub fn f_p<R: Real>(
    p: R,
    scenario: &[UserLink<R>],
    shares: &[R],
    m: R,
    params: &SystemParams<R>,
) -> Result<R, CoreError> {
    validate_scenario_shares(scenario, shares)?;
    let k = R::from_usize(scenario.len()).unwrap();
    if !(m > k) {
        return Err(CoreError::domain(format!(
            "f_p requires M > K, got M = {m} with K = {}",
            scenario.len()
        )));
    }
    if !(p > R::zero()) || !p.is_finite() {
        return Err(CoreError::domain(format!(
            "total power must be positive and finite, got {p}"
        )));
    }
    Ok(f_p_value(p, scenario, shares, m, params))
}

fn f_p_value<R: Real>(
    p: R,
    scenario: &[UserLink<R>],
    shares: &[R],
    m: R,
    params: &SystemParams<R>,
) -> R {
    let k = R::from_usize(scenario.len()).unwrap();
    let array_gain = m - k;
    let eta = params.inband_fraction;
    let stats = Stats::at(params.p_max_w * m / p);
    let d_total = eta * stats.d_factor * p;
    let dlam_dp = stats.dlambda_dp(p);
    let dd_dp = stats.dd_dp(p, eta);
    let bandwidth = params.bandwidth_hz();
    let ln2 = R::LN_2();

    let mut sum_rate = R::zero();
    let mut sum_drate = R::zero();
    for (link, &w) in scenario.iter().zip(shares) {
        let den = link.noise_power_w + link.beta * d_total;
        let gamma = array_gain * stats.lambda * w * p * link.beta / den;
        sum_rate = sum_rate + bandwidth * gamma.ln_1p() / ln2;
        // d gamma / dP expanded through lambda(P) and D(P).
        let numer = (dlam_dp * p + stats.lambda) * den - stats.lambda * p * link.beta * dd_dp;
        let drate = bandwidth * array_gain / (ln2 * (R::one() + gamma)) * (w * link.beta)
            / (den * den)
            * numer;
        sum_drate = sum_drate + drate;
    }
    if sum_rate == R::zero() {
        return R::infinity();
    }

    let p_pa = crate::pa::kernel::pa_power(&stats, p, m, params.p_max_w, params.pa_class);
    let p_tot = p_pa + params.p_const_w + m * params.p_sprf_w;
    sum_drate / sum_rate - stats.dppa_dp(params.pa_class) / p_tot
}

/// Logarithmic EE derivative in the relaxed antenna count,
/// `(sum_k dR_k/dM) / (sum_k R_k) - (dP_tot/dM) / P_tot`.
pub fn f_m<R: Real>(
    m: R,
    scenario: &[UserLink<R>],
    p: R,
    shares: &[R],
    params: &SystemParams<R>,
) -> Result<R, CoreError> {
    validate_scenario_shares(scenario, shares)?;
    let k = R::from_usize(scenario.len()).unwrap();
    if !(m > k) {
        return Err(CoreError::domain(format!(
            "f_m requires M > K, got M = {m} with K = {}",
            scenario.len()
        )));
    }
    if !(p > R::zero()) || !p.is_finite() {
        return Err(CoreError::domain(format!(
            "total power must be positive and finite, got {p}"
        )));
    }
    Ok(f_m_value(m, scenario, p, shares, params))
}

fn f_m_value<R: Real>(
    m: R,
    scenario: &[UserLink<R>],
    p: R,
    shares: &[R],
    params: &SystemParams<R>,
) -> R {
    let k = R::from_usize(scenario.len()).unwrap();
    let array_gain = m - k;
    let eta = params.inband_fraction;
    let stats = Stats::at(params.p_max_w * m / p);
    let d_total = eta * stats.d_factor * p;
    let dlam_dm = stats.dlambda_dm(p, params.p_max_w);
    let dd_dm = stats.dd_dm(p, params.p_max_w, eta);
    let bandwidth = params.bandwidth_hz();
    let ln2 = R::LN_2();

    let mut sum_rate = R::zero();
    let mut sum_drate = R::zero();
    for (link, &w) in scenario.iter().zip(shares) {
        let den = link.noise_power_w + link.beta * d_total;
        let gamma = array_gain * stats.lambda * w * p * link.beta / den;
        sum_rate = sum_rate + bandwidth * gamma.ln_1p() / ln2;
        // d gamma / dM: the array gain, lambda and D all move with M.
        let numer = (stats.lambda + array_gain * dlam_dm) * den
            - array_gain * stats.lambda * link.beta * dd_dm;
        let drate =
            bandwidth * link.beta * p * w / (ln2 * (R::one() + gamma)) / (den * den) * numer;
        sum_drate = sum_drate + drate;
    }
    if sum_rate == R::zero() {
        return R::infinity();
    }

    let p_pa = crate::pa::kernel::pa_power(&stats, p, m, params.p_max_w, params.pa_class);
    let p_tot = p_pa + params.p_const_w + m * params.p_sprf_w;
    let dptot_dm = stats.dppa_dm(params.p_max_w, params.pa_class) + params.p_sprf_w;
    sum_drate / sum_rate - dptot_dm / p_tot
}

/// Stationary total power for fixed shares and antenna count.
pub fn optimize_power<R: Real>(
    scenario: &[UserLink<R>],
    shares: &[R],
    m: R,
    params: &SystemParams<R>,
    cfg: &RootSearchConfig<R>,
) -> Result<R, CoreError> {
    validate_scenario_shares(scenario, shares)?;
    let k = R::from_usize(scenario.len()).unwrap();
    if !(m > k) {
        return Err(CoreError::domain(format!(
            "optimize_power requires M > K, got M = {m}"
        )));
    }
    bracketed_bisection(
        |p| f_p_value(p, scenario, shares, m, params),
        R::zero(),
        cfg,
    )
}

/// Stationary relaxed antenna count for fixed total power and shares.
pub fn optimize_antennas<R: Real>(
    scenario: &[UserLink<R>],
    p: R,
    shares: &[R],
    params: &SystemParams<R>,
    cfg: &RootSearchConfig<R>,
) -> Result<R, CoreError> {
    validate_scenario_shares(scenario, shares)?;
    if !(p > R::zero()) || !p.is_finite() {
        return Err(CoreError::domain(format!(
            "total power must be positive and finite, got {p}"
        )));
    }
    let k = R::from_usize(scenario.len()).unwrap();
    bracketed_bisection(|m| f_m_value(m, scenario, p, shares, params), k, cfg)
}

/// Pick the integer antenna count from the relaxed root: the better of
/// `floor(m_relaxed)` and `ceil(m_relaxed)`, clamped to at least `K + 1`.
pub fn finalize_integer_m<R: Real>(
    scenario: &[UserLink<R>],
    p: R,
    shares: &[R],
    m_relaxed: R,
    params: &SystemParams<R>,
) -> Result<(u32, Evaluation<R>), CoreError> {
    validate_scenario_shares(scenario, shares)?;
    let k_plus_1 = scenario.len() as u32 + 1;
    let lo = (m_relaxed.floor().to_u32().unwrap_or(u32::MAX)).max(k_plus_1);
    let hi = (m_relaxed.ceil().to_u32().unwrap_or(u32::MAX)).max(k_plus_1);

    let eval_at = |m_int: u32| -> Result<Evaluation<R>, CoreError> {
        let alloc = Allocation::new(p, shares.to_vec(), R::from_u32(m_int).unwrap())?;
        evaluate(scenario, &alloc, params)
    };

    let eval_lo = eval_at(lo)?;
    if hi == lo {
        return Ok((lo, eval_lo));
    }
    let eval_hi = eval_at(hi)?;
    if eval_lo.ee_bit_per_joule > eval_hi.ee_bit_per_joule {
        Ok((lo, eval_lo))
    } else {
        Ok((hi, eval_hi))
    }
}

/// Full alternating optimization: power, shares and antenna count cycled
/// until the objective moves by less than `params.tol_ee` (or by less than
/// [`AO_RELATIVE_TOL`] relatively), then integer finalization.
///
/// `p_init` seeds the first power bisection; later iterations probe at the
/// 6 dB back-off power for the current antenna count. `cfg_p`/`cfg_m` carry
/// the bracket tolerances and iteration budgets.
///
/// Hitting the iteration cap is reported through `converged = false` on the
/// result rather than an error.
pub fn alternating_optimize<R: Real>(
    scenario: &[UserLink<R>],
    params: &SystemParams<R>,
    cfg_p: &RootSearchConfig<R>,
    cfg_m: &RootSearchConfig<R>,
    m_init: R,
    p_init: R,
) -> Result<AoResult<R>, CoreError> {
    let k_users = scenario.len();
    if k_users == 0 {
        return Err(CoreError::domain("scenario must contain at least one user"));
    }
    let k = R::from_usize(k_users).unwrap();
    if !(m_init > k) {
        return Err(CoreError::domain(format!(
            "initial antenna count {m_init} must exceed K = {k_users}"
        )));
    }
    if !(p_init > R::zero()) || !p_init.is_finite() {
        return Err(CoreError::domain(format!(
            "initial power must be positive and finite, got {p_init}"
        )));
    }

    let backoff_6db = R::of(10f64.powf(0.6));
    let mut shares: Vec<R> = Allocation::equal_shares(k_users);
    let mut m = m_init;
    let mut p = p_init;
    let mut trace: Vec<R> = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for i in 0..AO_ITERATION_CAP {
        iterations = i + 1;
        let probe = if i == 0 {
            p_init
        } else {
            m * params.p_max_w / backoff_6db
        };
        p = optimize_power(scenario, &shares, m, params, &cfg_p.with_probe(probe))?;
        shares = waterfill_shares(scenario, p, m, params)?;
        m = optimize_antennas(scenario, p, &shares, params, cfg_m)?;

        let alloc = Allocation::new(p, shares.clone(), m)?;
        let ee = evaluate(scenario, &alloc, params)?.ee_bit_per_joule;
        trace.push(ee);

        if i > 0 {
            let delta = (ee - trace[i - 1]).abs();
            if delta < params.tol_ee || delta < R::of(AO_RELATIVE_TOL) * ee.abs() {
                converged = true;
                break;
            }
        }
    }

    let (m_star, evaluation) = finalize_integer_m(scenario, p, &shares, m, params)?;
    let allocation = Allocation::new(p, shares, R::from_u32(m_star).unwrap())?;
    Ok(AoResult {
        allocation,
        evaluation,
        iterations,
        ee_trace: trace,
        converged,
    })
}

/// Default bisection probe for the power search: the 6 dB back-off power of
/// `m` antennas.
pub fn default_power_probe<R: Real>(m: R, params: &SystemParams<R>) -> R {
    m * params.p_max_w / R::of(10f64.powf(0.6))
}

/// Default bisection probe for the antenna search: `min(2K, K + 32)`.
pub fn default_antenna_probe<R: Real>(k_users: usize) -> R {
    R::from_usize((2 * k_users).min(k_users + 32)).unwrap()
}
