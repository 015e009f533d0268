//! Reference allocators and the brute-force search oracle.
//!
//! * `REF-E`: fixed back-off (6 dB by convention), equal shares, fixed
//!   antenna count -- the distortion-neglecting reference.
//! * `DEEP` with fixed antennas: alternates the stationary-power search and
//!   water filling at a fixed antenna count.
//! * `exhaustive_search`: evaluates every `(M, P)` grid point and returns the
//!   argmax; used to validate the alternating optimizer.

use rayon::prelude::*;

use crate::error::CoreError;
use crate::link::{evaluate, Allocation, Evaluation, SystemParams, UserLink};
use crate::optimizer::{AoResult, AO_ITERATION_CAP, AO_RELATIVE_TOL};
use crate::rootfind::RootSearchConfig;
use crate::scalar::Real;
use crate::waterfill::waterfill_shares;

/// Which reference allocator to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    /// Fixed back-off, equal shares, fixed antenna count.
    RefE,
    /// Power and shares optimized at a fixed antenna count.
    DeepFixedM,
}

/// Configuration of a reference allocator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineSpec<R = f64> {
    pub kind: BaselineKind,
    /// Antenna count used by the baseline; must exceed the user count.
    pub fixed_m: u32,
    /// Back-off in dB pinned by REF-E (ignored by the DEEP baseline).
    pub ref_ibo_db: R,
}

impl<R: Real> BaselineSpec<R> {
    pub fn ref_e(fixed_m: u32) -> Self {
        BaselineSpec {
            kind: BaselineKind::RefE,
            fixed_m,
            ref_ibo_db: R::of(6.0),
        }
    }

    pub fn deep_fixed_m(fixed_m: u32) -> Self {
        BaselineSpec {
            kind: BaselineKind::DeepFixedM,
            fixed_m,
            ref_ibo_db: R::of(6.0),
        }
    }
}

fn check_fixed_m<R: Real>(spec: &BaselineSpec<R>, k_users: usize) -> Result<R, CoreError> {
    if (spec.fixed_m as usize) <= k_users {
        return Err(CoreError::domain(format!(
            "baseline antenna count {} must exceed K = {k_users}",
            spec.fixed_m
        )));
    }
    if !spec.ref_ibo_db.is_finite() {
        return Err(CoreError::domain("reference back-off must be finite"));
    }
    Ok(R::from_u32(spec.fixed_m).unwrap())
}

/// Fixed-back-off reference: `P = M p_max / 10^(ibo_db/10)`, equal shares.
pub fn ref_e<R: Real>(
    scenario: &[UserLink<R>],
    spec: &BaselineSpec<R>,
    params: &SystemParams<R>,
) -> Result<AoResult<R>, CoreError> {
    if scenario.is_empty() {
        return Err(CoreError::domain("scenario must contain at least one user"));
    }
    let m = check_fixed_m(spec, scenario.len())?;
    let ten = R::of(10.0);
    let p = m * params.p_max_w / ten.powf(spec.ref_ibo_db / ten);
    let allocation = Allocation::new(p, Allocation::equal_shares(scenario.len()), m)?;
    let evaluation = evaluate(scenario, &allocation, params)?;
    let ee = evaluation.ee_bit_per_joule;
    Ok(AoResult {
        allocation,
        evaluation,
        iterations: 0,
        ee_trace: vec![ee],
        converged: true,
    })
}

/// Power-only optimization at a fixed antenna count: alternate the
/// stationary-power search and water filling until the objective settles.
pub fn deep_fixed_m<R: Real>(
    scenario: &[UserLink<R>],
    spec: &BaselineSpec<R>,
    params: &SystemParams<R>,
    cfg_p: &RootSearchConfig<R>,
) -> Result<AoResult<R>, CoreError> {
    if scenario.is_empty() {
        return Err(CoreError::domain("scenario must contain at least one user"));
    }
    let m = check_fixed_m(spec, scenario.len())?;
    let mut shares: Vec<R> = Allocation::equal_shares(scenario.len());
    let mut p = cfg_p.x_test;
    let mut trace: Vec<R> = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for i in 0..AO_ITERATION_CAP {
        iterations = i + 1;
        p = crate::optimizer::optimize_power(scenario, &shares, m, params, &cfg_p.with_probe(p))?;
        shares = waterfill_shares(scenario, p, m, params)?;
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

    let allocation = Allocation::new(p, shares, m)?;
    let evaluation = evaluate(scenario, &allocation, params)?;
    Ok(AoResult {
        allocation,
        evaluation,
        iterations,
        ee_trace: trace,
        converged,
    })
}

/// Transmit-power axis of the search grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerGrid<R = f64> {
    /// `start, start + step, ...` up to and including `stop` (mirrors the
    /// linear scan used when validating against published settings).
    Linear { start: R, stop: R, step: R },
    /// `points` logarithmically spaced values on `[start, stop]`; the
    /// default, since the objective landscape spans decades of power.
    Log { start: R, stop: R, points: usize },
}

impl<R: Real> PowerGrid<R> {
    fn values(&self) -> Result<Vec<R>, CoreError> {
        match *self {
            PowerGrid::Linear { start, stop, step } => {
                if !(start > R::zero()) || !(stop >= start) || !(step > R::zero()) {
                    return Err(CoreError::domain("invalid linear power grid"));
                }
                let mut v = Vec::new();
                let mut i = 0usize;
                loop {
                    let p = start + step * R::from_usize(i).unwrap();
                    if p > stop * (R::one() + R::of(1e-12)) {
                        break;
                    }
                    v.push(p);
                    i += 1;
                }
                Ok(v)
            }
            PowerGrid::Log {
                start,
                stop,
                points,
            } => {
                if !(start > R::zero()) || !(stop > start) || points < 2 {
                    return Err(CoreError::domain("invalid log power grid"));
                }
                let log_lo = start.ln();
                let step = (stop.ln() - log_lo) / R::from_usize(points - 1).unwrap();
                Ok((0..points)
                    .map(|i| (log_lo + step * R::from_usize(i).unwrap()).exp())
                    .collect())
            }
        }
    }
}

/// Search grid over antenna count and total power.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec<R = f64> {
    pub m_min: u32,
    pub m_max: u32,
    pub m_step: u32,
    pub power: PowerGrid<R>,
}

/// Evaluate every grid point and return the best allocation.
///
/// Shares are fixed across the grid: equal shares unless `shares` is given.
/// Antenna counts not exceeding the user count are infeasible under zero
/// forcing and are skipped. Ties break toward smaller `M`, then smaller `P`,
/// so parallel and serial scans return the same point.
pub fn exhaustive_search<R: Real>(
    scenario: &[UserLink<R>],
    grid: &GridSpec<R>,
    shares: Option<&[R]>,
    params: &SystemParams<R>,
) -> Result<(Allocation<R>, Evaluation<R>), CoreError> {
    if scenario.is_empty() {
        return Err(CoreError::domain("scenario must contain at least one user"));
    }
    if grid.m_step == 0 {
        return Err(CoreError::domain("antenna step must be positive"));
    }
    let share_vec: Vec<R> = match shares {
        Some(s) => {
            if s.len() != scenario.len() {
                return Err(CoreError::DimensionMismatch {
                    expected: scenario.len(),
                    actual: s.len(),
                });
            }
            s.to_vec()
        }
        None => Allocation::equal_shares(scenario.len()),
    };

    let k = scenario.len() as u32;
    let m_values: Vec<u32> = (grid.m_min..=grid.m_max)
        .step_by(grid.m_step as usize)
        .filter(|&m| m > k)
        .collect();
    let p_values = grid.power.values()?;
    if m_values.is_empty() || p_values.is_empty() {
        return Err(CoreError::EmptyGrid);
    }

    // One pass per antenna count in parallel; each pass scans the power axis
    // in order and keeps its best point, then the per-m winners are folded
    // in index order. Ties cannot depend on thread scheduling.
    let per_m: Vec<(R, u32, usize)> = m_values
        .par_iter()
        .map(|&m| -> Result<(R, u32, usize), CoreError> {
            let m_r = R::from_u32(m).unwrap();
            let mut best_ee = R::neg_infinity();
            let mut best_ip = 0usize;
            for (ip, &p) in p_values.iter().enumerate() {
                let alloc = Allocation::new(p, share_vec.clone(), m_r)?;
                let ee = evaluate(scenario, &alloc, params)?.ee_bit_per_joule;
                if ee > best_ee {
                    best_ee = ee;
                    best_ip = ip;
                }
            }
            Ok((best_ee, m, best_ip))
        })
        .collect::<Result<Vec<_>, CoreError>>()?;

    let mut winner: Option<(R, u32, usize)> = None;
    for cand in per_m {
        winner = Some(match winner {
            None => cand,
            Some(best) => {
                if cand.0 > best.0 {
                    cand
                } else {
                    best
                }
            }
        });
    }
    let (_, m_best, ip_best) = winner.expect("grid verified non-empty");
    let allocation = Allocation::new(p_values[ip_best], share_vec, R::from_u32(m_best).unwrap())?;
    let evaluation = evaluate(scenario, &allocation, params)?;
    Ok((allocation, evaluation))
}
