//! Per-user SNDR, achievable rate, consumed power and the energy-efficiency
//! objective for a given allocation.
//!
//! Zero-forcing precoding over i.i.d. Rayleigh channels gives each of the `K`
//! users an array gain of `M - K` and removes linear inter-user interference,
//! so user `k` sees
//!
//! ```text
//! gamma_k = (M - K) * lambda * omega_k * P * beta_k / (sigma_k^2 + beta_k * D)
//! ```
//!
//! with the amplifier statistics `lambda`, `D` shared by all users (they
//! depend only on `P` and `M`). Rates are Shannon rates over the aggregate
//! OFDM bandwidth, and the objective is `EE = sum_k R_k / P_tot` in
//! bits per joule.

use crate::error::CoreError;
use crate::pa::{self, PaClass, PaPoint};
use crate::scalar::Real;

/// Tolerance on `sum(shares) == 1` accepted by [`Allocation::new`].
pub const SHARE_SUM_TOL: f64 = 1e-12;

/// Hardware and waveform constants of the base station.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams<R = f64> {
    /// Number of occupied subcarriers.
    pub n_subcarriers: u32,
    /// Subcarrier spacing, hertz.
    pub subcarrier_spacing_hz: R,
    /// Fraction of the nonlinear distortion power falling in band.
    pub inband_fraction: R,
    /// Per-amplifier saturation power, watts.
    pub p_max_w: R,
    /// Static site consumption (cooling, oscillators, ...), watts.
    pub p_const_w: R,
    /// Per-antenna RF chain consumption, watts.
    pub p_sprf_w: R,
    /// Amplifier consumed-power model.
    pub pa_class: PaClass,
    /// Bisection bracket tolerance on the total power, watts.
    pub tol_p: R,
    /// Bisection bracket tolerance on the relaxed antenna count.
    pub tol_m: R,
    /// Convergence tolerance on the objective between outer iterations.
    pub tol_ee: R,
}

impl<R: Real> SystemParams<R> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n_subcarriers: u32,
        subcarrier_spacing_hz: R,
        inband_fraction: R,
        p_max_w: R,
        p_const_w: R,
        p_sprf_w: R,
        pa_class: PaClass,
        tol_p: R,
        tol_m: R,
        tol_ee: R,
    ) -> Result<Self, CoreError> {
        if n_subcarriers == 0 {
            return Err(CoreError::domain("subcarrier count must be at least 1"));
        }
        for (v, what) in [
            (subcarrier_spacing_hz, "subcarrier spacing"),
            (p_max_w, "saturation power"),
            (p_const_w, "static power"),
            (p_sprf_w, "per-antenna RF power"),
            (tol_p, "power tolerance"),
            (tol_m, "antenna tolerance"),
            (tol_ee, "EE tolerance"),
        ] {
            if !(v > R::zero()) || !v.is_finite() {
                return Err(CoreError::domain(format!(
                    "{what} must be positive and finite, got {v}"
                )));
            }
        }
        if !(inband_fraction > R::zero() && inband_fraction <= R::one()) {
            return Err(CoreError::domain(format!(
                "in-band fraction must lie in (0, 1], got {inband_fraction}"
            )));
        }
        Ok(SystemParams {
            n_subcarriers,
            subcarrier_spacing_hz,
            inband_fraction,
            p_max_w,
            p_const_w,
            p_sprf_w,
            pa_class,
            tol_p,
            tol_m,
            tol_ee,
        })
    }

    /// Macro-cell defaults: 1200 subcarriers at 15 kHz, eta = 2/3,
    /// 160 W saturation per amplifier, 348 W static, 23 W per RF chain,
    /// all solver tolerances 1e-6.
    pub fn macro_cell(pa_class: PaClass) -> Self {
        SystemParams::new(
            1200,
            R::of(15_000.0),
            R::of(2.0 / 3.0),
            R::of(160.0),
            R::of(348.0),
            R::of(23.0),
            pa_class,
            R::of(1e-6),
            R::of(1e-6),
            R::of(1e-6),
        )
        .expect("defaults are valid")
    }

    /// Aggregate bandwidth `N_U * delta_f`, hertz.
    pub fn bandwidth_hz(&self) -> R {
        R::from_u32(self.n_subcarriers).expect("subcarrier count fits scalar")
            * self.subcarrier_spacing_hz
    }
}

/// One user's large-scale channel gain and receiver noise power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserLink<R = f64> {
    /// Linear large-scale channel gain (inverse path loss), dimensionless.
    pub beta: R,
    /// Receiver noise power aggregated over the occupied subcarriers, watts.
    pub noise_power_w: R,
}

impl<R: Real> UserLink<R> {
    pub fn new(beta: R, noise_power_w: R) -> Result<Self, CoreError> {
        if !(beta > R::zero()) || !beta.is_finite() {
            return Err(CoreError::domain(format!(
                "channel gain must be positive and finite, got {beta}"
            )));
        }
        if !(noise_power_w > R::zero()) || !noise_power_w.is_finite() {
            return Err(CoreError::domain(format!(
                "noise power must be positive and finite, got {noise_power_w}"
            )));
        }
        Ok(UserLink {
            beta,
            noise_power_w,
        })
    }

    /// Construct from a path loss in dB (beta = 10^(-pl/10)).
    pub fn from_path_loss_db(path_loss_db: R, noise_power_w: R) -> Result<Self, CoreError> {
        let ten = R::of(10.0);
        UserLink::new(ten.powf(-path_loss_db / ten), noise_power_w)
    }
}

/// Decision variables: total power, per-user shares and antenna count.
///
/// The antenna count is carried as a scalar; the alternating optimizer works
/// on its continuous relaxation and stores an integral value after
/// finalization.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation<R = f64> {
    /// Total transmit power over all front-ends, watts.
    pub total_power_w: R,
    /// Per-user power shares; nonnegative, summing to one.
    pub shares: Vec<R>,
    /// Antenna count; real-valued while relaxed.
    pub antennas: R,
}

impl<R: Real> Allocation<R> {
    pub fn new(total_power_w: R, shares: Vec<R>, antennas: R) -> Result<Self, CoreError> {
        if !(total_power_w > R::zero()) || !total_power_w.is_finite() {
            return Err(CoreError::domain(format!(
                "total power must be positive and finite, got {total_power_w}"
            )));
        }
        if shares.is_empty() {
            return Err(CoreError::domain("share vector must not be empty"));
        }
        if shares.iter().any(|w| !(*w >= R::zero()) || !w.is_finite()) {
            return Err(CoreError::domain("shares must be nonnegative and finite"));
        }
        let sum: R = shares.iter().copied().sum();
        if (sum - R::one()).abs() > R::of(SHARE_SUM_TOL) {
            return Err(CoreError::domain(format!(
                "shares must sum to 1 within {SHARE_SUM_TOL}, got {sum}"
            )));
        }
        if !(antennas > R::zero()) || !antennas.is_finite() {
            return Err(CoreError::domain(format!(
                "antenna count must be positive and finite, got {antennas}"
            )));
        }
        Ok(Allocation {
            total_power_w,
            shares,
            antennas,
        })
    }

    /// Equal shares `1/K` for `k_users` users.
    pub fn equal_shares(k_users: usize) -> Vec<R> {
        let w = R::one() / R::from_usize(k_users).expect("user count fits scalar");
        vec![w; k_users]
    }

    /// Antenna count as an integer, if the stored value is integral.
    pub fn antennas_int(&self) -> Option<u32> {
        let r = self.antennas.round();
        if (self.antennas - r).abs() == R::zero() {
            r.to_u32()
        } else {
            None
        }
    }
}

/// Derived quantities for one allocation on one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation<R = f64> {
    /// Amplifier operating point (back-off, Bussgang gain, distortion,
    /// consumed amplifier power).
    pub pa: PaPoint<R>,
    /// Per-user SNDR, dimensionless.
    pub sndr: Vec<R>,
    /// Per-user achievable rates, bit/s.
    pub rates_bps: Vec<R>,
    /// Sum rate, bit/s.
    pub sum_rate_bps: R,
    /// Total consumed power, watts.
    pub p_tot_w: R,
    /// Energy efficiency, bit/joule.
    pub ee_bit_per_joule: R,
}

fn check_m_exceeds_k<R: Real>(m: R, k_users: usize) -> Result<(), CoreError> {
    let k = R::from_usize(k_users).expect("user count fits scalar");
    if !(m > k) {
        return Err(CoreError::domain(format!(
            "ZF precoding requires M > K, got M = {m} with K = {k_users}"
        )));
    }
    Ok(())
}

/// SNDR of a single user under `alloc` with power share `share`.
///
/// `k_users` is the number of simultaneously served users (it sets the
/// zero-forcing array gain `M - K`).
pub fn sndr<R: Real>(
    link: &UserLink<R>,
    share: R,
    alloc: &Allocation<R>,
    k_users: usize,
    params: &SystemParams<R>,
) -> Result<R, CoreError> {
    check_m_exceeds_k(alloc.antennas, k_users)?;
    if !(share >= R::zero()) {
        return Err(CoreError::domain(format!(
            "share must be nonnegative, got {share}"
        )));
    }
    let pa = PaPoint::compute(
        alloc.total_power_w,
        alloc.antennas,
        params.p_max_w,
        params.inband_fraction,
        params.pa_class,
    )?;
    let k = R::from_usize(k_users).expect("user count fits scalar");
    Ok(sndr_from_pa(
        link,
        share,
        alloc.total_power_w,
        alloc.antennas - k,
        &pa,
    ))
}

#[inline]
fn sndr_from_pa<R: Real>(link: &UserLink<R>, share: R, p: R, array_gain: R, pa: &PaPoint<R>) -> R {
    array_gain * pa.lambda * share * p * link.beta / (link.noise_power_w + link.beta * pa.d_total)
}

/// Shannon rate over the aggregate bandwidth, bit/s.
pub fn rate<R: Real>(gamma: R, params: &SystemParams<R>) -> Result<R, CoreError> {
    if !(gamma >= R::zero()) || !gamma.is_finite() {
        return Err(CoreError::domain(format!(
            "SNDR must be nonnegative and finite, got {gamma}"
        )));
    }
    Ok(params.bandwidth_hz() * gamma.ln_1p() / R::LN_2())
}

/// Total consumed power `P_PA + P_const + M * P_SPRF`, watts.
pub fn total_power<R: Real>(
    alloc: &Allocation<R>,
    params: &SystemParams<R>,
) -> Result<R, CoreError> {
    let p_pa = pa::pa_power(
        alloc.total_power_w,
        alloc.antennas,
        params.p_max_w,
        params.pa_class,
    )?;
    Ok(p_pa + params.p_const_w + alloc.antennas * params.p_sprf_w)
}

/// Evaluate all derived quantities for `alloc` on `scenario`.
pub fn evaluate<R: Real>(
    scenario: &[UserLink<R>],
    alloc: &Allocation<R>,
    params: &SystemParams<R>,
) -> Result<Evaluation<R>, CoreError> {
    if scenario.is_empty() {
        return Err(CoreError::domain("scenario must contain at least one user"));
    }
    if alloc.shares.len() != scenario.len() {
        return Err(CoreError::DimensionMismatch {
            expected: scenario.len(),
            actual: alloc.shares.len(),
        });
    }
    check_m_exceeds_k(alloc.antennas, scenario.len())?;

    // The amplifier statistics depend only on (P, M): evaluate once and
    // share across users.
    let pa = PaPoint::compute(
        alloc.total_power_w,
        alloc.antennas,
        params.p_max_w,
        params.inband_fraction,
        params.pa_class,
    )?;
    let k = R::from_usize(scenario.len()).expect("user count fits scalar");
    let array_gain = alloc.antennas - k;
    let bandwidth = params.bandwidth_hz();

    let mut sndr = Vec::with_capacity(scenario.len());
    let mut rates = Vec::with_capacity(scenario.len());
    let mut sum_rate = R::zero();
    for (link, &share) in scenario.iter().zip(&alloc.shares) {
        let gamma = sndr_from_pa(link, share, alloc.total_power_w, array_gain, &pa);
        let r = bandwidth * gamma.ln_1p() / R::LN_2();
        sum_rate = sum_rate + r;
        sndr.push(gamma);
        rates.push(r);
    }

    let p_tot = pa.p_pa + params.p_const_w + alloc.antennas * params.p_sprf_w;
    Ok(Evaluation {
        pa,
        sndr,
        rates_bps: rates,
        sum_rate_bps: sum_rate,
        p_tot_w: p_tot,
        ee_bit_per_joule: sum_rate / p_tot,
    })
}

#[cfg(test)]
#[allow(clippy::excessive_precision)] // frozen reference values keep their full oracle digits
mod tests {
    use super::*;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(a.abs())
    }

    fn params(class: PaClass) -> SystemParams {
        SystemParams::macro_cell(class)
    }

    fn homogeneous(k: usize, beta_db: f64) -> Vec<UserLink> {
        let beta = 10f64.powf(-beta_db / 10.0);
        vec![UserLink::new(beta, 7.1659290699629505e-14).unwrap(); k]
    }

    #[test]
    fn rate_reference_points() {
        let p = params(PaClass::ClassB);
        assert_eq!(rate(0.0, &p).unwrap(), 0.0);
        let r1 = rate(1.0, &p).unwrap();
        assert!(rel_close(r1, 18.0e6, 1e-12), "R(1) = {r1}");
        let r3 = rate(3.0, &p).unwrap();
        assert!(rel_close(r3, 36.0e6, 1e-12), "R(3) = {r3}");
        assert!(rate(-0.5, &p).is_err());
    }

    #[test]
    fn sndr_zero_share_is_zero() {
        let p = params(PaClass::ClassB);
        let scenario = homogeneous(2, 80.0);
        let alloc = Allocation::new(1000.0, vec![1.0, 0.0], 32.0).unwrap();
        let g = sndr(&scenario[1], 0.0, &alloc, 2, &p).unwrap();
        assert_eq!(g, 0.0);
    }

    #[test]
    fn sndr_deep_backoff_reduces_to_snr() {
        // psi = 100: lambda -> 1, D -> 0, so gamma -> (M-K) w P beta / sigma^2.
        let p = params(PaClass::ClassB);
        let scenario = homogeneous(2, 80.0);
        let m = 32.0;
        let pw = m * p.p_max_w / 100.0;
        let alloc = Allocation::new(pw, vec![0.5, 0.5], m).unwrap();
        let g = sndr(&scenario[0], 0.5, &alloc, 2, &p).unwrap();
        let snr = (m - 2.0) * 0.5 * pw * scenario[0].beta / scenario[0].noise_power_w;
        assert!(rel_close(g, snr, 1e-6), "gamma = {g}, snr = {snr}");
    }

    #[test]
    fn sndr_saturates_in_power() {
        // P -> inf: gamma -> pi M (M-K) w beta p_max / (4 C), with
        // C = sigma^2 + eta beta (1 - pi/4) M p_max.
        let p = params(PaClass::ClassB);
        let scenario = homogeneous(2, 80.0);
        let m = 32.0;
        let psi = 1e-6;
        let pw = m * p.p_max_w / psi;
        let alloc = Allocation::new(pw, vec![0.5, 0.5], m).unwrap();
        let g = sndr(&scenario[0], 0.5, &alloc, 2, &p).unwrap();
        let beta = scenario[0].beta;
        let c = scenario[0].noise_power_w
            + p.inband_fraction * beta * (1.0 - std::f64::consts::FRAC_PI_4) * m * p.p_max_w;
        let limit = std::f64::consts::PI * m * (m - 2.0) * 0.5 * beta * p.p_max_w / (4.0 * c);
        assert!(rel_close(g, limit, 1e-2), "gamma = {g}, limit = {limit}");
    }

    #[test]
    fn sndr_approaches_saturation_constant_from_above() {
        // For fixed (omega, M), gamma(P) peaks in the noise-limited regime
        // and then decays monotonically onto its large-power constant.
        let p = params(PaClass::ClassB);
        let scenario = homogeneous(2, 80.0);
        let m = 32.0;
        let beta = scenario[0].beta;
        let c = scenario[0].noise_power_w
            + p.inband_fraction * beta * (1.0 - std::f64::consts::FRAC_PI_4) * m * p.p_max_w;
        let limit = std::f64::consts::PI * m * (m - 2.0) * 0.5 * beta * p.p_max_w / (4.0 * c);
        let gamma_at = |psi: f64| {
            let pw = m * p.p_max_w / psi;
            let alloc = Allocation::new(pw, vec![0.5, 0.5], m).unwrap();
            sndr(&scenario[0], 0.5, &alloc, 2, &p).unwrap()
        };
        let mut prev = f64::INFINITY;
        for i in 0..=200 {
            // psi from 1e-1 down to 1e-6: deep in the clipping regime.
            let psi = 10f64.powf(-1.0 - 5.0 * i as f64 / 200.0);
            let g = gamma_at(psi);
            assert!(
                g >= limit * (1.0 - 1e-9),
                "psi = {psi}: gamma {g} below limit {limit}"
            );
            assert!(g <= prev * (1.0 + 1e-12), "psi = {psi}: gamma not decaying");
            prev = g;
        }
        let final_ratio = gamma_at(1e-6) / limit;
        assert!(
            (final_ratio - 1.0).abs() <= 1e-3,
            "gamma(psi=1e-6)/limit = {final_ratio}"
        );
    }

    #[test]
    fn sndr_requires_m_above_k() {
        let p = params(PaClass::ClassB);
        let scenario = homogeneous(2, 80.0);
        let alloc = Allocation::new(1000.0, vec![0.5, 0.5], 2.0).unwrap();
        assert!(sndr(&scenario[0], 0.5, &alloc, 2, &p).is_err());
    }

    #[test]
    fn total_power_perfect_reference() {
        // psi = 100, P = 100, M = 32: P_tot ~ 100 + 348 + 736.
        let mut p = params(PaClass::Perfect);
        p.p_max_w = 100.0 * 100.0 / 32.0; // force psi = 100 at P = 100
        let alloc = Allocation::new(100.0, vec![1.0], 32.0).unwrap();
        let tot = total_power(&alloc, &p).unwrap();
        assert!(rel_close(tot, 1184.0, 1e-10), "P_tot = {tot}");
    }

    #[test]
    fn total_power_class_b_reference() {
        // M = 1, p_max = 160, psi = 1: 152.1418 + 348 + 23.
        let p = params(PaClass::ClassB);
        let alloc = Allocation::new(160.0, vec![1.0], 1.0).unwrap();
        let tot = total_power(&alloc, &p).unwrap();
        assert!(
            rel_close(tot, 152.14176301749236 + 348.0 + 23.0, 1e-12),
            "P_tot = {tot}"
        );
    }

    #[test]
    fn total_power_floor_at_vanishing_transmit_power() {
        let p = params(PaClass::ClassB);
        let alloc = Allocation::new(1e-9, vec![1.0], 32.0).unwrap();
        let tot = total_power(&alloc, &p).unwrap();
        let floor = p.p_const_w + 32.0 * p.p_sprf_w;
        assert!(
            (tot - floor) / floor < 1e-5,
            "P_tot = {tot}, floor = {floor}"
        );
        assert!(tot >= floor);
    }

    #[test]
    fn evaluate_single_user_composition() {
        let p = params(PaClass::ClassB);
        let scenario = homogeneous(1, 90.0);
        let alloc = Allocation::new(500.0, vec![1.0], 16.0).unwrap();
        let ev = evaluate(&scenario, &alloc, &p).unwrap();
        assert_eq!(ev.rates_bps.len(), 1);
        assert!(rel_close(
            ev.ee_bit_per_joule,
            ev.rates_bps[0] / ev.p_tot_w,
            1e-15
        ));
        assert!(ev.p_tot_w >= p.p_const_w + 16.0 * p.p_sprf_w);
    }

    #[test]
    fn evaluate_homogeneous_symmetry() {
        let p = params(PaClass::ClassB);
        let scenario = homogeneous(2, 80.0);
        let alloc = Allocation::new(1286.0, vec![0.5, 0.5], 32.0).unwrap();
        let ev = evaluate(&scenario, &alloc, &p).unwrap();
        assert_eq!(ev.sndr[0], ev.sndr[1]);
        assert_eq!(ev.rates_bps[0], ev.rates_bps[1]);
    }

    #[test]
    fn evaluate_rejects_dimension_mismatch() {
        let p = params(PaClass::ClassB);
        let scenario = homogeneous(2, 80.0);
        let alloc = Allocation::new(1286.0, vec![1.0], 32.0).unwrap();
        match evaluate(&scenario, &alloc, &p) {
            Err(CoreError::DimensionMismatch {
                expected: 2,
                actual: 1,
            }) => {}
            other => panic!("expected dimension mismatch, got {other:?}"),
        }
    }

    #[test]
    fn allocation_validates_simplex() {
        assert!(Allocation::new(10.0, vec![0.5, 0.6], 4.0).is_err());
        assert!(Allocation::new(10.0, vec![0.5, -0.5, 1.0], 4.0).is_err());
        assert!(Allocation::new(0.0, vec![1.0], 4.0).is_err());
        assert!(Allocation::<f64>::new(10.0, vec![], 4.0).is_err());
        let a = Allocation::new(10.0, Allocation::equal_shares(4), 8.0).unwrap();
        assert_eq!(a.antennas_int(), Some(8));
    }

    #[test]
    fn permuting_users_permutes_evaluation() {
        let p = params(PaClass::ClassB);
        let u1 = UserLink::new(1e-8, 7.17e-14).unwrap();
        let u2 = UserLink::new(1e-11, 7.17e-14).unwrap();
        let fwd = evaluate(
            &[u1, u2],
            &Allocation::new(800.0, vec![0.7, 0.3], 24.0).unwrap(),
            &p,
        )
        .unwrap();
        let rev = evaluate(
            &[u2, u1],
            &Allocation::new(800.0, vec![0.3, 0.7], 24.0).unwrap(),
            &p,
        )
        .unwrap();
        assert_eq!(fwd.ee_bit_per_joule, rev.ee_bit_per_joule);
        assert_eq!(fwd.rates_bps[0], rev.rates_bps[1]);
        assert_eq!(fwd.rates_bps[1], rev.rates_bps[0]);
    }

    #[test]
    fn lower_noise_raises_sndr() {
        let p = params(PaClass::ClassB);
        let alloc = Allocation::new(1000.0, vec![0.5, 0.5], 32.0).unwrap();
        let base = homogeneous(2, 100.0);
        let quiet: Vec<UserLink> = base
            .iter()
            .map(|u| UserLink::new(u.beta, u.noise_power_w / 2.0).unwrap())
            .collect();
        let ev_base = evaluate(&base, &alloc, &p).unwrap();
        let ev_quiet = evaluate(&quiet, &alloc, &p).unwrap();
        for k in 0..2 {
            assert!(ev_quiet.sndr[k] > ev_base.sndr[k]);
        }
    }
}
