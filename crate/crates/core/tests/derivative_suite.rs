//! Finite-difference validation of the six analytic amplifier derivatives
//! and property checks of the closed-form statistics over the working
//! back-off range.

use deepdeal_core::pa::{self, PaClass};

/// Central finite difference with the step forced onto the actual stencil
/// (`x_hi - x_lo` instead of `2h`), returning the quotient, the function
/// scale over the stencil and the stencil width.
fn central_fd(f: impl Fn(f64) -> f64, x: f64, rel_step: f64) -> (f64, f64, f64) {
    let h = x * rel_step;
    let (x_hi, x_lo) = (x + h, x - h);
    let (f_hi, f_lo) = (f(x_hi), f(x_lo));
    let step = x_hi - x_lo;
    ((f_hi - f_lo) / step, f_hi.abs().max(f_lo.abs()), step)
}

/// A finite-difference oracle can only resolve derivatives whose effect over
/// the stencil exceeds rounding in the function values; below that floor the
/// comparison passes vacuously (the asymptote checks pin those regions).
fn assert_fd_match(analytic: f64, fd: f64, scale: f64, step: f64, rtol: f64, ctx: &str) {
    let err = (analytic - fd).abs();
    let denom = analytic.abs().max(fd.abs());
    if denom == 0.0 {
        return;
    }
    if err <= rtol * denom {
        return;
    }
    let fd_floor = 64.0 * f64::EPSILON * scale / step;
    assert!(
        err <= fd_floor,
        "{ctx}: analytic {analytic:e} vs fd {fd:e} (rel {:e}, floor {fd_floor:e})",
        err / denom
    );
}

fn psi_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / (n - 1) as f64))
        .collect()
}

const RTOL: f64 = 1e-5;
const REL_STEP: f64 = 1e-6;
const M: f64 = 16.0;
const P_MAX: f64 = 160.0;
const ETA: f64 = 2.0 / 3.0;

#[test]
fn dlambda_dp_matches_finite_difference() {
    for psi in psi_grid(120) {
        let p = M * P_MAX / psi;
        let analytic = pa::dlambda_dp(p, M, P_MAX).unwrap();
        let (fd, scale, step) = central_fd(
            |x| pa::lambda_of_psi(pa::ibo(x, M, P_MAX).unwrap()).unwrap(),
            p,
            REL_STEP,
        );
        assert_fd_match(
            analytic,
            fd,
            scale,
            step,
            RTOL,
            &format!("dlambda/dP at psi={psi}"),
        );
        assert!(analytic <= 0.0);
    }
}

#[test]
fn dd_dp_matches_finite_difference() {
    for psi in psi_grid(120) {
        let p = M * P_MAX / psi;
        let analytic = pa::dd_dp(p, M, P_MAX, ETA).unwrap();
        let (fd, scale, step) = central_fd(
            |x| pa::distortion_total(x, pa::ibo(x, M, P_MAX).unwrap(), ETA).unwrap(),
            p,
            REL_STEP,
        );
        assert_fd_match(
            analytic,
            fd,
            scale,
            step,
            RTOL,
            &format!("dD/dP at psi={psi}"),
        );
    }
}

#[test]
fn dppa_dp_matches_finite_difference_both_classes() {
    for class in [PaClass::ClassB, PaClass::Perfect] {
        for psi in psi_grid(120) {
            let p = M * P_MAX / psi;
            let analytic = pa::dppa_dp(p, M, P_MAX, class).unwrap();
            let (fd, scale, step) =
                central_fd(|x| pa::pa_power(x, M, P_MAX, class).unwrap(), p, REL_STEP);
            assert_fd_match(
                analytic,
                fd,
                scale,
                step,
                RTOL,
                &format!("dP_PA/dP ({class:?}) at psi={psi}"),
            );
        }
    }
}

#[test]
fn dlambda_dm_matches_finite_difference() {
    let p = 1000.0;
    for psi in psi_grid(120) {
        let m = psi * p / P_MAX;
        let analytic = pa::dlambda_dm(p, m, P_MAX).unwrap();
        let (fd, scale, step) = central_fd(
            |x| pa::lambda_of_psi(pa::ibo(p, x, P_MAX).unwrap()).unwrap(),
            m,
            REL_STEP,
        );
        assert_fd_match(
            analytic,
            fd,
            scale,
            step,
            RTOL,
            &format!("dlambda/dM at psi={psi}"),
        );
        assert!(analytic >= 0.0, "backing off must not reduce lambda");
    }
}

#[test]
fn dd_dm_matches_finite_difference() {
    let p = 1000.0;
    for psi in psi_grid(120) {
        let m = psi * p / P_MAX;
        let analytic = pa::dd_dm(p, m, P_MAX, ETA).unwrap();
        let (fd, scale, step) = central_fd(
            |x| pa::distortion_total(p, pa::ibo(p, x, P_MAX).unwrap(), ETA).unwrap(),
            m,
            REL_STEP,
        );
        assert_fd_match(
            analytic,
            fd,
            scale,
            step,
            RTOL,
            &format!("dD/dM at psi={psi}"),
        );
    }
}

#[test]
fn dppa_dm_matches_finite_difference_both_classes() {
    let p = 1000.0;
    for class in [PaClass::ClassB, PaClass::Perfect] {
        for psi in psi_grid(120) {
            let m = psi * p / P_MAX;
            let analytic = pa::dppa_dm(p, m, P_MAX, class).unwrap();
            let (fd, scale, step) =
                central_fd(|x| pa::pa_power(p, x, P_MAX, class).unwrap(), m, REL_STEP);
            assert_fd_match(
                analytic,
                fd,
                scale,
                step,
                RTOL,
                &format!("dP_PA/dM ({class:?}) at psi={psi}"),
            );
        }
    }
}

#[test]
fn lambda_increases_and_stays_in_unit_interval() {
    // Strict growth holds while increments are representable; the tail of
    // the range saturates at 1.0 in double precision.
    let mut prev = 0.0;
    for i in 0..=1600 {
        let psi = 10f64.powf(-8.0 + 16.0 * i as f64 / 1600.0);
        let l = pa::lambda_of_psi(psi).unwrap();
        assert!(l > 0.0 && l <= 1.0, "lambda({psi}) = {l}");
        assert!(l >= prev, "lambda not monotone at psi = {psi}");
        if psi < 30.0 && i > 0 {
            assert!(l > prev, "lambda not strictly increasing at psi = {psi}");
        }
        prev = l;
    }
}

#[test]
fn distortion_factor_nonnegative_everywhere() {
    for i in 0..=2000 {
        let psi = 10f64.powf(-8.0 + 16.0 * i as f64 / 2000.0);
        let d = pa::distortion_total(1.0, psi, ETA).unwrap();
        assert!(d >= 0.0, "D(psi={psi}) = {d}");
    }
}

#[test]
fn distortion_grows_with_power_and_respects_saturation_bound() {
    // Fixed M * p_max, sweeping P upward: D increases and never exceeds
    // eta (1 - pi/4) M p_max.
    let mp = M * P_MAX;
    let bound = ETA * (1.0 - std::f64::consts::FRAC_PI_4) * mp * (1.0 + 1e-6);
    let mut prev = -1.0;
    for i in 0..=800 {
        let p = 10f64.powf(-2.0 + 10.0 * i as f64 / 800.0);
        let psi = mp / p;
        let d = pa::distortion_total(p, psi, ETA).unwrap();
        assert!(d >= prev * (1.0 - 1e-12), "D not increasing at P = {p}");
        assert!(d <= bound, "D({p}) = {d} exceeds bound {bound}");
        prev = d;
    }
}

#[test]
fn class_b_never_cheaper_than_perfect() {
    for i in 0..=400 {
        let psi = 10f64.powf(-3.0 + 6.0 * i as f64 / 400.0);
        let p = M * P_MAX / psi;
        let b = pa::pa_power(p, M, P_MAX, PaClass::ClassB).unwrap();
        let ideal = pa::pa_power(p, M, P_MAX, PaClass::Perfect).unwrap();
        assert!(b >= ideal, "psi = {psi}: class B {b} < perfect {ideal}");
    }
}
