//! Closed-form soft-limiter amplifier statistics and their derivatives.
//!
//! A complex-Gaussian signal of mean power `P/M` driven through a soft
//! limiter with saturation power `p_max` is characterized entirely by the
//! linear input back-off `psi = p_max * M / P`:
//!
//! * `lambda(psi)` -- the Bussgang power scaling of the wanted signal,
//! * the total in-band distortion power `D = eta * (1 - e^-psi - lambda) * P`
//!   aggregated over all `M` front-ends,
//! * the consumed amplifier power, which depends on the amplifier class.
//!
//! Analytic derivatives with respect to the total transmit power `P` and the
//! (relaxed, real-valued) antenna count `M` are provided for the stationary
//! point searches. Each derivative is validated against a central
//! finite-difference oracle in the test suite.
//!
//! Numerics: `1 - e^-psi` is evaluated with `exp_m1` to avoid cancellation at
//! small back-off, and for large back-off (`psi` > ~700) the exponential and
//! `erfc` factors underflow to exact zero, leaving every expression finite.

use crate::error::CoreError;
use crate::scalar::Real;

/// Consumed-power model of the amplifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PaClass {
    /// Realizable class B amplifier; consumption follows a `sqrt(psi)` law.
    ClassB,
    /// Idealized amplifier that consumes exactly the radiated power.
    Perfect,
}

impl PaClass {
    pub fn label(&self) -> &'static str {
        match self {
            PaClass::ClassB => "classb",
            PaClass::Perfect => "perfect",
        }
    }
}

impl std::str::FromStr for PaClass {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, CoreError> {
        match s.to_ascii_lowercase().as_str() {
            "classb" | "class-b" | "class_b" | "b" => Ok(PaClass::ClassB),
            "perfect" | "ideal" => Ok(PaClass::Perfect),
            other => Err(CoreError::domain(format!("unknown PA class `{other}`"))),
        }
    }
}

/// Amplifier operating point: back-off, Bussgang gain, distortion and
/// consumed power for one `(P, M)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaPoint<R = f64> {
    /// Linear input back-off `p_max * M / P`.
    pub psi: R,
    /// Bussgang power scaling of the wanted signal, in (0, 1].
    pub lambda: R,
    /// Total effective in-band distortion power over all front-ends, watts.
    pub d_total: R,
    /// Power consumed by all `M` amplifiers, watts.
    pub p_pa: R,
}

impl<R: Real> PaPoint<R> {
    /// Evaluate the operating point for total transmit power `p` over `m`
    /// front-ends with per-amplifier saturation `p_max` and in-band
    /// distortion fraction `eta`.
    pub fn compute(p: R, m: R, p_max: R, eta: R, class: PaClass) -> Result<Self, CoreError> {
        let psi = ibo(p, m, p_max)?;
        check_eta(eta)?;
        let stats = kernel::Stats::at(psi);
        Ok(PaPoint {
            psi,
            lambda: stats.lambda,
            d_total: eta * stats.d_factor * p,
            p_pa: kernel::pa_power(&stats, p, m, p_max, class),
        })
    }
}

fn check_positive<R: Real>(v: R, what: &str) -> Result<(), CoreError> {
    if !(v > R::zero()) || !v.is_finite() {
        return Err(CoreError::domain(format!(
            "{what} must be positive and finite, got {v}"
        )));
    }
    Ok(())
}

fn check_eta<R: Real>(eta: R) -> Result<(), CoreError> {
    if !(eta > R::zero() && eta <= R::one()) {
        return Err(CoreError::domain(format!(
            "in-band fraction must lie in (0, 1], got {eta}"
        )));
    }
    Ok(())
}

/// Linear input back-off `psi = p_max * m / p`.
pub fn ibo<R: Real>(p: R, m: R, p_max: R) -> Result<R, CoreError> {
    check_positive(p, "total transmit power")?;
    check_positive(m, "antenna count")?;
    check_positive(p_max, "saturation power")?;
    Ok(p_max * m / p)
}

/// Bussgang power scaling `lambda(psi) = (1 - e^-psi + sqrt(pi psi)/2 * erfc(sqrt(psi)))^2`.
///
/// Strictly increasing in `psi`; the exact value lies in (0, 1) but
/// saturates to 1.0 in double precision once `psi` exceeds ~36.
pub fn lambda_of_psi<R: Real>(psi: R) -> Result<R, CoreError> {
    check_positive(psi, "input back-off")?;
    Ok(kernel::Stats::at(psi).lambda)
}

/// Total effective in-band distortion power `D = eta * (1 - e^-psi - lambda) * P`.
pub fn distortion_total<R: Real>(p: R, psi: R, eta: R) -> Result<R, CoreError> {
    check_positive(p, "total transmit power")?;
    check_positive(psi, "input back-off")?;
    check_eta(eta)?;
    Ok(eta * kernel::Stats::at(psi).d_factor * p)
}

/// Power consumed by all `m` amplifiers.
pub fn pa_power<R: Real>(p: R, m: R, p_max: R, class: PaClass) -> Result<R, CoreError> {
    let psi = ibo(p, m, p_max)?;
    Ok(kernel::pa_power(
        &kernel::Stats::at(psi),
        p,
        m,
        p_max,
        class,
    ))
}

/// d lambda / dP at fixed `m`; always <= 0 (more power means deeper clipping).
pub fn dlambda_dp<R: Real>(p: R, m: R, p_max: R) -> Result<R, CoreError> {
    let psi = ibo(p, m, p_max)?;
    Ok(kernel::Stats::at(psi).dlambda_dp(p))
}

/// dD / dP at fixed `m`.
pub fn dd_dp<R: Real>(p: R, m: R, p_max: R, eta: R) -> Result<R, CoreError> {
    let psi = ibo(p, m, p_max)?;
    check_eta(eta)?;
    Ok(kernel::Stats::at(psi).dd_dp(p, eta))
}

/// d P_PA / dP at fixed `m`.
pub fn dppa_dp<R: Real>(p: R, m: R, p_max: R, class: PaClass) -> Result<R, CoreError> {
    let psi = ibo(p, m, p_max)?;
    Ok(kernel::Stats::at(psi).dppa_dp(class))
}

/// d lambda / dM at fixed `p`; always >= 0 (more antennas back the PAs off).
pub fn dlambda_dm<R: Real>(p: R, m: R, p_max: R) -> Result<R, CoreError> {
    let psi = ibo(p, m, p_max)?;
    Ok(kernel::Stats::at(psi).dlambda_dm(p, p_max))
}

/// dD / dM at fixed `p`.
pub fn dd_dm<R: Real>(p: R, m: R, p_max: R, eta: R) -> Result<R, CoreError> {
    let psi = ibo(p, m, p_max)?;
    check_eta(eta)?;
    Ok(kernel::Stats::at(psi).dd_dm(p, p_max, eta))
}

/// d P_PA / dM at fixed `p`.
pub fn dppa_dm<R: Real>(p: R, m: R, p_max: R, class: PaClass) -> Result<R, CoreError> {
    let psi = ibo(p, m, p_max)?;
    Ok(kernel::Stats::at(psi).dppa_dm(p_max, class))
}

pub(crate) mod kernel {
    //! Unvalidated evaluation kernels shared by the public operations and the
    //! optimizer hot path. Callers guarantee `psi > 0` finite.

    use super::PaClass;
    use crate::scalar::Real;

    /// Everything that depends on `psi` alone, evaluated once.
    #[derive(Debug, Clone, Copy)]
    pub(crate) struct Stats<R> {
        pub psi: R,
        /// e^-psi (exact 0 once psi exceeds ~745).
        pub exp_neg: R,
        /// 1 - e^-psi via exp_m1.
        pub one_minus_exp: R,
        /// sqrt(pi psi)/2 * erfc(sqrt(psi)).
        pub tail: R,
        /// sqrt(lambda) = 1 - e^-psi + tail.
        pub sqrt_lambda: R,
        pub lambda: R,
        /// 1 - e^-psi - lambda >= 0: per-unit-P distortion factor.
        pub d_factor: R,
        /// e^-psi + sqrt(pi/psi)/2 * erfc(sqrt(psi));
        /// d lambda / d psi = sqrt(lambda) * slope.
        pub slope: R,
        pub erf_sqrt: R,
        pub sqrt_psi: R,
    }

    impl<R: Real> Stats<R> {
        pub(crate) fn at(psi: R) -> Self {
            let half = R::of(0.5);
            let sqrt_psi = psi.sqrt();
            let exp_neg = (-psi).exp();
            let one_minus_exp = -(-psi).exp_m1();
            let erfc_sqrt = sqrt_psi.erfc();
            let erf_sqrt = sqrt_psi.erf();
            // Single products: erfc underflows to 0 long before the sqrt
            // factors can overflow, so neither product can become 0 * inf.
            let tail = half * (R::PI() * psi).sqrt() * erfc_sqrt;
            let sqrt_lambda = one_minus_exp + tail;
            let lambda = sqrt_lambda * sqrt_lambda;
            // With u = 1 - e^-psi and lambda = (u + tail)^2,
            //   u - lambda = u e^-psi - tail (2u + tail).
            // The product form keeps full relative accuracy where the direct
            // difference of two values near 1 leaves only absolute-epsilon
            // noise (psi around 20..40).
            let two = R::of(2.0);
            let d_factor =
                (one_minus_exp * exp_neg - tail * (two * one_minus_exp + tail)).max(R::zero());
            let slope = exp_neg + half * (R::PI() / psi).sqrt() * erfc_sqrt;
            Stats {
                psi,
                exp_neg,
                one_minus_exp,
                tail,
                sqrt_lambda,
                lambda,
                d_factor,
                slope,
                erf_sqrt,
                sqrt_psi,
            }
        }

        #[inline]
        pub(crate) fn dlambda_dp(&self, p: R) -> R {
            -(self.psi * self.sqrt_lambda / p) * self.slope
        }

        #[inline]
        pub(crate) fn dd_dp(&self, _p: R, eta: R) -> R {
            // d_factor - P dlambda/dP - psi e^-psi, with
            //   -P dlambda/dP - psi e^-psi
            //     = psi [sqrt(lambda) slope - e^-psi]
            //     = psi e^-psi (tail - e^-psi) + tail (1 - e^-psi + tail):
            // the expansion avoids differencing two nearly equal
            // psi-exponential terms at deep back-off.
            eta * (self.d_factor
                + self.psi * self.exp_neg * (self.tail - self.exp_neg)
                + self.tail * (self.one_minus_exp + self.tail))
        }

        #[inline]
        pub(crate) fn dppa_dp(&self, class: PaClass) -> R {
            let two = R::of(2.0);
            match class {
                PaClass::ClassB => {
                    (self.psi / R::PI()).sqrt() * self.erf_sqrt
                        - two / R::PI() * self.psi * self.exp_neg
                }
                PaClass::Perfect => self.one_minus_exp - self.psi * self.exp_neg,
            }
        }

        #[inline]
        pub(crate) fn dlambda_dm(&self, p: R, p_max: R) -> R {
            self.sqrt_lambda * (p_max / p) * self.slope
        }

        #[inline]
        pub(crate) fn dd_dm(&self, _p: R, p_max: R, eta: R) -> R {
            // p_max [e^-psi - sqrt(lambda) slope], expanded the same way as
            // in dd_dp:
            //   e^-psi - (u + tail)(e^-psi + tail/psi)
            //     = e^-psi (e^-psi - tail) - (tail/psi)(1 - e^-psi + tail).
            eta * p_max
                * (self.exp_neg * (self.exp_neg - self.tail)
                    - self.tail / self.psi * (self.one_minus_exp + self.tail))
        }

        #[inline]
        pub(crate) fn dppa_dm(&self, p_max: R, class: PaClass) -> R {
            let two = R::of(2.0);
            let half = R::of(0.5);
            match class {
                PaClass::ClassB => {
                    two * p_max / R::PI().sqrt()
                        * (half * self.erf_sqrt / self.sqrt_psi + self.exp_neg / R::PI().sqrt())
                }
                PaClass::Perfect => p_max * self.exp_neg,
            }
        }
    }

    #[inline]
    pub(crate) fn pa_power<R: Real>(stats: &Stats<R>, p: R, m: R, p_max: R, class: PaClass) -> R {
        let two = R::of(2.0);
        match class {
            PaClass::ClassB => two * m * p_max * stats.erf_sqrt / (R::PI() * stats.psi).sqrt(),
            // M * p_max / psi == P, so this is P * (1 - e^-psi).
            PaClass::Perfect => p * stats.one_minus_exp,
        }
    }
}
