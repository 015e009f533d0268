//! Monte-Carlo oracle for the closed-form amplifier statistics.
//!
//! Draws i.i.d. circularly-symmetric complex-Gaussian samples, pushes them
//! through the soft limiter and estimates the Bussgang gain, the per-PA
//! distortion power and the correlation between the distortion term and the
//! input. The estimates converge at the usual `1/sqrt(n)` rate to the
//! closed forms in [`crate::pa`].
//!
//! All statistics run in double precision. Sampling uses the Marsaglia polar
//! method on a `ChaCha20` stream seeded from the config, so a given
//! `(seed, n_samples, psi, input_power)` quadruple reproduces bit-identical
//! estimates on any platform.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::CoreError;
use crate::pa;

/// Batches used both to chunk the sample stream and to estimate standard
/// errors by batch means.
const N_BATCHES: usize = 100;

/// Sampling configuration for one back-off point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    /// Number of complex samples; at least 1e4 so the batch-means standard
    /// errors are meaningful.
    pub n_samples: usize,
    /// Linear input back-off; the saturation power is `psi * input_power`.
    pub psi: f64,
    /// Mean power of the Gaussian input (the per-amplifier power `P/M`), watts.
    pub input_power_w: f64,
    /// Stream seed.
    pub seed: u64,
}

impl McConfig {
    pub fn new(
        n_samples: usize,
        psi: f64,
        input_power_w: f64,
        seed: u64,
    ) -> Result<Self, CoreError> {
        if n_samples < 10_000 {
            return Err(CoreError::domain(format!(
                "need at least 1e4 samples, got {n_samples}"
            )));
        }
        if !(psi > 0.0) || !psi.is_finite() {
            return Err(CoreError::domain(format!(
                "back-off must be positive and finite, got {psi}"
            )));
        }
        if !(input_power_w > 0.0) || !input_power_w.is_finite() {
            return Err(CoreError::domain(format!(
                "input power must be positive and finite, got {input_power_w}"
            )));
        }
        Ok(McConfig {
            n_samples,
            psi,
            input_power_w,
            seed,
        })
    }
}

/// Estimates from one sampling run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BussgangEstimate {
    /// Estimated Bussgang power gain `(E[y_hat y*] / E[|y|^2])^2`.
    pub lambda_hat: f64,
    /// Batch-means standard error of `lambda_hat`.
    pub lambda_se: f64,
    /// Estimated per-PA distortion power `E[|y_hat - sqrt(lambda_hat) y|^2]`, watts.
    pub distortion_power_w: f64,
    /// Batch-means standard error of the distortion power.
    pub distortion_se: f64,
    /// `|E[d y*]| / E[|y|^2]` with `d = y_hat - sqrt(lambda) y` taken against
    /// the closed-form gain; the orthogonality of the Bussgang decomposition
    /// drives this to zero as `1/sqrt(n)`.
    pub correlation_residual: f64,
}

/// Soft limiter: identity below the saturation power, magnitude clamped to
/// `sqrt(p_sat)` with phase preserved above it.
#[inline]
pub fn soft_limit(y: Complex64, p_sat: f64) -> Complex64 {
    let power = y.norm_sqr();
    if power <= p_sat {
        y
    } else {
        y * (p_sat / power).sqrt()
    }
}

/// One standard complex-Gaussian sample (unit total variance) by the polar
/// method.
#[inline]
fn standard_complex_gaussian(rng: &mut ChaCha20Rng) -> Complex64 {
    loop {
        let u = 2.0 * rng.gen::<f64>() - 1.0;
        let v = 2.0 * rng.gen::<f64>() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            // Scale so that E[re^2] = E[im^2] = 1/2, i.e. E[|z|^2] = 1.
            let factor = (-s.ln() / s).sqrt();
            return Complex64::new(u * factor, v * factor);
        }
    }
}

/// Run the sampler and estimate the Bussgang decomposition at `run.psi`.
pub fn estimate_bussgang(run: &McConfig) -> BussgangEstimate {
    let p_sat = run.psi * run.input_power_w;
    let amplitude = run.input_power_w.sqrt();
    let mut rng = ChaCha20Rng::seed_from_u64(run.seed);

    let base = run.n_samples / N_BATCHES;
    let remainder = run.n_samples % N_BATCHES;

    // Per-batch raw moments: sum |y|^2, sum Re(y_hat y*), sum |y_hat|^2.
    // (The cross moment is real for a phase-preserving limiter.)
    let mut batch_moments = [(0.0f64, 0.0f64, 0.0f64); N_BATCHES];
    for (b, moments) in batch_moments.iter_mut().enumerate() {
        let len = base + usize::from(b < remainder);
        let (mut s_y, mut s_c, mut s_hh) = (0.0, 0.0, 0.0);
        for _ in 0..len {
            let y = standard_complex_gaussian(&mut rng) * amplitude;
            let y_hat = soft_limit(y, p_sat);
            s_y += y.norm_sqr();
            s_c += y_hat.re * y.re + y_hat.im * y.im;
            s_hh += y_hat.norm_sqr();
        }
        *moments = (s_y, s_c, s_hh);
    }

    let lambda_of = |(s_y, s_c, _): (f64, f64, f64)| (s_c / s_y) * (s_c / s_y);
    // With sqrt(lambda_hat) = s_c/s_y the cross term collapses and the
    // distortion estimate is s_hh/n - (s_c/n)^2 / (s_y/n). The underlying
    // quantity is a mean of squares; the clamp removes the epsilon-level
    // negative the shortcut can produce when no sample clips.
    let distortion_of =
        |(s_y, s_c, s_hh): (f64, f64, f64), n: f64| ((s_hh - s_c * s_c / s_y) / n).max(0.0);

    let mut total = (0.0f64, 0.0f64, 0.0f64);
    let mut lambda_batches = [0.0f64; N_BATCHES];
    let mut distortion_batches = [0.0f64; N_BATCHES];
    for (b, &m) in batch_moments.iter().enumerate() {
        total.0 += m.0;
        total.1 += m.1;
        total.2 += m.2;
        let len = (base + usize::from(b < remainder)) as f64;
        lambda_batches[b] = lambda_of(m);
        distortion_batches[b] = distortion_of(m, len);
    }

    let n = run.n_samples as f64;
    let lambda_hat = lambda_of(total);
    let distortion_power_w = distortion_of(total, n);

    // Orthogonality residual against the closed-form gain: using the
    // estimated gain instead would be identically zero by construction.
    let sqrt_lambda_closed = pa::lambda_of_psi(run.psi).expect("validated psi").sqrt();
    let correlation_residual = (total.1 - sqrt_lambda_closed * total.0).abs() / total.0;

    BussgangEstimate {
        lambda_hat,
        lambda_se: batch_se(&lambda_batches),
        distortion_power_w,
        distortion_se: batch_se(&distortion_batches),
        correlation_residual,
    }
}

/// Standard error of the overall estimator from B batch estimates.
fn batch_se(batches: &[f64; N_BATCHES]) -> f64 {
    let b = N_BATCHES as f64;
    let mean = batches.iter().sum::<f64>() / b;
    let var = batches.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (b - 1.0);
    (var / b).sqrt()
}
