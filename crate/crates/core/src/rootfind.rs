//! Bracketed bisection with a function-specific starting-point search.
//!
//! The objective derivatives this solves are positive near the lower edge of
//! their domain and negative for large arguments, so a bracket is found by
//! doubling the upper probe while the function stays positive and moving the
//! lower probe geometrically toward the domain's lower bound while the
//! function stays negative. Plain bisection then shrinks the bracket to the
//! requested width.

use crate::error::CoreError;
use crate::scalar::Real;

/// Probe and iteration budget for one bracketed bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSearchConfig<R = f64> {
    /// Initial probe; both bracket ends start here. Must exceed the domain
    /// lower bound.
    pub x_test: R,
    /// Terminal bracket width (absolute, in the units of the variable).
    pub tol: R,
    /// Cap on each of the two bracket-search loops.
    pub max_expand: usize,
    /// Cap on bisection steps.
    pub max_bisect: usize,
}

impl<R: Real> RootSearchConfig<R> {
    pub fn new(x_test: R, tol: R) -> Self {
        RootSearchConfig {
            x_test,
            tol,
            max_expand: 200,
            max_bisect: 200,
        }
    }

    /// Same budget, different starting probe.
    pub fn with_probe(&self, x_test: R) -> Self {
        RootSearchConfig { x_test, ..*self }
    }
}

/// Find a sign change of `f` on `(domain_lower, inf)` and bisect it down to
/// `cfg.tol`, returning the bracket midpoint.
///
/// Requires `f` to be positive somewhere near the lower bound and negative
/// for large arguments. At return the final bracket `[x_lo, x_hi]` satisfies
/// `f(x_lo) >= 0 >= f(x_hi)` and `x_hi - x_lo <= cfg.tol`.
pub fn bracketed_bisection<R, F>(
    f: F,
    domain_lower: R,
    cfg: &RootSearchConfig<R>,
) -> Result<R, CoreError>
where
    R: Real,
    F: Fn(R) -> R,
{
    if !(cfg.x_test > domain_lower) || !cfg.x_test.is_finite() {
        return Err(CoreError::domain(format!(
            "starting probe {} must exceed the domain lower bound {domain_lower}",
            cfg.x_test
        )));
    }
    if !(cfg.tol > R::zero()) {
        return Err(CoreError::domain(format!(
            "bracket tolerance must be positive, got {}",
            cfg.tol
        )));
    }

    let half = R::of(0.5);
    let two = R::of(2.0);
    let mut x_lo = cfg.x_test;
    let mut x_hi = cfg.x_test;
    let mut f_lo = f(x_lo);
    let mut f_hi = f_lo;

    let mut expansions = 0usize;
    while f_hi > R::zero() {
        if expansions >= cfg.max_expand {
            return Err(bracket_failure(expansions, x_lo, f_lo, x_hi, f_hi));
        }
        x_hi = two * x_hi;
        f_hi = f(x_hi);
        expansions += 1;
    }

    let mut contractions = 0usize;
    while f_lo < R::zero() {
        if contractions >= cfg.max_expand {
            return Err(bracket_failure(contractions, x_lo, f_lo, x_hi, f_hi));
        }
        // Geometric approach toward the open lower bound; with a bound of 0
        // this is the plain halving step.
        x_lo = domain_lower + half * (x_lo - domain_lower);
        f_lo = f(x_lo);
        contractions += 1;
    }

    let mut steps = 0usize;
    while (x_hi - x_lo).abs() > cfg.tol && steps < cfg.max_bisect {
        let x_mid = half * x_lo + half * x_hi;
        if f(x_mid) > R::zero() {
            x_lo = x_mid;
        } else {
            x_hi = x_mid;
        }
        steps += 1;
    }
    Ok(half * x_lo + half * x_hi)
}

fn bracket_failure<R: Real>(expansions: usize, x_lo: R, f_lo: R, x_hi: R, f_hi: R) -> CoreError {
    CoreError::BracketFailure {
        expansions,
        x_lo: x_lo.to_f64().unwrap_or(f64::NAN),
        f_lo: f_lo.to_f64().unwrap_or(f64::NAN),
        x_hi: x_hi.to_f64().unwrap_or(f64::NAN),
        f_hi: f_hi.to_f64().unwrap_or(f64::NAN),
    }
}

/// Count sign changes of `f` on a logarithmic grid over `[lo, hi]`.
///
/// Diagnostic used by the regression suites to confirm the stationary-point
/// functions cross zero exactly once inside the brackets the search loops
/// produce; multimodal instances would show up here.
pub fn sign_changes<R, F>(f: F, lo: R, hi: R, samples: usize) -> usize
where
    R: Real,
    F: Fn(R) -> R,
{
    assert!(samples >= 2, "need at least two samples");
    assert!(lo > R::zero() && hi > lo, "need 0 < lo < hi");
    let log_lo = lo.ln();
    let step = (hi.ln() - log_lo) / R::from_usize(samples - 1).unwrap();
    let mut changes = 0;
    let mut prev = f(lo);
    for i in 1..samples {
        let x = (log_lo + step * R::from_usize(i).unwrap()).exp();
        let cur = f(x);
        if (prev > R::zero() && cur < R::zero()) || (prev < R::zero() && cur > R::zero()) {
            changes += 1;
        }
        if cur != R::zero() {
            prev = cur;
        }
    }
    changes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_function_root() {
        let cfg = RootSearchConfig::new(1.0, 1e-9);
        let root = bracketed_bisection(|x: f64| 2.0 - x, 0.0, &cfg).unwrap();
        assert!((root - 2.0).abs() <= 1e-9, "root = {root}");
    }

    #[test]
    fn log_function_root() {
        // ln(4/x): positive below 4, negative above.
        let cfg = RootSearchConfig::new(1.0, 1e-9);
        let root = bracketed_bisection(|x: f64| (4.0 / x).ln(), 0.0, &cfg).unwrap();
        assert!((root - 4.0).abs() <= 1e-9, "root = {root}");
    }

    #[test]
    fn probe_above_root_contracts_downward() {
        let cfg = RootSearchConfig::new(1000.0, 1e-9);
        let root = bracketed_bisection(|x: f64| (4.0 / x).ln(), 0.0, &cfg).unwrap();
        assert!((root - 4.0).abs() <= 1e-9, "root = {root}");
    }

    #[test]
    fn shifted_domain_lower_bound() {
        // Root at x = 7 on domain (5, inf); halving toward 0 would exit the
        // domain, the shifted contraction must not.
        let k = 5.0;
        let cfg = RootSearchConfig::new(100.0, 1e-10);
        let root = bracketed_bisection(|x: f64| (7.0 - x) / (x - k), k, &cfg).unwrap();
        assert!((root - 7.0).abs() <= 1e-9, "root = {root}");
    }

    #[test]
    fn no_sign_change_reports_probes() {
        let cfg = RootSearchConfig {
            x_test: 1.0,
            tol: 1e-9,
            max_expand: 10,
            max_bisect: 10,
        };
        match bracketed_bisection(|_| 1.0f64, 0.0, &cfg) {
            Err(CoreError::BracketFailure {
                expansions, f_hi, ..
            }) => {
                assert_eq!(expansions, 10);
                assert_eq!(f_hi, 1.0);
            }
            other => panic!("expected bracket failure, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_probe() {
        let cfg = RootSearchConfig::new(0.0, 1e-9);
        assert!(bracketed_bisection(|x: f64| -x, 0.0, &cfg).is_err());
    }

    #[test]
    fn exact_zero_at_probe() {
        let cfg = RootSearchConfig::new(3.0, 1e-9);
        let root = bracketed_bisection(|x: f64| 3.0 - x, 0.0, &cfg).unwrap();
        assert_eq!(root, 3.0);
    }

    #[test]
    fn counts_sign_changes() {
        assert_eq!(sign_changes(|x: f64| 2.0 - x, 0.1, 10.0, 64), 1);
        assert_eq!(
            sign_changes(|x: f64| (x - 1.0) * (x - 4.0), 0.1, 10.0, 256),
            2
        );
        assert_eq!(sign_changes(|_x: f64| 1.0, 0.1, 10.0, 64), 0);
    }
}
