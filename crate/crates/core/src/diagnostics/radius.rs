//! Empirical radius of convergence of Σ κⁿ Ωₙ(t) in κ by a root test over a
//! tail window of term norms, and the partial-sum blow-up indicator used as
//! an independent cross-check of divergence onset.

use super::{DiagResult, DiagnosticsError};
use crate::linalg::{logm_integral, spectral_norm};
use crate::magnus::{partial_sum, MagnusSeries};
use crate::ode::{solve_at, MatrixFunction};
use num_complex::Complex64;

/// Tail window length for the root test.
const TAIL_WINDOW: usize = 10;
/// Minimum series order for a meaningful tail estimate.
const MIN_ORDER: usize = 20;
/// Blow-up factor over the ‖log Y‖ baseline for the partial-sum indicator.
const BLOWUP_FACTOR: f64 = 10.0;

/// ‖Ωₙ(t)‖₂ for n = 1..order.
pub fn term_norms(series: &MagnusSeries, t: f64) -> DiagResult<Vec<f64>> {
    let mut norms = Vec::with_capacity(series.order());
    for term in series.terms() {
        let value = term.evaluate(t).map_err(crate::ode::OdeError::from)?;
        norms.push(spectral_norm(&value.to_complex()));
    }
    Ok(norms)
}

/// Estimated κ-radius of Σ κⁿ Ωₙ(t): 1 / max over the last `TAIL_WINDOW`
/// orders of ‖Ωₙ(t)‖₂^{1/n}. Infinite when the entire tail vanishes
/// (nilpotent or commuting input).
pub fn empirical_radius(series: &MagnusSeries, t: f64) -> DiagResult<f64> {
    if series.order() < MIN_ORDER {
        return Err(DiagnosticsError::InsufficientOrder {
            required: MIN_ORDER,
            got: series.order(),
        });
    }
    let norms = term_norms(series, t)?;
    let tail_start = norms.len() - TAIL_WINDOW;
    let mut root_max = 0.0f64;
    for (idx, &a) in norms.iter().enumerate().skip(tail_start) {
        let n = idx + 1;
        if a > 0.0 {
            root_max = root_max.max(a.powf(1.0 / n as f64));
        }
    }
    if root_max == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / root_max)
}

/// Divergence onset: the time where the empirical κ-radius crosses 1,
/// bracketed on a scan grid and refined by bisection. `None` when the
/// radius stays above 1 on all of (0, t_max].
pub fn divergence_onset(series: &MagnusSeries, t_max: f64) -> DiagResult<Option<f64>> {
    let grid = 64;
    let mut prev_t = 0.0f64;
    let mut bracket: Option<(f64, f64)> = None;
    for k in 1..=grid {
        let t = t_max * k as f64 / grid as f64;
        let r = empirical_radius(series, t)?;
        if r < 1.0 {
            bracket = Some((prev_t, t));
            break;
        }
        prev_t = t;
    }
    let (mut lo, mut hi) = match bracket {
        Some(b) => b,
        None => return Ok(None),
    };
    // R is effectively monotone decreasing in t on this corpus; bisect R = 1.
    for _ in 0..50 {
        if hi - lo <= 1e-6 * t_max {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid == 0.0 {
            break;
        }
        let r = empirical_radius(series, mid)?;
        if r < 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Independent divergence indicator: the first time where the full partial
/// sum exceeds `BLOWUP_FACTOR` times the ‖log Y(t)‖₂ baseline. The baseline
/// uses the resolvent-integral logarithm of the integrated solution, so this
/// path shares nothing with the root test.
pub fn partial_sum_onset(
    series: &MagnusSeries,
    a: &MatrixFunction,
    t_max: f64,
) -> DiagResult<Option<f64>> {
    let grid = 48;
    let order = series.order();
    let mut prev_t = t_max / grid as f64;
    for k in 1..=grid {
        let t = t_max * k as f64 / grid as f64;
        let y = solve_at(a, Complex64::new(1.0, 0.0), &[t], 1e-10)?
            .pop()
            .expect("one sample");
        let log_y = logm_integral(&y)?;
        let baseline = spectral_norm(&log_y).max(1e-6);
        let sum = partial_sum(series, order, t)?;
        if spectral_norm(&sum.to_complex()) > BLOWUP_FACTOR * baseline {
            // Refine the crossing by bisection on the same indicator.
            let mut lo = prev_t;
            let mut hi = t;
            for _ in 0..40 {
                if hi - lo <= 1e-6 * t_max {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                let y_mid = solve_at(a, Complex64::new(1.0, 0.0), &[mid], 1e-10)?
                    .pop()
                    .expect("one sample");
                let base_mid = spectral_norm(&logm_integral(&y_mid)?).max(1e-6);
                let sum_mid = partial_sum(series, order, mid)?;
                if spectral_norm(&sum_mid.to_complex()) > BLOWUP_FACTOR * base_mid {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Some(0.5 * (lo + hi)));
        }
        prev_t = t;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::magnus::magnus_terms;
    use crate::ode::corpus;

    #[test]
    fn nilpotent_tail_gives_infinite_radius() {
        let a = corpus::example1();
        let series = magnus_terms(a.piecewise().unwrap(), 20).unwrap();
        let r = empirical_radius(&series, 2.0).unwrap();
        assert!(r.is_infinite());
        assert!(divergence_onset(&series, 6.0).unwrap().is_none());
    }

    #[test]
    fn order_requirement_enforced() {
        let a = corpus::example3();
        let series = magnus_terms(a.piecewise().unwrap(), 6).unwrap();
        assert!(matches!(
            empirical_radius(&series, 1.0),
            Err(DiagnosticsError::InsufficientOrder { .. })
        ));
    }

    #[test]
    fn triangular_series_onset_near_two_pi_thirds() {
        let a = corpus::example3();
        let series = magnus_terms(a.piecewise().unwrap(), 30).unwrap();
        let onset = divergence_onset(&series, 3.0).unwrap().expect("onset in range");
        let expected = 2.0 * std::f64::consts::PI / 3.0;
        assert!(
            onset >= 0.95 * expected && onset <= 1.05 * expected,
            "onset {onset} vs expected {expected}"
        );
    }
}
