//! Sweep over κ = e^{iα} on the unit circle searching for the earliest
//! defective, origin-encircling eigenvalue collision of Y(t;κ).
//!
//! Exact collisions are isolated points in the (α, t) plane, so the sweep
//! works on closest approaches: a coarse α grid records the minimum
//! inter-track gap (already refined in t), local minima in α are then
//! driven to collision by golden-section on the gap, and the resulting
//! events are classified and filtered by the defective-and-encircling
//! condition. For real coefficients the spectrum at e^{-iα} mirrors the one
//! at e^{iα}, so conjugate clusters are deduplicated and the reported α
//! lies in [0, π].

use num_complex::Complex64;

use super::tracks::{
    eigenvalue_tracks_with, CollisionCandidate, CollisionEvent, TrackOptions, Trajectory,
};
use super::DiagResult;
use crate::ode::MatrixFunction;

#[derive(Debug, Clone)]
pub struct SweepOptions {
    /// Samples per trajectory run inside the sweep.
    pub track_samples: usize,
    pub tol: f64,
    /// Clusters (local minima in α) refined, most promising first.
    pub max_clusters: usize,
    /// Golden-section iterations over α per cluster.
    pub golden_iterations: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            track_samples: 128,
            tol: 1e-10,
            max_clusters: 6,
            golden_iterations: 72,
        }
    }
}

/// Closest-approach summary at one grid angle.
#[derive(Debug, Clone)]
pub struct SweepSample {
    pub alpha: f64,
    /// Smallest refined inter-track distance over t ∈ (0, t_max], if any
    /// approach was found.
    pub min_gap: Option<f64>,
    pub t_at_min: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct QualifyingCollision {
    pub alpha: f64,
    pub event: CollisionEvent,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub samples: Vec<SweepSample>,
    /// Defective, origin-encircling collisions found below t_max, sorted by
    /// collision time.
    pub qualifying: Vec<QualifyingCollision>,
    /// The earliest qualifying collision.
    pub earliest: Option<QualifyingCollision>,
}

pub fn kappa_sweep(
    a: &MatrixFunction,
    t_max: f64,
    alpha_samples: usize,
) -> DiagResult<SweepResult> {
    kappa_sweep_with(a, t_max, alpha_samples, &SweepOptions::default())
}

pub fn kappa_sweep_with(
    a: &MatrixFunction,
    t_max: f64,
    alpha_samples: usize,
    options: &SweepOptions,
) -> DiagResult<SweepResult> {
    let alpha_samples = alpha_samples.max(8);
    let track_options = TrackOptions {
        samples: options.track_samples,
        tol: options.tol,
        refine_rounds: 3,
        movement_bound: 0.05,
        approach_threshold: 0.8,
    };

    let mut samples = Vec::with_capacity(alpha_samples);
    let mut best_per_alpha: Vec<Option<CollisionCandidate>> = Vec::with_capacity(alpha_samples);
    for i in 0..alpha_samples {
        let alpha = 2.0 * std::f64::consts::PI * i as f64 / alpha_samples as f64;
        let (best, _) = best_approach(a, alpha, t_max, &track_options)?;
        samples.push(SweepSample {
            alpha,
            min_gap: best.as_ref().map(|c| c.gap),
            t_at_min: best.as_ref().map(|c| c.t_star),
        });
        best_per_alpha.push(best);
    }

    // Local minima of the gap over the circular α grid.
    let gap_of = |i: usize| -> f64 {
        best_per_alpha[i].as_ref().map(|c| c.gap).unwrap_or(f64::INFINITY)
    };
    let mut cluster_indices: Vec<usize> = (0..alpha_samples)
        .filter(|&i| {
            let prev = gap_of((i + alpha_samples - 1) % alpha_samples);
            let next = gap_of((i + 1) % alpha_samples);
            gap_of(i).is_finite() && gap_of(i) <= prev && gap_of(i) <= next
        })
        .collect();
    // Conjugate symmetry for real coefficients: keep representatives in [0, π].
    cluster_indices.retain(|&i| 2 * i <= alpha_samples);
    cluster_indices.sort_by(|&x, &y| gap_of(x).partial_cmp(&gap_of(y)).unwrap());
    cluster_indices.truncate(options.max_clusters);

    let step = 2.0 * std::f64::consts::PI / alpha_samples as f64;
    let mut qualifying: Vec<QualifyingCollision> = Vec::new();
    for &i in &cluster_indices {
        let center = samples[i].alpha;
        let refined_alpha =
            refine_alpha(a, center - step, center + step, t_max, &track_options, options)?;
        let traj = eigenvalue_tracks_with(
            a,
            Complex64::from_polar(1.0, refined_alpha),
            t_max,
            &track_options,
        )?;
        for event in &traj.events {
            if event.t_star <= t_max + 1e-9 && event.defective && event.winding.abs() >= 1 {
                let (alpha, event) = canonicalize(refined_alpha, event.clone());
                let duplicate = qualifying.iter().any(|q| {
                    (q.alpha - alpha).abs() < 5e-3 && (q.event.t_star - event.t_star).abs() < 5e-3
                });
                if !duplicate {
                    qualifying.push(QualifyingCollision { alpha, event });
                }
            }
        }
    }
    qualifying.sort_by(|x, y| x.event.t_star.partial_cmp(&y.event.t_star).unwrap());
    let earliest = qualifying.first().cloned();
    Ok(SweepResult { samples, qualifying, earliest })
}

/// Mirror an event found at α > π to its conjugate representative in [0, π].
fn canonicalize(alpha: f64, event: CollisionEvent) -> (f64, CollisionEvent) {
    let two_pi = 2.0 * std::f64::consts::PI;
    let alpha = alpha.rem_euclid(two_pi);
    if alpha <= std::f64::consts::PI {
        return (alpha, event);
    }
    let mut mirrored = event;
    mirrored.lambda_star = mirrored.lambda_star.conj();
    mirrored.winding = -mirrored.winding;
    (two_pi - alpha, mirrored)
}

/// Best (smallest-gap) refined approach at a fixed angle.
fn best_approach(
    a: &MatrixFunction,
    alpha: f64,
    t_max: f64,
    track_options: &TrackOptions,
) -> DiagResult<(Option<CollisionCandidate>, Trajectory)> {
    let kappa = Complex64::from_polar(1.0, alpha);
    let traj = eigenvalue_tracks_with(a, kappa, t_max, track_options)?;
    let best = traj
        .approaches
        .iter()
        .filter(|c| c.t_star > 1e-9)
        .min_by(|x, y| x.gap.partial_cmp(&y.gap).unwrap())
        .cloned();
    Ok((best, traj))
}

/// Golden-section over α on the minimum inter-track gap, with early stop
/// once the gap is deep below the collision tolerance.
fn refine_alpha(
    a: &MatrixFunction,
    lo: f64,
    hi: f64,
    t_max: f64,
    track_options: &TrackOptions,
    options: &SweepOptions,
) -> DiagResult<f64> {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let gap_eval = |alpha: f64| -> DiagResult<f64> {
        let (best, _) = best_approach(a, alpha, t_max, track_options)?;
        Ok(best.map(|c| c.gap).unwrap_or(f64::INFINITY))
    };
    let stop_gap = 1e-8;
    let mut a_lo = lo;
    let mut a_hi = hi;
    let mut x1 = a_hi - INV_PHI * (a_hi - a_lo);
    let mut x2 = a_lo + INV_PHI * (a_hi - a_lo);
    let mut f1 = gap_eval(x1)?;
    let mut f2 = gap_eval(x2)?;
    for _ in 0..options.golden_iterations {
        if f1.min(f2) < stop_gap {
            break;
        }
        if f1 <= f2 {
            a_hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = a_hi - INV_PHI * (a_hi - a_lo);
            f1 = gap_eval(x1)?;
        } else {
            a_lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = a_lo + INV_PHI * (a_hi - a_lo);
            f2 = gap_eval(x2)?;
        }
    }
    Ok(if f1 <= f2 { x1 } else { x2 })
}

#[cfg(test)]
mod tests {
    use super::super::tracks::COLLISION_TOL;
    use super::*;
    use crate::ode::corpus;

    #[test]
    fn rotation_has_no_qualifying_event() {
        // Collisions exist (t = π at κ = ±1) but none is defective.
        let a = corpus::example1();
        let result = kappa_sweep_with(
            &a,
            2.0 * std::f64::consts::PI,
            16,
            &SweepOptions { track_samples: 100, ..Default::default() },
        )
        .unwrap();
        assert!(result.earliest.is_none(), "qualifying: {:?}", result.qualifying);
        assert_eq!(result.samples.len(), 16);
    }

    #[test]
    fn triangular_sweep_finds_quarter_turn_collision() {
        let a = corpus::example3();
        let result = kappa_sweep_with(
            &a,
            2.5,
            16,
            &SweepOptions { track_samples: 120, ..Default::default() },
        )
        .unwrap();
        let hit = result.earliest.expect("qualifying collision");
        assert!(
            (hit.alpha - std::f64::consts::FRAC_PI_2).abs() < 0.02,
            "α = {}",
            hit.alpha
        );
        let expected_t = 2.0 * std::f64::consts::PI / 3.0;
        assert!((hit.event.t_star - expected_t).abs() < 5e-3, "t* = {}", hit.event.t_star);
        assert!(hit.event.defective);
        assert!(hit.event.winding.abs() >= 1);
        assert!(hit.event.gap < COLLISION_TOL);
    }
}
