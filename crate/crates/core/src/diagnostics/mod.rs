//! Convergence certificates from the action integral, real-logarithm
//! existence verdicts, empirical radius-of-convergence estimation, and
//! eigenvalue-trajectory analysis of the fundamental solution.

mod radius;
mod sweep;
mod tracks;

pub use radius::{divergence_onset, empirical_radius, partial_sum_onset, term_norms};
pub use sweep::{
    kappa_sweep, kappa_sweep_with, QualifyingCollision, SweepOptions, SweepResult, SweepSample,
};
pub use tracks::{
    collision_classify, eigenvalue_tracks, eigenvalue_tracks_with, CollisionCandidate,
    CollisionEvent, TrackOptions, Trajectory,
};

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{
    cluster_spectrum, eigenvalues_only, geometric_multiplicity, on_negative_axis, ComplexMatrix,
    LinalgError,
};
use crate::magnus::MagnusError;
use crate::ode::{action_norm, MatrixFunction, OdeError};

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Magnus(#[from] MagnusError),
    #[error("series order {got} too small, need at least {required}")]
    InsufficientOrder { required: usize, got: usize },
    #[error("matrix has imaginary residue {residue:.3e}, expected a real matrix")]
    NotReal { residue: f64 },
}

pub type DiagResult<T> = Result<T, DiagnosticsError>;

/// Certified sufficient-convergence threshold: the series converges when
/// γ(t) stays below π.
pub const CONVERGENCE_THRESHOLD: f64 = std::f64::consts::PI;

pub const DEFAULT_SAFETY_MARGIN: f64 = 1e-6;

/// Historical sufficient bounds on γ(t), ascending; π is the certified one.
pub fn threshold_table() -> Vec<(&'static str, f64)> {
    vec![
        ("log2/2", std::f64::consts::LN_2 / 2.0),
        ("0.57745", 0.57745),
        ("log2", std::f64::consts::LN_2),
        ("1", 1.0),
        ("1.08688", 1.08688),
        ("2", 2.0),
        ("pi", CONVERGENCE_THRESHOLD),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    GuaranteedConvergent,
    Unknown,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::GuaranteedConvergent => write!(f, "GuaranteedConvergent"),
            Verdict::Unknown => write!(f, "Unknown"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ThresholdCheck {
    pub name: &'static str,
    pub bound: f64,
    pub passed: bool,
}

/// Convergence certificate at a fixed time: γ(t), the verdict against the π
/// threshold, and the per-bound pass flags.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub t: f64,
    pub gamma: f64,
    pub verdict: Verdict,
    pub thresholds: Vec<ThresholdCheck>,
}

/// Certify convergence at time `t`: the verdict is `GuaranteedConvergent`
/// exactly when γ(t) < π − safety margin.
pub fn certify(a: &MatrixFunction, t: f64) -> DiagResult<Certificate> {
    certify_with_margin(a, t, DEFAULT_SAFETY_MARGIN)
}

pub fn certify_with_margin(
    a: &MatrixFunction,
    t: f64,
    safety_margin: f64,
) -> DiagResult<Certificate> {
    let gamma = action_norm(a, t, 1e-8)?;
    let verdict = if gamma < CONVERGENCE_THRESHOLD - safety_margin {
        Verdict::GuaranteedConvergent
    } else {
        Verdict::Unknown
    };
    let thresholds = threshold_table()
        .into_iter()
        .map(|(name, bound)| ThresholdCheck { name, bound, passed: gamma < bound })
        .collect();
    Ok(Certificate { t, gamma, verdict, thresholds })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RealLogVerdict {
    /// No eigenvalue on the closed negative real axis: the resolvent
    /// integral provides a real principal logarithm.
    Yes,
    /// A defective negative real eigenvalue was found; no real logarithm.
    No,
    /// Negative real eigenvalues exist but none is detectably defective:
    /// the principal branch does not settle the question either way.
    PrincipalBranchInapplicable,
}

impl std::fmt::Display for RealLogVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RealLogVerdict::Yes => write!(f, "Yes"),
            RealLogVerdict::No => write!(f, "No"),
            RealLogVerdict::PrincipalBranchInapplicable => {
                write!(f, "PrincipalBranchInapplicable")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct NegativeEigenvalue {
    pub value: Complex64,
    pub algebraic: usize,
    pub geometric: usize,
}

#[derive(Debug, Clone)]
pub struct RealLogReport {
    pub verdict: RealLogVerdict,
    /// Clusters of eigenvalues on the closed negative real axis, with their
    /// multiplicities.
    pub negative_eigenvalues: Vec<NegativeEigenvalue>,
}

const NEGATIVE_CLUSTER_TOL: f64 = 1e-5;
const MULTIPLICITY_RANK_TOL: f64 = 1e-6;

/// Does the (real, invertible) matrix Y have a real logarithm?
///
/// With no spectrum on the closed negative real axis the answer is Yes.
/// With negative real eigenvalues present, a defective one yields No; a
/// non-defective negative spectrum is reported as inapplicable rather than
/// silently classified (full negative-spectrum classification is out of
/// scope).
pub fn real_log_exists(y: &ComplexMatrix) -> DiagResult<RealLogReport> {
    let scale = y.max_abs().max(f64::MIN_POSITIVE);
    let residue = y.max_imag_abs();
    if residue > 1e-9 * scale {
        return Err(DiagnosticsError::NotReal { residue });
    }
    let evals = eigenvalues_only(y)?;
    // Cluster first: defective multiplicities split by √ε in the raw
    // values, while the cluster means stay put. Axis membership and
    // multiplicities are judged per cluster.
    let clusters = cluster_spectrum(&evals, NEGATIVE_CLUSTER_TOL);
    for (center, _) in &clusters {
        if center.norm() < 1e-12 * scale {
            return Err(DiagnosticsError::Linalg(LinalgError::Singular));
        }
    }
    let negative: Vec<(Complex64, usize)> =
        clusters.into_iter().filter(|&(center, _)| on_negative_axis(center)).collect();
    if negative.is_empty() {
        return Ok(RealLogReport { verdict: RealLogVerdict::Yes, negative_eigenvalues: vec![] });
    }
    let mut report = Vec::new();
    let mut any_defective = false;
    for (center, algebraic) in negative {
        let geometric = geometric_multiplicity(y, center, MULTIPLICITY_RANK_TOL);
        if geometric < algebraic {
            any_defective = true;
        }
        report.push(NegativeEigenvalue { value: center, algebraic, geometric });
    }
    let verdict = if any_defective {
        RealLogVerdict::No
    } else {
        RealLogVerdict::PrincipalBranchInapplicable
    };
    Ok(RealLogReport { verdict, negative_eigenvalues: report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::corpus;

    #[test]
    fn certificate_at_zero_passes_everything() {
        let a = corpus::example4();
        let cert = certify(&a, 0.0).unwrap();
        assert_eq!(cert.gamma, 0.0);
        assert_eq!(cert.verdict, Verdict::GuaranteedConvergent);
        assert!(cert.thresholds.iter().all(|c| c.passed));
        assert_eq!(cert.thresholds.len(), 7);
    }

    #[test]
    fn quartic_example_certificates() {
        let a = corpus::example4();
        let at_half = certify(&a, 0.5).unwrap();
        assert_eq!(at_half.verdict, Verdict::GuaranteedConvergent);
        let at_collision_time = certify(&a, 0.733).unwrap();
        assert_eq!(at_collision_time.verdict, Verdict::Unknown);
        assert!(
            (at_collision_time.gamma - 4.36).abs() < 0.05,
            "γ(0.733) = {}",
            at_collision_time.gamma
        );
    }

    #[test]
    fn verdict_monotone_in_time() {
        let a = corpus::example2();
        let mut previous = 0.0;
        for k in 1..=10 {
            let t = 0.4 * k as f64;
            let cert = certify(&a, t).unwrap();
            assert!(cert.gamma >= previous - 1e-9);
            previous = cert.gamma;
        }
    }

    #[test]
    fn sharpness_witness_at_pi() {
        let a = corpus::example2();
        let just_below = certify(&a, std::f64::consts::PI - 0.01).unwrap();
        assert_eq!(just_below.verdict, Verdict::GuaranteedConvergent);
        let at_pi = certify(&a, std::f64::consts::PI).unwrap();
        assert_eq!(at_pi.verdict, Verdict::Unknown);
    }

    #[test]
    fn real_log_defective_negative_pair() {
        let y = corpus::ex2_solution(std::f64::consts::PI).to_complex();
        let report = real_log_exists(&y).unwrap();
        assert_eq!(report.verdict, RealLogVerdict::No);
        assert_eq!(report.negative_eigenvalues.len(), 1);
        assert_eq!(report.negative_eigenvalues[0].algebraic, 2);
        assert_eq!(report.negative_eigenvalues[0].geometric, 1);
    }

    #[test]
    fn real_log_minus_identity_inapplicable() {
        let y = ComplexMatrix::identity(2).scale(Complex64::new(-1.0, 0.0));
        let report = real_log_exists(&y).unwrap();
        assert_eq!(report.verdict, RealLogVerdict::PrincipalBranchInapplicable);
        assert_eq!(report.negative_eigenvalues[0].algebraic, 2);
        assert_eq!(report.negative_eigenvalues[0].geometric, 2);
    }

    #[test]
    fn real_log_positive_spectrum_yes() {
        let y = corpus::ex3_solution(2.0 * std::f64::consts::PI / 3.0).to_complex();
        let report = real_log_exists(&y).unwrap();
        assert_eq!(report.verdict, RealLogVerdict::Yes);
    }

    #[test]
    fn complex_input_rejected() {
        let mut y = ComplexMatrix::identity(2);
        y[(0, 1)] = Complex64::new(0.0, 0.5);
        assert!(matches!(real_log_exists(&y), Err(DiagnosticsError::NotReal { .. })));
    }
}
