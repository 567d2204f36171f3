//! Principal matrix logarithm two ways: a resolvent integral
//! log Φ = (Φ − I) ∫₀^∞ (1+μ)⁻¹ (μI + Φ)⁻¹ dμ evaluated with adaptive
//! Gauss–Legendre panels after the substitution μ = s/(1−s), and an
//! eigendecomposition route used as an independent cross-check.
//!
//! Both require the spectrum to avoid the closed negative real axis, which
//! is exactly the condition under which the principal branch exists.

use num_complex::Complex64;
use std::sync::OnceLock;

use super::eig::{eig_full, eigenvalues_only};
use super::lu::LuDecomposition;
use super::{check_dim, on_negative_axis, ComplexMatrix, LinalgError, LinalgResult};

const GL_POINTS: usize = 16;
const PANEL_LIMIT: usize = 4096;
const REFINE_TOL: f64 = 1e-10;
const EIGENBASIS_CONDITION_LIMIT: f64 = 1e8;

/// Gauss–Legendre nodes and weights on [0, 1], computed once by Newton
/// iteration on the Legendre polynomial.
fn gl_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_POINTS;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            // Initial guess on [-1, 1], then Newton.
            let mut x =
                (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // Map from [-1, 1] to [0, 1].
            nodes.push(0.5 * (x + 1.0));
            weights.push(0.5 * w);
        }
        (nodes, weights)
    })
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn check_spectrum_off_cut(phi: &ComplexMatrix) -> LinalgResult<Vec<Complex64>> {
    let evals = eigenvalues_only(phi)?;
    // Axis tests run on cluster means: a defective negative pair splits by
    // √ε in the raw values but its mean stays on the axis.
    for (center, _) in super::cluster_spectrum(&evals, 1e-6) {
        if center.norm() < 1e-12 {
            return Err(LinalgError::Singular);
        }
        if on_negative_axis(center) {
            return Err(LinalgError::NegativeSpectrum { value: center });
        }
    }
    Ok(evals)
}

/// Principal logarithm via the resolvent integral. Fails with
/// `NegativeSpectrum` when an eigenvalue lies on the closed negative real
/// axis (within the tolerance band), i.e. when the formula does not apply.
pub fn logm_integral(phi: &ComplexMatrix) -> LinalgResult<ComplexMatrix> {
    check_dim(phi.dim())?;
    if !phi.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    check_spectrum_off_cut(phi)?;
    let n = phi.dim();
    let mut panels = 4usize;
    let mut prev: Option<ComplexMatrix> = None;
    loop {
        let integral = integrate_resolvent(phi, panels)?;
        if let Some(p) = prev {
            let diff = integral.sub(&p).frobenius_norm();
            let scale = integral.frobenius_norm().max(1.0);
            if diff <= REFINE_TOL * scale {
                let shifted = phi.sub(&ComplexMatrix::identity(n));
                return Ok(shifted.matmul(&integral));
            }
        }
        prev = Some(integral);
        panels *= 2;
        if panels > PANEL_LIMIT {
            return Err(LinalgError::NonConvergence { iterations: PANEL_LIMIT });
        }
    }
}

/// ∫₀¹ (μ(s)I + Φ)⁻¹ / (1−s) ds with μ(s) = s/(1−s), composite Gauss–Legendre.
fn integrate_resolvent(phi: &ComplexMatrix, panels: usize) -> LinalgResult<ComplexMatrix> {
    let (nodes, weights) = gl_rule();
    let n = phi.dim();
    let mut acc = ComplexMatrix::zeros(n);
    let h = 1.0 / panels as f64;
    for p in 0..panels {
        let left = p as f64 * h;
        for (x, w) in nodes.iter().zip(weights) {
            let s = left + h * x;
            let mu = s / (1.0 - s);
            let shifted = phi.shift_diagonal(Complex64::new(mu, 0.0));
            let lu = LuDecomposition::new(&shifted)?;
            let inv = lu.inverse();
            let factor = w * h / (1.0 - s);
            acc = acc.add(&inv.scale(Complex64::new(factor, 0.0)));
        }
    }
    Ok(acc)
}

/// Principal logarithm via eigendecomposition: V diag(log λ) V⁻¹ with
/// principal scalar logs. Requires a well-conditioned eigenbasis.
pub fn logm_eig(phi: &ComplexMatrix) -> LinalgResult<ComplexMatrix> {
    check_dim(phi.dim())?;
    if !phi.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    check_spectrum_off_cut(phi)?;
    let (spectrum, v) = eig_full(phi)?;
    if !spectrum.condition_estimate.is_finite()
        || spectrum.condition_estimate > EIGENBASIS_CONDITION_LIMIT
    {
        return Err(LinalgError::IllConditionedEigenbasis {
            estimate: spectrum.condition_estimate,
        });
    }
    let n = phi.dim();
    let mut d = ComplexMatrix::zeros(n);
    for (k, &l) in spectrum.eigenvalues.iter().enumerate() {
        d[(k, k)] = l.ln();
    }
    let lu = LuDecomposition::new(&v)?;
    Ok(v.matmul(&d).matmul(&lu.inverse()))
}

#[cfg(test)]
mod tests {
    use super::super::expm;
    use super::*;

    #[test]
    fn log_of_identity_is_zero() {
        let l = logm_integral(&ComplexMatrix::identity(3)).unwrap();
        assert!(l.frobenius_norm() < 1e-10);
    }

    #[test]
    fn negative_spectrum_rejected() {
        // [[-1, 0], [pi, -1]] has a double eigenvalue at -1.
        let m = ComplexMatrix::from_rows(&[
            vec![Complex64::new(-1.0, 0.0), Complex64::new(0.0, 0.0)],
            vec![Complex64::new(std::f64::consts::PI, 0.0), Complex64::new(-1.0, 0.0)],
        ]);
        match logm_integral(&m) {
            Err(LinalgError::NegativeSpectrum { .. }) => {}
            other => panic!("expected NegativeSpectrum, got {other:?}"),
        }
    }

    #[test]
    fn logm_eig_of_diagonal() {
        let m = ComplexMatrix::from_rows(&[
            vec![Complex64::new(1.0f64.exp(), 0.0), Complex64::new(0.0, 0.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(2.0f64.exp(), 0.0)],
        ]);
        let l = logm_eig(&m).unwrap();
        assert!((l[(0, 0)].re - 1.0).abs() < 1e-10);
        assert!((l[(1, 1)].re - 2.0).abs() < 1e-10);
        assert!(l[(0, 1)].norm() < 1e-10);
    }

    #[test]
    fn log_of_rotation() {
        // log of a rotation by 0.3 recovers 0.3 * [[0,1],[-1,0]].
        let t: f64 = 0.3;
        let m = ComplexMatrix::from_rows(&[
            vec![Complex64::new(t.cos(), 0.0), Complex64::new(t.sin(), 0.0)],
            vec![Complex64::new(-t.sin(), 0.0), Complex64::new(t.cos(), 0.0)],
        ]);
        let l = logm_integral(&m).unwrap();
        assert!((l[(0, 1)].re - t).abs() < 1e-9);
        assert!((l[(1, 0)].re + t).abs() < 1e-9);
        assert!(l[(0, 0)].norm() < 1e-9);
        let l2 = logm_eig(&m).unwrap();
        assert!(l.sub(&l2).frobenius_norm() < 1e-8);
    }

    #[test]
    fn roundtrip_with_expm() {
        let m = ComplexMatrix::from_rows(&[
            vec![Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.0), Complex64::new(0.05, 0.0)],
            vec![Complex64::new(0.1, 0.0), Complex64::new(-0.4, 0.2), Complex64::new(0.3, 0.0)],
            vec![Complex64::new(0.0, -0.1), Complex64::new(0.2, 0.0), Complex64::new(0.1, 0.0)],
        ]);
        let e = expm(&m).unwrap();
        let l = logm_integral(&e).unwrap();
        assert!(l.sub(&m).frobenius_norm() < 1e-7, "{}", l.sub(&m).frobenius_norm());
    }

    #[test]
    fn real_input_real_log() {
        let m = ComplexMatrix::from_rows(&[
            vec![Complex64::new(2.0, 0.0), Complex64::new(0.5, 0.0)],
            vec![Complex64::new(-0.3, 0.0), Complex64::new(1.5, 0.0)],
        ]);
        let l = logm_integral(&m).unwrap();
        assert!(l.max_imag_abs() < 1e-9);
    }
}
