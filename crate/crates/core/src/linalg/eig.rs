//! Eigenvalues of small dense complex matrices: Householder reduction to
//! Hessenberg form followed by shifted QR iteration with deflation, plus
//! inverse-iteration eigenvectors and an eigenbasis condition estimate.

use num_complex::Complex64;

use super::lu::LuDecomposition;
use super::{check_dim, ComplexMatrix, LinalgError, LinalgResult};

/// Eigenvalues together with a condition estimate of the eigenvector basis.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub condition_estimate: f64,
}

/// Eigenvalues only (no vectors, no condition estimate).
pub fn eigenvalues_only(m: &ComplexMatrix) -> LinalgResult<Vec<Complex64>> {
    check_dim(m.dim())?;
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let mut h = hessenberg(m.clone());
    qr_eigenvalues(&mut h)
}

/// Eigenvalues plus eigenbasis condition estimate.
pub fn eig(m: &ComplexMatrix) -> LinalgResult<Spectrum> {
    let (spectrum, _) = eig_full(m)?;
    Ok(spectrum)
}

/// Eigenvalues, condition estimate, and the inverse-iteration eigenvector
/// matrix (eigenvector k in column k).
pub fn eig_full(m: &ComplexMatrix) -> LinalgResult<(Spectrum, ComplexMatrix)> {
    let eigenvalues = eigenvalues_only(m)?;
    let vectors = eigenvectors(m, &eigenvalues);
    let condition_estimate = basis_condition_estimate(&vectors);
    Ok((Spectrum { eigenvalues, condition_estimate }, vectors))
}

fn hessenberg(mut h: ComplexMatrix) -> ComplexMatrix {
    let n = h.dim();
    if n < 3 {
        return h;
    }
    for k in 0..(n - 2) {
        let norm: f64 = ((k + 1)..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>();
        let norm = norm.sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let alpha = if x0.norm() == 0.0 {
            Complex64::new(-norm, 0.0)
        } else {
            -(x0 / x0.norm()) * norm
        };
        let mut v: Vec<Complex64> = ((k + 1)..n).map(|i| h[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // Left: rows k+1..n.
        for j in k..n {
            let dot: Complex64 =
                ((k + 1)..n).map(|i| v[i - k - 1].conj() * h[(i, j)]).sum();
            let f = dot * beta;
            for i in (k + 1)..n {
                let sub = f * v[i - k - 1];
                h[(i, j)] -= sub;
            }
        }
        // Right: columns k+1..n.
        for i in 0..n {
            let dot: Complex64 =
                ((k + 1)..n).map(|j| h[(i, j)] * v[j - k - 1]).sum();
            let f = dot * beta;
            for j in (k + 1)..n {
                let sub = f * v[j - k - 1].conj();
                h[(i, j)] -= sub;
            }
        }
        h[(k + 1, k)] = alpha;
        for i in (k + 2)..n {
            h[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
    h
}

/// Eigenvalues of a 2x2 block, cancellation-safe.
fn eig2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let tr = a + d;
    let det = a * d - b * c;
    let mut disc = (tr * tr - 4.0 * det).sqrt();
    // Align the branch of the square root with tr to avoid cancellation.
    if (tr.conj() * disc).re < 0.0 {
        disc = -disc;
    }
    let l1 = (tr + disc) * 0.5;
    let l2 = if l1.norm() > 0.0 { det / l1 } else { (tr - disc) * 0.5 };
    (l1, l2)
}

fn qr_eigenvalues(h: &mut ComplexMatrix) -> LinalgResult<Vec<Complex64>> {
    let n = h.dim();
    let mut evals = vec![Complex64::new(0.0, 0.0); n];
    if n == 0 {
        return Ok(evals);
    }
    if n == 1 {
        evals[0] = h[(0, 0)];
        return Ok(evals);
    }
    let scale = h.frobenius_norm();
    let floor = f64::EPSILON * scale * 1e-2;
    let max_iters = 100 * n * n;
    let mut iters = 0usize;
    let mut stagnation = 0usize;
    let mut hi = n - 1;
    loop {
        // Zero out negligible subdiagonals in the active part.
        for i in 0..hi {
            let tiny = f64::EPSILON * (h[(i, i)].norm() + h[(i + 1, i + 1)].norm());
            if h[(i + 1, i)].norm() <= tiny.max(floor) {
                h[(i + 1, i)] = Complex64::new(0.0, 0.0);
            }
        }
        // Deflate converged eigenvalues from the bottom.
        loop {
            if hi == 0 {
                evals[0] = h[(0, 0)];
                return Ok(evals);
            }
            if h[(hi, hi - 1)].norm() == 0.0 {
                evals[hi] = h[(hi, hi)];
                hi -= 1;
                stagnation = 0;
                continue;
            }
            if hi == 1 || h[(hi - 1, hi - 2)].norm() == 0.0 {
                let (l1, l2) = eig2(
                    h[(hi - 1, hi - 1)],
                    h[(hi - 1, hi)],
                    h[(hi, hi - 1)],
                    h[(hi, hi)],
                );
                evals[hi - 1] = l1;
                evals[hi] = l2;
                if hi == 1 {
                    return Ok(evals);
                }
                hi -= 2;
                stagnation = 0;
                continue;
            }
            break;
        }
        // Active window [lo, hi] with nonzero connecting subdiagonals.
        let mut lo = hi;
        while lo > 0 && h[(lo, lo - 1)].norm() != 0.0 {
            lo -= 1;
        }
        iters += 1;
        stagnation += 1;
        if iters > max_iters {
            return Err(LinalgError::NonConvergence { iterations: max_iters });
        }
        // Wilkinson shift from the trailing 2x2, with an exceptional shift
        // every 12 stalled iterations to break symmetric cycling.
        let shift = if stagnation % 12 == 0 {
            let p = h[(hi, hi - 1)].norm() + h[(hi - 1, hi - 2)].norm();
            h[(hi, hi)] + Complex64::new(0.75 * p, 0.0)
        } else {
            let (l1, l2) = eig2(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            );
            if (l1 - h[(hi, hi)]).norm() <= (l2 - h[(hi, hi)]).norm() {
                l1
            } else {
                l2
            }
        };
        qr_step(h, lo, hi, shift);
    }
}

/// One explicit shifted QR sweep on the decoupled window [lo, hi].
fn qr_step(h: &mut ComplexMatrix, lo: usize, hi: usize, shift: Complex64) {
    for i in lo..=hi {
        h[(i, i)] -= shift;
    }
    let mut rotations: Vec<(f64, Complex64)> = Vec::with_capacity(hi - lo);
    for i in lo..hi {
        let a = h[(i, i)];
        let b = h[(i + 1, i)];
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 || b.norm() == 0.0 {
            (1.0, Complex64::new(0.0, 0.0))
        } else if a.norm() == 0.0 {
            (0.0, Complex64::new(1.0, 0.0))
        } else {
            let c = a.norm() / r;
            let s = (a / a.norm()) * b.conj() / r;
            (c, s)
        };
        rotations.push((c, s));
        // Apply G to rows i, i+1 over columns i..=hi.
        for j in i..=hi {
            let x = h[(i, j)];
            let y = h[(i + 1, j)];
            h[(i, j)] = c * x + s * y;
            h[(i + 1, j)] = -s.conj() * x + c * y;
        }
    }
    // Right-multiply by the adjoints: columns i, i+1 over rows lo..=min(i+1, hi).
    for (idx, &(c, s)) in rotations.iter().enumerate() {
        let i = lo + idx;
        for row in lo..=hi.min(i + 1) {
            let x = h[(row, i)];
            let y = h[(row, i + 1)];
            h[(row, i)] = c * x + s.conj() * y;
            h[(row, i + 1)] = -s * x + c * y;
        }
    }
    for i in lo..=hi {
        h[(i, i)] += shift;
    }
}

/// Deterministic unit start vector for inverse iteration.
fn seeded_unit_vector(n: usize, seed: u64) -> Vec<Complex64> {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
    };
    let mut v: Vec<Complex64> = (0..n).map(|_| Complex64::new(next(), next())).collect();
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in v.iter_mut() {
        *z /= norm;
    }
    v
}

/// Inverse-iteration eigenvectors, one column per eigenvalue. Repeated
/// eigenvalues get distinct tiny shift perturbations and distinct start
/// vectors so non-defective multiplicities still span their eigenspace.
fn eigenvectors(m: &ComplexMatrix, evals: &[Complex64]) -> ComplexMatrix {
    let n = m.dim();
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
    let floor = f64::EPSILON * scale * (n as f64);
    let mut v = ComplexMatrix::zeros(n);
    for (k, &lambda) in evals.iter().enumerate() {
        let duplicates_before =
            evals[..k].iter().filter(|l| (**l - lambda).norm() <= 1e-10 * scale).count();
        let perturb = duplicates_before as f64 * 8.0 * floor;
        let shifted = m.shift_diagonal(-(lambda + Complex64::new(perturb, perturb)));
        let lu = LuDecomposition::with_pivot_floor(&shifted, floor)
            .expect("pivot floor prevents failure");
        let mut x = seeded_unit_vector(n, (k as u64 + 1).wrapping_mul(0x9e3779b97f4a7c15));
        for _ in 0..3 {
            x = lu.solve_vec(&x);
            let norm: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if !norm.is_finite() || norm == 0.0 {
                break;
            }
            for z in x.iter_mut() {
                *z /= norm;
            }
        }
        for i in 0..n {
            v[(i, k)] = x[i];
        }
    }
    v
}

/// Estimate cond₂ of the basis via power iteration on V*V and inverse power
/// iteration through an LU factorization.
fn basis_condition_estimate(v: &ComplexMatrix) -> f64 {
    let n = v.dim();
    if n == 0 {
        return 1.0;
    }
    let gram = v.adjoint().matmul(v);
    let mut x = seeded_unit_vector(n, 0xfeed_beef);
    let mut top = 0.0;
    for _ in 0..60 {
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n {
                y[i] += gram[(i, j)] * x[j];
            }
        }
        let norm: f64 = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return f64::INFINITY;
        }
        top = norm;
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
    }
    let lu = match LuDecomposition::new(&gram) {
        Ok(lu) => lu,
        Err(_) => return f64::INFINITY,
    };
    let mut x = seeded_unit_vector(n, 0xdead_cafe);
    let mut bottom_inv = 0.0;
    for _ in 0..60 {
        let y = lu.solve_vec(&x);
        let norm: f64 = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() {
            return f64::INFINITY;
        }
        if norm == 0.0 {
            return f64::INFINITY;
        }
        bottom_inv = norm;
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
    }
    // gram eigenvalues are singular values squared of V.
    (top * bottom_inv).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sort_by_re_im(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| {
            a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap())
        });
        v
    }

    #[test]
    fn identity_eigenvalues() {
        let m = ComplexMatrix::identity(4);
        let evals = eigenvalues_only(&m).unwrap();
        for l in evals {
            assert!((l - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn rotation_generator_eigenvalues() {
        let m = ComplexMatrix::from_rows(&[
            vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            vec![Complex64::new(-1.0, 0.0), Complex64::new(0.0, 0.0)],
        ]);
        let evals = sort_by_re_im(eigenvalues_only(&m).unwrap());
        assert!((evals[0] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        assert!((evals[1] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn upper_triangular_eigenvalues() {
        let m = ComplexMatrix::from_rows(&[
            vec![Complex64::new(2.0, 0.0), Complex64::new(5.0, 1.0), Complex64::new(0.3, 0.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.5), Complex64::new(2.0, 0.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.25, -3.0)],
        ]);
        let mut evals = eigenvalues_only(&m).unwrap();
        evals.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        let mut expected =
            vec![Complex64::new(2.0, 0.0), Complex64::new(-1.0, 0.5), Complex64::new(0.25, -3.0)];
        expected.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        for (a, b) in evals.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn eigenvector_residuals() {
        // Deterministic non-normal matrix.
        let m = ComplexMatrix::from_rows(&[
            vec![Complex64::new(1.0, 0.2), Complex64::new(2.0, 0.0), Complex64::new(0.0, -1.0)],
            vec![Complex64::new(0.0, 0.5), Complex64::new(-1.0, 0.0), Complex64::new(3.0, 0.0)],
            vec![Complex64::new(0.7, 0.0), Complex64::new(0.1, 0.1), Complex64::new(2.0, -0.3)],
        ]);
        let (spectrum, v) = eig_full(&m).unwrap();
        let scale = spectral_norm_of(&m);
        for (k, &lambda) in spectrum.eigenvalues.iter().enumerate() {
            let mut residual: f64 = 0.0;
            for i in 0..3 {
                let mut r = -lambda * v[(i, k)];
                for j in 0..3 {
                    r += m[(i, j)] * v[(j, k)];
                }
                residual += r.norm_sqr();
            }
            assert!(residual.sqrt() <= 1e-9 * scale, "residual {}", residual.sqrt());
        }
    }

    fn spectral_norm_of(m: &ComplexMatrix) -> f64 {
        super::super::spectral_norm(m)
    }

    #[test]
    fn condition_estimate_flags_defective() {
        // Jordan block: eigenvectors collapse, condition estimate blows up.
        let m = ComplexMatrix::from_rows(&[
            vec![Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0)],
        ]);
        let spectrum = eig(&m).unwrap();
        assert!(spectrum.condition_estimate > 1e6);
        let id = ComplexMatrix::identity(3);
        let spectrum = eig(&id).unwrap();
        assert!(spectrum.condition_estimate < 1e3);
    }
}
