//! Dense numerical kernels on small real and complex matrices: exponential,
//! resolvent-integral logarithm, eigenvalues, spectral norm, and rank-based
//! multiplicity. Everything here is unblocked and limited to `MAX_DENSE_DIM`.

mod eig;
mod expm;
mod logm;
mod lu;

pub use eig::{eig, eig_full, eigenvalues_only, Spectrum};
pub use expm::expm;
pub use logm::{logm_eig, logm_integral};
pub use lu::{determinant, LuDecomposition};

use num_complex::Complex64;
use thiserror::Error;

/// Hard cap on matrix dimension for the dense kernels.
pub const MAX_DENSE_DIM: usize = 16;

/// Tolerance band for "eigenvalue on the closed negative real axis":
/// `Re λ ≤ NEGATIVE_AXIS_TOL` and `|Im λ| ≤ NEGATIVE_AXIS_TOL · (1 + |λ|)`.
pub const NEGATIVE_AXIS_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("dimension {dim} exceeds the dense-kernel limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("eigenvalue {value} lies on the closed negative real axis")]
    NegativeSpectrum { value: Complex64 },
    #[error("eigenvector basis is ill-conditioned (condition estimate {estimate:.3e})")]
    IllConditionedEigenbasis { estimate: f64 },
    #[error("eigenvalue iteration did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("non-finite entry encountered")]
    NonFinite,
}

pub type LinalgResult<T> = Result<T, LinalgError>;

/// Dense real square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(dim: usize) -> Self {
        RealMatrix { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            assert_eq!(row.len(), dim, "rows must form a square matrix");
            data.extend_from_slice(row);
        }
        RealMatrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn matmul(&self, other: &RealMatrix) -> RealMatrix {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = RealMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self[(i, k)];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += aik * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &RealMatrix) -> RealMatrix {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&other.data) {
            *x -= y;
        }
        out
    }

    pub fn add(&self, other: &RealMatrix) -> RealMatrix {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&other.data) {
            *x += y;
        }
        out
    }

    pub fn scale(&self, c: f64) -> RealMatrix {
        let mut out = self.clone();
        for x in out.data.iter_mut() {
            *x *= c;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }
}

impl std::ops::Index<(usize, usize)> for RealMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RealMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Dense complex square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            assert_eq!(row.len(), dim, "rows must form a square matrix");
            data.extend_from_slice(row);
        }
        ComplexMatrix { dim, data }
    }

    /// Wrap a row-major flat buffer of length dim².
    pub fn from_flat(dim: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), dim * dim);
        ComplexMatrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self[(i, k)];
                if aik.re == 0.0 && aik.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += aik * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&other.data) {
            *x += y;
        }
        out
    }

    pub fn sub(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&other.data) {
            *x -= y;
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> ComplexMatrix {
        let mut out = self.clone();
        for x in out.data.iter_mut() {
            *x *= c;
        }
        out
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn shift_diagonal(&self, c: Complex64) -> ComplexMatrix {
        let mut out = self.clone();
        for i in 0..self.dim {
            out[(i, i)] += c;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn one_norm(&self) -> f64 {
        let n = self.dim;
        (0..n)
            .map(|j| (0..n).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn real_part(&self) -> RealMatrix {
        RealMatrix { dim: self.dim, data: self.data.iter().map(|z| z.re).collect() }
    }

    /// Largest |Im| entry; used to validate "this matrix is real" preconditions.
    pub fn max_imag_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

fn check_dim(dim: usize) -> LinalgResult<()> {
    if dim > MAX_DENSE_DIM {
        return Err(LinalgError::DimensionTooLarge { dim, limit: MAX_DENSE_DIM });
    }
    Ok(())
}

/// True when λ sits on the closed negative real axis within the tolerance band.
pub fn on_negative_axis(lambda: Complex64) -> bool {
    lambda.re <= NEGATIVE_AXIS_TOL && lambda.im.abs() <= NEGATIVE_AXIS_TOL * (1.0 + lambda.norm())
}

/// Greedy clustering of a computed spectrum. Defective multiple eigenvalues
/// carry an intrinsic √ε splitting in any backward-stable solver, but the
/// splitting is symmetric, so cluster means are accurate to working
/// precision; axis tests belong on the means, not the raw values.
pub fn cluster_spectrum(evals: &[Complex64], relative_radius: f64) -> Vec<(Complex64, usize)> {
    let mut sorted: Vec<Complex64> = evals.to_vec();
    sorted.sort_by(|a, b| {
        a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap())
    });
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for l in sorted {
        match clusters.iter_mut().find(|(center, _)| {
            (l - *center).norm() <= relative_radius * (1.0 + l.norm())
        }) {
            Some((center, count)) => {
                *count += 1;
                *center = (*center * (*count as f64 - 1.0) + l) / *count as f64;
            }
            None => clusters.push((l, 1)),
        }
    }
    clusters
}

/// Largest singular value, computed as sqrt of the top eigenvalue of M*M.
pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    if m.max_abs() == 0.0 {
        return 0.0;
    }
    // Scale so the Gram matrix cannot overflow or underflow.
    let s = m.max_abs();
    let scaled = m.scale(Complex64::new(1.0 / s, 0.0));
    let gram = scaled.adjoint().matmul(&scaled);
    let evals = eigenvalues_only(&gram).expect("Gram eigenvalues at desk scale");
    let top = evals.iter().map(|l| l.re).fold(0.0, f64::max);
    s * top.max(0.0).sqrt()
}

/// Spectral norm of a real matrix.
pub fn spectral_norm_real(m: &RealMatrix) -> f64 {
    spectral_norm(&m.to_complex())
}

/// dim − rank(M − λI); rank from column-pivoted elimination with
/// threshold `tol · ‖M‖₂`.
pub fn geometric_multiplicity(m: &ComplexMatrix, lambda: Complex64, tol: f64) -> usize {
    let n = m.dim();
    let shifted = m.shift_diagonal(-lambda);
    let threshold = tol * spectral_norm(m).max(f64::MIN_POSITIVE);
    n - rank_with_threshold(&shifted, threshold)
}

/// Numerical rank via Householder QR with column pivoting: the number of
/// diagonal entries of R exceeding the threshold.
pub fn rank_with_threshold(m: &ComplexMatrix, threshold: f64) -> usize {
    let n = m.dim();
    let mut a = m.clone();
    let mut col_norms: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| a[(i, j)].norm_sqr()).sum::<f64>())
        .collect();
    let mut rank = 0;
    for k in 0..n {
        // Pivot: bring the column with the largest remaining norm to position k.
        let (pivot, &norm2) = col_norms
            .iter()
            .enumerate()
            .skip(k)
            .max_by(|x, y| x.1.partial_cmp(y.1).unwrap())
            .unwrap();
        if norm2.sqrt() <= threshold {
            break;
        }
        if pivot != k {
            for i in 0..n {
                let tmp = a[(i, k)];
                a[(i, k)] = a[(i, pivot)];
                a[(i, pivot)] = tmp;
            }
            col_norms.swap(k, pivot);
        }
        // Householder reflector for column k, rows k..n.
        let alpha = {
            let x0 = a[(k, k)];
            let norm: f64 = (k..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>();
            let norm = norm.sqrt();
            if x0.norm() == 0.0 {
                Complex64::new(-norm, 0.0)
            } else {
                -(x0 / x0.norm()) * norm
            }
        };
        let mut v: Vec<Complex64> = (k..n).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 > 0.0 {
            for j in k..n {
                let dot: Complex64 =
                    (k..n).map(|i| v[i - k].conj() * a[(i, j)]).sum();
                let f = dot * (2.0 / vnorm2);
                for i in k..n {
                    let sub = f * v[i - k];
                    a[(i, j)] -= sub;
                }
            }
        }
        if a[(k, k)].norm() > threshold {
            rank += 1;
        } else {
            break;
        }
        for (j, cn) in col_norms.iter_mut().enumerate().skip(k + 1) {
            *cn -= a[(k, j)].norm_sqr();
            if *cn < 0.0 {
                *cn = 0.0;
            }
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cmat(rows: &[&[f64]]) -> ComplexMatrix {
        let v: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        ComplexMatrix::from_rows(&v)
    }

    #[test]
    fn spectral_norm_identity_is_one() {
        assert!((spectral_norm(&ComplexMatrix::identity(3)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_norm_diagonal() {
        let m = cmat(&[&[3.0, 0.0], &[0.0, -5.0]]);
        assert!((spectral_norm(&m) - 5.0).abs() < 1e-10);
    }

    #[test]
    fn spectral_norm_zero() {
        assert_eq!(spectral_norm(&ComplexMatrix::zeros(4)), 0.0);
    }

    #[test]
    fn geometric_multiplicity_identity() {
        let id = ComplexMatrix::identity(5);
        assert_eq!(geometric_multiplicity(&id, Complex64::new(1.0, 0.0), 1e-6), 5);
    }

    #[test]
    fn geometric_multiplicity_defective_block() {
        // [[-1, 0], [b, -1]] with b ≠ 0 has a defective eigenvalue at -1.
        let m = cmat(&[&[-1.0, 0.0], &[std::f64::consts::PI, -1.0]]);
        assert_eq!(geometric_multiplicity(&m, Complex64::new(-1.0, 0.0), 1e-6), 1);
    }

    #[test]
    fn geometric_multiplicity_minus_identity() {
        let m = cmat(&[&[-1.0, 0.0], &[0.0, -1.0]]);
        assert_eq!(geometric_multiplicity(&m, Complex64::new(-1.0, 0.0), 1e-6), 2);
    }

    #[test]
    fn negative_axis_band() {
        assert!(on_negative_axis(Complex64::new(-1.0, 0.0)));
        assert!(on_negative_axis(Complex64::new(-1.0, 1e-10)));
        assert!(!on_negative_axis(Complex64::new(-1.0, 1e-3)));
        assert!(!on_negative_axis(Complex64::new(1.0, 0.0)));
    }
}
