//! Partial-pivot LU factorization for the complex dense kernels.

use num_complex::Complex64;

use super::{ComplexMatrix, LinalgError, LinalgResult};

pub struct LuDecomposition {
    lu: ComplexMatrix,
    perm: Vec<usize>,
    sign: f64,
    /// Smallest pivot magnitude seen during elimination.
    min_pivot: f64,
}

impl LuDecomposition {
    /// Factor `PA = LU`. Fails only on exact zero pivots; callers that can
    /// tolerate near-singularity should inspect `min_pivot`.
    pub fn new(m: &ComplexMatrix) -> LinalgResult<Self> {
        Self::with_pivot_floor(m, 0.0)
    }

    /// Factor with a pivot floor: pivots smaller in magnitude than `floor`
    /// are replaced by `floor` (keeping their phase). Inverse iteration uses
    /// this to solve against nearly singular shifts.
    pub fn with_pivot_floor(m: &ComplexMatrix, floor: f64) -> LinalgResult<Self> {
        let n = m.dim();
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let (pivot_row, pivot_mag) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            if pivot_mag == 0.0 && floor == 0.0 {
                return Err(LinalgError::Singular);
            }
            if pivot_row != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(pivot_row, j)];
                    lu[(pivot_row, j)] = tmp;
                }
                perm.swap(k, pivot_row);
                sign = -sign;
            }
            if lu[(k, k)].norm() < floor {
                let z = lu[(k, k)];
                lu[(k, k)] = if z.norm() == 0.0 {
                    Complex64::new(floor, 0.0)
                } else {
                    z / z.norm() * floor
                };
            }
            let pivot = lu[(k, k)];
            min_pivot = min_pivot.min(pivot.norm());
            for i in (k + 1)..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                if factor.norm() != 0.0 {
                    for j in (k + 1)..n {
                        let sub = factor * lu[(k, j)];
                        lu[(i, j)] -= sub;
                    }
                }
            }
        }
        Ok(LuDecomposition { lu, perm, sign, min_pivot })
    }

    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    pub fn determinant(&self) -> Complex64 {
        let mut det = Complex64::new(self.sign, 0.0);
        for i in 0..self.lu.dim() {
            det *= self.lu[(i, i)];
        }
        det
    }

    pub fn solve_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        // Forward substitution with unit lower-triangular L.
        for i in 1..n {
            for j in 0..i {
                let sub = self.lu[(i, j)] * x[j];
                x[i] -= sub;
            }
        }
        // Back substitution with U.
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let sub = self.lu[(i, j)] * x[j];
                x[i] -= sub;
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }

    pub fn solve_mat(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let n = self.lu.dim();
        assert_eq!(b.dim(), n);
        let mut out = ComplexMatrix::zeros(n);
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = b[(i, j)];
            }
            let x = self.solve_vec(&col);
            for i in 0..n {
                out[(i, j)] = x[i];
            }
        }
        out
    }

    pub fn inverse(&self) -> ComplexMatrix {
        self.solve_mat(&ComplexMatrix::identity(self.lu.dim()))
    }
}

/// Determinant via LU; zero for exactly singular input.
pub fn determinant(m: &ComplexMatrix) -> Complex64 {
    match LuDecomposition::new(m) {
        Ok(lu) => lu.determinant(),
        Err(_) => Complex64::new(0.0, 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_roundtrip() {
        let m = ComplexMatrix::from_rows(&[
            vec![Complex64::new(2.0, 0.0), Complex64::new(1.0, -1.0)],
            vec![Complex64::new(0.5, 0.2), Complex64::new(-3.0, 0.0)],
        ]);
        let lu = LuDecomposition::new(&m).unwrap();
        let b = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)];
        let x = lu.solve_vec(&b);
        // Residual of M x - b.
        for i in 0..2 {
            let mut r = -b[i];
            for j in 0..2 {
                r += m[(i, j)] * x[j];
            }
            assert!(r.norm() < 1e-12);
        }
    }

    #[test]
    fn determinant_of_identity() {
        let det = determinant(&ComplexMatrix::identity(4));
        assert!((det - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn singular_rejected() {
        let m = ComplexMatrix::zeros(3);
        assert!(LuDecomposition::new(&m).is_err());
    }
}
