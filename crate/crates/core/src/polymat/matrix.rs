//! Square matrices of exact rational polynomials.

use num_traits::Zero;

use super::poly::Poly;
use super::rational::{rational_to_f64, Rational};
use super::{PolymatError, PolymatResult, DEFAULT_MAX_DEGREE};
use crate::linalg::RealMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PolyMatrix {
    dim: usize,
    entries: Vec<Poly>,
}

impl PolyMatrix {
    pub fn zeros(dim: usize) -> Self {
        PolyMatrix { dim, entries: vec![Poly::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Poly::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Poly>>) -> Self {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            assert_eq!(row.len(), dim, "rows must form a square matrix");
            entries.extend(row);
        }
        PolyMatrix { dim, entries }
    }

    /// Constant matrix from rational entries.
    pub fn from_constant_rows(rows: &[Vec<Rational>]) -> Self {
        PolyMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|c| Poly::constant(c.clone())).collect())
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.dim + j]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Poly::is_zero)
    }

    /// Largest entry degree, or None when the matrix is zero.
    pub fn max_degree(&self) -> Option<usize> {
        self.entries.iter().filter_map(Poly::degree).max()
    }

    /// True when every entry is a constant polynomial.
    pub fn is_constant(&self) -> bool {
        self.entries.iter().all(|p| p.degree().map_or(true, |d| d == 0))
    }

    /// Require constant entries, reporting the first offender.
    pub fn require_constant(&self) -> PolymatResult<()> {
        for i in 0..self.dim {
            for j in 0..self.dim {
                if let Some(d) = self.entry(i, j).degree() {
                    if d > 0 {
                        return Err(PolymatError::NonConstant { row: i, col: j, degree: d });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &PolyMatrix) -> PolymatResult<PolyMatrix> {
        self.check_dim(other)?;
        Ok(PolyMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &PolyMatrix) -> PolymatResult<PolyMatrix> {
        self.check_dim(other)?;
        Ok(PolyMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn neg(&self) -> PolyMatrix {
        PolyMatrix { dim: self.dim, entries: self.entries.iter().map(|p| -p).collect() }
    }

    pub fn scale(&self, c: &Rational) -> PolyMatrix {
        PolyMatrix { dim: self.dim, entries: self.entries.iter().map(|p| p.scale(c)).collect() }
    }

    pub fn matmul(&self, other: &PolyMatrix) -> PolymatResult<PolyMatrix> {
        self.matmul_bounded(other, DEFAULT_MAX_DEGREE)
    }

    /// Exact product with a degree guard checked before any work is done.
    pub fn matmul_bounded(
        &self,
        other: &PolyMatrix,
        max_degree: usize,
    ) -> PolymatResult<PolyMatrix> {
        self.check_dim(other)?;
        let bound = match (self.max_degree(), other.max_degree()) {
            (Some(a), Some(b)) => a + b,
            _ => 0,
        };
        if bound > max_degree {
            return Err(PolymatError::DegreeOverflow { degree: bound, limit: max_degree });
        }
        let n = self.dim;
        let mut out = PolyMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.entry(i, k);
                if aik.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let bkj = other.entry(k, j);
                    if bkj.is_zero() {
                        continue;
                    }
                    let prod = aik * bkj;
                    out[(i, j)] = &out[(i, j)] + &prod;
                }
            }
        }
        Ok(out)
    }

    /// `[A, B] = AB − BA`, exact.
    pub fn commutator(&self, other: &PolyMatrix) -> PolymatResult<PolyMatrix> {
        self.commutator_bounded(other, DEFAULT_MAX_DEGREE)
    }

    pub fn commutator_bounded(
        &self,
        other: &PolyMatrix,
        max_degree: usize,
    ) -> PolymatResult<PolyMatrix> {
        let ab = self.matmul_bounded(other, max_degree)?;
        let ba = other.matmul_bounded(self, max_degree)?;
        ab.sub(&ba)
    }

    /// Entrywise ∫₀ᵗ (each entry's antiderivative with zero constant term).
    pub fn antiderivative(&self) -> PolyMatrix {
        PolyMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(Poly::antiderivative).collect(),
        }
    }

    pub fn derivative(&self) -> PolyMatrix {
        PolyMatrix { dim: self.dim, entries: self.entries.iter().map(Poly::derivative).collect() }
    }

    /// Exact evaluation: a constant matrix of the entry values at t.
    pub fn eval_rational(&self, t: &Rational) -> PolyMatrix {
        PolyMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|p| {
                    let v = p.eval_rational(t);
                    if v.is_zero() {
                        Poly::zero()
                    } else {
                        Poly::constant(v)
                    }
                })
                .collect(),
        }
    }

    pub fn eval_f64(&self, t: f64) -> RealMatrix {
        let mut out = RealMatrix::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(i, j)] = self.entry(i, j).eval_f64(t);
            }
        }
        out
    }

    /// Rational value of a constant matrix entry.
    pub fn constant_entry(&self, i: usize, j: usize) -> Rational {
        self.entry(i, j).coeff(0)
    }

    /// Constant matrix converted to floats.
    pub fn constant_to_real(&self) -> RealMatrix {
        let mut out = RealMatrix::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(i, j)] = rational_to_f64(&self.entry(i, j).coeff(0));
            }
        }
        out
    }

    fn check_dim(&self, other: &PolyMatrix) -> PolymatResult<()> {
        if self.dim != other.dim {
            return Err(PolymatError::DimensionMismatch { left: self.dim, right: other.dim });
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for PolyMatrix {
    type Output = Poly;
    fn index(&self, (i, j): (usize, usize)) -> &Poly {
        &self.entries[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for PolyMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Poly {
        &mut self.entries[i * self.dim + j]
    }
}

#[cfg(test)]
mod tests {
    use super::super::rational::rat;
    use super::*;

    fn rotation_generator() -> PolyMatrix {
        PolyMatrix::from_constant_rows(&[
            vec![rat(0, 1), rat(1, 1)],
            vec![rat(-1, 1), rat(0, 1)],
        ])
    }

    #[test]
    fn identity_is_neutral() {
        let a = PolyMatrix::from_rows(vec![
            vec![Poly::monomial(rat(2, 1), 0), Poly::monomial(rat(1, 1), 1)],
            vec![Poly::zero(), Poly::monomial(rat(-1, 1), 0)],
        ]);
        let id = PolyMatrix::identity(2);
        assert_eq!(a.matmul(&id).unwrap(), a);
        assert_eq!(id.matmul(&a).unwrap(), a);
    }

    #[test]
    fn rotation_generator_squares_to_minus_identity() {
        let j = rotation_generator();
        let sq = j.matmul(&j).unwrap();
        let minus_id = PolyMatrix::identity(2).neg();
        assert_eq!(sq, minus_id);
    }

    #[test]
    fn commutator_with_self_vanishes() {
        let a = PolyMatrix::from_rows(vec![
            vec![Poly::monomial(rat(1, 2), 1), Poly::monomial(rat(-1, 3), 2)],
            vec![Poly::one(), Poly::monomial(rat(5, 1), 0)],
        ]);
        assert!(a.commutator(&a).unwrap().is_zero());
    }

    #[test]
    fn commutator_antisymmetry() {
        let a = PolyMatrix::from_constant_rows(&[
            vec![rat(1, 1), rat(2, 1)],
            vec![rat(0, 1), rat(-1, 3)],
        ]);
        let b = PolyMatrix::from_rows(vec![
            vec![Poly::monomial(rat(1, 1), 1), Poly::zero()],
            vec![Poly::one(), Poly::monomial(rat(2, 5), 2)],
        ]);
        let ab = a.commutator(&b).unwrap();
        let ba = b.commutator(&a).unwrap();
        assert!(ab.add(&ba).unwrap().is_zero());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let a = PolyMatrix::identity(2);
        let b = PolyMatrix::identity(3);
        assert!(matches!(
            a.matmul(&b),
            Err(PolymatError::DimensionMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn degree_guard_trips() {
        let a = PolyMatrix::from_rows(vec![vec![Poly::monomial(rat(1, 1), 300)]]);
        assert!(matches!(
            a.matmul(&a),
            Err(PolymatError::DegreeOverflow { degree: 600, .. })
        ));
        assert!(a.matmul_bounded(&a, 600).is_ok());
    }

    #[test]
    fn derivative_undoes_antiderivative() {
        let a = PolyMatrix::from_rows(vec![
            vec![Poly::monomial(rat(3, 4), 2), Poly::one()],
            vec![Poly::monomial(rat(-2, 7), 5), Poly::zero()],
        ]);
        assert_eq!(a.antiderivative().derivative(), a);
        assert!(a.antiderivative().eval_rational(&rat(0, 1)).is_zero());
    }
}
