//! Piecewise-polynomial matrix functions with exact rational breakpoints.
//!
//! Polynomials are stored in the global time variable, so restricting a
//! segment to a finer partition is a no-op and binary operations reduce to
//! zipping segments over a common refinement of the breakpoints.


use super::matrix::PolyMatrix;
use super::rational::{rational_to_f64, Rational};
use super::{PolymatError, PolymatResult, DEFAULT_MAX_DEGREE};
use crate::linalg::RealMatrix;

#[derive(Debug, Clone)]
pub struct PiecewisePolyMatrix {
    /// Strictly increasing t₀ < t₁ < … < t_m; segment k is valid on
    /// [t_k, t_{k+1}).
    breakpoints: Vec<Rational>,
    segments: Vec<PolyMatrix>,
}

impl PiecewisePolyMatrix {
    pub fn new(
        breakpoints: Vec<Rational>,
        segments: Vec<PolyMatrix>,
    ) -> PolymatResult<Self> {
        if segments.is_empty() || breakpoints.len() != segments.len() + 1 {
            return Err(PolymatError::InvalidBreakpoints);
        }
        for w in breakpoints.windows(2) {
            if w[0] >= w[1] {
                return Err(PolymatError::InvalidBreakpoints);
            }
        }
        let dim = segments[0].dim();
        for s in &segments {
            if s.dim() != dim {
                return Err(PolymatError::DimensionMismatch { left: dim, right: s.dim() });
            }
        }
        Ok(PiecewisePolyMatrix { breakpoints, segments })
    }

    /// One segment covering [t_lo, t_hi).
    pub fn single(matrix: PolyMatrix, t_lo: Rational, t_hi: Rational) -> PolymatResult<Self> {
        Self::new(vec![t_lo, t_hi], vec![matrix])
    }

    pub fn dim(&self) -> usize {
        self.segments[0].dim()
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn segments(&self) -> &[PolyMatrix] {
        &self.segments
    }

    pub fn domain(&self) -> (&Rational, &Rational) {
        (self.breakpoints.first().unwrap(), self.breakpoints.last().unwrap())
    }

    pub fn domain_f64(&self) -> (f64, f64) {
        let (lo, hi) = self.domain();
        (rational_to_f64(lo), rational_to_f64(hi))
    }

    pub fn is_zero(&self) -> bool {
        self.segments.iter().all(PolyMatrix::is_zero)
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.segments.iter().filter_map(PolyMatrix::max_degree).max()
    }

    /// True when the function is a single polynomial segment.
    pub fn is_single_segment(&self) -> bool {
        self.segments.len() == 1
    }

    /// Merge breakpoint grids with another function over the same domain.
    fn refined_breakpoints(&self, other: &Self) -> PolymatResult<Vec<Rational>> {
        let (alo, ahi) = self.domain();
        let (blo, bhi) = other.domain();
        if alo != blo || ahi != bhi {
            return Err(PolymatError::DomainMismatch {
                left_lo: alo.to_string(),
                left_hi: ahi.to_string(),
                right_lo: blo.to_string(),
                right_hi: bhi.to_string(),
            });
        }
        let mut merged: Vec<Rational> =
            self.breakpoints.iter().chain(&other.breakpoints).cloned().collect();
        merged.sort();
        merged.dedup();
        Ok(merged)
    }

    /// Restrict to a refinement of the current breakpoints; polynomials are
    /// global in t so each finer segment reuses its covering segment.
    fn refine_to(&self, breakpoints: &[Rational]) -> Self {
        let mut segments = Vec::with_capacity(breakpoints.len() - 1);
        for w in breakpoints.windows(2) {
            let idx = self.segment_index_rational(&w[0]);
            segments.push(self.segments[idx].clone());
        }
        PiecewisePolyMatrix { breakpoints: breakpoints.to_vec(), segments }
    }

    fn segment_index_rational(&self, t: &Rational) -> usize {
        let m = self.segments.len();
        for (k, w) in self.breakpoints.windows(2).enumerate() {
            if *t < w[1] {
                return k;
            }
        }
        m - 1
    }

    fn zip_with(
        &self,
        other: &Self,
        mut op: impl FnMut(&PolyMatrix, &PolyMatrix) -> PolymatResult<PolyMatrix>,
    ) -> PolymatResult<Self> {
        let grid = self.refined_breakpoints(other)?;
        let a = self.refine_to(&grid);
        let b = other.refine_to(&grid);
        let mut segments = Vec::with_capacity(a.segments.len());
        for (x, y) in a.segments.iter().zip(&b.segments) {
            segments.push(op(x, y)?);
        }
        Ok(PiecewisePolyMatrix { breakpoints: grid, segments })
    }

    pub fn add(&self, other: &Self) -> PolymatResult<Self> {
        self.zip_with(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> PolymatResult<Self> {
        self.zip_with(other, |a, b| a.sub(b))
    }

    pub fn neg(&self) -> Self {
        PiecewisePolyMatrix {
            breakpoints: self.breakpoints.clone(),
            segments: self.segments.iter().map(PolyMatrix::neg).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        PiecewisePolyMatrix {
            breakpoints: self.breakpoints.clone(),
            segments: self.segments.iter().map(|s| s.scale(c)).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> PolymatResult<Self> {
        self.matmul_bounded(other, DEFAULT_MAX_DEGREE)
    }

    pub fn matmul_bounded(&self, other: &Self, max_degree: usize) -> PolymatResult<Self> {
        self.zip_with(other, |a, b| a.matmul_bounded(b, max_degree))
    }

    pub fn commutator(&self, other: &Self) -> PolymatResult<Self> {
        self.commutator_bounded(other, DEFAULT_MAX_DEGREE)
    }

    pub fn commutator_bounded(&self, other: &Self, max_degree: usize) -> PolymatResult<Self> {
        self.zip_with(other, |a, b| a.commutator_bounded(b, max_degree))
    }

    /// ∫ from the left end of the domain, continuous across breakpoints:
    /// each segment's antiderivative is offset so it matches the
    /// accumulated value at its left breakpoint. The result vanishes at t₀.
    pub fn antiderivative(&self) -> Self {
        let dim = self.dim();
        let mut segments = Vec::with_capacity(self.segments.len());
        let mut accumulated = PolyMatrix::zeros(dim);
        for (k, seg) in self.segments.iter().enumerate() {
            let raw = seg.antiderivative();
            let left = &self.breakpoints[k];
            let at_left = raw.eval_rational(left);
            // F_k(t) = raw(t) − raw(t_k) + accumulated(t_k)
            let offset = accumulated.sub(&at_left).expect("same dim");
            let fixed = raw.add(&offset).expect("same dim");
            let right = &self.breakpoints[k + 1];
            accumulated = fixed.eval_rational(right);
            segments.push(fixed);
        }
        PiecewisePolyMatrix { breakpoints: self.breakpoints.clone(), segments }
    }

    /// Segmentwise derivative (test support and residual checks).
    pub fn derivative(&self) -> Self {
        PiecewisePolyMatrix {
            breakpoints: self.breakpoints.clone(),
            segments: self.segments.iter().map(PolyMatrix::derivative).collect(),
        }
    }

    fn segment_index_f64(&self, t: f64) -> PolymatResult<usize> {
        let (lo, hi) = self.domain_f64();
        if !(t >= lo && t <= hi) {
            return Err(PolymatError::OutOfDomain { t, lo, hi });
        }
        let m = self.segments.len();
        for k in 0..m {
            let right = rational_to_f64(&self.breakpoints[k + 1]);
            if t < right {
                return Ok(k);
            }
        }
        Ok(m - 1)
    }

    /// Float evaluation of the active segment. At an interior breakpoint the
    /// right segment is used; at the final breakpoint the last segment.
    pub fn evaluate(&self, t: f64) -> PolymatResult<RealMatrix> {
        let k = self.segment_index_f64(t)?;
        Ok(self.segments[k].eval_f64(t))
    }

    /// Exact evaluation at a rational time; returns a constant matrix.
    pub fn evaluate_exact(&self, t: &Rational) -> PolymatResult<PolyMatrix> {
        let (lo, hi) = self.domain();
        if t < lo || t > hi {
            return Err(PolymatError::OutOfDomain {
                t: rational_to_f64(t),
                lo: rational_to_f64(lo),
                hi: rational_to_f64(hi),
            });
        }
        let k = self.segment_index_rational(t);
        Ok(self.segments[k].eval_rational(t))
    }
}

/// Equality as functions: compare segmentwise over the common refinement.
impl PartialEq for PiecewisePolyMatrix {
    fn eq(&self, other: &Self) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let grid = match self.refined_breakpoints(other) {
            Ok(g) => g,
            Err(_) => return false,
        };
        let a = self.refine_to(&grid);
        let b = other.refine_to(&grid);
        a.segments == b.segments
    }
}

impl Eq for PiecewisePolyMatrix {}

#[cfg(test)]
mod tests {
    use super::super::poly::Poly;
    use super::super::rational::rat;
    use super::*;

    fn constant(dim: usize, value: i64) -> PolyMatrix {
        PolyMatrix::identity(dim).scale(&rat(value, 1))
    }

    fn two_segment() -> PiecewisePolyMatrix {
        // A = 2I on [0,1), -I on [1,2]
        PiecewisePolyMatrix::new(
            vec![rat(0, 1), rat(1, 1), rat(2, 1)],
            vec![constant(2, 2), constant(2, -1)],
        )
        .unwrap()
    }

    #[test]
    fn breakpoints_must_increase() {
        assert!(PiecewisePolyMatrix::new(
            vec![rat(0, 1), rat(0, 1)],
            vec![constant(2, 1)]
        )
        .is_err());
        assert!(PiecewisePolyMatrix::new(vec![rat(0, 1)], vec![]).is_err());
    }

    #[test]
    fn constant_antiderivative_is_linear() {
        let a = PiecewisePolyMatrix::single(constant(2, 3), rat(0, 1), rat(1, 1)).unwrap();
        let f = a.antiderivative();
        let expected = PolyMatrix::from_rows(vec![
            vec![Poly::monomial(rat(3, 1), 1), Poly::zero()],
            vec![Poly::zero(), Poly::monomial(rat(3, 1), 1)],
        ]);
        assert_eq!(f.segments()[0], expected);
    }

    #[test]
    fn antiderivative_is_continuous_and_anchored() {
        let f = two_segment().antiderivative();
        assert!(f.evaluate_exact(&rat(0, 1)).unwrap().is_zero());
        // Left and right limits at the interior breakpoint agree exactly.
        let left = f.segments()[0].eval_rational(&rat(1, 1));
        let right = f.segments()[1].eval_rational(&rat(1, 1));
        assert_eq!(left, right);
        // ∫₀² = 2·(2I·1) + (-I)·1 = ... = I (2 - 1)
        let total = f.evaluate_exact(&rat(2, 1)).unwrap();
        assert_eq!(total, constant(2, 1));
    }

    #[test]
    fn evaluate_uses_right_segment_at_breakpoint() {
        let a = two_segment();
        let at_1 = a.evaluate(1.0).unwrap();
        assert_eq!(at_1[(0, 0)], -1.0);
        let at_end = a.evaluate(2.0).unwrap();
        assert_eq!(at_end[(0, 0)], -1.0);
        assert!(a.evaluate(2.5).is_err());
        assert!(a.evaluate(-0.1).is_err());
    }

    #[test]
    fn function_equality_ignores_redundant_breakpoints() {
        let one = PiecewisePolyMatrix::single(constant(2, 5), rat(0, 1), rat(2, 1)).unwrap();
        let split = PiecewisePolyMatrix::new(
            vec![rat(0, 1), rat(1, 2), rat(2, 1)],
            vec![constant(2, 5), constant(2, 5)],
        )
        .unwrap();
        assert_eq!(one, split);
    }

    #[test]
    fn derivative_undoes_antiderivative_segmentwise() {
        let a = two_segment();
        assert_eq!(a.antiderivative().derivative(), a);
    }

    #[test]
    fn domain_mismatch_rejected() {
        let a = PiecewisePolyMatrix::single(constant(2, 1), rat(0, 1), rat(1, 1)).unwrap();
        let b = PiecewisePolyMatrix::single(constant(2, 1), rat(0, 1), rat(2, 1)).unwrap();
        assert!(matches!(a.add(&b), Err(PolymatError::DomainMismatch { .. })));
    }
}
