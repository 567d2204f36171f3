//! Fundamental solutions Y(t;κ) of Y' = κ A(t) Y and the action integral
//! γ(t) = ∫₀ᵗ ‖A(τ)‖₂ dτ for any evaluable matrix function A.

pub mod corpus;
mod rk;

pub use rk::StepStats;

use num_complex::Complex64;
use std::sync::Arc;
use thiserror::Error;

use crate::linalg::{spectral_norm_real, ComplexMatrix, LinalgError, RealMatrix};
use crate::polymat::{rational_to_f64, PiecewisePolyMatrix, PolymatError};

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum OdeError {
    #[error("t = {t} outside the domain [0, {domain_end}]")]
    OutOfDomain { t: f64, domain_end: f64 },
    #[error("step size underflow at t = {t} (non-smooth right-hand side?)")]
    StepSizeUnderflow { t: f64 },
    #[error("step limit exceeded")]
    StepLimitExceeded,
    #[error("initial vector must be nonzero")]
    ZeroInitialVector,
    #[error(transparent)]
    Polymat(#[from] PolymatError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type OdeResult<T> = Result<T, OdeError>;

type EvalClosure = Arc<dyn Fn(f64) -> RealMatrix + Send + Sync>;

enum Evaluator {
    Piecewise(PiecewisePolyMatrix),
    Closure(EvalClosure),
}

/// A time-dependent real coefficient matrix on [0, T]: either an exact
/// piecewise-polynomial or a registered closed form.
pub struct MatrixFunction {
    name: String,
    description: String,
    dim: usize,
    domain_end: f64,
    evaluator: Evaluator,
}

impl std::fmt::Debug for MatrixFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MatrixFunction")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("domain_end", &self.domain_end)
            .finish()
    }
}

impl MatrixFunction {
    pub fn from_piecewise(name: impl Into<String>, matrix: PiecewisePolyMatrix) -> Self {
        let (_, hi) = matrix.domain_f64();
        MatrixFunction {
            name: name.into(),
            description: String::new(),
            dim: matrix.dim(),
            domain_end: hi,
            evaluator: Evaluator::Piecewise(matrix),
        }
    }

    pub fn from_closure(
        name: impl Into<String>,
        dim: usize,
        domain_end: f64,
        f: impl Fn(f64) -> RealMatrix + Send + Sync + 'static,
    ) -> Self {
        MatrixFunction {
            name: name.into(),
            description: String::new(),
            dim,
            domain_end,
            evaluator: Evaluator::Closure(Arc::new(f)),
        }
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = description.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain_end(&self) -> f64 {
        self.domain_end
    }

    /// The exact piecewise-polynomial backing, when there is one.
    pub fn piecewise(&self) -> Option<&PiecewisePolyMatrix> {
        match &self.evaluator {
            Evaluator::Piecewise(p) => Some(p),
            Evaluator::Closure(_) => None,
        }
    }

    /// Interior breakpoints; integrator steps never straddle these.
    pub fn interior_breakpoints(&self) -> Vec<f64> {
        match &self.evaluator {
            Evaluator::Piecewise(p) => {
                let bps = p.breakpoints();
                bps[1..bps.len() - 1].iter().map(rational_to_f64).collect()
            }
            Evaluator::Closure(_) => Vec::new(),
        }
    }

    pub fn evaluate(&self, t: f64) -> OdeResult<RealMatrix> {
        if !(0.0..=self.domain_end).contains(&t) {
            return Err(OdeError::OutOfDomain { t, domain_end: self.domain_end });
        }
        match &self.evaluator {
            Evaluator::Piecewise(p) => Ok(p.evaluate(t)?),
            Evaluator::Closure(f) => Ok(f(t)),
        }
    }

    /// Evaluate inside a fixed breakpoint segment. At the segment's right
    /// endpoint this extends the segment polynomial rather than switching to
    /// the next segment, which keeps integrator stages single-sided.
    fn evaluate_on_segment(&self, segment: usize, t: f64) -> RealMatrix {
        match &self.evaluator {
            Evaluator::Piecewise(p) => p.segments()[segment].eval_f64(t),
            Evaluator::Closure(f) => f(t),
        }
    }

    /// Segment boundaries covering [0, t_end].
    fn segment_grid(&self, t_end: f64) -> Vec<(usize, f64, f64)> {
        let mut cuts: Vec<f64> = vec![0.0];
        for bp in self.interior_breakpoints() {
            if bp > 0.0 && bp < t_end {
                cuts.push(bp);
            }
        }
        cuts.push(t_end);
        let segment_of = |t: f64| -> usize {
            match &self.evaluator {
                Evaluator::Closure(_) => 0,
                Evaluator::Piecewise(p) => {
                    let bps = p.breakpoints();
                    let mut idx = 0;
                    for k in 0..p.segments().len() {
                        if t >= rational_to_f64(&bps[k]) {
                            idx = k;
                        }
                    }
                    idx
                }
            }
        };
        cuts.windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| (segment_of(w[0]), w[0], w[1]))
            .collect()
    }
}

/// Y(t;κ) samples along the integration grid.
#[derive(Debug, Clone)]
pub struct FundamentalSolution {
    pub kappa: Complex64,
    pub grid: Vec<f64>,
    pub values: Vec<ComplexMatrix>,
    pub stats: StepStats,
}

fn matrix_rhs<'a>(
    a: &'a MatrixFunction,
    segment: usize,
    kappa: Complex64,
) -> impl FnMut(f64, &[Complex64], &mut [Complex64]) + 'a {
    let dim = a.dim();
    move |t: f64, y: &[Complex64], out: &mut [Complex64]| {
        let at = a.evaluate_on_segment(segment, t);
        // out = κ · A(t) · Y, flattened row-major.
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..dim {
                    let aik = at[(i, k)];
                    if aik != 0.0 {
                        acc += aik * y[k * dim + j];
                    }
                }
                out[i * dim + j] = kappa * acc;
            }
        }
    }
}

/// Integrate Y' = κ A(t) Y, Y(0) = Id, recording Y at the requested times
/// (strictly increasing, within the domain). Time 0 is allowed and maps to
/// the identity.
pub fn solve_at(
    a: &MatrixFunction,
    kappa: Complex64,
    times: &[f64],
    tol: f64,
) -> OdeResult<Vec<ComplexMatrix>> {
    solve_at_with_stats(a, kappa, times, tol).map(|(values, _)| values)
}

pub fn solve_at_with_stats(
    a: &MatrixFunction,
    kappa: Complex64,
    times: &[f64],
    tol: f64,
) -> OdeResult<(Vec<ComplexMatrix>, StepStats)> {
    let dim = a.dim();
    let t_end = match times.last() {
        Some(&t) => t,
        None => return Ok((Vec::new(), StepStats::default())),
    };
    if t_end > a.domain_end * (1.0 + 1e-12) || times[0] < 0.0 {
        return Err(OdeError::OutOfDomain { t: t_end, domain_end: a.domain_end });
    }
    let mut results: Vec<ComplexMatrix> = Vec::with_capacity(times.len());
    let mut y: Vec<Complex64> = ComplexMatrix::identity(dim).data().to_vec();
    let mut stats = StepStats::default();
    let mut time_idx = 0;
    while time_idx < times.len() && times[time_idx] <= 0.0 {
        results.push(ComplexMatrix::identity(dim));
        time_idx += 1;
    }
    for (segment, lo, hi) in a.segment_grid(t_end.min(a.domain_end)) {
        let mut checkpoints: Vec<f64> = Vec::new();
        while time_idx < times.len() && times[time_idx] <= hi {
            checkpoints.push(times[time_idx]);
            time_idx += 1;
        }
        let record_upto = checkpoints.len();
        if checkpoints.last().map_or(true, |&t| t < hi) {
            checkpoints.push(hi);
        }
        let mut rhs = matrix_rhs(a, segment, kappa);
        let (outputs, seg_stats) = rk::integrate(&mut rhs, lo, &y, &checkpoints, tol)?;
        y = outputs.last().unwrap().clone();
        for state in outputs.into_iter().take(record_upto) {
            results.push(ComplexMatrix::from_flat(dim, state));
        }
        stats.accepted += seg_stats.accepted;
        stats.rejected += seg_stats.rejected;
        stats.max_error_estimate = stats.max_error_estimate.max(seg_stats.max_error_estimate);
    }
    Ok((results, stats))
}

/// Fundamental solution at `t_end` with the sample grid it was computed on.
pub fn fundamental_solution(
    a: &MatrixFunction,
    kappa: Complex64,
    t_end: f64,
    tol: f64,
) -> OdeResult<FundamentalSolution> {
    if !(0.0..=a.domain_end * (1.0 + 1e-12)).contains(&t_end) {
        return Err(OdeError::OutOfDomain { t: t_end, domain_end: a.domain_end });
    }
    // Sample on a modest uniform grid aligned with breakpoints; the final
    // entry is Y(t_end).
    let samples = 32;
    let mut grid: Vec<f64> = (0..=samples).map(|k| t_end * k as f64 / samples as f64).collect();
    for bp in a.interior_breakpoints() {
        if bp > 0.0 && bp < t_end {
            grid.push(bp);
        }
    }
    grid.sort_by(|x, y| x.partial_cmp(y).unwrap());
    grid.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
    let (values, stats) = solve_at_with_stats(a, kappa, &grid, tol)?;
    Ok(FundamentalSolution { kappa, grid, values, stats })
}

/// Continue a solution from (t_from, y_from) to t_to > t_from.
pub fn propagate(
    a: &MatrixFunction,
    kappa: Complex64,
    t_from: f64,
    y_from: &ComplexMatrix,
    t_to: f64,
    tol: f64,
) -> OdeResult<ComplexMatrix> {
    if t_to <= t_from {
        return Ok(y_from.clone());
    }
    if t_to > a.domain_end * (1.0 + 1e-12) {
        return Err(OdeError::OutOfDomain { t: t_to, domain_end: a.domain_end });
    }
    let dim = a.dim();
    let mut y: Vec<Complex64> = y_from.data().to_vec();
    for (segment, lo, hi) in a.segment_grid(t_to) {
        if hi <= t_from {
            continue;
        }
        let start = lo.max(t_from);
        let mut rhs = matrix_rhs(a, segment, kappa);
        let (outputs, _) = rk::integrate(&mut rhs, start, &y, &[hi], tol)?;
        y = outputs.into_iter().next().unwrap();
    }
    Ok(ComplexMatrix::from_flat(dim, y))
}

/// γ(t) = ∫₀ᵗ ‖A(τ)‖₂ dτ by adaptive Simpson quadrature aligned to the
/// breakpoints of A.
pub fn action_norm(a: &MatrixFunction, t: f64, tol: f64) -> OdeResult<f64> {
    if !(0.0..=a.domain_end * (1.0 + 1e-12)).contains(&t) {
        return Err(OdeError::OutOfDomain { t, domain_end: a.domain_end });
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    let segments = a.segment_grid(t);
    let per_segment_tol = tol / segments.len() as f64;
    for (segment, lo, hi) in segments {
        let f = |tau: f64| spectral_norm_real(&a.evaluate_on_segment(segment, tau));
        total += adaptive_simpson(&f, lo, hi, per_segment_tol);
    }
    Ok(total)
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    let mid = 0.5 * (lo + hi);
    let flo = f(lo);
    let fmid = f(mid);
    let fhi = f(hi);
    let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    simpson_recurse(f, lo, hi, flo, fmid, fhi, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse(
    f: &impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    flo: f64,
    fmid: f64,
    fhi: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let mid = 0.5 * (lo + hi);
    let lmid = 0.5 * (lo + mid);
    let rmid = 0.5 * (mid + hi);
    let flmid = f(lmid);
    let frmid = f(rmid);
    let left = (mid - lo) / 6.0 * (flo + 4.0 * flmid + fmid);
    let right = (hi - mid) / 6.0 * (fmid + 4.0 * frmid + fhi);
    let refined = left + right;
    if depth == 0 || (refined - whole).abs() <= 15.0 * tol {
        return refined + (refined - whole) / 15.0;
    }
    simpson_recurse(f, lo, mid, flo, flmid, fmid, left, tol / 2.0, depth - 1)
        + simpson_recurse(f, mid, hi, fmid, frmid, fhi, right, tol / 2.0, depth - 1)
}

/// Length of the curve swept by the unit direction ŷ = y/‖y‖ of the solution
/// of y' = A(t) y, y(0) = y0, over [0, t].
pub fn unit_direction_arclength(
    a: &MatrixFunction,
    y0: &[f64],
    t: f64,
    tol: f64,
) -> OdeResult<f64> {
    let dim = a.dim();
    assert_eq!(y0.len(), dim, "initial vector length must match the dimension");
    if y0.iter().all(|&x| x == 0.0) {
        return Err(OdeError::ZeroInitialVector);
    }
    if !(0.0..=a.domain_end * (1.0 + 1e-12)).contains(&t) {
        return Err(OdeError::OutOfDomain { t, domain_end: a.domain_end });
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    // Augmented state (y, s): s' = ‖(I − ŷŷᵀ) A ŷ‖₂.
    let mut state: Vec<Complex64> =
        y0.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    state.push(Complex64::new(0.0, 0.0));
    for (segment, lo, hi) in a.segment_grid(t) {
        let mut rhs = |tau: f64, y: &[Complex64], out: &mut [Complex64]| {
            let at = a.evaluate_on_segment(segment, tau);
            let norm: f64 = y[..dim].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let mut dot = Complex64::new(0.0, 0.0);
            for i in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..dim {
                    acc += at[(i, k)] * y[k];
                }
                out[i] = acc;
                dot += y[i].conj() * acc;
            }
            // ŷ' = (v − ŷ(ŷ·v)) / ‖y‖ with v = A y.
            let mut tangent_sq = 0.0;
            for i in 0..dim {
                let proj = out[i] - y[i] * (dot / (norm * norm));
                tangent_sq += proj.norm_sqr();
            }
            out[dim] = Complex64::new(tangent_sq.sqrt() / norm, 0.0);
        };
        let (outputs, _) = rk::integrate(&mut rhs, lo, &state, &[hi], tol)?;
        state = outputs.into_iter().next().unwrap();
    }
    Ok(state[dim].re)
}

#[cfg(test)]
mod tests {
    use super::corpus;
    use super::*;
    use crate::linalg::{expm, spectral_norm};

    const ONE: Complex64 = Complex64::new(1.0, 0.0);

    #[test]
    fn kappa_zero_freezes_identity() {
        let a = corpus::example4();
        let ys = solve_at(&a, Complex64::new(0.0, 0.0), &[0.5, 1.0], 1e-10).unwrap();
        for y in ys {
            assert!(y.sub(&ComplexMatrix::identity(4)).frobenius_norm() < 1e-12);
        }
    }

    #[test]
    fn constant_matrix_matches_expm() {
        let a = corpus::example1();
        let t = 1.7;
        let y = solve_at(&a, ONE, &[t], 1e-12).unwrap().pop().unwrap();
        let generator = a.evaluate(0.0).unwrap().to_complex().scale(Complex64::new(t, 0.0));
        let reference = expm(&generator).unwrap();
        assert!(y.sub(&reference).frobenius_norm() < 1e-9);
    }

    #[test]
    fn trigonometric_solution_regression() {
        let a = corpus::example2();
        let t = std::f64::consts::PI;
        let y = solve_at(&a, ONE, &[t], 1e-10).unwrap().pop().unwrap();
        let expected = corpus::ex2_solution(t);
        assert!(
            y.sub(&expected.to_complex()).frobenius_norm() < 1e-6,
            "Y(π) error {}",
            y.sub(&expected.to_complex()).frobenius_norm()
        );
        assert!((y[(1, 0)].re - std::f64::consts::PI).abs() < 1e-6);
        assert!((y[(0, 0)].re + 1.0).abs() < 1e-6);
    }

    #[test]
    fn triangular_solution_regression() {
        let a = corpus::example3();
        for &t in &[0.3, 1.0, 2.0] {
            let y = solve_at(&a, ONE, &[t], 1e-10).unwrap().pop().unwrap();
            let expected = corpus::ex3_solution(t);
            assert!(y.sub(&expected.to_complex()).frobenius_norm() < 1e-7);
        }
    }

    #[test]
    fn cocycle_property() {
        let a = corpus::example4();
        let tol = 1e-10;
        let t1 = 0.4;
        let t2 = 0.9;
        let y1 = solve_at(&a, ONE, &[t1], tol).unwrap().pop().unwrap();
        let y2 = solve_at(&a, ONE, &[t2], tol).unwrap().pop().unwrap();
        let restarted = propagate(&a, ONE, t1, &ComplexMatrix::identity(4), t2, tol).unwrap();
        let recombined = restarted.matmul(&y1);
        assert!(
            y2.sub(&recombined).frobenius_norm() < 5.0 * 1e-6,
            "cocycle residual {}",
            y2.sub(&recombined).frobenius_norm()
        );
    }

    #[test]
    fn action_norm_of_unit_norm_coefficient() {
        // ‖A(t)‖₂ ≡ 1 for the trigonometric example, so γ(t) = t.
        let a = corpus::example2();
        for &t in &[0.5, 1.0, std::f64::consts::PI] {
            let gamma = action_norm(&a, t, 1e-8).unwrap();
            assert!((gamma - t).abs() < 1e-6, "γ({t}) = {gamma}");
        }
        assert_eq!(action_norm(&a, 0.0, 1e-8).unwrap(), 0.0);
    }

    #[test]
    fn action_norm_additive_over_subintervals() {
        let a = corpus::example4();
        let whole = action_norm(&a, 1.0, 1e-9).unwrap();
        let first = action_norm(&a, 0.6, 1e-9).unwrap();
        // ∫_0.6^1 by breakpoint-free quadrature of the same integrand.
        let f = |tau: f64| spectral_norm(&a.evaluate(tau).unwrap().to_complex());
        let rest = adaptive_simpson(&f, 0.6, 1.0, 1e-9);
        assert!((whole - first - rest).abs() < 1e-7);
    }

    #[test]
    fn arclength_of_pure_rotation_is_time() {
        let a = corpus::example1();
        for &t in &[0.5, 2.0, 3.5] {
            let s = unit_direction_arclength(&a, &[1.0, 0.0], t, 1e-10).unwrap();
            assert!((s - t).abs() < 1e-7, "arclength {s} at t={t}");
        }
    }

    #[test]
    fn arclength_zero_for_fixed_direction() {
        use crate::polymat::{rat, PiecewisePolyMatrix, PolyMatrix};
        let diag = PolyMatrix::from_constant_rows(&[
            vec![rat(2, 1), rat(0, 1)],
            vec![rat(0, 1), rat(-1, 1)],
        ]);
        let a = MatrixFunction::from_piecewise(
            "diag",
            PiecewisePolyMatrix::single(diag, rat(0, 1), rat(3, 1)).unwrap(),
        );
        let s = unit_direction_arclength(&a, &[1.0, 0.0], 2.0, 1e-10).unwrap();
        assert!(s.abs() < 1e-9);
    }

    #[test]
    fn arclength_bounded_by_action_norm() {
        let a = corpus::example3();
        let t = 1.5;
        let gamma = action_norm(&a, t, 1e-9).unwrap();
        for y0 in [[1.0, 0.0], [0.3, -0.7], [1.0, 1.0]] {
            let s = unit_direction_arclength(&a, &y0, t, 1e-10).unwrap();
            assert!(s <= gamma + 1e-6, "s = {s}, γ = {gamma}");
        }
    }

    #[test]
    fn fundamental_solution_grid_and_invertibility() {
        let a = corpus::example4();
        let sol = fundamental_solution(&a, ONE, 1.0, 1e-10).unwrap();
        assert_eq!(sol.grid[0], 0.0);
        assert!(sol
            .values[0]
            .sub(&ComplexMatrix::identity(4))
            .frobenius_norm()
            .eq(&0.0));
        for y in &sol.values {
            let det = crate::linalg::LuDecomposition::new(y).map(|lu| lu.determinant());
            assert!(det.is_ok() && det.unwrap().norm() > 1e-12);
        }
    }

    #[test]
    fn out_of_domain_rejected() {
        let a = corpus::example3();
        assert!(matches!(
            solve_at(&a, ONE, &[99.0], 1e-8),
            Err(OdeError::OutOfDomain { .. })
        ));
        assert!(matches!(
            action_norm(&a, -0.5, 1e-8),
            Err(OdeError::OutOfDomain { .. })
        ));
    }
}
