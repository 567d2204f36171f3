//! Magnus series terms Ωₙ generated exactly from a piecewise-polynomial A(t).
//!
//! The generator uses the commutator recursion of Blanes, Casas, Oteo and
//! Ros: S_n^(1) = [Ω_{n−1}, A], S_n^(j) = Σ_{m=1}^{n−j} [Ω_m, S_{n−m}^(j−1)],
//! Ωₙ = Σ_j (B_j/j!) ∫₀ᵗ S_n^(j). An independent oracle for orders ≤ 4
//! (`magnus_terms_oracle`) transcribes the explicit iterated integrals for
//! orders 1–3 and assembles order 4 directly from the graded Bernoulli
//! expansion of dexp⁻¹, enumerating commutator chains by integer
//! composition — a separate code path from the S-table recursion.

use num_bigint::BigInt;
use num_complex::Complex64;

use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{spectral_norm, ComplexMatrix, RealMatrix};
use crate::polymat::{
    rational_to_f64, PiecewisePolyMatrix, PolyMatrix, PolymatError, Rational,
    DEFAULT_MAX_DEGREE,
};

#[derive(Debug, Error)]
pub enum MagnusError {
    #[error(transparent)]
    Polymat(#[from] PolymatError),
    #[error("term index {index} outside 1..={order}")]
    TermOutOfRange { index: usize, order: usize },
    #[error("order must be at least 1")]
    ZeroOrder,
    #[error("oracle covers orders 1..=4, requested {0}")]
    OracleOrder(usize),
}

pub type MagnusResult<T> = Result<T, MagnusError>;

#[derive(Debug, Clone)]
pub struct MagnusConfig {
    /// Degree guard handed to every polynomial product in the recursion.
    pub max_degree: usize,
}

impl Default for MagnusConfig {
    fn default() -> Self {
        MagnusConfig { max_degree: DEFAULT_MAX_DEGREE }
    }
}

/// The terms Ω₁..Ω_N of the Magnus series of a given A(t), kept per order so
/// diagnostics can inspect individual term norms.
#[derive(Debug, Clone)]
pub struct MagnusSeries {
    source: PiecewisePolyMatrix,
    terms: Vec<PiecewisePolyMatrix>,
}

impl MagnusSeries {
    pub fn order(&self) -> usize {
        self.terms.len()
    }

    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    pub fn source(&self) -> &PiecewisePolyMatrix {
        &self.source
    }

    /// Ωₙ, 1-based.
    pub fn term(&self, n: usize) -> MagnusResult<&PiecewisePolyMatrix> {
        if n == 0 || n > self.terms.len() {
            return Err(MagnusError::TermOutOfRange { index: n, order: self.terms.len() });
        }
        Ok(&self.terms[n - 1])
    }

    pub fn terms(&self) -> &[PiecewisePolyMatrix] {
        &self.terms
    }
}

/// Exact Bernoulli number B_k with the convention B₁ = −½, via the
/// recurrence B_m = −(m+1)⁻¹ Σ_{k<m} C(m+1, k) B_k.
pub fn bernoulli(k: usize) -> Rational {
    bernoulli_sequence(k).pop().unwrap()
}

/// B₀..B_n inclusive.
pub fn bernoulli_sequence(n: usize) -> Vec<Rational> {
    let mut b: Vec<Rational> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        if m == 0 {
            b.push(Rational::one());
            continue;
        }
        let mut acc = Rational::zero();
        for (k, bk) in b.iter().enumerate() {
            acc += Rational::from(binomial(m + 1, k)) * bk;
        }
        b.push(-acc / Rational::from(BigInt::from(m as u64 + 1)));
    }
    b
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k.min(n - k) {
        num *= n - i;
        den *= i + 1;
    }
    num / den
}

fn factorial(n: usize) -> BigInt {
    let mut f = BigInt::one();
    for i in 2..=n {
        f *= i;
    }
    f
}

/// Generate Ω₁..Ω_N exactly.
pub fn magnus_terms(a: &PiecewisePolyMatrix, order: usize) -> MagnusResult<MagnusSeries> {
    magnus_terms_with(a, order, &MagnusConfig::default())
}

pub fn magnus_terms_with(
    a: &PiecewisePolyMatrix,
    order: usize,
    config: &MagnusConfig,
) -> MagnusResult<MagnusSeries> {
    if order == 0 {
        return Err(MagnusError::ZeroOrder);
    }
    let max_degree = config.max_degree;
    let bernoullis = bernoulli_sequence(order.saturating_sub(1));
    let breakpoints = a.breakpoints().to_vec();
    let source = engine::Segmented::from_piecewise(a);
    let mut terms_fast: Vec<engine::Segmented> = vec![source.antiderivative(&breakpoints)];
    // s_table[n][j] = S_n^(j); S_n^(j) only references rows with smaller n,
    // so for fixed n all (j, m) commutators are independent tasks.
    let mut s_table: Vec<Vec<engine::Segmented>> = vec![Vec::new(); order + 1];
    for n in 2..=order {
        let mut tasks: Vec<(usize, usize)> = vec![(1, n - 1)];
        for j in 2..n {
            for m in 1..=(n - j) {
                tasks.push((j, m));
            }
        }
        let parts: Vec<(usize, Result<engine::Segmented, PolymatError>)> = tasks
            .into_par_iter()
            .map(|(j, m)| {
                let comm = if j == 1 {
                    // S_n^(1) = [Ω_{n−1}, A]
                    terms_fast[n - 2].commutator(&source, max_degree)
                } else {
                    // S_n^(j) summand [Ω_m, S_{n−m}^(j−1)]
                    terms_fast[m - 1].commutator(&s_table[n - m][j - 1], max_degree)
                };
                (j, comm)
            })
            .collect();
        let mut s_n: Vec<Option<engine::Segmented>> = vec![None; n];
        for (j, part) in parts {
            let part = part?;
            s_n[j] = Some(match s_n[j].take() {
                None => part,
                Some(sum) => sum.add(&part),
            });
        }
        // Ωₙ = ∫₀ᵗ Σ_{j=1}^{n−1} (B_j / j!) S_n^(j)
        let mut integrand: Option<engine::Segmented> = None;
        for (j, s) in s_n.iter().enumerate().skip(1) {
            let weight = &bernoullis[j] / Rational::from(factorial(j));
            if weight.is_zero() {
                continue;
            }
            let weighted = s.as_ref().unwrap().scale(&weight);
            integrand = Some(match integrand {
                None => weighted,
                Some(sum) => sum.add(&weighted),
            });
        }
        let integrand = integrand.expect("n >= 2 has at least the j = 1 term");
        terms_fast.push(integrand.antiderivative(&breakpoints));
        s_table[n] = s_n.into_iter().map(|s| s.unwrap_or_else(engine::Segmented::empty)).collect();
    }
    let terms = terms_fast
        .into_iter()
        .map(|t| t.into_piecewise(&breakpoints))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MagnusSeries { source: a.clone(), terms })
}

/// Scaled-integer polynomial arithmetic for the series recursion: each
/// polynomial is held as integer coefficients over one common denominator
/// with an explicit valuation offset (Ωₙ vanishes to order n at 0, so the
/// low zeros are never stored or multiplied). Content is reduced by gcd
/// after every operation. The public `Poly` path is untouched; the oracle
/// uses it, so the two term generators share no arithmetic code.
mod engine {
    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_traits::{One, ToPrimitive, Zero};

    use crate::polymat::{
        PiecewisePolyMatrix, Poly, PolyMatrix, PolymatError, PolymatResult, Rational,
    };

    #[derive(Debug, Clone)]
    pub(super) struct IPoly {
        /// Exponent of the lowest stored coefficient.
        val: usize,
        /// Coefficient numerators for t^{val}..t^{val+len−1}; first and last
        /// entries nonzero unless the polynomial is zero (empty).
        num: Vec<BigInt>,
        den: BigInt,
    }

    impl IPoly {
        fn zero() -> Self {
            IPoly { val: 0, num: Vec::new(), den: BigInt::one() }
        }

        fn is_zero(&self) -> bool {
            self.num.is_empty()
        }

        fn degree(&self) -> Option<usize> {
            if self.num.is_empty() {
                None
            } else {
                Some(self.val + self.num.len() - 1)
            }
        }

        fn normalize(&mut self) {
            while self.num.last().map_or(false, Zero::is_zero) {
                self.num.pop();
            }
            let drop = self.num.iter().take_while(|c| c.is_zero()).count();
            if drop > 0 {
                self.num.drain(..drop);
                self.val += drop;
            }
            if self.num.is_empty() {
                self.val = 0;
                self.den = BigInt::one();
                return;
            }
            let mut g = self.den.clone();
            for c in &self.num {
                if g.is_one() {
                    break;
                }
                g = g.gcd(c);
            }
            if !g.is_one() {
                self.den = &self.den / &g;
                for c in self.num.iter_mut() {
                    *c = &*c / &g;
                }
            }
        }

        fn from_poly(p: &Poly) -> Self {
            if p.is_zero() {
                return IPoly::zero();
            }
            let coeffs = p.coeffs();
            let val = coeffs.iter().take_while(|c| c.is_zero()).count();
            let mut den = BigInt::one();
            for c in &coeffs[val..] {
                den = den.lcm(c.denom());
            }
            let num = coeffs[val..]
                .iter()
                .map(|c| c.numer() * (&den / c.denom()))
                .collect();
            let mut out = IPoly { val, num, den };
            out.normalize();
            out
        }

        fn to_poly(&self) -> Poly {
            let mut coeffs = vec![Rational::zero(); self.val];
            coeffs.extend(
                self.num.iter().map(|c| Rational::new(c.clone(), self.den.clone())),
            );
            Poly::from_coeffs(coeffs)
        }

        fn max_bits(&self) -> u64 {
            self.num.iter().map(|c| c.bits()).max().unwrap_or(0)
        }

        fn add(&self, other: &Self) -> Self {
            if self.is_zero() {
                return other.clone();
            }
            if other.is_zero() {
                return self.clone();
            }
            let g = self.den.gcd(&other.den);
            let ca = &other.den / &g; // multiply self's numerators by this
            let cb = &self.den / &g;
            let den = &self.den * &ca;
            let val = self.val.min(other.val);
            let hi = (self.val + self.num.len()).max(other.val + other.num.len());
            let mut num = vec![BigInt::zero(); hi - val];
            for (i, c) in self.num.iter().enumerate() {
                num[self.val - val + i] = c * &ca;
            }
            for (i, c) in other.num.iter().enumerate() {
                num[other.val - val + i] += c * &cb;
            }
            let mut out = IPoly { val, num, den };
            out.normalize();
            out
        }

        fn scale(&self, r: &Rational) -> Self {
            if self.is_zero() || r.is_zero() {
                return IPoly::zero();
            }
            let mut out = IPoly {
                val: self.val,
                num: self.num.iter().map(|c| c * r.numer()).collect(),
                den: &self.den * r.denom(),
            };
            out.normalize();
            out
        }

        /// ∫₀ᵗ: raises the valuation by one and divides each coefficient by
        /// its new exponent, pulled under a common multiplier.
        fn antiderivative(&self) -> Self {
            if self.is_zero() {
                return IPoly::zero();
            }
            let mut common = BigInt::one();
            for i in 0..self.num.len() {
                common = common.lcm(&BigInt::from(self.val + i + 1));
            }
            let num = self
                .num
                .iter()
                .enumerate()
                .map(|(i, c)| c * (&common / BigInt::from(self.val + i + 1)))
                .collect();
            let mut out =
                IPoly { val: self.val + 1, num, den: &self.den * &common };
            out.normalize();
            out
        }

        fn eval_rational(&self, t: &Rational) -> Rational {
            if self.is_zero() {
                return Rational::zero();
            }
            let mut acc = Rational::zero();
            for c in self.num.iter().rev() {
                acc = acc * t + Rational::from(c.clone());
            }
            for _ in 0..self.val {
                acc *= t;
            }
            acc / Rational::from(self.den.clone())
        }

        fn from_rational(r: &Rational) -> Self {
            if r.is_zero() {
                return IPoly::zero();
            }
            IPoly { val: 0, num: vec![r.numer().clone()], den: r.denom().clone() }
        }
    }

    #[derive(Debug, Clone)]
    pub(super) struct IMat {
        dim: usize,
        entries: Vec<IPoly>,
    }

    impl IMat {
        fn zeros(dim: usize) -> Self {
            IMat { dim, entries: vec![IPoly::zero(); dim * dim] }
        }

        fn at(&self, i: usize, j: usize) -> &IPoly {
            &self.entries[i * self.dim + j]
        }

        fn from_poly_matrix(m: &PolyMatrix) -> Self {
            let dim = m.dim();
            let mut entries = Vec::with_capacity(dim * dim);
            for i in 0..dim {
                for j in 0..dim {
                    entries.push(IPoly::from_poly(m.entry(i, j)));
                }
            }
            IMat { dim, entries }
        }

        fn to_poly_matrix(&self) -> PolyMatrix {
            let mut rows = Vec::with_capacity(self.dim);
            for i in 0..self.dim {
                rows.push((0..self.dim).map(|j| self.at(i, j).to_poly()).collect());
            }
            PolyMatrix::from_rows(rows)
        }

        fn max_degree(&self) -> Option<usize> {
            self.entries.iter().filter_map(IPoly::degree).max()
        }

        fn add(&self, other: &Self) -> Self {
            IMat {
                dim: self.dim,
                entries: self
                    .entries
                    .iter()
                    .zip(&other.entries)
                    .map(|(a, b)| a.add(b))
                    .collect(),
            }
        }

        fn scale(&self, r: &Rational) -> Self {
            IMat { dim: self.dim, entries: self.entries.iter().map(|p| p.scale(r)).collect() }
        }

        /// [P, Q] with the degree guard applied up front. Each entry is a
        /// sum of products Σ_k (P_ik Q_kj − Q_ik P_kj); the products are
        /// convolved into one buffer over a common denominator and the
        /// entry is normalized once.
        fn commutator(&self, other: &Self, max_degree: usize) -> PolymatResult<Self> {
            if let (Some(a), Some(b)) = (self.max_degree(), other.max_degree()) {
                if a + b > max_degree {
                    return Err(PolymatError::DegreeOverflow { degree: a + b, limit: max_degree });
                }
            }
            let n = self.dim;
            let mut out = IMat::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    let mut terms: Vec<(&IPoly, &IPoly, bool)> = Vec::with_capacity(2 * n);
                    for k in 0..n {
                        let (p, q) = (self.at(i, k), other.at(k, j));
                        if !p.is_zero() && !q.is_zero() {
                            terms.push((p, q, true));
                        }
                        let (p, q) = (other.at(i, k), self.at(k, j));
                        if !p.is_zero() && !q.is_zero() {
                            terms.push((p, q, false));
                        }
                    }
                    out.entries[i * n + j] = accumulate_products(&terms);
                }
            }
            Ok(out)
        }

        fn antiderivative_raw(&self) -> Self {
            IMat {
                dim: self.dim,
                entries: self.entries.iter().map(IPoly::antiderivative).collect(),
            }
        }

        fn eval_rational(&self, t: &Rational) -> Vec<Rational> {
            self.entries.iter().map(|p| p.eval_rational(t)).collect()
        }

        fn add_constants(&self, constants: &[Rational]) -> Self {
            IMat {
                dim: self.dim,
                entries: self
                    .entries
                    .iter()
                    .zip(constants)
                    .map(|(p, c)| p.add(&IPoly::from_rational(c)))
                    .collect(),
            }
        }
    }

    /// Σ ±(p·q) over a common denominator, convolved into one buffer and
    /// normalized once. Falls back from i128 to big-integer accumulation
    /// when coefficient bits could overflow.
    fn accumulate_products(terms: &[(&IPoly, &IPoly, bool)]) -> IPoly {
        if terms.is_empty() {
            return IPoly::zero();
        }
        let mut den = BigInt::one();
        let mut val = usize::MAX;
        let mut hi = 0usize;
        for &(p, q, _) in terms {
            den = den.lcm(&(&p.den * &q.den));
            val = val.min(p.val + q.val);
            hi = hi.max(p.val + q.val + p.num.len() + q.num.len() - 2);
        }
        let mut scales = Vec::with_capacity(terms.len());
        let mut fits_i128 = true;
        for &(p, q, _) in terms {
            let scale = &den / (&p.den * &q.den);
            let scale_bits = scale.bits();
            let shorter = p.num.len().min(q.num.len()) as u64;
            let pair_count = (terms.len() * 2) as f64;
            let headroom = (shorter as f64 * pair_count).log2().ceil() as u64 + 1;
            if p.max_bits() + q.max_bits() + scale_bits + headroom > 126 {
                fits_i128 = false;
            }
            scales.push(scale);
        }
        let len = hi - val + 1;
        let num: Vec<BigInt> = if fits_i128 {
            let mut buf = vec![0i128; len];
            for (&(p, q, positive), scale) in terms.iter().zip(&scales) {
                let s = scale.to_i128().unwrap();
                let s = if positive { s } else { -s };
                let (short, long) = if p.num.len() <= q.num.len() { (p, q) } else { (q, p) };
                let scaled: Vec<i128> =
                    short.num.iter().map(|c| c.to_i128().unwrap() * s).collect();
                let longs: Vec<i128> =
                    long.num.iter().map(|c| c.to_i128().unwrap()).collect();
                let off = p.val + q.val - val;
                for (a, &sa) in scaled.iter().enumerate() {
                    if sa == 0 {
                        continue;
                    }
                    for (b, &lb) in longs.iter().enumerate() {
                        buf[off + a + b] += sa * lb;
                    }
                }
            }
            buf.into_iter().map(BigInt::from).collect()
        } else {
            let mut buf = vec![BigInt::zero(); len];
            for (&(p, q, positive), scale) in terms.iter().zip(&scales) {
                let (short, long) = if p.num.len() <= q.num.len() { (p, q) } else { (q, p) };
                let scaled: Vec<BigInt> = short
                    .num
                    .iter()
                    .map(|c| {
                        let s = c * scale;
                        if positive {
                            s
                        } else {
                            -s
                        }
                    })
                    .collect();
                let off = p.val + q.val - val;
                for (a, sa) in scaled.iter().enumerate() {
                    if sa.is_zero() {
                        continue;
                    }
                    for (b, lb) in long.num.iter().enumerate() {
                        if lb.is_zero() {
                            continue;
                        }
                        buf[off + a + b] += sa * lb;
                    }
                }
            }
            buf
        };
        let mut out = IPoly { val, num, den };
        out.normalize();
        out
    }

    /// One IMat per breakpoint segment; every value in a recursion shares
    /// the source's breakpoint grid, so binary operations zip directly.
    #[derive(Debug, Clone)]
    pub(super) struct Segmented {
        segments: Vec<IMat>,
    }

    impl Segmented {
        pub(super) fn empty() -> Self {
            Segmented { segments: Vec::new() }
        }

        pub(super) fn from_piecewise(p: &PiecewisePolyMatrix) -> Self {
            Segmented {
                segments: p.segments().iter().map(IMat::from_poly_matrix).collect(),
            }
        }

        pub(super) fn into_piecewise(
            self,
            breakpoints: &[Rational],
        ) -> PolymatResult<PiecewisePolyMatrix> {
            PiecewisePolyMatrix::new(
                breakpoints.to_vec(),
                self.segments.iter().map(IMat::to_poly_matrix).collect(),
            )
        }

        pub(super) fn add(&self, other: &Self) -> Self {
            Segmented {
                segments: self
                    .segments
                    .iter()
                    .zip(&other.segments)
                    .map(|(a, b)| a.add(b))
                    .collect(),
            }
        }

        pub(super) fn scale(&self, r: &Rational) -> Self {
            Segmented { segments: self.segments.iter().map(|s| s.scale(r)).collect() }
        }

        pub(super) fn commutator(
            &self,
            other: &Self,
            max_degree: usize,
        ) -> PolymatResult<Self> {
            let segments = self
                .segments
                .iter()
                .zip(&other.segments)
                .map(|(a, b)| a.commutator(b, max_degree))
                .collect::<PolymatResult<Vec<_>>>()?;
            Ok(Segmented { segments })
        }

        /// Anchored at the left end of the domain and continuous across
        /// breakpoints, like `PiecewisePolyMatrix::antiderivative`.
        pub(super) fn antiderivative(&self, breakpoints: &[Rational]) -> Self {
            let dim = self.segments[0].dim;
            let mut segments = Vec::with_capacity(self.segments.len());
            let mut accumulated: Vec<Rational> = vec![Rational::zero(); dim * dim];
            for (k, seg) in self.segments.iter().enumerate() {
                let raw = seg.antiderivative_raw();
                let at_left = raw.eval_rational(&breakpoints[k]);
                let offsets: Vec<Rational> = accumulated
                    .iter()
                    .zip(&at_left)
                    .map(|(acc, v)| acc - v)
                    .collect();
                let fixed = raw.add_constants(&offsets);
                accumulated = fixed.eval_rational(&breakpoints[k + 1]);
                segments.push(fixed);
            }
            Segmented { segments }
        }
    }
}

/// Independent low-order oracle: Ωₙ for n ≤ 4 without the S-table recursion.
pub fn magnus_terms_oracle(
    a: &PiecewisePolyMatrix,
    n: usize,
) -> MagnusResult<PiecewisePolyMatrix> {
    let omega1 = a.antiderivative();
    match n {
        1 => Ok(omega1),
        2 => {
            // −½ ∫₀ᵗ ∫₀^{τ₁} [A(τ₂), A(τ₁)] dτ₂ dτ₁
            //   = −½ ∫₀ᵗ [Ω₁(τ), A(τ)] dτ
            let inner = omega1.commutator(a)?;
            Ok(inner.antiderivative().scale(&rat(-1, 2)))
        }
        3 => {
            // ¼ ∫₀ᵗ∫₀^{τ₁}∫₀^{τ₂} [[A(τ₃), A(τ₂)], A(τ₁)]
            //   = ¼ ∫₀ᵗ [G(τ), A(τ)] dτ with G = ∫ [Ω₁, A],
            // plus 1/12 ∫₀ᵗ∫₀^{τ₁}∫₀^{τ₁} [A(τ₃), [A(τ₂), A(τ₁)]]
            //   = 1/12 ∫₀ᵗ [Ω₁(τ), [Ω₁(τ), A(τ)]] dτ.
            let g = omega1.commutator(a)?.antiderivative();
            let first = g.commutator(a)?.antiderivative().scale(&rat(1, 4));
            let nested = omega1.commutator(&omega1.commutator(a)?)?;
            let second = nested.antiderivative().scale(&rat(1, 12));
            first.add(&second).map_err(Into::into)
        }
        4 => {
            // Graded dexp⁻¹ expansion: Ω₄ = Σ_j (B_j/j!) ∫ Σ over integer
            // compositions (g₁..g_j) of 3 of [Ω_{g₁}, [… [Ω_{g_j}, A] …]],
            // with Ω₁..Ω₃ taken from the low-order oracle above.
            let omega2 = magnus_terms_oracle(a, 2)?;
            let omega3 = magnus_terms_oracle(a, 3)?;
            // j = 1, composition (3): B₁ [Ω₃, A]
            let c3 = omega3.commutator(a)?.scale(&rat(-1, 2));
            // j = 2, compositions (1,2) and (2,1): (B₂/2!) ([Ω₁,[Ω₂,A]] + [Ω₂,[Ω₁,A]])
            let c12 = omega1.commutator(&omega2.commutator(a)?)?;
            let c21 = omega2.commutator(&omega1.commutator(a)?)?;
            let c_mixed = c12.add(&c21)?.scale(&rat(1, 12));
            // j = 3, composition (1,1,1): weight B₃/3! = 0.
            Ok(c3.add(&c_mixed)?.antiderivative())
        }
        _ => Err(MagnusError::OracleOrder(n)),
    }
}

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Σ_{k ≤ n} Ω_k evaluated at t, as floats.
pub fn partial_sum(series: &MagnusSeries, n: usize, t: f64) -> MagnusResult<RealMatrix> {
    if n == 0 || n > series.order() {
        return Err(MagnusError::TermOutOfRange { index: n, order: series.order() });
    }
    let dim = series.dim();
    let mut acc = RealMatrix::zeros(dim);
    for term in &series.terms[..n] {
        acc = acc.add(&term.evaluate(t)?);
    }
    Ok(acc)
}

/// Σ_{k ≤ n} κᵏ Ω_k(t): the series of the rescaled problem A → κA.
pub fn kappa_scaled(
    series: &MagnusSeries,
    kappa: Complex64,
    n: usize,
    t: f64,
) -> MagnusResult<ComplexMatrix> {
    if n == 0 || n > series.order() {
        return Err(MagnusError::TermOutOfRange { index: n, order: series.order() });
    }
    let dim = series.dim();
    let mut acc = ComplexMatrix::zeros(dim);
    let mut power = Complex64::new(1.0, 0.0);
    for term in &series.terms[..n] {
        power *= kappa;
        acc = acc.add(&term.evaluate(t)?.to_complex().scale(power));
    }
    Ok(acc)
}

/// ‖Ω′(t) − Σ_{k=0}^{K} (B_k/k!) ad_Ω(t)^k (A(t))‖₂ where Ω is the full
/// partial sum of the series and Ω′ its exact termwise derivative. Small
/// deep inside the convergence region.
pub fn dexpinv_residual(series: &MagnusSeries, t: f64, k_terms: usize) -> MagnusResult<f64> {
    let mut omega = series.terms[0].clone();
    for term in &series.terms[1..] {
        omega = omega.add(term)?;
    }
    let omega_prime = omega.derivative().evaluate(t)?;
    let omega_t = omega.evaluate(t)?;
    let a_t = series.source.evaluate(t)?;

    let bernoullis = bernoulli_sequence(k_terms);
    let mut ad_power = a_t.clone();
    let mut sum = RealMatrix::zeros(series.dim());
    let mut kfact = 1.0f64;
    for (k, bk) in bernoullis.iter().enumerate() {
        if k > 0 {
            kfact *= k as f64;
            ad_power = omega_t.matmul(&ad_power).sub(&ad_power.matmul(&omega_t));
        }
        let w = rational_to_f64(bk) / kfact;
        if w != 0.0 {
            sum = sum.add(&ad_power.scale(w));
        }
    }
    Ok(spectral_norm(&omega_prime.sub(&sum).to_complex()))
}

/// Magnus series of the two-segment piecewise-constant problem: A₂ on
/// [0, 1), A₁ on [1, 2]. Evaluating term n at t = 2 yields the order-n term
/// of the series B with e^{A₁} e^{A₂} = e^B.
pub fn bch_terms(a1: &PolyMatrix, a2: &PolyMatrix, order: usize) -> MagnusResult<MagnusSeries> {
    if a1.dim() != a2.dim() {
        return Err(MagnusError::Polymat(PolymatError::DimensionMismatch {
            left: a1.dim(),
            right: a2.dim(),
        }));
    }
    a1.require_constant()?;
    a2.require_constant()?;
    let piecewise = PiecewisePolyMatrix::new(
        vec![rat(0, 1), rat(1, 1), rat(2, 1)],
        vec![a2.clone(), a1.clone()],
    )?;
    magnus_terms(&piecewise, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymat::Poly;

    fn single(m: PolyMatrix, hi: i64) -> PiecewisePolyMatrix {
        PiecewisePolyMatrix::single(m, rat(0, 1), rat(hi, 1)).unwrap()
    }

    /// [[2, t], [0, -1]] — upper-triangular with a linear corner.
    fn triangular_linear() -> PiecewisePolyMatrix {
        single(
            PolyMatrix::from_rows(vec![
                vec![Poly::constant(rat(2, 1)), Poly::monomial(rat(1, 1), 1)],
                vec![Poly::zero(), Poly::constant(rat(-1, 1))],
            ]),
            3,
        )
    }

    #[test]
    fn bernoulli_values() {
        assert_eq!(bernoulli(0), rat(1, 1));
        assert_eq!(bernoulli(1), rat(-1, 2));
        assert_eq!(bernoulli(2), rat(1, 6));
        assert_eq!(bernoulli(3), rat(0, 1));
        assert_eq!(bernoulli(4), rat(-1, 30));
        assert_eq!(bernoulli(6), rat(1, 42));
        assert_eq!(bernoulli(12), rat(-691, 2730));
        for k in (5..=15).step_by(2) {
            assert!(bernoulli(k).is_zero());
        }
    }

    #[test]
    fn constant_matrix_has_single_term() {
        let a = single(
            PolyMatrix::from_constant_rows(&[
                vec![rat(0, 1), rat(1, 1)],
                vec![rat(-1, 1), rat(0, 1)],
            ]),
            7,
        );
        let series = magnus_terms(&a, 5).unwrap();
        // Ω₁ = tA
        let expected = a.scale(&rat(1, 1)).antiderivative();
        assert_eq!(*series.term(1).unwrap(), expected);
        for n in 2..=5 {
            assert!(series.term(n).unwrap().is_zero(), "Ω_{n} should vanish");
        }
    }

    #[test]
    fn triangular_linear_terms_match_hand_values() {
        let series = magnus_terms(&triangular_linear(), 4).unwrap();
        // Ω₁ = [[2t, t²/2], [0, −t]]
        let omega1 = single(
            PolyMatrix::from_rows(vec![
                vec![Poly::monomial(rat(2, 1), 1), Poly::monomial(rat(1, 2), 2)],
                vec![Poly::zero(), Poly::monomial(rat(-1, 1), 1)],
            ]),
            3,
        );
        assert_eq!(*series.term(1).unwrap(), omega1);
        // Ω₂ = [[0, −t³/4], [0, 0]]
        let omega2 = single(
            PolyMatrix::from_rows(vec![
                vec![Poly::zero(), Poly::monomial(rat(-1, 4), 3)],
                vec![Poly::zero(), Poly::zero()],
            ]),
            3,
        );
        assert_eq!(*series.term(2).unwrap(), omega2);
        // Ω₃ = 0
        assert!(series.term(3).unwrap().is_zero());
        // Ω₄ = [[0, 3t⁵/80], [0, 0]]. The coefficient is pinned three ways:
        // the order-4 oracle below, the Taylor expansion of the closed-form
        // logarithm (corner entry (3/80)t⁵), and exponential consistency.
        let omega4 = single(
            PolyMatrix::from_rows(vec![
                vec![Poly::zero(), Poly::monomial(rat(3, 80), 5)],
                vec![Poly::zero(), Poly::zero()],
            ]),
            3,
        );
        assert_eq!(*series.term(4).unwrap(), omega4);
    }

    #[test]
    fn oracle_matches_recursion_on_triangular_linear() {
        let a = triangular_linear();
        let series = magnus_terms(&a, 4).unwrap();
        for n in 1..=4 {
            let oracle = magnus_terms_oracle(&a, n).unwrap();
            assert_eq!(*series.term(n).unwrap(), oracle, "order {n}");
        }
    }

    #[test]
    fn oracle_second_order_vanishes_for_diagonal() {
        let a = single(
            PolyMatrix::from_rows(vec![
                vec![Poly::monomial(rat(3, 2), 2), Poly::zero()],
                vec![Poly::zero(), Poly::monomial(rat(-1, 3), 1)],
            ]),
            2,
        );
        assert!(magnus_terms_oracle(&a, 2).unwrap().is_zero());
        let series = magnus_terms(&a, 6).unwrap();
        for n in 2..=6 {
            assert!(series.term(n).unwrap().is_zero());
        }
    }

    #[test]
    fn homogeneity_in_scaling() {
        let a = triangular_linear();
        let c = rat(3, 7);
        let scaled = a.scale(&c);
        let base = magnus_terms(&a, 5).unwrap();
        let rescaled = magnus_terms(&scaled, 5).unwrap();
        let mut power = rat(1, 1);
        for n in 1..=5 {
            power *= c.clone();
            let expected = base.term(n).unwrap().scale(&power);
            assert_eq!(*rescaled.term(n).unwrap(), expected, "order {n}");
        }
    }

    #[test]
    fn partial_sum_hand_value() {
        // (1,2) = ½(0.25) − ¼(0.125) + (3/80)(0.03125) = 0.094921875
        let series = magnus_terms(&triangular_linear(), 4).unwrap();
        let s = partial_sum(&series, 4, 0.5).unwrap();
        assert!((s[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((s[(0, 1)] - 0.094921875).abs() < 1e-15);
        assert!((s[(1, 0)]).abs() < 1e-15);
        assert!((s[(1, 1)] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn kappa_scaling_specializations() {
        let series = magnus_terms(&triangular_linear(), 4).unwrap();
        let t = 1.0;
        let plain = partial_sum(&series, 4, t).unwrap();
        let at_one = kappa_scaled(&series, Complex64::new(1.0, 0.0), 4, t).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((at_one[(i, j)].re - plain[(i, j)]).abs() < 1e-14);
                assert!(at_one[(i, j)].im.abs() < 1e-14);
            }
        }
        let at_zero = kappa_scaled(&series, Complex64::new(0.0, 0.0), 4, t).unwrap();
        assert!(at_zero.frobenius_norm() == 0.0);
        // κ = i: i·Ω₁ + i²·Ω₂ + i⁴·Ω₄ entrywise on the printed terms.
        let at_i = kappa_scaled(&series, Complex64::new(0.0, 1.0), 4, t).unwrap();
        let o1 = series.term(1).unwrap().evaluate(t).unwrap();
        let o2 = series.term(2).unwrap().evaluate(t).unwrap();
        let o4 = series.term(4).unwrap().evaluate(t).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expected = Complex64::new(0.0, 1.0) * o1[(i, j)]
                    + Complex64::new(-1.0, 0.0) * o2[(i, j)]
                    + Complex64::new(1.0, 0.0) * o4[(i, j)];
                assert!((at_i[(i, j)] - expected).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn dexpinv_residual_vanishes_for_commuting_input() {
        let a = single(
            PolyMatrix::from_constant_rows(&[
                vec![rat(0, 1), rat(1, 1)],
                vec![rat(-1, 1), rat(0, 1)],
            ]),
            7,
        );
        let series = magnus_terms(&a, 3).unwrap();
        let r = dexpinv_residual(&series, 1.5, 4).unwrap();
        assert!(r < 1e-13, "residual {r}");
    }

    #[test]
    fn dexpinv_residual_shrinks_with_order() {
        let a = triangular_linear();
        let high = magnus_terms(&a, 10).unwrap();
        let low = magnus_terms(&a, 2).unwrap();
        let r_high = dexpinv_residual(&high, 0.1, 10).unwrap();
        let r_low = dexpinv_residual(&low, 0.1, 1).unwrap();
        assert!(r_high < 1e-10, "high-order residual {r_high}");
        assert!(r_low > r_high, "low {r_low} vs high {r_high}");
    }

    #[test]
    fn product_formula_low_orders() {
        let a1 = PolyMatrix::from_constant_rows(&[
            vec![rat(1, 2), rat(-1, 3)],
            vec![rat(2, 1), rat(0, 1)],
        ]);
        let a2 = PolyMatrix::from_constant_rows(&[
            vec![rat(0, 1), rat(1, 1)],
            vec![rat(-1, 4), rat(1, 5)],
        ]);
        let series = bch_terms(&a1, &a2, 3).unwrap();
        let two = rat(2, 1);
        // Order 1 at t = 2: A₁ + A₂
        let b1 = series.term(1).unwrap().evaluate_exact(&two).unwrap();
        assert_eq!(b1, a1.add(&a2).unwrap());
        // Order 2: ½ [A₁, A₂]
        let b2 = series.term(2).unwrap().evaluate_exact(&two).unwrap();
        assert_eq!(b2, a1.commutator(&a2).unwrap().scale(&rat(1, 2)));
        // Order 3: 1/12 ([A₁,[A₁,A₂]] + [A₂,[A₂,A₁]])
        let b3 = series.term(3).unwrap().evaluate_exact(&two).unwrap();
        let expected = a1
            .commutator(&a1.commutator(&a2).unwrap())
            .unwrap()
            .add(&a2.commutator(&a2.commutator(&a1).unwrap()).unwrap())
            .unwrap()
            .scale(&rat(1, 12));
        assert_eq!(b3, expected);
    }

    #[test]
    fn dense_quartic_example_first_two_terms() {
        use crate::ode::corpus::example4_piecewise;
        let series = magnus_terms(&example4_piecewise(), 2).unwrap();
        let p = |coeffs: &[(i64, i64)]| {
            Poly::from_coeffs(coeffs.iter().map(|&(n, d)| rat(n, d)).collect())
        };
        // Ω₁ entries, degree-ascending coefficient lists.
        let omega1 = PolyMatrix::from_rows(vec![
            vec![
                p(&[(0, 1), (0, 1), (-1, 2)]),
                p(&[(0, 1), (0, 1), (3, 2)]),
                Poly::zero(),
                p(&[(0, 1), (2, 1), (1, 2), (-1, 1)]),
            ],
            vec![
                p(&[(0, 1), (0, 1), (-1, 2), (1, 3)]),
                p(&[(0, 1), (-3, 1)]),
                p(&[(0, 1), (3, 1), (1, 1), (1, 3)]),
                Poly::zero(),
            ],
            vec![
                p(&[(0, 1), (3, 1)]),
                Poly::zero(),
                p(&[(0, 1), (0, 1), (-1, 1), (1, 3)]),
                p(&[(0, 1), (-3, 1), (0, 1), (-1, 3)]),
            ],
            vec![
                p(&[(0, 1), (3, 1), (-1, 2), (1, 3)]),
                p(&[(0, 1), (0, 1), (-3, 2), (2, 3)]),
                p(&[(0, 1), (-2, 1), (-3, 2)]),
                p(&[(0, 1), (2, 1), (-1, 2)]),
            ],
        ]);
        let expected1 = PiecewisePolyMatrix::single(omega1, rat(0, 1), rat(3, 2)).unwrap();
        assert_eq!(*series.term(1).unwrap(), expected1);

        // Ω₂ entries: coefficients of t³, t⁴, t⁵ per slot.
        let e = |c3: (i64, i64), c4: (i64, i64), c5: (i64, i64)| {
            p(&[(0, 1), (0, 1), (0, 1), c3, c4, c5])
        };
        let omega2 = PolyMatrix::from_rows(vec![
            vec![
                e((5, 12), (-11, 12), (-1, 60)),
                e((-1, 4), (-1, 3), (7, 60)),
                e((13, 12), (1, 2), (1, 10)),
                e((1, 6), (-1, 2), (0, 1)),
            ],
            vec![
                e((1, 4), (1, 2), (-1, 60)),
                e((0, 1), (0, 1), (1, 20)),
                e((1, 1), (0, 1), (-1, 15)),
                e((-2, 3), (1, 6), (0, 1)),
            ],
            vec![
                e((-1, 2), (1, 4), (1, 60)),
                e((-3, 2), (1, 2), (1, 20)),
                e((-3, 4), (1, 6), (1, 20)),
                e((0, 1), (1, 3), (-1, 60)),
            ],
            vec![
                e((-7, 12), (-1, 6), (1, 60)),
                e((1, 2), (-5, 6), (1, 12)),
                e((-5, 12), (2, 3), (1, 6)),
                e((1, 3), (3, 4), (-1, 12)),
            ],
        ]);
        let expected2 = PiecewisePolyMatrix::single(omega2, rat(0, 1), rat(3, 2)).unwrap();
        assert_eq!(*series.term(2).unwrap(), expected2);
    }

    #[test]
    fn bch_zero_inputs_give_zero_series() {
        let z = PolyMatrix::zeros(2);
        let series = bch_terms(&z, &z, 4).unwrap();
        for n in 1..=4 {
            assert!(series.term(n).unwrap().is_zero());
        }
    }
}
