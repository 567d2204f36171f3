//! Matrix exponential by scaling and squaring with diagonal Padé kernels.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use std::sync::OnceLock;

use super::lu::LuDecomposition;
use super::{check_dim, ComplexMatrix, LinalgError, LinalgResult};

// 1-norm thresholds for the [m/m] diagonal Padé approximants in double
// precision (Higham's backward-error analysis).
const THETA: [(usize, f64); 5] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
    (13, 5.371920351148152e0),
];

/// Padé numerator coefficients b_j for the [m/m] approximant of exp, computed
/// exactly and cached. The denominator uses the same coefficients with
/// alternating signs.
fn pade_coefficients(m: usize) -> &'static [f64] {
    static CACHE: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        let mut all = Vec::new();
        for &(order, _) in THETA.iter() {
            let mut coeffs = Vec::with_capacity(order + 1);
            for j in 0..=order {
                // b_j = (2m - j)! m! / ((2m)! j! (m - j)!)
                let num = factorial(2 * order - j) * factorial(order);
                let den = factorial(2 * order) * factorial(j) * factorial(order - j);
                let r = BigRational::new(num, den);
                coeffs.push(r.to_f64().expect("finite Padé coefficient"));
            }
            all.push(coeffs);
        }
        all
    });
    let idx = THETA.iter().position(|&(order, _)| order == m).expect("known Padé order");
    &cache[idx]
}

fn factorial(n: usize) -> BigInt {
    let mut f = BigInt::one();
    for k in 2..=n {
        f *= k;
    }
    f
}

/// `exp(M)` for a square complex matrix.
pub fn expm(m: &ComplexMatrix) -> LinalgResult<ComplexMatrix> {
    check_dim(m.dim())?;
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let norm = m.one_norm();
    if norm == 0.0 {
        return Ok(ComplexMatrix::identity(m.dim()));
    }
    for &(order, theta) in THETA.iter() {
        if norm <= theta && order < 13 {
            return pade(m, order);
        }
    }
    let theta13 = THETA[4].1;
    let squarings = ((norm / theta13).log2().ceil()).max(0.0) as u32;
    if squarings > 60 {
        return Err(LinalgError::NonFinite);
    }
    let scaled = m.scale(Complex64::new((0.5f64).powi(squarings as i32), 0.0));
    let mut result = pade(&scaled, 13)?;
    for _ in 0..squarings {
        result = result.matmul(&result);
        if !result.is_finite() {
            return Err(LinalgError::NonFinite);
        }
    }
    Ok(result)
}

/// Evaluate the [m/m] Padé approximant r(M) = q(M)^{-1} p(M).
fn pade(m: &ComplexMatrix, order: usize) -> LinalgResult<ComplexMatrix> {
    let b = pade_coefficients(order);
    let n = m.dim();
    let m2 = m.matmul(m);
    // u = M * (odd part), v = even part; p = u + v, q = -u + v.
    let (u, v) = if order == 13 {
        let m4 = m2.matmul(&m2);
        let m6 = m4.matmul(&m2);
        let mut w1 = m6.scale(b[13].into());
        w1 = w1.add(&m4.scale(b[11].into()));
        w1 = w1.add(&m2.scale(b[9].into()));
        let mut w2 = m6.scale(b[7].into());
        w2 = w2.add(&m4.scale(b[5].into()));
        w2 = w2.add(&m2.scale(b[3].into()));
        w2 = w2.add(&ComplexMatrix::identity(n).scale(b[1].into()));
        let odd = m6.matmul(&w1).add(&w2);
        let u = m.matmul(&odd);

        let mut z1 = m6.scale(b[12].into());
        z1 = z1.add(&m4.scale(b[10].into()));
        z1 = z1.add(&m2.scale(b[8].into()));
        let mut z2 = m6.scale(b[6].into());
        z2 = z2.add(&m4.scale(b[4].into()));
        z2 = z2.add(&m2.scale(b[2].into()));
        z2 = z2.add(&ComplexMatrix::identity(n).scale(b[0].into()));
        let v = m6.matmul(&z1).add(&z2);
        (u, v)
    } else {
        // Powers M^0, M^2, M^4, ... up to M^(order-1).
        let mut even_powers = vec![ComplexMatrix::identity(n)];
        let half = (order - 1) / 2;
        for k in 1..=half {
            even_powers.push(even_powers[k - 1].matmul(&m2));
        }
        let mut odd = ComplexMatrix::zeros(n);
        let mut even = ComplexMatrix::zeros(n);
        for k in 0..=half {
            odd = odd.add(&even_powers[k].scale(b[2 * k + 1].into()));
            even = even.add(&even_powers[k].scale(b[2 * k].into()));
        }
        (m.matmul(&odd), even)
    };
    let p = u.add(&v);
    let q = v.sub(&u);
    let lu = LuDecomposition::new(&q)?;
    Ok(lu.solve_mat(&p))
}
