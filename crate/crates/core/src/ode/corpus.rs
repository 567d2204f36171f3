//! Built-in coefficient matrices used across the test corpus, the CLI, and
//! the diagnostics examples, together with their closed-form solutions where
//! one exists.

use super::MatrixFunction;
use crate::linalg::RealMatrix;
use crate::polymat::{rat, PiecewisePolyMatrix, Poly, PolyMatrix, PolymatResult, Rational};

/// Names of the built-in registry entries.
pub const BUILTIN_NAMES: [&str; 5] = ["ex1", "ex2", "ex3", "ex4", "bch"];

pub fn builtin(name: &str) -> Option<MatrixFunction> {
    match name {
        "ex1" => Some(example1()),
        "ex2" => Some(example2()),
        "ex3" => Some(example3()),
        "ex4" => Some(example4()),
        _ => None,
    }
}

/// One-line description for the registry listing.
pub fn builtin_description(name: &str) -> Option<&'static str> {
    match name {
        "ex1" => Some("constant rotation generator [[0,1],[-1,0]]; single-term series"),
        "ex2" => Some(
            "trigonometric coefficients (1/2)[[sin 2t, -1-cos 2t],[1-cos 2t, -sin 2t]]; \
             numeric-only (no exact terms), unit action rate",
        ),
        "ex3" => Some("upper-triangular [[2, t],[0, -1]]; series diverges despite a real log"),
        "ex4" => Some("dense quadratic-coefficient 4x4; desk-scale divergence study"),
        "bch" => Some(
            "two constant matrices A1, A2 as the piecewise-constant model A2 on [0,1), \
             A1 on [1,2]; term n at t=2 is the order-n product-formula term",
        ),
        _ => None,
    }
}

fn p(coeffs: &[(i64, i64)]) -> Poly {
    Poly::from_coeffs(coeffs.iter().map(|&(n, d)| rat(n, d)).collect())
}

/// Constant A = [[0, 1], [-1, 0]] on [0, 13].
pub fn example1() -> MatrixFunction {
    let a = PolyMatrix::from_constant_rows(&[
        vec![rat(0, 1), rat(1, 1)],
        vec![rat(-1, 1), rat(0, 1)],
    ]);
    let piecewise = PiecewisePolyMatrix::single(a, rat(0, 1), rat(13, 1)).unwrap();
    MatrixFunction::from_piecewise("ex1", piecewise)
        .with_description(builtin_description("ex1").unwrap())
}

/// A(t) = (1/2) [[sin 2t, -1 - cos 2t], [1 - cos 2t, -sin 2t]] on [0, 2π].
/// Registered as a numeric evaluator: its entries are outside the
/// polynomial class, so no exact series terms are generated for it.
pub fn example2() -> MatrixFunction {
    MatrixFunction::from_closure("ex2", 2, 2.0 * std::f64::consts::PI, |t| {
        let (s, c) = (2.0 * t).sin_cos();
        RealMatrix::from_rows(&[
            vec![0.5 * s, 0.5 * (-1.0 - c)],
            vec![0.5 * (1.0 - c), -0.5 * s],
        ])
    })
    .with_description(builtin_description("ex2").unwrap())
}

/// Closed-form solution for `example2`:
/// Y(t) = [[t sin t + cos t, -sin t], [sin t - t cos t, cos t]].
pub fn ex2_solution(t: f64) -> RealMatrix {
    let (s, c) = t.sin_cos();
    RealMatrix::from_rows(&[vec![t * s + c, -s], vec![s - t * c, c]])
}

/// A(t) = [[2, t], [0, -1]] on [0, 3].
pub fn example3() -> MatrixFunction {
    let a = PolyMatrix::from_rows(vec![
        vec![p(&[(2, 1)]), p(&[(0, 1), (1, 1)])],
        vec![Poly::zero(), p(&[(-1, 1)])],
    ]);
    let piecewise = PiecewisePolyMatrix::single(a, rat(0, 1), rat(3, 1)).unwrap();
    MatrixFunction::from_piecewise("ex3", piecewise)
        .with_description(builtin_description("ex3").unwrap())
}

/// Closed-form solution for `example3`:
/// Y(t) = [[e^{2t}, (1/9) e^{2t} − (1/9 + t/3) e^{−t}], [0, e^{−t}]].
pub fn ex3_solution(t: f64) -> RealMatrix {
    let ep = (2.0 * t).exp();
    let em = (-t).exp();
    RealMatrix::from_rows(&[
        vec![ep, ep / 9.0 - (1.0 / 9.0 + t / 3.0) * em],
        vec![0.0, em],
    ])
}

/// Corner entry of log Y(t) for `example3`:
/// f(t) = (t e^{2t} − (t + 3t²) e^{−t}) / (3 (e^{2t} − e^{−t})).
///
/// Derivable from the closed-form Y via the divided difference
/// (ln a − ln d)/(a − d) on the diagonal pair (e^{2t}, e^{−t}); it satisfies
/// exp([[2t, f],[0, −t]]) = Y(t) and has its nearest poles at t = ±2πi/3.
pub fn ex3_log_corner(t: f64) -> f64 {
    (t * (2.0 * t).exp() - (t + 3.0 * t * t) * (-t).exp())
        / (3.0 * ((2.0 * t).exp() - (-t).exp()))
}

/// Dense 4×4 polynomial coefficients on [0, 3/2]:
/// ```text
/// [ -t        3t      0         -3t²+t+2 ]
/// [ t²-t      -3      t²+2t+3   0        ]
/// [ 3         0       t²-2t     -t²-3    ]
/// [ t²-t+3    2t²-3t  -3t-2     -t+2     ]
/// ```
pub fn example4() -> MatrixFunction {
    MatrixFunction::from_piecewise("ex4", example4_piecewise())
        .with_description(builtin_description("ex4").unwrap())
}

pub fn example4_piecewise() -> PiecewisePolyMatrix {
    let a = PolyMatrix::from_rows(vec![
        vec![
            p(&[(0, 1), (-1, 1)]),
            p(&[(0, 1), (3, 1)]),
            Poly::zero(),
            p(&[(2, 1), (1, 1), (-3, 1)]),
        ],
        vec![
            p(&[(0, 1), (-1, 1), (1, 1)]),
            p(&[(-3, 1)]),
            p(&[(3, 1), (2, 1), (1, 1)]),
            Poly::zero(),
        ],
        vec![
            p(&[(3, 1)]),
            Poly::zero(),
            p(&[(0, 1), (-2, 1), (1, 1)]),
            p(&[(-3, 1), (0, 1), (-1, 1)]),
        ],
        vec![
            p(&[(3, 1), (-1, 1), (1, 1)]),
            p(&[(0, 1), (-3, 1), (2, 1)]),
            p(&[(-2, 1), (-3, 1)]),
            p(&[(2, 1), (-1, 1)]),
        ],
    ]);
    PiecewisePolyMatrix::single(a, rat(0, 1), rat(3, 2)).unwrap()
}

/// The two-segment piecewise-constant model behind the product formula:
/// A₂ on [0, 1), A₁ on [1, 2].
pub fn product_formula_function(
    a1: &PolyMatrix,
    a2: &PolyMatrix,
) -> PolymatResult<MatrixFunction> {
    a1.require_constant()?;
    a2.require_constant()?;
    let breakpoints: Vec<Rational> = vec![rat(0, 1), rat(1, 1), rat(2, 1)];
    let piecewise = PiecewisePolyMatrix::new(breakpoints, vec![a2.clone(), a1.clone()])?;
    Ok(MatrixFunction::from_piecewise("bch", piecewise)
        .with_description(builtin_description("bch").unwrap()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_contents() {
        assert_eq!(BUILTIN_NAMES.len(), 5);
        for name in ["ex1", "ex2", "ex3", "ex4"] {
            let f = builtin(name).unwrap();
            assert_eq!(f.name(), name);
            assert!(!f.description().is_empty());
        }
        assert!(builtin("bch").is_none(), "bch needs two input matrices");
        assert!(builtin("nope").is_none());
    }

    #[test]
    fn example2_at_zero() {
        // (1/2) [[0, -2], [0, 0]] = [[0, -1], [0, 0]]
        let a = example2().evaluate(0.0).unwrap();
        assert_eq!(a[(0, 0)], 0.0);
        assert_eq!(a[(0, 1)], -1.0);
        assert_eq!(a[(1, 0)], 0.0);
        assert_eq!(a[(1, 1)], 0.0);
    }

    #[test]
    fn example4_row_one_vanishes_at_one() {
        // Entry (1,4) at t = 1: -3 + 1 + 2 = 0.
        let a = example4().evaluate(1.0).unwrap();
        assert_eq!(a[(0, 3)], 0.0);
        // Spot checks of the other quadratic entries at t = 3/2.
        let a2 = example4_piecewise()
            .evaluate_exact(&rat(3, 2))
            .unwrap();
        assert_eq!(a2.constant_entry(1, 0), rat(3, 4)); // t² - t
        assert_eq!(a2.constant_entry(3, 1), rat(0, 1)); // 2t² - 3t
        assert_eq!(a2.constant_entry(2, 3), rat(-21, 4)); // -t² - 3
    }

    #[test]
    fn closed_forms_satisfy_their_equations() {
        // Finite-difference check: Y'(t) ≈ A(t) Y(t) for both closed forms.
        let h = 1e-6;
        let t = 0.8;
        for (a, sol) in [
            (example2(), ex2_solution as fn(f64) -> RealMatrix),
            (example3(), ex3_solution as fn(f64) -> RealMatrix),
        ] {
            let lhs = sol(t + h).sub(&sol(t - h)).scale(1.0 / (2.0 * h));
            let rhs = a.evaluate(t).unwrap().matmul(&sol(t));
            assert!(lhs.sub(&rhs).max_abs() < 1e-5);
        }
    }

    #[test]
    fn ex3_log_corner_matches_series_start() {
        // f(t) = t²/2 − t³/4 + O(t⁵) near zero.
        let t = 1e-3;
        let approx = t * t / 2.0 - t * t * t / 4.0;
        assert!((ex3_log_corner(t) - approx).abs() < 1e-14);
    }
}
