//! Exact Magnus-series machinery for the linear ODE Y' = A(t) Y:
//! term generation over exact rational polynomial matrices, convergence
//! certificates from the action integral ∫‖A‖₂ dτ, principal matrix
//! logarithms, and eigenvalue-trajectory divergence diagnostics.

pub mod cli;
pub mod diagnostics;
pub mod linalg;
pub mod magnus;
pub mod ode;
pub mod polymat;

pub use linalg::{ComplexMatrix, RealMatrix};
pub use magnus::MagnusSeries;
pub use ode::MatrixFunction;
pub use polymat::{PiecewisePolyMatrix, Poly, PolyMatrix, Rational};
