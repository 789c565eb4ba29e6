//! Quadrature, momentum grids, interpolation, eigen-solvers and root bracketing.

mod eigen;
mod gauss;
mod grid;
mod lanczos;
mod quadrature;
mod roots;
mod scalar;

pub use eigen::{
    leading_eigenpairs, leading_eigenpairs_with, DenseOperator, EigenOptions, EigenResult, FnOperator, LinearOperator,
};
pub use gauss::gauss_legendre;
pub use grid::{build_grid, CompositeSpec, GridLayout, MomentumGrid, Stencil};
pub use lanczos::{lanczos_lowest, tridiagonal_eigenvalues, LanczosOptions, LanczosResult};
pub use quadrature::{integrate, integrate_breaks, integrate_half_line, Quadrature};
pub use roots::{bracket_root, bracket_root_fallible};
pub use scalar::KernelScalar;
