//! The su(d) Lie algebra in the generalized Gell-Mann basis.
//!
//! Generators are ordered U block (symmetric, lexicographic `(j,k)`), then V
//! block (antisymmetric, same order), then W block (diagonal, `l = 1..d-1`).
//! Every parameter vector and adjoint matrix in the crate uses this order.

mod adjoint;
mod bloch;
pub mod checks;
mod generators;
mod params;
mod structure;

pub use adjoint::{adjoint_matrix_direct, adjoint_matrix_exp, unitary_from_params};
pub use bloch::{bloch_decompose, diagonal_projector_coeffs, BlochDecomposition, DiagonalProjector};
pub(crate) use bloch::g_coefficient as bloch_g;
pub use generators::{GeneratorLabel, GeneratorSet, Subset};
pub use params::{ParameterMode, ParameterVector};
pub use structure::StructureConstants;
