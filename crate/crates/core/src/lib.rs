//! d-outcome Bell tests with general SU(d) local measurements.
//!
//! The crate is organised bottom-up:
//!
//! * [`algebra`]: the SU(d) generator basis, structure constants, canonical
//!   unitaries `exp(-i p·s)` and the adjoint (Bloch rotation) matrices.
//! * [`correlation`]: the classically correlated observable fixed by the
//!   zero-marginal, circulant and equal-spacing conditions, bipartite states,
//!   joint probabilities and correlation functions.
//! * [`bell`]: the CGLMP-equivalent Bell function, the QFT family of
//!   measurements with its closed-form maximum, and the brute-force local
//!   hidden-variable bound.
//! * [`cv_map`]: the modulo-d block-folding CP map from truncated Fock space
//!   onto qudits, and the two-mode squeezed vacuum with its analytic image.
//! * [`optimizer`]: steepest descent, Polak-Ribière conjugate gradient and
//!   damped dynamic relaxation, driven from deterministic multi-start.

pub mod algebra;
pub mod bell;
pub mod correlation;
pub mod cv_map;
mod error;
pub mod linalg;
pub mod optimizer;
pub mod par;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use algebra::{
    adjoint_matrix_direct, adjoint_matrix_exp, bloch_decompose, diagonal_projector_coeffs,
    unitary_from_params, BlochDecomposition, GeneratorLabel, GeneratorSet, ParameterMode,
    ParameterVector, StructureConstants, Subset,
};
pub use bell::{
    bell_value, bell_value_qft, cglmp_qft_max, lhv_max_bruteforce, qft_unitary, BellSpec, Setting,
};
pub use correlation::{
    correlation_matrix, correlation_observable, correlation_value, joint_probabilities,
    BipartiteState, CorrelationMatrix, MeasurementConfig,
};
pub use cv_map::{tmsv_mapped_pure, tmsv_state, ChoiBlockMap, CvState, Squeezing};
pub use optimizer::{multistart_maximize, Method, OptimizationResult, RelaxationSettings};
pub use par::Execution;
