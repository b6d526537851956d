//! Exact numerics for small finite-dimensional quantum systems.
//!
//! Subsystems are ordered A ⊗ B ⊗ E with the first factor most significant.
//! Entropies are in bits.

pub mod bell;
pub mod eigh;
pub mod measure;
pub mod operator;
pub mod random;
pub mod state;
pub mod twirl;

pub use bell::{bell_projector, bell_weights, BellDiagonalSpectrum, BellState};
pub use eigh::{eigh, eigvalsh, Eigh};
pub use measure::{
    born_probabilities, chsh_value, correlator, joint_probabilities, marginals, observable,
    BornTable, Outcome, PlanarMeasurement,
};
pub use operator::{kron, Operator, OperatorJson};
pub use state::{
    binary_entropy, partial_trace, purify, reduced_state, shannon_entropy, von_neumann_entropy,
    DensityMatrix, PureState,
};
pub use twirl::{real_twirl, y_twirl};
