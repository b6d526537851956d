//! Security analysis of CHSH-based device-independent QKD against collective
//! attacks: Holevo bounds, Devetak–Winter key rates, the optimal attack,
//! the block reduction of two-setting strategies to qubits, and a seeded
//! Monte Carlo simulation of the protocol.

pub mod attack;
pub mod bounds;
pub mod error;
pub mod qmat;
pub mod reduction;
pub mod simproto;

pub use error::{Error, Result};
