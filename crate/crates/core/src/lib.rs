//! Quantum neural architecture search: gate and circuit distances, a
//! Gaussian-process surrogate with evolutionary acquisition, and the
//! benchmark objectives used to drive it.

pub mod circuit;
pub mod circuit_metric;
pub mod error;
pub mod evo;
pub mod gate_metric;
pub mod gp;
pub mod harness;
pub mod linalg;
pub mod mub;
pub mod objectives;
pub mod optim;

pub use circuit::{Circuit, Gate, GateType, StateVector, UnitaryOp};
pub use error::{QnasError, Result};
pub use nalgebra;
