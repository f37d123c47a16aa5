//! Gates, circuits, their graph and matrix views, and exact simulation.

pub mod dag;
pub mod gate;
pub mod matrix_repr;
pub mod model;
pub mod sim;

pub use dag::{circuit_to_dag, dag_to_circuit, CircuitDag, DagEdge, DagNode};
pub use gate::{Gate, GateType, LocalOp};
pub use matrix_repr::{decode_matrix, encode_matrix, MatrixRepr};
pub use model::{catalog_for, random_circuit, random_gate, random_wires, Circuit};
pub use sim::{apply_circuit, circuit_unitary, gate_unitary, StateVector, UnitaryOp};
