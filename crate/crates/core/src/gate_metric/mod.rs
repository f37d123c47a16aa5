//! Distance between two quantum gates: the mean of a core term comparing
//! their generators and a shape term comparing their orbits.

pub mod generator;
pub mod shape;
pub mod table;

pub use generator::{compact_pair, core_distance, hermitian_generator, GeneratorDecomposition};
pub use shape::{
    integral_shape_estimate, shape_distance, shape_objective, symmetric_shape_distance, ShapeConfig, ShapeFit,
    ShapeSolution,
};
pub use table::{pairwise_gate_table, GateDistanceTable, GateDistances, MAX_SHAPE_QUBITS};

use crate::circuit::Gate;
use crate::error::Result;

/// `(d_core + d_shape) / 2`; `+∞` for a fixed/parametrized pair.
pub fn gate_distance(g1: &Gate, g2: &Gate, n_qubits: usize, cfg: &ShapeConfig) -> Result<f64> {
    let shape = symmetric_shape_distance(g1, g2, n_qubits, cfg)?;
    if shape.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok(0.5 * (core_distance(g1, g2, n_qubits)? + shape))
}
