//! Normalized Hermitian generators and the core distance between gates.

use crate::circuit::sim::{apply_local_columns, gate_unitary};
use crate::circuit::Gate;
use crate::error::{QnasError, Result};
use crate::linalg::{hermitian_nuclear_norm, identity, unitary_log_generator, CMatrix};

/// `U = exp(i t H)` with `‖H‖_* = 1`. For parametrized gates `H` is the
/// direction of the family and `t` is the scale per unit angle.
#[derive(Clone, Debug)]
pub struct GeneratorDecomposition {
    pub h: CMatrix,
    pub t: f64,
}

/// Unnormalized generator of `gate` embedded on `n_qubits`.
fn raw_generator(gate: &Gate, n_qubits: usize) -> Result<CMatrix> {
    gate.validate(n_qubits)?;
    match gate.gate_type.family_generator() {
        Some(local) => {
            let mut m = identity(1 << n_qubits);
            apply_local_columns(&mut m, n_qubits, gate.wires(), &local);
            Ok(m)
        }
        None => Ok(unitary_log_generator(gate_unitary(gate, None, n_qubits)?.matrix())),
    }
}

pub fn hermitian_generator(gate: &Gate, n_qubits: usize) -> Result<GeneratorDecomposition> {
    let raw = raw_generator(gate, n_qubits)?;
    let t = hermitian_nuclear_norm(&raw);
    if t < 1e-12 {
        return Err(QnasError::DegenerateGenerator(format!("{gate} has a vanishing generator")));
    }
    Ok(GeneratorDecomposition { h: raw.unscale(t), t })
}

/// Both gates moved onto `0..m`, `m` the number of wires they touch, with
/// wires numbered by first appearance.
pub fn compact_pair(g1: &Gate, g2: &Gate) -> (Gate, Gate, usize) {
    let mut order: Vec<usize> = Vec::with_capacity(4);
    for &w in g1.wires().iter().chain(g2.wires()) {
        if !order.contains(&w) {
            order.push(w);
        }
    }
    let relabel = |g: &Gate| {
        let ws: Vec<usize> = g.wires().iter().map(|w| order.iter().position(|o| o == w).unwrap()).collect();
        Gate::new(g.gate_type, &ws).expect("relabelling keeps wires distinct")
    };
    (relabel(g1), relabel(g2), order.len())
}

/// `‖H¹ − H²‖_* / 2` for unit-nuclear-norm generators in a common space.
///
/// Embedding both generators with extra identity factors scales every nuclear
/// norm by the same amount, so the value is computed on the union of the two
/// gates' wires.
pub fn core_distance(g1: &Gate, g2: &Gate, n_qubits: usize) -> Result<f64> {
    g1.validate(n_qubits)?;
    g2.validate(n_qubits)?;
    if g1 == g2 {
        return Ok(0.0);
    }
    let (a, b, m) = compact_pair(g1, g2);
    let h1 = hermitian_generator(&a, m)?.h;
    let h2 = hermitian_generator(&b, m)?.h;
    Ok((hermitian_nuclear_norm(&(h1 - h2)) / 2.0).clamp(0.0, 1.0))
}
