//! Gate masses: the amount of computation each gate contributes.

use crate::circuit::{Circuit, Gate};

/// Share of the parametrized mass spread over the fixed gates.
pub const FIXED_MASS_RATIO: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct MassAssignment {
    pub masses: Vec<f64>,
    pub total: f64,
}

/// `param-dim × (unitary-dim² − 1)` for a parametrized gate, 0 otherwise.
pub fn layer_mass(gate: &Gate) -> f64 {
    if gate.is_parametrized() {
        let dim = 1usize << gate.arity();
        (dim * dim - 1) as f64 * gate.gate_type.param_dim() as f64
    } else {
        0.0
    }
}

/// Parametrized gates get their layer mass, split evenly over runs of
/// identical gates (same type and wires) with nothing in between on those
/// wires. Every fixed gate gets `η / |fixed| × Σ parametrized mass`.
pub fn assign_masses(circuit: &Circuit) -> MassAssignment {
    let gates = circuit.gates();
    let mut last_on_wire: Vec<Option<usize>> = vec![None; circuit.n_qubits()];
    let mut run_id = vec![0usize; gates.len()];
    let mut run_len: Vec<usize> = Vec::new();
    for (i, g) in gates.iter().enumerate() {
        let prev = last_on_wire[g.wires()[0]];
        let continues = g.is_parametrized()
            && prev.is_some_and(|p| gates[p] == *g && g.wires().iter().all(|&w| last_on_wire[w] == Some(p)));
        if continues {
            let r = run_id[prev.unwrap()];
            run_id[i] = r;
            run_len[r] += 1;
        } else {
            run_id[i] = run_len.len();
            run_len.push(1);
        }
        for &w in g.wires() {
            last_on_wire[w] = Some(i);
        }
    }
    let mut masses: Vec<f64> =
        gates.iter().enumerate().map(|(i, g)| layer_mass(g) / run_len[run_id[i]] as f64).collect();
    let param_total: f64 = masses.iter().sum();
    let n_fixed = gates.iter().filter(|g| !g.is_parametrized()).count();
    if n_fixed > 0 {
        let each = FIXED_MASS_RATIO * param_total / n_fixed as f64;
        for (m, g) in masses.iter_mut().zip(gates) {
            if !g.is_parametrized() {
                *m = each;
            }
        }
    }
    let total = masses.iter().sum();
    MassAssignment { masses, total }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateType::*;

    fn circ(n: usize, gates: Vec<Gate>) -> Circuit {
        Circuit::new(n, gates).unwrap()
    }

    #[test]
    fn single_rotation() {
        let m = assign_masses(&circ(1, vec![Gate::single(RX, 0)]));
        assert_eq!(m.masses, vec![3.0]);
        assert_eq!(m.total, 3.0);
    }

    #[test]
    fn consecutive_controlled_rotations_share() {
        let m = assign_masses(&circ(4, vec![Gate::pair(CRZ, 2, 3), Gate::pair(CRZ, 2, 3)]));
        assert_eq!(m.masses, vec![7.5, 7.5]);
        let m = assign_masses(&circ(4, vec![Gate::pair(CRZ, 2, 3), Gate::pair(CRZ, 3, 2)]));
        assert_eq!(m.masses, vec![15.0, 15.0]);
        let three = vec![Gate::pair(RXX, 0, 1); 3];
        let m = assign_masses(&circ(2, three));
        assert!(m.masses.iter().all(|&x| (x - 5.0).abs() < 1e-15));
    }

    #[test]
    fn intervening_gate_breaks_a_run() {
        let m = assign_masses(&circ(2, vec![Gate::single(RX, 0), Gate::pair(CX, 0, 1), Gate::single(RX, 0)]));
        assert_eq!(&m.masses[..1], &[3.0]);
        assert_eq!(m.masses[2], 3.0);
        // unrelated wire does not break it
        let m = assign_masses(&circ(2, vec![Gate::single(RX, 0), Gate::single(RY, 1), Gate::single(RX, 0)]));
        assert_eq!(m.masses, vec![1.5, 3.0, 1.5]);
    }

    #[test]
    fn fixed_gate_fraction() {
        let m = assign_masses(&circ(2, vec![Gate::single(H, 0), Gate::single(RX, 1)]));
        assert!((m.masses[0] - 0.3).abs() < 1e-15);
        assert!((m.total - 3.3).abs() < 1e-12);
        let m = assign_masses(&circ(2, vec![Gate::single(H, 0), Gate::single(X, 1)]));
        assert_eq!(m.total, 0.0);
    }
}
