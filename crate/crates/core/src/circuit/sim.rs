//! Exact statevector and unitary simulation. Qubit 0 is the most significant
//! bit of the basis-state index.

use num_complex::Complex64;

use super::gate::{Gate, LocalOp};
use super::model::Circuit;
use crate::error::{QnasError, Result};
use crate::linalg::{c, identity, unitarity_defect, CMatrix, CVector};

/// A `2^n`-dimensional unitary operator.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryOp {
    matrix: CMatrix,
}

impl UnitaryOp {
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        let d = matrix.nrows();
        if d != matrix.ncols() || !d.is_power_of_two() {
            return Err(QnasError::InvalidArgument(format!(
                "unitary must be square with power-of-two size, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(UnitaryOp { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        UnitaryOp { matrix: identity(dim) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.matrix)
    }
}

/// A normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
}

impl StateVector {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if !amplitudes.len().is_power_of_two() {
            return Err(QnasError::InvalidArgument("state dimension must be a power of two".into()));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(QnasError::InvalidArgument(format!("state norm {norm} is not 1")));
        }
        Ok(StateVector { amplitudes })
    }

    /// `|0…0⟩` on `n_qubits`.
    pub fn zero(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut v = CVector::zeros(1 << n_qubits);
        v[index] = c(1.0, 0.0);
        StateVector { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Apply a local operator on `wires` to a `2^n` amplitude slice in place.
pub fn apply_local(amps: &mut [Complex64], n_qubits: usize, wires: &[usize], op: &LocalOp) {
    let dim = amps.len();
    debug_assert_eq!(dim, 1 << n_qubits);
    match wires {
        [w] => {
            let bit = 1usize << (n_qubits - 1 - w);
            let (m00, m01, m10, m11) = (op.m[0], op.m[1], op.m[2], op.m[3]);
            for i in 0..dim {
                if i & bit == 0 {
                    let a0 = amps[i];
                    let a1 = amps[i | bit];
                    amps[i] = m00 * a0 + m01 * a1;
                    amps[i | bit] = m10 * a0 + m11 * a1;
                }
            }
        }
        [w0, w1] => {
            let b0 = 1usize << (n_qubits - 1 - w0);
            let b1 = 1usize << (n_qubits - 1 - w1);
            let m = &op.m;
            for i in 0..dim {
                if i & b0 == 0 && i & b1 == 0 {
                    let idx = [i, i | b1, i | b0, i | b0 | b1];
                    let a = [amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]];
                    for r in 0..4 {
                        amps[idx[r]] =
                            m[r * 4] * a[0] + m[r * 4 + 1] * a[1] + m[r * 4 + 2] * a[2] + m[r * 4 + 3] * a[3];
                    }
                }
            }
        }
        _ => unreachable!("gates act on one or two wires"),
    }
}

/// Apply a local operator to every column of a `2^n × k` matrix.
pub fn apply_local_columns(mat: &mut CMatrix, n_qubits: usize, wires: &[usize], op: &LocalOp) {
    let rows = mat.nrows();
    for col in mat.as_mut_slice().chunks_mut(rows) {
        apply_local(col, n_qubits, wires, op);
    }
}

fn local_for(gate: &Gate, theta: Option<f64>) -> Result<LocalOp> {
    gate.gate_type.local_matrix(theta)
}

/// Full `2^n` unitary of one gate, identity on the other wires.
pub fn gate_unitary(gate: &Gate, theta: Option<f64>, n_qubits: usize) -> Result<UnitaryOp> {
    gate.validate(n_qubits)?;
    let op = local_for(gate, theta)?;
    let mut m = identity(1 << n_qubits);
    apply_local_columns(&mut m, n_qubits, gate.wires(), &op);
    Ok(UnitaryOp { matrix: m })
}

fn check_params(circuit: &Circuit, params: &[f64]) -> Result<()> {
    if params.len() != circuit.param_count() {
        return Err(QnasError::DimensionMismatch { expected: circuit.param_count(), got: params.len() });
    }
    Ok(())
}

/// Local operators of every gate, consuming `params` in gate order.
pub fn local_ops(circuit: &Circuit, params: &[f64]) -> Result<Vec<LocalOp>> {
    check_params(circuit, params)?;
    let mut next = params.iter();
    circuit
        .gates()
        .iter()
        .map(|g| {
            let theta = if g.is_parametrized() { next.next().copied() } else { None };
            local_for(g, theta)
        })
        .collect()
}

/// `U(θ) = U_L … U_1`; the first gate acts first.
pub fn circuit_unitary(circuit: &Circuit, params: &[f64]) -> Result<UnitaryOp> {
    let ops = local_ops(circuit, params)?;
    let n = circuit.n_qubits();
    let mut m = identity(circuit.dim());
    for (g, op) in circuit.gates().iter().zip(&ops) {
        apply_local_columns(&mut m, n, g.wires(), op);
    }
    Ok(UnitaryOp { matrix: m })
}

/// Gate-by-gate statevector evolution.
pub fn apply_circuit(circuit: &Circuit, params: &[f64], state: &StateVector) -> Result<StateVector> {
    if state.dim() != circuit.dim() {
        return Err(QnasError::DimensionMismatch { expected: circuit.dim(), got: state.dim() });
    }
    let ops = local_ops(circuit, params)?;
    let n = circuit.n_qubits();
    let mut amps = state.amplitudes.clone();
    for (g, op) in circuit.gates().iter().zip(&ops) {
        apply_local(amps.as_mut_slice(), n, g.wires(), op);
    }
    Ok(StateVector { amplitudes: amps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::gate::GateType;
    use crate::circuit::model::random_circuit;
    use crate::linalg::haar_state;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn pauli_x_matrix() {
        let u = gate_unitary(&Gate::single(GateType::X, 0), None, 1).unwrap();
        let x = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        assert!(close(u.matrix(), &x, 1e-15));
    }

    #[test]
    fn zero_rotation_is_identity() {
        let u = gate_unitary(&Gate::single(GateType::RZ, 0), Some(0.0), 1).unwrap();
        assert!(close(u.matrix(), &identity(2), 1e-15));
    }

    #[test]
    fn cx_permutes_10_and_11() {
        // Enumerate the action on |00>,|01>,|10>,|11> (qubit 0 = MSB).
        let u = gate_unitary(&Gate::pair(GateType::CX, 0, 1), None, 2).unwrap();
        let expected_image = [0usize, 1, 3, 2];
        for (input, &out) in expected_image.iter().enumerate() {
            for row in 0..4 {
                let want = if row == out { 1.0 } else { 0.0 };
                assert!((u.matrix()[(row, input)] - c(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn embedding_matches_kron_on_adjacent_wires() {
        // RY on wire 1 of 3 qubits = I ⊗ RY ⊗ I
        let theta = 0.731;
        let g = Gate::single(GateType::RY, 1);
        let u = gate_unitary(&g, Some(theta), 3).unwrap();
        let ry = GateType::RY.local_matrix(Some(theta)).unwrap().to_matrix();
        let k = identity(2).kronecker(&ry).kronecker(&identity(2));
        assert!(close(u.matrix(), &k, 1e-14));
    }

    #[test]
    fn embedding_matches_permutation_construction_for_distant_wires() {
        // CRX(q2, q0) on 3 qubits built by explicit basis-index mapping.
        let theta = -1.3;
        let g = Gate::pair(GateType::CRX, 2, 0);
        let u = gate_unitary(&g, Some(theta), 3).unwrap();
        let local = GateType::CRX.local_matrix(Some(theta)).unwrap();
        let n = 3;
        let bit = |x: usize, q: usize| (x >> (n - 1 - q)) & 1;
        let mut direct = CMatrix::zeros(8, 8);
        for col in 0..8 {
            let li = bit(col, 2) * 2 + bit(col, 0);
            for lo in 0..4 {
                let mut row = col;
                for (j, &w) in [2usize, 0].iter().enumerate() {
                    let b = (lo >> (1 - j)) & 1;
                    let mask = 1 << (n - 1 - w);
                    row = if b == 1 { row | mask } else { row & !mask };
                }
                direct[(row, col)] += local.at(lo, li);
            }
        }
        assert!(close(u.matrix(), &direct, 1e-14));
    }

    #[test]
    fn every_gate_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for t in GateType::ALL {
            let g = if t.arity() == 1 { Gate::single(t, 2) } else { Gate::pair(t, 3, 1) };
            let theta = t.is_parametrized().then(|| rng.gen_range(-6.0..6.0));
            let u = gate_unitary(&g, theta, 4).unwrap();
            assert!(u.unitarity_defect() < 1e-10, "{t}");
        }
    }

    #[test]
    fn empty_circuit_is_identity() {
        let c0 = Circuit::empty(2).unwrap();
        let u = circuit_unitary(&c0, &[]).unwrap();
        assert!(close(u.matrix(), &identity(4), 1e-15));
    }

    #[test]
    fn double_hadamard_is_identity() {
        let h = Gate::single(GateType::H, 0);
        let c0 = Circuit::new(1, vec![h, h]).unwrap();
        assert!(close(circuit_unitary(&c0, &[]).unwrap().matrix(), &identity(2), 1e-14));
    }

    #[test]
    fn hadamard_on_zero() {
        let c0 = Circuit::new(1, vec![Gate::single(GateType::H, 0)]).unwrap();
        let out = apply_circuit(&c0, &[], &StateVector::zero(1)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out.amplitudes()[0] - c(s, 0.0)).norm() < 1e-15);
        assert!((out.amplitudes()[1] - c(s, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn param_length_mismatch_is_an_error() {
        let c0 = Circuit::new(1, vec![Gate::single(GateType::RX, 0)]).unwrap();
        assert!(circuit_unitary(&c0, &[]).is_err());
        assert!(circuit_unitary(&c0, &[0.1, 0.2]).is_err());
        assert!(apply_circuit(&c0, &[0.1], &StateVector::zero(2)).is_err());
    }

    #[test]
    fn statevector_agrees_with_dense_unitary_on_nine_qubits() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let circ = random_circuit(9, 5, &mut rng).unwrap();
        let params: Vec<f64> = (0..circ.param_count()).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let psi = StateVector::new(haar_state(512, &mut rng)).unwrap();
        let fast = apply_circuit(&circ, &params, &psi).unwrap();
        let u = circuit_unitary(&circ, &params).unwrap();
        let dense = u.matrix() * psi.amplitudes();
        assert!((fast.amplitudes() - dense).norm() < 1e-10);
        assert!((fast.amplitudes().norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn composition_of_concatenated_circuits() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let a = random_circuit(3, 6, &mut rng).unwrap();
            let b = random_circuit(3, 4, &mut rng).unwrap();
            let pa: Vec<f64> = (0..a.param_count()).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let pb: Vec<f64> = (0..b.param_count()).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let ab = a.concat(&b).unwrap();
            let pab: Vec<f64> = pa.iter().chain(&pb).copied().collect();
            let lhs = circuit_unitary(&ab, &pab).unwrap();
            let rhs = circuit_unitary(&b, &pb).unwrap().into_matrix() * circuit_unitary(&a, &pa).unwrap().into_matrix();
            assert!(close(lhs.matrix(), &rhs, 1e-10));
            assert!(lhs.unitarity_defect() < 1e-10);
        }
    }
}
