//! Quantum Fourier transform fidelity over the MUB anchor states.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::circuit::sim::{apply_local_columns, local_ops};
use crate::circuit::{Circuit, UnitaryOp};
use crate::error::{QnasError, Result};
use crate::linalg::CMatrix;
use crate::mub::build_mub;
use crate::optim::{minimize_multistart, TrainConfig, TrainResult};

/// `(1/√d) Σ e^{2πi st/d} |t⟩⟨s|`.
pub fn qft_unitary(n: usize) -> Result<UnitaryOp> {
    if n == 0 {
        return Err(QnasError::InvalidArgument("QFT needs at least one qubit".into()));
    }
    let d = 1usize << n;
    let norm = 1.0 / (d as f64).sqrt();
    let m = CMatrix::from_fn(d, d, |t, s| Complex64::from_polar(norm, 2.0 * PI * ((s * t) % d) as f64 / d as f64));
    UnitaryOp::from_matrix(m)
}

/// Mean anchor fidelity `(1/K) Σ |⟨ψ_k| U_QFT† U(θ) |ψ_k⟩|²`.
#[derive(Clone, Debug)]
pub struct QftObjective {
    n_qubits: usize,
    anchors: CMatrix,
    targets: CMatrix,
}

impl QftObjective {
    pub fn new(n_qubits: usize) -> Result<Self> {
        let anchors = build_mub(n_qubits)?.anchor_matrix();
        let targets = qft_unitary(n_qubits)?.matrix() * &anchors;
        Ok(QftObjective { n_qubits, anchors, targets })
    }

    pub fn n_anchors(&self) -> usize {
        self.anchors.ncols()
    }

    pub fn fidelity(&self, circuit: &Circuit, params: &[f64]) -> Result<f64> {
        if circuit.n_qubits() != self.n_qubits {
            return Err(QnasError::DimensionMismatch { expected: self.n_qubits, got: circuit.n_qubits() });
        }
        let ops = local_ops(circuit, params)?;
        let mut out = self.anchors.clone();
        for (g, op) in circuit.gates().iter().zip(&ops) {
            apply_local_columns(&mut out, self.n_qubits, g.wires(), op);
        }
        let k = self.n_anchors();
        let total: f64 = (0..k).map(|j| self.targets.column(j).dotc(&out.column(j)).norm_sqr()).sum();
        Ok(total / k as f64)
    }

    /// Trains the circuit; `value` is the best mean fidelity.
    pub fn train<R: Rng + ?Sized>(&self, circuit: &Circuit, cfg: &TrainConfig, rng: &mut R) -> Result<TrainResult> {
        self.fidelity(circuit, &vec![0.0; circuit.param_count()])?;
        let loss = |p: &[f64]| 1.0 - self.fidelity(circuit, p).unwrap_or(f64::NAN);
        let mut r = minimize_multistart(&loss, circuit.param_count(), cfg, rng);
        r.value = 1.0 - r.value;
        r.trace.iter_mut().for_each(|v| *v = 1.0 - *v);
        Ok(r)
    }

    pub fn evaluate<R: Rng + ?Sized>(&self, circuit: &Circuit, cfg: &TrainConfig, rng: &mut R) -> Result<f64> {
        Ok(self.train(circuit, cfg, rng)?.value.clamp(0.0, 1.0))
    }
}

/// Phase-corrected controlled phase, Hadamards and a CNOT swap.
pub fn textbook_qft2() -> (Circuit, Vec<f64>) {
    use crate::circuit::{Gate, GateType::*};
    let gates = vec![
        Gate::single(H, 0),
        Gate::pair(CRZ, 1, 0),
        Gate::single(RZ, 1),
        Gate::single(H, 1),
        Gate::pair(CX, 0, 1),
        Gate::pair(CX, 1, 0),
        Gate::pair(CX, 0, 1),
    ];
    (Circuit::new(2, gates).expect("valid"), vec![PI / 2.0, PI / 4.0])
}
