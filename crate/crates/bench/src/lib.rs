//! Fixtures shared by the benchmarks.

use qnas_core::circuit::random_circuit;
use qnas_core::Circuit;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `count` seeded random circuits of `n_gates` gates on `n_qubits` wires.
pub fn circuits(n_qubits: usize, n_gates: usize, count: usize, seed: u64) -> Vec<Circuit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_circuit(n_qubits, n_gates, &mut rng).expect("valid width")).collect()
}
