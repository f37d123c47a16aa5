//! Fixed-size numeric placeholder for a circuit: an `(n+1) × N` matrix whose
//! first `n` rows mark wires and whose last row holds a gate-type code.

use nalgebra::DMatrix;

use super::gate::{Gate, GateType};
use super::model::{catalog_for, Circuit};
use crate::error::{QnasError, Result};

const FIRST_WIRE: f64 = 0.75;
const SECOND_WIRE: f64 = 0.25;

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixRepr {
    n_qubits: usize,
    matrix: DMatrix<f64>,
}

impl MatrixRepr {
    pub fn new(n_qubits: usize, matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != n_qubits + 1 {
            return Err(QnasError::DimensionMismatch { expected: n_qubits + 1, got: matrix.nrows() });
        }
        if matrix.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(QnasError::InvalidArgument("matrix entries must lie in [0, 1]".into()));
        }
        Ok(MatrixRepr { n_qubits, matrix })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_gates(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

pub fn encode_matrix(circuit: &Circuit) -> Result<MatrixRepr> {
    let n = circuit.n_qubits();
    for g in circuit.gates() {
        g.validate(n)?;
    }
    let mut m = DMatrix::zeros(n + 1, circuit.len());
    for (j, g) in circuit.gates().iter().enumerate() {
        match g.wires() {
            [w] => m[(*w, j)] = 1.0,
            [a, b] => {
                m[(*a, j)] = FIRST_WIRE;
                m[(*b, j)] = SECOND_WIRE;
            }
            _ => unreachable!(),
        }
        m[(n, j)] = g.gate_type.representative_number();
    }
    Ok(MatrixRepr { n_qubits: n, matrix: m })
}

/// Decode column by column. The gate type is the catalog entry whose
/// representative number is nearest the last-row value; wires are the rows
/// with the largest values, in decreasing order, lowest row on ties.
/// Entries of `catalog` wider than `n_qubits` are skipped; an empty
/// effective catalog falls back to the full one for `n_qubits`.
pub fn decode_matrix(repr: &MatrixRepr, n_qubits: usize, catalog: &[GateType]) -> Circuit {
    let mut usable: Vec<GateType> = catalog.iter().copied().filter(|t| t.arity() <= n_qubits).collect();
    if usable.is_empty() {
        usable = catalog_for(n_qubits).to_vec();
    }
    let m = &repr.matrix;
    let rows = n_qubits.min(m.nrows().saturating_sub(1));
    let code_row = m.nrows() - 1;
    let mut gates = Vec::with_capacity(m.ncols());
    for j in 0..m.ncols() {
        let code = m[(code_row, j)];
        let mut best = usable[0];
        for &t in &usable[1..] {
            if (t.representative_number() - code).abs() < (best.representative_number() - code).abs() {
                best = t;
            }
        }
        let mut order: Vec<usize> = (0..n_qubits).collect();
        // rows beyond the matrix count as zero
        let value = |r: usize| if r < rows { m[(r, j)] } else { 0.0 };
        order.sort_by(|&a, &b| value(b).total_cmp(&value(a)).then(a.cmp(&b)));
        let gate = Gate::new(best, &order[..best.arity()]).expect("distinct in-range wires");
        gates.push(gate);
    }
    Circuit::new(n_qubits, gates).expect("decoded gates are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::model::random_circuit;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_h() {
        let c0 = Circuit::new(1, vec![Gate::single(GateType::H, 0)]).unwrap();
        let r = encode_matrix(&c0).unwrap();
        assert_eq!(r.matrix().shape(), (2, 1));
        assert_eq!(r.matrix()[(1, 0)], GateType::H.representative_number());
    }

    #[test]
    fn published_vector_representation_decodes() {
        #[rustfmt::skip]
        let m = DMatrix::from_row_slice(5, 5, &[
            0.000, 0.000, 0.000, 0.250, 0.750,
            1.000, 0.000, 0.750, 0.000, 0.250,
            0.000, 0.000, 0.250, 0.000, 0.000,
            0.000, 1.000, 0.000, 0.750, 0.000,
            0.021, 0.350, 0.450, 0.079, 0.750,
        ]);
        let r = MatrixRepr::new(4, m).unwrap();
        let c0 = decode_matrix(&r, 4, &GateType::ALL);
        let names: Vec<String> = c0.gates().iter().map(|g| g.to_string()).collect();
        assert_eq!(names, ["X(1)", "RZ(3)", "CRX(1,2)", "CY(3,0)", "RXX(0,1)"]);
    }

    #[test]
    fn decode_is_total_on_arbitrary_matrices() {
        let z = MatrixRepr::new(3, DMatrix::zeros(4, 6)).unwrap();
        let c0 = decode_matrix(&z, 3, &GateType::ALL);
        assert_eq!(c0.len(), 6);
        // all-zero wire rows: ties resolve to the lowest rows
        assert!(c0.gates().iter().all(|g| g.wires()[0] == 0));
        let one = MatrixRepr::new(1, DMatrix::from_element(2, 3, 0.5)).unwrap();
        assert!(decode_matrix(&one, 1, &GateType::ALL).gates().iter().all(|g| g.arity() == 1));
    }

    #[test]
    fn entries_outside_unit_interval_rejected() {
        assert!(MatrixRepr::new(1, DMatrix::from_element(2, 1, 1.5)).is_err());
        assert!(MatrixRepr::new(2, DMatrix::zeros(2, 1)).is_err());
    }

    #[test]
    fn last_row_is_interior() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c0 = random_circuit(5, 40, &mut rng).unwrap();
        let r = encode_matrix(&c0).unwrap();
        assert!(r.matrix().row(5).iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn round_trip_100_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for k in 0..100 {
            let n = 1 + k % 9;
            let c0 = random_circuit(n, 1 + k % 20, &mut rng).unwrap();
            let back = decode_matrix(&encode_matrix(&c0).unwrap(), n, &GateType::ALL);
            assert_eq!(back, c0);
        }
    }

    proptest! {
        #[test]
        fn round_trip_prop(seed in any::<u64>(), n in 1usize..=9, len in 1usize..=20) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c0 = random_circuit(n, len, &mut rng).unwrap();
            let back = decode_matrix(&encode_matrix(&c0).unwrap(), n, &GateType::ALL);
            prop_assert_eq!(back, c0);
        }
    }
}
