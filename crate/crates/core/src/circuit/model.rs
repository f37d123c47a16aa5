use std::fmt;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::gate::{Gate, GateType};
use crate::error::{QnasError, Result};

/// An ordered gate sequence on `n_qubits` wires.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(QnasError::InvalidCircuit("n_qubits must be positive".into()));
        }
        for g in &gates {
            g.validate(n_qubits)?;
        }
        Ok(Circuit { n_qubits, gates })
    }

    pub fn empty(n_qubits: usize) -> Result<Self> {
        Circuit::new(n_qubits, Vec::new())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn param_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_parametrized()).count()
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// Replace the gate at `index`, checking wire validity.
    pub fn set_gate(&mut self, index: usize, gate: Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.gates[index] = gate;
        Ok(())
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &Circuit) -> Result<Circuit> {
        if self.n_qubits != other.n_qubits {
            return Err(QnasError::DimensionMismatch { expected: self.n_qubits, got: other.n_qubits });
        }
        let mut gates = self.gates.clone();
        gates.extend_from_slice(&other.gates);
        Ok(Circuit { n_qubits: self.n_qubits, gates })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("circuit serialization")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}q]", self.n_qubits)?;
        for g in &self.gates {
            write!(f, " {g}")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct GateJson {
    #[serde(rename = "type")]
    gate_type: GateType,
    wires: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct CircuitJson {
    n_qubits: usize,
    gates: Vec<GateJson>,
}

impl Serialize for Circuit {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CircuitJson {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().map(|g| GateJson { gate_type: g.gate_type, wires: g.wires().to_vec() }).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Circuit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = CircuitJson::deserialize(d)?;
        let gates = raw
            .gates
            .into_iter()
            .map(|g| Gate::new(g.gate_type, &g.wires))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        Circuit::new(raw.n_qubits, gates).map_err(serde::de::Error::custom)
    }
}

/// Gate types usable on an `n_qubits`-wire circuit.
pub fn catalog_for(n_qubits: usize) -> &'static [GateType] {
    if n_qubits >= 2 {
        &GateType::ALL
    } else {
        &GateType::SINGLE_QUBIT
    }
}

/// Uniform wires (without replacement) for a gate of the given type.
pub fn random_wires<R: Rng + ?Sized>(gate_type: GateType, n_qubits: usize, rng: &mut R) -> Gate {
    let idx = sample(rng, n_qubits, gate_type.arity());
    let wires: Vec<usize> = idx.into_iter().collect();
    Gate::new(gate_type, &wires).expect("sampled wires are distinct")
}

/// Random gate: type uniform over the catalog, wires uniform without replacement.
pub fn random_gate<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Gate {
    let catalog = catalog_for(n_qubits);
    let t = catalog[rng.gen_range(0..catalog.len())];
    random_wires(t, n_qubits, rng)
}

pub fn random_circuit<R: Rng + ?Sized>(n_qubits: usize, n_gates: usize, rng: &mut R) -> Result<Circuit> {
    if n_gates == 0 {
        return Err(QnasError::InvalidArgument("n_gates must be at least 1".into()));
    }
    if n_qubits == 0 {
        return Err(QnasError::InvalidArgument("n_qubits must be positive".into()));
    }
    let gates = (0..n_gates).map(|_| random_gate(n_qubits, rng)).collect();
    Circuit::new(n_qubits, gates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn json_schema_roundtrip() {
        let json = r#"{"n_qubits":4,"gates":[{"type":"CRZ","wires":[2,3]},{"type":"H","wires":[0]}]}"#;
        let c = Circuit::from_json(json).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.param_count(), 1);
        assert_eq!(c.to_json(), json);
    }

    #[test]
    fn json_rejects_bad_wires() {
        assert!(Circuit::from_json(r#"{"n_qubits":2,"gates":[{"type":"CX","wires":[0,2]}]}"#).is_err());
        assert!(Circuit::from_json(r#"{"n_qubits":2,"gates":[{"type":"RX","wires":[0,1]}]}"#).is_err());
    }

    #[test]
    fn single_qubit_sampling_uses_single_qubit_gates() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = random_circuit(1, 5, &mut rng).unwrap();
        assert!(c.gates().iter().all(|g| g.arity() == 1));
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let a = random_circuit(3, 12, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let b = random_circuit(3, 12, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert_eq!(a, b);
        let other = random_circuit(3, 12, &mut ChaCha8Rng::seed_from_u64(12)).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn type_frequencies_are_uniform() {
        // 1000 circuits of one gate; each type has p = 1/16.
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut counts = [0usize; 16];
        let draws = 1000;
        for _ in 0..draws {
            let c = random_circuit(2, 1, &mut rng).unwrap();
            counts[c.gates()[0].gate_type.index()] += 1;
        }
        let p = 1.0 / 16.0;
        let mean = draws as f64 * p;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for (i, &k) in counts.iter().enumerate() {
            assert!((k as f64 - mean).abs() <= 3.0 * sigma, "type {i}: {k}");
        }
    }

    #[test]
    fn zero_gates_rejected() {
        assert!(random_circuit(2, 0, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }
}
