//! Black-box objectives scored on trained circuits, and fixed baselines.

pub mod maxcut;
pub mod qft;
pub mod qgan;
pub mod templates;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{QnasError, Result};
use crate::optim::{minimize_multistart, TrainConfig, TrainResult};

pub use maxcut::{
    brute_force_maxcut, maxcut_ansatz, maxcut_ansatz_value, maxcut_instance, MaxCutObjective, WeightedGraph,
};
pub use qft::{qft_unitary, textbook_qft2, QftObjective};
pub use qgan::{kl_divergence, qgan_objective, target_distribution, train_qgan, QganResult, QganSettings};
pub use templates::{ansatz_catalog, templates, Template, N_TEMPLATES};

/// Circuit parameters tied to a smaller shared vector:
/// gate `i` gets `scale_i · shared[index_i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamBinding {
    n_shared: usize,
    map: Vec<(usize, f64)>,
}

impl ParamBinding {
    pub fn new(n_shared: usize, map: Vec<(usize, f64)>) -> Result<Self> {
        if let Some(&(i, _)) = map.iter().find(|(i, _)| *i >= n_shared) {
            return Err(QnasError::InvalidArgument(format!("shared index {i} out of range")));
        }
        Ok(ParamBinding { n_shared, map })
    }

    pub fn n_shared(&self) -> usize {
        self.n_shared
    }

    pub fn expand(&self, shared: &[f64]) -> Vec<f64> {
        self.map.iter().map(|&(i, s)| s * shared[i]).collect()
    }
}

/// Minimizes `loss` over the circuit's parameters.
pub fn train_circuit<R: Rng + ?Sized>(
    circuit: &Circuit,
    loss: &(dyn Fn(&[f64]) -> f64 + Sync),
    cfg: &TrainConfig,
    rng: &mut R,
) -> TrainResult {
    minimize_multistart(loss, circuit.param_count(), cfg, rng)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    Qft,
    MaxCut,
    Qgan,
}

impl std::str::FromStr for ObjectiveKind {
    type Err = QnasError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qft" => Ok(ObjectiveKind::Qft),
            "maxcut" => Ok(ObjectiveKind::MaxCut),
            "qgan" => Ok(ObjectiveKind::Qgan),
            _ => Err(QnasError::Configuration(format!("unknown objective {s}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub kind: ObjectiveKind,
    pub n_qubits: usize,
    pub n_gates: usize,
    #[serde(default = "default_graphs")]
    pub maxcut_graphs: usize,
    #[serde(default)]
    pub maxcut_first_seed: u64,
    #[serde(default)]
    pub qgan: QganSettings,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub seed: u64,
}

fn default_graphs() -> usize {
    10
}

impl ObjectiveSpec {
    /// Experiment settings: QFT on 2 qubits with 6 gates, MaxCut on 9 qubits
    /// with 5 gates over 10 graphs, QGAN on 3 qubits with 12 gates.
    pub fn preset(kind: ObjectiveKind) -> Self {
        let (n_qubits, n_gates) = match kind {
            ObjectiveKind::Qft => (2, 6),
            ObjectiveKind::MaxCut => (9, 5),
            ObjectiveKind::Qgan => (3, 12),
        };
        ObjectiveSpec {
            kind,
            n_qubits,
            n_gates,
            maxcut_graphs: 10,
            maxcut_first_seed: 0,
            qgan: QganSettings::default(),
            train: TrainConfig::default(),
            seed: 0,
        }
    }

    pub fn maximize(&self) -> bool {
        self.kind != ObjectiveKind::Qgan
    }

    /// Value oriented so that larger is better.
    pub fn score(&self, value: f64) -> f64 {
        if self.maximize() {
            value
        } else {
            -value
        }
    }

    pub fn build(&self) -> Result<Objective> {
        let inner = match self.kind {
            ObjectiveKind::Qft => Built::Qft(QftObjective::new(self.n_qubits)?),
            ObjectiveKind::MaxCut => {
                Built::MaxCut(MaxCutObjective::seeded(self.n_qubits, self.maxcut_graphs, self.maxcut_first_seed)?)
            }
            ObjectiveKind::Qgan => {
                if self.n_qubits != 3 {
                    return Err(QnasError::Configuration("the QGAN target has 8 bins, so 3 qubits".into()));
                }
                Built::Qgan
            }
        };
        Ok(Objective { spec: self.clone(), inner })
    }
}

#[derive(Clone, Debug)]
enum Built {
    Qft(QftObjective),
    MaxCut(MaxCutObjective),
    Qgan,
}

/// An objective ready to score circuits.
#[derive(Clone, Debug)]
pub struct Objective {
    pub spec: ObjectiveSpec,
    inner: Built,
}

/// FNV-1a of the circuit's JSON, so a circuit always trains from the same
/// starting points under a given seed.
pub fn circuit_seed(circuit: &Circuit, seed: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
    for b in circuit.to_json().bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

impl Objective {
    /// Raw objective value of the trained circuit.
    pub fn evaluate(&self, circuit: &Circuit) -> Result<f64> {
        if circuit.n_qubits() != self.spec.n_qubits {
            return Err(QnasError::DimensionMismatch { expected: self.spec.n_qubits, got: circuit.n_qubits() });
        }
        let seed = circuit_seed(circuit, self.spec.seed);
        let v = match &self.inner {
            Built::Qft(q) => q.evaluate(circuit, &self.spec.train, &mut ChaCha8Rng::seed_from_u64(seed))?,
            Built::MaxCut(m) => m.evaluate(circuit, &self.spec.train, seed)?,
            Built::Qgan => qgan_objective(circuit, &self.spec.qgan, seed)?,
        };
        if !v.is_finite() {
            return Err(QnasError::Objective(format!("non-finite objective for {circuit}")));
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Gate, GateType};

    #[test]
    fn rx_flip_reaches_pi() {
        let circ = Circuit::new(1, vec![Gate::single(GateType::RX, 0)]).unwrap();
        let loss = |p: &[f64]| {
            let probs = maxcut::output_probabilities(&circ, p).unwrap();
            -probs[1]
        };
        let r = train_circuit(&circ, &loss, &TrainConfig::default(), &mut ChaCha8Rng::seed_from_u64(0));
        assert!((r.value + 1.0).abs() < 1e-9);
        assert!((r.params[0].abs() - std::f64::consts::PI).abs() < 1e-4);
        assert!((loss(&r.params) - r.value).abs() < 1e-15);
    }

    #[test]
    fn presets_and_orientation() {
        let q = ObjectiveSpec::preset(ObjectiveKind::Qft);
        assert_eq!((q.n_qubits, q.n_gates), (2, 6));
        let m = ObjectiveSpec::preset(ObjectiveKind::MaxCut);
        assert_eq!((m.n_qubits, m.n_gates, m.maxcut_graphs), (9, 5, 10));
        let g = ObjectiveSpec::preset(ObjectiveKind::Qgan);
        assert_eq!((g.n_qubits, g.n_gates), (3, 12));
        assert!(!g.maximize());
        assert_eq!(g.score(0.5), -0.5);
        let back: ObjectiveSpec = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
        let minimal: ObjectiveSpec = serde_json::from_str(r#"{"kind":"maxcut","n_qubits":9,"n_gates":5}"#).unwrap();
        assert_eq!(minimal, m);
    }

    #[test]
    fn evaluation_is_deterministic() {
        let obj = ObjectiveSpec::preset(ObjectiveKind::Qft).build().unwrap();
        let (c, _) = textbook_qft2();
        let a = obj.evaluate(&c).unwrap();
        assert_eq!(a, obj.evaluate(&c).unwrap());
        assert!(a > 0.999);
        assert!(obj.evaluate(&Circuit::empty(3).unwrap()).is_err());
    }
}
