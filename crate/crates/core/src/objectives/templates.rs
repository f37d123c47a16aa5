//! The 19 layered hardware-efficient templates used as fixed-ansatz
//! baselines. Layers are described in data files by gate type and a wire
//! pattern; a depth-`L` template repeats its layer `L` times.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateType};
use crate::error::{QnasError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WirePattern {
    /// Every qubit.
    Each,
    /// Every qubit except the first and last.
    Inner,
    /// `(i+1 → i)` from the bottom up.
    Ladder,
    /// `Ladder` closed by `(n-1 → 0)`.
    LadderClosed,
    /// Every ordered pair, controls from the bottom up.
    AllToAll,
    /// `(2k+1 → 2k)`.
    PairsEven,
    /// `(2k+2 → 2k+1)`.
    PairsOdd,
    /// `(n-1 → 0)`, then `(i → i+1)` from the bottom up.
    RingDown,
    /// `(n-1 → n-2)`, `(0 → n-1)`, then `(i → i-1)` from the top down.
    RingUp,
}

impl WirePattern {
    pub fn wires(self, n: usize) -> Vec<Vec<usize>> {
        let pair = |a: usize, b: usize| vec![a, b];
        match self {
            WirePattern::Each => (0..n).map(|q| vec![q]).collect(),
            WirePattern::Inner => (1..n.saturating_sub(1)).map(|q| vec![q]).collect(),
            WirePattern::Ladder => (0..n.saturating_sub(1)).rev().map(|i| pair(i + 1, i)).collect(),
            WirePattern::LadderClosed => {
                let mut v = WirePattern::Ladder.wires(n);
                if n > 2 {
                    v.push(pair(n - 1, 0));
                }
                v
            }
            WirePattern::AllToAll => {
                (0..n).rev().flat_map(|c| (0..n).rev().filter(move |&t| t != c).map(move |t| pair(c, t))).collect()
            }
            WirePattern::PairsEven => (0..n / 2).map(|k| pair(2 * k + 1, 2 * k)).collect(),
            WirePattern::PairsOdd => (0..(n.saturating_sub(1)) / 2).map(|k| pair(2 * k + 2, 2 * k + 1)).collect(),
            WirePattern::RingDown => {
                if n < 3 {
                    return WirePattern::Ladder.wires(n);
                }
                let mut v = vec![pair(n - 1, 0)];
                v.extend((0..n - 1).rev().map(|i| pair(i, i + 1)));
                v
            }
            WirePattern::RingUp => {
                if n < 3 {
                    return WirePattern::Ladder.wires(n);
                }
                let mut v = vec![pair(n - 1, n - 2), pair(0, n - 1)];
                v.extend((1..n - 1).map(|i| pair(i, i - 1)));
                v
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerStep {
    #[serde(rename = "type")]
    pub gate_type: GateType,
    pub wires: WirePattern,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Template {
    pub id: usize,
    /// Width the template is drawn for.
    pub n_qubits: usize,
    /// Gates in one layer at `n_qubits`.
    pub gates_per_layer: usize,
    pub layer: Vec<LayerStep>,
}

impl Template {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn layer_gates(&self, n: usize) -> Result<Vec<Gate>> {
        let mut gates = Vec::new();
        for step in &self.layer {
            if step.gate_type.arity() == 2 && n < 2 {
                return Err(QnasError::InvalidArgument(format!("template {} needs two qubits", self.id)));
            }
            for w in step.wires.wires(n) {
                gates.push(Gate::new(step.gate_type, &w)?);
            }
        }
        Ok(gates)
    }

    pub fn circuit(&self, n: usize, depth: usize) -> Result<Circuit> {
        if depth == 0 {
            return Err(QnasError::InvalidArgument("depth must be at least 1".into()));
        }
        let layer = self.layer_gates(n)?;
        Circuit::new(n, (0..depth).flat_map(|_| layer.iter().copied()).collect())
    }
}

macro_rules! shipped {
    ($($n:literal),*) => {
        [$(include_str!(concat!("../../data/templates/template_", $n, ".json"))),*]
    };
}

const SHIPPED: [&str; 19] = shipped!(
    "01", "02", "03", "04", "05", "06", "07", "08", "09", "10", "11", "12", "13", "14", "15", "16", "17", "18", "19"
);

pub const N_TEMPLATES: usize = 19;

/// All shipped templates in id order.
pub fn templates() -> Vec<Template> {
    SHIPPED.iter().map(|s| Template::from_json(s).expect("shipped template parses")).collect()
}

/// Template `id` (1-based) laid out on `n_qubits` wires with `depth` layers.
pub fn ansatz_catalog(id: usize, n_qubits: usize, depth: usize) -> Result<Circuit> {
    if !(1..=N_TEMPLATES).contains(&id) {
        return Err(QnasError::InvalidArgument(format!("unknown template id {id}")));
    }
    Template::from_json(SHIPPED[id - 1])?.circuit(n_qubits, depth)
}
