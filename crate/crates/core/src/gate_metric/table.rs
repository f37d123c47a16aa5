//! Precomputed gate-pair distances keyed by relative wire placement.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generator::{compact_pair, core_distance};
use super::shape::{symmetric_shape_distance, ShapeConfig};
use crate::circuit::{Gate, GateType};
use crate::error::{QnasError, Result};

/// Largest system on which shape distances are computed; bigger systems
/// reuse these values.
pub const MAX_SHAPE_QUBITS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateDistances {
    pub d_core: f64,
    pub d_shape: f64,
    pub d_gate: f64,
}

impl GateDistances {
    fn combine(d_core: f64, d_shape: f64) -> Self {
        let d_gate = if d_shape.is_finite() { 0.5 * (d_core + d_shape) } else { f64::INFINITY };
        GateDistances { d_core, d_shape, d_gate }
    }
}

/// Canonical unordered key: wires renumbered by first appearance, and the
/// smaller of the two orientations.
pub fn pair_key(g1: &Gate, g2: &Gate) -> (Gate, Gate) {
    let (a, b, _) = compact_pair(g1, g2);
    let (b2, a2, _) = compact_pair(g2, g1);
    if (a, b) <= (b2, a2) {
        (a, b)
    } else {
        (b2, a2)
    }
}

#[derive(Clone, Debug)]
pub struct GateDistanceTable {
    shape_qubits: usize,
    entries: HashMap<(Gate, Gate), GateDistances>,
}

#[derive(Serialize, Deserialize)]
struct Row {
    type1: String,
    wires1: String,
    type2: String,
    wires2: String,
    d_core: f64,
    d_shape: f64,
    d_gate: f64,
}

fn wires_str(g: &Gate) -> String {
    g.wires().iter().map(|w| w.to_string()).collect::<Vec<_>>().join("-")
}

fn parse_gate(t: &str, w: &str) -> Result<Gate> {
    let gt: GateType = t.parse()?;
    let wires = w
        .split('-')
        .map(|x| x.trim().parse::<usize>().map_err(|e| QnasError::InvalidArgument(format!("wire '{x}': {e}"))))
        .collect::<Result<Vec<_>>>()?;
    Gate::new(gt, &wires)
}

/// Canonical keys for all gate pairs that fit on `m` qubits.
pub fn canonical_keys(m: usize) -> Vec<(Gate, Gate)> {
    let placements = |t: GateType| -> Vec<Gate> {
        let mut v = Vec::new();
        for a in 0..m {
            if t.arity() == 1 {
                v.push(Gate::single(t, a));
            } else {
                for b in 0..m {
                    if a != b {
                        v.push(Gate::pair(t, a, b));
                    }
                }
            }
        }
        v
    };
    let mut keys = Vec::new();
    for t1 in GateType::ALL.into_iter().filter(|t| t.arity() <= m) {
        for t2 in GateType::ALL.into_iter().filter(|t| t.arity() <= m) {
            for g1 in placements(t1) {
                for g2 in placements(t2) {
                    let (a, b, _) = compact_pair(&g1, &g2);
                    if (a, b) == (g1, g2) && pair_key(&g1, &g2) == (g1, g2) {
                        keys.push((g1, g2));
                    }
                }
            }
        }
    }
    keys
}

impl GateDistanceTable {
    /// System size the shape values were computed on.
    pub fn shape_qubits(&self) -> usize {
        self.shape_qubits
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distances for two gates of the same circuit.
    pub fn get(&self, g1: &Gate, g2: &Gate) -> Result<GateDistances> {
        self.entries.get(&pair_key(g1, g2)).copied().ok_or_else(|| {
            QnasError::MissingTableEntry(format!("{g1} / {g2} on a {}-qubit shape table", self.shape_qubits))
        })
    }

    pub fn d_gate(&self, g1: &Gate, g2: &Gate) -> Result<f64> {
        Ok(self.get(g1, g2)?.d_gate)
    }

    /// Entries sorted by key.
    pub fn entries(&self) -> Vec<((Gate, Gate), GateDistances)> {
        let mut v: Vec<_> = self.entries.iter().map(|(k, d)| (*k, *d)).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for ((a, b), d) in self.entries() {
            w.serialize(Row {
                type1: a.gate_type.to_string(),
                wires1: wires_str(&a),
                type2: b.gate_type.to_string(),
                wires2: wires_str(&b),
                d_core: d.d_core,
                d_shape: d.d_shape,
                d_gate: d.d_gate,
            })
            .map_err(|e| QnasError::InvalidArgument(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| QnasError::InvalidArgument(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn from_csv(text: &str, shape_qubits: usize) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let mut entries = HashMap::new();
        for row in r.deserialize::<Row>() {
            let row = row.map_err(|e| QnasError::InvalidArgument(e.to_string()))?;
            let (a, b) = (parse_gate(&row.type1, &row.wires1)?, parse_gate(&row.type2, &row.wires2)?);
            let d = GateDistances { d_core: row.d_core, d_shape: row.d_shape, d_gate: row.d_gate };
            entries.insert(pair_key(&a, &b), d);
        }
        Ok(GateDistanceTable { shape_qubits, entries })
    }
}

const SHIPPED_N2: &str = include_str!("../../data/gate_table_n2.csv");
const SHIPPED_N3: &str = include_str!("../../data/gate_table_n3.csv");
const SHIPPED_N4: &str = include_str!("../../data/gate_table_n4.csv");

impl GateDistanceTable {
    /// Table for an `n_qubits` circuit with the default shape settings. The
    /// 2, 3 and 4 qubit tables are precomputed; the 1-qubit table is built
    /// on demand.
    pub fn for_qubits(n_qubits: usize) -> Result<Self> {
        match n_qubits.min(MAX_SHAPE_QUBITS) {
            0 => Err(QnasError::InvalidArgument("need at least one qubit".into())),
            1 => pairwise_gate_table(1, &ShapeConfig::default()),
            2 => Self::from_csv(SHIPPED_N2, 2),
            3 => Self::from_csv(SHIPPED_N3, 3),
            _ => Self::from_csv(SHIPPED_N4, 4),
        }
    }
}

/// Distances for every gate pair of an `n_qubits` circuit, up to wire
/// relabelling. Shape values are computed on `min(n_qubits, 4)` qubits.
pub fn pairwise_gate_table(n_qubits: usize, cfg: &ShapeConfig) -> Result<GateDistanceTable> {
    if n_qubits == 0 {
        return Err(QnasError::InvalidArgument("need at least one qubit".into()));
    }
    let m = n_qubits.min(MAX_SHAPE_QUBITS);
    let keys = canonical_keys(m);
    let values: Vec<Result<GateDistances>> = keys
        .par_iter()
        .map(|(a, b)| {
            let core = core_distance(a, b, m)?;
            let shape = symmetric_shape_distance(a, b, m, cfg)?;
            Ok(GateDistances::combine(core, shape))
        })
        .collect();
    let mut entries = HashMap::with_capacity(keys.len());
    for (k, v) in keys.into_iter().zip(values) {
        entries.insert(k, v?);
    }
    Ok(GateDistanceTable { shape_qubits: m, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateType::*;

    #[test]
    fn keys_are_canonical_and_swap_invariant() {
        let (a, b) = (Gate::pair(CRZ, 5, 2), Gate::single(RX, 7));
        assert_eq!(pair_key(&a, &b), pair_key(&b, &a));
        let (x, y) = pair_key(&a, &b);
        assert!(x.wires().iter().chain(y.wires()).all(|&w| w < 3));
    }

    #[test]
    fn key_counts() {
        // ordered wire patterns: 1-1: 2, 1-2: 3, 2-1: 3, 2-2: 7
        let n_single = 7;
        let n_pair = 9;
        let ordered = n_single * n_single * 2 + 2 * n_single * n_pair * 3 + n_pair * n_pair * 7;
        let keys = canonical_keys(4);
        assert!(keys.len() * 2 >= ordered && keys.len() < ordered);
        assert_eq!(canonical_keys(1).len(), 7 * 8 / 2);
    }

    #[test]
    fn small_table_round_trips_through_csv() {
        let cfg = ShapeConfig { restarts: 2, ..ShapeConfig::default() };
        let table = pairwise_gate_table(1, &cfg).unwrap();
        assert_eq!(table.len(), 28);
        let back = GateDistanceTable::from_csv(&table.to_csv().unwrap(), 1).unwrap();
        for ((a, b), d) in table.entries() {
            let e = back.get(&b, &a).unwrap();
            assert_eq!(d, e);
        }
        let hz = table.get(&Gate::single(H, 0), &Gate::single(RZ, 0)).unwrap();
        assert!(hz.d_gate.is_infinite());
        let rzx = table.get(&Gate::single(RZ, 0), &Gate::single(RX, 0)).unwrap();
        assert!((rzx.d_gate - 0.5 * std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-3);
    }

    #[test]
    fn shipped_tables_are_complete() {
        for m in 2..=4 {
            let t = GateDistanceTable::for_qubits(m).unwrap();
            assert_eq!(t.shape_qubits(), m);
            assert_eq!(t.len(), canonical_keys(m).len());
            for (a, b) in canonical_keys(m) {
                let d = t.get(&a, &b).unwrap();
                assert!(d.d_gate >= 0.0);
                if a == b {
                    assert_eq!(d.d_gate, 0.0);
                }
            }
        }
        assert_eq!(GateDistanceTable::for_qubits(9).unwrap().shape_qubits(), 4);
    }

    #[test]
    fn shipped_entries_reproduce() {
        let t = GateDistanceTable::for_qubits(2).unwrap();
        let cfg = ShapeConfig::default();
        let keys = canonical_keys(2);
        for (a, b) in keys.iter().step_by(37) {
            let d = t.get(a, b).unwrap();
            let core = core_distance(a, b, 2).unwrap();
            let shape = symmetric_shape_distance(a, b, 2, &cfg).unwrap();
            assert!((d.d_core - core).abs() < 1e-12);
            if shape.is_finite() {
                assert!((d.d_shape - shape).abs() < 1e-9, "{a} {b}");
            } else {
                assert!(d.d_shape.is_infinite());
            }
        }
    }
}
