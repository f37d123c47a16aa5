//! Circuit distance against the gap in trained QFT fidelity, over all pairs
//! of a random circuit population.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{random_circuit, Circuit};
use crate::circuit_metric::{ot_plan, CircuitFeatures};
use crate::error::{QnasError, Result};
use crate::gate_metric::GateDistanceTable;
use crate::objectives::{circuit_seed, QftObjective};
use crate::optim::TrainConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScatterConfig {
    pub n_qubits: usize,
    /// Gate counts are drawn uniformly from `1..=max_gates`.
    pub max_gates: usize,
    pub n_circuits: usize,
    /// Keep only this many pairs (seeded shuffle); all pairs when unset.
    pub n_pairs: Option<usize>,
    pub nu: f64,
    pub normalized: bool,
    pub seed: u64,
    pub train: TrainConfig,
}

impl Default for ScatterConfig {
    fn default() -> Self {
        ScatterConfig {
            n_qubits: 3,
            max_gates: 20,
            n_circuits: 300,
            n_pairs: None,
            nu: 0.5,
            normalized: false,
            seed: 0,
            train: TrainConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterRow {
    pub pair: usize,
    pub i: usize,
    pub j: usize,
    pub distance: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterTable {
    pub circuits: Vec<Circuit>,
    pub fidelity: Vec<f64>,
    pub rows: Vec<ScatterRow>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecileSummary {
    /// Mean gap over the 10% of pairs with the smallest distance.
    pub low_decile_gap: f64,
    pub overall_gap: f64,
    pub holds: bool,
}

impl ScatterTable {
    pub fn decile_summary(&self) -> DecileSummary {
        let mut rows: Vec<&ScatterRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| a.distance.total_cmp(&b.distance));
        let k = rows.len().div_ceil(10).max(1).min(rows.len());
        let mean = |rs: &[&ScatterRow]| rs.iter().map(|r| r.gap).sum::<f64>() / rs.len().max(1) as f64;
        let low_decile_gap = mean(&rows[..k]);
        let overall_gap = mean(&rows);
        DecileSummary { low_decile_gap, overall_gap, holds: low_decile_gap <= overall_gap }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["pair", "distance", "gap", "fidelity_1", "fidelity_2", "circuit_1", "circuit_2"])?;
        for r in &self.rows {
            out.write_record([
                r.pair.to_string(),
                r.distance.to_string(),
                r.gap.to_string(),
                self.fidelity[r.i].to_string(),
                self.fidelity[r.j].to_string(),
                self.circuits[r.i].to_json(),
                self.circuits[r.j].to_json(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Trains `circuits` on the QFT task and tabulates every pair.
pub fn scatter_for(circuits: Vec<Circuit>, cfg: &ScatterConfig) -> Result<ScatterTable> {
    let n = cfg.n_qubits;
    if circuits.iter().any(|c| c.n_qubits() != n) {
        return Err(QnasError::InvalidArgument("circuits must share the configured width".into()));
    }
    let objective = QftObjective::new(n)?;
    let fidelity = circuits
        .par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(circuit_seed(c, cfg.seed));
            objective.evaluate(c, &cfg.train, &mut rng)
        })
        .collect::<Result<Vec<f64>>>()?;
    let table = GateDistanceTable::for_qubits(n)?;
    let feats: Vec<CircuitFeatures> = circuits.iter().map(CircuitFeatures::new).collect();
    let mut pairs: Vec<(usize, usize)> =
        (0..circuits.len()).flat_map(|i| (i + 1..circuits.len()).map(move |j| (i, j))).collect();
    if let Some(p) = cfg.n_pairs {
        pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5ca7));
        pairs.truncate(p);
        pairs.sort_unstable();
    }
    let rows = pairs
        .par_iter()
        .enumerate()
        .map(|(pair, &(i, j))| {
            let r = ot_plan(&feats[i], &feats[j], cfg.nu, &table)?;
            let distance = if cfg.normalized { r.normalized } else { r.distance };
            Ok(ScatterRow { pair, i, j, distance, gap: (fidelity[i] - fidelity[j]).abs() })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScatterTable { circuits, fidelity, rows })
}

/// Random population of `cfg.n_circuits` circuits, then [`scatter_for`].
pub fn distance_vs_performance(cfg: &ScatterConfig) -> Result<ScatterTable> {
    if cfg.max_gates == 0 || cfg.n_circuits < 2 {
        return Err(QnasError::InvalidArgument("need at least two circuits with gates".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let circuits = (0..cfg.n_circuits)
        .map(|_| {
            let g = rng.gen_range(1..=cfg.max_gates);
            random_circuit(cfg.n_qubits, g, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    scatter_for(circuits, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ScatterConfig {
        ScatterConfig {
            n_circuits: 10,
            n_pairs: Some(30),
            max_gates: 6,
            train: TrainConfig { restarts: 1, max_iters: 30, ..TrainConfig::default() },
            ..ScatterConfig::default()
        }
    }

    #[test]
    fn smoke_run_emits_requested_rows() {
        let t = distance_vs_performance(&quick()).unwrap();
        assert_eq!(t.rows.len(), 30);
        assert!(t.rows.iter().all(|r| r.distance >= 0.0 && (0.0..=1.0).contains(&r.gap)));
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 31);
        let s = t.decile_summary();
        assert!(s.low_decile_gap >= 0.0 && s.overall_gap >= 0.0);
    }

    #[test]
    fn identical_pair_has_zero_distance_and_gap() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = random_circuit(3, 5, &mut rng).unwrap();
        let cfg = ScatterConfig { n_pairs: None, ..quick() };
        let t = scatter_for(vec![c.clone(), c], &cfg).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert!(t.rows[0].distance.abs() < 1e-12);
        assert_eq!(t.rows[0].gap, 0.0);
    }
}
