//! Weighted MaxCut: instances, exact optimum, circuit objective and the
//! trotterized alternating-operator ansatz.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::sim::{apply_local, local_ops};
use crate::circuit::{Circuit, Gate, GateType};
use crate::error::{QnasError, Result};
use crate::linalg::c;
use crate::optim::{minimize_multistart, TrainConfig};

use super::ParamBinding;

/// Undirected graph with integer weights in `0..=9`; weight 0 means no edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedGraph {
    n: usize,
    w: Vec<Vec<u8>>,
}

impl WeightedGraph {
    pub fn new(w: Vec<Vec<u8>>) -> Result<Self> {
        let n = w.len();
        for (i, row) in w.iter().enumerate() {
            if row.len() != n {
                return Err(QnasError::DimensionMismatch { expected: n, got: row.len() });
            }
            if row[i] != 0 {
                return Err(QnasError::InvalidArgument("self-loops are not allowed".into()));
            }
            for (j, &x) in row.iter().enumerate() {
                if x != w[j][i] {
                    return Err(QnasError::InvalidArgument("weights must be symmetric".into()));
                }
                if x > 9 {
                    return Err(QnasError::InvalidArgument(format!("weight {x} outside 0..=9")));
                }
            }
        }
        Ok(WeightedGraph { n, w })
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn weight(&self, i: usize, j: usize) -> u8 {
        self.w[i][j]
    }

    /// `(i, j, w)` with `i < j` and `w > 0`.
    pub fn edges(&self) -> Vec<(usize, usize, u8)> {
        let mut e = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.w[i][j] > 0 {
                    e.push((i, j, self.w[i][j]));
                }
            }
        }
        e
    }

    pub fn total_weight(&self) -> u64 {
        self.edges().iter().map(|e| e.2 as u64).sum()
    }

    /// Cut value of a bipartition; node `q` sits on side `(x >> (n-1-q)) & 1`.
    pub fn cut_value(&self, x: usize) -> u64 {
        let side = |q: usize| (x >> (self.n - 1 - q)) & 1;
        self.edges().iter().filter(|(i, j, _)| side(*i) != side(*j)).map(|e| e.2 as u64).sum()
    }

    /// Cut value of every basis state.
    pub fn cut_table(&self) -> Vec<f64> {
        let edges = self.edges();
        (0..1usize << self.n)
            .map(|x| {
                let side = |q: usize| (x >> (self.n - 1 - q)) & 1;
                edges.iter().filter(|(i, j, _)| side(*i) != side(*j)).map(|e| e.2 as f64).sum()
            })
            .collect()
    }
}

/// Random complete graph with weights uniform in `{0, …, 9}`; resampled if
/// every weight is zero.
pub fn maxcut_instance(n: usize, seed: u64) -> WeightedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut w = vec![vec![0u8; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let x = rng.gen_range(0..=9u8);
                w[i][j] = x;
                w[j][i] = x;
            }
        }
        let g = WeightedGraph { n, w };
        if g.total_weight() > 0 || n < 2 {
            return g;
        }
    }
}

/// Exact maximum cut by enumerating all bipartitions.
pub fn brute_force_maxcut(g: &WeightedGraph) -> u64 {
    assert!(g.n <= 20, "brute force is limited to 20 nodes");
    (0..1usize << g.n).map(|x| g.cut_value(x)).max().unwrap_or(0)
}

/// `⟨ψ| H |ψ⟩` for the diagonal cut Hamiltonian.
pub fn expected_cut(probs: &[f64], table: &[f64]) -> f64 {
    probs.iter().zip(table).map(|(p, v)| p * v).sum()
}

/// Basis probabilities of `U(θ)|0⟩`.
pub fn output_probabilities(circuit: &Circuit, params: &[f64]) -> Result<Vec<f64>> {
    let n = circuit.n_qubits();
    let mut amps = vec![c(0.0, 0.0); 1 << n];
    amps[0] = c(1.0, 0.0);
    let ops = local_ops(circuit, params)?;
    for (g, op) in circuit.gates().iter().zip(&ops) {
        apply_local(&mut amps, n, g.wires(), op);
    }
    Ok(amps.iter().map(|a| a.norm_sqr()).collect())
}

/// The M-graph objective: mean over graphs of the trained
/// `⟨0|U†(θ_m) H_m U(θ_m)|0⟩ / C_m`.
#[derive(Clone, Debug)]
pub struct MaxCutObjective {
    pub graphs: Vec<WeightedGraph>,
    tables: Vec<Vec<f64>>,
    optima: Vec<f64>,
}

impl MaxCutObjective {
    pub fn new(graphs: Vec<WeightedGraph>) -> Result<Self> {
        if graphs.is_empty() {
            return Err(QnasError::InvalidArgument("need at least one graph".into()));
        }
        let tables: Vec<Vec<f64>> = graphs.iter().map(|g| g.cut_table()).collect();
        let optima: Vec<f64> = tables.iter().map(|t| t.iter().cloned().fold(0.0, f64::max)).collect();
        if optima.iter().any(|&o| o <= 0.0) {
            return Err(QnasError::InvalidArgument("graph without edges".into()));
        }
        Ok(MaxCutObjective { graphs, tables, optima })
    }

    /// Graphs from seeds `first_seed .. first_seed + m`.
    pub fn seeded(n: usize, m: usize, first_seed: u64) -> Result<Self> {
        Self::new((0..m as u64).map(|s| maxcut_instance(n, first_seed + s)).collect())
    }

    pub fn n_graphs(&self) -> usize {
        self.graphs.len()
    }

    pub fn optimum(&self, m: usize) -> f64 {
        self.optima[m]
    }

    pub fn cut_table(&self, m: usize) -> &[f64] {
        &self.tables[m]
    }

    /// Normalized expected cut of graph `m` at fixed parameters.
    pub fn normalized_value(&self, m: usize, circuit: &Circuit, params: &[f64]) -> Result<f64> {
        self.check(circuit)?;
        let probs = output_probabilities(circuit, params)?;
        Ok(expected_cut(&probs, &self.tables[m]) / self.optima[m])
    }

    fn check(&self, circuit: &Circuit) -> Result<()> {
        let n = self.graphs[0].n_nodes();
        if circuit.n_qubits() != n {
            return Err(QnasError::DimensionMismatch { expected: n, got: circuit.n_qubits() });
        }
        Ok(())
    }

    /// Trained normalized value per graph; each graph gets its own stream.
    pub fn per_graph(&self, circuit: &Circuit, cfg: &TrainConfig, seed: u64) -> Result<Vec<f64>> {
        self.check(circuit)?;
        (0..self.n_graphs())
            .into_par_iter()
            .map(|m| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(m as u64));
                let loss = |p: &[f64]| -self.normalized_value(m, circuit, p).unwrap_or(f64::NAN);
                let r = minimize_multistart(&loss, circuit.param_count(), cfg, &mut rng);
                Ok((-r.value).clamp(0.0, 1.0))
            })
            .collect()
    }

    pub fn evaluate(&self, circuit: &Circuit, cfg: &TrainConfig, seed: u64) -> Result<f64> {
        let v = self.per_graph(circuit, cfg, seed)?;
        Ok(v.iter().sum::<f64>() / v.len() as f64)
    }
}

/// Depth-`L` alternating-operator ansatz: a Hadamard layer, then per layer
/// `RZZ(-w α_l)` on every edge and `RX(2 β_l)` on every node. Shared
/// parameters are `[α_1, β_1, …, α_L, β_L]`.
pub fn maxcut_ansatz(g: &WeightedGraph, depth: usize) -> Result<(Circuit, ParamBinding)> {
    if depth == 0 {
        return Err(QnasError::InvalidArgument("depth must be at least 1".into()));
    }
    let n = g.n_nodes();
    let mut gates: Vec<Gate> = (0..n).map(|q| Gate::single(GateType::H, q)).collect();
    let mut map = Vec::new();
    for l in 0..depth {
        for (i, j, w) in g.edges() {
            gates.push(Gate::pair(GateType::RZZ, i, j));
            map.push((2 * l, -(w as f64)));
        }
        for q in 0..n {
            gates.push(Gate::single(GateType::RX, q));
            map.push((2 * l + 1, 2.0));
        }
    }
    Ok((Circuit::new(n, gates)?, ParamBinding::new(2 * depth, map)?))
}

/// Ansatz value averaged over graphs and over `trials` independent trainings
/// per graph.
pub fn maxcut_ansatz_value(
    obj: &MaxCutObjective,
    depth: usize,
    trials: usize,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<f64> {
    let single = TrainConfig { restarts: 1, ..cfg.clone() };
    let mut total = 0.0;
    for (m, g) in obj.graphs.iter().enumerate() {
        let (circ, binding) = maxcut_ansatz(g, depth)?;
        let loss = |p: &[f64]| -obj.normalized_value(m, &circ, &binding.expand(p)).unwrap_or(f64::NAN);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1000 * m as u64));
        for _ in 0..trials.max(1) {
            let r = minimize_multistart(&loss, binding.n_shared(), &single, &mut rng);
            total += (-r.value).clamp(0.0, 1.0);
        }
    }
    Ok(total / (obj.n_graphs() * trials.max(1)) as f64)
}
