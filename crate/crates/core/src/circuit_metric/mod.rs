//! Optimal-transport distance between circuits: gate masses are moved
//! between the two circuits (plus a null gate on each side) at a cost mixing
//! gate distance and structural position.

pub mod mass;
pub mod paths;
pub mod transport;

use nalgebra::DMatrix;
use rayon::prelude::*;

pub use mass::{assign_masses, layer_mass, MassAssignment, FIXED_MASS_RATIO};
pub use paths::{path_profile, PathProfile, PathStats};
pub use transport::{solve_transport, TransportPlan, TransportProblem};

use crate::circuit::{circuit_to_dag, Circuit, CircuitDag};
use crate::error::{QnasError, Result};
use crate::gate_metric::{GateDistanceTable, MAX_SHAPE_QUBITS};

/// Stand-in cost for pairs whose gate distance is infinite.
pub const BIG_M: f64 = 1e6;

/// Per-circuit quantities reused across many distance evaluations.
#[derive(Clone, Debug)]
pub struct CircuitFeatures {
    pub circuit: Circuit,
    pub masses: MassAssignment,
    /// `6n` path statistics per gate.
    pub paths: Vec<Vec<f64>>,
}

impl CircuitFeatures {
    pub fn new(circuit: &Circuit) -> Self {
        let dag = circuit_to_dag(circuit);
        let profile = path_profile(&dag);
        let paths = (0..circuit.len()).map(|g| profile.feature_vector(g)).collect();
        CircuitFeatures { circuit: circuit.clone(), masses: assign_masses(circuit), paths }
    }
}

fn str_cost(f1: &CircuitFeatures, f2: &CircuitFeatures) -> Result<DMatrix<f64>> {
    let n = f1.circuit.n_qubits();
    if n != f2.circuit.n_qubits() {
        return Err(QnasError::DimensionMismatch { expected: n, got: f2.circuit.n_qubits() });
    }
    let scale = 1.0 / (6.0 * n as f64);
    Ok(DMatrix::from_fn(f1.paths.len(), f2.paths.len(), |i, j| {
        f1.paths[i].iter().zip(&f2.paths[j]).map(|(a, b)| (a - b).abs()).sum::<f64>() * scale
    }))
}

/// `(1/6n) Σ_{s,t,q} |δ_t^{s,q}(i) − δ_t^{s,q}(j)|` over gate pairs.
pub fn structural_cost(dag1: &CircuitDag, dag2: &CircuitDag) -> Result<DMatrix<f64>> {
    let feats = |dag: &CircuitDag| {
        let p = path_profile(dag);
        (0..dag.gate_nodes().len()).map(|g| p.feature_vector(g)).collect::<Vec<_>>()
    };
    let (n1, n2) = (dag1.n_qubits(), dag2.n_qubits());
    if n1 != n2 {
        return Err(QnasError::DimensionMismatch { expected: n1, got: n2 });
    }
    let (a, b) = (feats(dag1), feats(dag2));
    let scale = 1.0 / (6.0 * n1 as f64);
    Ok(DMatrix::from_fn(a.len(), b.len(), |i, j| {
        a[i].iter().zip(&b[j]).map(|(x, y)| (x - y).abs()).sum::<f64>() * scale
    }))
}

fn check_table(table: &GateDistanceTable, n_qubits: usize) -> Result<()> {
    let want = n_qubits.min(MAX_SHAPE_QUBITS);
    if table.shape_qubits() != want {
        return Err(QnasError::Configuration(format!(
            "gate table was built for {} qubits, circuits need {want}",
            table.shape_qubits()
        )));
    }
    Ok(())
}

/// Gate distances between every gate of `c1` and every gate of `c2`;
/// infinite entries mark fixed/parametrized pairs.
pub fn gtm_cost(c1: &Circuit, c2: &Circuit, table: &GateDistanceTable) -> Result<DMatrix<f64>> {
    check_table(table, c1.n_qubits())?;
    let mut m = DMatrix::zeros(c1.len(), c2.len());
    for (i, a) in c1.gates().iter().enumerate() {
        for (j, b) in c2.gates().iter().enumerate() {
            m[(i, j)] = table.d_gate(a, b)?;
        }
    }
    Ok(m)
}

/// Cost `[[C_gtm + νC_str, 1], [1ᵀ, 0]]` with supplies
/// `[lm(G1), tm(G2)]` and demands `[lm(G2), tm(G1)]`.
pub fn transport_problem(
    f1: &CircuitFeatures,
    f2: &CircuitFeatures,
    nu: f64,
    table: &GateDistanceTable,
) -> Result<TransportProblem> {
    if !(nu >= 0.0) {
        return Err(QnasError::InvalidArgument(format!("structural weight must be non-negative, got {nu}")));
    }
    let gtm = gtm_cost(&f1.circuit, &f2.circuit, table)?;
    let st = str_cost(f1, f2)?;
    let (n1, n2) = (f1.circuit.len(), f2.circuit.len());
    let cost = DMatrix::from_fn(n1 + 1, n2 + 1, |i, j| match (i < n1, j < n2) {
        (true, true) => {
            let g = gtm[(i, j)];
            if g.is_finite() {
                g + nu * st[(i, j)]
            } else {
                BIG_M
            }
        }
        (false, false) => 0.0,
        _ => 1.0,
    });
    let mut supply = f1.masses.masses.clone();
    supply.push(f2.masses.total);
    let mut demand = f2.masses.masses.clone();
    demand.push(f1.masses.total);
    Ok(TransportProblem { cost, supply, demand })
}

#[derive(Clone, Debug)]
pub struct OtResult {
    pub distance: f64,
    /// `distance / (tm(G1) + tm(G2))`, or 0 when both circuits are massless.
    pub normalized: f64,
    pub problem: TransportProblem,
    pub plan: TransportPlan,
}

pub fn ot_plan(f1: &CircuitFeatures, f2: &CircuitFeatures, nu: f64, table: &GateDistanceTable) -> Result<OtResult> {
    let problem = transport_problem(f1, f2, nu, table)?;
    let plan = solve_transport(&problem)?;
    for (z, c) in plan.z.iter().zip(problem.cost.iter()) {
        if *c >= BIG_M && *z > 1e-9 {
            return Err(QnasError::Transport("optimal plan matched a fixed gate to a parametrized one".into()));
        }
    }
    let distance = plan.objective.max(0.0);
    let total = f1.masses.total + f2.masses.total;
    let normalized = if total > 0.0 { distance / total } else { 0.0 };
    Ok(OtResult { distance, normalized, problem, plan })
}

pub fn ot_distance(c1: &Circuit, c2: &Circuit, nu: f64, normalized: bool, table: &GateDistanceTable) -> Result<f64> {
    let r = ot_plan(&CircuitFeatures::new(c1), &CircuitFeatures::new(c2), nu, table)?;
    Ok(if normalized { r.normalized } else { r.distance })
}

/// One symmetric matrix per `(ν, normalized)` setting.
pub fn distance_matrices(
    circuits: &[Circuit],
    settings: &[(f64, bool)],
    table: &GateDistanceTable,
) -> Result<Vec<DMatrix<f64>>> {
    let feats: Vec<CircuitFeatures> = circuits.iter().map(CircuitFeatures::new).collect();
    distance_matrices_from_features(&feats, settings, table)
}

pub fn distance_matrices_from_features(
    feats: &[CircuitFeatures],
    settings: &[(f64, bool)],
    table: &GateDistanceTable,
) -> Result<Vec<DMatrix<f64>>> {
    let n = feats.len();
    let mut nus: Vec<f64> = settings.iter().map(|s| s.0).collect();
    nus.sort_by(f64::total_cmp);
    nus.dedup();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let values: Vec<Result<Vec<(f64, f64)>>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            nus.iter().map(|&nu| ot_plan(&feats[i], &feats[j], nu, table).map(|r| (r.distance, r.normalized))).collect()
        })
        .collect();
    let mut out = vec![DMatrix::zeros(n, n); settings.len()];
    for (&(i, j), v) in pairs.iter().zip(values) {
        let v = v?;
        for (s, &(nu, normalized)) in settings.iter().enumerate() {
            let k = nus.iter().position(|&x| x == nu).expect("nu listed");
            let d = if normalized { v[k].1 } else { v[k].0 };
            out[s][(i, j)] = d;
            out[s][(j, i)] = d;
        }
    }
    Ok(out)
}
