//! Path-length profiles of gate nodes. A path's length is its number of
//! edges, so the input-side length of a gate counts the gates on the path
//! including the gate itself. Parallel edges between the same two nodes
//! count once.

use crate::circuit::dag::{CircuitDag, DagNode};

/// Shortest, longest and mean path length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathStats {
    pub sp: f64,
    pub lp: f64,
    pub avg: f64,
}

/// For every gate (in DAG gate-node order) and qubit `q`: statistics of the
/// paths from the input node of `q`, and to the output node of `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathProfile {
    pub n_qubits: usize,
    pub from_input: Vec<Vec<PathStats>>,
    pub to_output: Vec<Vec<PathStats>>,
    /// Longest input-to-output path, used when no path exists.
    pub longest: f64,
}

impl PathProfile {
    /// The `6n` numbers of one gate, in a fixed order.
    pub fn feature_vector(&self, gate: usize) -> Vec<f64> {
        let mut v = Vec::with_capacity(6 * self.n_qubits);
        for side in [&self.from_input, &self.to_output] {
            for s in &side[gate] {
                v.extend([s.sp, s.lp, s.avg]);
            }
        }
        v
    }
}

#[derive(Clone, Copy)]
struct Acc {
    min: f64,
    max: f64,
    count: f64,
    sum: f64,
}

const NONE: Acc = Acc { min: f64::INFINITY, max: f64::NEG_INFINITY, count: 0.0, sum: 0.0 };

fn simple_successors(dag: &CircuitDag, reverse: bool) -> Vec<Vec<usize>> {
    let n = dag.nodes().len();
    let mut out = vec![Vec::new(); n];
    for e in dag.edges() {
        let (a, b) = if reverse { (e.to, e.from) } else { (e.from, e.to) };
        if !out[a].contains(&b) {
            out[a].push(b);
        }
    }
    out
}

fn topo_order(succ: &[Vec<usize>]) -> Vec<usize> {
    let n = succ.len();
    let mut indeg = vec![0usize; n];
    for s in succ {
        for &b in s {
            indeg[b] += 1;
        }
    }
    let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).rev().collect();
    let mut order = Vec::with_capacity(n);
    while let Some(a) = stack.pop() {
        order.push(a);
        for &b in &succ[a] {
            indeg[b] -= 1;
            if indeg[b] == 0 {
                stack.push(b);
            }
        }
    }
    order
}

fn sweep(succ: &[Vec<usize>], order: &[usize], source: usize) -> Vec<Acc> {
    let mut acc = vec![NONE; succ.len()];
    acc[source] = Acc { min: 0.0, max: 0.0, count: 1.0, sum: 0.0 };
    for &a in order {
        let here = acc[a];
        if here.count == 0.0 {
            continue;
        }
        for &b in &succ[a] {
            let t = &mut acc[b];
            t.min = t.min.min(here.min + 1.0);
            t.max = t.max.max(here.max + 1.0);
            t.count += here.count;
            t.sum += here.sum + here.count;
        }
    }
    acc
}

pub fn path_profile(dag: &CircuitDag) -> PathProfile {
    let n = dag.n_qubits();
    let fwd = simple_successors(dag, false);
    let bwd = simple_successors(dag, true);
    let order_f = topo_order(&fwd);
    let order_b = topo_order(&bwd);
    let gate_nodes = dag.gate_nodes();
    let mut inputs = vec![0; n];
    let mut outputs = vec![0; n];
    for (v, node) in dag.nodes().iter().enumerate() {
        match node {
            DagNode::Input(q) => inputs[*q] = v,
            DagNode::Output(q) => outputs[*q] = v,
            DagNode::Gate(_) => {}
        }
    }
    let from_inputs: Vec<Vec<Acc>> = inputs.iter().map(|&s| sweep(&fwd, &order_f, s)).collect();
    let to_outputs: Vec<Vec<Acc>> = outputs.iter().map(|&s| sweep(&bwd, &order_b, s)).collect();
    let longest = from_inputs.iter().flat_map(|acc| outputs.iter().map(move |&o| acc[o].max)).fold(0.0f64, f64::max);
    let stats = |a: Acc| {
        if a.count == 0.0 {
            PathStats { sp: longest, lp: longest, avg: longest }
        } else {
            PathStats { sp: a.min, lp: a.max, avg: a.sum / a.count }
        }
    };
    let collect = |side: &Vec<Vec<Acc>>| -> Vec<Vec<PathStats>> {
        gate_nodes.iter().map(|&g| side.iter().map(|acc| stats(acc[g])).collect()).collect()
    };
    PathProfile { n_qubits: n, from_input: collect(&from_inputs), to_output: collect(&to_outputs), longest }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{circuit_to_dag, random_circuit, Circuit, Gate, GateType::*};
    use rand::SeedableRng;

    fn fig1() -> Circuit {
        Circuit::new(
            4,
            vec![
                Gate::single(RZ, 3),
                Gate::single(X, 1),
                Gate::pair(CY, 0, 3),
                Gate::pair(CRX, 1, 2),
                Gate::pair(RXX, 0, 1),
            ],
        )
        .unwrap()
    }

    #[test]
    fn worked_example() {
        let p = path_profile(&circuit_to_dag(&fig1()));
        assert_eq!(p.longest, 4.0);
        let cy = 2;
        assert_eq!(p.from_input[cy][3], PathStats { sp: 2.0, lp: 2.0, avg: 2.0 });
        assert_eq!(p.to_output[cy][2], PathStats { sp: 4.0, lp: 4.0, avg: 4.0 });
        // CY reaches q0's output directly and through RXX
        assert_eq!(p.to_output[cy][0], PathStats { sp: 2.0, lp: 2.0, avg: 2.0 });
    }

    #[test]
    fn single_gate() {
        let c0 = Circuit::new(2, vec![Gate::pair(CRZ, 0, 1)]).unwrap();
        let p = path_profile(&circuit_to_dag(&c0));
        for q in 0..2 {
            assert_eq!(p.from_input[0][q].sp, 1.0);
            assert_eq!(p.to_output[0][q].lp, 1.0);
        }
    }

    #[test]
    fn averages_lie_between_extremes() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..30 {
            let c0 = random_circuit(5, 15, &mut rng).unwrap();
            let p = path_profile(&circuit_to_dag(&c0));
            for side in [&p.from_input, &p.to_output] {
                for g in side {
                    for s in g {
                        assert!(s.sp <= s.avg + 1e-12 && s.avg <= s.lp + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn average_counts_distinct_paths() {
        // q0: in -> A -> B; q1: in -> B. Paths in(q0) -> B: only via A (length 2).
        // Paths from in(q1) to the output of q0 through B: in1 -> B -> out0 (2).
        let c0 = Circuit::new(2, vec![Gate::single(RX, 0), Gate::pair(CZ, 0, 1), Gate::pair(CZ, 0, 1)]).unwrap();
        let p = path_profile(&circuit_to_dag(&c0));
        assert_eq!(p.from_input[2][0], PathStats { sp: 3.0, lp: 3.0, avg: 3.0 });
        assert_eq!(p.from_input[2][1], PathStats { sp: 2.0, lp: 2.0, avg: 2.0 });
    }
}
