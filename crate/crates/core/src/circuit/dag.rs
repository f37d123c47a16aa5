//! Directed-acyclic-graph view of a circuit: one input and one output node
//! per qubit, one node per gate, and an edge per wire segment.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use super::gate::Gate;
use super::model::Circuit;
use crate::error::{QnasError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DagNode {
    Input(usize),
    Gate(Gate),
    Output(usize),
}

/// Edge carrying qubit `wire` from node `from` to node `to`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DagEdge {
    pub from: usize,
    pub to: usize,
    pub wire: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CircuitDag {
    n_qubits: usize,
    nodes: Vec<DagNode>,
    edges: Vec<DagEdge>,
    incoming: Vec<Vec<usize>>,
    outgoing: Vec<Vec<usize>>,
}

impl CircuitDag {
    /// Assemble a DAG from raw nodes and edges. Incoming edges of a gate
    /// node are ordered to follow the gate's wire order; validation happens
    /// in [`dag_to_circuit`].
    pub fn from_parts(n_qubits: usize, nodes: Vec<DagNode>, edges: Vec<DagEdge>) -> Result<Self> {
        let mut incoming = vec![Vec::new(); nodes.len()];
        let mut outgoing = vec![Vec::new(); nodes.len()];
        for (k, e) in edges.iter().enumerate() {
            if e.from >= nodes.len() || e.to >= nodes.len() {
                return Err(QnasError::MalformedDag(format!("edge {k} references a missing node")));
            }
            outgoing[e.from].push(k);
            incoming[e.to].push(k);
        }
        for (v, list) in incoming.iter_mut().enumerate() {
            if let DagNode::Gate(g) = nodes[v] {
                list.sort_by_key(|&k| g.wires().iter().position(|&w| w == edges[k].wire).unwrap_or(usize::MAX));
            }
        }
        Ok(CircuitDag { n_qubits, nodes, edges, incoming, outgoing })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn nodes(&self) -> &[DagNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[DagEdge] {
        &self.edges
    }

    /// Incoming edge indices of `node`, in the gate's wire order.
    pub fn incoming(&self, node: usize) -> &[usize] {
        &self.incoming[node]
    }

    pub fn outgoing(&self, node: usize) -> &[usize] {
        &self.outgoing[node]
    }

    /// Node ids of the gate nodes, in insertion order.
    pub fn gate_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&v| matches!(self.nodes[v], DagNode::Gate(_))).collect()
    }

    /// Graphviz rendering with wire-labelled edges.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph circuit {\n  rankdir=LR;\n");
        for (v, node) in self.nodes.iter().enumerate() {
            let (label, shape) = match node {
                DagNode::Input(q) => (format!("ip,q{q}"), "plaintext"),
                DagNode::Output(q) => (format!("op,q{q}"), "plaintext"),
                DagNode::Gate(g) => (g.gate_type.name().to_string(), "box"),
            };
            let _ = writeln!(s, "  n{v} [label=\"{label}\", shape={shape}];");
        }
        for e in &self.edges {
            let _ = writeln!(s, "  n{} -> n{} [label=\"q{}\"];", e.from, e.to, e.wire);
        }
        s.push_str("}\n");
        s
    }
}

/// Node layout: inputs `0..n`, gates `n..n+N` in circuit order, outputs after.
pub fn circuit_to_dag(circuit: &Circuit) -> CircuitDag {
    let n = circuit.n_qubits();
    let n_gates = circuit.len();
    let mut nodes: Vec<DagNode> = (0..n).map(DagNode::Input).collect();
    nodes.extend(circuit.gates().iter().map(|&g| DagNode::Gate(g)));
    nodes.extend((0..n).map(DagNode::Output));
    let mut last: Vec<usize> = (0..n).collect();
    let mut edges = Vec::new();
    for (i, g) in circuit.gates().iter().enumerate() {
        for &w in g.wires() {
            edges.push(DagEdge { from: last[w], to: n + i, wire: w });
            last[w] = n + i;
        }
    }
    for q in 0..n {
        edges.push(DagEdge { from: last[q], to: n + n_gates + q, wire: q });
    }
    CircuitDag::from_parts(n, nodes, edges).expect("edges reference existing nodes")
}

fn malformed(msg: impl Into<String>) -> QnasError {
    QnasError::MalformedDag(msg.into())
}

/// Rebuild a circuit. Gates are emitted as soon as their wire predecessors
/// are, ties broken by node id, so `dag_to_circuit(circuit_to_dag(c)) == c`.
pub fn dag_to_circuit(dag: &CircuitDag) -> Result<Circuit> {
    let n = dag.n_qubits;
    let mut seen_in = vec![false; n];
    let mut seen_out = vec![false; n];
    for (v, node) in dag.nodes.iter().enumerate() {
        let (inc, out) = (&dag.incoming[v], &dag.outgoing[v]);
        match *node {
            DagNode::Input(q) => {
                if q >= n || std::mem::replace(&mut seen_in[q], true) {
                    return Err(malformed(format!("bad or duplicate input node for qubit {q}")));
                }
                if !inc.is_empty() || out.len() != 1 || dag.edges[out[0]].wire != q {
                    return Err(malformed(format!("input node of qubit {q} must have one outgoing q{q} edge")));
                }
            }
            DagNode::Output(q) => {
                if q >= n || std::mem::replace(&mut seen_out[q], true) {
                    return Err(malformed(format!("bad or duplicate output node for qubit {q}")));
                }
                if !out.is_empty() || inc.len() != 1 || dag.edges[inc[0]].wire != q {
                    return Err(malformed(format!("output node of qubit {q} must have one incoming q{q} edge")));
                }
            }
            DagNode::Gate(g) => {
                g.validate(n)?;
                let wires = g.wires();
                let inc_w: Vec<usize> = inc.iter().map(|&k| dag.edges[k].wire).collect();
                let mut out_w: Vec<usize> = out.iter().map(|&k| dag.edges[k].wire).collect();
                out_w.sort_unstable();
                let mut sorted = wires.to_vec();
                sorted.sort_unstable();
                if inc_w != wires || out_w != sorted {
                    return Err(malformed(format!("gate node {v} ({g}) has dangling or mislabelled wires")));
                }
            }
        }
    }
    if seen_in.iter().chain(&seen_out).any(|&s| !s) {
        return Err(malformed("every qubit needs an input and an output node"));
    }
    for e in &dag.edges {
        let carries = |v: usize| match dag.nodes[v] {
            DagNode::Gate(g) => g.acts_on(e.wire),
            DagNode::Input(q) | DagNode::Output(q) => q == e.wire,
        };
        if !carries(e.from) || !carries(e.to) {
            return Err(malformed(format!("edge on q{} touches a node not on that wire", e.wire)));
        }
    }

    let mut indeg: Vec<usize> = dag.incoming.iter().map(Vec::len).collect();
    let mut heap: BinaryHeap<Reverse<usize>> = (0..dag.nodes.len()).filter(|&v| indeg[v] == 0).map(Reverse).collect();
    let mut gates = Vec::new();
    let mut visited = 0;
    while let Some(Reverse(v)) = heap.pop() {
        visited += 1;
        if let DagNode::Gate(g) = dag.nodes[v] {
            gates.push(g);
        }
        for &k in &dag.outgoing[v] {
            let t = dag.edges[k].to;
            indeg[t] -= 1;
            if indeg[t] == 0 {
                heap.push(Reverse(t));
            }
        }
    }
    if visited != dag.nodes.len() {
        return Err(malformed("graph contains a cycle"));
    }
    Circuit::new(n, gates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::gate::GateType;
    use crate::circuit::model::random_circuit;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fig1() -> Circuit {
        Circuit::new(
            4,
            vec![
                Gate::single(GateType::RZ, 3),
                Gate::single(GateType::X, 1),
                Gate::pair(GateType::CY, 0, 3),
                Gate::pair(GateType::CRX, 1, 2),
                Gate::pair(GateType::RXX, 0, 1),
            ],
        )
        .unwrap()
    }

    #[test]
    fn single_gate_dag_shape() {
        let c0 = Circuit::new(3, vec![Gate::pair(GateType::CZ, 0, 2)]).unwrap();
        let dag = circuit_to_dag(&c0);
        assert_eq!(dag.nodes().len(), 3 + 1 + 3);
        assert_eq!(dag.gate_nodes(), vec![3]);
        assert_eq!(dag.edges().len(), 2 + 3);
    }

    #[test]
    fn fig1_edges() {
        let dag = circuit_to_dag(&fig1());
        // inputs 0..4, RZ=4, X=5, CY=6, CRX=7, RXX=8, outputs 9..13
        let mut got: Vec<(usize, usize, usize)> = dag.edges().iter().map(|e| (e.from, e.to, e.wire)).collect();
        got.sort_unstable();
        let mut want = vec![
            (0, 6, 0),
            (6, 8, 0),
            (8, 9, 0),
            (1, 5, 1),
            (5, 7, 1),
            (7, 8, 1),
            (8, 10, 1),
            (2, 7, 2),
            (7, 11, 2),
            (3, 4, 3),
            (4, 6, 3),
            (6, 12, 3),
        ];
        want.sort_unstable();
        assert_eq!(got, want);
        // incoming order at CY follows (control, target) = (q0, q3)
        let wires: Vec<usize> = dag.incoming(6).iter().map(|&k| dag.edges()[k].wire).collect();
        assert_eq!(wires, vec![0, 3]);
        assert_eq!(dag_to_circuit(&dag).unwrap(), fig1());
    }

    #[test]
    fn dot_export_labels_wires() {
        let dot = circuit_to_dag(&fig1()).to_dot();
        assert!(dot.contains("label=\"CRX\""));
        assert!(dot.contains("[label=\"q3\"]"));
        assert!(dot.starts_with("digraph"));
    }

    #[test]
    fn cycle_is_rejected() {
        let c0 = Circuit::new(1, vec![Gate::single(GateType::H, 0), Gate::single(GateType::X, 0)]).unwrap();
        let dag = circuit_to_dag(&c0);
        // in -> out directly, H <-> X in a loop; local degrees stay valid
        let edges = vec![
            DagEdge { from: 0, to: 3, wire: 0 },
            DagEdge { from: 1, to: 2, wire: 0 },
            DagEdge { from: 2, to: 1, wire: 0 },
        ];
        let bad = CircuitDag::from_parts(1, dag.nodes().to_vec(), edges).unwrap();
        assert!(dag_to_circuit(&bad).is_err());
    }

    #[test]
    fn dangling_wire_is_rejected() {
        let dag = circuit_to_dag(&fig1());
        let mut edges = dag.edges().to_vec();
        edges.pop();
        let bad = CircuitDag::from_parts(4, dag.nodes().to_vec(), edges).unwrap();
        assert!(matches!(dag_to_circuit(&bad), Err(QnasError::MalformedDag(_))));
    }

    #[test]
    fn round_trip_100_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for k in 0..100 {
            let n = 1 + k % 9;
            let len = 1 + (k * 7) % 20;
            let c0 = random_circuit(n, len, &mut rng).unwrap();
            assert_eq!(dag_to_circuit(&circuit_to_dag(&c0)).unwrap(), c0);
        }
    }

    proptest! {
        #[test]
        fn round_trip_prop(seed in any::<u64>(), n in 1usize..=9, len in 1usize..=20) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c0 = random_circuit(n, len, &mut rng).unwrap();
            let dag = circuit_to_dag(&c0);
            prop_assert_eq!(dag.edges().len(), c0.gates().iter().map(|g| g.arity()).sum::<usize>() + n);
            prop_assert_eq!(dag_to_circuit(&dag).unwrap(), c0);
        }
    }
}
