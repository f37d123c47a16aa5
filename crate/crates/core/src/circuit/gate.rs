use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QnasError, Result};
use crate::linalg::c;

/// The sixteen gates of the search space.
///
/// Ordering matters: fixed gates come first, then parametrized gates, each in
/// catalog order. Representative numbers for the matrix encoding derive from it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateType {
    H,
    X,
    Y,
    Z,
    CX,
    CY,
    CZ,
    RX,
    RY,
    RZ,
    CRX,
    CRY,
    CRZ,
    RXX,
    RYY,
    RZZ,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    fn matrix(self) -> [Complex64; 4] {
        let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
        match self {
            Pauli::X => [z, o, o, z],
            Pauli::Y => [z, c(0.0, -1.0), c(0.0, 1.0), z],
            Pauli::Z => [o, z, z, -o],
        }
    }
}

impl GateType {
    pub const ALL: [GateType; 16] = [
        GateType::H,
        GateType::X,
        GateType::Y,
        GateType::Z,
        GateType::CX,
        GateType::CY,
        GateType::CZ,
        GateType::RX,
        GateType::RY,
        GateType::RZ,
        GateType::CRX,
        GateType::CRY,
        GateType::CRZ,
        GateType::RXX,
        GateType::RYY,
        GateType::RZZ,
    ];

    pub const FIXED: [GateType; 7] =
        [GateType::H, GateType::X, GateType::Y, GateType::Z, GateType::CX, GateType::CY, GateType::CZ];

    pub const PARAMETRIZED: [GateType; 9] = [
        GateType::RX,
        GateType::RY,
        GateType::RZ,
        GateType::CRX,
        GateType::CRY,
        GateType::CRZ,
        GateType::RXX,
        GateType::RYY,
        GateType::RZZ,
    ];

    pub const SINGLE_QUBIT: [GateType; 7] =
        [GateType::H, GateType::X, GateType::Y, GateType::Z, GateType::RX, GateType::RY, GateType::RZ];

    pub fn arity(self) -> usize {
        use GateType::*;
        match self {
            H | X | Y | Z | RX | RY | RZ => 1,
            _ => 2,
        }
    }

    pub fn is_parametrized(self) -> bool {
        self.index() >= 7
    }

    pub fn param_dim(self) -> usize {
        usize::from(self.is_parametrized())
    }

    /// Position in [`GateType::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        use GateType::*;
        match self {
            H => "H",
            X => "X",
            Y => "Y",
            Z => "Z",
            CX => "CX",
            CY => "CY",
            CZ => "CZ",
            RX => "RX",
            RY => "RY",
            RZ => "RZ",
            CRX => "CRX",
            CRY => "CRY",
            CRZ => "CRZ",
            RXX => "RXX",
            RYY => "RYY",
            RZZ => "RZZ",
        }
    }

    /// Value encoding the gate type in the last row of the matrix representation.
    ///
    /// Fixed gates are spread evenly inside (0, 0.1), parametrized gates inside (0.1, 1).
    pub fn representative_number(self) -> f64 {
        let i = self.index();
        if i < 7 {
            0.1 * (i + 1) as f64 / 8.0
        } else {
            0.1 + 0.9 * (i - 6) as f64 / 10.0
        }
    }

    fn rotation_axis(self) -> Option<Pauli> {
        use GateType::*;
        match self {
            RX | CRX | RXX => Some(Pauli::X),
            RY | CRY | RYY => Some(Pauli::Y),
            RZ | CRZ | RZZ => Some(Pauli::Z),
            _ => None,
        }
    }

    /// Local unitary in row-major order (2×2 or 4×4). The first wire is the
    /// most significant bit of the local index.
    pub fn local_matrix(self, theta: Option<f64>) -> Result<LocalOp> {
        use GateType::*;
        match (self.is_parametrized(), theta) {
            (true, None) => return Err(QnasError::InvalidArgument(format!("gate {} needs an angle", self.name()))),
            (false, Some(_)) => return Err(QnasError::InvalidArgument(format!("gate {} takes no angle", self.name()))),
            _ => {}
        }
        let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        let op = match self {
            H => LocalOp::one([c(s2, 0.0), c(s2, 0.0), c(s2, 0.0), c(-s2, 0.0)]),
            X => LocalOp::one(Pauli::X.matrix()),
            Y => LocalOp::one(Pauli::Y.matrix()),
            Z => LocalOp::one(Pauli::Z.matrix()),
            CX | CY | CZ => {
                let p = match self {
                    CX => Pauli::X,
                    CY => Pauli::Y,
                    _ => Pauli::Z,
                };
                LocalOp::controlled(p.matrix())
            }
            RX | RY | RZ => LocalOp::one(rotation(self.rotation_axis().unwrap(), theta.unwrap())),
            CRX | CRY | CRZ => LocalOp::controlled(rotation(self.rotation_axis().unwrap(), theta.unwrap())),
            RXX | RYY | RZZ => {
                // exp(-i θ P⊗P / 2) = cos(θ/2) I - i sin(θ/2) P⊗P
                let t = theta.unwrap();
                let (cs, sn) = ((t / 2.0).cos(), (t / 2.0).sin());
                let p = self.rotation_axis().unwrap().matrix();
                let mut m = [z; 16];
                for r in 0..4 {
                    for col in 0..4 {
                        let pp = p[(r >> 1) * 2 + (col >> 1)] * p[(r & 1) * 2 + (col & 1)];
                        let id = if r == col { o } else { z };
                        m[r * 4 + col] = id * cs + c(0.0, -sn) * pp;
                    }
                }
                LocalOp { dim: 4, m }
            }
        };
        Ok(op)
    }

    /// Hermitian direction of the one-parameter family at θ = 0, i.e. `H` with
    /// `U(θ) = exp(i θ H)`. Only defined for parametrized gates.
    pub fn family_generator(self) -> Option<LocalOp> {
        use GateType::*;
        let axis = self.rotation_axis()?;
        let p = axis.matrix();
        let z = c(0.0, 0.0);
        let half = c(-0.5, 0.0);
        Some(match self {
            RX | RY | RZ => LocalOp::one([p[0] * half, p[1] * half, p[2] * half, p[3] * half]),
            CRX | CRY | CRZ => {
                let mut m = [z; 16];
                for r in 0..2 {
                    for col in 0..2 {
                        m[(r + 2) * 4 + col + 2] = p[r * 2 + col] * half;
                    }
                }
                LocalOp { dim: 4, m }
            }
            _ => {
                let mut m = [z; 16];
                for r in 0..4 {
                    for col in 0..4 {
                        m[r * 4 + col] = p[(r >> 1) * 2 + (col >> 1)] * p[(r & 1) * 2 + (col & 1)] * half;
                    }
                }
                LocalOp { dim: 4, m }
            }
        })
    }
}

fn rotation(axis: Pauli, theta: f64) -> [Complex64; 4] {
    let (cs, sn) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let p = axis.matrix();
    let id = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
    let mut m = [c(0.0, 0.0); 4];
    for k in 0..4 {
        m[k] = id[k] * cs + c(0.0, -sn) * p[k];
    }
    m
}

impl fmt::Display for GateType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateType {
    type Err = QnasError;

    fn from_str(s: &str) -> Result<Self> {
        GateType::ALL
            .iter()
            .copied()
            .find(|g| g.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| QnasError::InvalidArgument(format!("unknown gate type `{s}`")))
    }
}

/// A dense 2×2 or 4×4 operator on the gate's own wires, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalOp {
    pub dim: usize,
    pub m: [Complex64; 16],
}

impl LocalOp {
    fn one(m2: [Complex64; 4]) -> Self {
        let mut m = [c(0.0, 0.0); 16];
        m[..4].copy_from_slice(&m2);
        LocalOp { dim: 2, m }
    }

    fn controlled(target: [Complex64; 4]) -> Self {
        let mut m = [c(0.0, 0.0); 16];
        m[0] = c(1.0, 0.0);
        m[5] = c(1.0, 0.0);
        for r in 0..2 {
            for col in 0..2 {
                m[(r + 2) * 4 + col + 2] = target[r * 2 + col];
            }
        }
        LocalOp { dim: 4, m }
    }

    #[inline]
    pub fn at(&self, r: usize, col: usize) -> Complex64 {
        self.m[r * self.dim + col]
    }

    pub fn adjoint(&self) -> LocalOp {
        let mut out = *self;
        for r in 0..self.dim {
            for col in 0..self.dim {
                out.m[r * self.dim + col] = self.m[col * self.dim + r].conj();
            }
        }
        out
    }

    pub fn to_matrix(&self) -> crate::linalg::CMatrix {
        crate::linalg::CMatrix::from_fn(self.dim, self.dim, |r, col| self.at(r, col))
    }
}

/// One catalog gate placed on wires. For controlled gates the first wire is
/// the control.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gate {
    pub gate_type: GateType,
    wires: [usize; 2],
}

impl Gate {
    pub fn new(gate_type: GateType, wires: &[usize]) -> Result<Self> {
        if wires.len() != gate_type.arity() {
            return Err(QnasError::InvalidCircuit(format!(
                "{} acts on {} wire(s), got {:?}",
                gate_type,
                gate_type.arity(),
                wires
            )));
        }
        if wires.len() == 2 && wires[0] == wires[1] {
            return Err(QnasError::InvalidCircuit(format!("{gate_type} wires must be distinct, got {wires:?}")));
        }
        let mut w = [usize::MAX; 2];
        w[..wires.len()].copy_from_slice(wires);
        Ok(Gate { gate_type, wires: w })
    }

    pub fn single(gate_type: GateType, wire: usize) -> Self {
        Gate::new(gate_type, &[wire]).expect("single-qubit gate")
    }

    pub fn pair(gate_type: GateType, first: usize, second: usize) -> Self {
        Gate::new(gate_type, &[first, second]).expect("two-qubit gate")
    }

    pub fn wires(&self) -> &[usize] {
        &self.wires[..self.gate_type.arity()]
    }

    pub fn arity(&self) -> usize {
        self.gate_type.arity()
    }

    pub fn is_parametrized(&self) -> bool {
        self.gate_type.is_parametrized()
    }

    pub fn acts_on(&self, wire: usize) -> bool {
        self.wires().contains(&wire)
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        if let Some(&w) = self.wires().iter().find(|&&w| w >= n_qubits) {
            return Err(QnasError::InvalidCircuit(format!(
                "{self} uses wire {w} but the circuit has {n_qubits} qubit(s)"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.gate_type)?;
        for (i, w) in self.wires().iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{w}")?;
        }
        f.write_str(")")
    }
}

impl FromStr for Gate {
    type Err = QnasError;

    /// Parses `CRZ(2,3)` or `RX(0)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let open = s.find('(').ok_or_else(|| QnasError::InvalidArgument(format!("expected NAME(w..), got `{s}`")))?;
        if !s.ends_with(')') {
            return Err(QnasError::InvalidArgument(format!("expected NAME(w..), got `{s}`")));
        }
        let gate_type: GateType = s[..open].parse()?;
        let wires = s[open + 1..s.len() - 1]
            .split(',')
            .map(|w| w.trim().parse::<usize>().map_err(|e| QnasError::InvalidArgument(format!("bad wire `{w}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Gate::new(gate_type, &wires)
    }
}
