//! Mutually unbiased bases in dimension `2^n` built over GR(4, n), used as a
//! finite anchor set that reproduces Haar averages of degree-2 quantities.

pub mod ring;

use crate::circuit::UnitaryOp;
use crate::error::{QnasError, Result};
use crate::linalg::{c, CMatrix, CVector};
use num_complex::Complex64;

pub use ring::{gr_trace, teichmuller_set, GaloisRing, GaloisRingElement};

const POW_I: [Complex64; 4] = [
    Complex64 { re: 1.0, im: 0.0 },
    Complex64 { re: 0.0, im: 1.0 },
    Complex64 { re: -1.0, im: 0.0 },
    Complex64 { re: 0.0, im: -1.0 },
];

/// `d + 1` mutually unbiased bases of `C^d`, `d = 2^n`. Anchor `k < d` is the
/// standard basis vector `e_k`; anchor `d + a·d + b` is `v_{a,b}` with `a`, `b`
/// indexing the Teichmüller set.
#[derive(Clone, Debug)]
pub struct MubSet {
    n: usize,
    dim: usize,
    /// `tr(T_u · T_x)` for Teichmüller indices `u`, `x`
    trace_table: Vec<u8>,
}

impl MubSet {
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_bases(&self) -> usize {
        self.dim + 1
    }

    pub fn n_anchors(&self) -> usize {
        self.dim * (self.dim + 1)
    }

    /// Z₄ exponent of component `x` of `v_{a,b}`: tr((a + 2b)·x).
    pub fn exponent(&self, a: usize, b: usize, x: usize) -> u8 {
        let d = self.dim;
        (self.trace_table[a * d + x] + 2 * self.trace_table[b * d + x]) % 4
    }

    pub fn anchor(&self, k: usize) -> CVector {
        let d = self.dim;
        assert!(k < self.n_anchors(), "anchor index out of range");
        if k < d {
            let mut v = CVector::zeros(d);
            v[k] = c(1.0, 0.0);
            return v;
        }
        let (a, b) = ((k - d) / d, (k - d) % d);
        let s = 1.0 / (d as f64).sqrt();
        CVector::from_fn(d, |x, _| POW_I[self.exponent(a, b, x) as usize] * s)
    }

    /// Basis `j` as the columns of a `d × d` matrix; basis 0 is standard.
    pub fn basis(&self, j: usize) -> CMatrix {
        let d = self.dim;
        CMatrix::from_columns(&(0..d).map(|b| self.anchor(j * d + b)).collect::<Vec<_>>())
    }

    /// All anchors as the columns of a `d × K` matrix.
    pub fn anchor_matrix(&self) -> CMatrix {
        CMatrix::from_columns(&(0..self.n_anchors()).map(|k| self.anchor(k)).collect::<Vec<_>>())
    }

    /// Largest deviations from orthonormality within a basis and from `1/d`
    /// overlap across bases.
    pub fn verify(&self) -> (f64, f64) {
        let d = self.dim;
        let bases: Vec<CMatrix> = (0..self.n_bases()).map(|j| self.basis(j)).collect();
        let mut ortho: f64 = 0.0;
        let mut unbiased: f64 = 0.0;
        for (i, bi) in bases.iter().enumerate() {
            for (j, bj) in bases.iter().enumerate().skip(i) {
                let g = bi.adjoint() * bj;
                for r in 0..d {
                    for col in 0..d {
                        if i == j {
                            let want = if r == col { 1.0 } else { 0.0 };
                            ortho = ortho.max((g[(r, col)] - c(want, 0.0)).norm());
                        } else {
                            unbiased = unbiased.max((g[(r, col)].norm_sqr() - 1.0 / d as f64).abs());
                        }
                    }
                }
            }
        }
        (ortho, unbiased)
    }
}

pub fn build_mub(n: usize) -> Result<MubSet> {
    let ring = GaloisRing::new(n)?;
    let t = ring.teichmuller();
    let d = t.len();
    let mut trace_table = vec![0u8; d * d];
    for u in 0..d {
        for x in u..d {
            let v = ring.trace(&ring.mul(&t[u], &t[x]));
            trace_table[u * d + x] = v;
            trace_table[x * d + u] = v;
        }
    }
    Ok(MubSet { n, dim: d, trace_table })
}

/// `(1/K) Σ_k |⟨ψ_k|U|ψ_k⟩|²` over the anchors.
pub fn haar_average_fidelity(u: &UnitaryOp, mub: &MubSet) -> Result<f64> {
    let d = mub.dim();
    if u.dim() != d {
        return Err(QnasError::DimensionMismatch { expected: d, got: u.dim() });
    }
    let mut total = 0.0;
    for j in 0..mub.n_bases() {
        let b = mub.basis(j);
        let ub = u.matrix() * &b;
        for k in 0..d {
            total += b.column(k).dotc(&ub.column(k)).norm_sqr();
        }
    }
    Ok(total / mub.n_anchors() as f64)
}

/// Closed-form Haar average `(d + |Tr U|²) / (d(d+1))`.
pub fn haar_fidelity_closed_form(u: &CMatrix) -> f64 {
    let d = u.nrows() as f64;
    (d + u.trace().norm_sqr()) / (d * (d + 1.0))
}
