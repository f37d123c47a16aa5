//! Small complex linear-algebra helpers shared by the simulator and the metrics.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Frobenius norm of `U^† U - I`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let prod = u.adjoint() * u;
    (prod - identity(u.nrows())).norm()
}

/// Nuclear norm of a Hermitian matrix: sum of absolute eigenvalues.
pub fn hermitian_nuclear_norm(h: &CMatrix) -> f64 {
    let herm = (h + h.adjoint()).scale(0.5);
    herm.symmetric_eigenvalues().iter().map(|v| v.abs()).sum()
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Haar-random unitary via QR of a complex Ginibre matrix with phase fix.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-random pure state.
pub fn haar_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    });
    let n = v.norm();
    v.unscale(n)
}

/// Exponential of `i * t * H` for Hermitian `H` via eigendecomposition.
pub fn expi_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let herm = (h + h.adjoint()).scale(0.5);
    let eig = herm.symmetric_eigen();
    let vecs = &eig.eigenvectors;
    let phases = CMatrix::from_diagonal(&CVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| (I * l * t).exp()),
    ));
    vecs * phases * vecs.adjoint()
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let herm = (h + h.adjoint()).scale(0.5);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = CMatrix::from_columns(&order.iter().map(|&k| eig.eigenvectors.column(k)).collect::<Vec<_>>());
    (vals, vecs)
}

/// Hermitian `H` with `exp(iH) = U` and eigenvalues in `(-π, π]`.
///
/// `U` is normal, so its Hermitian and anti-Hermitian parts commute and a
/// generic real combination of them shares their eigenvectors.
pub fn unitary_log_generator(u: &CMatrix) -> CMatrix {
    let re = (u + u.adjoint()).scale(0.5);
    let im = (u - u.adjoint()) * c(0.0, -0.5);
    let mix = &re + im.scale(0.618_033_988_749_894_9);
    let (_, vecs) = hermitian_eigen(&mix);
    let d = u.nrows();
    let mut phases = Vec::with_capacity(d);
    for k in 0..d {
        let v = vecs.column(k);
        let z = v.dotc(&(u * v));
        let mut phi = z.im.atan2(z.re);
        if phi <= -std::f64::consts::PI + 1e-12 {
            phi = std::f64::consts::PI;
        }
        phases.push(c(phi, 0.0));
    }
    &vecs * CMatrix::from_diagonal(&CVector::from_vec(phases)) * vecs.adjoint()
}

/// Smallest `d` such that the two matrices agree up to a global phase.
pub fn phase_insensitive_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let overlap = (a.adjoint() * b).trace();
    let phase = if overlap.norm() > 1e-300 { overlap / overlap.norm() } else { c(1.0, 0.0) };
    (a.scale(1.0) * phase - b).norm()
}

/// Thin SVD `A = U diag(σ) V†` of an `m × n` matrix with `m ≥ n`, by
/// one-sided Jacobi rotations. `U` has orthonormal columns; columns for zero
/// singular values are completed arbitrarily.
pub fn svd(a: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let (m, n) = a.shape();
    assert!(m >= n, "svd expects at least as many rows as columns");
    let mut b = a.clone();
    let mut v = identity(n);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = b.column(p).norm_squared();
                let beta = b.column(q).norm_squared();
                let gamma = b.column(p).dotc(&b.column(q));
                let g = gamma.norm();
                if g <= 1e-15 * (alpha * beta).sqrt() || g < 1e-300 {
                    continue;
                }
                rotated = true;
                let ph = gamma.conj() / g;
                b.column_mut(q).iter_mut().for_each(|x| *x *= ph);
                v.column_mut(q).iter_mut().for_each(|x| *x *= ph);
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta == 0.0 { 1.0 } else { zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt()) };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for mat in [&mut b, &mut v] {
                    for i in 0..mat.nrows() {
                        let (x, y) = (mat[(i, p)], mat[(i, q)]);
                        mat[(i, p)] = x * cs - y * sn;
                        mat[(i, q)] = x * sn + y * cs;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma: Vec<f64> = (0..n).map(|j| b.column(j).norm()).collect();
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let mut u = CMatrix::zeros(m, n);
    let mut missing = Vec::new();
    for j in 0..n {
        if sigma[j] > 1e-13 * smax && sigma[j] > 1e-300 {
            u.set_column(j, &b.column(j).unscale(sigma[j]));
        } else {
            missing.push(j);
        }
    }
    let mut e = 0;
    for j in missing {
        loop {
            let mut cand = CVector::zeros(m);
            cand[e % m] = c(1.0, 0.0);
            e += 1;
            for _ in 0..2 {
                for k in 0..n {
                    let proj = u.column(k).dotc(&cand);
                    cand -= u.column(k) * proj;
                }
            }
            let nrm = cand.norm();
            if nrm > 1e-6 {
                u.set_column(j, &cand.unscale(nrm));
                break;
            }
        }
    }
    (u, sigma, v)
}

/// Unitary `W` maximizing `Re tr(W A)` for square `A`.
pub fn procrustes_unitary(a: &CMatrix) -> CMatrix {
    let (u, _, v) = svd(a);
    v * u.adjoint()
}
