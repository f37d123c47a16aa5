//! Shape distance between two gates: how far apart the orbits
//! `θ ↦ U(θ)|ψ_k⟩` of the anchor states are once a global unitary `V`,
//! per-anchor counterpart states and per-sample phases are optimized out.
//!
//! Both families are diagonalized once, `U(θ) = W diag(e^{iθλ}) W†`, and the
//! generator spectra have at most three distinct values, so every sum over
//! the `T` angle samples collapses to a few phase-weighted block products.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::circuit::sim::{apply_local_columns, gate_unitary};
use crate::circuit::Gate;
use crate::error::Result;
use crate::linalg::{c, haar_state, haar_unitary, hermitian_eigen, identity, procrustes_unitary, CMatrix, CVector};
use crate::mub::build_mub;

#[derive(Clone, Debug, PartialEq)]
pub struct ShapeConfig {
    /// Number of angle samples, spread uniformly on `[0, 2π)`.
    pub t_samples: usize,
    pub max_iters: usize,
    /// Stop once one full sweep lowers the objective by less than this.
    pub tol: f64,
    /// Starts: `V = I` first, Haar-random afterwards.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for ShapeConfig {
    fn default() -> Self {
        ShapeConfig { t_samples: 12, max_iters: 200, tol: 1e-8, restarts: 8, seed: 0x5eed }
    }
}

impl ShapeConfig {
    pub fn thetas(&self) -> Vec<f64> {
        (0..self.t_samples).map(|t| 2.0 * std::f64::consts::PI * t as f64 / self.t_samples as f64).collect()
    }
}

/// Optimizer state at the returned optimum.
#[derive(Clone, Debug)]
pub struct ShapeFit {
    pub v: CMatrix,
    /// Counterpart states as unit columns, one per anchor.
    pub m: CMatrix,
    /// `K × T` phases.
    pub alpha: DMatrix<f64>,
    /// Objective after every α, V and M update of the winning start.
    pub history: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct ShapeSolution {
    /// In `[0, 1]`, or `+∞` for a fixed/parametrized pair.
    pub distance: f64,
    /// `None` when no optimization was needed (fixed gates involved).
    pub fit: Option<ShapeFit>,
    pub iterations: usize,
    pub converged: bool,
}

/// Eigenbasis of a family generator with columns grouped by eigenvalue.
struct Orbit {
    w: CMatrix,
    /// `(first column, count, eigenvalue)`
    blocks: Vec<(usize, usize, f64)>,
}

impl Orbit {
    fn new(gate: &Gate, n_qubits: usize) -> Self {
        let local = gate.gate_type.family_generator().expect("parametrized gate");
        let mut h = identity(1 << n_qubits);
        apply_local_columns(&mut h, n_qubits, gate.wires(), &local);
        let (vals, w) = hermitian_eigen(&h);
        let mut blocks: Vec<(usize, usize, f64)> = Vec::new();
        for (k, &v) in vals.iter().enumerate() {
            match blocks.last_mut() {
                Some(b) if (v - b.2).abs() < 1e-9 => b.1 += 1,
                _ => blocks.push((k, 1, v)),
            }
        }
        Orbit { w, blocks }
    }
}

fn unit_phase(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r > 1e-300 {
        z.conj() / r
    } else {
        c(1.0, 0.0)
    }
}

struct Problem<'a> {
    o1: &'a Orbit,
    o2: &'a Orbit,
    /// `W1† Ψ`
    x: CMatrix,
    /// `phase[g][h][t] = exp(iθ_t(μ1_g − μ2_h))`
    phase: Vec<Vec<Vec<Complex64>>>,
    k: usize,
    t: usize,
}

impl<'a> Problem<'a> {
    fn new(o1: &'a Orbit, o2: &'a Orbit, psi: &CMatrix, thetas: &[f64]) -> Self {
        let phase = o1
            .blocks
            .iter()
            .map(|&(_, _, m1)| {
                o2.blocks
                    .iter()
                    .map(|&(_, _, m2)| thetas.iter().map(|&th| Complex64::from_polar(1.0, th * (m1 - m2))).collect())
                    .collect()
            })
            .collect();
        Problem { o1, o2, x: o1.w.adjoint() * psi, phase, k: psi.ncols(), t: thetas.len() }
    }

    /// `Y_g = Z[:, g] X_g` for each block of the first orbit.
    fn y_blocks(&self, z: &CMatrix) -> Vec<CMatrix> {
        self.o1.blocks.iter().map(|&(s, len, _)| z.columns(s, len) * self.x.rows(s, len)).collect()
    }

    /// `c[k][t] = ⟨U2(θ_t) m_k | V U1(θ_t) ψ_k⟩`, stored row-major `k * T + t`.
    fn overlaps(&self, y: &[CMatrix], p: &CMatrix) -> Vec<Complex64> {
        let mut out = vec![c(0.0, 0.0); self.k * self.t];
        for (g, yg) in y.iter().enumerate() {
            for (h, &(s, len, _)) in self.o2.blocks.iter().enumerate() {
                let e = &self.phase[g][h];
                for k in 0..self.k {
                    let mut q = c(0.0, 0.0);
                    for i in s..s + len {
                        q += p[(i, k)].conj() * yg[(i, k)];
                    }
                    if q == c(0.0, 0.0) {
                        continue;
                    }
                    let row = &mut out[k * self.t..(k + 1) * self.t];
                    for (o, &ph) in row.iter_mut().zip(e) {
                        *o += ph * q;
                    }
                }
            }
        }
        out
    }

    /// `β[g][h][k] = Σ_t a_{kt} phase[g][h][t]`.
    fn betas(&self, a: &[Complex64]) -> Vec<Vec<Vec<Complex64>>> {
        self.phase
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| {
                        (0..self.k)
                            .map(|k| a[k * self.t..(k + 1) * self.t].iter().zip(e).map(|(x, y)| x * y).sum())
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    fn v_update(&self, a: &[Complex64], p: &CMatrix) -> CMatrix {
        let d = self.x.nrows();
        let beta = self.betas(a);
        let mut inner = CMatrix::zeros(d, d);
        for (g, &(sg, lg, _)) in self.o1.blocks.iter().enumerate() {
            for (h, &(sh, lh, _)) in self.o2.blocks.iter().enumerate() {
                let mut xb = self.x.rows(sg, lg).into_owned();
                for (k, &b) in beta[g][h].iter().enumerate() {
                    xb.column_mut(k).iter_mut().for_each(|v| *v *= b);
                }
                let blk = xb * p.rows(sh, lh).adjoint();
                inner.view_mut((sg, sh), (lg, lh)).copy_from(&blk);
            }
        }
        procrustes_unitary(&inner)
    }

    fn m_update(&self, a: &[Complex64], y: &[CMatrix]) -> CMatrix {
        let d = self.x.nrows();
        let beta = self.betas(a);
        let mut s = CMatrix::zeros(d, self.k);
        for (g, yg) in y.iter().enumerate() {
            for (h, &(sh, lh, _)) in self.o2.blocks.iter().enumerate() {
                for k in 0..self.k {
                    let b = beta[g][h][k];
                    for i in sh..sh + lh {
                        s[(i, k)] += yg[(i, k)] * b;
                    }
                }
            }
        }
        for mut col in s.column_iter_mut() {
            let n = col.norm();
            if n > 1e-300 {
                col.unscale_mut(n);
            } else {
                col.fill(c(0.0, 0.0));
                col[0] = c(1.0, 0.0);
            }
        }
        s
    }

    fn objective(&self, a: &[Complex64], cs: &[Complex64]) -> f64 {
        let sum: f64 = a.iter().zip(cs).map(|(x, y)| (x * y).re).sum();
        1.0 - sum / (self.k * self.t) as f64
    }
}

struct Run {
    objective: f64,
    z: CMatrix,
    p: CMatrix,
    a: Vec<Complex64>,
    history: Vec<f64>,
    iterations: usize,
    converged: bool,
}

fn descend(pr: &Problem, z0: CMatrix, cfg: &ShapeConfig) -> Run {
    let ones = vec![c(1.0, 0.0); pr.k * pr.t];
    let mut z = z0;
    let mut y = pr.y_blocks(&z);
    let mut p = pr.m_update(&ones, &y);
    let mut cs = pr.overlaps(&y, &p);
    let mut a: Vec<Complex64> = cs.iter().map(|&x| unit_phase(x)).collect();
    let mut obj = pr.objective(&a, &cs);
    let mut history = vec![obj];
    let mut prev = obj;
    let mut converged = false;
    let mut iterations = 0;
    let push = |history: &mut Vec<f64>, v: f64| {
        debug_assert!(v <= history.last().copied().unwrap_or(f64::INFINITY) + 1e-10, "objective increased");
        history.push(v);
    };
    while iterations < cfg.max_iters {
        iterations += 1;
        z = pr.v_update(&a, &p);
        y = pr.y_blocks(&z);
        cs = pr.overlaps(&y, &p);
        push(&mut history, pr.objective(&a, &cs));
        a = cs.iter().map(|&x| unit_phase(x)).collect();
        push(&mut history, pr.objective(&a, &cs));
        p = pr.m_update(&a, &y);
        cs = pr.overlaps(&y, &p);
        push(&mut history, pr.objective(&a, &cs));
        a = cs.iter().map(|&x| unit_phase(x)).collect();
        obj = pr.objective(&a, &cs);
        push(&mut history, obj);
        if prev - obj < cfg.tol {
            converged = true;
            break;
        }
        prev = obj;
    }
    Run { objective: obj, z, p, a, history, iterations, converged }
}

/// Directional shape distance from `g1` to `g2` on `n_qubits`.
pub fn shape_distance(g1: &Gate, g2: &Gate, n_qubits: usize, cfg: &ShapeConfig) -> Result<ShapeSolution> {
    g1.validate(n_qubits)?;
    g2.validate(n_qubits)?;
    match (g1.is_parametrized(), g2.is_parametrized()) {
        (false, false) => return Ok(ShapeSolution { distance: 0.0, fit: None, iterations: 0, converged: true }),
        (true, false) | (false, true) => {
            return Ok(ShapeSolution { distance: f64::INFINITY, fit: None, iterations: 0, converged: true })
        }
        _ => {}
    }
    let mub = build_mub(n_qubits)?;
    let psi = mub.anchor_matrix();
    let thetas = cfg.thetas();
    let (o1, o2) = (Orbit::new(g1, n_qubits), Orbit::new(g2, n_qubits));
    let pr = Problem::new(&o1, &o2, &psi, &thetas);
    let d = 1usize << n_qubits;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<Run> = None;
    for r in 0..cfg.restarts.max(1) {
        let v0 = if r == 0 { identity(d) } else { haar_unitary(d, &mut rng) };
        let z0 = o2.w.adjoint() * v0 * &o1.w;
        let run = descend(&pr, z0, cfg);
        if best.as_ref().map_or(true, |b| run.objective < b.objective) {
            best = Some(run);
        }
    }
    let run = best.expect("at least one start");
    let v = &o2.w * &run.z * o1.w.adjoint();
    let m = &o2.w * &run.p;
    let alpha = DMatrix::from_fn(pr.k, pr.t, |k, t| run.a[k * pr.t + t].arg());
    Ok(ShapeSolution {
        distance: run.objective.clamp(0.0, 1.0),
        fit: Some(ShapeFit { v, m, alpha, history: run.history }),
        iterations: run.iterations,
        converged: run.converged,
    })
}

/// Mean of the two directional distances; exactly symmetric, 0 for
/// identical gates.
pub fn symmetric_shape_distance(g1: &Gate, g2: &Gate, n_qubits: usize, cfg: &ShapeConfig) -> Result<f64> {
    if g1 == g2 {
        g1.validate(n_qubits)?;
        return Ok(0.0);
    }
    let ab = shape_distance(g1, g2, n_qubits, cfg)?.distance;
    let ba = shape_distance(g2, g1, n_qubits, cfg)?.distance;
    Ok(0.5 * (ab + ba))
}

/// Direct evaluation of `(1/2KT) Σ ‖e^{iα_kt} V U1(θ_t)ψ_k − U2(θ_t) m_k‖²`
/// with full matrices.
pub fn shape_objective(
    g1: &Gate,
    g2: &Gate,
    n_qubits: usize,
    thetas: &[f64],
    psi: &CMatrix,
    fit: &ShapeFit,
) -> Result<f64> {
    let mut total = 0.0;
    for (t, &th) in thetas.iter().enumerate() {
        let a = &fit.v * gate_unitary(g1, Some(th), n_qubits)?.matrix() * psi;
        let b = gate_unitary(g2, Some(th), n_qubits)?.matrix() * &fit.m;
        for k in 0..psi.ncols() {
            let e = Complex64::from_polar(1.0, fit.alpha[(k, t)]);
            total += (a.column(k) * e - b.column(k)).norm_squared();
        }
    }
    Ok(total / (2.0 * psi.ncols() as f64 * thetas.len() as f64))
}

/// Monte-Carlo estimate of the integral form over Haar-random states with a
/// fixed `V`: each state gets its own best counterpart and phases.
pub fn integral_shape_estimate(
    g1: &Gate,
    g2: &Gate,
    n_qubits: usize,
    v: &CMatrix,
    thetas: &[f64],
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let d = 1usize << n_qubits;
    let u1: Vec<CMatrix> =
        thetas.iter().map(|&th| gate_unitary(g1, Some(th), n_qubits).map(|u| v * u.matrix())).collect::<Result<_>>()?;
    let u2: Vec<CMatrix> = thetas
        .iter()
        .map(|&th| gate_unitary(g2, Some(th), n_qubits).map(|u| u.into_matrix()))
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    for _ in 0..samples {
        let psi = haar_state(d, &mut rng);
        let targets: Vec<CVector> = u1.iter().map(|u| u * &psi).collect();
        let pulled: Vec<CVector> = u2.iter().zip(&targets).map(|(u, a)| u.adjoint() * a).collect();
        let mut phi: CVector = pulled.iter().fold(CVector::zeros(d), |acc, x| acc + x);
        if phi.norm() < 1e-12 {
            phi = pulled[0].clone();
        }
        phi.unscale_mut(phi.norm());
        let mut value = f64::INFINITY;
        for _ in 0..200 {
            let overlaps: Vec<Complex64> = pulled.iter().map(|x| phi.dotc(x)).collect();
            let next_value = 1.0 - overlaps.iter().map(|z| z.norm()).sum::<f64>() / thetas.len() as f64;
            let done = value - next_value < 1e-12;
            value = value.min(next_value);
            if done {
                break;
            }
            let mut s = CVector::zeros(d);
            for (x, z) in pulled.iter().zip(&overlaps) {
                s += x * unit_phase(*z);
            }
            phi = s.unscale(s.norm());
        }
        total += value;
    }
    Ok(total / samples as f64)
}
