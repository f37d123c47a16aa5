//! Gaussian-process surrogate over circuits with the optimal-transport
//! kernel, marginal-likelihood fitting and expected improvement.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::circuit::Circuit;
use crate::circuit_metric::{ot_plan, CircuitFeatures};
use crate::error::{QnasError, Result};
use crate::gate_metric::GateDistanceTable;
use crate::optim::lbfgs;

/// Structural weights of the kernel's distance terms.
pub const NU_SET: [f64; 4] = [0.1, 0.2, 0.4, 0.8];

/// Distances between two circuits: `[d_ν for ν in NU_SET]` followed by the
/// normalized `[d̄_ν for ν in NU_SET]`.
pub type PairDistances = [f64; 8];

pub const NOISE_FLOOR: f64 = 1e-8;
const JITTER_SCALE: f64 = 1e-6;
const MAX_JITTER_SCALE: f64 = 1e-2;

pub fn pair_distances(f1: &CircuitFeatures, f2: &CircuitFeatures, table: &GateDistanceTable) -> Result<PairDistances> {
    pair_distances_with(f1, f2, &NU_SET, table)
}

pub fn pair_distances_with(
    f1: &CircuitFeatures,
    f2: &CircuitFeatures,
    nu_set: &[f64; 4],
    table: &GateDistanceTable,
) -> Result<PairDistances> {
    let mut d = [0.0; 8];
    for (i, &nu) in nu_set.iter().enumerate() {
        let r = ot_plan(f1, f2, nu, table)?;
        d[i] = r.distance;
        d[i + 4] = r.normalized;
    }
    if d.iter().any(|v| !v.is_finite()) {
        return Err(QnasError::InvalidArgument("non-finite circuit distance".into()));
    }
    Ok(d)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelHyperparams {
    pub alpha: f64,
    pub alpha_bar: f64,
    pub beta: [f64; 4],
    pub beta_bar: [f64; 4],
    pub noise: f64,
}

impl KernelHyperparams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.alpha, self.alpha_bar].into_iter().chain(self.beta).chain(self.beta_bar);
        if all.clone().any(|v| !v.is_finite() || v < 0.0) {
            return Err(QnasError::InvalidArgument(format!("bad kernel hyperparameters {self:?}")));
        }
        if !(self.noise >= NOISE_FLOOR) || !self.noise.is_finite() {
            return Err(QnasError::InvalidArgument(format!("noise variance {} below floor", self.noise)));
        }
        Ok(())
    }

    pub fn kernel(&self, d: &PairDistances) -> f64 {
        let s: f64 = (0..4).map(|i| self.beta[i] * d[i]).sum();
        let sb: f64 = (0..4).map(|i| self.beta_bar[i] * d[i + 4]).sum();
        self.alpha * (-s).exp() + self.alpha_bar * (-sb).exp()
    }

    /// `k(x, x)`.
    pub fn prior_variance(&self) -> f64 {
        self.alpha + self.alpha_bar
    }

    fn to_log(&self, floor: f64) -> Vec<f64> {
        let mut v = vec![self.alpha.max(1e-300).ln(), self.alpha_bar.max(1e-300).ln()];
        v.extend(self.beta.iter().map(|b| b.max(1e-300).ln()));
        v.extend(self.beta_bar.iter().map(|b| b.max(1e-300).ln()));
        v.push((self.noise - floor).max(1e-300).ln());
        v
    }

    fn from_log(x: &[f64], floor: f64) -> Self {
        let e = |i: usize| x[i].exp();
        KernelHyperparams {
            alpha: e(0),
            alpha_bar: e(1),
            beta: [e(2), e(3), e(4), e(5)],
            beta_bar: [e(6), e(7), e(8), e(9)],
            noise: floor + e(10),
        }
    }
}

/// Evaluated circuits with cached pairwise distances.
#[derive(Clone)]
pub struct ObservationSet {
    table: Arc<GateDistanceTable>,
    nu_set: [f64; 4],
    circuits: Vec<Circuit>,
    features: Vec<CircuitFeatures>,
    y: Vec<f64>,
    dist: Vec<Vec<PairDistances>>,
}

impl ObservationSet {
    pub fn new(table: Arc<GateDistanceTable>) -> Self {
        Self::with_nu(table, NU_SET)
    }

    pub fn with_nu(table: Arc<GateDistanceTable>, nu_set: [f64; 4]) -> Self {
        ObservationSet { table, nu_set, circuits: vec![], features: vec![], y: vec![], dist: vec![] }
    }

    pub fn from_data(table: Arc<GateDistanceTable>, circuits: Vec<Circuit>, y: Vec<f64>) -> Result<Self> {
        if circuits.len() != y.len() {
            return Err(QnasError::DimensionMismatch { expected: circuits.len(), got: y.len() });
        }
        let mut obs = Self::new(table);
        for (c, v) in circuits.into_iter().zip(y) {
            obs.push(c, v)?;
        }
        Ok(obs)
    }

    pub fn nu_set(&self) -> &[f64; 4] {
        &self.nu_set
    }

    pub fn table(&self) -> &Arc<GateDistanceTable> {
        &self.table
    }

    pub fn push(&mut self, circuit: Circuit, y: f64) -> Result<()> {
        if !y.is_finite() {
            return Err(QnasError::InvalidArgument("non-finite observation".into()));
        }
        let f = CircuitFeatures::new(&circuit);
        let mut row = self.distances_to(&f)?;
        row.push([0.0; 8]);
        for (i, d) in row.iter().take(self.len()).enumerate() {
            self.dist[i].push(*d);
        }
        self.dist.push(row);
        self.circuits.push(circuit);
        self.features.push(f);
        self.y.push(y);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn circuits(&self) -> &[Circuit] {
        &self.circuits
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn distance(&self, i: usize, j: usize) -> &PairDistances {
        &self.dist[i][j]
    }

    /// Matrix of distance component `k` (index into [`PairDistances`]).
    pub fn distance_matrix(&self, k: usize) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| self.dist[i][j][k])
    }

    /// Distances from a new circuit to every observation.
    pub fn distances_to(&self, f: &CircuitFeatures) -> Result<Vec<PairDistances>> {
        self.features.iter().map(|g| pair_distances_with(f, g, &self.nu_set, &self.table)).collect()
    }

    pub fn mean_y(&self) -> f64 {
        self.y.iter().sum::<f64>() / self.len().max(1) as f64
    }

    fn var_y(&self) -> f64 {
        let m = self.mean_y();
        self.y.iter().map(|v| (v - m).powi(2)).sum::<f64>() / self.len().max(1) as f64
    }

    /// Median heuristic initialization.
    pub fn default_hyperparams(&self) -> KernelHyperparams {
        let var = self.var_y();
        let n = self.len();
        let rate = |k: usize| {
            let mut v: Vec<f64> = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .map(|(i, j)| self.dist[i][j][k])
                .filter(|&d| d > 0.0)
                .collect();
            if v.is_empty() {
                return 1.0;
            }
            v.sort_by(f64::total_cmp);
            let m = v.len();
            let med = if m % 2 == 1 { v[m / 2] } else { 0.5 * (v[m / 2 - 1] + v[m / 2]) };
            1.0 / med
        };
        KernelHyperparams {
            alpha: var / 2.0,
            alpha_bar: var / 2.0,
            beta: [rate(0), rate(1), rate(2), rate(3)],
            beta_bar: [rate(4), rate(5), rate(6), rate(7)],
            noise: (1e-4 * var).max(NOISE_FLOOR),
        }
    }
}

/// Kernel matrix between two lists of distance rows.
fn gram(rows: &[Vec<PairDistances>], hp: &KernelHyperparams) -> DMatrix<f64> {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    DMatrix::from_fn(m, n, |i, j| hp.kernel(&rows[i][j]))
}

/// `K(query, obs)`.
pub fn kernel_matrix(obs: &ObservationSet, query: &[Circuit], hp: &KernelHyperparams) -> Result<DMatrix<f64>> {
    hp.validate()?;
    let rows: Vec<Vec<PairDistances>> =
        query.iter().map(|c| obs.distances_to(&CircuitFeatures::new(c))).collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(query.len(), obs.len(), |i, j| hp.kernel(&rows[i][j])))
}

/// `K_X = K(X, X) + σ² I` before any jitter.
pub fn training_kernel(obs: &ObservationSet, hp: &KernelHyperparams) -> DMatrix<f64> {
    let mut k = gram(&obs.dist, hp);
    for i in 0..obs.len() {
        k[(i, i)] += hp.noise;
    }
    k
}

/// Conditioning record for one factorization.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct JitterReport {
    /// Smallest eigenvalue of the noise-free kernel matrix.
    pub min_eig: f64,
    /// Base jitter level `1e-6 (α + ᾱ)`.
    pub threshold: f64,
    /// Diagonal term added on top of the noise variance.
    pub added: f64,
    /// Set when `min_eig < -threshold`.
    pub flagged: bool,
}

fn factorize(kx: &DMatrix<f64>, scale: f64, mut added: f64) -> Result<(Cholesky<f64, Dyn>, f64)> {
    if !scale.is_finite() || kx.iter().any(|v| !v.is_finite()) {
        return Err(QnasError::Conditioning("non-finite kernel matrix".into()));
    }
    let scale = if scale > 0.0 { scale } else { 1.0 };
    loop {
        let mut m = kx.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += added;
        }
        if let Some(ch) = Cholesky::new(m) {
            return Ok((ch, added));
        }
        added = if added == 0.0 { JITTER_SCALE * scale } else { added * 10.0 };
        if added > MAX_JITTER_SCALE * scale * (1.0 + 1e-9) {
            return Err(QnasError::Conditioning(format!("kernel matrix not positive definite at jitter {added:e}")));
        }
    }
}

/// Posterior at query points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GpPosterior {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

/// A conditioned GP, ready for fast queries.
#[derive(Clone, Debug)]
pub struct GpModel {
    pub hp: KernelHyperparams,
    pub prior_mean: f64,
    pub jitter: JitterReport,
    chol: Cholesky<f64, Dyn>,
    weights: DVector<f64>,
}

impl GpModel {
    pub fn fit(obs: &ObservationSet, hp: &KernelHyperparams) -> Result<Self> {
        hp.validate()?;
        if obs.is_empty() {
            return Err(QnasError::InvalidArgument("posterior needs at least one observation".into()));
        }
        let k = gram(&obs.dist, hp);
        let min_eig = SymmetricEigen::new(k.clone()).eigenvalues.min();
        let threshold = JITTER_SCALE * hp.prior_variance();
        let flagged = min_eig < -threshold;
        let mut kx = k;
        for i in 0..obs.len() {
            kx[(i, i)] += hp.noise;
        }
        let (chol, added) = factorize(&kx, hp.prior_variance(), if flagged { threshold } else { 0.0 })?;
        let prior_mean = obs.mean_y();
        let r = DVector::from_iterator(obs.len(), obs.y.iter().map(|v| v - prior_mean));
        let weights = chol.solve(&r);
        Ok(GpModel {
            hp: hp.clone(),
            prior_mean,
            jitter: JitterReport { min_eig, threshold, added, flagged },
            chol,
            weights,
        })
    }

    /// Mean and latent variance given distances to every training point.
    pub fn predict_from_distances(&self, d: &[PairDistances]) -> (f64, f64) {
        let ks = DVector::from_iterator(d.len(), d.iter().map(|x| self.hp.kernel(x)));
        let mean = self.prior_mean + ks.dot(&self.weights);
        let v = self.chol.l().solve_lower_triangular(&ks).expect("cholesky factor has a nonzero diagonal");
        let var = (self.hp.prior_variance() - v.norm_squared()).max(0.0);
        (mean, var)
    }

    pub fn predict(&self, obs: &ObservationSet, query: &CircuitFeatures) -> Result<(f64, f64)> {
        Ok(self.predict_from_distances(&obs.distances_to(query)?))
    }
}

pub fn gp_posterior(obs: &ObservationSet, query: &[Circuit], hp: &KernelHyperparams) -> Result<GpPosterior> {
    let model = GpModel::fit(obs, hp)?;
    let mut post = GpPosterior { mean: vec![], variance: vec![] };
    for c in query {
        let (m, v) = model.predict(obs, &CircuitFeatures::new(c))?;
        post.mean.push(m);
        post.variance.push(v);
    }
    Ok(post)
}

/// Negative log marginal likelihood and its gradient in log-parameters.
fn nll_and_grad(obs: &ObservationSet, x: &[f64], floor: f64, want_grad: bool) -> Option<(f64, Vec<f64>)> {
    let hp = KernelHyperparams::from_log(x, floor);
    let n = obs.len();
    let mut e1 = DMatrix::zeros(n, n);
    let mut e2 = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let d = &obs.dist[i][j];
            e1[(i, j)] = (-(0..4).map(|k| hp.beta[k] * d[k]).sum::<f64>()).exp();
            e2[(i, j)] = (-(0..4).map(|k| hp.beta_bar[k] * d[k + 4]).sum::<f64>()).exp();
        }
    }
    let mut kx = &e1 * hp.alpha + &e2 * hp.alpha_bar;
    for i in 0..n {
        kx[(i, i)] += hp.noise;
    }
    let (ch, _) = factorize(&kx, hp.prior_variance(), 0.0).ok()?;
    let m = obs.mean_y();
    let r = DVector::from_iterator(n, obs.y.iter().map(|v| v - m));
    let a = ch.solve(&r);
    let logdet: f64 = ch.l_dirty().diagonal().iter().map(|v| v.ln()).sum();
    let nll = 0.5 * r.dot(&a) + logdet + 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
    if !nll.is_finite() {
        return None;
    }
    if !want_grad {
        return Some((nll, vec![]));
    }
    // dNLL/dθ = ½ tr((K⁻¹ − a aᵀ) dK/dθ)
    let w = ch.inverse() - &a * a.transpose();
    let tr = |dk: &DMatrix<f64>| 0.5 * w.component_mul(dk).sum();
    let mut g = vec![0.0; 11];
    g[0] = tr(&(&e1 * hp.alpha));
    g[1] = tr(&(&e2 * hp.alpha_bar));
    for k in 0..4 {
        let dk = DMatrix::from_fn(n, n, |i, j| -hp.beta[k] * hp.alpha * e1[(i, j)] * obs.dist[i][j][k]);
        g[2 + k] = tr(&dk);
        let dk = DMatrix::from_fn(n, n, |i, j| -hp.beta_bar[k] * hp.alpha_bar * e2[(i, j)] * obs.dist[i][j][k + 4]);
        g[6 + k] = tr(&dk);
    }
    g[10] = 0.5 * (hp.noise - floor) * w.diagonal().sum();
    Some((nll, g))
}

pub fn log_marginal_likelihood(obs: &ObservationSet, hp: &KernelHyperparams) -> Result<f64> {
    hp.validate()?;
    let x = hp.to_log(0.0);
    nll_and_grad(obs, &x, 0.0, false)
        .map(|(v, _)| -v)
        .ok_or_else(|| QnasError::Conditioning("kernel matrix not positive definite".into()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    /// Local searches besides the one from the default point.
    pub extra_starts: usize,
    /// Half-width of the random log-space perturbation for extra starts.
    pub spread: f64,
    /// Log-parameters further than this from the default start are penalized.
    pub box_radius: f64,
    pub max_iters: u64,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { extra_starts: 4, spread: 2.0, box_radius: 10.0, max_iters: 100, seed: 0x6b70 }
    }
}

/// Maximum-likelihood hyperparameters with the default settings.
pub const MIN_FIT_OBSERVATIONS: usize = 3;

pub fn fit_hyperparams(obs: &ObservationSet) -> Result<KernelHyperparams> {
    fit_hyperparams_with(obs, &FitConfig::default())
}

pub fn fit_hyperparams_with(obs: &ObservationSet, cfg: &FitConfig) -> Result<KernelHyperparams> {
    if obs.len() < MIN_FIT_OBSERVATIONS {
        return Err(QnasError::InvalidArgument(format!(
            "need {MIN_FIT_OBSERVATIONS} observations to fit, have {}",
            obs.len()
        )));
    }
    let init = obs.default_hyperparams();
    if obs.var_y() <= 0.0 {
        return Ok(KernelHyperparams { noise: NOISE_FLOOR, ..init });
    }
    let center = init.to_log(NOISE_FLOOR);
    let penalty = |x: &[f64]| -> (f64, Vec<f64>) {
        let mut p = 0.0;
        let mut g = vec![0.0; x.len()];
        for i in 0..x.len() {
            let e = (x[i] - center[i]).abs() - cfg.box_radius;
            if e > 0.0 {
                p += 0.5 * e * e;
                g[i] = e * (x[i] - center[i]).signum();
            }
        }
        (p, g)
    };
    let f = |x: &[f64]| nll_and_grad(obs, x, NOISE_FLOOR, false).map_or(f64::INFINITY, |(v, _)| v + penalty(x).0);
    let g = |x: &[f64]| match nll_and_grad(obs, x, NOISE_FLOOR, true) {
        Some((_, mut g)) => {
            let (_, pg) = penalty(x);
            g.iter_mut().zip(pg).for_each(|(a, b)| *a += b);
            g
        }
        None => vec![0.0; x.len()],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best = (center.clone(), f(&center));
    let mut starts = vec![center.clone()];
    for _ in 0..cfg.extra_starts {
        starts.push(center.iter().map(|c| c + rng.gen_range(-cfg.spread..=cfg.spread)).collect());
    }
    for s in starts {
        let (x, v) = lbfgs(&f, &g, s, cfg.max_iters);
        if v < best.1 {
            best = (x, v);
        }
    }
    Ok(KernelHyperparams::from_log(&best.0, NOISE_FLOOR))
}

/// `E[(f - f_best)⁺]` for `f ~ N(mu, var)`.
pub fn ei_closed_form(mu: f64, var: f64, f_best: f64) -> f64 {
    let sigma = var.max(0.0).sqrt();
    let gain = mu - f_best;
    if sigma <= 0.0 {
        return gain.max(0.0);
    }
    let z = gain / sigma;
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    (gain * n.cdf(z) + sigma * n.pdf(z)).max(0.0)
}

pub fn expected_improvement(query: &Circuit, obs: &ObservationSet, hp: &KernelHyperparams, f_best: f64) -> Result<f64> {
    let post = gp_posterior(obs, std::slice::from_ref(query), hp)?;
    Ok(ei_closed_form(post.mean[0], post.variance[0], f_best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::random_circuit;
    use proptest::prelude::*;
    use rand_distr::{Distribution, StandardNormal};

    fn table(n: usize) -> Arc<GateDistanceTable> {
        Arc::new(GateDistanceTable::for_qubits(n).unwrap())
    }

    fn circuits(n: usize, gates: usize, count: usize, seed: u64) -> Vec<Circuit> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| random_circuit(n, gates, &mut rng).unwrap()).collect()
    }

    fn obs_with(cs: Vec<Circuit>, f: impl Fn(usize) -> f64) -> ObservationSet {
        let y = (0..cs.len()).map(f).collect();
        ObservationSet::from_data(table(2), cs, y).unwrap()
    }

    #[test]
    fn self_kernel_and_zero_rates() {
        let obs = obs_with(circuits(2, 4, 4, 1), |i| i as f64);
        let hp = obs.default_hyperparams();
        let k = kernel_matrix(&obs, obs.circuits(), &hp).unwrap();
        for i in 0..4 {
            assert!((k[(i, i)] - hp.prior_variance()).abs() < 1e-12);
            for j in 0..4 {
                assert!((k[(i, j)] - k[(j, i)]).abs() < 1e-12);
                assert!(k[(i, j)] <= k[(i, i)] + 1e-12);
            }
        }
        let flat = KernelHyperparams { beta: [0.0; 4], beta_bar: [0.0; 4], ..hp.clone() };
        let k = kernel_matrix(&obs, obs.circuits(), &flat).unwrap();
        assert!(k.iter().all(|v| (v - flat.prior_variance()).abs() < 1e-12));
    }

    #[test]
    fn ten_circuits_are_well_conditioned() {
        let obs = obs_with(circuits(2, 5, 10, 2), |i| (i as f64).sin());
        let hp = obs.default_hyperparams();
        let kx = training_kernel(&obs, &hp);
        let min = SymmetricEigen::new(kx).eigenvalues.min();
        assert!(min >= hp.noise / 2.0, "{min}");
        assert!(!GpModel::fit(&obs, &hp).unwrap().jitter.flagged);
    }

    #[test]
    fn interpolates_single_observation() {
        let cs = circuits(2, 4, 1, 3);
        let obs = obs_with(cs.clone(), |_| 0.7);
        let hp =
            KernelHyperparams { alpha: 0.5, alpha_bar: 0.5, beta: [1.0; 4], beta_bar: [1.0; 4], noise: NOISE_FLOOR };
        let p = gp_posterior(&obs, &cs, &hp).unwrap();
        assert!((p.mean[0] - 0.7).abs() < 1e-6);
        assert!(p.variance[0] < 1e-6);
    }

    #[test]
    fn far_queries_revert_to_prior() {
        let obs = obs_with(circuits(2, 4, 5, 4), |i| i as f64);
        let hp = obs.default_hyperparams();
        let model = GpModel::fit(&obs, &hp).unwrap();
        let far = vec![[1e6; 8]; 5];
        let (m, v) = model.predict_from_distances(&far);
        assert!((m - obs.mean_y()).abs() < 1e-12);
        assert!((v - hp.prior_variance()).abs() < 1e-12);
    }

    #[test]
    fn matches_dense_inverse() {
        let cs = circuits(2, 5, 6, 5);
        let obs = obs_with(cs[..5].to_vec(), |i| (i as f64 * 0.7).cos());
        let hp = obs.default_hyperparams();
        let post = gp_posterior(&obs, &cs, &hp).unwrap();
        let n = 5;
        let kx = DMatrix::from_fn(n, n, |i, j| hp.kernel(obs.distance(i, j)) + if i == j { hp.noise } else { 0.0 });
        let inv = kx.try_inverse().unwrap();
        let m = obs.y().iter().sum::<f64>() / n as f64;
        let r = DVector::from_iterator(n, obs.y().iter().map(|v| v - m));
        for (q, c) in cs.iter().enumerate() {
            let f = CircuitFeatures::new(c);
            let ks = DVector::from_iterator(
                n,
                obs.circuits()
                    .iter()
                    .map(|o| hp.kernel(&pair_distances(&f, &CircuitFeatures::new(o), obs.table()).unwrap())),
            );
            let mean = m + (ks.transpose() * &inv * &r)[0];
            let var = hp.prior_variance() - (ks.transpose() * &inv * &ks)[0];
            assert!((post.mean[q] - mean).abs() < 1e-8);
            assert!((post.variance[q] - var.max(0.0)).abs() < 1e-8);
        }
    }

    #[test]
    fn more_data_never_raises_variance() {
        let cs = circuits(2, 5, 9, 6);
        let query = &cs[8];
        let full = obs_with(cs[..8].to_vec(), |i| i as f64);
        let hp = full.default_hyperparams();
        let mut prev = f64::INFINITY;
        for k in 1..=8 {
            let obs = obs_with(cs[..k].to_vec(), |i| i as f64);
            let v = gp_posterior(&obs, std::slice::from_ref(query), &hp).unwrap().variance[0];
            assert!(v <= prev + 1e-8);
            prev = v;
        }
    }

    #[test]
    fn likelihood_gradient_matches_differences() {
        let obs = obs_with(circuits(2, 4, 8, 7), |i| (i as f64).sqrt());
        let x: Vec<f64> = obs.default_hyperparams().to_log(NOISE_FLOOR).iter().map(|v| v + 0.3).collect();
        let (_, g) = nll_and_grad(&obs, &x, NOISE_FLOOR, true).unwrap();
        let f = |x: &[f64]| nll_and_grad(&obs, x, NOISE_FLOOR, false).unwrap().0;
        let fd = crate::optim::central_difference(&f, &x, 1e-6);
        for (a, b) in g.iter().zip(fd) {
            assert!((a - b).abs() < 1e-5 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn fit_improves_likelihood() {
        let obs = obs_with(circuits(2, 4, 12, 8), |i| (i as f64 * 1.3).sin());
        let init = obs.default_hyperparams();
        let fit = fit_hyperparams(&obs).unwrap();
        assert!(log_marginal_likelihood(&obs, &fit).unwrap() >= log_marginal_likelihood(&obs, &init).unwrap() - 1e-9);
    }

    #[test]
    fn recovers_sampled_hyperparameters() {
        let cs = circuits(2, 5, 30, 9);
        let obs0 = obs_with(cs.clone(), |_| 0.0);
        let truth = KernelHyperparams {
            alpha: 1.0,
            alpha_bar: 0.5,
            beta: [0.3, 0.2, 0.1, 0.1],
            beta_bar: [5.0, 5.0, 3.0, 2.0],
            noise: 1e-3,
        };
        let kx = training_kernel(&obs0, &truth);
        let l = Cholesky::new(kx).unwrap().unpack();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let z = DVector::from_fn(30, |_, _| StandardNormal.sample(&mut rng));
        let y = l * z;
        let obs = ObservationSet::from_data(table(2), cs, y.iter().copied().collect()).unwrap();
        let fit = fit_hyperparams(&obs).unwrap();
        let lt = log_marginal_likelihood(&obs, &truth).unwrap();
        let lf = log_marginal_likelihood(&obs, &fit).unwrap();
        assert!(lf >= lt - 1.0, "fitted {lf} vs truth {lt}");
    }

    #[test]
    fn duplicates_identify_noise() {
        let base = circuits(2, 4, 5, 11);
        let cs: Vec<Circuit> = base.iter().chain(base.iter()).cloned().collect();
        let obs = obs_with(cs, |i| (i % 5) as f64 + if i < 5 { 0.3 } else { -0.3 });
        let fit = fit_hyperparams(&obs).unwrap();
        assert!(fit.noise > 1e-3, "{}", fit.noise);
    }

    #[test]
    fn constant_targets_take_default_path() {
        let obs = obs_with(circuits(2, 4, 5, 12), |_| 0.4);
        let fit = fit_hyperparams(&obs).unwrap();
        assert_eq!(fit.noise, NOISE_FLOOR);
        assert_eq!(fit.alpha, 0.0);
        let p = gp_posterior(&obs, &circuits(2, 4, 2, 13), &fit).unwrap();
        assert!(p.mean.iter().all(|m| (m - 0.4).abs() < 1e-12));
    }

    #[test]
    fn ei_values() {
        assert_eq!(ei_closed_form(1.0, 0.0, 1.0), 0.0);
        assert_eq!(ei_closed_form(2.0, 0.0, 1.0), 1.0);
        assert!((ei_closed_form(0.0, 1.0, 0.0) - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ei_matches_monte_carlo() {
        let (mu, sd, best) = (0.3, 0.8, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let n = 200_000;
        let draws: Vec<f64> = (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                (mu + sd * z - best).max(0.0)
            })
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((ei_closed_form(mu, sd * sd, best) - mean).abs() < 3.0 * se);
    }

    proptest! {
        #[test]
        fn ei_bounds(mu in -3.0f64..3.0, var in 0.0f64..4.0, best in -3.0f64..3.0, step in 0.0f64..1.0) {
            let e = ei_closed_form(mu, var, best);
            prop_assert!(e >= 0.0);
            prop_assert!(e >= (mu - best).max(0.0) - 1e-12);
            prop_assert!(ei_closed_form(mu, var, best + step) <= e + 1e-12);
        }
    }
}
