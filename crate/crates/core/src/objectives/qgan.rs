//! Quantum generator against a small classical discriminator, scored by the
//! relative entropy of the generated distribution to the target.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::circuit::Circuit;
use crate::error::{QnasError, Result};
use crate::optim::{central_difference, Adam};

use super::maxcut::output_probabilities;

pub const N_BINS: usize = 8;

/// Even mixture of `N(0.5, 1)` and `N(3.5, 0.5²)`, integrated over
/// `[k - 0.5, k + 0.5)` for `k = 0..8` and renormalized.
pub fn target_distribution() -> [f64; N_BINS] {
    let a = Normal::new(0.5, 1.0).expect("valid");
    let b = Normal::new(3.5, 0.5).expect("valid");
    let mass = |lo: f64, hi: f64| 0.5 * (a.cdf(hi) - a.cdf(lo)) + 0.5 * (b.cdf(hi) - b.cdf(lo));
    let mut q = [0.0; N_BINS];
    for (k, v) in q.iter_mut().enumerate() {
        *v = mass(k as f64 - 0.5, k as f64 + 0.5);
    }
    let total: f64 = q.iter().sum();
    q.iter_mut().for_each(|v| *v /= total);
    q
}

/// `Σ P log(P/Q)`; bins with `P = 0` contribute nothing.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).filter(|(pi, _)| **pi > 0.0).map(|(pi, qi)| pi * (pi / qi).ln()).sum::<f64>().max(0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QganSettings {
    pub epochs: usize,
    pub batch: usize,
    /// Real samples per epoch.
    pub n_real: usize,
    pub lr: f64,
    /// Generator parameters start uniform in `(-init, init)`.
    pub init: f64,
    pub hidden: [usize; 2],
    pub leak: f64,
    pub fd_step: f64,
}

impl Default for QganSettings {
    fn default() -> Self {
        QganSettings {
            epochs: 200,
            batch: 100,
            n_real: 1000,
            lr: 1e-3,
            init: 0.1,
            hidden: [50, 20],
            leak: 0.2,
            fd_step: 1e-5,
        }
    }
}

/// Feed-forward classifier `1 → h1 → h2 → 1` with leaky-ReLU hidden layers
/// and a sigmoid output.
#[derive(Clone, Debug)]
pub struct Discriminator {
    sizes: [usize; 4],
    params: Vec<f64>,
    leak: f64,
}

struct Trace {
    acts: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
}

impl Discriminator {
    pub fn new<R: Rng + ?Sized>(hidden: [usize; 2], leak: f64, rng: &mut R) -> Self {
        let sizes = [1, hidden[0], hidden[1], 1];
        let mut params = Vec::new();
        for l in 0..3 {
            let bound = (6.0 / (sizes[l] + sizes[l + 1]) as f64).sqrt();
            params.extend((0..sizes[l] * sizes[l + 1]).map(|_| rng.gen_range(-bound..bound)));
            params.extend(std::iter::repeat(0.0).take(sizes[l + 1]));
        }
        Discriminator { sizes, params, leak }
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    fn offsets(&self, l: usize) -> (usize, usize) {
        let mut o = 0;
        for k in 0..l {
            o += self.sizes[k] * self.sizes[k + 1] + self.sizes[k + 1];
        }
        (o, o + self.sizes[l] * self.sizes[l + 1])
    }

    fn run(&self, x: f64) -> (f64, Trace) {
        let mut a = vec![x];
        let mut trace = Trace { acts: vec![a.clone()], pre: vec![] };
        for l in 0..3 {
            let (w, b) = self.offsets(l);
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let z: Vec<f64> = (0..n_out)
                .map(|o| self.params[b + o] + (0..n_in).map(|i| self.params[w + o * n_in + i] * a[i]).sum::<f64>())
                .collect();
            a = if l < 2 { z.iter().map(|&v| if v > 0.0 { v } else { self.leak * v }).collect() } else { z.clone() };
            trace.pre.push(z);
            trace.acts.push(a.clone());
        }
        (a[0], trace)
    }

    /// Output logit.
    pub fn logit(&self, x: f64) -> f64 {
        self.run(x).0
    }

    /// `D(x) ∈ (0, 1)`.
    pub fn prob(&self, x: f64) -> f64 {
        sigmoid(self.logit(x))
    }

    /// Gradient of `Σ_i c_i · logit(x_i)` with respect to the parameters.
    fn logit_gradient(&self, xs: &[f64], coeff: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.params.len()];
        for (&x, &cf) in xs.iter().zip(coeff) {
            let (_, tr) = self.run(x);
            let mut delta = vec![cf];
            for l in (0..3).rev() {
                let (w, b) = self.offsets(l);
                let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
                let a_in = &tr.acts[l];
                for o in 0..n_out {
                    g[b + o] += delta[o];
                    for i in 0..n_in {
                        g[w + o * n_in + i] += delta[o] * a_in[i];
                    }
                }
                if l > 0 {
                    let z_in = &tr.pre[l - 1];
                    delta = (0..n_in)
                        .map(|i| {
                            let s: f64 = (0..n_out).map(|o| self.params[w + o * n_in + i] * delta[o]).sum();
                            s * if z_in[i] > 0.0 { 1.0 } else { self.leak }
                        })
                        .collect();
                }
            }
        }
        g
    }

    /// Gradient of the binary cross-entropy `-mean[y log D + (1-y) log(1-D)]`.
    pub fn bce_gradient(&self, xs: &[f64], labels: &[f64]) -> Vec<f64> {
        let m = xs.len() as f64;
        let coeff: Vec<f64> = xs.iter().zip(labels).map(|(&x, &y)| (self.prob(x) - y) / m).collect();
        self.logit_gradient(xs, &coeff)
    }

    pub fn bce(&self, xs: &[f64], labels: &[f64]) -> f64 {
        let m = xs.len() as f64;
        xs.iter()
            .zip(labels)
            .map(|(&x, &y)| {
                let z = self.logit(x);
                // log(1 + e^{-z}) and log(1 + e^{z}) without overflow
                let sp = |t: f64| {
                    if t > 0.0 {
                        t + (-t).exp().ln_1p()
                    } else {
                        t.exp().ln_1p()
                    }
                };
                y * sp(-z) + (1.0 - y) * sp(z)
            })
            .sum::<f64>()
            / m
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Bin `k` is fed to the discriminator as `k / 7`.
fn scale(bin: usize) -> f64 {
    bin as f64 / (N_BINS - 1) as f64
}

/// Generated distribution `P_θ(x) = |⟨x|U(θ)|0⟩|²`.
pub fn generator_distribution(circuit: &Circuit, params: &[f64]) -> Result<Vec<f64>> {
    if circuit.n_qubits() != 3 {
        return Err(QnasError::DimensionMismatch { expected: 3, got: circuit.n_qubits() });
    }
    output_probabilities(circuit, params)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QganResult {
    pub params: Vec<f64>,
    /// `D_KL(P_θ ‖ Q)` of the final generator.
    pub kl: f64,
    /// `D_KL` after each epoch.
    pub history: Vec<f64>,
}

/// Adversarial training with Adam on both players.
pub fn train_qgan<R: Rng + ?Sized>(circuit: &Circuit, s: &QganSettings, rng: &mut R) -> Result<QganResult> {
    let q = target_distribution();
    let n_params = circuit.param_count();
    let mut theta: Vec<f64> = (0..n_params).map(|_| rng.gen_range(-s.init..s.init)).collect();
    generator_distribution(circuit, &theta)?;
    let mut disc = Discriminator::new(s.hidden, s.leak, rng);
    let mut opt_d = Adam::new(disc.n_params(), s.lr);
    let mut opt_g = Adam::new(n_params, s.lr);
    let real_dist = WeightedIndex::new(q).expect("positive target");
    let mut history = Vec::with_capacity(s.epochs);
    for _ in 0..s.epochs {
        let real: Vec<usize> = (0..s.n_real).map(|_| real_dist.sample(rng)).collect();
        for chunk in real.chunks(s.batch.max(1)) {
            let p = generator_distribution(circuit, &theta)?;
            let fake_dist =
                WeightedIndex::new(p.iter().map(|v| v.max(0.0))).map_err(|e| QnasError::Objective(e.to_string()))?;
            let fake: Vec<usize> = (0..chunk.len()).map(|_| fake_dist.sample(rng)).collect();
            // discriminator: ascend L_D = mean log D(x) + mean log(1 - D(g))
            let xs: Vec<f64> = chunk.iter().chain(&fake).map(|&b| scale(b)).collect();
            let labels: Vec<f64> =
                std::iter::repeat(1.0).take(chunk.len()).chain(std::iter::repeat(0.0).take(fake.len())).collect();
            let gd = disc.bce_gradient(&xs, &labels);
            opt_d.step(disc.params_mut(), &gd);
            // generator: ascend E_{g ~ P_θ}[log D(g)]
            let log_d: Vec<f64> = (0..N_BINS).map(|b| disc.prob(scale(b)).max(1e-300).ln()).collect();
            let loss = |t: &[f64]| -> f64 {
                match generator_distribution(circuit, t) {
                    Ok(p) => -p.iter().zip(&log_d).map(|(a, b)| a * b).sum::<f64>(),
                    Err(_) => f64::NAN,
                }
            };
            if n_params > 0 {
                let gg = central_difference(&loss, &theta, s.fd_step);
                opt_g.step(&mut theta, &gg);
            }
        }
        history.push(kl_divergence(&generator_distribution(circuit, &theta)?, &q));
    }
    let kl = kl_divergence(&generator_distribution(circuit, &theta)?, &q);
    Ok(QganResult { params: theta, kl, history })
}

pub fn qgan_objective(circuit: &Circuit, s: &QganSettings, seed: u64) -> Result<f64> {
    Ok(train_qgan(circuit, s, &mut ChaCha8Rng::seed_from_u64(seed))?.kl)
}
