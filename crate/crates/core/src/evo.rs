//! Evolutionary maximization of an acquisition function over circuits.

use std::collections::HashMap;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{catalog_for, random_wires, Circuit, Gate};
use crate::error::{QnasError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvoConfig {
    pub c_tau: f64,
    pub c_k: f64,
    pub c_off: f64,
    /// Probability of 1, 2, 3 or 4 changes per mutation.
    pub change_probs: [f64; 4],
    /// Probability that a change replaces the gate type rather than its wires.
    pub type_change_prob: f64,
    pub seed: u64,
}

impl Default for EvoConfig {
    fn default() -> Self {
        EvoConfig {
            c_tau: 5.0,
            c_k: 4.0,
            c_off: 4.0,
            change_probs: [0.4, 0.3, 0.2, 0.1],
            type_change_prob: 0.5,
            seed: 0xe70,
        }
    }
}

impl EvoConfig {
    pub fn validate(&self) -> Result<()> {
        let s: f64 = self.change_probs.iter().sum();
        if (s - 1.0).abs() > 1e-9 || self.change_probs.iter().any(|p| *p < 0.0) {
            return Err(QnasError::Configuration(format!(
                "change probabilities {:?} do not sum to 1",
                self.change_probs
            )));
        }
        if !(self.c_tau > 0.0 && self.c_k > 0.0 && self.c_off > 0.0) {
            return Err(QnasError::Configuration("evolution constants must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.type_change_prob) {
            return Err(QnasError::Configuration("type change probability outside [0, 1]".into()));
        }
        Ok(())
    }

    /// `τ(t) = ⌈c_τ √t⌉`.
    pub fn generations(&self, t: usize) -> usize {
        ((self.c_tau * (t.max(1) as f64).sqrt()).ceil() as usize).max(1)
    }

    /// `k(t) = ⌈c_k √τ⌉`.
    pub fn pool_size(&self, t: usize) -> usize {
        ((self.c_k * (self.generations(t) as f64).sqrt()).ceil() as usize).max(1)
    }

    /// `N_off(t) = ⌈c_off √τ⌉`.
    pub fn offspring(&self, t: usize) -> usize {
        ((self.c_off * (self.generations(t) as f64).sqrt()).ceil() as usize).max(1)
    }
}

fn redraw_type<R: Rng + ?Sized>(gate: &Gate, n: usize, rng: &mut R) -> Gate {
    let options: Vec<_> = catalog_for(n).iter().copied().filter(|t| *t != gate.gate_type).collect();
    let t = options[rng.gen_range(0..options.len())];
    let w = gate.wires();
    match (w.len(), t.arity()) {
        (a, b) if a == b => Gate::new(t, w).expect("same wires"),
        (_, 1) => Gate::single(t, w[0]),
        _ => {
            let mut second = rng.gen_range(0..n - 1);
            if second >= w[0] {
                second += 1;
            }
            Gate::pair(t, w[0], second)
        }
    }
}

fn redraw_wires<R: Rng + ?Sized>(gate: &Gate, n: usize, rng: &mut R) -> Gate {
    loop {
        let g = random_wires(gate.gate_type, n, rng);
        if g != *gate {
            return g;
        }
    }
}

/// Mutant with the number of changed gates.
pub fn mutate_counted<R: Rng + ?Sized>(circuit: &Circuit, rng: &mut R, cfg: &EvoConfig) -> (Circuit, usize) {
    let len = circuit.len();
    if len == 0 {
        return (circuit.clone(), 0);
    }
    let n = circuit.n_qubits();
    let dist = WeightedIndex::new(cfg.change_probs).expect("validated probabilities");
    let count = (dist.sample(rng) + 1).min(len);
    let positions = rand::seq::index::sample(rng, len, count);
    let mut out = circuit.clone();
    for pos in positions.iter() {
        let g = circuit.gates()[pos];
        let wires_fixed = n == 1;
        let new = if rng.gen::<f64>() < cfg.type_change_prob || wires_fixed {
            redraw_type(&g, n, rng)
        } else {
            redraw_wires(&g, n, rng)
        };
        out.set_gate(pos, new).expect("mutated gate fits the circuit");
    }
    (out, count)
}

/// Replaces the types or wires of 1 to 4 distinct gates. Every change alters
/// its gate; gate and qubit counts are kept.
pub fn mutate<R: Rng + ?Sized>(circuit: &Circuit, rng: &mut R, cfg: &EvoConfig) -> Circuit {
    mutate_counted(circuit, rng, cfg).0
}

#[derive(Clone, Debug)]
pub struct EvoResult {
    pub best: Circuit,
    pub best_value: f64,
    /// Best acquisition value in the pool after each generation.
    pub pool_best: Vec<f64>,
    /// Distinct circuits evaluated.
    pub evaluations: usize,
}

fn softmax_sample<R: Rng + ?Sized>(values: &[f64], count: usize, rng: &mut R) -> Vec<usize> {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n.max(1) as f64;
    let std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n.max(1) as f64).sqrt();
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut weights: Vec<f64> = values.iter().map(|v| if std > 0.0 { ((v - max) / std).exp() } else { 1.0 }).collect();
    let mut picked = Vec::new();
    for _ in 0..count.min(n) {
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            break;
        }
        let mut r = rng.gen::<f64>() * total;
        let mut idx = weights.iter().rposition(|w| *w > 0.0).expect("positive weight");
        for (i, w) in weights.iter().enumerate() {
            if *w > 0.0 && r < *w {
                idx = i;
                break;
            }
            r -= w;
        }
        picked.push(idx);
        weights[idx] = 0.0;
    }
    picked
}

/// Evolves `seed_pool` for `τ(t)` generations and returns the best circuit
/// seen. Candidates whose acquisition fails are dropped.
pub fn evolve<F>(seed_pool: &[Circuit], acq: F, t: usize, cfg: &EvoConfig) -> Result<EvoResult>
where
    F: Fn(&Circuit) -> Result<f64> + Sync,
{
    cfg.validate()?;
    if seed_pool.is_empty() {
        return Err(QnasError::InvalidArgument("empty seed pool".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (t as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut cache: HashMap<Circuit, Option<f64>> = HashMap::new();
    let evaluate = |batch: Vec<Circuit>, cache: &mut HashMap<Circuit, Option<f64>>| {
        let mut fresh: Vec<Circuit> = Vec::new();
        for c in batch {
            if !cache.contains_key(&c) && !fresh.contains(&c) {
                fresh.push(c);
            }
        }
        let vals: Vec<Option<f64>> = fresh
            .par_iter()
            .map(|c| match acq(c) {
                Ok(v) if v.is_finite() => Some(v),
                Ok(v) => {
                    log::warn!("acquisition returned {v} for {c}; dropped");
                    None
                }
                Err(e) => {
                    log::warn!("acquisition failed for {c}: {e}; dropped");
                    None
                }
            })
            .collect();
        for (c, v) in fresh.into_iter().zip(vals) {
            cache.insert(c, v);
        }
    };

    let k = cfg.pool_size(t);
    let n_off = cfg.offspring(t);
    evaluate(seed_pool.to_vec(), &mut cache);
    let mut pool: Vec<(Circuit, f64)> = Vec::new();
    for c in seed_pool {
        if let Some(Some(v)) = cache.get(c) {
            if !pool.iter().any(|(p, _)| p == c) {
                pool.push((c.clone(), *v));
            }
        }
    }
    if pool.is_empty() {
        return Err(QnasError::InvalidArgument("acquisition failed on every seed circuit".into()));
    }
    pool.sort_by(|a, b| b.1.total_cmp(&a.1));
    pool.truncate(k);
    let mut best = pool[0].clone();
    let mut pool_best = Vec::new();

    for _ in 0..cfg.generations(t) {
        let mut children = Vec::with_capacity(pool.len() * n_off);
        for (c, _) in &pool {
            for _ in 0..n_off {
                children.push(mutate(c, &mut rng, cfg));
            }
        }
        evaluate(children.clone(), &mut cache);
        let mut cands: Vec<(Circuit, f64)> = pool.clone();
        for c in children {
            if let Some(Some(v)) = cache.get(&c) {
                if !cands.iter().any(|(p, _)| *p == c) {
                    cands.push((c, *v));
                }
            }
        }
        cands.sort_by(|a, b| b.1.total_cmp(&a.1));
        let elite = k.div_ceil(2).min(cands.len());
        let rest = cands.split_off(elite);
        let values: Vec<f64> = rest.iter().map(|r| r.1).collect();
        let picks = softmax_sample(&values, k - elite, &mut rng);
        pool = cands;
        pool.extend(picks.into_iter().map(|i| rest[i].clone()));
        if pool[0].1 > best.1 {
            best = pool[0].clone();
        }
        pool_best.push(pool[0].1);
    }
    Ok(EvoResult { best: best.0, best_value: best.1, pool_best, evaluations: cache.len() })
}
