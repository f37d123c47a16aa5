//! Numerical optimizers: L-BFGS (via `argmin`) with multi-start and
//! finite-difference gradients, and Adam.

use argmin::core::{CostFunction, Error as ArgminError, Executor, Gradient, State};
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::quasinewton::LBFGS;
use std::sync::Mutex;

use rand::Rng;
use serde::{Deserialize, Serialize};

struct Problem<'a> {
    f: &'a (dyn Fn(&[f64]) -> f64 + Sync),
    g: &'a (dyn Fn(&[f64]) -> Vec<f64> + Sync),
    best: &'a Mutex<(Vec<f64>, f64)>,
}

impl CostFunction for Problem<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> Result<f64, ArgminError> {
        let v = (self.f)(p);
        if v.is_finite() {
            let mut best = self.best.lock().expect("lock");
            if v < best.1 {
                *best = (p.clone(), v);
            }
            Ok(v)
        } else {
            Err(ArgminError::msg("non-finite loss"))
        }
    }
}

impl Gradient for Problem<'_> {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, p: &Vec<f64>) -> Result<Vec<f64>, ArgminError> {
        Ok((self.g)(p))
    }
}

/// Local L-BFGS minimization from `x0`. Failures end the run and return the
/// best point evaluated so far.
pub fn lbfgs(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    g: &(dyn Fn(&[f64]) -> Vec<f64> + Sync),
    x0: Vec<f64>,
    max_iters: u64,
) -> (Vec<f64>, f64) {
    let f0 = f(&x0);
    if x0.is_empty() {
        return (x0, f0);
    }
    let solver = LBFGS::new(MoreThuenteLineSearch::new(), 7)
        .with_tolerance_grad(1e-9)
        .and_then(|s| s.with_tolerance_cost(1e-13))
        .expect("valid tolerances");
    let start = if f0.is_finite() { f0 } else { f64::INFINITY };
    let best = Mutex::new((x0.clone(), start));
    let run =
        Executor::new(Problem { f, g, best: &best }, solver).configure(|s| s.param(x0).max_iters(max_iters)).run();
    let from_run = run.ok().and_then(|res| {
        let state = res.state();
        state.get_best_param().map(|p| (p.clone(), state.get_best_cost()))
    });
    let tracked = best.into_inner().expect("lock");
    match from_run {
        Some(r) if r.1 <= tracked.1 => r,
        _ => tracked,
    }
}

/// Central differences with step `h`.
pub fn central_difference(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|i| {
            p[i] = x[i] + h;
            let up = f(&p);
            p[i] = x[i] - h;
            let down = f(&p);
            p[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub restarts: usize,
    /// Starting points are uniform in `[-init_range, init_range]`.
    pub init_range: f64,
    pub fd_step: f64,
    pub max_iters: u64,
    /// Box `[-bound, bound]` on every parameter.
    pub bound: f64,
    /// When set, the loss is periodic with this period in every coordinate
    /// and results are wrapped into the box instead of clamped.
    pub period: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            restarts: 3,
            init_range: std::f64::consts::PI,
            fd_step: 1e-5,
            max_iters: 200,
            bound: 2.0 * std::f64::consts::PI,
            period: Some(4.0 * std::f64::consts::PI),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainResult {
    pub params: Vec<f64>,
    /// Loss at `params` (lower is better).
    pub value: f64,
    /// Best loss after each restart.
    pub trace: Vec<f64>,
}

fn into_box(x: &mut [f64], cfg: &TrainConfig) {
    for v in x.iter_mut() {
        match cfg.period {
            Some(p) if v.abs() > cfg.bound => {
                *v = (*v + p / 2.0).rem_euclid(p) - p / 2.0;
                *v = v.clamp(-cfg.bound, cfg.bound);
            }
            _ => *v = v.clamp(-cfg.bound, cfg.bound),
        }
    }
}

/// Multi-start L-BFGS on `loss` with finite-difference gradients.
pub fn minimize_multistart<R: Rng + ?Sized>(
    loss: &(dyn Fn(&[f64]) -> f64 + Sync),
    dim: usize,
    cfg: &TrainConfig,
    rng: &mut R,
) -> TrainResult {
    if dim == 0 {
        let v = loss(&[]);
        return TrainResult { params: vec![], value: v, trace: vec![v] };
    }
    let grad = |x: &[f64]| central_difference(loss, x, cfg.fd_step);
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut trace = Vec::new();
    for _ in 0..cfg.restarts.max(1) {
        let x0: Vec<f64> = (0..dim).map(|_| rng.gen_range(-cfg.init_range..=cfg.init_range)).collect();
        let (mut x, _) = lbfgs(loss, &grad, x0, cfg.max_iters);
        into_box(&mut x, cfg);
        let v = loss(&x);
        if !v.is_finite() {
            continue;
        }
        if best.as_ref().map_or(true, |b| v < b.1) {
            best = Some((x, v));
        }
        trace.push(best.as_ref().unwrap().1);
    }
    match best {
        Some((params, value)) => TrainResult { params, value, trace },
        None => TrainResult { params: vec![0.0; dim], value: f64::INFINITY, trace },
    }
}

/// Adam with the usual defaults `β₁ = 0.9`, `β₂ = 0.999`, `ε = 1e-8`.
#[derive(Clone, Debug)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(dim: usize, lr: f64) -> Self {
        Adam { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, m: vec![0.0; dim], v: vec![0.0; dim], t: 0 }
    }

    /// One descent step on `x` given the gradient.
    pub fn step(&mut self, x: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let b1t = 1.0 - self.beta1.powi(self.t);
        let b2t = 1.0 - self.beta2.powi(self.t);
        for i in 0..x.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            x[i] -= self.lr * (self.m[i] / b1t) / ((self.v[i] / b2t).sqrt() + self.eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quadratic() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2);
        let cfg = TrainConfig { period: None, ..TrainConfig::default() };
        let r = minimize_multistart(&f, 1, &cfg, &mut ChaCha8Rng::seed_from_u64(0));
        assert!((r.params[0] - 1.0).abs() < 1e-5);
        assert!((f(&r.params) - r.value).abs() < 1e-15);
    }

    #[test]
    fn rosenbrock_with_analytic_gradient() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let g =
            |x: &[f64]| vec![-2.0 * (1.0 - x[0]) - 400.0 * x[0] * (x[1] - x[0] * x[0]), 200.0 * (x[1] - x[0] * x[0])];
        let (x, v) = lbfgs(&f, &g, vec![-1.2, 1.0], 500);
        assert!(v < 1e-10 && (x[0] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn central_difference_matches_derivative() {
        let f = |x: &[f64]| x[0].sin() * x[1].exp();
        let g = central_difference(&f, &[0.3, -0.2], 1e-5);
        assert!((g[0] - 0.3f64.cos() * (-0.2f64).exp()).abs() < 1e-9);
        assert!((g[1] - 0.3f64.sin() * (-0.2f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn periodic_results_land_in_the_box() {
        let f = |x: &[f64]| (x[0] / 2.0 - 7.0 * std::f64::consts::PI / 2.0).cos();
        let r = minimize_multistart(&f, 1, &TrainConfig::default(), &mut ChaCha8Rng::seed_from_u64(3));
        assert!(r.params[0].abs() <= 2.0 * std::f64::consts::PI);
        assert!((r.value + 1.0).abs() < 1e-8);
    }

    #[test]
    fn adam_descends() {
        let mut x = vec![3.0, -2.0];
        let mut opt = Adam::new(2, 0.05);
        for _ in 0..2000 {
            let g = vec![2.0 * x[0], 8.0 * x[1]];
            opt.step(&mut x, &g);
        }
        assert!(x[0].abs() < 1e-3 && x[1].abs() < 1e-3);
    }
}
