//! The search loop: random initial circuits, then rounds of surrogate fit,
//! evolutionary acquisition and objective evaluation.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{random_circuit, Circuit};
use crate::circuit_metric::CircuitFeatures;
use crate::error::{QnasError, Result};
use crate::evo::{evolve, EvoConfig};
use crate::gate_metric::GateDistanceTable;
use crate::gp::{
    ei_closed_form, fit_hyperparams_with, FitConfig, GpModel, JitterReport, KernelHyperparams, ObservationSet,
    MIN_FIT_OBSERVATIONS, NU_SET,
};
use crate::objectives::{ObjectiveKind, ObjectiveSpec};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    #[default]
    Ei,
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub objective: ObjectiveSpec,
    #[serde(default = "default_init")]
    pub init_samples: usize,
    /// Evaluations after the initial ones.
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default)]
    pub evo: EvoConfig,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default = "default_nu")]
    pub nu_set: [f64; 4],
    #[serde(default)]
    pub mode: SearchMode,
    /// Seed of the first trial; trial `i` uses `seed + i`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Failed evaluations tolerated per trial.
    #[serde(default = "default_failures")]
    pub max_failures: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_init() -> usize {
    5
}
fn default_iterations() -> usize {
    30
}
fn default_nu() -> [f64; 4] {
    NU_SET
}
fn default_trials() -> usize {
    1
}
fn default_failures() -> usize {
    50
}

impl ExperimentConfig {
    /// Budgets of 30/30/20 iterations and 6/6/3 trials for QFT/MaxCut/QGAN.
    pub fn preset(kind: ObjectiveKind) -> Self {
        let (iterations, trials) = match kind {
            ObjectiveKind::Qft => (30, 6),
            ObjectiveKind::MaxCut => (30, 6),
            ObjectiveKind::Qgan => (20, 3),
        };
        ExperimentConfig {
            objective: ObjectiveSpec::preset(kind),
            init_samples: 5,
            iterations,
            evo: EvoConfig::default(),
            fit: FitConfig::default(),
            nu_set: NU_SET,
            mode: SearchMode::Ei,
            seed: 0,
            trials,
            max_failures: 50,
            output_dir: None,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.init_samples == 0 {
            return Err(QnasError::Configuration("init_samples must be at least 1".into()));
        }
        if self.mode == SearchMode::Ei && self.init_samples < MIN_FIT_OBSERVATIONS {
            return Err(QnasError::Configuration(format!(
                "init_samples must be at least {MIN_FIT_OBSERVATIONS} for the surrogate fit"
            )));
        }
        if self.objective.n_qubits == 0 || self.objective.n_gates == 0 {
            return Err(QnasError::Configuration("empty search space".into()));
        }
        if self.nu_set.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(QnasError::Configuration("nu values must be non-negative".into()));
        }
        if self.trials == 0 {
            return Err(QnasError::Configuration("at least one trial".into()));
        }
        self.evo.validate()
    }

    pub fn budget(&self) -> usize {
        self.init_samples + self.iterations
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Init,
    Acquisition,
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iteration: usize,
    pub phase: Phase,
    pub circuit: Circuit,
    /// Raw objective value.
    pub value: f64,
    pub best_so_far: f64,
    pub ei: Option<f64>,
    pub seconds: f64,
    pub hyperparams: Option<KernelHyperparams>,
    pub jitter: Option<JitterReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub iteration: usize,
    pub circuit: Circuit,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub records: Vec<IterRecord>,
    pub failures: Vec<FailureRecord>,
    pub best: Circuit,
    pub best_value: f64,
}

/// One CSV row; nested values are stored as JSON text.
#[derive(Serialize, Deserialize)]
struct CsvRow {
    iteration: usize,
    phase: Phase,
    value: f64,
    best_so_far: f64,
    ei: Option<f64>,
    seconds: f64,
    jitter_min_eig: Option<f64>,
    jitter_threshold: Option<f64>,
    jitter_added: Option<f64>,
    jitter_flagged: Option<bool>,
    circuit: String,
    hyperparams: Option<String>,
}

impl RunLog {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Best-so-far values in evaluation order.
    pub fn best_trace(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.best_so_far).collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.records {
            out.serialize(CsvRow {
                iteration: r.iteration,
                phase: r.phase,
                value: r.value,
                best_so_far: r.best_so_far,
                ei: r.ei,
                seconds: r.seconds,
                jitter_min_eig: r.jitter.as_ref().map(|j| j.min_eig),
                jitter_threshold: r.jitter.as_ref().map(|j| j.threshold),
                jitter_added: r.jitter.as_ref().map(|j| j.added),
                jitter_flagged: r.jitter.as_ref().map(|j| j.flagged),
                circuit: r.circuit.to_json(),
                hyperparams: r.hyperparams.as_ref().map(serde_json::to_string).transpose()?,
            })?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Vec<IterRecord>> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut records = Vec::new();
        for row in rdr.deserialize() {
            let row: CsvRow = row?;
            let jitter = match (row.jitter_min_eig, row.jitter_threshold, row.jitter_added, row.jitter_flagged) {
                (Some(min_eig), Some(threshold), Some(added), Some(flagged)) => {
                    Some(JitterReport { min_eig, threshold, added, flagged })
                }
                _ => None,
            };
            records.push(IterRecord {
                iteration: row.iteration,
                phase: row.phase,
                circuit: Circuit::from_json(&row.circuit)?,
                value: row.value,
                best_so_far: row.best_so_far,
                ei: row.ei,
                seconds: row.seconds,
                hyperparams: row.hyperparams.as_deref().map(serde_json::from_str).transpose()?,
                jitter,
            });
        }
        Ok(records)
    }

    /// Writes `<stem>.json` and `<stem>.csv` under `dir`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{stem}.json")), self.to_json()?)?;
        self.write_csv(std::fs::File::create(dir.join(format!("{stem}.csv")))?)
    }
}

/// Runs one trial with the configured objective and `cfg.seed`.
pub fn run_search(cfg: &ExperimentConfig) -> Result<RunLog> {
    run_trial(cfg, cfg.seed)
}

/// Runs trials `cfg.seed .. cfg.seed + cfg.trials` in parallel.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<Vec<RunLog>> {
    (0..cfg.trials as u64).into_par_iter().map(|i| run_trial(cfg, cfg.seed.wrapping_add(i))).collect()
}

pub fn run_trial(cfg: &ExperimentConfig, seed: u64) -> Result<RunLog> {
    cfg.validate()?;
    let spec = ObjectiveSpec { seed: cfg.objective.seed.wrapping_add(seed), ..cfg.objective.clone() };
    let objective = spec.build()?;
    run_with_objective(cfg, seed, |c| objective.evaluate(c))
}

/// The search loop against an arbitrary objective. Values are raw; the
/// orientation comes from `cfg.objective`.
pub fn run_with_objective<F>(cfg: &ExperimentConfig, seed: u64, objective: F) -> Result<RunLog>
where
    F: Fn(&Circuit) -> Result<f64>,
{
    cfg.validate()?;
    let spec = &cfg.objective;
    let (n, n_gates) = (spec.n_qubits, spec.n_gates);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut obs = match cfg.mode {
        SearchMode::Ei => Some(ObservationSet::with_nu(Arc::new(GateDistanceTable::for_qubits(n)?), cfg.nu_set)),
        SearchMode::Random => None,
    };
    let evo_cfg = EvoConfig { seed: cfg.evo.seed ^ seed, ..cfg.evo.clone() };
    let mut seen: HashSet<Circuit> = HashSet::new();
    let mut records: Vec<IterRecord> = Vec::new();
    let mut failures: Vec<FailureRecord> = Vec::new();
    let mut best: Option<(Circuit, f64)> = None;

    while records.len() < cfg.budget() {
        let iteration = records.len();
        let start = Instant::now();
        let acquire = iteration >= cfg.init_samples && cfg.mode == SearchMode::Ei;
        let mut proposal = None;
        if acquire {
            let obs = obs.as_ref().expect("EI mode keeps observations");
            let t = iteration - cfg.init_samples + 1;
            proposal = Some(propose(obs, &seen, t, &cfg.fit, &evo_cfg)?);
        }
        let (circuit, ei, hp, jitter, phase) = match proposal {
            Some(Proposal { circuit: Some(c), ei, hp, jitter }) => {
                (c, Some(ei), Some(hp), Some(jitter), Phase::Acquisition)
            }
            Some(Proposal { circuit: None, hp, jitter, .. }) => {
                (fresh_random(n, n_gates, &seen, &mut rng)?, None, Some(hp), Some(jitter), Phase::Random)
            }
            None => {
                let phase = if iteration < cfg.init_samples { Phase::Init } else { Phase::Random };
                (fresh_random(n, n_gates, &seen, &mut rng)?, None, None, None, phase)
            }
        };
        seen.insert(circuit.clone());
        let value = match objective(&circuit).and_then(|v| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(QnasError::Objective(format!("non-finite value {v}")))
            }
        }) {
            Ok(v) => v,
            Err(e) => {
                log::warn!("evaluation {iteration} failed: {e}");
                failures.push(FailureRecord { iteration, circuit, error: e.to_string() });
                if failures.len() > cfg.max_failures {
                    return Err(QnasError::Objective(format!("{} failed evaluations", failures.len())));
                }
                continue;
            }
        };
        if let Some(obs) = obs.as_mut() {
            obs.push(circuit.clone(), spec.score(value))?;
        }
        if best.as_ref().map_or(true, |(_, b)| spec.score(value) > spec.score(*b)) {
            best = Some((circuit.clone(), value));
        }
        let best_so_far = best.as_ref().expect("set above").1;
        log::info!("seed {seed} eval {iteration} {phase:?}: value {value:.6}, best {best_so_far:.6}");
        records.push(IterRecord {
            iteration,
            phase,
            circuit,
            value,
            best_so_far,
            ei,
            seconds: start.elapsed().as_secs_f64(),
            hyperparams: hp,
            jitter,
        });
    }
    let (best, best_value) = best.ok_or_else(|| QnasError::Configuration("empty budget".into()))?;
    Ok(RunLog { config: cfg.clone(), seed, records, failures, best, best_value })
}

struct Proposal {
    circuit: Option<Circuit>,
    ei: f64,
    hp: KernelHyperparams,
    jitter: JitterReport,
}

/// Fits the surrogate and maximizes EI over unseen circuits. `circuit` is
/// `None` when the search only returned already-evaluated circuits.
fn propose(
    obs: &ObservationSet,
    seen: &HashSet<Circuit>,
    t: usize,
    fit: &FitConfig,
    evo_cfg: &EvoConfig,
) -> Result<Proposal> {
    let hp = fit_hyperparams_with(obs, fit)?;
    let model = GpModel::fit(obs, &hp)?;
    let f_best = obs.y().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let acq = |c: &Circuit| -> Result<f64> {
        if seen.contains(c) {
            return Ok(-1.0);
        }
        let (mean, var) = model.predict(obs, &CircuitFeatures::new(c))?;
        Ok(ei_closed_form(mean, var, f_best))
    };
    let res = evolve(obs.circuits(), acq, t, evo_cfg)?;
    let circuit = (res.best_value >= 0.0 && !seen.contains(&res.best)).then_some(res.best);
    Ok(Proposal { circuit, ei: res.best_value, hp, jitter: model.jitter })
}

fn fresh_random(n: usize, n_gates: usize, seen: &HashSet<Circuit>, rng: &mut ChaCha8Rng) -> Result<Circuit> {
    let mut c = random_circuit(n, n_gates, rng)?;
    for _ in 0..1000 {
        if !seen.contains(&c) {
            break;
        }
        c = random_circuit(n, n_gates, rng)?;
    }
    Ok(c)
}

/// Kernel conditioning over a set of runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JitterAudit {
    pub fits: usize,
    /// Fits whose noise-free kernel had an eigenvalue below `-threshold`.
    pub flagged: usize,
    /// Largest `-min_eig / threshold` seen; at most 1 when nothing is flagged.
    pub worst_ratio: f64,
    pub max_added: f64,
    /// No negative eigenvalue exceeded the jitter threshold.
    pub passed: bool,
}

pub fn jitter_audit(logs: &[RunLog]) -> JitterAudit {
    let reports: Vec<&JitterReport> = logs.iter().flat_map(|l| &l.records).filter_map(|r| r.jitter.as_ref()).collect();
    let flagged = reports.iter().filter(|j| j.flagged).count();
    let max_added = reports.iter().map(|j| j.added).fold(0.0, f64::max);
    let worst_ratio =
        reports.iter().map(|j| if j.threshold > 0.0 { -j.min_eig / j.threshold } else { 0.0 }).fold(0.0, f64::max);
    let passed = flagged == 0 && reports.iter().all(|j| j.min_eig.is_finite());
    JitterAudit { fits: reports.len(), flagged, worst_ratio, max_added, passed }
}
