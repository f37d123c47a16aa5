//! Experiment driver and the embedding and scatter analyses.

pub mod mds;
pub mod scatter;
pub mod search;

pub use mds::{mds_embed, mutual_top_k, neighbor_order, template_distances};
pub use scatter::{distance_vs_performance, scatter_for, DecileSummary, ScatterConfig, ScatterTable};
pub use search::{
    jitter_audit, run_search, run_trial, run_trials, run_with_objective, ExperimentConfig, IterRecord, JitterAudit,
    Phase, RunLog, SearchMode,
};
