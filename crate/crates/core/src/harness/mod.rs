//! Experiment orchestration: config files, cost accounting, evaluation and
//! result files.

mod config;
mod eval;
mod experiment;
mod flops;

pub use config::{ExperimentConfig, PRESETS};
pub use eval::{evaluate_policy, random_policy_return, EvalRecord};
pub use experiment::{
    csv_name, run_experiment, run_single, sparsity_report, stream_rng, write_curve, ExperimentSummary, NetworkSize,
    RunOutput, RunSummary, SparsityReport,
};
pub use flops::{count_flops_step, run_flops, step_flops, CostModel, FlopsReport, NetworkCost};
