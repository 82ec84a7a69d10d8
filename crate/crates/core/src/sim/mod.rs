//! Scenario assembly, Monte-Carlo sweeps over transmit power and result output.

mod config;
mod output;
mod scenario;
mod sweep;
mod validate;

pub use config::{
    EstimationConfig, PaConfig, PowerGrid, ScenarioConfig, SweepConfig, TermMemory, TxConfig,
};
pub use output::{to_csv, write_csv, CSV_HEADER};
pub use scenario::{
    compute_sinr, compute_sinr_pooled, evaluate_cancellers, run_once, run_once_with, simulate_scenario,
    CancellerOutcome, RunOptions, RunRecord, ScenarioData,
};
pub use sweep::{aggregate, sweep, sweep_runs, sweep_with_models, DumpedModel, SweepResult, SweepRow};
pub use validate::{two_tone_intercepts, validate, Check, ValidationReport};
