use rayon::prelude::*;

use super::config::ScenarioConfig;
use super::scenario::{run_once_with, RunOptions, RunRecord};
use crate::canceller::{CancellerModel, TermSet};
use crate::error::Result;
use crate::rng::derive_seed;

/// Aggregate over the runs of one (power, canceller) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub tx_power_dbm: f64,
    pub canceller: String,
    pub mean_sinr_db: f64,
    pub std_sinr_db: f64,
    /// Runs that produced a finite SINR.
    pub runs: usize,
    /// Runs in which some receiver's AGC saturated.
    pub saturation_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub config_hash: String,
    pub master_seed: u64,
    pub n_tx: usize,
}

impl SweepResult {
    pub fn row(&self, tx_power_dbm: f64, canceller: &str) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.canceller == canceller && (r.tx_power_dbm - tx_power_dbm).abs() < 1e-9)
    }

    pub fn powers(&self) -> Vec<f64> {
        let mut p: Vec<f64> = self.rows.iter().map(|r| r.tx_power_dbm).collect();
        p.dedup();
        p
    }
}

/// Fitted models of the first run at each power, for inspection.
#[derive(Debug, Clone)]
pub struct DumpedModel {
    pub tx_power_dbm: f64,
    pub model: CancellerModel,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

/// All runs of the sweep in (power, run) order.
pub fn sweep_runs(cfg: &ScenarioConfig, term_sets: &[TermSet], keep_first_models: bool) -> Result<Vec<Vec<RunRecord>>> {
    cfg.validate()?;
    let powers = cfg.sweep.powers.points();
    let jobs: Vec<(usize, usize)> =
        (0..powers.len()).flat_map(|p| (0..cfg.sweep.runs).map(move |r| (p, r))).collect();
    let records: Vec<RunRecord> = jobs
        .par_iter()
        .map(|&(p, r)| {
            let seed = derive_seed(cfg.seed, p as u64, r as u64);
            let opts = RunOptions { keep_models: keep_first_models && r == 0 };
            run_once_with(cfg, term_sets, powers[p], seed, opts)
        })
        .collect::<Result<_>>()?;
    let mut it = records.into_iter();
    Ok(powers.iter().map(|_| it.by_ref().take(cfg.sweep.runs).collect()).collect())
}

/// Aggregates per-run records into one row per (power, canceller).
pub fn aggregate(cfg: &ScenarioConfig, term_sets: &[TermSet], runs: &[Vec<RunRecord>]) -> Result<SweepResult> {
    let mut rows = Vec::new();
    for recs in runs {
        let Some(first) = recs.first() else { continue };
        let saturation_count = recs.iter().filter(|r| r.saturated).count();
        for ts in term_sets {
            let name = ts.name();
            let vals: Vec<f64> =
                recs.iter().filter_map(|r| r.sinr(&name)).filter(|v| v.is_finite()).collect();
            let (mean, std) = mean_std(&vals);
            rows.push(SweepRow {
                tx_power_dbm: first.tx_power_dbm,
                canceller: name,
                mean_sinr_db: mean,
                std_sinr_db: std,
                runs: vals.len(),
                saturation_count,
            });
        }
    }
    Ok(SweepResult { rows, config_hash: cfg.hash()?, master_seed: cfg.seed, n_tx: cfg.n_tx })
}

/// Monte-Carlo sweep over the configured power grid and cancellers.
pub fn sweep(cfg: &ScenarioConfig) -> Result<SweepResult> {
    let term_sets = cfg.term_sets()?;
    let runs = sweep_runs(cfg, &term_sets, false)?;
    aggregate(cfg, &term_sets, &runs)
}

/// Like [`sweep`], also returning the models fitted in the first run of each
/// power level.
pub fn sweep_with_models(cfg: &ScenarioConfig) -> Result<(SweepResult, Vec<DumpedModel>)> {
    let term_sets = cfg.term_sets()?;
    let runs = sweep_runs(cfg, &term_sets, true)?;
    let models = runs
        .iter()
        .filter_map(|recs| recs.first())
        .flat_map(|r| {
            r.outcomes.iter().filter_map(move |o| {
                o.model.clone().map(|model| DumpedModel { tx_power_dbm: r.tx_power_dbm, model })
            })
        })
        .collect();
    Ok((aggregate(cfg, &term_sets, &runs)?, models))
}
