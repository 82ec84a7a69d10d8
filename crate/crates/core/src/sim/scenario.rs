use std::ops::Range;

use num_complex::Complex64;
use rand::RngCore;

use super::config::ScenarioConfig;
use crate::canceller::{cancel, fit_canceller, regenerate_si, CancellerModel, FitDiagnostics, LsOptions, TermSet};
use crate::error::{domain, Result};
use crate::rng::rng_from_seed;
use crate::rx_frontend::rx_chain;
use crate::si_channel::{design_rf_canceller, draw_si_channel, propagate, rf_cancel, ChannelSpec};
use crate::signal::{db_to_power_ratio, dbm_to_watts, mean_power, ComplexSignal};
use crate::tx_chain::{iq_from_irr, iq_modulate, pa_apply, pa_from_specs, PaModel};
use crate::waveform::generate_ofdm;

/// Samples before the estimation block; covers filter transients and the
/// canceller's lags.
const MIN_WARMUP: usize = 64;

/// One realization of the full transceiver: what the digital canceller sees
/// plus the references needed to score it.
#[derive(Debug, Clone)]
pub struct ScenarioData {
    /// Digital transmit baseband per TX, unit mean power.
    pub x: Vec<ComplexSignal>,
    /// ADC output per RX.
    pub y: Vec<ComplexSignal>,
    /// Clean SoI at the ADC reference plane per RX (zero where the SoI is off).
    pub s_ref: Vec<ComplexSignal>,
    pub estimation: Range<usize>,
    pub evaluation: Range<usize>,
    pub vga_gain_db: Vec<f64>,
    /// Some receiver's AGC ran out of range.
    pub saturated: bool,
    /// PA models of this realization, per TX.
    pub pa: Vec<PaModel>,
}

fn warmup_for(cfg: &ScenarioConfig, term_sets: &[TermSet]) -> usize {
    let longest = term_sets
        .iter()
        .flat_map(|ts| cfg.estimation.lags_for(ts))
        .chain(std::iter::once(cfg.estimation.memory))
        .max()
        .unwrap_or(1);
    MIN_WARMUP.max(longest)
}

/// Builds one realization at total transmit power `tx_power_dbm`.
///
/// Channel, PA memory, RF canceller error, data, SoI and noise all derive
/// from `seed`; I/Q imbalance, intercept points and noise figure come from
/// the configuration.
pub fn simulate_scenario(
    cfg: &ScenarioConfig,
    term_sets: &[TermSet],
    tx_power_dbm: f64,
    seed: u64,
) -> Result<ScenarioData> {
    cfg.validate()?;
    if !tx_power_dbm.is_finite() {
        return Err(domain("transmit power must be finite"));
    }
    let est = &cfg.estimation;
    let warmup = warmup_for(cfg, term_sets);
    let estimation = warmup..warmup + est.n_samples;
    let evaluation = estimation.end..estimation.end + est.eval_samples;
    let len = evaluation.end;
    let fs = cfg.ofdm.sample_rate();
    let n_symbols = cfg.ofdm.symbols_for(len);

    let mut rng = rng_from_seed(seed);
    let mut next = || rng.next_u64();

    // transmit side
    let pa_in_dbm = cfg.per_antenna_dbm(tx_power_dbm) - cfg.pa.gain_db;
    let tx_iq = iq_from_irr(cfg.tx.irr_db, cfg.tx.iq_phase_split)?;
    let mut x = Vec::with_capacity(cfg.n_tx);
    let mut x_pa = Vec::with_capacity(cfg.n_tx);
    let mut pa = Vec::with_capacity(cfg.n_tx);
    for _ in 0..cfg.n_tx {
        let raw = generate_ofdm(&cfg.ofdm, n_symbols, next())?.slice(0..len);
        let unit = raw.scaled(raw.mean_power().sqrt().recip());
        let drive = unit.scaled(dbm_to_watts(pa_in_dbm).sqrt());
        let model = pa_from_specs(&cfg.pa.spec(), &cfg.pa.memory(), next())?;
        x_pa.push(pa_apply(&iq_modulate(&drive, &tx_iq), &model));
        x.push(unit);
        pa.push(model);
    }

    // SI coupling and RF cancellation
    let ch = draw_si_channel(cfg.n_tx, cfg.n_rx, &cfg.channel, fs, next())?;
    let rf = design_rf_canceller(&ch, cfg.rf_suppression_db, &cfg.ofdm, next())?;
    let residual = rf_cancel(&propagate(&x_pa, &ch)?, &x_pa, &rf)?;

    // signal of interest from a remote single-antenna node over Rayleigh fading
    let soi_spec = ChannelSpec { k_factor_db: f64::NEG_INFINITY, path_loss_db: 0.0, ..cfg.channel };
    let soi_tx = generate_ofdm(&cfg.ofdm, n_symbols, next())?.slice(0..len);
    let soi_ch = draw_si_channel(1, cfg.n_rx, &soi_spec, fs, next())?;
    let mut soi = propagate(std::slice::from_ref(&soi_tx), &soi_ch)?;
    let soi_on = cfg.soi_snr_db > f64::NEG_INFINITY;
    let target = dbm_to_watts(cfg.rx.noise_floor_dbm()) * db_to_power_ratio(cfg.soi_snr_db);
    let gate = if est.soi_present { 0 } else { evaluation.start };
    for s in &mut soi {
        let p = mean_power(&s.samples()[evaluation.clone()]);
        let k = if soi_on && p > 0.0 { (target / p).sqrt() } else { 0.0 };
        for (n, v) in s.samples_mut().iter_mut().enumerate() {
            *v = if n < gate { Complex64::new(0.0, 0.0) } else { *v * k };
        }
    }

    // receivers
    let mut y = Vec::with_capacity(cfg.n_rx);
    let mut s_ref = Vec::with_capacity(cfg.n_rx);
    let mut vga_gain_db = Vec::with_capacity(cfg.n_rx);
    let mut saturated = false;
    for (r, s) in residual.iter().zip(&soi) {
        let input: Vec<_> = r.samples().iter().zip(s.samples()).map(|(a, b)| a + b).collect();
        let out = rx_chain(&ComplexSignal::new(input, fs)?, &cfg.rx, next())?;
        s_ref.push(s.scaled(out.linear_gain(&cfg.rx)));
        vga_gain_db.push(out.vga_gain_db);
        saturated |= out.saturated;
        y.push(out.signal);
    }

    Ok(ScenarioData { x, y, s_ref, estimation, evaluation, vga_gain_db, saturated, pa })
}

/// `10·log10(P(s_ref) / P(ŝ − s_ref))`; `+∞` for a perfect estimate.
pub fn compute_sinr(s_hat: &ComplexSignal, s_ref: &ComplexSignal) -> Result<f64> {
    compute_sinr_pooled(std::slice::from_ref(s_hat), std::slice::from_ref(s_ref))
}

/// SINR with signal and error powers summed over several receivers.
pub fn compute_sinr_pooled(s_hat: &[ComplexSignal], s_ref: &[ComplexSignal]) -> Result<f64> {
    if s_hat.len() != s_ref.len() || s_hat.is_empty() {
        return Err(domain("SINR needs matching, non-empty signal lists"));
    }
    let (mut sig, mut err) = (0.0, 0.0);
    for (a, b) in s_hat.iter().zip(s_ref) {
        if a.len() != b.len() {
            return Err(domain("SINR inputs differ in length"));
        }
        sig += b.samples().iter().map(|v| v.norm_sqr()).sum::<f64>();
        err += a.samples().iter().zip(b.samples()).map(|(u, v)| (u - v).norm_sqr()).sum::<f64>();
    }
    if sig == 0.0 {
        return Err(domain("SINR reference has zero power"));
    }
    Ok(if err == 0.0 { f64::INFINITY } else { 10.0 * (sig / err).log10() })
}

/// Result of one canceller within a run.
#[derive(Debug, Clone)]
pub struct CancellerOutcome {
    pub name: String,
    /// Pooled SINR over all receivers, or the reason the fit failed.
    pub sinr_db: std::result::Result<f64, String>,
    pub diagnostics: Vec<FitDiagnostics>,
    pub model: Option<CancellerModel>,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub tx_power_dbm: f64,
    pub seed: u64,
    pub saturated: bool,
    pub vga_gain_db: Vec<f64>,
    /// SINR with no digital cancellation.
    pub sinr_uncancelled_db: f64,
    pub outcomes: Vec<CancellerOutcome>,
}

impl RunRecord {
    pub fn sinr(&self, name: &str) -> Option<f64> {
        self.outcomes.iter().find(|o| o.name == name).and_then(|o| o.sinr_db.as_ref().ok().copied())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub keep_models: bool,
}

fn eval_slices(v: &[ComplexSignal], r: &Range<usize>) -> Vec<ComplexSignal> {
    v.iter().map(|s| s.slice(r.clone())).collect()
}

/// Fits and scores every term set on one prepared scenario.
pub fn evaluate_cancellers(
    cfg: &ScenarioConfig,
    data: &ScenarioData,
    term_sets: &[TermSet],
    opts: RunOptions,
) -> Result<Vec<CancellerOutcome>> {
    let ls = LsOptions { ridge: cfg.estimation.ridge, ..LsOptions::default() };
    let s_ref = eval_slices(&data.s_ref, &data.evaluation);
    let rows = data.estimation.len();
    term_sets
        .iter()
        .map(|ts| {
            let lags = cfg.estimation.lags_for(ts);
            let fitted = fit_canceller(&data.x, &data.y, ts, &lags, rows, data.estimation.start, &ls);
            let outcome = match fitted {
                Ok((model, diagnostics)) => {
                    let r_hat = regenerate_si(&model, &data.x)?;
                    let s_hat = eval_slices(&cancel(&data.y, &r_hat)?, &data.evaluation);
                    CancellerOutcome {
                        name: ts.name(),
                        sinr_db: compute_sinr_pooled(&s_hat, &s_ref).map_err(|e| e.to_string()),
                        diagnostics,
                        model: opts.keep_models.then_some(model),
                    }
                }
                Err(e) => CancellerOutcome {
                    name: ts.name(),
                    sinr_db: Err(e.to_string()),
                    diagnostics: Vec::new(),
                    model: None,
                },
            };
            Ok(outcome)
        })
        .collect()
}

/// One Monte-Carlo run with the configured cancellers.
pub fn run_once(cfg: &ScenarioConfig, tx_power_dbm: f64, seed: u64) -> Result<RunRecord> {
    run_once_with(cfg, &cfg.term_sets()?, tx_power_dbm, seed, RunOptions::default())
}

/// One Monte-Carlo run with explicit term sets.
pub fn run_once_with(
    cfg: &ScenarioConfig,
    term_sets: &[TermSet],
    tx_power_dbm: f64,
    seed: u64,
    opts: RunOptions,
) -> Result<RunRecord> {
    let data = simulate_scenario(cfg, term_sets, tx_power_dbm, seed)?;
    let outcomes = evaluate_cancellers(cfg, &data, term_sets, opts)?;
    let s_ref = eval_slices(&data.s_ref, &data.evaluation);
    let y = eval_slices(&data.y, &data.evaluation);
    let sinr_uncancelled_db = compute_sinr_pooled(&y, &s_ref).unwrap_or(f64::NAN);
    Ok(RunRecord {
        tx_power_dbm,
        seed,
        saturated: data.saturated,
        vga_gain_db: data.vga_gain_db,
        sinr_uncancelled_db,
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(v: Vec<Complex64>) -> ComplexSignal {
        ComplexSignal::new(v, 1.0).unwrap()
    }

    #[test]
    fn sinr_definition() {
        let s = crate::waveform::generate_ofdm(&Default::default(), 4, 1).unwrap();
        assert_eq!(compute_sinr(&s, &s).unwrap(), f64::INFINITY);
        let n = crate::waveform::generate_ofdm(&Default::default(), 4, 2).unwrap();
        let n = crate::waveform::scale_to_power(&n, s.power_dbm() - 15.0).unwrap();
        let noisy = sig(s.samples().iter().zip(n.samples()).map(|(a, b)| a + b).collect());
        assert!((compute_sinr(&noisy, &s).unwrap() - 15.0).abs() < 0.05);
        let zero = ComplexSignal::zeros(s.len(), 1.0);
        assert!(compute_sinr(&s, &zero).is_err());
    }

    #[test]
    fn small_scenario_shapes() {
        let mut cfg = ScenarioConfig::default();
        cfg.estimation.n_samples = 1000;
        cfg.estimation.eval_samples = 500;
        let data = simulate_scenario(&cfg, &cfg.term_sets().unwrap(), 10.0, 3).unwrap();
        assert_eq!(data.x.len(), 2);
        assert_eq!(data.y.len(), 2);
        assert_eq!(data.y[0].len(), 64 + 1500);
        assert_eq!(data.evaluation, 1064..1564);
        // SoI is off during estimation by default
        assert!(data.s_ref[0].samples()[..1064].iter().all(|v| v.norm() == 0.0));
        assert!(data.s_ref[0].samples()[1064..].iter().any(|v| v.norm() > 0.0));
        assert!(!data.saturated);
    }
}
