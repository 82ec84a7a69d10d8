use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::canceller::{make_term_set, Term, TermKind, TermSet};
use crate::error::{config, Error, Result};
use crate::rx_frontend::RxChainConfig;
use crate::si_channel::ChannelSpec;
use crate::tx_chain::{HigherOrderAnchor, MemorySpec, PaSpec, PaVariant};
use crate::waveform::OfdmConfig;

/// Transmit I/Q modulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TxConfig {
    /// Image rejection ratio, dB; `inf` disables the imbalance.
    pub irr_db: f64,
    /// Share of the image produced by phase rather than gain mismatch.
    pub iq_phase_split: f64,
}

impl Default for TxConfig {
    fn default() -> Self {
        Self { irr_db: 25.0, iq_phase_split: 0.5 }
    }
}

/// Power amplifier: datasheet figures plus how memory is realized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PaConfig {
    pub variant: PaVariant,
    pub gain_db: f64,
    pub iip3_dbm: f64,
    pub order: usize,
    pub memory_taps: usize,
    pub decay_db_per_tap: f64,
    pub anchor: HigherOrderAnchor,
}

impl Default for PaConfig {
    fn default() -> Self {
        let spec = PaSpec::default();
        let mem = MemorySpec::default();
        Self {
            variant: mem.variant,
            gain_db: spec.gain_db,
            iip3_dbm: spec.iip3_dbm,
            order: spec.order,
            memory_taps: mem.taps,
            decay_db_per_tap: mem.decay_db_per_tap,
            anchor: spec.anchor,
        }
    }
}

impl PaConfig {
    pub fn spec(&self) -> PaSpec {
        PaSpec { gain_db: self.gain_db, iip3_dbm: self.iip3_dbm, order: self.order, anchor: self.anchor }
    }

    pub fn memory(&self) -> MemorySpec {
        MemorySpec { variant: self.variant, taps: self.memory_taps, decay_db_per_tap: self.decay_db_per_tap }
    }
}

/// Memory override for one canceller term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermMemory {
    pub p: usize,
    pub q: usize,
    pub memory: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimationConfig {
    /// Samples used to fit the cancellers.
    pub n_samples: usize,
    /// Samples over which SINR is measured.
    pub eval_samples: usize,
    /// Canceller memory `M̄` per term.
    pub memory: usize,
    /// Keep the SoI on during estimation.
    pub soi_present: bool,
    /// Ridge weight for diagnostics; zero is plain least squares.
    pub ridge: f64,
    pub term_memory: Vec<TermMemory>,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        Self {
            n_samples: 10_000,
            eval_samples: 10_000,
            memory: 10,
            soi_present: false,
            ridge: 0.0,
            term_memory: Vec::new(),
        }
    }
}

impl EstimationConfig {
    /// Memory length of every term in `ts`, after overrides.
    pub fn lags_for(&self, ts: &TermSet) -> Vec<usize> {
        ts.terms()
            .iter()
            .map(|t| {
                self.term_memory
                    .iter()
                    .find(|o| Term::new(o.p, o.q) == *t)
                    .map_or(self.memory, |o| o.memory)
            })
            .collect()
    }
}

/// Inclusive power grid written `start:step:stop` (dBm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerGrid {
    pub start: f64,
    pub step: f64,
    pub stop: f64,
}

impl PowerGrid {
    pub fn single(p: f64) -> Self {
        Self { start: p, step: 1.0, stop: p }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.step.is_finite() && self.stop.is_finite()) {
            return Err(config("power grid values must be finite"));
        }
        if self.stop < self.start {
            return Err(config("power grid stop lies below start"));
        }
        if self.step <= 0.0 && self.stop > self.start {
            return Err(config("power grid step must be positive"));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        if self.stop == self.start || self.step <= 0.0 {
            return vec![self.start];
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.start + k as f64 * self.step).collect()
    }
}

impl fmt::Display for PowerGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.step, self.stop)
    }
}

impl FromStr for PowerGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<_> = s.split(':').map(str::trim).collect();
        let num = |t: &str| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{t}' in power grid '{s}'")));
        let grid = match parts.as_slice() {
            [p] => PowerGrid::single(num(p)?),
            [a, b, c] => PowerGrid { start: num(a)?, step: num(b)?, stop: num(c)? },
            _ => return Err(Error::Parse(format!("power grid '{s}' is not start:step:stop"))),
        };
        grid.validate()?;
        Ok(grid)
    }
}

impl Serialize for PowerGrid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PowerGrid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Total transmit power over all antennas, dBm.
    pub powers: PowerGrid,
    pub runs: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { powers: PowerGrid { start: -5.0, step: 2.5, stop: 25.0 }, runs: 100 }
    }
}

/// Full description of a simulated transceiver and sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub n_tx: usize,
    pub n_rx: usize,
    /// Dynamic range of the RF canceller, dB.
    pub rf_suppression_db: f64,
    /// SoI power above the receiver noise floor, dB; `-inf` disables the SoI.
    pub soi_snr_db: f64,
    pub cancellers: Vec<TermKind>,
    pub ofdm: OfdmConfig,
    pub tx: TxConfig,
    pub pa: PaConfig,
    pub channel: ChannelSpec,
    pub rx: RxChainConfig,
    pub estimation: EstimationConfig,
    pub sweep: SweepConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            n_tx: 2,
            n_rx: 2,
            rf_suppression_db: 30.0,
            soi_snr_db: 15.0,
            cancellers: vec![
                TermKind::Linear,
                TermKind::WidelyLinear,
                TermKind::PaOnly(5),
                TermKind::JointFull(5),
            ],
            ofdm: OfdmConfig::default(),
            tx: TxConfig::default(),
            pa: PaConfig::default(),
            channel: ChannelSpec::default(),
            rx: RxChainConfig::default(),
            estimation: EstimationConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_tx == 0 || self.n_rx == 0 {
            return Err(config("need at least one transmitter and one receiver"));
        }
        self.ofdm.validate()?;
        if !(self.tx.irr_db > 0.0) || !(0.0..=1.0).contains(&self.tx.iq_phase_split) {
            return Err(config("TX IRR must be positive and the phase split within [0, 1]"));
        }
        self.pa.spec().validate()?;
        if self.pa.memory_taps == 0 {
            return Err(config("PA memory needs at least one tap"));
        }
        self.channel.validate()?;
        if self.rf_suppression_db.is_nan() || self.rf_suppression_db < 0.0 {
            return Err(config("RF suppression must be non-negative"));
        }
        // -inf removes the SoI altogether
        if self.soi_snr_db.is_nan() || self.soi_snr_db == f64::INFINITY {
            return Err(config("SoI SNR must be finite or -inf"));
        }
        self.rx.validate()?;
        let est = &self.estimation;
        if est.memory == 0 || est.term_memory.iter().any(|t| t.memory == 0) {
            return Err(config("canceller memory must be at least one tap"));
        }
        if est.n_samples == 0 || est.eval_samples == 0 {
            return Err(config("estimation and evaluation blocks must be non-empty"));
        }
        if !(est.ridge.is_finite() && est.ridge >= 0.0) {
            return Err(config("ridge weight must be non-negative"));
        }
        if self.cancellers.is_empty() {
            return Err(config("no cancellers requested"));
        }
        for kind in &self.cancellers {
            make_term_set(*kind).map_err(|e| config(format!("canceller '{kind}': {e}")))?;
        }
        if self.sweep.runs == 0 {
            return Err(config("runs must be at least 1"));
        }
        self.sweep.powers.validate()?;
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config(e.to_string()))
    }

    /// SHA-256 of the canonical TOML form, hex encoded.
    pub fn hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.to_toml_string()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }

    /// Per-antenna transmit power for a total power `total_dbm`.
    pub fn per_antenna_dbm(&self, total_dbm: f64) -> f64 {
        total_dbm - 10.0 * (self.n_tx as f64).log10()
    }

    pub fn term_sets(&self) -> Result<Vec<TermSet>> {
        self.cancellers.iter().map(|k| make_term_set(*k)).collect()
    }
}
