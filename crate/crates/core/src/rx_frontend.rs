//! Direct-conversion receiver chain: thermal noise, LNA, mixer, residual I/Q
//! imbalance, AGC-controlled VGA and ADC.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Result};
use crate::rng::rng_from_seed;
use crate::signal::{complex_gaussian, db_to_amplitude_ratio, dbm_to_watts, ComplexSignal};
use crate::tx_chain::{iq_from_irr, IqImbalance};

/// Thermal noise density at 290 K, dBm/Hz.
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

/// Gain and intercept points of one amplifier or mixer stage. Intercepts are
/// input referred; a missing intercept means the stage has no such term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageSpec {
    pub gain_db: f64,
    #[serde(default)]
    pub iip2_dbm: Option<f64>,
    #[serde(default)]
    pub iip3_dbm: Option<f64>,
    /// Informational; noise is injected once using the composite figure.
    #[serde(default)]
    pub nf_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VgaSpec {
    pub min_gain_db: f64,
    pub max_gain_db: f64,
    pub iip2_dbm: Option<f64>,
    pub iip3_dbm: Option<f64>,
    pub nf_db: f64,
    /// Fixed gain; when absent the AGC chooses the gain.
    pub fixed_gain_db: Option<f64>,
}

impl Default for VgaSpec {
    fn default() -> Self {
        Self {
            min_gain_db: 0.0,
            max_gain_db: 69.0,
            iip2_dbm: Some(50.0),
            iip3_dbm: Some(20.0),
            nf_db: 4.0,
            fixed_gain_db: None,
        }
    }
}

/// Switches for the individual receiver impairments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RxImpairments {
    pub noise: bool,
    pub lna_nonlinearity: bool,
    pub mixer_nonlinearity: bool,
    pub iq_imbalance: bool,
    pub vga_nonlinearity: bool,
    pub quantization: bool,
}

impl Default for RxImpairments {
    fn default() -> Self {
        Self::all()
    }
}

impl RxImpairments {
    pub fn all() -> Self {
        Self {
            noise: true,
            lna_nonlinearity: true,
            mixer_nonlinearity: true,
            iq_imbalance: true,
            vga_nonlinearity: true,
            quantization: true,
        }
    }

    pub fn none() -> Self {
        Self {
            noise: false,
            lna_nonlinearity: false,
            mixer_nonlinearity: false,
            iq_imbalance: false,
            vga_nonlinearity: false,
            quantization: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RxChainConfig {
    pub lna: StageSpec,
    pub mixer: StageSpec,
    pub vga: VgaSpec,
    pub rx_irr_db: f64,
    /// Share of the image produced by phase rather than gain mismatch.
    pub rx_iq_phase_split: f64,
    pub adc_bits: u32,
    /// ADC clip level per rail.
    pub adc_full_scale: f64,
    /// Distance of the AGC target peak below ADC full scale, dB.
    pub adc_backoff_db: f64,
    /// Noise bandwidth, Hz.
    pub bandwidth: f64,
    pub composite_nf_db: f64,
    pub impairments: RxImpairments,
}

impl Default for RxChainConfig {
    fn default() -> Self {
        Self {
            lna: StageSpec { gain_db: 25.0, iip2_dbm: None, iip3_dbm: Some(5.0), nf_db: 4.1 },
            mixer: StageSpec { gain_db: 6.0, iip2_dbm: Some(50.0), iip3_dbm: Some(15.0), nf_db: 4.0 },
            vga: VgaSpec::default(),
            rx_irr_db: 50.0,
            rx_iq_phase_split: 0.5,
            adc_bits: 12,
            adc_full_scale: 1.0,
            adc_backoff_db: 1.0,
            bandwidth: 12.5e6,
            composite_nf_db: 4.1,
            impairments: RxImpairments::default(),
        }
    }
}

/// Highest ADC resolution that still quantizes exactly in `f64`.
pub const MAX_ADC_BITS: u32 = 52;

impl RxChainConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, s) in [("LNA", &self.lna), ("mixer", &self.mixer)] {
            if !s.gain_db.is_finite() {
                return Err(config(format!("{name} gain must be finite")));
            }
            check_intercepts(name, s.iip2_dbm, s.iip3_dbm)?;
        }
        let v = &self.vga;
        if !(v.min_gain_db.is_finite() && v.max_gain_db.is_finite() && v.min_gain_db <= v.max_gain_db) {
            return Err(config("VGA gain range must be finite and ordered"));
        }
        if let Some(g) = v.fixed_gain_db {
            if !(v.min_gain_db..=v.max_gain_db).contains(&g) {
                return Err(config(format!(
                    "fixed VGA gain {g} dB outside {}..{} dB",
                    v.min_gain_db, v.max_gain_db
                )));
            }
        }
        check_intercepts("VGA", v.iip2_dbm, v.iip3_dbm)?;
        if !(self.rx_irr_db > 0.0) {
            return Err(config("RX IRR must be positive"));
        }
        if !(0.0..=1.0).contains(&self.rx_iq_phase_split) {
            return Err(config("RX I/Q phase split must lie in [0, 1]"));
        }
        if self.adc_bits == 0 || self.adc_bits > MAX_ADC_BITS {
            return Err(config(format!("ADC bits must lie in 1..={MAX_ADC_BITS}")));
        }
        if !(self.adc_full_scale.is_finite() && self.adc_full_scale > 0.0) {
            return Err(config("ADC full scale must be positive"));
        }
        if !self.adc_backoff_db.is_finite() {
            return Err(config("ADC back-off must be finite"));
        }
        if !(self.bandwidth.is_finite() && self.bandwidth > 0.0) {
            return Err(config("noise bandwidth must be positive"));
        }
        if !self.composite_nf_db.is_finite() {
            return Err(config("noise figure must be finite"));
        }
        Ok(())
    }

    /// Thermal noise power referred to the chain input, dBm.
    pub fn noise_floor_dbm(&self) -> f64 {
        THERMAL_NOISE_DBM_PER_HZ + 10.0 * self.bandwidth.log10() + self.composite_nf_db
    }

    /// Combined LNA and mixer gain, dB.
    pub fn front_gain_db(&self) -> f64 {
        self.lna.gain_db + self.mixer.gain_db
    }

    pub fn rx_iq(&self) -> Result<IqImbalance> {
        iq_from_irr(self.rx_irr_db, self.rx_iq_phase_split)
    }
}

fn check_intercepts(name: &str, iip2: Option<f64>, iip3: Option<f64>) -> Result<()> {
    for v in [iip2, iip3].into_iter().flatten() {
        if !v.is_finite() {
            return Err(config(format!("{name} intercept points must be finite")));
        }
    }
    Ok(())
}

/// Memoryless stage `y = G·(x + a2·|x|² + a3·|x|²·x)` with input-referred
/// coefficients.
///
/// A two-tone input of per-tone power `A²` gives an IM2 product `a2·A²` and an
/// IM3 product `|a3|·A³`; equating them with the fundamental `A` at the
/// intercept yields `a2 = 1/sqrt(P_iip2)` and `|a3| = 1/P_iip3` (watts).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearStage {
    pub gain: f64,
    pub a2: f64,
    pub a3: Complex64,
}

impl NonlinearStage {
    pub fn new(gain_db: f64, iip2_dbm: Option<f64>, iip3_dbm: Option<f64>) -> Self {
        Self {
            gain: db_to_amplitude_ratio(gain_db),
            a2: iip2_dbm.map_or(0.0, |p| dbm_to_watts(p).sqrt().recip()),
            a3: Complex64::new(iip3_dbm.map_or(0.0, |p| -dbm_to_watts(p).recip()), 0.0),
        }
    }

    pub fn linear(gain_db: f64) -> Self {
        Self::new(gain_db, None, None)
    }

    #[inline]
    pub fn apply(&self, x: Complex64) -> Complex64 {
        let r = x.norm_sqr();
        (x + self.a3 * r * x + self.a2 * r) * self.gain
    }
}

/// Uniform mid-rise quantizer applied to I and Q separately, `2^bits` levels
/// over `±full_scale`, clipping beyond.
pub fn adc_quantize(x: &ComplexSignal, bits: u32, full_scale: f64) -> Result<ComplexSignal> {
    if !(full_scale.is_finite() && full_scale > 0.0) {
        return Err(domain("ADC full scale must be positive"));
    }
    if bits == 0 || bits > MAX_ADC_BITS {
        return Err(domain(format!("ADC bits must lie in 1..={MAX_ADC_BITS}")));
    }
    let levels = (1u64 << bits) as f64;
    let step = 2.0 * full_scale / levels;
    let (lo, hi) = (-levels / 2.0, levels / 2.0 - 1.0);
    let q = |v: f64| ((v / step).floor().clamp(lo, hi) + 0.5) * step;
    Ok(x.map(|v| Complex64::new(q(v.re), q(v.im))))
}

/// VGA gain chosen by the AGC.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgcDecision {
    pub gain_db: f64,
    /// The gain needed to hit the target lay outside the VGA range.
    pub saturated: bool,
}

/// Gain that places `peak` (largest per-rail amplitude at the VGA input) at
/// ADC full scale minus the configured back-off, clamped to the VGA range.
pub fn agc_gain(peak: f64, cfg: &RxChainConfig) -> Result<AgcDecision> {
    if !(peak.is_finite() && peak > 0.0) {
        return Err(domain("AGC needs a positive finite peak"));
    }
    let target = cfg.adc_full_scale * db_to_amplitude_ratio(-cfg.adc_backoff_db);
    let wanted = 20.0 * (target / peak).log10();
    let gain_db = wanted.clamp(cfg.vga.min_gain_db, cfg.vga.max_gain_db);
    Ok(AgcDecision { gain_db, saturated: gain_db != wanted })
}

/// Receiver output plus the gain state needed to reference the SoI.
#[derive(Debug, Clone, PartialEq)]
pub struct RxOutput {
    pub signal: ComplexSignal,
    pub vga_gain_db: f64,
    pub saturated: bool,
}

impl RxOutput {
    /// Total small-signal voltage gain of the chain.
    pub fn linear_gain(&self, cfg: &RxChainConfig) -> f64 {
        db_to_amplitude_ratio(cfg.front_gain_db() + self.vga_gain_db)
    }
}

fn max_rail(x: &[Complex64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.re.abs()).max(v.im.abs()))
}

/// Runs the receiver chain on the RF-cancelled signal `r`.
pub fn rx_chain(r: &ComplexSignal, cfg: &RxChainConfig, seed: u64) -> Result<RxOutput> {
    cfg.validate()?;
    let imp = cfg.impairments;
    let mut v: Vec<Complex64> = r.samples().to_vec();

    if imp.noise {
        let mut rng = rng_from_seed(seed);
        let var = dbm_to_watts(cfg.noise_floor_dbm());
        v.iter_mut().for_each(|s| *s += complex_gaussian(&mut rng, var));
    }

    let stage = |s: &StageSpec, on: bool| {
        if on {
            NonlinearStage::new(s.gain_db, s.iip2_dbm, s.iip3_dbm)
        } else {
            NonlinearStage::linear(s.gain_db)
        }
    };
    let lna = stage(&cfg.lna, imp.lna_nonlinearity);
    let mixer = stage(&cfg.mixer, imp.mixer_nonlinearity);
    let iq = if imp.iq_imbalance { cfg.rx_iq()? } else { IqImbalance::ideal() };
    v.iter_mut().for_each(|s| *s = iq.apply(mixer.apply(lna.apply(*s))));

    let (vga_gain_db, saturated) = match cfg.vga.fixed_gain_db {
        Some(g) => (g, false),
        None => {
            let peak = max_rail(&v);
            if peak > 0.0 {
                let d = agc_gain(peak, cfg)?;
                (d.gain_db, d.saturated)
            } else {
                (cfg.vga.max_gain_db, true)
            }
        }
    };
    let vga = if imp.vga_nonlinearity {
        NonlinearStage::new(vga_gain_db, cfg.vga.iip2_dbm, cfg.vga.iip3_dbm)
    } else {
        NonlinearStage::linear(vga_gain_db)
    };
    v.iter_mut().for_each(|s| *s = vga.apply(*s));

    let mut signal = ComplexSignal::new(v, r.sample_rate())?;
    if imp.quantization {
        signal = adc_quantize(&signal, cfg.adc_bits, cfg.adc_full_scale)?;
    }
    Ok(RxOutput { signal, vga_gain_db, saturated })
}
