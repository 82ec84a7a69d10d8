//! CP-OFDM transmit waveform generation and power/PAPR utilities.
//!
//! Data subcarriers sit symmetrically around DC (DC itself unused), and the
//! oversampled waveform is produced by a zero-padded IFFT of size
//! `n_subcarriers × oversampling`, so the signal is band limited up to the
//! leakage of the rectangular symbol boundaries.

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Result};
use crate::rng::rng_from_seed;
use crate::signal::{dbm_to_watts, ComplexSignal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constellation {
    Qam16,
}

impl Constellation {
    fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> Complex64 {
        match self {
            Constellation::Qam16 => {
                const LEVELS: [f64; 4] = [-3.0, -1.0, 1.0, 3.0];
                let norm = 10f64.sqrt().recip();
                let i = LEVELS[rng.random_range(0..4)];
                let q = LEVELS[rng.random_range(0..4)];
                Complex64::new(i * norm, q * norm)
            }
        }
    }
}

/// OFDM waveform parameters. Defaults are the 64/48/16 layout with 4×
/// oversampling at a 15.625 ns sample period (64 MHz).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OfdmConfig {
    pub n_subcarriers: usize,
    pub n_data_subcarriers: usize,
    /// Cyclic prefix length in base-rate samples.
    pub guard_interval: usize,
    pub oversampling: usize,
    pub constellation: Constellation,
    /// Oversampled sample period in seconds.
    pub sample_period: f64,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        Self {
            n_subcarriers: 64,
            n_data_subcarriers: 48,
            guard_interval: 16,
            oversampling: 4,
            constellation: Constellation::Qam16,
            sample_period: 15.625e-9,
        }
    }
}

impl OfdmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_subcarriers == 0 {
            return Err(config("OFDM needs at least one subcarrier"));
        }
        if self.n_data_subcarriers == 0 {
            return Err(config("OFDM needs at least one data subcarrier"));
        }
        // DC and the Nyquist bin stay empty.
        if self.n_data_subcarriers + 2 > self.n_subcarriers {
            return Err(config(format!(
                "{} data subcarriers do not fit in {} subcarriers around DC",
                self.n_data_subcarriers, self.n_subcarriers
            )));
        }
        if self.oversampling == 0 {
            return Err(config("oversampling factor must be at least 1"));
        }
        if self.guard_interval >= self.n_subcarriers {
            return Err(config("guard interval must be shorter than the symbol"));
        }
        if !(self.sample_period.is_finite() && self.sample_period > 0.0) {
            return Err(config("sample period must be positive"));
        }
        Ok(())
    }

    pub fn sample_rate(&self) -> f64 {
        1.0 / self.sample_period
    }

    pub fn fft_size(&self) -> usize {
        self.n_subcarriers * self.oversampling
    }

    /// Oversampled samples per OFDM symbol including the cyclic prefix.
    pub fn samples_per_symbol(&self) -> usize {
        (self.n_subcarriers + self.guard_interval) * self.oversampling
    }

    /// Subcarrier spacing in Hz.
    pub fn subcarrier_spacing(&self) -> f64 {
        self.sample_rate() / self.fft_size() as f64
    }

    /// Signed subcarrier indices carrying data, DC excluded.
    pub fn data_subcarriers(&self) -> Vec<i64> {
        let pos = self.n_data_subcarriers.div_ceil(2) as i64;
        let neg = (self.n_data_subcarriers / 2) as i64;
        (-neg..0).chain(1..=pos).collect()
    }

    /// Occupied bandwidth in Hz, measured edge to edge of the outermost
    /// data subcarriers.
    pub fn occupied_bandwidth(&self) -> f64 {
        let idx = self.data_subcarriers();
        let lo = *idx.first().unwrap_or(&0) as f64 - 0.5;
        let hi = *idx.last().unwrap_or(&0) as f64 + 0.5;
        (hi - lo) * self.subcarrier_spacing()
    }

    /// Number of whole OFDM symbols needed to cover `samples` samples.
    pub fn symbols_for(&self, samples: usize) -> usize {
        samples.div_ceil(self.samples_per_symbol()).max(1)
    }
}

/// Generates `n_symbols` CP-OFDM symbols of i.i.d. uniform constellation
/// points, normalized to unit mean power.
pub fn generate_ofdm(cfg: &OfdmConfig, n_symbols: usize, seed: u64) -> Result<ComplexSignal> {
    cfg.validate()?;
    if n_symbols == 0 {
        return Err(config("at least one OFDM symbol must be requested"));
    }
    let mut rng = rng_from_seed(seed);
    let nfft = cfg.fft_size();
    let cp = cfg.guard_interval * cfg.oversampling;
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(nfft);
    let carriers = cfg.data_subcarriers();

    let mut out = Vec::with_capacity(n_symbols * cfg.samples_per_symbol());
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    for _ in 0..n_symbols {
        buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
        for &k in &carriers {
            let bin = k.rem_euclid(nfft as i64) as usize;
            buf[bin] = cfg.constellation.draw(&mut rng);
        }
        ifft.process(&mut buf);
        out.extend_from_slice(&buf[nfft - cp..]);
        out.extend_from_slice(&buf);
    }

    let power = crate::signal::mean_power(&out);
    let norm = power.sqrt().recip();
    out.iter_mut().for_each(|s| *s *= norm);
    Ok(ComplexSignal::from_parts(out, cfg.sample_rate()))
}

/// Peak-to-average power ratio in dB, with the peak taken as the
/// `(1 − clip_prob)` quantile of the instantaneous power (nearest rank).
pub fn measure_papr(s: &ComplexSignal, clip_prob: f64) -> Result<f64> {
    if s.is_empty() {
        return Err(domain("PAPR of an empty signal"));
    }
    if !(0.0..=1.0).contains(&clip_prob) {
        return Err(domain(format!("clip probability {clip_prob} outside [0, 1]")));
    }
    let mut inst: Vec<f64> = s.samples().iter().map(|v| v.norm_sqr()).collect();
    let mean = inst.iter().sum::<f64>() / inst.len() as f64;
    if mean == 0.0 {
        return Err(domain("PAPR of an all-zero signal"));
    }
    let n = inst.len();
    let rank = ((1.0 - clip_prob) * n as f64).ceil() as usize;
    let idx = rank.clamp(1, n) - 1;
    let (_, peak, _) = inst.select_nth_unstable_by(idx, |a, b| a.total_cmp(b));
    Ok(10.0 * (*peak / mean).log10())
}

/// Rescales `s` by a positive real factor so its mean power equals `p_dbm`.
pub fn scale_to_power(s: &ComplexSignal, p_dbm: f64) -> Result<ComplexSignal> {
    let current = s.mean_power();
    if current == 0.0 || !current.is_finite() {
        return Err(domain("cannot scale a signal with zero power"));
    }
    if !p_dbm.is_finite() {
        return Err(domain(format!("target power {p_dbm} dBm is not finite")));
    }
    Ok(s.scaled((dbm_to_watts(p_dbm) / current).sqrt()))
}
