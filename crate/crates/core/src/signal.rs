//! Sampled complex baseband signals and the power conventions shared by every
//! stage of the simulator.
//!
//! Powers are mean-square sample values under a 1-ohm normalization, quoted in
//! dBm as `10·log10(mean|s|²) + 30`.

use std::ops::Range;

use num_complex::Complex64;

use crate::error::{domain, Result};

/// Converts a power in dBm to watts (mean-square amplitude).
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Converts a mean-square amplitude to dBm.
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// Power ratio in dB to a linear power ratio.
pub fn db_to_power_ratio(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Power ratio in dB to a linear amplitude ratio.
pub fn db_to_amplitude_ratio(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

pub fn mean_power(samples: &[Complex64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len() as f64
}

/// Uniformly sampled complex baseband sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSignal {
    samples: Vec<Complex64>,
    sample_rate: f64,
}

impl ComplexSignal {
    /// Builds a signal, rejecting non-finite samples and non-positive rates.
    pub fn new(samples: Vec<Complex64>, sample_rate: f64) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(domain(format!("sample rate must be positive, got {sample_rate}")));
        }
        if let Some(idx) = samples.iter().position(|s| !(s.re.is_finite() && s.im.is_finite())) {
            return Err(domain(format!("non-finite sample at index {idx}")));
        }
        Ok(Self { samples, sample_rate })
    }

    /// Internal constructor for operations that cannot produce non-finite
    /// values from finite inputs.
    pub(crate) fn from_parts(samples: Vec<Complex64>, sample_rate: f64) -> Self {
        debug_assert!(sample_rate > 0.0);
        Self { samples, sample_rate }
    }

    pub fn zeros(len: usize, sample_rate: f64) -> Self {
        Self::from_parts(vec![Complex64::new(0.0, 0.0); len], sample_rate)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn mean_power(&self) -> f64 {
        mean_power(&self.samples)
    }

    pub fn power_dbm(&self) -> f64 {
        watts_to_dbm(self.mean_power())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_parts(self.samples.iter().map(|s| s * factor).collect(), self.sample_rate)
    }

    /// Copy of a sub-range of the samples.
    pub fn slice(&self, range: Range<usize>) -> Self {
        Self::from_parts(self.samples[range].to_vec(), self.sample_rate)
    }

    /// Applies a samplewise map.
    pub(crate) fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::from_parts(self.samples.iter().map(|&s| f(s)).collect(), self.sample_rate)
    }
}

/// Causal FIR filtering with zero prehistory; the output has the input length.
pub fn fir_filter(x: &[Complex64], taps: &[Complex64]) -> Vec<Complex64> {
    let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
    fir_accumulate(x, taps, &mut y);
    y
}

/// `y += taps * x` (causal, zero prehistory, truncated to `y.len()`).
pub(crate) fn fir_accumulate(x: &[Complex64], taps: &[Complex64], y: &mut [Complex64]) {
    let n = x.len().min(y.len());
    for (l, &c) in taps.iter().enumerate() {
        if c == Complex64::new(0.0, 0.0) || l >= n {
            continue;
        }
        for (out, &xi) in y[l..n].iter_mut().zip(&x[..n - l]) {
            *out += c * xi;
        }
    }
}

/// Monomial `x^q · conj(x)^(p−q)`.
#[inline]
pub fn monomial(x: Complex64, p: usize, q: usize) -> Complex64 {
    debug_assert!(q <= p);
    let common = q.min(p - q);
    let envelope = x.norm_sqr().powi(common as i32);
    let rest = if 2 * q >= p { x.powu((2 * q - p) as u32) } else { x.conj().powu((p - 2 * q) as u32) };
    rest * envelope
}

/// Draws a circularly-symmetric complex Gaussian sample with the given variance.
pub fn complex_gaussian<R: rand::Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    use rand_distr::{Distribution, StandardNormal};
    let sigma = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * sigma, im * sigma)
}
