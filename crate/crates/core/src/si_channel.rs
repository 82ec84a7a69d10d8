//! MIMO self-interference coupling channel and the multi-tap analog RF
//! canceller operating on the PA outputs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Result};
use crate::rng::rng_from_seed;
use crate::signal::{complex_gaussian, db_to_power_ratio, fir_accumulate, ComplexSignal};
use crate::waveform::OfdmConfig;

/// Statistical description of the SI coupling channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSpec {
    /// Seconds spanned by the tap-delay line.
    pub delay_spread: f64,
    /// Rician K-factor of the first tap, dB. `inf` gives a fixed coupling,
    /// `-inf` pure Rayleigh fading.
    pub k_factor_db: f64,
    /// Mean coupling loss per TX/RX pair (antenna separation), dB.
    pub path_loss_db: f64,
    /// Power of the last tap relative to the first, dB below.
    pub pdp_span_db: f64,
}

impl Default for ChannelSpec {
    fn default() -> Self {
        Self { delay_spread: 125e-9, k_factor_db: 35.8, path_loss_db: 40.0, pdp_span_db: 20.0 }
    }
}

impl ChannelSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.delay_spread.is_finite() && self.delay_spread >= 0.0) {
            return Err(config("delay spread must be finite and non-negative"));
        }
        if self.k_factor_db.is_nan() {
            return Err(config("K-factor is NaN"));
        }
        if !(self.path_loss_db.is_finite() && self.path_loss_db >= 0.0) {
            return Err(config("path loss must be finite and non-negative"));
        }
        if !(self.pdp_span_db.is_finite() && self.pdp_span_db >= 0.0) {
            return Err(config("power-delay profile span must be finite and non-negative"));
        }
        Ok(())
    }

    /// Number of taps `L + 1` for the given sample rate.
    pub fn n_taps(&self, sample_rate: f64) -> usize {
        // the small slack keeps 125 ns / 15.625 ns at exactly 8 taps
        ((self.delay_spread * sample_rate - 1e-9).ceil() as usize).max(1)
    }
}

/// Per-(RX, TX) FIR taps, indexed `[rx][tx][lag]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MimoSiChannel {
    taps: Vec<Vec<Vec<Complex64>>>,
}

impl MimoSiChannel {
    pub fn new(taps: Vec<Vec<Vec<Complex64>>>) -> Result<Self> {
        let n_tx = taps.first().map(Vec::len).unwrap_or(0);
        if taps.is_empty() || n_tx == 0 {
            return Err(domain("channel needs at least one TX and one RX"));
        }
        for row in &taps {
            if row.len() != n_tx {
                return Err(domain("ragged channel matrix"));
            }
            for t in row {
                if t.is_empty() {
                    return Err(domain("channel filter without taps"));
                }
                if t.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
                    return Err(domain("non-finite channel tap"));
                }
            }
        }
        Ok(Self { taps })
    }

    pub fn n_rx(&self) -> usize {
        self.taps.len()
    }

    pub fn n_tx(&self) -> usize {
        self.taps[0].len()
    }

    /// Longest filter length over all pairs.
    pub fn n_taps(&self) -> usize {
        self.taps.iter().flatten().map(Vec::len).max().unwrap_or(1)
    }

    pub fn taps(&self, rx: usize, tx: usize) -> &[Complex64] {
        &self.taps[rx][tx]
    }

    /// Total tap energy of one pair.
    pub fn pair_energy(&self, rx: usize, tx: usize) -> f64 {
        self.taps[rx][tx].iter().map(|c| c.norm_sqr()).sum()
    }

    /// Composite channel `c − h^RF` left after RF cancellation.
    pub fn composite(&self, rf: &RfCanceller) -> Result<MimoSiChannel> {
        check_dims(self.n_rx(), self.n_tx(), &rf.channel)?;
        let taps = self
            .taps
            .iter()
            .zip(&rf.channel.taps)
            .map(|(row, rf_row)| {
                row.iter()
                    .zip(rf_row)
                    .map(|(c, h)| {
                        let n = c.len().max(h.len());
                        (0..n)
                            .map(|l| {
                                c.get(l).copied().unwrap_or_default()
                                    - h.get(l).copied().unwrap_or_default()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(MimoSiChannel { taps })
    }
}

fn check_dims(n_rx: usize, n_tx: usize, ch: &MimoSiChannel) -> Result<()> {
    if ch.n_rx() != n_rx || ch.n_tx() != n_tx {
        return Err(domain(format!(
            "dimension mismatch: expected {n_rx}×{n_tx}, got {}×{}",
            ch.n_rx(),
            ch.n_tx()
        )));
    }
    Ok(())
}

/// Draws a Rician/Rayleigh tap-delay-line channel for every TX/RX pair.
///
/// The K-factor splits the pair's mean power between a fixed, zero-phase
/// coupling on tap 0 and a Rayleigh-faded part spread over all taps with an
/// exponential power-delay profile.
pub fn draw_si_channel(
    n_tx: usize,
    n_rx: usize,
    spec: &ChannelSpec,
    sample_rate: f64,
    seed: u64,
) -> Result<MimoSiChannel> {
    spec.validate()?;
    if n_tx == 0 || n_rx == 0 {
        return Err(config("channel needs at least one TX and one RX"));
    }
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(config("sample rate must be positive"));
    }
    let n_taps = spec.n_taps(sample_rate);
    let total = db_to_power_ratio(-spec.path_loss_db);
    let k = db_to_power_ratio(spec.k_factor_db);
    let (los, scatter) = if k.is_infinite() { (total, 0.0) } else { (total * k / (k + 1.0), total / (k + 1.0)) };

    let mut profile: Vec<f64> = (0..n_taps)
        .map(|l| {
            if n_taps == 1 {
                1.0
            } else {
                db_to_power_ratio(-spec.pdp_span_db * l as f64 / (n_taps - 1) as f64)
            }
        })
        .collect();
    let norm: f64 = profile.iter().sum();
    profile.iter_mut().for_each(|w| *w *= scatter / norm);

    let mut rng = rng_from_seed(seed);
    let taps = (0..n_rx)
        .map(|_| {
            (0..n_tx)
                .map(|_| {
                    let mut t: Vec<_> =
                        profile.iter().map(|&var| complex_gaussian(&mut rng, var)).collect();
                    t[0] += Complex64::new(los.sqrt(), 0.0);
                    t
                })
                .collect()
        })
        .collect();
    Ok(MimoSiChannel { taps })
}

fn check_tx_signals(x: &[ComplexSignal], n_tx: usize) -> Result<(usize, f64)> {
    if x.len() != n_tx {
        return Err(domain(format!("expected {n_tx} TX signals, got {}", x.len())));
    }
    let len = x[0].len();
    let fs = x[0].sample_rate();
    if x.iter().any(|s| s.len() != len || s.sample_rate() != fs) {
        return Err(domain("TX signals differ in length or sample rate"));
    }
    Ok((len, fs))
}

fn mimo_filter(x: &[ComplexSignal], ch: &MimoSiChannel) -> Result<Vec<Vec<Complex64>>> {
    let (len, _) = check_tx_signals(x, ch.n_tx())?;
    Ok((0..ch.n_rx())
        .map(|i| {
            let mut z = vec![Complex64::new(0.0, 0.0); len];
            for (j, xj) in x.iter().enumerate() {
                fir_accumulate(xj.samples(), ch.taps(i, j), &mut z);
            }
            z
        })
        .collect())
}

/// `z_i(n) = Σ_j Σ_l c_ij(l)·x_j(n−l)` with zero prehistory.
pub fn propagate(x_pa: &[ComplexSignal], ch: &MimoSiChannel) -> Result<Vec<ComplexSignal>> {
    let fs = check_tx_signals(x_pa, ch.n_tx())?.1;
    Ok(mimo_filter(x_pa, ch)?.into_iter().map(|z| ComplexSignal::from_parts(z, fs)).collect())
}

/// Analog multi-tap RF canceller taps, indexed like [`MimoSiChannel`].
#[derive(Debug, Clone, PartialEq)]
pub struct RfCanceller {
    channel: MimoSiChannel,
}

impl RfCanceller {
    pub fn new(taps: Vec<Vec<Vec<Complex64>>>) -> Result<Self> {
        Ok(Self { channel: MimoSiChannel::new(taps)? })
    }

    pub fn taps(&self, rx: usize, tx: usize) -> &[Complex64] {
        self.channel.taps(rx, tx)
    }

    pub fn n_rx(&self) -> usize {
        self.channel.n_rx()
    }

    pub fn n_tx(&self) -> usize {
        self.channel.n_tx()
    }
}

/// Mean of `|H(f)|²` over the data subcarriers of `ofdm`, i.e. the power gain
/// of `taps` for a unit-power OFDM stream.
fn ofdm_power_gain(taps: &[Complex64], ofdm: &OfdmConfig) -> f64 {
    let carriers = ofdm.data_subcarriers();
    let nfft = ofdm.fft_size() as f64;
    carriers
        .iter()
        .map(|&k| {
            let w = -2.0 * std::f64::consts::PI * k as f64 / nfft;
            taps.iter()
                .enumerate()
                .map(|(l, &c)| c * Complex64::from_polar(1.0, w * l as f64))
                .sum::<Complex64>()
                .norm_sqr()
        })
        .sum::<f64>()
        / carriers.len() as f64
}

/// Designs RF canceller taps `h = c·(1 + s_i·ε)` with i.i.d. `ε ~ CN(0, 1)`.
///
/// The reference excitation is independent unit-power OFDM on every
/// transmitter. The residual `−Σ c·s_i·ε * x` is linear in `s_i`, so its
/// expected power is `s_i²·P_ε` and the per-receiver scale that leaves the
/// linear SI exactly `target_suppression` dB below the incident SI follows in
/// closed form from the channel responses on the data subcarriers.
pub fn design_rf_canceller(
    ch: &MimoSiChannel,
    target_suppression: f64,
    ofdm: &OfdmConfig,
    seed: u64,
) -> Result<RfCanceller> {
    if target_suppression.is_nan() || target_suppression < 0.0 {
        return Err(config("RF suppression target must be non-negative"));
    }
    ofdm.validate()?;
    let mut rng = rng_from_seed(seed);
    let eps: Vec<Vec<Vec<Complex64>>> = (0..ch.n_rx())
        .map(|i| {
            (0..ch.n_tx())
                .map(|j| ch.taps(i, j).iter().map(|_| complex_gaussian(&mut rng, 1.0)).collect())
                .collect()
        })
        .collect();

    if target_suppression.is_infinite() {
        return Ok(RfCanceller { channel: ch.clone() });
    }
    let ratio = db_to_power_ratio(-target_suppression);

    let taps = (0..ch.n_rx())
        .map(|i| {
            let (mut p_inc, mut p_err) = (0.0, 0.0);
            for j in 0..ch.n_tx() {
                let c = ch.taps(i, j);
                let e: Vec<_> = c.iter().zip(&eps[i][j]).map(|(c, e)| c * e).collect();
                p_inc += ofdm_power_gain(c, ofdm);
                p_err += ofdm_power_gain(&e, ofdm);
            }
            let s = if p_err > 0.0 { (p_inc * ratio / p_err).sqrt() } else { 0.0 };
            (0..ch.n_tx())
                .map(|j| {
                    ch.taps(i, j)
                        .iter()
                        .zip(&eps[i][j])
                        .map(|(c, e)| c * (Complex64::new(1.0, 0.0) + e * s))
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(RfCanceller { channel: MimoSiChannel { taps } })
}

/// `r_i(n) = z_i(n) − Σ_j Σ_l h^RF_ij(l)·x_j(n−l)`.
pub fn rf_cancel(
    z: &[ComplexSignal],
    x_pa: &[ComplexSignal],
    rf: &RfCanceller,
) -> Result<Vec<ComplexSignal>> {
    if z.len() != rf.n_rx() {
        return Err(domain(format!("expected {} RX signals, got {}", rf.n_rx(), z.len())));
    }
    let (len, _) = check_tx_signals(x_pa, rf.n_tx())?;
    if z.iter().any(|s| s.len() != len) {
        return Err(domain("RX and TX signals differ in length"));
    }
    let regen = mimo_filter(x_pa, &rf.channel)?;
    Ok(z.iter()
        .zip(regen)
        .map(|(zi, ri)| {
            let out = zi.samples().iter().zip(&ri).map(|(a, b)| a - b).collect();
            ComplexSignal::from_parts(out, zi.sample_rate())
        })
        .collect())
}
