//! Shared inputs for the benchmarks.

use fdsim_core::waveform::{generate_ofdm, OfdmConfig};
use fdsim_core::ComplexSignal;

/// `n_tx` unit-power OFDM streams of at least `len` samples.
pub fn transmit_signals(n_tx: usize, len: usize, seed: u64) -> Vec<ComplexSignal> {
    let cfg = OfdmConfig::default();
    (0..n_tx as u64)
        .map(|j| generate_ofdm(&cfg, cfg.symbols_for(len), seed + j).unwrap())
        .collect()
}
