use fdsim_core::waveform::{generate_ofdm, measure_papr, OfdmConfig};
use num_complex::Complex64;
use rustfft::FftPlanner;

#[test]
fn papr_of_thousand_symbols_near_ten_db() {
    let s = generate_ofdm(&OfdmConfig::default(), 1000, 42).unwrap();
    let papr = measure_papr(&s, 1e-4).unwrap();
    assert!((9.0..=11.0).contains(&papr), "{papr}");
}

#[test]
fn papr_over_a_million_samples() {
    let s = generate_ofdm(&OfdmConfig::default(), 3200, 9).unwrap();
    assert!(s.len() >= 1_000_000);
    let papr = measure_papr(&s, 1e-4).unwrap();
    assert!((papr - 10.0).abs() <= 1.0, "{papr}");
}

#[test]
fn unit_power_and_repeatable() {
    let cfg = OfdmConfig::default();
    let a = generate_ofdm(&cfg, 100, 5).unwrap();
    let b = generate_ofdm(&cfg, 100, 5).unwrap();
    assert!((a.mean_power() - 1.0).abs() < 1e-6);
    assert_eq!(a.samples(), b.samples());
    assert_ne!(a.samples(), generate_ofdm(&cfg, 100, 6).unwrap().samples());
}

// Symbol bodies (CP removed) are exact sums of the data subcarriers, so a
// symbol-aligned FFT finds no energy beyond half the signal bandwidth.
#[test]
fn spectrum_contained_in_signal_bandwidth() {
    let cfg = OfdmConfig::default();
    let s = generate_ofdm(&cfg, 200, 3).unwrap();
    let nfft = cfg.fft_size();
    let cp = cfg.samples_per_symbol() - nfft;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(nfft);
    let edge = (12.5e6 / 2.0 / cfg.subcarrier_spacing()).round() as i64;
    let (mut inb, mut oob) = (0.0, 0.0);
    for sym in s.samples().chunks_exact(cfg.samples_per_symbol()) {
        let mut buf: Vec<Complex64> = sym[cp..].to_vec();
        fft.process(&mut buf);
        for (k, v) in buf.iter().enumerate() {
            let f = if k < nfft / 2 { k as i64 } else { k as i64 - nfft as i64 };
            if f.abs() <= edge {
                inb += v.norm_sqr();
            } else {
                oob += v.norm_sqr();
            }
        }
    }
    let ratio_db = 10.0 * (inb / oob.max(f64::MIN_POSITIVE)).log10();
    assert!(ratio_db >= 40.0, "{ratio_db}");
}
