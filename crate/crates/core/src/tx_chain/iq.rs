use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::signal::ComplexSignal;

/// Frequency-independent I/Q modulator imbalance.
///
/// With gain ratio `g` and phase error `phi`, the modulator output is
/// `k1·x + k2·conj(x)` where `k1 = (1 + g·e^{jφ})/2` and `k2 = (1 − g·e^{jφ})/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IqImbalance {
    g: f64,
    phi: f64,
    k1: Complex64,
    k2: Complex64,
}

impl IqImbalance {
    pub fn new(g: f64, phi: f64) -> Self {
        let w = Complex64::from_polar(g, phi);
        Self {
            g,
            phi,
            k1: (1.0 + w) * 0.5,
            k2: (1.0 - w) * 0.5,
        }
    }

    pub fn ideal() -> Self {
        Self::new(1.0, 0.0)
    }

    pub fn gain(&self) -> f64 {
        self.g
    }

    pub fn phase(&self) -> f64 {
        self.phi
    }

    pub fn k1(&self) -> Complex64 {
        self.k1
    }

    pub fn k2(&self) -> Complex64 {
        self.k2
    }

    #[inline]
    pub fn apply(&self, x: Complex64) -> Complex64 {
        self.k1 * x + self.k2 * x.conj()
    }

    /// Image rejection ratio `10·log10(|k1|²/|k2|²)`; `+∞` for an ideal
    /// modulator.
    pub fn irr_db(&self) -> f64 {
        let k2 = self.k2.norm_sqr();
        if k2 == 0.0 {
            return f64::INFINITY;
        }
        10.0 * (self.k1.norm_sqr() / k2).log10()
    }
}

pub fn iq_modulate(x: &ComplexSignal, iq: &IqImbalance) -> ComplexSignal {
    x.map(|s| iq.apply(s))
}

pub fn irr_db(iq: &IqImbalance) -> f64 {
    iq.irr_db()
}

/// Builds an imbalance with the requested IRR.
///
/// The image-to-direct ratio `k2/k1 = −r·e^{jπs/2}` with `r = 10^(−irr/20)` is
/// rotated by `phase_split = s`: `s = 0` gives a pure gain imbalance,
/// `s = 1` a pure phase imbalance, intermediate values mix the two.
pub fn iq_from_irr(irr: f64, phase_split: f64) -> Result<IqImbalance> {
    if irr.is_nan() || irr <= 0.0 {
        return Err(domain(format!("IRR must be positive, got {irr} dB")));
    }
    if !(0.0..=1.0).contains(&phase_split) {
        return Err(domain(format!("phase split {phase_split} outside [0, 1]")));
    }
    if irr.is_infinite() {
        return Ok(IqImbalance::ideal());
    }
    let r = 10f64.powf(-irr / 20.0);
    let rho = -Complex64::from_polar(r, FRAC_PI_2 * phase_split);
    // k2/k1 = (1 − w)/(1 + w)  ⇒  w = (1 − ρ)/(1 + ρ)
    let w = (1.0 - rho) / (1.0 + rho);
    Ok(IqImbalance::new(w.norm(), w.arg()))
}
