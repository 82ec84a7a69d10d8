//! Transmitter impairment cascade: I/Q modulator imbalance followed by the
//! power amplifier, plus the analytic expansion of the cascade onto the
//! monomial basis `x^q · conj(x)^(p−q)`.

mod cascade;
mod iq;
mod pa;

pub use cascade::{cascade_expand, CascadeCoefficients};
pub use iq::{iq_from_irr, iq_modulate, irr_db, IqImbalance};
pub use pa::{
    pa_apply, pa_from_specs, psi, HigherOrderAnchor, MemorySpec, PaModel, PaSpec, PaVariant,
    PhBranch, StaticPolynomial,
};
