//! Baseband simulator of a MIMO in-band full-duplex transceiver with RF
//! impairments, and least-squares digital self-interference cancellers.

pub mod canceller;
mod error;
pub mod rng;
pub mod rx_frontend;
pub mod si_channel;
pub mod signal;
pub mod sim;
pub mod tx_chain;
pub mod waveform;

pub use error::{Error, Result};
pub use signal::ComplexSignal;

pub use canceller::{CancellerModel, Term, TermKind, TermSet};
pub use num_complex::Complex64;
pub use sim::{ScenarioConfig, SweepResult, SweepRow};
pub use tx_chain::{PaModel, PaVariant};
