use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Error, Result};
use crate::rng::rng_from_seed;
use crate::signal::{complex_gaussian, dbm_to_watts, fir_filter, ComplexSignal};

/// Odd-order PA basis function `|x|^(p−1)·x`.
#[inline]
pub fn psi(x: Complex64, p: usize) -> Complex64 {
    if p == 1 {
        return x;
    }
    x * x.norm_sqr().powi(((p - 1) / 2) as i32)
}

/// Memoryless odd-order polynomial `Σ a_p·|x|^(p−1)·x`, `p = 1, 3, 5, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticPolynomial {
    /// `coeffs[k]` multiplies the order `2k + 1` term.
    coeffs: Vec<Complex64>,
}

impl StaticPolynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(domain("static polynomial needs at least the linear term"));
        }
        Ok(Self { coeffs })
    }

    pub fn linear(gain: Complex64) -> Self {
        Self { coeffs: vec![gain] }
    }

    pub fn order(&self) -> usize {
        2 * self.coeffs.len() - 1
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of order `p` (zero for even or absent orders).
    pub fn coeff(&self, p: usize) -> Complex64 {
        if p % 2 == 0 {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs.get((p - 1) / 2).copied().unwrap_or_default()
    }

    #[inline]
    pub fn eval(&self, x: Complex64) -> Complex64 {
        let r = x.norm_sqr();
        let mut acc = Complex64::new(0.0, 0.0);
        for &a in self.coeffs.iter().rev() {
            acc = acc * r + a;
        }
        acc * x
    }
}

/// One branch of a parallel Hammerstein model: `h_p * psi_p(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhBranch {
    pub order: usize,
    pub taps: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PaVariant {
    #[serde(alias = "ph")]
    ParallelHammerstein,
    Hammerstein,
    Wiener,
}

impl fmt::Display for PaVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PaVariant::ParallelHammerstein => "ph",
            PaVariant::Hammerstein => "hammerstein",
            PaVariant::Wiener => "wiener",
        })
    }
}

impl FromStr for PaVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ph" | "parallel-hammerstein" => Ok(PaVariant::ParallelHammerstein),
            "hammerstein" => Ok(PaVariant::Hammerstein),
            "wiener" => Ok(PaVariant::Wiener),
            other => Err(Error::Parse(format!("unknown PA model '{other}'"))),
        }
    }
}

/// Behavioral power-amplifier model.
#[derive(Debug, Clone, PartialEq)]
pub enum PaModel {
    /// Sum of odd-order basis functions, each through its own FIR filter.
    ParallelHammerstein { branches: Vec<PhBranch> },
    /// Static polynomial followed by an FIR filter.
    Hammerstein { nonlinearity: StaticPolynomial, filter: Vec<Complex64> },
    /// FIR filter followed by a static polynomial.
    Wiener { filter: Vec<Complex64>, nonlinearity: StaticPolynomial },
}

impl PaModel {
    pub fn parallel_hammerstein(mut branches: Vec<PhBranch>) -> Result<Self> {
        if branches.is_empty() {
            return Err(domain("parallel Hammerstein model without branches"));
        }
        branches.sort_by_key(|b| b.order);
        for w in branches.windows(2) {
            if w[0].order == w[1].order {
                return Err(domain(format!("duplicate branch of order {}", w[0].order)));
            }
        }
        for b in &branches {
            if b.order % 2 == 0 {
                return Err(domain(format!("branch order {} is not odd", b.order)));
            }
            if b.taps.is_empty() {
                return Err(domain("branch filter needs at least one tap"));
            }
        }
        Ok(PaModel::ParallelHammerstein { branches })
    }

    pub fn hammerstein(nonlinearity: StaticPolynomial, filter: Vec<Complex64>) -> Result<Self> {
        if filter.is_empty() {
            return Err(domain("Hammerstein filter needs at least one tap"));
        }
        Ok(PaModel::Hammerstein { nonlinearity, filter })
    }

    pub fn wiener(filter: Vec<Complex64>, nonlinearity: StaticPolynomial) -> Result<Self> {
        if filter.is_empty() {
            return Err(domain("Wiener filter needs at least one tap"));
        }
        Ok(PaModel::Wiener { filter, nonlinearity })
    }

    pub fn variant(&self) -> PaVariant {
        match self {
            PaModel::ParallelHammerstein { .. } => PaVariant::ParallelHammerstein,
            PaModel::Hammerstein { .. } => PaVariant::Hammerstein,
            PaModel::Wiener { .. } => PaVariant::Wiener,
        }
    }

    /// Highest nonlinearity order `P`.
    pub fn order(&self) -> usize {
        match self {
            PaModel::ParallelHammerstein { branches } => {
                branches.iter().map(|b| b.order).max().unwrap_or(1)
            }
            PaModel::Hammerstein { nonlinearity, .. } | PaModel::Wiener { nonlinearity, .. } => {
                nonlinearity.order()
            }
        }
    }

    /// Memory depth `M` (filter length minus one).
    pub fn memory_depth(&self) -> usize {
        match self {
            PaModel::ParallelHammerstein { branches } => {
                branches.iter().map(|b| b.taps.len()).max().unwrap_or(1) - 1
            }
            PaModel::Hammerstein { filter, .. } | PaModel::Wiener { filter, .. } => filter.len() - 1,
        }
    }

    /// Impulse response of the small-signal (linear) part.
    pub fn small_signal_response(&self) -> Vec<Complex64> {
        match self {
            PaModel::ParallelHammerstein { branches } => branches
                .iter()
                .find(|b| b.order == 1)
                .map(|b| b.taps.clone())
                .unwrap_or_else(|| vec![Complex64::new(0.0, 0.0)]),
            PaModel::Hammerstein { nonlinearity, filter }
            | PaModel::Wiener { filter, nonlinearity } => {
                let a1 = nonlinearity.coeff(1);
                filter.iter().map(|&f| f * a1).collect()
            }
        }
    }

    /// Rewrites a Hammerstein model as the equivalent parallel Hammerstein
    /// model (`h_p = a_p·f`). Wiener models have no such form.
    pub fn to_parallel_hammerstein(&self) -> Option<PaModel> {
        match self {
            PaModel::ParallelHammerstein { .. } => Some(self.clone()),
            PaModel::Hammerstein { nonlinearity, filter } => {
                let branches = nonlinearity
                    .coefficients()
                    .iter()
                    .enumerate()
                    .map(|(k, &a)| PhBranch {
                        order: 2 * k + 1,
                        taps: filter.iter().map(|&f| f * a).collect(),
                    })
                    .collect();
                Some(PaModel::ParallelHammerstein { branches })
            }
            PaModel::Wiener { .. } => None,
        }
    }
}

/// Runs `x` through the PA model (zero prehistory, length preserved).
pub fn pa_apply(x: &ComplexSignal, pa: &PaModel) -> ComplexSignal {
    let xs = x.samples();
    let out = match pa {
        PaModel::ParallelHammerstein { branches } => {
            let mut y = vec![Complex64::new(0.0, 0.0); xs.len()];
            for b in branches {
                let basis: Vec<_> = xs.iter().map(|&v| psi(v, b.order)).collect();
                crate::signal::fir_accumulate(&basis, &b.taps, &mut y);
            }
            y
        }
        PaModel::Hammerstein { nonlinearity, filter } => {
            let static_out: Vec<_> = xs.iter().map(|&v| nonlinearity.eval(v)).collect();
            fir_filter(&static_out, filter)
        }
        PaModel::Wiener { filter, nonlinearity } => {
            let mut u = fir_filter(xs, filter);
            u.iter_mut().for_each(|v| *v = nonlinearity.eval(*v));
            u
        }
    };
    ComplexSignal::from_parts(out, x.sample_rate())
}

/// Strength of the orders above three, anchored at an input back-off from
/// IIP3: at input power `iip3 − backoff_db`, each order-`p` term of the static
/// polynomial is `relative_db` below the order-`p−2` term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HigherOrderAnchor {
    pub backoff_db: f64,
    pub relative_db: f64,
}

impl Default for HigherOrderAnchor {
    fn default() -> Self {
        Self { backoff_db: 10.0, relative_db: 10.0 }
    }
}

/// Datasheet-level PA description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PaSpec {
    pub gain_db: f64,
    pub iip3_dbm: f64,
    pub order: usize,
    pub anchor: HigherOrderAnchor,
}

impl Default for PaSpec {
    fn default() -> Self {
        Self { gain_db: 27.0, iip3_dbm: 13.0, order: 5, anchor: HigherOrderAnchor::default() }
    }
}

/// Lowest IIP3 accepted; anything below is far under the thermal noise of
/// any realistic front end.
const MIN_IIP3_DBM: f64 = -100.0;

impl PaSpec {
    pub fn validate(&self) -> Result<()> {
        if self.order == 0 || self.order % 2 == 0 {
            return Err(config(format!("PA order must be odd and positive, got {}", self.order)));
        }
        if !self.gain_db.is_finite() {
            return Err(config("PA gain must be finite"));
        }
        if !self.iip3_dbm.is_finite() || self.iip3_dbm < MIN_IIP3_DBM {
            return Err(config(format!("PA IIP3 of {} dBm is not meaningful", self.iip3_dbm)));
        }
        if !(self.anchor.backoff_db.is_finite() && self.anchor.relative_db.is_finite()) {
            return Err(config("higher-order anchor must be finite"));
        }
        Ok(())
    }

    /// Memoryless polynomial core.
    ///
    /// `a1 = 10^(gain/20)`. For the complex-baseband two-tone test a tone of
    /// amplitude `A` has power `A²`, and the third-order intermod tone equals
    /// the fundamental when `|a3|·A² = |a1|`, so `|a3| = |a1|/P_iip3` with
    /// `P_iip3` in watts. Signs alternate (−, +, −, ...) as in the series of a
    /// saturating characteristic.
    pub fn static_polynomial(&self) -> Result<StaticPolynomial> {
        self.validate()?;
        let a1 = 10f64.powf(self.gain_db / 20.0);
        let mut coeffs = vec![Complex64::new(a1, 0.0)];
        if self.order >= 3 {
            let a3 = a1 / dbm_to_watts(self.iip3_dbm);
            coeffs.push(Complex64::new(-a3, 0.0));
            let anchor_power = dbm_to_watts(self.iip3_dbm - self.anchor.backoff_db);
            let step = 10f64.powf(-self.anchor.relative_db / 20.0) / anchor_power;
            let mut mag = a3;
            for k in 2..=(self.order - 1) / 2 {
                mag *= step;
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                coeffs.push(Complex64::new(sign * mag, 0.0));
            }
        }
        StaticPolynomial::new(coeffs)
    }
}

/// How PA memory is realized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MemorySpec {
    pub variant: PaVariant,
    /// FIR length; `1` makes the model memoryless.
    pub taps: usize,
    /// Power decay of the random taps after the main tap, dB per tap.
    pub decay_db_per_tap: f64,
}

impl Default for MemorySpec {
    fn default() -> Self {
        Self { variant: PaVariant::Hammerstein, taps: 5, decay_db_per_tap: 10.0 }
    }
}

impl MemorySpec {
    pub fn memoryless(variant: PaVariant) -> Self {
        Self { variant, taps: 1, decay_db_per_tap: 10.0 }
    }
}

/// Main tap 1, later taps complex Gaussian on an exponential power profile,
/// normalized to unit energy.
fn draw_memory_filter<R: rand::Rng + ?Sized>(rng: &mut R, spec: &MemorySpec) -> Vec<Complex64> {
    let mut taps = vec![Complex64::new(1.0, 0.0)];
    for m in 1..spec.taps {
        let var = 10f64.powf(-spec.decay_db_per_tap * m as f64 / 10.0);
        taps.push(complex_gaussian(rng, var));
    }
    let energy: f64 = taps.iter().map(|t| t.norm_sqr()).sum();
    let norm = energy.sqrt().recip();
    taps.iter_mut().for_each(|t| *t *= norm);
    taps
}

/// Builds a PA model from gain, IIP3 and order, with memory drawn from `seed`.
pub fn pa_from_specs(spec: &PaSpec, memory: &MemorySpec, seed: u64) -> Result<PaModel> {
    let poly = spec.static_polynomial()?;
    if memory.taps == 0 {
        return Err(config("PA memory needs at least one tap"));
    }
    if !memory.decay_db_per_tap.is_finite() {
        return Err(config("PA tap decay must be finite"));
    }
    let mut rng = rng_from_seed(seed);
    match memory.variant {
        PaVariant::Hammerstein => PaModel::hammerstein(poly, draw_memory_filter(&mut rng, memory)),
        PaVariant::Wiener => PaModel::wiener(draw_memory_filter(&mut rng, memory), poly),
        PaVariant::ParallelHammerstein => {
            let branches = poly
                .coefficients()
                .iter()
                .enumerate()
                .map(|(k, &a)| PhBranch {
                    order: 2 * k + 1,
                    taps: draw_memory_filter(&mut rng, memory).into_iter().map(|f| f * a).collect(),
                })
                .collect();
            PaModel::parallel_hammerstein(branches)
        }
    }
}
