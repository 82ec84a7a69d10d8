use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::basis::build_basis_matrix_with_lags;
use super::ls::{ls_estimate_many, LsOptions};
use super::terms::{Term, TermKind, TermSet};
use crate::error::{domain, Error, Result};
use crate::signal::{fir_accumulate, monomial, ComplexSignal};

/// Fitted digital canceller: one FIR per (RX, TX, term).
#[derive(Debug, Clone, PartialEq)]
pub struct CancellerModel {
    term_set: TermSet,
    lags: Vec<usize>,
    n_tx: usize,
    /// Per receiver, coefficients in basis column order (TX, term, lag).
    coefficients: Vec<Vec<Complex64>>,
}

impl CancellerModel {
    pub fn new(
        term_set: TermSet,
        lags: Vec<usize>,
        n_tx: usize,
        coefficients: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        term_set.validate()?;
        if lags.len() != term_set.len() || lags.contains(&0) {
            return Err(domain("one positive memory length per term is required"));
        }
        if n_tx == 0 || coefficients.is_empty() {
            return Err(domain("canceller needs at least one TX and one RX"));
        }
        let per_rx = n_tx * lags.iter().sum::<usize>();
        if coefficients.iter().any(|c| c.len() != per_rx) {
            return Err(domain(format!("each receiver needs {per_rx} coefficients")));
        }
        if coefficients.iter().flatten().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(domain("non-finite canceller coefficient"));
        }
        Ok(Self { term_set, lags, n_tx, coefficients })
    }

    pub fn term_set(&self) -> &TermSet {
        &self.term_set
    }

    /// Longest memory over all terms.
    pub fn memory(&self) -> usize {
        self.lags.iter().copied().max().unwrap_or(1)
    }

    pub fn lags(&self) -> &[usize] {
        &self.lags
    }

    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    pub fn n_rx(&self) -> usize {
        self.coefficients.len()
    }

    fn block_start(&self, tx: usize, term: usize) -> usize {
        let per_tx: usize = self.lags.iter().sum();
        tx * per_tx + self.lags[..term].iter().sum::<usize>()
    }

    /// Filter of term index `term` from transmitter `tx` into receiver `rx`.
    pub fn filter(&self, rx: usize, tx: usize, term: usize) -> &[Complex64] {
        let s = self.block_start(tx, term);
        &self.coefficients[rx][s..s + self.lags[term]]
    }

    /// All coefficients of one receiver in basis column order.
    pub fn receiver_coefficients(&self, rx: usize) -> &[Complex64] {
        &self.coefficients[rx]
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&ModelFile::from(self)).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        file.into_model()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

const MODEL_FORMAT: &str = "fdsim-canceller-model";
const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format: String,
    version: u32,
    term_set: TermKind,
    n_tx: usize,
    n_rx: usize,
    terms: Vec<TermEntry>,
    filters: Vec<FilterEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermEntry {
    p: usize,
    q: usize,
    memory: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FilterEntry {
    rx: usize,
    tx: usize,
    p: usize,
    q: usize,
    /// `[re, im]` per lag.
    taps: Vec<[f64; 2]>,
}

impl From<&CancellerModel> for ModelFile {
    fn from(m: &CancellerModel) -> Self {
        let terms = m
            .term_set
            .terms()
            .iter()
            .zip(&m.lags)
            .map(|(t, &memory)| TermEntry { p: t.p, q: t.q, memory })
            .collect();
        let mut filters = Vec::new();
        for rx in 0..m.n_rx() {
            for tx in 0..m.n_tx {
                for (k, t) in m.term_set.terms().iter().enumerate() {
                    filters.push(FilterEntry {
                        rx,
                        tx,
                        p: t.p,
                        q: t.q,
                        taps: m.filter(rx, tx, k).iter().map(|c| [c.re, c.im]).collect(),
                    });
                }
            }
        }
        ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            term_set: m.term_set.kind(),
            n_tx: m.n_tx,
            n_rx: m.n_rx(),
            terms,
            filters,
        }
    }
}

impl ModelFile {
    fn into_model(self) -> Result<CancellerModel> {
        if self.format != MODEL_FORMAT || self.version != MODEL_VERSION {
            return Err(Error::Parse(format!(
                "unsupported model file '{}' version {}",
                self.format, self.version
            )));
        }
        let terms: Vec<Term> = self.terms.iter().map(|t| Term::new(t.p, t.q)).collect();
        let lags: Vec<usize> = self.terms.iter().map(|t| t.memory).collect();
        let term_set = match self.term_set {
            TermKind::Custom => TermSet::custom(terms.clone())?,
            kind => TermSet::new(kind)?,
        };
        if term_set.terms() != terms.as_slice() {
            return Err(Error::Parse(format!("term list does not match '{}'", self.term_set)));
        }
        if lags.contains(&0) {
            return Err(Error::Parse("memory length must be positive".into()));
        }
        let per_tx: usize = lags.iter().sum();
        let mut coefficients = vec![vec![Complex64::new(0.0, 0.0); self.n_tx * per_tx]; self.n_rx];
        let mut seen = vec![false; self.n_rx * self.n_tx * terms.len()];
        for f in self.filters {
            let k = terms
                .iter()
                .position(|t| *t == Term::new(f.p, f.q))
                .ok_or_else(|| Error::Parse(format!("filter for unknown term ({},{})", f.p, f.q)))?;
            if f.rx >= self.n_rx || f.tx >= self.n_tx || f.taps.len() != lags[k] {
                return Err(Error::Parse(format!("malformed filter rx {} tx {} ({},{})", f.rx, f.tx, f.p, f.q)));
            }
            let slot = (f.rx * self.n_tx + f.tx) * terms.len() + k;
            if std::mem::replace(&mut seen[slot], true) {
                return Err(Error::Parse(format!("duplicate filter rx {} tx {} ({},{})", f.rx, f.tx, f.p, f.q)));
            }
            let start = f.tx * per_tx + lags[..k].iter().sum::<usize>();
            for (dst, [re, im]) in coefficients[f.rx][start..].iter_mut().zip(f.taps) {
                *dst = Complex64::new(re, im);
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Parse("model file lacks some filters".into()));
        }
        CancellerModel::new(term_set, lags, self.n_tx, coefficients)
    }
}

/// Fit quality of one receiver's solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitDiagnostics {
    pub condition: f64,
    pub orthogonality: f64,
}

/// Estimates a canceller from `rows` samples starting at `offset` of the
/// transmit baseband `x` and received `y`. The basis is factored once and
/// shared by all receivers.
pub fn fit_canceller(
    x: &[ComplexSignal],
    y: &[ComplexSignal],
    term_set: &TermSet,
    lags: &[usize],
    rows: usize,
    offset: usize,
    opts: &LsOptions,
) -> Result<(CancellerModel, Vec<FitDiagnostics>)> {
    if y.is_empty() {
        return Err(domain("no receiver signals"));
    }
    if y.iter().any(|s| s.len() < offset + rows) {
        return Err(domain("received signal shorter than the estimation block"));
    }
    let psi = build_basis_matrix_with_lags(x, term_set, lags, rows, offset)?;
    let obs: Vec<&[Complex64]> = y.iter().map(|s| &s.samples()[offset..offset + rows]).collect();
    let sols = ls_estimate_many(&psi, &obs, opts)?;
    let diags = sols
        .iter()
        .map(|s| FitDiagnostics { condition: s.condition, orthogonality: s.orthogonality })
        .collect();
    let coefficients = sols.into_iter().map(|s| s.coefficients).collect();
    let model = CancellerModel::new(term_set.clone(), lags.to_vec(), x.len(), coefficients)?;
    Ok((model, diags))
}

/// Regenerates the SI at every receiver over the full length of `x` (zero
/// prehistory).
pub fn regenerate_si(model: &CancellerModel, x: &[ComplexSignal]) -> Result<Vec<ComplexSignal>> {
    if x.len() != model.n_tx() {
        return Err(domain(format!("model expects {} TX signals, got {}", model.n_tx(), x.len())));
    }
    let len = x[0].len();
    let fs = x[0].sample_rate();
    if x.iter().any(|s| s.len() != len) {
        return Err(domain("transmit signals differ in length"));
    }
    let mut out = vec![vec![Complex64::new(0.0, 0.0); len]; model.n_rx()];
    for (tx, xj) in x.iter().enumerate() {
        for (k, t) in model.term_set().terms().iter().enumerate() {
            let basis: Vec<_> = xj.samples().iter().map(|&v| monomial(v, t.p, t.q)).collect();
            for (rx, acc) in out.iter_mut().enumerate() {
                fir_accumulate(&basis, model.filter(rx, tx, k), acc);
            }
        }
    }
    Ok(out.into_iter().map(|v| ComplexSignal::from_parts(v, fs)).collect())
}

/// `ŝ_i = y_i − r̂_i`.
pub fn cancel(y: &[ComplexSignal], r_hat: &[ComplexSignal]) -> Result<Vec<ComplexSignal>> {
    if y.len() != r_hat.len() {
        return Err(domain(format!("{} received vs {} regenerated signals", y.len(), r_hat.len())));
    }
    y.iter()
        .zip(r_hat)
        .map(|(a, b)| {
            if a.len() != b.len() {
                return Err(domain("received and regenerated signals differ in length"));
            }
            let v = a.samples().iter().zip(b.samples()).map(|(u, w)| u - w).collect();
            Ok(ComplexSignal::from_parts(v, a.sample_rate()))
        })
        .collect()
}
