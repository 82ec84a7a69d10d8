use faer::MatRef;
use num_complex::Complex64;

use super::terms::{Term, TermSet};
use crate::error::{domain, Result};
use crate::signal::{monomial, ComplexSignal};

/// Meaning of one basis column: term `(p, q)` of transmitter `tx` delayed by `lag`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColumnIndex {
    pub tx: usize,
    pub term: Term,
    pub lag: usize,
}

/// Column-major basis matrix. Columns are ordered by transmitter, then term,
/// then lag.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisMatrix {
    data: Vec<Complex64>,
    rows: usize,
    columns: Vec<ColumnIndex>,
    scales: Option<Vec<f64>>,
}

impl BasisMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[ColumnIndex] {
        &self.columns
    }

    pub fn column(&self, k: usize) -> &[Complex64] {
        &self.data[k * self.rows..(k + 1) * self.rows]
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[col * self.rows + row]
    }

    pub fn as_faer(&self) -> MatRef<'_, Complex64> {
        MatRef::from_column_major_slice(&self.data, self.rows, self.cols())
    }

    /// Scales every column to unit norm and records the original norms.
    /// Columns that are identically zero keep scale 1.
    pub fn equilibrate(&mut self) {
        if self.scales.is_some() {
            return;
        }
        let rows = self.rows;
        let scales = self
            .data
            .chunks_exact_mut(rows)
            .map(|col| {
                let norm = col.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
                if norm > 0.0 {
                    let inv = norm.recip();
                    col.iter_mut().for_each(|v| *v *= inv);
                    norm
                } else {
                    1.0
                }
            })
            .collect();
        self.scales = Some(scales);
    }

    /// Column norms removed by [`equilibrate`](Self::equilibrate), if applied.
    pub fn scales(&self) -> Option<&[f64]> {
        self.scales.as_deref()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `Ψ·h`.
    pub fn mul_vec(&self, h: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(h.len(), self.cols());
        let mut y = vec![Complex64::new(0.0, 0.0); self.rows];
        for (k, &c) in h.iter().enumerate() {
            for (out, &v) in y.iter_mut().zip(self.column(k)) {
                *out += c * v;
            }
        }
        y
    }

    /// `Ψᴴ·e`.
    pub fn adjoint_mul(&self, e: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(e.len(), self.rows);
        (0..self.cols())
            .map(|k| self.column(k).iter().zip(e).map(|(v, x)| v.conj() * x).sum())
            .collect()
    }
}

/// Builds the basis with the same number of lags for every term.
pub fn build_basis_matrix(
    x: &[ComplexSignal],
    ts: &TermSet,
    memory: usize,
    rows: usize,
    offset: usize,
) -> Result<BasisMatrix> {
    build_basis_matrix_with_lags(x, ts, &vec![memory; ts.len()], rows, offset)
}

/// Builds the basis with `lags[k]` delays of term `k`. Row `n` uses samples
/// `offset + n − m`, so `offset` must leave room for the longest memory.
pub fn build_basis_matrix_with_lags(
    x: &[ComplexSignal],
    ts: &TermSet,
    lags: &[usize],
    rows: usize,
    offset: usize,
) -> Result<BasisMatrix> {
    if x.is_empty() {
        return Err(domain("basis needs at least one transmit signal"));
    }
    if lags.len() != ts.len() {
        return Err(domain("one memory length per term is required"));
    }
    if lags.contains(&0) {
        return Err(domain("memory length must be at least one tap"));
    }
    if rows == 0 {
        return Err(domain("basis needs at least one row"));
    }
    let len = x[0].len();
    if x.iter().any(|s| s.len() != len) {
        return Err(domain("transmit signals differ in length"));
    }
    let max_lag = lags.iter().copied().max().unwrap_or(1);
    if offset + 1 < max_lag || offset + rows > len {
        return Err(domain(format!(
            "{len} samples cannot supply {rows} rows at offset {offset} with {max_lag} lags"
        )));
    }

    let n_cols = x.len() * lags.iter().sum::<usize>();
    let mut data = Vec::with_capacity(n_cols * rows);
    let mut columns = Vec::with_capacity(n_cols);
    let start = offset + 1 - max_lag;
    for (tx, xj) in x.iter().enumerate() {
        let src = &xj.samples()[start..offset + rows];
        for (&term, &m_len) in ts.terms().iter().zip(lags) {
            let mono: Vec<_> = src.iter().map(|&v| monomial(v, term.p, term.q)).collect();
            for lag in 0..m_len {
                // row n ↔ mono index (offset + n − lag) − start
                let first = offset - lag - start;
                data.extend_from_slice(&mono[first..first + rows]);
                columns.push(ColumnIndex { tx, term, lag });
            }
        }
    }
    Ok(BasisMatrix { data, rows, columns, scales: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canceller::terms::{make_term_set, TermKind};

    fn ramp(n: usize) -> ComplexSignal {
        ComplexSignal::new((0..n).map(|k| Complex64::new(k as f64, -(k as f64) * 0.5)).collect(), 1.0).unwrap()
    }

    #[test]
    fn linear_basis_is_toeplitz() {
        let x = ramp(20);
        let ts = make_term_set(TermKind::Linear).unwrap();
        let b = build_basis_matrix(std::slice::from_ref(&x), &ts, 3, 10, 2).unwrap();
        assert_eq!((b.rows(), b.cols()), (10, 3));
        for n in 0..10 {
            for m in 0..3 {
                assert_eq!(b.get(n, m), x.samples()[2 + n - m]);
            }
        }
    }

    #[test]
    fn joint_full_column_count() {
        let x = crate::waveform::generate_ofdm(&Default::default(), 1, 1).unwrap();
        let ts = make_term_set(TermKind::JointFull(5)).unwrap();
        let b = build_basis_matrix(&[x.clone(), x], &ts, 10, 100, 9).unwrap();
        assert_eq!(b.cols(), 240);
        let c = b.columns()[12 * 10 + 3 * 10 + 4];
        assert_eq!(c, ColumnIndex { tx: 1, term: Term::new(3, 2), lag: 4 });
    }

    #[test]
    fn entries_are_monomials() {
        let x = crate::waveform::generate_ofdm(&Default::default(), 1, 2).unwrap();
        let ts = make_term_set(TermKind::JointFull(3)).unwrap();
        let b = build_basis_matrix(std::slice::from_ref(&x), &ts, 4, 50, 10).unwrap();
        for (k, c) in b.columns().iter().enumerate() {
            for n in 0..50 {
                let v = x.samples()[10 + n - c.lag];
                let expected = v.powu(c.term.q as u32) * v.conj().powu((c.term.p - c.term.q) as u32);
                assert!((b.get(n, k) - expected).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn insufficient_samples_rejected() {
        let x = ramp(20);
        let ts = make_term_set(TermKind::Linear).unwrap();
        assert!(build_basis_matrix(std::slice::from_ref(&x), &ts, 3, 10, 1).is_err());
        assert!(build_basis_matrix(std::slice::from_ref(&x), &ts, 3, 19, 2).is_err());
        assert!(build_basis_matrix(std::slice::from_ref(&x), &ts, 0, 5, 2).is_err());
    }

    #[test]
    fn equilibration_records_norms() {
        let x = ramp(30);
        let ts = make_term_set(TermKind::PaOnly(3)).unwrap();
        let raw = build_basis_matrix(std::slice::from_ref(&x), &ts, 2, 20, 5).unwrap();
        let mut eq = raw.clone();
        eq.equilibrate();
        let scales = eq.scales().unwrap().to_vec();
        for k in 0..raw.cols() {
            let norm: f64 = eq.column(k).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
            for n in 0..raw.rows() {
                assert!((eq.get(n, k) * scales[k] - raw.get(n, k)).norm() <= 1e-12 * raw.get(n, k).norm());
            }
        }
    }

    #[test]
    fn per_term_lags() {
        let x = ramp(40);
        let ts = make_term_set(TermKind::PaOnly(3)).unwrap();
        let b = build_basis_matrix_with_lags(std::slice::from_ref(&x), &ts, &[4, 1], 10, 5).unwrap();
        assert_eq!(b.cols(), 5);
        assert_eq!(b.columns()[4], ColumnIndex { tx: 0, term: Term::new(3, 2), lag: 0 });
    }
}
