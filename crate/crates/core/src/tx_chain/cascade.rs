use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::signal::{monomial, ComplexSignal};
use crate::tx_chain::{IqImbalance, PaModel};

/// FIR filters of the cascade on the monomial basis, keyed by `(p, q)` where
/// the basis function is `x^q · conj(x)^(p−q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeCoefficients {
    filters: BTreeMap<(usize, usize), Vec<Complex64>>,
}

impl CascadeCoefficients {
    pub fn get(&self, p: usize, q: usize) -> Option<&[Complex64]> {
        self.filters.get(&(p, q)).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), &[Complex64])> {
        self.filters.iter().map(|(&k, v)| (k, v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    /// Evaluates `Σ_{p,q,m} h_p^(q,p−q)(m) · x^q(n−m) · conj(x)^(p−q)(n−m)`.
    pub fn evaluate(&self, x: &ComplexSignal) -> ComplexSignal {
        let xs = x.samples();
        let mut y = vec![Complex64::new(0.0, 0.0); xs.len()];
        for (&(p, q), taps) in &self.filters {
            let basis: Vec<_> = xs.iter().map(|&v| monomial(v, p, q)).collect();
            crate::signal::fir_accumulate(&basis, taps, &mut y);
        }
        ComplexSignal::from_parts(y, x.sample_rate())
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Weights `w_q` such that `ψ_p(K1·x + K2·x*) = Σ_q w_q · x^q · x*^(p−q)`.
fn expansion_weights(iq: &IqImbalance, p: usize) -> Vec<Complex64> {
    let (k1, k2) = (iq.k1(), iq.k2());
    let a = p.div_ceil(2);
    let b = p / 2;
    let mut w = vec![Complex64::new(0.0, 0.0); p + 1];
    // (K1 x + K2 x*)^a: i factors of x
    // (K1* x* + K2* x)^b: k factors of x
    for i in 0..=a {
        let u = k1.powu(i as u32) * k2.powu((a - i) as u32) * binomial(a, i);
        for k in 0..=b {
            let v = k2.conj().powu(k as u32) * k1.conj().powu((b - k) as u32) * binomial(b, k);
            w[i + k] += u * v;
        }
    }
    w
}

/// Expands I/Q imbalance followed by a parallel Hammerstein PA onto the
/// widely-linear monomial basis. Each order `p` yields `p + 1` filters.
pub fn cascade_expand(iq: &IqImbalance, pa: &PaModel) -> Result<CascadeCoefficients> {
    let PaModel::ParallelHammerstein { branches } = pa else {
        return Err(domain(format!(
            "cascade expansion needs a parallel Hammerstein PA, got {}",
            pa.variant()
        )));
    };
    let mut filters = BTreeMap::new();
    for b in branches {
        let w = expansion_weights(iq, b.order);
        for (q, &wq) in w.iter().enumerate() {
            filters.insert((b.order, q), b.taps.iter().map(|&h| h * wq).collect());
        }
    }
    Ok(CascadeCoefficients { filters })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tx_chain::{iq_modulate, pa_apply, PhBranch};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample_pa() -> PaModel {
        PaModel::parallel_hammerstein(vec![
            PhBranch { order: 1, taps: vec![c(1.0, 0.2), c(-0.1, 0.05)] },
            PhBranch { order: 3, taps: vec![c(-0.3, 0.1), c(0.02, -0.04)] },
        ])
        .unwrap()
    }

    #[test]
    fn first_order_block_is_k1_k2_times_h1() {
        let iq = IqImbalance::new(1.1, 0.05);
        let pa = sample_pa();
        let cc = cascade_expand(&iq, &pa).unwrap();
        let h1 = [c(1.0, 0.2), c(-0.1, 0.05)];
        for m in 0..2 {
            assert!((cc.get(1, 1).unwrap()[m] - iq.k1() * h1[m]).norm() < 1e-15);
            assert!((cc.get(1, 0).unwrap()[m] - iq.k2() * h1[m]).norm() < 1e-15);
        }
    }

    #[test]
    fn third_order_block_matches_hand_expansion() {
        let iq = IqImbalance::new(0.93, -0.07);
        let cc = cascade_expand(&iq, &sample_pa()).unwrap();
        let (k1, k2) = (iq.k1(), iq.k2());
        let h3 = c(-0.3, 0.1);
        // (K1 x + K2 x*)^2 (K1* x* + K2* x), collected by powers of x
        let expected = [
            (3, k1 * k1 * k2.conj()),
            (2, k1 * k1 * k1.conj() + 2.0 * k1 * k2 * k2.conj()),
            (1, 2.0 * k1 * k2 * k1.conj() + k2 * k2 * k2.conj()),
            (0, k2 * k2 * k1.conj()),
        ];
        for (q, w) in expected {
            assert!((cc.get(3, q).unwrap()[0] - w * h3).norm() < 1e-15);
        }
    }

    #[test]
    fn ideal_modulator_keeps_only_pa_terms() {
        let cc = cascade_expand(&IqImbalance::ideal(), &sample_pa()).unwrap();
        assert_eq!(cc.len(), 2 + 4);
        for ((p, q), taps) in cc.iter() {
            let on_diagonal = q == p.div_ceil(2);
            assert_eq!(taps.iter().any(|t| t.norm() > 0.0), on_diagonal, "({p},{q})");
        }
    }

    #[test]
    fn composition_identity() {
        let iq = IqImbalance::new(1.07, 0.04);
        let pa = sample_pa();
        let x = crate::waveform::generate_ofdm(&Default::default(), 1, 4).unwrap();
        let direct = pa_apply(&iq_modulate(&x, &iq), &pa);
        let expanded = cascade_expand(&iq, &pa).unwrap().evaluate(&x);
        for (u, v) in direct.samples().iter().zip(expanded.samples()) {
            assert!((u - v).norm() <= 1e-12 * (1.0 + u.norm()));
        }
    }

    #[test]
    fn non_ph_models_rejected() {
        let pa = crate::tx_chain::pa_from_specs(
            &Default::default(),
            &crate::tx_chain::MemorySpec::default(),
            0,
        )
        .unwrap();
        assert!(matches!(
            cascade_expand(&IqImbalance::ideal(), &pa),
            Err(crate::Error::Domain(_))
        ));
    }
}
