use faer::linalg::solvers::SolveLstsq;
use faer::Mat;
use num_complex::Complex64;

use super::basis::BasisMatrix;
use crate::error::{domain, Error, Result};

/// Condition estimate above which a basis counts as rank deficient.
pub const DEFAULT_CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsOptions {
    /// Tikhonov weight on the equilibrated coefficients. Zero gives plain
    /// least squares.
    pub ridge: f64,
    pub condition_limit: f64,
}

impl Default for LsOptions {
    fn default() -> Self {
        Self { ridge: 0.0, condition_limit: DEFAULT_CONDITION_LIMIT }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsSolution {
    pub coefficients: Vec<Complex64>,
    /// 2-norm condition number of the column-equilibrated basis.
    pub condition: f64,
    /// `‖Ψᴴ(y − Ψh)‖ / (‖Ψ‖_F·‖y‖)`.
    pub orthogonality: f64,
}

/// Least-squares fit of `y ≈ Ψ·h` with default options.
pub fn ls_estimate(psi: &BasisMatrix, y: &[Complex64]) -> Result<LsSolution> {
    ls_estimate_with(psi, y, &LsOptions::default())
}

pub fn ls_estimate_with(psi: &BasisMatrix, y: &[Complex64], opts: &LsOptions) -> Result<LsSolution> {
    Ok(ls_estimate_many(psi, &[y], opts)?.pop().expect("one right-hand side"))
}

/// Solves several right-hand sides against one basis, factoring it once.
///
/// The basis is column-equilibrated and factored by Householder QR; the
/// normal equations are never formed.
pub fn ls_estimate_many(psi: &BasisMatrix, ys: &[&[Complex64]], opts: &LsOptions) -> Result<Vec<LsSolution>> {
    let (rows, cols) = (psi.rows(), psi.cols());
    if cols == 0 {
        return Err(domain("basis has no columns"));
    }
    if rows < cols {
        return Err(domain(format!("{rows} rows cannot determine {cols} coefficients")));
    }
    if let Some(bad) = ys.iter().find(|y| y.len() != rows) {
        return Err(domain(format!("observation has {} samples, basis has {rows} rows", bad.len())));
    }
    if !(opts.ridge.is_finite() && opts.ridge >= 0.0) {
        return Err(domain("ridge weight must be finite and non-negative"));
    }

    let scales: Vec<f64> = (0..cols)
        .map(|k| {
            let n = psi.column(k).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            if n > 0.0 { n } else { 1.0 }
        })
        .collect();
    let aug = if opts.ridge > 0.0 { cols } else { 0 };
    let ridge_diag = Complex64::new(opts.ridge.sqrt(), 0.0);
    let a = Mat::<Complex64>::from_fn(rows + aug, cols, |i, j| {
        if i < rows {
            psi.get(i, j) / scales[j]
        } else if i - rows == j {
            ridge_diag
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let qr = a.qr();

    let sv = qr
        .thin_R()
        .singular_values()
        .map_err(|e| domain(format!("singular value computation failed: {e:?}")))?;
    let (smax, smin) = (sv[0], sv[sv.len() - 1]);
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= opts.condition_limit) {
        return Err(Error::IllConditioned { condition, limit: opts.condition_limit });
    }

    let rhs = Mat::<Complex64>::from_fn(rows + aug, ys.len(), |i, k| {
        if i < rows { ys[k][i] } else { Complex64::new(0.0, 0.0) }
    });
    let z = qr.solve_lstsq(&rhs);

    let psi_norm = psi.frobenius_norm();
    Ok(ys
        .iter()
        .enumerate()
        .map(|(k, y)| {
            let coefficients: Vec<_> = (0..cols).map(|j| z[(j, k)] / scales[j]).collect();
            let fit = psi.mul_vec(&coefficients);
            let e: Vec<_> = y.iter().zip(&fit).map(|(a, b)| a - b).collect();
            let y_norm = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let g = psi.adjoint_mul(&e).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let orthogonality = if y_norm > 0.0 { g / (psi_norm * y_norm) } else { 0.0 };
            LsSolution { coefficients, condition, orthogonality }
        })
        .collect())
}
