//! Small dense helpers on top of nalgebra: jittered Cholesky and Gaussians in
//! canonical (precision) form.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Relative diagonal jitter added when a factorization fails.
pub const JITTER_REL: f64 = 1e-10;

/// Cholesky factorization that retries once with
/// `JITTER_REL * mean(diag)` added to the diagonal.
pub fn cholesky_jittered(m: DMatrix<f64>, context: &str) -> Result<Cholesky<f64, Dyn>> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("{context}: matrix has non-finite entries")));
    }
    let n = m.nrows();
    let mean_diag = if n == 0 { 0.0 } else { m.diagonal().sum() / n as f64 };
    match Cholesky::new(m.clone()) {
        Some(c) => Ok(c),
        None => {
            let mut jittered = m;
            let jitter = JITTER_REL * mean_diag.abs().max(f64::MIN_POSITIVE);
            for i in 0..n {
                jittered[(i, i)] += jitter;
            }
            Cholesky::new(jittered).ok_or_else(|| {
                Error::Numeric(format!("{context}: matrix is not positive definite"))
            })
        }
    }
}

/// Inverse of a symmetric positive-definite matrix.
pub fn spd_inverse(m: &DMatrix<f64>, context: &str) -> Result<DMatrix<f64>> {
    Ok(cholesky_jittered(m.clone(), context)?.inverse())
}

/// Multivariate normal held as `precision` and `mean = precision^-1 * rhs`.
#[derive(Debug, Clone)]
pub struct CanonicalGaussian {
    pub mean: DVector<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl CanonicalGaussian {
    pub fn new(precision: DMatrix<f64>, rhs: &DVector<f64>, context: &str) -> Result<Self> {
        let chol = cholesky_jittered(precision, context)?;
        let mean = chol.solve(rhs);
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("{context}: posterior mean is not finite")));
        }
        Ok(Self { mean, chol })
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        self.chol.inverse()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// `mean + L^-T e` where `precision = L L^T`.
    pub fn sample(&self, rng: &mut RngStream) -> DVector<f64> {
        let e = DVector::from_fn(self.dim(), |_, _| rng.std_normal());
        let l = self.chol.l_dirty();
        let offset = l
            .tr_solve_lower_triangular(&e)
            .expect("Cholesky factor has a positive diagonal");
        &self.mean + offset
    }
}
