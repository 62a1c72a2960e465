use nalgebra::{DMatrix, DVector};

use crate::distributions::QuantileConstants;
use crate::error::{Error, Result};
use crate::linalg::spd_inverse;

/// Prior hyperparameters in moment form.
///
/// `sigma_alpha_sq ~ IG(c1 / 2, d1 / 2)` with density proportional to
/// `x^-(c1/2 + 1) exp(-d1 / (2x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Prior {
    pub beta_mean: DVector<f64>,
    pub beta_cov: DMatrix<f64>,
    pub zeta_mean: DVector<f64>,
    pub zeta_cov: DMatrix<f64>,
    pub c1: f64,
    pub d1: f64,
}

impl Prior {
    /// Isotropic normal priors centred at zero with the given variances.
    pub fn isotropic(k: usize, q: usize, beta_var: f64, zeta_var: f64, c1: f64, d1: f64) -> Self {
        Self {
            beta_mean: DVector::zeros(k),
            beta_cov: DMatrix::identity(k, k) * beta_var,
            zeta_mean: DVector::zeros(q),
            zeta_cov: DMatrix::identity(q, q) * zeta_var,
            c1,
            d1,
        }
    }

    /// `beta ~ N(0, 1000 I)`, `zeta ~ N(0, 1000 I)`, `sigma_alpha_sq ~ IG(5, 4.5)`.
    pub fn diffuse(k: usize, q: usize) -> Self {
        Self::isotropic(k, q, 1e3, 1e3, 10.0, 9.0)
    }
}

/// Quantile, prior in precision form, and the dimensions they imply.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub quantile: QuantileConstants,
    pub c1: f64,
    pub d1: f64,
    beta_mean: DVector<f64>,
    beta_prec: DMatrix<f64>,
    zeta_mean: DVector<f64>,
    zeta_prec: DMatrix<f64>,
}

impl ModelSpec {
    pub fn new(p: f64, prior: &Prior) -> Result<Self> {
        check_square("prior.beta_cov", &prior.beta_cov, prior.beta_mean.len())?;
        check_square("prior.zeta_cov", &prior.zeta_cov, prior.zeta_mean.len())?;
        let beta_prec = spd_inverse(&prior.beta_cov, "prior.beta_cov")
            .map_err(|_| Error::config("prior.beta_cov", "not symmetric positive definite"))?;
        let zeta_prec = if prior.zeta_mean.is_empty() {
            DMatrix::zeros(0, 0)
        } else {
            spd_inverse(&prior.zeta_cov, "prior.zeta_cov")
                .map_err(|_| Error::config("prior.zeta_cov", "not symmetric positive definite"))?
        };
        Self::from_precisions(
            p,
            prior.beta_mean.clone(),
            beta_prec,
            prior.zeta_mean.clone(),
            zeta_prec,
            prior.c1,
            prior.d1,
        )
    }

    /// Builds a spec from prior precisions, which may be singular (a zero
    /// precision is a flat prior).
    pub fn from_precisions(
        p: f64,
        beta_mean: DVector<f64>,
        beta_prec: DMatrix<f64>,
        zeta_mean: DVector<f64>,
        zeta_prec: DMatrix<f64>,
        c1: f64,
        d1: f64,
    ) -> Result<Self> {
        let quantile = QuantileConstants::new(p).map_err(|e| Error::config("quantile", e.to_string()))?;
        check_square("prior.beta_precision", &beta_prec, beta_mean.len())?;
        check_square("prior.zeta_precision", &zeta_prec, zeta_mean.len())?;
        if !(c1 > 0.0 && c1.is_finite()) {
            return Err(Error::config("prior.c1", format!("must be positive, got {c1}")));
        }
        if !(d1 > 0.0 && d1.is_finite()) {
            return Err(Error::config("prior.d1", format!("must be positive, got {d1}")));
        }
        Ok(Self {
            quantile,
            c1,
            d1,
            beta_mean,
            beta_prec,
            zeta_mean,
            zeta_prec,
        })
    }

    pub fn k(&self) -> usize {
        self.beta_mean.len()
    }

    pub fn q(&self) -> usize {
        self.zeta_mean.len()
    }

    pub fn beta_mean(&self) -> &DVector<f64> {
        &self.beta_mean
    }

    pub fn beta_precision(&self) -> &DMatrix<f64> {
        &self.beta_prec
    }

    pub fn zeta_mean(&self) -> &DVector<f64> {
        &self.zeta_mean
    }

    pub fn zeta_precision(&self) -> &DMatrix<f64> {
        &self.zeta_prec
    }

    /// Errors unless the prior dimensions match `(k, q)` of the data.
    pub fn check_dims(&self, k: usize, q: usize) -> Result<()> {
        if self.k() != k {
            return Err(Error::config("prior.beta_mean", format!("has length {} but data has k = {k}", self.k())));
        }
        if self.q() != q {
            return Err(Error::config("prior.zeta_mean", format!("has length {} but data has q = {q}", self.q())));
        }
        Ok(())
    }
}

fn check_square(field: &str, m: &DMatrix<f64>, dim: usize) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::config(field, format!("expected {dim}x{dim}, got {}x{}", m.nrows(), m.ncols())));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::config(field, "has non-finite entries"));
    }
    if (m - m.transpose()).abs().max() > 1e-12 * m.abs().max().max(1.0) {
        return Err(Error::config(field, "is not symmetric"));
    }
    Ok(())
}
