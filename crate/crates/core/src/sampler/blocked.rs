//! Blocked Gibbs sweep: `(beta, z)` is drawn with the individual effects
//! integrated out, then alpha, w, sigma_alpha_sq and zeta as in the
//! non-blocked sampler.
//!
//! Integrating out `alpha_i` gives `z_i ~ N(X_i beta + mbar_i' zeta + w_i theta, Omega_i)`
//! with `Omega_i = sigma_alpha_sq * J + diag(d)` and `d_t = tau^2 w_it`. All
//! operations with `Omega_i^-1` use its rank-one structure
//! `Omega^-1 = D^-1 - c v v'` with `v = D^-1 iota` and
//! `c = sigma_alpha_sq / (1 + sigma_alpha_sq * iota' v)`.

use nalgebra::{DMatrix, DVector};

use crate::distributions::sample_truncnorm;
use crate::error::{Error, Result};
use crate::linalg::CanonicalGaussian;
use crate::model::updates::{
    add_weighted_outer, symmetrize_lower, truncation_bounds, update_alpha, update_sigma_alpha, update_w,
    update_zeta,
};
use crate::model::{ChainState, ModelSpec, PanelData};
use crate::rng::RngStream;

/// `Omega = sigma_alpha_sq * iota iota' + diag(d)` for one individual.
#[derive(Debug, Clone, Default)]
pub struct OmegaStructure {
    sigma_alpha_sq: f64,
    d: Vec<f64>,
    inv_d: Vec<f64>,
    sum_inv_d: f64,
}

impl OmegaStructure {
    pub fn new(sigma_alpha_sq: f64, d: Vec<f64>) -> Result<Self> {
        let mut s = Self::default();
        s.reset(sigma_alpha_sq, d.into_iter())?;
        Ok(s)
    }

    /// Reuses the buffers for a new individual.
    pub fn reset(&mut self, sigma_alpha_sq: f64, d: impl Iterator<Item = f64>) -> Result<()> {
        if !(sigma_alpha_sq >= 0.0) {
            return Err(Error::Domain(format!("sigma_alpha_sq must be non-negative, got {sigma_alpha_sq}")));
        }
        self.sigma_alpha_sq = sigma_alpha_sq;
        self.d.clear();
        self.inv_d.clear();
        self.sum_inv_d = 0.0;
        for v in d {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("diagonal entry must be positive, got {v}")));
            }
            self.d.push(v);
            self.inv_d.push(1.0 / v);
            self.sum_inv_d += 1.0 / v;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Rank-one coefficient `c` of the inverse.
    pub fn rank_one_coef(&self) -> f64 {
        self.sigma_alpha_sq / (1.0 + self.sigma_alpha_sq * self.sum_inv_d)
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let t = self.len();
        DMatrix::from_fn(t, t, |a, b| self.sigma_alpha_sq + if a == b { self.d[a] } else { 0.0 })
    }

    /// `Omega^-1` materialized from the rank-one form.
    pub fn inverse_dense(&self) -> DMatrix<f64> {
        let t = self.len();
        let c = self.rank_one_coef();
        DMatrix::from_fn(t, t, |a, b| {
            let diag = if a == b { self.inv_d[a] } else { 0.0 };
            diag - c * self.inv_d[a] * self.inv_d[b]
        })
    }

    /// `Omega^-1 x`.
    pub fn solve(&self, x: &[f64]) -> Vec<f64> {
        let c = self.rank_one_coef();
        let vx: f64 = self.inv_d.iter().zip(x).map(|(v, x)| v * x).sum();
        self.inv_d.iter().zip(x).map(|(v, x)| v * x - c * v * vx).collect()
    }

    /// Conditional of component `t` given the others, for a Gaussian with
    /// covariance `Omega`. `resid` holds deviations from the mean; entry `t`
    /// is ignored. Returns `(mean shift, variance)`.
    pub fn conditional(&self, t: usize, resid: &[f64]) -> (f64, f64) {
        let s_minus: f64 = resid
            .iter()
            .zip(&self.inv_d)
            .enumerate()
            .filter(|(u, _)| *u != t)
            .map(|(_, (r, v))| r * v)
            .sum();
        let v_minus = self.sum_inv_d - self.inv_d[t];
        self.conditional_from_sums(t, s_minus, v_minus)
    }

    /// Same as [`Self::conditional`] given `sum_{u != t} r_u / d_u` and
    /// `sum_{u != t} 1 / d_u`.
    #[inline]
    fn conditional_from_sums(&self, t: usize, s_minus: f64, v_minus: f64) -> (f64, f64) {
        let g = self.sigma_alpha_sq / (1.0 + self.sigma_alpha_sq * v_minus);
        (g * s_minus, self.d[t] + g)
    }
}

/// Conditional `(mean shift, variance)` of component `t` of `N(0, cov)` given
/// the rest, from the partitioned-matrix formulas with dense algebra.
pub fn conditional_dense(cov: &DMatrix<f64>, t: usize, resid: &[f64]) -> Result<(f64, f64)> {
    let n = cov.nrows();
    if n == 1 {
        return Ok((0.0, cov[(0, 0)]));
    }
    let others: Vec<usize> = (0..n).filter(|&u| u != t).collect();
    let s_oo = cov.select_rows(&others).select_columns(&others);
    let s_to = DVector::from_iterator(others.len(), others.iter().map(|&u| cov[(t, u)]));
    let r_o = DVector::from_iterator(others.len(), others.iter().map(|&u| resid[u]));
    let chol = crate::linalg::cholesky_jittered(s_oo, "Omega_{-t,-t}")?;
    let a = chol.solve(&s_to);
    Ok((a.dot(&r_o), cov[(t, t)] - a.dot(&s_to)))
}

/// `beta | z, w, sigma_alpha_sq, zeta` with alpha integrated out.
pub fn beta_conditional_blocked(
    state: &ChainState,
    data: &PanelData,
    spec: &ModelSpec,
) -> Result<CanonicalGaussian> {
    let k = data.k();
    let qc = spec.quantile;
    let s = state.sigma_alpha_sq;
    let mut xox = DMatrix::zeros(k, k);
    let mut rhs = spec.beta_precision() * spec.beta_mean();
    let mut u = vec![0.0; k];
    for i in 0..data.n() {
        let cre = state.cre_mean(data, i);
        u.iter_mut().for_each(|v| *v = 0.0);
        let mut sum_v = 0.0;
        let mut g = 0.0;
        for r in data.rows(i) {
            let v = 1.0 / (qc.tau_sq * state.w[r]);
            let row = data.row(r);
            let resid = state.z[r] - cre - state.w[r] * qc.theta;
            add_weighted_outer(&mut xox, row, v);
            for (a, x) in row.iter().enumerate() {
                u[a] += v * x;
                rhs[a] += v * x * resid;
            }
            sum_v += v;
            g += v * resid;
        }
        let c = s / (1.0 + s * sum_v);
        add_weighted_outer(&mut xox, &u, -c);
        for a in 0..k {
            rhs[a] -= c * u[a] * g;
        }
    }
    symmetrize_lower(&mut xox);
    let precision = spec.beta_precision() + xox;
    CanonicalGaussian::new(precision, &rhs, "beta precision (blocked)")
}

pub fn update_beta_blocked(
    state: &mut ChainState,
    data: &PanelData,
    spec: &ModelSpec,
    rng: &mut RngStream,
) -> Result<()> {
    state.beta = beta_conditional_blocked(state, data, spec)?.sample(rng);
    Ok(())
}

/// Marginal mean of `z_it` with alpha integrated out.
fn marginal_means(state: &ChainState, data: &PanelData, spec: &ModelSpec) -> Vec<f64> {
    let theta = spec.quantile.theta;
    let mut mu = state.linear_predictor(data);
    for i in 0..data.n() {
        let cre = state.cre_mean(data, i);
        for r in data.rows(i) {
            mu[r] += cre + state.w[r] * theta;
        }
    }
    mu
}

/// One conditional sweep `t = 1..T_i` over each truncated multivariate
/// normal `z_i`, using the rank-one structure of `Omega_i`.
pub fn update_z_blocked(
    state: &mut ChainState,
    data: &PanelData,
    spec: &ModelSpec,
    rng: &mut RngStream,
) -> Result<()> {
    let tau_sq = spec.quantile.tau_sq;
    let mu = marginal_means(state, data, spec);
    let y = data.y();
    let mut omega = OmegaStructure::default();
    for i in 0..data.n() {
        let rows = data.rows(i);
        omega.reset(state.sigma_alpha_sq, rows.clone().map(|r| tau_sq * state.w[r]))?;
        let start = rows.start;
        let mut s: f64 = rows.clone().map(|r| (state.z[r] - mu[r]) * omega.inv_d[r - start]).sum();
        for r in rows {
            let t = r - start;
            let v = omega.inv_d[t];
            let old = state.z[r] - mu[r];
            let s_minus = s - v * old;
            let (shift, var) = omega.conditional_from_sums(t, s_minus, omega.sum_inv_d - v);
            let (lo, hi) = truncation_bounds(y[r]);
            state.z[r] = sample_truncnorm(rng, mu[r] + shift, var, lo, hi)?;
            s = s_minus + v * (state.z[r] - mu[r]);
        }
    }
    Ok(())
}

/// Same sweep as [`update_z_blocked`] with the conditional moments computed
/// from a dense `Omega_i` by partitioned-matrix formulas. Consumes the random
/// stream identically.
pub fn update_z_blocked_dense(
    state: &mut ChainState,
    data: &PanelData,
    spec: &ModelSpec,
    rng: &mut RngStream,
) -> Result<()> {
    let tau_sq = spec.quantile.tau_sq;
    let mu = marginal_means(state, data, spec);
    let y = data.y();
    for i in 0..data.n() {
        let rows = data.rows(i);
        let omega = OmegaStructure::new(state.sigma_alpha_sq, rows.clone().map(|r| tau_sq * state.w[r]).collect())?;
        let cov = omega.dense();
        let start = rows.start;
        for r in rows.clone() {
            let resid: Vec<f64> = rows.clone().map(|u| state.z[u] - mu[u]).collect();
            let (shift, var) = conditional_dense(&cov, r - start, &resid)?;
            let (lo, hi) = truncation_bounds(y[r]);
            state.z[r] = sample_truncnorm(rng, mu[r] + shift, var, lo, hi)?;
        }
    }
    Ok(())
}

pub fn sweep_blocked(
    state: &mut ChainState,
    data: &PanelData,
    spec: &ModelSpec,
    rng: &mut RngStream,
) -> Result<()> {
    update_beta_blocked(state, data, spec, rng)?;
    update_z_blocked(state, data, spec, rng)?;
    update_alpha(state, data, spec, rng)?;
    update_w(state, data, spec, rng)?;
    update_sigma_alpha(state, data, spec, rng)?;
    update_zeta(state, data, spec, rng)?;
    Ok(())
}
