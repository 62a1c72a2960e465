//! Full-conditional updates shared by both samplers.
//!
//! Each `update_*` draws one block in place given the current values of all
//! other blocks. The matching `*_conditional` functions expose the moments of
//! the full conditional so they can be checked independently.

use nalgebra::{DMatrix, DVector};

use super::{ChainState, ModelSpec, PanelData};
use crate::distributions::{sample_gig_half, sample_invgamma, sample_truncnorm};
use crate::error::Result;
use crate::linalg::CanonicalGaussian;
use crate::rng::RngStream;

/// Lower bound applied to every sampled mixture weight.
pub const W_FLOOR: f64 = 1e-10;

/// Truncation region of `z_it` implied by `y_it`.
pub fn truncation_bounds(y: u8) -> (f64, f64) {
    if y == 1 {
        (0.0, f64::INFINITY)
    } else {
        (f64::NEG_INFINITY, 0.0)
    }
}

/// Adds `weight * row row'` to the lower triangle of `m`.
pub(crate) fn add_weighted_outer(m: &mut DMatrix<f64>, row: &[f64], weight: f64) {
    let k = row.len();
    for a in 0..k {
        let wa = weight * row[a];
        for b in 0..=a {
            m[(a, b)] += wa * row[b];
        }
    }
}

pub(crate) fn symmetrize_lower(m: &mut DMatrix<f64>) {
    for a in 0..m.nrows() {
        for b in 0..a {
            m[(b, a)] = m[(a, b)];
        }
    }
}

/// `beta | alpha, z, w` with the individual effects held fixed.
pub fn beta_conditional_nonblocked(
    state: &ChainState,
    data: &PanelData,
    spec: &ModelSpec,
) -> Result<CanonicalGaussian> {
    let k = data.k();
    let qc = spec.quantile;
    let mut precision = spec.beta_precision().clone();
    let mut rhs = spec.beta_precision() * spec.beta_mean();
    let mut xtx = DMatrix::zeros(k, k);
    for i in 0..data.n() {
        let alpha = state.alpha[i];
        for r in data.rows(i) {
            let v = 1.0 / (qc.tau_sq * state.w[r]);
            let row = data.row(r);
            add_weighted_outer(&mut xtx, row, v);
            let resid = state.z[r] - alpha - state.w[r] * qc.theta;
            for (a, x) in row.iter().enumerate() {
                rhs[a] += v * x * resid;
            }
        }
    }
    symmetrize_lower(&mut xtx);
    precision += xtx;
    CanonicalGaussian::new(precision, &rhs, "beta precision (non-blocked)")
}

pub fn update_beta_nonblocked(
    state: &mut ChainState,
    data: &PanelData,
    spec: &ModelSpec,
    rng: &mut RngStream,
) -> Result<()> {
    state.beta = beta_conditional_nonblocked(state, data, spec)?.sample(rng);
    Ok(())
}

/// Mean and variance of `alpha_i | beta, z, w, sigma_alpha_sq, zeta`.
pub fn alpha_conditional(
    state: &ChainState,
    data: &PanelData,
    spec: &ModelSpec,
    i: usize,
    xb: &[f64],
) -> (f64, f64) {
    let qc = spec.quantile;
    let mut prec = 1.0 / state.sigma_alpha_sq;
    let mut acc = state.cre_mean(data, i) / state.sigma_alpha_sq;
    for r in data.rows(i) {
        let v = 1.0 / (qc.tau_sq * state.w[r]);
        prec += v;
        acc += v * (state.z[r] - xb[r] - state.w[r] * qc.theta);
    }
    let var = 1.0 / prec;
    (acc * var, var)
}

pub fn update_alpha(
    state: &mut ChainState,
    data: &PanelData,
    spec: &ModelSpec,
    rng: &mut RngStream,
) -> Result<()> {
    let xb = state.linear_predictor(data);
    for i in 0..data.n() {
        let (mean, var) = alpha_conditional(state, data, spec, i, &xb);
        state.alpha[i] = mean + var.sqrt() * rng.std_normal();
    }
    Ok(())
}

/// `(lambda_it, eta)` of the `GIG(1/2, lambda_it, eta)` conditional of `w_it`.
pub fn w_conditional(state: &ChainState, spec: &ModelSpec, obs: usize, xb: f64, alpha: f64) -> (f64, f64) {
    let qc = spec.quantile;
    let e = (state.z[obs] - xb - alpha) / qc.tau();
    (e * e, qc.theta * qc.theta / qc.tau_sq + 2.0)
}

pub fn update_w(
    state: &mut ChainState,
    data: &PanelData,
    spec: &ModelSpec,
    rng: &mut RngStream,
) -> Result<()> {
    let xb = state.linear_predictor(data);
    for i in 0..data.n() {
        let alpha = state.alpha[i];
        for r in data.rows(i) {
            let (lambda, eta) = w_conditional(state, spec, r, xb[r], alpha);
            state.w[r] = sample_gig_half(rng, lambda, eta)?.max(W_FLOOR);
        }
    }
    Ok(())
}

/// `(shape, scale)` of the inverse-gamma conditional of `sigma_alpha_sq`.
pub fn sigma_alpha_conditional(state: &ChainState, data: &PanelData, spec: &ModelSpec) -> (f64, f64) {
    let ss: f64 = (0..data.n())
        .map(|i| {
            let d = state.alpha[i] - state.cre_mean(data, i);
            d * d
        })
        .sum();
    ((data.n() as f64 + spec.c1) / 2.0, (spec.d1 + ss) / 2.0)
}

pub fn update_sigma_alpha(
    state: &mut ChainState,
    data: &PanelData,
    spec: &ModelSpec,
    rng: &mut RngStream,
) -> Result<()> {
    let (shape, scale) = sigma_alpha_conditional(state, data, spec);
    state.sigma_alpha_sq = sample_invgamma(rng, shape, scale)?;
    Ok(())
}

/// `zeta | alpha, sigma_alpha_sq`; `None` when no column enters the means.
pub fn zeta_conditional(
    state: &ChainState,
    data: &PanelData,
    spec: &ModelSpec,
) -> Result<Option<CanonicalGaussian>> {
    let q = data.q();
    if q == 0 {
        return Ok(None);
    }
    let inv_s = 1.0 / state.sigma_alpha_sq;
    let mut mm = DMatrix::zeros(q, q);
    let mut rhs = spec.zeta_precision() * spec.zeta_mean();
    for i in 0..data.n() {
        let m = data.mbar(i);
        add_weighted_outer(&mut mm, m, inv_s);
        for (a, v) in m.iter().enumerate() {
            rhs[a] += inv_s * v * state.alpha[i];
        }
    }
    symmetrize_lower(&mut mm);
    let precision = spec.zeta_precision() + mm;
    CanonicalGaussian::new(precision, &rhs, "zeta precision").map(Some)
}

pub fn update_zeta(
    state: &mut ChainState,
    data: &PanelData,
    spec: &ModelSpec,
    rng: &mut RngStream,
) -> Result<()> {
    if let Some(g) = zeta_conditional(state, data, spec)? {
        state.zeta = g.sample(rng);
    } else {
        state.zeta = DVector::zeros(0);
    }
    Ok(())
}

/// Mean and variance of the untruncated normal behind `z_it | beta, alpha_i, w_it`.
pub fn z_conditional_nonblocked(state: &ChainState, spec: &ModelSpec, obs: usize, xb: f64, alpha: f64) -> (f64, f64) {
    let qc = spec.quantile;
    let w = state.w[obs];
    (xb + alpha + w * qc.theta, qc.tau_sq * w)
}

pub fn update_z_nonblocked(
    state: &mut ChainState,
    data: &PanelData,
    spec: &ModelSpec,
    rng: &mut RngStream,
) -> Result<()> {
    let xb = state.linear_predictor(data);
    let y = data.y();
    for i in 0..data.n() {
        let alpha = state.alpha[i];
        for r in data.rows(i) {
            let (mean, var) = z_conditional_nonblocked(state, spec, r, xb[r], alpha);
            let (lo, hi) = truncation_bounds(y[r]);
            state.z[r] = sample_truncnorm(rng, mean, var, lo, hi)?;
        }
    }
    Ok(())
}
