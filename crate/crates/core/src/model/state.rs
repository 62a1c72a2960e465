use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use super::{ModelSpec, PanelData};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Current values of every block of the Gibbs sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub beta: DVector<f64>,
    pub alpha: Vec<f64>,
    pub zeta: DVector<f64>,
    pub sigma_alpha_sq: f64,
    /// Latent utilities, one per observation.
    pub z: Vec<f64>,
    /// Mixture weights, one per observation.
    pub w: Vec<f64>,
}

impl ChainState {
    /// Prior-centred, sign-feasible starting point.
    pub fn initialize(data: &PanelData, spec: &ModelSpec, rng: &mut RngStream) -> Self {
        let z = data
            .y()
            .iter()
            .map(|&y| {
                let d = rng.std_normal().abs().max(f64::MIN_POSITIVE);
                if y == 1 {
                    d
                } else {
                    -d
                }
            })
            .collect();
        Self {
            beta: spec.beta_mean().clone(),
            alpha: vec![0.0; data.n()],
            zeta: spec.zeta_mean().clone(),
            sigma_alpha_sq: spec.d1 / spec.c1,
            z,
            w: vec![1.0; data.total()],
        }
    }

    /// `x_it' beta` for every observation.
    pub fn linear_predictor(&self, data: &PanelData) -> Vec<f64> {
        (0..data.total())
            .map(|r| data.row(r).iter().zip(self.beta.iter()).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `mbar_i' zeta`, the prior mean of `alpha_i`.
    pub fn cre_mean(&self, data: &PanelData, i: usize) -> f64 {
        data.mbar(i).iter().zip(self.zeta.iter()).map(|(a, b)| a * b).sum()
    }

    /// Checks shapes, positivity and the sign coupling between `z` and `y`.
    pub fn validate(&self, data: &PanelData) -> Result<()> {
        if self.beta.len() != data.k()
            || self.zeta.len() != data.q()
            || self.alpha.len() != data.n()
            || self.z.len() != data.total()
            || self.w.len() != data.total()
        {
            return Err(Error::Numeric("chain state dimensions do not match the data".into()));
        }
        if !(self.sigma_alpha_sq > 0.0) {
            return Err(Error::Numeric(format!("sigma_alpha_sq = {} is not positive", self.sigma_alpha_sq)));
        }
        if let Some(r) = self.w.iter().position(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::Numeric(format!("w[{r}] = {} is not positive", self.w[r])));
        }
        for (r, (&z, &y)) in self.z.iter().zip(data.y()).enumerate() {
            if (z > 0.0) != (y == 1) || !z.is_finite() {
                return Err(Error::Numeric(format!("z[{r}] = {z} inconsistent with y = {y}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    NonBlocked,
    Blocked,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::NonBlocked => "nonblocked",
            Algorithm::Blocked => "blocked",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nonblocked" => Ok(Algorithm::NonBlocked),
            "blocked" => Ok(Algorithm::Blocked),
            other => Err(Error::config(
                "algorithm",
                format!("expected `nonblocked` or `blocked`, got `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub store_alpha: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            iterations: 16_000,
            burn_in: 1_000,
            thin: 10,
            seed: 0,
            algorithm: Algorithm::Blocked,
            store_alpha: true,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.iterations {
            return Err(Error::config(
                "sampler.burn_in",
                format!("burn-in {} must be below iterations {}", self.burn_in, self.iterations),
            ));
        }
        if self.thin == 0 {
            return Err(Error::config("sampler.thin", "must be at least 1"));
        }
        Ok(())
    }

    /// Number of stored draws, `floor((iterations - burn_in) / thin)`.
    pub fn kept(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }
}

/// Row-major matrix of draws: one row per kept iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct DrawMatrix {
    ncols: usize,
    data: Vec<f64>,
}

impl DrawMatrix {
    pub fn new(ncols: usize) -> Self {
        Self { ncols, data: Vec::new() }
    }

    pub fn with_capacity(ncols: usize, rows: usize) -> Self {
        Self {
            ncols,
            data: Vec::with_capacity(ncols * rows),
        }
    }

    pub fn from_rows(ncols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len() % ncols.max(1), 0);
        Self { ncols, data }
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.ncols);
        self.data.extend_from_slice(row);
    }

    pub fn nrows(&self) -> usize {
        self.data.len().checked_div(self.ncols).unwrap_or(0)
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.data[m * self.ncols..(m + 1) * self.ncols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.data.iter().skip(j).step_by(self.ncols).copied().collect()
    }
}

/// Metadata recorded with a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMeta {
    pub quantile: f64,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub wall_time_secs: f64,
}

/// Burn-in trimmed, thinned draws of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    pub beta_names: Vec<String>,
    pub zeta_names: Vec<String>,
    pub beta: DrawMatrix,
    pub zeta: DrawMatrix,
    pub sigma_alpha_sq: Vec<f64>,
    pub alpha: Option<DrawMatrix>,
    pub meta: RunMeta,
}

impl PosteriorDraws {
    /// Empty container with parameter names derived from the data columns:
    /// `beta_1..beta_k` and `zeta_<column>` using one-based column numbers.
    pub fn empty(data: &PanelData, meta: RunMeta, store_alpha: bool, capacity: usize) -> Self {
        Self {
            beta_names: (1..=data.k()).map(|j| format!("beta_{j}")).collect(),
            zeta_names: data.mundlak_cols().iter().map(|c| format!("zeta_{}", c + 1)).collect(),
            beta: DrawMatrix::with_capacity(data.k(), capacity),
            zeta: DrawMatrix::with_capacity(data.q(), capacity),
            sigma_alpha_sq: Vec::with_capacity(capacity),
            alpha: store_alpha.then(|| DrawMatrix::with_capacity(data.n(), capacity)),
            meta,
        }
    }

    pub fn push(&mut self, state: &ChainState) {
        self.beta.push_row(state.beta.as_slice());
        self.zeta.push_row(state.zeta.as_slice());
        self.sigma_alpha_sq.push(state.sigma_alpha_sq);
        if let Some(a) = self.alpha.as_mut() {
            a.push_row(&state.alpha);
        }
    }

    pub fn len(&self) -> usize {
        self.sigma_alpha_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma_alpha_sq.is_empty()
    }

    /// Names and series of the structural parameters (beta, zeta, sigma).
    pub fn parameters(&self) -> Vec<(String, Vec<f64>)> {
        let mut out = Vec::with_capacity(self.beta_names.len() + self.zeta_names.len() + 1);
        for (j, name) in self.beta_names.iter().enumerate() {
            out.push((name.clone(), self.beta.column(j)));
        }
        for (j, name) in self.zeta_names.iter().enumerate() {
            out.push((name.clone(), self.zeta.column(j)));
        }
        out.push(("sigma_alpha2".to_string(), self.sigma_alpha_sq.clone()));
        out
    }
}
