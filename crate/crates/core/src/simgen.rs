//! Synthetic panels from the correlated-random-effects quantile model:
//!
//! ```text
//! z_it    = x_it' beta + alpha_i + eps_it,   eps_it ~ AL(0, 1, p)
//! alpha_i = mbar_i' zeta + xi_i,             xi_i ~ N(0, sigma_alpha_sq)
//! y_it    = 1{z_it > 0}
//! ```
//!
//! with panel lengths `T_i` uniform on the integers `t_min..=t_max`.

use crate::distributions::{sample_al, QuantileConstants};
use crate::error::{Error, Result};
use crate::model::PanelData;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CovariateDist {
    /// Fresh `U(low, high)` draw for every observation.
    Uniform { low: f64, high: f64 },
    /// One Bernoulli indicator per individual, repeated over its periods.
    TimeInvariantBernoulli { prob: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovariateSpec {
    pub name: String,
    pub dist: CovariateDist,
}

impl CovariateSpec {
    pub fn uniform(name: &str, low: f64, high: f64) -> Self {
        Self { name: name.into(), dist: CovariateDist::Uniform { low, high } }
    }

    pub fn indicator(name: &str, prob: f64) -> Self {
        Self { name: name.into(), dist: CovariateDist::TimeInvariantBernoulli { prob } }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSpec {
    pub n: usize,
    pub t_min: usize,
    pub t_max: usize,
    /// Coefficients including the intercept, length `1 + covariates.len()`.
    pub beta: Vec<f64>,
    pub zeta: Vec<f64>,
    pub sigma_alpha_sq: f64,
    pub p: f64,
    pub covariates: Vec<CovariateSpec>,
    /// Design-matrix columns (0 = intercept) entering the individual means.
    pub mundlak_cols: Vec<usize>,
    pub seed: u64,
}

impl SimSpec {
    /// `n = 1000`, `T_i ~ U{5..15}`, `beta = (0.5, 1, 0.6, -0.8)`,
    /// `zeta = (-1, 1)` on `x3, x4`, covariates `U(-2, 2)`, `sigma_alpha_sq = 1`.
    pub fn reference(p: f64, seed: u64) -> Self {
        Self {
            n: 1000,
            t_min: 5,
            t_max: 15,
            beta: vec![0.5, 1.0, 0.6, -0.8],
            zeta: vec![-1.0, 1.0],
            sigma_alpha_sq: 1.0,
            p,
            covariates: vec![
                CovariateSpec::uniform("x2", -2.0, 2.0),
                CovariateSpec::uniform("x3", -2.0, 2.0),
                CovariateSpec::uniform("x4", -2.0, 2.0),
            ],
            mundlak_cols: vec![2, 3],
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_min < 1 || self.t_min > self.t_max {
            return Err(Error::config("sim.t_min", format!("need 1 <= t_min <= t_max, got {}..{}", self.t_min, self.t_max)));
        }
        if self.beta.len() != self.covariates.len() + 1 {
            return Err(Error::config(
                "sim.beta",
                format!("expected {} coefficients, got {}", self.covariates.len() + 1, self.beta.len()),
            ));
        }
        if self.zeta.len() != self.mundlak_cols.len() {
            return Err(Error::config(
                "sim.zeta",
                format!("expected {} coefficients, got {}", self.mundlak_cols.len(), self.zeta.len()),
            ));
        }
        if !(self.sigma_alpha_sq >= 0.0 && self.sigma_alpha_sq.is_finite()) {
            return Err(Error::config("sim.sigma_alpha_sq", "must be non-negative"));
        }
        QuantileConstants::new(self.p).map_err(|e| Error::config("sim.quantile", e.to_string()))?;
        for c in &self.covariates {
            match c.dist {
                CovariateDist::Uniform { low, high } if !(low < high) => {
                    return Err(Error::config("sim.covariates", format!("`{}` needs low < high", c.name)));
                }
                CovariateDist::TimeInvariantBernoulli { prob } if !(0.0..=1.0).contains(&prob) => {
                    return Err(Error::config("sim.covariates", format!("`{}` needs prob in [0, 1]", c.name)));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub data: PanelData,
    pub z: Vec<f64>,
    pub alpha: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub xi: Vec<f64>,
    /// `(#y = 0, #y = 1)`.
    pub counts: (usize, usize),
}

/// Draws a panel. Per individual the stream is consumed in a fixed order:
/// `T_i`, covariates row by row, `xi_i`, then the errors.
pub fn generate(spec: &SimSpec, rng: &mut RngStream) -> Result<SimOutput> {
    spec.validate()?;
    let qc = QuantileConstants::new(spec.p)?;
    let ncov = spec.covariates.len();
    let mut ids = Vec::with_capacity(spec.n);
    let mut lengths = Vec::with_capacity(spec.n);
    let mut periods = Vec::new();
    let mut cov = Vec::new();
    let mut y = Vec::new();
    let mut z = Vec::new();
    let mut epsilon = Vec::new();
    let mut alpha = Vec::with_capacity(spec.n);
    let mut xi_all = Vec::with_capacity(spec.n);

    for i in 0..spec.n {
        let t_i = rng.uniform_int(spec.t_min, spec.t_max);
        ids.push((i + 1).to_string());
        lengths.push(t_i);
        let fixed: Vec<f64> = spec
            .covariates
            .iter()
            .map(|c| match c.dist {
                CovariateDist::TimeInvariantBernoulli { prob } => f64::from(u8::from(rng.uniform() < prob)),
                CovariateDist::Uniform { .. } => 0.0,
            })
            .collect();
        let start = cov.len();
        for t in 0..t_i {
            periods.push(t as i64 + 1);
            for (c, spec_c) in spec.covariates.iter().enumerate() {
                let v = match spec_c.dist {
                    CovariateDist::Uniform { low, high } => low + (high - low) * rng.uniform(),
                    CovariateDist::TimeInvariantBernoulli { .. } => fixed[c],
                };
                cov.push(v);
            }
        }
        let block = &cov[start..];
        // alpha_i = mbar_i' zeta + xi_i
        let mut cre = 0.0;
        for (&col, &zeta) in spec.mundlak_cols.iter().zip(&spec.zeta) {
            let m = (0..t_i).map(|t| block[t * ncov + col - 1]).sum::<f64>() / t_i as f64;
            cre += m * zeta;
        }
        let xi = spec.sigma_alpha_sq.sqrt() * rng.std_normal();
        let a = cre + xi;
        alpha.push(a);
        xi_all.push(xi);
        for t in 0..t_i {
            let row = &block[t * ncov..(t + 1) * ncov];
            let xb = spec.beta[0] + row.iter().zip(&spec.beta[1..]).map(|(x, b)| x * b).sum::<f64>();
            let e = sample_al(rng, 0.0, 1.0, &qc);
            let zi = xb + a + e;
            epsilon.push(e);
            z.push(zi);
            y.push(u8::from(zi > 0.0));
        }
    }

    let names = spec.covariates.iter().map(|c| c.name.clone()).collect();
    let data = PanelData::new(ids, &lengths, periods, y, &cov, names, Some(spec.mundlak_cols.clone()))?;
    let counts = data.class_counts();
    Ok(SimOutput { data, z, alpha, epsilon, xi: xi_all, counts })
}
