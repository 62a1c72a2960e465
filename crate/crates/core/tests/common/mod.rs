//! Helpers shared by the statistical test targets.
#![allow(dead_code)]

pub mod checks;

use nalgebra::{DMatrix, DVector};
use panelqr::diagnostics::{batch_means_variance, mcse};
use panelqr::simgen::{generate, CovariateSpec, SimOutput, SimSpec};
use panelqr::{PanelData, RngStream};

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn var(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// `|sample mean - target| <= 4 * stderr` for iid draws.
pub fn assert_mean_close(draws: &[f64], target: f64, what: &str) {
    let se = (var(draws) / draws.len() as f64).sqrt();
    let m = mean(draws);
    assert!(
        (m - target).abs() <= 4.0 * se,
        "{what}: mean {m} vs {target} (4 se = {})",
        4.0 * se
    );
}

/// Same check with a batch-means standard error for correlated draws.
pub fn assert_chain_mean_close(draws: &[f64], target: f64, what: &str) {
    let se = mcse(draws).unwrap();
    let m = mean(draws);
    assert!(
        (m - target).abs() <= 4.0 * se,
        "{what}: mean {m} vs {target} (4 mcse = {})",
        4.0 * se
    );
}

/// Two-sample comparison of means, each with its own batch-means error.
pub fn means_agree(a: &[f64], b: &[f64]) -> (bool, f64, f64) {
    let se = (batch_means_variance(a).unwrap() / a.len() as f64
        + batch_means_variance(b).unwrap() / b.len() as f64)
        .sqrt();
    let d = (mean(a) - mean(b)).abs();
    (d <= 4.0 * se, d, 4.0 * se)
}

/// Kolmogorov-Smirnov distance of `draws` from `cdf`.
pub fn ks_distance(draws: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = draws.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

/// CDF of `GIG(1/2, lambda, eta)` tabulated by integrating the density on a
/// log grid with the trapezoid rule.
pub struct NumericGigCdf {
    grid: Vec<f64>,
    cum: Vec<f64>,
    pub mean: f64,
}

impl NumericGigCdf {
    pub fn new(lambda: f64, eta: f64) -> Self {
        let (lo, hi, n) = (-40.0f64, 12.0f64, 400_000usize);
        let h = (hi - lo) / n as f64;
        // x = e^u, dx = e^u du
        let f = |u: f64| {
            let x = u.exp();
            (-0.5 * u - 0.5 * (lambda / x + eta * x)).exp() * x
        };
        let mut grid = Vec::with_capacity(n + 1);
        let mut cum = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        let mut first = 0.0;
        let mut prev = f(lo);
        grid.push(lo.exp());
        cum.push(0.0);
        for i in 1..=n {
            let u = lo + i as f64 * h;
            let cur = f(u);
            acc += 0.5 * h * (prev + cur);
            first += 0.5 * h * (prev * (u - h).exp() + cur * u.exp());
            prev = cur;
            grid.push(u.exp());
            cum.push(acc);
        }
        let total = acc;
        cum.iter_mut().for_each(|c| *c /= total);
        Self { grid, cum, mean: first / total }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self.grid.binary_search_by(|g| g.total_cmp(&x)) {
            Ok(i) => self.cum[i],
            Err(0) => 0.0,
            Err(i) if i >= self.grid.len() => 1.0,
            Err(i) => {
                let t = (x - self.grid[i - 1]) / (self.grid[i] - self.grid[i - 1]);
                self.cum[i - 1] + t * (self.cum[i] - self.cum[i - 1])
            }
        }
    }
}

/// Small reference-style panel for sampler tests.
pub fn small_panel(n: usize, p: f64, seed: u64) -> SimOutput {
    let spec = SimSpec { n, ..SimSpec::reference(p, seed) };
    generate(&spec, &mut RngStream::new(seed)).unwrap()
}

/// Panel with `T_i` fixed, one uniform covariate entering the means.
pub fn tiny_panel(n: usize, t: usize, seed: u64) -> PanelData {
    let spec = SimSpec {
        n,
        t_min: t,
        t_max: t,
        beta: vec![0.0, 0.0],
        zeta: vec![0.0],
        sigma_alpha_sq: 1.0,
        p: 0.5,
        covariates: vec![CovariateSpec::uniform("x2", -1.0, 1.0)],
        mundlak_cols: vec![1],
        seed,
    };
    generate(&spec, &mut RngStream::new(seed)).unwrap().data
}

/// Dense design matrix of `data`.
pub fn design(data: &PanelData) -> DMatrix<f64> {
    DMatrix::from_fn(data.total(), data.k(), |r, c| data.row(r)[c])
}

pub fn dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}
