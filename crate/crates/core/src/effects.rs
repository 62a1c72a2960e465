//! Posterior functionals of the success probability: average marginal
//! effect, relative risk and odds ratio of moving one covariate from `a` to
//! `b`.
//!
//! Every functional averages a pointwise quantity over all observations and
//! all stored draws, holding the other covariates and `alpha_i` at their
//! observed and sampled values. The per-draw averages are kept so that their
//! spread gives posterior intervals.

use std::fmt;

use crate::diagnostics::hpdi;
use crate::distributions::{cdf_al, sf_al};
use crate::error::{Error, Result};
use crate::model::{PanelData, PosteriorDraws};
use crate::rng::RngStream;

/// Floor applied to probabilities in ratio denominators and numerators.
pub const PROB_FLOOR: f64 = 1e-12;

/// `Pr(y = 1 | x, beta, alpha) = 1 - F_AL(-x'beta - alpha; 0, 1, p)`.
pub fn prob_success(x_row: &[f64], beta: &[f64], alpha: f64, p: f64) -> f64 {
    let index: f64 = x_row.iter().zip(beta).map(|(x, b)| x * b).sum::<f64>() + alpha;
    sf_al(-index, 0.0, 1.0, p)
}

/// Setting covariate `column` to `from` (a) versus `to` (b).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contrast {
    pub column: usize,
    pub from: f64,
    pub to: f64,
}

impl Contrast {
    pub fn new(column: usize, from: f64, to: f64) -> Result<Self> {
        if column == 0 {
            return Err(Error::config("contrast.covariate", "the intercept cannot be contrasted"));
        }
        if !(from.is_finite() && to.is_finite()) {
            return Err(Error::config("contrast", "contrast values must be finite"));
        }
        Ok(Self { column, from, to })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Functional {
    Ame,
    RelativeRisk,
    OddsRatio,
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Functional::Ame => "ame",
            Functional::RelativeRisk => "rr",
            Functional::OddsRatio => "or",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectResult {
    pub functional: Functional,
    /// Average over observations for each stored draw.
    pub per_draw: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    /// 95% HPDI of `per_draw`; `None` with fewer than 10 draws.
    pub hpdi: Option<(f64, f64)>,
}

impl EffectResult {
    fn from_per_draw(functional: Functional, per_draw: Vec<f64>) -> Self {
        let m = per_draw.len() as f64;
        let mean = per_draw.iter().sum::<f64>() / m;
        let std = if per_draw.len() > 1 {
            (per_draw.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0)).sqrt()
        } else {
            0.0
        };
        let hpdi = hpdi(&per_draw, 0.95).ok();
        Self { functional, per_draw, mean, std, hpdi }
    }
}

/// All three functionals for one contrast.
#[derive(Debug, Clone, PartialEq)]
pub struct Effects {
    pub ame: EffectResult,
    pub rr: EffectResult,
    pub or: EffectResult,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EffectOptions {
    /// Average over a random subset of this many individuals, drawn without
    /// replacement with the given seed, instead of all of them.
    pub subsample: Option<(usize, u64)>,
}

/// Pointwise success probabilities at `a` and `b` and their complements.
#[derive(Debug, Clone, Copy)]
struct Pointwise {
    h_a: f64,
    h_b: f64,
    f_a: f64,
    f_b: f64,
}

impl Pointwise {
    fn new(base: f64, beta_j: f64, contrast: &Contrast, p: f64) -> Self {
        let eta_a = base + contrast.from * beta_j;
        let eta_b = base + contrast.to * beta_j;
        Self {
            h_a: sf_al(-eta_a, 0.0, 1.0, p),
            h_b: sf_al(-eta_b, 0.0, 1.0, p),
            f_a: cdf_al(-eta_a, 0.0, 1.0, p),
            f_b: cdf_al(-eta_b, 0.0, 1.0, p),
        }
    }

    fn ame(&self) -> f64 {
        self.h_b - self.h_a
    }

    fn rr(&self) -> f64 {
        self.h_b.max(PROB_FLOOR) / self.h_a.max(PROB_FLOOR)
    }

    fn or(&self) -> f64 {
        let odds_b = self.h_b.max(PROB_FLOOR) / self.f_b.max(PROB_FLOOR);
        let odds_a = self.h_a.max(PROB_FLOOR) / self.f_a.max(PROB_FLOOR);
        odds_b / odds_a
    }
}

/// Computes AME, RR and OR in one pass over `(m, i, t)`.
pub fn compute_effects(
    draws: &PosteriorDraws,
    data: &PanelData,
    contrast: &Contrast,
    options: &EffectOptions,
) -> Result<Effects> {
    let alpha = draws.alpha.as_ref().ok_or_else(|| {
        Error::config("store_alpha", "effects need stored alpha draws; rerun the chain with store_alpha = true")
    })?;
    if draws.beta.ncols() != data.k() || alpha.ncols() != data.n() {
        return Err(Error::Data(format!(
            "draws have k = {} and n = {}, data has k = {} and n = {}",
            draws.beta.ncols(),
            alpha.ncols(),
            data.k(),
            data.n()
        )));
    }
    if contrast.column >= data.k() {
        return Err(Error::config("contrast.covariate", format!("column {} out of range", contrast.column)));
    }
    if draws.is_empty() || data.total() == 0 {
        return Err(Error::Data("effects need at least one draw and one observation".into()));
    }
    let individuals = select_individuals(data.n(), options)?;
    let p = draws.meta.quantile;
    let j = contrast.column;
    let m_total = draws.len();
    let (mut ame, mut rr, mut or) = (
        Vec::with_capacity(m_total),
        Vec::with_capacity(m_total),
        Vec::with_capacity(m_total),
    );
    let obs: usize = individuals.iter().map(|&i| data.len_of(i)).sum();
    for m in 0..m_total {
        let beta = draws.beta.row(m);
        let alpha_m = alpha.row(m);
        let (mut s_ame, mut s_rr, mut s_or) = (0.0, 0.0, 0.0);
        for &i in &individuals {
            for r in data.rows(i) {
                let x = data.row(r);
                let xb: f64 = x.iter().zip(beta).map(|(a, b)| a * b).sum();
                let base = xb - x[j] * beta[j] + alpha_m[i];
                let pw = Pointwise::new(base, beta[j], contrast, p);
                s_ame += pw.ame();
                s_rr += pw.rr();
                s_or += pw.or();
            }
        }
        ame.push(s_ame / obs as f64);
        rr.push(s_rr / obs as f64);
        or.push(s_or / obs as f64);
    }
    Ok(Effects {
        ame: EffectResult::from_per_draw(Functional::Ame, ame),
        rr: EffectResult::from_per_draw(Functional::RelativeRisk, rr),
        or: EffectResult::from_per_draw(Functional::OddsRatio, or),
    })
}

fn select_individuals(n: usize, options: &EffectOptions) -> Result<Vec<usize>> {
    match options.subsample {
        None => Ok((0..n).collect()),
        Some((size, seed)) => {
            if size == 0 {
                return Err(Error::config("effects.subsample", "subsample size must be positive"));
            }
            if size >= n {
                return Ok((0..n).collect());
            }
            // partial Fisher-Yates
            let mut rng = RngStream::new(seed);
            let mut idx: Vec<usize> = (0..n).collect();
            for a in 0..size {
                let b = rng.uniform_int(a, n - 1);
                idx.swap(a, b);
            }
            idx.truncate(size);
            idx.sort_unstable();
            Ok(idx)
        }
    }
}

pub fn average_marginal_effect(
    draws: &PosteriorDraws,
    data: &PanelData,
    contrast: &Contrast,
) -> Result<EffectResult> {
    Ok(compute_effects(draws, data, contrast, &EffectOptions::default())?.ame)
}

pub fn relative_risk(draws: &PosteriorDraws, data: &PanelData, contrast: &Contrast) -> Result<EffectResult> {
    Ok(compute_effects(draws, data, contrast, &EffectOptions::default())?.rr)
}

pub fn odds_ratio(draws: &PosteriorDraws, data: &PanelData, contrast: &Contrast) -> Result<EffectResult> {
    Ok(compute_effects(draws, data, contrast, &EffectOptions::default())?.or)
}
