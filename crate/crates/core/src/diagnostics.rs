//! Chain diagnostics: autocorrelation, batch-means inefficiency factors,
//! Geweke convergence scores, HPD intervals and per-parameter summaries.

use crate::error::{Error, Result};
use crate::model::PosteriorDraws;

/// Minimum series length for [`inefficiency_factor`].
pub const MIN_IF_LENGTH: usize = 100;

/// Lags reported by [`summarize`].
pub const SUMMARY_LAGS: [usize; 3] = [1, 5, 10];

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance with the `n - 1` divisor.
fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// Sample autocorrelation at `lag` with the biased `1/M` normalization.
///
/// A constant series has autocorrelation 1 at lag 0 and 0 elsewhere.
pub fn autocorrelation(draws: &[f64], lag: usize) -> Result<f64> {
    let m = draws.len();
    if lag >= m {
        return Err(Error::Domain(format!("lag {lag} needs more than {m} draws")));
    }
    if lag == 0 {
        return Ok(1.0);
    }
    let mu = mean(draws);
    let c0: f64 = draws.iter().map(|v| (v - mu) * (v - mu)).sum();
    if c0 == 0.0 {
        return Ok(0.0);
    }
    let ch: f64 = draws
        .iter()
        .zip(&draws[lag..])
        .map(|(a, b)| (a - mu) * (b - mu))
        .sum();
    Ok(ch / c0)
}

/// Long-run variance `B * Var(batch means)` from `floor(M / B)`
/// non-overlapping batches of size `B = floor(sqrt(M))`.
pub fn batch_means_variance(draws: &[f64]) -> Result<f64> {
    let m = draws.len();
    let size = (m as f64).sqrt().floor() as usize;
    let batches = m.checked_div(size).unwrap_or(0);
    if batches < 2 {
        return Err(Error::Domain(format!("{m} draws are too few for batch means")));
    }
    let means: Vec<f64> = draws
        .chunks_exact(size)
        .take(batches)
        .map(mean)
        .collect();
    Ok(size as f64 * variance(&means))
}

/// Batch-means inefficiency factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InefficiencyFactor {
    pub value: f64,
    /// Set when the series has zero variance; `value` is then 1.
    pub degenerate: bool,
}

pub fn inefficiency_factor(draws: &[f64]) -> Result<InefficiencyFactor> {
    if draws.len() < MIN_IF_LENGTH {
        return Err(Error::Domain(format!(
            "inefficiency factor needs at least {MIN_IF_LENGTH} draws, got {}",
            draws.len()
        )));
    }
    let var = variance(draws);
    if var == 0.0 {
        log::warn!("inefficiency factor of a constant series set to 1");
        return Ok(InefficiencyFactor { value: 1.0, degenerate: true });
    }
    Ok(InefficiencyFactor {
        value: batch_means_variance(draws)? / var,
        degenerate: false,
    })
}

/// Monte Carlo standard error of the mean, `sqrt(long-run variance / M)`.
pub fn mcse(draws: &[f64]) -> Result<f64> {
    Ok((batch_means_variance(draws)? / draws.len() as f64).sqrt())
}

/// Geweke Z-score comparing the first `frac_a` and the last `frac_b` of the
/// chain, with batch-means long-run variances for each segment.
pub fn geweke_z(draws: &[f64], frac_a: f64, frac_b: f64) -> Result<f64> {
    if !(frac_a > 0.0 && frac_b > 0.0 && frac_a + frac_b <= 1.0) {
        return Err(Error::config(
            "geweke",
            format!("segment fractions ({frac_a}, {frac_b}) must be positive and not overlap"),
        ));
    }
    let m = draws.len();
    let na = (frac_a * m as f64).floor() as usize;
    let nb = (frac_b * m as f64).floor() as usize;
    if na < 4 || nb < 4 {
        return Err(Error::Domain(format!("{m} draws leave too short Geweke segments")));
    }
    let a = &draws[..na];
    let b = &draws[m - nb..];
    let diff = mean(a) - mean(b);
    let se2 = batch_means_variance(a)? / na as f64 + batch_means_variance(b)? / nb as f64;
    if se2 == 0.0 {
        return Ok(if diff == 0.0 { 0.0 } else { diff.signum() * f64::INFINITY });
    }
    Ok(diff / se2.sqrt())
}

/// Shortest interval spanned by `ceil(level * M)` consecutive sorted draws.
pub fn hpdi(draws: &[f64], level: f64) -> Result<(f64, f64)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("HPDI level must lie in (0, 1), got {level}")));
    }
    if draws.len() < 10 {
        return Err(Error::Domain(format!("HPDI needs at least 10 draws, got {}", draws.len())));
    }
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let h = ((level * m as f64).ceil() as usize).clamp(1, m);
    let (mut best, mut lo) = (f64::INFINITY, 0);
    for i in 0..=m - h {
        let width = sorted[i + h - 1] - sorted[i];
        if width < best {
            best = width;
            lo = i;
        }
    }
    Ok((sorted[lo], sorted[lo + h - 1]))
}

/// Empirical quantile by linear interpolation between order statistics.
pub fn quantile(draws: &[f64], q: f64) -> f64 {
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, q)
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSummary {
    pub name: String,
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub hpdi_lo: f64,
    pub hpdi_hi: f64,
    pub inefficiency: f64,
    pub inefficiency_degenerate: bool,
    pub geweke_z: f64,
    pub acf1: f64,
    pub acf5: f64,
    pub acf10: f64,
}

/// Summary of one series: moments, 95% HPDI, IF, Geweke Z on the first 10%
/// against the last 40%, and autocorrelations at lags 1, 5 and 10.
pub fn summarize_series(name: &str, draws: &[f64]) -> Result<ParameterSummary> {
    let ineff = inefficiency_factor(draws)?;
    let (hpdi_lo, hpdi_hi) = hpdi(draws, 0.95)?;
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(ParameterSummary {
        name: name.to_string(),
        mean: mean(draws),
        std: variance(draws).sqrt(),
        median: quantile_sorted(&sorted, 0.5),
        hpdi_lo,
        hpdi_hi,
        inefficiency: ineff.value,
        inefficiency_degenerate: ineff.degenerate,
        geweke_z: geweke_z(draws, 0.1, 0.4)?,
        acf1: autocorrelation(draws, SUMMARY_LAGS[0])?,
        acf5: autocorrelation(draws, SUMMARY_LAGS[1])?,
        acf10: autocorrelation(draws, SUMMARY_LAGS[2])?,
    })
}

/// One summary per structural parameter (beta, zeta, sigma_alpha_sq).
pub fn summarize(draws: &PosteriorDraws) -> Result<Vec<ParameterSummary>> {
    draws
        .parameters()
        .iter()
        .map(|(name, series)| summarize_series(name, series))
        .collect()
}
