//! Random variates, densities and CDFs used by the samplers and estimators.
//!
//! The asymmetric Laplace distribution `AL(location, scale, p)` is handled
//! through its normal-exponential mixture
//! `eps = location + scale * (theta * w + tau * sqrt(w) * u)` with
//! `w ~ Exp(1)` and `u ~ N(0, 1)`.

use nalgebra::{DMatrix, DVector};
use rand_distr::Gamma;
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Lower clamp for the `lambda` argument of [`sample_gig_half`].
pub const GIG_LAMBDA_FLOOR: f64 = 1e-10;

/// Interval mass under which truncated normal draws switch to tail rejection.
pub const TRUNCNORM_TAIL_MASS: f64 = 1e-6;

/// Mixture constants of the asymmetric Laplace distribution at quantile `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileConstants {
    pub p: f64,
    pub theta: f64,
    pub tau_sq: f64,
}

impl QuantileConstants {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!(
                "quantile must lie in (0, 1), got {p}"
            )));
        }
        let pq = p * (1.0 - p);
        Ok(Self {
            p,
            theta: (1.0 - 2.0 * p) / pq,
            tau_sq: 2.0 / pq,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau_sq.sqrt()
    }
}

pub fn quantile_constants(p: f64) -> Result<QuantileConstants> {
    QuantileConstants::new(p)
}

/// Draws from `AL(location, scale, p)` via the normal-exponential mixture.
pub fn sample_al(rng: &mut RngStream, location: f64, scale: f64, qc: &QuantileConstants) -> f64 {
    debug_assert!(scale > 0.0);
    let w = rng.exp1();
    let u = rng.std_normal();
    location + scale * (qc.theta * w + qc.tau() * w.sqrt() * u)
}

/// CDF of `AL(location, scale, p)`.
pub fn cdf_al(x: f64, location: f64, scale: f64, p: f64) -> f64 {
    let s = (x - location) / scale;
    if s <= 0.0 {
        p * ((1.0 - p) * s).exp()
    } else {
        1.0 - (1.0 - p) * (-p * s).exp()
    }
}

/// Survival function `1 - cdf_al`, evaluated without cancellation.
pub fn sf_al(x: f64, location: f64, scale: f64, p: f64) -> f64 {
    let s = (x - location) / scale;
    if s <= 0.0 {
        1.0 - p * ((1.0 - p) * s).exp()
    } else {
        (1.0 - p) * (-p * s).exp()
    }
}

/// Density of `AL(location, scale, p)`.
pub fn pdf_al(x: f64, location: f64, scale: f64, p: f64) -> f64 {
    let s = (x - location) / scale;
    let check = if s < 0.0 { s * (p - 1.0) } else { s * p };
    p * (1.0 - p) / scale * (-check).exp()
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile function.
pub fn normal_quantile(u: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * u)
}

/// Draws from `N(mu, var)` truncated to `(lower, upper)`.
///
/// Bounds may be infinite. The draw is inverse-CDF based unless the interval
/// carries less than [`TRUNCNORM_TAIL_MASS`] probability, in which case an
/// exponential-proposal rejection sampler takes over.
pub fn sample_truncnorm(
    rng: &mut RngStream,
    mu: f64,
    var: f64,
    lower: f64,
    upper: f64,
) -> Result<f64> {
    if !(var > 0.0) || !var.is_finite() {
        return Err(Error::Domain(format!("truncated normal variance must be positive, got {var}")));
    }
    if !(lower < upper) {
        return Err(Error::Domain(format!(
            "empty truncation interval ({lower}, {upper})"
        )));
    }
    if !mu.is_finite() {
        return Err(Error::Domain(format!("truncated normal mean is not finite: {mu}")));
    }
    let sd = var.sqrt();
    let a = (lower - mu) / sd;
    let b = (upper - mu) / sd;
    let x = if a >= 0.0 {
        -std_truncnorm_left(rng, -b, -a)
    } else {
        std_truncnorm_left(rng, a, b)
    };
    let draw = mu + sd * x;
    // Rounding in `mu + sd * x` can land on a bound when the standardized
    // interval is far from the origin.
    if draw > lower && draw < upper {
        Ok(draw)
    } else if upper.is_infinite() {
        Ok(lower.next_up())
    } else if lower.is_infinite() {
        Ok(upper.next_down())
    } else {
        Ok(0.5 * (lower + upper))
    }
}

/// Standard normal truncated to `(a, b)` with `a < 0`.
fn std_truncnorm_left(rng: &mut RngStream, a: f64, b: f64) -> f64 {
    let pa = normal_cdf(a);
    let pb = normal_cdf(b);
    let mass = pb - pa;
    if mass >= TRUNCNORM_TAIL_MASS {
        for _ in 0..16 {
            let u = pa + rng.uniform() * mass;
            let x = normal_quantile(u);
            if x > a && x < b {
                return x;
            }
        }
    }
    if b <= 0.0 {
        -tail_rejection(rng, -b, -a)
    } else {
        bounded_rejection(rng, a, b)
    }
}

/// Standard normal truncated to `(a, b)` with `a >= 0`, by rejection from a
/// shifted exponential with the optimal rate, or from a uniform when the
/// interval is short.
fn tail_rejection(rng: &mut RngStream, a: f64, b: f64) -> f64 {
    let rate = 0.5 * (a + (a * a + 4.0).sqrt());
    if b.is_finite() && (b - a) < 1.0 / rate {
        return bounded_rejection(rng, a, b);
    }
    loop {
        let x = a + rng.exp1() / rate;
        if x >= b {
            continue;
        }
        let d = x - rate;
        if rng.uniform() <= (-0.5 * d * d).exp() && x > a {
            return x;
        }
    }
}

/// Uniform-proposal rejection on a finite interval.
fn bounded_rejection(rng: &mut RngStream, a: f64, b: f64) -> f64 {
    // log of the density maximum over [a, b]
    let peak = if a > 0.0 {
        -0.5 * a * a
    } else if b < 0.0 {
        -0.5 * b * b
    } else {
        0.0
    };
    loop {
        let x = a + (b - a) * rng.uniform();
        if x <= a || x >= b {
            continue;
        }
        if rng.uniform().ln() <= -0.5 * x * x - peak {
            return x;
        }
    }
}

/// Draws from `GIG(1/2, lambda, eta)`, the density proportional to
/// `x^(-1/2) exp(-(lambda / x + eta * x) / 2)`.
///
/// `1 / X` is inverse Gaussian with mean `sqrt(eta / lambda)` and shape
/// `eta`, which is sampled with the Michael-Schucany-Haas transformation.
/// `lambda` is clamped below at [`GIG_LAMBDA_FLOOR`].
pub fn sample_gig_half(rng: &mut RngStream, lambda: f64, eta: f64) -> Result<f64> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::Domain(format!("GIG eta must be positive, got {eta}")));
    }
    if lambda.is_nan() || lambda < 0.0 || lambda.is_infinite() {
        return Err(Error::Domain(format!("GIG lambda must be non-negative, got {lambda}")));
    }
    let lambda = lambda.max(GIG_LAMBDA_FLOOR);
    let mean = (eta / lambda).sqrt();
    let shape = eta;
    let v = rng.std_normal();
    let y = mean * v * v;
    // Roots of the MSH quadratic; the larger one is free of cancellation and
    // the smaller follows from their product `mean^2`.
    let large = mean + mean / (2.0 * shape) * (y + (y * (4.0 * shape + y)).sqrt());
    let small = mean * mean / large;
    let x = if rng.uniform() <= mean / (mean + small) {
        // inverse-Gaussian draw is `small`; 1/small = large / mean^2
        (large / mean) / mean
    } else {
        1.0 / large
    };
    Ok(x)
}

/// Unnormalized log density of `GIG(1/2, lambda, eta)`.
pub fn log_kernel_gig_half(x: f64, lambda: f64, eta: f64) -> f64 {
    -0.5 * x.ln() - 0.5 * (lambda / x + eta * x)
}

/// Draws from the inverse gamma with density proportional to
/// `x^-(shape + 1) exp(-scale / x)`.
pub fn sample_invgamma(rng: &mut RngStream, shape: f64, scale: f64) -> Result<f64> {
    if !(shape > 0.0 && scale > 0.0) || !shape.is_finite() || !scale.is_finite() {
        return Err(Error::Domain(format!(
            "inverse gamma needs positive shape and scale, got ({shape}, {scale})"
        )));
    }
    let gamma = Gamma::new(shape, 1.0 / scale)
        .map_err(|e| Error::Domain(format!("gamma({shape}, rate {scale}): {e}")))?;
    Ok(1.0 / rng.sample(&gamma))
}

/// Inverse gamma CDF, `Q(shape, scale / x)`.
pub fn cdf_invgamma(x: f64, shape: f64, scale: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    statrs::function::gamma::gamma_ur(shape, scale / x)
}

/// `mean + factor * e` with `e` iid standard normal.
pub fn sample_mvn(rng: &mut RngStream, mean: &DVector<f64>, factor: &DMatrix<f64>) -> Result<DVector<f64>> {
    if factor.nrows() != mean.len() || factor.ncols() != mean.len() {
        return Err(Error::Domain(format!(
            "factor is {}x{} but mean has length {}",
            factor.nrows(),
            factor.ncols(),
            mean.len()
        )));
    }
    if factor.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("covariance factor has non-finite entries".into()));
    }
    let e = DVector::from_fn(mean.len(), |_, _| rng.std_normal());
    Ok(mean + factor * e)
}
