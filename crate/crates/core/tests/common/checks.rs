//! Oracle checks shared by the focused test targets and the acceptance run.
//! Each returns a short report on success and a description on failure.

use super::*;

use panelqr::distributions::*;
use panelqr::effects::{compute_effects, Contrast, EffectOptions};
use panelqr::model::{DrawMatrix, PosteriorDraws, RunMeta};
use panelqr::{Algorithm, PanelData, RngStream};

pub type Check = std::result::Result<String, String>;

fn within_4se(draws: &[f64], target: f64, what: &str) -> Check {
    let se = (var(draws) / draws.len() as f64).sqrt();
    let m = mean(draws);
    if (m - target).abs() <= 4.0 * se {
        Ok(format!("{what}: {m:.5} vs {target:.5}"))
    } else {
        Err(format!("{what}: mean {m} vs {target}, 4se = {}", 4.0 * se))
    }
}

fn ks_ok(draws: &[f64], cdf: impl Fn(f64) -> f64, what: &str) -> Check {
    let d = ks_distance(draws, cdf);
    let crit = ks_critical_1pct(draws.len());
    if d < crit {
        Ok(format!("KS {what}: {d:.5} < {crit:.5}"))
    } else {
        Err(format!("KS {what}: {d} >= {crit}"))
    }
}

/// Closed-form AL CDF written out independently of the library.
pub fn al_cdf_oracle(x: f64, mu: f64, s: f64, p: f64) -> f64 {
    let u = (x - mu) / s;
    if u <= 0.0 {
        p * ((1.0 - p) * u).exp()
    } else {
        1.0 - (1.0 - p) * (-p * u).exp()
    }
}

pub fn al_sf_oracle(x: f64, mu: f64, s: f64, p: f64) -> f64 {
    let u = (x - mu) / s;
    if u <= 0.0 {
        1.0 - p * ((1.0 - p) * u).exp()
    } else {
        (1.0 - p) * (-p * u).exp()
    }
}

/// CDF of IG with integer shape: `Q(a, b/x) = e^{-b/x} sum_{j<a} (b/x)^j / j!`.
pub fn ig_cdf_integer_shape(x: f64, shape: u32, scale: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let z = scale / x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..shape {
        term *= z / j as f64;
        sum += term;
    }
    (-z).exp() * sum
}

pub fn tn_cdf(x: f64, mu: f64, var: f64, lo: f64, hi: f64) -> f64 {
    let s = var.sqrt();
    let a = normal_cdf((lo - mu) / s);
    let b = normal_cdf((hi - mu) / s);
    ((normal_cdf((x - mu) / s) - a) / (b - a)).clamp(0.0, 1.0)
}

fn draw_n(n: usize, mut f: impl FnMut() -> f64) -> Vec<f64> {
    (0..n).map(|_| f()).collect()
}

pub fn truncnorm_moments(seed: u64) -> Check {
    let mut rng = RngStream::new(seed);
    let target = (2.0 / std::f64::consts::PI).sqrt();
    let pos = draw_n(1_000_000, || sample_truncnorm(&mut rng, 0.0, 1.0, 0.0, f64::INFINITY).unwrap());
    if !pos.iter().all(|&z| z > 0.0) {
        return Err("TN(0,inf) draw outside support".into());
    }
    let neg = draw_n(1_000_000, || sample_truncnorm(&mut rng, 0.0, 1.0, f64::NEG_INFINITY, 0.0).unwrap());
    if neg.iter().any(|&z| z > 0.0) {
        return Err("TN(-inf,0] draw outside support".into());
    }
    let shifted = draw_n(100_000, || sample_truncnorm(&mut rng, 3.0, 2.0, f64::NEG_INFINITY, 0.0).unwrap());
    if shifted.iter().any(|&z| z > 0.0) {
        return Err("TN(-inf,0](3,2) draw outside support".into());
    }
    Ok(format!(
        "{}; {}",
        within_4se(&pos, target, "TN+ mean")?,
        within_4se(&neg, -target, "TN- mean")?
    ))
}

pub fn gig_moments(seed: u64) -> Check {
    let mut rng = RngStream::new(seed);
    let mut out = Vec::new();
    for (lambda, eta) in [(1.0, 2.0), (4.0, 4.0)] {
        let draws = draw_n(1_000_000, || sample_gig_half(&mut rng, lambda, eta).unwrap());
        if draws.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(format!("GIG({lambda},{eta}) draw not positive"));
        }
        let closed = (lambda / eta).sqrt() + 1.0 / eta;
        let numeric = NumericGigCdf::new(lambda, eta).mean;
        if (closed - numeric).abs() > 1e-6 {
            return Err(format!("GIG mean identity {closed} vs integrated {numeric}"));
        }
        out.push(within_4se(&draws, closed, &format!("GIG({lambda},{eta}) mean"))?);
    }
    Ok(out.join("; "))
}

pub fn invgamma_moments(seed: u64) -> Check {
    let mut rng = RngStream::new(seed);
    let mut out = Vec::new();
    for (shape, scale) in [(6.0, 5.5), (5.0, 4.5)] {
        let draws = draw_n(1_000_000, || sample_invgamma(&mut rng, shape, scale).unwrap());
        if !draws.iter().all(|&x| x > 0.0) {
            return Err("IG draw not positive".into());
        }
        out.push(within_4se(&draws, scale / (shape - 1.0), &format!("IG({shape},{scale}) mean"))?);
    }
    Ok(out.join("; "))
}

pub fn ks_suite(seed: u64) -> Check {
    let n = 100_000;
    let mut rng = RngStream::new(seed);
    let mut out = Vec::new();

    for (p, mu, s) in [(0.25, 0.0, 1.0), (0.5, 1.0, 2.0), (0.9, -1.0, 0.5)] {
        let qc = quantile_constants(p).unwrap();
        let draws = draw_n(n, || sample_al(&mut rng, mu, s, &qc));
        out.push(ks_ok(&draws, |x| al_cdf_oracle(x, mu, s, p), &format!("AL p={p}"))?);
    }
    for (mu, v, lo, hi) in [
        (0.0, 1.0, 0.0, f64::INFINITY),
        (3.0, 2.0, f64::NEG_INFINITY, 0.0),
        (-1.0, 0.5, 0.5, 2.0),
        (0.0, 1.0, -0.2, 0.1),
    ] {
        let draws = draw_n(n, || sample_truncnorm(&mut rng, mu, v, lo, hi).unwrap());
        if draws.iter().any(|&z| z <= lo || z >= hi) {
            return Err(format!("TN({mu},{v},{lo},{hi}) support"));
        }
        out.push(ks_ok(&draws, |x| tn_cdf(x, mu, v, lo, hi), &format!("TN({mu},{v},{lo},{hi})"))?);
    }
    for (shape, scale) in [(6u32, 5.5), (5, 4.5), (2, 1.0)] {
        let draws = draw_n(n, || sample_invgamma(&mut rng, shape as f64, scale).unwrap());
        out.push(ks_ok(&draws, |x| ig_cdf_integer_shape(x, shape, scale), &format!("IG({shape},{scale})"))?);
    }
    for (lambda, eta) in [(1.0, 2.0), (4.0, 4.0), (0.01, 8.0 / 3.0), (25.0, 2.0)] {
        let cdf = NumericGigCdf::new(lambda, eta);
        let draws = draw_n(n, || sample_gig_half(&mut rng, lambda, eta).unwrap());
        out.push(ks_ok(&draws, |x| cdf.cdf(x), &format!("GIG({lambda},{eta})"))?);
    }
    Ok(out.join("; "))
}

/// Draws container holding explicit parameter values for effect checks.
pub fn synthetic_draws(data: &PanelData, betas: &[Vec<f64>], alphas: &[Vec<f64>], p: f64) -> PosteriorDraws {
    let meta = RunMeta {
        quantile: p,
        seed: 0,
        algorithm: Algorithm::Blocked,
        iterations: betas.len(),
        burn_in: 0,
        thin: 1,
        wall_time_secs: 0.0,
    };
    let mut d = PosteriorDraws::empty(data, meta, true, betas.len());
    d.beta = DrawMatrix::from_rows(data.k(), betas.concat());
    d.alpha = Some(DrawMatrix::from_rows(data.n(), alphas.concat()));
    d.sigma_alpha_sq = vec![1.0; betas.len()];
    d
}

/// Straight triple loop over draws, individuals and periods.
pub fn brute_force_effects(
    data: &PanelData,
    betas: &[Vec<f64>],
    alphas: &[Vec<f64>],
    p: f64,
    col: usize,
    a: f64,
    b: f64,
) -> (f64, f64, f64) {
    let floor = 1e-12;
    let (mut ame, mut rr, mut or) = (0.0, 0.0, 0.0);
    for (beta, alpha) in betas.iter().zip(alphas) {
        let (mut s_ame, mut s_rr, mut s_or) = (0.0, 0.0, 0.0);
        for (i, a_i) in alpha.iter().enumerate() {
            for r in data.rows(i) {
                let mut x = data.row(r).to_vec();
                let eta = |x: &[f64]| -> f64 { x.iter().zip(beta).map(|(u, v)| u * v).sum::<f64>() + a_i };
                x[col] = a;
                let ea = eta(&x);
                x[col] = b;
                let eb = eta(&x);
                let ha = al_sf_oracle(-ea, 0.0, 1.0, p);
                let hb = al_sf_oracle(-eb, 0.0, 1.0, p);
                let fa = al_cdf_oracle(-ea, 0.0, 1.0, p);
                let fb = al_cdf_oracle(-eb, 0.0, 1.0, p);
                s_ame += hb - ha;
                s_rr += hb.max(floor) / ha.max(floor);
                s_or += (hb.max(floor) / fb.max(floor)) / (ha.max(floor) / fa.max(floor));
            }
        }
        let t = data.total() as f64;
        ame += s_ame / t;
        rr += s_rr / t;
        or += s_or / t;
    }
    let m = betas.len() as f64;
    (ame / m, rr / m, or / m)
}

pub fn effects_match_brute_force(instances: usize, seed: u64) -> Check {
    let mut rng = RngStream::new(seed);
    let mut worst: f64 = 0.0;
    for inst in 0..instances {
        let n = rng.uniform_int(1, 4);
        let t = rng.uniform_int(1, 4);
        let k_cov = rng.uniform_int(1, 3);
        let lengths: Vec<usize> = (0..n).map(|_| rng.uniform_int(1, t)).collect();
        let total: usize = lengths.iter().sum();
        let cov: Vec<f64> = (0..total * k_cov).map(|_| rng.std_normal()).collect();
        let data = PanelData::new(
            (0..n).map(|i| i.to_string()).collect(),
            &lengths,
            lengths.iter().flat_map(|&l| 1..=l as i64).collect(),
            vec![0; total],
            &cov,
            (0..k_cov).map(|j| format!("x{}", j + 2)).collect(),
            None,
        )
        .map_err(|e| e.to_string())?;
        let m = rng.uniform_int(1, 5);
        let p = 0.05 + 0.9 * rng.uniform();
        let betas: Vec<Vec<f64>> = (0..m).map(|_| (0..data.k()).map(|_| 1.5 * rng.std_normal()).collect()).collect();
        let alphas: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.std_normal()).collect()).collect();
        let col = rng.uniform_int(1, k_cov);
        let (a, b) = (2.0 * rng.std_normal(), 2.0 * rng.std_normal());
        let draws = synthetic_draws(&data, &betas, &alphas, p);
        let got = compute_effects(&draws, &data, &Contrast::new(col, a, b).unwrap(), &EffectOptions::default())
            .map_err(|e| e.to_string())?;
        let want = brute_force_effects(&data, &betas, &alphas, p, col, a, b);
        for (g, w) in [(got.ame.mean, want.0), (got.rr.mean, want.1), (got.or.mean, want.2)] {
            let err = (g - w).abs() / w.abs().max(1.0);
            worst = worst.max(err);
            if err > 1e-12 {
                return Err(format!("instance {inst}: {g} vs {w}"));
            }
        }
    }
    Ok(format!("{instances} instances, worst rel err {worst:.2e}"))
}

/// One observation, `p = 0.5`, `beta_j = 1`, contrast 0 -> 1 on a covariate
/// whose other contributions are zero.
pub fn single_point_effects() -> Check {
    let data = PanelData::new(vec!["a".into()], &[1], vec![1], vec![1], &[0.0], vec!["x2".into()], None)
        .map_err(|e| e.to_string())?;
    let draws = synthetic_draws(&data, &[vec![0.0, 1.0]], &[vec![0.0]], 0.5);
    let e = compute_effects(&draws, &data, &Contrast::new(1, 0.0, 1.0).unwrap(), &EffectOptions::default())
        .map_err(|e| e.to_string())?;
    let ame = 0.5 - 0.5 * (-0.5f64).exp();
    let rr = (1.0 - 0.5 * (-0.5f64).exp()) / 0.5;
    let or = (1.0 - 0.5 * (-0.5f64).exp()) / (0.5 * (-0.5f64).exp());
    for (got, closed, printed) in [(e.ame.mean, ame, 0.196735), (e.rr.mean, rr, 1.39347), (e.or.mean, or, 2.29745)] {
        if (got - closed).abs() > 1e-12 || (got - printed).abs() > 1e-5 {
            return Err(format!("single point: {got} vs {closed} ({printed})"));
        }
    }
    Ok(format!("AME {:.6} RR {:.5} OR {:.5}", e.ame.mean, e.rr.mean, e.or.mean))
}

/// With success probabilities near zero the odds ratio approaches the risk
/// ratio.
pub fn rare_event_or_close_to_rr() -> Check {
    let n = 30;
    let mut rng = RngStream::new(99);
    let cov: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
    let data = PanelData::new(
        (0..n).map(|i| i.to_string()).collect(),
        &vec![1; n],
        vec![1; n],
        vec![0; n],
        &cov,
        vec!["x2".into()],
        None,
    )
    .map_err(|e| e.to_string())?;
    let betas: Vec<Vec<f64>> = (0..20).map(|_| vec![-9.0 + 0.2 * rng.std_normal(), 0.5]).collect();
    let alphas: Vec<Vec<f64>> = (0..20).map(|_| (0..n).map(|_| 0.1 * rng.std_normal()).collect()).collect();
    let draws = synthetic_draws(&data, &betas, &alphas, 0.5);
    let e = compute_effects(&draws, &data, &Contrast::new(1, 0.0, 1.0).unwrap(), &EffectOptions::default())
        .map_err(|e| e.to_string())?;
    let rel = (e.or.mean - e.rr.mean).abs() / e.rr.mean;
    if rel < 0.02 {
        Ok(format!("OR {:.5} RR {:.5} rel {rel:.2e}", e.or.mean, e.rr.mean))
    } else {
        Err(format!("OR {} vs RR {} rel {rel}", e.or.mean, e.rr.mean))
    }
}


/// Joint-distribution test on a small fixed design: Gibbs sweeps alternated
/// with regeneration of `(w, z, y)` given the parameters must reproduce the
/// prior moments of `(beta, zeta, sigma)`.
pub fn getting_it_right(algorithm: Algorithm, iterations: usize, seed: u64) -> Check {
    use panelqr::sampler::sweep;
    use panelqr::{ChainState, ModelSpec, Prior};

    let mut data = tiny_panel(20, 3, seed);
    let (k, q) = (data.k(), data.q());
    let mut prior = Prior::isotropic(k, q, 1.0, 1.0, 12.0, 11.0);
    prior.beta_mean = nalgebra::DVector::from_vec(vec![0.3, -0.5]);
    prior.zeta_mean = nalgebra::DVector::from_vec(vec![0.4]);
    let spec = ModelSpec::new(0.3, &prior).map_err(|e| e.to_string())?;
    let qc = spec.quantile;
    let mut rng = RngStream::new(seed).substream(0x6769);
    let bl = prior.beta_cov.clone().cholesky().unwrap().l();
    let zl = prior.zeta_cov.clone().cholesky().unwrap().l();

    let draw_prior = |rng: &mut RngStream| -> ChainState {
        let beta = sample_mvn(rng, &prior.beta_mean, &bl).unwrap();
        let zeta = sample_mvn(rng, &prior.zeta_mean, &zl).unwrap();
        let s = sample_invgamma(rng, prior.c1 / 2.0, prior.d1 / 2.0).unwrap();
        let alpha = (0..data.n())
            .map(|i| {
                let m: f64 = data.mbar(i).iter().zip(zeta.iter()).map(|(a, b)| a * b).sum();
                m + s.sqrt() * rng.std_normal()
            })
            .collect();
        ChainState { beta, alpha, zeta, sigma_alpha_sq: s, z: vec![0.0; data.total()], w: vec![1.0; data.total()] }
    };
    // (w, z, y) | parameters
    let regenerate = |state: &mut ChainState, data: &PanelData, rng: &mut RngStream| -> Vec<u8> {
        let xb = state.linear_predictor(data);
        let mut y = vec![0u8; data.total()];
        for i in 0..data.n() {
            for r in data.rows(i) {
                let w = rng.exp1();
                let z = xb[r] + state.alpha[i] + qc.theta * w + qc.tau() * w.sqrt() * rng.std_normal();
                state.w[r] = w.max(1e-10);
                state.z[r] = z;
                y[r] = u8::from(z > 0.0);
            }
        }
        y
    };
    let record = |s: &ChainState, out: &mut [Vec<f64>]| {
        out[0].push(s.beta[0]);
        out[1].push(s.beta[1]);
        out[2].push(s.zeta[0]);
        out[3].push(s.sigma_alpha_sq);
    };

    let mut marginal = (0..4).map(|_| Vec::with_capacity(iterations)).collect::<Vec<_>>();
    for _ in 0..iterations {
        record(&draw_prior(&mut rng), &mut marginal);
    }

    let mut successive = (0..4).map(|_| Vec::with_capacity(iterations)).collect::<Vec<_>>();
    let mut state = draw_prior(&mut rng);
    let y = regenerate(&mut state, &data, &mut rng);
    data.set_outcomes(y).map_err(|e| e.to_string())?;
    for _ in 0..iterations {
        sweep(algorithm, &mut state, &data, &spec, &mut rng).map_err(|e| e.to_string())?;
        record(&state, &mut successive);
        let y = regenerate(&mut state, &data, &mut rng);
        data.set_outcomes(y).map_err(|e| e.to_string())?;
    }

    let names = ["beta_1", "beta_2", "zeta_1", "sigma_alpha2"];
    let mut report = Vec::new();
    for (j, name) in names.iter().enumerate() {
        for power in [1, 2] {
            let a: Vec<f64> = successive[j].iter().map(|v| v.powi(power)).collect();
            let b: Vec<f64> = marginal[j].iter().map(|v| v.powi(power)).collect();
            let (ok, d, tol) = means_agree(&a, &b);
            if !ok {
                return Err(format!("{algorithm}: E[{name}^{power}] differs by {d:.4} > {tol:.4}"));
            }
            report.push(d / tol);
        }
    }
    let worst = report.iter().cloned().fold(0.0, f64::max);
    Ok(format!("{algorithm}: 8 moments agree, worst |diff|/(4 se) = {worst:.2}"))
}
