mod common;

use common::checks::getting_it_right;
use common::*;
use panelqr::diagnostics::geweke_z;
use panelqr::sampler::{run_chain, sweep};
use panelqr::{Algorithm, ChainState, Error, ModelSpec, Prior, RngStream, SamplerConfig};

fn config(algorithm: Algorithm, iterations: usize, burn_in: usize, thin: usize, seed: u64) -> SamplerConfig {
    SamplerConfig { iterations, burn_in, thin, seed, algorithm, store_alpha: true }
}

#[test]
fn sweeps_preserve_state_invariants() {
    let sim = small_panel(30, 0.25, 4);
    let spec = ModelSpec::new(0.25, &Prior::diffuse(sim.data.k(), sim.data.q())).unwrap();
    for algorithm in [Algorithm::NonBlocked, Algorithm::Blocked] {
        let mut rng = RngStream::new(1);
        let mut state = ChainState::initialize(&sim.data, &spec, &mut rng);
        for _ in 0..300 {
            sweep(algorithm, &mut state, &sim.data, &spec, &mut rng).unwrap();
            state.validate(&sim.data).unwrap();
        }
    }
}

#[test]
fn stored_draw_count() {
    let data = tiny_panel(5, 2, 1);
    let spec = ModelSpec::new(0.5, &Prior::diffuse(data.k(), data.q())).unwrap();
    for algorithm in [Algorithm::NonBlocked, Algorithm::Blocked] {
        let draws = run_chain(&data, &spec, &config(algorithm, 16000, 1000, 10, 3)).unwrap();
        assert_eq!(draws.len(), 1500);
        assert_eq!(draws.beta.nrows(), 1500);
        assert_eq!(draws.alpha.as_ref().unwrap().nrows(), 1500);
        assert_eq!(draws.meta.algorithm, algorithm);
    }
}

#[test]
fn equal_seeds_give_identical_chains() {
    let data = tiny_panel(8, 3, 2);
    let spec = ModelSpec::new(0.4, &Prior::diffuse(data.k(), data.q())).unwrap();
    for algorithm in [Algorithm::NonBlocked, Algorithm::Blocked] {
        let a = run_chain(&data, &spec, &config(algorithm, 400, 100, 2, 9)).unwrap();
        let b = run_chain(&data, &spec, &config(algorithm, 400, 100, 2, 9)).unwrap();
        let c = run_chain(&data, &spec, &config(algorithm, 400, 100, 2, 10)).unwrap();
        assert_eq!(a.beta, b.beta);
        assert_eq!(a.sigma_alpha_sq, b.sigma_alpha_sq);
        assert_ne!(a.beta, c.beta);
    }
}

#[test]
fn invalid_configs_rejected() {
    let data = tiny_panel(3, 2, 1);
    let spec = ModelSpec::new(0.5, &Prior::diffuse(data.k(), data.q())).unwrap();
    for bad in [
        config(Algorithm::Blocked, 100, 100, 1, 0),
        config(Algorithm::Blocked, 100, 10, 0, 0),
        config(Algorithm::Blocked, 0, 0, 1, 0),
    ] {
        assert!(matches!(run_chain(&data, &spec, &bad), Err(Error::Config { .. })));
    }
    assert!("gibbs".parse::<Algorithm>().is_err());
    let wrong = ModelSpec::new(0.5, &Prior::diffuse(3, 1)).unwrap();
    assert!(run_chain(&data, &wrong, &config(Algorithm::Blocked, 10, 0, 1, 0)).is_err());
}

#[test]
fn getting_it_right_nonblocked() {
    getting_it_right(Algorithm::NonBlocked, 60_000, 5).unwrap();
}

#[test]
fn getting_it_right_blocked() {
    getting_it_right(Algorithm::Blocked, 60_000, 6).unwrap();
}

#[test]
fn recovers_parameters_on_moderate_panel() {
    let sim = small_panel(300, 0.5, 12);
    let spec = ModelSpec::new(0.5, &Prior::diffuse(sim.data.k(), sim.data.q())).unwrap();
    let truth = [0.5, 1.0, 0.6, -0.8, -1.0, 1.0, 1.0];
    let draws = run_chain(&sim.data, &spec, &config(Algorithm::Blocked, 4000, 500, 2, 1)).unwrap();
    for ((name, series), t) in draws.parameters().into_iter().zip(truth) {
        let m = mean(&series);
        let sd = var(&series).sqrt();
        assert!((m - t).abs() < 4.0 * sd, "{name}: {m} vs {t} (sd {sd})");
    }
}

#[test]
fn blocked_chain_passes_geweke_after_burn_in() {
    let sim = small_panel(100, 0.5, 21);
    let spec = ModelSpec::new(0.5, &Prior::diffuse(sim.data.k(), sim.data.q())).unwrap();
    let draws = run_chain(&sim.data, &spec, &config(Algorithm::Blocked, 6000, 1000, 1, 2)).unwrap();
    let zs: Vec<f64> = draws.parameters().iter().map(|(_, s)| geweke_z(s, 0.1, 0.4).unwrap()).collect();
    // seven parameters: allow one borderline value
    assert!(zs.iter().filter(|z| z.abs() > 2.58).count() <= 1, "{zs:?}");
    assert!(zs.iter().all(|z| z.abs() < 4.0), "{zs:?}");
}
