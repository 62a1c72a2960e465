//! Chain drivers for the two Gibbs samplers.

pub mod blocked;
pub mod nonblocked;

use std::time::Instant;

pub use blocked::sweep_blocked;
pub use nonblocked::sweep_nonblocked;

use crate::error::Result;
pub use crate::model::Algorithm;
use crate::model::{ChainState, ModelSpec, PanelData, PosteriorDraws, RunMeta, SamplerConfig};
use crate::rng::RngStream;

/// One full Gibbs iteration of the chosen algorithm.
pub fn sweep(
    algorithm: Algorithm,
    state: &mut ChainState,
    data: &PanelData,
    spec: &ModelSpec,
    rng: &mut RngStream,
) -> Result<()> {
    match algorithm {
        Algorithm::NonBlocked => sweep_nonblocked(state, data, spec, rng),
        Algorithm::Blocked => sweep_blocked(state, data, spec, rng),
    }
}

/// Runs a chain from the default initial state, seeded by `config.seed`.
pub fn run_chain(data: &PanelData, spec: &ModelSpec, config: &SamplerConfig) -> Result<PosteriorDraws> {
    config.validate()?;
    spec.check_dims(data.k(), data.q())?;
    let mut rng = RngStream::new(config.seed);
    let state = ChainState::initialize(data, spec, &mut rng);
    run_chain_from(state, data, spec, config, &mut rng)
}

pub fn run_chain_nonblocked(data: &PanelData, spec: &ModelSpec, config: &SamplerConfig) -> Result<PosteriorDraws> {
    run_chain(data, spec, &SamplerConfig { algorithm: Algorithm::NonBlocked, ..config.clone() })
}

pub fn run_chain_blocked(data: &PanelData, spec: &ModelSpec, config: &SamplerConfig) -> Result<PosteriorDraws> {
    run_chain(data, spec, &SamplerConfig { algorithm: Algorithm::Blocked, ..config.clone() })
}

/// Runs `config.iterations` sweeps from `state`, storing every `thin`-th
/// draw after burn-in. Draws are recorded after complete sweeps.
pub fn run_chain_from(
    mut state: ChainState,
    data: &PanelData,
    spec: &ModelSpec,
    config: &SamplerConfig,
    rng: &mut RngStream,
) -> Result<PosteriorDraws> {
    config.validate()?;
    spec.check_dims(data.k(), data.q())?;
    let start = Instant::now();
    let meta = RunMeta {
        quantile: spec.quantile.p,
        seed: config.seed,
        algorithm: config.algorithm,
        iterations: config.iterations,
        burn_in: config.burn_in,
        thin: config.thin,
        wall_time_secs: 0.0,
    };
    let mut draws = PosteriorDraws::empty(data, meta, config.store_alpha, config.kept());
    for it in 0..config.iterations {
        sweep(config.algorithm, &mut state, data, spec, rng).map_err(|e| e.at_iteration(it))?;
        if it >= config.burn_in && (it - config.burn_in + 1).is_multiple_of(config.thin) {
            draws.push(&state);
        }
    }
    draws.meta.wall_time_secs = start.elapsed().as_secs_f64();
    log::info!(
        "{} chain at p = {}: {} iterations in {:.2}s",
        config.algorithm,
        spec.quantile.p,
        config.iterations,
        draws.meta.wall_time_secs
    );
    Ok(draws)
}
