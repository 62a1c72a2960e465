//! Single-site Gibbs sweep: beta, alpha, w, sigma_alpha_sq, zeta, z, each
//! conditional on the current value of everything else.

use crate::error::Result;
use crate::model::updates::{
    update_alpha, update_beta_nonblocked, update_sigma_alpha, update_w, update_z_nonblocked, update_zeta,
};
use crate::model::{ChainState, ModelSpec, PanelData};
use crate::rng::RngStream;

pub fn sweep_nonblocked(
    state: &mut ChainState,
    data: &PanelData,
    spec: &ModelSpec,
    rng: &mut RngStream,
) -> Result<()> {
    update_beta_nonblocked(state, data, spec, rng)?;
    update_alpha(state, data, spec, rng)?;
    update_w(state, data, spec, rng)?;
    update_sigma_alpha(state, data, spec, rng)?;
    update_zeta(state, data, spec, rng)?;
    update_z_nonblocked(state, data, spec, rng)?;
    Ok(())
}
