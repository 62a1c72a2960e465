//! Panel data, model specification, chain state and the shared
//! full-conditional updates.

mod data;
mod spec;
mod state;
pub mod updates;

pub use data::PanelData;
pub use spec::{ModelSpec, Prior};
pub use state::{Algorithm, ChainState, DrawMatrix, PosteriorDraws, RunMeta, SamplerConfig};
