//! The single-class latent Gaussian graphical model and its Gibbs sampler.

mod chain;
mod config;
mod expansion;
mod omega;
mod prior_sim;
mod state;
mod updates;

pub use chain::{median_graph, run_chain, ChainOutput, ChainTrace, Draws};
pub(crate) use chain::{Accumulator, Sweeper};
pub use config::{
    ChainConfig, ExpansionMode, MarginalPrior, PriorKind, SpikeSlabHyper, VSampling, WishartDf,
};
pub use expansion::{expand, expand_with_scales, project_back, update_omega_uniform, SamplerWorkspace};
pub use omega::update_omega_ss;
pub use prior_sim::{simulate_prior_edge_probability, PriorEdgeSummary};
pub(crate) use prior_sim::quantile;
pub use state::{init_state, CorrelationState, EdgeMask, ModelState};
pub use updates::{inclusion_probability, update_delta, update_lambda, update_mu, update_z};
