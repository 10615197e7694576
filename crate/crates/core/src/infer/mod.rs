//! The two collapsed Gibbs samplers and their orchestration into chains.
//!
//! Both samplers integrate out the block link probabilities. The π variant
//! keeps each node's membership vector and integrates out the copula
//! coordinates of every pair; the uv variant does the opposite.

mod beta;
mod chain;
mod config;
mod state;
mod tables;

pub use beta::{antoniak_tables, resample_beta, resample_beta_given_pi};
pub use chain::{
    run_chain, run_from, Acceptance, Chain, InitialState, IterationRecord, PredictiveSum, Trace,
};
pub use config::{ChainConfig, Variant};
pub use state::{PiState, UvState};
pub use tables::{pi_rectangle_table, uv_interval_prob};
