//! Observations, subgroups, global weights and the count bookkeeping shared
//! by both samplers.

mod counts;
mod data;
mod weights;

pub use counts::{observed_pairs, stick_invert, CountState, Hyperparams, Pair, Removal};
pub use data::{InteractionMatrix, SubgroupMap};
pub use weights::{CommunityMode, GlobalWeights};
