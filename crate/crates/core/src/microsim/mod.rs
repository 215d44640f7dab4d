//! Finite-size validation with explicit spin microstates.
//!
//! The reservoir, the spin bath and the memory block are simulated as bit
//! vectors. Two kinds of move act on them:
//!
//! * reservoir-bath exchange: one reservoir site and one bath site are
//!   drawn uniformly and their bits swapped (a no-op when equal). This is
//!   symmetric and conserves the up-count, so the stationary law is uniform
//!   on the fixed-total shell and the reservoir marginal is hypergeometric.
//! * block flip: the whole block toggles between all-zeros and all-ones
//!   while `s` reservoir spins flip the other way, accepted by Metropolis
//!   with respect to the product spin weights.
//!
//! Everything is checked against the closed forms in [`crate::ensemble`]
//! and [`crate::protocol`] and against exact enumeration of the shell.

mod dynamics;
mod exact;
mod rng;
mod state;
mod stats;

pub use dynamics::{
    mc_block_equilibrate, mc_reservoir_bath, mc_reservoir_bath_replicas, BathMode, BlockParams,
    ExchangeParams, TrajectoryStats,
};
pub use exact::{exact_block_p1, exact_joint_marginal};
pub use rng::{rng_stream, StreamRng};
pub use state::{ExchangeMove, MicroState, Spins};
pub use stats::{chi_square_gof, BatchMeans, ChiSquare, Estimate};
