//! Qubit erasure against thermal and spin reservoirs.
//!
//! The crate models two ways of resetting a memory bit:
//!
//! * [`model_a`]: a qubit coupled to a heat reservoir while its level
//!   splitting is raised quasi-statically, costing `kT ln 2` of work.
//! * [`protocol`]: a spin-1/2 memory reset against a polarized spin
//!   reservoir via repeated CNOT extension and spin-exchange equilibration,
//!   paid for in angular momentum with no energy term.
//!
//! [`ensemble`] holds the equilibrium theory of the spin reservoir (including
//! an independent maximum-entropy solver), [`microsim`] validates it with
//! explicit-microstate Monte Carlo, and [`demon`] turns the results into a
//! Maxwell-demon cycle ledger.
//!
//! Units are natural throughout: `hbar = k = 1`. Angular momentum is in
//! units of `hbar`, energy in units of `k` times temperature, entropy in nats.

pub mod binomial;
pub mod demon;
pub mod ensemble;
mod error;
pub mod microsim;
pub mod model_a;
pub mod parallel;
pub mod protocol;
pub mod quadrature;

pub use error::{Error, Result};
