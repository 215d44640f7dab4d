//! Maxwell-demon cycle accounting.
//!
//! A demon extracts `T ln 2` of work per bit from a single heat reservoir,
//! recording one bit of memory per cycle, and resets the memory by the spin
//! protocol. The heat reservoir loses `ln 2` nats per bit; the spin
//! reservoir absorbs `dJz'` quanta of angular momentum per bit, which raises
//! its entropy by `g dJz'` (the entropy slope of the equilibrium law is `g`
//! per up spin). That price exceeds `ln 2` for every `g > 0`, so the total
//! entropy change is positive while the erasure costs no energy.
//!
//! Measurement is free and the engine stroke is taken at its reversible
//! value; entropies are information-theoretic, in nats.

use serde::Serialize;
use std::f64::consts::LN_2;

use crate::ensemble::{alpha_from_gamma, distribution_entropy, occupation_marginal, ReservoirSpec};
use crate::protocol::{energy_cost, total_spin_cost};
use crate::{Error, Result};

/// Truncation tolerance of the spin-cost series.
pub const SERIES_TOL: f64 = 1e-14;

/// Ledger of one demon cycle over `bits` bits. Entropies in nats, energies
/// in the units of `temperature` (k = 1), spin in units of hbar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleLedger {
    pub temperature: f64,
    pub gamma_tilde: f64,
    pub epsilon: f64,
    pub bits: u64,
    pub work_extracted: f64,
    /// `bits * dJz'`, including each memory spin's initial half quantum.
    pub spin_spent: f64,
    pub memory_entropy_change: f64,
    pub spin_reservoir_entropy_change: f64,
    pub heat_reservoir_entropy_change: f64,
    /// `epsilon * spin_spent`; identically zero at `epsilon = 0`.
    pub net_energy_cost_of_erasure: f64,
}

impl CycleLedger {
    pub fn total_entropy_change(&self) -> f64 {
        self.memory_entropy_change
            + self.spin_reservoir_entropy_change
            + self.heat_reservoir_entropy_change
    }
}

fn check_temperature(temperature: f64) -> Result<()> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(Error::domain("temperature", temperature, "(0, inf)"));
    }
    Ok(())
}

fn check_gamma(gamma_tilde: f64) -> Result<()> {
    if !(gamma_tilde > 0.0) || !gamma_tilde.is_finite() {
        return Err(Error::domain("gamma_tilde", gamma_tilde, "(0, inf)"));
    }
    Ok(())
}

/// Reversible work per bit drawn from a heat reservoir at `temperature`.
pub fn szilard_work_per_bit(temperature: f64) -> Result<f64> {
    check_temperature(temperature)?;
    Ok(temperature * LN_2)
}

/// Angular momentum spent erasing one bit, `dJz` or `dJz' = dJz + 1/2`.
pub fn spin_spent_per_bit(gamma_tilde: f64, include_initial: bool) -> Result<f64> {
    check_gamma(gamma_tilde)?;
    let djz = total_spin_cost(gamma_tilde, SERIES_TOL)?.value;
    Ok(if include_initial { djz + 0.5 } else { djz })
}

/// Spin-reservoir entropy increase per erased bit, `g dJz` (or `g dJz'`).
/// With the initial spin this exceeds `ln 2` and tends to it as `g -> 0`.
pub fn erasure_entropy_price(gamma_tilde: f64, include_initial: bool) -> Result<f64> {
    Ok(gamma_tilde * spin_spent_per_bit(gamma_tilde, include_initial)?)
}

/// Entropy change of a finite reservoir of `n_spins` spins at `gamma_tilde`
/// when its mean up-count rises by `delta_up`, computed from the two
/// equilibrium microstate laws directly. Approaches `g delta_up` as
/// `n_spins` grows.
pub fn finite_reservoir_entropy_shift(
    n_spins: u32,
    gamma_tilde: f64,
    delta_up: f64,
) -> Result<f64> {
    let before = ReservoirSpec::from_gamma(n_spins, gamma_tilde)?;
    let shifted_alpha = alpha_from_gamma(gamma_tilde) + delta_up / n_spins as f64;
    let after = ReservoirSpec::from_alpha(n_spins, shifted_alpha)?;
    Ok(distribution_entropy(&occupation_marginal(&after), true)
        - distribution_entropy(&occupation_marginal(&before), true))
}

/// Ledger for `bits` demon cycles with the erasure quanta free of energy.
pub fn demon_cycle(temperature: f64, gamma_tilde: f64, bits: u64) -> Result<CycleLedger> {
    demon_cycle_with_epsilon(temperature, gamma_tilde, bits, 0.0)
}

/// As [`demon_cycle`], with each spin quantum carrying energy `epsilon`.
pub fn demon_cycle_with_epsilon(
    temperature: f64,
    gamma_tilde: f64,
    bits: u64,
    epsilon: f64,
) -> Result<CycleLedger> {
    check_temperature(temperature)?;
    check_gamma(gamma_tilde)?;
    energy_cost(epsilon, 0.0)?;
    let mut ledger = CycleLedger {
        temperature,
        gamma_tilde,
        epsilon,
        bits,
        work_extracted: 0.0,
        spin_spent: 0.0,
        memory_entropy_change: 0.0,
        spin_reservoir_entropy_change: 0.0,
        heat_reservoir_entropy_change: 0.0,
        net_energy_cost_of_erasure: 0.0,
    };
    if bits == 0 {
        return Ok(ledger);
    }
    let b = bits as f64;
    let per_bit = spin_spent_per_bit(gamma_tilde, true)?;
    ledger.work_extracted = b * szilard_work_per_bit(temperature)?;
    ledger.spin_spent = b * per_bit;
    ledger.heat_reservoir_entropy_change = -b * LN_2;
    ledger.spin_reservoir_entropy_change = b * gamma_tilde * per_bit;
    ledger.net_energy_cost_of_erasure = energy_cost(epsilon, ledger.spin_spent)?;
    Ok(ledger)
}
