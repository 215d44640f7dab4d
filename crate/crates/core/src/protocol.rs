//! Spin-reservoir erasure as an analytic state machine.
//!
//! The memory spin is first equilibrated against the reservoir, leaving it
//! in `|1>` with probability `1 / (1 + e^g)`. Each cycle then
//!
//! 1. CNOTs the memory onto a fresh ancilla in `|0>`, growing the block by
//!    one spin and widening the gap between `|0...0>` and `|1...1>` by one
//!    quantum. Its expected angular-momentum cost is the current `p1`.
//! 2. Re-equilibrates the block against the reservoir through the collective
//!    exchange `|s,1>_r |0...0> <-> |0,1>_r |1...1>`, which sets
//!    `p1 = 1 / (1 + e^{s g})` for a block of `s` spins.
//!
//! The block is always a mixture of its two extreme configurations, so a
//! state is fully described by `(block_size, p1)`.
//!
//! Cycle `c` (counting from 1) pays `1 / (1 + e^{c g})` and leaves a block of
//! `c + 1` spins at `p1 = 1 / (1 + e^{(c+1) g})`. Summed over all cycles the
//! cost is `sum_{n>=1} 1 / (1 + e^{n g})`, bounded by
//! `ln(1 + e^{-g}) / g < dJz < ln 2 / g`.

use serde::Serialize;

use crate::ensemble::{logistic, softplus};
use crate::{Error, Result};

/// Equilibrium probability of the all-ones configuration of an `s`-spin
/// block against a reservoir with multiplier `gamma_tilde`.
pub fn equilibrium_p1(block_size: u32, gamma_tilde: f64) -> f64 {
    logistic(block_size as f64 * gamma_tilde)
}

/// The memory-plus-ancilla block `p0 |0...0><0...0| + p1 |1...1><1...1|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MemoryBlockState {
    block_size: u32,
    p1: f64,
    cycle_index: u32,
    equilibrated: bool,
}

impl MemoryBlockState {
    pub fn block_size(&self) -> u32 {
        self.block_size
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p0(&self) -> f64 {
        1.0 - self.p1
    }

    pub fn cycle_index(&self) -> u32 {
        self.cycle_index
    }

    pub fn is_equilibrated(&self) -> bool {
        self.equilibrated
    }

    /// Expected number of up spins in the block.
    pub fn mean_up(&self) -> f64 {
        self.block_size as f64 * self.p1
    }
}

/// The memory spin after its first contact with the reservoir.
///
/// `gamma_tilde <= 0` is accepted; such a reservoir cannot erase and leaves
/// `p1 >= 1/2`.
pub fn initial_contact(gamma_tilde: f64) -> MemoryBlockState {
    MemoryBlockState {
        block_size: 1,
        p1: equilibrium_p1(1, gamma_tilde),
        cycle_index: 0,
        equilibrated: true,
    }
}

/// CNOT with the block as control and a fresh `|0>` ancilla as target.
/// Returns the extended block and the expected angular-momentum cost.
pub fn cnot_extend(state: MemoryBlockState) -> Result<(MemoryBlockState, f64)> {
    if !state.equilibrated {
        return Err(Error::InvalidState(
            "CNOT extension requires an equilibrated block",
        ));
    }
    let next = MemoryBlockState {
        block_size: state.block_size + 1,
        p1: state.p1,
        cycle_index: state.cycle_index + 1,
        equilibrated: false,
    };
    Ok((next, state.p1))
}

/// Collective exchange with the reservoir across the block's `s`-quantum gap.
pub fn equilibrate(state: MemoryBlockState, gamma_tilde: f64) -> MemoryBlockState {
    MemoryBlockState {
        p1: equilibrium_p1(state.block_size, gamma_tilde),
        equilibrated: true,
        ..state
    }
}

/// Angular-momentum flows of one cycle, in expectation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleAudit {
    pub cycle: u32,
    /// Spin injected by the CNOT (equals the ledger entry).
    pub cnot_spin_in: f64,
    pub block_up_before: f64,
    pub block_up_after_cnot: f64,
    /// Spin handed to the reservoir during equilibration.
    pub spin_to_reservoir: f64,
    pub block_up_after: f64,
}

impl CycleAudit {
    /// Net change of the block's up-count minus the two external flows.
    pub fn imbalance(&self) -> f64 {
        (self.block_up_after - self.block_up_before) - (self.cnot_spin_in - self.spin_to_reservoir)
    }
}

/// Runs one CNOT-plus-equilibration cycle and accounts for every quantum.
pub fn audit_cycle(
    state: MemoryBlockState,
    gamma_tilde: f64,
) -> Result<(MemoryBlockState, CycleAudit)> {
    let before = state.mean_up();
    let (extended, cost) = cnot_extend(state)?;
    let after_cnot = extended.mean_up();
    let settled = equilibrate(extended, gamma_tilde);
    let after = settled.mean_up();
    Ok((
        settled,
        CycleAudit {
            cycle: settled.cycle_index,
            cnot_spin_in: cost,
            block_up_before: before,
            block_up_after_cnot: after_cnot,
            spin_to_reservoir: after_cnot - after,
            block_up_after: after,
        },
    ))
}

/// Accumulated angular momentum (and optionally energy) spent on erasure.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CostLedger {
    pub delta_jz: f64,
    pub per_cycle_costs: Vec<f64>,
    /// Count the memory's initial half quantum in [`CostLedger::total`].
    pub include_initial: bool,
    /// Residual energy per quantum of CNOT spin cost, if the levels are not
    /// exactly degenerate.
    pub epsilon: Option<f64>,
    pub delta_e: Option<f64>,
}

impl CostLedger {
    pub fn new(include_initial: bool) -> Self {
        Self {
            include_initial,
            ..Self::default()
        }
    }

    pub fn record(&mut self, cost: f64) {
        self.per_cycle_costs.push(cost);
        self.delta_jz += cost;
        if let Some(eps) = self.epsilon {
            self.delta_e = Some(eps * self.delta_jz);
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.delta_e = Some(energy_cost(epsilon, self.delta_jz)?);
        self.epsilon = Some(epsilon);
        Ok(self)
    }

    /// `delta_jz`, plus one half when the initial spin is included.
    pub fn total(&self) -> f64 {
        if self.include_initial {
            self.delta_jz + 0.5
        } else {
            self.delta_jz
        }
    }
}

/// When [`run_protocol`] stops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Stop {
    Cycles(u32),
    /// Stop as soon as `p1` drops strictly below the target.
    TargetP1(f64),
}

/// One row of the protocol trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleRecord {
    pub cycle: u32,
    pub block_size: u32,
    pub p1: f64,
    pub cycle_cost: f64,
    pub cumulative_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolRun {
    pub state: MemoryBlockState,
    pub ledger: CostLedger,
    pub history: Vec<CycleRecord>,
}

/// Hard ceiling on the cycle count a target-p1 run may need.
pub const MAX_CYCLES: u32 = 1 << 24;

/// Initial contact followed by alternating CNOT extension and equilibration.
pub fn run_protocol(gamma_tilde: f64, stop: Stop) -> Result<ProtocolRun> {
    if !gamma_tilde.is_finite() {
        return Err(Error::domain("gamma_tilde", gamma_tilde, "finite reals"));
    }
    let mut state = initial_contact(gamma_tilde);
    let cycles = match stop {
        Stop::Cycles(c) => c,
        Stop::TargetP1(target) => cycles_to_reach(gamma_tilde, target, state.p1)?,
    };

    let mut ledger = CostLedger::new(false);
    let mut history = Vec::with_capacity(cycles as usize);
    for _ in 0..cycles {
        let (extended, cost) = cnot_extend(state)?;
        state = equilibrate(extended, gamma_tilde);
        ledger.record(cost);
        history.push(CycleRecord {
            cycle: state.cycle_index,
            block_size: state.block_size,
            p1: state.p1,
            cycle_cost: cost,
            cumulative_cost: ledger.delta_jz,
        });
    }
    Ok(ProtocolRun {
        state,
        ledger,
        history,
    })
}

fn cycles_to_reach(gamma_tilde: f64, target: f64, initial_p1: f64) -> Result<u32> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::domain("target_p1", target, "(0, 1]"));
    }
    if initial_p1 < target {
        return Ok(0);
    }
    if gamma_tilde <= 0.0 {
        return Err(Error::NonTermination {
            gamma_tilde,
            target,
        });
    }
    // Smallest block size s with 1/(1+e^{s g}) < target, then walk forward
    // to absorb rounding in the estimate.
    let threshold = ((1.0 - target) / target).ln() / gamma_tilde;
    let estimate = threshold.floor().max(1.0);
    if estimate > MAX_CYCLES as f64 {
        return Err(Error::NonTermination {
            gamma_tilde,
            target,
        });
    }
    let mut size = (estimate as u32).saturating_sub(1).max(1);
    while equilibrium_p1(size, gamma_tilde) >= target {
        size += 1;
        if size > MAX_CYCLES {
            return Err(Error::NonTermination {
                gamma_tilde,
                target,
            });
        }
    }
    Ok(size - 1)
}

/// Value of the spin-cost series with its truncation bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinCost {
    pub value: f64,
    pub terms: u32,
    /// Geometric bound on the omitted terms, at most the requested tolerance.
    pub tail_bound: f64,
}

/// `dJz = sum_{n>=1} 1 / (1 + e^{n g})`, truncated once the geometric tail
/// bound `e^{-(n0+1) g} / (1 - e^{-g})` falls to `tol`.
pub fn total_spin_cost(gamma_tilde: f64, tol: f64) -> Result<SpinCost> {
    if !(gamma_tilde > 0.0) {
        return Err(Error::Divergence(gamma_tilde));
    }
    if !(tol > 0.0) {
        return Err(Error::domain("tol", tol, "(0, inf)"));
    }
    let ratio = (-gamma_tilde).exp();
    let denom = -(-gamma_tilde).exp_m1();
    let tail_after = |n0: u32| ratio.powf(n0 as f64 + 1.0) / denom;
    let mut terms = 0u32;
    let mut value = 0.0;
    while tail_after(terms) > tol {
        terms += 1;
        if terms > MAX_CYCLES {
            return Err(Error::NoConvergence(format!(
                "spin-cost series needs more than {MAX_CYCLES} terms at gamma_tilde = {gamma_tilde}"
            )));
        }
    }
    // Small terms first.
    for n in (1..=terms).rev() {
        value += equilibrium_p1(n, gamma_tilde);
    }
    Ok(SpinCost {
        value,
        terms,
        tail_bound: tail_after(terms),
    })
}

/// Closed-form bounds on the total spin cost. Without the initial spin:
/// `(ln(1 + e^{-g}) / g, ln 2 / g)`; with it: `(ln 2 / g, ln(1 + e^g) / g)`.
pub fn spin_cost_bounds(gamma_tilde: f64, include_initial: bool) -> Result<(f64, f64)> {
    if !(gamma_tilde > 0.0) || !gamma_tilde.is_finite() {
        return Err(Error::domain("gamma_tilde", gamma_tilde, "(0, inf)"));
    }
    let ln2 = std::f64::consts::LN_2 / gamma_tilde;
    Ok(if include_initial {
        (ln2, softplus(gamma_tilde) / gamma_tilde)
    } else {
        (softplus(-gamma_tilde) / gamma_tilde, ln2)
    })
}

/// Energy drawn by the CNOTs when each quantum of spin cost carries a
/// residual splitting `epsilon`: `epsilon * delta_jz`.
pub fn energy_cost(epsilon: f64, delta_jz: f64) -> Result<f64> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::domain("epsilon", epsilon, "[0, inf)"));
    }
    Ok(epsilon * delta_jz)
}
