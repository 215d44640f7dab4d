use bitvec::prelude::*;
use serde::Serialize;

use crate::{Error, Result};

pub type Spins = BitVec<u64, Lsb0>;

/// Bit-level configuration of reservoir, bath and memory block.
///
/// `total_up` is the conserved number of up spins. It equals the popcount
/// of the three registers plus `ideal_bath_balance`, the net number of up
/// spins absorbed by an implicit infinite bath (zero unless the ideal-bath
/// dynamics are in use).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MicroState {
    reservoir: Spins,
    bath: Spins,
    block: Spins,
    total_up: i64,
    ideal_bath_balance: i64,
}

/// A conserving move.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ExchangeMove {
    /// Swap a reservoir bit with a bath bit.
    Pair {
        reservoir_site: usize,
        bath_site: usize,
    },
    /// Toggle the whole block, flipping the listed reservoir sites the
    /// opposite way. The sites must be up when the block is all-zeros and
    /// down when it is all-ones.
    BlockFlip { reservoir_sites: Vec<usize> },
}

impl MicroState {
    pub fn new(reservoir: Spins, bath: Spins, block: Spins) -> Result<Self> {
        if !is_uniform(&block) {
            return Err(Error::InvalidState("block must be all-zeros or all-ones"));
        }
        let total_up = (reservoir.count_ones() + bath.count_ones() + block.count_ones()) as i64;
        Ok(Self {
            reservoir,
            bath,
            block,
            total_up,
            ideal_bath_balance: 0,
        })
    }

    pub fn reservoir(&self) -> &BitSlice<u64, Lsb0> {
        &self.reservoir
    }

    pub fn bath(&self) -> &BitSlice<u64, Lsb0> {
        &self.bath
    }

    pub fn block(&self) -> &BitSlice<u64, Lsb0> {
        &self.block
    }

    pub fn reservoir_up(&self) -> usize {
        self.reservoir.count_ones()
    }

    pub fn total_up(&self) -> i64 {
        self.total_up
    }

    pub fn ideal_bath_balance(&self) -> i64 {
        self.ideal_bath_balance
    }

    /// Up spins actually present in the three registers.
    pub fn popcount(&self) -> usize {
        self.reservoir.count_ones() + self.bath.count_ones() + self.block.count_ones()
    }

    /// The conservation witness: registers plus ideal-bath balance must add
    /// up to the cached total.
    pub fn is_conserving(&self) -> bool {
        self.popcount() as i64 + self.ideal_bath_balance == self.total_up
    }

    /// `Some(true)` for all-ones, `Some(false)` for all-zeros (including an
    /// empty block), `None` for a mixed pattern.
    pub fn block_state(&self) -> Option<bool> {
        if self.block.all() && !self.block.is_empty() {
            Some(true)
        } else if self.block.not_any() {
            Some(false)
        } else {
            None
        }
    }

    /// Applies `mv` if it is applicable; returns whether anything changed.
    pub fn apply(&mut self, mv: &ExchangeMove) -> Result<bool> {
        match mv {
            ExchangeMove::Pair {
                reservoir_site,
                bath_site,
            } => {
                if *reservoir_site >= self.reservoir.len() || *bath_site >= self.bath.len() {
                    return Err(Error::InvalidState("exchange site out of range"));
                }
                let before = self.reservoir[*reservoir_site];
                self.swap_pair(*reservoir_site, *bath_site);
                Ok(before != self.reservoir[*reservoir_site])
            }
            ExchangeMove::BlockFlip { reservoir_sites } => {
                let s = self.block.len();
                if s == 0 || reservoir_sites.len() != s {
                    return Err(Error::InvalidState(
                        "block flip needs one reservoir site per block spin",
                    ));
                }
                let Some(block_up) = self.block_state() else {
                    return Err(Error::InvalidState("block is not confined"));
                };
                let mut seen = reservoir_sites.clone();
                seen.sort_unstable();
                seen.dedup();
                if seen.len() != s || seen.last().is_some_and(|&i| i >= self.reservoir.len()) {
                    return Err(Error::InvalidState(
                        "block flip sites must be distinct reservoir sites",
                    ));
                }
                // Sites must currently hold the opposite of the block value.
                if reservoir_sites
                    .iter()
                    .any(|&i| self.reservoir[i] == block_up)
                {
                    return Ok(false);
                }
                self.flip_block(reservoir_sites);
                Ok(true)
            }
        }
    }

    /// Swaps a reservoir and a bath bit. Branch-free on the raw words; equal
    /// bits are a no-op. Returns the change in the reservoir up-count.
    #[inline]
    pub(crate) fn swap_pair(&mut self, i: usize, j: usize) -> i64 {
        let (wi, bi) = (i / 64, i % 64);
        let (wj, bj) = (j / 64, j % 64);
        let r = &mut self.reservoir.as_raw_mut_slice()[wi];
        let a = (*r >> bi) & 1;
        let b_word = self.bath.as_raw_slice()[wj];
        let b = (b_word >> bj) & 1;
        let diff = a ^ b;
        *r ^= diff << bi;
        let a_after = (*r >> bi) & 1;
        let bath = &mut self.bath.as_raw_mut_slice()[wj];
        *bath ^= diff << bj;
        // Local conservation witness; the full popcount is checked per sweep.
        debug_assert_eq!(a_after + ((*bath >> bj) & 1), a + b);
        let _ = a_after;
        b as i64 - a as i64
    }

    /// Runs `count` pair swaps with sites from `draw`, on the raw words.
    /// Returns the net change in the reservoir up-count and the number of
    /// swaps that moved a spin.
    #[inline]
    pub(crate) fn swap_run(
        &mut self,
        count: usize,
        mut draw: impl FnMut() -> (usize, usize),
    ) -> (i64, u64) {
        let reservoir = self.reservoir.as_raw_mut_slice();
        let bath = self.bath.as_raw_mut_slice();
        let (mut net, mut changed) = (0i64, 0u64);
        for _ in 0..count {
            let (i, j) = draw();
            let (wi, bi) = (i / 64, i % 64);
            let (wj, bj) = (j / 64, j % 64);
            let a = (reservoir[wi] >> bi) & 1;
            let b = (bath[wj] >> bj) & 1;
            let diff = a ^ b;
            reservoir[wi] ^= diff << bi;
            bath[wj] ^= diff << bj;
            // Local conservation witness.
            debug_assert_eq!(((reservoir[wi] >> bi) & 1) + ((bath[wj] >> bj) & 1), a + b);
            net += b as i64 - a as i64;
            changed += diff;
        }
        (net, changed)
    }

    /// Sets a reservoir bit from the implicit infinite bath.
    #[inline]
    pub(crate) fn set_from_ideal_bath(&mut self, i: usize, value: bool) -> i64 {
        let delta = value as i64 - self.reservoir[i] as i64;
        self.reservoir.set(i, value);
        self.ideal_bath_balance -= delta;
        delta
    }

    /// Toggles the block and the given reservoir sites. The caller
    /// guarantees the sites hold the complement of the block value.
    pub(crate) fn flip_block(&mut self, reservoir_sites: &[usize]) {
        let to_ones = self.block.not_any();
        for &i in reservoir_sites {
            debug_assert_eq!(self.reservoir[i], to_ones);
            self.reservoir.set(i, !to_ones);
        }
        self.block.fill(to_ones);
        debug_assert!(self.is_conserving());
        debug_assert!(self.block_state().is_some());
    }
}

fn is_uniform(bits: &BitSlice<u64, Lsb0>) -> bool {
    bits.all() || bits.not_any()
}
