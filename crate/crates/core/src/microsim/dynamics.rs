use bitvec::prelude::*;
use rand::distr::{Bernoulli, Distribution};
use rand::seq::index;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::rng::{rng_stream, StreamRng};
use super::state::{MicroState, Spins};
use super::stats::{BatchMeans, Estimate};
use crate::binomial::ln_binomial;
use crate::ensemble::alpha_from_gamma;
use crate::parallel::{map_ordered, Execution};
use crate::{Error, Result};

/// Result of one seeded trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryStats {
    pub seed: u64,
    pub stream_index: u64,
    pub burn_in: u64,
    pub samples: u64,
    /// Counts of the reservoir up-count, one entry per sweep; sums to `samples`.
    pub occupation_histogram: Vec<u64>,
    pub block_p1_estimate: Option<Estimate>,
    pub proposals: u64,
    pub accepted: u64,
    pub initial_total_up: i64,
    pub final_total_up: i64,
}

impl TrajectoryStats {
    /// Element-wise sum of the histograms of independent trajectories.
    pub fn pooled_histogram(parts: &[TrajectoryStats]) -> Vec<u64> {
        let len = parts
            .iter()
            .map(|p| p.occupation_histogram.len())
            .max()
            .unwrap_or(0);
        let mut pooled = vec![0u64; len];
        for part in parts {
            for (acc, &c) in pooled.iter_mut().zip(&part.occupation_histogram) {
                *acc += c;
            }
        }
        pooled
    }
}

/// Reservoir-bath exchange on the shell with `total_up` up spins among
/// `n_spins + m_spins` sites. Times are in sweeps of `n_spins + m_spins`
/// pair proposals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExchangeParams {
    pub n_spins: u32,
    pub m_spins: u32,
    pub total_up: u32,
    pub burn_in: u64,
    pub samples: u64,
}

impl ExchangeParams {
    /// Shell at polarization `alpha`: `K = round(alpha (N + M))`.
    pub fn from_alpha(
        n_spins: u32,
        m_spins: u32,
        alpha: f64,
        burn_in: u64,
        samples: u64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::domain("alpha", alpha, "[0, 1]"));
        }
        let total_up = (alpha * (n_spins as f64 + m_spins as f64)).round() as u32;
        Ok(Self {
            n_spins,
            m_spins,
            total_up,
            burn_in,
            samples,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.n_spins == 0 {
            return Err(Error::range("n_spins", 0, 1, u32::MAX as i64));
        }
        if self.m_spins == 0 {
            return Err(Error::range("m_spins", 0, 1, u32::MAX as i64));
        }
        let sites = self.n_spins as i64 + self.m_spins as i64;
        if self.total_up as i64 > sites {
            return Err(Error::range("total_up", self.total_up as i64, 0, sites));
        }
        Ok(())
    }
}

/// Sweeps between full-register conservation checks in debug builds; every
/// single swap is checked locally.
const FULL_CHECK_INTERVAL: u64 = 256;

/// Uniformly random placement of `up` ones among `n + m` sites.
fn random_shell(rng: &mut StreamRng, n: usize, m: usize, up: usize) -> (Spins, Spins) {
    let mut reservoir = bitvec![u64, Lsb0; 0; n];
    let mut bath = bitvec![u64, Lsb0; 0; m];
    for i in index::sample(rng, n + m, up) {
        if i < n {
            reservoir.set(i, true);
        } else {
            bath.set(i - n, true);
        }
    }
    (reservoir, bath)
}

/// Exactly uniform index below `bound` from a 32-bit word (Lemire's
/// multiply-shift with rejection), redrawing only on the rare biased zone.
#[inline]
fn lemire(mut word: u32, bound: u32, rng: &mut StreamRng) -> u32 {
    let mut product = word as u64 * bound as u64;
    if (product as u32) < bound {
        let threshold = bound.wrapping_neg() % bound;
        while (product as u32) < threshold {
            word = rng.next_u32();
            product = word as u64 * bound as u64;
        }
    }
    (product >> 32) as u32
}

/// A uniform (reservoir, bath) site pair from one 64-bit draw.
#[inline]
fn uniform_pair(rng: &mut StreamRng, n: u32, m: u32) -> (usize, usize) {
    let x = rng.next_u64();
    let i = lemire(x as u32, n, rng);
    let j = lemire((x >> 32) as u32, m, rng);
    (i as usize, j as usize)
}

/// One sweep of `N + M` uniform pair swaps. Returns the number of swaps that
/// changed the configuration; `reservoir_up` is kept current.
///
/// With `N = M = 1` every state of the mixed shell swaps with certainty, a
/// period-2 chain; there each proposal is held with probability 1/2.
#[inline]
fn exchange_sweep(
    state: &mut MicroState,
    rng: &mut StreamRng,
    n: usize,
    m: usize,
    reservoir_up: &mut i64,
) -> u64 {
    let (net, changed) = if n == 1 && m == 1 {
        let swaps = (rng.next_u32() & 1) as usize + (rng.next_u32() & 1) as usize;
        state.swap_run(swaps, || (0, 0))
    } else {
        state.swap_run(n + m, || uniform_pair(rng, n as u32, m as u32))
    };
    *reservoir_up += net;
    changed
}

/// Unbiased conserving exchange between a reservoir of `N` spins and a bath
/// of `M` spins, started from a uniform random point of the shell. One
/// histogram entry is recorded per sweep after `burn_in` sweeps.
pub fn mc_reservoir_bath(
    params: &ExchangeParams,
    seed: u64,
    stream_index: u64,
) -> Result<TrajectoryStats> {
    params.validate()?;
    let (n, m) = (params.n_spins as usize, params.m_spins as usize);
    let mut rng = rng_stream(seed, stream_index);
    let (reservoir, bath) = random_shell(&mut rng, n, m, params.total_up as usize);
    let mut state = MicroState::new(reservoir, bath, Spins::new())?;
    let initial_total_up = state.total_up();
    let mut reservoir_up = state.reservoir_up() as i64;

    let mut histogram = vec![0u64; n + 1];
    let mut accepted = 0u64;
    for sweep in 0..params.burn_in + params.samples {
        accepted += exchange_sweep(&mut state, &mut rng, n, m, &mut reservoir_up);
        debug_assert!(sweep % FULL_CHECK_INTERVAL != 0 || state.is_conserving());
        if sweep >= params.burn_in {
            histogram[reservoir_up as usize] += 1;
        }
    }
    debug_assert_eq!(reservoir_up, state.reservoir_up() as i64);
    debug_assert!(state.is_conserving());

    Ok(TrajectoryStats {
        seed,
        stream_index,
        burn_in: params.burn_in,
        samples: params.samples,
        occupation_histogram: histogram,
        block_p1_estimate: None,
        proposals: (params.burn_in + params.samples) * (n + m) as u64,
        accepted,
        initial_total_up,
        final_total_up: state.total_up(),
    })
}

/// Independent trajectories on streams `0..replicas`, returned in stream
/// order whatever the execution mode.
pub fn mc_reservoir_bath_replicas(
    params: &ExchangeParams,
    seed: u64,
    replicas: u64,
    exec: Execution,
) -> Result<Vec<TrajectoryStats>> {
    let streams: Vec<u64> = (0..replicas).collect();
    map_ordered(exec, &streams, |&s| mc_reservoir_bath(params, seed, s))
        .into_iter()
        .collect()
}

/// How the reservoir is held at its polarization during block equilibration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BathMode {
    /// Infinite bath: each sweep refreshes `N` uniformly chosen reservoir
    /// sites from the single-spin law, concurrently with block moves.
    #[default]
    Ideal,
    /// The whole reservoir is redrawn from its equilibrium law before each
    /// block move.
    Resample,
    /// Explicit bath of `m_spins` spins with pair-swap exchange; the shell
    /// holds `round(alpha (N + M))` up spins outside the block.
    Finite { m_spins: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockParams {
    pub block_size: u32,
    pub n_spins: u32,
    pub gamma_tilde: f64,
    pub seed: u64,
    pub stream_index: u64,
    pub burn_in: u64,
    pub samples: u64,
    pub bath: BathMode,
    pub start_all_ones: bool,
    /// Batch count for the standard error of the block estimate.
    pub batches: u32,
}

impl BlockParams {
    pub fn new(
        block_size: u32,
        n_spins: u32,
        gamma_tilde: f64,
        seed: u64,
        burn_in: u64,
        samples: u64,
    ) -> Self {
        Self {
            block_size,
            n_spins,
            gamma_tilde,
            seed,
            stream_index: 0,
            burn_in,
            samples,
            bath: BathMode::Ideal,
            start_all_ones: false,
            batches: 100,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.block_size == 0 {
            return Err(Error::range("block_size", 0, 1, self.n_spins as i64));
        }
        if self.n_spins < self.block_size {
            return Err(Error::range(
                "n_spins",
                self.n_spins as i64,
                self.block_size as i64,
                u32::MAX as i64,
            ));
        }
        if !self.gamma_tilde.is_finite() {
            return Err(Error::domain("gamma_tilde", self.gamma_tilde, "finite"));
        }
        if self.batches < 2 {
            return Err(Error::range(
                "batches",
                self.batches as i64,
                2,
                u32::MAX as i64,
            ));
        }
        if self.samples < self.batches as u64 {
            return Err(Error::range(
                "samples",
                self.samples as i64,
                self.batches as i64,
                i64::MAX,
            ));
        }
        if let BathMode::Finite { m_spins: 0 } = self.bath {
            return Err(Error::range("m_spins", 0, 1, u32::MAX as i64));
        }
        Ok(())
    }
}

/// Metropolis-Hastings block flip. The forward move picks `s` of the `n`
/// reservoir sites holding the opposite of the block value, uniformly; the
/// reverse move picks `s` of the `N - n + s` sites that then hold the new
/// opposite value. The flip conserves `n + s b`, so the target weights
/// cancel and the acceptance is the ratio of proposal counts.
fn block_move(
    state: &mut MicroState,
    rng: &mut StreamRng,
    s: usize,
    scratch: &mut Vec<usize>,
) -> bool {
    let to_ones = state.block_state() == Some(false);
    let reservoir = state.reservoir();
    let n_total = reservoir.len();
    scratch.clear();
    if to_ones {
        scratch.extend(reservoir.iter_ones());
    } else {
        scratch.extend(reservoir.iter_zeros());
    }
    let available = scratch.len();
    if available < s {
        return false;
    }
    let reverse_pool = n_total - available + s;
    let log_ratio =
        ln_binomial(available as u32, s as u32) - ln_binomial(reverse_pool as u32, s as u32);
    // Draw unconditionally so the stream advances identically on every branch.
    let u: f64 = rng.random();
    let chosen: Vec<usize> = index::sample(rng, available, s)
        .into_iter()
        .map(|k| scratch[k])
        .collect();
    if log_ratio < 0.0 && u >= log_ratio.exp() {
        return false;
    }
    state.flip_block(&chosen);
    true
}

/// Stochastic equilibration of a memory block of `s` spins against a
/// reservoir of `N` spins at spin temperature `gamma_tilde`.
///
/// Each sweep applies the reservoir dynamics of the chosen [`BathMode`] and
/// then one block-flip proposal, and records whether the block is all-ones.
/// The stationary block occupation is `e^{-s g}/(1 + e^{-s g})` for the
/// ideal and resampled baths, and [`super::exact_block_p1`] for a finite
/// bath.
pub fn mc_block_equilibrate(params: &BlockParams) -> Result<TrajectoryStats> {
    params.validate()?;
    let n = params.n_spins as usize;
    let s = params.block_size as usize;
    let alpha = alpha_from_gamma(params.gamma_tilde);
    let mut rng = rng_stream(params.seed, params.stream_index);
    let block = bitvec![u64, Lsb0; params.start_all_ones as u8; s];

    let (mut state, m) = match params.bath {
        BathMode::Ideal | BathMode::Resample => {
            let coin =
                Bernoulli::new(alpha).map_err(|_| Error::domain("alpha", alpha, "[0, 1]"))?;
            let reservoir: Spins = (0..n).map(|_| coin.sample(&mut rng)).collect();
            (MicroState::new(reservoir, Spins::new(), block)?, 0usize)
        }
        BathMode::Finite { m_spins } => {
            let m = m_spins as usize;
            let up = (alpha * (n + m) as f64).round() as usize;
            let (reservoir, bath) = random_shell(&mut rng, n, m, up);
            (MicroState::new(reservoir, bath, block)?, m)
        }
    };
    let coin = Bernoulli::new(alpha).map_err(|_| Error::domain("alpha", alpha, "[0, 1]"))?;
    let initial_total_up = state.total_up();

    let mut histogram = vec![0u64; n + 1];
    let mut batches = BatchMeans::new(params.samples / params.batches as u64);
    let mut scratch = Vec::with_capacity(n);
    let (mut proposals, mut accepted) = (0u64, 0u64);
    let mut reservoir_up = state.reservoir_up() as i64;

    for sweep in 0..params.burn_in + params.samples {
        match params.bath {
            BathMode::Ideal => {
                for _ in 0..n {
                    let i = rng.random_range(0..n);
                    let delta = state.set_from_ideal_bath(i, coin.sample(&mut rng));
                    accepted += (delta != 0) as u64;
                }
                proposals += n as u64;
            }
            BathMode::Resample => {
                for i in 0..n {
                    state.set_from_ideal_bath(i, coin.sample(&mut rng));
                }
                proposals += n as u64;
                accepted += n as u64;
            }
            BathMode::Finite { .. } => {
                accepted += exchange_sweep(&mut state, &mut rng, n, m, &mut reservoir_up);
                proposals += (n + m) as u64;
            }
        }
        proposals += 1;
        if block_move(&mut state, &mut rng, s, &mut scratch) {
            accepted += 1;
        }
        debug_assert!(state.is_conserving());
        debug_assert!(state.block_state().is_some());

        if sweep >= params.burn_in {
            reservoir_up = state.reservoir_up() as i64;
            histogram[reservoir_up as usize] += 1;
            batches.push(if state.block_state() == Some(true) {
                1.0
            } else {
                0.0
            });
        }
    }

    Ok(TrajectoryStats {
        seed: params.seed,
        stream_index: params.stream_index,
        burn_in: params.burn_in,
        samples: params.samples,
        occupation_histogram: histogram,
        block_p1_estimate: batches.estimate(),
        proposals,
        accepted,
        initial_total_up,
        final_total_up: state.total_up(),
    })
}
