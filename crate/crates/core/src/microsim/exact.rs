//! Exact laws on the fixed-total shell.

use crate::binomial::ln_binomial;
use crate::ensemble::OccupationDistribution;
use crate::{Error, Result};

/// Reservoir up-count law when `total_up` up spins are spread uniformly
/// over `n_spins` reservoir and `m_spins` bath sites:
/// `P(n) ∝ C(N, n) C(M, K - n)`, the hypergeometric distribution. This is
/// the stationary law of unbiased conserving exchange.
pub fn exact_joint_marginal(
    n_spins: u32,
    m_spins: u32,
    total_up: u32,
) -> Result<OccupationDistribution> {
    if n_spins == 0 {
        return Err(Error::range("n_spins", 0, 1, u32::MAX as i64));
    }
    let sites = n_spins as u64 + m_spins as u64;
    if total_up as u64 > sites {
        return Err(Error::range("total_up", total_up as i64, 0, sites as i64));
    }
    let log_weights: Vec<f64> = (0..=n_spins)
        .map(|n| match total_up.checked_sub(n) {
            Some(rest) if rest <= m_spins => ln_binomial(n_spins, n) + ln_binomial(m_spins, rest),
            _ => f64::NEG_INFINITY,
        })
        .collect();
    Ok(OccupationDistribution::from_log_weights(&log_weights))
}

/// Probability that an all-or-nothing block of `block_size` spins is in its
/// all-ones configuration when reservoir, bath and block share `total_up`
/// up spins uniformly: `C(L, K - s) / (C(L, K) + C(L, K - s))` with
/// `L = N + M`.
pub fn exact_block_p1(n_spins: u32, m_spins: u32, total_up: u32, block_size: u32) -> Result<f64> {
    let sites = n_spins + m_spins;
    if total_up > sites + block_size {
        return Err(Error::range(
            "total_up",
            total_up as i64,
            0,
            (sites + block_size) as i64,
        ));
    }
    let zeros = if total_up <= sites {
        ln_binomial(sites, total_up)
    } else {
        f64::NEG_INFINITY
    };
    let ones = match total_up.checked_sub(block_size) {
        Some(k) if k <= sites => ln_binomial(sites, k),
        _ => f64::NEG_INFINITY,
    };
    // Logistic in the log-count difference.
    Ok(1.0 / (1.0 + (zeros - ones).exp()))
}
