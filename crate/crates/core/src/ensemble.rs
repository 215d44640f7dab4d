//! Equilibrium theory of the spin reservoir.
//!
//! A reservoir of `N` energy-degenerate spin-1/2 particles exchanges
//! z-angular momentum with a larger spin bath. Its equilibrium law is the
//! maximum-entropy distribution under a fixed mean up-count `alpha * N`:
//! every microstate with `n` up spins has probability
//! `e^{-n g} / (1 + e^{-g})^N`, where `g = ln((1 - alpha) / alpha)` is the
//! dimensionless Lagrange multiplier conjugate to angular momentum (the
//! spin analog of inverse temperature).
//!
//! Distributions are kept in compressed form, indexed by the up-count `n`
//! with the `C(N, n)` degeneracy folded in; the `2^N` microstates are never
//! materialized.

use serde::{Deserialize, Serialize};

use crate::binomial::{ln_binomial, log_sum_exp};
use crate::{Error, Result};

/// Physical constants in the internal unit system. Both are exactly one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub hbar: f64,
    pub k_boltzmann: f64,
}

impl UnitSystem {
    pub const NATURAL: UnitSystem = UnitSystem {
        hbar: 1.0,
        k_boltzmann: 1.0,
    };
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::NATURAL
    }
}

/// `ln((1 - alpha) / alpha)`. Positive iff `alpha < 1/2`.
pub fn gamma_from_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain("alpha", alpha, "(0, 1)"));
    }
    Ok((-alpha).ln_1p() - alpha.ln())
}

/// Inverse of [`gamma_from_alpha`]: `1 / (1 + e^g)`.
pub fn alpha_from_gamma(gamma_tilde: f64) -> f64 {
    logistic(gamma_tilde)
}

/// `1 / (1 + e^x)`, the occupation of the upper level of a two-level
/// system with gap `x`. Saturates cleanly at 0 and 1.
pub(crate) fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + x.exp())
}

/// `ln(1 + e^x)` without overflow.
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Binary entropy `-p ln p - (1-p) ln(1-p)` in nats.
pub fn binary_entropy(p: f64) -> f64 {
    xlnx_neg(p) + xlnx_neg(1.0 - p)
}

fn xlnx_neg(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.ln()
    } else {
        0.0
    }
}

/// Parameters of a spin reservoir. `alpha` and `gamma_tilde` are always
/// consistent; construct from whichever is known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReservoirSpec {
    n_spins: u32,
    alpha: f64,
    gamma_tilde: f64,
}

impl ReservoirSpec {
    pub fn from_alpha(n_spins: u32, alpha: f64) -> Result<Self> {
        check_count("n_spins", n_spins)?;
        let gamma_tilde = gamma_from_alpha(alpha)?;
        Ok(Self {
            n_spins,
            alpha,
            gamma_tilde,
        })
    }

    pub fn from_gamma(n_spins: u32, gamma_tilde: f64) -> Result<Self> {
        check_count("n_spins", n_spins)?;
        if !gamma_tilde.is_finite() {
            return Err(Error::domain("gamma_tilde", gamma_tilde, "finite reals"));
        }
        let alpha = alpha_from_gamma(gamma_tilde);
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain(
                "gamma_tilde",
                gamma_tilde,
                "|gamma_tilde| < ~36",
            ));
        }
        Ok(Self {
            n_spins,
            alpha,
            gamma_tilde,
        })
    }

    pub fn n_spins(&self) -> u32 {
        self.n_spins
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma_tilde(&self) -> f64 {
        self.gamma_tilde
    }

    /// An unpolarized or inverted reservoir (`gamma_tilde <= 0`) cannot drive
    /// the memory toward logical zero.
    pub fn is_erasing(&self) -> bool {
        self.gamma_tilde > 0.0
    }
}

/// The large spin bath that fixes the reservoir polarization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BathSpec {
    m_spins: u32,
    alpha: f64,
}

impl BathSpec {
    pub fn new(m_spins: u32, alpha: f64) -> Result<Self> {
        check_count("m_spins", m_spins)?;
        gamma_from_alpha(alpha)?;
        Ok(Self { m_spins, alpha })
    }

    pub fn m_spins(&self) -> u32 {
        self.m_spins
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

fn check_count(name: &'static str, n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::range(name, 0, 1, u32::MAX as i64));
    }
    Ok(())
}

const NORMALIZATION_TOL: f64 = 1e-12;

/// A probability vector over the reservoir up-count `n = 0..=N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupationDistribution {
    n_spins: u32,
    probabilities: Vec<f64>,
}

impl OccupationDistribution {
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.len() < 2 {
            return Err(Error::range(
                "distribution length",
                probabilities.len() as i64,
                2,
                i64::MAX,
            ));
        }
        if let Some(&bad) = probabilities.iter().find(|p| !(**p >= 0.0)) {
            return Err(Error::domain("probability", bad, "[0, 1]"));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::domain("probability total", total, "1 +/- 1e-12"));
        }
        Ok(Self {
            n_spins: (probabilities.len() - 1) as u32,
            probabilities,
        })
    }

    /// Normalizes log weights `ln w_n` into a distribution.
    pub(crate) fn from_log_weights(log_weights: &[f64]) -> Self {
        let z = log_sum_exp(log_weights);
        let probabilities = log_weights.iter().map(|&w| (w - z).exp()).collect();
        Self {
            n_spins: (log_weights.len() - 1) as u32,
            probabilities,
        }
    }

    pub fn n_spins(&self) -> u32 {
        self.n_spins
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn mean(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    /// Half the L1 distance. Both distributions must share `N`.
    pub fn total_variation(&self, other: &OccupationDistribution) -> Result<f64> {
        if self.n_spins != other.n_spins {
            return Err(Error::range(
                "n_spins",
                other.n_spins as i64,
                self.n_spins as i64,
                self.n_spins as i64,
            ));
        }
        Ok(0.5
            * self
                .probabilities
                .iter()
                .zip(&other.probabilities)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &OccupationDistribution) -> f64 {
        self.probabilities
            .iter()
            .zip(&other.probabilities)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Probability of one specific microstate `|n, nu>` at equilibrium. The
/// value does not depend on `nu`.
pub fn microstate_probability(n: u32, spec: &ReservoirSpec) -> Result<f64> {
    if n > spec.n_spins {
        return Err(Error::range("n", n as i64, 0, spec.n_spins as i64));
    }
    let g = spec.gamma_tilde;
    Ok((-(n as f64) * g - spec.n_spins as f64 * softplus(-g)).exp())
}

/// Equilibrium law of the up-count, `C(N, n) e^{-n g} / (1 + e^{-g})^N`,
/// which coincides with Binomial(N, alpha).
pub fn occupation_marginal(spec: &ReservoirSpec) -> OccupationDistribution {
    let g = spec.gamma_tilde;
    let n_spins = spec.n_spins;
    let log_z = n_spins as f64 * softplus(-g);
    let probabilities = (0..=n_spins)
        .map(|n| (ln_binomial(n_spins, n) - n as f64 * g - log_z).exp())
        .collect();
    OccupationDistribution {
        n_spins,
        probabilities,
    }
}

/// Mean z-angular momentum `(alpha - 1/2) N` in units of hbar.
pub fn mean_jz(spec: &ReservoirSpec) -> f64 {
    (spec.alpha - 0.5) * spec.n_spins as f64
}

/// Result of [`maxent_solve`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxEntSolution {
    pub distribution: OccupationDistribution,
    /// Recovered Lagrange multiplier of the mean-occupation constraint.
    pub gamma_tilde: f64,
    pub iterations: u32,
}

const INITIAL_BRACKET: f64 = 50.0;
const MAX_BRACKET: f64 = 1.0e4;
const MAX_BISECTIONS: u32 = 400;

/// Maximizes `-sum P ln P` over the `2^N` microstates subject to
/// normalization and `sum n P = target_mean_n`.
///
/// Stationarity forces the Gibbs form `P ∝ e^{-g n}`; the multiplier `g`
/// solves `N / (1 + e^g) = target_mean_n`, a strictly decreasing function of
/// `g`, so plain bisection on an expanding bracket is globally convergent.
/// The returned distribution is normalized by its explicit partition sum
/// over levels rather than by the closed form.
pub fn maxent_solve(n_spins: u32, target_mean_n: f64) -> Result<MaxEntSolution> {
    check_count("n_spins", n_spins)?;
    let big_n = n_spins as f64;
    if !(target_mean_n > 0.0 && target_mean_n < big_n) {
        return Err(Error::domain("target_mean_n", target_mean_n, "(0, N)"));
    }
    let excess = |g: f64| big_n * logistic(g) - target_mean_n;

    let (mut lo, mut hi) = (-INITIAL_BRACKET, INITIAL_BRACKET);
    while excess(lo) <= 0.0 || excess(hi) >= 0.0 {
        if hi >= MAX_BRACKET {
            return Err(Error::NoConvergence(format!(
                "could not bracket the multiplier for mean {target_mean_n} within [-{MAX_BRACKET}, {MAX_BRACKET}]"
            )));
        }
        lo *= 2.0;
        hi *= 2.0;
    }

    let mut iterations = 0;
    while iterations < MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let gamma_tilde = 0.5 * (lo + hi);

    let log_weights: Vec<f64> = (0..=n_spins)
        .map(|n| ln_binomial(n_spins, n) - n as f64 * gamma_tilde)
        .collect();
    Ok(MaxEntSolution {
        distribution: OccupationDistribution::from_log_weights(&log_weights),
        gamma_tilde,
        iterations,
    })
}

/// Information-theoretic entropy in nats.
///
/// With `per_level_degeneracy` the entropy of the full microstate law is
/// returned (each level's mass spread uniformly over its `C(N, n)`
/// microstates); otherwise the entropy of the up-count marginal itself.
pub fn distribution_entropy(dist: &OccupationDistribution, per_level_degeneracy: bool) -> f64 {
    let n_spins = dist.n_spins;
    dist.probabilities
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(n, &p)| {
            let marginal = -p * p.ln();
            if per_level_degeneracy {
                marginal + p * ln_binomial(n_spins, n as u32)
            } else {
                marginal
            }
        })
        .sum()
}
