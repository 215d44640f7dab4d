use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Minimum expected count per bin before adjacent bins are pooled.
const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: u32,
    pub p_value: f64,
}

/// Pearson goodness-of-fit of `observed` counts against `expected`
/// probabilities. Adjacent bins are pooled left to right until each group
/// expects at least five counts; zero-probability bins must be empty.
pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> ChiSquare {
    assert_eq!(observed.len(), expected.len());
    let total: u64 = observed.iter().sum();
    let total = total as f64;

    if observed
        .iter()
        .zip(expected)
        .any(|(&o, &p)| p <= 0.0 && o > 0)
    {
        return ChiSquare {
            statistic: f64::INFINITY,
            dof: 0,
            p_value: 0.0,
        };
    }

    let mut groups: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(expected) {
        if p <= 0.0 {
            continue;
        }
        obs += o as f64;
        exp += p * total;
        if exp >= MIN_EXPECTED {
            groups.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    if exp > 0.0 {
        match groups.last_mut() {
            Some(last) => {
                last.0 += obs;
                last.1 += exp;
            }
            None => groups.push((obs, exp)),
        }
    }

    let dof = groups.len().saturating_sub(1) as u32;
    let statistic: f64 = groups.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let p_value = if dof == 0 {
        1.0
    } else {
        ChiSquared::new(dof as f64)
            .expect("positive degrees of freedom")
            .sf(statistic)
    };
    ChiSquare {
        statistic,
        dof,
        p_value,
    }
}

/// A sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub batches: u32,
}

impl Estimate {
    /// Distance from `value` in standard errors.
    pub fn z_score(&self, value: f64) -> f64 {
        (self.mean - value) / self.std_error
    }
}

/// Non-overlapping batch means for autocorrelated series.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchMeans {
    batch_len: u64,
    current: f64,
    filled: u64,
    means: Vec<f64>,
    sum: f64,
    count: u64,
}

impl BatchMeans {
    pub fn new(batch_len: u64) -> Self {
        Self {
            batch_len: batch_len.max(1),
            current: 0.0,
            filled: 0,
            means: Vec::new(),
            sum: 0.0,
            count: 0,
        }
    }

    pub fn push(&mut self, x: f64) {
        self.sum += x;
        self.count += 1;
        self.current += x;
        self.filled += 1;
        if self.filled == self.batch_len {
            self.means.push(self.current / self.batch_len as f64);
            self.current = 0.0;
            self.filled = 0;
        }
    }

    /// Pools another accumulator's completed batches (same batch length).
    pub fn merge(&mut self, other: &BatchMeans) {
        debug_assert_eq!(self.batch_len, other.batch_len);
        self.means.extend_from_slice(&other.means);
        self.sum += other.sum;
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Overall mean and the standard error from the spread of completed
    /// batch means. Needs at least two complete batches.
    pub fn estimate(&self) -> Option<Estimate> {
        let b = self.means.len();
        if b < 2 {
            return None;
        }
        let grand = self.means.iter().sum::<f64>() / b as f64;
        let var = self.means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (b - 1) as f64;
        Some(Estimate {
            mean: self.sum / self.count as f64,
            std_error: (var / b as f64).sqrt(),
            batches: b as u32,
        })
    }
}
