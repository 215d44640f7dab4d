//! Binomial coefficients, exact where they fit and in log space otherwise.

/// Largest `n` for which every `C(n, k)` is computed exactly in integers.
pub const EXACT_LIMIT: u32 = 60;

/// Exact `C(n, k)` for `n <= EXACT_LIMIT`; `None` above the limit.
pub fn binomial_exact(n: u32, k: u32) -> Option<u64> {
    if n > EXACT_LIMIT {
        return None;
    }
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    // Each partial product c * (n - i) / (i + 1) is itself a binomial
    // coefficient, so the division is exact.
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) / (i + 1);
    }
    Some(c as u64)
}

/// `ln C(n, k)`, or negative infinity when `k > n`.
pub fn ln_binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    match binomial_exact(n, k) {
        Some(c) => (c as f64).ln(),
        None => statrs::function::factorial::ln_binomial(n as u64, k as u64),
    }
}

/// Numerically stable `ln(sum exp(x_i))`.
pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_values() {
        assert_eq!(binomial_exact(0, 0), Some(1));
        assert_eq!(binomial_exact(5, 2), Some(10));
        assert_eq!(binomial_exact(4, 7), Some(0));
        assert_eq!(binomial_exact(60, 30), Some(118_264_581_564_861_424));
        assert_eq!(binomial_exact(61, 30), None);
    }

    #[test]
    fn exact_matches_pascal() {
        for n in [1u32, 17, 40, 60] {
            let row = spinerase_oracles::pascal_row(n);
            for (k, &c) in row.iter().enumerate() {
                assert_eq!(binomial_exact(n, k as u32).unwrap() as u128, c);
            }
        }
    }

    #[test]
    fn log_space_continuity_at_limit() {
        // Both branches must agree where they meet.
        let exact = ln_binomial(60, 25);
        let gamma = statrs::function::factorial::ln_binomial(60, 25);
        assert!((exact - gamma).abs() < 1e-10);
        let above = ln_binomial(100, 50);
        assert!((above - 66.783_841_652_017_43).abs() < 1e-6);
    }
}
