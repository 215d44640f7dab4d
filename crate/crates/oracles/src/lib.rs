//! Brute-force reference computations for the test suites.
//!
//! Nothing here may call into `spinerase`: every routine recomputes its
//! answer from first principles (enumeration, direct summation, generic
//! constrained optimization) so that agreement with the library is evidence
//! rather than tautology. Performance is deliberately not a concern.

/// Row `n` of Pascal's triangle, built by repeated addition.
pub fn pascal_row(n: u32) -> Vec<u128> {
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = vec![1u128; row.len() + 1];
        for k in 1..row.len() {
            next[k] = row[k - 1] + row[k];
        }
        row = next;
    }
    row
}

/// Binomial(n, p) pmf from Pascal coefficients and explicit powers.
pub fn binomial_pmf(n: u32, p: f64) -> Vec<f64> {
    pascal_row(n)
        .iter()
        .enumerate()
        .map(|(k, &c)| c as f64 * p.powi(k as i32) * (1.0 - p).powi((n as usize - k) as i32))
        .collect()
}

/// Reservoir occupation law on the fixed-total shell, by listing every
/// bit pattern of `n + m` sites with exactly `k` ones.
pub fn enumerate_shell_marginal(n: u32, m: u32, k: u32) -> Vec<f64> {
    let sites = n + m;
    assert!(sites <= 24, "enumeration oracle limited to 24 sites");
    let reservoir_mask: u32 = if n == 0 { 0 } else { (1u32 << n) - 1 };
    let mut counts = vec![0u64; n as usize + 1];
    let mut total = 0u64;
    for pattern in 0u32..(1u32 << sites) {
        if pattern.count_ones() == k {
            counts[(pattern & reservoir_mask).count_ones() as usize] += 1;
            total += 1;
        }
    }
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

/// Probability that an all-or-nothing block of `s` spins is in its all-ones
/// configuration under the uniform measure on `n + m` free sites plus the
/// block, with `k` ones in total. Counts configurations by enumeration.
pub fn enumerate_block_p1(n: u32, m: u32, k: u32, s: u32) -> f64 {
    let sites = n + m;
    assert!(sites <= 24, "enumeration oracle limited to 24 sites");
    let (mut zeros, mut ones) = (0u64, 0u64);
    for pattern in 0u32..(1u32 << sites) {
        let c = pattern.count_ones();
        if c == k {
            zeros += 1;
        }
        if k >= s && c == k - s {
            ones += 1;
        }
    }
    ones as f64 / (zeros + ones) as f64
}

/// Maximum-entropy distribution over all `2^n` microstates subject to
/// normalization and a fixed mean up-count, found by feasible-start
/// projected Newton ascent on the full simplex. Returns the occupation
/// marginal (probability mass aggregated by popcount).
///
/// No Lagrange-multiplier closed form is used: the iteration only knows the
/// objective `-sum p ln p`, its derivatives and the two linear constraints.
pub fn brute_force_maxent(n: u32, target_mean: f64) -> Vec<f64> {
    assert!((1..=12).contains(&n));
    assert!(target_mean > 0.0 && target_mean < n as f64);
    let dim = 1usize << n;
    let ups: Vec<f64> = (0..dim).map(|x| (x as u32).count_ones() as f64).collect();

    // Feasible interior start: uniform mixed with a point mass on the
    // all-down (or all-up) microstate to hit the target mean.
    let half = n as f64 / 2.0;
    let mut p = vec![1.0 / dim as f64; dim];
    if target_mean < half {
        let t = 1.0 - target_mean / half;
        p.iter_mut().for_each(|v| *v *= 1.0 - t);
        p[0] += t;
    } else if target_mean > half {
        let t = (target_mean - half) / half;
        p.iter_mut().for_each(|v| *v *= 1.0 - t);
        p[dim - 1] += t;
    }

    let entropy = |q: &[f64]| -> f64 { -q.iter().map(|&v| v * v.ln()).sum::<f64>() };

    for _ in 0..500 {
        let g: Vec<f64> = p.iter().map(|&v| -(v.ln() + 1.0)).collect();
        // Constraint rows a0 = 1, a1 = ups. Solve (A D A^T) lambda = -A D g.
        let (mut s00, mut s01, mut s11, mut r0, mut r1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..dim {
            let d = p[i];
            s00 += d;
            s01 += d * ups[i];
            s11 += d * ups[i] * ups[i];
            r0 -= d * g[i];
            r1 -= d * ups[i] * g[i];
        }
        let det = s00 * s11 - s01 * s01;
        let l0 = (r0 * s11 - r1 * s01) / det;
        let l1 = (s00 * r1 - s01 * r0) / det;
        let dir: Vec<f64> = (0..dim).map(|i| p[i] * (g[i] + l0 + l1 * ups[i])).collect();
        let size = dir.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if size < 1e-16 {
            break;
        }
        let base = entropy(&p);
        let mut step = 1.0;
        loop {
            let trial: Vec<f64> = p.iter().zip(&dir).map(|(a, b)| a + step * b).collect();
            if trial.iter().all(|&v| v > 0.0) && entropy(&trial) >= base - 1e-15 {
                p = trial;
                break;
            }
            step *= 0.5;
            if step < 1e-20 {
                break;
            }
        }
    }

    let mut marginal = vec![0.0; n as usize + 1];
    for (x, &v) in p.iter().enumerate() {
        marginal[(x as u32).count_ones() as usize] += v;
    }
    marginal
}

/// Direct summation of `sum_{k=first}^{first+terms-1} e^{-k g} / (1 + e^{-k g})`.
pub fn spin_cost_partial_sum(gamma_tilde: f64, first: u32, terms: u32) -> f64 {
    (first..first + terms)
        .map(|k| {
            let w = (-(k as f64) * gamma_tilde).exp();
            w / (1.0 + w)
        })
        .sum()
}

/// Left-Riemann overshoot of `int_0^b f(E) dE` for the thermal occupation
/// `f(E) = 1/(1 + e^{E/T})` on `steps` uniform intervals, predicted by the
/// Euler-Maclaurin expansion to second order:
/// `h/2 (f(0) - f(b)) + h^2/12 (f'(b) - f'(0))`.
pub fn left_riemann_overshoot(temperature: f64, e_max: f64, steps: u32) -> f64 {
    let f = |e: f64| 1.0 / (1.0 + (e / temperature).exp());
    let df = |e: f64| {
        let q = f(e);
        -q * (1.0 - q) / temperature
    };
    let h = e_max / steps as f64;
    h / 2.0 * (f(0.0) - f(e_max)) + h * h / 12.0 * (df(e_max) - df(0.0))
}

/// Symmetric difference quotient.
pub fn central_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Binary entropy in nats.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |q: f64| if q > 0.0 { -q * q.ln() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// Composite Simpson rule with a fixed, very fine panel count.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: u32) -> f64 {
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}
