//! Thermal erasure of a qubit.
//!
//! The qubit's two levels start degenerate. While it sits in a heat
//! reservoir at temperature `T`, the energy of `|1>` is raised from 0 to a
//! large `E_max` slowly enough to stay in equilibrium. Raising the splitting
//! by `dE` costs the occupation of `|1>` times `dE`; the total over
//! `[0, inf)` is `T ln 2`, and the qubit ends in `|0>`.
//!
//! "Infinity" is replaced by a finite `E_max`, with the analytic bound
//! `T e^{-E_max/T}` on the omitted tail reported alongside each result.

use serde::Serialize;

use crate::ensemble::logistic;
use crate::quadrature::adaptive_simpson;
use crate::{Error, Result};

/// A two-level system with level `|1>` raised by `splitting` above `|0>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermalQubit {
    pub splitting: f64,
    pub temperature: f64,
    pub p1: f64,
    pub equilibrated: bool,
}

impl ThermalQubit {
    /// The Boltzmann state at the given splitting.
    pub fn equilibrated(splitting: f64, temperature: f64) -> Result<Self> {
        let (_, p1) = boltzmann_state(splitting, temperature)?;
        Ok(Self {
            splitting,
            temperature,
            p1,
            equilibrated: true,
        })
    }

    pub fn p0(&self) -> f64 {
        1.0 - self.p1
    }
}

fn check_temperature(temperature: f64) -> Result<()> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(Error::domain("temperature", temperature, "(0, inf)"));
    }
    Ok(())
}

/// Equilibrium occupations `(p0, p1)` with `p1 = e^{-E/T} / (1 + e^{-E/T})`.
/// `p0` is computed as the complement so the pair sums to one exactly.
pub fn boltzmann_state(splitting: f64, temperature: f64) -> Result<(f64, f64)> {
    check_temperature(temperature)?;
    let p1 = logistic(splitting / temperature);
    Ok((1.0 - p1, p1))
}

/// Work per unit increase of the splitting, `dW/dE`, which equals the
/// equilibrium occupation of `|1>`.
pub fn work_integrand(splitting: f64, temperature: f64) -> Result<f64> {
    boltzmann_state(splitting, temperature).map(|(_, p1)| p1)
}

/// Quasi-static work of raising the splitting from 0 to `e_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TotalWork {
    pub work: f64,
    /// Upper bound `T e^{-E_max/T}` on the work beyond `e_max`.
    pub tail_bound: f64,
    pub quadrature_error: f64,
    pub evaluations: usize,
    pub temperature: f64,
    pub e_max: f64,
}

/// Integrates [`work_integrand`] over `[0, e_max]` by adaptive Simpson.
///
/// `e_max >= 20 T` keeps the tail below `2e-9 T`; smaller values are
/// accepted and simply report a larger tail bound.
pub fn total_work(temperature: f64, e_max: f64, tol: f64) -> Result<TotalWork> {
    check_temperature(temperature)?;
    if !(e_max >= 0.0) || !e_max.is_finite() {
        return Err(Error::domain("e_max", e_max, "[0, inf)"));
    }
    let q = adaptive_simpson(|e| logistic(e / temperature), 0.0, e_max, tol)?;
    Ok(TotalWork {
        work: q.value,
        tail_bound: temperature * (-e_max / temperature).exp(),
        quadrature_error: q.error_estimate,
        evaluations: q.evaluations,
        temperature,
        e_max,
    })
}

/// One step of a discrete splitting schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorkStep {
    pub from: f64,
    pub to: f64,
    /// Occupation of `|1>` charged for this step (the pre-step value).
    pub p1_charged: f64,
    pub work: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct WorkLedger {
    pub total_work: f64,
    pub steps: Vec<WorkStep>,
}

impl WorkLedger {
    fn charge(&mut self, step: WorkStep) {
        self.total_work += step.work;
        self.steps.push(step);
    }
}

/// Raises the splitting along `grid` (which must start at 0 and increase
/// strictly), charging `p1 * dE` at the pre-step occupation and then
/// re-equilibrating at the new splitting.
///
/// For a decreasing integrand this left-point rule overestimates the
/// quasi-static work, and the overshoot shrinks monotonically as the grid
/// is refined.
pub fn adiabatic_schedule(temperature: f64, grid: &[f64]) -> Result<(WorkLedger, ThermalQubit)> {
    check_temperature(temperature)?;
    match grid.first() {
        Some(&0.0) => {}
        _ => return Err(Error::NonMonotoneGrid(0)),
    }
    if let Some(i) = grid.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::NonMonotoneGrid(i + 1));
    }

    let mut qubit = ThermalQubit::equilibrated(0.0, temperature)?;
    let mut ledger = WorkLedger::default();
    for w in grid.windows(2) {
        let (from, to) = (w[0], w[1]);
        ledger.charge(WorkStep {
            from,
            to,
            p1_charged: qubit.p1,
            work: qubit.p1 * (to - from),
        });
        qubit = ThermalQubit::equilibrated(to, temperature)?;
    }
    Ok((ledger, qubit))
}

/// `steps + 1` equally spaced splittings from 0 to `e_max`.
pub fn uniform_grid(e_max: f64, steps: usize) -> Vec<f64> {
    if steps == 0 {
        return vec![0.0];
    }
    let h = e_max / steps as f64;
    (0..=steps)
        .map(|i| if i == steps { e_max } else { i as f64 * h })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use spinerase_oracles as oracle;
    use std::f64::consts::LN_2;

    #[test]
    fn boltzmann_examples() {
        assert_eq!(boltzmann_state(0.0, 3.7).unwrap(), (0.5, 0.5));
        let (p0, p1) = boltzmann_state(2.0 * LN_2, 2.0).unwrap();
        assert!((p0 - 2.0 / 3.0).abs() < 1e-15);
        assert!((p1 - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(p0 + p1, 1.0);
        assert_eq!(boltzmann_state(f64::INFINITY, 1.0).unwrap(), (1.0, 0.0));
        assert!(matches!(
            boltzmann_state(1.0, 0.0),
            Err(Error::Domain { .. })
        ));
        assert!(boltzmann_state(1.0, -2.0).is_err());
    }

    #[test]
    fn integrand_examples() {
        assert_eq!(work_integrand(0.0, 1.0).unwrap(), 0.5);
        assert!((work_integrand(LN_2, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(work_integrand(50.0, 1.0).unwrap() < 2e-22);
    }

    #[test]
    fn total_work_examples() {
        let w = total_work(1.0, 50.0, 1e-9).unwrap();
        assert!((w.work - LN_2).abs() < 1e-7);
        assert!((w.tail_bound - (-50f64).exp()).abs() < 1e-30);
        let w2 = total_work(2.0, 100.0, 1e-9).unwrap();
        assert!((w2.work - 2.0 * LN_2).abs() < 1e-7);
        assert_eq!(total_work(1.0, 0.0, 1e-9).unwrap().work, 0.0);
        assert!(total_work(1.0, -1.0, 1e-9).is_err());
    }

    #[test]
    fn total_work_against_fixed_simpson() {
        let fine = oracle::simpson(|e| 1.0 / (1.0 + e.exp()), 0.0, 30.0, 200_000);
        let adaptive = total_work(1.0, 30.0, 1e-11).unwrap().work;
        assert!((fine - adaptive).abs() < 1e-9);
    }

    #[test]
    fn closed_form_and_scaling() {
        let unit = total_work(1.0, 50.0, 1e-9).unwrap().work;
        for t in [0.1, 1.0, 10.0] {
            let w = total_work(t, 50.0 * t, 1e-9 * t).unwrap().work;
            assert!((w - t * LN_2).abs() < 1e-6);
            assert!((w - t * unit).abs() < 1e-9, "T={t}");
        }
    }

    #[test]
    fn single_step_pays_half_the_gap() {
        let (ledger, q) = adiabatic_schedule(1.0, &[0.0, 1.0e6]).unwrap();
        assert_eq!(ledger.total_work, 0.5e6);
        assert_eq!(q.p1, 0.0);
    }

    #[test]
    fn trivial_schedule() {
        let (ledger, q) = adiabatic_schedule(1.0, &[0.0]).unwrap();
        assert_eq!(ledger.total_work, 0.0);
        assert!(ledger.steps.is_empty());
        assert_eq!(q.p1, 0.5);
    }

    #[test]
    fn schedule_rejects_bad_grids() {
        assert_eq!(adiabatic_schedule(1.0, &[]), Err(Error::NonMonotoneGrid(0)));
        assert_eq!(
            adiabatic_schedule(1.0, &[0.5, 1.0]),
            Err(Error::NonMonotoneGrid(0))
        );
        assert_eq!(
            adiabatic_schedule(1.0, &[0.0, 1.0, 1.0]),
            Err(Error::NonMonotoneGrid(2))
        );
        assert_eq!(
            adiabatic_schedule(1.0, &[0.0, 2.0, 1.0]),
            Err(Error::NonMonotoneGrid(2))
        );
    }

    #[test]
    fn fine_schedule_matches_euler_maclaurin() {
        // 10^4 uniform steps to 40T. The left-point overshoot predicted by
        // the Euler-Maclaurin expansion is ~1.0003e-3.
        for t in [0.5, 1.0, 4.0] {
            let grid = uniform_grid(40.0 * t, 10_000);
            let (ledger, _) = adiabatic_schedule(t, &grid).unwrap();
            let gap = ledger.total_work - t * LN_2;
            let predicted = oracle::left_riemann_overshoot(t, 40.0 * t, 10_000);
            assert!(
                (gap - predicted).abs() < 1e-9 * t,
                "T={t}: {gap} vs {predicted}"
            );
            assert!(gap > 0.0 && gap < 1.001e-3 * t);
        }
    }

    #[test]
    fn refinement_is_monotone_and_halves_gap() {
        let mut prev_total = f64::INFINITY;
        let mut prev_gap = f64::NAN;
        for steps in [250usize, 500, 1000, 2000, 4000, 8000] {
            let (ledger, q) = adiabatic_schedule(1.0, &uniform_grid(40.0, steps)).unwrap();
            assert!(ledger.total_work <= prev_total);
            assert!(ledger.total_work >= LN_2 - 40f64.exp().recip());
            let sum: f64 = ledger.steps.iter().map(|s| s.work).sum();
            assert!((sum - ledger.total_work).abs() < 1e-12);
            assert!(ledger.steps.iter().all(|s| s.work >= 0.0));
            assert_eq!(q.p1, boltzmann_state(40.0, 1.0).unwrap().1);
            let gap = ledger.total_work - LN_2;
            if prev_gap.is_finite() {
                // First order in h, with an O(h) correction to the ratio.
                assert!(
                    (prev_gap / gap - 2.0).abs() < 0.02,
                    "ratio {}",
                    prev_gap / gap
                );
            }
            prev_total = ledger.total_work;
            prev_gap = gap;
        }
    }
}
