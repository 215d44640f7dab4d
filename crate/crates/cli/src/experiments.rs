//! The computation behind each subcommand, producing a per-run table and a
//! one-row summary (the row a sweep emits for that point).

use serde_json::{json, Map, Value};
use spinerase::demon::{demon_cycle_with_epsilon, erasure_entropy_price};
use spinerase::ensemble::{
    binary_entropy, distribution_entropy, maxent_solve, occupation_marginal,
    OccupationDistribution, ReservoirSpec,
};
use spinerase::microsim::{
    chi_square_gof, exact_block_p1, exact_joint_marginal, mc_block_equilibrate, mc_reservoir_bath,
    BathMode, BlockParams, ExchangeParams, TrajectoryStats,
};
use spinerase::model_a::{adiabatic_schedule, total_work, uniform_grid};
use spinerase::parallel::{map_ordered, Execution};
use spinerase::protocol::{
    energy_cost, equilibrium_p1, run_protocol, spin_cost_bounds, total_spin_cost,
};
use std::f64::consts::LN_2;

use crate::config::{
    DemonParams, MaxentParams, MicrosimParams, ModelAParams, ProtocolParams, Validated,
};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
    /// Not applicable at this point.
    Empty,
}

impl Cell {
    /// CSV text: shortest round-trip decimals, scientific notation for very
    /// small or very large magnitudes.
    pub fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => v.clone(),
            Cell::Empty => String::new(),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) => json!(v),
            Cell::Bool(v) => json!(v),
            Cell::Text(v) => json!(v),
            Cell::Empty => Value::Null,
        }
    }
}

pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Ordered key/value pairs: one CSV row in a sweep, an object in JSON.
pub type Summary = Vec<(&'static str, Cell)>;

pub fn summary_json(summary: &Summary) -> Value {
    Value::Object(
        summary
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_json()))
            .collect::<Map<_, _>>(),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub table: Table,
    pub summary: Summary,
    /// Extra JSON-only results beyond the summary.
    pub extra: Value,
    pub derived: Value,
    pub tolerances: Value,
}

/// Runs one parameter set. `stream_base` offsets the random streams so that
/// sweep points draw independent trajectories.
pub fn evaluate(
    params: &Validated,
    seed: u64,
    stream_base: u64,
    exec: Execution,
) -> Result<Report> {
    match params {
        Validated::ModelA(p) => model_a(p),
        Validated::Protocol(p) => protocol(p),
        Validated::Microsim(p) => microsim(p, seed, stream_base, exec),
        Validated::Demon(p) => demon(p),
        Validated::Maxent(p) => maxent(p),
    }
}

/// Random streams a single evaluation may use (its replica count).
pub fn streams_needed(params: &Validated) -> u64 {
    match params {
        Validated::Microsim(MicrosimParams::Exchange { replicas, .. })
        | Validated::Microsim(MicrosimParams::Block { replicas, .. }) => *replicas as u64,
        _ => 1,
    }
}

fn model_a(p: &ModelAParams) -> Result<Report> {
    let t = p.temperature;
    let w = total_work(t, p.e_max, p.tol)?;
    let (ledger, qubit) = adiabatic_schedule(t, &uniform_grid(p.e_max, p.steps as usize))?;
    let landauer = t * LN_2;

    let mut table = Table::new(&[
        "step",
        "energy_from",
        "energy_to",
        "p1_charged",
        "work",
        "cumulative_work",
    ]);
    let mut cumulative = 0.0;
    for (i, s) in ledger.steps.iter().enumerate() {
        cumulative += s.work;
        table.push(vec![
            (i as u64 + 1).into(),
            s.from.into(),
            s.to.into(),
            s.p1_charged.into(),
            s.work.into(),
            cumulative.into(),
        ]);
    }

    let summary: Summary = vec![
        ("temperature", t.into()),
        ("e_max", p.e_max.into()),
        ("work", w.work.into()),
        ("tail_bound", w.tail_bound.into()),
        ("landauer_work", landauer.into()),
        ("work_minus_landauer", (w.work - landauer).into()),
        ("schedule_steps", p.steps.into()),
        ("schedule_work", ledger.total_work.into()),
        ("schedule_overshoot", (ledger.total_work - landauer).into()),
        ("final_p1", qubit.p1.into()),
    ];
    Ok(Report {
        table,
        summary,
        extra: json!({ "quadrature_evaluations": w.evaluations }),
        derived: json!({ "landauer_work": landauer }),
        tolerances: json!({
            "quadrature_tol": p.tol,
            "quadrature_error_estimate": w.quadrature_error,
            "tail_bound": w.tail_bound,
        }),
    })
}

fn protocol(p: &ProtocolParams) -> Result<Report> {
    let g = p.spin.gamma_tilde;
    let run = run_protocol(g, p.stop())?;

    let mut table = Table::new(&["cycle", "block_size", "p1", "cycle_cost", "cumulative_cost"]);
    for r in &run.history {
        table.push(vec![
            r.cycle.into(),
            r.block_size.into(),
            r.p1.into(),
            r.cycle_cost.into(),
            r.cumulative_cost.into(),
        ]);
    }

    // The full series and its bounds exist only for g > 0.
    let series = if g > 0.0 {
        Some(total_spin_cost(g, p.series_tol)?)
    } else {
        None
    };
    let djz = series.map(|s| s.value);
    let djz_prime = djz.map(|d| d + 0.5);
    let bounds = if g > 0.0 {
        Some(spin_cost_bounds(g, false)?)
    } else {
        None
    };
    let bounds_initial = if g > 0.0 {
        Some(spin_cost_bounds(g, true)?)
    } else {
        None
    };
    let strictly = |b: Option<(f64, f64)>, v: Option<f64>| match (b, v) {
        (Some((lo, hi)), Some(v)) => Cell::Bool(lo < v && v < hi),
        _ => Cell::Empty,
    };
    let energy = match djz {
        Some(d) => Some(energy_cost(p.epsilon, d)?),
        None => None,
    };

    let summary: Summary = vec![
        ("gamma_tilde", g.into()),
        ("alpha", p.spin.alpha.into()),
        ("cycles", (run.history.len() as u64).into()),
        ("final_block_size", run.state.block_size().into()),
        ("final_p1", run.state.p1().into()),
        ("trace_cost", run.ledger.delta_jz.into()),
        ("delta_jz_lower", bounds.map(|b| b.0).into()),
        ("delta_jz", djz.into()),
        ("delta_jz_upper", bounds.map(|b| b.1).into()),
        ("within_bounds", strictly(bounds, djz)),
        ("delta_jz_prime_lower", bounds_initial.map(|b| b.0).into()),
        ("delta_jz_prime", djz_prime.into()),
        ("delta_jz_prime_upper", bounds_initial.map(|b| b.1).into()),
        ("within_bounds_initial", strictly(bounds_initial, djz_prime)),
        ("entropy_price", djz_prime.map(|d| g * d).into()),
        ("epsilon", p.epsilon.into()),
        ("energy_cost", energy.into()),
    ];
    Ok(Report {
        table,
        summary,
        extra: Value::Null,
        derived: json!({
            "gamma_tilde": g,
            "alpha": p.spin.alpha,
            "cycles": run.history.len(),
        }),
        tolerances: json!({
            "series_tol": p.series_tol,
            "series_terms": series.map(|s| s.terms),
            "series_tail_bound": series.map(|s| s.tail_bound),
        }),
    })
}

fn demon(p: &DemonParams) -> Result<Report> {
    let l = demon_cycle_with_epsilon(p.temperature, p.spin.gamma_tilde, p.bits, p.epsilon)?;
    let price = erasure_entropy_price(p.spin.gamma_tilde, true)?;
    let summary: Summary = vec![
        ("temperature", l.temperature.into()),
        ("gamma_tilde", l.gamma_tilde.into()),
        ("alpha", p.spin.alpha.into()),
        ("bits", l.bits.into()),
        ("epsilon", l.epsilon.into()),
        ("work_extracted", l.work_extracted.into()),
        ("spin_spent", l.spin_spent.into()),
        ("memory_entropy_change", l.memory_entropy_change.into()),
        (
            "spin_reservoir_entropy_change",
            l.spin_reservoir_entropy_change.into(),
        ),
        (
            "heat_reservoir_entropy_change",
            l.heat_reservoir_entropy_change.into(),
        ),
        ("total_entropy_change", l.total_entropy_change().into()),
        (
            "total_entropy_positive",
            (l.total_entropy_change() > 0.0).into(),
        ),
        (
            "net_energy_cost_of_erasure",
            l.net_energy_cost_of_erasure.into(),
        ),
        ("entropy_price_per_bit", price.into()),
    ];
    let mut table = Table {
        header: summary.iter().map(|(k, _)| k.to_string()).collect(),
        rows: Vec::new(),
    };
    table.push(summary.iter().map(|(_, v)| v.clone()).collect());
    Ok(Report {
        table,
        summary,
        extra: Value::Null,
        derived: json!({
            "gamma_tilde": p.spin.gamma_tilde,
            "alpha": p.spin.alpha,
            "landauer_entropy_per_bit": LN_2,
        }),
        tolerances: json!({ "series_tol": 1e-14 }),
    })
}

fn maxent(p: &MaxentParams) -> Result<Report> {
    let sol = maxent_solve(p.n_spins, p.target_mean)?;
    let alpha = p.target_mean / p.n_spins as f64;
    let closed = occupation_marginal(&ReservoirSpec::from_alpha(p.n_spins, alpha)?);
    let mut table = Table::new(&["n", "probability", "closed_form", "abs_diff"]);
    for (n, (a, b)) in sol
        .distribution
        .probabilities()
        .iter()
        .zip(closed.probabilities())
        .enumerate()
    {
        table.push(vec![
            (n as u64).into(),
            (*a).into(),
            (*b).into(),
            (a - b).abs().into(),
        ]);
    }
    let summary: Summary = vec![
        ("n_spins", p.n_spins.into()),
        ("target_mean", p.target_mean.into()),
        ("gamma_tilde", sol.gamma_tilde.into()),
        ("alpha", alpha.into()),
        ("iterations", sol.iterations.into()),
        (
            "entropy",
            distribution_entropy(&sol.distribution, true).into(),
        ),
        (
            "n_binary_entropy",
            (p.n_spins as f64 * binary_entropy(alpha)).into(),
        ),
        (
            "max_abs_diff",
            sol.distribution.max_abs_diff(&closed).into(),
        ),
    ];
    Ok(Report {
        table,
        summary,
        extra: Value::Null,
        derived: json!({ "alpha": alpha, "gamma_tilde": sol.gamma_tilde }),
        tolerances: json!({ "bisection": "to f64 resolution" }),
    })
}

fn point_mass_or_binomial(n_spins: u32, alpha: f64) -> Result<OccupationDistribution> {
    if alpha > 0.0 && alpha < 1.0 {
        return Ok(occupation_marginal(&ReservoirSpec::from_alpha(
            n_spins, alpha,
        )?));
    }
    let mut p = vec![0.0; n_spins as usize + 1];
    p[if alpha <= 0.0 { 0 } else { n_spins as usize }] = 1.0;
    Ok(OccupationDistribution::new(p)?)
}

fn microsim(p: &MicrosimParams, seed: u64, stream_base: u64, exec: Execution) -> Result<Report> {
    match *p {
        MicrosimParams::Exchange {
            n_spins,
            m_spins,
            total_up,
            alpha,
            burn_in,
            samples,
            replicas,
        } => {
            let params = ExchangeParams {
                n_spins,
                m_spins,
                total_up,
                burn_in,
                samples,
            };
            let streams: Vec<u64> = (0..replicas as u64).map(|r| stream_base + r).collect();
            let runs = map_ordered(exec, &streams, |&s| mc_reservoir_bath(&params, seed, s))
                .into_iter()
                .collect::<spinerase::Result<Vec<_>>>()?;
            let counts = TrajectoryStats::pooled_histogram(&runs);
            let total: u64 = counts.iter().sum();
            let empirical = OccupationDistribution::new(
                counts.iter().map(|&c| c as f64 / total as f64).collect(),
            )?;
            let exact = exact_joint_marginal(n_spins, m_spins, total_up)?;
            let binomial = point_mass_or_binomial(n_spins, alpha)?;
            let chi = chi_square_gof(&counts, exact.probabilities());
            let conserved = runs.iter().all(|r| r.initial_total_up == r.final_total_up);
            let (proposals, accepted) = runs
                .iter()
                .fold((0u64, 0u64), |(p, a), r| (p + r.proposals, a + r.accepted));

            let mut table = Table::new(&["n", "count", "empirical", "exact", "binomial"]);
            for (n, &count) in counts.iter().enumerate() {
                table.push(vec![
                    (n as u64).into(),
                    count.into(),
                    empirical.probabilities()[n].into(),
                    exact.probabilities()[n].into(),
                    binomial.probabilities()[n].into(),
                ]);
            }
            let summary: Summary = vec![
                ("n_spins", n_spins.into()),
                ("m_spins", m_spins.into()),
                ("total_up", total_up.into()),
                ("alpha", alpha.into()),
                ("samples", total.into()),
                (
                    "tv_empirical_exact",
                    empirical.total_variation(&exact)?.into(),
                ),
                (
                    "tv_empirical_binomial",
                    empirical.total_variation(&binomial)?.into(),
                ),
                (
                    "tv_exact_binomial",
                    exact.total_variation(&binomial)?.into(),
                ),
                ("chi2_statistic", chi.statistic.into()),
                ("chi2_dof", chi.dof.into()),
                ("chi2_p_value", chi.p_value.into()),
                (
                    "acceptance_rate",
                    (accepted as f64 / proposals.max(1) as f64).into(),
                ),
                ("conserved", conserved.into()),
            ];
            Ok(Report {
                table,
                summary,
                extra: json!({
                    "streams": streams,
                    "proposals": proposals,
                    "sweep_definition": "n_spins + m_spins pair proposals per recorded sample",
                }),
                derived: json!({ "total_up": total_up, "alpha": alpha }),
                tolerances: json!({ "chi2_min_expected_per_bin": 5.0 }),
            })
        }
        MicrosimParams::Block {
            block_size,
            n_spins,
            spin,
            bath,
            burn_in,
            samples,
            batches,
            replicas,
            start_all_ones,
        } => {
            let streams: Vec<u64> = (0..replicas as u64).map(|r| stream_base + r).collect();
            let runs = map_ordered(exec, &streams, |&s| {
                mc_block_equilibrate(&BlockParams {
                    block_size,
                    n_spins,
                    gamma_tilde: spin.gamma_tilde,
                    seed,
                    stream_index: s,
                    burn_in,
                    samples,
                    bath,
                    start_all_ones,
                    batches,
                })
            })
            .into_iter()
            .collect::<spinerase::Result<Vec<_>>>()?;
            let estimates: Vec<_> = runs.iter().filter_map(|r| r.block_p1_estimate).collect();
            let r = estimates.len() as f64;
            let mean = estimates.iter().map(|e| e.mean).sum::<f64>() / r;
            let se = estimates
                .iter()
                .map(|e| e.std_error * e.std_error)
                .sum::<f64>()
                .sqrt()
                / r;
            let closed = equilibrium_p1(block_size, spin.gamma_tilde);
            let (expected, m_spins) = match bath {
                BathMode::Finite { m_spins } => {
                    let k = runs[0].initial_total_up as u32;
                    (
                        exact_block_p1(n_spins, m_spins, k, block_size)?,
                        Cell::from(m_spins),
                    )
                }
                _ => (closed, Cell::Empty),
            };
            let z = (mean - expected) / se;
            let counts = TrajectoryStats::pooled_histogram(&runs);
            let conserved = runs.iter().all(|r| r.initial_total_up == r.final_total_up);
            let (proposals, accepted) = runs
                .iter()
                .fold((0u64, 0u64), |(p, a), r| (p + r.proposals, a + r.accepted));
            let bath_name = match bath {
                BathMode::Ideal => "ideal",
                BathMode::Resample => "resample",
                BathMode::Finite { .. } => "finite",
            };

            let mut table = Table::new(&["n", "count"]);
            for (n, &c) in counts.iter().enumerate() {
                table.push(vec![(n as u64).into(), c.into()]);
            }
            let summary: Summary = vec![
                ("block_size", block_size.into()),
                ("n_spins", n_spins.into()),
                ("gamma_tilde", spin.gamma_tilde.into()),
                ("alpha", spin.alpha.into()),
                ("bath", bath_name.into()),
                ("m_spins", m_spins),
                ("samples", (samples * replicas as u64).into()),
                ("p1_estimate", mean.into()),
                ("std_error", se.into()),
                ("p1_expected", expected.into()),
                ("p1_infinite_bath", closed.into()),
                ("z_score", z.into()),
                ("within_3se", (z.abs() < 3.0).into()),
                (
                    "acceptance_rate",
                    (accepted as f64 / proposals.max(1) as f64).into(),
                ),
                ("conserved", conserved.into()),
            ];
            Ok(Report {
                table,
                summary,
                extra: json!({
                    "streams": streams,
                    "replica_estimates": estimates,
                    "proposals": proposals,
                }),
                derived: json!({ "gamma_tilde": spin.gamma_tilde, "alpha": spin.alpha }),
                tolerances: json!({ "standard_errors": 3.0, "batches": batches }),
            })
        }
    }
}
