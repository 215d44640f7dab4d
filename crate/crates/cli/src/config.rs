//! Run configuration: a flat TOML document per subcommand.
//!
//! Every subcommand accepts the common keys `subcommand`, `seed`,
//! `execution`, `[output]` and up to two `[[sweep]]` axes alongside its own
//! parameters. Unknown keys are rejected. Defaults are materialized during
//! validation so that every output records the complete parameter set.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use spinerase::ensemble::{alpha_from_gamma, gamma_from_alpha};
use spinerase::microsim::BathMode;
use spinerase::parallel::Execution;
use spinerase::protocol::Stop;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    ModelA,
    Protocol,
    Microsim,
    Demon,
    Maxent,
}

impl Subcommand {
    pub const ALL: [Subcommand; 5] = [
        Subcommand::ModelA,
        Subcommand::Protocol,
        Subcommand::Microsim,
        Subcommand::Demon,
        Subcommand::Maxent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::ModelA => "model-a",
            Subcommand::Protocol => "protocol",
            Subcommand::Microsim => "microsim",
            Subcommand::Demon => "demon",
            Subcommand::Maxent => "maxent",
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subcommand {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Subcommand::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CliError::config(format!("unknown subcommand '{s}'")))
    }
}

/// A real number written either as a TOML number or as a `"p/q"` string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Value(f64),
    Text(String),
}

impl Number {
    pub fn resolve(&self, key: &str) -> Result<f64> {
        match self {
            Number::Value(v) => Ok(*v),
            Number::Text(text) => {
                let bad = || {
                    CliError::config(format!(
                        "{key}: cannot read '{text}' as a number or a ratio p/q"
                    ))
                };
                let parsed = match text.split_once('/') {
                    Some((p, q)) => {
                        let p: f64 = p.trim().parse().map_err(|_| bad())?;
                        let q: f64 = q.trim().parse().map_err(|_| bad())?;
                        p / q
                    }
                    None => text.trim().parse().map_err(|_| bad())?,
                };
                if parsed.is_finite() {
                    Ok(parsed)
                } else {
                    Err(bad())
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// One `[[sweep]]` entry: explicit `values`, or `start`/`stop`/`points`
/// with linear or logarithmic `spacing`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub parameter: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<Spacing>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub parameter: String,
    pub values: Vec<f64>,
}

impl AxisConfig {
    pub fn resolve(&self) -> Result<Axis> {
        let key = format!("sweep.{}", self.parameter);
        let range = (self.start, self.stop, self.points);
        let values = match (&self.values, range) {
            (Some(v), (None, None, None)) if self.spacing.is_none() => v.clone(),
            (None, (Some(start), Some(stop), Some(points))) => grid(start, stop, points, self.spacing.unwrap_or_default())
                .map_err(|m| CliError::config(format!("{key}: {m}")))?,
            _ => {
                return Err(CliError::config(format!(
                    "{key}: give either `values` or all of `start`, `stop`, `points` (with optional `spacing`)"
                )))
            }
        };
        if values.is_empty() {
            return Err(CliError::config(format!("{key}: empty grid")));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(CliError::config(format!(
                "{key}: non-finite grid value {v}"
            )));
        }
        Ok(Axis {
            parameter: self.parameter.clone(),
            values,
        })
    }
}

fn grid(
    start: f64,
    stop: f64,
    points: u32,
    spacing: Spacing,
) -> std::result::Result<Vec<f64>, String> {
    if points == 0 {
        return Err("points must be at least 1".into());
    }
    if points == 1 {
        return Ok(vec![start]);
    }
    let last = (points - 1) as f64;
    let values = match spacing {
        Spacing::Linear => (0..points)
            .map(|i| start + (stop - start) * i as f64 / last)
            .collect::<Vec<_>>(),
        Spacing::Log => {
            if !(start > 0.0 && stop > 0.0) {
                return Err("log spacing needs positive start and stop".into());
            }
            let (a, b) = (start.ln(), stop.ln());
            (0..points)
                .map(|i| (a + (b - a) * i as f64 / last).exp())
                .collect()
        }
    };
    // Endpoints exactly as written.
    let mut values = values;
    values[0] = start;
    *values.last_mut().expect("points >= 2") = stop;
    Ok(values)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory; overridden by `--out-dir` and the environment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// File stem for `<stem>.csv` and `<stem>.json`; the subcommand name
    /// by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stem: Option<String>,
    /// Record wall time in the JSON summary. Off by default because it makes
    /// reruns differ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<bool>,
}

macro_rules! subcommand_config {
    ($(#[$meta:meta])* $name:ident { $($(#[$fmeta:meta])* $field:ident : $ty:ty),* $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            $(
                $(#[$fmeta])*
                #[serde(default, skip_serializing_if = "Option::is_none")]
                pub $field: Option<$ty>,
            )*
            #[serde(default, skip_serializing_if = "Option::is_none")]
            pub subcommand: Option<String>,
            #[serde(default, skip_serializing_if = "Option::is_none")]
            pub seed: Option<u64>,
            #[serde(default, skip_serializing_if = "Option::is_none")]
            pub execution: Option<Execution>,
            #[serde(default, skip_serializing_if = "Vec::is_empty")]
            pub sweep: Vec<AxisConfig>,
            #[serde(default, skip_serializing_if = "Option::is_none")]
            pub output: Option<OutputConfig>,
        }
    };
}

subcommand_config!(ModelAConfig {
    temperature: f64,
    e_max: f64,
    tol: f64,
    steps: u32,
});

subcommand_config!(ProtocolConfig {
    gamma_tilde: f64,
    alpha: Number,
    cycles: u32,
    target_p1: f64,
    epsilon: f64,
    series_tol: f64,
});

subcommand_config!(MicrosimConfig {
    mode: MicrosimMode,
    n_spins: u32,
    m_spins: u32,
    alpha: Number,
    gamma_tilde: f64,
    total_up: u32,
    block_size: u32,
    bath: BathKind,
    burn_in: u64,
    samples: u64,
    batches: u32,
    replicas: u32,
    start_all_ones: bool,
});

subcommand_config!(DemonConfig {
    temperature: f64,
    gamma_tilde: f64,
    alpha: Number,
    bits: u64,
    epsilon: f64,
});

subcommand_config!(MaxentConfig {
    n_spins: u32,
    target_mean: f64,
    alpha: Number,
    gamma_tilde: f64,
});

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MicrosimMode {
    #[default]
    Exchange,
    Block,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BathKind {
    #[default]
    Ideal,
    Resample,
    Finite,
}

// ---------------------------------------------------------------------------
// Validated parameter sets.

/// Spin temperature given as exactly one of `gamma_tilde` and `alpha`, with
/// the other derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinTemperature {
    pub gamma_tilde: f64,
    pub alpha: f64,
    /// Which of the two was supplied.
    pub given: &'static str,
}

fn spin_temperature(gamma_tilde: Option<f64>, alpha: Option<&Number>) -> Result<SpinTemperature> {
    match (gamma_tilde, alpha) {
        (Some(_), Some(_)) => Err(CliError::config(
            "give exactly one of gamma_tilde and alpha, not both",
        )),
        (None, None) => Err(CliError::config("one of gamma_tilde and alpha is required")),
        (Some(g), None) => {
            if !g.is_finite() {
                return Err(CliError::config(format!(
                    "gamma_tilde = {g} must be finite"
                )));
            }
            Ok(SpinTemperature {
                gamma_tilde: g,
                alpha: alpha_from_gamma(g),
                given: "gamma_tilde",
            })
        }
        (None, Some(a)) => {
            let alpha = a.resolve("alpha")?;
            Ok(SpinTemperature {
                gamma_tilde: gamma_from_alpha(alpha)?,
                alpha,
                given: "alpha",
            })
        }
    }
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(format!(
            "{key} = {v} must be positive and finite"
        )))
    }
}

fn non_negative(key: &str, v: f64) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(format!(
            "{key} = {v} must be non-negative and finite"
        )))
    }
}

fn at_least<T: PartialOrd + fmt::Display + Copy>(key: &str, v: T, min: T) -> Result<T> {
    if v >= min {
        Ok(v)
    } else {
        Err(CliError::config(format!(
            "{key} = {v} must be at least {min}"
        )))
    }
}

fn forbid<T>(key: &str, v: &Option<T>, why: &str) -> Result<()> {
    match v {
        Some(_) => Err(CliError::config(format!("{key} is not used {why}"))),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelAParams {
    pub temperature: f64,
    pub e_max: f64,
    pub tol: f64,
    pub steps: u32,
}

impl ModelAConfig {
    pub fn validate(&self) -> Result<ModelAParams> {
        let temperature = positive("temperature", self.temperature.unwrap_or(1.0))?;
        Ok(ModelAParams {
            temperature,
            e_max: non_negative("e_max", self.e_max.unwrap_or(50.0 * temperature))?,
            tol: positive("tol", self.tol.unwrap_or(1e-9))?,
            steps: at_least("steps", self.steps.unwrap_or(1000), 1)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolParams {
    #[serde(flatten)]
    pub spin: SpinTemperature,
    pub cycles: Option<u32>,
    pub target_p1: Option<f64>,
    pub epsilon: f64,
    pub series_tol: f64,
}

impl ProtocolParams {
    pub fn stop(&self) -> Stop {
        match (self.cycles, self.target_p1) {
            (Some(c), _) => Stop::Cycles(c),
            (None, Some(t)) => Stop::TargetP1(t),
            (None, None) => unreachable!("validated"),
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<ProtocolParams> {
        let spin = spin_temperature(self.gamma_tilde, self.alpha.as_ref())?;
        let (cycles, target_p1) = match (self.cycles, self.target_p1) {
            (Some(_), Some(_)) => {
                return Err(CliError::config("give at most one of cycles and target_p1"))
            }
            (None, None) => (None, Some(1e-3)),
            (c, t) => (c, t),
        };
        if let Some(t) = target_p1 {
            if !(t > 0.0 && t <= 1.0) {
                return Err(CliError::config(format!(
                    "target_p1 = {t} must lie in (0, 1]"
                )));
            }
        }
        Ok(ProtocolParams {
            spin,
            cycles,
            target_p1,
            epsilon: non_negative("epsilon", self.epsilon.unwrap_or(0.0))?,
            series_tol: positive("series_tol", self.series_tol.unwrap_or(1e-14))?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum MicrosimParams {
    Exchange {
        n_spins: u32,
        m_spins: u32,
        total_up: u32,
        /// Polarization used for the binomial comparison.
        alpha: f64,
        burn_in: u64,
        samples: u64,
        replicas: u32,
    },
    Block {
        block_size: u32,
        n_spins: u32,
        #[serde(flatten)]
        spin: SpinTemperature,
        bath: BathMode,
        burn_in: u64,
        samples: u64,
        batches: u32,
        replicas: u32,
        start_all_ones: bool,
    },
}

impl MicrosimConfig {
    pub fn validate(&self) -> Result<MicrosimParams> {
        let burn_in = self.burn_in.unwrap_or(1_000);
        let samples = at_least("samples", self.samples.unwrap_or(100_000), 1)?;
        let replicas = at_least("replicas", self.replicas.unwrap_or(1), 1)?;
        let n_spins = self
            .n_spins
            .ok_or_else(|| CliError::config("n_spins is required"))?;
        let n_spins = at_least("n_spins", n_spins, 1)?;
        match self.mode.unwrap_or_default() {
            MicrosimMode::Exchange => {
                let why = "in exchange mode";
                forbid("block_size", &self.block_size, why)?;
                forbid("bath", &self.bath, why)?;
                forbid("batches", &self.batches, why)?;
                forbid("start_all_ones", &self.start_all_ones, why)?;
                let m_spins = self
                    .m_spins
                    .ok_or_else(|| CliError::config("m_spins is required in exchange mode"))?;
                let m_spins = at_least("m_spins", m_spins, 1)?;
                let sites = n_spins as f64 + m_spins as f64;
                let given = [
                    self.alpha.is_some(),
                    self.gamma_tilde.is_some(),
                    self.total_up.is_some(),
                ];
                if given.iter().filter(|&&g| g).count() != 1 {
                    return Err(CliError::config(
                        "give exactly one of alpha, gamma_tilde and total_up in exchange mode",
                    ));
                }
                let (total_up, alpha) = match self.total_up {
                    Some(k) => {
                        if k as f64 > sites {
                            return Err(CliError::config(format!(
                                "total_up = {k} exceeds n_spins + m_spins = {sites}"
                            )));
                        }
                        (k, k as f64 / sites)
                    }
                    None => {
                        let spin = spin_temperature(self.gamma_tilde, self.alpha.as_ref())?;
                        ((spin.alpha * sites).round() as u32, spin.alpha)
                    }
                };
                Ok(MicrosimParams::Exchange {
                    n_spins,
                    m_spins,
                    total_up,
                    alpha,
                    burn_in,
                    samples,
                    replicas,
                })
            }
            MicrosimMode::Block => {
                forbid("total_up", &self.total_up, "in block mode")?;
                let block_size = self
                    .block_size
                    .ok_or_else(|| CliError::config("block_size is required in block mode"))?;
                let block_size = at_least("block_size", block_size, 1)?;
                if n_spins < block_size {
                    return Err(CliError::config(format!(
                        "n_spins = {n_spins} must be at least block_size = {block_size}"
                    )));
                }
                let spin = spin_temperature(self.gamma_tilde, self.alpha.as_ref())?;
                let bath = match self.bath.unwrap_or_default() {
                    BathKind::Ideal => {
                        forbid("m_spins", &self.m_spins, "with an ideal bath")?;
                        BathMode::Ideal
                    }
                    BathKind::Resample => {
                        forbid("m_spins", &self.m_spins, "with a resampled bath")?;
                        BathMode::Resample
                    }
                    BathKind::Finite => {
                        let m = self.m_spins.ok_or_else(|| {
                            CliError::config("m_spins is required with a finite bath")
                        })?;
                        BathMode::Finite {
                            m_spins: at_least("m_spins", m, 1)?,
                        }
                    }
                };
                let batches = at_least("batches", self.batches.unwrap_or(100), 2)?;
                if samples < batches as u64 {
                    return Err(CliError::config(format!(
                        "samples = {samples} must be at least batches = {batches}"
                    )));
                }
                Ok(MicrosimParams::Block {
                    block_size,
                    n_spins,
                    spin,
                    bath,
                    burn_in,
                    samples,
                    batches,
                    replicas,
                    start_all_ones: self.start_all_ones.unwrap_or(false),
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemonParams {
    pub temperature: f64,
    #[serde(flatten)]
    pub spin: SpinTemperature,
    pub bits: u64,
    pub epsilon: f64,
}

impl DemonConfig {
    pub fn validate(&self) -> Result<DemonParams> {
        let spin = spin_temperature(self.gamma_tilde, self.alpha.as_ref())?;
        if !(spin.gamma_tilde > 0.0) {
            return Err(CliError::config(format!(
                "gamma_tilde = {} must be positive (alpha below 1/2) for erasure",
                spin.gamma_tilde
            )));
        }
        Ok(DemonParams {
            temperature: positive("temperature", self.temperature.unwrap_or(1.0))?,
            spin,
            bits: self.bits.unwrap_or(1),
            epsilon: non_negative("epsilon", self.epsilon.unwrap_or(0.0))?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxentParams {
    pub n_spins: u32,
    pub target_mean: f64,
}

impl MaxentConfig {
    pub fn validate(&self) -> Result<MaxentParams> {
        let n_spins = self
            .n_spins
            .ok_or_else(|| CliError::config("n_spins is required"))?;
        let n_spins = at_least("n_spins", n_spins, 1)?;
        let target_mean = match (
            self.target_mean,
            self.alpha.is_some() || self.gamma_tilde.is_some(),
        ) {
            (Some(_), true) => {
                return Err(CliError::config(
                    "give exactly one of target_mean, alpha and gamma_tilde",
                ))
            }
            (Some(t), false) => t,
            (None, true) => {
                spin_temperature(self.gamma_tilde, self.alpha.as_ref())?.alpha * n_spins as f64
            }
            (None, false) => {
                return Err(CliError::config(
                    "one of target_mean, alpha and gamma_tilde is required",
                ))
            }
        };
        if !(target_mean > 0.0 && target_mean < n_spins as f64) {
            return Err(CliError::config(format!(
                "target_mean = {target_mean} must lie strictly between 0 and n_spins = {n_spins}"
            )));
        }
        Ok(MaxentParams {
            n_spins,
            target_mean,
        })
    }
}

// ---------------------------------------------------------------------------
// The assembled run configuration.

/// Raw (unvalidated) parameters of the chosen subcommand.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Parameters {
    ModelA(ModelAConfig),
    Protocol(ProtocolConfig),
    Microsim(MicrosimConfig),
    Demon(DemonConfig),
    Maxent(MaxentConfig),
}

/// Validated parameters of one run or sweep point.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Validated {
    ModelA(ModelAParams),
    Protocol(ProtocolParams),
    Microsim(MicrosimParams),
    Demon(DemonParams),
    Maxent(MaxentParams),
}

/// Keys that name the same physical quantity in different ways; setting one
/// from a sweep clears the others.
const ALTERNATIVES: [&[&str]; 2] = [
    &["gamma_tilde", "alpha", "total_up", "target_mean"],
    &["cycles", "target_p1"],
];

/// Keys that cannot be swept.
const NOT_SWEEPABLE: [&str; 5] = ["subcommand", "seed", "execution", "sweep", "output"];

impl Parameters {
    fn parse(subcommand: Subcommand, text: &str) -> Result<Self> {
        fn de<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
            toml::from_str(text)
                .map_err(|e| CliError::config(format!("invalid configuration: {e}")))
        }
        Ok(match subcommand {
            Subcommand::ModelA => Parameters::ModelA(de(text)?),
            Subcommand::Protocol => Parameters::Protocol(de(text)?),
            Subcommand::Microsim => Parameters::Microsim(de(text)?),
            Subcommand::Demon => Parameters::Demon(de(text)?),
            Subcommand::Maxent => Parameters::Maxent(de(text)?),
        })
    }

    pub fn validate(&self) -> Result<Validated> {
        Ok(match self {
            Parameters::ModelA(c) => Validated::ModelA(c.validate()?),
            Parameters::Protocol(c) => Validated::Protocol(c.validate()?),
            Parameters::Microsim(c) => Validated::Microsim(c.validate()?),
            Parameters::Demon(c) => Validated::Demon(c.validate()?),
            Parameters::Maxent(c) => Validated::Maxent(c.validate()?),
        })
    }

    /// Copy with `key = value`, clearing any alternative spelling of the
    /// same quantity.
    pub fn with(&self, key: &str, value: f64) -> Result<Self> {
        if NOT_SWEEPABLE.contains(&key) {
            return Err(CliError::config(format!(
                "sweep.{key}: this key cannot be swept"
            )));
        }
        let mut json = serde_json::to_value(self).expect("configs serialize");
        let map = json.as_object_mut().expect("configs are tables");
        for group in ALTERNATIVES {
            if group.contains(&key) {
                for other in group.iter() {
                    map.remove(*other);
                }
            }
        }
        let number = if value.fract() == 0.0 && value.abs() < 9.0e15 {
            Value::from(value as i64)
        } else {
            Value::from(value)
        };
        map.insert(key.to_string(), number);
        let bad = |e: serde_json::Error| CliError::config(format!("sweep.{key} = {value}: {e}"));
        Ok(match self {
            Parameters::ModelA(_) => Parameters::ModelA(serde_json::from_value(json).map_err(bad)?),
            Parameters::Protocol(_) => {
                Parameters::Protocol(serde_json::from_value(json).map_err(bad)?)
            }
            Parameters::Microsim(_) => {
                Parameters::Microsim(serde_json::from_value(json).map_err(bad)?)
            }
            Parameters::Demon(_) => Parameters::Demon(serde_json::from_value(json).map_err(bad)?),
            Parameters::Maxent(_) => Parameters::Maxent(serde_json::from_value(json).map_err(bad)?),
        })
    }

    fn common(&self) -> Common<'_> {
        macro_rules! pick {
            ($c:expr) => {
                (
                    $c.subcommand.as_deref(),
                    $c.seed,
                    $c.execution,
                    $c.sweep.as_slice(),
                    $c.output.as_ref(),
                )
            };
        }
        match self {
            Parameters::ModelA(c) => pick!(c),
            Parameters::Protocol(c) => pick!(c),
            Parameters::Microsim(c) => pick!(c),
            Parameters::Demon(c) => pick!(c),
            Parameters::Maxent(c) => pick!(c),
        }
    }
}

/// Keys shared by every subcommand: `subcommand`, `seed`, `execution`,
/// `sweep` and `output`.
type Common<'a> = (
    Option<&'a str>,
    Option<u64>,
    Option<Execution>,
    &'a [AxisConfig],
    Option<&'a OutputConfig>,
);

/// A parsed, validated configuration with every default materialized.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub parameters: Parameters,
    /// Validated base parameters (the run itself, or the sweep's base point).
    pub validated: Validated,
    pub seed: u64,
    pub execution: Execution,
    pub sweep: Vec<Axis>,
    pub output_dir: Option<PathBuf>,
    pub stem: String,
    pub wall_time: bool,
}

/// One point of a sweep: its coordinates and validated parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub coordinates: Vec<f64>,
    pub parameters: Validated,
}

impl RunConfig {
    pub fn is_sweep(&self) -> bool {
        !self.sweep.is_empty()
    }

    /// Sweep points in row order: the first axis varies slowest.
    pub fn grid(&self) -> Result<Vec<GridPoint>> {
        let mut points = vec![(Vec::new(), self.parameters.clone())];
        for axis in &self.sweep {
            let mut next = Vec::with_capacity(points.len() * axis.values.len());
            for (coords, params) in &points {
                for &v in &axis.values {
                    let mut c: Vec<f64> = coords.clone();
                    c.push(v);
                    next.push((c, params.with(&axis.parameter, v)?));
                }
            }
            points = next;
        }
        points
            .into_iter()
            .map(|(coordinates, params)| {
                let label = self
                    .sweep
                    .iter()
                    .zip(&coordinates)
                    .map(|(a, v)| format!("{} = {v}", a.parameter))
                    .collect::<Vec<_>>()
                    .join(", ");
                let parameters = params
                    .validate()
                    .map_err(|e| e.context(&format!("sweep point ({label})")))?;
                Ok(GridPoint {
                    coordinates,
                    parameters,
                })
            })
            .collect()
    }
}

/// Parses and validates a configuration for `subcommand`.
pub fn parse_config(subcommand: Subcommand, text: &str) -> Result<RunConfig> {
    let parameters = Parameters::parse(subcommand, text)?;
    let (named, seed, execution, axes, output) = parameters.common();
    if let Some(named) = named {
        if named != subcommand.name() {
            return Err(CliError::config(format!(
                "configuration is for subcommand '{named}' but '{subcommand}' was requested"
            )));
        }
    }
    if axes.len() > 2 {
        return Err(CliError::config(format!(
            "at most two sweep axes are supported, got {}",
            axes.len()
        )));
    }
    let sweep = axes
        .iter()
        .map(AxisConfig::resolve)
        .collect::<Result<Vec<_>>>()?;
    if sweep.len() == 2 && sweep[0].parameter == sweep[1].parameter {
        return Err(CliError::config(format!(
            "sweep axis '{}' appears twice",
            sweep[0].parameter
        )));
    }
    let stem = output
        .and_then(|o| o.stem.clone())
        .unwrap_or_else(|| subcommand.name().to_string());
    if stem.is_empty() || stem.contains(['/', '\\']) {
        return Err(CliError::config(format!(
            "output.stem '{stem}' must be a plain file name"
        )));
    }
    let config = RunConfig {
        subcommand,
        validated: parameters.validate()?,
        seed: seed.unwrap_or(0),
        execution: execution.unwrap_or_default(),
        sweep,
        output_dir: output.and_then(|o| o.dir.clone()),
        stem,
        wall_time: output.and_then(|o| o.wall_time).unwrap_or(false),
        parameters,
    };
    // Reject bad grid points before any work is done.
    config.grid()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn minimal_protocol() {
        let c = parse_config(Subcommand::Protocol, "gamma_tilde = 0.75\ncycles = 9\n").unwrap();
        let Validated::Protocol(p) = &c.validated else {
            panic!()
        };
        assert_eq!(p.cycles, Some(9));
        assert_eq!(p.spin.gamma_tilde, 0.75);
        assert_eq!(c.seed, 0);
        assert_eq!(c.stem, "protocol");
        assert!(!c.is_sweep());
    }

    #[test]
    fn exclusive_spin_temperature() {
        let e = parse_config(Subcommand::Protocol, "gamma_tilde = 0.7\nalpha = 0.3\n").unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("exactly one"), "{e}");
        assert!(parse_config(Subcommand::Protocol, "cycles = 3\n").is_err());
    }

    #[test]
    fn alpha_ratio_text() {
        let c = parse_config(Subcommand::Protocol, "alpha = \"1/3\"\n").unwrap();
        let Validated::Protocol(p) = &c.validated else {
            panic!()
        };
        assert!((p.spin.gamma_tilde - LN_2).abs() < 1e-15);
        assert_eq!(p.spin.given, "alpha");
        assert_eq!(p.target_p1, Some(1e-3));
        assert!(parse_config(Subcommand::Protocol, "alpha = \"one third\"\n").is_err());
        assert!(parse_config(Subcommand::Protocol, "alpha = \"1/0\"\n").is_err());
        assert!(parse_config(Subcommand::Protocol, "alpha = 0.25\n").is_ok());
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let e =
            parse_config(Subcommand::Protocol, "gamma_tilde = 1.0\n\ncylces = 3\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("cylces") && msg.contains("line 3"), "{msg}");
        let e = parse_config(Subcommand::Protocol, "gamma_tilde = = 1\n").unwrap_err();
        assert!(e.to_string().contains("line 1"), "{e}");
    }

    #[test]
    fn subcommand_key_must_match() {
        assert!(parse_config(
            Subcommand::Demon,
            "subcommand = \"protocol\"\ngamma_tilde = 1.0\n"
        )
        .is_err());
        assert!(parse_config(
            Subcommand::Demon,
            "subcommand = \"demon\"\ngamma_tilde = 1.0\n"
        )
        .is_ok());
    }

    #[test]
    fn sweep_grids() {
        let text = "gamma_tilde = 1.0\n[[sweep]]\nparameter = \"gamma_tilde\"\nstart = 0.1\nstop = 5.0\npoints = 50\nspacing = \"log\"\n";
        let c = parse_config(Subcommand::Protocol, text).unwrap();
        let grid = c.grid().unwrap();
        assert_eq!(grid.len(), 50);
        assert_eq!(grid[0].coordinates, vec![0.1]);
        assert_eq!(grid[49].coordinates, vec![5.0]);
        let ratio = c.sweep[0].values[1] / c.sweep[0].values[0];
        assert!((c.sweep[0].values[30] / c.sweep[0].values[29] - ratio).abs() < 1e-12);
    }

    #[test]
    fn sweep_replaces_alternatives() {
        let text = "alpha = 0.2\ncycles = 4\n[[sweep]]\nparameter = \"gamma_tilde\"\nvalues = [1.0, 2.0]\n[[sweep]]\nparameter = \"target_p1\"\nvalues = [0.01]\n";
        let c = parse_config(Subcommand::Protocol, text).unwrap();
        let grid = c.grid().unwrap();
        assert_eq!(grid.len(), 2);
        let Validated::Protocol(p) = &grid[1].parameters else {
            panic!()
        };
        assert_eq!(p.spin.gamma_tilde, 2.0);
        assert_eq!(p.spin.given, "gamma_tilde");
        assert_eq!(p.cycles, None);
        assert_eq!(p.target_p1, Some(0.01));
    }

    #[test]
    fn sweep_errors() {
        let three = "gamma_tilde = 1.0\n".to_string()
            + &"[[sweep]]\nparameter = \"epsilon\"\nvalues = [0.0]\n".repeat(3);
        assert!(parse_config(Subcommand::Protocol, &three).is_err());
        let bad_key = "gamma_tilde = 1.0\n[[sweep]]\nparameter = \"nonsense\"\nvalues = [1.0]\n";
        assert!(parse_config(Subcommand::Protocol, bad_key).is_err());
        let bad_point =
            "gamma_tilde = 1.0\n[[sweep]]\nparameter = \"epsilon\"\nvalues = [0.0, -1.0]\n";
        let e = parse_config(Subcommand::Protocol, bad_point).unwrap_err();
        assert!(e.to_string().contains("epsilon = -1"), "{e}");
        let mixed =
            "gamma_tilde = 1.0\n[[sweep]]\nparameter = \"epsilon\"\nvalues = [0.0]\npoints = 3\n";
        assert!(parse_config(Subcommand::Protocol, mixed).is_err());
        let seed = "gamma_tilde = 1.0\n[[sweep]]\nparameter = \"seed\"\nvalues = [1.0]\n";
        assert!(parse_config(Subcommand::Protocol, seed).is_err());
    }

    #[test]
    fn integer_sweeps() {
        let text = "mode = \"block\"\nn_spins = 8\nblock_size = 1\ngamma_tilde = 1.0\n[[sweep]]\nparameter = \"block_size\"\nvalues = [1, 2, 3]\n";
        let c = parse_config(Subcommand::Microsim, text).unwrap();
        assert_eq!(c.grid().unwrap().len(), 3);
        let frac = "mode = \"block\"\nn_spins = 8\nblock_size = 1\ngamma_tilde = 1.0\n[[sweep]]\nparameter = \"block_size\"\nvalues = [1.5]\n";
        assert!(parse_config(Subcommand::Microsim, frac).is_err());
    }

    #[test]
    fn microsim_modes() {
        let ex = parse_config(
            Subcommand::Microsim,
            "n_spins = 8\nm_spins = 512\nalpha = 0.25\n",
        )
        .unwrap();
        let Validated::Microsim(MicrosimParams::Exchange { total_up, .. }) = ex.validated else {
            panic!()
        };
        assert_eq!(total_up, 130);
        assert!(parse_config(
            Subcommand::Microsim,
            "n_spins = 8\nm_spins = 8\nalpha = 0.25\ntotal_up = 4\n"
        )
        .is_err());
        assert!(parse_config(
            Subcommand::Microsim,
            "n_spins = 8\nm_spins = 8\ntotal_up = 17\n"
        )
        .is_err());
        assert!(parse_config(
            Subcommand::Microsim,
            "n_spins = 8\nm_spins = 8\ntotal_up = 4\nbath = \"ideal\"\n"
        )
        .is_err());
        let blk = "mode = \"block\"\nn_spins = 8\nblock_size = 2\nalpha = 0.25\nbath = \"finite\"\nm_spins = 16\n";
        let c = parse_config(Subcommand::Microsim, blk).unwrap();
        let Validated::Microsim(MicrosimParams::Block { bath, .. }) = c.validated else {
            panic!()
        };
        assert_eq!(bath, BathMode::Finite { m_spins: 16 });
        assert!(parse_config(
            Subcommand::Microsim,
            "mode = \"block\"\nn_spins = 8\nblock_size = 2\nalpha = 0.25\nm_spins = 4\n"
        )
        .is_err());
        assert!(parse_config(
            Subcommand::Microsim,
            "mode = \"block\"\nn_spins = 1\nblock_size = 2\nalpha = 0.25\n"
        )
        .is_err());
    }

    #[test]
    fn maxent_and_demon_inputs() {
        let m = parse_config(Subcommand::Maxent, "n_spins = 10\nalpha = 0.3\n").unwrap();
        let Validated::Maxent(p) = m.validated else {
            panic!()
        };
        assert!((p.target_mean - 3.0).abs() < 1e-12);
        assert!(parse_config(Subcommand::Maxent, "n_spins = 10\ntarget_mean = 10\n").is_err());
        assert!(parse_config(
            Subcommand::Maxent,
            "n_spins = 10\ntarget_mean = 3\nalpha = 0.3\n"
        )
        .is_err());
        assert!(parse_config(Subcommand::Demon, "alpha = 0.6\n").is_err());
        assert!(parse_config(Subcommand::Demon, "gamma_tilde = 0.5\ntemperature = 0\n").is_err());
    }

    #[test]
    fn output_section() {
        let c = parse_config(
            Subcommand::ModelA,
            "[output]\ndir = \"res\"\nstem = \"run1\"\nwall_time = true\n",
        )
        .unwrap();
        assert_eq!(c.output_dir, Some(PathBuf::from("res")));
        assert_eq!(c.stem, "run1");
        assert!(c.wall_time);
        assert!(parse_config(Subcommand::ModelA, "[output]\nstem = \"a/b\"\n").is_err());
        assert!(parse_config(Subcommand::ModelA, "[output]\nformat = \"csv\"\n").is_err());
    }
}
