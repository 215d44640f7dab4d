use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A real-valued parameter lies outside the region where the model is defined.
    #[error("{name} = {value} is outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// An integer index or count lies outside its admissible range.
    #[error("{name} = {value} is outside [{min}, {max}]")]
    Range {
        name: &'static str,
        value: i64,
        min: i64,
        max: i64,
    },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("spin-cost series diverges for gamma_tilde = {0} (requires gamma_tilde > 0)")]
    Divergence(f64),

    #[error("splitting grid must start at 0 and increase strictly (violated at index {0})")]
    NonMonotoneGrid(usize),

    #[error("target p1 = {target} is unreachable at gamma_tilde = {gamma_tilde}")]
    NonTermination { gamma_tilde: f64, target: f64 },

    #[error("invalid state: {0}")]
    InvalidState(&'static str),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, domain: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            domain,
        }
    }

    pub(crate) fn range(name: &'static str, value: i64, min: i64, max: i64) -> Self {
        Error::Range {
            name,
            value,
            min,
            max,
        }
    }
}
