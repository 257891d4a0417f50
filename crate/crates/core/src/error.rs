use thiserror::Error;

use crate::equilibrium::Equilibrium;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("interval bound order: {name}[{row}][{col}] has lower {lower} > upper {upper}")]
    IntervalOrder {
        name: &'static str,
        row: usize,
        col: usize,
        lower: f64,
        upper: f64,
    },

    #[error("box bound order: {name}[{index}] has lo {lo} > hi {hi}")]
    BoxOrder {
        name: &'static str,
        index: usize,
        lo: f64,
        hi: f64,
    },

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error(
        "realization outside intervals: {name}[{row}][{col}] = {value} not in [{lower}, {upper}]"
    )]
    OutsideInterval {
        name: &'static str,
        row: usize,
        col: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("stability certificate does not pass (kappa = {kappa})")]
    CertificateFailed { kappa: f64 },

    #[error("picard iteration did not converge within {} iterations", .0.iterations)]
    Unconverged(Box<Equilibrium>),

    #[error("non-finite state at step {step}")]
    NonFinite { step: usize },

    #[error("unsupported Mittag-Leffler parameters: {0}")]
    Unsupported(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },
}
