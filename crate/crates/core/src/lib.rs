//! Fractional interval implicit projection networks.
//!
//! A network is the Caputo system
//!
//! ```text
//! D^alpha x = P_{Hx + K1}[x - rho (A x + A* y + a)] - x
//! D^alpha y = P_{Ly + K2}[y - lambda (B y + B* x + b)] - y
//! ```
//!
//! whose matrices are only known up to elementwise intervals. The crate
//! checks a weighted diagonal-dominance certificate that makes the projection
//! map a contraction for every member of the family, computes equilibria by
//! Picard iteration, integrates the dynamics with a fractional
//! Adams-Bashforth-Moulton scheme and compares trajectories against the
//! Mittag-Leffler decay envelope.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod equilibrium;
pub mod error;
pub mod fde;
pub mod mlf;
pub mod model;
pub mod projection;
mod quad;
pub mod scenarios;

pub use certify::{
    certificate, find_weights, tilde_coeffs, Certificate, ComparisonSystem, TildeCoeffs,
};
pub use equilibrium::{picard_solve, residual, Equilibrium, PicardOptions};
pub use error::{Error, Result};
pub use fde::{envelope_check, integrate, EnvelopeReport, Trajectory};
pub use mlf::{mittag_leffler, ml_envelope, recip_gamma, MlfParams};
pub use model::{
    sample_matrix, validate_system, BoxSet, IntervalMatrix, Intervals, Realization, Selector,
    ShiftMap, SystemSpec, ValidatedSystem, Weights,
};
pub use projection::{fixed_point_map, project_box, project_implicit, rhs, Network, StateVector};
pub use scenarios::{
    builtin_scenario, load_spec, scalar_relaxation, serialize, traffic_gstm, ScenarioName,
    TrafficParams,
};

pub use nalgebra::{DMatrix, DVector};
