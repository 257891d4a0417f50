//! Equilibrium computation by Picard iteration of the projection map.
//!
//! When the certificate passes, the projection map `F` is a `kappa`-contraction
//! in the weighted l1 norm for every realization, so plain iteration
//! `z <- F(z)` converges linearly to the unique equilibrium. Iteration runs in
//! the original coordinates; the weights only enter the stopping metric.

use crate::certify::certificate;
use crate::error::{Error, Result};
use crate::model::{Realization, ValidatedSystem, Weights};
use crate::projection::{Network, StateVector};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct PicardOptions {
    /// Target weighted distance to the true fixed point.
    pub tol: f64,
    pub max_iter: usize,
    /// Starting point; defaults to the box midpoints.
    pub initial: Option<StateVector>,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub point: StateVector,
    pub iterations: usize,
    /// `||F(point) - point||` in the weighted norm.
    pub residual: f64,
    /// `kappa^k / (1 - kappa) * ||z1 - z0||`.
    pub a_priori_bound: f64,
    pub kappa: f64,
    pub converged: bool,
    /// Weighted norms of successive differences `||z_{k+1} - z_k||`.
    pub step_norms: Vec<f64>,
}

/// Iterates the projection map to its fixed point.
///
/// Stops once `||z_{k+1} - z_k|| <= tol (1 - kappa) / kappa`, which places the
/// last iterate within `tol` of the fixed point. Exceeding `max_iter` yields
/// [`Error::Unconverged`] carrying the last iterate.
pub fn picard_solve(
    sys: &ValidatedSystem,
    real: &Realization,
    w: &Weights,
    opts: &PicardOptions,
) -> Result<Equilibrium> {
    if !(opts.tol > 0.0) {
        return Err(Error::Parameter(format!(
            "tol = {} must be positive",
            opts.tol
        )));
    }
    let cert = certificate(sys, w)?;
    if !cert.pass {
        return Err(Error::CertificateFailed { kappa: cert.kappa });
    }
    let net = Network::new(sys, real)?;
    let kappa = cert.kappa;
    let stop = opts.tol * (1.0 - kappa) / kappa;

    let mut z = opts.initial.clone().unwrap_or_else(|| sys.box_midpoint());
    net.check_state(&z)?;

    let mut step_norms = Vec::new();
    let mut first_step = 0.0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let next = net.map(&z);
        if !next.is_finite() {
            return Err(Error::NonFinite { step: iterations });
        }
        let d = w.distance(&next, &z);
        if iterations == 0 {
            first_step = d;
        }
        step_norms.push(d);
        z = next;
        iterations += 1;
        if d <= stop {
            converged = true;
            break;
        }
    }

    let residual = w.distance(&net.map(&z), &z);
    let eq = Equilibrium {
        point: z,
        iterations,
        residual,
        a_priori_bound: kappa.powi(iterations as i32) / (1.0 - kappa) * first_step,
        kappa,
        converged,
        step_norms,
    };
    if converged {
        Ok(eq)
    } else {
        Err(Error::Unconverged(Box::new(eq)))
    }
}

/// Weighted fixed-point residual `||F(s) - s||`.
pub fn residual(
    sys: &ValidatedSystem,
    real: &Realization,
    w: &Weights,
    s: &StateVector,
) -> Result<f64> {
    let net = Network::new(sys, real)?;
    net.check_state(s)?;
    Ok(w.distance(&net.map(s), s))
}
