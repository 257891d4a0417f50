//! Caputo fractional dynamics: a full-memory Adams-Bashforth-Moulton
//! predictor-corrector and the Mittag-Leffler envelope check.

use crate::equilibrium::Equilibrium;
use crate::error::{Error, Result};
use crate::mlf::{ml_envelope, recip_gamma};
use crate::model::{Realization, ValidatedSystem, Weights};
use crate::projection::{Network, StateVector};

/// Values of `V` below this count as zero when the envelope itself is zero.
pub const ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Uniform grid starting at 0.
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub alpha: f64,
    pub realization: Realization,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn step(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }

    pub fn last(&self) -> &StateVector {
        self.states
            .last()
            .expect("trajectory has at least one state")
    }
}

fn axpy(acc: &mut [f64], c: f64, v: &[f64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += c * b;
    }
}

/// Integrates `D^alpha z = rhs(z)`, `z(0) = z0` on `[0, t_end]` with `steps` uniform steps.
///
/// For `alpha < 1` this is the fractional Adams scheme with one corrector pass
/// and no memory truncation. For `alpha = 1` it is Heun's method.
pub fn integrate(
    sys: &ValidatedSystem,
    real: &Realization,
    z0: &StateVector,
    t_end: f64,
    steps: usize,
) -> Result<Trajectory> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Parameter(format!(
            "t_end = {t_end} must be positive"
        )));
    }
    if steps == 0 {
        return Err(Error::Parameter("steps must be at least 1".into()));
    }
    let net = Network::new(sys, real)?;
    net.check_state(z0)?;
    if !z0.is_finite() {
        return Err(Error::NonFinite { step: 0 });
    }

    let n = sys.n;
    let alpha = sys.alpha;
    let h = t_end / steps as f64;
    let f = |z: &[f64]| net.rhs(&StateVector::from_flat(z, n)).to_flat();
    let y0 = z0.to_flat();
    let d = y0.len();

    let mut ys: Vec<Vec<f64>> = Vec::with_capacity(steps + 1);
    let mut fs: Vec<Vec<f64>> = Vec::with_capacity(steps + 1);
    fs.push(f(&y0));
    ys.push(y0.clone());

    if alpha == 1.0 {
        for k in 0..steps {
            let (yk, fk) = (&ys[k], &fs[k]);
            let mut pred = yk.clone();
            axpy(&mut pred, h, fk);
            let fp = f(&pred);
            let mut next = yk.clone();
            axpy(&mut next, 0.5 * h, fk);
            axpy(&mut next, 0.5 * h, &fp);
            if next.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { step: k + 1 });
            }
            fs.push(f(&next));
            ys.push(next);
        }
    } else {
        let c1 = h.powf(alpha) * recip_gamma(alpha + 1.0);
        let c2 = h.powf(alpha) * recip_gamma(alpha + 2.0);
        let ap1 = alpha + 1.0;
        // b_i = (i+1)^a - i^a, c_i = (i+2)^(a+1) + i^(a+1) - 2 (i+1)^(a+1)
        let pb: Vec<f64> = (0..steps)
            .map(|i| ((i + 1) as f64).powf(alpha) - (i as f64).powf(alpha))
            .collect();
        let pc: Vec<f64> = (0..steps)
            .map(|i| {
                let i = i as f64;
                (i + 2.0).powf(ap1) + i.powf(ap1) - 2.0 * (i + 1.0).powf(ap1)
            })
            .collect();
        for k in 0..steps {
            let kf = k as f64;
            let mut pred_mem = vec![0.0; d];
            let mut corr_mem = vec![0.0; d];
            for (j, fj) in fs.iter().enumerate() {
                axpy(&mut pred_mem, pb[k - j], fj);
                let a = if j == 0 {
                    kf.powf(ap1) - (kf - alpha) * (kf + 1.0).powf(alpha)
                } else {
                    pc[k - j]
                };
                axpy(&mut corr_mem, a, fj);
            }
            let mut pred = y0.clone();
            axpy(&mut pred, c1, &pred_mem);
            let fp = f(&pred);
            let mut next = y0.clone();
            axpy(&mut next, c2, &corr_mem);
            axpy(&mut next, c2, &fp);
            if next.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { step: k + 1 });
            }
            fs.push(f(&next));
            ys.push(next);
        }
    }

    let times = (0..=steps).map(|k| k as f64 * h).collect();
    let states = ys.iter().map(|y| StateVector::from_flat(y, n)).collect();
    Ok(Trajectory {
        times,
        states,
        alpha,
        realization: real.clone(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeReport {
    pub v0: f64,
    pub theta: f64,
    /// Largest `V(t) / (V(0) E_alpha(-theta t^alpha))` over the grid.
    pub max_ratio: f64,
    pub violations: usize,
    /// `V` at the last grid point.
    pub v_end: f64,
    pub pass: bool,
}

/// Checks `V(t_k) <= (1 + slack) V(0) E_alpha(-theta t_k^alpha)` along a trajectory,
/// where `V` is the weighted distance to the equilibrium.
pub fn envelope_check(
    traj: &Trajectory,
    eq: &Equilibrium,
    w: &Weights,
    theta: f64,
    slack: f64,
) -> Result<EnvelopeReport> {
    if !(slack >= 0.0) {
        return Err(Error::Parameter(format!(
            "slack = {slack} must be nonnegative"
        )));
    }
    if traj.times.len() != traj.states.len() || traj.is_empty() {
        return Err(Error::Dimension(format!(
            "trajectory has {} times and {} states",
            traj.times.len(),
            traj.states.len()
        )));
    }
    let (n, m) = (eq.point.x.len(), eq.point.y.len());
    if w.n() != n || w.m() != m {
        return Err(Error::Dimension(format!(
            "weights have blocks ({}, {}), equilibrium ({n}, {m})",
            w.n(),
            w.m()
        )));
    }
    if let Some(k) = traj
        .states
        .iter()
        .position(|s| s.x.len() != n || s.y.len() != m)
    {
        return Err(Error::Dimension(format!(
            "state {k} does not match the equilibrium"
        )));
    }

    let v0 = w.distance(&traj.states[0], &eq.point);
    let mut max_ratio: f64 = 0.0;
    let mut violations = 0;
    let mut v_end = v0;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let v = w.distance(s, &eq.point);
        let env = ml_envelope(traj.alpha, theta, v0, *t)?;
        let ratio = if env > 0.0 {
            v / env
        } else if v <= ZERO_TOL {
            0.0
        } else {
            f64::INFINITY
        };
        max_ratio = max_ratio.max(ratio);
        if ratio > 1.0 + slack {
            violations += 1;
        }
        v_end = v;
    }
    Ok(EnvelopeReport {
        v0,
        theta,
        max_ratio,
        violations,
        v_end,
        pass: violations == 0,
    })
}
