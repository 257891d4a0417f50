//! Interval stability certificate and weight search.
//!
//! For weights `mu` (x-block) and `tau` (y-block) the certificate evaluates
//! the per-coordinate contraction factors
//!
//! ```text
//! xi_i   = sum_{j != i} (mu_j / mu_i) (|h_ji| + ã_ji) + sum_j (tau_j / mu_i) lambda b̃*_ji
//!          + |h_ii| + 1 - rho a̲_ii - h_ii
//! zeta_j = sum_{i != j} (tau_i / tau_j) (|l_ij| + b̃_ij) + sum_i (mu_i / tau_j) rho ã*_ij
//!          + |l_jj| + 1 - lambda b̲_jj - l_jj
//! ```
//!
//! which bound the projection map's Lipschitz constant in the weighted l1 norm
//! uniformly over every realization of the intervals. The certificate passes
//! when every factor lies in (0, 1) and the diagonal margins
//! `1 - rho ā_ii - h_ii` and `1 - lambda b̄_jj - l_jj` are nonnegative.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::model::{IntervalMatrix, ValidatedSystem, Weights};

/// Worst-case absolute coefficients over the intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct TildeCoeffs {
    /// `max(|rho a̲_ij + h_ij|, |rho ā_ij + h_ij|)`, n x n.
    pub a_tilde: DMatrix<f64>,
    /// `max(|a̲*_ij|, |ā*_ij|)`, n x m.
    pub astar_tilde: DMatrix<f64>,
    /// `max(|lambda b̲_ij + l_ij|, |lambda b̄_ij + l_ij|)`, m x m.
    pub b_tilde: DMatrix<f64>,
    /// `max(|b̲*_ij|, |b̄*_ij|)`, m x n.
    pub bstar_tilde: DMatrix<f64>,
}

fn scaled_shift_max(im: &IntervalMatrix, scale: f64, shift: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(im.rows(), im.cols(), |r, c| {
        let s = shift[(r, c)];
        (scale * im.lower[(r, c)] + s)
            .abs()
            .max((scale * im.upper[(r, c)] + s).abs())
    })
}

fn abs_max(im: &IntervalMatrix) -> DMatrix<f64> {
    im.lower.zip_map(&im.upper, |lo, hi| lo.abs().max(hi.abs()))
}

pub fn tilde_coeffs(sys: &ValidatedSystem) -> TildeCoeffs {
    let iv = &sys.intervals;
    TildeCoeffs {
        a_tilde: scaled_shift_max(&iv.a, sys.rho, &sys.shifts.h),
        astar_tilde: abs_max(&iv.a_star),
        b_tilde: scaled_shift_max(&iv.b, sys.lambda, &sys.shifts.l),
        bstar_tilde: abs_max(&iv.b_star),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    /// `1 - rho ā_ii - h_ii`, must be >= 0.
    pub a2_margins: DVector<f64>,
    /// `1 - lambda b̄_jj - l_jj`, must be >= 0.
    pub a3_margins: DVector<f64>,
    pub xi: DVector<f64>,
    pub zeta: DVector<f64>,
    /// Largest contraction factor.
    pub kappa: f64,
    /// Decay rate `min(1 - xi_i, 1 - zeta_j) = 1 - kappa`.
    pub theta: f64,
    /// Smallest distance of any factor to the open interval's ends.
    pub min_slack: f64,
    pub pass: bool,
    /// Set when the spec carries non-unit gains, which the certificate ignores.
    pub gains_warning: bool,
    pub weights: Weights,
}

impl Certificate {
    pub fn factors(&self) -> impl Iterator<Item = f64> + '_ {
        self.xi.iter().chain(self.zeta.iter()).copied()
    }
}

/// Evaluates the certificate for the given weights.
pub fn certificate(sys: &ValidatedSystem, w: &Weights) -> Result<Certificate> {
    let w = Weights::new(w.mu.clone(), w.tau.clone())?;
    if w.n() != sys.n || w.m() != sys.m {
        return Err(crate::error::Error::Dimension(format!(
            "weights have blocks ({}, {}), expected ({}, {})",
            w.n(),
            w.m(),
            sys.n,
            sys.m
        )));
    }
    let (n, m) = (sys.n, sys.m);
    let (rho, lambda) = (sys.rho, sys.lambda);
    let (h, l) = (&sys.shifts.h, &sys.shifts.l);
    let iv = &sys.intervals;
    let t = tilde_coeffs(sys);
    let (mu, tau) = (&w.mu, &w.tau);

    let a2 = DVector::from_fn(n, |i, _| 1.0 - rho * iv.a.upper[(i, i)] - h[(i, i)]);
    let a3 = DVector::from_fn(m, |j, _| 1.0 - lambda * iv.b.upper[(j, j)] - l[(j, j)]);

    let xi = DVector::from_fn(n, |i, _| {
        let mut s = 0.0;
        for j in (0..n).filter(|&j| j != i) {
            s += mu[j] / mu[i] * (h[(j, i)].abs() + t.a_tilde[(j, i)]);
        }
        for j in 0..m {
            s += tau[j] / mu[i] * lambda * t.bstar_tilde[(j, i)];
        }
        s + h[(i, i)].abs() + 1.0 - rho * iv.a.lower[(i, i)] - h[(i, i)]
    });
    let zeta = DVector::from_fn(m, |j, _| {
        let mut s = 0.0;
        for i in (0..m).filter(|&i| i != j) {
            s += tau[i] / tau[j] * (l[(i, j)].abs() + t.b_tilde[(i, j)]);
        }
        for i in 0..n {
            s += mu[i] / tau[j] * rho * t.astar_tilde[(i, j)];
        }
        s + l[(j, j)].abs() + 1.0 - lambda * iv.b.lower[(j, j)] - l[(j, j)]
    });

    let kappa = xi
        .iter()
        .chain(zeta.iter())
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let theta = xi
        .iter()
        .chain(zeta.iter())
        .map(|f| 1.0 - f)
        .fold(f64::INFINITY, f64::min);
    let min_slack = xi
        .iter()
        .chain(zeta.iter())
        .map(|&f| f.min(1.0 - f))
        .fold(f64::INFINITY, f64::min);
    let pass = a2.iter().chain(a3.iter()).all(|&v| v >= 0.0)
        && xi.iter().chain(zeta.iter()).all(|&f| f > 0.0 && f < 1.0);

    Ok(Certificate {
        a2_margins: a2,
        a3_margins: a3,
        xi,
        zeta,
        kappa,
        theta,
        min_slack,
        pass,
        gains_warning: sys.has_nonunit_gains(),
        weights: w,
    })
}

/// Comparison system `(D, C)` of the weight conditions: `xi_i < 1` and
/// `zeta_j < 1` hold exactly when `(D - C) w > 0` componentwise.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonSystem {
    pub diagonal: DVector<f64>,
    /// Nonnegative off-diagonal couplings, zero on the diagonal.
    pub couplings: DMatrix<f64>,
}

impl ComparisonSystem {
    pub fn build(sys: &ValidatedSystem) -> Self {
        let (n, m) = (sys.n, sys.m);
        let (h, l) = (&sys.shifts.h, &sys.shifts.l);
        let iv = &sys.intervals;
        let t = tilde_coeffs(sys);
        let mut diagonal = DVector::zeros(n + m);
        let mut c = DMatrix::zeros(n + m, n + m);
        for i in 0..n {
            diagonal[i] = sys.rho * iv.a.lower[(i, i)] + h[(i, i)] - h[(i, i)].abs();
            for j in (0..n).filter(|&j| j != i) {
                c[(i, j)] = h[(j, i)].abs() + t.a_tilde[(j, i)];
            }
            for j in 0..m {
                c[(i, n + j)] = sys.lambda * t.bstar_tilde[(j, i)];
            }
        }
        for j in 0..m {
            diagonal[n + j] = sys.lambda * iv.b.lower[(j, j)] + l[(j, j)] - l[(j, j)].abs();
            for i in (0..m).filter(|&i| i != j) {
                c[(n + j, n + i)] = l[(i, j)].abs() + t.b_tilde[(i, j)];
            }
            for i in 0..n {
                c[(n + j, i)] = sys.rho * t.astar_tilde[(i, j)];
            }
        }
        Self {
            diagonal,
            couplings: c,
        }
    }

    /// Spectral radius of `D^-1 C`, or `None` when some diagonal entry is not positive.
    pub fn spectral_radius(&self) -> Option<f64> {
        if self.diagonal.iter().any(|&d| d <= 0.0) {
            return None;
        }
        let k = self.diagonal.len();
        let scaled = DMatrix::from_fn(k, k, |r, c| self.couplings[(r, c)] / self.diagonal[r]);
        Some(
            scaled
                .complex_eigenvalues()
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max),
        )
    }

    /// Solves `(D - C) w = 1`.
    pub fn solve_unit(&self) -> Option<DVector<f64>> {
        let m = DMatrix::from_diagonal(&self.diagonal) - &self.couplings;
        m.lu()
            .solve(&DVector::from_element(self.diagonal.len(), 1.0))
    }
}

/// Searches for weights that make the certificate pass.
///
/// Feasibility of the weight conditions is the nonsingular M-matrix property
/// of `D - C`; when it holds, `w = (D - C)^-1 1` is positive and is returned
/// after the certificate is re-checked with it.
pub fn find_weights(sys: &ValidatedSystem) -> Option<Weights> {
    let cmp = ComparisonSystem::build(sys);
    if cmp.spectral_radius()? >= 1.0 {
        return None;
    }
    let w = cmp.solve_unit()?;
    if w.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return None;
    }
    let weights = Weights::from_flat(w.as_slice(), sys.n).ok()?;
    match certificate(sys, &weights) {
        Ok(c) if c.pass => Some(weights),
        _ => None,
    }
}
