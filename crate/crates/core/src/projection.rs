//! Box projections, the shifted ("implicit") projection and the network vector field.
//!
//! Under the shifted-box constraint form, `P_{Hx + K}[v] = Hx + P_K[v - Hx]`
//! and the box projection factors into independent scalar clamps, so every
//! projection here is closed form.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{BoxSet, Realization, SystemSpec, ValidatedSystem};

/// Network state: the x-block (length n) and the y-block (length m).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
}

impl StateVector {
    pub fn new(x: DVector<f64>, y: DVector<f64>) -> Self {
        Self { x, y }
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Self::new(DVector::zeros(n), DVector::zeros(m))
    }

    pub fn from_slices(x: &[f64], y: &[f64]) -> Self {
        Self::new(DVector::from_column_slice(x), DVector::from_column_slice(y))
    }

    /// Splits `[x.., y..]` after the first `n` entries.
    pub fn from_flat(values: &[f64], n: usize) -> Self {
        Self::from_slices(&values[..n], &values[n..])
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.x.iter().chain(self.y.iter()).copied().collect()
    }

    pub fn len(&self) -> usize {
        self.x.len() + self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(self.y.iter()).all(|v| v.is_finite())
    }

    pub fn sub(&self, other: &StateVector) -> StateVector {
        StateVector::new(&self.x - &other.x, &self.y - &other.y)
    }

    fn has_shape(&self, n: usize, m: usize) -> bool {
        self.x.len() == n && self.y.len() == m
    }
}

#[inline]
fn clamp(v: f64, lo: f64, hi: f64) -> f64 {
    v.max(lo).min(hi)
}

fn project_box_unchecked(bx: &BoxSet, v: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(
        v.len(),
        v.iter()
            .zip(bx.lo.iter().zip(bx.hi.iter()))
            .map(|(&v, (&lo, &hi))| clamp(v, lo, hi)),
    )
}

/// Euclidean projection of `v` onto the box: the componentwise median of `lo`, `v`, `hi`.
pub fn project_box(bx: &BoxSet, v: &DVector<f64>) -> Result<DVector<f64>> {
    if v.len() != bx.len() {
        return Err(Error::Dimension(format!(
            "vector of length {} projected onto box of length {}",
            v.len(),
            bx.len()
        )));
    }
    Ok(project_box_unchecked(bx, v))
}

fn project_implicit_unchecked(
    shift: &DMatrix<f64>,
    bx: &BoxSet,
    x: &DVector<f64>,
    v: &DVector<f64>,
) -> DVector<f64> {
    let u = shift * x;
    let p = project_box_unchecked(bx, &(v - &u));
    u + p
}

/// Projection of `v` onto the state-dependent set `shift * x + box`.
pub fn project_implicit(
    shift: &DMatrix<f64>,
    bx: &BoxSet,
    x: &DVector<f64>,
    v: &DVector<f64>,
) -> Result<DVector<f64>> {
    let k = bx.len();
    if shift.shape() != (k, x.len()) || v.len() != k {
        return Err(Error::Dimension(format!(
            "shift {:?}, box {k}, x {}, v {}",
            shift.shape(),
            x.len(),
            v.len()
        )));
    }
    Ok(project_implicit_unchecked(shift, bx, x, v))
}

/// A system paired with a realization that has been checked against its intervals.
#[derive(Debug, Clone, Copy)]
pub struct Network<'a> {
    sys: &'a SystemSpec,
    real: &'a Realization,
}

impl<'a> Network<'a> {
    pub fn new(sys: &'a ValidatedSystem, real: &'a Realization) -> Result<Self> {
        real.check(sys)?;
        Ok(Self {
            sys: sys.spec(),
            real,
        })
    }

    pub fn system(&self) -> &'a SystemSpec {
        self.sys
    }

    pub fn realization(&self) -> &'a Realization {
        self.real
    }

    pub fn check_state(&self, s: &StateVector) -> Result<()> {
        if !s.has_shape(self.sys.n, self.sys.m) {
            return Err(Error::Dimension(format!(
                "state has blocks ({}, {}), expected ({}, {})",
                s.x.len(),
                s.y.len(),
                self.sys.n,
                self.sys.m
            )));
        }
        Ok(())
    }

    /// The projection map `F` whose fixed points are the equilibria:
    /// `F_x = P_{K1(x)}[x - rho (A x + A* y + a)]`, `F_y = P_{K2(y)}[y - lambda (B y + B* x + b)]`.
    ///
    /// Panics if `s` has the wrong block sizes; see [`Network::check_state`].
    pub fn map(&self, s: &StateVector) -> StateVector {
        let (sys, r) = (self.sys, self.real);
        let vx = &s.x - (&r.a * &s.x + &r.a_star * &s.y + &sys.a) * sys.rho;
        let fx = project_implicit_unchecked(&sys.shifts.h, &sys.box1, &s.x, &vx);
        let fy = if sys.m == 0 {
            DVector::zeros(0)
        } else {
            let vy = &s.y - (&r.b * &s.y + &r.b_star * &s.x + &sys.b) * sys.lambda;
            project_implicit_unchecked(&sys.shifts.l, &sys.box2, &s.y, &vy)
        };
        StateVector::new(fx, fy)
    }

    /// Right-hand side of the Caputo system: `gain_k * (F(s)_k - s_k)`.
    pub fn rhs(&self, s: &StateVector) -> StateVector {
        let f = self.map(s);
        let n = self.sys.n;
        let mut d = f.sub(s);
        if self.sys.gains.is_some() {
            for (i, v) in d.x.iter_mut().enumerate() {
                *v *= self.sys.gain(i);
            }
            for (j, v) in d.y.iter_mut().enumerate() {
                *v *= self.sys.gain(n + j);
            }
        }
        d
    }
}

/// Evaluates the projection map `F` at `s`.
pub fn fixed_point_map(
    sys: &ValidatedSystem,
    real: &Realization,
    s: &StateVector,
) -> Result<StateVector> {
    let net = Network::new(sys, real)?;
    net.check_state(s)?;
    Ok(net.map(s))
}

/// Evaluates the right-hand side of the dynamics at `s`, gains included.
pub fn rhs(sys: &ValidatedSystem, real: &Realization, s: &StateVector) -> Result<StateVector> {
    let net = Network::new(sys, real)?;
    net.check_state(s)?;
    Ok(net.rhs(s))
}
