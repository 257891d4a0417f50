//! Problem description types and their validation.
//!
//! A [`SystemSpec`] describes a whole family of networks: every coefficient
//! matrix is only known up to an elementwise interval. A [`Realization`] picks
//! one concrete member of that family. Specs with `m = 0` are ordinary
//! single-block systems; every y-block structure is then empty.

use std::ops::Deref;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::projection::StateVector;

/// Elementwise bounds `lower <= M <= upper` on a real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalMatrix {
    pub lower: DMatrix<f64>,
    pub upper: DMatrix<f64>,
}

impl IntervalMatrix {
    /// Builds and checks an interval; the bounds must share a shape and be ordered.
    pub fn new(lower: DMatrix<f64>, upper: DMatrix<f64>) -> Result<Self> {
        let im = Self { lower, upper };
        im.check("interval")?;
        Ok(im)
    }

    /// Zero-width interval around `m`.
    pub fn exact(m: DMatrix<f64>) -> Self {
        Self {
            lower: m.clone(),
            upper: m,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::exact(DMatrix::zeros(rows, cols))
    }

    pub fn rows(&self) -> usize {
        self.lower.nrows()
    }

    pub fn cols(&self) -> usize {
        self.lower.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.lower.shape()
    }

    pub fn contains(&self, m: &DMatrix<f64>) -> bool {
        m.shape() == self.shape()
            && m.iter()
                .zip(self.lower.iter().zip(self.upper.iter()))
                .all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    fn check(&self, name: &'static str) -> Result<()> {
        if self.lower.shape() != self.upper.shape() {
            return Err(Error::Dimension(format!(
                "{name}: lower is {:?} but upper is {:?}",
                self.lower.shape(),
                self.upper.shape()
            )));
        }
        for c in 0..self.cols() {
            for r in 0..self.rows() {
                let (lo, hi) = (self.lower[(r, c)], self.upper[(r, c)]);
                if !lo.is_finite() || !hi.is_finite() {
                    return Err(Error::Parameter(format!("{name}[{r}][{c}] is not finite")));
                }
                if lo > hi {
                    return Err(Error::IntervalOrder {
                        name,
                        row: r,
                        col: c,
                        lower: lo,
                        upper: hi,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Axis-aligned box `lo <= v <= hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    pub lo: DVector<f64>,
    pub hi: DVector<f64>,
}

impl BoxSet {
    pub fn new(lo: DVector<f64>, hi: DVector<f64>) -> Result<Self> {
        let b = Self { lo, hi };
        b.check("box")?;
        Ok(b)
    }

    pub fn from_slices(lo: &[f64], hi: &[f64]) -> Result<Self> {
        Self::new(
            DVector::from_column_slice(lo),
            DVector::from_column_slice(hi),
        )
    }

    pub fn empty() -> Self {
        Self {
            lo: DVector::zeros(0),
            hi: DVector::zeros(0),
        }
    }

    pub fn len(&self) -> usize {
        self.lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.is_empty()
    }

    pub fn midpoint(&self) -> DVector<f64> {
        self.lo.zip_map(&self.hi, |lo, hi| 0.5 * (lo + hi))
    }

    pub fn contains(&self, v: &DVector<f64>) -> bool {
        v.len() == self.len()
            && v.iter()
                .zip(self.lo.iter().zip(self.hi.iter()))
                .all(|(x, (lo, hi))| lo <= x && x <= hi)
    }

    fn check(&self, name: &'static str) -> Result<()> {
        if self.lo.len() != self.hi.len() {
            return Err(Error::Dimension(format!(
                "{name}: lo has length {} but hi has length {}",
                self.lo.len(),
                self.hi.len()
            )));
        }
        for (i, (&lo, &hi)) in self.lo.iter().zip(self.hi.iter()).enumerate() {
            // Infinite bounds are legitimate (half-open boxes); NaN is not.
            if lo.is_nan() || hi.is_nan() {
                return Err(Error::Parameter(format!("{name}[{i}] is NaN")));
            }
            if lo > hi {
                return Err(Error::BoxOrder {
                    name,
                    index: i,
                    lo,
                    hi,
                });
            }
        }
        Ok(())
    }
}

/// Linear shift maps of the constraint sets: `K1(x) = H x + box1`, `K2(y) = L y + box2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftMap {
    pub h: DMatrix<f64>,
    pub l: DMatrix<f64>,
}

impl ShiftMap {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            h: DMatrix::zeros(n, n),
            l: DMatrix::zeros(m, m),
        }
    }
}

/// The four interval coefficient families.
#[derive(Debug, Clone, PartialEq)]
pub struct Intervals {
    /// n x n
    pub a: IntervalMatrix,
    /// n x m
    pub a_star: IntervalMatrix,
    /// m x m
    pub b: IntervalMatrix,
    /// m x n
    pub b_star: IntervalMatrix,
}

/// Positive weights of the weighted l1 norm `sum mu_i |x_i| + sum tau_j |y_j|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    pub mu: DVector<f64>,
    pub tau: DVector<f64>,
}

impl Weights {
    pub fn new(mu: DVector<f64>, tau: DVector<f64>) -> Result<Self> {
        if let Some(v) = mu
            .iter()
            .chain(tau.iter())
            .find(|v| !(**v > 0.0 && v.is_finite()))
        {
            return Err(Error::Parameter(format!(
                "weights must be positive, got {v}"
            )));
        }
        Ok(Self { mu, tau })
    }

    pub fn unit(n: usize, m: usize) -> Self {
        Self {
            mu: DVector::from_element(n, 1.0),
            tau: DVector::from_element(m, 1.0),
        }
    }

    /// Splits a flat `[mu.., tau..]` list after the first `n` entries.
    pub fn from_flat(values: &[f64], n: usize) -> Result<Self> {
        if values.len() < n {
            return Err(Error::Dimension(format!(
                "expected at least {n} weights, got {}",
                values.len()
            )));
        }
        Self::new(
            DVector::from_column_slice(&values[..n]),
            DVector::from_column_slice(&values[n..]),
        )
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            mu: &self.mu * c,
            tau: &self.tau * c,
        }
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn m(&self) -> usize {
        self.tau.len()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.mu.iter().chain(self.tau.iter()).copied().collect()
    }

    /// Weighted l1 norm of a state.
    pub fn norm(&self, s: &StateVector) -> f64 {
        let xs: f64 = self
            .mu
            .iter()
            .zip(s.x.iter())
            .map(|(w, v)| w * v.abs())
            .sum();
        let ys: f64 = self
            .tau
            .iter()
            .zip(s.y.iter())
            .map(|(w, v)| w * v.abs())
            .sum();
        xs + ys
    }

    /// Weighted l1 distance between two states.
    pub fn distance(&self, a: &StateVector, b: &StateVector) -> f64 {
        let xs: f64 = self
            .mu
            .iter()
            .zip(a.x.iter().zip(b.x.iter()))
            .map(|(w, (p, q))| w * (p - q).abs())
            .sum();
        let ys: f64 = self
            .tau
            .iter()
            .zip(a.y.iter().zip(b.y.iter()))
            .map(|(w, (p, q))| w * (p - q).abs())
            .sum();
        xs + ys
    }
}

/// Full description of an interval implicit projection network.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub n: usize,
    pub m: usize,
    /// Caputo order, in (0, 1].
    pub alpha: f64,
    pub rho: f64,
    /// Step of the y-block; unused when `m == 0`.
    pub lambda: f64,
    pub a: DVector<f64>,
    pub b: DVector<f64>,
    pub intervals: Intervals,
    pub shifts: ShiftMap,
    pub box1: BoxSet,
    pub box2: BoxSet,
    /// Per-equation multipliers of the right-hand side (x-block then y-block).
    /// Only the integrator reads them.
    pub gains: Option<DVector<f64>>,
    /// Suggested norm weights shipped with the scenario.
    pub weights: Option<Weights>,
    /// Suggested initial state for simulations.
    pub initial: Option<StateVector>,
}

impl SystemSpec {
    pub fn dim(&self) -> usize {
        self.n + self.m
    }

    pub fn gain(&self, k: usize) -> f64 {
        self.gains.as_ref().map_or(1.0, |g| g[k])
    }

    pub fn has_nonunit_gains(&self) -> bool {
        self.gains
            .as_ref()
            .is_some_and(|g| g.iter().any(|&v| v != 1.0))
    }

    /// State made of the box midpoints.
    pub fn box_midpoint(&self) -> StateVector {
        StateVector::new(self.box1.midpoint(), self.box2.midpoint())
    }
}

/// A [`SystemSpec`] whose invariants have been checked.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedSystem(SystemSpec);

impl ValidatedSystem {
    pub fn spec(&self) -> &SystemSpec {
        &self.0
    }

    pub fn into_inner(self) -> SystemSpec {
        self.0
    }
}

impl Deref for ValidatedSystem {
    type Target = SystemSpec;

    fn deref(&self) -> &SystemSpec {
        &self.0
    }
}

fn expect_shape(name: &str, got: (usize, usize), want: (usize, usize)) -> Result<()> {
    if got != want {
        return Err(Error::Dimension(format!(
            "{name} is {}x{}, expected {}x{}",
            got.0, got.1, want.0, want.1
        )));
    }
    Ok(())
}

fn expect_len(name: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::Dimension(format!(
            "{name} has length {got}, expected {want}"
        )));
    }
    Ok(())
}

fn expect_finite<'a>(name: &str, values: impl IntoIterator<Item = &'a f64>) -> Result<()> {
    if values.into_iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter(format!("{name} has non-finite entries")));
    }
    Ok(())
}

/// Checks every structural invariant of `spec`, reporting the first violation.
pub fn validate_system(spec: SystemSpec) -> Result<ValidatedSystem> {
    let (n, m) = (spec.n, spec.m);
    if n == 0 {
        return Err(Error::Dimension("n must be at least 1".into()));
    }
    if !(spec.alpha > 0.0 && spec.alpha <= 1.0) {
        return Err(Error::Parameter(format!(
            "alpha = {} not in (0, 1]",
            spec.alpha
        )));
    }
    if !(spec.rho > 0.0 && spec.rho.is_finite()) {
        return Err(Error::Parameter(format!(
            "rho = {} must be positive",
            spec.rho
        )));
    }
    if m > 0 && !(spec.lambda > 0.0 && spec.lambda.is_finite()) {
        return Err(Error::Parameter(format!(
            "lambda = {} must be positive",
            spec.lambda
        )));
    }

    expect_len("a", spec.a.len(), n)?;
    expect_len("b", spec.b.len(), m)?;
    expect_finite("a", spec.a.iter())?;
    expect_finite("b", spec.b.iter())?;

    let iv = &spec.intervals;
    for (name, im, want) in [
        ("A", &iv.a, (n, n)),
        ("Astar", &iv.a_star, (n, m)),
        ("B", &iv.b, (m, m)),
        ("Bstar", &iv.b_star, (m, n)),
    ] {
        expect_shape(&format!("{name}.lower"), im.lower.shape(), want)?;
        expect_shape(&format!("{name}.upper"), im.upper.shape(), want)?;
    }
    iv.a.check("A")?;
    iv.a_star.check("Astar")?;
    iv.b.check("B")?;
    iv.b_star.check("Bstar")?;

    expect_shape("H", spec.shifts.h.shape(), (n, n))?;
    expect_shape("L", spec.shifts.l.shape(), (m, m))?;
    expect_finite("H", spec.shifts.h.iter())?;
    expect_finite("L", spec.shifts.l.iter())?;

    expect_len("box1", spec.box1.lo.len(), n)?;
    expect_len("box2", spec.box2.lo.len(), m)?;
    spec.box1.check("box1")?;
    spec.box2.check("box2")?;

    if let Some(g) = &spec.gains {
        expect_len("gains", g.len(), n + m)?;
        if let Some(v) = g.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::Parameter(format!("gains must be positive, got {v}")));
        }
    }
    if let Some(w) = &spec.weights {
        expect_len("weights.mu", w.mu.len(), n)?;
        expect_len("weights.tau", w.tau.len(), m)?;
        Weights::new(w.mu.clone(), w.tau.clone())?;
    }
    if let Some(s) = &spec.initial {
        expect_len("initial.x", s.x.len(), n)?;
        expect_len("initial.y", s.y.len(), m)?;
        expect_finite("initial", s.x.iter().chain(s.y.iter()))?;
    }
    Ok(ValidatedSystem(spec))
}

/// Which member of an interval family to pick.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    Lower,
    Upper,
    Midpoint,
    /// Independent uniform draw per entry.
    Random(u64),
}

fn sample_with(im: &IntervalMatrix, selector: Selector, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    match selector {
        Selector::Lower => im.lower.clone(),
        Selector::Upper => im.upper.clone(),
        Selector::Midpoint => im.lower.zip_map(&im.upper, |lo, hi| 0.5 * (lo + hi)),
        Selector::Random(_) => im.lower.zip_map(&im.upper, |lo, hi| {
            let u: f64 = rng.random();
            (lo + u * (hi - lo)).clamp(lo, hi)
        }),
    }
}

/// Picks a concrete matrix inside `im`.
pub fn sample_matrix(im: &IntervalMatrix, selector: Selector) -> DMatrix<f64> {
    let seed = match selector {
        Selector::Random(s) => s,
        _ => 0,
    };
    sample_with(im, selector, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// One concrete member `(A, A*, B, B*)` of the interval family.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub a: DMatrix<f64>,
    pub a_star: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub b_star: DMatrix<f64>,
}

impl Realization {
    /// Picks all four matrices with the same selector. A random selector
    /// draws the four matrices from a single seeded stream.
    pub fn select(sys: &SystemSpec, selector: Selector) -> Self {
        let seed = match selector {
            Selector::Random(s) => s,
            _ => 0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let iv = &sys.intervals;
        Self {
            a: sample_with(&iv.a, selector, &mut rng),
            a_star: sample_with(&iv.a_star, selector, &mut rng),
            b: sample_with(&iv.b, selector, &mut rng),
            b_star: sample_with(&iv.b_star, selector, &mut rng),
        }
    }

    /// Confirms every matrix lies inside its interval.
    pub fn check(&self, sys: &SystemSpec) -> Result<()> {
        let iv = &sys.intervals;
        for (name, mat, im) in [
            ("A", &self.a, &iv.a),
            ("Astar", &self.a_star, &iv.a_star),
            ("B", &self.b, &iv.b),
            ("Bstar", &self.b_star, &iv.b_star),
        ] {
            expect_shape(name, mat.shape(), im.shape())?;
            for c in 0..mat.ncols() {
                for r in 0..mat.nrows() {
                    let (v, lo, hi) = (mat[(r, c)], im.lower[(r, c)], im.upper[(r, c)]);
                    if !(lo <= v && v <= hi) {
                        return Err(Error::OutsideInterval {
                            name,
                            row: r,
                            col: c,
                            value: v,
                            lower: lo,
                            upper: hi,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}
