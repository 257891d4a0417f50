//! Built-in scenarios and the JSON spec-file format.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    validate_system, BoxSet, IntervalMatrix, Intervals, ShiftMap, SystemSpec, ValidatedSystem,
    Weights,
};
use crate::projection::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioName {
    Example41,
    Example42,
    TrafficGstm,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 3] = [Self::Example41, Self::Example42, Self::TrafficGstm];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Example41 => "example-4.1",
            Self::Example42 => "example-4.2",
            Self::TrafficGstm => "traffic-gstm",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

fn mat(rows: usize, cols: usize, data: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, data)
}

fn vec(data: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(data)
}

fn interval(rows: usize, cols: usize, lower: &[f64], upper: &[f64]) -> IntervalMatrix {
    IntervalMatrix {
        lower: mat(rows, cols, lower),
        upper: mat(rows, cols, upper),
    }
}

fn example_41() -> SystemSpec {
    SystemSpec {
        n: 3,
        m: 2,
        alpha: 0.8,
        rho: 0.3,
        lambda: 0.2,
        a: vec(&[-7.1, 4.2, -2.4]),
        b: vec(&[-3.5, 1.2]),
        intervals: Intervals {
            a: interval(
                3,
                3,
                &[2.6, 0.3, -0.3, -0.5, 3.4, -0.1, 0.2, 0.6, 2.1],
                &[2.9, 0.5, 0.3, -0.4, 3.6, 0.2, 0.4, 0.8, 2.5],
            ),
            a_star: interval(
                3,
                2,
                &[-0.3, 0.2, 0.1, -0.4, -0.2, 0.1],
                &[0.2, 0.4, 0.3, -0.3, 0.1, 0.3],
            ),
            b: interval(2, 2, &[3.5, 0.4, -0.2, 2.6], &[3.6, 0.7, 0.2, 2.8]),
            // Entry (2,2) is printed with its bounds swapped (-0.2 over -0.3);
            // stored here as the interval [-0.3, -0.2].
            b_star: interval(
                2,
                3,
                &[-0.4, 0.1, -0.3, 0.5, -0.3, 0.6],
                &[0.5, 0.3, 0.4, 0.7, -0.2, 0.7],
            ),
        },
        shifts: ShiftMap {
            h: mat(
                3,
                3,
                &[0.09, 0.06, -0.03, -0.05, -0.17, 0.08, 0.07, -0.06, 0.11],
            ),
            l: mat(2, 2, &[-0.11, -0.03, -0.08, 0.09]),
        },
        box1: BoxSet {
            lo: vec(&[3.0, -1.5, 0.5]),
            hi: vec(&[4.0, -0.5, 1.5]),
        },
        box2: BoxSet {
            lo: vec(&[1.5, -2.5]),
            hi: vec(&[2.5, -1.0]),
        },
        gains: None,
        weights: Some(Weights::unit(3, 2)),
        initial: Some(StateVector::from_slices(&[8.6, -7.3, -5.2], &[6.7, -8.5])),
    }
}

fn example_42() -> SystemSpec {
    SystemSpec {
        n: 2,
        m: 0,
        alpha: 0.9,
        rho: 0.25,
        lambda: 1.0,
        a: vec(&[-4.8, 0.0]),
        b: vec(&[]),
        intervals: Intervals {
            a: interval(2, 2, &[3.7, -1.1, -1.8, 3.1], &[4.6, 1.3, 3.8, 3.4]),
            a_star: IntervalMatrix::zeros(2, 0),
            b: IntervalMatrix::zeros(0, 0),
            b_star: IntervalMatrix::zeros(0, 2),
        },
        shifts: ShiftMap {
            h: mat(2, 2, &[-0.2, 0.0, 0.0, 0.11]),
            l: DMatrix::zeros(0, 0),
        },
        box1: BoxSet {
            lo: vec(&[0.0, 0.0]),
            hi: vec(&[2.5, 0.5]),
        },
        box2: BoxSet::empty(),
        gains: None,
        weights: Some(Weights {
            mu: vec(&[2.0, 1.0]),
            tau: vec(&[]),
        }),
        initial: Some(StateVector::from_slices(&[5.8, -4.2], &[])),
    }
}

/// Coefficient bounds and gains of the three-path, single-pair traffic model.
///
/// The defaults are an illustrative choice, not measured data.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficParams {
    /// Bounds `[lower, upper]` on the five arc cost slopes.
    pub arc_cost: [(f64, f64); 5],
    /// Bounds on the demand slope `r` in `T(u) = r u`.
    pub demand: (f64, f64),
    pub alpha: f64,
    pub rho: f64,
    pub lambda: f64,
    /// Path flow bounds.
    pub flow_box: (f64, f64),
    /// Travel cost bounds.
    pub cost_box: (f64, f64),
    /// Path flow gains followed by the cost gain.
    pub gains: [f64; 4],
}

impl Default for TrafficParams {
    fn default() -> Self {
        Self {
            arc_cost: [(2.0, 2.2); 5],
            demand: (-5.0, -4.0),
            alpha: 0.8,
            rho: 0.1,
            lambda: 0.1,
            flow_box: (0.5, 10.0),
            cost_box: (1.0, 20.0),
            gains: [1.0; 4],
        }
    }
}

/// Path-arc incidence: p1 = {a1, a4}, p2 = {a2, a3, a4}, p3 = {a2, a5}.
const PATH_ARCS: [&[usize]; 3] = [&[0, 3], &[1, 2, 3], &[1, 4]];

/// Builds the traffic system. The cost of path `i` is
/// `sum_j (sum over arcs shared by paths i and j of l_arc) h_j`, so
/// `A_ij` is an interval sum of arc slopes.
pub fn traffic_gstm(p: &TrafficParams) -> Result<ValidatedSystem> {
    let mut lower = DMatrix::zeros(3, 3);
    let mut upper = DMatrix::zeros(3, 3);
    for i in 0..3 {
        for j in 0..3 {
            for arc in PATH_ARCS[i].iter().filter(|a| PATH_ARCS[j].contains(a)) {
                lower[(i, j)] += p.arc_cost[*arc].0;
                upper[(i, j)] += p.arc_cost[*arc].1;
            }
        }
    }
    let spec = SystemSpec {
        n: 3,
        m: 1,
        alpha: p.alpha,
        rho: p.rho,
        lambda: p.lambda,
        a: DVector::zeros(3),
        b: DVector::zeros(1),
        intervals: Intervals {
            a: IntervalMatrix { lower, upper },
            a_star: IntervalMatrix::exact(DMatrix::from_element(3, 1, -1.0)),
            b: interval(1, 1, &[-p.demand.1], &[-p.demand.0]),
            b_star: IntervalMatrix::exact(DMatrix::from_element(1, 3, 1.0)),
        },
        shifts: ShiftMap::zeros(3, 1),
        box1: BoxSet {
            lo: DVector::from_element(3, p.flow_box.0),
            hi: DVector::from_element(3, p.flow_box.1),
        },
        box2: BoxSet {
            lo: vec(&[p.cost_box.0]),
            hi: vec(&[p.cost_box.1]),
        },
        gains: Some(vec(&p.gains)),
        weights: Some(Weights::unit(3, 1)),
        initial: None,
    };
    let mut spec = spec;
    spec.initial = Some(spec.box_midpoint());
    validate_system(spec)
}

pub fn builtin_scenario(name: ScenarioName) -> Result<ValidatedSystem> {
    match name {
        ScenarioName::Example41 => validate_system(example_41()),
        ScenarioName::Example42 => validate_system(example_42()),
        ScenarioName::TrafficGstm => traffic_gstm(&TrafficParams::default()),
    }
}

/// Scalar system whose right-hand side is `-x` for `x` in `[0, 1e9]`, so the
/// solution from `x(0) = 1` is `E_alpha(-t^alpha)`.
pub fn scalar_relaxation(alpha: f64) -> ValidatedSystem {
    validate_system(SystemSpec {
        n: 1,
        m: 0,
        alpha,
        rho: 1.0,
        lambda: 1.0,
        a: vec(&[0.0]),
        b: vec(&[]),
        intervals: Intervals {
            a: IntervalMatrix::exact(DMatrix::from_element(1, 1, 1.0)),
            a_star: IntervalMatrix::zeros(1, 0),
            b: IntervalMatrix::zeros(0, 0),
            b_star: IntervalMatrix::zeros(0, 1),
        },
        shifts: ShiftMap::zeros(1, 0),
        box1: BoxSet {
            lo: vec(&[0.0]),
            hi: vec(&[1e9]),
        },
        box2: BoxSet::empty(),
        gains: None,
        weights: None,
        initial: Some(StateVector::from_slices(&[1.0], &[])),
    })
    .expect("scalar relaxation is valid for alpha in (0, 1]")
}

// ---------------------------------------------------------------------------
// Spec files

type Rows = Vec<Vec<f64>>;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntervalDoc {
    lower: Rows,
    upper: Rows,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntervalsDoc {
    #[serde(rename = "A")]
    a: IntervalDoc,
    #[serde(rename = "Astar", default = "empty_interval")]
    a_star: IntervalDoc,
    #[serde(rename = "B", default = "empty_interval")]
    b: IntervalDoc,
    #[serde(rename = "Bstar", default = "empty_interval")]
    b_star: IntervalDoc,
}

fn empty_interval() -> IntervalDoc {
    IntervalDoc {
        lower: Vec::new(),
        upper: Vec::new(),
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShiftsDoc {
    #[serde(rename = "H")]
    h: Rows,
    #[serde(rename = "L", default)]
    l: Rows,
}

/// Box bounds; `null` stands for an infinite bound.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxDoc {
    lo: Vec<Option<f64>>,
    hi: Vec<Option<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxesDoc {
    box1: BoxDoc,
    #[serde(default)]
    box2: BoxDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsDoc {
    mu: Vec<f64>,
    #[serde(default)]
    tau: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateDoc {
    x: Vec<f64>,
    #[serde(default)]
    y: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecDoc {
    n: usize,
    m: usize,
    alpha: f64,
    rho: f64,
    #[serde(default = "one")]
    lambda: f64,
    a: Vec<f64>,
    #[serde(default)]
    b: Vec<f64>,
    intervals: IntervalsDoc,
    shifts: ShiftsDoc,
    boxes: BoxesDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gains: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<WeightsDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial: Option<StateDoc>,
}

fn one() -> f64 {
    1.0
}

fn to_rows(m: &DMatrix<f64>) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(name: &str, rows: &Rows, shape: (usize, usize)) -> Result<DMatrix<f64>> {
    let (r, c) = shape;
    if rows.len() != r {
        return Err(Error::Dimension(format!(
            "{name} has {} rows, expected {r}",
            rows.len()
        )));
    }
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != c) {
        return Err(Error::Dimension(format!(
            "{name} row {i} has {} entries, expected {c}",
            row.len()
        )));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn interval_from(name: &str, doc: &IntervalDoc, shape: (usize, usize)) -> Result<IntervalMatrix> {
    Ok(IntervalMatrix {
        lower: from_rows(&format!("{name}.lower"), &doc.lower, shape)?,
        upper: from_rows(&format!("{name}.upper"), &doc.upper, shape)?,
    })
}

fn box_from(doc: &BoxDoc) -> BoxSet {
    BoxSet {
        lo: DVector::from_iterator(
            doc.lo.len(),
            doc.lo.iter().map(|v| v.unwrap_or(f64::NEG_INFINITY)),
        ),
        hi: DVector::from_iterator(
            doc.hi.len(),
            doc.hi.iter().map(|v| v.unwrap_or(f64::INFINITY)),
        ),
    }
}

fn box_doc(b: &BoxSet) -> BoxDoc {
    let finite = |v: &f64| v.is_finite().then_some(*v);
    BoxDoc {
        lo: b.lo.iter().map(finite).collect(),
        hi: b.hi.iter().map(finite).collect(),
    }
}

impl SpecDoc {
    fn into_spec(self) -> Result<SystemSpec> {
        let (n, m) = (self.n, self.m);
        let iv = &self.intervals;
        Ok(SystemSpec {
            n,
            m,
            alpha: self.alpha,
            rho: self.rho,
            lambda: self.lambda,
            a: vec(&self.a),
            b: vec(&self.b),
            intervals: Intervals {
                a: interval_from("A", &iv.a, (n, n))?,
                a_star: interval_from("Astar", &iv.a_star, (n, m))?,
                b: interval_from("B", &iv.b, (m, m))?,
                b_star: interval_from("Bstar", &iv.b_star, (m, n))?,
            },
            shifts: ShiftMap {
                h: from_rows("H", &self.shifts.h, (n, n))?,
                l: from_rows("L", &self.shifts.l, (m, m))?,
            },
            box1: box_from(&self.boxes.box1),
            box2: box_from(&self.boxes.box2),
            gains: self.gains.as_deref().map(vec),
            weights: self.weights.map(|w| Weights {
                mu: vec(&w.mu),
                tau: vec(&w.tau),
            }),
            initial: self.initial.map(|s| StateVector::from_slices(&s.x, &s.y)),
        })
    }

    fn from_spec(s: &SystemSpec) -> Self {
        let iv = &s.intervals;
        let doc = |im: &IntervalMatrix| IntervalDoc {
            lower: to_rows(&im.lower),
            upper: to_rows(&im.upper),
        };
        SpecDoc {
            n: s.n,
            m: s.m,
            alpha: s.alpha,
            rho: s.rho,
            lambda: s.lambda,
            a: s.a.iter().copied().collect(),
            b: s.b.iter().copied().collect(),
            intervals: IntervalsDoc {
                a: doc(&iv.a),
                a_star: doc(&iv.a_star),
                b: doc(&iv.b),
                b_star: doc(&iv.b_star),
            },
            shifts: ShiftsDoc {
                h: to_rows(&s.shifts.h),
                l: to_rows(&s.shifts.l),
            },
            boxes: BoxesDoc {
                box1: box_doc(&s.box1),
                box2: box_doc(&s.box2),
            },
            gains: s.gains.as_ref().map(|g| g.iter().copied().collect()),
            weights: s.weights.as_ref().map(|w| WeightsDoc {
                mu: w.mu.iter().copied().collect(),
                tau: w.tau.iter().copied().collect(),
            }),
            initial: s.initial.as_ref().map(|z| StateDoc {
                x: z.x.iter().copied().collect(),
                y: z.y.iter().copied().collect(),
            }),
        }
    }
}

/// Parses and validates a JSON spec file.
pub fn load_spec(document: &[u8]) -> Result<ValidatedSystem> {
    let de = &mut serde_json::Deserializer::from_slice(document);
    let doc: SpecDoc = serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    validate_system(doc.into_spec()?)
}

/// Writes `spec` in the spec-file format. Floats are printed in shortest
/// round-trip form, so `load_spec(serialize(s))` reproduces `s` exactly.
pub fn serialize(spec: &SystemSpec) -> String {
    let mut out = serde_json::to_string_pretty(&SpecDoc::from_spec(spec))
        .expect("spec documents always serialize");
    out.push('\n');
    out
}
