//! Flow-vector predictors over classic and refined diagrams.
//!
//! The classic predictor maps a flow vector to the Voronoi cell of the
//! connection with the largest flow; the order-two refined predictor maps
//! it to the refined cell of the two largest flows in descending order. A
//! refined prediction whose tuple names an empty cell is reported as
//! invalid rather than silently remapped. All argmax ties break towards
//! the lowest connection index.

use thiserror::Error;

use crate::evaluation::{Dataset, EvalError, TwoLeakSample};
use crate::geometry::{CellPolyhedron, IndexTuple, Point, SiteSet, VoronoiDiagram};
use crate::projection::distance_to_cell;
use crate::refined::{locate_ordered, RefinedDiagram};

/// Slack (meters) for the "leak inside predicted cell" correctness test.
pub const CORRECTNESS_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum PredictError {
    #[error("flow vector length {got} does not match the {expected} connections")]
    LengthMismatch { expected: usize, got: usize },
    #[error("flow vector must be nonempty with finite entries")]
    InvalidFlows,
    #[error("refined predictor needs an order-two diagram, got order {0}")]
    WrongOrder(usize),
}

/// Equilibrium flow values, one per vacuum connection, in connection order.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowVector(Vec<f64>);

impl FlowVector {
    pub fn new(values: Vec<f64>) -> Result<Self, PredictError> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(PredictError::InvalidFlows);
        }
        Ok(FlowVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Index of the largest flow; ties go to the lowest index.
pub fn argmax_index(x: &FlowVector) -> usize {
    let mut best = 0;
    for (i, v) in x.0.iter().enumerate().skip(1) {
        if *v > x.0[best] {
            best = i;
        }
    }
    best
}

/// Indices of the two largest flows in descending flow order; ties go to
/// the lower index first.
pub fn top2_ordered(x: &FlowVector) -> IndexTuple {
    assert!(x.len() >= 2, "need at least two flow values");
    let first = argmax_index(x);
    let mut second = usize::MAX;
    for (i, v) in x.0.iter().enumerate() {
        if i == first {
            continue;
        }
        if second == usize::MAX || *v > x.0[second] {
            second = i;
        }
    }
    IndexTuple::pair(first, second)
}

/// A predicted cell, or the tuple of an empty cell when the refined lookup
/// has no geometric counterpart.
#[derive(Clone, Debug, PartialEq)]
pub enum Prediction {
    Valid(IndexTuple),
    Invalid(IndexTuple),
}

impl Prediction {
    pub fn is_valid(&self) -> bool {
        matches!(self, Prediction::Valid(_))
    }

    pub fn tuple(&self) -> &IndexTuple {
        match self {
            Prediction::Valid(t) | Prediction::Invalid(t) => t,
        }
    }
}

/// Common surface of the classic and refined predictors, enough to drive
/// the evaluation pipeline.
pub trait Predictor {
    fn name(&self) -> &'static str;
    fn sites(&self) -> &SiteSet;
    fn predict(&self, flows: &FlowVector) -> Result<Prediction, PredictError>;
    /// The cell behind a valid label; `None` for labels without a nonempty
    /// cell.
    fn cell(&self, label: &IndexTuple) -> Option<&CellPolyhedron>;
    /// Ground-truth label of a leak position (ordered nearest sites).
    fn truth_label(&self, leak: Point) -> IndexTuple;
    /// Labels of all nonempty cells, in tuple order.
    fn labels(&self) -> Vec<IndexTuple>;

    fn k(&self) -> usize {
        self.sites().len()
    }
}

/// Predicts the classic Voronoi cell of the largest flow. Always valid.
#[derive(Clone, Copy, Debug)]
pub struct ClassicPredictor<'a> {
    diagram: &'a VoronoiDiagram,
}

impl<'a> ClassicPredictor<'a> {
    pub fn new(diagram: &'a VoronoiDiagram) -> Self {
        ClassicPredictor { diagram }
    }

    pub fn diagram(&self) -> &'a VoronoiDiagram {
        self.diagram
    }
}

impl Predictor for ClassicPredictor<'_> {
    fn name(&self) -> &'static str {
        "classic"
    }

    fn sites(&self) -> &SiteSet {
        self.diagram.sites()
    }

    fn predict(&self, flows: &FlowVector) -> Result<Prediction, PredictError> {
        if flows.len() != self.k() {
            return Err(PredictError::LengthMismatch {
                expected: self.k(),
                got: flows.len(),
            });
        }
        Ok(Prediction::Valid(IndexTuple::single(argmax_index(flows))))
    }

    fn cell(&self, label: &IndexTuple) -> Option<&CellPolyhedron> {
        if label.len() == 1 {
            Some(self.diagram.cell(label.first()))
        } else {
            None
        }
    }

    fn truth_label(&self, leak: Point) -> IndexTuple {
        locate_ordered(self.diagram.sites(), leak, 1)
    }

    fn labels(&self) -> Vec<IndexTuple> {
        (0..self.k()).map(IndexTuple::single).collect()
    }
}

/// Predicts the order-two refined cell of the two largest flows; yields
/// `Prediction::Invalid` when that cell is flagged empty.
#[derive(Clone, Copy, Debug)]
pub struct RefinedPredictor<'a> {
    diagram: &'a RefinedDiagram,
}

impl<'a> RefinedPredictor<'a> {
    pub fn new(diagram: &'a RefinedDiagram) -> Result<Self, PredictError> {
        if diagram.order() != 2 {
            return Err(PredictError::WrongOrder(diagram.order()));
        }
        Ok(RefinedPredictor { diagram })
    }

    pub fn diagram(&self) -> &'a RefinedDiagram {
        self.diagram
    }
}

impl Predictor for RefinedPredictor<'_> {
    fn name(&self) -> &'static str {
        "refined"
    }

    fn sites(&self) -> &SiteSet {
        self.diagram.sites()
    }

    fn predict(&self, flows: &FlowVector) -> Result<Prediction, PredictError> {
        if flows.len() != self.k() {
            return Err(PredictError::LengthMismatch {
                expected: self.k(),
                got: flows.len(),
            });
        }
        let tuple = top2_ordered(flows);
        let cell = self.diagram.cell(&tuple).expect("tuple within range");
        if cell.is_empty {
            Ok(Prediction::Invalid(tuple))
        } else {
            Ok(Prediction::Valid(tuple))
        }
    }

    fn cell(&self, label: &IndexTuple) -> Option<&CellPolyhedron> {
        self.diagram
            .cell(label)
            .and_then(|c| c.try_polyhedron().ok())
    }

    fn truth_label(&self, leak: Point) -> IndexTuple {
        locate_ordered(self.diagram.sites(), leak, 2)
    }

    fn labels(&self) -> Vec<IndexTuple> {
        self.diagram.nonempty_labels()
    }
}

/// The simultaneous two-leak strategy: the classic cells of the two largest
/// flows, from a single measurement.
pub fn simultaneous_predict<'a>(
    flows: &FlowVector,
    diagram: &'a VoronoiDiagram,
) -> Result<[&'a CellPolyhedron; 2], PredictError> {
    if flows.len() != diagram.k() {
        return Err(PredictError::LengthMismatch {
            expected: diagram.k(),
            got: flows.len(),
        });
    }
    let t = top2_ordered(flows);
    Ok([diagram.cell(t.indices()[0]), diagram.cell(t.indices()[1])])
}

/// Outcome of one prediction step of the repeated strategy.
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub prediction: Prediction,
    pub correct: bool,
    /// Distance to the predicted cell in meters; `None` for invalid
    /// predictions, which have no cell to measure against.
    pub distance_m: Option<f64>,
}

/// Record of a simulated repeated-strategy run on one two-leak sample.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub step1: StepOutcome,
    /// Which leak (0 or 1) counts as found and fixed after step 1.
    pub fixed_leak: Option<usize>,
    pub step2: Option<StepOutcome>,
}

/// Simulates the repeated strategy on a two-leak sample.
///
/// Step 1 predicts from the two-leak flows and succeeds iff at least one
/// true leak lies in the predicted cell; its distance is the minimum of the
/// two leak distances to that cell. On success one leak is fixed — the one
/// inside the cell, or, when both are inside, the one nearer to the
/// predicted cell's own connection site (ties towards leak 0) — and step 2
/// feeds the remaining leak's linked single-leak flows to the same
/// predictor, succeeding iff the remaining leak lies in the new cell.
pub fn repeated_strategy_step(
    sample: &TwoLeakSample,
    predictor: &dyn Predictor,
    dataset: &Dataset,
) -> Result<StepRecord, EvalError> {
    let prediction = predictor.predict(&sample.flows)?;
    let step1 = match &prediction {
        Prediction::Invalid(_) => StepOutcome {
            prediction: prediction.clone(),
            correct: false,
            distance_m: None,
        },
        Prediction::Valid(label) => {
            let cell = predictor.cell(label).expect("valid prediction has a cell");
            let d0 = distance_to_cell(sample.leaks[0], cell);
            let d1 = distance_to_cell(sample.leaks[1], cell);
            StepOutcome {
                prediction: prediction.clone(),
                correct: d0 == 0.0 || d1 == 0.0,
                distance_m: Some(d0.min(d1)),
            }
        }
    };

    if !step1.correct {
        return Ok(StepRecord {
            step1,
            fixed_leak: None,
            step2: None,
        });
    }

    let label = step1.prediction.tuple();
    let cell = predictor.cell(label).expect("correct step has a cell");
    let inside = [
        cell.contains(sample.leaks[0], CORRECTNESS_SLACK),
        cell.contains(sample.leaks[1], CORRECTNESS_SLACK),
    ];
    let fixed = match inside {
        [true, false] => 0,
        [false, true] => 1,
        _ => {
            let anchor = predictor.sites().point(label.first());
            if sample.leaks[0].distance(anchor) <= sample.leaks[1].distance(anchor) {
                0
            } else {
                1
            }
        }
    };
    let remaining = 1 - fixed;

    let links = sample
        .links
        .as_ref()
        .ok_or_else(|| EvalError::MissingLink {
            sample: sample.id.clone(),
            link: String::from("<none>"),
        })?;
    let single = dataset
        .single_by_id(&links[remaining])
        .ok_or_else(|| EvalError::MissingLink {
            sample: sample.id.clone(),
            link: links[remaining].clone(),
        })?;

    let prediction2 = predictor.predict(&single.flows)?;
    let step2 = match &prediction2 {
        Prediction::Invalid(_) => StepOutcome {
            prediction: prediction2.clone(),
            correct: false,
            distance_m: None,
        },
        Prediction::Valid(label2) => {
            let cell2 = predictor.cell(label2).expect("valid prediction has a cell");
            let d = distance_to_cell(single.leak, cell2);
            StepOutcome {
                prediction: prediction2.clone(),
                correct: d == 0.0,
                distance_m: Some(d),
            }
        }
    };

    Ok(StepRecord {
        step1,
        fixed_leak: Some(fixed),
        step2: Some(step2),
    })
}
