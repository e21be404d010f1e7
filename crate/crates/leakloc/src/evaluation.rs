//! Metrics, data cleaning and the single-/multi-leak evaluation pipelines.
//!
//! Correctness of a prediction means the true leak lies inside the
//! predicted cell (boundary inclusive). Distances are Euclidean distances
//! from the leak to the predicted cell, zero exactly for correct
//! predictions. Invalid refined predictions count as incorrect for
//! accuracy, are excluded from every mean-distance denominator, and are
//! tallied separately. All aggregation walks samples in id order so
//! reports are byte-stable.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::geometry::{IndexTuple, Point, VoronoiDiagram};
use crate::predictors::{
    argmax_index, repeated_strategy_step, top2_ordered, FlowVector, PredictError, Prediction,
    Predictor, RefinedPredictor, StepRecord, CORRECTNESS_SLACK,
};
use crate::projection::distance_to_cell;

/// Outlier threshold of the cleaning rule, in meters (strict).
pub const OUTLIER_THRESHOLD_M: f64 = 2.0;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("empty input")]
    EmptyInput,
    #[error("sample {sample}: linked single-leak sample {link} not found")]
    MissingLink { sample: String, link: String },
    #[error(transparent)]
    Predict(#[from] PredictError),
}

/// Whether a dataset is as recorded or has been through outlier cleaning.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Original,
    Cleaned,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Original => write!(f, "original"),
            Provenance::Cleaned => write!(f, "cleaned"),
        }
    }
}

/// One leak position with the equilibrium flows it caused.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleLeakSample {
    pub id: String,
    pub flows: FlowVector,
    pub leak: Point,
}

/// Two simultaneous leaks with their joint flows, linked to the single-leak
/// samples of the constituent leaks when available.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoLeakSample {
    pub id: String,
    pub flows: FlowVector,
    pub leaks: [Point; 2],
    /// Ids of the single-leak samples for `leaks[0]` and `leaks[1]`.
    pub links: Option<[String; 2]>,
}

/// A full dataset over one vacuum setup. Samples are kept sorted by id.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub k: usize,
    pub provenance: Provenance,
    single: Vec<SingleLeakSample>,
    two_leak: Vec<TwoLeakSample>,
}

impl Dataset {
    pub fn new(
        k: usize,
        provenance: Provenance,
        mut single: Vec<SingleLeakSample>,
        mut two_leak: Vec<TwoLeakSample>,
    ) -> Dataset {
        single.sort_by(|a, b| a.id.cmp(&b.id));
        two_leak.sort_by(|a, b| a.id.cmp(&b.id));
        Dataset {
            k,
            provenance,
            single,
            two_leak,
        }
    }

    pub fn single_samples(&self) -> &[SingleLeakSample] {
        &self.single
    }

    pub fn two_leak_samples(&self) -> &[TwoLeakSample] {
        &self.two_leak
    }

    pub fn single_by_id(&self, id: &str) -> Option<&SingleLeakSample> {
        self.single
            .binary_search_by(|s| s.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.single[i])
    }

    /// Verifies that every two-leak link resolves.
    pub fn check_links(&self) -> Result<(), EvalError> {
        for t in &self.two_leak {
            let links = t.links.as_ref().ok_or_else(|| EvalError::MissingLink {
                sample: t.id.clone(),
                link: String::from("<none>"),
            })?;
            for link in links {
                if self.single_by_id(link).is_none() {
                    return Err(EvalError::MissingLink {
                        sample: t.id.clone(),
                        link: link.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Aggregate metrics of one evaluation pass (one step, for multi-leak).
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub total: usize,
    pub correct: usize,
    /// Valid but incorrect predictions.
    pub incorrect: usize,
    /// Invalid predictions (empty refined cells).
    pub invalid: usize,
    /// correct / total; invalid predictions count as not correct.
    pub accuracy: f64,
    /// Mean distance over all valid predictions, in centimeters.
    pub mean_dist_full_cm: f64,
    /// Mean distance over valid incorrect predictions, in centimeters.
    pub mean_dist_incorrect_cm: f64,
    /// False when there was no valid incorrect prediction; the incorrect
    /// mean is then reported as zero.
    pub has_incorrect: bool,
}

impl MetricsReport {
    /// Builds the report from per-sample (correct, distance in meters)
    /// outcomes; `None` distances mark invalid predictions.
    pub fn from_outcomes(outcomes: &[(bool, Option<f64>)]) -> Result<MetricsReport, EvalError> {
        if outcomes.is_empty() {
            return Err(EvalError::EmptyInput);
        }
        let total = outcomes.len();
        let correct = outcomes.iter().filter(|(c, _)| *c).count();
        let invalid = outcomes.iter().filter(|(_, d)| d.is_none()).count();
        let incorrect = total - correct - invalid;

        let valid_dists: Vec<f64> = outcomes.iter().filter_map(|(_, d)| *d).collect();
        let mean_full = if valid_dists.is_empty() {
            0.0
        } else {
            mean_euclidean_distance(&valid_dists, MeanMode::Full)?
        };
        let mean_incorrect = if valid_dists.is_empty() {
            0.0
        } else {
            mean_euclidean_distance(&valid_dists, MeanMode::IncorrectOnly)?
        };
        let has_incorrect = valid_dists.iter().any(|d| *d > 0.0);

        Ok(MetricsReport {
            total,
            correct,
            incorrect,
            invalid,
            accuracy: correct as f64 / total as f64,
            mean_dist_full_cm: 100.0 * mean_full,
            mean_dist_incorrect_cm: 100.0 * mean_incorrect,
            has_incorrect,
        })
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "samples {}", self.total)?;
        writeln!(f, "correct {}", self.correct)?;
        writeln!(f, "incorrect {}", self.incorrect)?;
        writeln!(f, "invalid {}", self.invalid)?;
        writeln!(f, "accuracy-percent {:.4}", 100.0 * self.accuracy)?;
        writeln!(f, "mean-dist-full-cm {:.4}", self.mean_dist_full_cm)?;
        writeln!(
            f,
            "mean-dist-incorrect-cm {:.4}",
            self.mean_dist_incorrect_cm
        )?;
        writeln!(f, "has-incorrect {}", self.has_incorrect)
    }
}

/// Fraction of correct predictions.
pub fn accuracy(results: &[bool]) -> Result<f64, EvalError> {
    if results.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    Ok(results.iter().filter(|c| **c).count() as f64 / results.len() as f64)
}

/// Denominator choice for the mean Euclidean distance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeanMode {
    /// Average over all (valid) samples.
    Full,
    /// Average over incorrect predictions only.
    IncorrectOnly,
}

/// Mean of per-sample distances to the predicted cells, in meters.
/// Distances of invalid predictions must be filtered out beforehand. With
/// `IncorrectOnly` and no positive distance the mean is reported as zero.
pub fn mean_euclidean_distance(distances_m: &[f64], mode: MeanMode) -> Result<f64, EvalError> {
    if distances_m.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let sum: f64 = distances_m.iter().sum();
    match mode {
        MeanMode::Full => Ok(sum / distances_m.len() as f64),
        MeanMode::IncorrectOnly => {
            let n = distances_m.iter().filter(|d| **d > 0.0).count();
            if n == 0 {
                Ok(0.0)
            } else {
                Ok(sum / n as f64)
            }
        }
    }
}

/// Which samples the cleaning pass removed and why.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OutlierReport {
    pub threshold_m: f64,
    /// Removed single-leak samples with their outlier distance (meters).
    pub removed_single: Vec<(String, f64)>,
    /// Two-leak samples where both leaks exceeded the threshold.
    pub removed_two_direct: Vec<(String, f64)>,
    /// Two-leak samples removed because a linked single-leak sample was;
    /// (sample id, offending link id).
    pub removed_two_cascade: Vec<(String, String)>,
}

impl OutlierReport {
    pub fn removed_total(&self) -> usize {
        self.removed_single.len() + self.removed_two_direct.len() + self.removed_two_cascade.len()
    }
}

impl fmt::Display for OutlierReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "outlier-threshold-m {}", self.threshold_m)?;
        for (id, d) in &self.removed_single {
            writeln!(f, "removed-single {id} distance-m {d:.4}")?;
        }
        for (id, d) in &self.removed_two_direct {
            writeln!(f, "removed-two-leak {id} min-distance-m {d:.4}")?;
        }
        for (id, link) in &self.removed_two_cascade {
            writeln!(f, "removed-two-leak {id} cascade-of {link}")?;
        }
        writeln!(f, "removed-total {}", self.removed_total())
    }
}

/// Removes outliers against the classic diagram.
///
/// A single-leak sample is removed iff the distance from its leak to the
/// classic cell of its largest-flow connection exceeds the threshold
/// (strictly). A two-leak sample is removed iff both leaks exceed it, and
/// additionally — in a second pass — iff it links to a removed single-leak
/// sample.
pub fn clean_outliers(
    dataset: &Dataset,
    classic: &VoronoiDiagram,
    threshold_m: f64,
) -> (Dataset, OutlierReport) {
    let mut report = OutlierReport {
        threshold_m,
        ..OutlierReport::default()
    };

    let mut kept_single = Vec::new();
    for s in dataset.single_samples() {
        let cell = classic.cell(argmax_index(&s.flows));
        let d = distance_to_cell(s.leak, cell);
        if d > threshold_m {
            report.removed_single.push((s.id.clone(), d));
        } else {
            kept_single.push(s.clone());
        }
    }

    let mut kept_two = Vec::new();
    for t in dataset.two_leak_samples() {
        let cell = classic.cell(argmax_index(&t.flows));
        let d0 = distance_to_cell(t.leaks[0], cell);
        let d1 = distance_to_cell(t.leaks[1], cell);
        if d0 > threshold_m && d1 > threshold_m {
            report.removed_two_direct.push((t.id.clone(), d0.min(d1)));
            continue;
        }
        let cascade = t.links.as_ref().and_then(|links| {
            links
                .iter()
                .find(|l| report.removed_single.iter().any(|(id, _)| id == *l))
        });
        if let Some(link) = cascade {
            report
                .removed_two_cascade
                .push((t.id.clone(), link.clone()));
        } else {
            kept_two.push(t.clone());
        }
    }

    (
        Dataset::new(dataset.k, Provenance::Cleaned, kept_single, kept_two),
        report,
    )
}

/// Normalization of a confusion matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    /// Columns sum to one; diagonal entries are per-class precision.
    Column,
    /// Rows sum to one; diagonal entries are per-class recall.
    Row,
}

/// Confusion matrix over cell labels, with an extra "None" column for
/// invalid predictions (a column without a matching row). Raw counts are
/// kept; `values()` applies the requested normalization.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfusionMatrix {
    labels: Vec<IndexTuple>,
    /// counts[truth][predicted]; the last column is "None" if present.
    counts: Vec<Vec<usize>>,
    none_column: bool,
    normalization: Normalization,
}

impl ConfusionMatrix {
    pub fn labels(&self) -> &[IndexTuple] {
        &self.labels
    }

    pub fn counts(&self) -> &[Vec<usize>] {
        &self.counts
    }

    pub fn has_none_column(&self) -> bool {
        self.none_column
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    /// Counts under the requested normalization. Zero-mass columns/rows
    /// stay zero.
    pub fn values(&self) -> Vec<Vec<f64>> {
        let rows = self.counts.len();
        let cols = self.labels.len() + usize::from(self.none_column);
        let mut out = vec![vec![0.0; cols]; rows];
        match self.normalization {
            Normalization::Row => {
                for (r, row) in self.counts.iter().enumerate() {
                    let sum: usize = row.iter().sum();
                    if sum > 0 {
                        for (c, v) in row.iter().enumerate() {
                            out[r][c] = *v as f64 / sum as f64;
                        }
                    }
                }
            }
            Normalization::Column => {
                for c in 0..cols {
                    let sum: usize = self.counts.iter().map(|row| row[c]).sum();
                    if sum > 0 {
                        for (r, row) in self.counts.iter().enumerate() {
                            out[r][c] = row[c] as f64 / sum as f64;
                        }
                    }
                }
            }
        }
        out
    }

    /// Mean of the normalized diagonal over all labels (the "None" column
    /// has no diagonal entry). Mean precision under column normalization,
    /// mean recall under row normalization.
    pub fn mean_diagonal(&self) -> f64 {
        let values = self.values();
        let n = self.labels.len();
        if n == 0 {
            return 0.0;
        }
        (0..n).map(|i| values[i][i]).sum::<f64>() / n as f64
    }
}

impl fmt::Display for ConfusionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.normalization {
            Normalization::Column => "column",
            Normalization::Row => "row",
        };
        writeln!(f, "confusion-matrix {kind}")?;
        write!(f, "labels")?;
        for l in &self.labels {
            write!(f, " V_{l}")?;
        }
        if self.none_column {
            write!(f, " None")?;
        }
        writeln!(f)?;
        let values = self.values();
        for (r, row) in values.iter().enumerate() {
            write!(f, "row V_{}", self.labels[r])?;
            for v in row {
                write!(f, " {v:.4}")?;
            }
            writeln!(f)?;
        }
        writeln!(
            f,
            "mean-diagonal-percent {:.4}",
            100.0 * self.mean_diagonal()
        )
    }
}

/// Builds the confusion matrix of truth labels against predictions over a
/// fixed label set. Invalid predictions land in the "None" column, which
/// is added only when one occurs. Truth labels outside `labels` are
/// ignored (they cannot occur for labels built from the same diagram).
pub fn confusion_matrix(
    truths: &[IndexTuple],
    predictions: &[Prediction],
    labels: &[IndexTuple],
    normalization: Normalization,
) -> ConfusionMatrix {
    assert_eq!(truths.len(), predictions.len());
    let none_column = predictions.iter().any(|p| !p.is_valid());
    let index: BTreeMap<&IndexTuple, usize> =
        labels.iter().enumerate().map(|(i, l)| (l, i)).collect();
    let cols = labels.len() + usize::from(none_column);
    let mut counts = vec![vec![0usize; cols]; labels.len()];
    for (truth, pred) in truths.iter().zip(predictions) {
        let Some(&r) = index.get(truth) else { continue };
        let c = match pred {
            Prediction::Valid(t) => match index.get(t) {
                Some(&c) => c,
                None => continue,
            },
            Prediction::Invalid(_) => labels.len(),
        };
        counts[r][c] += 1;
    }
    ConfusionMatrix {
        labels: labels.to_vec(),
        counts,
        none_column,
        normalization,
    }
}

/// Per-sample outcome of a single-leak evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleOutcome {
    pub id: String,
    pub truth: IndexTuple,
    pub prediction: Prediction,
    /// The leak is equidistant to consecutive nearest sites, so the truth
    /// label was tie-broken on a cell boundary.
    pub boundary_tie: bool,
    pub correct: bool,
    /// Distance to the predicted cell in meters; `None` for invalid
    /// predictions.
    pub distance_m: Option<f64>,
}

/// True when one of the first `d` nearest-site distance gaps vanishes,
/// i.e. the point sits on a boundary of its order-d truth cell.
fn truth_label_tie(sites: &crate::geometry::SiteSet, leak: Point, d: usize) -> bool {
    let mut dists: Vec<f64> = sites.points().iter().map(|p| leak.distance(*p)).collect();
    dists.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let tol = 1e-12 * (1.0 + sites.scale());
    (0..d.min(dists.len() - 1)).any(|i| dists[i + 1] - dists[i] <= tol)
}

/// Metrics plus both confusion matrices of a single-leak evaluation.
#[derive(Clone, Debug)]
pub struct SingleLeakEvaluation {
    pub metrics: MetricsReport,
    pub confusion_precision: ConfusionMatrix,
    pub confusion_recall: ConfusionMatrix,
    pub outcomes: Vec<SingleOutcome>,
}

/// Runs a predictor over every single-leak sample.
pub fn evaluate_single_leak(
    dataset: &Dataset,
    predictor: &dyn Predictor,
) -> Result<SingleLeakEvaluation, EvalError> {
    if dataset.single_samples().is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let mut outcomes = Vec::with_capacity(dataset.single_samples().len());
    for s in dataset.single_samples() {
        let prediction = predictor.predict(&s.flows)?;
        let (correct, distance_m) = match &prediction {
            Prediction::Invalid(_) => (false, None),
            Prediction::Valid(label) => {
                let cell = predictor.cell(label).expect("valid prediction has a cell");
                let d = distance_to_cell(s.leak, cell);
                (d == 0.0, Some(d))
            }
        };
        let truth = predictor.truth_label(s.leak);
        outcomes.push(SingleOutcome {
            id: s.id.clone(),
            boundary_tie: truth_label_tie(predictor.sites(), s.leak, truth.len()),
            truth,
            prediction,
            correct,
            distance_m,
        });
    }

    let pairs: Vec<(bool, Option<f64>)> =
        outcomes.iter().map(|o| (o.correct, o.distance_m)).collect();
    let metrics = MetricsReport::from_outcomes(&pairs)?;

    // Truth labels are always nonempty cells geometrically; folding them in
    // keeps the matrix total equal to the sample count even if the probe
    // grid misjudged a sliver cell.
    let mut label_set: std::collections::BTreeSet<IndexTuple> =
        predictor.labels().into_iter().collect();
    label_set.extend(outcomes.iter().map(|o| o.truth.clone()));
    let labels: Vec<IndexTuple> = label_set.into_iter().collect();
    let truths: Vec<IndexTuple> = outcomes.iter().map(|o| o.truth.clone()).collect();
    let predictions: Vec<Prediction> = outcomes.iter().map(|o| o.prediction.clone()).collect();
    let confusion_precision =
        confusion_matrix(&truths, &predictions, &labels, Normalization::Column);
    let confusion_recall = confusion_matrix(&truths, &predictions, &labels, Normalization::Row);

    Ok(SingleLeakEvaluation {
        metrics,
        confusion_precision,
        confusion_recall,
        outcomes,
    })
}

/// Step-wise metrics of the repeated strategy on two-leak data. Step 2 is
/// aggregated only over samples whose step 1 succeeded.
#[derive(Clone, Debug)]
pub struct MultiLeakEvaluation {
    pub step1: MetricsReport,
    pub step2: MetricsReport,
    pub records: Vec<(String, StepRecord)>,
}

/// Simulates the repeated strategy over every two-leak sample.
pub fn evaluate_multi_leak(
    dataset: &Dataset,
    predictor: &dyn Predictor,
) -> Result<MultiLeakEvaluation, EvalError> {
    if dataset.two_leak_samples().is_empty() {
        return Err(EvalError::EmptyInput);
    }
    dataset.check_links()?;

    let mut records = Vec::with_capacity(dataset.two_leak_samples().len());
    for t in dataset.two_leak_samples() {
        let record = repeated_strategy_step(t, predictor, dataset)?;
        records.push((t.id.clone(), record));
    }

    let step1_outcomes: Vec<(bool, Option<f64>)> = records
        .iter()
        .map(|(_, r)| (r.step1.correct, r.step1.distance_m))
        .collect();
    let step1 = MetricsReport::from_outcomes(&step1_outcomes)?;

    let step2_outcomes: Vec<(bool, Option<f64>)> = records
        .iter()
        .filter_map(|(_, r)| r.step2.as_ref())
        .map(|s| (s.correct, s.distance_m))
        .collect();
    // No step-1 success means step 2 never runs; report an empty step
    // rather than an error.
    let step2 = if step2_outcomes.is_empty() {
        MetricsReport {
            total: 0,
            correct: 0,
            incorrect: 0,
            invalid: 0,
            accuracy: 0.0,
            mean_dist_full_cm: 0.0,
            mean_dist_incorrect_cm: 0.0,
            has_incorrect: false,
        }
    } else {
        MetricsReport::from_outcomes(&step2_outcomes)?
    };

    Ok(MultiLeakEvaluation {
        step1,
        step2,
        records,
    })
}

/// How the two classic cells named by an invalid tuple relate to the two
/// true leaks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct InvalidBreakdown {
    /// Both named cells contain a leak.
    pub both: usize,
    /// Only the first-index cell contains a leak.
    pub first_only: usize,
    /// Only the second-index cell contains a leak.
    pub second_only: usize,
    pub neither: usize,
}

/// Histogram and classification of invalid refined predictions on two-leak
/// data.
#[derive(Clone, Debug)]
pub struct InvalidPredictionAnalysis {
    pub total_invalid: usize,
    pub histogram: BTreeMap<IndexTuple, usize>,
    pub breakdown: InvalidBreakdown,
    /// Empty-cell tuples that never occurred as an invalid prediction.
    pub unobserved_empty_tuples: Vec<IndexTuple>,
}

impl fmt::Display for InvalidPredictionAnalysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid-total {}", self.total_invalid)?;
        writeln!(f, "invalid-categories {}", self.histogram.len())?;
        for (t, n) in &self.histogram {
            writeln!(f, "invalid V_{t} {n}")?;
        }
        writeln!(f, "both-cells-contain-a-leak {}", self.breakdown.both)?;
        writeln!(f, "only-first-cell {}", self.breakdown.first_only)?;
        writeln!(f, "only-second-cell {}", self.breakdown.second_only)?;
        writeln!(f, "neither-cell {}", self.breakdown.neither)?;
        write!(f, "unobserved-empty-tuples")?;
        for t in &self.unobserved_empty_tuples {
            write!(f, " V_{t}")?;
        }
        writeln!(f)
    }
}

/// Tallies the invalid predictions of the refined predictor on the two-leak
/// samples and classifies each against the classic diagram: which of the
/// two named classic cells actually contain a leak.
pub fn invalid_prediction_analysis(
    dataset: &Dataset,
    refined: &RefinedPredictor<'_>,
    classic: &VoronoiDiagram,
) -> Result<InvalidPredictionAnalysis, EvalError> {
    let mut histogram: BTreeMap<IndexTuple, usize> = BTreeMap::new();
    let mut breakdown = InvalidBreakdown::default();
    let mut total_invalid = 0usize;

    for t in dataset.two_leak_samples() {
        let prediction = refined.predict(&t.flows)?;
        let Prediction::Invalid(tuple) = prediction else {
            continue;
        };
        total_invalid += 1;
        *histogram.entry(tuple.clone()).or_insert(0) += 1;

        let [i1, i2] = [tuple.indices()[0], tuple.indices()[1]];
        let in_first = t
            .leaks
            .iter()
            .any(|l| classic.cell(i1).contains(*l, CORRECTNESS_SLACK));
        let in_second = t
            .leaks
            .iter()
            .any(|l| classic.cell(i2).contains(*l, CORRECTNESS_SLACK));
        match (in_first, in_second) {
            (true, true) => breakdown.both += 1,
            (true, false) => breakdown.first_only += 1,
            (false, true) => breakdown.second_only += 1,
            (false, false) => breakdown.neither += 1,
        }
    }

    let unobserved_empty_tuples = refined
        .diagram()
        .cells()
        .iter()
        .filter(|(t, c)| c.is_empty && !histogram.contains_key(*t))
        .map(|(t, _)| t.clone())
        .collect();

    Ok(InvalidPredictionAnalysis {
        total_invalid,
        histogram,
        breakdown,
        unobserved_empty_tuples,
    })
}

/// Outcome counts of the simultaneous strategy on two-leak data: of the two
/// classic cells named by the top-two flows, how many contain a leak.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SimultaneousReport {
    pub total: usize,
    pub both_located: usize,
    pub one_located: usize,
    pub none_located: usize,
}

impl fmt::Display for SimultaneousReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "samples {}", self.total)?;
        writeln!(f, "both-cells-contain-a-leak {}", self.both_located)?;
        writeln!(f, "exactly-one-cell {}", self.one_located)?;
        writeln!(f, "neither-cell {}", self.none_located)
    }
}

/// Evaluates the simultaneous strategy on every two-leak sample.
pub fn evaluate_simultaneous(
    dataset: &Dataset,
    classic: &VoronoiDiagram,
) -> Result<SimultaneousReport, EvalError> {
    if dataset.two_leak_samples().is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let mut report = SimultaneousReport::default();
    for t in dataset.two_leak_samples() {
        let tuple = top2_ordered(&t.flows);
        let [i1, i2] = [tuple.indices()[0], tuple.indices()[1]];
        let in_first = t
            .leaks
            .iter()
            .any(|l| classic.cell(i1).contains(*l, CORRECTNESS_SLACK));
        let in_second = t
            .leaks
            .iter()
            .any(|l| classic.cell(i2).contains(*l, CORRECTNESS_SLACK));
        report.total += 1;
        match (in_first, in_second) {
            (true, true) => report.both_located += 1,
            (false, false) => report.none_located += 1,
            _ => report.one_located += 1,
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SiteSet;
    use crate::predictors::ClassicPredictor;

    fn flows(v: &[f64]) -> FlowVector {
        FlowVector::new(v.to_vec()).unwrap()
    }

    fn sites(pts: &[(f64, f64)]) -> SiteSet {
        SiteSet::new(pts.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap()
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[true, true, true, false]).unwrap(), 0.75);
        assert_eq!(accuracy(&[]), Err(EvalError::EmptyInput));
    }

    #[test]
    fn mean_distance_examples() {
        let d = [0.0, 0.0, 0.5, 0.3];
        let full = mean_euclidean_distance(&d, MeanMode::Full).unwrap();
        let inc = mean_euclidean_distance(&d, MeanMode::IncorrectOnly).unwrap();
        assert!((100.0 * full - 20.0).abs() < 1e-12);
        assert!((100.0 * inc - 40.0).abs() < 1e-12);
        // No incorrect predictions: zero with the flag downstream.
        assert_eq!(
            mean_euclidean_distance(&[0.0, 0.0], MeanMode::IncorrectOnly).unwrap(),
            0.0
        );
    }

    #[test]
    fn metrics_denominator_identity() {
        let outcomes = [
            (true, Some(0.0)),
            (true, Some(0.0)),
            (false, Some(0.5)),
            (false, Some(0.3)),
            (false, None),
        ];
        let m = MetricsReport::from_outcomes(&outcomes).unwrap();
        assert_eq!(m.total, 5);
        assert_eq!(m.correct, 2);
        assert_eq!(m.incorrect, 2);
        assert_eq!(m.invalid, 1);
        // full mean over the 4 valid, incorrect mean over the 2 positive.
        let n_valid = 4.0;
        let n_incorrect = 2.0;
        assert!(
            (m.mean_dist_full_cm * n_valid - m.mean_dist_incorrect_cm * n_incorrect).abs() < 1e-9
        );
    }

    /// 3 connections at (0,0), (4,0), (0,4): cell V_1 is {x<=2} ∩ {y<=2},
    /// so leaks on the x-axis at x = 4.1 / 3.9 / 4.0 sit at distance
    /// 2.1 / 1.9 / 2.0 from V_1.
    fn cleaning_fixture() -> (SiteSet, Dataset) {
        let s = sites(&[(0.0, 0.0), (4.0, 0.0), (0.0, 4.0)]);
        let max1 = flows(&[1.0, 0.5, 0.2]);
        let single = vec![
            SingleLeakSample {
                id: "s1".into(),
                flows: max1.clone(),
                leak: Point::new(4.1, 0.0),
            },
            SingleLeakSample {
                id: "s2".into(),
                flows: max1.clone(),
                leak: Point::new(3.9, 0.0),
            },
            SingleLeakSample {
                id: "s3".into(),
                flows: max1.clone(),
                leak: Point::new(4.0, 0.0),
            },
        ];
        let two = vec![
            TwoLeakSample {
                id: "t1".into(),
                flows: max1.clone(),
                leaks: [Point::new(4.1, 0.0), Point::new(0.5, 0.5)],
                links: Some(["s1".into(), "s2".into()]),
            },
            TwoLeakSample {
                id: "t2".into(),
                flows: max1.clone(),
                leaks: [Point::new(3.9, 0.0), Point::new(0.5, 0.5)],
                links: Some(["s2".into(), "s3".into()]),
            },
            TwoLeakSample {
                id: "t3".into(),
                flows: max1,
                leaks: [Point::new(4.1, 0.0), Point::new(5.0, 5.0)],
                links: Some(["s2".into(), "s3".into()]),
            },
        ];
        let d = Dataset::new(3, Provenance::Original, single, two);
        (s, d)
    }

    #[test]
    fn cleaning_threshold_is_strict_and_cascades() {
        let (s, dataset) = cleaning_fixture();
        let vd = VoronoiDiagram::build(&s);
        let (cleaned, report) = clean_outliers(&dataset, &vd, OUTLIER_THRESHOLD_M);

        // Only the 2.1 m sample goes; 1.9 m and exactly 2.0 m stay.
        assert_eq!(report.removed_single.len(), 1);
        assert_eq!(report.removed_single[0].0, "s1");
        assert!((report.removed_single[0].1 - 2.1).abs() < 1e-9);
        assert_eq!(cleaned.single_samples().len(), 2);

        // t3 has both leaks beyond 2 m: direct removal. t1 links to the
        // removed s1: cascade. t2 stays.
        assert_eq!(report.removed_two_direct.len(), 1);
        assert_eq!(report.removed_two_direct[0].0, "t3");
        assert_eq!(
            report.removed_two_cascade,
            vec![("t1".to_string(), "s1".to_string())]
        );
        assert_eq!(cleaned.two_leak_samples().len(), 1);
        assert_eq!(cleaned.two_leak_samples()[0].id, "t2");
        assert_eq!(cleaned.provenance, Provenance::Cleaned);

        // One leak inside the threshold shields a two-leak sample from
        // direct removal (t1 is removed by cascade, not directly).
        assert!(report.removed_two_direct.iter().all(|(id, _)| id != "t1"));
    }

    #[test]
    fn cleaning_weakly_improves_classic_metrics() {
        let (s, dataset) = cleaning_fixture();
        let vd = VoronoiDiagram::build(&s);
        let predictor = ClassicPredictor::new(&vd);
        let before = evaluate_single_leak(&dataset, &predictor).unwrap().metrics;
        let (cleaned, _) = clean_outliers(&dataset, &vd, OUTLIER_THRESHOLD_M);
        let after = evaluate_single_leak(&cleaned, &predictor).unwrap().metrics;
        assert!(after.accuracy >= before.accuracy);
        assert!(after.mean_dist_full_cm <= before.mean_dist_full_cm);
        assert!(after.mean_dist_incorrect_cm <= before.mean_dist_incorrect_cm);
    }

    #[test]
    fn perfect_predictor_gives_identity_confusion_matrix() {
        let labels = vec![IndexTuple::single(0), IndexTuple::single(1)];
        let truths = vec![
            IndexTuple::single(0),
            IndexTuple::single(1),
            IndexTuple::single(1),
        ];
        let predictions: Vec<Prediction> = truths.iter().cloned().map(Prediction::Valid).collect();
        for norm in [Normalization::Column, Normalization::Row] {
            let m = confusion_matrix(&truths, &predictions, &labels, norm);
            let v = m.values();
            assert_eq!(v[0][0], 1.0);
            assert_eq!(v[1][1], 1.0);
            assert_eq!(v[0][1], 0.0);
            assert_eq!(v[1][0], 0.0);
            assert_eq!(m.mean_diagonal(), 1.0);
            assert!(!m.has_none_column());
        }
    }

    #[test]
    fn confusion_matrix_mass_and_none_column() {
        let labels = vec![IndexTuple::single(0), IndexTuple::single(1)];
        let truths = vec![
            IndexTuple::single(0),
            IndexTuple::single(0),
            IndexTuple::single(1),
        ];
        let predictions = vec![
            Prediction::Valid(IndexTuple::single(1)),
            Prediction::Invalid(IndexTuple::pair(0, 1)),
            Prediction::Valid(IndexTuple::single(1)),
        ];
        let m = confusion_matrix(&truths, &predictions, &labels, Normalization::Column);
        assert!(m.has_none_column());
        assert_eq!(m.total(), 3);
        // Column sums before normalization equal per-class prediction counts.
        let col1: usize = m.counts().iter().map(|r| r[1]).sum();
        let none: usize = m.counts().iter().map(|r| r[2]).sum();
        assert_eq!(col1, 2);
        assert_eq!(none, 1);
    }

    #[test]
    fn single_leak_evaluation_on_a_tiny_dataset() {
        let s = sites(&[(0.0, 0.0), (4.0, 0.0), (0.0, 4.0)]);
        let vd = VoronoiDiagram::build(&s);
        let predictor = ClassicPredictor::new(&vd);
        let single = vec![
            // Correct: leak in V_1.
            SingleLeakSample {
                id: "a".into(),
                flows: flows(&[1.0, 0.2, 0.1]),
                leak: Point::new(0.5, 0.5),
            },
            // Incorrect: largest flow at 1 but leak in V_2, 1 m away.
            SingleLeakSample {
                id: "b".into(),
                flows: flows(&[1.0, 0.2, 0.1]),
                leak: Point::new(3.0, 0.0),
            },
        ];
        let dataset = Dataset::new(3, Provenance::Original, single, Vec::new());
        let eval = evaluate_single_leak(&dataset, &predictor).unwrap();
        assert_eq!(eval.metrics.total, 2);
        assert_eq!(eval.metrics.correct, 1);
        assert_eq!(eval.metrics.accuracy, 0.5);
        assert!((eval.metrics.mean_dist_full_cm - 50.0).abs() < 1e-9);
        assert!((eval.metrics.mean_dist_incorrect_cm - 100.0).abs() < 1e-9);
        // Truth labels come from the nearest site.
        assert_eq!(eval.outcomes[0].truth, IndexTuple::single(0));
        assert_eq!(eval.outcomes[1].truth, IndexTuple::single(1));
    }

    #[test]
    fn boundary_leaks_are_tie_broken_and_flagged() {
        let s = sites(&[(0.0, 0.0), (4.0, 0.0), (0.0, 4.0)]);
        let vd = VoronoiDiagram::build(&s);
        let predictor = ClassicPredictor::new(&vd);
        let single = vec![
            // Equidistant to connections 1 and 2: truth tie-breaks to 1.
            SingleLeakSample {
                id: "tie".into(),
                flows: flows(&[1.0, 0.2, 0.1]),
                leak: Point::new(2.0, 1.0),
            },
            SingleLeakSample {
                id: "plain".into(),
                flows: flows(&[1.0, 0.2, 0.1]),
                leak: Point::new(0.5, 0.5),
            },
        ];
        let dataset = Dataset::new(3, Provenance::Original, single, Vec::new());
        let eval = evaluate_single_leak(&dataset, &predictor).unwrap();
        let tie = eval.outcomes.iter().find(|o| o.id == "tie").unwrap();
        assert!(tie.boundary_tie);
        assert_eq!(tie.truth, IndexTuple::single(0));
        let plain = eval.outcomes.iter().find(|o| o.id == "plain").unwrap();
        assert!(!plain.boundary_tie);
    }

    #[test]
    fn multi_leak_step2_count_equals_step1_successes() {
        let (s, dataset) = cleaning_fixture();
        let vd = VoronoiDiagram::build(&s);
        let predictor = ClassicPredictor::new(&vd);
        let eval = evaluate_multi_leak(&dataset, &predictor).unwrap();
        assert_eq!(eval.step2.total, eval.step1.correct);
        assert_eq!(eval.step1.total, dataset.two_leak_samples().len());
    }

    #[test]
    fn multi_leak_requires_resolvable_links() {
        let s = sites(&[(0.0, 0.0), (4.0, 0.0), (0.0, 4.0)]);
        let vd = VoronoiDiagram::build(&s);
        let predictor = ClassicPredictor::new(&vd);
        let two = vec![TwoLeakSample {
            id: "t".into(),
            flows: flows(&[1.0, 0.2, 0.1]),
            leaks: [Point::new(0.5, 0.5), Point::new(3.5, 0.0)],
            links: Some(["missing".into(), "also-missing".into()]),
        }];
        let dataset = Dataset::new(3, Provenance::Original, Vec::new(), two);
        assert!(matches!(
            evaluate_multi_leak(&dataset, &predictor),
            Err(EvalError::MissingLink { .. })
        ));
    }

    #[test]
    fn adjacent_top_two_flows_give_no_invalid_predictions() {
        // With three sites every ordered pair has a nonempty cell, so the
        // invalid histogram stays empty.
        let s = sites(&[(0.0, 0.0), (2.0, 0.0), (1.0, 3.0f64.sqrt())]);
        let vd = VoronoiDiagram::build(&s);
        let rd = crate::refined::RefinedDiagram::build(&s, 2).unwrap();
        let refined = RefinedPredictor::new(&rd).unwrap();
        let two = vec![TwoLeakSample {
            id: "t".into(),
            flows: flows(&[1.0, 0.8, 0.1]),
            leaks: [Point::new(0.1, 0.1), Point::new(1.9, 0.1)],
            links: None,
        }];
        let dataset = Dataset::new(3, Provenance::Original, Vec::new(), two);
        let analysis = invalid_prediction_analysis(&dataset, &refined, &vd).unwrap();
        assert_eq!(analysis.total_invalid, 0);
        assert!(analysis.histogram.is_empty());
    }

    #[test]
    fn multi_leak_with_no_step1_success_reports_empty_step2() {
        let s = sites(&[(0.0, 0.0), (4.0, 0.0), (0.0, 4.0)]);
        let vd = VoronoiDiagram::build(&s);
        let predictor = ClassicPredictor::new(&vd);
        // Largest flow at connection 1, both leaks far away in V_2.
        let single = vec![SingleLeakSample {
            id: "s1".into(),
            flows: flows(&[0.1, 1.0, 0.2]),
            leak: Point::new(3.8, 0.2),
        }];
        let two = vec![TwoLeakSample {
            id: "t1".into(),
            flows: flows(&[1.0, 0.5, 0.2]),
            leaks: [Point::new(3.8, 0.2), Point::new(3.5, 0.4)],
            links: Some(["s1".into(), "s1".into()]),
        }];
        let dataset = Dataset::new(3, Provenance::Original, single, two);
        let eval = evaluate_multi_leak(&dataset, &predictor).unwrap();
        assert_eq!(eval.step1.correct, 0);
        assert_eq!(eval.step2.total, 0);
        assert_eq!(eval.step2.accuracy, 0.0);
    }

    #[test]
    fn simultaneous_strategy_counts() {
        let s = sites(&[(0.0, 0.0), (4.0, 0.0), (0.0, 4.0)]);
        let vd = VoronoiDiagram::build(&s);
        let two = vec![
            // Top-two = (1,2); leaks in V_1 and V_2: both located.
            TwoLeakSample {
                id: "t1".into(),
                flows: flows(&[1.0, 0.8, 0.1]),
                leaks: [Point::new(0.2, 0.2), Point::new(3.8, 0.0)],
                links: None,
            },
            // Top-two = (1,3); only V_1 contains a leak.
            TwoLeakSample {
                id: "t2".into(),
                flows: flows(&[1.0, 0.2, 0.8]),
                leaks: [Point::new(0.2, 0.2), Point::new(3.8, 0.0)],
                links: None,
            },
        ];
        let dataset = Dataset::new(3, Provenance::Original, Vec::new(), two);
        let report = evaluate_simultaneous(&dataset, &vd).unwrap();
        assert_eq!(report.total, 2);
        assert_eq!(report.both_located, 1);
        assert_eq!(report.one_located, 1);
        assert_eq!(report.none_located, 0);
    }
}
