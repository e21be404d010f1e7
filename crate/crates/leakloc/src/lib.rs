//! Leak localization on vacuum setups via Voronoi partitions.
//!
//! A set of vacuum connections partitions the component surface into
//! Voronoi cells; the connection measuring the largest flow points at the
//! cell expected to contain a leak. This crate builds the classic diagram
//! and its order-d refinement (cells indexed by ordered tuples of nearest
//! connections), predicts cells from flow vectors, projects points onto
//! cells to measure prediction error, and runs the full evaluation
//! pipeline (cleaning, metrics, confusion matrices, multi-leak protocols)
//! on real or synthetic datasets.
//!
//! ```
//! use leakloc::{
//!     distance_to_cell, ClassicPredictor, FlowVector, Point, Prediction, Predictor, SiteSet,
//!     VoronoiDiagram,
//! };
//!
//! let connections = SiteSet::new(vec![
//!     Point::new(0.5, 0.5),
//!     Point::new(3.5, 0.6),
//!     Point::new(2.0, 3.5),
//! ])?;
//! let diagram = VoronoiDiagram::build(&connections);
//!
//! // Connection 2 measures the largest flow, so its cell is predicted.
//! let flows = FlowVector::new(vec![0.2, 0.9, 0.4])?;
//! let prediction = ClassicPredictor::new(&diagram).predict(&flows)?;
//! let Prediction::Valid(label) = prediction else { unreachable!() };
//! assert_eq!(label.to_string(), "2");
//!
//! // A leak next to that connection lies inside the predicted cell.
//! let cell = diagram.cell(label.first());
//! assert_eq!(distance_to_cell(Point::new(3.4, 0.7), cell), 0.0);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod evaluation;
pub mod geometry;
pub mod io;
pub mod predictors;
pub mod projection;
pub mod refined;
pub mod synthesis;

pub use evaluation::{
    accuracy, clean_outliers, confusion_matrix, evaluate_multi_leak, evaluate_simultaneous,
    evaluate_single_leak, invalid_prediction_analysis, mean_euclidean_distance, ConfusionMatrix,
    Dataset, EvalError, MetricsReport, Normalization, Provenance, SingleLeakSample, TwoLeakSample,
};
pub use geometry::{
    bisector_halfplane, circumcenter, delaunay_triangulate, general_position_report,
    voronoi_from_delaunay, CellPolyhedron, DegeneracyReport, DelaunayTriangulation, GeometryError,
    HalfPlane, IndexTuple, Point, SiteSet, Vector, VoronoiDiagram,
};
pub use io::{load_dataset, load_setup, save_dataset, save_report, DataError, SetupConfig};
pub use predictors::{
    argmax_index, repeated_strategy_step, simultaneous_predict, top2_ordered, ClassicPredictor,
    FlowVector, PredictError, Prediction, Predictor, RefinedPredictor,
};
pub use projection::{distance_to_cell, dykstra_project, project_halfplane, ProjectionResult};
pub use refined::{locate_ordered, merge_pair, MergedPairRegion, RefinedCell, RefinedDiagram};
pub use synthesis::{generate_dataset, generate_leak_grid, synth_flows, SynthParams};
