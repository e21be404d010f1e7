//! Euclidean projection onto a cell via Dykstra's alternating projections.
//!
//! The projection onto a single halfplane is closed-form; projecting onto
//! an intersection cycles through the halfplanes with per-halfplane
//! correction terms (Dykstra's scheme), which converges to the exact
//! Euclidean projection for convex sets. One iteration is one full cycle
//! over the cell's halfplane list, in stored order; finite-iteration
//! results depend on that order, so it is fixed as part of the cell value.

use thiserror::Error;

use crate::geometry::{CellPolyhedron, HalfPlane, Point, Vector};

/// Iteration budget for a projection: full cycles over the halfplanes.
pub const DYKSTRA_MAX_ITERS: usize = 100;
/// Early-stop tolerance on the displacement between successive cycles, in
/// meters.
pub const DYKSTRA_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ProjectionError {
    /// Projection onto a cell that the refined diagram flags as empty.
    #[error("cell {0} is flagged empty; no projection target")]
    EmptyCell(String),
}

/// Result of a projection run. Non-convergence is not an error: the best
/// iterate is returned with `converged = false`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionResult {
    /// The (approximate) Euclidean projection.
    pub point: Point,
    /// Distance from the query point to `point`, in meters.
    pub distance: f64,
    /// Full cycles executed.
    pub iterations_used: usize,
    /// Whether the successive-cycle displacement fell below the tolerance.
    pub converged: bool,
}

/// Closed-form projection onto a single halfplane: the identity inside,
/// otherwise `y + (b - <a,y>) a`.
pub fn project_halfplane(y: Point, h: &HalfPlane) -> Point {
    let excess = h.signed_excess(y);
    if excess >= 0.0 {
        y
    } else {
        y + h.normal() * (-excess)
    }
}

/// Dykstra's projection with the default budget (100 cycles, 1e-12 m).
pub fn dykstra_project(y: Point, cell: &CellPolyhedron) -> ProjectionResult {
    dykstra_project_with(y, cell, DYKSTRA_MAX_ITERS, DYKSTRA_TOL)
}

/// Dykstra's projection with an explicit cycle budget and stop tolerance.
///
/// The stop test sums the iterate displacement and the change of every
/// correction term over the cycle. A test on the iterate alone is not
/// sound here: on polyhedra the iterate can sit numerically still for many
/// cycles while the corrections keep drifting towards an active-set change,
/// and reporting convergence from such a plateau would hand back a point
/// that is not the projection.
pub fn dykstra_project_with(
    y: Point,
    cell: &CellPolyhedron,
    max_iters: usize,
    tol: f64,
) -> ProjectionResult {
    let halfplanes = cell.halfplanes();
    let mut x = y;
    let mut corrections = vec![Vector::new(0.0, 0.0); halfplanes.len()];
    let mut converged = false;
    let mut iterations_used = 0;

    for _ in 0..max_iters {
        let before = x;
        let mut correction_change = 0.0;
        for (h, e) in halfplanes.iter().zip(corrections.iter_mut()) {
            let p = x + *e;
            let projected = project_halfplane(p, h);
            let updated = p - projected;
            correction_change += (updated - *e).norm();
            *e = updated;
            x = projected;
        }
        iterations_used += 1;
        if (x - before).norm() + correction_change < tol {
            converged = true;
            break;
        }
    }

    ProjectionResult {
        point: x,
        distance: y.distance(x),
        iterations_used,
        converged,
    }
}

/// Distance from `y` to the cell: exactly zero for members (slack 1e-9),
/// otherwise the Dykstra projection distance.
pub fn distance_to_cell(y: Point, cell: &CellPolyhedron) -> f64 {
    if cell.contains(y, 1e-9) {
        0.0
    } else {
        dykstra_project(y, cell).distance
    }
}
