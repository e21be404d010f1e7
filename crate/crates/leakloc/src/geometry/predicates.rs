//! Floating-point geometric predicates and the general-position check.
//!
//! All positional tests are thresholded against powers of the site set's
//! bounding-box diagonal. Inputs closer to degeneracy than
//! [`GENERAL_POSITION_TOL`] (relative) are rejected up front instead of
//! being perturbed; past that margin plain f64 evaluation is decisive, so
//! no exact arithmetic is needed.

use std::fmt;

use super::{bounding_box_diagonal, Point};

/// Relative tolerance for duplicate / collinear / cocircular detection.
pub const GENERAL_POSITION_TOL: f64 = 1e-9;

/// Twice the signed area of triangle `abc`; positive iff counterclockwise.
pub(crate) fn orient2d(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Incircle determinant. For a counterclockwise triangle `abc` the sign is
/// positive iff `d` lies strictly inside the circumcircle of `abc`. This is
/// the orientation of the four points lifted onto the paraboloid
/// `z = x^2 + y^2`, so it scales with length^4.
pub(crate) fn incircle(a: Point, b: Point, c: Point, d: Point) -> f64 {
    let adx = a.x - d.x;
    let ady = a.y - d.y;
    let bdx = b.x - d.x;
    let bdy = b.y - d.y;
    let cdx = c.x - d.x;
    let cdy = c.y - d.y;

    let ad2 = adx * adx + ady * ady;
    let bd2 = bdx * bdx + bdy * bdy;
    let cd2 = cdx * cdx + cdy * cdy;

    adx * (bdy * cd2 - cdy * bd2) - ady * (bdx * cd2 - cdx * bd2) + ad2 * (bdx * cdy - cdx * bdy)
}

/// Outcome of the general-position check. `is_ok()` means the site set is
/// usable; otherwise the offending index sets (zero-based) are listed.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DegeneracyReport {
    /// Bounding-box diagonal the tolerances were scaled by.
    pub scale: f64,
    pub duplicate_pairs: Vec<[usize; 2]>,
    pub collinear_triples: Vec<[usize; 3]>,
    pub cocircular_quadruples: Vec<[usize; 4]>,
}

impl DegeneracyReport {
    pub fn is_ok(&self) -> bool {
        self.duplicate_pairs.is_empty()
            && self.collinear_triples.is_empty()
            && self.cocircular_quadruples.is_empty()
    }
}

impl fmt::Display for DegeneracyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "sites are in general position");
        }
        let mut parts = Vec::new();
        for [i, j] in &self.duplicate_pairs {
            parts.push(format!("duplicate sites ({},{})", i + 1, j + 1));
        }
        for [i, j, m] in &self.collinear_triples {
            parts.push(format!("collinear sites ({},{},{})", i + 1, j + 1, m + 1));
        }
        for [i, j, m, n] in &self.cocircular_quadruples {
            parts.push(format!(
                "cocircular sites ({},{},{},{})",
                i + 1,
                j + 1,
                m + 1,
                n + 1
            ));
        }
        write!(f, "{}", parts.join("; "))
    }
}

/// Checks pairwise distinctness, collinear triples (triangle area against
/// `tol * scale^2`) and cocircular quadruples (incircle determinant against
/// `tol * scale^4`), with `scale` the bounding-box diagonal of `points`.
pub fn general_position_report(points: &[Point]) -> DegeneracyReport {
    let scale = bounding_box_diagonal(points);
    let mut report = DegeneracyReport {
        scale,
        ..DegeneracyReport::default()
    };
    let k = points.len();
    let tol = GENERAL_POSITION_TOL;

    for i in 0..k {
        for j in (i + 1)..k {
            if points[i].distance(points[j]) <= tol * scale {
                report.duplicate_pairs.push([i, j]);
            }
        }
    }
    for i in 0..k {
        for j in (i + 1)..k {
            for m in (j + 1)..k {
                let area = 0.5 * orient2d(points[i], points[j], points[m]).abs();
                if area <= tol * scale * scale {
                    report.collinear_triples.push([i, j, m]);
                }
            }
        }
    }
    let scale4 = scale * scale * scale * scale;
    for i in 0..k {
        for j in (i + 1)..k {
            for m in (j + 1)..k {
                for n in (m + 1)..k {
                    let det = incircle(points[i], points[j], points[m], points[n]).abs();
                    if det <= tol * scale4 {
                        report.cocircular_quadruples.push([i, j, m, n]);
                    }
                }
            }
        }
    }
    report
}
