//! Planar geometry: sites, halfplanes, polyhedral cells, Delaunay
//! triangulation and the classic Voronoi diagram.
//!
//! All cells are stored in H-representation, i.e. as finite intersections
//! of positive halfplanes `{y | <a, y> >= b}` with unit normals. Cells of a
//! Voronoi diagram are intersections of perpendicular-bisector halfplanes
//! over the Delaunay neighbors of the owning site and may be unbounded.

mod delaunay;
mod predicates;
mod voronoi;

pub use delaunay::{delaunay_triangulate, DelaunayEdge, DelaunayTriangulation};
pub use predicates::{general_position_report, DegeneracyReport, GENERAL_POSITION_TOL};
pub use voronoi::{
    bisector_halfplane, circumcenter, voronoi_from_delaunay, VoronoiDiagram, VoronoiEdge,
    VoronoiRay,
};

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

/// Errors raised by geometric constructions.
#[derive(Clone, Debug, Error, PartialEq)]
pub enum GeometryError {
    /// Fewer than three sites were supplied.
    #[error("site set needs at least 3 sites, got {0}")]
    TooFewSites(usize),
    /// A coordinate was NaN or infinite.
    #[error("non-finite coordinate encountered")]
    NonFinite,
    /// The sites violate the general-position requirement.
    #[error("degenerate site set: {0}")]
    DegenerateSites(DegeneracyReport),
    /// A halfplane normal was zero or non-finite.
    #[error("halfplane normal must be finite and nonzero")]
    InvalidNormal,
    /// A site index was outside `0..k`.
    #[error("site index {index} out of range for {k} sites")]
    IndexOutOfRange { index: usize, k: usize },
    /// An index tuple contained a repeated site index.
    #[error("index tuple contains repeated indices")]
    RepeatedIndex,
    /// A diagram order outside `1..=k` was requested.
    #[error("diagram order {order} not in 1..={k}")]
    InvalidOrder { order: usize, k: usize },
    /// A tuple string could not be parsed.
    #[error("malformed index tuple '{0}'")]
    MalformedTuple(String),
}

/// A position in the plane, in meters.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: Point) -> f64 {
        (*self - other).norm()
    }

    pub fn distance_sq(&self, other: Point) -> f64 {
        let d = *self - other;
        d.dot(d)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// A displacement between two points.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vector {
    pub x: f64,
    pub y: f64,
}

impl Vector {
    pub const fn new(x: f64, y: f64) -> Self {
        Vector { x, y }
    }

    pub fn dot(&self, other: Vector) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(&self, other: Vector) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Counterclockwise perpendicular.
    pub fn perp(&self) -> Vector {
        Vector::new(-self.y, self.x)
    }

    pub fn normalized(&self) -> Option<Vector> {
        let n = self.norm();
        if n.is_finite() && n > 0.0 {
            Some(*self * (1.0 / n))
        } else {
            None
        }
    }
}

impl Sub for Point {
    type Output = Vector;
    fn sub(self, rhs: Point) -> Vector {
        Vector::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Add<Vector> for Point {
    type Output = Point;
    fn add(self, rhs: Vector) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Add for Vector {
    type Output = Vector;
    fn add(self, rhs: Vector) -> Vector {
        Vector::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vector {
    type Output = Vector;
    fn sub(self, rhs: Vector) -> Vector {
        Vector::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vector {
    type Output = Vector;
    fn mul(self, rhs: f64) -> Vector {
        Vector::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        Vector::new(-self.x, -self.y)
    }
}

/// The ordered vacuum-connection positions `p_1..p_k`.
///
/// Construction validates the full invariant: `k >= 3`, finite coordinates,
/// pairwise distinct sites, and general position (no collinear triple, no
/// cocircular quadruple) within the relative tolerance
/// [`GENERAL_POSITION_TOL`]. Indices are zero-based internally; files and
/// reports use one-based indices.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteSet {
    points: Vec<Point>,
    scale: f64,
}

impl SiteSet {
    pub fn new(points: Vec<Point>) -> Result<Self, GeometryError> {
        if points.len() < 3 {
            return Err(GeometryError::TooFewSites(points.len()));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let report = general_position_report(&points);
        if !report.is_ok() {
            return Err(GeometryError::DegenerateSites(report));
        }
        let scale = bounding_box_diagonal(&points);
        Ok(SiteSet { points, scale })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> Point {
        self.points[i]
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Bounding-box diagonal; the length scale for all tolerances.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        bounding_box(&self.points)
    }
}

pub(crate) fn bounding_box(points: &[Point]) -> (Point, Point) {
    let mut min = Point::new(f64::INFINITY, f64::INFINITY);
    let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        min.x = min.x.min(p.x);
        min.y = min.y.min(p.y);
        max.x = max.x.max(p.x);
        max.y = max.y.max(p.y);
    }
    (min, max)
}

pub(crate) fn bounding_box_diagonal(points: &[Point]) -> f64 {
    let (min, max) = bounding_box(points);
    (max - min).norm()
}

/// The positive halfplane `{y | <normal, y> >= offset}` with unit normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfPlane {
    normal: Vector,
    offset: f64,
}

impl HalfPlane {
    /// Builds a halfplane, rescaling `normal` and `offset` so the stored
    /// normal has unit length.
    pub fn new(normal: Vector, offset: f64) -> Result<Self, GeometryError> {
        if !normal.x.is_finite() || !normal.y.is_finite() || !offset.is_finite() {
            return Err(GeometryError::InvalidNormal);
        }
        let n = normal.norm();
        if n == 0.0 {
            return Err(GeometryError::InvalidNormal);
        }
        Ok(HalfPlane {
            normal: normal * (1.0 / n),
            offset: offset / n,
        })
    }

    pub fn normal(&self) -> Vector {
        self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `<normal, y> - offset`; nonnegative iff `y` lies in the halfplane.
    pub fn signed_excess(&self, y: Point) -> f64 {
        self.normal.x * y.x + self.normal.y * y.y - self.offset
    }

    /// Membership with slack: `<normal, y> >= offset - slack`. A negative
    /// slack demands strict interior margin.
    pub fn contains(&self, y: Point, slack: f64) -> bool {
        self.signed_excess(y) >= -slack
    }
}

/// Ordered tuple of distinct site indices labelling a cell.
///
/// Length 1 labels a classic Voronoi cell, length `d` a refined cell of
/// order `d`. Stored zero-based; `Display` and the file formats are
/// one-based.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexTuple(Vec<usize>);

impl IndexTuple {
    pub fn new(indices: Vec<usize>, k: usize) -> Result<Self, GeometryError> {
        for (n, &i) in indices.iter().enumerate() {
            if i >= k {
                return Err(GeometryError::IndexOutOfRange { index: i, k });
            }
            if indices[..n].contains(&i) {
                return Err(GeometryError::RepeatedIndex);
            }
        }
        Ok(IndexTuple(indices))
    }

    pub fn single(i: usize) -> Self {
        IndexTuple(vec![i])
    }

    pub fn pair(i: usize, j: usize) -> Self {
        debug_assert_ne!(i, j);
        IndexTuple(vec![i, j])
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> usize {
        self.0[0]
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(&i)
    }

    /// The tuple extended by one more (distinct) index.
    pub fn extended(&self, j: usize) -> Self {
        debug_assert!(!self.contains(j));
        let mut v = self.0.clone();
        v.push(j);
        IndexTuple(v)
    }

    /// Parses the one-based display form, e.g. `3` or `(3,1)`.
    pub fn parse_one_based(s: &str, k: usize) -> Result<Self, GeometryError> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let mut indices = Vec::new();
        for part in inner.split(',') {
            let n: usize = part
                .trim()
                .parse()
                .map_err(|_| GeometryError::MalformedTuple(s.to_string()))?;
            if n == 0 {
                return Err(GeometryError::MalformedTuple(s.to_string()));
            }
            indices.push(n - 1);
        }
        IndexTuple::new(indices, k)
    }
}

impl fmt::Display for IndexTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            write!(f, "{}", self.0[0] + 1)
        } else {
            write!(f, "(")?;
            for (n, i) in self.0.iter().enumerate() {
                if n > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", i + 1)?;
            }
            write!(f, ")")
        }
    }
}

/// A labelled cell in H-representation; the intersection of its halfplanes.
///
/// An empty halfplane list denotes the whole plane. The halfplane order is
/// part of the value: projections cycle through it as stored.
#[derive(Clone, Debug, PartialEq)]
pub struct CellPolyhedron {
    label: IndexTuple,
    halfplanes: Vec<HalfPlane>,
}

impl CellPolyhedron {
    pub fn new(label: IndexTuple, halfplanes: Vec<HalfPlane>) -> Self {
        CellPolyhedron { label, halfplanes }
    }

    pub fn label(&self) -> &IndexTuple {
        &self.label
    }

    pub fn halfplanes(&self) -> &[HalfPlane] {
        &self.halfplanes
    }

    /// Membership with slack: true iff `<a, y> >= b - slack` for every
    /// stored halfplane. Boundary points are members at slack 0.
    pub fn contains(&self, y: Point, slack: f64) -> bool {
        self.halfplanes.iter().all(|h| h.contains(y, slack))
    }

    /// Vertices of `cell ∩ surface` in counterclockwise order; empty if the
    /// intersection is empty. `surface` must be a convex polygon.
    pub fn clip_to_surface(&self, surface: &[Point]) -> Vec<Point> {
        let mut poly: Vec<Point> = surface.to_vec();
        if polygon_signed_area(&poly) < 0.0 {
            poly.reverse();
        }
        for h in &self.halfplanes {
            poly = clip_polygon_by_halfplane(&poly, h);
            if poly.len() < 3 {
                return Vec::new();
            }
        }
        poly
    }
}

/// Twice the signed area; positive for counterclockwise vertex order.
pub(crate) fn polygon_signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut acc = 0.0;
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        acc += p.x * q.y - q.x * p.y;
    }
    acc
}

fn clip_polygon_by_halfplane(poly: &[Point], h: &HalfPlane) -> Vec<Point> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let n = poly.len();
    for i in 0..n {
        let cur = poly[i];
        let nxt = poly[(i + 1) % n];
        let ec = h.signed_excess(cur);
        let en = h.signed_excess(nxt);
        if ec >= 0.0 {
            out.push(cur);
        }
        if (ec >= 0.0) != (en >= 0.0) {
            let t = ec / (ec - en);
            out.push(cur + (nxt - cur) * t);
        }
    }
    out
}

/// True iff `p` lies inside or on the convex polygon (any vertex order).
pub fn convex_polygon_contains(poly: &[Point], p: Point, slack: f64) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let ccw = polygon_signed_area(poly) >= 0.0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let cross = (b - a).cross(p - a);
        let side = if ccw { cross } else { -cross };
        if side < -slack {
            return false;
        }
    }
    true
}
