//! Classic Voronoi diagrams derived from the Delaunay triangulation.
//!
//! Cell `i` is the intersection of the bisector halfplanes towards its
//! Delaunay neighbors. The diagram graph has one vertex per triangle
//! circumcenter, a finite edge per interior Delaunay edge and an infinite
//! ray per boundary edge.

use super::delaunay::DelaunayTriangulation;
use super::predicates::orient2d;
use super::{
    CellPolyhedron, GeometryError, HalfPlane, IndexTuple, Point, SiteSet, Vector,
    GENERAL_POSITION_TOL,
};

/// Center of the circle through three non-collinear points.
///
/// The returned point is equidistant from all three inputs; collinear input
/// (relative to the triple's own extent) is rejected.
pub fn circumcenter(a: Point, b: Point, c: Point) -> Result<Point, GeometryError> {
    let scale = super::bounding_box_diagonal(&[a, b, c]);
    let det = orient2d(a, b, c);
    if det.abs() * 0.5 <= GENERAL_POSITION_TOL * scale * scale {
        let report = super::general_position_report(&[a, b, c]);
        return Err(GeometryError::DegenerateSites(report));
    }
    let (bx, by) = (b.x - a.x, b.y - a.y);
    let (cx, cy) = (c.x - a.x, c.y - a.y);
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (b2 * cy - c2 * by) / (2.0 * det);
    let uy = (bx * c2 - cx * b2) / (2.0 * det);
    Ok(Point::new(a.x + ux, a.y + uy))
}

/// The positive halfplane of the perpendicular bisector of `p_i` and `p_j`,
/// containing `p_i`: normal `(p_i - p_j) / |p_i - p_j|`, offset
/// `<normal, p_i + p_j> / 2`.
pub fn bisector_halfplane(i: usize, j: usize, sites: &SiteSet) -> HalfPlane {
    assert_ne!(i, j, "bisector needs two distinct sites");
    let pi = sites.point(i);
    let pj = sites.point(j);
    let normal = (pi - pj)
        .normalized()
        .expect("distinct sites of a validated set");
    let offset = 0.5 * (normal.x * (pi.x + pj.x) + normal.y * (pi.y + pj.y));
    HalfPlane::new(normal, offset).expect("finite unit normal")
}

/// A finite Voronoi edge connecting two circumcenters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VoronoiEdge {
    /// Indices into `VoronoiDiagram::vertices`.
    pub vertices: [usize; 2],
    /// The site pair whose bisector carries the edge.
    pub sites: [usize; 2],
}

/// An infinite Voronoi edge: a ray from a circumcenter, dual to a boundary
/// Delaunay edge.
#[derive(Clone, Debug, PartialEq)]
pub struct VoronoiRay {
    /// Index into `VoronoiDiagram::vertices`.
    pub start: usize,
    /// Unit direction pointing away from the triangulation.
    pub direction: Vector,
    pub sites: [usize; 2],
}

/// The classic Voronoi diagram: one (possibly unbounded) cell per site,
/// plus the vertex/edge graph for rendering. Immutable once built.
#[derive(Clone, Debug)]
pub struct VoronoiDiagram {
    sites: SiteSet,
    cells: Vec<CellPolyhedron>,
    vertices: Vec<Point>,
    edges: Vec<VoronoiEdge>,
    rays: Vec<VoronoiRay>,
}

impl VoronoiDiagram {
    /// Triangulates and builds the diagram in one step.
    pub fn build(sites: &SiteSet) -> VoronoiDiagram {
        let tri = super::delaunay_triangulate(sites);
        voronoi_from_delaunay(sites, &tri)
    }

    pub fn sites(&self) -> &SiteSet {
        &self.sites
    }

    pub fn k(&self) -> usize {
        self.sites.len()
    }

    pub fn cell(&self, i: usize) -> &CellPolyhedron {
        &self.cells[i]
    }

    pub fn cells(&self) -> &[CellPolyhedron] {
        &self.cells
    }

    /// Circumcenters of the Delaunay triangles.
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn edges(&self) -> &[VoronoiEdge] {
        &self.edges
    }

    pub fn rays(&self) -> &[VoronoiRay] {
        &self.rays
    }
}

/// Builds the diagram from an existing triangulation of the same sites.
pub fn voronoi_from_delaunay(sites: &SiteSet, tri: &DelaunayTriangulation) -> VoronoiDiagram {
    let k = sites.len();

    let cells = (0..k)
        .map(|i| {
            let halfplanes = tri
                .neighbors(i)
                .iter()
                .map(|&j| bisector_halfplane(i, j, sites))
                .collect();
            CellPolyhedron::new(IndexTuple::single(i), halfplanes)
        })
        .collect();

    let vertices: Vec<Point> = tri
        .triangles()
        .iter()
        .map(|t| {
            circumcenter(sites.point(t[0]), sites.point(t[1]), sites.point(t[2]))
                .expect("validated triangulation has no collinear triangle")
        })
        .collect();

    let edges = tri
        .interior_edges()
        .iter()
        .map(|e| VoronoiEdge {
            vertices: [e.triangles.0, e.triangles.1.expect("interior edge")],
            sites: e.sites,
        })
        .collect();

    let rays = tri
        .boundary_edges()
        .iter()
        .map(|e| {
            let [i, j] = e.sites;
            let t = tri.triangles()[e.triangles.0];
            let m = t
                .iter()
                .copied()
                .find(|s| *s != i && *s != j)
                .expect("third vertex");
            let pi = sites.point(i);
            let pj = sites.point(j);
            let mid = Point::new(0.5 * (pi.x + pj.x), 0.5 * (pi.y + pj.y));
            let mut dir = (pj - pi).perp().normalized().expect("distinct sites");
            // Away from the third triangle vertex, i.e. out of the hull.
            if dir.dot(sites.point(m) - mid) > 0.0 {
                dir = -dir;
            }
            VoronoiRay {
                start: e.triangles.0,
                direction: dir,
                sites: e.sites,
            }
        })
        .collect();

    VoronoiDiagram {
        sites: sites.clone(),
        cells,
        vertices,
        edges,
        rays,
    }
}
