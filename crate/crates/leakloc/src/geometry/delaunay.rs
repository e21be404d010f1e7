//! Delaunay triangulation of a general-position site set.
//!
//! Sites are lifted onto the paraboloid `z = x^2 + y^2`; the faces of the
//! lower convex hull of the lifted points project back to the Delaunay
//! triangles. A lifted triple spans a lower-hull face exactly when every
//! other lifted point lies above its plane, which is the incircle
//! orientation test, so the hull is found by scanning all triples. That is
//! O(k^4) and entirely adequate for the few dozen connections a vacuum
//! setup has.

use std::collections::BTreeMap;

use super::predicates::{incircle, orient2d};
use super::SiteSet;

/// A Delaunay edge and the triangles incident to it (one for boundary
/// edges, two for interior edges).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DelaunayEdge {
    /// Site indices with `sites[0] < sites[1]`.
    pub sites: [usize; 2],
    pub triangles: (usize, Option<usize>),
}

/// Triangles, edges and per-site neighbor sets of the triangulation.
#[derive(Clone, Debug)]
pub struct DelaunayTriangulation {
    triangles: Vec<[usize; 3]>,
    interior_edges: Vec<DelaunayEdge>,
    boundary_edges: Vec<DelaunayEdge>,
    neighbors: Vec<Vec<usize>>,
}

impl DelaunayTriangulation {
    /// Counterclockwise triangles, lowest vertex index first.
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn interior_edges(&self) -> &[DelaunayEdge] {
        &self.interior_edges
    }

    pub fn boundary_edges(&self) -> &[DelaunayEdge] {
        &self.boundary_edges
    }

    pub fn edge_count(&self) -> usize {
        self.interior_edges.len() + self.boundary_edges.len()
    }

    /// Delaunay neighbors of site `i`, ascending.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }
}

/// Triangulates a validated site set.
///
/// `SiteSet` construction already enforces general position, which makes
/// every incircle test decisive and the triangulation unique, so this
/// cannot fail.
pub fn delaunay_triangulate(sites: &SiteSet) -> DelaunayTriangulation {
    let k = sites.len();
    let mut triangles = Vec::new();

    for i in 0..k {
        for j in (i + 1)..k {
            for m in (j + 1)..k {
                // Orient counterclockwise before the incircle tests.
                let tri = if orient2d(sites.point(i), sites.point(j), sites.point(m)) > 0.0 {
                    [i, j, m]
                } else {
                    [i, m, j]
                };
                let (a, b, c) = (
                    sites.point(tri[0]),
                    sites.point(tri[1]),
                    sites.point(tri[2]),
                );
                let empty = (0..k)
                    .filter(|s| *s != i && *s != j && *s != m)
                    .all(|s| incircle(a, b, c, sites.point(s)) < 0.0);
                if empty {
                    triangles.push(tri);
                }
            }
        }
    }

    // Edge -> incident triangles; BTreeMap for a deterministic edge order.
    let mut edge_tris: BTreeMap<[usize; 2], Vec<usize>> = BTreeMap::new();
    for (t, tri) in triangles.iter().enumerate() {
        for e in [[tri[0], tri[1]], [tri[1], tri[2]], [tri[2], tri[0]]] {
            let key = [e[0].min(e[1]), e[0].max(e[1])];
            edge_tris.entry(key).or_default().push(t);
        }
    }

    let mut interior_edges = Vec::new();
    let mut boundary_edges = Vec::new();
    let mut neighbors = vec![Vec::new(); k];
    for (sites_pair, tris) in edge_tris {
        debug_assert!(tris.len() <= 2, "edge shared by more than two triangles");
        let edge = DelaunayEdge {
            sites: sites_pair,
            triangles: (tris[0], tris.get(1).copied()),
        };
        if tris.len() == 2 {
            interior_edges.push(edge);
        } else {
            boundary_edges.push(edge);
        }
        neighbors[sites_pair[0]].push(sites_pair[1]);
        neighbors[sites_pair[1]].push(sites_pair[0]);
    }
    for n in &mut neighbors {
        n.sort_unstable();
    }

    DelaunayTriangulation {
        triangles,
        interior_edges,
        boundary_edges,
        neighbors,
    }
}
