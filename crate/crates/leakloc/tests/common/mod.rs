//! Shared fixtures and independent oracles for the integration tests.
//!
//! The oracles here deliberately avoid the library's construction paths:
//! nearest-site queries sort plain distances, and projections are
//! approximated by dense sampling of the cell boundary.

// Each test binary compiles this module separately and uses a subset.
#![allow(dead_code)]

use leakloc::geometry::{CellPolyhedron, Point, SiteSet};
use leakloc::io::SetupConfig;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draws `k` uniform sites in the unit box, redrawing until the set passes
/// the general-position gate.
pub fn random_site_set(rng: &mut ChaCha8Rng, k: usize) -> SiteSet {
    loop {
        let pts: Vec<Point> = (0..k)
            .map(|_| Point::new(rng.random::<f64>(), rng.random::<f64>()))
            .collect();
        if let Ok(sites) = SiteSet::new(pts) {
            return sites;
        }
    }
}

/// Site indices sorted by distance to `y`, ties towards the lower index.
pub fn sorted_by_distance(sites: &SiteSet, y: Point) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..sites.len()).collect();
    idx.sort_by(|&a, &b| {
        y.distance(sites.point(a))
            .partial_cmp(&y.distance(sites.point(b)))
            .unwrap()
            .then(a.cmp(&b))
    });
    idx
}

/// Distance margin between the m-th and (m+1)-th nearest site.
pub fn distance_margin(sites: &SiteSet, y: Point, order: &[usize], m: usize) -> f64 {
    y.distance(sites.point(order[m + 1])) - y.distance(sites.point(order[m]))
}

/// Brute-force projection distance by dense sampling of the cell boundary.
///
/// For a point outside the cell the projection lies on the boundary line of
/// some halfplane, within the feasible stretch of that line. Each line is
/// scanned coarsely around its closest point to `y` over a radius that is
/// guaranteed to contain the projection (`y` to any feasible reference
/// point), then the best spot is refined with a much finer step.
pub fn boundary_sampling_distance(cell: &CellPolyhedron, y: Point, feasible_ref: Point) -> f64 {
    if cell.contains(y, 1e-9) {
        return 0.0;
    }
    debug_assert!(cell.contains(feasible_ref, 1e-6));
    let radius = y.distance(feasible_ref) + 1.0;
    let mut best = f64::INFINITY;

    for h in cell.halfplanes() {
        // Closest point of the boundary line to y, and the line direction.
        let foot = y + h.normal() * (-h.signed_excess(y));
        let dir = h.normal().perp();

        let coarse = 2.0 * radius / 4000.0;
        let mut best_t = f64::NAN;
        let mut best_line = f64::INFINITY;
        let mut t = -radius;
        while t <= radius {
            let p = foot + dir * t;
            if cell.contains(p, 1e-9) {
                let d = y.distance(p);
                if d < best_line {
                    best_line = d;
                    best_t = t;
                }
            }
            t += coarse;
        }
        if best_t.is_nan() {
            continue;
        }
        let fine = coarse / 2000.0;
        let mut t = best_t - coarse;
        while t <= best_t + coarse {
            let p = foot + dir * t;
            if cell.contains(p, 1e-9) {
                let d = y.distance(p);
                if d < best_line {
                    best_line = d;
                }
            }
            t += fine;
        }
        best = best.min(best_line);
    }
    best
}

/// A randomized vacuum-setup-like layout: `k` connections spread along the
/// perimeter of a `w x h` rectangle with jitter, the way real setups place
/// them. Keeps cell shapes in the regime the projection budget is tuned
/// for, unlike fully i.i.d. site clouds.
pub fn jittered_layout(rng: &mut ChaCha8Rng, k: usize) -> (Vec<Point>, SiteSet) {
    loop {
        let w = 3.0 + 13.0 * rng.random::<f64>();
        let h = 2.0 + 4.0 * rng.random::<f64>();
        let margin = 0.2;
        let perimeter = 2.0 * (w + h) - 8.0 * margin;
        let step = perimeter / k as f64;
        let offset = rng.random::<f64>() * perimeter;
        let pts: Vec<Point> = (0..k)
            .map(|i| {
                let jitter = (rng.random::<f64>() - 0.5) * 0.6 * step;
                let mut s = (offset + i as f64 * step + jitter).rem_euclid(perimeter);
                // Walk the inset rectangle (margin in from each edge).
                let (iw, ih) = (w - 2.0 * margin, h - 2.0 * margin);
                let inward = margin + 0.3 * rng.random::<f64>();
                if s < iw {
                    return Point::new(margin + s, inward);
                }
                s -= iw;
                if s < ih {
                    return Point::new(w - inward, margin + s);
                }
                s -= ih;
                if s < iw {
                    return Point::new(w - margin - s, h - inward);
                }
                s -= iw;
                Point::new(inward, h - margin - s)
            })
            .collect();
        if let Ok(sites) = SiteSet::new(pts) {
            let surface = vec![
                Point::new(0.0, 0.0),
                Point::new(w, 0.0),
                Point::new(w, h),
                Point::new(0.0, h),
            ];
            return (surface, sites);
        }
    }
}

/// Desk-scale synthetic setup: 4 x 3 m surface, six connections.
pub fn desk_setup() -> SetupConfig {
    let connections = SiteSet::new(vec![
        Point::new(0.3, 0.3),
        Point::new(3.7, 0.4),
        Point::new(2.1, 2.8),
        Point::new(0.4, 2.6),
        Point::new(3.6, 2.5),
        Point::new(1.9, 0.2),
    ])
    .unwrap();
    SetupConfig::new(
        "synthetic-desk".into(),
        vec![
            Point::new(0.0, 0.0),
            Point::new(4.0, 0.0),
            Point::new(4.0, 3.0),
            Point::new(0.0, 3.0),
        ],
        connections,
    )
    .unwrap()
}

/// Wing-scale synthetic setup: 16 x 5.2 m surface, ten connections along
/// the long edges.
pub fn wing_setup() -> SetupConfig {
    let connections = SiteSet::new(vec![
        Point::new(0.8, 4.9),
        Point::new(2.4, 0.3),
        Point::new(4.7, 5.0),
        Point::new(6.1, 0.2),
        Point::new(8.3, 4.8),
        Point::new(9.9, 0.4),
        Point::new(11.6, 5.1),
        Point::new(13.1, 0.3),
        Point::new(14.8, 4.7),
        Point::new(15.7, 0.8),
    ])
    .unwrap();
    SetupConfig::new(
        "synthetic-wing".into(),
        vec![
            Point::new(0.0, 0.0),
            Point::new(16.0, 0.0),
            Point::new(16.0, 5.2),
            Point::new(0.0, 5.2),
        ],
        connections,
    )
    .unwrap()
}
