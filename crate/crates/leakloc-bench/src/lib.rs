//! Shared fixtures for the benchmarks.

use leakloc::geometry::{Point, SiteSet};
use leakloc::io::SetupConfig;

/// Wing-scale layout: 16 x 5.2 m surface, ten connections along the edges.
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
        "bench-wing".into(),
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
