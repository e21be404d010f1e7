//! Synthetic dataset generation.
//!
//! Flows follow a simple distance-decay stand-in for the real airflow:
//! connection `i` measures `sum_leaks (1 + dist)^(-alpha)`, times a seeded
//! multiplicative noise term `1 + eps_i` with `eps_i` normal, clipped to
//! `(-1, 1)`. Flows strictly decrease with leak distance when the noise is
//! off, so the nearest connection always wins the argmax. This is a data
//! generator for exercising the pipeline, not a physical flow model, and
//! datasets built from it are labelled synthetic by their setup name.
//!
//! Two-leak samples pair consecutively generated single-leak samples and
//! link back to them, mirroring how two-leak measurements are taken
//! between two single-leak trials.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::evaluation::{Dataset, Provenance, SingleLeakSample, TwoLeakSample};
use crate::geometry::{convex_polygon_contains, Point, SiteSet};
use crate::io::SetupConfig;
use crate::predictors::FlowVector;

/// Grid pitch used for synthetic leak positions, in meters.
pub const DEFAULT_GRID_PITCH_M: f64 = 0.25;

/// Flow-model parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthParams {
    /// Distance-decay exponent; must be positive.
    pub alpha: f64,
    /// Standard deviation of the multiplicative noise; zero disables it.
    pub sigma: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            alpha: 4.0,
            sigma: 0.0,
        }
    }
}

/// Nodes of a regular grid with the given pitch that lie strictly inside
/// the convex surface polygon. The grid is anchored at the surface
/// bounding-box corner, so boundary nodes are excluded.
pub fn generate_leak_grid(surface: &[Point], pitch: f64) -> Vec<Point> {
    assert!(pitch > 0.0, "grid pitch must be positive");
    let (min, max) = crate::geometry::bounding_box(surface);
    let scale = (max - min).norm();
    let slack = -1e-9 * scale;
    let nx = ((max.x - min.x) / pitch).floor() as usize;
    let ny = ((max.y - min.y) / pitch).floor() as usize;
    let mut nodes = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            let p = Point::new(min.x + i as f64 * pitch, min.y + j as f64 * pitch);
            if convex_polygon_contains(surface, p, slack) {
                nodes.push(p);
            }
        }
    }
    nodes
}

/// Flows caused by one or two leaks, deterministic for a given seed.
pub fn synth_flows(
    leaks: &[Point],
    connections: &SiteSet,
    params: &SynthParams,
    seed: u64,
) -> FlowVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    synth_flows_with_rng(leaks, connections, params, &mut rng)
}

pub(crate) fn synth_flows_with_rng<R: Rng>(
    leaks: &[Point],
    connections: &SiteSet,
    params: &SynthParams,
    rng: &mut R,
) -> FlowVector {
    assert!(!leaks.is_empty() && leaks.len() <= 2, "one or two leaks");
    assert!(params.alpha > 0.0, "decay exponent must be positive");
    let noise = if params.sigma > 0.0 {
        Some(Normal::new(0.0, params.sigma).expect("finite positive sigma"))
    } else {
        None
    };
    let values = connections
        .points()
        .iter()
        .map(|p| {
            let base: f64 = leaks
                .iter()
                .map(|l| (1.0 + l.distance(*p)).powf(-params.alpha))
                .sum();
            let eps = match &noise {
                Some(n) => n.sample(rng).clamp(-1.0 + 1e-9, 1.0 - 1e-9),
                None => 0.0,
            };
            base * (1.0 + eps)
        })
        .collect();
    FlowVector::new(values).expect("finite synthetic flows")
}

/// Generates a dataset of `n_single` single-leak samples and `n_two`
/// two-leak samples over the setup's leak grid, deterministically from the
/// seed. Two-leak sample `j` pairs the single-leak samples `j` and `j+1`
/// (wrapping around) and records their ids as links; consecutive samples
/// are drawn at distinct grid nodes so no pair degenerates to one leak.
pub fn generate_dataset(
    setup: &SetupConfig,
    n_single: usize,
    n_two: usize,
    params: &SynthParams,
    seed: u64,
) -> Dataset {
    let grid = generate_leak_grid(&setup.surface, DEFAULT_GRID_PITCH_M);
    assert!(!grid.is_empty(), "surface too small for the leak grid");
    if n_two > 0 {
        assert!(n_single >= 2, "two-leak samples need at least two singles");
    }
    if n_single > 1 {
        assert!(grid.len() >= 2, "need at least two grid nodes");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = setup.connections.len();

    let mut nodes: Vec<Point> = Vec::with_capacity(n_single);
    for i in 0..n_single {
        let mut node = grid[rng.random_range(0..grid.len())];
        let mut attempts = 0;
        while attempts < 64 {
            let clash_prev = i > 0 && node == nodes[i - 1];
            let clash_wrap = i + 1 == n_single && n_single > 2 && node == nodes[0];
            if !(clash_prev || clash_wrap) {
                break;
            }
            node = grid[rng.random_range(0..grid.len())];
            attempts += 1;
        }
        nodes.push(node);
    }

    let single: Vec<SingleLeakSample> = nodes
        .iter()
        .enumerate()
        .map(|(i, leak)| SingleLeakSample {
            id: format!("s{:05}", i + 1),
            flows: synth_flows_with_rng(&[*leak], &setup.connections, params, &mut rng),
            leak: *leak,
        })
        .collect();

    let two_leak: Vec<TwoLeakSample> = (0..n_two)
        .map(|j| {
            let a = j % n_single;
            let b = (j + 1) % n_single;
            let leaks = [nodes[a], nodes[b]];
            TwoLeakSample {
                id: format!("t{:05}", j + 1),
                flows: synth_flows_with_rng(&leaks, &setup.connections, params, &mut rng),
                leaks,
                links: Some([single[a].id.clone(), single[b].id.clone()]),
            }
        })
        .collect();

    Dataset::new(k, Provenance::Original, single, two_leak)
}
