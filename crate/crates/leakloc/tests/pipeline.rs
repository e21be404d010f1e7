//! End-to-end pipeline tests over synthetic data: generate, serialize,
//! reload, clean, evaluate, and render, across both predictors.

mod common;

use common::*;
use leakloc::evaluation::{
    clean_outliers, evaluate_multi_leak, evaluate_simultaneous, evaluate_single_leak,
    invalid_prediction_analysis, Provenance, OUTLIER_THRESHOLD_M,
};
use leakloc::geometry::VoronoiDiagram;
use leakloc::io::{
    dataset_to_string, parse_dataset, parse_setup, render_svg, setup_to_string, DiagramInventory,
    SvgSampleMark, SvgScene,
};
use leakloc::predictors::{ClassicPredictor, Predictor, RefinedPredictor};
use leakloc::refined::RefinedDiagram;
use leakloc::synthesis::{generate_dataset, SynthParams};

#[test]
fn wing_scale_setup_builds_a_ten_cell_diagram() {
    let setup = wing_setup();
    let text = setup_to_string(&setup);
    let parsed = parse_setup(&text, "mem").unwrap();
    assert_eq!(parsed, setup);

    let vd = VoronoiDiagram::build(&setup.connections);
    assert_eq!(vd.cells().len(), 10);
    let inventory = DiagramInventory::from_classic(&setup.name, &vd);
    assert_eq!(inventory.nonempty_cells, 10);

    let rd = RefinedDiagram::build(&setup.connections, 2).unwrap();
    assert_eq!(rd.cells().len(), 90);
    // Refinement can only discard tuples, never invent cells.
    assert!(rd.nonempty_count() <= 90);
    assert!(rd.nonempty_count() >= 10);
}

#[test]
fn synthetic_round_trip_clean_and_evaluate() {
    let setup = desk_setup();
    let params = SynthParams {
        alpha: 4.0,
        sigma: 0.1,
    };
    let dataset = generate_dataset(&setup, 150, 80, &params, 77);

    // Serialize -> parse -> identical dataset.
    let text = dataset_to_string(&dataset);
    let (reloaded, warnings) = parse_dataset(&text, "mem", &setup).unwrap();
    assert!(warnings.is_empty());
    assert_eq!(dataset, reloaded);

    let vd = VoronoiDiagram::build(&setup.connections);
    let rd = RefinedDiagram::build(&setup.connections, 2).unwrap();
    let classic = ClassicPredictor::new(&vd);
    let refined = RefinedPredictor::new(&rd).unwrap();

    let (cleaned, outliers) = clean_outliers(&dataset, &vd, OUTLIER_THRESHOLD_M);
    assert_eq!(cleaned.provenance, Provenance::Cleaned);
    assert_eq!(
        cleaned.single_samples().len() + outliers.removed_single.len(),
        dataset.single_samples().len()
    );

    // Cleaned serialization keeps the provenance through a round trip.
    let (cleaned_again, _) = parse_dataset(&dataset_to_string(&cleaned), "mem", &setup).unwrap();
    assert_eq!(cleaned_again.provenance, Provenance::Cleaned);

    for predictor in [&classic as &dyn Predictor, &refined as &dyn Predictor] {
        let single = evaluate_single_leak(&cleaned, predictor).unwrap();
        assert_eq!(single.metrics.total, cleaned.single_samples().len());
        assert_eq!(
            single.metrics.correct + single.metrics.incorrect + single.metrics.invalid,
            single.metrics.total
        );
        // Correctness and distances tell the same story.
        for o in &single.outcomes {
            match o.distance_m {
                Some(d) => assert_eq!(o.correct, d == 0.0),
                None => assert!(!o.correct),
            }
        }
        // Confusion-matrix mass equals the number of labelled samples.
        assert_eq!(single.confusion_precision.total(), single.metrics.total);

        let multi = evaluate_multi_leak(&cleaned, predictor).unwrap();
        assert_eq!(multi.step1.total, cleaned.two_leak_samples().len());
        assert_eq!(multi.step2.total, multi.step1.correct);
    }

    let simultaneous = evaluate_simultaneous(&cleaned, &vd).unwrap();
    assert_eq!(
        simultaneous.both_located + simultaneous.one_located + simultaneous.none_located,
        simultaneous.total
    );
}

#[test]
fn refined_invalid_predictions_are_consistent() {
    // Wing-scale two-leak data: leaks in far-apart cells rank two
    // non-adjacent connections on top, which is what produces invalid
    // refined predictions.
    let setup = wing_setup();
    let dataset = generate_dataset(
        &setup,
        200,
        150,
        &SynthParams {
            alpha: 2.0,
            sigma: 0.05,
        },
        13,
    );
    let vd = VoronoiDiagram::build(&setup.connections);
    let rd = RefinedDiagram::build(&setup.connections, 2).unwrap();
    let refined = RefinedPredictor::new(&rd).unwrap();

    let multi = evaluate_multi_leak(&dataset, &refined).unwrap();
    let analysis = invalid_prediction_analysis(&dataset, &refined, &vd).unwrap();

    assert_eq!(analysis.total_invalid, multi.step1.invalid);
    assert!(
        analysis.total_invalid > 0,
        "fixture produced no invalid predictions"
    );
    let histogram_mass: usize = analysis.histogram.values().sum();
    assert_eq!(histogram_mass, analysis.total_invalid);
    let b = &analysis.breakdown;
    assert_eq!(
        b.both + b.first_only + b.second_only + b.neither,
        analysis.total_invalid
    );
    // Every histogram tuple names an empty cell.
    for t in analysis.histogram.keys() {
        assert!(rd.cell(t).unwrap().is_empty);
    }
    // Histogram categories + unobserved empty tuples = all empty tuples.
    let empty_total = rd.cells().len() - rd.nonempty_count();
    assert_eq!(
        analysis.histogram.len() + analysis.unobserved_empty_tuples.len(),
        empty_total
    );
}

#[test]
fn refined_single_leak_invalids_stay_rare() {
    // Single leaks rank two adjacent connections on top almost always, so
    // the refined predictor yields mostly valid predictions.
    let setup = wing_setup();
    let dataset = generate_dataset(
        &setup,
        300,
        0,
        &SynthParams {
            alpha: 3.0,
            sigma: 0.05,
        },
        29,
    );
    let rd = RefinedDiagram::build(&setup.connections, 2).unwrap();
    let refined = RefinedPredictor::new(&rd).unwrap();
    let eval = evaluate_single_leak(&dataset, &refined).unwrap();
    assert!(
        (eval.metrics.invalid as f64) < 0.05 * eval.metrics.total as f64,
        "unexpectedly many invalid predictions: {}",
        eval.metrics.invalid
    );
    // The refined truth label starts with the classic one.
    for o in &eval.outcomes {
        assert_eq!(o.truth.len(), 2);
    }
}

#[test]
fn svg_export_is_deterministic_and_layered() {
    let setup = desk_setup();
    let vd = VoronoiDiagram::build(&setup.connections);
    let rd = RefinedDiagram::build(&setup.connections, 2).unwrap();
    let dataset = generate_dataset(&setup, 30, 0, &SynthParams::default(), 3);
    let classic = ClassicPredictor::new(&vd);
    let eval = evaluate_single_leak(&dataset, &classic).unwrap();

    let marks: Vec<SvgSampleMark> = eval
        .outcomes
        .iter()
        .zip(dataset.single_samples())
        .map(|(o, s)| SvgSampleMark {
            leak: s.leak,
            correct: o.correct,
            projection: None,
        })
        .collect();
    let scene = SvgScene {
        setup: &setup,
        classic: &vd,
        refined: Some(&rd),
        samples: &marks,
    };
    let a = render_svg(&scene);
    let b = render_svg(&scene);
    assert_eq!(a, b);
    for layer in ["surface", "cells", "classic-edges", "sites", "samples"] {
        assert!(
            a.contains(&format!("<g id=\"{layer}\">")),
            "missing layer {layer}"
        );
    }

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("diagram.svg");
    leakloc::io::export_svg(&scene, &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), a);
}

#[test]
fn inventory_json_round_trips_through_serde() {
    let setup = desk_setup();
    let rd = RefinedDiagram::build(&setup.connections, 2).unwrap();
    let inventory = DiagramInventory::from_refined(&setup.name, &rd);
    let json = inventory.to_json();
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(value["order"], 2);
    assert_eq!(value["k"], 6);
    assert_eq!(value["cells"].as_array().unwrap().len(), rd.cells().len());
    assert_eq!(
        value["nonempty_cells"].as_u64().unwrap() as usize,
        rd.nonempty_count()
    );
    let text = inventory.to_text();
    assert!(text.contains("nonempty-cells"));
    assert!(text.contains("cell V_(1,2)"));
}

#[test]
fn truth_labels_partition_the_samples() {
    // Sanity over the whole pipeline: every sample's truth label is a
    // nonempty cell containing its leak.
    let setup = desk_setup();
    let dataset = generate_dataset(&setup, 100, 0, &SynthParams::default(), 17);
    let rd = RefinedDiagram::build(&setup.connections, 2).unwrap();
    let refined = RefinedPredictor::new(&rd).unwrap();
    for s in dataset.single_samples() {
        let truth = refined.truth_label(s.leak);
        let cell = rd.cell(&truth).unwrap();
        assert!(cell.polyhedron.contains(s.leak, 1e-9));
    }
}

#[test]
fn diagrams_are_shareable_across_threads() {
    fn assert_send_sync<T: Send + Sync>() {}
    assert_send_sync::<leakloc::VoronoiDiagram>();
    assert_send_sync::<RefinedDiagram>();
    assert_send_sync::<leakloc::Dataset>();

    // Concurrent queries against one diagram.
    let setup = desk_setup();
    let rd = RefinedDiagram::build(&setup.connections, 2).unwrap();
    let grid = leakloc::generate_leak_grid(&setup.surface, 0.5);
    let rd_ref = &rd;
    std::thread::scope(|scope| {
        for chunk in grid.chunks(grid.len() / 4 + 1) {
            scope.spawn(move || {
                for p in chunk {
                    let t = leakloc::locate_ordered(rd_ref.sites(), *p, 2);
                    assert!(rd_ref.cell(&t).unwrap().polyhedron.contains(*p, 1e-9));
                }
            });
        }
    });
}
