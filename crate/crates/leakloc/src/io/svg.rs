//! SVG rendering of diagrams, sites and evaluated samples.
//!
//! Layer structure (one `<g>` per layer): the surface outline, the cell
//! polygons clipped to the surface, an extra classic-edge layer when a
//! refined diagram is drawn on top of its classic diagram, the connection
//! sites, and optional sample marks (circle = correct, cross = incorrect,
//! dashed segment from a missed leak to its projection). Output is plain
//! SVG 1.1, byte-identical for identical inputs.

use std::fs;
use std::path::Path;

use super::{DataError, SetupConfig};
use crate::geometry::{Point, VoronoiDiagram};
use crate::refined::RefinedDiagram;

/// One evaluated leak to draw.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvgSampleMark {
    pub leak: Point,
    pub correct: bool,
    /// Projection onto the predicted cell, drawn as a dashed segment when
    /// it differs from the leak.
    pub projection: Option<Point>,
}

/// Everything one image shows.
#[derive(Clone, Copy, Debug)]
pub struct SvgScene<'a> {
    pub setup: &'a SetupConfig,
    pub classic: &'a VoronoiDiagram,
    /// Drawn instead of the classic cells when present; the classic cell
    /// boundaries then move to their own layer in a second color.
    pub refined: Option<&'a RefinedDiagram>,
    pub samples: &'a [SvgSampleMark],
}

const WIDTH_PX: f64 = 1000.0;
const MARGIN_FRAC: f64 = 0.05;

struct Frame {
    scale: f64,
    min: Point,
    max: Point,
    pad: f64,
}

impl Frame {
    fn new(surface: &[Point]) -> Frame {
        let (min, max) = crate::geometry::bounding_box(surface);
        let extent = (max.x - min.x).max(max.y - min.y);
        let pad = MARGIN_FRAC * extent;
        let scale = WIDTH_PX / (max.x - min.x + 2.0 * pad);
        Frame {
            scale,
            min,
            max,
            pad,
        }
    }

    fn width(&self) -> f64 {
        (self.max.x - self.min.x + 2.0 * self.pad) * self.scale
    }

    fn height(&self) -> f64 {
        (self.max.y - self.min.y + 2.0 * self.pad) * self.scale
    }

    // SVG y grows downward; flip.
    fn map(&self, p: Point) -> (f64, f64) {
        (
            (p.x - self.min.x + self.pad) * self.scale,
            (self.max.y - p.y + self.pad) * self.scale,
        )
    }
}

fn path_from(frame: &Frame, poly: &[Point]) -> String {
    let mut d = String::new();
    for (i, p) in poly.iter().enumerate() {
        let (x, y) = frame.map(*p);
        d.push_str(if i == 0 { "M" } else { "L" });
        d.push_str(&format!("{x:.3} {y:.3} "));
    }
    d.push('Z');
    d
}

/// Renders the scene to an SVG string.
pub fn render_svg(scene: &SvgScene<'_>) -> String {
    let frame = Frame::new(&scene.setup.surface);
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {:.3} {:.3}\">\n",
        frame.width(),
        frame.height(),
        frame.width(),
        frame.height()
    ));

    out.push_str("<g id=\"surface\">\n");
    out.push_str(&format!(
        "<path d=\"{}\" fill=\"#fcfcfc\" stroke=\"#444444\" stroke-width=\"1.5\"/>\n",
        path_from(&frame, &scene.setup.surface)
    ));
    out.push_str("</g>\n");

    out.push_str("<g id=\"cells\">\n");
    match scene.refined {
        Some(rd) => {
            for (_, cell) in rd.cells().iter().filter(|(_, c)| !c.is_empty) {
                let poly = cell.polyhedron.clip_to_surface(&scene.setup.surface);
                if poly.len() >= 3 {
                    out.push_str(&format!(
                        "<path d=\"{}\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1\"/>\n",
                        path_from(&frame, &poly)
                    ));
                }
            }
        }
        None => {
            for cell in scene.classic.cells() {
                let poly = cell.clip_to_surface(&scene.setup.surface);
                if poly.len() >= 3 {
                    out.push_str(&format!(
                        "<path d=\"{}\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1\"/>\n",
                        path_from(&frame, &poly)
                    ));
                }
            }
        }
    }
    out.push_str("</g>\n");

    if scene.refined.is_some() {
        out.push_str("<g id=\"classic-edges\">\n");
        for cell in scene.classic.cells() {
            let poly = cell.clip_to_surface(&scene.setup.surface);
            if poly.len() >= 3 {
                out.push_str(&format!(
                    "<path d=\"{}\" fill=\"none\" stroke=\"#e07a1f\" stroke-width=\"2\"/>\n",
                    path_from(&frame, &poly)
                ));
            }
        }
        out.push_str("</g>\n");
    }

    out.push_str("<g id=\"sites\">\n");
    for (i, p) in scene.setup.connections.points().iter().enumerate() {
        let (x, y) = frame.map(*p);
        out.push_str(&format!(
            "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"4\" fill=\"#1f5fae\"/>\n"
        ));
        out.push_str(&format!(
            "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"12\" fill=\"#1f5fae\">{}</text>\n",
            x + 6.0,
            y - 6.0,
            i + 1
        ));
    }
    out.push_str("</g>\n");

    if !scene.samples.is_empty() {
        out.push_str("<g id=\"samples\">\n");
        for mark in scene.samples {
            let (x, y) = frame.map(mark.leak);
            if mark.correct {
                out.push_str(&format!(
                    "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"3\" fill=\"none\" stroke=\"#2a8a2a\" stroke-width=\"1.2\"/>\n"
                ));
            } else {
                let s = 3.0;
                out.push_str(&format!(
                    "<path d=\"M{:.3} {:.3} L{:.3} {:.3} M{:.3} {:.3} L{:.3} {:.3}\" stroke=\"#c22222\" stroke-width=\"1.2\"/>\n",
                    x - s, y - s, x + s, y + s, x - s, y + s, x + s, y - s
                ));
            }
            if let Some(proj) = mark.projection {
                if proj.distance(mark.leak) > 1e-9 {
                    let (px, py) = frame.map(proj);
                    out.push_str(&format!(
                        "<line x1=\"{x:.3}\" y1=\"{y:.3}\" x2=\"{px:.3}\" y2=\"{py:.3}\" stroke=\"#555555\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>\n"
                    ));
                }
            }
        }
        out.push_str("</g>\n");
    }

    out.push_str("</svg>\n");
    out
}

/// Renders and writes the scene.
pub fn export_svg(scene: &SvgScene<'_>, path: impl AsRef<Path>) -> Result<(), DataError> {
    fs::write(path, render_svg(scene))?;
    Ok(())
}
