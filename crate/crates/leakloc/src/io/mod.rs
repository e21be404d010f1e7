//! File formats: setup descriptions, dataset CSV, report output and SVG
//! rendering.
//!
//! The setup file is line-oriented key/value text:
//!
//! ```text
//! # comment
//! name wing
//! surface 0,0 16,0 16,5.2 0,5.2
//! connection 2.0,0.2
//! connection 5.0,5.0
//! ```
//!
//! The dataset file is CSV with a header row `header,1,<k>[,<provenance>]`
//! and one sample per line:
//!
//! ```text
//! id,1,y1,y2,x_1,..,x_k
//! id,2,y1_1,y2_1,y1_2,y2_2,x_1,..,x_k[,link_id_1,link_id_2]
//! ```
//!
//! Connection order is the setup's connection order (1-based in files).
//! Parsing and serializing round-trip exactly; diagnostics carry line
//! numbers. Datasets published elsewhere are expected to be adapted to
//! this schema by a small external converter.

mod svg;

pub use svg::{export_svg, render_svg, SvgSampleMark, SvgScene};

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::evaluation::{Dataset, Provenance, SingleLeakSample, TwoLeakSample};
use crate::geometry::{
    convex_polygon_contains, polygon_signed_area, GeometryError, Point, SiteSet, VoronoiDiagram,
};
use crate::predictors::FlowVector;
use crate::refined::RefinedDiagram;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("invalid setup: {0}")]
    InvalidSetup(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn parse_err(path: &str, line: usize, message: impl Into<String>) -> DataError {
    DataError::Parse {
        path: path.to_string(),
        line,
        message: message.into(),
    }
}

/// A vacuum setup: the convex surface polygon and the ordered connection
/// positions, all in meters.
#[derive(Clone, Debug, PartialEq)]
pub struct SetupConfig {
    pub name: String,
    pub surface: Vec<Point>,
    pub connections: SiteSet,
}

impl SetupConfig {
    pub fn new(
        name: String,
        surface: Vec<Point>,
        connections: SiteSet,
    ) -> Result<SetupConfig, DataError> {
        if surface.len() < 3 {
            return Err(DataError::InvalidSetup(format!(
                "surface needs at least 3 vertices, got {}",
                surface.len()
            )));
        }
        if surface.iter().any(|p| !p.is_finite()) {
            return Err(DataError::InvalidSetup("non-finite surface vertex".into()));
        }
        let mut poly = surface.clone();
        if polygon_signed_area(&poly) < 0.0 {
            poly.reverse();
        }
        let scale = crate::geometry::bounding_box_diagonal(&poly);
        if polygon_signed_area(&poly) <= 1e-12 * scale * scale {
            return Err(DataError::InvalidSetup(
                "surface polygon has no area".into(),
            ));
        }
        let n = poly.len();
        for i in 0..n {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            let c = poly[(i + 2) % n];
            if (b - a).cross(c - b) < -1e-9 * scale * scale {
                return Err(DataError::InvalidSetup(
                    "surface polygon is not convex".into(),
                ));
            }
        }
        for (i, p) in connections.points().iter().enumerate() {
            if !convex_polygon_contains(&poly, *p, 1e-9 * scale) {
                return Err(DataError::InvalidSetup(format!(
                    "connection {} at {} lies outside the surface",
                    i + 1,
                    p
                )));
            }
        }
        Ok(SetupConfig {
            name,
            surface: poly,
            connections,
        })
    }

    pub fn k(&self) -> usize {
        self.connections.len()
    }

    pub fn surface_contains(&self, p: Point) -> bool {
        let scale = crate::geometry::bounding_box_diagonal(&self.surface);
        convex_polygon_contains(&self.surface, p, 1e-6 * scale)
    }
}

fn parse_point(token: &str) -> Option<Point> {
    let (x, y) = token.split_once(',')?;
    let x: f64 = x.trim().parse().ok()?;
    let y: f64 = y.trim().parse().ok()?;
    let p = Point::new(x, y);
    p.is_finite().then_some(p)
}

/// Parses the setup text format; `path` is used in diagnostics only.
pub fn parse_setup(text: &str, path: &str) -> Result<SetupConfig, DataError> {
    let mut name: Option<String> = None;
    let mut surface: Vec<Point> = Vec::new();
    let mut connections: Vec<Point> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match key {
            "name" => {
                if rest.is_empty() {
                    return Err(parse_err(path, line_no, "empty setup name"));
                }
                name = Some(rest.to_string());
            }
            "surface" => {
                for token in rest.split_whitespace() {
                    let p = parse_point(token).ok_or_else(|| {
                        parse_err(path, line_no, format!("bad surface vertex '{token}'"))
                    })?;
                    surface.push(p);
                }
            }
            "connection" => {
                let p = parse_point(rest).ok_or_else(|| {
                    parse_err(path, line_no, format!("bad connection position '{rest}'"))
                })?;
                connections.push(p);
            }
            other => {
                return Err(parse_err(path, line_no, format!("unknown key '{other}'")));
            }
        }
    }

    let name = name.ok_or_else(|| parse_err(path, 0, "missing 'name' line"))?;
    if surface.is_empty() {
        return Err(parse_err(path, 0, "missing 'surface' line"));
    }
    let sites = SiteSet::new(connections)?;
    SetupConfig::new(name, surface, sites)
}

pub fn load_setup(path: impl AsRef<Path>) -> Result<SetupConfig, DataError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_setup(&text, &path.display().to_string())
}

/// Serializes a setup in the text format accepted by [`parse_setup`].
pub fn setup_to_string(setup: &SetupConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "name {}", setup.name);
    let mut line = String::from("surface");
    for v in &setup.surface {
        let _ = write!(line, " {},{}", v.x, v.y);
    }
    let _ = writeln!(out, "{line}");
    for c in setup.connections.points() {
        let _ = writeln!(out, "connection {},{}", c.x, c.y);
    }
    out
}

pub fn save_setup(setup: &SetupConfig, path: impl AsRef<Path>) -> Result<(), DataError> {
    fs::write(path, setup_to_string(setup))?;
    Ok(())
}

/// Parses the dataset CSV; returns the dataset plus non-fatal warnings
/// (missing or unresolvable links).
pub fn parse_dataset(
    text: &str,
    path: &str,
    setup: &SetupConfig,
) -> Result<(Dataset, Vec<String>), DataError> {
    let k = setup.k();
    let mut warnings = Vec::new();
    let mut single: Vec<SingleLeakSample> = Vec::new();
    let mut two_leak: Vec<TwoLeakSample> = Vec::new();
    let mut ids = std::collections::BTreeSet::new();
    let mut header_seen = false;
    let mut provenance = Provenance::Original;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();

        if !header_seen {
            if fields.first() != Some(&"header") {
                return Err(parse_err(path, line_no, "expected 'header,<version>,<k>'"));
            }
            if fields.len() < 3 || fields.len() > 4 {
                return Err(parse_err(path, line_no, "malformed header"));
            }
            if fields[1] != "1" {
                return Err(parse_err(
                    path,
                    line_no,
                    format!("unsupported schema version '{}'", fields[1]),
                ));
            }
            let file_k: usize = fields[2]
                .parse()
                .map_err(|_| parse_err(path, line_no, "bad connection count in header"))?;
            if file_k != k {
                return Err(parse_err(
                    path,
                    line_no,
                    format!("dataset has k={file_k} but the setup has k={k}"),
                ));
            }
            if let Some(p) = fields.get(3) {
                provenance = match *p {
                    "original" => Provenance::Original,
                    "cleaned" => Provenance::Cleaned,
                    other => {
                        return Err(parse_err(
                            path,
                            line_no,
                            format!("unknown provenance '{other}'"),
                        ))
                    }
                };
            }
            header_seen = true;
            continue;
        }

        let id = fields[0].to_string();
        if id.is_empty() {
            return Err(parse_err(path, line_no, "empty sample id"));
        }
        if !ids.insert(id.clone()) {
            return Err(parse_err(
                path,
                line_no,
                format!("duplicate sample id '{id}'"),
            ));
        }
        let n_leaks: usize = fields
            .get(1)
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| parse_err(path, line_no, "bad leak count"))?;

        let parse_f64 = |field: &str| -> Result<f64, DataError> {
            field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(path, line_no, format!("bad number '{field}'")))
        };
        let parse_leak = |xf: &str, yf: &str| -> Result<Point, DataError> {
            let p = Point::new(parse_f64(xf)?, parse_f64(yf)?);
            if !setup.surface_contains(p) {
                return Err(parse_err(
                    path,
                    line_no,
                    format!("leak {p} lies outside the surface"),
                ));
            }
            Ok(p)
        };
        let parse_flows = |fields: &[&str]| -> Result<FlowVector, DataError> {
            let values = fields
                .iter()
                .map(|f| parse_f64(f))
                .collect::<Result<Vec<f64>, _>>()?;
            FlowVector::new(values)
                .map_err(|e| parse_err(path, line_no, format!("bad flow vector: {e}")))
        };

        match n_leaks {
            1 => {
                if fields.len() != 4 + k {
                    return Err(parse_err(
                        path,
                        line_no,
                        format!(
                            "expected {} fields for a single-leak row, got {}",
                            4 + k,
                            fields.len()
                        ),
                    ));
                }
                let leak = parse_leak(fields[2], fields[3])?;
                let flows = parse_flows(&fields[4..4 + k])?;
                single.push(SingleLeakSample { id, flows, leak });
            }
            2 => {
                let with_links = fields.len() == 8 + k;
                if !with_links && fields.len() != 6 + k {
                    return Err(parse_err(
                        path,
                        line_no,
                        format!(
                            "expected {} or {} fields for a two-leak row, got {}",
                            6 + k,
                            8 + k,
                            fields.len()
                        ),
                    ));
                }
                let leak1 = parse_leak(fields[2], fields[3])?;
                let leak2 = parse_leak(fields[4], fields[5])?;
                let flows = parse_flows(&fields[6..6 + k])?;
                let links = if with_links {
                    Some([fields[6 + k].to_string(), fields[7 + k].to_string()])
                } else {
                    warnings.push(format!(
                        "{path}:{line_no}: two-leak sample '{id}' has no links; the repeated strategy cannot run on it"
                    ));
                    None
                };
                two_leak.push(TwoLeakSample {
                    id,
                    flows,
                    leaks: [leak1, leak2],
                    links,
                });
            }
            other => {
                return Err(parse_err(
                    path,
                    line_no,
                    format!("leak count {other} not in {{1,2}}"),
                ));
            }
        }
    }

    if !header_seen {
        return Err(parse_err(path, 0, "missing header line"));
    }

    let dataset = Dataset::new(k, provenance, single, two_leak);
    for t in dataset.two_leak_samples() {
        if let Some(links) = &t.links {
            for link in links {
                if dataset.single_by_id(link).is_none() {
                    warnings.push(format!(
                        "dataset: two-leak sample '{}' links to unknown sample '{}'",
                        t.id, link
                    ));
                }
            }
        }
    }
    Ok((dataset, warnings))
}

pub fn load_dataset(
    path: impl AsRef<Path>,
    setup: &SetupConfig,
) -> Result<(Dataset, Vec<String>), DataError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_dataset(&text, &path.display().to_string(), setup)
}

/// Serializes a dataset in the CSV schema accepted by [`parse_dataset`].
pub fn dataset_to_string(dataset: &Dataset) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "header,1,{},{}", dataset.k, dataset.provenance);
    for s in dataset.single_samples() {
        let _ = write!(out, "{},1,{},{}", s.id, s.leak.x, s.leak.y);
        for v in s.flows.values() {
            let _ = write!(out, ",{v}");
        }
        let _ = writeln!(out);
    }
    for t in dataset.two_leak_samples() {
        let _ = write!(
            out,
            "{},2,{},{},{},{}",
            t.id, t.leaks[0].x, t.leaks[0].y, t.leaks[1].x, t.leaks[1].y
        );
        for v in t.flows.values() {
            let _ = write!(out, ",{v}");
        }
        if let Some([a, b]) = &t.links {
            let _ = write!(out, ",{a},{b}");
        }
        let _ = writeln!(out);
    }
    out
}

pub fn save_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<(), DataError> {
    fs::write(path, dataset_to_string(dataset))?;
    Ok(())
}

/// Writes a rendered report verbatim.
pub fn save_report(text: &str, path: impl AsRef<Path>) -> Result<(), DataError> {
    fs::write(path, text)?;
    Ok(())
}

/// Machine-readable cell inventory of a diagram build.
#[derive(Clone, Debug, Serialize)]
pub struct DiagramInventory {
    pub setup: String,
    pub k: usize,
    pub order: usize,
    /// Pitch of the emptiness probe grid (refined diagrams only).
    pub probe_pitch_m: Option<f64>,
    pub nonempty_cells: usize,
    pub cells: Vec<CellInventoryEntry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CellInventoryEntry {
    pub label: String,
    pub nonempty: bool,
    pub halfplanes: usize,
}

impl DiagramInventory {
    pub fn from_classic(setup_name: &str, vd: &VoronoiDiagram) -> DiagramInventory {
        let cells: Vec<CellInventoryEntry> = vd
            .cells()
            .iter()
            .map(|c| CellInventoryEntry {
                label: format!("V_{}", c.label()),
                nonempty: true,
                halfplanes: c.halfplanes().len(),
            })
            .collect();
        DiagramInventory {
            setup: setup_name.to_string(),
            k: vd.k(),
            order: 1,
            probe_pitch_m: None,
            nonempty_cells: cells.len(),
            cells,
        }
    }

    pub fn from_refined(setup_name: &str, rd: &RefinedDiagram) -> DiagramInventory {
        let cells: Vec<CellInventoryEntry> = rd
            .cells()
            .iter()
            .map(|(t, c)| CellInventoryEntry {
                label: format!("V_{t}"),
                nonempty: !c.is_empty,
                halfplanes: c.polyhedron.halfplanes().len(),
            })
            .collect();
        DiagramInventory {
            setup: setup_name.to_string(),
            k: rd.sites().len(),
            order: rd.order(),
            probe_pitch_m: Some(rd.probe().pitch),
            nonempty_cells: rd.nonempty_count(),
            cells,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "setup {}", self.setup);
        let _ = writeln!(out, "k {}", self.k);
        let _ = writeln!(out, "order {}", self.order);
        if let Some(p) = self.probe_pitch_m {
            let _ = writeln!(out, "probe-pitch-m {p:.6}");
        }
        let _ = writeln!(out, "nonempty-cells {}", self.nonempty_cells);
        for c in &self.cells {
            let _ = writeln!(
                out,
                "cell {} {} halfplanes {}",
                c.label,
                if c.nonempty { "nonempty" } else { "empty" },
                c.halfplanes
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("inventory serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthesis::{generate_dataset, SynthParams};

    fn square_setup_text() -> &'static str {
        "# three connections on a square\n\
         name square\n\
         surface 0,0 4,0 4,4 0,4\n\
         connection 0.5,0.5\n\
         connection 3.5,0.6\n\
         connection 2.0,3.5\n"
    }

    #[test]
    fn minimal_setup_parses() {
        let setup = parse_setup(square_setup_text(), "mem").unwrap();
        assert_eq!(setup.name, "square");
        assert_eq!(setup.k(), 3);
        assert_eq!(setup.surface.len(), 4);
    }

    #[test]
    fn connection_outside_surface_is_rejected() {
        let text = "name bad\nsurface 0,0 1,0 1,1 0,1\nconnection 0.5,0.5\nconnection 2.0,0.5\nconnection 0.2,0.8\n";
        match parse_setup(text, "mem") {
            Err(DataError::InvalidSetup(msg)) => assert!(msg.contains("outside")),
            other => panic!("expected InvalidSetup, got {other:?}"),
        }
    }

    #[test]
    fn non_convex_surface_is_rejected() {
        let text = "name bad\nsurface 0,0 4,0 1,1 0,4\nconnection 0.5,0.5\nconnection 1.5,0.5\nconnection 0.7,1.5\n";
        assert!(matches!(
            parse_setup(text, "mem"),
            Err(DataError::InvalidSetup(_))
        ));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "name x\nsurface 0,0 4,0 4,4 0,4\nconnection nonsense\n";
        match parse_setup(text, "setup.txt") {
            Err(DataError::Parse { path, line, .. }) => {
                assert_eq!(path, "setup.txt");
                assert_eq!(line, 3);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn setup_round_trips() {
        let setup = parse_setup(square_setup_text(), "mem").unwrap();
        let text = setup_to_string(&setup);
        let again = parse_setup(&text, "mem").unwrap();
        assert_eq!(setup, again);
    }

    #[test]
    fn single_leak_row_parses() {
        let setup = parse_setup(square_setup_text(), "mem").unwrap();
        let text = "header,1,3\nfoo,1,1.0,1.25,0.9,0.3,0.2\n";
        let (dataset, warnings) = parse_dataset(text, "mem", &setup).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(dataset.single_samples().len(), 1);
        let s = &dataset.single_samples()[0];
        assert_eq!(s.id, "foo");
        assert_eq!(s.leak, Point::new(1.0, 1.25));
        assert_eq!(s.flows.values(), &[0.9, 0.3, 0.2]);
    }

    #[test]
    fn two_leak_row_without_links_warns() {
        let setup = parse_setup(square_setup_text(), "mem").unwrap();
        let text = "header,1,3\nt1,2,1.0,1.0,3.0,3.0,0.9,0.3,0.2\n";
        let (dataset, warnings) = parse_dataset(text, "mem", &setup).unwrap();
        assert_eq!(dataset.two_leak_samples().len(), 1);
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("no links"));
    }

    #[test]
    fn wrong_field_count_reports_the_row() {
        let setup = parse_setup(square_setup_text(), "mem").unwrap();
        let text = "header,1,3\nbad,1,1.0,1.0,0.9,0.3\n";
        match parse_dataset(text, "data.csv", &setup) {
            Err(DataError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn header_k_mismatch_is_rejected() {
        let setup = parse_setup(square_setup_text(), "mem").unwrap();
        let text = "header,1,5\n";
        assert!(matches!(
            parse_dataset(text, "mem", &setup),
            Err(DataError::Parse { .. })
        ));
    }

    #[test]
    fn dataset_round_trips_exactly() {
        let setup = parse_setup(square_setup_text(), "mem").unwrap();
        let dataset = generate_dataset(
            &setup,
            12,
            6,
            &SynthParams {
                alpha: 3.0,
                sigma: 0.4,
            },
            9,
        );
        let text = dataset_to_string(&dataset);
        let (again, warnings) = parse_dataset(&text, "mem", &setup).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(dataset, again);
    }
}
