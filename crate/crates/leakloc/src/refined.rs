//! Order-d refined Voronoi diagrams.
//!
//! A refined cell `V_t` for an ordered tuple `t = (i_1,..,i_d)` of distinct
//! site indices holds the points whose d nearest sites are exactly
//! `i_1,..,i_d` in that order. Order 1 is the classic diagram. Each
//! refinement step intersects every order-d cell with the cells of a
//! classic Voronoi diagram over the site set with `i_1,..,i_d` removed; in
//! H-representation the intersection is just the union of the two halfplane
//! lists, so cells stay cheap and possibly redundant halfplanes are kept.
//!
//! Every tuple is stored, including those whose cell has empty interior;
//! emptiness is detected by a dense probe grid over the inflated site
//! bounding box and recorded as a flag, so lookups by tuple always succeed
//! and invalid predictions can be tallied faithfully.

use std::collections::BTreeMap;

use crate::geometry::{
    bisector_halfplane, CellPolyhedron, GeometryError, HalfPlane, IndexTuple, Point, SiteSet,
    VoronoiDiagram,
};

/// Probe-grid divisor: pitch = site bounding-box diagonal / 512.
const PROBE_DIVISOR: f64 = 512.0;
/// The probe box inflates the site bounding box by this fraction per side.
const PROBE_INFLATE: f64 = 0.5;
/// Slack used for the interior test at probe points.
const PROBE_SLACK: f64 = -1e-9;

/// One refined cell plus its emptiness flag.
#[derive(Clone, Debug)]
pub struct RefinedCell {
    pub polyhedron: CellPolyhedron,
    pub is_empty: bool,
}

impl RefinedCell {
    /// The cell as a projection target; empty-flagged cells have none.
    pub fn try_polyhedron(&self) -> Result<&CellPolyhedron, crate::projection::ProjectionError> {
        if self.is_empty {
            Err(crate::projection::ProjectionError::EmptyCell(
                self.polyhedron.label().to_string(),
            ))
        } else {
            Ok(&self.polyhedron)
        }
    }
}

/// The probe grid used for emptiness detection, kept for reporting.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeSpec {
    pub pitch: f64,
    pub min: Point,
    pub max: Point,
}

impl ProbeSpec {
    fn for_sites(sites: &SiteSet) -> ProbeSpec {
        let (min, max) = sites.bounding_box();
        let dx = max.x - min.x;
        let dy = max.y - min.y;
        ProbeSpec {
            pitch: sites.scale() / PROBE_DIVISOR,
            min: Point::new(min.x - PROBE_INFLATE * dx, min.y - PROBE_INFLATE * dy),
            max: Point::new(max.x + PROBE_INFLATE * dx, max.y + PROBE_INFLATE * dy),
        }
    }

    fn points(&self) -> impl Iterator<Item = Point> + '_ {
        let nx = ((self.max.x - self.min.x) / self.pitch).floor() as usize + 1;
        let ny = ((self.max.y - self.min.y) / self.pitch).floor() as usize + 1;
        (0..ny).flat_map(move |j| {
            (0..nx).map(move |i| {
                Point::new(
                    self.min.x + i as f64 * self.pitch,
                    self.min.y + j as f64 * self.pitch,
                )
            })
        })
    }
}

/// Refined Voronoi diagram of a fixed order. Immutable after construction.
#[derive(Clone, Debug)]
pub struct RefinedDiagram {
    sites: SiteSet,
    order: usize,
    cells: BTreeMap<IndexTuple, RefinedCell>,
    probe: ProbeSpec,
}

impl RefinedDiagram {
    /// Builds the order-d diagram by refining the classic diagram d-1 times.
    pub fn build(sites: &SiteSet, order: usize) -> Result<RefinedDiagram, GeometryError> {
        let k = sites.len();
        if order < 1 || order > k {
            return Err(GeometryError::InvalidOrder { order, k });
        }
        let mut diagram = RefinedDiagram::from_classic(&VoronoiDiagram::build(sites));
        while diagram.order < order {
            diagram = diagram.refine_once()?;
        }
        Ok(diagram)
    }

    /// Wraps a classic diagram as the order-1 refined diagram. Classic cells
    /// contain their site strictly, so none is empty.
    pub fn from_classic(vd: &VoronoiDiagram) -> RefinedDiagram {
        let cells = vd
            .cells()
            .iter()
            .map(|c| {
                (
                    c.label().clone(),
                    RefinedCell {
                        polyhedron: c.clone(),
                        is_empty: false,
                    },
                )
            })
            .collect();
        RefinedDiagram {
            sites: vd.sites().clone(),
            order: 1,
            cells,
            probe: ProbeSpec::for_sites(vd.sites()),
        }
    }

    /// One refinement step: every order-d tuple `t` spawns the tuples
    /// `t + (j)` for all `j` not in `t`, whose halfplane list is the
    /// concatenation of `t`'s list with the list of `j`'s cell in the
    /// classic diagram over the sites not in `t`.
    pub fn refine_once(&self) -> Result<RefinedDiagram, GeometryError> {
        let k = self.sites.len();
        if self.order >= k {
            return Err(GeometryError::InvalidOrder {
                order: self.order + 1,
                k,
            });
        }

        // The reduced diagram depends only on the set of removed sites.
        let mut reduced_cache: BTreeMap<Vec<usize>, BTreeMap<usize, Vec<HalfPlane>>> =
            BTreeMap::new();
        let mut cells = BTreeMap::new();

        for (tuple, cell) in &self.cells {
            let mut excluded: Vec<usize> = tuple.indices().to_vec();
            excluded.sort_unstable();
            if !reduced_cache.contains_key(&excluded) {
                let reduced = reduced_voronoi_cells(&self.sites, &excluded)?;
                reduced_cache.insert(excluded.clone(), reduced);
            }
            let reduced = &reduced_cache[&excluded];
            for (&j, extra) in reduced {
                let mut halfplanes = cell.polyhedron.halfplanes().to_vec();
                halfplanes.extend_from_slice(extra);
                let label = tuple.extended(j);
                cells.insert(
                    label.clone(),
                    RefinedCell {
                        polyhedron: CellPolyhedron::new(label, halfplanes),
                        is_empty: true,
                    },
                );
            }
        }

        let mut next = RefinedDiagram {
            sites: self.sites.clone(),
            order: self.order + 1,
            cells,
            probe: self.probe,
        };
        next.flag_nonempty_cells();
        Ok(next)
    }

    /// Marks every cell containing a probe point in its interior as
    /// nonempty. A probe point strictly inside a cell necessarily has that
    /// cell's tuple as its ordered nearest-site tuple, so only the located
    /// tuple needs the membership test.
    fn flag_nonempty_cells(&mut self) {
        let probe = self.probe;
        let sites = self.sites.clone();
        let order = self.order;
        for y in probe.points() {
            let t = locate_ordered(&sites, y, order);
            if let Some(cell) = self.cells.get_mut(&t) {
                if cell.is_empty && cell.polyhedron.contains(y, PROBE_SLACK) {
                    cell.is_empty = false;
                }
            }
        }
    }

    pub fn sites(&self) -> &SiteSet {
        &self.sites
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// All tuples of the order, empty cells included, in tuple order.
    pub fn cells(&self) -> &BTreeMap<IndexTuple, RefinedCell> {
        &self.cells
    }

    pub fn cell(&self, tuple: &IndexTuple) -> Option<&RefinedCell> {
        self.cells.get(tuple)
    }

    pub fn nonempty_count(&self) -> usize {
        self.cells.values().filter(|c| !c.is_empty).count()
    }

    pub fn nonempty_labels(&self) -> Vec<IndexTuple> {
        self.cells
            .iter()
            .filter(|(_, c)| !c.is_empty)
            .map(|(t, _)| t.clone())
            .collect()
    }

    pub fn probe(&self) -> &ProbeSpec {
        &self.probe
    }
}

/// Halfplane lists of the classic Voronoi cells over the sites not in
/// `excluded` (sorted, keyed by original site index). With one remaining
/// site the "cell" is the whole plane; with two it is a single bisector
/// halfplane each.
fn reduced_voronoi_cells(
    sites: &SiteSet,
    excluded: &[usize],
) -> Result<BTreeMap<usize, Vec<HalfPlane>>, GeometryError> {
    let remaining: Vec<usize> = (0..sites.len()).filter(|i| !excluded.contains(i)).collect();
    let mut map = BTreeMap::new();
    match remaining.len() {
        0 => {}
        1 => {
            map.insert(remaining[0], Vec::new());
        }
        2 => {
            let (a, b) = (remaining[0], remaining[1]);
            map.insert(a, vec![bisector_halfplane(a, b, sites)]);
            map.insert(b, vec![bisector_halfplane(b, a, sites)]);
        }
        _ => {
            let points = remaining.iter().map(|&i| sites.point(i)).collect();
            let reduced_sites = SiteSet::new(points)?;
            let vd = VoronoiDiagram::build(&reduced_sites);
            for (local, &orig) in remaining.iter().enumerate() {
                map.insert(orig, vd.cell(local).halfplanes().to_vec());
            }
        }
    }
    Ok(map)
}

/// Indices of the `d` nearest sites to `y`, ascending by distance, ties
/// broken towards the lower site index.
pub fn locate_ordered(sites: &SiteSet, y: Point, d: usize) -> IndexTuple {
    debug_assert!(d >= 1 && d <= sites.len());
    let mut idx: Vec<usize> = (0..sites.len()).collect();
    idx.sort_by(|&a, &b| {
        y.distance_sq(sites.point(a))
            .partial_cmp(&y.distance_sq(sites.point(b)))
            .expect("finite distances")
            .then(a.cmp(&b))
    });
    idx.truncate(d);
    IndexTuple::new(idx, sites.len()).expect("distinct indices")
}

/// The unordered 2-nearest region for `{i, j}`: the union of the order-two
/// cells `V_(i,j)` and `V_(j,i)`.
#[derive(Clone, Debug)]
pub struct MergedPairRegion {
    cells: [CellPolyhedron; 2],
}

impl MergedPairRegion {
    pub fn contains(&self, y: Point, slack: f64) -> bool {
        self.cells.iter().any(|c| c.contains(y, slack))
    }

    pub fn cells(&self) -> &[CellPolyhedron; 2] {
        &self.cells
    }
}

/// Merges `V_(i,j)` and `V_(j,i)` of an order-two diagram into the
/// unordered 2-nearest region of `{i, j}`.
pub fn merge_pair(diagram: &RefinedDiagram, i: usize, j: usize) -> MergedPairRegion {
    assert_eq!(diagram.order(), 2, "pair merge needs an order-two diagram");
    assert_ne!(i, j);
    let a = diagram
        .cell(&IndexTuple::pair(i, j))
        .expect("tuple in range")
        .polyhedron
        .clone();
    let b = diagram
        .cell(&IndexTuple::pair(j, i))
        .expect("tuple in range")
        .polyhedron
        .clone();
    MergedPairRegion { cells: [a, b] }
}
