//! World-space placement geometry: bounding boxes, connectors and the
//! occupancy grid used as collision ground truth.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::catalog::{Catalog, PartSpec, PLATE_HEIGHT, STUD_PITCH};
use crate::math::{Vec3, COORD_TOLERANCE};
use crate::model::{PartRef, Placement};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown part `{0}`")]
pub struct UnknownPart(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn from_points(points: impl IntoIterator<Item = Vec3>) -> Option<Aabb> {
        let mut it = points.into_iter();
        let first = it.next()?;
        Some(it.fold(Aabb { min: first, max: first }, |b, p| Aabb { min: b.min.min(p), max: b.max.max(p) }))
    }

    pub fn size(&self) -> Vec3 {
        self.max - self.min
    }

    /// Positive-volume intersection: the boxes overlap by more than `tol` on every axis.
    pub fn overlaps(&self, o: &Aabb, tol: f64) -> bool {
        let ov = |a0: f64, a1: f64, b0: f64, b1: f64| a1.min(b1) - a0.max(b0) > tol;
        ov(self.min.x, self.max.x, o.min.x, o.max.x)
            && ov(self.min.y, self.max.y, o.min.y, o.max.y)
            && ov(self.min.z, self.max.z, o.min.z, o.max.z)
    }

    /// The bottom face sits on the ground plane (y = 0).
    pub fn on_ground(&self) -> bool {
        self.max.y.abs() <= COORD_TOLERANCE
    }
}

fn spec_for<'c>(p: &Placement, catalog: &'c Catalog) -> Result<&'c PartSpec, UnknownPart> {
    match &p.part {
        PartRef::Known(id) => catalog.get(id).ok_or_else(|| UnknownPart(id.clone())),
        PartRef::Unknown(f) => Err(UnknownPart(f.clone())),
    }
}

fn to_world(p: &Placement, local: Vec3) -> Vec3 {
    p.orientation.transform(local) + p.position
}

/// Body box of a spec under a placement's pose. Studs are not part of the body.
pub fn bbox_of(spec: &PartSpec, p: &Placement) -> Aabb {
    let (hx, hz) = spec.half_extents();
    let h = f64::from(spec.height_ldu);
    let corners = [-hx, hx]
        .into_iter()
        .flat_map(|x| [-h, 0.0].into_iter().flat_map(move |y| [-hz, hz].into_iter().map(move |z| Vec3::new(x, y, z))));
    Aabb::from_points(corners.map(|c| to_world(p, c))).expect("eight corners")
}

pub fn world_bbox(p: &Placement, catalog: &Catalog) -> Result<Aabb, UnknownPart> {
    spec_for(p, catalog).map(|s| bbox_of(s, p))
}

pub fn world_studs(p: &Placement, catalog: &Catalog) -> Result<Vec<Vec3>, UnknownPart> {
    spec_for(p, catalog).map(|s| s.studs.iter().map(|&c| to_world(p, c)).collect())
}

pub fn world_sockets(p: &Placement, catalog: &Catalog) -> Result<Vec<Vec3>, UnknownPart> {
    spec_for(p, catalog).map(|s| s.sockets.iter().map(|&c| to_world(p, c)).collect())
}

/// Integer occupancy cell: one stud pitch wide and deep, one plate high.
pub type Cell = [i64; 3];

/// Cell size in LDU along x, y, z.
pub const CELL_SIZE: [f64; 3] = [STUD_PITCH, PLATE_HEIGHT as f64, STUD_PITCH];

/// Horizontal phase of the occupancy grid: cell boundaries sit at
/// `phase + k * 20` on x and z. Vertical boundaries are always multiples of 8.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Lattice {
    pub phase_x: f64,
    pub phase_z: f64,
}

fn phase_of(v: f64) -> f64 {
    let r = v.round().rem_euclid(STUD_PITCH);
    if r >= STUD_PITCH - COORD_TOLERANCE {
        0.0
    } else {
        r
    }
}

fn cell_span(lo: f64, hi: f64, phase: f64, size: f64) -> std::ops::RangeInclusive<i64> {
    let eps = COORD_TOLERANCE / size;
    let first = ((lo - phase) / size + eps).floor() as i64;
    let last = ((hi - phase) / size - eps).ceil() as i64 - 1;
    first..=last
}

impl Lattice {
    /// The lattice on which this box's edges fall.
    pub fn of_bbox(b: &Aabb) -> Lattice {
        Lattice { phase_x: phase_of(b.min.x), phase_z: phase_of(b.min.z) }
    }

    /// Majority lattice of a set of boxes (ties go to the smaller phase).
    pub fn detect<'a>(boxes: impl IntoIterator<Item = &'a Aabb>) -> Lattice {
        let mut xs = [0usize; 20];
        let mut zs = [0usize; 20];
        for b in boxes {
            let l = Lattice::of_bbox(b);
            xs[l.phase_x as usize % 20] += 1;
            zs[l.phase_z as usize % 20] += 1;
        }
        let best = |h: &[usize; 20]| {
            (0..20).max_by_key(|&i| (h[i], std::cmp::Reverse(i))).unwrap_or(0) as f64
        };
        Lattice { phase_x: best(&xs), phase_z: best(&zs) }
    }

    /// All cells the box intersects with positive volume.
    pub fn cells(&self, b: &Aabb) -> Vec<Cell> {
        let xs = cell_span(b.min.x, b.max.x, self.phase_x, CELL_SIZE[0]);
        let ys = cell_span(b.min.y, b.max.y, 0.0, CELL_SIZE[1]);
        let zs = cell_span(b.min.z, b.max.z, self.phase_z, CELL_SIZE[2]);
        let mut out = Vec::new();
        for x in xs {
            for y in ys.clone() {
                for z in zs.clone() {
                    out.push([x, y, z]);
                }
            }
        }
        out
    }
}

/// Occupancy cells of a single placement, on the lattice its own edges define.
pub fn occupancy_cells(p: &Placement, catalog: &Catalog) -> Result<BTreeSet<Cell>, UnknownPart> {
    let b = world_bbox(p, catalog)?;
    Ok(Lattice::of_bbox(&b).cells(&b).into_iter().collect())
}

/// A placement with its geometry resolved once.
#[derive(Debug, Clone)]
pub struct Resolved {
    /// Index into the flattened placement list.
    pub index: usize,
    pub bbox: Aabb,
    pub studs: Vec<Vec3>,
    pub sockets: Vec<Vec3>,
}

impl Resolved {
    pub fn new(index: usize, p: &Placement, catalog: &Catalog) -> Result<Resolved, UnknownPart> {
        let spec = spec_for(p, catalog)?;
        Ok(Resolved {
            index,
            bbox: bbox_of(spec, p),
            studs: spec.studs.iter().map(|&c| to_world(p, c)).collect(),
            sockets: spec.sockets.iter().map(|&c| to_world(p, c)).collect(),
        })
    }

    pub fn on_ground(&self) -> bool {
        self.bbox.on_ground()
    }
}

/// Resolve every known placement, returning the unknown indices separately.
pub fn resolve_all(placements: &[Placement], catalog: &Catalog) -> (Vec<Resolved>, Vec<usize>) {
    let mut ok = Vec::with_capacity(placements.len());
    let mut unknown = Vec::new();
    for (i, p) in placements.iter().enumerate() {
        match Resolved::new(i, p, catalog) {
            Ok(r) => ok.push(r),
            Err(_) => unknown.push(i),
        }
    }
    (ok, unknown)
}

/// Number of stud/socket coincidences where `upper`'s sockets receive `lower`'s studs.
pub fn stud_matings(lower: &Resolved, upper: &Resolved) -> usize {
    lower
        .studs
        .iter()
        .filter(|s| upper.sockets.iter().any(|k| s.approx_eq(*k, COORD_TOLERANCE)))
        .count()
}
