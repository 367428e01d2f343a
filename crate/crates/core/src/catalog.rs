//! Part registry: footprints, connector layouts and LDraw filenames.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math::Vec3;

/// Distance between adjacent studs.
pub const STUD_PITCH: f64 = 20.0;
pub const BRICK_HEIGHT: u32 = 24;
pub const PLATE_HEIGHT: u32 = 8;
/// Physical millimetres per LDU.
pub const MM_PER_LDU: f64 = 0.4;

const DEFAULT_CATALOG: &str = include_str!("../data/catalog.toml");

pub fn ldu_to_mm(ldu: f64) -> f64 {
    ldu * MM_PER_LDU
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("catalog syntax: {0}")]
    Syntax(String),
    #[error("part entry #{index}: missing field `{field}`")]
    MissingField { index: usize, field: &'static str },
    #[error("duplicate part id `{0}`")]
    DuplicateId(String),
    #[error("ldraw file `{file}` is mapped by both `{first}` and `{second}`")]
    DuplicateFile { file: String, first: String, second: String },
    #[error("part `{id}`: {reason}")]
    InvalidGeometry { id: String, reason: String },
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("reading catalog: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no part `{0}` in catalog")]
pub struct NotFound(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Brick,
    Plate,
    Round,
    Cone,
    Arch,
    Specialty,
}

impl Family {
    fn parse(s: &str) -> Option<Family> {
        Some(match s.to_ascii_lowercase().as_str() {
            "brick" => Family::Brick,
            "plate" => Family::Plate,
            "round" => Family::Round,
            "cone" => Family::Cone,
            "arch" => Family::Arch,
            "specialty" => Family::Specialty,
            _ => return None,
        })
    }

    /// Rough grams per stud of footprint, used when an entry has no mass.
    fn grams_per_stud(self) -> f64 {
        match self {
            Family::Brick | Family::Round | Family::Arch => 0.5,
            Family::Plate | Family::Specialty => 0.25,
            Family::Cone => 0.3,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Brick => "brick",
            Family::Plate => "plate",
            Family::Round => "round",
            Family::Cone => "cone",
            Family::Arch => "arch",
            Family::Specialty => "specialty",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartSpec {
    pub id: String,
    pub ldraw_file: String,
    pub family: Family,
    /// (width along x, depth along z) in studs.
    pub footprint_studs: (u32, u32),
    pub height_ldu: u32,
    pub studs: Vec<Vec3>,
    pub sockets: Vec<Vec3>,
    pub mass_g: Option<f64>,
    pub display_name: String,
}

impl PartSpec {
    /// Catalogued mass, or a per-family estimate. The flag is true for estimates.
    pub fn mass_or_estimate(&self) -> (f64, bool) {
        match self.mass_g {
            Some(m) => (m, false),
            None => {
                let area = f64::from(self.footprint_studs.0 * self.footprint_studs.1);
                (area * self.family.grams_per_stud(), true)
            }
        }
    }

    /// Half extents of the body in LDU along x and z.
    pub fn half_extents(&self) -> (f64, f64) {
        (
            f64::from(self.footprint_studs.0) * STUD_PITCH / 2.0,
            f64::from(self.footprint_studs.1) * STUD_PITCH / 2.0,
        )
    }
}

/// Studs on the top face of a centred `w`×`d` footprint.
pub fn grid_connectors(w: u32, d: u32, y: f64) -> Vec<Vec3> {
    let x0 = -(f64::from(w) - 1.0) * STUD_PITCH / 2.0;
    let z0 = -(f64::from(d) - 1.0) * STUD_PITCH / 2.0;
    let mut out = Vec::with_capacity((w * d) as usize);
    for i in 0..w {
        for j in 0..d {
            out.push(Vec3::new(x0 + f64::from(i) * STUD_PITCH, y, z0 + f64::from(j) * STUD_PITCH));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    parts: BTreeMap<String, PartSpec>,
    /// lower-cased ldraw filename -> id
    file_index: BTreeMap<String, String>,
    palette: BTreeSet<u32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCatalog {
    #[serde(default)]
    palette: Vec<u32>,
    #[serde(default)]
    part: Vec<RawPart>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPart {
    id: Option<String>,
    file: Option<String>,
    family: Option<String>,
    w: Option<u32>,
    d: Option<u32>,
    h: Option<u32>,
    mass: Option<f64>,
    name: Option<String>,
    studs: Option<Vec<[f64; 3]>>,
    sockets: Option<Vec<[f64; 3]>>,
}

impl Catalog {
    /// The catalog shipped with the crate.
    pub fn builtin() -> Catalog {
        Catalog::from_toml_str(DEFAULT_CATALOG).expect("builtin catalog is valid")
    }

    pub fn load(path: &Path) -> Result<Catalog, CatalogError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CatalogError::Io(format!("{}: {e}", path.display())))?;
        Catalog::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Catalog, CatalogError> {
        let raw: RawCatalog = toml::from_str(text).map_err(|e| CatalogError::Syntax(e.to_string()))?;
        let mut catalog = Catalog {
            parts: BTreeMap::new(),
            file_index: BTreeMap::new(),
            palette: raw.palette.into_iter().collect(),
        };
        for (index, p) in raw.part.into_iter().enumerate() {
            catalog.insert(build_spec(index, p)?)?;
        }
        Ok(catalog)
    }

    pub fn insert(&mut self, spec: PartSpec) -> Result<(), CatalogError> {
        if self.parts.contains_key(&spec.id) {
            return Err(CatalogError::DuplicateId(spec.id));
        }
        let key = spec.ldraw_file.to_ascii_lowercase();
        if let Some(first) = self.file_index.get(&key) {
            return Err(CatalogError::DuplicateFile {
                file: spec.ldraw_file,
                first: first.clone(),
                second: spec.id,
            });
        }
        self.file_index.insert(key, spec.id.clone());
        self.parts.insert(spec.id.clone(), spec);
        Ok(())
    }

    /// Resolve by part id first, then by LDraw filename (case-insensitive).
    pub fn lookup(&self, key: &str) -> Result<&PartSpec, NotFound> {
        self.get(key)
            .or_else(|| self.by_file(key))
            .ok_or_else(|| NotFound(key.to_string()))
    }

    pub fn get(&self, id: &str) -> Option<&PartSpec> {
        self.parts.get(id)
    }

    pub fn by_file(&self, file: &str) -> Option<&PartSpec> {
        self.file_index
            .get(&file.to_ascii_lowercase())
            .and_then(|id| self.parts.get(id))
    }

    pub fn parts(&self) -> impl Iterator<Item = &PartSpec> {
        self.parts.values()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn palette(&self) -> &BTreeSet<u32> {
        &self.palette
    }

    /// An empty palette accepts every colour.
    pub fn is_legal_color(&self, color: u32) -> bool {
        self.palette.is_empty() || self.palette.contains(&color)
    }
}

fn build_spec(index: usize, p: RawPart) -> Result<PartSpec, CatalogError> {
    let missing = |field| CatalogError::MissingField { index, field };
    let id = p.id.ok_or_else(|| missing("id"))?;
    let file = p.file.ok_or_else(|| missing("file"))?;
    let family_name = p.family.ok_or_else(|| missing("family"))?;
    let family = Family::parse(&family_name).ok_or(CatalogError::UnknownFamily(family_name))?;
    let w = p.w.ok_or_else(|| missing("w"))?;
    let d = p.d.ok_or_else(|| missing("d"))?;
    let h = p.h.ok_or_else(|| missing("h"))?;
    let invalid = |reason: String| CatalogError::InvalidGeometry { id: id.clone(), reason };

    if w == 0 || d == 0 || h == 0 {
        return Err(invalid("footprint and height must be positive".into()));
    }
    let expected_height = match family {
        Family::Brick => Some(BRICK_HEIGHT),
        Family::Plate => Some(PLATE_HEIGHT),
        _ => None,
    };
    if let Some(eh) = expected_height.filter(|&eh| eh != h) {
        return Err(invalid(format!("{family} height must be {eh} LDU, got {h}")));
    }

    let to_vec = |v: Vec<[f64; 3]>| v.into_iter().map(|[x, y, z]| Vec3::new(x, y, z)).collect::<Vec<_>>();
    let studs = p.studs.map(to_vec).unwrap_or_else(|| grid_connectors(w, d, -f64::from(h)));
    let sockets = p.sockets.map(to_vec).unwrap_or_else(|| grid_connectors(w, d, 0.0));
    for c in studs.iter().chain(sockets.iter()) {
        check_on_grid(*c, w, d, h).map_err(&invalid)?;
    }
    if let Some(m) = p.mass.filter(|m| !(m.is_finite() && *m >= 0.0)) {
        return Err(invalid(format!("mass {m} is not a non-negative number")));
    }

    Ok(PartSpec {
        display_name: p.name.unwrap_or_else(|| id.clone()),
        id,
        ldraw_file: file,
        family,
        footprint_studs: (w, d),
        height_ldu: h,
        studs,
        sockets,
        mass_g: p.mass,
    })
}

fn check_on_grid(c: Vec3, w: u32, d: u32, h: u32) -> Result<(), String> {
    let on_axis = |v: f64, n: u32| {
        let offset = (f64::from(n) - 1.0) * STUD_PITCH / 2.0;
        let k = (v + offset) / STUD_PITCH;
        (k - k.round()).abs() < 1e-9 && k.round() >= 0.0 && k.round() <= f64::from(n) - 1.0
    };
    if !on_axis(c.x, w) || !on_axis(c.z, d) {
        return Err(format!(
            "connector ({}, {}, {}) is off the {STUD_PITCH} LDU stud grid of a {w}×{d} footprint",
            c.x, c.y, c.z
        ));
    }
    if c.y < -f64::from(h) || c.y > 0.0 {
        return Err(format!("connector y={} outside body height {h}", c.y));
    }
    Ok(())
}
