//! Step-sequenced models and their conversion to and from LDraw documents.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::catalog::Catalog;
use crate::ldraw::{Document, LdrawFile, LdrawLine, Meta, SubfileRef};
use crate::math::{Mat3, Vec3};

/// LDraw's "inherit the parent's colour" code.
pub const INHERIT_COLOR: u32 = 16;

/// A part reference resolved against a catalog.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum PartRef {
    /// Catalog id.
    Known(String),
    /// Raw filename that did not resolve.
    Unknown(String),
}

impl PartRef {
    pub fn name(&self) -> &str {
        match self {
            PartRef::Known(s) | PartRef::Unknown(s) => s,
        }
    }

    pub fn known(&self) -> Option<&str> {
        match self {
            PartRef::Known(s) => Some(s),
            PartRef::Unknown(_) => None,
        }
    }
}

/// One positioned, coloured, oriented part instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Placement {
    pub part: PartRef,
    pub color: u32,
    pub position: Vec3,
    pub orientation: Mat3,
    pub step_index: usize,
    /// Submodel path this placement was expanded from, `a.ldr/b.ldr` style.
    pub submodel: Option<String>,
    /// Index of the build directive that produced the placement, if any.
    #[serde(skip)]
    pub group: Option<usize>,
}

impl Placement {
    pub fn new(part: impl Into<String>, color: u32, position: Vec3) -> Self {
        Placement {
            part: PartRef::Known(part.into()),
            color,
            position,
            orientation: Mat3::IDENTITY,
            step_index: 0,
            submodel: None,
            group: None,
        }
    }

    pub fn with_orientation(mut self, orientation: Mat3) -> Self {
        self.orientation = orientation;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubmodelCall {
    pub name: String,
    pub color: u32,
    pub position: Vec3,
    pub orientation: Mat3,
    #[serde(skip)]
    pub group: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Item {
    Part(Placement),
    Call(SubmodelCall),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Step {
    /// Meta, comment and opaque lines that precede the step's items.
    #[serde(skip)]
    pub notes: Vec<LdrawLine>,
    pub items: Vec<Item>,
}

impl Step {
    pub fn placements(&self) -> impl Iterator<Item = &Placement> {
        self.items.iter().filter_map(|i| match i {
            Item::Part(p) => Some(p),
            Item::Call(_) => None,
        })
    }
}

/// A named, step-sequenced list of items: the main model or one submodel.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Assembly {
    pub name: String,
    #[serde(skip)]
    pub header: Vec<LdrawLine>,
    pub steps: Vec<Step>,
    /// Lines after the last step.
    #[serde(skip)]
    pub trailer: Vec<LdrawLine>,
}

impl Assembly {
    pub fn new(name: impl Into<String>) -> Self {
        Assembly { name: name.into(), ..Default::default() }
    }

    /// Meta/comment lines anywhere in the assembly.
    pub fn meta_lines(&self) -> impl Iterator<Item = &LdrawLine> {
        self.header
            .iter()
            .chain(self.steps.iter().flat_map(|s| s.notes.iter()))
            .chain(self.trailer.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Model {
    pub main: Assembly,
    pub submodels: Vec<Assembly>,
    /// Type-1 lines that could not be parsed.
    pub syntax_defects: usize,
}

/// A model with every submodel call expanded into world-space placements.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct FlatModel {
    /// In build order. `step_index` refers to the main model's steps.
    pub placements: Vec<Placement>,
    pub step_sizes: Vec<usize>,
}

impl FlatModel {
    /// Build from explicit steps; `step_index` is overwritten.
    pub fn from_steps(steps: Vec<Vec<Placement>>) -> FlatModel {
        let step_sizes = steps.iter().map(Vec::len).collect();
        let placements = steps
            .into_iter()
            .enumerate()
            .flat_map(|(i, s)| {
                s.into_iter().map(move |mut p| {
                    p.step_index = i;
                    p
                })
            })
            .collect();
        FlatModel { placements, step_sizes }
    }

    pub fn len(&self) -> usize {
        self.placements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.placements.is_empty()
    }

    pub fn step_count(&self) -> usize {
        self.step_sizes.len()
    }

    /// Placements grouped per step, as index ranges into `placements`.
    pub fn step_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.step_sizes
            .iter()
            .map(|&n| {
                let r = start..start + n;
                start += n;
                r
            })
            .collect()
    }

    pub fn steps(&self) -> Vec<Vec<Placement>> {
        self.step_ranges().into_iter().map(|r| self.placements[r].to_vec()).collect()
    }

    /// Same placements in one main assembly, one LDraw step per entry of `step_sizes`.
    pub fn into_model(self, name: &str) -> Model {
        let mut main = Assembly::new(name);
        let mut iter = self.placements.into_iter();
        for (i, n) in self.step_sizes.iter().enumerate() {
            let items = iter
                .by_ref()
                .take(*n)
                .map(|mut p| {
                    p.step_index = i;
                    Item::Part(p)
                })
                .collect();
            main.steps.push(Step { notes: Vec::new(), items });
        }
        Model { main, submodels: Vec::new(), syntax_defects: 0 }
    }
}

const MAX_SUBMODEL_DEPTH: usize = 32;

impl Model {
    pub fn from_assembly(main: Assembly) -> Model {
        Model { main, submodels: Vec::new(), syntax_defects: 0 }
    }

    pub fn submodel(&self, name: &str) -> Option<&Assembly> {
        self.submodels.iter().find(|s| s.name.eq_ignore_ascii_case(name))
    }

    pub fn step_count(&self) -> usize {
        self.main.steps.len()
    }

    /// All meta lines of the main model and submodels.
    pub fn meta_lines(&self) -> impl Iterator<Item = &LdrawLine> {
        std::iter::once(&self.main)
            .chain(self.submodels.iter())
            .flat_map(Assembly::meta_lines)
    }

    /// Expand submodel calls in place. Each call contributes its parts to the
    /// calling step. Calls to missing or recursive submodels become
    /// [`PartRef::Unknown`] placements so they surface as validation warnings.
    pub fn flatten(&self) -> FlatModel {
        let mut out = FlatModel::default();
        for (i, step) in self.main.steps.iter().enumerate() {
            let before = out.placements.len();
            for item in &step.items {
                self.expand_item(item, i, &Mat3::IDENTITY, Vec3::ZERO, None, None, 0, &mut out.placements);
            }
            out.step_sizes.push(out.placements.len() - before);
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn expand_item(
        &self,
        item: &Item,
        step: usize,
        rot: &Mat3,
        offset: Vec3,
        parent_color: Option<u32>,
        path: Option<&str>,
        depth: usize,
        out: &mut Vec<Placement>,
    ) {
        let resolve_color = |c: u32| match parent_color {
            Some(pc) if c == INHERIT_COLOR => pc,
            _ => c,
        };
        match item {
            Item::Part(p) => {
                let mut q = p.clone();
                q.position = rot.transform(p.position) + offset;
                q.orientation = *rot * p.orientation;
                q.color = resolve_color(p.color);
                q.step_index = step;
                q.submodel = path.map(str::to_string);
                out.push(q);
            }
            Item::Call(call) => {
                let sub = self.submodel(&call.name).filter(|_| depth < MAX_SUBMODEL_DEPTH);
                let color = resolve_color(call.color);
                let Some(sub) = sub else {
                    out.push(Placement {
                        part: PartRef::Unknown(call.name.clone()),
                        color,
                        position: rot.transform(call.position) + offset,
                        orientation: *rot * call.orientation,
                        step_index: step,
                        submodel: path.map(str::to_string),
                        group: call.group,
                    });
                    return;
                };
                let child_rot = *rot * call.orientation;
                let child_offset = rot.transform(call.position) + offset;
                let child_path = match path {
                    Some(p) => format!("{p}/{}", sub.name),
                    None => sub.name.clone(),
                };
                for s in &sub.steps {
                    for it in &s.items {
                        self.expand_item(it, step, &child_rot, child_offset, Some(color), Some(&child_path), depth + 1, out);
                    }
                }
            }
        }
    }

    /// Lower to an LDraw document; known parts are written with their catalog filename.
    pub fn to_document(&self, catalog: &Catalog) -> Document {
        let multipart = !self.submodels.is_empty();
        let mut files = vec![assembly_to_file(&self.main, catalog, multipart)];
        files.extend(self.submodels.iter().map(|s| assembly_to_file(s, catalog, true)));
        Document { multipart, files }
    }
}

fn assembly_to_file(a: &Assembly, catalog: &Catalog, multipart: bool) -> LdrawFile {
    let name = if multipart && a.name.is_empty() { "main.ldr".to_string() } else { a.name.clone() };
    let mut file = LdrawFile::new(name);
    file.lines.extend(a.header.iter().cloned());
    for step in &a.steps {
        file.lines.extend(step.notes.iter().cloned());
        for item in &step.items {
            let r = match item {
                Item::Part(p) => SubfileRef {
                    color: p.color,
                    translation: p.position,
                    rotation: p.orientation,
                    file: match &p.part {
                        PartRef::Known(id) => catalog
                            .get(id)
                            .map(|s| s.ldraw_file.clone())
                            .unwrap_or_else(|| id.clone()),
                        PartRef::Unknown(f) => f.clone(),
                    },
                },
                Item::Call(c) => SubfileRef {
                    color: c.color,
                    translation: c.position,
                    rotation: c.orientation,
                    file: c.name.clone(),
                },
            };
            file.lines.push(LdrawLine::SubfileRef(r));
        }
        file.lines.push(LdrawLine::Meta(Meta::Step));
    }
    file.lines.extend(a.trailer.iter().cloned());
    file
}

/// Group type-1 lines into steps and resolve filenames against the catalog.
///
/// Unknown filenames become [`PartRef::Unknown`] placements rather than errors.
pub fn to_model(doc: &Document, catalog: &Catalog) -> Model {
    let names: BTreeMap<String, String> = doc
        .files
        .iter()
        .map(|f| (f.name.to_ascii_lowercase(), f.name.clone()))
        .collect();
    let mut defects = 0;
    let mut assemblies = doc.files.iter().map(|f| {
        let (a, d) = file_to_assembly(f, catalog, doc.multipart.then_some(&names));
        defects += d;
        a
    });
    let main = assemblies.next().unwrap_or_default();
    let submodels = assemblies.collect();
    Model { main, submodels, syntax_defects: defects }
}

fn file_to_assembly(
    file: &LdrawFile,
    catalog: &Catalog,
    submodel_names: Option<&BTreeMap<String, String>>,
) -> (Assembly, usize) {
    let mut a = Assembly::new(file.name.clone());
    let mut defects = 0;
    let mut current = Step::default();
    let mut started = false;
    for line in &file.lines {
        match line {
            LdrawLine::Meta(Meta::Step) => {
                started = true;
                let step_index = a.steps.len();
                for item in &mut current.items {
                    if let Item::Part(p) = item {
                        p.step_index = step_index;
                    }
                }
                a.steps.push(std::mem::take(&mut current));
            }
            LdrawLine::SubfileRef(r) => {
                started = true;
                let sub = submodel_names.and_then(|n| n.get(&r.file.to_ascii_lowercase()));
                let item = match sub {
                    Some(name) => Item::Call(SubmodelCall {
                        name: name.clone(),
                        color: r.color,
                        position: r.translation,
                        orientation: r.rotation,
                        group: None,
                    }),
                    None => Item::Part(Placement {
                        part: match catalog.lookup(&r.file) {
                            Ok(spec) => PartRef::Known(spec.id.clone()),
                            Err(_) => PartRef::Unknown(r.file.clone()),
                        },
                        color: r.color,
                        position: r.translation,
                        orientation: r.rotation,
                        step_index: a.steps.len(),
                        submodel: None,
                        group: None,
                    }),
                };
                current.items.push(item);
            }
            other => {
                if matches!(other, LdrawLine::Malformed(_)) {
                    defects += 1;
                }
                if started {
                    current.notes.push(other.clone());
                } else {
                    a.header.push(other.clone());
                }
            }
        }
    }
    if current.items.is_empty() {
        a.trailer = current.notes;
    } else {
        a.steps.push(current);
    }
    (a, defects)
}
