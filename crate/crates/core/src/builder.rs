//! Declarative build specifications compiled into step-sequenced models.
//!
//! One directive per line, `#` starts a comment. Parentheses and commas in
//! coordinates are optional and the word `level` may precede the level, so
//! `at (0,0,level 3)` and `at 0 0 3` mean the same thing.
//!
//! ```text
//! name <title>
//! author <text>
//! role <part> <text>
//! triz <principle> <rationale>
//! phase <label>
//! part <id> [color <c>] at <gx> <gz> <level> [rot <deg>]
//! row <id> [color <c>] count <n> start <gx> <gz> <level> axis x|z [stride <studs>]
//! wall <id> [color <c>] width <studs> layers <n> start <gx> <gz> <level> axis x|z
//! plate_fill <id> [color <c>] size <w> <d> start <gx> <gz> <level>
//! ring <id> [color <c>] count <n> radius <studs> center <gx> <gz> <level>
//! submodel begin <name>
//! submodel end
//! call <name> [color <c>] at <gx> <gz> <level> [rot <deg>]
//! step
//! ```
//!
//! Grid coordinates address studs: the stud at `(gx, gz)` sits at
//! `x = 20·gx, z = 20·gz`, and `level` counts plate heights above the ground
//! (`y = −8·level`). A part's anchor is its minimum-corner stud after
//! rotation. A `phase` starts a new step and labels it with a comment.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::catalog::{Catalog, PartSpec, PLATE_HEIGHT, STUD_PITCH};
use crate::ldraw::{LdrawLine, Meta};
use crate::math::{Vec3, Yaw};
use crate::model::{Assembly, FlatModel, Item, Model, Placement, Step, SubmodelCall, INHERIT_COLOR};
use crate::triz::TRIZ_KEYWORD;

pub const DEFAULT_COLOR: u32 = 71;
pub const PHASE_KEYWORD: &str = "PHASE";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown part `{part}`")]
    UnknownPart { line: usize, part: String },
    #[error("line {line}: unknown submodel `{name}`")]
    UnknownSubmodel { line: usize, name: String },
    #[error("line {line}: level {level} is below the ground")]
    NegativeLevel { line: usize, level: i64 },
    #[error("line {line}: {detail}")]
    NonTilingDimensions { line: usize, detail: String },
    #[error("line {line}: ring positions collide at grid cell ({gx}, {gz})")]
    DuplicateRingCell { line: usize, gx: i64, gz: i64 },
    #[error("line {line}: {message}")]
    Nesting { line: usize, message: String },
}

impl BuildError {
    pub fn line(&self) -> usize {
        match self {
            BuildError::Syntax { line, .. }
            | BuildError::UnknownPart { line, .. }
            | BuildError::UnknownSubmodel { line, .. }
            | BuildError::NegativeLevel { line, .. }
            | BuildError::NonTilingDimensions { line, .. }
            | BuildError::DuplicateRingCell { line, .. }
            | BuildError::Nesting { line, .. } => *line,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridCoord {
    pub gx: i64,
    pub gz: i64,
    pub level: i64,
}

impl GridCoord {
    pub const fn new(gx: i64, gz: i64, level: i64) -> GridCoord {
        GridCoord { gx, gz, level }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Z,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Directive {
    Role { part: String, text: String },
    Triz { principle: u32, rationale: String },
    Phase(String),
    Part { part: String, color: u32, at: GridCoord, rot: Yaw },
    Row { part: String, color: u32, count: u32, start: GridCoord, axis: Axis, stride: Option<u32> },
    Wall { part: String, color: u32, width: u32, layers: u32, start: GridCoord, axis: Axis },
    PlateFill { part: String, color: u32, width: u32, depth: u32, start: GridCoord },
    Ring { part: String, color: u32, count: u32, radius: u32, center: GridCoord },
    SubmodelBegin(String),
    SubmodelEnd,
    Call { name: String, color: u32, at: GridCoord, rot: Yaw },
    Step,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BuildSpec {
    pub name: String,
    pub author: String,
    /// Directives with their 1-based source line.
    pub directives: Vec<(usize, Directive)>,
}

struct Tokens<'a> {
    line: usize,
    words: Vec<&'a str>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn err(&self, message: impl Into<String>) -> BuildError {
        BuildError::Syntax { line: self.line, message: message.into() }
    }

    fn peek(&self) -> Option<&'a str> {
        self.words.get(self.pos).copied()
    }

    fn next(&mut self, what: &str) -> Result<&'a str, BuildError> {
        let w = self.peek().ok_or_else(|| self.err(format!("expected {what}")))?;
        self.pos += 1;
        Ok(w)
    }

    fn keyword(&mut self, kw: &str) -> Result<(), BuildError> {
        match self.next(&format!("`{kw}`"))? {
            w if w.eq_ignore_ascii_case(kw) => Ok(()),
            w => Err(self.err(format!("expected `{kw}`, found `{w}`"))),
        }
    }

    fn accept(&mut self, kw: &str) -> bool {
        if self.peek().is_some_and(|w| w.eq_ignore_ascii_case(kw)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn int(&mut self, what: &str) -> Result<i64, BuildError> {
        let w = self.next(what)?;
        w.parse().map_err(|_| self.err(format!("expected {what}, found `{w}`")))
    }

    fn positive(&mut self, what: &str) -> Result<u32, BuildError> {
        let n = self.int(what)?;
        u32::try_from(n).ok().filter(|&n| n > 0).ok_or_else(|| self.err(format!("{what} must be positive")))
    }

    fn coord(&mut self) -> Result<GridCoord, BuildError> {
        let gx = self.int("gx")?;
        let gz = self.int("gz")?;
        self.accept("level");
        let level = self.int("level")?;
        Ok(GridCoord { gx, gz, level })
    }

    fn color(&mut self) -> Result<Option<u32>, BuildError> {
        if !self.accept("color") {
            return Ok(None);
        }
        let c = self.int("color code")?;
        u32::try_from(c).map(Some).map_err(|_| self.err("color code must be non-negative"))
    }

    fn rot(&mut self) -> Result<Yaw, BuildError> {
        if !self.accept("rot") {
            return Ok(Yaw::R0);
        }
        let d = self.int("rotation")?;
        Yaw::from_degrees(d).ok_or_else(|| self.err(format!("rotation {d} is not a multiple of 90")))
    }

    fn axis(&mut self) -> Result<Axis, BuildError> {
        self.keyword("axis")?;
        match self.next("axis")? {
            "x" | "X" => Ok(Axis::X),
            "z" | "Z" => Ok(Axis::Z),
            w => Err(self.err(format!("axis must be x or z, found `{w}`"))),
        }
    }

    fn finish(&self) -> Result<(), BuildError> {
        match self.peek() {
            None => Ok(()),
            Some(w) => Err(self.err(format!("unexpected `{w}`"))),
        }
    }
}

impl BuildSpec {
    pub fn parse(text: &str) -> Result<BuildSpec, BuildError> {
        let mut spec = BuildSpec::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (head, tail) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
            let tail = tail.trim();
            let cleaned = tail.replace(['(', ')', ','], " ");
            let mut t = Tokens { line, words: cleaned.split_whitespace().collect(), pos: 0 };
            let d = match head.to_ascii_lowercase().as_str() {
                "name" => {
                    spec.name = tail.to_string();
                    continue;
                }
                "author" => {
                    spec.author = tail.to_string();
                    continue;
                }
                "role" => {
                    let (part, text) = tail.split_once(char::is_whitespace).ok_or_else(|| t.err("expected `role <part> <text>`"))?;
                    Directive::Role { part: part.to_string(), text: text.trim().to_string() }
                }
                "triz" => {
                    let (n, rationale) = tail.split_once(char::is_whitespace).unwrap_or((tail, ""));
                    let principle = n.parse().map_err(|_| t.err(format!("expected principle number, found `{n}`")))?;
                    Directive::Triz { principle, rationale: rationale.trim().to_string() }
                }
                "phase" => {
                    if tail.is_empty() {
                        return Err(t.err("expected phase label"));
                    }
                    Directive::Phase(tail.to_string())
                }
                "step" => {
                    t.finish()?;
                    Directive::Step
                }
                "part" => {
                    let part = t.next("part id")?.to_string();
                    let color = t.color()?.unwrap_or(DEFAULT_COLOR);
                    t.keyword("at")?;
                    let at = t.coord()?;
                    let rot = t.rot()?;
                    t.finish()?;
                    Directive::Part { part, color, at, rot }
                }
                "row" => {
                    let part = t.next("part id")?.to_string();
                    let color = t.color()?.unwrap_or(DEFAULT_COLOR);
                    t.keyword("count")?;
                    let count = t.positive("count")?;
                    t.keyword("start")?;
                    let start = t.coord()?;
                    let axis = t.axis()?;
                    let stride = if t.accept("stride") { Some(t.positive("stride")?) } else { None };
                    t.finish()?;
                    Directive::Row { part, color, count, start, axis, stride }
                }
                "wall" => {
                    let part = t.next("part id")?.to_string();
                    let color = t.color()?.unwrap_or(DEFAULT_COLOR);
                    t.keyword("width")?;
                    let width = t.positive("width")?;
                    t.keyword("layers")?;
                    let layers = t.positive("layers")?;
                    t.keyword("start")?;
                    let start = t.coord()?;
                    let axis = t.axis()?;
                    t.finish()?;
                    Directive::Wall { part, color, width, layers, start, axis }
                }
                "plate_fill" => {
                    let part = t.next("part id")?.to_string();
                    let color = t.color()?.unwrap_or(DEFAULT_COLOR);
                    t.keyword("size")?;
                    let width = t.positive("width")?;
                    let depth = t.positive("depth")?;
                    t.keyword("start")?;
                    let start = t.coord()?;
                    t.finish()?;
                    Directive::PlateFill { part, color, width, depth, start }
                }
                "ring" => {
                    let part = t.next("part id")?.to_string();
                    let color = t.color()?.unwrap_or(DEFAULT_COLOR);
                    t.keyword("count")?;
                    let count = t.positive("count")?;
                    t.keyword("radius")?;
                    let radius = t.positive("radius")?;
                    let center = if t.accept("center") { t.coord()? } else { GridCoord::new(0, 0, 0) };
                    t.finish()?;
                    Directive::Ring { part, color, count, radius, center }
                }
                "submodel" => match t.next("`begin` or `end`")? {
                    "begin" => {
                        let name = t.next("submodel name")?.to_string();
                        t.finish()?;
                        Directive::SubmodelBegin(name)
                    }
                    "end" => {
                        t.finish()?;
                        Directive::SubmodelEnd
                    }
                    w => return Err(t.err(format!("expected `begin` or `end`, found `{w}`"))),
                },
                "call" => {
                    let name = t.next("submodel name")?.to_string();
                    let color = t.color()?.unwrap_or(INHERIT_COLOR);
                    t.keyword("at")?;
                    let at = t.coord()?;
                    let rot = t.rot()?;
                    t.finish()?;
                    Directive::Call { name, color, at, rot }
                }
                other => return Err(t.err(format!("unknown directive `{other}`"))),
            };
            spec.directives.push((line, d));
        }
        Ok(spec)
    }

    /// File name used for the main model: the title lowercased, spaces as underscores.
    pub fn file_name(&self) -> String {
        let stem: String = self
            .name
            .trim()
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c.to_ascii_lowercase() } else { '_' })
            .collect();
        if stem.is_empty() { "model.ldr".into() } else { format!("{stem}.ldr") }
    }
}

/// World position of a part whose minimum-corner stud is at `at`.
pub fn anchor_position(spec: &PartSpec, at: GridCoord, rot: Yaw) -> Vec3 {
    let (wx, wz) = oriented_footprint(spec, rot);
    Vec3::new(
        at.gx as f64 * STUD_PITCH + (f64::from(wx) - 1.0) * STUD_PITCH / 2.0,
        -(at.level as f64) * f64::from(PLATE_HEIGHT),
        at.gz as f64 * STUD_PITCH + (f64::from(wz) - 1.0) * STUD_PITCH / 2.0,
    )
}

/// Footprint along (x, z) after a yaw.
pub fn oriented_footprint(spec: &PartSpec, rot: Yaw) -> (u32, u32) {
    let (w, d) = spec.footprint_studs;
    if rot.swaps_axes() { (d, w) } else { (w, d) }
}

/// Height of a part in plate levels, at least one.
fn levels(spec: &PartSpec) -> i64 {
    i64::from(spec.height_ldu.div_ceil(PLATE_HEIGHT)).max(1)
}

/// Yaw that lays the part's long side along `axis`, and its length in studs.
fn along(spec: &PartSpec, axis: Axis) -> (Yaw, u32) {
    let (w, d) = spec.footprint_studs;
    match axis {
        Axis::X if w >= d => (Yaw::R0, w),
        Axis::X => (Yaw::R90, d),
        Axis::Z if d >= w => (Yaw::R0, d),
        Axis::Z => (Yaw::R90, w),
    }
}

fn offset(at: GridCoord, axis: Axis, by: i64) -> GridCoord {
    match axis {
        Axis::X => GridCoord { gx: at.gx + by, ..at },
        Axis::Z => GridCoord { gz: at.gz + by, ..at },
    }
}

struct Frame {
    assembly: Assembly,
    current: Step,
    line: usize,
}

impl Frame {
    fn new(name: String, line: usize) -> Frame {
        Frame { assembly: Assembly::new(name), current: Step::default(), line }
    }

    fn close_step(&mut self) {
        if !self.current.items.is_empty() {
            let index = self.assembly.steps.len();
            for item in &mut self.current.items {
                if let Item::Part(p) = item {
                    p.step_index = index;
                }
            }
            self.assembly.steps.push(std::mem::take(&mut self.current));
        }
    }

    fn finish(mut self) -> Assembly {
        self.close_step();
        self.assembly.trailer = std::mem::take(&mut self.current.notes);
        self.assembly
    }
}

/// Compile a spec into a model. Pure: the same spec and catalog always give
/// the same model.
pub fn compile(spec: &BuildSpec, catalog: &Catalog) -> Result<Model, BuildError> {
    let mut header = Vec::new();
    if !spec.name.is_empty() {
        header.push(LdrawLine::Meta(Meta::Other(spec.name.clone())));
        header.push(LdrawLine::Meta(Meta::Other(format!("Name: {}", spec.file_name()))));
    }
    if !spec.author.is_empty() {
        header.push(LdrawLine::Meta(Meta::Other(format!("Author: {}", spec.author))));
    }

    let mut stack = vec![Frame::new(spec.file_name(), 0)];
    let mut submodels: Vec<Assembly> = Vec::new();
    let mut defined: BTreeSet<String> = BTreeSet::new();

    for (group, (line, d)) in spec.directives.iter().enumerate() {
        let line = *line;
        let lookup = |id: &str| catalog.lookup(id).map_err(|_| BuildError::UnknownPart { line, part: id.to_string() });
        let check_level = |at: GridCoord| {
            if at.level < 0 { Err(BuildError::NegativeLevel { line, level: at.level }) } else { Ok(()) }
        };
        let frame = stack.last_mut().expect("main frame");
        let mut place = |spec: &PartSpec, color: u32, at: GridCoord, rot: Yaw| {
            let mut p = Placement::new(spec.id.clone(), color, anchor_position(spec, at, rot)).with_orientation(rot.matrix());
            p.group = Some(group);
            frame.current.items.push(Item::Part(p));
        };
        match d {
            Directive::Role { part, text } => {
                let id = lookup(part)?.id.clone();
                header.push(LdrawLine::Comment(format!("{} {id} {text}", crate::inventory::ROLE_KEYWORD)));
            }
            Directive::Triz { principle, rationale } => {
                crate::triz::principle(*principle)
                    .map_err(|e| BuildError::Syntax { line, message: e.to_string() })?;
                header.push(LdrawLine::Comment(format!("{TRIZ_KEYWORD} {principle} {rationale}").trim_end().to_string()));
            }
            Directive::Phase(label) => {
                frame.close_step();
                frame.current.notes.push(LdrawLine::Comment(format!("{PHASE_KEYWORD} {label}")));
            }
            Directive::Step => frame.close_step(),
            Directive::Part { part, color, at, rot } => {
                let s = lookup(part)?;
                check_level(*at)?;
                place(s, *color, *at, *rot);
            }
            Directive::Row { part, color, count, start, axis, stride } => {
                let s = lookup(part)?;
                check_level(*start)?;
                let (rot, len) = along(s, *axis);
                let stride = stride.unwrap_or(len);
                if stride < len {
                    return Err(BuildError::NonTilingDimensions {
                        line,
                        detail: format!("stride {stride} is shorter than the {len}-stud part"),
                    });
                }
                for k in 0..i64::from(*count) {
                    place(s, *color, offset(*start, *axis, k * i64::from(stride)), rot);
                }
            }
            Directive::Wall { part, color, width, layers, start, axis } => {
                let s = lookup(part)?;
                check_level(*start)?;
                let (rot, len) = along(s, *axis);
                if width % len != 0 {
                    return Err(BuildError::NonTilingDimensions {
                        line,
                        detail: format!("{len}-stud parts do not tile a width of {width}"),
                    });
                }
                for layer in 0..i64::from(*layers) {
                    let base = GridCoord { level: start.level + layer * levels(s), ..*start };
                    let shift = layer % 2;
                    for k in 0..i64::from(width / len) {
                        place(s, *color, offset(base, *axis, shift + k * i64::from(len)), rot);
                    }
                }
            }
            Directive::PlateFill { part, color, width, depth, start } => {
                let s = lookup(part)?;
                check_level(*start)?;
                let rot = [Yaw::R0, Yaw::R90]
                    .into_iter()
                    .find(|&r| {
                        let (wx, wz) = oriented_footprint(s, r);
                        width % wx == 0 && depth % wz == 0
                    })
                    .ok_or_else(|| BuildError::NonTilingDimensions {
                        line,
                        detail: format!("{} does not tile {width}×{depth}", s.id),
                    })?;
                let (wx, wz) = oriented_footprint(s, rot);
                for i in 0..i64::from(width / wx) {
                    for j in 0..i64::from(depth / wz) {
                        let at = GridCoord { gx: start.gx + i * i64::from(wx), gz: start.gz + j * i64::from(wz), ..*start };
                        place(s, *color, at, rot);
                    }
                }
            }
            Directive::Ring { part, color, count, radius, center } => {
                let s = lookup(part)?;
                check_level(*center)?;
                let mut seen = BTreeSet::new();
                for k in 0..*count {
                    let a = std::f64::consts::TAU * f64::from(k) / f64::from(*count);
                    let gx = center.gx + (f64::from(*radius) * a.cos()).round() as i64;
                    let gz = center.gz + (f64::from(*radius) * a.sin()).round() as i64;
                    if !seen.insert((gx, gz)) {
                        return Err(BuildError::DuplicateRingCell { line, gx, gz });
                    }
                    place(s, *color, GridCoord { gx, gz, ..*center }, Yaw::R0);
                }
            }
            Directive::SubmodelBegin(name) => {
                if defined.contains(&name.to_ascii_lowercase()) || stack.iter().any(|f| f.assembly.name.eq_ignore_ascii_case(name)) {
                    return Err(BuildError::Nesting { line, message: format!("submodel `{name}` is already defined") });
                }
                stack.push(Frame::new(name.clone(), line));
            }
            Directive::SubmodelEnd => {
                if stack.len() < 2 {
                    return Err(BuildError::Nesting { line, message: "`submodel end` without `submodel begin`".into() });
                }
                let a = stack.pop().expect("checked").finish();
                defined.insert(a.name.to_ascii_lowercase());
                submodels.push(a);
            }
            Directive::Call { name, color, at, rot } => {
                check_level(*at)?;
                let sub = submodels
                    .iter()
                    .find(|s| s.name.eq_ignore_ascii_case(name))
                    .ok_or_else(|| BuildError::UnknownSubmodel { line, name: name.clone() })?;
                let position = Vec3::new(
                    at.gx as f64 * STUD_PITCH,
                    -(at.level as f64) * f64::from(PLATE_HEIGHT),
                    at.gz as f64 * STUD_PITCH,
                );
                frame.current.items.push(Item::Call(SubmodelCall {
                    name: sub.name.clone(),
                    color: *color,
                    position,
                    orientation: rot.matrix(),
                    group: Some(group),
                }));
            }
        }
    }
    if stack.len() > 1 {
        let f = stack.last().expect("nested frame");
        return Err(BuildError::Nesting { line: f.line, message: format!("submodel `{}` is never closed", f.assembly.name) });
    }
    let mut main = stack.pop().expect("main frame").finish();
    main.header = header;
    Ok(Model { main, submodels, syntax_defects: 0 })
}

/// Parse and compile in one go.
pub fn compile_str(text: &str, catalog: &Catalog) -> Result<Model, BuildError> {
    compile(&BuildSpec::parse(text)?, catalog)
}

/// Re-cut the main model's steps to roughly `target` parts each.
///
/// Steps are filled up to `target` parts; a directive whose output does not
/// fit starts a new step, so each step has between one and `2·target` parts.
/// Output of one directive stays within one step unless it alone exceeds
/// `2·target`, in which case it is cut into near-equal chunks of at most
/// `target`. A single submodel call is never split. Step notes such as phase
/// labels start a new step.
pub fn pack_steps(model: &Model, target: usize) -> Model {
    let target = target.max(1);
    let limit = 2 * target;

    // (notes, items, weight) per indivisible unit, in order.
    let mut units: Vec<(Vec<LdrawLine>, Vec<Item>, usize)> = Vec::new();
    let mut last_group: Option<usize> = None;
    for step in &model.main.steps {
        let mut notes = step.notes.clone();
        for item in &step.items {
            let (group, weight) = match item {
                Item::Part(p) => (p.group, 1),
                Item::Call(c) => (c.group, call_weight(model, &c.name, 0)),
            };
            let joins = notes.is_empty() && group.is_some() && group == last_group && !units.is_empty();
            if joins {
                let u = units.last_mut().expect("non-empty");
                u.1.push(item.clone());
                u.2 += weight;
            } else {
                units.push((std::mem::take(&mut notes), vec![item.clone()], weight));
            }
            last_group = group;
        }
        if !notes.is_empty() {
            // a step with notes but no items keeps its notes on the next unit
            units.push((notes, Vec::new(), 0));
        }
    }

    let mut steps: Vec<Step> = Vec::new();
    let mut cur = Step::default();
    let mut cur_weight = 0;
    let flush = |cur: &mut Step, w: &mut usize, steps: &mut Vec<Step>| {
        if !cur.items.is_empty() {
            steps.push(std::mem::take(cur));
        }
        *w = 0;
    };
    for (notes, items, weight) in units {
        if !notes.is_empty() {
            flush(&mut cur, &mut cur_weight, &mut steps);
            cur.notes.extend(notes);
        }
        if weight > limit {
            flush(&mut cur, &mut cur_weight, &mut steps);
            let mut remaining = weight;
            let mut left = weight.div_ceil(target);
            for item in items {
                let w = match &item {
                    Item::Part(_) => 1,
                    Item::Call(c) => call_weight(model, &c.name, 0),
                };
                if cur_weight > 0 && cur_weight + w > remaining.div_ceil(left) {
                    remaining -= cur_weight;
                    left = left.saturating_sub(1).max(1);
                    flush(&mut cur, &mut cur_weight, &mut steps);
                }
                cur.items.push(item);
                cur_weight += w;
            }
            flush(&mut cur, &mut cur_weight, &mut steps);
            continue;
        }
        if cur_weight > 0 && cur_weight + weight > target {
            flush(&mut cur, &mut cur_weight, &mut steps);
        }
        cur.items.extend(items);
        cur_weight += weight;
        if cur_weight >= target {
            flush(&mut cur, &mut cur_weight, &mut steps);
        }
    }
    let trailing_notes = if cur.items.is_empty() { std::mem::take(&mut cur.notes) } else { Vec::new() };
    flush(&mut cur, &mut cur_weight, &mut steps);

    for (i, s) in steps.iter_mut().enumerate() {
        for item in &mut s.items {
            if let Item::Part(p) = item {
                p.step_index = i;
            }
        }
    }
    let mut out = model.clone();
    out.main.steps = steps;
    out.main.trailer = trailing_notes.into_iter().chain(model.main.trailer.iter().cloned()).collect();
    out
}

fn call_weight(model: &Model, name: &str, depth: usize) -> usize {
    let Some(sub) = model.submodel(name).filter(|_| depth < 32) else { return 1 };
    sub.steps
        .iter()
        .flat_map(|s| &s.items)
        .map(|it| match it {
            Item::Part(_) => 1,
            Item::Call(c) => call_weight(model, &c.name, depth + 1),
        })
        .sum()
}

/// Flattened part count of a compiled model.
pub fn part_count(model: &Model) -> usize {
    model.flatten().len()
}

/// Flatten and repack; convenience for callers holding a [`FlatModel`].
pub fn pack_flat(flat: &FlatModel, target: usize, name: &str) -> Model {
    pack_steps(&flat.clone().into_model(name), target)
}
