//! Physical-realizability checks: overlap, disconnection, floating parts,
//! unsupported placements, build order and inventory limits.

mod collision;
pub mod graph;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::catalog::Catalog;
use crate::inventory::Inventory;
use crate::model::{FlatModel, Model, PartRef};
use crate::sequencer;

pub use collision::{collisions as collision_pairs, CollisionPair, OccupancyGrid};
pub use graph::{Connectivity, Mating, MatingGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IssueKind {
    UnknownPart { index: usize, part: String },
    IllegalColor { index: usize, color: u32 },
    Collision { a: usize, b: usize, cells: usize },
    FloatingComponent { members: Vec<usize> },
    Unsupported { index: usize },
    OrderViolation { step: usize, index: usize },
    InventoryExceeded { part: String, used: u32, available: u32 },
}

impl IssueKind {
    pub fn severity(&self) -> Severity {
        match self {
            IssueKind::UnknownPart { .. } | IssueKind::IllegalColor { .. } | IssueKind::Unsupported { .. } => {
                Severity::Warning
            }
            _ => Severity::Error,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            IssueKind::UnknownPart { .. } => "UnknownPart",
            IssueKind::IllegalColor { .. } => "IllegalColor",
            IssueKind::Collision { .. } => "Collision",
            IssueKind::FloatingComponent { .. } => "FloatingComponent",
            IssueKind::Unsupported { .. } => "Unsupported",
            IssueKind::OrderViolation { .. } => "OrderViolation",
            IssueKind::InventoryExceeded { .. } => "InventoryExceeded",
        }
    }

    /// Placement the issue is anchored to, if any.
    pub fn primary_index(&self) -> Option<usize> {
        match self {
            IssueKind::UnknownPart { index, .. }
            | IssueKind::IllegalColor { index, .. }
            | IssueKind::Unsupported { index }
            | IssueKind::OrderViolation { index, .. } => Some(*index),
            IssueKind::Collision { a, .. } => Some(*a),
            IssueKind::FloatingComponent { members } => members.first().copied(),
            IssueKind::InventoryExceeded { .. } => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            IssueKind::UnknownPart { .. } => 0,
            IssueKind::IllegalColor { .. } => 1,
            IssueKind::Collision { .. } => 2,
            IssueKind::FloatingComponent { .. } => 3,
            IssueKind::Unsupported { .. } => 4,
            IssueKind::OrderViolation { .. } => 5,
            IssueKind::InventoryExceeded { .. } => 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Issue {
    #[serde(flatten)]
    pub kind: IssueKind,
    pub severity: Severity,
}

impl From<IssueKind> for Issue {
    fn from(kind: IssueKind) -> Self {
        Issue { severity: kind.severity(), kind }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        match &self.kind {
            IssueKind::UnknownPart { index, part } => write!(f, "{sev}: placement {index}: unknown part `{part}`"),
            IssueKind::IllegalColor { index, color } => {
                write!(f, "{sev}: placement {index}: colour {color} not in palette")
            }
            IssueKind::Collision { a, b, cells } => {
                write!(f, "{sev}: placements {a} and {b} overlap in {cells} cell(s)")
            }
            IssueKind::FloatingComponent { members } => {
                write!(f, "{sev}: {} placement(s) not connected to the ground, first {}", members.len(), members[0])
            }
            IssueKind::Unsupported { index } => {
                write!(f, "{sev}: placement {index} hangs from above with nothing beneath")
            }
            IssueKind::OrderViolation { step, index } => {
                write!(f, "{sev}: step {}: placement {index} has no support in steps 1..={}", step + 1, step + 1)
            }
            IssueKind::InventoryExceeded { part, used, available } => {
                write!(f, "{sev}: `{part}` used {used} times, {available} available")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stats {
    /// Placements with known geometry.
    pub parts: usize,
    pub steps: usize,
    pub connected_components: usize,
    pub grounded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
    pub stats: Stats,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }

    pub fn count(&self, kind: &str) -> usize {
        self.issues.iter().filter(|i| i.kind.name() == kind).count()
    }

    /// Issue counts by kind name.
    pub fn summary(&self) -> BTreeMap<&'static str, usize> {
        let mut m = BTreeMap::new();
        for i in &self.issues {
            *m.entry(i.kind.name()).or_default() += 1;
        }
        m
    }
}

pub fn check_collisions(flat: &FlatModel, catalog: &Catalog) -> Vec<IssueKind> {
    let g = MatingGraph::build(&flat.placements, catalog);
    collisions_in(&g)
}

fn collisions_in(g: &MatingGraph) -> Vec<IssueKind> {
    collision_pairs(g.resolved.iter().flatten())
        .into_iter()
        .map(|c| IssueKind::Collision { a: c.a, b: c.b, cells: c.cells })
        .collect()
}

pub fn connectivity(flat: &FlatModel, catalog: &Catalog) -> Connectivity {
    Connectivity::from_graph(&MatingGraph::build(&flat.placements, catalog))
}

/// Usage is counted over the flattened model, so submodel calls count every expansion.
pub fn check_inventory(flat: &FlatModel, inventory: &Inventory) -> Vec<IssueKind> {
    let mut used: BTreeMap<&str, u32> = BTreeMap::new();
    for p in &flat.placements {
        *used.entry(p.part.name()).or_default() += 1;
    }
    used.into_iter()
        .filter_map(|(part, n)| {
            let available = inventory.count(part);
            (n > available).then(|| IssueKind::InventoryExceeded { part: part.to_string(), used: n, available })
        })
        .collect()
}

pub fn validate(model: &Model, catalog: &Catalog, inventory: Option<&Inventory>) -> ValidationReport {
    validate_flat(&model.flatten(), catalog, inventory)
}

pub fn validate_flat(flat: &FlatModel, catalog: &Catalog, inventory: Option<&Inventory>) -> ValidationReport {
    let g = MatingGraph::build(&flat.placements, catalog);
    let mut kinds = Vec::new();

    for (i, p) in flat.placements.iter().enumerate() {
        if let PartRef::Unknown(name) = &p.part {
            kinds.push(IssueKind::UnknownPart { index: i, part: name.clone() });
        } else if !g.is_known(i) {
            kinds.push(IssueKind::UnknownPart { index: i, part: p.part.name().to_string() });
        }
        if !catalog.is_legal_color(p.color) {
            kinds.push(IssueKind::IllegalColor { index: i, color: p.color });
        }
    }

    kinds.extend(collisions_in(&g));

    let conn = Connectivity::from_graph(&g);
    for members in conn.floating() {
        kinds.push(IssueKind::FloatingComponent { members: members.clone() });
    }

    let below = g.supported_from_below();
    for (i, held) in below.into_iter().enumerate() {
        if g.is_known(i) && !g.on_ground(i) && !held && !g.adjacency[i].is_empty() {
            kinds.push(IssueKind::Unsupported { index: i });
        }
    }

    kinds.extend(sequencer::order_violations(flat, &g));

    if let Some(inv) = inventory {
        kinds.extend(check_inventory(flat, inv));
    }

    let step_of = |k: &IssueKind| match k {
        IssueKind::OrderViolation { step, .. } => *step,
        other => other.primary_index().map_or(usize::MAX, |i| flat.placements[i].step_index),
    };
    kinds.sort_by(|a, b| {
        (step_of(a), a.primary_index().unwrap_or(usize::MAX), a.rank())
            .cmp(&(step_of(b), b.primary_index().unwrap_or(usize::MAX), b.rank()))
    });

    ValidationReport {
        issues: kinds.into_iter().map(Issue::from).collect(),
        stats: Stats {
            parts: g.resolved.iter().flatten().count(),
            steps: flat.step_count(),
            connected_components: conn.components.len(),
            grounded: conn.all_grounded(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Vec3;
    use crate::model::Placement;

    fn at(part: &str, x: f64, y: f64, z: f64) -> Placement {
        Placement::new(part, 4, Vec3::new(x, y, z))
    }

    fn flat(ps: Vec<Placement>) -> FlatModel {
        FlatModel::from_steps(vec![ps])
    }

    #[test]
    fn identical_pose_collides_fully() {
        let c = Catalog::builtin();
        let m = flat(vec![at("brick_2x4", 10.0, 0.0, 30.0), at("brick_2x4", 10.0, 0.0, 30.0)]);
        assert_eq!(check_collisions(&m, &c), vec![IssueKind::Collision { a: 0, b: 1, cells: 24 }]);
    }

    #[test]
    fn stacked_bricks_do_not_collide() {
        let c = Catalog::builtin();
        let m = flat(vec![at("brick_2x4", 0.0, 0.0, 0.0), at("brick_2x4", 0.0, -24.0, 0.0)]);
        assert!(check_collisions(&m, &c).is_empty());
        let conn = connectivity(&m, &c);
        assert_eq!(conn.components, vec![vec![0, 1]]);
        assert_eq!(conn.matings, vec![Mating { lower: 0, upper: 1, studs: 8 }]);
        assert!(conn.all_grounded());
    }

    #[test]
    fn distant_bricks_are_two_grounded_components() {
        let c = Catalog::builtin();
        let conn = connectivity(&flat(vec![at("brick_2x4", 0.0, 0.0, 0.0), at("brick_2x4", 200.0, 0.0, 0.0)]), &c);
        assert_eq!(conn.components.len(), 2);
        assert_eq!(conn.grounded, vec![true, true]);
    }

    #[test]
    fn hovering_brick_floats() {
        let c = Catalog::builtin();
        let r = validate_flat(&flat(vec![at("brick_2x4", 0.0, -48.0, 0.0)]), &c, None);
        assert_eq!(r.count("FloatingComponent"), 1);
        assert!(!r.stats.grounded);
        assert!(r.has_errors());
    }

    #[test]
    fn inventory_overuse() {
        let m = flat(vec![at("brick_1x2", 0.0, 0.0, 0.0), at("brick_1x2", 0.0, -24.0, 0.0), at("brick_1x2", 0.0, -48.0, 0.0)]);
        let inv = Inventory::from_counts([("brick_1x2", 2)]);
        assert_eq!(
            check_inventory(&m, &inv),
            vec![IssueKind::InventoryExceeded { part: "brick_1x2".into(), used: 3, available: 2 }]
        );
        assert!(check_inventory(&FlatModel::default(), &inv).is_empty());
    }

    #[test]
    fn unknown_part_is_a_warning_and_excluded() {
        let c = Catalog::builtin();
        let mut p = at("brick_1x1", 0.0, 0.0, 0.0);
        p.part = PartRef::Unknown("no_such_part".into());
        let r = validate_flat(&flat(vec![p, at("brick_1x1", 0.0, 0.0, 0.0)]), &c, None);
        assert_eq!(r.count("UnknownPart"), 1);
        assert_eq!(r.issues[0].severity, Severity::Warning);
        assert_eq!(r.stats.parts, 1);
        assert!(!r.has_errors());
    }

    #[test]
    fn illegal_color_is_a_warning() {
        let c = Catalog::builtin();
        let mut p = at("brick_1x1", 0.0, 0.0, 0.0);
        p.color = 9999;
        let r = validate_flat(&flat(vec![p]), &c, None);
        assert_eq!(r.issues, vec![Issue::from(IssueKind::IllegalColor { index: 0, color: 9999 })]);
    }

    #[test]
    fn hanging_part_is_unsupported() {
        let c = Catalog::builtin();
        // 1x4 bridge on two pillars, with a 1x1 hanging under its middle
        let m = flat(vec![
            at("brick_1x1", 0.0, 0.0, 0.0),
            at("brick_1x1", 0.0, 0.0, 60.0),
            at("brick_1x4", 0.0, -24.0, 30.0),
            at("plate_1x1", 0.0, -16.0, 20.0),
        ]);
        let r = validate_flat(&m, &c, None);
        assert_eq!(r.count("Unsupported"), 1, "{:?}", r.issues);
        assert_eq!(r.count("FloatingComponent"), 0);
    }

    #[test]
    fn issues_are_ordered_by_step() {
        let c = Catalog::builtin();
        let m = FlatModel::from_steps(vec![
            vec![at("brick_1x1", 0.0, -96.0, 0.0)],
            vec![at("brick_1x1", 100.0, 0.0, 0.0), at("brick_1x1", 100.0, 0.0, 0.0)],
        ]);
        let r = validate_flat(&m, &c, None);
        let steps: Vec<usize> = r
            .issues
            .iter()
            .map(|i| match &i.kind {
                IssueKind::OrderViolation { step, .. } => *step,
                k => m.placements[k.primary_index().unwrap()].step_index,
            })
            .collect();
        let mut sorted = steps.clone();
        sorted.sort();
        assert_eq!(steps, sorted);
    }
}
