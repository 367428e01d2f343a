//! Three-axis D/M/I scoring, bag-of-bricks partial credit and model diffs.
//!
//! * D (design): parts resolve, colours are legal, every line parses.
//! * M (model): no overlap, everything connected to the ground.
//! * I (instructions): every step buildable from its prefix, steps sized
//!   for a page.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::catalog::Catalog;
use crate::geometry::Lattice;
use crate::inventory::Inventory;
use crate::model::{FlatModel, Model, PartRef};
use crate::sequencer::{estimate_pages_with_density, DEFAULT_PAGE_DENSITY};
use crate::validator::{validate_flat, IssueKind, MatingGraph, OccupancyGrid, ValidationReport};

/// Tier cut-points. The fractions are shares of all placements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub d_warn: f64,
    pub m_warn: f64,
    pub page_density: usize,
    pub step_target: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { d_warn: 0.02, m_warn: 0.02, page_density: DEFAULT_PAGE_DENSITY, step_target: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Score {
    pub d: u8,
    pub m: u8,
    pub i: u8,
    pub composite: u8,
    /// Bag-of-bricks credit; 1.0 when no inventory was supplied and every placement is locally valid.
    pub partial_credit: f64,
    pub issue_summary: BTreeMap<&'static str, usize>,
}

impl Score {
    pub fn from_tiers(d: u8, m: u8, i: u8) -> Score {
        Score { d, m, i, composite: d + m + i, partial_credit: 1.0, issue_summary: BTreeMap::new() }
    }

    pub fn tiers(&self) -> String {
        format!("D{} M{} I{} {}/9", self.d, self.m, self.i, self.composite)
    }
}

/// Everything a tier decision depends on, separated from the model so tiers
/// can be recomputed for hypothetical issue sets.
#[derive(Debug, Clone, PartialEq)]
pub struct TierInput<'a> {
    pub report: &'a ValidationReport,
    /// All placements, including unresolved ones.
    pub total_parts: usize,
    pub step_sizes: &'a [usize],
    pub syntax_defects: usize,
}

pub fn d_tier(input: &TierInput<'_>, t: &Thresholds) -> u8 {
    if input.syntax_defects > 0 {
        return 1;
    }
    let defects = input
        .report
        .issues
        .iter()
        .filter(|i| matches!(i.kind, IssueKind::UnknownPart { .. } | IssueKind::IllegalColor { .. }))
        .count();
    if defects == 0 {
        3
    } else if (defects as f64) <= t.d_warn * input.total_parts as f64 {
        2
    } else {
        1
    }
}

pub fn m_tier(input: &TierInput<'_>, t: &Thresholds) -> u8 {
    let mut implicated = BTreeSet::new();
    let mut floating = false;
    let mut unsupported = false;
    for issue in &input.report.issues {
        match &issue.kind {
            IssueKind::Collision { a, b, .. } => {
                implicated.insert(*a);
                implicated.insert(*b);
            }
            IssueKind::FloatingComponent { .. } => floating = true,
            IssueKind::Unsupported { .. } => unsupported = true,
            _ => {}
        }
    }
    if floating || (implicated.len() as f64) > t.m_warn * input.total_parts as f64 {
        return 1;
    }
    let single_component = input.report.stats.connected_components == 1;
    if implicated.is_empty() && !unsupported && single_component {
        3
    } else {
        2
    }
}

pub fn i_tier(input: &TierInput<'_>, t: &Thresholds) -> u8 {
    if input.report.issues.iter().any(|i| matches!(i.kind, IssueKind::OrderViolation { .. })) {
        return 1;
    }
    let max_step = 2 * t.page_density;
    if input.step_sizes.iter().all(|&n| (1..=max_step).contains(&n)) {
        3
    } else {
        2
    }
}

pub fn tiers(input: &TierInput<'_>, t: &Thresholds) -> (u8, u8, u8) {
    (d_tier(input, t), m_tier(input, t), i_tier(input, t))
}

/// Score a model. With an inventory, partial credit and inventory breaches are included.
pub fn score(model: &Model, catalog: &Catalog, inventory: Option<&Inventory>, t: &Thresholds) -> Score {
    let flat = model.flatten();
    let report = validate_flat(&flat, catalog, inventory);
    let input = TierInput {
        report: &report,
        total_parts: flat.len(),
        step_sizes: &flat.step_sizes,
        syntax_defects: model.syntax_defects,
    };
    let (d, m, i) = tiers(&input, t);
    Score {
        d,
        m,
        i,
        composite: d + m + i,
        partial_credit: credit_flat(&flat, catalog, inventory),
        issue_summary: report.summary(),
    }
}

/// Fraction of placements that are locally valid when replayed in order.
///
/// A placement is accepted when its part is known, the inventory still has
/// one (then it is consumed), it overlaps nothing accepted so far, and it
/// rests on the ground or mates with an accepted placement. Rejected
/// placements are skipped; they do not invalidate later ones.
pub fn bag_of_bricks_credit(model: &Model, catalog: &Catalog, inventory: &Inventory) -> f64 {
    credit_flat(&model.flatten(), catalog, Some(inventory))
}

pub fn credit_flat(flat: &FlatModel, catalog: &Catalog, inventory: Option<&Inventory>) -> f64 {
    if flat.is_empty() {
        return 1.0;
    }
    let g = MatingGraph::build(&flat.placements, catalog);
    let lattice = Lattice::detect(g.resolved.iter().flatten().map(|r| &r.bbox));
    let mut grid = OccupancyGrid::new(lattice);
    let mut remaining = inventory.map(|inv| inv.counts.clone());
    let mut accepted = vec![false; flat.len()];
    let mut count = 0usize;

    for (i, p) in flat.placements.iter().enumerate() {
        let Some(r) = g.resolved[i].as_ref() else { continue };
        let PartRef::Known(id) = &p.part else { continue };
        if let Some(rem) = remaining.as_ref() {
            if rem.get(id).copied().unwrap_or(0) == 0 {
                continue;
            }
        }
        if grid.collides(r) {
            continue;
        }
        if !(r.on_ground() || g.adjacency[i].iter().any(|&j| j < i && accepted[j])) {
            continue;
        }
        if let Some(rem) = remaining.as_mut() {
            *rem.get_mut(id).expect("checked above") -= 1;
        }
        grid.insert(r);
        accepted[i] = true;
        count += 1;
    }
    count as f64 / flat.len() as f64
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartDelta {
    pub part: String,
    pub color: u32,
    pub count: usize,
}

/// Function-level difference between two models; positions are ignored.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ModelDiff {
    /// Present in the candidate but not the base, by (part, colour).
    pub added: Vec<PartDelta>,
    pub removed: Vec<PartDelta>,
    pub part_count_delta: i64,
    pub step_count_delta: i64,
}

impl ModelDiff {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty() && self.part_count_delta == 0 && self.step_count_delta == 0
    }
}

pub fn diff_models(base: &Model, candidate: &Model) -> ModelDiff {
    let count = |m: &Model| {
        let mut out: BTreeMap<(String, u32), i64> = BTreeMap::new();
        for p in m.flatten().placements {
            *out.entry((p.part.name().to_string(), p.color)).or_default() += 1;
        }
        out
    };
    let a = count(base);
    let b = count(candidate);
    let keys: BTreeSet<&(String, u32)> = a.keys().chain(b.keys()).collect();
    let mut diff = ModelDiff::default();
    for k in keys {
        let delta = b.get(k).copied().unwrap_or(0) - a.get(k).copied().unwrap_or(0);
        let entry = |count: i64| PartDelta { part: k.0.clone(), color: k.1, count: count as usize };
        if delta > 0 {
            diff.added.push(entry(delta));
        } else if delta < 0 {
            diff.removed.push(entry(-delta));
        }
    }
    diff.part_count_delta = b.values().sum::<i64>() - a.values().sum::<i64>();
    diff.step_count_delta = candidate.step_count() as i64 - base.step_count() as i64;
    diff
}

/// One row of the summary table: Parts | Steps | Colors | Part Types | Pages | D | M | I | Composite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreRow {
    pub model: String,
    pub parts: usize,
    pub steps: usize,
    pub colors: usize,
    pub part_types: usize,
    pub pages: usize,
    pub score: Score,
}

impl ScoreRow {
    pub fn new(name: &str, model: &Model, score: Score, t: &Thresholds) -> ScoreRow {
        let flat = model.flatten();
        let colors: BTreeSet<u32> = flat.placements.iter().map(|p| p.color).collect();
        let types: BTreeSet<&str> = flat.placements.iter().map(|p| p.part.name()).collect();
        ScoreRow {
            model: name.to_string(),
            parts: flat.len(),
            steps: flat.step_count(),
            colors: colors.len(),
            part_types: types.len(),
            pages: estimate_pages_with_density(flat.len(), t.page_density),
            score,
        }
    }

    pub fn header() -> String {
        format!(
            "{:<24} {:>6} {:>6} {:>6} {:>10} {:>6}  D  M  I  Composite",
            "Model", "Parts", "Steps", "Colors", "Part Types", "Pages"
        )
    }

    pub fn line(&self) -> String {
        format!(
            "{:<24} {:>6} {:>6} {:>6} {:>10} {:>6}  {}",
            self.model,
            self.parts,
            self.steps,
            self.colors,
            self.part_types,
            self.pages,
            self.score.tiers()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Vec3;
    use crate::model::Placement;
    use crate::validator::{Issue, Stats};

    fn tower(n: usize) -> FlatModel {
        FlatModel::from_steps(
            (0..n).map(|k| vec![Placement::new("brick_2x4", 4, Vec3::new(10.0, -24.0 * k as f64, 30.0))]).collect(),
        )
    }

    #[test]
    fn composite_is_the_sum() {
        assert_eq!(Score::from_tiers(3, 3, 3).composite, 9);
        assert_eq!(Score::from_tiers(3, 2, 3).composite, 8);
        assert_eq!(Score::from_tiers(3, 2, 3).tiers(), "D3 M2 I3 8/9");
    }

    #[test]
    fn valid_tower_scores_full_marks() {
        let c = Catalog::builtin();
        let s = score(&tower(10).into_model("t"), &c, None, &Thresholds::default());
        assert_eq!((s.d, s.m, s.i, s.composite), (3, 3, 3, 9));
        assert_eq!(s.partial_credit, 1.0);
    }

    #[test]
    fn syntax_defects_drop_d_to_one() {
        let c = Catalog::builtin();
        let mut m = tower(3).into_model("t");
        m.syntax_defects = 1;
        let s = score(&m, &c, None, &Thresholds::default());
        assert_eq!(s.d, 1);
        assert!(s.composite <= 7);
    }

    #[test]
    fn few_unknown_parts_give_d2() {
        let c = Catalog::builtin();
        let mut flat = tower(60);
        flat.placements[59].part = PartRef::Unknown("x.dat".into());
        let s = score(&flat.into_model("t"), &c, None, &Thresholds::default());
        assert_eq!(s.d, 2);
    }

    #[test]
    fn credit_of_valid_tower_is_one() {
        let c = Catalog::builtin();
        let m = tower(50).into_model("t");
        let inv = Inventory::from_counts([("brick_2x4", 50)]);
        assert_eq!(bag_of_bricks_credit(&m, &c, &inv), 1.0);
    }

    #[test]
    fn credit_respects_inventory() {
        let c = Catalog::builtin();
        let m = tower(10).into_model("t");
        let inv = Inventory::from_counts([("brick_2x4", 4)]);
        assert_eq!(bag_of_bricks_credit(&m, &c, &inv), 0.4);
    }

    #[test]
    fn credit_of_floating_brick_is_zero() {
        let c = Catalog::builtin();
        let m = FlatModel::from_steps(vec![vec![Placement::new("brick_2x4", 4, Vec3::new(0.0, -48.0, 0.0))]]);
        let inv = Inventory::from_counts([("brick_2x4", 1)]);
        assert_eq!(credit_flat(&m, &c, Some(&inv)), 0.0);
        assert_eq!(credit_flat(&FlatModel::default(), &c, Some(&inv)), 1.0);
    }

    #[test]
    fn oversized_steps_give_i2() {
        let c = Catalog::builtin();
        let mut flat = tower(25);
        flat.step_sizes = vec![25];
        for p in &mut flat.placements {
            p.step_index = 0;
        }
        let s = score(&flat.into_model("t"), &c, None, &Thresholds::default());
        assert_eq!(s.i, 2);
    }

    #[test]
    fn tiers_are_monotone_under_added_errors() {
        let report = ValidationReport {
            issues: vec![],
            stats: Stats { parts: 100, steps: 10, connected_components: 1, grounded: true },
        };
        let sizes = vec![10; 10];
        let t = Thresholds::default();
        let base = TierInput { report: &report, total_parts: 100, step_sizes: &sizes, syntax_defects: 0 };
        let (d0, m0, i0) = tiers(&base, &t);
        let extra = [
            IssueKind::Collision { a: 1, b: 2, cells: 3 },
            IssueKind::FloatingComponent { members: vec![5] },
            IssueKind::OrderViolation { step: 1, index: 4 },
            IssueKind::UnknownPart { index: 3, part: "x".into() },
        ];
        for e in extra {
            let mut r = report.clone();
            r.issues.push(Issue::from(e));
            let input = TierInput { report: &r, ..base.clone() };
            let (d, m, i) = tiers(&input, &t);
            assert!(d <= d0 && m <= m0 && i <= i0);
        }
    }

    #[test]
    fn diff_counts_by_part_and_color() {
        let base = tower(3).into_model("a");
        let mut more = tower(3);
        more.placements.push(Placement::new("plate_1x2", 1, Vec3::new(0.0, -72.0, 0.0)));
        more.placements.push(Placement::new("plate_1x2", 1, Vec3::new(0.0, -80.0, 0.0)));
        more.step_sizes.push(2);
        let cand = more.into_model("b");
        let d = diff_models(&base, &cand);
        assert_eq!(d.added, vec![PartDelta { part: "plate_1x2".into(), color: 1, count: 2 }]);
        assert!(d.removed.is_empty());
        assert_eq!(d.part_count_delta, 2);
        assert_eq!(d.step_count_delta, 1);
        assert!(diff_models(&base, &base).is_empty());
    }

    #[test]
    fn score_row_format_ends_with_tiers() {
        let c = Catalog::builtin();
        let m = tower(4).into_model("t");
        let t = Thresholds::default();
        let row = ScoreRow::new("tower", &m, score(&m, &c, None, &t), &t);
        assert!(row.line().ends_with("D3 M3 I3 9/9"), "{}", row.line());
        assert_eq!((row.parts, row.steps, row.colors, row.part_types, row.pages), (4, 4, 1, 1, 1));
    }
}
