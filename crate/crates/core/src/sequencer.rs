//! Build-order checks, repair and page estimates.
//!
//! A placement in step N is buildable when it rests on the ground or mates
//! with some other placement from steps 1..=N.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use serde::Serialize;
use thiserror::Error;

use crate::catalog::Catalog;
use crate::model::{FlatModel, Model};
use crate::validator::{Connectivity, IssueKind, MatingGraph};

/// Parts per instruction page.
pub const DEFAULT_PAGE_DENSITY: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("model cannot be reordered: {floating} component(s) are not connected to the ground")]
pub struct Unrepairable {
    pub floating: usize,
}

/// Steps as index lists into the flattened placements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepPlan {
    pub steps: Vec<Vec<usize>>,
    pub pages_estimate: usize,
}

impl StepPlan {
    pub fn of(flat: &FlatModel) -> StepPlan {
        StepPlan {
            steps: flat.step_ranges().into_iter().map(|r| r.collect()).collect(),
            pages_estimate: estimate_pages(flat.len()),
        }
    }
}

pub(crate) fn order_violations(flat: &FlatModel, g: &MatingGraph) -> Vec<IssueKind> {
    let step = |i: usize| flat.placements[i].step_index;
    (0..g.len())
        .filter(|&i| g.is_known(i) && !g.on_ground(i))
        .filter(|&i| !g.adjacency[i].iter().any(|&j| step(j) <= step(i)))
        .map(|i| IssueKind::OrderViolation { step: step(i), index: i })
        .collect()
}

/// One `OrderViolation` per placement that has no support in its step prefix.
pub fn check_order(model: &Model, catalog: &Catalog) -> Vec<IssueKind> {
    check_order_flat(&model.flatten(), catalog)
}

pub fn check_order_flat(flat: &FlatModel, catalog: &Catalog) -> Vec<IssueKind> {
    order_violations(flat, &MatingGraph::build(&flat.placements, catalog))
}

/// Reorder placements bottom-up so every prefix is self-supporting.
///
/// Already-valid models come back unchanged. Otherwise the model is flattened
/// and rebuilt greedily: among parts that rest on the ground or mate with
/// what is already placed, the physically lowest goes next, ties by original
/// index. Step sizes are kept; parts missing from the catalog go last.
pub fn repair_order(model: &Model, catalog: &Catalog) -> Result<Model, Unrepairable> {
    let flat = model.flatten();
    let g = MatingGraph::build(&flat.placements, catalog);
    let conn = Connectivity::from_graph(&g);
    let floating = conn.floating().count();
    if floating > 0 {
        return Err(Unrepairable { floating });
    }
    if order_violations(&flat, &g).is_empty() {
        return Ok(model.clone());
    }

    let order = greedy_order(&g);
    let mut placements = Vec::with_capacity(flat.len());
    placements.extend(order.iter().map(|&i| flat.placements[i].clone()));
    placements.extend((0..flat.len()).filter(|&i| !g.is_known(i)).map(|i| flat.placements[i].clone()));
    for p in &mut placements {
        p.submodel = None;
    }
    let repaired = FlatModel { placements, step_sizes: flat.step_sizes.clone() };
    let mut out = repaired.into_model(&model.main.name);
    out.main.header = model.main.header.clone();
    out.main.trailer = model.main.trailer.clone();
    Ok(out)
}

fn greedy_order(g: &MatingGraph) -> Vec<usize> {
    // larger LDraw y is physically lower
    let key = |i: usize| {
        let y = g.resolved[i].as_ref().map_or(0.0, |r| r.bbox.max.y);
        ((y * 1000.0).round() as i64, Reverse(i))
    };
    let mut placed = vec![false; g.len()];
    let mut heap: BinaryHeap<(i64, Reverse<usize>)> =
        (0..g.len()).filter(|&i| g.on_ground(i)).map(key).collect();
    let mut order = Vec::new();
    while let Some((_, Reverse(i))) = heap.pop() {
        if placed[i] {
            continue;
        }
        placed[i] = true;
        order.push(i);
        for &j in &g.adjacency[i] {
            if !placed[j] {
                heap.push(key(j));
            }
        }
    }
    order
}

/// Instruction pages at the default density of ten parts per page.
pub fn estimate_pages(parts: usize) -> usize {
    estimate_pages_with_density(parts, DEFAULT_PAGE_DENSITY)
}

/// `parts / density` rounded half up, at least one page for a non-empty model.
pub fn estimate_pages_with_density(parts: usize, density: usize) -> usize {
    assert!(density > 0, "page density must be positive");
    if parts == 0 {
        return 0;
    }
    ((2 * parts + density) / (2 * density)).max(1)
}

/// What one instruction step adds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepDelta {
    /// 1-based.
    pub step: usize,
    pub added: Vec<(String, usize)>,
    pub cumulative: usize,
}

pub fn step_deltas(model: &Model) -> Vec<StepDelta> {
    let flat = model.flatten();
    let mut cumulative = 0;
    flat.step_ranges()
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let mut added: BTreeMap<String, usize> = BTreeMap::new();
            for p in &flat.placements[r.clone()] {
                *added.entry(p.part.name().to_string()).or_default() += 1;
            }
            cumulative += r.len();
            StepDelta { step: i + 1, added: added.into_iter().collect(), cumulative }
        })
        .collect()
}
