use std::collections::{BTreeMap, HashMap};

use crate::geometry::{Cell, Lattice, Resolved};

/// Two placements whose occupancy cells intersect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CollisionPair {
    pub a: usize,
    pub b: usize,
    pub cells: usize,
}

/// Every intersecting pair, each reported once with `a < b`.
pub fn collisions<'a>(resolved: impl IntoIterator<Item = &'a Resolved>) -> Vec<CollisionPair> {
    let resolved: Vec<&Resolved> = resolved.into_iter().collect();
    let lattice = Lattice::detect(resolved.iter().map(|r| &r.bbox));
    let mut grid: HashMap<Cell, Vec<usize>> = HashMap::new();
    for r in &resolved {
        for c in lattice.cells(&r.bbox) {
            grid.entry(c).or_default().push(r.index);
        }
    }
    let mut pairs: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for occupants in grid.values().filter(|o| o.len() > 1) {
        for (i, &a) in occupants.iter().enumerate() {
            for &b in &occupants[i + 1..] {
                if a != b {
                    *pairs.entry((a.min(b), a.max(b))).or_default() += 1;
                }
            }
        }
    }
    pairs.into_iter().map(|((a, b), cells)| CollisionPair { a, b, cells }).collect()
}

/// Incremental occupancy for replaying placements one at a time.
#[derive(Debug, Clone)]
pub struct OccupancyGrid {
    lattice: Lattice,
    cells: HashMap<Cell, usize>,
}

impl OccupancyGrid {
    pub fn new(lattice: Lattice) -> Self {
        OccupancyGrid { lattice, cells: HashMap::new() }
    }

    pub fn collides(&self, r: &Resolved) -> bool {
        self.lattice.cells(&r.bbox).iter().any(|c| self.cells.contains_key(c))
    }

    pub fn insert(&mut self, r: &Resolved) {
        for c in self.lattice.cells(&r.bbox) {
            self.cells.insert(c, r.index);
        }
    }
}
