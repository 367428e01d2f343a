//! Stud/socket mating graph over a flattened model.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::catalog::Catalog;
use crate::geometry::Resolved;
use crate::math::{Vec3, COORD_TOLERANCE};
use crate::model::Placement;

/// `lower`'s studs are received by `upper`'s sockets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Mating {
    pub lower: usize,
    pub upper: usize,
    pub studs: usize,
}

type Key = (i64, i64, i64);

fn key(v: Vec3) -> Key {
    (v.x.round() as i64, v.y.round() as i64, v.z.round() as i64)
}

/// Placements with resolved geometry and their stud/socket adjacency.
#[derive(Debug, Clone)]
pub struct MatingGraph {
    /// Indexed by placement; `None` for parts missing from the catalog.
    pub resolved: Vec<Option<Resolved>>,
    pub matings: Vec<Mating>,
    /// Neighbours per placement, ascending.
    pub adjacency: Vec<Vec<usize>>,
}

impl MatingGraph {
    pub fn build(placements: &[Placement], catalog: &Catalog) -> MatingGraph {
        let resolved: Vec<Option<Resolved>> = placements
            .iter()
            .enumerate()
            .map(|(i, p)| Resolved::new(i, p, catalog).ok())
            .collect();

        let mut sockets: HashMap<Key, Vec<(usize, Vec3)>> = HashMap::new();
        for r in resolved.iter().flatten() {
            for &s in &r.sockets {
                sockets.entry(key(s)).or_default().push((r.index, s));
            }
        }

        let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
        for r in resolved.iter().flatten() {
            for &stud in &r.studs {
                let (kx, ky, kz) = key(stud);
                // rounding can push a coincident socket into a neighbouring key
                let mut hits: Vec<usize> = Vec::new();
                for dx in -1..=1 {
                    for dy in -1..=1 {
                        for dz in -1..=1 {
                            let Some(list) = sockets.get(&(kx + dx, ky + dy, kz + dz)) else { continue };
                            hits.extend(
                                list.iter()
                                    .filter(|(j, s)| *j != r.index && s.approx_eq(stud, COORD_TOLERANCE))
                                    .map(|(j, _)| *j),
                            );
                        }
                    }
                }
                hits.sort_unstable();
                hits.dedup();
                for j in hits {
                    *counts.entry((r.index, j)).or_default() += 1;
                }
            }
        }

        let mut matings: Vec<Mating> = counts
            .into_iter()
            .map(|((lower, upper), studs)| Mating { lower, upper, studs })
            .collect();
        matings.sort_by_key(|m| (m.lower, m.upper));

        let mut adjacency = vec![Vec::new(); placements.len()];
        for m in &matings {
            adjacency[m.lower].push(m.upper);
            adjacency[m.upper].push(m.lower);
        }
        for a in &mut adjacency {
            a.sort_unstable();
            a.dedup();
        }
        MatingGraph { resolved, matings, adjacency }
    }

    pub fn len(&self) -> usize {
        self.resolved.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resolved.is_empty()
    }

    pub fn is_known(&self, i: usize) -> bool {
        self.resolved[i].is_some()
    }

    pub fn on_ground(&self, i: usize) -> bool {
        self.resolved[i].as_ref().is_some_and(Resolved::on_ground)
    }

    /// Some other placement's studs enter this placement's sockets.
    pub fn supported_from_below(&self) -> Vec<bool> {
        let mut out = vec![false; self.len()];
        for m in &self.matings {
            out[m.upper] = true;
        }
        out
    }

    /// Connected components over known placements, each sorted, ordered by first member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] || !self.is_known(start) {
                continue;
            }
            let mut comp = Vec::new();
            let mut queue = VecDeque::from([start]);
            seen[start] = true;
            while let Some(i) = queue.pop_front() {
                comp.push(i);
                for &j in &self.adjacency[i] {
                    if !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// Component partition with groundedness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Connectivity {
    pub components: Vec<Vec<usize>>,
    pub grounded: Vec<bool>,
    pub matings: Vec<Mating>,
}

impl Connectivity {
    pub fn from_graph(g: &MatingGraph) -> Connectivity {
        let components = g.components();
        let grounded = components.iter().map(|c| c.iter().any(|&i| g.on_ground(i))).collect();
        Connectivity { components, grounded, matings: g.matings.clone() }
    }

    pub fn floating(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.components.iter().zip(&self.grounded).filter(|(_, g)| !**g).map(|(c, _)| c)
    }

    pub fn all_grounded(&self) -> bool {
        self.grounded.iter().all(|g| *g)
    }
}
