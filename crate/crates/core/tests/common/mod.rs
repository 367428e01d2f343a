//! Brute-force oracles and generators shared by the integration tests.
//!
//! Nothing here calls the library's geometry or graph code; parts are
//! transformed from raw catalog numbers with a hand-rolled matrix product.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::PathBuf;

use brickir::ldraw::{Document, LdrawFile, LdrawLine, Meta, SubfileRef};
use brickir::math::{Mat3, Vec3, Yaw};
use brickir::model::{FlatModel, Placement};
use brickir::Catalog;
use rand::seq::IndexedRandom;
use rand::Rng;

pub const TOL: f64 = 0.5;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn apply(m: &Mat3, v: [f64; 3]) -> [f64; 3] {
    let a = &m.0;
    [
        a[0] * v[0] + a[1] * v[1] + a[2] * v[2],
        a[3] * v[0] + a[4] * v[1] + a[5] * v[2],
        a[6] * v[0] + a[7] * v[1] + a[8] * v[2],
    ]
}

fn add(a: [f64; 3], p: Vec3) -> [f64; 3] {
    [a[0] + p.x, a[1] + p.y, a[2] + p.z]
}

#[derive(Debug, Clone)]
pub struct Body {
    pub min: [f64; 3],
    pub max: [f64; 3],
    pub studs: Vec<[f64; 3]>,
    pub sockets: Vec<[f64; 3]>,
}

pub fn body(p: &Placement, catalog: &Catalog) -> Option<Body> {
    let spec = catalog.get(p.part.known()?)?;
    let hw = f64::from(spec.footprint_studs.0) * 10.0;
    let hd = f64::from(spec.footprint_studs.1) * 10.0;
    let h = f64::from(spec.height_ldu);
    let mut min = [f64::INFINITY; 3];
    let mut max = [f64::NEG_INFINITY; 3];
    for x in [-hw, hw] {
        for y in [-h, 0.0] {
            for z in [-hd, hd] {
                let c = add(apply(&p.orientation, [x, y, z]), p.position);
                for k in 0..3 {
                    min[k] = min[k].min(c[k]);
                    max[k] = max[k].max(c[k]);
                }
            }
        }
    }
    let tf = |v: &Vec3| add(apply(&p.orientation, [v.x, v.y, v.z]), p.position);
    Some(Body { min, max, studs: spec.studs.iter().map(tf).collect(), sockets: spec.sockets.iter().map(tf).collect() })
}

pub fn bodies(placements: &[Placement], catalog: &Catalog) -> Vec<Option<Body>> {
    placements.iter().map(|p| body(p, catalog)).collect()
}

/// Pairs whose boxes overlap with positive volume on every axis.
pub fn overlap_pairs(bodies: &[Option<Body>]) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for i in 0..bodies.len() {
        let Some(a) = &bodies[i] else { continue };
        for (j, b) in bodies.iter().enumerate().skip(i + 1) {
            let Some(b) = b else { continue };
            if (0..3).all(|k| a.max[k].min(b.max[k]) - a.min[k].max(b.min[k]) > TOL) {
                out.insert((i, j));
            }
        }
    }
    out
}

fn near(a: &[f64; 3], b: &[f64; 3]) -> bool {
    (0..3).all(|k| (a[k] - b[k]).abs() <= TOL)
}

/// True when a stud of `lower` sits in a socket of `upper`.
pub fn mates(lower: &Body, upper: &Body) -> bool {
    lower.studs.iter().any(|s| upper.sockets.iter().any(|c| near(s, c)))
}

pub fn grounded(b: &Body) -> bool {
    b.max[1].abs() <= TOL
}

pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Components of known parts as sorted member lists, with a grounded flag each.
pub fn components(bodies: &[Option<Body>]) -> BTreeSet<(Vec<usize>, bool)> {
    let n = bodies.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        let Some(a) = &bodies[i] else { continue };
        for (j, b) in bodies.iter().enumerate() {
            let Some(b) = b else { continue };
            if i != j && mates(a, b) {
                uf.union(i, j);
            }
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in (0..n).filter(|&i| bodies[i].is_some()) {
        groups.entry(uf.find(i)).or_default().push(i);
    }
    groups
        .into_values()
        .map(|m| {
            let g = m.iter().any(|&i| grounded(bodies[i].as_ref().unwrap()));
            (m, g)
        })
        .collect()
}

/// Placements that rest on nothing in their step prefix, by hashed coincidence.
pub fn prefix_violations(flat: &FlatModel, catalog: &Catalog) -> Vec<usize> {
    let bodies = bodies(&flat.placements, catalog);
    let key = |v: &[f64; 3]| [v[0].round() as i64, v[1].round() as i64, v[2].round() as i64];
    let mut studs: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    let mut sockets: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    for (i, b) in bodies.iter().enumerate() {
        let Some(b) = b else { continue };
        for s in &b.studs {
            studs.entry(key(s)).or_default().push(i);
        }
        for s in &b.sockets {
            sockets.entry(key(s)).or_default().push(i);
        }
    }
    let step = |i: usize| flat.placements[i].step_index;
    let mut out = Vec::new();
    for (i, b) in bodies.iter().enumerate() {
        let Some(b) = b else { continue };
        if grounded(b) {
            continue;
        }
        let partners = b
            .sockets
            .iter()
            .filter_map(|s| studs.get(&key(s)))
            .chain(b.studs.iter().filter_map(|s| sockets.get(&key(s))))
            .flatten();
        if !partners.into_iter().any(|&j| j != i && step(j) <= step(i)) {
            out.push(i);
        }
    }
    out
}

pub const SCENE_PARTS: [&str; 12] = [
    "brick_1x1", "brick_1x2", "brick_1x4", "brick_2x2", "brick_2x4", "plate_1x1", "plate_1x2", "plate_2x2",
    "plate_2x4", "plate_4x4", "round_1x1", "arch_1x4",
];

/// Centre of a part whose min-corner stud is at grid `(gx, gz)`.
pub fn anchored(catalog: &Catalog, part: &str, gx: i64, gz: i64, level: i64, yaw: Yaw, color: u32) -> Placement {
    let spec = catalog.get(part).expect("scene part");
    let (w, d) = spec.footprint_studs;
    let (wx, wz) = if yaw.swaps_axes() { (d, w) } else { (w, d) };
    let pos = Vec3::new(
        gx as f64 * 20.0 + (f64::from(wx) - 1.0) * 10.0,
        -8.0 * level as f64,
        gz as f64 * 20.0 + (f64::from(wz) - 1.0) * 10.0,
    );
    Placement::new(part, color, pos).with_orientation(yaw.matrix())
}

/// Random lattice-aligned scene packed into a small volume so that
/// collisions and matings are both common.
pub fn random_scene(rng: &mut impl Rng, n: usize, catalog: &Catalog) -> FlatModel {
    let span = ((n as f64).sqrt() as i64).max(2) + 2;
    let placements = (0..n)
        .map(|_| {
            let part = SCENE_PARTS.choose(rng).unwrap();
            let yaw = Yaw::ALL[rng.random_range(0..4)];
            anchored(catalog, part, rng.random_range(0..span), rng.random_range(0..span), rng.random_range(0..12), yaw, 4)
        })
        .collect();
    FlatModel { placements, step_sizes: vec![n] }
}

/// Unit cells (20 × 8 × 20) covered by a box whose x/z edges sit on odd
/// multiples of 10, as anchored parts do.
pub fn cells(b: &Body) -> Vec<[i64; 3]> {
    let r = |v: f64, off: f64, size: f64| ((v + off) / size).round() as i64;
    let mut out = Vec::new();
    for x in r(b.min[0], 10.0, 20.0)..r(b.max[0], 10.0, 20.0) {
        for y in r(b.min[1], 0.0, 8.0)..r(b.max[1], 0.0, 8.0) {
            for z in r(b.min[2], 10.0, 20.0)..r(b.max[2], 10.0, 20.0) {
                out.push([x, y, z]);
            }
        }
    }
    out
}

/// Random connected, grounded, collision-free structure grown bottom-up.
/// Every new part either stands on the ground or puts its anchor socket on a
/// stud of an earlier part.
pub fn random_structure(rng: &mut impl Rng, n: usize, catalog: &Catalog) -> Vec<Placement> {
    let parts = ["brick_1x1", "brick_1x2", "brick_1x4", "brick_2x2", "brick_2x4", "plate_1x2", "plate_2x2", "plate_2x4"];
    let mut out: Vec<Placement> = Vec::new();
    let mut studs: Vec<[f64; 3]> = Vec::new();
    let mut occupied: HashSet<[i64; 3]> = HashSet::new();
    let mut attempts = 0;
    while out.len() < n {
        attempts += 1;
        assert!(attempts < 200 * n + 1000, "structure generator stalled");
        let part = parts.choose(rng).unwrap();
        let yaw = Yaw::ALL[rng.random_range(0..4)];
        let (gx, gz, level) = if out.is_empty() || rng.random_bool(0.05) {
            (rng.random_range(-20..20), rng.random_range(-20..20), 0)
        } else {
            let s = studs.choose(rng).unwrap();
            ((s[0] / 20.0).round() as i64, (s[2] / 20.0).round() as i64, (-s[1] / 8.0).round() as i64)
        };
        let p = anchored(catalog, part, gx, gz, level, yaw, 71);
        let b = body(&p, catalog).unwrap();
        let c = cells(&b);
        if c.iter().any(|k| occupied.contains(k)) {
            continue;
        }
        occupied.extend(c);
        studs.extend(b.studs.iter().copied());
        out.push(p);
    }
    out
}

/// Split `n` placements into random non-empty steps.
pub fn random_steps(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut sizes = Vec::new();
    let mut left = n;
    while left > 0 {
        let k = rng.random_range(1..=left.min(12));
        sizes.push(k);
        left -= k;
    }
    sizes
}

pub fn with_steps(placements: Vec<Placement>, sizes: Vec<usize>) -> FlatModel {
    let mut placements = placements;
    let mut idx = 0;
    for (s, &n) in sizes.iter().enumerate() {
        for p in &mut placements[idx..idx + n] {
            p.step_index = s;
        }
        idx += n;
    }
    FlatModel { placements, step_sizes: sizes }
}

const WORDS: [&str; 8] = ["base", "left", "arm", "Name:", "BFC", "hinge", "tower", "x1"];

fn words(rng: &mut impl Rng) -> String {
    let n = rng.random_range(1..4);
    (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

/// Decimal with at most three places, so text and value round-trip exactly.
fn coord(rng: &mut impl Rng) -> f64 {
    rng.random_range(-200_000..200_000) as f64 / 1000.0
}

pub fn random_ref(rng: &mut impl Rng, files: &[&str]) -> LdrawLine {
    let rotation = if rng.random_bool(0.7) {
        Yaw::ALL[rng.random_range(0..4)].matrix()
    } else {
        Mat3(std::array::from_fn(|_| rng.random_range(-1000..1000) as f64 / 1000.0))
    };
    LdrawLine::SubfileRef(SubfileRef {
        color: *[0u32, 1, 4, 14, 16, 71, 72].choose(rng).unwrap(),
        translation: Vec3::new(coord(rng), coord(rng), coord(rng)),
        rotation,
        file: files.choose(rng).unwrap().to_string(),
    })
}

fn random_line(rng: &mut impl Rng, files: &[&str]) -> LdrawLine {
    match rng.random_range(0..10) {
        0 => LdrawLine::Empty,
        1 => LdrawLine::Comment(words(rng)),
        2 => LdrawLine::Meta(Meta::Step),
        3 => LdrawLine::Meta(Meta::Other(words(rng))),
        4 => LdrawLine::Opaque(format!("2 24 {} 0 0 {} 0 0", rng.random_range(-50..50), rng.random_range(-50..50))),
        5 => LdrawLine::Opaque("4 16 -10 0 -10 10 0 -10 10 0 10 -10 0 10".to_string()),
        _ => random_ref(rng, files),
    }
}

/// Random well-formed document, multi-part about a third of the time.
pub fn random_document(rng: &mut impl Rng, lines: usize) -> Document {
    let parts = ["3001.dat", "3003.dat", "3022.dat", "3024.dat"];
    if rng.random_bool(0.66) {
        let lines = (0..lines.max(1)).map(|_| random_line(rng, &parts)).collect();
        return Document::single(LdrawFile { lines, ..LdrawFile::default() });
    }
    let n = rng.random_range(1..4);
    let names: Vec<String> = (0..n).map(|i| format!("part{i}.ldr")).collect();
    let mut files = Vec::new();
    for (i, name) in names.iter().enumerate() {
        let mut callable: Vec<&str> = parts.to_vec();
        callable.extend(names[i + 1..].iter().map(String::as_str));
        let mut f = LdrawFile::new(name.clone());
        f.lines = (0..lines / n + 1).map(|_| random_line(rng, &callable)).collect();
        files.push(f);
    }
    Document { multipart: true, files }
}
