//! Contradiction-matrix subset for modular construction and the 40
//! inventive principles.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::LazyLock;

use serde::Serialize;
use thiserror::Error;

use crate::ldraw::LdrawLine;
use crate::model::Model;

/// Comment keyword for principle tags: `0 // TRIZ <n> <rationale>`.
pub const TRIZ_KEYWORD: &str = "TRIZ";

const MATRIX_DATA: &str = include_str!("../data/triz_matrix.tsv");
const PRINCIPLE_DATA: &str = include_str!("../data/triz_principles.tsv");

/// The encoded engineering parameters, in table order.
pub const PARAMETERS: [(u8, &str); 10] = [
    (1, "Weight of moving object"),
    (12, "Shape"),
    (14, "Strength"),
    (26, "Quantity of substance/matter"),
    (32, "Ease of manufacture"),
    (33, "Ease of operation"),
    (34, "Ease of repair"),
    (35, "Adaptability or versatility"),
    (36, "Device complexity"),
    (39, "Productivity"),
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrizError {
    #[error("parameter {0} is not in the encoded subset")]
    UnknownParameter(u32),
    #[error("principle {0} is outside 1..=40")]
    OutOfRange(u32),
    #[error("matrix data: {0}")]
    Data(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Cell {
    Principles(Vec<u8>),
    SelfContradiction,
    NoDocumentedPattern,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Principles(p) => {
                let s: Vec<String> = p.iter().map(u8::to_string).collect();
                f.write_str(&s.join(", "))
            }
            Cell::SelfContradiction => f.write_str("self-contradiction"),
            Cell::NoDocumentedPattern => f.write_str("no documented pattern"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrizMatrix {
    /// (improve, worsen) -> principles
    cells: BTreeMap<(u8, u8), Vec<u8>>,
}

static BUILTIN: LazyLock<TrizMatrix> =
    LazyLock::new(|| TrizMatrix::parse(MATRIX_DATA).expect("builtin matrix is valid"));

static PRINCIPLES: LazyLock<Vec<Principle>> = LazyLock::new(|| parse_principles(PRINCIPLE_DATA));

fn is_parameter(n: u32) -> bool {
    PARAMETERS.iter().any(|(p, _)| u32::from(*p) == n)
}

pub fn parameter_name(n: u32) -> Option<&'static str> {
    PARAMETERS.iter().find(|(p, _)| u32::from(*p) == n).map(|(_, name)| *name)
}

impl TrizMatrix {
    pub fn builtin() -> &'static TrizMatrix {
        &BUILTIN
    }

    /// Tab-separated: a header of improving parameters, then one row per
    /// worsening parameter. `-` marks the diagonal, empty cells have no pattern.
    pub fn parse(text: &str) -> Result<TrizMatrix, TrizError> {
        let mut rows = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
        let header = rows.next().ok_or_else(|| TrizError::Data("missing header".into()))?;
        let improve: Vec<u8> = header
            .split('\t')
            .skip(1)
            .map(|h| h.trim().parse::<u8>().map_err(|_| TrizError::Data(format!("bad header `{h}`"))))
            .collect::<Result<_, _>>()?;
        let mut cells = BTreeMap::new();
        for row in rows {
            let mut fields = row.split('\t');
            let worsen: u8 = fields
                .next()
                .and_then(|f| f.trim().parse().ok())
                .ok_or_else(|| TrizError::Data(format!("bad row `{row}`")))?;
            let fields: Vec<&str> = fields.collect();
            if fields.len() != improve.len() {
                return Err(TrizError::Data(format!("row {worsen} has {} cells", fields.len())));
            }
            for (&imp, cell) in improve.iter().zip(fields) {
                let cell = cell.trim();
                if cell == "-" {
                    if imp != worsen {
                        return Err(TrizError::Data(format!("`-` off the diagonal at ({imp}, {worsen})")));
                    }
                    continue;
                }
                if cell.is_empty() {
                    continue;
                }
                let nums: Vec<u8> = cell
                    .split(',')
                    .map(|n| n.trim().parse::<u8>().ok().filter(|n| (1..=40).contains(n)))
                    .collect::<Option<_>>()
                    .ok_or_else(|| TrizError::Data(format!("bad cell `{cell}`")))?;
                cells.insert((imp, worsen), nums);
            }
        }
        Ok(TrizMatrix { cells })
    }

    pub fn lookup(&self, improve: u32, worsen: u32) -> Result<Cell, TrizError> {
        for p in [improve, worsen] {
            if !is_parameter(p) {
                return Err(TrizError::UnknownParameter(p));
            }
        }
        if improve == worsen {
            return Ok(Cell::SelfContradiction);
        }
        Ok(match self.cells.get(&(improve as u8, worsen as u8)) {
            Some(p) => Cell::Principles(p.clone()),
            None => Cell::NoDocumentedPattern,
        })
    }
}

/// Shorthand for a lookup in the built-in matrix.
pub fn lookup(improve: u32, worsen: u32) -> Result<Cell, TrizError> {
    TrizMatrix::builtin().lookup(improve, worsen)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Principle {
    pub number: u8,
    pub name: String,
    pub modular_note: Option<String>,
}

fn parse_principles(text: &str) -> Vec<Principle> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let mut f = l.split('\t');
            Principle {
                number: f.next().and_then(|n| n.parse().ok()).expect("principle number"),
                name: f.next().expect("principle name").to_string(),
                modular_note: f.next().map(str::to_string),
            }
        })
        .collect()
}

pub fn principle(n: u32) -> Result<&'static Principle, TrizError> {
    if !(1..=40).contains(&n) {
        return Err(TrizError::OutOfRange(n));
    }
    Ok(&PRINCIPLES[(n - 1) as usize])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrincipleTag {
    pub principle: u8,
    pub name: String,
    pub rationale: String,
}

impl PrincipleTag {
    pub fn new(n: u32, rationale: impl Into<String>) -> Result<PrincipleTag, TrizError> {
        let p = principle(n)?;
        Ok(PrincipleTag { principle: p.number, name: p.name.clone(), rationale: rationale.into() })
    }
}

/// Principle tags declared in a model's `TRIZ` comments. Invalid numbers are skipped.
pub fn tags(model: &Model) -> Vec<PrincipleTag> {
    model
        .meta_lines()
        .filter_map(|l| match l {
            LdrawLine::Comment(t) => t.strip_prefix(TRIZ_KEYWORD).and_then(|r| r.strip_prefix(' ')),
            _ => None,
        })
        .filter_map(|rest| {
            let (n, rationale) = rest.split_once(' ').unwrap_or((rest, ""));
            PrincipleTag::new(n.parse().ok()?, rationale.trim()).ok()
        })
        .collect()
}

/// How many models carry each principle, descending then by number.
pub fn tag_report<T: AsRef<[PrincipleTag]>>(corpus: &[T]) -> Vec<(u8, usize)> {
    let mut counts: BTreeMap<u8, usize> = BTreeMap::new();
    for tags in corpus {
        let distinct: BTreeSet<u8> = tags.as_ref().iter().map(|t| t.principle).collect();
        for p in distinct {
            *counts.entry(p).or_default() += 1;
        }
    }
    let mut out: Vec<(u8, usize)> = counts.into_iter().collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    out
}
