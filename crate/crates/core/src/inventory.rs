//! Bills of materials, cross-model part usage and the provisioning
//! (print-per-tool vs. reusable kit) comparison.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::catalog::Catalog;
use crate::ldraw::LdrawLine;
use crate::model::{Model, PartRef};

/// Comment keyword carrying a BOM functional-role annotation: `0 // ROLE <part> <text>`.
pub const ROLE_KEYWORD: &str = "ROLE";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InventoryError {
    #[error("line {line}: expected `<part> <count>`")]
    Syntax { line: usize },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("total print time is zero")]
    ZeroPrintTime,
    #[error("total print mass is zero")]
    ZeroPrintMass,
}

/// Available part counts.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Inventory {
    pub counts: BTreeMap<String, u32>,
}

impl Inventory {
    pub fn from_counts<'a>(counts: impl IntoIterator<Item = (&'a str, u32)>) -> Self {
        Inventory { counts: counts.into_iter().map(|(k, v)| (k.to_string(), v)).collect() }
    }

    /// One `part_id count` pair per line; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Inventory, InventoryError> {
        let mut inv = Inventory::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut words = line.split_whitespace();
            let (Some(id), Some(n), None) = (words.next(), words.next(), words.next()) else {
                return Err(InventoryError::Syntax { line: i + 1 });
            };
            let n: u32 = n.parse().map_err(|_| InventoryError::Syntax { line: i + 1 })?;
            *inv.counts.entry(id.to_string()).or_default() += n;
        }
        Ok(inv)
    }

    pub fn count(&self, part: &str) -> u32 {
        self.counts.get(part).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u32 {
        self.counts.values().sum()
    }

    /// Total mass in grams and whether any part's mass was estimated.
    pub fn total_mass_g(&self, catalog: &Catalog) -> (f64, bool) {
        let mut estimated = false;
        let mut total = 0.0;
        for (id, &n) in &self.counts {
            match catalog.get(id) {
                Some(spec) => {
                    let (m, est) = spec.mass_or_estimate();
                    estimated |= est;
                    total += m * f64::from(n);
                }
                None => estimated = true,
            }
        }
        (total, estimated)
    }

    /// Usage of a model as an inventory.
    pub fn of_model(model: &Model) -> Inventory {
        let mut inv = Inventory::default();
        for p in model.flatten().placements {
            *inv.counts.entry(p.part.name().to_string()).or_default() += 1;
        }
        inv
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BomRow {
    pub part: String,
    pub description: String,
    pub count: usize,
    pub functional_role: Option<String>,
}

/// `ROLE` annotations keyed by part id.
pub fn roles(model: &Model) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for line in model.meta_lines() {
        let LdrawLine::Comment(text) = line else { continue };
        let mut words = text.splitn(3, ' ');
        if words.next() != Some(ROLE_KEYWORD) {
            continue;
        }
        if let (Some(part), Some(role)) = (words.next(), words.next()) {
            out.entry(part.to_string()).or_insert_with(|| role.trim().to_string());
        }
    }
    out
}

/// Bill of materials, count descending then part id.
pub fn bom(model: &Model, catalog: &Catalog) -> Vec<BomRow> {
    let mut counts: BTreeMap<&PartRef, usize> = BTreeMap::new();
    let flat = model.flatten();
    for p in &flat.placements {
        *counts.entry(&p.part).or_default() += 1;
    }
    let roles = roles(model);
    let mut rows: Vec<BomRow> = counts
        .into_iter()
        .map(|(part, count)| BomRow {
            part: part.name().to_string(),
            description: match part {
                PartRef::Known(id) => catalog.get(id).map_or_else(|| id.clone(), |s| s.display_name.clone()),
                PartRef::Unknown(_) => "(unknown part)".to_string(),
            },
            count,
            functional_role: roles.get(part.name()).cloned(),
        })
        .collect();
    rows.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.part.cmp(&b.part)));
    rows
}

pub fn bom_csv(rows: &[BomRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["part_id", "description", "count", "functional_role"]).expect("in-memory write");
    for r in rows {
        let count = r.count.to_string();
        w.write_record([&r.part, &r.description, &count, r.functional_role.as_deref().unwrap_or("")])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush to vec")).expect("utf-8 input")
}

/// Pipe-separated text table: Part ID | Description | Count | Functional Role.
pub fn bom_table(rows: &[BomRow]) -> String {
    let mut out = String::from("Part ID | Description | Count | Functional Role\n");
    for r in rows {
        let line = format!("{} | {} | {} | {}", r.part, r.description, r.count, r.functional_role.as_deref().unwrap_or(""));
        let _ = writeln!(out, "{}", line.trim_end());
    }
    out
}

/// Per-part placement totals across a corpus, descending then by id.
pub fn usage_ranking(corpus: &[Model]) -> Result<Vec<(String, usize)>, InventoryError> {
    if corpus.is_empty() {
        return Err(InventoryError::EmptyCorpus);
    }
    let mut totals: BTreeMap<String, usize> = BTreeMap::new();
    for m in corpus {
        for p in m.flatten().placements {
            *totals.entry(p.part.name().to_string()).or_default() += 1;
        }
    }
    let mut out: Vec<(String, usize)> = totals.into_iter().collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrintedTool {
    pub print_minutes: f64,
    pub print_mass_g: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModularKit {
    pub reconfig_minutes_per_tool: f64,
    pub kit_mass_g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProvisioningComparison {
    pub tools: usize,
    pub print_minutes: f64,
    pub print_mass_g: f64,
    pub modular_minutes: f64,
    pub kit_mass_g: f64,
    /// modular time / print time
    pub time_ratio: f64,
    /// kit mass / print mass
    pub mass_ratio: f64,
    pub time_percent: i64,
    pub mass_percent: i64,
    pub summary: String,
}

impl ProvisioningComparison {
    /// How many times lighter the kit is than the printed set.
    pub fn mass_reduction(&self) -> f64 {
        1.0 / self.mass_ratio
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Metric | Printed ({} tools) | Modular kit | Advantage", self.tools);
        let _ = writeln!(
            out,
            "Mass | {}g | {}g | {:.0}× mass reduction ({}%)",
            trim(self.print_mass_g),
            trim(self.kit_mass_g),
            self.mass_reduction(),
            self.mass_percent
        );
        let _ = writeln!(
            out,
            "Time | {} min | {} min | {}% of the time",
            trim(self.print_minutes),
            trim(self.modular_minutes),
            self.time_percent
        );
        out
    }
}

fn trim(v: f64) -> String {
    crate::ldraw::format_number((v * 100.0).round() / 100.0)
}

/// Compare printing each tool against reconfiguring one reusable kit.
pub fn compare_provisioning(tools: &[PrintedTool], kit: ModularKit) -> Result<ProvisioningComparison, InventoryError> {
    let print_minutes: f64 = tools.iter().map(|t| t.print_minutes).sum();
    let print_mass_g: f64 = tools.iter().map(|t| t.print_mass_g).sum();
    if print_minutes <= 0.0 {
        return Err(InventoryError::ZeroPrintTime);
    }
    if print_mass_g <= 0.0 {
        return Err(InventoryError::ZeroPrintMass);
    }
    let modular_minutes = tools.len() as f64 * kit.reconfig_minutes_per_tool;
    let time_ratio = modular_minutes / print_minutes;
    let mass_ratio = kit.kit_mass_g / print_mass_g;
    let time_percent = (time_ratio * 100.0).round() as i64;
    let mass_percent = (mass_ratio * 100.0).round() as i64;
    let summary = format!("{time_percent}% of the time at {mass_percent}% of the mass");
    Ok(ProvisioningComparison {
        tools: tools.len(),
        print_minutes,
        print_mass_g,
        modular_minutes,
        kit_mass_g: kit.kit_mass_g,
        time_ratio,
        mass_ratio,
        time_percent,
        mass_percent,
        summary,
    })
}
