use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use brickir::builder::{self, BuildSpec};
use brickir::inventory::{self, ModularKit, PrintedTool};
use brickir::scorer::ScoreRow;
use brickir::sequencer::{self, estimate_pages_with_density, StepPlan};
use brickir::triz::{self, PARAMETERS};
use brickir::{ldraw, Catalog, Inventory, Model, Thresholds};

const EXIT_USAGE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_INVALID: u8 = 3;

#[derive(Parser)]
#[command(name = "brickir", version, about = "Compile, validate and score LDraw brick models")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Part catalog (TOML); the built-in catalog is used when absent.
    #[arg(long, global = true, env = "BRICKIR_CATALOG")]
    catalog: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the result here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    /// Largest tolerated share of defective placements for D2.
    #[arg(long, global = true, default_value_t = 0.02)]
    d_warn: f64,
    /// Largest tolerated share of colliding placements for M2.
    #[arg(long, global = true, default_value_t = 0.02)]
    m_warn: f64,
    /// Parts per instruction page.
    #[arg(long, global = true, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    page_density: u64,
    /// Target parts per step when packing.
    #[arg(long, global = true, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    step_target: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a build spec to LDraw.
    Compile {
        spec: PathBuf,
        /// Re-cut steps to the step target.
        #[arg(long)]
        pack: bool,
    },
    /// Check a model for collisions, floating parts, order and inventory problems.
    Validate {
        model: PathBuf,
        #[arg(long)]
        inventory: Option<PathBuf>,
    },
    /// Score models on drawing, mechanics and instructions.
    Score {
        #[arg(required = true)]
        models: Vec<PathBuf>,
        #[arg(long)]
        inventory: Option<PathBuf>,
    },
    /// Bill of materials.
    Bom {
        model: PathBuf,
        #[arg(long)]
        csv: bool,
    },
    /// Per-step additions and the page estimate.
    Steps { model: PathBuf },
    /// Reorder a model so every step is supported by earlier ones.
    Repair { model: PathBuf },
    /// Bag-of-bricks partial credit against an inventory.
    Credit {
        model: PathBuf,
        #[arg(long)]
        inventory: PathBuf,
    },
    /// Part reuse across a corpus of models.
    Usage {
        #[arg(required = true)]
        models: Vec<PathBuf>,
        /// Rank inventive-principle tags instead of parts.
        #[arg(long)]
        principles: bool,
    },
    /// Contradiction-matrix lookups.
    Triz {
        #[arg(long, requires = "worsen")]
        improve: Option<u32>,
        #[arg(long, requires = "improve")]
        worsen: Option<u32>,
        #[arg(long, conflicts_with_all = ["improve", "worsen"])]
        principle: Option<u32>,
    },
    /// Compare printing tools against reconfiguring a modular kit.
    Compare {
        /// One printed tool as MINUTES:GRAMS; repeat per tool.
        #[arg(long = "print", required = true, value_parser = parse_tool)]
        tools: Vec<PrintedTool>,
        /// Reconfiguration minutes per tool.
        #[arg(long)]
        reconfig: f64,
        #[arg(long)]
        kit_mass: f64,
    },
}

fn parse_tool(s: &str) -> Result<PrintedTool, String> {
    let (m, g) = s.split_once(':').ok_or("expected MINUTES:GRAMS")?;
    let print_minutes: f64 = m.trim().parse().map_err(|_| format!("bad minutes `{m}`"))?;
    let print_mass_g: f64 = g.trim().parse().map_err(|_| format!("bad grams `{g}`"))?;
    if print_minutes < 0.0 || print_mass_g < 0.0 {
        return Err("values must be non-negative".into());
    }
    Ok(PrintedTool { print_minutes, print_mass_g })
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn fail(code: u8, error: anyhow::Error) -> Failure {
    Failure { code, error }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: EXIT_USAGE, error }
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        io::stdin().read_to_string(&mut text).context("reading stdin")?;
    } else {
        text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    }
    Ok(text)
}

fn emit(g: &Global, text: &str) -> Result<(), Failure> {
    match &g.output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => io::stdout().write_all(text.as_bytes()).context("writing stdout")?,
    }
    Ok(())
}

fn emit_json(g: &Global, v: &serde_json::Value) -> Result<(), Failure> {
    let mut s = serde_json::to_string_pretty(v).context("encoding json")?;
    s.push('\n');
    emit(g, &s)
}

fn load_catalog(g: &Global) -> Result<Catalog, Failure> {
    match &g.catalog {
        Some(p) => Catalog::load(p).with_context(|| format!("catalog {}", p.display())).map_err(Failure::from),
        None => Ok(Catalog::builtin()),
    }
}

fn load_inventory(path: &Path) -> Result<Inventory, Failure> {
    let text = read_input(path)?;
    Inventory::parse(&text)
        .with_context(|| format!("inventory {}", path.display()))
        .map_err(|e| fail(EXIT_PARSE, e))
}

/// Strict parse: the first malformed line is an error.
fn load_model(path: &Path, catalog: &Catalog) -> Result<Model, Failure> {
    let text = read_input(path)?;
    let doc = ldraw::parse(&text).map_err(|e| fail(EXIT_PARSE, anyhow!("{}:{}: {e}", path.display(), e.line())))?;
    Ok(brickir::to_model(&doc, catalog))
}

/// Lenient parse: malformed lines are counted as drawing defects.
fn load_model_lenient(path: &Path, catalog: &Catalog) -> Result<Model, Failure> {
    let text = read_input(path)?;
    let (doc, errors) = ldraw::parse_lenient(&text);
    for e in &errors {
        eprintln!("warning: {}:{}: {e}", path.display(), e.line());
    }
    let mut model = brickir::to_model(&doc, catalog);
    model.syntax_defects = model.syntax_defects.max(errors.len());
    Ok(model)
}

fn display_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| "-".to_string(), |s| s.to_string_lossy().into_owned())
}

fn thresholds(g: &Global) -> Thresholds {
    Thresholds {
        d_warn: g.d_warn,
        m_warn: g.m_warn,
        page_density: g.page_density as usize,
        step_target: g.step_target as usize,
    }
}

fn run(cli: Cli) -> Outcome {
    let g = &cli.global;
    let t = thresholds(g);
    match cli.command {
        Command::Compile { spec, pack } => {
            let catalog = load_catalog(g)?;
            let text = read_input(&spec)?;
            let parsed = BuildSpec::parse(&text).map_err(|e| fail(EXIT_PARSE, anyhow!("{}:{e}", spec.display())))?;
            let mut model =
                builder::compile(&parsed, &catalog).map_err(|e| fail(EXIT_PARSE, anyhow!("{}:{e}", spec.display())))?;
            if pack {
                model = builder::pack_steps(&model, t.step_target);
            }
            emit(g, &ldraw::serialize(&model.to_document(&catalog)))?;
            Ok(0)
        }
        Command::Validate { model, inventory } => {
            let catalog = load_catalog(g)?;
            let inv = inventory.as_deref().map(load_inventory).transpose()?;
            let m = load_model(&model, &catalog)?;
            let report = brickir::validate(&m, &catalog, inv.as_ref());
            match g.format {
                Format::Json => emit_json(g, &serde_json::to_value(&report).context("encoding report")?)?,
                Format::Text => {
                    let mut out = String::new();
                    for issue in &report.issues {
                        out.push_str(&format!("{issue}\n"));
                    }
                    let s = &report.stats;
                    out.push_str(&format!(
                        "{} parts, {} steps, {} component(s), grounded: {}\n{} error(s), {} warning(s)\n",
                        s.parts,
                        s.steps,
                        s.connected_components,
                        if s.grounded { "yes" } else { "no" },
                        report.errors().count(),
                        report.issues.len() - report.errors().count()
                    ));
                    emit(g, &out)?;
                }
            }
            Ok(if report.has_errors() { EXIT_INVALID } else { 0 })
        }
        Command::Score { models, inventory } => {
            let catalog = load_catalog(g)?;
            let inv = inventory.as_deref().map(load_inventory).transpose()?;
            let mut rows = Vec::new();
            for path in &models {
                let m = load_model_lenient(path, &catalog)?;
                let s = brickir::score(&m, &catalog, inv.as_ref(), &t);
                rows.push(ScoreRow::new(&display_name(path), &m, s, &t));
            }
            match g.format {
                Format::Json => emit_json(g, &serde_json::to_value(&rows).context("encoding scores")?)?,
                Format::Text => {
                    let mut out = ScoreRow::header() + "\n";
                    for r in &rows {
                        out.push_str(&r.line());
                        out.push('\n');
                    }
                    emit(g, &out)?;
                }
            }
            Ok(0)
        }
        Command::Bom { model, csv } => {
            let catalog = load_catalog(g)?;
            let m = load_model(&model, &catalog)?;
            let rows = inventory::bom(&m, &catalog);
            match (g.format, csv) {
                (Format::Json, _) => emit_json(g, &serde_json::to_value(&rows).context("encoding bom")?)?,
                (Format::Text, true) => emit(g, &inventory::bom_csv(&rows))?,
                (Format::Text, false) => emit(g, &inventory::bom_table(&rows))?,
            }
            Ok(0)
        }
        Command::Steps { model } => {
            let catalog = load_catalog(g)?;
            let m = load_model(&model, &catalog)?;
            let deltas = sequencer::step_deltas(&m);
            let flat = m.flatten();
            let pages = estimate_pages_with_density(flat.len(), t.page_density);
            match g.format {
                Format::Json => emit_json(
                    g,
                    &json!({ "steps": deltas, "plan": StepPlan::of(&flat).steps, "parts": flat.len(), "pages": pages }),
                )?,
                Format::Text => {
                    let mut out = String::new();
                    for d in &deltas {
                        let added: Vec<String> = d.added.iter().map(|(p, n)| format!("{n}× {p}")).collect();
                        out.push_str(&format!("step {:>4}: +{:<3} ({:>5} total) {}\n", d.step, d.added.iter().map(|a| a.1).sum::<usize>(), d.cumulative, added.join(", ")));
                    }
                    out.push_str(&format!("{} parts, {} steps, {} pages\n", flat.len(), deltas.len(), pages));
                    emit(g, &out)?;
                }
            }
            Ok(0)
        }
        Command::Repair { model } => {
            let catalog = load_catalog(g)?;
            let m = load_model(&model, &catalog)?;
            let fixed = sequencer::repair_order(&m, &catalog).map_err(|e| fail(EXIT_INVALID, e.into()))?;
            emit(g, &ldraw::serialize(&fixed.to_document(&catalog)))?;
            Ok(0)
        }
        Command::Credit { model, inventory } => {
            let catalog = load_catalog(g)?;
            let inv = load_inventory(&inventory)?;
            let m = load_model(&model, &catalog)?;
            let credit = brickir::scorer::bag_of_bricks_credit(&m, &catalog, &inv);
            match g.format {
                Format::Json => emit_json(g, &json!({ "model": display_name(&model), "credit": credit }))?,
                Format::Text => emit(g, &format!("{credit:.4}\n"))?,
            }
            Ok(0)
        }
        Command::Usage { models, principles } => {
            let catalog = load_catalog(g)?;
            let corpus = models.iter().map(|p| load_model(p, &catalog)).collect::<Result<Vec<_>, _>>()?;
            if principles {
                let tags: Vec<_> = corpus.iter().map(triz::tags).collect();
                let report = triz::tag_report(&tags);
                match g.format {
                    Format::Json => {
                        let rows: Vec<_> = report.iter().map(|(p, n)| json!({ "principle": p, "models": n })).collect();
                        emit_json(g, &json!(rows))?
                    }
                    Format::Text => {
                        let mut out = String::new();
                        for (p, n) in report {
                            let name = triz::principle(u32::from(p)).map(|q| q.name.as_str()).unwrap_or("?");
                            out.push_str(&format!("#{p} {name}: {n} of {}\n", corpus.len()));
                        }
                        emit(g, &out)?;
                    }
                }
                return Ok(0);
            }
            let ranking = inventory::usage_ranking(&corpus).map_err(|e| fail(EXIT_USAGE, e.into()))?;
            match g.format {
                Format::Json => {
                    let rows: Vec<_> = ranking.iter().map(|(p, n)| json!({ "part": p, "uses": n })).collect();
                    emit_json(g, &json!(rows))?
                }
                Format::Text => {
                    let out: String = ranking.iter().map(|(p, n)| format!("{p} {n}\n")).collect();
                    emit(g, &out)?;
                }
            }
            Ok(0)
        }
        Command::Triz { improve, worsen, principle } => {
            if let Some(n) = principle {
                let p = triz::principle(n).map_err(|e| fail(EXIT_USAGE, e.into()))?;
                match g.format {
                    Format::Json => emit_json(g, &serde_json::to_value(p).context("encoding principle")?)?,
                    Format::Text => {
                        let mut out = format!("{}. {}\n", p.number, p.name);
                        if let Some(note) = &p.modular_note {
                            out.push_str(&format!("   {note}\n"));
                        }
                        emit(g, &out)?;
                    }
                }
                return Ok(0);
            }
            let (Some(a), Some(b)) = (improve, worsen) else {
                let out: String = PARAMETERS.iter().map(|(n, name)| format!("{n:>2} {name}\n")).collect();
                emit(g, &out)?;
                return Ok(0);
            };
            let cell = triz::lookup(a, b).map_err(|e| fail(EXIT_USAGE, e.into()))?;
            match g.format {
                Format::Json => emit_json(g, &json!({ "improve": a, "worsen": b, "cell": cell }))?,
                Format::Text => emit(g, &format!("{cell}\n"))?,
            }
            Ok(0)
        }
        Command::Compare { tools, reconfig, kit_mass } => {
            let kit = ModularKit { reconfig_minutes_per_tool: reconfig, kit_mass_g: kit_mass };
            let c = inventory::compare_provisioning(&tools, kit).map_err(|e| fail(EXIT_USAGE, e.into()))?;
            match g.format {
                Format::Json => emit_json(g, &serde_json::to_value(&c).context("encoding comparison")?)?,
                Format::Text => emit(g, &format!("{}\n{}", c.summary, c.table()))?,
            }
            Ok(0)
        }
    }
}
