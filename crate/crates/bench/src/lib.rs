//! Shared inputs for the pipeline benchmarks.

use std::path::PathBuf;

use brickir::{parse, to_model, Catalog, Model};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// A shipped `.ldr` fixture parsed against the built-in catalog.
pub fn fixture_model(name: &str, catalog: &Catalog) -> Model {
    let doc = parse(&fixture_text(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    to_model(&doc, catalog)
}

/// The model with its steps in reverse order, so every part above the
/// ground has to be moved by a repair.
pub fn reversed(model: &Model) -> Model {
    let mut steps = model.flatten().steps();
    steps.reverse();
    brickir::FlatModel::from_steps(steps).into_model(&model.main.name)
}
