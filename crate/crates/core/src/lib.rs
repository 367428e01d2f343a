//! Compile, validate and score LDraw brick models.
//!
//! Positions are in LDraw units (LDU): one stud pitch is 20, a brick is 24
//! tall and a plate 8. The y axis points down, so the ground is `y = 0` and
//! stacked parts have negative y.

pub mod builder;
pub mod catalog;
pub mod geometry;
pub mod inventory;
pub mod ldraw;
pub mod math;
pub mod model;
pub mod scorer;
pub mod sequencer;
pub mod triz;
pub mod validator;

pub use builder::{compile, compile_str, pack_steps, BuildError, BuildSpec};
pub use catalog::{Catalog, CatalogError, Family, PartSpec};
pub use inventory::{Inventory, InventoryError};
pub use ldraw::{parse, parse_lenient, serialize, Document, ParseError};
pub use math::{Mat3, Vec3, Yaw};
pub use model::{to_model, FlatModel, Model, PartRef, Placement};
pub use scorer::{score, Score, Thresholds};
pub use sequencer::{check_order, estimate_pages, repair_order, Unrepairable};
pub use validator::{validate, Issue, IssueKind, Severity, ValidationReport};
