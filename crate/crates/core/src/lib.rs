//! Core of the architecture visualization engine.
//!
//! The pipeline runs from two small languages to rendered diagrams:
//!
//! * [`archmeta`] parses an architecture description (artifact types,
//!   containment, connections) into a [`archmeta::ValidatedArchitecture`].
//! * [`vizmeta`] parses the views offered on top of it and links them.
//! * [`projmodel`] stores a concrete project as typed, bidirectionally
//!   navigable instances and reads/writes the `.spvizpm.json` interchange file.
//! * [`viewctx`] holds the interactive state of one visualization session:
//!   what is expanded, which edges are shown, undo/redo and persistence.
//! * [`diagram`] turns a view context into a laid-out node-link diagram and
//!   renders SVG or the JSON document consumed by the web front end.

pub mod archmeta;
pub mod diagram;

pub mod projmodel;
pub mod syntax;
pub mod viewctx;
pub mod vizmeta;

#[cfg(any(test, feature = "testkit"))]
pub mod testkit;

pub use archmeta::{parse_architecture, validate_architecture, ValidatedArchitecture};
pub use syntax::{Diagnostic, Severity};
pub use viewctx::{Action, ViewContext, ViewPath};
pub use vizmeta::{link_viz, parse_viz, ValidatedViz};
