//! Core library of the DarTwin toolchain.
//!
//! The pipeline runs in four stages, each usable on its own:
//!
//! 1. [`syntax`] — lossless lexer, recovering parser and canonical printer
//!    for the textual notation (a SysML v2 subset plus the `#`-keywords).
//! 2. [`model`] — a flat, fully resolved element arena built from one or
//!    more syntax trees.
//! 3. [`flatten`] — specialization/redefinition collapsed into effective
//!    trees, and change sets between the twins of an evolution pattern.
//! 4. [`dartrans`] — application of an evolution pattern to a concrete
//!    dartwin via an element binding, following the five-step procedure.
//!
//! [`render`] turns effective trees (optionally annotated with a change
//! set) into deterministic SVG in the graphical notation.

pub mod diag;
pub mod syntax;
pub mod model;
pub mod flatten;
pub mod dartrans;
pub mod render;
