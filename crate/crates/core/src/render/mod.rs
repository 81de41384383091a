//! Deterministic SVG diagrams.
//!
//! A dartwin renders as the paper draws it: goals (and arbiters) in a row
//! at the top, a dashed separator, the twin system and other parts below,
//! ports on box boundaries, connections routed orthogonally, allocations
//! dashed across the separator. An evolution pattern renders as the union
//! of its twins: what the pattern removes stays visible as dashed
//! highlighted ghosts, what it adds or modifies is highlighted solid.
//!
//! Every drawable contributes exactly one stroked SVG element (arrowheads
//! and labels are fill-only), so a diagram can be audited by counting
//! strokes. Identical inputs produce byte-identical SVG.

mod layout;
mod style;
mod svg;

use thiserror::Error;

use crate::flatten::FlattenError;
use crate::model::{ElementId, ElementKind, SemanticModel};

pub use style::{parse_style, Style, StyleError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("`{0}` is not a dartwin")]
    NotADartwin(String),
    #[error("`{0}` is not an evolution pattern (`#dartrans`)")]
    NotAPattern(String),
    #[error("evolution pattern `{0}` has no `#dartwin_core` twin")]
    MissingCore(String),
    #[error(transparent)]
    Flatten(#[from] FlattenError),
    #[error("`{0}` is longer than {1} characters; shorten the name or raise `max_label`")]
    LabelOverflow(String, usize),
}

/// Renders a dartwin's effective tree as an SVG document.
pub fn render_dartwin(
    model: &SemanticModel,
    root: ElementId,
    style: &Style,
) -> Result<String, RenderError> {
    if model[root].kind != ElementKind::DarTwin {
        return Err(RenderError::NotADartwin(model.qualified_name(root)));
    }
    let scene = layout::scene_for_dartwin(model, root)?;
    let geometry = layout::arrange(&scene, style)?;
    Ok(svg::emit(&scene, &geometry, style))
}

/// Renders an evolution pattern as one diagram: the after twin, plus what
/// the before twin loses drawn as dashed highlighted ghosts.
pub fn render_pattern(
    model: &SemanticModel,
    dartrans: ElementId,
    style: &Style,
) -> Result<String, RenderError> {
    if model[dartrans].kind != ElementKind::DarTrans {
        return Err(RenderError::NotAPattern(model.qualified_name(dartrans)));
    }
    let scene = layout::scene_for_pattern(model, dartrans)?;
    let geometry = layout::arrange(&scene, style)?;
    Ok(svg::emit(&scene, &geometry, style))
}
