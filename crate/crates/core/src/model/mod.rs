//! Resolved semantic model: a flat arena of elements in which every cross
//! reference (specialization, redefinition, connection endpoints,
//! allocation sides) is an element id.
//!
//! Element ids are arena indices assigned in depth-first declaration order
//! across the input files, so identical inputs always produce identical
//! ids — the JSON export and everything downstream inherit determinism
//! from that.

mod build;
mod json;
mod resolve;
mod validate;

pub use build::build_model;
pub use json::export_json;
pub use resolve::{lookup_member, redefinition_reaches, resolve, ResolveError};
pub use validate::validate;

use std::collections::{BTreeMap, HashMap};
use std::ops::Index;

use serde::Serialize;

use crate::diag::{Diagnostic, Span};
use crate::syntax::Multiplicity;

/// Index into [`SemanticModel`]'s element arena.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct ElementId(pub u32);

impl ElementId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Closed set of semantic element kinds. Hash-keyword usages map by
/// keyword; keyword-less usages map to the plain kinds; bare `requirement`
/// usages count as goals (a goal is semantically a requirement).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ElementKind {
    DarTwin,
    TwinSystem,
    DigitalTwin,
    Goal,
    Arbiter,
    Conflict,
    DarTrans,
    DartwinCore,
    DartwinBefore,
    DartwinAfter,
    Part,
    Port,
    Connection,
    Allocation,
    Package,
}

impl ElementKind {
    /// Kind denoted by a `#keyword`, if it is one of the ten known ones.
    pub fn from_hash_keyword(keyword: &str) -> Option<ElementKind> {
        Some(match keyword {
            "dartwin" => ElementKind::DarTwin,
            "twinsystem" => ElementKind::TwinSystem,
            "digitaltwin" => ElementKind::DigitalTwin,
            "goal" => ElementKind::Goal,
            "arbiter" => ElementKind::Arbiter,
            "vs" => ElementKind::Conflict,
            "dartrans" => ElementKind::DarTrans,
            "dartwin_core" => ElementKind::DartwinCore,
            "dartwin_before" => ElementKind::DartwinBefore,
            "dartwin_after" => ElementKind::DartwinAfter,
            _ => return None,
        })
    }

    /// Kinds that nest structurally, as opposed to the relational kinds
    /// (connections, allocations, conflicts) that reference other elements.
    pub fn is_structural(self) -> bool {
        !matches!(
            self,
            ElementKind::Connection | ElementKind::Allocation | ElementKind::Conflict
        )
    }

    /// Kinds a dartwin/twin flattening treats as a twin root.
    pub fn is_twin_root(self) -> bool {
        matches!(
            self,
            ElementKind::DarTwin
                | ElementKind::DartwinCore
                | ElementKind::DartwinBefore
                | ElementKind::DartwinAfter
        )
    }
}

/// One resolved element.
#[derive(Debug, Clone)]
pub struct Element {
    pub id: ElementId,
    pub kind: ElementKind,
    /// Effective name: the declared one, or for an anonymous redefinition
    /// the redefined element's name.
    pub name: Option<String>,
    pub owner: Option<ElementId>,
    /// Members in declaration order.
    pub members: Vec<ElementId>,
    /// Resolved `:>` targets.
    pub specializes: Vec<ElementId>,
    /// Resolved `:>>` target.
    pub redefines: Option<ElementId>,
    pub multiplicity: Option<Multiplicity>,
    /// Documentation text; for a Conflict this is the explanation.
    pub doc: Option<String>,
    /// Resolved `connect` endpoints (source, target).
    pub connect: Option<(ElementId, ElementId)>,
    /// Resolved `allocate` sides (goal, twin).
    pub allocate: Option<(ElementId, ElementId)>,
    /// Declaration site, for diagnostics.
    pub file: String,
    pub span: Span,
}

/// The model: arena, roots, per-scope symbol tables and the diagnostics
/// collected while building.
#[derive(Debug, Clone, Default)]
pub struct SemanticModel {
    pub(crate) elements: Vec<Element>,
    pub roots: Vec<ElementId>,
    /// `None` keys the file-level scope; `Some(id)` an element's members.
    pub(crate) scopes: HashMap<Option<ElementId>, BTreeMap<String, ElementId>>,
    pub diagnostics: Vec<Diagnostic>,
}

impl SemanticModel {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> impl Iterator<Item = &Element> {
        self.elements.iter()
    }

    pub fn element(&self, id: ElementId) -> &Element {
        &self.elements[id.index()]
    }

    /// Top-level element by name.
    pub fn root(&self, name: &str) -> Option<ElementId> {
        self.scopes.get(&None).and_then(|s| s.get(name)).copied()
    }

    /// Registered member of a scope by name (own members only; inheritance
    /// is [`lookup_member`]'s job).
    pub fn own_member(&self, scope: Option<ElementId>, name: &str) -> Option<ElementId> {
        self.scopes.get(&scope).and_then(|s| s.get(name)).copied()
    }

    /// Dotted qualified name from the roots, e.g.
    /// `OrthogonalWithNewOutput.OrthogonalWithNewOutput_after`. Each
    /// segment after the first is looked up among members, inherited ones
    /// included.
    pub fn find_qualified(&self, dotted: &str) -> Option<ElementId> {
        let mut segments = dotted.split('.');
        let mut current = self.root(segments.next()?)?;
        for seg in segments {
            current = lookup_member(self, current, seg).ok().flatten()?;
        }
        Some(current)
    }

    /// Owner-chain qualified name, for messages.
    pub fn qualified_name(&self, id: ElementId) -> String {
        let mut parts = Vec::new();
        let mut cursor = Some(id);
        while let Some(cur) = cursor {
            let el = self.element(cur);
            parts.push(el.name.clone().unwrap_or_else(|| "<anonymous>".into()));
            cursor = el.owner;
        }
        parts.reverse();
        parts.join(".")
    }

    pub fn has_errors(&self) -> bool {
        crate::diag::has_errors(&self.diagnostics)
    }

    /// The three twins of an evolution pattern (first of each kind among
    /// the members; `validate` flags duplicates). `before`/`after` fall
    /// back to the core when absent — an absent twin means "unchanged".
    pub fn pattern_twins(&self, dartrans: ElementId) -> Option<PatternTwins> {
        let find = |kind: ElementKind| {
            self[dartrans]
                .members
                .iter()
                .copied()
                .find(|&m| self[m].kind == kind)
        };
        let core = find(ElementKind::DartwinCore)?;
        Some(PatternTwins {
            core,
            before: find(ElementKind::DartwinBefore).unwrap_or(core),
            after: find(ElementKind::DartwinAfter).unwrap_or(core),
        })
    }
}

/// Core/before/after twin ids of one `#dartrans`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternTwins {
    pub core: ElementId,
    pub before: ElementId,
    pub after: ElementId,
}

impl Index<ElementId> for SemanticModel {
    type Output = Element;

    fn index(&self, id: ElementId) -> &Element {
        self.element(id)
    }
}
