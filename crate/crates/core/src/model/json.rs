//! JSON export of the semantic model.
//!
//! Stable schema: an `elements` array (arena order, so ids equal indices)
//! with the field order id, kind, name, owner, members, specializes,
//! redefines, connect, allocate — plus the root id list. Output is
//! pretty-printed and byte-deterministic for identical inputs.

use serde::Serialize;

use super::{ElementId, ElementKind, SemanticModel};

#[derive(Serialize)]
struct ModelJson<'a> {
    elements: Vec<ElementJson<'a>>,
    roots: &'a [ElementId],
}

#[derive(Serialize)]
struct ElementJson<'a> {
    id: ElementId,
    kind: ElementKind,
    name: Option<&'a str>,
    owner: Option<ElementId>,
    members: &'a [ElementId],
    specializes: &'a [ElementId],
    redefines: Option<ElementId>,
    connect: Option<(ElementId, ElementId)>,
    allocate: Option<(ElementId, ElementId)>,
}

pub fn export_json(model: &SemanticModel) -> String {
    let doc = ModelJson {
        elements: model
            .elements()
            .map(|el| ElementJson {
                id: el.id,
                kind: el.kind,
                name: el.name.as_deref(),
                owner: el.owner,
                members: &el.members,
                specializes: &el.specializes,
                redefines: el.redefines,
                connect: el.connect,
                allocate: el.allocate,
            })
            .collect(),
        roots: &model.roots,
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("model serialization cannot fail");
    out.push('\n');
    out
}
