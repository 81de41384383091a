//! JSON export of an effective model.
//!
//! One `nodes` array in pre-order. Every node carries its root-relative
//! path, kind, resolved documentation/multiplicity, endpoint paths, and
//! the provenance chain (qualified source element plus how it
//! contributed). Output is pretty-printed and byte-deterministic.

use serde::Serialize;

use crate::model::SemanticModel;
use crate::syntax::Multiplicity;

use super::effective::{Contribution, EffectiveModel};

#[derive(Serialize)]
struct EffectiveJson<'a> {
    root: String,
    nodes: Vec<NodeJson<'a>>,
}

#[derive(Serialize)]
struct NodeJson<'a> {
    path: String,
    name: &'a str,
    kind: crate::model::ElementKind,
    doc: Option<&'a str>,
    multiplicity: Option<Multiplicity>,
    /// `[from, to]` as node paths.
    connect: Option<[String; 2]>,
    /// `[goal, twin]` as node paths.
    allocate: Option<[String; 2]>,
    origins: Vec<OriginJson>,
}

#[derive(Serialize)]
struct OriginJson {
    element: String,
    contribution: &'static str,
}

pub fn export_effective_json(model: &SemanticModel, eff: &EffectiveModel) -> String {
    let nodes = eff
        .pre_order()
        .into_iter()
        .map(|id| {
            let node = eff.node(id);
            NodeJson {
                path: eff.path_of(id),
                name: &node.name,
                kind: node.kind,
                doc: node.doc.as_deref(),
                multiplicity: node.multiplicity,
                connect: node
                    .connect
                    .map(|(a, b)| [eff.path_of(a), eff.path_of(b)]),
                allocate: node
                    .allocate
                    .map(|(a, b)| [eff.path_of(a), eff.path_of(b)]),
                origins: node
                    .origins
                    .iter()
                    .map(|&(el, c)| OriginJson {
                        element: model.qualified_name(el),
                        contribution: match c {
                            Contribution::Own => "own",
                            Contribution::Inherited => "inherited",
                            Contribution::Redefined => "redefined",
                        },
                    })
                    .collect(),
            }
        })
        .collect();
    let doc = EffectiveJson {
        root: eff.node(eff.root).name.clone(),
        nodes,
    };
    let mut out =
        serde_json::to_string_pretty(&doc).expect("effective model serialization cannot fail");
    out.push('\n');
    out
}
