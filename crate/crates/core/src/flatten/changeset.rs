//! Change sets: what an evolution pattern keeps, removes, adds and
//! modifies, expressed as effective paths.
//!
//! Paths are compared with the twin root segment normalized away (each
//! twin's effective tree is rooted at the twin itself), so `TS.DT1` in the
//! before twin and `TS.DT1` in the after twin denote "the same place".
//! An element is *modified* when its path is both removed and added.

use serde::Serialize;
use thiserror::Error;

use crate::model::{ElementId, ElementKind, SemanticModel};

use super::effective::{flatten, FlattenError};

/// The four path sets of one pattern, each sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChangeSet {
    pub kept: Vec<String>,
    pub removed: Vec<String>,
    pub added: Vec<String>,
    pub modified: Vec<String>,
}

impl ChangeSet {
    pub fn to_json(&self) -> String {
        let mut out =
            serde_json::to_string_pretty(self).expect("change set serialization cannot fail");
        out.push('\n');
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error("`{0}` is not an evolution pattern (`#dartrans`)")]
    NotAPattern(String),
    #[error("evolution pattern `{0}` has no `#dartwin_core` twin")]
    MissingCore(String),
    #[error(transparent)]
    Flatten(#[from] FlattenError),
}

/// Change set of an evolution pattern: kept = the core's effective paths,
/// removed = before minus core, added = after minus core, modified =
/// removed ∩ added. Absent before/after twins default to the core, so an
/// unwritten side changes nothing.
pub fn diff(model: &SemanticModel, dartrans: ElementId) -> Result<ChangeSet, DiffError> {
    if model[dartrans].kind != ElementKind::DarTrans {
        return Err(DiffError::NotAPattern(model.qualified_name(dartrans)));
    }
    let twins = model
        .pattern_twins(dartrans)
        .ok_or_else(|| DiffError::MissingCore(model.qualified_name(dartrans)))?;

    let kept = flatten(model, twins.core)?.paths();
    let before = flatten(model, twins.before)?.paths();
    let after = flatten(model, twins.after)?.paths();

    let removed: Vec<String> = before.difference(&kept).cloned().collect();
    let added: Vec<String> = after.difference(&kept).cloned().collect();
    let modified: Vec<String> = removed
        .iter()
        .filter(|p| added.binary_search(p).is_ok())
        .cloned()
        .collect();
    Ok(ChangeSet {
        kept: kept.into_iter().collect(),
        removed,
        added,
        modified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_model;
    use crate::syntax::parse;

    fn model_of(source: &str) -> SemanticModel {
        let (tree, diags) = parse(source, "test.dartwin");
        assert!(diags.is_empty(), "unexpected parse diagnostics: {diags:?}");
        let model = build_model(&[tree]);
        assert!(!model.has_errors(), "{:?}", model.diagnostics);
        model
    }

    #[test]
    fn removed_added_and_their_overlap() {
        let model = model_of(
            "#dartrans P {\n\
               #dartwin_core C { part Keep; part Touch; }\n\
               #dartwin_before B :> C { part Drop; part Touch { part oldInner; } }\n\
               #dartwin_after A :> C { part Gain; part Touch { part newInner; } }\n\
             }",
        );
        let p = model.root("P").unwrap();
        let cs = diff(&model, p).unwrap();
        assert_eq!(cs.kept, ["Keep", "Touch"]);
        assert_eq!(cs.removed, ["Drop", "Touch.oldInner"]);
        assert_eq!(cs.added, ["Gain", "Touch.newInner"]);
        assert!(cs.modified.is_empty());
    }

    #[test]
    fn same_path_on_both_sides_counts_as_modified() {
        let model = model_of(
            "#dartrans P {\n\
               #dartwin_core C { part S; }\n\
               #dartwin_before B :> C { part :>> S { part x { part was; } } }\n\
               #dartwin_after A :> C { part :>> S { part x { part now; } } }\n\
             }",
        );
        let p = model.root("P").unwrap();
        let cs = diff(&model, p).unwrap();
        assert_eq!(cs.removed, ["S.x", "S.x.was"]);
        assert_eq!(cs.added, ["S.x", "S.x.now"]);
        assert_eq!(cs.modified, ["S.x"]);
    }

    #[test]
    fn an_absent_side_changes_nothing() {
        let model = model_of(
            "#dartrans P {\n\
               #dartwin_core C { part S; }\n\
               #dartwin_after A :> C { part New; }\n\
             }",
        );
        let p = model.root("P").unwrap();
        let cs = diff(&model, p).unwrap();
        assert!(cs.removed.is_empty());
        assert_eq!(cs.added, ["New"]);
    }

    #[test]
    fn only_patterns_diff() {
        let model = model_of("#dartwin D;");
        let d = model.root("D").unwrap();
        assert_eq!(
            diff(&model, d).unwrap_err(),
            DiffError::NotAPattern("D".into())
        );
    }
}
