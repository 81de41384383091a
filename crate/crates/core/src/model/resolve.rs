//! Qualified-name resolution.
//!
//! The first segment of a path is searched from the given scope outwards:
//! the scope's own members, then members inherited through `:>` and `:>>`,
//! then (per enclosing ancestor) the ancestor's own name, then the
//! top-level roots. Every later segment must be a member — own or
//! inherited — of the element the previous segment resolved to.

use std::collections::HashSet;

use thiserror::Error;

use super::{ElementId, SemanticModel};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error("cannot resolve `{segment}` in `{path}`")]
    Unresolved { path: String, segment: String },
    #[error("`{name}` is ambiguous: inherited from more than one unrelated element")]
    Ambiguous { name: String },
}

/// Resolve a dotted path from `scope`.
pub fn resolve(
    model: &SemanticModel,
    scope: ElementId,
    segments: &[String],
) -> Result<ElementId, ResolveError> {
    let path = segments.join(".");
    let first = segments.first().ok_or_else(|| ResolveError::Unresolved {
        path: path.clone(),
        segment: String::new(),
    })?;

    let mut current = first_segment(model, scope, first).map_err(|_| ResolveError::Ambiguous {
        name: first.clone(),
    })?;
    if current.is_none() {
        current = model.root(first);
    }
    let mut element = current.ok_or_else(|| ResolveError::Unresolved {
        path: path.clone(),
        segment: first.clone(),
    })?;

    for segment in &segments[1..] {
        element = lookup_member(model, element, segment)?.ok_or_else(|| {
            ResolveError::Unresolved {
                path: path.clone(),
                segment: segment.clone(),
            }
        })?;
    }
    Ok(element)
}

/// First-segment search along the owner chain. `Ok(None)` means "keep
/// falling back" (to the roots); ambiguity aborts immediately.
fn first_segment(
    model: &SemanticModel,
    scope: ElementId,
    name: &str,
) -> Result<Option<ElementId>, ResolveError> {
    let mut cursor = Some(scope);
    while let Some(here) = cursor {
        if let Some(hit) = lookup_member(model, here, name)? {
            return Ok(Some(hit));
        }
        if model[here].name.as_deref() == Some(name) {
            return Ok(Some(here));
        }
        cursor = model[here].owner;
    }
    Ok(None)
}

/// Member of `scope` by name: own members first (redefinitions are
/// registered under their effective name and shadow what they redefine),
/// then members inherited through the specialization/redefinition bases.
/// Two unrelated inherited elements with the same name are ambiguous.
pub fn lookup_member(
    model: &SemanticModel,
    scope: ElementId,
    name: &str,
) -> Result<Option<ElementId>, ResolveError> {
    let mut visited = HashSet::new();
    lookup_inner(model, scope, name, &mut visited)
}

fn lookup_inner(
    model: &SemanticModel,
    scope: ElementId,
    name: &str,
    visited: &mut HashSet<ElementId>,
) -> Result<Option<ElementId>, ResolveError> {
    if !visited.insert(scope) {
        // Specialization cycle; flattening reports it properly, resolution
        // just refuses to loop.
        return Ok(None);
    }
    if let Some(own) = model.own_member(Some(scope), name) {
        return Ok(Some(own));
    }

    let mut candidates: Vec<ElementId> = Vec::new();
    let el = &model[scope];
    let bases = el.specializes.iter().chain(el.redefines.iter());
    for &base in bases {
        if let Some(hit) = lookup_inner(model, base, name, visited)? {
            if !candidates.contains(&hit) {
                candidates.push(hit);
            }
        }
    }
    match candidates.len() {
        0 => Ok(None),
        1 => Ok(Some(candidates[0])),
        _ => {
            // A candidate that (transitively) redefines every other one is
            // the effective element; otherwise the name is truly ambiguous.
            let winner = candidates.iter().copied().find(|&c| {
                candidates
                    .iter()
                    .all(|&other| other == c || redefinition_reaches(model, c, other))
            });
            match winner {
                Some(w) => Ok(Some(w)),
                None => Err(ResolveError::Ambiguous {
                    name: name.to_string(),
                }),
            }
        }
    }
}

/// True if `from`'s redefinition chain reaches `to`.
pub fn redefinition_reaches(model: &SemanticModel, from: ElementId, to: ElementId) -> bool {
    let mut cursor = model[from].redefines;
    let mut guard = 0usize;
    while let Some(next) = cursor {
        if next == to {
            return true;
        }
        guard += 1;
        if guard > model.len() {
            return false;
        }
        cursor = model[next].redefines;
    }
    false
}
