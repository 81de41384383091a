//! Does a binding soundly map a pattern's before twin onto a target?
//!
//! The check is total: it gathers *every* violation instead of stopping at
//! the first, so one run tells the user everything wrong with a binding.
//! The rules:
//!
//! - every element of the before twin is bound to exactly one existing
//!   target element, of the same kind (the twin roots are bound to each
//!   other implicitly);
//! - the mapping preserves containment — exactly for structural elements,
//!   while a connection, allocation or conflict may sit higher up, in the
//!   image of an ancestor of its pattern parent;
//! - a bound connection connects the images of its pattern endpoints, in
//!   the same direction; a bound allocation allocates the image of its
//!   goal to the image of its twin;
//! - every element the pattern adds gets a fresh name — except modified
//!   elements (removed *and* added), which default to the target element's
//!   original name — and no fresh name clashes with a sibling or captures
//!   a surviving target name.

use std::collections::BTreeMap;
use std::fmt;

use crate::model::{ElementId, ElementKind, SemanticModel};

use super::apply::{last_segment, parent_path, ApplyError, PatternContext};
use super::binding::Binding;

/// Why one element of the binding is unacceptable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationReason {
    /// A pattern element without a (usable) binding, or a binding entry
    /// pointing at nothing.
    Unbound,
    /// Pattern element and its image are different kinds of element.
    KindMismatch,
    /// The image sits somewhere the pattern element's containment forbids.
    ContainmentBroken,
    /// A bound connection or allocation does not link the images of the
    /// pattern endpoints.
    EndpointInconsistent,
    /// Two pattern elements share an image, two additions share a name, or
    /// a fresh name captures a surviving target name.
    NameCollision,
}

impl fmt::Display for ViolationReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationReason::Unbound => "unbound",
            ViolationReason::KindMismatch => "kind mismatch",
            ViolationReason::ContainmentBroken => "containment broken",
            ViolationReason::EndpointInconsistent => "endpoint inconsistent",
            ViolationReason::NameCollision => "name collision",
        })
    }
}

/// One violated rule, tied to the pattern path it concerns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Pattern path (before twin for bindings, after twin for renames).
    pub path: String,
    pub reason: ViolationReason,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}` [{}]: {}", self.path, self.reason, self.detail)
    }
}

/// Outcome of [`check_applicability`]: `ok` iff `violations` is empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApplicabilityReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl fmt::Display for ApplicabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok {
            return f.write_str("the binding applies");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks whether `binding` soundly applies `pattern` to `target`.
/// `Err` is reserved for inputs that cannot be checked at all (not a
/// pattern, flattening failed); a bad binding is an `Ok` report.
pub fn check_applicability(
    model: &SemanticModel,
    pattern: ElementId,
    target: ElementId,
    binding: &Binding,
) -> Result<ApplicabilityReport, ApplyError> {
    let ctx = PatternContext::new(model, pattern, target)?;
    Ok(check_against(&ctx, binding))
}

pub(crate) fn check_against(ctx: &PatternContext, binding: &Binding) -> ApplicabilityReport {
    let mut violations = Vec::new();

    check_mapping(ctx, binding, &mut violations);
    check_containment(ctx, binding, &mut violations);
    check_endpoints(ctx, binding, &mut violations);
    check_names(ctx, binding, &mut violations);

    ApplicabilityReport {
        ok: violations.is_empty(),
        violations,
    }
}

/// Totality, resolution, kind equality and injectivity of the map.
fn check_mapping(ctx: &PatternContext, binding: &Binding, violations: &mut Vec<Violation>) {
    let before_paths = ctx.before.paths();
    for from in binding.map.keys() {
        if !before_paths.contains(from) {
            violations.push(Violation {
                path: from.clone(),
                reason: ViolationReason::Unbound,
                detail: "the binding maps it, but the pattern's before twin has no such element"
                    .into(),
            });
        }
    }

    let mut image_of: BTreeMap<&str, &str> = BTreeMap::new();
    for path in &before_paths {
        let Some(image) = binding.map.get(path) else {
            violations.push(Violation {
                path: path.clone(),
                reason: ViolationReason::Unbound,
                detail: "the binding maps no target element onto it".into(),
            });
            continue;
        };
        let Some(image_id) = ctx.target.find(image) else {
            violations.push(Violation {
                path: path.clone(),
                reason: ViolationReason::Unbound,
                detail: format!("the target has no element `{image}`"),
            });
            continue;
        };
        let pattern_kind = ctx.before.node(ctx.before.find(path).expect("own path")).kind;
        let target_kind = ctx.target.node(image_id).kind;
        if pattern_kind != target_kind {
            violations.push(Violation {
                path: path.clone(),
                reason: ViolationReason::KindMismatch,
                detail: format!(
                    "it is {} but `{image}` is {}",
                    describe(pattern_kind),
                    describe(target_kind)
                ),
            });
        }
        if let Some(previous) = image_of.insert(image, path) {
            violations.push(Violation {
                path: path.clone(),
                reason: ViolationReason::NameCollision,
                detail: format!("`{image}` is already the image of `{previous}`"),
            });
        }
    }
}

/// The image of a child must sit in the image of its parent — or, for
/// connections, allocations and conflicts, in the image of an ancestor.
fn check_containment(ctx: &PatternContext, binding: &Binding, violations: &mut Vec<Violation>) {
    for path in &ctx.before.paths() {
        let Some(image) = binding.map.get(path) else {
            continue; // flagged by check_mapping
        };
        if ctx.target.find(image).is_none() {
            continue; // flagged by check_mapping
        }
        let pattern_parent = parent_path(path);
        let expected = if pattern_parent.is_empty() {
            Some("")
        } else {
            binding.map.get(pattern_parent).map(String::as_str)
        };
        let Some(expected) = expected else {
            continue; // the parent itself is unbound and flagged
        };
        let actual = parent_path(image);
        let kind = ctx.before.node(ctx.before.find(path).expect("own path")).kind;
        if kind.is_structural() {
            if actual != expected {
                violations.push(Violation {
                    path: path.clone(),
                    reason: ViolationReason::ContainmentBroken,
                    detail: format!(
                        "its parent maps to {} but `{image}` sits in {}",
                        in_quotes(expected),
                        in_quotes(actual)
                    ),
                });
            }
        } else {
            // Relational elements may live higher up the same chain.
            let mut allowed = vec![""];
            let mut cursor = pattern_parent;
            loop {
                if cursor.is_empty() {
                    break;
                }
                if let Some(img) = binding.map.get(cursor) {
                    allowed.push(img);
                }
                cursor = parent_path(cursor);
            }
            if !allowed.contains(&actual) {
                violations.push(Violation {
                    path: path.clone(),
                    reason: ViolationReason::ContainmentBroken,
                    detail: format!(
                        "`{image}` sits in {}, not in the image of `{pattern_parent}` or of \
                         one of its ancestors",
                        in_quotes(actual)
                    ),
                });
            }
        }
    }
}

/// A bound connection/allocation must link the images of its pattern
/// endpoints, in the same direction.
fn check_endpoints(ctx: &PatternContext, binding: &Binding, violations: &mut Vec<Violation>) {
    for id in ctx.before.pre_order() {
        let node = ctx.before.node(id);
        let path = ctx.before.path_of(id);
        let Some(image_id) = binding
            .map
            .get(&path)
            .and_then(|image| ctx.target.find(image))
        else {
            continue; // unbound or unresolved: flagged by check_mapping
        };
        let image_node = ctx.target.node(image_id);
        let pairs = [
            ("connect", node.connect, image_node.connect),
            ("allocate", node.allocate, image_node.allocate),
        ];
        for (verb, pattern_ends, image_ends) in pairs {
            let Some((s, d)) = pattern_ends else {
                continue;
            };
            let want = (
                binding.map.get(&ctx.before.path_of(s)),
                binding.map.get(&ctx.before.path_of(d)),
            );
            let (Some(want_s), Some(want_d)) = want else {
                continue; // an unbound endpoint is already flagged
            };
            let Some((is, id_)) = image_ends else {
                violations.push(Violation {
                    path: path.clone(),
                    reason: ViolationReason::EndpointInconsistent,
                    detail: format!("its image has no `{verb}` endpoints"),
                });
                continue;
            };
            let got = (ctx.target.path_of(is), ctx.target.path_of(id_));
            if &got.0 != want_s || &got.1 != want_d {
                violations.push(Violation {
                    path: path.clone(),
                    reason: ViolationReason::EndpointInconsistent,
                    detail: format!(
                        "its image links `{}` to `{}`, but the binding requires `{want_s}` \
                         to `{want_d}`",
                        got.0, got.1
                    ),
                });
            }
        }
    }
}

/// Rename totality for additions, plus collision checks: renames must
/// target real additions, no two additions may land in one place under one
/// name, and a fresh name must not capture a name that survives the
/// reduction.
fn check_names(ctx: &PatternContext, binding: &Binding, violations: &mut Vec<Violation>) {
    for from in binding.renames.keys() {
        if !ctx.added.contains(from) {
            violations.push(Violation {
                path: from.clone(),
                reason: ViolationReason::Unbound,
                detail: "the rename targets nothing the pattern adds".into(),
            });
        }
    }

    // Target paths that survive step 3: everything outside the removed
    // images' subtrees.
    let removed_images: Vec<&String> = ctx
        .removed
        .iter()
        .filter_map(|r| binding.map.get(r))
        .collect();
    let surviving: Vec<String> = ctx
        .target
        .paths()
        .into_iter()
        .filter(|p| {
            !removed_images
                .iter()
                .any(|ri| p == *ri || p.starts_with(&format!("{ri}.")))
        })
        .collect();

    let mut taken: BTreeMap<(String, String), String> = BTreeMap::new();
    for path in &ctx.added {
        let is_modified = ctx.modified.contains(path);
        let name = match binding.renames.get(path) {
            Some(fresh) => fresh.clone(),
            None if is_modified => match binding.map.get(path) {
                Some(image) => last_segment(image).to_string(),
                None => continue, // unbound modified element: already flagged
            },
            None => {
                violations.push(Violation {
                    path: path.clone(),
                    reason: ViolationReason::Unbound,
                    detail: "the pattern adds it, but the binding gives it no name".into(),
                });
                continue;
            }
        };

        // Where the new element lands, as a key for sibling uniqueness.
        let spot = match landing_spot(ctx, binding, path, is_modified) {
            Some(spot) => spot,
            None => continue, // an unbound parent is already flagged
        };
        if let Some(previous) = taken.insert((spot, name.clone()), path.clone()) {
            violations.push(Violation {
                path: path.clone(),
                reason: ViolationReason::NameCollision,
                detail: format!("`{name}` is already the name given to `{previous}`"),
            });
            continue;
        }

        // Would the fresh name capture a surviving target element? Walk up
        // from the destination container like name resolution does.
        let Some(start) = chain_start(ctx, binding, path, is_modified) else {
            continue;
        };
        let mut cursor = Some(start);
        while let Some(container) = cursor {
            let full = if container.is_empty() {
                name.clone()
            } else {
                format!("{container}.{name}")
            };
            if surviving.contains(&full) {
                violations.push(Violation {
                    path: path.clone(),
                    reason: ViolationReason::NameCollision,
                    detail: format!(
                        "`{name}` already names the surviving element `{full}`"
                    ),
                });
                break;
            }
            cursor = if container.is_empty() {
                None
            } else {
                Some(parent_path(&container).to_string())
            };
        }
    }
}

/// Key identifying the container an addition lands in: `@<target path>`
/// for existing containers, `+<after path>` for containers the pattern
/// itself adds.
fn landing_spot(
    ctx: &PatternContext,
    binding: &Binding,
    path: &str,
    is_modified: bool,
) -> Option<String> {
    if is_modified {
        return Some(format!("@{}", parent_path(binding.map.get(path)?)));
    }
    let parent = parent_path(path);
    if parent.is_empty() {
        Some("@".to_string())
    } else if ctx.added.contains(parent) {
        Some(format!("+{parent}"))
    } else {
        Some(format!("@{}", binding.map.get(parent)?))
    }
}

/// Target container from which a fresh name becomes visible: the original
/// parent for modified elements, the image of the pattern parent
/// otherwise, looking through containers the pattern itself adds.
fn chain_start(
    ctx: &PatternContext,
    binding: &Binding,
    path: &str,
    is_modified: bool,
) -> Option<String> {
    if is_modified {
        return Some(parent_path(binding.map.get(path)?).to_string());
    }
    let parent = parent_path(path);
    if parent.is_empty() {
        Some(String::new())
    } else if ctx.added.contains(parent) {
        chain_start(ctx, binding, parent, ctx.modified.contains(parent))
    } else {
        binding.map.get(parent).cloned()
    }
}

fn in_quotes(path: &str) -> String {
    if path.is_empty() {
        "the root".to_string()
    } else {
        format!("`{path}`")
    }
}

fn describe(kind: ElementKind) -> &'static str {
    match kind {
        ElementKind::DarTwin => "a dartwin",
        ElementKind::TwinSystem => "a twin system",
        ElementKind::DigitalTwin => "a digital twin",
        ElementKind::Goal => "a goal",
        ElementKind::Arbiter => "an arbiter",
        ElementKind::Conflict => "a conflict",
        ElementKind::DarTrans => "an evolution pattern",
        ElementKind::DartwinCore => "a core twin",
        ElementKind::DartwinBefore => "a before twin",
        ElementKind::DartwinAfter => "an after twin",
        ElementKind::Part => "a part",
        ElementKind::Port => "a port",
        ElementKind::Connection => "a connection",
        ElementKind::Allocation => "an allocation",
        ElementKind::Package => "a package",
    }
}
