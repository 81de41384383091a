//! The five-step application of an evolution pattern.
//!
//! 1. flatten the target dartwin;
//! 2. *bind*: record, per target element, which before-twin element it
//!    realizes (the binding, checked by [`check_applicability`]);
//! 3. *reduce*: delete every element bound to something the pattern
//!    removes, subtrees included, then any unbound connection or
//!    allocation left dangling;
//! 4. *extend*: create an element for everything the after twin adds,
//!    named by the binding's renames (modified elements keep the target's
//!    original name), placed and wired through the binding;
//! 5. *sever*: drop the pattern references, leaving a plain dartwin.
//!
//! [`apply_transformation`] returns the trees after steps 2–5 plus the
//! change set in target terms.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::diag::Span;
use crate::flatten::{construct_for, ChangeSet, EffectiveModel, FlattenError};
use crate::flatten::flatten;
use crate::model::{ElementId, ElementKind, SemanticModel};
use crate::syntax::{Multiplicity, Node, PathExpr, SourceTree};

use super::applicability::{check_against, ApplicabilityReport};
use super::binding::Binding;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ApplyError {
    #[error("`{0}` is not an evolution pattern (`#dartrans`)")]
    NotAPattern(String),
    #[error("`{0}` is not a dartwin")]
    NotADartwin(String),
    #[error("evolution pattern `{0}` has no `#dartwin_core` twin")]
    MissingCore(String),
    #[error(transparent)]
    Flatten(#[from] FlattenError),
    #[error("the binding does not apply to the target:\n{0}")]
    NotApplicable(ApplicabilityReport),
    #[error("`{element}` would lose its endpoint `{endpoint}`")]
    LostEndpoint { element: String, endpoint: String },
}

/// Everything [`apply_transformation`] produces: one tree per step and the
/// change set, expressed as target paths.
#[derive(Debug, Clone)]
pub struct ApplyOutcome {
    /// Step 2 — the target with every element specializing its before-twin
    /// counterpart.
    pub bound: SourceTree,
    /// Step 3 — removed elements deleted, references retargeted to the core.
    pub reduced: SourceTree,
    /// Step 4 — added elements in place, references retargeted to the
    /// after twin.
    pub extended: SourceTree,
    /// Step 5 — the evolved dartwin, pattern references severed.
    pub final_tree: SourceTree,
    /// What happened to the target, path by path.
    pub changes: ChangeSet,
}

/// The pattern and target flattened once, shared by the applicability
/// check and the transformation engine.
pub(crate) struct PatternContext {
    pub before_name: String,
    pub core_name: String,
    pub after_name: String,
    pub target_name: String,
    pub before: EffectiveModel,
    pub after: EffectiveModel,
    pub target: EffectiveModel,
    /// Core paths — what the pattern leaves alone.
    pub kept: BTreeSet<String>,
    /// Before-twin paths the pattern deletes.
    pub removed: BTreeSet<String>,
    /// After-twin paths the pattern introduces.
    pub added: BTreeSet<String>,
    /// Paths both removed and added: replaced in place.
    pub modified: BTreeSet<String>,
}

impl PatternContext {
    pub fn new(
        model: &SemanticModel,
        pattern: ElementId,
        target: ElementId,
    ) -> Result<Self, ApplyError> {
        if model[pattern].kind != ElementKind::DarTrans {
            return Err(ApplyError::NotAPattern(model.qualified_name(pattern)));
        }
        if model[target].kind != ElementKind::DarTwin {
            return Err(ApplyError::NotADartwin(model.qualified_name(target)));
        }
        let twins = model
            .pattern_twins(pattern)
            .ok_or_else(|| ApplyError::MissingCore(model.qualified_name(pattern)))?;
        let core = flatten(model, twins.core)?;
        let before = flatten(model, twins.before)?;
        let after = flatten(model, twins.after)?;
        let target_eff = flatten(model, target)?;

        let kept = core.paths();
        let removed: BTreeSet<String> = before.paths().difference(&kept).cloned().collect();
        let added: BTreeSet<String> = after.paths().difference(&kept).cloned().collect();
        let modified: BTreeSet<String> = removed.intersection(&added).cloned().collect();
        Ok(PatternContext {
            before_name: model.qualified_name(twins.before),
            core_name: model.qualified_name(twins.core),
            after_name: model.qualified_name(twins.after),
            target_name: model.qualified_name(target),
            before,
            after,
            target: target_eff,
            kept,
            removed,
            added,
            modified,
        })
    }
}

/// First path component stripped: `"a.b.c"` → `"a.b"`, `"a"` → `""`.
pub(crate) fn parent_path(path: &str) -> &str {
    path.rfind('.').map_or("", |dot| &path[..dot])
}

pub(crate) fn last_segment(path: &str) -> &str {
    path.rsplit('.').next().unwrap_or(path)
}

/// Applies `pattern` to `target` under `binding`, producing the four step
/// trees and the change set. Fails without touching anything if the
/// binding does not pass [`check_applicability`].
pub fn apply_transformation(
    model: &SemanticModel,
    pattern: ElementId,
    target: ElementId,
    binding: &Binding,
) -> Result<ApplyOutcome, ApplyError> {
    let ctx = PatternContext::new(model, pattern, target)?;
    let report = check_against(&ctx, binding);
    if !report.ok {
        return Err(ApplyError::NotApplicable(report));
    }

    let mut work = Work::from_target(&ctx, binding);
    let bound = work.snapshot(&ctx, Step::Bound);
    let removed = work.reduce(&ctx, binding)?;
    let reduced = work.snapshot(&ctx, Step::Reduced);
    let added = work.extend(&ctx, binding)?;
    let extended = work.snapshot(&ctx, Step::Extended);
    let final_tree = work.snapshot(&ctx, Step::Final);

    let kept: BTreeSet<String> = work
        .nodes
        .iter()
        .filter(|n| n.alive && !n.added)
        .filter_map(|n| n.target_path.clone())
        .filter(|p| !p.is_empty())
        .collect();
    let modified: Vec<String> = removed.intersection(&added).cloned().collect();
    let changes = ChangeSet {
        kept: kept.into_iter().collect(),
        removed: removed.into_iter().collect(),
        added: added.into_iter().collect(),
        modified,
    };
    Ok(ApplyOutcome {
        bound,
        reduced,
        extended,
        final_tree,
        changes,
    })
}

/// Step 3 alone: the target reduced to the pattern's core.
pub fn reduce_to_core(
    model: &SemanticModel,
    pattern: ElementId,
    target: ElementId,
    binding: &Binding,
) -> Result<SourceTree, ApplyError> {
    apply_transformation(model, pattern, target, binding).map(|o| o.reduced)
}

/// Steps 3–4: the reduced target extended with the after twin.
pub fn extend_with_after(
    model: &SemanticModel,
    pattern: ElementId,
    target: ElementId,
    binding: &Binding,
) -> Result<SourceTree, ApplyError> {
    apply_transformation(model, pattern, target, binding).map(|o| o.extended)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Step {
    Bound,
    Reduced,
    Extended,
    Final,
}

/// Mutable copy of the flattened target the steps operate on. Nodes are
/// never reordered or reindexed; deletion just clears `alive`, so indices
/// stay valid across steps.
struct Work {
    nodes: Vec<WorkNode>,
    /// Original target path → node, for nodes copied from the target.
    by_path: BTreeMap<String, usize>,
}

struct WorkNode {
    name: String,
    kind: ElementKind,
    parent: Option<usize>,
    children: Vec<usize>,
    doc: Option<String>,
    multiplicity: Option<Multiplicity>,
    connect: Option<(usize, usize)>,
    allocate: Option<(usize, usize)>,
    alive: bool,
    /// Pattern path this node is bound to — a before-twin path for
    /// original nodes, an after-twin path for added ones. `None` marks a
    /// target extra the pattern says nothing about.
    pattern_path: Option<String>,
    /// Created by step 4.
    added: bool,
    /// Path in the untouched target, for change reporting.
    target_path: Option<String>,
}

impl Work {
    fn from_target(ctx: &PatternContext, binding: &Binding) -> Work {
        let mut inverse: BTreeMap<String, String> = binding
            .map
            .iter()
            .map(|(p, t)| (t.clone(), p.clone()))
            .collect();
        // The roots are bound to each other implicitly.
        inverse.insert(String::new(), String::new());

        let mut work = Work {
            nodes: Vec::with_capacity(ctx.target.len()),
            by_path: BTreeMap::new(),
        };
        let order = ctx.target.pre_order();
        let mut eff_to_work = HashMap::with_capacity(order.len());
        for &id in &order {
            let n = ctx.target.node(id);
            let path = ctx.target.path_of(id);
            let parent = n.parent.map(|p| eff_to_work[&p]);
            let idx = work.nodes.len();
            work.nodes.push(WorkNode {
                name: n.name.clone(),
                kind: n.kind,
                parent,
                children: Vec::new(),
                doc: n.doc.clone(),
                multiplicity: n.multiplicity,
                connect: None,
                allocate: None,
                alive: true,
                pattern_path: inverse.get(&path).cloned(),
                added: false,
                target_path: Some(path.clone()),
            });
            if let Some(p) = parent {
                work.nodes[p].children.push(idx);
            }
            work.by_path.insert(path, idx);
            eff_to_work.insert(id, idx);
        }
        for &id in &order {
            let n = ctx.target.node(id);
            let idx = eff_to_work[&id];
            work.nodes[idx].connect = n.connect.map(|(s, d)| (eff_to_work[&s], eff_to_work[&d]));
            work.nodes[idx].allocate = n.allocate.map(|(g, t)| (eff_to_work[&g], eff_to_work[&t]));
        }
        work
    }

    fn path_of(&self, idx: usize) -> String {
        let mut parts = Vec::new();
        let mut cursor = idx;
        while let Some(parent) = self.nodes[cursor].parent {
            parts.push(self.nodes[cursor].name.clone());
            cursor = parent;
        }
        parts.reverse();
        parts.join(".")
    }

    fn kill(&mut self, idx: usize, removed: &mut BTreeSet<String>) {
        if !self.nodes[idx].alive {
            return;
        }
        self.nodes[idx].alive = false;
        if let Some(path) = self.nodes[idx].target_path.clone() {
            if !path.is_empty() {
                removed.insert(path);
            }
        }
        let children = self.nodes[idx].children.clone();
        for child in children {
            self.kill(child, removed);
        }
    }

    /// Step 3: delete the images of the removed pattern elements, then any
    /// unbound connection or allocation this leaves dangling. A *bound*
    /// element losing an endpoint would mean the applicability check let a
    /// broken binding through, so that is an error, not a deletion.
    fn reduce(
        &mut self,
        ctx: &PatternContext,
        binding: &Binding,
    ) -> Result<BTreeSet<String>, ApplyError> {
        let mut removed = BTreeSet::new();
        for gone in &ctx.removed {
            let image = &binding.map[gone];
            if let Some(&idx) = self.by_path.get(image) {
                self.kill(idx, &mut removed);
            }
        }
        loop {
            let mut dangling = Vec::new();
            for (idx, node) in self.nodes.iter().enumerate() {
                if !node.alive {
                    continue;
                }
                let endpoints = node
                    .connect
                    .iter()
                    .chain(node.allocate.iter())
                    .flat_map(|&(a, b)| [a, b]);
                for end in endpoints {
                    if self.nodes[end].alive {
                        continue;
                    }
                    let bound_to_kept = node
                        .pattern_path
                        .as_deref()
                        .is_some_and(|pp| ctx.kept.contains(pp));
                    if bound_to_kept {
                        return Err(ApplyError::LostEndpoint {
                            element: self.path_of(idx),
                            endpoint: self.path_of(end),
                        });
                    }
                    dangling.push(idx);
                    break;
                }
            }
            if dangling.is_empty() {
                break;
            }
            for idx in dangling {
                self.kill(idx, &mut removed);
            }
        }
        Ok(removed)
    }

    /// Step 4: create the added elements in after-twin pre-order, each
    /// under the image of its pattern parent (a modified element goes back
    /// where its original stood), then wire their endpoints.
    fn extend(
        &mut self,
        ctx: &PatternContext,
        binding: &Binding,
    ) -> Result<BTreeSet<String>, ApplyError> {
        let mut created: BTreeMap<String, usize> = BTreeMap::new();
        for id in ctx.after.pre_order() {
            let path = ctx.after.path_of(id);
            if id == ctx.after.root || !ctx.added.contains(&path) {
                continue;
            }
            let node = ctx.after.node(id);
            let is_modified = ctx.modified.contains(&path);
            let name = match binding.renames.get(&path) {
                Some(fresh) => fresh.clone(),
                None if is_modified => last_segment(&binding.map[&path]).to_string(),
                None => node.name.clone(),
            };
            let parent_after = parent_path(&path);
            let parent_idx = if let Some(&new_parent) = created.get(parent_after) {
                new_parent
            } else if is_modified {
                self.by_path[parent_path(&binding.map[&path])]
            } else if parent_after.is_empty() {
                0
            } else {
                self.by_path[binding.map[parent_after].as_str()]
            };
            let idx = self.nodes.len();
            self.nodes.push(WorkNode {
                name,
                kind: node.kind,
                parent: Some(parent_idx),
                children: Vec::new(),
                doc: node.doc.clone(),
                multiplicity: node.multiplicity,
                connect: None,
                allocate: None,
                alive: true,
                pattern_path: Some(path.clone()),
                added: true,
                target_path: None,
            });
            self.nodes[parent_idx].children.push(idx);
            created.insert(path, idx);
        }

        for (path, &idx) in &created {
            let id = ctx.after.find(path).expect("created from an after path");
            let node = ctx.after.node(id);
            if let Some((s, d)) = node.connect {
                let ends = (
                    self.locate(ctx, binding, &created, idx, s)?,
                    self.locate(ctx, binding, &created, idx, d)?,
                );
                self.nodes[idx].connect = Some(ends);
            }
            if let Some((g, t)) = node.allocate {
                let ends = (
                    self.locate(ctx, binding, &created, idx, g)?,
                    self.locate(ctx, binding, &created, idx, t)?,
                );
                self.nodes[idx].allocate = Some(ends);
            }
        }
        Ok(created.values().map(|&idx| self.path_of(idx)).collect())
    }

    /// Where an after-twin endpoint lives in the work tree: a node created
    /// by this step, or the live image of a kept element.
    fn locate(
        &self,
        ctx: &PatternContext,
        binding: &Binding,
        created: &BTreeMap<String, usize>,
        referrer: usize,
        endpoint: crate::flatten::EffId,
    ) -> Result<usize, ApplyError> {
        let path = ctx.after.path_of(endpoint);
        if let Some(&idx) = created.get(&path) {
            return Ok(idx);
        }
        binding
            .map
            .get(&path)
            .and_then(|image| self.by_path.get(image))
            .copied()
            .filter(|&idx| self.nodes[idx].alive)
            .ok_or_else(|| ApplyError::LostEndpoint {
                element: self.path_of(referrer),
                endpoint: path,
            })
    }

    fn snapshot(&self, ctx: &PatternContext, step: Step) -> SourceTree {
        let (twin, suffix) = match step {
            Step::Bound => (Some(&ctx.before_name), "bound"),
            Step::Reduced => (Some(&ctx.core_name), "reduced"),
            Step::Extended => (Some(&ctx.after_name), "extended"),
            Step::Final => (None, "final"),
        };
        SourceTree {
            file: format!("{}.{}", ctx.target_name, suffix),
            roots: vec![self.node_to_ast(0, twin)],
        }
    }

    fn node_to_ast(&self, idx: usize, twin: Option<&String>) -> Node {
        let w = &self.nodes[idx];
        let span = Span::new(0, 1);
        let (construct, keyword) = construct_for(w.kind);
        let mut node = Node::new(construct, span);
        node.hash_keyword = keyword.map(str::to_string);
        node.name = Some(w.name.clone());
        node.doc = w.doc.clone();
        node.multiplicity = w.multiplicity;
        if let (Some(twin), Some(pattern_path)) = (twin, &w.pattern_path) {
            let text = if pattern_path.is_empty() {
                twin.clone()
            } else {
                format!("{twin}.{pattern_path}")
            };
            node.specializes = vec![path_expr(&text, span)];
        }
        node.connect = w
            .connect
            .map(|(s, d)| (path_expr(&self.path_of(s), span), path_expr(&self.path_of(d), span)));
        node.allocate = w
            .allocate
            .map(|(g, t)| (path_expr(&self.path_of(g), span), path_expr(&self.path_of(t), span)));
        node.children = w
            .children
            .iter()
            .filter(|&&c| self.nodes[c].alive)
            .map(|&c| self.node_to_ast(c, twin))
            .collect();
        node
    }
}

fn path_expr(text: &str, span: Span) -> PathExpr {
    PathExpr {
        segments: text.split('.').map(str::to_string).collect(),
        span,
    }
}
