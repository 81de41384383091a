//! Effective trees.
//!
//! `effective_members` answers "what does this element actually contain,
//! once `:>` and `:>>` are taken into account":
//!
//! - inherited members come first, in base declaration order, bases
//!   walked depth first;
//! - own members follow in declaration order;
//! - a redefinition (`:>>`) replaces the inherited member *in place* and
//!   keeps contributing the replaced element's members underneath;
//! - an own member that merely shares an inherited member's name shadows
//!   it the same way — one rule, not two;
//! - a member reaching the element twice via the same origin (diamonds)
//!   is deduplicated; two *different* same-named origins are ambiguous.
//!
//! `flatten` applies that recursively, producing a specialization-free
//! tree whose nodes remember their origin elements, with connection
//! endpoints rewritten to effective nodes.

use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use thiserror::Error;

use crate::model::{ElementId, ElementKind, SemanticModel};
use crate::syntax::{Construct, Multiplicity, Node, PathExpr, SourceTree};
use crate::diag::Span;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlattenError {
    #[error("specialization cycle: {}", path.join(" :> "))]
    Cycle { path: Vec<String> },
    #[error("`{name}` in `{scope}` is inherited from more than one unrelated element")]
    Ambiguous { scope: String, name: String },
    #[error("`{element}` references `{endpoint}`, which does not exist in the flattened tree")]
    DanglingEndpoint { element: String, endpoint: String },
}

/// How an element ended up contributing to an effective node, seen from
/// the root being flattened.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Contribution {
    /// Declared right there.
    Own,
    /// Reached through one or more `:>`/`:>>` hops.
    Inherited,
    /// An own member replacing an inherited one.
    Redefined,
}

/// One slot in an element's effective member list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EffectiveMember {
    pub name: String,
    /// The element whose declaration defines this slot (the redefining
    /// element if the slot was redefined).
    pub element: ElementId,
    /// Every element that contributed, defining one first.
    pub origins: Vec<(ElementId, Contribution)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EffId(pub u32);

impl EffId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Node of a flattened tree.
#[derive(Debug, Clone)]
pub struct EffNode {
    pub name: String,
    pub kind: ElementKind,
    pub parent: Option<EffId>,
    pub children: Vec<EffId>,
    /// Contributing elements, defining one first.
    pub origins: Vec<(ElementId, Contribution)>,
    pub doc: Option<String>,
    pub multiplicity: Option<Multiplicity>,
    /// Connection endpoints, rewritten to effective nodes.
    pub connect: Option<(EffId, EffId)>,
    /// Allocation sides, rewritten to effective nodes.
    pub allocate: Option<(EffId, EffId)>,
}

impl EffNode {
    /// The element whose declaration defines this node.
    pub fn defining(&self) -> ElementId {
        self.origins[0].0
    }
}

/// A flattened, specialization-free tree.
#[derive(Debug, Clone)]
pub struct EffectiveModel {
    nodes: Vec<EffNode>,
    pub root: EffId,
    /// Origin element → effective node (first in pre-order, which is
    /// unique unless a base is inherited along two sibling paths).
    by_origin: HashMap<ElementId, EffId>,
}

impl EffectiveModel {
    pub fn node(&self, id: EffId) -> &EffNode {
        &self.nodes[id.index()]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Ids in pre-order (root first).
    pub fn pre_order(&self) -> Vec<EffId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        fn walk(m: &EffectiveModel, id: EffId, out: &mut Vec<EffId>) {
            out.push(id);
            for &c in &m.node(id).children {
                walk(m, c, out);
            }
        }
        walk(self, self.root, &mut out);
        out
    }

    /// Root-relative dotted path; empty string for the root itself.
    pub fn path_of(&self, id: EffId) -> String {
        let mut parts = Vec::new();
        let mut cursor = Some(id);
        while let Some(cur) = cursor {
            if cur == self.root {
                break;
            }
            parts.push(self.node(cur).name.clone());
            cursor = self.node(cur).parent;
        }
        parts.reverse();
        parts.join(".")
    }

    /// All root-relative paths, root excluded. Sibling names are unique
    /// (flattening fails on ambiguity), so paths identify nodes.
    pub fn paths(&self) -> std::collections::BTreeSet<String> {
        self.pre_order()
            .into_iter()
            .filter(|&id| id != self.root)
            .map(|id| self.path_of(id))
            .collect()
    }

    /// Node at a root-relative dotted path ("" is the root).
    pub fn find(&self, path: &str) -> Option<EffId> {
        if path.is_empty() {
            return Some(self.root);
        }
        let mut current = self.root;
        'seg: for seg in path.split('.') {
            for &child in &self.node(current).children {
                if self.node(child).name == seg {
                    current = child;
                    continue 'seg;
                }
            }
            return None;
        }
        Some(current)
    }

    /// Effective node an origin element landed in.
    pub fn by_origin(&self, element: ElementId) -> Option<EffId> {
        self.by_origin.get(&element).copied()
    }

    /// Materialize as a syntax tree: canonical flattened text, endpoints
    /// spelled as root-relative qualified paths.
    pub fn to_source_tree(&self, file: &str) -> SourceTree {
        let root = self.node(self.root);
        SourceTree {
            file: file.to_string(),
            roots: vec![self.node_to_ast(self.root, &root.name)],
        }
    }

    fn node_to_ast(&self, id: EffId, name: &str) -> Node {
        let n = self.node(id);
        let dummy = Span { start: 0, end: 1 };
        let mut node = Node::new(construct_for(n.kind).0, dummy);
        node.hash_keyword = construct_for(n.kind).1.map(str::to_string);
        node.name = Some(name.to_string());
        node.doc = n.doc.clone();
        node.multiplicity = n.multiplicity;
        let as_path = |id: EffId| PathExpr {
            segments: self.path_of(id).split('.').map(str::to_string).collect(),
            span: dummy,
        };
        node.connect = n.connect.map(|(s, d)| (as_path(s), as_path(d)));
        node.allocate = n.allocate.map(|(g, t)| (as_path(g), as_path(t)));
        node.children = n
            .children
            .iter()
            .map(|&c| self.node_to_ast(c, &self.node(c).name))
            .collect();
        node
    }
}

/// Syntax construct (and hash keyword, if any) that spells an element kind.
pub(crate) fn construct_for(kind: ElementKind) -> (Construct, Option<&'static str>) {
    match kind {
        ElementKind::DarTwin => (Construct::Keyword, Some("dartwin")),
        ElementKind::TwinSystem => (Construct::Keyword, Some("twinsystem")),
        ElementKind::DigitalTwin => (Construct::Keyword, Some("digitaltwin")),
        ElementKind::Goal => (Construct::Keyword, Some("goal")),
        ElementKind::Arbiter => (Construct::Keyword, Some("arbiter")),
        ElementKind::Conflict => (Construct::Keyword, Some("vs")),
        ElementKind::DarTrans => (Construct::Keyword, Some("dartrans")),
        ElementKind::DartwinCore => (Construct::Keyword, Some("dartwin_core")),
        ElementKind::DartwinBefore => (Construct::Keyword, Some("dartwin_before")),
        ElementKind::DartwinAfter => (Construct::Keyword, Some("dartwin_after")),
        ElementKind::Part => (Construct::Part, None),
        ElementKind::Port => (Construct::Port, None),
        ElementKind::Connection => (Construct::Connection, None),
        ElementKind::Allocation => (Construct::Allocation, None),
        ElementKind::Package => (Construct::Package, None),
    }
}

type Memo = HashMap<ElementId, Rc<Vec<EffectiveMember>>>;

/// Ordered effective member list of one element.
pub fn effective_members(
    model: &SemanticModel,
    element: ElementId,
) -> Result<Vec<EffectiveMember>, FlattenError> {
    let mut memo = Memo::new();
    let mut stack = Vec::new();
    members_memoized(model, element, &mut memo, &mut stack).map(|rc| rc.as_ref().clone())
}

fn members_memoized(
    model: &SemanticModel,
    element: ElementId,
    memo: &mut Memo,
    stack: &mut Vec<ElementId>,
) -> Result<Rc<Vec<EffectiveMember>>, FlattenError> {
    if let Some(hit) = memo.get(&element) {
        return Ok(hit.clone());
    }
    if let Some(pos) = stack.iter().position(|&e| e == element) {
        let mut path: Vec<String> = stack[pos..]
            .iter()
            .map(|&e| display_name(model, e))
            .collect();
        path.push(display_name(model, element));
        return Err(FlattenError::Cycle { path });
    }
    stack.push(element);

    let mut slots: Vec<EffectiveMember> = Vec::new();
    let el = &model[element];
    let bases: Vec<ElementId> = el
        .specializes
        .iter()
        .chain(el.redefines.iter())
        .copied()
        .collect();
    for base in bases {
        let inherited = members_memoized(model, base, memo, stack)?;
        for m in inherited.iter() {
            merge_inherited(model, element, &mut slots, m)?;
        }
    }

    for &own in &el.members {
        let own_el = &model[own];
        let Some(name) = own_el.name.clone() else {
            continue; // nameless leftovers of build errors
        };
        if let Some(target) = own_el.redefines {
            if let Some(slot) = slots
                .iter_mut()
                .find(|s| s.origins.iter().any(|&(o, _)| o == target))
            {
                let mut origins = vec![(own, Contribution::Redefined)];
                origins.extend(slot.origins.iter().copied());
                // A renaming redefinition renames the slot; the position
                // stays.
                slot.name = name;
                slot.element = own;
                slot.origins = origins;
                continue;
            }
        }
        if let Some(slot) = slots.iter_mut().find(|s| s.name == name) {
            // Same name without `:>>`: shadows the inherited member in place.
            let mut origins = vec![(own, Contribution::Own)];
            origins.extend(slot.origins.iter().copied());
            slot.element = own;
            slot.origins = origins;
        } else {
            slots.push(EffectiveMember {
                name,
                element: own,
                origins: vec![(own, Contribution::Own)],
            });
        }
    }

    stack.pop();
    let rc = Rc::new(slots);
    memo.insert(element, rc.clone());
    Ok(rc)
}

fn merge_inherited(
    model: &SemanticModel,
    scope: ElementId,
    slots: &mut Vec<EffectiveMember>,
    incoming: &EffectiveMember,
) -> Result<(), FlattenError> {
    let inherited_origins = || {
        incoming
            .origins
            .iter()
            .map(|&(o, _)| (o, Contribution::Inherited))
    };
    let Some(slot) = slots.iter_mut().find(|s| s.name == incoming.name) else {
        slots.push(EffectiveMember {
            name: incoming.name.clone(),
            element: incoming.element,
            origins: inherited_origins().collect(),
        });
        return Ok(());
    };
    if slot.element == incoming.element {
        // Diamond: same origin reached twice; keep one copy.
        for (o, c) in inherited_origins() {
            if !slot.origins.iter().any(|&(e, _)| e == o) {
                slot.origins.push((o, c));
            }
        }
        return Ok(());
    }
    // Same name from two bases: a redefinition relationship decides, its
    // absence is a genuine conflict.
    if crate::model::redefinition_reaches(model, slot.element, incoming.element) {
        for (o, c) in inherited_origins() {
            if !slot.origins.iter().any(|&(e, _)| e == o) {
                slot.origins.push((o, c));
            }
        }
        Ok(())
    } else if crate::model::redefinition_reaches(model, incoming.element, slot.element) {
        let mut origins: Vec<(ElementId, Contribution)> = inherited_origins().collect();
        for &(o, c) in slot.origins.iter() {
            if !origins.iter().any(|&(e, _)| e == o) {
                origins.push((o, c));
            }
        }
        slot.element = incoming.element;
        slot.origins = origins;
        Ok(())
    } else {
        Err(FlattenError::Ambiguous {
            scope: display_name(model, scope),
            name: incoming.name.clone(),
        })
    }
}

fn display_name(model: &SemanticModel, element: ElementId) -> String {
    model[element]
        .name
        .clone()
        .unwrap_or_else(|| "<anonymous>".into())
}

/// Flatten `root` (a dartwin or pattern twin) into an effective tree.
pub fn flatten(model: &SemanticModel, root: ElementId) -> Result<EffectiveModel, FlattenError> {
    let mut eff = EffectiveModel {
        nodes: Vec::new(),
        root: EffId(0),
        by_origin: HashMap::new(),
    };
    let mut memo = Memo::new();
    instantiate(
        model,
        &mut eff,
        None,
        display_name(model, root),
        root,
        root_origins(model, root),
        &mut memo,
    )?;
    debug_assert_eq!(eff.root, EffId(0));
    rewrite_endpoints(model, &mut eff)?;
    Ok(eff)
}

/// The root contributes itself plus every transitive base, so that its
/// documentation and multiplicity fall back the same way members' do and
/// endpoints naming a base element land on the flattened root.
fn root_origins(model: &SemanticModel, root: ElementId) -> Vec<(ElementId, Contribution)> {
    let mut origins = vec![(root, Contribution::Own)];
    let mut seen: HashSet<ElementId> = HashSet::from([root]);
    let mut stack: Vec<ElementId> = Vec::new();
    let push_bases = |stack: &mut Vec<ElementId>, el: ElementId| {
        stack.extend(model[el].redefines.iter().rev());
        stack.extend(model[el].specializes.iter().rev());
    };
    push_bases(&mut stack, root);
    while let Some(base) = stack.pop() {
        if seen.insert(base) {
            origins.push((base, Contribution::Inherited));
            push_bases(&mut stack, base);
        }
    }
    origins
}

fn instantiate(
    model: &SemanticModel,
    eff: &mut EffectiveModel,
    parent: Option<EffId>,
    name: String,
    element: ElementId,
    origins: Vec<(ElementId, Contribution)>,
    memo: &mut Memo,
) -> Result<EffId, FlattenError> {
    let id = EffId(eff.nodes.len() as u32);
    // Documentation and multiplicity fall back along the origin chain, so a
    // redefinition that states neither keeps the redefined element's.
    let doc = origins
        .iter()
        .find_map(|&(o, _)| model[o].doc.clone());
    let multiplicity = origins
        .iter()
        .find_map(|&(o, _)| model[o].multiplicity);
    for &(o, _) in &origins {
        eff.by_origin.entry(o).or_insert(id);
    }
    eff.nodes.push(EffNode {
        name,
        kind: model[element].kind,
        parent,
        children: Vec::new(),
        origins,
        doc,
        multiplicity,
        connect: None,
        allocate: None,
    });
    let mut stack = Vec::new();
    let members = members_memoized(model, element, memo, &mut stack)?;
    for m in members.iter() {
        let child = instantiate(
            model,
            eff,
            Some(id),
            m.name.clone(),
            m.element,
            m.origins.clone(),
            memo,
        )?;
        eff.nodes[id.index()].children.push(child);
    }
    Ok(id)
}

fn rewrite_endpoints(model: &SemanticModel, eff: &mut EffectiveModel) -> Result<(), FlattenError> {
    for id in eff.pre_order() {
        let defining = eff.node(id).defining();
        let el = &model[defining];
        if let Some((s, d)) = el.connect {
            let s_eff = locate(model, eff, id, s)?;
            let d_eff = locate(model, eff, id, d)?;
            eff.nodes[id.index()].connect = Some((s_eff, d_eff));
        }
        if let Some((g, t)) = el.allocate {
            let g_eff = locate(model, eff, id, g)?;
            let t_eff = locate(model, eff, id, t)?;
            eff.nodes[id.index()].allocate = Some((g_eff, t_eff));
        }
    }
    Ok(())
}

fn locate(
    model: &SemanticModel,
    eff: &EffectiveModel,
    referrer: EffId,
    endpoint: ElementId,
) -> Result<EffId, FlattenError> {
    eff.by_origin(endpoint)
        .ok_or_else(|| FlattenError::DanglingEndpoint {
            element: eff.node(referrer).name.clone(),
            endpoint: display_name(model, endpoint),
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

    fn flat(source: &str, root: &str) -> EffectiveModel {
        let model = model_of(source);
        let id = model.root(root).expect("root exists");
        flatten(&model, id).expect("flattens")
    }

    fn child_names(eff: &EffectiveModel, path: &str) -> Vec<String> {
        let id = eff.find(path).unwrap_or_else(|| panic!("no node at `{path}`"));
        eff.node(id)
            .children
            .iter()
            .map(|&c| eff.node(c).name.clone())
            .collect()
    }

    #[test]
    fn inherited_members_come_before_own_ones() {
        let eff = flat(
            "part Base { part one; part two; }\npart Derived :> Base { part three; }",
            "Derived",
        );
        assert_eq!(child_names(&eff, ""), ["one", "two", "three"]);
    }

    #[test]
    fn redefinition_replaces_in_place_and_merges_bodies() {
        let eff = flat(
            "part Base { part slot { part kept; } part after; }\n\
             part Derived :> Base { part :>> slot { part extra; } }",
            "Derived",
        );
        assert_eq!(child_names(&eff, ""), ["slot", "after"]);
        assert_eq!(child_names(&eff, "slot"), ["kept", "extra"]);
        // The redefining element defines the node; the base still counts
        // as a contributing origin.
        let slot = eff.find("slot").unwrap();
        assert_eq!(eff.node(slot).origins.len(), 2);
        assert_eq!(eff.node(slot).origins[1].1, Contribution::Inherited);
    }

    #[test]
    fn a_renaming_redefinition_renames_the_slot() {
        let eff = flat(
            "part Base { part old; part after; }\n\
             part Derived :> Base { part new :>> old; }",
            "Derived",
        );
        assert_eq!(child_names(&eff, ""), ["new", "after"]);
        assert!(eff.find("old").is_none());
    }

    #[test]
    fn plain_same_name_member_shadows_the_inherited_one() {
        // Without `:>>` the own declaration wins the slot, but nothing
        // of the inherited body is merged in.
        let eff = flat(
            "part Base { part slot { part fromBase; } }\n\
             part Derived :> Base { part slot { part fromDerived; } }",
            "Derived",
        );
        assert_eq!(child_names(&eff, ""), ["slot"]);
        assert_eq!(child_names(&eff, "slot"), ["fromDerived"]);
    }

    #[test]
    fn diamond_inheritance_contributes_each_member_once() {
        let eff = flat(
            "part Top { part shared; }\n\
             part Left :> Top { part l; }\n\
             part Right :> Top { part r; }\n\
             part Bottom :> Left, Right;",
            "Bottom",
        );
        assert_eq!(child_names(&eff, ""), ["shared", "l", "r"]);
    }

    #[test]
    fn unrelated_same_name_inheritance_is_ambiguous() {
        let model = model_of(
            "part Left { part clash; }\n\
             part Right { part clash; }\n\
             part Both :> Left, Right;",
        );
        let root = model.root("Both").unwrap();
        let err = flatten(&model, root).unwrap_err();
        assert_eq!(
            err,
            FlattenError::Ambiguous { scope: "Both".into(), name: "clash".into() }
        );
    }

    #[test]
    fn a_redefinition_on_one_branch_settles_the_diamond() {
        // Bottom sees `shared` from Left (redefined) and from Right
        // (inherited from Top). The redefinition reaches Top's element,
        // so the two candidates are related and Left's wins.
        let eff = flat(
            "part Top { part shared; }\n\
             part Left :> Top { part shared :>> shared { part extra; } }\n\
             part Right :> Top;\n\
             part Bottom :> Left, Right;",
            "Bottom",
        );
        assert_eq!(child_names(&eff, ""), ["shared"]);
        assert_eq!(child_names(&eff, "shared"), ["extra"]);
    }

    #[test]
    fn specialization_cycles_are_reported_not_looped() {
        let model = model_of("part A :> B;\npart B :> A;");
        let root = model.root("A").unwrap();
        match flatten(&model, root) {
            Err(FlattenError::Cycle { path }) => {
                assert!(path.len() >= 2, "cycle path {path:?}");
            }
            other => panic!("expected a cycle error, got {other:?}"),
        }
    }

    #[test]
    fn docs_and_multiplicities_fall_back_through_the_origin_chain() {
        let eff = flat(
            "part Base { part slot [2..4]; doc /* base words */ }\n\
             part Derived :> Base { part :>> slot; }",
            "Derived",
        );
        let slot = eff.node(eff.find("slot").unwrap());
        assert_eq!(
            slot.multiplicity,
            Some(Multiplicity { lower: 2, upper: Some(4) })
        );
        assert_eq!(eff.node(eff.root).doc.as_deref(), Some("base words"));
    }

    #[test]
    fn connection_endpoints_follow_the_flattened_copies() {
        let eff = flat(
            "part Base { part A { port p; } part B { port q; } connection c connect A.p to B.q; }\n\
             part Derived :> Base;",
            "Derived",
        );
        let c = eff.find("c").unwrap();
        let (from, to) = eff.node(c).connect.expect("connection endpoints");
        assert_eq!(eff.path_of(from), "A.p");
        assert_eq!(eff.path_of(to), "B.q");
    }

    #[test]
    fn endpoints_resolve_to_the_first_inherited_copy() {
        // `One.p` and `Two.p` both resolve to the single element
        // `Shared.p`, and endpoint rewriting keys on element identity, so
        // both land on the first copy in pre-order. A documented limit:
        // a base instantiated twice aliases; spell endpoints through
        // locally declared ports to distinguish the copies.
        let eff = flat(
            "part Shared { port p; }\n\
             part Wires { connection c connect One.p to Two.p; part One :> Shared; part Two :> Shared; }",
            "Wires",
        );
        let c = eff.find("c").unwrap();
        let (from, to) = eff.node(c).connect.expect("connection endpoints");
        assert_eq!(from, to);
        assert_eq!(eff.path_of(from), "One.p");
    }

    #[test]
    fn removed_endpoints_surface_as_dangling() {
        // Derived shadows `A` with a portless body, so the inherited
        // connection's `A.p` endpoint no longer exists.
        let model = model_of(
            "part Base { part A { port p; } part B { port q; } connection c connect A.p to B.q; }\n\
             part Derived :> Base { part A; }",
        );
        let root = model.root("Derived").unwrap();
        match flatten(&model, root) {
            Err(FlattenError::DanglingEndpoint { element, .. }) => {
                assert_eq!(element, "c");
            }
            other => panic!("expected a dangling endpoint, got {other:?}"),
        }
    }

    #[test]
    fn printing_the_flattened_tree_reparses_to_the_same_shape() {
        let eff = flat(
            "#dartwin D { #twinsystem TS { #digitaltwin DT { port p [0..*]; } } #goal G; doc /* aims */ }",
            "D",
        );
        let printed = crate::syntax::print(&eff.to_source_tree("out.dartwin"));
        let (tree, diags) = parse(&printed, "out.dartwin");
        assert!(diags.is_empty(), "printed tree must reparse: {diags:?}\n{printed}");
        let again = build_model(&[tree]);
        assert!(!again.has_errors());
        let id = again.root("D").unwrap();
        let eff2 = flatten(&again, id).expect("reflattens");
        assert_eq!(eff.paths(), eff2.paths());
    }
}
