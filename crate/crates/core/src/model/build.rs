//! Model construction.
//!
//! Phase 1 creates the element arena in depth-first declaration order and
//! registers names scope by scope. Phase 2 resolves `:>` and `:>>` paths to
//! a fixpoint — an edge may only become resolvable once another edge has
//! been resolved (a specialization target found through an inherited
//! member, say), so unresolved references are retried until a full round
//! makes no progress. Phase 3 resolves connection endpoints and allocation
//! sides, which may navigate through any of the edges phase 2 produced.

use crate::diag::Diagnostic;
use crate::syntax::{Construct, Node, PathExpr, SourceTree};

use super::resolve::{lookup_member, resolve, ResolveError};
use super::{Element, ElementId, ElementKind, SemanticModel};

/// Build one model from any number of parsed files. All files share the
/// top-level namespace. Problems surface as diagnostics on the returned
/// model, never as a failure — callers decide how much brokenness they
/// tolerate.
pub fn build_model(trees: &[SourceTree]) -> SemanticModel {
    let mut b = Builder {
        model: SemanticModel::default(),
        pending: Vec::new(),
    };
    for tree in trees {
        for node in &tree.roots {
            b.create(node, None, &tree.file);
        }
    }
    b.resolve_heritage();
    b.resolve_endpoints();
    b.model
}

/// References of one element awaiting resolution.
struct Pending {
    element: ElementId,
    specializes: Vec<(PathExpr, bool)>, // path, resolved?
    redefines: Option<PathExpr>,
    anonymous: bool,
    connect: Option<(PathExpr, PathExpr)>,
    allocate: Option<(PathExpr, PathExpr)>,
    file: String,
}

struct Builder {
    model: SemanticModel,
    pending: Vec<Pending>,
}

impl Builder {
    /// Phase 1: create the element for `node` (if it produces one) and
    /// recurse into its children.
    fn create(&mut self, node: &Node, owner: Option<ElementId>, file: &str) {
        let kind = match node.construct {
            // Imports and definitions are syntax-level: they shape the
            // vocabulary, not the model content.
            Construct::Import
            | Construct::PartDef
            | Construct::RequirementDef
            | Construct::ConnectionDef
            | Construct::MetadataDef => return,
            Construct::Package | Construct::LibraryPackage => ElementKind::Package,
            Construct::Part => ElementKind::Part,
            Construct::Port => ElementKind::Port,
            Construct::Connection => ElementKind::Connection,
            Construct::Allocation => ElementKind::Allocation,
            Construct::Requirement => ElementKind::Goal,
            Construct::Keyword => {
                let kw = node.hash_keyword.as_deref().unwrap_or("");
                match ElementKind::from_hash_keyword(kw) {
                    Some(kind) => kind,
                    None => {
                        self.model.diagnostics.push(Diagnostic::error(
                            file,
                            node.span,
                            format!("unknown DarTwin keyword `#{kw}`"),
                        ));
                        return;
                    }
                }
            }
        };

        if node.connect.is_some() && !matches!(kind, ElementKind::Connection | ElementKind::Conflict)
        {
            self.model.diagnostics.push(Diagnostic::error(
                file,
                node.span,
                "a `connect` clause is only valid on connections and `#vs` conflicts",
            ));
        }
        if node.allocate.is_some() && kind != ElementKind::Allocation {
            self.model.diagnostics.push(Diagnostic::error(
                file,
                node.span,
                "an `allocate` clause is only valid on allocations",
            ));
        }

        // Duplicate sibling names: the first declaration wins, the rest are
        // dropped entirely (members and all) so downstream stages see one
        // element per name and scope.
        if let Some(name) = &node.name {
            if let Some(first) = self.model.own_member(owner, name) {
                let first_file = self.model[first].file.clone();
                self.model.diagnostics.push(Diagnostic::error(
                    file,
                    node.span,
                    format!("duplicate name `{name}` (first declared in {first_file})"),
                ));
                return;
            }
        }

        let id = ElementId(self.model.elements.len() as u32);
        self.model.elements.push(Element {
            id,
            kind,
            name: node.name.clone(),
            owner,
            members: Vec::new(),
            specializes: Vec::new(),
            redefines: None,
            multiplicity: node.multiplicity,
            doc: node.doc.clone(),
            connect: None,
            allocate: None,
            file: file.to_string(),
            span: node.span,
        });
        match owner {
            Some(o) => self.model.elements[o.index()].members.push(id),
            None => self.model.roots.push(id),
        }
        if let Some(name) = &node.name {
            self.model
                .scopes
                .entry(owner)
                .or_default()
                .insert(name.clone(), id);
        }

        if !node.specializes.is_empty()
            || node.redefines.is_some()
            || node.connect.is_some()
            || node.allocate.is_some()
        {
            self.pending.push(Pending {
                element: id,
                specializes: node.specializes.iter().map(|p| (p.clone(), false)).collect(),
                redefines: node.redefines.clone(),
                anonymous: node.name.is_none(),
                connect: node.connect.clone(),
                allocate: node.allocate.clone(),
                file: file.to_string(),
            });
        }

        for child in &node.children {
            self.create(child, Some(id), file);
        }
    }

    /// Phase 2: `:>` and `:>>` to a fixpoint.
    fn resolve_heritage(&mut self) {
        loop {
            let mut progressed = false;
            for i in 0..self.pending.len() {
                progressed |= self.try_specializations(i);
                progressed |= self.try_redefinition(i);
            }
            if !progressed {
                break;
            }
        }
        // Whatever is still unresolved now never will be: report it.
        for i in 0..self.pending.len() {
            let p = &self.pending[i];
            let file = p.file.clone();
            let mut diags = Vec::new();
            for (path, done) in &p.specializes {
                if !*done {
                    diags.push(Diagnostic::error(
                        &file,
                        path.span,
                        format!("cannot resolve specialization target `{}`", path.text()),
                    ));
                }
            }
            if let Some(path) = &p.redefines {
                if self.model[p.element].redefines.is_none() {
                    diags.push(Diagnostic::error(
                        &file,
                        path.span,
                        format!("cannot resolve redefinition target `{}`", path.text()),
                    ));
                }
            }
            self.model.diagnostics.append(&mut diags);
        }
    }

    fn try_specializations(&mut self, i: usize) -> bool {
        let element = self.pending[i].element;
        let mut progressed = false;
        for s in 0..self.pending[i].specializes.len() {
            if self.pending[i].specializes[s].1 {
                continue;
            }
            let path = self.pending[i].specializes[s].0.clone();
            match resolve(&self.model, element, &path.segments) {
                Ok(target) => {
                    self.pending[i].specializes[s].1 = true;
                    self.model.elements[element.index()].specializes.push(target);
                    progressed = true;
                }
                Err(ResolveError::Ambiguous { name }) => {
                    // More resolution only adds candidates; ambiguity is final.
                    self.pending[i].specializes[s].1 = true;
                    let file = self.pending[i].file.clone();
                    self.model.diagnostics.push(Diagnostic::error(
                        file,
                        path.span,
                        format!("specialization target `{name}` is ambiguous"),
                    ));
                    progressed = true;
                }
                Err(ResolveError::Unresolved { .. }) => {}
            }
        }
        progressed
    }

    /// `:>>` targets live among the owner's *inherited* members — the
    /// redefining element must not match itself or a sibling.
    fn try_redefinition(&mut self, i: usize) -> bool {
        let p = &self.pending[i];
        if p.redefines.is_none() || self.model[p.element].redefines.is_some() {
            return false;
        }
        let element = p.element;
        let path = p.redefines.clone().unwrap();
        let anonymous = p.anonymous;
        let file = p.file.clone();

        let Some(owner) = self.model[element].owner else {
            self.model.diagnostics.push(Diagnostic::error(
                file,
                path.span,
                "a top-level element cannot redefine anything",
            ));
            self.pending[i].redefines = None;
            return true;
        };

        let target = if path.segments.len() == 1 {
            let name = &path.segments[0];
            let owner_el = &self.model[owner];
            let bases: Vec<ElementId> = owner_el
                .specializes
                .iter()
                .chain(owner_el.redefines.iter())
                .copied()
                .collect();
            let mut found = None;
            for base in bases {
                match lookup_member(&self.model, base, name) {
                    Ok(Some(hit)) => {
                        found = Some(hit);
                        break;
                    }
                    Ok(None) => {}
                    Err(_) => {
                        self.model.diagnostics.push(Diagnostic::error(
                            &file,
                            path.span,
                            format!("redefinition target `{name}` is ambiguous"),
                        ));
                        self.pending[i].redefines = None;
                        return true;
                    }
                }
            }
            found
        } else {
            resolve(&self.model, element, &path.segments).ok()
        };

        let Some(target) = target else {
            // Owner's bases may still be unresolved; retry next round.
            return false;
        };

        self.model.elements[element.index()].redefines = Some(target);
        if anonymous {
            let effective = self.model[target].name.clone();
            self.model.elements[element.index()].name = effective.clone();
            if let Some(name) = effective {
                let owner_key = Some(owner);
                if self.model.own_member(owner_key, &name).is_some() {
                    self.model.diagnostics.push(Diagnostic::error(
                        &file,
                        path.span,
                        format!("redefinition of `{name}` clashes with a sibling of the same name"),
                    ));
                } else {
                    self.model
                        .scopes
                        .entry(owner_key)
                        .or_default()
                        .insert(name, element);
                }
            }
        }
        true
    }

    /// Phase 3: connection endpoints and allocation sides.
    fn resolve_endpoints(&mut self) {
        for i in 0..self.pending.len() {
            let element = self.pending[i].element;
            let file = self.pending[i].file.clone();
            if let Some((src, dst)) = self.pending[i].connect.clone() {
                let src_id = self.resolve_endpoint(element, &src, &file);
                let dst_id = self.resolve_endpoint(element, &dst, &file);
                if let (Some(s), Some(d)) = (src_id, dst_id) {
                    if self.model[element].kind == ElementKind::Connection {
                        for (end, path) in [(s, &src), (d, &dst)] {
                            if self.model[end].kind != ElementKind::Port {
                                self.model.diagnostics.push(Diagnostic::error(
                                    &file,
                                    path.span,
                                    format!(
                                        "connection endpoint `{}` is a {:?}, expected a Port",
                                        path.text(),
                                        self.model[end].kind
                                    ),
                                ));
                            }
                        }
                    }
                    self.model.elements[element.index()].connect = Some((s, d));
                }
            }
            if let Some((goal, twin)) = self.pending[i].allocate.clone() {
                let goal_id = self.resolve_endpoint(element, &goal, &file);
                let twin_id = self.resolve_endpoint(element, &twin, &file);
                if let (Some(g), Some(t)) = (goal_id, twin_id) {
                    self.model.elements[element.index()].allocate = Some((g, t));
                }
            }
        }
    }

    fn resolve_endpoint(
        &mut self,
        scope: ElementId,
        path: &PathExpr,
        file: &str,
    ) -> Option<ElementId> {
        match resolve(&self.model, scope, &path.segments) {
            Ok(id) => Some(id),
            Err(err) => {
                self.model
                    .diagnostics
                    .push(Diagnostic::error(file, path.span, err.to_string()));
                None
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn model_of(source: &str) -> SemanticModel {
        let (tree, diags) = parse(source, "test.dartwin");
        assert!(diags.is_empty(), "unexpected parse diagnostics: {diags:?}");
        build_model(&[tree])
    }

    fn messages(model: &SemanticModel) -> Vec<String> {
        model.diagnostics.iter().map(|d| d.message.clone()).collect()
    }

    #[test]
    fn forward_references_resolve_across_files() {
        // `Derived` appears before `Base`, and in a different file.
        let (a, d1) = parse("part Derived :> Base { part own; }", "a.dartwin");
        let (b, d2) = parse("part Base { part inherited; }", "b.dartwin");
        assert!(d1.is_empty() && d2.is_empty());
        let model = build_model(&[a, b]);
        assert!(!model.has_errors(), "{:?}", model.diagnostics);
        let derived = model.root("Derived").unwrap();
        let base = model.root("Base").unwrap();
        assert_eq!(model[derived].specializes, vec![base]);
    }

    #[test]
    fn anonymous_redefinition_takes_the_target_name() {
        let model = model_of(
            "part Base { part slot; }\npart Derived :> Base { part :>> slot { part extra; } }",
        );
        assert!(!model.has_errors(), "{:?}", model.diagnostics);
        let derived = model.root("Derived").unwrap();
        let member = model[derived].members[0];
        assert_eq!(model[member].name.as_deref(), Some("slot"));
        let target = model[member].redefines.expect("resolved redefinition");
        assert_eq!(model.qualified_name(target), "Base.slot");
    }

    #[test]
    fn redefinition_looks_through_bases_not_at_siblings() {
        // The single-segment `:>> slot` must find the inherited slot, not
        // the sibling that happens to share the name it will take on.
        let model = model_of(
            "part Base { part slot; }\npart Derived :> Base { part mine :>> slot; }",
        );
        assert!(!model.has_errors(), "{:?}", model.diagnostics);
        let derived = model.root("Derived").unwrap();
        let target = model[model[derived].members[0]].redefines.unwrap();
        assert_eq!(model.qualified_name(target), "Base.slot");
    }

    #[test]
    fn duplicate_sibling_names_keep_the_first() {
        let model = model_of("part P { part x { part a; } part x { part b; } }");
        assert!(messages(&model).iter().any(|m| m.contains("duplicate name `x`")));
        let p = model.root("P").unwrap();
        assert_eq!(model[p].members.len(), 1);
        let x = model[p].members[0];
        assert_eq!(model[model[x].members[0]].name.as_deref(), Some("a"));
    }

    #[test]
    fn unknown_hash_keywords_are_skipped_with_a_diagnostic() {
        let model = model_of("#dartwin D { #widget W { port p; } part ok; }");
        assert!(messages(&model).iter().any(|m| m.contains("unknown DarTwin keyword `#widget`")));
        let d = model.root("D").unwrap();
        assert_eq!(model[d].members.len(), 1);
        assert_eq!(model[model[d].members[0]].name.as_deref(), Some("ok"));
    }

    #[test]
    fn connection_endpoints_must_be_ports() {
        let model = model_of(
            "#dartwin D { part A { port p; } part B; connection c connect A.p to B; }",
        );
        assert!(
            messages(&model).iter().any(|m| m.contains("expected a Port")),
            "{:?}",
            model.diagnostics
        );
    }

    #[test]
    fn unresolved_targets_are_reported_after_the_fixpoint() {
        let model = model_of("part A :> Missing;");
        assert!(messages(&model)
            .iter()
            .any(|m| m.contains("cannot resolve specialization target `Missing`")));
    }

    #[test]
    fn top_level_redefinition_is_rejected() {
        let model = model_of("part Base;\npart :>> Base;");
        assert!(messages(&model)
            .iter()
            .any(|m| m.contains("a top-level element cannot redefine anything")));
    }

    #[test]
    fn connect_clause_limited_to_connections_and_conflicts() {
        let model = model_of("#dartwin D { part A { port x; } part bad connect A.x to A.x; }");
        assert!(messages(&model)
            .iter()
            .any(|m| m.contains("only valid on connections")));
    }

    #[test]
    fn members_resolve_through_the_owner_chain() {
        // `AT.ts` is a sibling of the enclosing twin system, reachable by
        // walking out of the connection's scope.
        let model = model_of(
            "#dartwin D {\n  #twinsystem TS { #digitaltwin DT { port p; } connection c connect DT.p to AT.ts; }\n  part AT { port ts; }\n}",
        );
        assert!(!model.has_errors(), "{:?}", model.diagnostics);
        let c = model.find_qualified("D.TS.c").unwrap();
        let (_, to) = model[c].connect.unwrap();
        assert_eq!(model.qualified_name(to), "D.AT.ts");
    }
}
