//! Structural well-formedness checks beyond name resolution.
//!
//! `build_model` guarantees references resolve; this pass checks the rules
//! that make a model *mean* something: evolution patterns need their core,
//! before/after twins must specialize it, allocations tie goals to twins,
//! arbiters have the port profile the notation's metamodel gives them, and
//! conflicts relate exactly two goals.

use crate::diag::Diagnostic;

use super::{ElementId, ElementKind, SemanticModel};

pub fn validate(model: &SemanticModel) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    for el in model.elements() {
        match el.kind {
            ElementKind::DarTrans => check_dartrans(model, el.id, &mut diags),
            ElementKind::Allocation => check_allocation(model, el.id, &mut diags),
            ElementKind::Arbiter => check_arbiter(model, el.id, &mut diags),
            ElementKind::Conflict => check_conflict(model, el.id, &mut diags),
            _ => {}
        }
    }
    diags
}

fn members_of_kind(model: &SemanticModel, owner: ElementId, kind: ElementKind) -> Vec<ElementId> {
    model[owner]
        .members
        .iter()
        .copied()
        .filter(|&m| model[m].kind == kind)
        .collect()
}

fn check_dartrans(model: &SemanticModel, id: ElementId, diags: &mut Vec<Diagnostic>) {
    let el = &model[id];
    let name = model.qualified_name(id);

    let cores = members_of_kind(model, id, ElementKind::DartwinCore);
    match cores.len() {
        0 => {
            diags.push(Diagnostic::error(
                &el.file,
                el.span,
                format!("evolution pattern `{name}` has no `#dartwin_core` twin"),
            ));
            return;
        }
        1 => {}
        n => diags.push(Diagnostic::error(
            &el.file,
            el.span,
            format!("evolution pattern `{name}` has {n} `#dartwin_core` twins, expected one"),
        )),
    }
    let core = cores[0];

    for (kind, label) in [
        (ElementKind::DartwinBefore, "#dartwin_before"),
        (ElementKind::DartwinAfter, "#dartwin_after"),
    ] {
        let twins = members_of_kind(model, id, kind);
        if twins.len() > 1 {
            diags.push(Diagnostic::error(
                &el.file,
                el.span,
                format!(
                    "evolution pattern `{name}` has {} `{label}` twins, expected at most one",
                    twins.len()
                ),
            ));
        }
        for &twin in &twins {
            check_twin_specializes_core(model, twin, core, label, diags);
        }
    }
}

/// A before/after twin is expected to specialize the pattern's core. The
/// paper's patterns sometimes specialize the core's own base instead
/// (possible whenever the core adds nothing of its own) — accepted with a
/// warning. Anything else severs the twin from the pattern: an error.
fn check_twin_specializes_core(
    model: &SemanticModel,
    twin: ElementId,
    core: ElementId,
    label: &str,
    diags: &mut Vec<Diagnostic>,
) {
    let twin_el = &model[twin];
    if twin_el.specializes.contains(&core) {
        return;
    }
    let twin_name = model.qualified_name(twin);
    let core_name = model.qualified_name(core);
    let core_bases = &model[core].specializes;
    if let Some(&base) = core_bases.iter().find(|b| twin_el.specializes.contains(b)) {
        diags.push(Diagnostic::warning(
            &twin_el.file,
            twin_el.span,
            format!(
                "`{label}` twin `{twin_name}` specializes `{}` (the core's base) instead of the core `{core_name}`",
                model.qualified_name(base)
            ),
        ));
    } else {
        diags.push(Diagnostic::error(
            &twin_el.file,
            twin_el.span,
            format!("`{label}` twin `{twin_name}` does not specialize the core `{core_name}`"),
        ));
    }
}

fn check_allocation(model: &SemanticModel, id: ElementId, diags: &mut Vec<Diagnostic>) {
    let el = &model[id];
    let Some((goal, twin)) = el.allocate else {
        return;
    };
    if model[goal].kind != ElementKind::Goal {
        diags.push(Diagnostic::error(
            &el.file,
            el.span,
            format!(
                "allocation `{}` allocates `{}`, which is a {:?}, not a Goal",
                model.qualified_name(id),
                model.qualified_name(goal),
                model[goal].kind
            ),
        ));
    }
    if !matches!(
        model[twin].kind,
        ElementKind::DigitalTwin | ElementKind::TwinSystem
    ) {
        diags.push(Diagnostic::warning(
            &el.file,
            el.span,
            format!(
                "allocation `{}` targets `{}`, which is a {:?}, not a digital twin or twin system",
                model.qualified_name(id),
                model.qualified_name(twin),
                model[twin].kind
            ),
        ));
    }
}

/// An arbiter merges two or more goal flows into one: `inputs` with lower
/// multiplicity at least 2, and exactly one `output` (multiplicity `[1]`,
/// which a port without a declared multiplicity defaults to).
fn check_arbiter(model: &SemanticModel, id: ElementId, diags: &mut Vec<Diagnostic>) {
    let el = &model[id];
    let name = model.qualified_name(id);
    let port = |wanted: &str| {
        el.members
            .iter()
            .copied()
            .find(|&m| model[m].kind == ElementKind::Port && model[m].name.as_deref() == Some(wanted))
    };

    match port("inputs") {
        Some(p) if model[p].multiplicity.map(|m| m.lower).unwrap_or(1) >= 2 => {}
        Some(p) => diags.push(Diagnostic::error(
            &model[p].file,
            model[p].span,
            format!("arbiter `{name}` needs `inputs` with a lower multiplicity of at least 2"),
        )),
        None => diags.push(Diagnostic::error(
            &el.file,
            el.span,
            format!("arbiter `{name}` has no `inputs` port"),
        )),
    }
    match port("output") {
        Some(p)
            if model[p]
                .multiplicity
                .map(|m| m.lower == 1 && m.upper == Some(1))
                .unwrap_or(true) => {}
        Some(p) => diags.push(Diagnostic::error(
            &model[p].file,
            model[p].span,
            format!("arbiter `{name}` needs exactly one `output` (multiplicity [1])"),
        )),
        None => diags.push(Diagnostic::error(
            &el.file,
            el.span,
            format!("arbiter `{name}` has no `output` port"),
        )),
    }
}

fn check_conflict(model: &SemanticModel, id: ElementId, diags: &mut Vec<Diagnostic>) {
    let el = &model[id];
    let Some((a, b)) = el.connect else {
        diags.push(Diagnostic::error(
            &el.file,
            el.span,
            format!(
                "conflict `{}` must connect two goals",
                model.qualified_name(id)
            ),
        ));
        return;
    };
    for end in [a, b] {
        if model[end].kind != ElementKind::Goal {
            diags.push(Diagnostic::error(
                &el.file,
                el.span,
                format!(
                    "conflict `{}` relates `{}`, which is a {:?}, not a Goal",
                    model.qualified_name(id),
                    model.qualified_name(end),
                    model[end].kind
                ),
            ));
        }
    }
}
