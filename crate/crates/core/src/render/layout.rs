//! Scene construction and geometry.
//!
//! A *scene* is the drawable union of effective trees: for a plain dartwin
//! just its flattened tree, for an evolution pattern the after twin with
//! the removed elements grafted back in as ghosts. `arrange` then computes
//! deterministic coordinates: goals in a row on top, the separator, the
//! structural boxes below, ports on the box edge facing the diagram
//! center, orthogonal edge routes.

use std::collections::BTreeMap;

use crate::flatten::{flatten, EffectiveModel};
use crate::model::{ElementId, ElementKind, SemanticModel};

use super::{RenderError, Style};

/// How the pattern treats a drawable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Status {
    Kept,
    Added,
    Removed,
    Modified,
}

impl Status {
    pub(crate) fn class(self) -> &'static str {
        match self {
            Status::Kept => "kept",
            Status::Added => "added",
            Status::Removed => "removed",
            Status::Modified => "modified",
        }
    }

    pub(crate) fn highlighted(self) -> bool {
        self != Status::Kept
    }
}

#[derive(Debug, Clone)]
pub(crate) struct SceneNode {
    pub name: String,
    pub kind: ElementKind,
    pub status: Status,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub connect: Option<(usize, usize)>,
    pub allocate: Option<(usize, usize)>,
    pub doc: Option<String>,
}

#[derive(Debug, Clone)]
pub(crate) struct Scene {
    pub nodes: Vec<SceneNode>,
    pub root: usize,
    /// Diagram heading, e.g. `#dartwin Basic`.
    pub title: String,
}

impl Scene {
    fn push(&mut self, node: SceneNode) -> usize {
        let idx = self.nodes.len();
        if let Some(parent) = node.parent {
            self.nodes[parent].children.push(idx);
        }
        self.nodes.push(node);
        idx
    }

    /// Indices in pre-order (root first).
    pub(crate) fn pre_order(&self) -> Vec<usize> {
        fn walk(scene: &Scene, idx: usize, out: &mut Vec<usize>) {
            out.push(idx);
            for &c in &scene.nodes[idx].children {
                walk(scene, c, out);
            }
        }
        let mut out = Vec::with_capacity(self.nodes.len());
        walk(self, self.root, &mut out);
        out
    }
}

/// Scene of one dartwin: its effective tree, everything `Kept`.
pub(crate) fn scene_for_dartwin(
    model: &SemanticModel,
    root: ElementId,
) -> Result<Scene, RenderError> {
    let eff = flatten(model, root)?;
    let mut scene = Scene {
        nodes: Vec::with_capacity(eff.len()),
        root: 0,
        title: format!("#dartwin {}", model.qualified_name(root)),
    };
    copy_tree(&eff, &mut scene, |_| Status::Kept);
    Ok(scene)
}

/// Scene of an evolution pattern: the after twin (additions and
/// modifications highlighted) with the removed before-twin elements
/// grafted back in as ghosts.
pub(crate) fn scene_for_pattern(
    model: &SemanticModel,
    dartrans: ElementId,
) -> Result<Scene, RenderError> {
    let twins = model
        .pattern_twins(dartrans)
        .ok_or_else(|| RenderError::MissingCore(model.qualified_name(dartrans)))?;
    let kept = flatten(model, twins.core)?.paths();
    let before = flatten(model, twins.before)?;
    let after = flatten(model, twins.after)?;
    let removed: Vec<String> = before.paths().difference(&kept).cloned().collect();
    let added: Vec<String> = after.paths().difference(&kept).cloned().collect();
    let modified: Vec<String> = removed
        .iter()
        .filter(|p| added.binary_search(p).is_ok())
        .cloned()
        .collect();
    let removed_only =
        |path: &String| removed.binary_search(path).is_ok() && modified.binary_search(path).is_err();

    let mut scene = Scene {
        nodes: Vec::new(),
        root: 0,
        title: format!("#dartrans {}", model.qualified_name(dartrans)),
    };
    let mut by_path = copy_tree(&after, &mut scene, |path| {
        if modified.binary_search(&path.to_string()).is_ok() {
            Status::Modified
        } else if added.binary_search(&path.to_string()).is_ok() {
            Status::Added
        } else {
            Status::Kept
        }
    });

    // Graft each maximal removed subtree under the image of its parent,
    // skipping modified elements (already drawn from the after twin).
    let mut grafted: BTreeMap<crate::flatten::EffId, usize> = BTreeMap::new();
    for id in before.pre_order() {
        if id == before.root {
            continue;
        }
        let path = before.path_of(id);
        if !removed_only(&path) {
            continue;
        }
        let node = before.node(id);
        let parent = node.parent.expect("non-root");
        let parent_idx = if let Some(&g) = grafted.get(&parent) {
            g
        } else {
            by_path[&before.path_of(parent)]
        };
        let idx = scene.push(SceneNode {
            name: node.name.clone(),
            kind: node.kind,
            status: Status::Removed,
            parent: Some(parent_idx),
            children: Vec::new(),
            connect: None,
            allocate: None,
            doc: node.doc.clone(),
        });
        grafted.insert(id, idx);
        by_path.insert(path, idx);
    }
    // Ghost endpoints, now that every removed node exists.
    for (&id, &idx) in &grafted {
        let node = before.node(id);
        scene.nodes[idx].connect = node
            .connect
            .map(|(s, d)| (by_path[&before.path_of(s)], by_path[&before.path_of(d)]));
        scene.nodes[idx].allocate = node
            .allocate
            .map(|(g, t)| (by_path[&before.path_of(g)], by_path[&before.path_of(t)]));
    }
    Ok(scene)
}

/// Copies an effective tree into `scene`, returning path → scene index.
fn copy_tree(
    eff: &EffectiveModel,
    scene: &mut Scene,
    status: impl Fn(&str) -> Status,
) -> BTreeMap<String, usize> {
    let order = eff.pre_order();
    let mut to_scene: BTreeMap<crate::flatten::EffId, usize> = BTreeMap::new();
    let mut by_path = BTreeMap::new();
    for &id in &order {
        let node = eff.node(id);
        let path = eff.path_of(id);
        let idx = scene.push(SceneNode {
            name: node.name.clone(),
            kind: node.kind,
            status: if id == eff.root { Status::Kept } else { status(&path) },
            parent: node.parent.map(|p| to_scene[&p]),
            children: Vec::new(),
            connect: None,
            allocate: None,
            doc: node.doc.clone(),
        });
        to_scene.insert(id, idx);
        by_path.insert(path, idx);
    }
    for &id in &order {
        let node = eff.node(id);
        let idx = to_scene[&id];
        scene.nodes[idx].connect = node.connect.map(|(s, d)| (to_scene[&s], to_scene[&d]));
        scene.nodes[idx].allocate = node.allocate.map(|(g, t)| (to_scene[&g], to_scene[&t]));
    }
    by_path
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub(crate) fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }
}

/// What kind of outline a node gets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum BoxShape {
    /// Twin systems, digital twins, parts, packages.
    Part,
    /// Rounded; sits in the goal row.
    Goal,
    /// Hexagon-ish; sits in the goal row between its goals.
    Arbiter,
}

#[derive(Debug, Clone)]
pub(crate) struct BoxGeom {
    pub node: usize,
    pub rect: Rect,
    pub shape: BoxShape,
}

#[derive(Debug, Clone)]
pub(crate) struct PortGeom {
    pub node: usize,
    pub rect: Rect,
}

#[derive(Debug, Clone)]
pub(crate) struct EdgeGeom {
    pub node: usize,
    pub points: Vec<(f64, f64)>,
    /// Filled arrowhead triangle, when the edge is directed.
    pub arrow: Option<[(f64, f64); 3]>,
    pub label_at: (f64, f64),
    /// Dashed independently of status (allocations, conflicts).
    pub dashed: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct Geometry {
    pub size: (f64, f64),
    pub frame: Rect,
    pub title_at: (f64, f64),
    /// y, x1, x2 of the goals/system separator.
    pub separator: (f64, f64, f64),
    /// In scene pre-order.
    pub boxes: Vec<BoxGeom>,
    pub ports: Vec<PortGeom>,
    /// In scene pre-order.
    pub edges: Vec<EdgeGeom>,
}

const LEAF_W: f64 = 110.0;
const LEAF_H: f64 = 52.0;
const GOAL_H: f64 = 44.0;
const LABEL_BAND: f64 = 22.0;

fn text_width(text: &str, font_size: f64) -> f64 {
    text.chars().count() as f64 * font_size * 0.62
}

/// Lays the scene out. Fails only when a name exceeds `max_label`.
pub(crate) fn arrange(scene: &Scene, style: &Style) -> Result<Geometry, RenderError> {
    for idx in scene.pre_order() {
        let name = &scene.nodes[idx].name;
        if name.chars().count() > style.max_label {
            return Err(RenderError::LabelOverflow(name.clone(), style.max_label));
        }
    }

    let root = &scene.nodes[scene.root];
    let is_goalish =
        |k: ElementKind| matches!(k, ElementKind::Goal | ElementKind::Arbiter);
    let goal_row: Vec<usize> = root
        .children
        .iter()
        .copied()
        .filter(|&c| is_goalish(scene.nodes[c].kind))
        .collect();
    let system_row: Vec<usize> = root
        .children
        .iter()
        .copied()
        .filter(|&c| scene.nodes[c].kind.is_structural() && !is_goalish(scene.nodes[c].kind))
        .filter(|&c| scene.nodes[c].kind != ElementKind::Port)
        .collect();

    let mut rects: BTreeMap<usize, Rect> = BTreeMap::new();

    // Goal row.
    let title_h = style.title_font_size + 12.0;
    let top = style.margin + title_h;
    let mut x = style.margin + style.padding;
    let mut goal_h: f64 = 0.0;
    for &g in &goal_row {
        let w = f64::max(96.0, text_width(&scene.nodes[g].name, style.font_size) + 2.0 * style.padding);
        rects.insert(g, Rect { x, y: top, w, h: GOAL_H });
        x += w + style.gap;
        goal_h = goal_h.max(GOAL_H);
    }
    let goal_extent = if goal_row.is_empty() { style.margin + style.padding } else { x - style.gap };

    let separator_y = top + goal_h + style.padding;

    // System row: size bottom-up, then place.
    let mut x = style.margin + style.padding;
    let system_top = separator_y + style.padding;
    let mut system_h: f64 = 0.0;
    for &s in &system_row {
        let (w, h) = measure(scene, s, style);
        place(scene, s, x, system_top, style, &mut rects);
        x += w + style.gap;
        system_h = system_h.max(h);
    }
    let system_extent = if system_row.is_empty() { style.margin + style.padding } else { x - style.gap };

    let title_w = style.margin + text_width(&scene.title, style.title_font_size) + style.padding;
    let width = [goal_extent, system_extent, title_w]
        .into_iter()
        .fold(0.0_f64, f64::max)
        + style.padding
        + style.margin;
    let height = system_top + system_h + style.padding + style.margin;

    let frame = Rect {
        x: style.margin / 2.0,
        y: style.margin / 2.0,
        w: width - style.margin,
        h: height - style.margin,
    };

    // Ports: evenly along the owner edge facing the diagram center.
    let mut ports = Vec::new();
    let mid = width / 2.0;
    for idx in scene.pre_order() {
        let owner_rect = match rects.get(&idx) {
            Some(r) => *r,
            None if idx == scene.root => frame,
            None => continue,
        };
        let owned_ports: Vec<usize> = scene.nodes[idx]
            .children
            .iter()
            .copied()
            .filter(|&c| scene.nodes[c].kind == ElementKind::Port)
            .collect();
        let count = owned_ports.len();
        for (i, port) in owned_ports.into_iter().enumerate() {
            let frac = (i + 1) as f64 / (count + 1) as f64;
            let cy = owner_rect.y + owner_rect.h * frac;
            let cx = if owner_rect.center().0 < mid {
                owner_rect.x + owner_rect.w
            } else {
                owner_rect.x
            };
            let half = style.port_size / 2.0;
            rects.insert(
                port,
                Rect {
                    x: cx - half,
                    y: cy - half,
                    w: style.port_size,
                    h: style.port_size,
                },
            );
            ports.push(PortGeom {
                node: port,
                rect: rects[&port],
            });
        }
    }

    // Edges.
    let mut edges = Vec::new();
    for idx in scene.pre_order() {
        let node = &scene.nodes[idx];
        if let Some((s, d)) = node.connect {
            if let (Some(&from), Some(&to)) = (rects.get(&s), rects.get(&d)) {
                edges.push(route_connection(idx, from, to, node.kind));
            }
        }
        if let Some((g, t)) = node.allocate {
            if let (Some(&from), Some(&to)) = (rects.get(&g), rects.get(&t)) {
                edges.push(route_allocation(idx, from, to));
            }
        }
    }

    let boxes = scene
        .pre_order()
        .into_iter()
        .filter(|&idx| idx != scene.root && scene.nodes[idx].kind != ElementKind::Port)
        .filter_map(|idx| {
            let rect = *rects.get(&idx)?;
            let shape = match scene.nodes[idx].kind {
                ElementKind::Goal => BoxShape::Goal,
                ElementKind::Arbiter => BoxShape::Arbiter,
                _ => BoxShape::Part,
            };
            Some(BoxGeom { node: idx, rect, shape })
        })
        .collect();

    Ok(Geometry {
        size: (width, height),
        frame,
        title_at: (style.margin, style.margin / 2.0 + style.title_font_size + 4.0),
        separator: (separator_y, frame.x, frame.x + frame.w),
        boxes,
        ports,
        edges,
    })
}

/// Bottom-up box size: a leaf is fixed-size (grown to fit its label), a
/// container wraps its structural children laid out in a row.
fn measure(scene: &Scene, idx: usize, style: &Style) -> (f64, f64) {
    let node = &scene.nodes[idx];
    let label_w = text_width(&node.name, style.font_size);
    let inner: Vec<usize> = structural_children(scene, idx);
    if inner.is_empty() {
        return (f64::max(LEAF_W, label_w + 2.0 * style.padding), LEAF_H);
    }
    let mut w = 0.0;
    let mut h: f64 = 0.0;
    for &c in &inner {
        let (cw, ch) = measure(scene, c, style);
        w += cw;
        h = h.max(ch);
    }
    w += style.gap * (inner.len() - 1) as f64;
    (
        f64::max(w, label_w) + 2.0 * style.padding,
        LABEL_BAND + h + 2.0 * style.padding,
    )
}

fn place(
    scene: &Scene,
    idx: usize,
    x: f64,
    y: f64,
    style: &Style,
    rects: &mut BTreeMap<usize, Rect>,
) {
    let (w, h) = measure(scene, idx, style);
    rects.insert(idx, Rect { x, y, w, h });
    let mut cx = x + style.padding;
    let cy = y + LABEL_BAND + style.padding;
    for c in structural_children(scene, idx) {
        let (cw, _) = measure(scene, c, style);
        place(scene, c, cx, cy, style, rects);
        cx += cw + style.gap;
    }
}

/// Children drawn as nested boxes (not ports, not edges, not goals).
fn structural_children(scene: &Scene, idx: usize) -> Vec<usize> {
    scene.nodes[idx]
        .children
        .iter()
        .copied()
        .filter(|&c| {
            let k = scene.nodes[c].kind;
            k.is_structural() && !matches!(k, ElementKind::Port | ElementKind::Goal | ElementKind::Arbiter)
        })
        .collect()
}

/// Horizontal-vertical-horizontal route between two port squares; straight
/// goal-to-goal line for conflicts.
fn route_connection(node: usize, from: Rect, to: Rect, kind: ElementKind) -> EdgeGeom {
    let (sx, sy) = from.center();
    let (dx, dy) = to.center();
    if kind == ElementKind::Conflict {
        return EdgeGeom {
            node,
            points: vec![(sx, sy), (dx, dy)],
            arrow: None,
            label_at: ((sx + dx) / 2.0, (sy + dy) / 2.0 - 6.0),
            dashed: true,
        };
    }
    let midx = (sx + dx) / 2.0;
    let points = vec![(sx, sy), (midx, sy), (midx, dy), (dx, dy)];
    let tip = 8.0;
    let arrow = if dx >= midx {
        [(dx - tip, dy - tip / 2.0), (dx - tip, dy + tip / 2.0), (dx, dy)]
    } else {
        [(dx + tip, dy - tip / 2.0), (dx + tip, dy + tip / 2.0), (dx, dy)]
    };
    EdgeGeom {
        node,
        points,
        arrow: Some(arrow),
        label_at: (midx, (sy + dy) / 2.0 - 6.0),
        dashed: false,
    }
}

/// Vertical-horizontal-vertical route from a goal's bottom edge down into
/// the allocated twin's top edge.
fn route_allocation(node: usize, goal: Rect, twin: Rect) -> EdgeGeom {
    let (gx, _) = goal.center();
    let gy = goal.y + goal.h;
    let (tx, _) = twin.center();
    let ty = twin.y;
    let midy = (gy + ty) / 2.0;
    let tip = 8.0;
    EdgeGeom {
        node,
        points: vec![(gx, gy), (gx, midy), (tx, midy), (tx, ty)],
        arrow: Some([(tx - tip / 2.0, ty - tip), (tx + tip / 2.0, ty - tip), (tx, ty)]),
        label_at: ((gx + tx) / 2.0, midy - 6.0),
        dashed: true,
    }
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

    const TWIN: &str = "\
#dartwin D {
  #goal G1; #goal G2;
  #arbiter Arb { port inputs [2..*]; port output; }
  #twinsystem TS { #digitaltwin DT { port p; } part P { port q; } connection c connect DT.p to P.q; }
  allocation a allocate G1 to TS.DT;
}
";

    fn contains(outer: &Rect, inner: &Rect) -> bool {
        inner.x >= outer.x
            && inner.y >= outer.y
            && inner.x + inner.w <= outer.x + outer.w
            && inner.y + inner.h <= outer.y + outer.h
    }

    #[test]
    fn goals_sit_above_the_separator_and_structure_below() {
        let model = model_of(TWIN);
        let scene = scene_for_dartwin(&model, model.root("D").unwrap()).unwrap();
        let geo = arrange(&scene, &Style::default()).unwrap();

        let (sep_y, _, _) = geo.separator;
        for b in &geo.boxes {
            let goalish = matches!(b.shape, BoxShape::Goal | BoxShape::Arbiter);
            if goalish {
                assert!(
                    b.rect.y + b.rect.h <= sep_y,
                    "`{}` should sit above the separator",
                    scene.nodes[b.node].name
                );
            } else {
                assert!(
                    b.rect.y >= sep_y,
                    "`{}` should sit below the separator",
                    scene.nodes[b.node].name
                );
            }
            assert!(contains(&geo.frame, &b.rect));
        }
    }

    #[test]
    fn children_nest_inside_their_parents() {
        let model = model_of(TWIN);
        let scene = scene_for_dartwin(&model, model.root("D").unwrap()).unwrap();
        let geo = arrange(&scene, &Style::default()).unwrap();

        let rect_of = |node: usize| geo.boxes.iter().find(|b| b.node == node).map(|b| &b.rect);
        for b in &geo.boxes {
            let Some(parent) = scene.nodes[b.node].parent else {
                continue;
            };
            if let Some(outer) = rect_of(parent) {
                assert!(
                    contains(outer, &b.rect),
                    "`{}` should nest inside `{}`",
                    scene.nodes[b.node].name,
                    scene.nodes[parent].name
                );
            }
        }
    }

    #[test]
    fn ports_straddle_their_owners_outline() {
        let model = model_of(TWIN);
        let scene = scene_for_dartwin(&model, model.root("D").unwrap()).unwrap();
        let geo = arrange(&scene, &Style::default()).unwrap();

        assert!(!geo.ports.is_empty());
        for p in &geo.ports {
            let owner = scene.nodes[p.node].parent.expect("ports have owners");
            let owner_rect = geo
                .boxes
                .iter()
                .find(|b| b.node == owner)
                .map(|b| &b.rect)
                .expect("owner drawn");
            let (cx, cy) = p.rect.center();
            let on_vertical = (cx - owner_rect.x).abs() < 1e-6
                || (cx - (owner_rect.x + owner_rect.w)).abs() < 1e-6;
            let on_horizontal = (cy - owner_rect.y).abs() < 1e-6
                || (cy - (owner_rect.y + owner_rect.h)).abs() < 1e-6;
            assert!(
                on_vertical || on_horizontal,
                "port `{}` center ({cx}, {cy}) should lie on its owner's outline",
                scene.nodes[p.node].name
            );
        }
    }

    #[test]
    fn every_edge_is_drawn_with_its_label_between_the_ends() {
        let model = model_of(TWIN);
        let scene = scene_for_dartwin(&model, model.root("D").unwrap()).unwrap();
        let geo = arrange(&scene, &Style::default()).unwrap();

        // One connection, one allocation.
        assert_eq!(geo.edges.len(), 2);
        for e in &geo.edges {
            assert!(e.points.len() >= 2);
            let kind = scene.nodes[e.node].kind;
            assert_eq!(e.dashed, kind == ElementKind::Allocation);
            assert!(e.arrow.is_some());
        }
    }

    #[test]
    fn pattern_scenes_tag_statuses_and_graft_removed_ghosts() {
        let model = model_of(
            "#dartrans Pat {
  #dartwin_core Core { #twinsystem Sys { part X { port px; } } }
  #dartwin_before Before :> Core { #twinsystem :>> Sys { part Y { port py; } } }
  #dartwin_after After :> Core { #twinsystem :>> Sys { part Z { port pz; } } }
}",
        );
        let scene = scene_for_pattern(&model, model.root("Pat").unwrap()).unwrap();

        let status_of = |name: &str| {
            scene
                .nodes
                .iter()
                .find(|n| n.name == name)
                .unwrap_or_else(|| panic!("`{name}` in scene"))
                .status
        };
        assert_eq!(scene.title, "#dartrans Pat");
        assert_eq!(status_of("Sys"), Status::Kept);
        assert_eq!(status_of("X"), Status::Kept);
        assert_eq!(status_of("Z"), Status::Added);
        // The removed part is grafted back from the before twin…
        assert_eq!(status_of("Y"), Status::Removed);
        // …under its old parent.
        let y = scene.nodes.iter().position(|n| n.name == "Y").unwrap();
        let parent = scene.nodes[y].parent.unwrap();
        assert_eq!(scene.nodes[parent].name, "Sys");
    }

    #[test]
    fn overlong_names_are_refused_not_clipped() {
        let long = "x".repeat(65);
        let model = model_of(&format!("#dartwin D {{ part {long}; }}"));
        let scene = scene_for_dartwin(&model, model.root("D").unwrap()).unwrap();
        match arrange(&scene, &Style::default()) {
            Err(RenderError::LabelOverflow(name, max)) => {
                assert_eq!(name, long);
                assert_eq!(max, 64);
            }
            other => panic!("expected a label overflow, got {other:?}"),
        }
    }
}
