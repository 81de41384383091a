//! SVG emission.
//!
//! The document is written in one fixed order — background, frame, title,
//! separator, boxes, ports, edges, labels — with numbers rounded to one
//! decimal, so the same geometry always serializes to the same bytes.
//!
//! Stroke accounting: every drawable (box, port, edge, frame, separator)
//! contributes exactly one element carrying a `stroke` attribute;
//! arrowheads and labels are fill-only. Highlighted drawables (added,
//! removed, modified) are stroked with the highlight color, and removed
//! ones additionally dashed.

use std::fmt::Write;

use crate::model::ElementKind;

use super::layout::{BoxShape, EdgeGeom, Geometry, Rect, Scene, Status};
use super::Style;

pub(crate) fn emit(scene: &Scene, geo: &Geometry, style: &Style) -> String {
    let mut out = String::new();
    let (w, h) = geo.size;
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="{}" font-size="{}">"#,
        fmt(w),
        fmt(h),
        fmt(w),
        fmt(h),
        escape(&style.font_family),
        fmt(style.font_size),
    );
    let _ = writeln!(
        out,
        r#"<rect class="background" x="0" y="0" width="{}" height="{}" fill="{}"/>"#,
        fmt(w),
        fmt(h),
        escape(&style.background),
    );
    let _ = writeln!(
        out,
        r#"<rect class="frame" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="{}"/>"#,
        fmt(geo.frame.x),
        fmt(geo.frame.y),
        fmt(geo.frame.w),
        fmt(geo.frame.h),
        escape(&style.line_color),
    );
    let _ = writeln!(
        out,
        r#"<text class="title" x="{}" y="{}" font-size="{}" font-weight="bold" fill="{}">{}</text>"#,
        fmt(geo.title_at.0),
        fmt(geo.title_at.1),
        fmt(style.title_font_size),
        escape(&style.text_color),
        escape(&scene.title),
    );
    let (sep_y, sep_x1, sep_x2) = geo.separator;
    let _ = writeln!(
        out,
        r#"<line class="separator" x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-dasharray="{}"/>"#,
        fmt(sep_x1),
        fmt(sep_y),
        fmt(sep_x2),
        fmt(sep_y),
        escape(&style.line_color),
        escape(&style.separator_dash),
    );

    for b in &geo.boxes {
        let node = &scene.nodes[b.node];
        let stroke = stroke_color(node.status, style);
        let dash = dash_for(node.status, false, style);
        let class = format!("box {} {}", kind_word(node.kind), node.status.class());
        match b.shape {
            BoxShape::Part => {
                let _ = writeln!(
                    out,
                    r#"<rect class="{}" x="{}" y="{}" width="{}" height="{}" fill="{}" stroke="{}"{}>{}</rect>"#,
                    class,
                    fmt(b.rect.x),
                    fmt(b.rect.y),
                    fmt(b.rect.w),
                    fmt(b.rect.h),
                    escape(&style.box_fill),
                    stroke,
                    dash,
                    tooltip(scene, b.node),
                );
            }
            BoxShape::Goal => {
                let _ = writeln!(
                    out,
                    r#"<rect class="{}" x="{}" y="{}" width="{}" height="{}" rx="10" fill="{}" stroke="{}"{}>{}</rect>"#,
                    class,
                    fmt(b.rect.x),
                    fmt(b.rect.y),
                    fmt(b.rect.w),
                    fmt(b.rect.h),
                    escape(&style.goal_fill),
                    stroke,
                    dash,
                    tooltip(scene, b.node),
                );
            }
            BoxShape::Arbiter => {
                let _ = writeln!(
                    out,
                    r#"<polygon class="{}" points="{}" fill="{}" stroke="{}"{}>{}</polygon>"#,
                    class,
                    hexagon(&b.rect),
                    escape(&style.goal_fill),
                    stroke,
                    dash,
                    tooltip(scene, b.node),
                );
            }
        }
    }

    for p in &geo.ports {
        let node = &scene.nodes[p.node];
        let _ = writeln!(
            out,
            r#"<rect class="port {}" x="{}" y="{}" width="{}" height="{}" fill="{}" stroke="{}"{}>{}</rect>"#,
            node.status.class(),
            fmt(p.rect.x),
            fmt(p.rect.y),
            fmt(p.rect.w),
            fmt(p.rect.h),
            escape(&style.box_fill),
            stroke_color(node.status, style),
            dash_for(node.status, false, style),
            tooltip(scene, p.node),
        );
    }

    for e in &geo.edges {
        emit_edge(&mut out, scene, e, style);
    }

    for b in &geo.boxes {
        let node = &scene.nodes[b.node];
        let fill = label_color(node.status, style);
        match b.shape {
            BoxShape::Part => {
                let _ = writeln!(
                    out,
                    r#"<text class="label" x="{}" y="{}" fill="{}">{}</text>"#,
                    fmt(b.rect.x + 8.0),
                    fmt(b.rect.y + style.font_size + 4.0),
                    fill,
                    escape(&node.name),
                );
            }
            BoxShape::Goal | BoxShape::Arbiter => {
                let (cx, cy) = b.rect.center();
                let _ = writeln!(
                    out,
                    r#"<text class="label" x="{}" y="{}" text-anchor="middle" fill="{}">{}</text>"#,
                    fmt(cx),
                    fmt(cy + style.font_size / 3.0),
                    fill,
                    escape(&node.name),
                );
            }
        }
    }

    out.push_str("</svg>\n");
    out
}

fn emit_edge(out: &mut String, scene: &Scene, e: &EdgeGeom, style: &Style) {
    let node = &scene.nodes[e.node];
    let points = e
        .points
        .iter()
        .map(|&(x, y)| format!("{},{}", fmt(x), fmt(y)))
        .collect::<Vec<_>>()
        .join(" ");
    let _ = writeln!(
        out,
        r#"<polyline class="edge {} {}" points="{}" fill="none" stroke="{}"{}/>"#,
        kind_word(node.kind),
        node.status.class(),
        points,
        stroke_color(node.status, style),
        dash_for(node.status, e.dashed, style),
    );
    if let Some(arrow) = e.arrow {
        let d = format!(
            "M {} {} L {} {} L {} {} Z",
            fmt(arrow[0].0),
            fmt(arrow[0].1),
            fmt(arrow[1].0),
            fmt(arrow[1].1),
            fmt(arrow[2].0),
            fmt(arrow[2].1),
        );
        let _ = writeln!(
            out,
            r#"<path class="arrowhead" d="{}" fill="{}"/>"#,
            d,
            label_color(node.status, style),
        );
    }
    let _ = writeln!(
        out,
        r#"<text class="edge-label" x="{}" y="{}" text-anchor="middle" fill="{}">{}</text>"#,
        fmt(e.label_at.0),
        fmt(e.label_at.1),
        label_color(node.status, style),
        escape(&node.name),
    );
}

fn stroke_color(status: Status, style: &Style) -> String {
    if status.highlighted() {
        escape(&style.highlight_color)
    } else {
        escape(&style.line_color)
    }
}

fn label_color(status: Status, style: &Style) -> String {
    if status.highlighted() {
        escape(&style.highlight_color)
    } else {
        escape(&style.text_color)
    }
}

/// ` stroke-dasharray="…"` when the drawable is removed or inherently
/// dashed; removal wins so ghosts look alike everywhere.
fn dash_for(status: Status, inherently_dashed: bool, style: &Style) -> String {
    if status == Status::Removed {
        format!(r#" stroke-dasharray="{}""#, escape(&style.removed_dash))
    } else if inherently_dashed {
        format!(r#" stroke-dasharray="{}""#, escape(&style.allocation_dash))
    } else {
        String::new()
    }
}

fn tooltip(scene: &Scene, idx: usize) -> String {
    let node = &scene.nodes[idx];
    let mut text = format!("{} {}", kind_word(node.kind), node.name);
    if let Some(doc) = &node.doc {
        text.push_str(" — ");
        text.push_str(doc);
    }
    format!("<title>{}</title>", escape(&text))
}

fn hexagon(rect: &Rect) -> String {
    let inset = 10.0_f64.min(rect.w / 4.0);
    let pts = [
        (rect.x + inset, rect.y),
        (rect.x + rect.w - inset, rect.y),
        (rect.x + rect.w, rect.y + rect.h / 2.0),
        (rect.x + rect.w - inset, rect.y + rect.h),
        (rect.x + inset, rect.y + rect.h),
        (rect.x, rect.y + rect.h / 2.0),
    ];
    pts.iter()
        .map(|&(x, y)| format!("{},{}", fmt(x), fmt(y)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn kind_word(kind: ElementKind) -> &'static str {
    match kind {
        ElementKind::DarTwin => "dartwin",
        ElementKind::TwinSystem => "twinsystem",
        ElementKind::DigitalTwin => "digitaltwin",
        ElementKind::Goal => "goal",
        ElementKind::Arbiter => "arbiter",
        ElementKind::Conflict => "conflict",
        ElementKind::DarTrans => "dartrans",
        ElementKind::DartwinCore => "core",
        ElementKind::DartwinBefore => "before",
        ElementKind::DartwinAfter => "after",
        ElementKind::Part => "part",
        ElementKind::Port => "port",
        ElementKind::Connection => "connection",
        ElementKind::Allocation => "allocation",
        ElementKind::Package => "package",
    }
}

/// One decimal place, trailing `.0` dropped — stable and compact.
fn fmt(value: f64) -> String {
    let rounded = (value * 10.0).round() / 10.0;
    if rounded == rounded.trunc() {
        format!("{}", rounded as i64)
    } else {
        format!("{rounded:.1}")
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::fmt;

    #[test]
    fn numbers_are_compact_and_stable() {
        assert_eq!(fmt(120.0), "120");
        assert_eq!(fmt(120.50), "120.5");
        assert_eq!(fmt(120.04), "120");
        assert_eq!(fmt(-3.25), "-3.3");
    }
}
