//! Diagram styling, overridable through a `key = value` style file.

use thiserror::Error;

/// Visual parameters of the SVG renderer. All lengths are in SVG user
/// units (pixels at default zoom).
#[derive(Debug, Clone, PartialEq)]
pub struct Style {
    pub font_family: String,
    pub font_size: f64,
    pub title_font_size: f64,
    pub background: String,
    /// Stroke for everything unchanged: boxes, ports, edges, the frame.
    pub line_color: String,
    pub text_color: String,
    pub box_fill: String,
    pub goal_fill: String,
    /// Stroke for added, removed and modified drawables.
    pub highlight_color: String,
    pub removed_dash: String,
    pub allocation_dash: String,
    pub separator_dash: String,
    pub port_size: f64,
    pub padding: f64,
    pub gap: f64,
    pub margin: f64,
    /// Longest renderable name, in characters.
    pub max_label: usize,
}

impl Default for Style {
    fn default() -> Self {
        Style {
            font_family: "Helvetica, Arial, sans-serif".into(),
            font_size: 12.0,
            title_font_size: 14.0,
            background: "#ffffff".into(),
            line_color: "#333333".into(),
            text_color: "#1a1a1a".into(),
            box_fill: "#ffffff".into(),
            goal_fill: "#f6f6f6".into(),
            highlight_color: "#E07B00".into(),
            removed_dash: "6 4".into(),
            allocation_dash: "4 3".into(),
            separator_dash: "8 4".into(),
            port_size: 10.0,
            padding: 16.0,
            gap: 28.0,
            margin: 24.0,
            max_label: 64,
        }
    }
}

/// A problem in a style file.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {reason}")]
pub struct StyleError {
    pub line: usize,
    pub reason: String,
}

impl StyleError {
    fn new(line: usize, reason: impl Into<String>) -> Self {
        StyleError { line, reason: reason.into() }
    }
}

/// Parses `key = value` lines over the default style. Blank lines and `#`
/// comments are ignored; unknown keys are errors so typos cannot silently
/// fall back to defaults.
pub fn parse_style(text: &str) -> Result<Style, StyleError> {
    let mut style = Style::default();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let entry = raw.trim();
        if entry.is_empty() || entry.starts_with('#') {
            continue;
        }
        let Some((key, value)) = entry.split_once('=') else {
            return Err(StyleError::new(line, "expected `key = value`"));
        };
        let key = key.trim();
        let value = value.trim();
        let number = |v: &str| -> Result<f64, StyleError> {
            v.parse::<f64>()
                .ok()
                .filter(|n| n.is_finite() && *n >= 0.0)
                .ok_or_else(|| StyleError::new(line, format!("`{v}` is not a non-negative number")))
        };
        match key {
            "font_family" => style.font_family = value.into(),
            "font_size" => style.font_size = number(value)?,
            "title_font_size" => style.title_font_size = number(value)?,
            "background" => style.background = value.into(),
            "line_color" => style.line_color = value.into(),
            "text_color" => style.text_color = value.into(),
            "box_fill" => style.box_fill = value.into(),
            "goal_fill" => style.goal_fill = value.into(),
            "highlight_color" => style.highlight_color = value.into(),
            "removed_dash" => style.removed_dash = value.into(),
            "allocation_dash" => style.allocation_dash = value.into(),
            "separator_dash" => style.separator_dash = value.into(),
            "port_size" => style.port_size = number(value)?,
            "padding" => style.padding = number(value)?,
            "gap" => style.gap = number(value)?,
            "margin" => style.margin = number(value)?,
            "max_label" => {
                style.max_label = value
                    .parse()
                    .map_err(|_| StyleError::new(line, format!("`{value}` is not a length")))?
            }
            other => return Err(StyleError::new(line, format!("unknown style key `{other}`"))),
        }
    }
    Ok(style)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_known_keys() {
        let style = parse_style("# custom\nhighlight_color = #ff0000\nport_size = 8\n").unwrap();
        assert_eq!(style.highlight_color, "#ff0000");
        assert_eq!(style.port_size, 8.0);
        assert_eq!(style.font_size, Style::default().font_size);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_numbers() {
        assert!(parse_style("higlight = x").unwrap_err().reason.contains("unknown style key"));
        assert!(parse_style("port_size = big").unwrap_err().reason.contains("not a non-negative"));
        assert!(parse_style("just text").unwrap_err().reason.contains("expected"));
    }
}
