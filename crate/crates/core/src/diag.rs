//! Diagnostics shared by every stage of the pipeline.
//!
//! A [`Diagnostic`] ties a severity and message to a byte range in a named
//! source file. Rendering to the conventional `file:line:col: severity:
//! message` form needs the file's text to recover line/column numbers, so
//! it is a method taking the source rather than a `Display` impl.

use std::fmt;

/// Byte range in one source file. `start < end` for everything the lexer
/// produces; spans never cover trivia.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: u32,
    pub end: u32,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span {
            start: start as u32,
            end: end as u32,
        }
    }

    /// Smallest span covering both `self` and `other`.
    pub fn join(self, other: Span) -> Span {
        Span {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Warning => write!(f, "warning"),
            Severity::Error => write!(f, "error"),
        }
    }
}

/// One user-facing finding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Name of the file the span points into (as given to the parser).
    pub file: String,
    pub span: Span,
    pub message: String,
}

impl Diagnostic {
    pub fn error(file: impl Into<String>, span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            file: file.into(),
            span,
            message: message.into(),
        }
    }

    pub fn warning(file: impl Into<String>, span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            file: file.into(),
            span,
            message: message.into(),
        }
    }

    /// Render as `file:line:col: severity: message`, with 1-based line and
    /// column computed against `source` (the text of `self.file`).
    pub fn render(&self, source: &str) -> String {
        let (line, col) = line_col(source, self.span.start as usize);
        format!(
            "{}:{}:{}: {}: {}",
            self.file, line, col, self.severity, self.message
        )
    }
}

/// 1-based line/column of a byte offset. Columns count bytes, which matches
/// characters for the ASCII sources the notation uses.
pub fn line_col(source: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(source.len());
    let before = &source[..offset];
    let line = before.bytes().filter(|&b| b == b'\n').count() + 1;
    let col = offset - before.rfind('\n').map(|p| p + 1).unwrap_or(0) + 1;
    (line, col)
}

/// True if any diagnostic in the slice is an error.
pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(|d| d.severity == Severity::Error)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_col_counts_from_one() {
        let src = "ab\ncd\n";
        assert_eq!(line_col(src, 0), (1, 1));
        assert_eq!(line_col(src, 1), (1, 2));
        assert_eq!(line_col(src, 3), (2, 1));
        assert_eq!(line_col(src, 6), (3, 1));
    }

    #[test]
    fn render_matches_convention() {
        let d = Diagnostic::error("m.dartwin", Span::new(3, 5), "unexpected token");
        assert_eq!(
            d.render("ab\ncd\n"),
            "m.dartwin:2:1: error: unexpected token"
        );
    }
}
