//! Token model for the textual notation.

use crate::diag::Span;

/// Reserved structural words. Everything else that looks like a word is an
/// identifier; `#`-keywords are a separate token kind.
pub const KEYWORDS: &[&str] = &[
    "allocate",
    "allocation",
    "connect",
    "connection",
    "def",
    "doc",
    "import",
    "library",
    "metadata",
    "package",
    "part",
    "port",
    "private",
    "requirement",
    "to",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    /// Reserved word such as `part` or `connect`.
    Keyword,
    /// `#`-prefixed notation keyword such as `#dartwin`.
    HashKeyword,
    Identifier,
    /// Integer literal, used inside multiplicity ranges.
    Number,
    /// Operator or delimiter: `{` `}` `;` `:>` `:>>` `::` `:` `[` `]`
    /// `..` `.` `,` `*` `<` `>`.
    Punct,
    /// Block comment `/* ... */`; carries documentation after `doc`.
    DocComment,
    /// Line comment `// ...` (without the trailing newline).
    LineComment,
}

/// One lexed token. `trivia` holds the whitespace between the previous
/// token and this one, so the stream reproduces the source exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    /// Exact source spelling, including the `#` of a hash-keyword and the
    /// delimiters of a comment.
    pub text: String,
    /// Whitespace preceding the token.
    pub trivia: String,
    pub span: Span,
}

impl Token {
    /// Keyword name of a hash-keyword token: `#goal` → `goal`.
    pub fn hash_name(&self) -> &str {
        self.text.strip_prefix('#').unwrap_or(&self.text)
    }

    /// Documentation text of a block comment, delimiters stripped and the
    /// remainder trimmed.
    pub fn doc_text(&self) -> &str {
        self.text
            .strip_prefix("/*")
            .and_then(|t| t.strip_suffix("*/"))
            .unwrap_or(&self.text)
            .trim()
    }

    pub fn is_keyword(&self, word: &str) -> bool {
        self.kind == TokenKind::Keyword && self.text == word
    }

    pub fn is_punct(&self, p: &str) -> bool {
        self.kind == TokenKind::Punct && self.text == p
    }
}
