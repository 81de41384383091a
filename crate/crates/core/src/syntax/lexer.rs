//! Hand-rolled lossless lexer.
//!
//! Every byte of the input lands either in a token's `text` or in trivia
//! (the whitespace attached to the following token, or `trailing` after the
//! last one), so the stream can reproduce the file exactly. Unexpected
//! characters are reported and swallowed as trivia, which keeps the
//! lossless property even for rejected inputs.

use crate::diag::{Diagnostic, Span};

use super::token::{Token, TokenKind, KEYWORDS};

/// Result of tokenizing one file.
#[derive(Debug, Clone)]
pub struct LexOutput {
    pub tokens: Vec<Token>,
    /// Whitespace (and skipped garbage) after the last token.
    pub trailing: String,
    pub diagnostics: Vec<Diagnostic>,
}

impl LexOutput {
    /// Reassemble the original source. Identity with the input is the
    /// lexer's core invariant.
    pub fn reassemble(&self) -> String {
        let mut out = String::new();
        for tok in &self.tokens {
            out.push_str(&tok.trivia);
            out.push_str(&tok.text);
        }
        out.push_str(&self.trailing);
        out
    }
}

/// Multi-character punctuation, longest first so `:>>` wins over `:>` and
/// `:>` over `:`.
const MULTI_PUNCT: &[&str] = &[":>>", ":>", "::", ".."];
const SINGLE_PUNCT: &[char] = &['{', '}', ';', ':', '[', ']', '.', ',', '*', '<', '>'];

pub fn tokenize(source: &str, file: &str) -> LexOutput {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut diagnostics = Vec::new();
    let mut trivia = String::new();
    let mut pos = 0;

    while pos < bytes.len() {
        let rest = &source[pos..];
        let c = rest.chars().next().unwrap();

        if c.is_whitespace() {
            trivia.push(c);
            pos += c.len_utf8();
            continue;
        }

        let start = pos;
        let (kind, len) = if rest.starts_with("/*") {
            match rest.find("*/") {
                Some(end) => (TokenKind::DocComment, end + 2),
                None => {
                    diagnostics.push(Diagnostic::error(
                        file,
                        Span::new(start, source.len()),
                        "unterminated block comment",
                    ));
                    (TokenKind::DocComment, rest.len())
                }
            }
        } else if rest.starts_with("//") {
            let end = rest.find('\n').unwrap_or(rest.len());
            (TokenKind::LineComment, end)
        } else if c == '#' {
            let word = ident_len(&rest[1..]);
            if word == 0 {
                diagnostics.push(Diagnostic::error(
                    file,
                    Span::new(start, start + 1),
                    "expected a keyword name after `#`",
                ));
                trivia.push('#');
                pos += 1;
                continue;
            }
            (TokenKind::HashKeyword, 1 + word)
        } else if c.is_ascii_digit() {
            let end = rest.find(|ch: char| !ch.is_ascii_digit()).unwrap_or(rest.len());
            (TokenKind::Number, end)
        } else if c == '_' || c.is_alphabetic() {
            let len = ident_len(rest);
            let word = &rest[..len];
            let kind = if KEYWORDS.contains(&word) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            };
            (kind, len)
        } else if let Some(p) = MULTI_PUNCT.iter().find(|p| rest.starts_with(**p)) {
            (TokenKind::Punct, p.len())
        } else if SINGLE_PUNCT.contains(&c) {
            (TokenKind::Punct, c.len_utf8())
        } else {
            diagnostics.push(Diagnostic::error(
                file,
                Span::new(start, start + c.len_utf8()),
                format!("unexpected character `{c}`"),
            ));
            trivia.push(c);
            pos += c.len_utf8();
            continue;
        };

        pos += len;
        tokens.push(Token {
            kind,
            text: source[start..pos].to_string(),
            trivia: std::mem::take(&mut trivia),
            span: Span::new(start, pos),
        });
    }

    LexOutput {
        tokens,
        trailing: trivia,
        diagnostics,
    }
}

/// Length of the identifier prefix of `s` (ASCII letters, digits, `_`;
/// must not start with a digit).
fn ident_len(s: &str) -> usize {
    let mut chars = s.char_indices();
    match chars.next() {
        Some((_, c)) if c == '_' || c.is_alphabetic() => {}
        _ => return 0,
    }
    for (i, c) in chars {
        if c != '_' && !c.is_alphanumeric() {
            return i;
        }
    }
    s.len()
}
