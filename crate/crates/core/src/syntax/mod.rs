//! Textual notation: tokens, syntax trees, parsing and printing.
//!
//! The lexer is lossless — concatenating every token's leading trivia and
//! text (plus the stream's trailing trivia) reproduces the input byte for
//! byte. The parser recovers at member boundaries, so one malformed member
//! yields one diagnostic instead of cascading. The printer emits the
//! canonical form: four-space indentation, one member per line, and
//! `parse(print(tree))` structurally equal to `tree`.

mod ast;
mod lexer;
mod parser;
mod printer;
mod token;

pub use ast::{
    sorted_for_comparison, Construct, ImportClause, Multiplicity, Node, PathExpr, SourceTree,
};
pub use lexer::{tokenize, LexOutput};
pub use parser::{parse, parse_tokens};
pub use printer::print;
pub use token::{Token, TokenKind, KEYWORDS};
