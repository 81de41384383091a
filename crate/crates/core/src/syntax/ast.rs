//! Syntax trees.
//!
//! Nodes keep declaration order and spans but drop comments and whitespace;
//! the printer regenerates canonical formatting from structure alone.
//! Equality (`PartialEq`) ignores spans, so a reparsed canonical print
//! compares equal to the original tree. `X { }` and `X;` build identical
//! nodes — an empty body carries no information.

use crate::diag::Span;

/// One parsed source file.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceTree {
    /// File name used in diagnostics (not necessarily an on-disk path).
    pub file: String,
    pub roots: Vec<Node>,
}

impl SourceTree {
    pub fn empty(file: impl Into<String>) -> Self {
        SourceTree {
            file: file.into(),
            roots: Vec::new(),
        }
    }
}

/// Dotted reference such as `Basic.AT.ts1`. Equality compares segments only.
#[derive(Debug, Clone)]
pub struct PathExpr {
    pub segments: Vec<String>,
    pub span: Span,
}

impl PathExpr {
    pub fn text(&self) -> String {
        self.segments.join(".")
    }
}

impl PartialEq for PathExpr {
    fn eq(&self, other: &Self) -> bool {
        self.segments == other.segments
    }
}

/// `[1]`, `[*]`, `[2..*]` — lower bound plus optional finite upper bound
/// (`None` = unbounded). `[n]` means `[n..n]`, `[*]` means `[0..*]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Multiplicity {
    pub lower: u64,
    pub upper: Option<u64>,
}

impl Multiplicity {
    /// Canonical source spelling.
    pub fn text(&self) -> String {
        match (self.lower, self.upper) {
            (0, None) => "[*]".to_string(),
            (lo, None) => format!("[{lo}..*]"),
            (lo, Some(hi)) if lo == hi => format!("[{lo}]"),
            (lo, Some(hi)) => format!("[{lo}..{hi}]"),
        }
    }
}

/// `private import A::B::*;`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportClause {
    pub segments: Vec<String>,
    pub wildcard: bool,
    pub private: bool,
}

/// Syntactic shape of a member, before keyword semantics apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Construct {
    Package,
    LibraryPackage,
    Import,
    PartDef,
    RequirementDef,
    ConnectionDef,
    MetadataDef,
    Part,
    Port,
    Connection,
    Allocation,
    Requirement,
    /// `#keyword` usage; the keyword is in [`Node::hash_keyword`].
    Keyword,
}

/// One member: a definition, usage, package or import.
#[derive(Debug, Clone)]
pub struct Node {
    pub construct: Construct,
    /// Keyword spelling without the hash, for [`Construct::Keyword`] nodes.
    pub hash_keyword: Option<String>,
    pub name: Option<String>,
    /// Keyword declared by `metadata def <kw>`.
    pub declared_keyword: Option<String>,
    pub import: Option<ImportClause>,
    pub multiplicity: Option<Multiplicity>,
    /// Declared type after `:`, e.g. `goals: Goal`.
    pub typing: Option<PathExpr>,
    /// Targets of `:>`.
    pub specializes: Vec<PathExpr>,
    /// Target of `:>>`. A node with `:>>` may be anonymous.
    pub redefines: Option<PathExpr>,
    /// `connect <source> to <target>`.
    pub connect: Option<(PathExpr, PathExpr)>,
    /// `allocate <goal> to <twin>`.
    pub allocate: Option<(PathExpr, PathExpr)>,
    /// Text of the body's `doc /* ... */` member.
    pub doc: Option<String>,
    pub children: Vec<Node>,
    pub span: Span,
}

impl Node {
    pub fn new(construct: Construct, span: Span) -> Self {
        Node {
            construct,
            hash_keyword: None,
            name: None,
            declared_keyword: None,
            import: None,
            multiplicity: None,
            typing: None,
            specializes: Vec::new(),
            redefines: None,
            connect: None,
            allocate: None,
            doc: None,
            children: Vec::new(),
            span,
        }
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.construct == other.construct
            && self.hash_keyword == other.hash_keyword
            && self.name == other.name
            && self.declared_keyword == other.declared_keyword
            && self.import == other.import
            && self.multiplicity == other.multiplicity
            && self.typing == other.typing
            && self.specializes == other.specializes
            && self.redefines == other.redefines
            && self.connect == other.connect
            && self.allocate == other.allocate
            && self.doc == other.doc
            && self.children == other.children
    }
}

/// Copy of `tree` with every member list sorted by (construct, keyword,
/// name), recursively. Two trees that differ only in member order compare
/// equal after this, which is what "structurally equal, ordering ignored"
/// means for evolved models.
pub fn sorted_for_comparison(tree: &SourceTree) -> SourceTree {
    fn sort_nodes(nodes: &mut Vec<Node>) {
        for n in nodes.iter_mut() {
            sort_nodes(&mut n.children);
        }
        nodes.sort_by(|a, b| {
            (a.construct, &a.hash_keyword, &a.name).cmp(&(b.construct, &b.hash_keyword, &b.name))
        });
    }
    let mut copy = tree.clone();
    sort_nodes(&mut copy.roots);
    copy
}
