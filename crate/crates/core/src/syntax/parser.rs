//! Recursive-descent parser with per-member error recovery.
//!
//! A malformed member produces one diagnostic and the parser skips to the
//! next `;` or the enclosing `}` (brace depth tracked), so a single mistake
//! never cascades across the rest of the file. Comments are skipped
//! everywhere except directly after the `doc` keyword, where a block
//! comment is the documentation payload.

use crate::diag::{Diagnostic, Span};

use super::ast::{Construct, ImportClause, Multiplicity, Node, PathExpr, SourceTree};
use super::lexer::tokenize;
use super::token::{Token, TokenKind};

/// Parse one file: tokenize plus tree construction, diagnostics merged.
pub fn parse(source: &str, file: &str) -> (SourceTree, Vec<Diagnostic>) {
    let lex = tokenize(source, file);
    let (tree, mut diags) = parse_tokens(&lex.tokens, file);
    let mut all = lex.diagnostics;
    all.append(&mut diags);
    (tree, all)
}

/// Parse an already-lexed token stream.
pub fn parse_tokens(tokens: &[Token], file: &str) -> (SourceTree, Vec<Diagnostic>) {
    let mut p = Parser {
        tokens,
        idx: 0,
        file: file.to_string(),
        diags: Vec::new(),
    };
    let mut top_doc = None;
    let roots = p.parse_members(false, &mut top_doc);
    if top_doc.is_some() {
        let here = p.here();
        p.diags
            .push(Diagnostic::error(file, here, "documentation must appear inside a body"));
    }
    (
        SourceTree {
            file: file.to_string(),
            roots,
        },
        p.diags,
    )
}

struct Parser<'a> {
    tokens: &'a [Token],
    idx: usize,
    file: String,
    diags: Vec<Diagnostic>,
}

/// Index of the next token at or after `from` that is not a comment.
fn next_significant(tokens: &[Token], mut from: usize) -> usize {
    while let Some(t) = tokens.get(from) {
        match t.kind {
            TokenKind::LineComment | TokenKind::DocComment => from += 1,
            _ => break,
        }
    }
    from
}

impl<'a> Parser<'a> {
    fn peek(&mut self) -> Option<&'a Token> {
        self.idx = next_significant(self.tokens, self.idx);
        self.tokens.get(self.idx)
    }

    /// Significant token after the next one, for two-token dispatch
    /// (`part def` vs `part X`).
    fn peek2(&self) -> Option<&'a Token> {
        let first = next_significant(self.tokens, self.idx);
        self.tokens.get(next_significant(self.tokens, first + 1))
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let t = self.peek()?;
        self.idx += 1;
        Some(t)
    }

    fn at_punct(&mut self, p: &str) -> bool {
        self.peek().is_some_and(|t| t.is_punct(p))
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.at_punct(p) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    fn at_keyword(&mut self, w: &str) -> bool {
        self.peek().is_some_and(|t| t.is_keyword(w))
    }

    fn eat_keyword(&mut self, w: &str) -> bool {
        if self.at_keyword(w) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    fn eat_identifier(&mut self) -> Option<&'a Token> {
        if self.peek().is_some_and(|t| t.kind == TokenKind::Identifier) {
            self.bump()
        } else {
            None
        }
    }

    /// Span of the next token, or a point at the end of the stream.
    fn here(&mut self) -> Span {
        match self.peek() {
            Some(t) => t.span,
            None => {
                let end = self.tokens.last().map(|t| t.span.end).unwrap_or(1);
                Span {
                    start: end.saturating_sub(1),
                    end,
                }
            }
        }
    }

    fn error_here(&mut self, message: impl Into<String>) {
        let span = self.here();
        self.diags
            .push(Diagnostic::error(self.file.clone(), span, message));
    }

    /// Skip to the next member boundary: past a `;` at the current brace
    /// depth, or up to (not past) the `}` that closes the current body.
    fn recover(&mut self) {
        let mut depth = 0usize;
        while let Some(t) = self.peek() {
            if t.is_punct("{") {
                depth += 1;
            } else if t.is_punct("}") {
                if depth == 0 {
                    return;
                }
                depth -= 1;
            } else if t.is_punct(";") && depth == 0 {
                self.idx += 1;
                return;
            }
            self.idx += 1;
        }
    }

    /// Members of a body (`inside_body`) or of the whole file. `doc`
    /// collects `doc /* ... */` members for the enclosing node.
    fn parse_members(&mut self, inside_body: bool, doc: &mut Option<String>) -> Vec<Node> {
        let mut members = Vec::new();
        loop {
            let Some(t) = self.peek() else {
                if inside_body {
                    self.error_here("unexpected end of file, expected `}`");
                }
                return members;
            };
            if t.is_punct("}") {
                if inside_body {
                    return members;
                }
                self.error_here("unmatched `}`");
                self.idx += 1;
                continue;
            }
            if t.is_keyword("doc") {
                self.idx += 1;
                self.parse_doc_payload(doc);
                continue;
            }
            if let Some(node) = self.parse_member() {
                members.push(node);
            }
        }
    }

    /// The block comment after a `doc` keyword. Line comments may
    /// intervene; anything else is an error.
    fn parse_doc_payload(&mut self, doc: &mut Option<String>) {
        while self
            .tokens
            .get(self.idx)
            .is_some_and(|t| t.kind == TokenKind::LineComment)
        {
            self.idx += 1;
        }
        match self.tokens.get(self.idx) {
            Some(t) if t.kind == TokenKind::DocComment => {
                self.idx += 1;
                let text = t.doc_text().to_string();
                match doc {
                    Some(existing) => {
                        existing.push('\n');
                        existing.push_str(&text);
                    }
                    None => *doc = Some(text),
                }
            }
            _ => self.error_here("expected `/* ... */` after `doc`"),
        }
    }

    fn parse_member(&mut self) -> Option<Node> {
        let t = self.peek()?;
        let start = t.span;

        if t.kind == TokenKind::HashKeyword {
            let kw = t.hash_name().to_string();
            self.idx += 1;
            return self.parse_usage(Construct::Keyword, Some(kw), start);
        }

        if t.kind != TokenKind::Keyword {
            self.error_here(format!("expected a member, found `{}`", t.text));
            self.recover();
            return None;
        }

        match t.text.as_str() {
            "private" | "import" => self.parse_import(start),
            "library" => {
                self.idx += 1;
                if !self.eat_keyword("package") {
                    self.error_here("expected `package` after `library`");
                    self.recover();
                    return None;
                }
                self.parse_package(Construct::LibraryPackage, start)
            }
            "package" => {
                self.idx += 1;
                self.parse_package(Construct::Package, start)
            }
            "metadata" => {
                self.idx += 1;
                if !self.eat_keyword("def") {
                    self.error_here("expected `def` after `metadata`");
                    self.recover();
                    return None;
                }
                self.parse_metadata_def(start)
            }
            "part" | "requirement" | "connection"
                if self.peek2().is_some_and(|t2| t2.is_keyword("def")) =>
            {
                let construct = match t.text.as_str() {
                    "part" => Construct::PartDef,
                    "requirement" => Construct::RequirementDef,
                    _ => Construct::ConnectionDef,
                };
                self.idx += 1; // the usage keyword
                self.idx += 1; // `def`
                self.parse_usage(construct, None, start)
            }
            "part" => {
                self.idx += 1;
                self.parse_usage(Construct::Part, None, start)
            }
            "port" => {
                self.idx += 1;
                self.parse_usage(Construct::Port, None, start)
            }
            "connection" => {
                self.idx += 1;
                self.parse_usage(Construct::Connection, None, start)
            }
            "allocation" => {
                self.idx += 1;
                self.parse_usage(Construct::Allocation, None, start)
            }
            "requirement" => {
                self.idx += 1;
                self.parse_usage(Construct::Requirement, None, start)
            }
            other => {
                self.error_here(format!("`{other}` cannot start a member"));
                self.recover();
                None
            }
        }
    }

    fn parse_import(&mut self, start: Span) -> Option<Node> {
        let private = self.eat_keyword("private");
        if !self.eat_keyword("import") {
            self.error_here("expected `import`");
            self.recover();
            return None;
        }
        let mut segments = Vec::new();
        let mut wildcard = false;
        match self.eat_identifier() {
            Some(t) => segments.push(t.text.clone()),
            None => {
                self.error_here("expected an imported name");
                self.recover();
                return None;
            }
        }
        while self.eat_punct("::") {
            if self.eat_punct("*") {
                wildcard = true;
                break;
            }
            match self.eat_identifier() {
                Some(t) => segments.push(t.text.clone()),
                None => {
                    self.error_here("expected a name or `*` after `::`");
                    self.recover();
                    return None;
                }
            }
        }
        let mut node = Node::new(Construct::Import, start);
        node.import = Some(ImportClause {
            segments,
            wildcard,
            private,
        });
        if !self.eat_punct(";") {
            self.error_here("expected `;` after import");
            self.recover();
        }
        node.span = start.join(self.last_span());
        Some(node)
    }

    fn parse_package(&mut self, construct: Construct, start: Span) -> Option<Node> {
        let mut node = Node::new(construct, start);
        match self.eat_identifier() {
            Some(t) => node.name = Some(t.text.clone()),
            None => self.error_here("expected a package name"),
        }
        self.parse_body(&mut node);
        node.span = start.join(self.last_span());
        Some(node)
    }

    fn parse_metadata_def(&mut self, start: Span) -> Option<Node> {
        let mut node = Node::new(Construct::MetadataDef, start);
        if self.eat_punct("<") {
            match self.bump() {
                Some(t) if matches!(t.kind, TokenKind::Identifier | TokenKind::Keyword) => {
                    node.declared_keyword = Some(t.text.clone());
                }
                _ => self.error_here("expected a keyword name inside `<...>`"),
            }
            if !self.eat_punct(">") {
                self.error_here("expected `>`");
            }
        }
        match self.eat_identifier() {
            Some(t) => node.name = Some(t.text.clone()),
            None => self.error_here("expected a definition name"),
        }
        while self.eat_punct(":>") {
            loop {
                if let Some(path) = self.parse_path() {
                    node.specializes.push(path);
                }
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.parse_body(&mut node);
        node.span = start.join(self.last_span());
        Some(node)
    }

    /// Usages and `def`s share this tail: name, multiplicity, typing,
    /// `:>`/`:>>`, an optional connect/allocate clause, then `;` or a body.
    fn parse_usage(
        &mut self,
        construct: Construct,
        hash_keyword: Option<String>,
        start: Span,
    ) -> Option<Node> {
        let mut node = Node::new(construct, start);
        node.hash_keyword = hash_keyword;

        if let Some(t) = self.eat_identifier() {
            node.name = Some(t.text.clone());
        }
        if self.at_punct("[") {
            node.multiplicity = self.parse_multiplicity();
        }
        if self.at_punct(":") {
            self.idx += 1;
            node.typing = self.parse_path();
        }
        if node.multiplicity.is_none() && self.at_punct("[") {
            node.multiplicity = self.parse_multiplicity();
        }

        loop {
            if self.eat_punct(":>") {
                loop {
                    if let Some(path) = self.parse_path() {
                        node.specializes.push(path);
                    }
                    if !self.eat_punct(",") {
                        break;
                    }
                }
            } else if self.at_punct(":>>") {
                let span = self.here();
                self.idx += 1;
                let path = self.parse_path();
                if node.redefines.is_some() {
                    self.diags.push(Diagnostic::error(
                        self.file.clone(),
                        span,
                        "an element can redefine only one other element",
                    ));
                } else {
                    node.redefines = path;
                }
            } else {
                break;
            }
        }

        if self.eat_keyword("connect") {
            node.connect = self.parse_endpoint_pair();
        } else if self.eat_keyword("allocate") {
            node.allocate = self.parse_endpoint_pair();
        }

        if node.name.is_none() && node.redefines.is_none() {
            self.diags.push(Diagnostic::error(
                self.file.clone(),
                start,
                "expected a name (only redefinitions may be anonymous)",
            ));
        }

        self.parse_body(&mut node);
        node.span = start.join(self.last_span());
        Some(node)
    }

    /// `<path> to <path>` after `connect` or `allocate`.
    fn parse_endpoint_pair(&mut self) -> Option<(PathExpr, PathExpr)> {
        let first = self.parse_path()?;
        if !self.eat_keyword("to") {
            self.error_here("expected `to`");
            return None;
        }
        let second = self.parse_path()?;
        Some((first, second))
    }

    /// `;` for an empty body, or `{ ... }` with members and doc.
    fn parse_body(&mut self, node: &mut Node) {
        if self.eat_punct(";") {
            return;
        }
        if self.eat_punct("{") {
            let mut doc = None;
            node.children = self.parse_members(true, &mut doc);
            node.doc = doc;
            if !self.eat_punct("}") {
                self.error_here("expected `}`");
            }
            return;
        }
        self.error_here("expected `;` or `{`");
        self.recover();
    }

    fn parse_multiplicity(&mut self) -> Option<Multiplicity> {
        debug_assert!(self.at_punct("["));
        self.idx += 1;
        let mult = (|p: &mut Self| {
            let lower_tok = p.bump()?;
            let (lower, upper) = match lower_tok.kind {
                TokenKind::Number => {
                    let n: u64 = lower_tok.text.parse().ok()?;
                    if p.eat_punct("..") {
                        let hi = p.bump()?;
                        match hi.kind {
                            TokenKind::Number => (n, Some(hi.text.parse().ok()?)),
                            TokenKind::Punct if hi.text == "*" => (n, None),
                            _ => return None,
                        }
                    } else {
                        (n, Some(n))
                    }
                }
                TokenKind::Punct if lower_tok.text == "*" => (0, None),
                _ => return None,
            };
            Some(Multiplicity { lower, upper })
        })(self);
        if mult.is_none() {
            self.error_here("malformed multiplicity, expected `[n]`, `[*]` or `[n..m]`");
            while let Some(t) = self.peek() {
                let done = t.is_punct("]");
                self.idx += 1;
                if done {
                    break;
                }
            }
            return None;
        }
        if !self.eat_punct("]") {
            self.error_here("expected `]`");
        }
        mult
    }

    /// Dotted reference: `Ident (. Ident)*`.
    fn parse_path(&mut self) -> Option<PathExpr> {
        let first = match self.eat_identifier() {
            Some(t) => t,
            None => {
                self.error_here("expected a name");
                return None;
            }
        };
        let mut segments = vec![first.text.clone()];
        let mut span = first.span;
        while self.at_punct(".")
            && self
                .peek2()
                .is_some_and(|t| t.kind == TokenKind::Identifier)
        {
            self.idx += 1;
            let seg = self.eat_identifier().expect("checked by peek2");
            segments.push(seg.text.clone());
            span = span.join(seg.span);
        }
        Some(PathExpr { segments, span })
    }

    /// Span of the most recently consumed token.
    fn last_span(&self) -> Span {
        self.tokens
            .get(self.idx.saturating_sub(1))
            .map(|t| t.span)
            .unwrap_or(Span { start: 0, end: 1 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(src: &str) -> SourceTree {
        let (tree, diags) = parse(src, "t.dartwin");
        assert!(diags.is_empty(), "unexpected diagnostics: {diags:?}");
        tree
    }

    #[test]
    fn empty_body_and_semicolon_body_are_equal() {
        let a = ok("#dartwin X { }");
        let b = ok("#dartwin X;");
        assert_eq!(a.roots, b.roots);
        assert_eq!(a.roots.len(), 1);
        assert!(a.roots[0].children.is_empty());
    }

    #[test]
    fn nested_twins_with_connections() {
        let tree = ok(concat!(
            "#dartwin Basic {\n",
            "  #twinsystem TwinSystem {\n",
            "    #digitaltwin DT1 { port p11; }\n",
            "    connection c1 connect Basic.AT.ts1 to DT1.p11;\n",
            "  }\n",
            "  part AT { port ts1; }\n",
            "  #goal Goal1 { doc /* Goal 1 */ }\n",
            "  allocation a1 allocate Goal1 to TwinSystem.DT1;\n",
            "}\n",
        ));
        let root = &tree.roots[0];
        assert_eq!(root.hash_keyword.as_deref(), Some("dartwin"));
        assert_eq!(root.children.len(), 4);
        let ts = &root.children[0];
        assert_eq!(ts.children.len(), 2);
        let c1 = &ts.children[1];
        let (src, dst) = c1.connect.as_ref().unwrap();
        assert_eq!(src.segments, ["Basic", "AT", "ts1"]);
        assert_eq!(dst.segments, ["DT1", "p11"]);
        assert_eq!(root.children[2].doc.as_deref(), Some("Goal 1"));
        let a1 = &root.children[3];
        let (goal, twin) = a1.allocate.as_ref().unwrap();
        assert_eq!(goal.segments, ["Goal1"]);
        assert_eq!(twin.segments, ["TwinSystem", "DT1"]);
    }

    #[test]
    fn anonymous_redefinition() {
        let tree = ok("#dartrans T { #dartwin_after A :> B { #twinsystem :>> TS { } part :>>AT; } }");
        let after = &tree.roots[0].children[0];
        assert_eq!(after.specializes[0].segments, ["B"]);
        let ts = &after.children[0];
        assert!(ts.name.is_none());
        assert_eq!(ts.redefines.as_ref().unwrap().segments, ["TS"]);
        let at = &after.children[1];
        assert_eq!(at.construct, Construct::Part);
        assert_eq!(at.redefines.as_ref().unwrap().segments, ["AT"]);
    }

    #[test]
    fn heritage_before_connect_clause() {
        let tree = ok("#dartwin D :> P.b { connection a :> P.b.c1 connect X.p to Y.q; part X { port p; } part Y { port q; } }");
        let conn = &tree.roots[0].children[0];
        assert_eq!(conn.specializes[0].segments, ["P", "b", "c1"]);
        assert!(conn.connect.is_some());
    }

    #[test]
    fn definitions_imports_and_multiplicities() {
        let tree = ok(concat!(
            "library package Lib {\n",
            "  private import ScalarValues::*;\n",
            "  metadata def <dartwin> DarTwinMeta;\n",
            "  part def Arbiter { port inputs[2..*]; port output[1]; }\n",
            "  requirement def Goal;\n",
            "  connection def Conflict :> Connections.BinaryConnection;\n",
            "  part arbiter1: Arbiter;\n",
            "  requirement goals: Goal[*];\n",
            "}\n",
        ));
        let lib = &tree.roots[0];
        assert_eq!(lib.construct, Construct::LibraryPackage);
        let import = &lib.children[0];
        assert_eq!(
            import.import,
            Some(ImportClause {
                segments: vec!["ScalarValues".into()],
                wildcard: true,
                private: true,
            })
        );
        let meta = &lib.children[1];
        assert_eq!(meta.declared_keyword.as_deref(), Some("dartwin"));
        let arbiter = &lib.children[2];
        assert_eq!(arbiter.construct, Construct::PartDef);
        assert_eq!(
            arbiter.children[0].multiplicity,
            Some(Multiplicity { lower: 2, upper: None })
        );
        assert_eq!(
            arbiter.children[1].multiplicity,
            Some(Multiplicity { lower: 1, upper: Some(1) })
        );
        let goals = &lib.children[6];
        assert_eq!(goals.construct, Construct::Requirement);
        assert_eq!(goals.typing.as_ref().unwrap().segments, ["Goal"]);
        assert_eq!(
            goals.multiplicity,
            Some(Multiplicity { lower: 0, upper: None })
        );
    }

    #[test]
    fn recovery_is_local_to_the_broken_member() {
        let (tree, diags) = parse(
            "#dartwin X { part ; port p1; #goal G; }",
            "t.dartwin",
        );
        assert!(!diags.is_empty());
        let root = &tree.roots[0];
        // The broken `part ;` is dropped; its neighbors survive.
        let names: Vec<_> = root
            .children
            .iter()
            .filter_map(|c| c.name.as_deref())
            .collect();
        assert!(names.contains(&"p1"));
        assert!(names.contains(&"G"));
    }

    #[test]
    fn missing_body_reports_and_recovers_at_scope_end() {
        let (tree, diags) = parse("#dartwin X { part P }", "t.dartwin");
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("expected `;` or `{`"));
        assert_eq!(tree.roots.len(), 1);
    }

    #[test]
    fn doc_outside_a_body_is_an_error() {
        let (_, diags) = parse("doc /* stray */", "t.dartwin");
        assert!(!diags.is_empty());
    }
}
