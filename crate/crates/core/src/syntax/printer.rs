//! Canonical printer.
//!
//! Four-space indentation, one member per line, `;` for empty bodies.
//! The output is parseable and `parse(print(tree))` is structurally equal
//! to `tree` — the round-trip property the test suite exercises on both
//! the shipped fixtures and generated trees.

use super::ast::{Construct, Node, SourceTree};

pub fn print(tree: &SourceTree) -> String {
    let mut out = String::new();
    for root in &tree.roots {
        write_node(&mut out, root, 0);
    }
    out
}

fn write_node(out: &mut String, node: &Node, depth: usize) {
    let pad = "    ".repeat(depth);
    out.push_str(&pad);

    match node.construct {
        Construct::Import => {
            let import = node.import.as_ref().expect("import node without clause");
            if import.private {
                out.push_str("private ");
            }
            out.push_str("import ");
            out.push_str(&import.segments.join("::"));
            if import.wildcard {
                out.push_str("::*");
            }
            out.push_str(";\n");
            return;
        }
        Construct::Package => out.push_str("package"),
        Construct::LibraryPackage => out.push_str("library package"),
        Construct::PartDef => out.push_str("part def"),
        Construct::RequirementDef => out.push_str("requirement def"),
        Construct::ConnectionDef => out.push_str("connection def"),
        Construct::MetadataDef => {
            out.push_str("metadata def");
            if let Some(kw) = &node.declared_keyword {
                out.push_str(" <");
                out.push_str(kw);
                out.push('>');
            }
        }
        Construct::Part => out.push_str("part"),
        Construct::Port => out.push_str("port"),
        Construct::Connection => out.push_str("connection"),
        Construct::Allocation => out.push_str("allocation"),
        Construct::Requirement => out.push_str("requirement"),
        Construct::Keyword => {
            out.push('#');
            out.push_str(node.hash_keyword.as_deref().unwrap_or(""));
        }
    }

    if let Some(name) = &node.name {
        out.push(' ');
        out.push_str(name);
    }
    if node.typing.is_none() {
        if let Some(mult) = &node.multiplicity {
            out.push_str(&mult.text());
        }
    }
    if let Some(typing) = &node.typing {
        out.push_str(": ");
        out.push_str(&typing.text());
        if let Some(mult) = &node.multiplicity {
            out.push_str(&mult.text());
        }
    }
    if !node.specializes.is_empty() {
        out.push_str(" :> ");
        let paths: Vec<String> = node.specializes.iter().map(|p| p.text()).collect();
        out.push_str(&paths.join(", "));
    }
    if let Some(redefines) = &node.redefines {
        out.push_str(" :>> ");
        out.push_str(&redefines.text());
    }
    if let Some((src, dst)) = &node.connect {
        out.push_str(" connect ");
        out.push_str(&src.text());
        out.push_str(" to ");
        out.push_str(&dst.text());
    }
    if let Some((goal, twin)) = &node.allocate {
        out.push_str(" allocate ");
        out.push_str(&goal.text());
        out.push_str(" to ");
        out.push_str(&twin.text());
    }

    if node.children.is_empty() && node.doc.is_none() {
        out.push_str(";\n");
        return;
    }
    out.push_str(" {\n");
    if let Some(doc) = &node.doc {
        for line in doc.split('\n') {
            out.push_str(&pad);
            out.push_str("    doc /* ");
            out.push_str(line);
            out.push_str(" */\n");
        }
    }
    for child in &node.children {
        write_node(out, child, depth + 1);
    }
    out.push_str(&pad);
    out.push_str("}\n");
}
