//! Generated-input properties: the printer/parser round-trip on arbitrary
//! trees, and flattening checked against a small reference implementation
//! of the member-merge rules on random specialization DAGs.

use proptest::prelude::*;

use dartwin_core::diag::Span;
use dartwin_core::flatten::{flatten, FlattenError};
use dartwin_core::model::{build_model, SemanticModel};
use dartwin_core::syntax::{parse, print, Construct, Multiplicity, Node, PathExpr, SourceTree};

const SPAN: Span = Span { start: 0, end: 0 };

fn ident() -> impl Strategy<Value = String> {
    // The `n_` prefix keeps clear of every keyword.
    "[a-z][a-z0-9_]{0,6}".prop_map(|s| format!("n_{s}"))
}

fn path() -> impl Strategy<Value = PathExpr> {
    proptest::collection::vec(ident(), 1..=3).prop_map(|segments| PathExpr {
        segments,
        span: SPAN,
    })
}

fn multiplicity() -> impl Strategy<Value = Multiplicity> {
    (0u64..4, proptest::option::of(0u64..4)).prop_map(|(lower, extra)| Multiplicity {
        lower,
        upper: extra.map(|e| lower + e),
    })
}

fn doc_text() -> impl Strategy<Value = String> {
    proptest::collection::vec("[a-z]{1,8}", 1..5).prop_map(|words| words.join(" "))
}

fn keyword() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("dartwin"),
        Just("twinsystem"),
        Just("digitaltwin"),
        Just("goal"),
        Just("arbiter"),
        Just("dartrans"),
        Just("dartwin_core"),
        Just("dartwin_before"),
        Just("dartwin_after"),
    ]
    .prop_map(str::to_string)
}

fn leaf_node() -> impl Strategy<Value = Node> {
    prop_oneof![
        // Plain structural leaf, possibly specializing.
        (
            prop_oneof![
                Just(Construct::Part),
                Just(Construct::Port),
                Just(Construct::PartDef)
            ],
            ident(),
            proptest::option::of(multiplicity()),
            proptest::collection::vec(path(), 0..3),
        )
            .prop_map(|(construct, name, multiplicity, specializes)| {
                let mut n = Node::new(construct, SPAN);
                n.name = Some(name);
                n.multiplicity = multiplicity;
                n.specializes = specializes;
                n
            }),
        // Typed usage such as `requirement goals: Goal [*]`.
        (
            prop_oneof![Just(Construct::Port), Just(Construct::Requirement)],
            ident(),
            path(),
            proptest::option::of(multiplicity()),
        )
            .prop_map(|(construct, name, typing, multiplicity)| {
                let mut n = Node::new(construct, SPAN);
                n.name = Some(name);
                n.typing = Some(typing);
                n.multiplicity = multiplicity;
                n
            }),
        // Connection with its endpoint clause.
        (ident(), path(), path()).prop_map(|(name, from, to)| {
            let mut n = Node::new(Construct::Connection, SPAN);
            n.name = Some(name);
            n.connect = Some((from, to));
            n
        }),
        // Allocation with its sides.
        (ident(), path(), path()).prop_map(|(name, goal, twin)| {
            let mut n = Node::new(Construct::Allocation, SPAN);
            n.name = Some(name);
            n.allocate = Some((goal, twin));
            n
        }),
        // Goal conflict.
        (ident(), path(), path()).prop_map(|(name, a, b)| {
            let mut n = Node::new(Construct::Keyword, SPAN);
            n.hash_keyword = Some("vs".into());
            n.name = Some(name);
            n.connect = Some((a, b));
            n
        }),
        // Anonymous redefinition, as in `#twinsystem :>> TS`.
        (keyword(), path()).prop_map(|(kw, target)| {
            let mut n = Node::new(Construct::Keyword, SPAN);
            n.hash_keyword = Some(kw);
            n.redefines = Some(target);
            n
        }),
    ]
}

fn node() -> impl Strategy<Value = Node> {
    leaf_node().prop_recursive(3, 32, 5, |inner| {
        (
            prop_oneof![
                // Packages take no `:>` clause; parts and keyword
                // constructs may specialize.
                proptest::collection::vec(path(), 0..3)
                    .prop_map(|s| (Construct::Part, None, s)),
                Just((Construct::Package, None, Vec::new())),
                (keyword(), proptest::collection::vec(path(), 0..3))
                    .prop_map(|(k, s)| (Construct::Keyword, Some(k), s)),
            ],
            ident(),
            proptest::option::of(doc_text()),
            proptest::collection::vec(inner, 0..5),
        )
            .prop_map(|((construct, hash_keyword, specializes), name, doc, children)| {
                let mut n = Node::new(construct, SPAN);
                n.hash_keyword = hash_keyword;
                n.name = Some(name);
                n.doc = doc;
                n.specializes = specializes;
                n.children = children;
                n
            })
    })
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        // Failures print their minimal input; no regression files.
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(256))]

    /// Printing any tree and parsing it back yields the same structure,
    /// and printing is a pure function of that structure.
    #[test]
    fn printed_trees_reparse_to_the_same_structure(
        roots in proptest::collection::vec(node(), 1..3)
    ) {
        let tree = SourceTree { file: "gen.dartwin".into(), roots };
        let printed = print(&tree);
        let (reparsed, diags) = parse(&printed, "gen.dartwin");
        prop_assert!(diags.is_empty(), "printed text must parse cleanly:\n{printed}\n{diags:?}");
        prop_assert_eq!(&tree.roots, &reparsed.roots, "print output:\n{}", printed);
        prop_assert_eq!(print(&reparsed), printed);
    }

    /// The parser recovers from arbitrary input instead of panicking.
    #[test]
    fn the_parser_survives_arbitrary_input(src in "[ -~\\n]{0,200}") {
        let _ = parse(&src, "fuzz.dartwin");
    }
}

/// One generated declaration: `part E<i> :> <bases ⊆ E0..E(i-1)> { <members> }`.
#[derive(Debug, Clone)]
struct Decl {
    bases: u32,
    members: u8,
}

const MEMBER_NAMES: [&str; 4] = ["a", "b", "c", "d"];

fn dag() -> impl Strategy<Value = Vec<Decl>> {
    proptest::collection::vec((any::<u32>(), any::<u8>()), 2..8).prop_map(|v| {
        v.into_iter()
            .map(|(bases, members)| Decl {
                bases,
                members: members & 0xF,
            })
            .collect()
    })
}

fn dag_source(decls: &[Decl]) -> String {
    let mut src = String::new();
    for (i, d) in decls.iter().enumerate() {
        let bases: Vec<String> = (0..i)
            .filter(|j| d.bases >> j & 1 == 1)
            .map(|j| format!("E{j}"))
            .collect();
        src.push_str(&format!("part E{i}"));
        if !bases.is_empty() {
            src.push_str(" :> ");
            src.push_str(&bases.join(", "));
        }
        let members: Vec<&str> = MEMBER_NAMES
            .iter()
            .enumerate()
            .filter(|(k, _)| d.members >> k & 1 == 1)
            .map(|(_, n)| *n)
            .collect();
        if members.is_empty() {
            src.push_str(";\n");
        } else {
            src.push_str(" {");
            for m in members {
                src.push_str(&format!(" part {m};"));
            }
            src.push_str(" }\n");
        }
    }
    src
}

/// Reference member merge: walk bases in declaration order collecting
/// (name, defining element) slots; a name from two different definers is
/// ambiguous, an own member takes over its slot (or appends). Returns the
/// ambiguous name on conflict.
fn reference_members(decls: &[Decl], i: usize) -> Result<Vec<(String, usize)>, String> {
    let mut slots: Vec<(String, usize)> = Vec::new();
    for j in 0..i {
        if decls[i].bases >> j & 1 == 0 {
            continue;
        }
        for (name, def) in reference_members(decls, j)? {
            match slots.iter().position(|(n, _)| *n == name) {
                None => slots.push((name, def)),
                Some(p) if slots[p].1 == def => {}
                Some(_) => return Err(name),
            }
        }
    }
    for (k, name) in MEMBER_NAMES.iter().enumerate() {
        if decls[i].members >> k & 1 == 0 {
            continue;
        }
        if let Some(p) = slots.iter().position(|(n, _)| n == name) {
            slots[p].1 = i;
        } else {
            slots.push((name.to_string(), i));
        }
    }
    Ok(slots)
}

fn flattened_members(model: &SemanticModel, decls: &[Decl], i: usize) -> Result<Vec<(String, usize)>, FlattenError> {
    let root = model.root(&format!("E{i}")).expect("generated root exists");
    let eff = flatten(model, root)?;
    Ok(eff
        .node(eff.root)
        .children
        .iter()
        .map(|&c| {
            let n = eff.node(c);
            let owner = model[n.defining()].owner.expect("members have owners");
            let owner_name = model[owner].name.as_deref().expect("generated names");
            let idx: usize = owner_name[1..].parse().expect("E<i> names");
            debug_assert!(idx < decls.len());
            (n.name.clone(), idx)
        })
        .collect())
}

proptest! {
    #![proptest_config(config(300))]

    /// Flattening a random specialization DAG produces exactly the member
    /// slots (in order, with the defining element) that the reference
    /// merge computes — and both sides agree on which DAGs are ambiguous.
    #[test]
    fn flattening_agrees_with_the_reference_member_merge(decls in dag()) {
        let source = dag_source(&decls);
        let (tree, diags) = parse(&source, "dag.dartwin");
        prop_assert!(diags.is_empty(), "generated source must parse:\n{source}");
        let model = build_model(&[tree]);
        prop_assert!(!model.has_errors(), "generated source must build:\n{source}\n{:?}", model.diagnostics);

        for i in 0..decls.len() {
            match (flattened_members(&model, &decls, i), reference_members(&decls, i)) {
                (Ok(got), Ok(want)) => {
                    prop_assert_eq!(got, want, "members of E{} from:\n{}", i, source);
                }
                (Err(FlattenError::Ambiguous { name, .. }), Err(want)) => {
                    prop_assert_eq!(name, want, "ambiguous name for E{} from:\n{}", i, source);
                }
                (got, want) => {
                    prop_assert!(false, "E{i}: flatten says {got:?}, reference says {want:?}\n{source}");
                }
            }
        }
    }
}
