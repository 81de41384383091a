//! End-to-end checks over the repository's example models: parse, build,
//! flatten, diff, apply and render the gantry-crane evolution.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use dartwin_core::dartrans::{apply_transformation, check_applicability, parse_binding};
use dartwin_core::flatten::{diff, flatten};
use dartwin_core::diag::Severity;
use dartwin_core::model::{build_model, validate, ElementId, SemanticModel};
use dartwin_core::render::{render_pattern, Style};
use dartwin_core::syntax::{parse, print, sorted_for_comparison, SourceTree};

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

fn load(paths: &[&str]) -> SemanticModel {
    let mut trees: Vec<SourceTree> = Vec::new();
    for rel in paths {
        let path = repo_root().join(rel);
        let text = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{rel}: {e}"));
        let (tree, diags) = parse(&text, rel);
        assert!(
            diags.iter().all(|d| d.severity != Severity::Error),
            "{rel} should parse cleanly: {diags:?}"
        );
        trees.push(tree);
    }
    let model = build_model(&trees);
    assert!(
        !model.has_errors(),
        "model should build cleanly: {:?}",
        model.diagnostics
    );
    model
}

fn root(model: &SemanticModel, name: &str) -> ElementId {
    model
        .root(name)
        .unwrap_or_else(|| panic!("missing top-level element `{name}`"))
}

fn paths(set: &[&str]) -> BTreeSet<String> {
    set.iter().map(|s| s.to_string()).collect()
}

#[test]
fn extended_twin_flattens_to_the_union_of_base_and_additions() {
    let model = load(&[
        "fixtures/basic.dartwin",
        "patterns/OrthogonalWithNewOutput.dartwin",
    ]);
    let base = flatten(&model, root(&model, "Basic")).unwrap();
    assert_eq!(base.paths().len(), 14, "{:?}", base.paths());

    let after = model
        .find_qualified("OrthogonalWithNewOutput.OrthogonalWithNewOutput_after")
        .expect("after twin");
    let eff = flatten(&model, after).unwrap();
    let expected = paths(&[
        "TwinSystem",
        "TwinSystem.DT1",
        "TwinSystem.DT1.p11",
        "TwinSystem.DT1.p12",
        "TwinSystem.DT1.p13",
        "TwinSystem.DT2",
        "TwinSystem.DT2.p21",
        "TwinSystem.DT2.p22",
        "TwinSystem.c1",
        "TwinSystem.c2",
        "TwinSystem.c3",
        "TwinSystem.c4",
        "TwinSystem.c5",
        "AT",
        "AT.ts1",
        "AT.ts2",
        "AT.ts3",
        "AT.ts4",
        "Goal1",
        "Goal2",
        "a1",
        "a2",
    ]);
    assert_eq!(eff.paths(), expected);
}

#[test]
fn orthogonal_pattern_only_adds() {
    let model = load(&[
        "fixtures/basic.dartwin",
        "patterns/OrthogonalWithNewOutput.dartwin",
    ]);
    let changes = diff(&model, root(&model, "OrthogonalWithNewOutput")).unwrap();
    assert!(changes.removed.is_empty(), "removed: {:?}", changes.removed);
    assert!(changes.modified.is_empty());
    let added: BTreeSet<String> = changes.added.iter().cloned().collect();
    assert_eq!(
        added,
        paths(&[
            "TwinSystem.DT2",
            "TwinSystem.DT2.p21",
            "TwinSystem.DT2.p22",
            "TwinSystem.c4",
            "TwinSystem.c5",
            "AT.ts4",
            "Goal2",
            "a2",
        ])
    );
}

#[test]
fn replacement_pattern_swaps_the_digital_twin() {
    let model = load(&["patterns/Replacement.dartwin"]);
    let changes = diff(&model, root(&model, "Replacement")).unwrap();
    assert_eq!(
        changes.removed,
        vec!["TS.DT1", "TS.DT1.p1", "TS.DT1.p2", "TS.c1", "TS.c2", "a1"]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>()
    );
    assert_eq!(
        changes.added,
        vec!["TS.DT2", "TS.DT2.p1", "TS.DT2.p2", "TS.c1", "TS.c2", "a1"]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>()
    );
    assert_eq!(changes.modified, vec!["TS.c1", "TS.c2", "a1"]);
}

#[test]
fn replacement_applies_to_the_gantry_crane() {
    let model = load(&[
        "fixtures/optimal_control.dartwin",
        "patterns/Replacement.dartwin",
    ]);
    assert!(validate(&model).is_empty(), "{:?}", validate(&model));
    let pattern = root(&model, "Replacement");
    let target = root(&model, "OptimalControl");
    let binding_text = fs::read_to_string(repo_root().join("fixtures/crane.binding")).unwrap();
    let binding = parse_binding(&binding_text).unwrap();

    let report = check_applicability(&model, pattern, target, &binding).unwrap();
    assert!(report.ok, "{report}");

    let outcome = apply_transformation(&model, pattern, target, &binding).unwrap();

    assert_eq!(
        outcome.changes.removed,
        vec![
            "GantryCrane.TrajectoryLQR",
            "GantryCrane.TrajectoryLQR.actuate",
            "GantryCrane.TrajectoryLQR.sense",
            "actuation",
            "noSwinging",
            "sensing",
        ]
    );
    assert_eq!(
        outcome.changes.added,
        vec![
            "GantryCrane.TrajectoryOCP",
            "GantryCrane.TrajectoryOCP.actuate",
            "GantryCrane.TrajectoryOCP.sense",
            "actuation",
            "noSwinging",
            "sensing",
        ]
    );
    assert_eq!(outcome.changes.modified, vec!["actuation", "noSwinging", "sensing"]);

    let expected_final = "\
#dartwin OptimalControl {
    #twinsystem GantryCrane {
        #digitaltwin TrajectoryOCP {
            port actuate;
            port sense;
        }
    }
    part PhysCrane {
        port actuate;
        port sense;
    }
    #goal NoSwing;
    connection actuation connect GantryCrane.TrajectoryOCP.actuate to PhysCrane.actuate;
    connection sensing connect PhysCrane.sense to GantryCrane.TrajectoryOCP.sense;
    allocation noSwinging allocate NoSwing to GantryCrane.TrajectoryOCP;
}
";
    let (expected_tree, diags) = parse(expected_final, "expected");
    assert!(diags.is_empty(), "{diags:?}");
    assert_eq!(
        sorted_for_comparison(&outcome.final_tree).roots,
        sorted_for_comparison(&expected_tree).roots,
        "final tree:\n{}",
        print(&outcome.final_tree)
    );

    // The reduced tree is the core: an emptied twin system, the physical
    // crane with both ports, the goal — and nothing else.
    let reduced = print(&outcome.reduced);
    assert!(reduced.contains("#twinsystem GantryCrane :> Replacement.dt_core.TS"));
    assert!(reduced.contains("part PhysCrane :> Replacement.dt_core.AT"));
    assert!(reduced.contains("#goal NoSwing :> Replacement.dt_core.goal1"));
    assert!(!reduced.contains("TrajectoryLQR"));
    assert!(!reduced.contains("connection"));
}

#[test]
fn bound_tree_reparses_and_resolves_onto_the_pattern() {
    let model = load(&[
        "fixtures/optimal_control.dartwin",
        "patterns/Replacement.dartwin",
    ]);
    let binding_text = fs::read_to_string(repo_root().join("fixtures/crane.binding")).unwrap();
    let binding = parse_binding(&binding_text).unwrap();
    let outcome = apply_transformation(
        &model,
        root(&model, "Replacement"),
        root(&model, "OptimalControl"),
        &binding,
    )
    .unwrap();

    // Re-parse the bound tree next to the pattern: every `:>` must resolve,
    // and the bound root must specialize the before twin.
    let bound_text = print(&outcome.bound);
    let (bound_tree, diags) = parse(&bound_text, "bound");
    assert!(diags.is_empty(), "{diags:?}\n{bound_text}");
    let pattern_text =
        fs::read_to_string(repo_root().join("patterns/Replacement.dartwin")).unwrap();
    let (pattern_tree, _) = parse(&pattern_text, "pattern");
    let rebuilt = build_model(&[bound_tree, pattern_tree]);
    assert!(!rebuilt.has_errors(), "{:?}\n{bound_text}", rebuilt.diagnostics);

    let bound_root = rebuilt.root("OptimalControl").unwrap();
    let before = rebuilt.find_qualified("Replacement.dt_before").unwrap();
    assert_eq!(rebuilt[bound_root].specializes, vec![before]);
}

#[test]
fn pattern_render_highlights_exactly_the_changed_drawables() {
    let model = load(&[
        "fixtures/basic.dartwin",
        "patterns/OrthogonalWithNewOutput.dartwin",
    ]);
    let style = Style::default();
    let svg = render_pattern(&model, root(&model, "OrthogonalWithNewOutput"), &style).unwrap();
    let highlight = format!("stroke=\"{}\"", style.highlight_color);
    assert_eq!(
        svg.matches(&highlight).count(),
        8,
        "one highlighted stroke per added element:\n{svg}"
    );
    assert!(!svg.contains("stroke-dasharray=\"6 4\""), "nothing is removed");
    let again = render_pattern(&model, root(&model, "OrthogonalWithNewOutput"), &style).unwrap();
    assert_eq!(svg, again, "rendering is deterministic");
}
