#!/usr/bin/env python3
"""Smoke test for the dartwin_py extension module.

Builds nothing itself: run `cargo build -p dartwin-python` first, then
`python3 python/smoke_test.py`. The script copies the built cdylib into a
temporary directory under an importable name and drives the whole API
surface once against the shipped models.
"""

import json
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def import_dartwin_py():
    candidates = [
        REPO / "target" / "debug" / "libdartwin_py.so",
        REPO / "target" / "debug" / "libdartwin_py.dylib",
        REPO / "target" / "debug" / "dartwin_py.dll",
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("build the extension first: cargo build -p dartwin-python")
    stage = Path(tempfile.mkdtemp(prefix="dartwin_py_"))
    suffix = ".pyd" if built.suffix == ".dll" else ".so"
    shutil.copy2(built, stage / f"dartwin_py{suffix}")
    sys.path.insert(0, str(stage))
    import dartwin_py

    return dartwin_py


def check(label, condition):
    if not condition:
        sys.exit(f"FAIL: {label}")
    print(f"ok: {label}")


def main():
    dartwin_py = import_dartwin_py()

    model = dartwin_py.Model.from_files(
        [
            str(REPO / "fixtures" / "basic.dartwin"),
            str(REPO / "fixtures" / "optimal_control.dartwin"),
            str(REPO / "patterns" / "OrthogonalWithNewOutput.dartwin"),
            str(REPO / "patterns" / "Replacement.dartwin"),
        ]
    )
    check("the shipped corpus is valid", model.is_valid())
    check(
        "roots are the four top-level elements",
        model.roots()
        == ["Basic", "OptimalControl", "OrthogonalWithNewOutput", "Replacement"],
    )

    flat = model.flatten("OrthogonalWithNewOutput.OrthogonalWithNewOutput_after")
    check("flattening inlines the inherited twin system", "DT2" in flat and "DT1" in flat)
    nodes = json.loads(
        model.flatten_json("OrthogonalWithNewOutput.OrthogonalWithNewOutput_after")
    )["nodes"]
    check("the flattened JSON lists every element", len(nodes) == 23)

    changes = model.diff("OrthogonalWithNewOutput")
    check(
        "the orthogonal pattern only adds",
        changes["removed"] == [] and len(changes["added"]) == 8,
    )

    binding = (REPO / "fixtures" / "crane.binding").read_text()
    outcome = model.apply("Replacement", "OptimalControl", binding)
    check("the evolved dartwin swaps the digital twin", "TrajectoryOCP" in outcome["final"])
    check("the final tree severs pattern references", ":>" not in outcome["final"])
    check("the bound step records the binding", ":> Replacement.dt_before" in outcome["bound"])
    check("three elements are modified in place", len(outcome["modified"]) == 3)

    svg = model.render("Basic")
    check("rendering yields an SVG document", svg.startswith("<svg ") and svg.endswith("</svg>\n"))
    check("two renders are byte-identical", svg == model.render("Basic"))
    check(
        "a style file changes the output",
        "#123456" in model.render("Replacement", style="highlight_color = #123456\n"),
    )

    exported = json.loads(model.export_json())
    check("the model export lists every element", len(exported["elements"]) > 0)

    broken = dartwin_py.Model("#dartwin Bad { part ; }", file="broken.dartwin")
    check("broken sources keep their diagnostics", not broken.is_valid())
    check(
        "diagnostics carry source locations",
        any(d.startswith("broken.dartwin:1:") for d in broken.diagnostics()),
    )
    try:
        broken.flatten()
    except ValueError as e:
        check("operations on broken models raise ValueError", "broken.dartwin" in str(e))
    else:
        sys.exit("FAIL: flatten on a broken model must raise")

    print("all smoke checks passed")


if __name__ == "__main__":
    main()
