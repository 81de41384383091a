//! Python bindings for the DarTwin toolchain.
//!
//! Exposes one `Model` class wrapping the whole pipeline: parse and
//! resolve sources, flatten specialization hierarchies, diff evolution
//! patterns, apply them to concrete dartwins and render SVG diagrams —
//! all in-process, mirroring the `dartwin` command-line tool.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use dartwin_core::dartrans::{apply_transformation, parse_binding};
use dartwin_core::diag::{has_errors, Diagnostic};
use dartwin_core::flatten::{diff, export_effective_json, flatten};
use dartwin_core::model::{
    build_model, export_json, validate, ElementId, ElementKind, SemanticModel,
};
use dartwin_core::render::{parse_style, render_dartwin, render_pattern, Style};
use dartwin_core::syntax::{parse, print};

/// A parsed and resolved set of DarTwin sources.
///
/// Construction never raises: syntax and resolution problems are kept as
/// diagnostics (see `diagnostics()` / `is_valid()`), and the operations
/// that need a clean model raise `ValueError` listing them.
///
/// Usage:
///
///     from dartwin_py import Model
///     m = Model.from_files(["fixtures/basic.dartwin"])
///     print(m.flatten("Basic"))
#[pyclass]
struct Model {
    model: SemanticModel,
    diagnostics: Vec<Diagnostic>,
    sources: BTreeMap<String, String>,
}

impl Model {
    fn assemble(sources: Vec<(String, String)>) -> Model {
        let mut trees = Vec::new();
        let mut diagnostics = Vec::new();
        let mut stored = BTreeMap::new();
        for (file, text) in sources {
            let (tree, diags) = parse(&text, &file);
            diagnostics.extend(diags);
            trees.push(tree);
            stored.insert(file, text);
        }
        let model = build_model(&trees);
        diagnostics.extend(model.diagnostics.clone());
        diagnostics.extend(validate(&model));
        Model { model, diagnostics, sources: stored }
    }

    fn rendered_diagnostics(&self) -> Vec<String> {
        self.diagnostics
            .iter()
            .map(|d| {
                let source = self.sources.get(&d.file).map(String::as_str).unwrap_or("");
                d.render(source)
            })
            .collect()
    }

    fn ensure_clean(&self) -> PyResult<()> {
        if self.model.has_errors() || has_errors(&self.diagnostics) {
            return Err(PyValueError::new_err(format!(
                "the model has errors:\n{}",
                self.rendered_diagnostics().join("\n")
            )));
        }
        Ok(())
    }

    /// `name` if given, else the sole top-level element.
    fn locate(&self, name: Option<&str>) -> PyResult<ElementId> {
        match name {
            Some(name) => self
                .model
                .find_qualified(name)
                .ok_or_else(|| PyValueError::new_err(format!("no element named `{name}`"))),
            None => match self.model.roots.as_slice() {
                [only] => Ok(*only),
                roots => Err(PyValueError::new_err(format!(
                    "pass a name to pick one of the {} top-level elements",
                    roots.len()
                ))),
            },
        }
    }

    fn style_from(&self, style: Option<&str>) -> PyResult<Style> {
        match style {
            None => Ok(Style::default()),
            Some(text) => parse_style(text).map_err(|e| PyValueError::new_err(e.to_string())),
        }
    }
}

#[pymethods]
impl Model {
    /// Parse a single source text.
    ///
    /// Args:
    ///     source: DarTwin source text.
    ///     file: Label used in diagnostics.
    #[new]
    #[pyo3(signature = (source, file = "input.dartwin"))]
    fn new(source: &str, file: &str) -> Model {
        Model::assemble(vec![(file.to_string(), source.to_string())])
    }

    /// Parse several files into one shared namespace.
    ///
    /// Args:
    ///     paths: Files to read, in order.
    ///
    /// Raises:
    ///     IOError: If a file cannot be read.
    #[staticmethod]
    fn from_files(paths: Vec<String>) -> PyResult<Model> {
        let mut sources = Vec::new();
        for path in paths {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
            sources.push((path, text));
        }
        Ok(Model::assemble(sources))
    }

    /// All diagnostics, rendered as `file:line:col: severity: message`.
    fn diagnostics(&self) -> Vec<String> {
        self.rendered_diagnostics()
    }

    /// True when no diagnostic has error severity.
    fn is_valid(&self) -> bool {
        !self.model.has_errors() && !has_errors(&self.diagnostics)
    }

    /// Qualified names of the top-level elements, in declaration order.
    fn roots(&self) -> Vec<String> {
        self.model
            .roots
            .iter()
            .map(|&r| self.model.qualified_name(r))
            .collect()
    }

    /// The effective (fully flattened) model as canonical source text.
    ///
    /// Args:
    ///     target: Qualified element name; defaults to the sole root.
    #[pyo3(signature = (target = None))]
    fn flatten(&self, target: Option<&str>) -> PyResult<String> {
        self.ensure_clean()?;
        let root = self.locate(target)?;
        let eff = flatten(&self.model, root).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let label = format!("{}.dartwin", self.model.qualified_name(root));
        Ok(print(&eff.to_source_tree(&label)))
    }

    /// The effective model as JSON, with per-node origin provenance.
    #[pyo3(signature = (target = None))]
    fn flatten_json(&self, target: Option<&str>) -> PyResult<String> {
        self.ensure_clean()?;
        let root = self.locate(target)?;
        let eff = flatten(&self.model, root).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(export_effective_json(&self.model, &eff))
    }

    /// The change set a `#dartrans` pattern induces.
    ///
    /// Args:
    ///     pattern: Qualified pattern name; defaults to the sole root.
    ///
    /// Returns:
    ///     Dict with `kept`, `removed`, `added` and `modified` path lists.
    #[pyo3(signature = (pattern = None))]
    fn diff(&self, pattern: Option<&str>) -> PyResult<BTreeMap<String, Vec<String>>> {
        self.ensure_clean()?;
        let pattern = self.locate(pattern)?;
        let changes =
            diff(&self.model, pattern).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(BTreeMap::from([
            ("kept".to_string(), changes.kept),
            ("removed".to_string(), changes.removed),
            ("added".to_string(), changes.added),
            ("modified".to_string(), changes.modified),
        ]))
    }

    /// Apply an evolution pattern to a dartwin via a binding.
    ///
    /// Args:
    ///     pattern: Qualified name of the `#dartrans` element.
    ///     target: Qualified name of the `#dartwin` to evolve.
    ///     binding: Binding text (`pattern.path -> target.path` lines,
    ///         `pattern.path => fresh_name` for introduced elements).
    ///
    /// Returns:
    ///     Dict with the step trees (`bound`, `reduced`, `extended`,
    ///     `final`) as source text plus the change set lists.
    ///
    /// Raises:
    ///     ValueError: If the binding does not parse or the pattern does
    ///         not apply; the message lists every violation.
    fn apply<'py>(
        &self,
        py: Python<'py>,
        pattern: &str,
        target: &str,
        binding: &str,
    ) -> PyResult<Bound<'py, PyDict>> {
        self.ensure_clean()?;
        let pattern = self.locate(Some(pattern))?;
        let target = self.locate(Some(target))?;
        let binding = parse_binding(binding)
            .map_err(|e| PyValueError::new_err(format!("binding line {}: {}", e.line, e.reason)))?;
        let outcome = apply_transformation(&self.model, pattern, target, &binding)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;

        let result = PyDict::new(py);
        result.set_item("bound", print(&outcome.bound))?;
        result.set_item("reduced", print(&outcome.reduced))?;
        result.set_item("extended", print(&outcome.extended))?;
        result.set_item("final", print(&outcome.final_tree))?;
        result.set_item("kept", outcome.changes.kept)?;
        result.set_item("removed", outcome.changes.removed)?;
        result.set_item("added", outcome.changes.added)?;
        result.set_item("modified", outcome.changes.modified)?;
        Ok(result)
    }

    /// Render a dartwin (or the change view of a pattern) as SVG.
    ///
    /// Args:
    ///     target: Qualified element name; defaults to the sole root.
    ///     style: Optional style text (`key = value` lines).
    #[pyo3(signature = (target = None, style = None))]
    fn render(&self, target: Option<&str>, style: Option<&str>) -> PyResult<String> {
        self.ensure_clean()?;
        let root = self.locate(target)?;
        let style = self.style_from(style)?;
        let svg = if self.model[root].kind == ElementKind::DarTrans {
            render_pattern(&self.model, root, &style)
        } else {
            render_dartwin(&self.model, root, &style)
        };
        svg.map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// The resolved element graph as JSON.
    fn export_json(&self) -> String {
        export_json(&self.model)
    }

    fn __repr__(&self) -> String {
        format!(
            "Model({} elements, {} roots, {} diagnostics)",
            self.model.elements().count(),
            self.model.roots.len(),
            self.diagnostics.len()
        )
    }
}

#[pymodule]
fn dartwin_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    Ok(())
}
