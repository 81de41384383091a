//! Command-line toolchain for the DarTwin notation.
//!
//! One subcommand per pipeline stage:
//!
//! ```text
//! dartwin check <inputs>…                       parse + validate, report diagnostics
//! dartwin flatten <inputs>… [--target QN]       effective model as text or --json
//! dartwin diff <inputs>… [--target QN]          change set of an evolution pattern
//! dartwin apply <inputs>… --pattern P --binding B [-o OUT]
//! dartwin render <inputs>… [--target QN]        SVG diagram of a dartwin or pattern
//! dartwin export-json <inputs>…                 resolved semantic model as JSON
//! ```
//!
//! Every named `.dartwin` input pulls its directory's other `.dartwin`
//! files into the same namespace (models reference each other across
//! files without an import story). Diagnostics go to stderr in
//! `file:line:col: severity: message` form; payload goes to stdout or,
//! with `-o`, to the output file — written atomically, so a failing run
//! never leaves a truncated artifact.
//!
//! Exit codes: 0 success, 1 errors in the model (diagnostics, refused
//! application), 2 usage or I/O errors, 3 internal invariant failures.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dartwin_core::dartrans::{apply_transformation, parse_binding, ApplyError, Binding};
use dartwin_core::diag::Diagnostic;
use dartwin_core::flatten::{diff, export_effective_json, flatten, ChangeSet, DiffError};
use dartwin_core::model::{
    build_model, export_json, validate, ElementId, ElementKind, SemanticModel,
};
use dartwin_core::render::{
    parse_style, render_dartwin, render_pattern, RenderError, Style,
};
use dartwin_core::syntax::{parse, print};

/// Environment variable holding a default `--style` file path.
const STYLE_ENV: &str = "DARTWIN_STYLE";

#[derive(Parser)]
#[command(name = "dartwin")]
#[command(about = "Parse, evolve and render DarTwin models", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Arguments shared by every subcommand: the files to load.
#[derive(Args)]
struct Inputs {
    /// `.dartwin` files (or directories of them). Each file's directory
    /// is loaded into one namespace.
    #[arg(required = true, value_name = "PATH")]
    inputs: Vec<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate, reporting diagnostics.
    Check {
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Print the effective model of one element, specializations resolved.
    Flatten {
        #[command(flatten)]
        inputs: Inputs,
        /// Qualified name of the element to flatten (default: the sole
        /// top-level element of the first input).
        #[arg(long, value_name = "QNAME")]
        target: Option<String>,
        /// Emit JSON (paths, kinds, provenance) instead of notation text.
        #[arg(long)]
        json: bool,
        /// Write here instead of stdout.
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Show what an evolution pattern keeps, removes, adds and modifies.
    Diff {
        #[command(flatten)]
        inputs: Inputs,
        /// Qualified name of the `#dartrans` (default: the sole top-level
        /// element of the first input).
        #[arg(long, value_name = "QNAME")]
        target: Option<String>,
        /// Emit the change set as JSON.
        #[arg(long)]
        json: bool,
        /// Write here instead of stdout.
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Apply an evolution pattern to a dartwin via a binding file.
    Apply {
        #[command(flatten)]
        inputs: Inputs,
        /// The `#dartrans` to apply: a qualified name, or a path to the
        /// file declaring it.
        #[arg(long, value_name = "NAME|FILE", required = true)]
        pattern: String,
        /// Binding file: `pattern.path -> target.path` lines for the
        /// before-map, `pattern.path => name` lines for fresh names.
        #[arg(long, value_name = "FILE", required = true)]
        binding: PathBuf,
        /// Qualified name of the target `#dartwin` (default: the sole
        /// top-level element of the first input).
        #[arg(long, value_name = "QNAME")]
        target: Option<String>,
        /// Write the evolved model here instead of stdout.
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
        /// Also write the intermediate steps next to the output as
        /// `<stem>.bound/.reduced/.extended.dartwin` (requires -o).
        #[arg(long)]
        emit_steps: bool,
        /// Print the change set as JSON on stdout (requires -o).
        #[arg(long)]
        json: bool,
    },
    /// Draw a dartwin (or the change view of a pattern) as SVG.
    Render {
        #[command(flatten)]
        inputs: Inputs,
        /// Qualified name of the `#dartwin` or `#dartrans` to draw
        /// (default: the sole top-level element of the first input).
        #[arg(long, value_name = "QNAME")]
        target: Option<String>,
        /// Style file of `key = value` lines (default: $DARTWIN_STYLE
        /// if set, else built-in defaults).
        #[arg(long, value_name = "FILE")]
        style: Option<PathBuf>,
        /// Write here instead of stdout.
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Export the resolved semantic model as JSON.
    ExportJson {
        #[command(flatten)]
        inputs: Inputs,
        /// Write here instead of stdout.
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
}

/// A failed run: message plus process exit code.
struct Failure {
    message: String,
    code: u8,
}

impl Failure {
    /// Exit 1 — the inputs are wrong (diagnostics, refused application).
    fn input(message: impl Into<String>) -> Self {
        Failure { message: message.into(), code: 1 }
    }

    /// Exit 2 — the invocation is wrong (missing files, unknown names).
    fn usage(message: impl Into<String>) -> Self {
        Failure { message: message.into(), code: 2 }
    }

    /// Exit 3 — an invariant the tool promised to hold did not.
    fn internal(message: impl Into<String>) -> Self {
        Failure { message: message.into(), code: 3 }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            if !failure.message.is_empty() {
                eprintln!("{}", failure.message.trim_end());
            }
            ExitCode::from(failure.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Check { inputs } => {
            let ws = Workspace::load(&inputs.inputs, None)?;
            ws.report_diagnostics();
            if ws.model.has_errors() || dartwin_core::diag::has_errors(&ws.diagnostics) {
                Err(Failure { message: String::new(), code: 1 })
            } else {
                Ok(())
            }
        }
        Command::Flatten { inputs, target, json, output } => {
            let ws = Workspace::load_checked(&inputs.inputs, None)?;
            let target = ws.pick_target(target.as_deref())?;
            let eff = flatten(&ws.model, target)
                .map_err(|e| Failure::input(format!("error: {e}")))?;
            let payload = if json {
                export_effective_json(&ws.model, &eff)
            } else {
                let label = format!("{}.dartwin", ws.model.qualified_name(target));
                print(&eff.to_source_tree(&label))
            };
            emit(output.as_deref(), &payload)
        }
        Command::Diff { inputs, target, json, output } => {
            let ws = Workspace::load_checked(&inputs.inputs, None)?;
            let target = ws.pick_target(target.as_deref())?;
            let changes = diff(&ws.model, target).map_err(|e| match e {
                DiffError::NotAPattern(_) | DiffError::MissingCore(_) => {
                    Failure::usage(format!("error: {e}"))
                }
                DiffError::Flatten(_) => Failure::input(format!("error: {e}")),
            })?;
            let payload = if json { changes.to_json() } else { change_table(&changes) };
            emit(output.as_deref(), &payload)
        }
        Command::Apply { inputs, pattern, binding, target, output, emit_steps, json } => {
            if emit_steps && output.is_none() {
                return Err(Failure::usage("error: --emit-steps needs -o to name the step files"));
            }
            if json && output.is_none() {
                return Err(Failure::usage(
                    "error: --json prints the change set on stdout, so the model needs -o",
                ));
            }
            let ws = Workspace::load_checked(&inputs.inputs, Some(pattern.as_str()))?;
            let target = ws.pick_target(target.as_deref())?;
            let pattern = ws.pick_pattern(&pattern)?;
            let binding = read_binding(&binding)?;

            let outcome = apply_transformation(&ws.model, pattern, target, &binding)
                .map_err(|e| match e {
                    ApplyError::NotApplicable(report) => Failure::input(format!(
                        "error: the pattern does not apply to `{}`:\n{report}",
                        ws.model.qualified_name(target)
                    )),
                    ApplyError::NotAPattern(_)
                    | ApplyError::NotADartwin(_)
                    | ApplyError::MissingCore(_) => Failure::usage(format!("error: {e}")),
                    ApplyError::Flatten(_) => Failure::input(format!("error: {e}")),
                    ApplyError::LostEndpoint { .. } => {
                        Failure::internal(format!("internal error: {e}"))
                    }
                })?;

            match &output {
                None => emit(None, &print(&outcome.final_tree))?,
                Some(path) => {
                    write_atomic(path, &print(&outcome.final_tree))?;
                    if emit_steps {
                        for (step, tree) in [
                            ("bound", &outcome.bound),
                            ("reduced", &outcome.reduced),
                            ("extended", &outcome.extended),
                        ] {
                            write_atomic(&step_path(path, step), &print(tree))?;
                        }
                    }
                    let summary = if json {
                        outcome.changes.to_json()
                    } else {
                        format!(
                            "wrote {}: {} kept, {} removed, {} added, {} modified\n",
                            path.display(),
                            outcome.changes.kept.len(),
                            outcome.changes.removed.len(),
                            outcome.changes.added.len(),
                            outcome.changes.modified.len(),
                        )
                    };
                    emit(None, &summary)?;
                }
            }
            Ok(())
        }
        Command::Render { inputs, target, style, output } => {
            let ws = Workspace::load_checked(&inputs.inputs, None)?;
            let target = ws.pick_target(target.as_deref())?;
            let style = load_style(style.as_deref())?;
            let svg = match ws.model[target].kind {
                ElementKind::DarTrans => render_pattern(&ws.model, target, &style),
                _ => render_dartwin(&ws.model, target, &style),
            }
            .map_err(|e| match e {
                RenderError::NotADartwin(_)
                | RenderError::NotAPattern(_)
                | RenderError::MissingCore(_) => Failure::usage(format!("error: {e}")),
                RenderError::Flatten(_) | RenderError::LabelOverflow(..) => {
                    Failure::input(format!("error: {e}"))
                }
            })?;
            emit(output.as_deref(), &svg)
        }
        Command::ExportJson { inputs, output } => {
            let ws = Workspace::load_checked(&inputs.inputs, None)?;
            emit(output.as_deref(), &export_json(&ws.model))
        }
    }
}

/// Everything loaded for one invocation: sources for diagnostic
/// rendering, the resolved model, and which file came first.
struct Workspace {
    /// File label → source text, for `file:line:col` rendering.
    sources: BTreeMap<String, String>,
    model: SemanticModel,
    /// Label of the first input file (or first file of the first input
    /// directory) — its top-level element is the default target.
    primary: String,
    /// Parse, build and validation diagnostics, in discovery order.
    diagnostics: Vec<Diagnostic>,
}

impl Workspace {
    /// Load `inputs` (plus, when `pattern` names a file, that file) and
    /// everything sitting next to them.
    fn load(inputs: &[PathBuf], pattern: Option<&str>) -> Result<Workspace, Failure> {
        let mut files: Vec<PathBuf> = Vec::new();
        let mut seen: BTreeSet<PathBuf> = BTreeSet::new();

        let mut add = |file: PathBuf, files: &mut Vec<PathBuf>| -> Result<(), Failure> {
            let key = file
                .canonicalize()
                .map_err(|e| Failure::usage(format!("error: {}: {e}", file.display())))?;
            if seen.insert(key) {
                files.push(file);
            }
            Ok(())
        };

        let mut errs: Vec<String> = Vec::new();
        let mut roots: Vec<PathBuf> = inputs.to_vec();
        if let Some(p) = pattern {
            let p = Path::new(p);
            if p.exists() {
                roots.push(p.to_path_buf());
            }
        }
        for input in &roots {
            if !input.exists() {
                errs.push(format!("error: {}: no such file or directory", input.display()));
                continue;
            }
            let dir = if input.is_dir() {
                input.clone()
            } else {
                add(input.clone(), &mut files)?;
                input.parent().unwrap_or(Path::new(".")).to_path_buf()
            };
            let mut siblings: Vec<PathBuf> = fs::read_dir(&dir)
                .map_err(|e| Failure::usage(format!("error: {}: {e}", dir.display())))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "dartwin"))
                .collect();
            siblings.sort();
            for s in siblings {
                add(s, &mut files)?;
            }
        }
        if !errs.is_empty() {
            return Err(Failure::usage(errs.join("\n")));
        }

        let mut sources = BTreeMap::new();
        let mut trees = Vec::new();
        let mut diagnostics = Vec::new();
        for file in &files {
            let label = file.display().to_string();
            let text = fs::read_to_string(file)
                .map_err(|e| Failure::usage(format!("error: {label}: {e}")))?;
            let (tree, diags) = parse(&text, &label);
            diagnostics.extend(diags);
            trees.push(tree);
            sources.insert(label, text);
        }
        let model = build_model(&trees);
        diagnostics.extend(model.diagnostics.iter().cloned());
        diagnostics.extend(validate(&model));

        Ok(Workspace {
            sources,
            model,
            primary: files[0].display().to_string(),
            diagnostics,
        })
    }

    /// Like [`Workspace::load`], but errors in the model end the run.
    fn load_checked(inputs: &[PathBuf], pattern: Option<&str>) -> Result<Workspace, Failure> {
        let ws = Workspace::load(inputs, pattern)?;
        if ws.model.has_errors() || dartwin_core::diag::has_errors(&ws.diagnostics) {
            ws.report_diagnostics();
            return Err(Failure { message: String::new(), code: 1 });
        }
        Ok(ws)
    }

    fn report_diagnostics(&self) {
        for d in &self.diagnostics {
            let source = self.sources.get(&d.file).map(String::as_str).unwrap_or("");
            eprintln!("{}", d.render(source));
        }
    }

    /// The element a command operates on: `--target`, or the sole
    /// top-level element of the first input file.
    fn pick_target(&self, target: Option<&str>) -> Result<ElementId, Failure> {
        if let Some(name) = target {
            return self.model.find_qualified(name).ok_or_else(|| {
                Failure::usage(format!("error: no element named `{name}` in the loaded files"))
            });
        }
        let own: Vec<ElementId> = self
            .model
            .roots
            .iter()
            .copied()
            .filter(|&r| self.model[r].file == self.primary)
            .collect();
        match own.len() {
            1 => Ok(own[0]),
            0 => Err(Failure::usage(format!(
                "error: {} declares no top-level element; pass --target",
                self.primary
            ))),
            n => Err(Failure::usage(format!(
                "error: {} declares {n} top-level elements; pick one with --target",
                self.primary
            ))),
        }
    }

    /// The `#dartrans` behind `--pattern`: a qualified name, or a file
    /// declaring exactly one pattern.
    fn pick_pattern(&self, pattern: &str) -> Result<ElementId, Failure> {
        let path = Path::new(pattern);
        if path.exists() {
            let label = path.display().to_string();
            let own: Vec<ElementId> = self
                .model
                .roots
                .iter()
                .copied()
                .filter(|&r| {
                    self.model[r].file == label && self.model[r].kind == ElementKind::DarTrans
                })
                .collect();
            return match own.len() {
                1 => Ok(own[0]),
                0 => Err(Failure::usage(format!(
                    "error: {label} declares no `#dartrans` pattern"
                ))),
                n => Err(Failure::usage(format!(
                    "error: {label} declares {n} `#dartrans` patterns; name one with --pattern"
                ))),
            };
        }
        let id = self.model.find_qualified(pattern).ok_or_else(|| {
            Failure::usage(format!(
                "error: no element named `{pattern}` in the loaded files (and no such file)"
            ))
        })?;
        if self.model[id].kind != ElementKind::DarTrans {
            return Err(Failure::usage(format!(
                "error: `{pattern}` is not an evolution pattern (`#dartrans`)"
            )));
        }
        Ok(id)
    }
}

fn read_binding(path: &Path) -> Result<Binding, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("error: {}: {e}", path.display())))?;
    parse_binding(&text)
        .map_err(|e| Failure::input(format!("{}:{}: error: {}", path.display(), e.line, e.reason)))
}

fn load_style(flag: Option<&Path>) -> Result<Style, Failure> {
    let path = match flag {
        Some(p) => Some(p.to_path_buf()),
        None => std::env::var_os(STYLE_ENV).map(PathBuf::from),
    };
    let Some(path) = path else {
        return Ok(Style::default());
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| Failure::usage(format!("error: {}: {e}", path.display())))?;
    parse_style(&text)
        .map_err(|e| Failure::input(format!("{}:{}: error: {}", path.display(), e.line, e.reason)))
}

/// Human-readable change set: counts up front, then one path per line.
fn change_table(changes: &ChangeSet) -> String {
    let mut out = format!("kept ({} elements)\n", changes.kept.len());
    for (label, paths) in [
        ("removed", &changes.removed),
        ("added", &changes.added),
        ("modified", &changes.modified),
    ] {
        out.push_str(&format!("{label} ({})\n", paths.len()));
        for p in paths {
            out.push_str(&format!("    {p}\n"));
        }
    }
    out
}

/// `evolved.dartwin` → `evolved.bound.dartwin` and friends.
fn step_path(output: &Path, step: &str) -> PathBuf {
    let stem = output.file_stem().unwrap_or_default().to_string_lossy();
    output.with_file_name(format!("{stem}.{step}.dartwin"))
}

fn emit(output: Option<&Path>, payload: &str) -> Result<(), Failure> {
    match output {
        None => {
            std::io::stdout()
                .write_all(payload.as_bytes())
                .map_err(|e| Failure::usage(format!("error: stdout: {e}")))?;
            Ok(())
        }
        Some(path) => write_atomic(path, payload),
    }
}

/// Write via a temp file in the target directory plus rename, so readers
/// never observe a half-written artifact.
fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let fail = |e: &dyn std::fmt::Display| Failure::usage(format!("error: {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| fail(&e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| fail(&e))?;
    tmp.persist(path).map_err(|e| fail(&e))?;
    Ok(())
}
