//! The binding file format.
//!
//! A binding is a plain text file with one entry per line:
//!
//! ```text
//! # map a pattern element onto a target element
//! TS.DT1 -> GantryCrane.TrajectoryLQR
//! # give a fresh name to an element the pattern adds
//! TS.DT2 => TrajectoryOCP
//! ```
//!
//! `->` entries bind elements of the pattern's *before* twin to elements of
//! the target dartwin; `=>` entries name elements the *after* twin adds.
//! Blank lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;

use thiserror::Error;

/// A parsed binding: the element map and the fresh names for additions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Binding {
    /// Pattern path (in the before twin) to target path, from `->` lines.
    pub map: BTreeMap<String, String>,
    /// Pattern path (in the after twin) to fresh name, from `=>` lines.
    pub renames: BTreeMap<String, String>,
}

/// A syntax error in a binding file.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {reason}")]
pub struct BindingError {
    /// 1-based line number of the offending entry.
    pub line: usize,
    /// What was wrong with it.
    pub reason: String,
}

impl BindingError {
    fn new(line: usize, reason: impl Into<String>) -> Self {
        BindingError { line, reason: reason.into() }
    }
}

/// Parses the text of a binding file.
pub fn parse_binding(text: &str) -> Result<Binding, BindingError> {
    let mut binding = Binding::default();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let entry = raw.trim();
        if entry.is_empty() || entry.starts_with('#') {
            continue;
        }
        if let Some((left, right)) = entry.split_once("=>") {
            let from = check_path(left.trim(), line)?;
            let to = check_name(right.trim(), line)?;
            if binding.renames.insert(from.clone(), to).is_some() {
                return Err(BindingError::new(line, format!("duplicate rename for `{from}`")));
            }
        } else if let Some((left, right)) = entry.split_once("->") {
            let from = check_path(left.trim(), line)?;
            let to = check_path(right.trim(), line)?;
            if binding.map.insert(from.clone(), to).is_some() {
                return Err(BindingError::new(line, format!("duplicate binding for `{from}`")));
            }
        } else {
            return Err(BindingError::new(line, "expected `pattern -> target` or `pattern => name`"));
        }
    }
    Ok(binding)
}

fn check_path(text: &str, line: usize) -> Result<String, BindingError> {
    if text.is_empty() {
        return Err(BindingError::new(line, "missing element path"));
    }
    for segment in text.split('.') {
        if !is_identifier(segment) {
            return Err(BindingError::new(line, format!("`{text}` is not a dotted element path")));
        }
    }
    Ok(text.to_string())
}

fn check_name(text: &str, line: usize) -> Result<String, BindingError> {
    if is_identifier(text) {
        Ok(text.to_string())
    } else {
        Err(BindingError::new(line, format!("`{text}` is not a valid element name")))
    }
}

fn is_identifier(text: &str) -> bool {
    let mut chars = text.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_')
}
