//! The line-oriented `.fol` foliation format.
//!
//! ```text
//! # sl(2, R) acting on the plane
//! name: sl2
//! vars: x y
//! generators:
//!   x*dx - y*dy
//!   y*dx
//!   x*dy
//! ```
//!
//! `#` starts a comment. `name:` and `description:` are optional. Every
//! indented line after `generators:` is one generator; an empty block is the
//! zero foliation.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, ParseError, Result};
use crate::parse::parse_vector_field;
use crate::vfield::FoliationSpec;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoliationFile {
    pub spec: FoliationSpec,
    pub name: Option<String>,
    pub description: Option<String>,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    chars
        .next()
        .is_some_and(|c| c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

pub fn parse_foliation(text: &str) -> std::result::Result<FoliationFile, ParseError> {
    let mut name = None;
    let mut description = None;
    let mut vars: Option<Vec<String>> = None;
    let mut gen_lines: Vec<(usize, usize, &str)> = Vec::new();
    let mut in_generators = false;
    let mut saw_generators = false;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let indented = line.starts_with([' ', '\t']);
        if in_generators && indented {
            let start = line.len() - line.trim_start().len();
            gen_lines.push((lineno, line[..start].chars().count(), line.trim()));
            continue;
        }
        in_generators = false;
        let content = line.trim_start();
        let col0 = line.len() - content.len() + 1;
        let Some((key, value)) = content.split_once(':') else {
            return Err(syntax(lineno, col0, "expected `key: value`"));
        };
        let value = value.trim();
        match key.trim() {
            "name" => name = Some(value.to_string()),
            "description" => description = Some(value.to_string()),
            "vars" => {
                if vars.is_some() {
                    return Err(syntax(lineno, col0, "duplicate `vars` line"));
                }
                let list: Vec<String> = value.split_whitespace().map(str::to_string).collect();
                if list.is_empty() {
                    return Err(syntax(lineno, col0, "`vars` needs at least one name"));
                }
                for (i, v) in list.iter().enumerate() {
                    if !is_identifier(v) {
                        return Err(syntax(lineno, col0, format!("invalid variable name `{v}`")));
                    }
                    if list[..i].contains(v) {
                        return Err(syntax(lineno, col0, format!("duplicate variable `{v}`")));
                    }
                }
                vars = Some(list);
            }
            "generators" => {
                if saw_generators {
                    return Err(syntax(lineno, col0, "duplicate `generators` block"));
                }
                if !value.is_empty() {
                    return Err(syntax(
                        lineno,
                        col0,
                        "generators go on the following indented lines",
                    ));
                }
                saw_generators = true;
                in_generators = true;
            }
            other => return Err(syntax(lineno, col0, format!("unknown key `{other}`"))),
        }
    }

    let vars = vars.ok_or_else(|| syntax(1, 1, "missing `vars` line"))?;
    let generators = gen_lines
        .into_iter()
        .map(|(lineno, indent, expr)| {
            parse_vector_field(expr, &vars).map_err(|e| e.relocate(lineno, indent))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let spec = FoliationSpec::new(vars, generators).expect("validated variables and arities");
    Ok(FoliationFile {
        spec,
        name,
        description,
    })
}

pub fn load_foliation(path: impl AsRef<Path>) -> Result<FoliationFile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(parse_foliation(&text)?)
}

impl FoliationFile {
    /// Canonical text form; parsing it yields the same spec.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(n) = &self.name {
            writeln!(out, "name: {n}").unwrap();
        }
        if let Some(d) = &self.description {
            writeln!(out, "description: {d}").unwrap();
        }
        writeln!(out, "vars: {}", self.spec.var_names().join(" ")).unwrap();
        writeln!(out, "generators:").unwrap();
        for g in self.spec.generators() {
            writeln!(out, "  {}", self.spec.format_field(g)).unwrap();
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}
