//! Reading and writing LDraw `.ldr` / `.mpd` text.
//!
//! Only line types 0 and 1 are interpreted. Primitive geometry (types 2–5)
//! and anything unrecognised is carried through verbatim so that a
//! parse/serialize cycle never loses content.

use std::fmt::Write as _;

use thiserror::Error;

use crate::math::{Mat3, Vec3};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: malformed type-1 line: {reason}")]
    MalformedSubfileRef { line: usize, reason: String },
    #[error("line {line}: {detail}")]
    UnterminatedFile { line: usize, detail: String },
    #[error("line {line}: duplicate file name `{name}`")]
    DuplicateFileName { line: usize, name: String },
}

impl ParseError {
    pub fn line(&self) -> usize {
        match self {
            ParseError::MalformedSubfileRef { line, .. }
            | ParseError::UnterminatedFile { line, .. }
            | ParseError::DuplicateFileName { line, .. } => *line,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Meta {
    /// `0 STEP`
    Step,
    /// `0 FILE <name>`
    FileBegin(String),
    /// `0 NOFILE`
    FileEnd,
    /// Any other meta line, stored as the text after the leading `0`.
    Other(String),
}

/// A type-1 line: a positioned, coloured reference to a part or submodel.
#[derive(Debug, Clone, PartialEq)]
pub struct SubfileRef {
    pub color: u32,
    pub translation: Vec3,
    pub rotation: Mat3,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LdrawLine {
    Empty,
    /// `0 // text`
    Comment(String),
    Meta(Meta),
    SubfileRef(SubfileRef),
    /// Line types 2–5 and anything else, kept byte for byte.
    Opaque(String),
    /// A `1 ...` line that failed to parse. Only produced by [`parse_lenient`].
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LdrawFile {
    pub name: String,
    pub lines: Vec<LdrawLine>,
}

impl LdrawFile {
    pub fn new(name: impl Into<String>) -> Self {
        LdrawFile { name: name.into(), lines: Vec::new() }
    }

    pub fn subfile_refs(&self) -> impl Iterator<Item = &SubfileRef> {
        self.lines.iter().filter_map(|l| match l {
            LdrawLine::SubfileRef(r) => Some(r),
            _ => None,
        })
    }
}

/// A parsed document. The first file is the primary model.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    /// Written with `0 FILE` / `0 NOFILE` scopes.
    pub multipart: bool,
    pub files: Vec<LdrawFile>,
}

impl Document {
    pub fn single(file: LdrawFile) -> Self {
        Document { multipart: false, files: vec![file] }
    }

    pub fn primary(&self) -> Option<&LdrawFile> {
        self.files.first()
    }

    pub fn file(&self, name: &str) -> Option<&LdrawFile> {
        self.files.iter().find(|f| f.name.eq_ignore_ascii_case(name))
    }

    /// Type-1 lines across every file.
    pub fn subfile_ref_count(&self) -> usize {
        self.files.iter().map(|f| f.subfile_refs().count()).sum()
    }

    pub fn line_count(&self) -> usize {
        let scope_lines = if self.multipart { 2 * self.files.len() } else { 0 };
        scope_lines + self.files.iter().map(|f| f.lines.len()).sum::<usize>()
    }
}

/// Classify one line of LDraw text. `line_no` is 1-based and only used for errors.
pub fn parse_line(raw: &str, line_no: usize) -> Result<LdrawLine, ParseError> {
    let raw = raw.strip_suffix('\r').unwrap_or(raw);
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Ok(LdrawLine::Empty);
    }
    let mut parts = trimmed.splitn(2, char::is_whitespace);
    let kind = parts.next().unwrap_or("");
    let rest = parts.next().unwrap_or("").trim();
    match kind {
        "0" => Ok(classify_meta(rest)),
        "1" => parse_subfile_ref(rest, line_no).map(LdrawLine::SubfileRef),
        _ => Ok(LdrawLine::Opaque(raw.to_string())),
    }
}

fn classify_meta(rest: &str) -> LdrawLine {
    if let Some(c) = rest.strip_prefix("//") {
        return LdrawLine::Comment(c.trim().to_string());
    }
    let mut words = rest.split_whitespace();
    match words.next() {
        Some("STEP") if words.next().is_none() => LdrawLine::Meta(Meta::Step),
        Some("NOFILE") if words.next().is_none() => LdrawLine::Meta(Meta::FileEnd),
        Some("FILE") => {
            let name = rest["FILE".len()..].trim();
            if name.is_empty() {
                LdrawLine::Meta(Meta::Other(rest.to_string()))
            } else {
                LdrawLine::Meta(Meta::FileBegin(name.to_string()))
            }
        }
        _ => LdrawLine::Meta(Meta::Other(rest.to_string())),
    }
}

fn parse_subfile_ref(rest: &str, line: usize) -> Result<SubfileRef, ParseError> {
    let fields: Vec<&str> = rest.split_whitespace().collect();
    if fields.len() != 14 {
        return Err(ParseError::MalformedSubfileRef {
            line,
            reason: format!("expected 14 fields after `1`, found {}", fields.len()),
        });
    }
    let color = fields[0].parse::<u32>().map_err(|_| ParseError::MalformedSubfileRef {
        line,
        reason: format!("color `{}` is not a colour code", fields[0]),
    })?;
    let mut nums = [0.0f64; 12];
    for (slot, tok) in nums.iter_mut().zip(&fields[1..13]) {
        *slot = tok
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| ParseError::MalformedSubfileRef {
                line,
                reason: format!("`{tok}` is not a number"),
            })?;
    }
    let mut rotation = [0.0; 9];
    rotation.copy_from_slice(&nums[3..12]);
    Ok(SubfileRef {
        color,
        translation: Vec3::new(nums[0], nums[1], nums[2]),
        rotation: Mat3(rotation),
        file: fields[13].to_string(),
    })
}

/// Parse a document, failing on the first malformed type-1 line or scope error.
pub fn parse(text: &str) -> Result<Document, ParseError> {
    let (doc, errors) = parse_lenient(text);
    match errors.into_iter().next() {
        Some(e) => Err(e),
        None => Ok(doc),
    }
}

/// Parse a document, recording every error instead of stopping.
///
/// Malformed type-1 lines are kept as [`LdrawLine::Malformed`]; stray scope
/// markers are dropped and orphaned lines are attached to the nearest file.
pub fn parse_lenient(text: &str) -> (Document, Vec<ParseError>) {
    let mut errors = Vec::new();
    let mut classified = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match parse_line(raw, line_no) {
            Ok(l) => l,
            Err(e) => {
                errors.push(e);
                LdrawLine::Malformed(raw.trim_end_matches('\r').to_string())
            }
        };
        classified.push((line_no, line));
    }

    let multipart = classified
        .iter()
        .any(|(_, l)| matches!(l, LdrawLine::Meta(Meta::FileBegin(_))));
    if !multipart {
        let mut file = LdrawFile::default();
        for (line_no, line) in classified {
            if matches!(line, LdrawLine::Meta(Meta::FileEnd)) {
                errors.push(ParseError::UnterminatedFile {
                    line: line_no,
                    detail: "`0 NOFILE` without an open `0 FILE`".into(),
                });
                continue;
            }
            file.lines.push(line);
        }
        let doc = if file.lines.is_empty() { Document::default() } else { Document::single(file) };
        return (doc, errors);
    }

    let mut files: Vec<LdrawFile> = Vec::new();
    let mut open = false;
    for (line_no, line) in classified {
        match line {
            LdrawLine::Meta(Meta::FileBegin(name)) => {
                if files.iter().any(|f| f.name.eq_ignore_ascii_case(&name)) {
                    errors.push(ParseError::DuplicateFileName { line: line_no, name: name.clone() });
                }
                files.push(LdrawFile::new(name));
                open = true;
            }
            LdrawLine::Meta(Meta::FileEnd) => {
                if !open {
                    errors.push(ParseError::UnterminatedFile {
                        line: line_no,
                        detail: "`0 NOFILE` without an open `0 FILE`".into(),
                    });
                }
                open = false;
            }
            LdrawLine::Empty if !open => {}
            other => {
                if !open {
                    errors.push(ParseError::UnterminatedFile {
                        line: line_no,
                        detail: "content outside of any `0 FILE` scope".into(),
                    });
                    if files.is_empty() {
                        files.push(LdrawFile::default());
                    }
                }
                files.last_mut().expect("file exists").lines.push(other);
            }
        }
    }
    (Document { multipart: true, files }, errors)
}

/// Format a number the way LDraw files usually carry them: integers without
/// a decimal point, otherwise at most six decimals with trailing zeros trimmed.
pub fn format_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        let i = v as i64;
        return i.to_string();
    }
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

pub fn format_line(line: &LdrawLine) -> String {
    match line {
        LdrawLine::Empty => String::new(),
        LdrawLine::Comment(c) if c.is_empty() => "0 //".to_string(),
        LdrawLine::Comment(c) => format!("0 // {c}"),
        LdrawLine::Meta(Meta::Step) => "0 STEP".to_string(),
        LdrawLine::Meta(Meta::FileBegin(n)) => format!("0 FILE {n}"),
        LdrawLine::Meta(Meta::FileEnd) => "0 NOFILE".to_string(),
        LdrawLine::Meta(Meta::Other(t)) if t.is_empty() => "0".to_string(),
        LdrawLine::Meta(Meta::Other(t)) => format!("0 {t}"),
        LdrawLine::SubfileRef(r) => {
            let mut s = format!("1 {}", r.color);
            for v in r.translation.to_array().iter().chain(r.rotation.0.iter()) {
                s.push(' ');
                s.push_str(&format_number(*v));
            }
            s.push(' ');
            s.push_str(&r.file);
            s
        }
        LdrawLine::Opaque(t) | LdrawLine::Malformed(t) => t.clone(),
    }
}

/// Serialize to LF-terminated text.
pub fn serialize(doc: &Document) -> String {
    let mut out = String::new();
    for file in &doc.files {
        if doc.multipart {
            let _ = writeln!(out, "0 FILE {}", file.name);
        }
        for line in &file.lines {
            out.push_str(&format_line(line));
            out.push('\n');
        }
        if doc.multipart {
            out.push_str("0 NOFILE\n");
        }
    }
    out
}
