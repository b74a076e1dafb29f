//! Structured command strings (SCS).
//!
//! SCS is a line-oriented format with one statement per line:
//!
//! ```text
//! # comment
//! R-1: type router
//! R-1: interface gi 0/0 ip 192.168.0.1/24
//! R-1: static_route 192.168.100.0/24 via R-2
//! R-1,R-2: R-1.gi 0/0 <-> R-2.Gi0/0
//! ```
//!
//! A key is either one device identifier or two identifiers joined by a
//! single comma (a connection). Lines sharing a key are merged into one entry
//! in first-appearance order. Statement contents are classified by
//! [`classify_line`]; semantics (interface families, address ranges) are left
//! to the extractor and validator.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ipv4::looks_dotted;
use crate::topology::NodeType;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScsError {
    #[error("line {line_no}: expected `KEY: statement`, got `{line}`")]
    MalformedLine { line_no: usize, line: String },
    #[error("line {line_no}: key `{key}` names more than two devices")]
    KeyArity { line_no: usize, key: String },
    #[error("document contains no statements")]
    EmptyDocument,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScsEntry {
    pub key: String,
    pub lines: Vec<String>,
}

impl ScsEntry {
    /// True for `A,B` connection keys.
    pub fn is_pair(&self) -> bool {
        self.key.contains(',')
    }

    pub fn devices(&self) -> Vec<&str> {
        self.key.split(',').collect()
    }
}

/// A parsed SCS document.
///
/// Equality compares entries only; `source_text` is provenance.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ScsDocument {
    pub entries: Vec<ScsEntry>,
    pub source_text: String,
}

impl PartialEq for ScsDocument {
    fn eq(&self, other: &Self) -> bool {
        self.entries.len() == other.entries.len()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.key == b.key && a.lines == b.lines)
    }
}

impl Eq for ScsDocument {}

impl ScsDocument {
    pub fn get(&self, key: &str) -> Option<&ScsEntry> {
        self.entries.iter().find(|e| e.key == key)
    }

    pub fn line_count(&self) -> usize {
        self.entries.iter().map(|e| e.lines.len()).sum()
    }

    /// Appends a statement, merging into an existing key.
    pub fn push(&mut self, key: &str, line: &str) {
        match self.entries.iter_mut().find(|e| e.key == key) {
            Some(entry) => entry.lines.push(line.to_string()),
            None => self.entries.push(ScsEntry {
                key: key.to_string(),
                lines: vec![line.to_string()],
            }),
        }
    }

    /// Every statement with its classification, in document order.
    pub fn statements(&self) -> impl Iterator<Item = (&ScsEntry, Statement)> {
        self.entries
            .iter()
            .flat_map(|e| e.lines.iter().map(move |l| (e, parse_statement(l))))
    }
}

fn normalize_key(raw: &str, line_no: usize, line: &str) -> Result<String, ScsError> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    if parts.len() > 2 {
        return Err(ScsError::KeyArity {
            line_no,
            key: raw.trim().to_string(),
        });
    }
    let valid = parts
        .iter()
        .all(|p| !p.is_empty() && !p.chars().any(|c| c.is_whitespace() || c == '#'));
    if !valid {
        return Err(ScsError::MalformedLine {
            line_no,
            line: line.to_string(),
        });
    }
    Ok(parts.join(","))
}

pub fn parse_scs(text: &str) -> Result<ScsDocument, ScsError> {
    let mut doc = ScsDocument {
        entries: Vec::new(),
        source_text: text.to_string(),
    };
    for (idx, raw) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((key, content)) = trimmed.split_once(':') else {
            return Err(ScsError::MalformedLine {
                line_no,
                line: line.to_string(),
            });
        };
        let key = normalize_key(key, line_no, line)?;
        let content = content.trim();
        if content.is_empty() {
            return Err(ScsError::MalformedLine {
                line_no,
                line: line.to_string(),
            });
        }
        doc.push(&key, content);
    }
    if doc.entries.is_empty() {
        return Err(ScsError::EmptyDocument);
    }
    Ok(doc)
}

/// Canonical text: one `key: line` per statement, LF terminated, entry order preserved.
pub fn render_scs(doc: &ScsDocument) -> String {
    let mut out = String::new();
    for entry in &doc.entries {
        for line in &entry.lines {
            out.push_str(&entry.key);
            out.push_str(": ");
            out.push_str(line);
            out.push('\n');
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScsLineKind {
    TypeDecl,
    NameDecl,
    InterfaceDecl,
    StaticRouteDecl,
    ConnectionDecl,
    Unknown,
}

impl fmt::Display for ScsLineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// How an interface statement expressed its netmask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MaskForm {
    Prefix(String),
    Mask(String),
}

/// A classified statement with the pieces the extractor needs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statement {
    Type(NodeType),
    Name(String),
    Interface {
        ifname: String,
        address: String,
        mask: MaskForm,
    },
    StaticRoute {
        destination: Option<(String, String)>,
        via: Option<String>,
    },
    Connection {
        a: (String, String),
        b: (String, String),
    },
    Unknown(String),
}

impl Statement {
    pub fn kind(&self) -> ScsLineKind {
        match self {
            Statement::Type(_) => ScsLineKind::TypeDecl,
            Statement::Name(_) => ScsLineKind::NameDecl,
            Statement::Interface { .. } => ScsLineKind::InterfaceDecl,
            Statement::StaticRoute { .. } => ScsLineKind::StaticRouteDecl,
            Statement::Connection { .. } => ScsLineKind::ConnectionDecl,
            Statement::Unknown(_) => ScsLineKind::Unknown,
        }
    }
}

/// Classification of one statement, keeping the raw text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScsLine {
    pub kind: ScsLineKind,
    pub raw: String,
}

pub fn classify_line(line: &str) -> ScsLine {
    ScsLine {
        kind: parse_statement(line).kind(),
        raw: line.to_string(),
    }
}

pub fn parse_statement(line: &str) -> Statement {
    let line = line.trim();
    if let Some(stmt) = parse_connection(line) {
        return stmt;
    }
    let tokens: Vec<&str> = line.split_whitespace().collect();
    let Some(head) = tokens.first() else {
        return Statement::Unknown(line.to_string());
    };
    let rest = &tokens[1..];
    let parsed = match head.to_ascii_lowercase().as_str() {
        "type" => parse_type(rest),
        "name" => match rest {
            [name] => Some(Statement::Name(name.to_string())),
            _ => None,
        },
        "interface" => parse_interface(rest),
        "static_route" => parse_static_route(rest),
        _ => None,
    };
    parsed.unwrap_or_else(|| Statement::Unknown(line.to_string()))
}

fn parse_type(rest: &[&str]) -> Option<Statement> {
    let [word] = rest else { return None };
    word.parse::<NodeType>().ok().map(Statement::Type)
}

fn is_prefix_len(s: &str) -> bool {
    !s.is_empty() && s.len() <= 3 && s.bytes().all(|b| b.is_ascii_digit())
}

fn parse_interface(rest: &[&str]) -> Option<Statement> {
    let ip_at = rest.iter().rposition(|t| t.eq_ignore_ascii_case("ip"))?;
    if ip_at == 0 {
        return None;
    }
    let ifname = rest[..ip_at].join(" ");
    match &rest[ip_at + 1..] {
        [cidr] => {
            let (address, prefix) = cidr.split_once('/')?;
            (looks_dotted(address) && is_prefix_len(prefix)).then(|| Statement::Interface {
                ifname,
                address: address.to_string(),
                mask: MaskForm::Prefix(prefix.to_string()),
            })
        }
        [address, kw, mask] if kw.eq_ignore_ascii_case("mask") => {
            (looks_dotted(address) && looks_dotted(mask)).then(|| Statement::Interface {
                ifname,
                address: address.to_string(),
                mask: MaskForm::Mask(mask.to_string()),
            })
        }
        _ => None,
    }
}

fn parse_static_route(rest: &[&str]) -> Option<Statement> {
    let mut destination = None;
    let mut via = None;
    let mut tokens = rest;
    if let [first, tail @ ..] = tokens {
        if !first.eq_ignore_ascii_case("via") {
            let (address, prefix) = first.split_once('/')?;
            if !looks_dotted(address) || !is_prefix_len(prefix) {
                return None;
            }
            destination = Some((address.to_string(), prefix.to_string()));
            tokens = tail;
        }
    }
    match tokens {
        [] => {}
        [kw, target] if kw.eq_ignore_ascii_case("via") => via = Some(target.to_string()),
        _ => return None,
    }
    Some(Statement::StaticRoute { destination, via })
}

fn parse_endpoint(side: &str) -> Option<(String, String)> {
    let (dev, iface) = side.trim().split_once('.')?;
    let dev = dev.trim();
    let iface = iface.trim();
    if dev.is_empty() || iface.is_empty() || dev.chars().any(char::is_whitespace) {
        return None;
    }
    Some((dev.to_string(), iface.to_string()))
}

fn parse_connection(line: &str) -> Option<Statement> {
    let (left, right) = line.split_once("<->")?;
    if right.contains("<->") {
        return None;
    }
    Some(Statement::Connection {
        a: parse_endpoint(left)?,
        b: parse_endpoint(right)?,
    })
}
