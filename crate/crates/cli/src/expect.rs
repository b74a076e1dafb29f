//! Expectation files for batch runs. One check per line, `#` comments:
//!
//! ```text
//! ping R1 192.168.2.1 success
//! ping R1 192.168.2.1 fail NoRouteReverse
//! show config R1 contains FastEthernet0/1 192.168.0.1 255.255.255.0
//! ```

use thiserror::Error;

use t2n_session::SystemEvent;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Check {
    PingSucceeds,
    /// Optionally with the expected failure reason.
    PingFails(Option<String>),
    Contains(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expectation {
    pub line_no: usize,
    pub query: String,
    pub check: Check,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line_no}: cannot read expectation `{line}`")]
pub struct ExpectError {
    pub line_no: usize,
    pub line: String,
}

pub fn parse(text: &str) -> Result<Vec<Expectation>, ExpectError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = || ExpectError {
            line_no: n + 1,
            line: line.to_string(),
        };
        let (query, check) = match line.split_once(" contains ") {
            Some((q, needle)) => (
                q.trim().to_string(),
                Check::Contains(needle.trim().to_string()),
            ),
            None => {
                let words: Vec<&str> = line.split_whitespace().collect();
                let check = match words.as_slice() {
                    ["ping", _, _, "success"] => Check::PingSucceeds,
                    ["ping", _, _, "fail"] => Check::PingFails(None),
                    ["ping", _, _, "fail", reason] => Check::PingFails(Some(reason.to_string())),
                    _ => return Err(err()),
                };
                (words[..3].join(" "), check)
            }
        };
        if query.is_empty() {
            return Err(err());
        }
        out.push(Expectation {
            line_no: n + 1,
            query,
            check,
        });
    }
    Ok(out)
}

impl Expectation {
    /// `Ok(description)` when the query result meets the check.
    pub fn check(&self, ev: &SystemEvent) -> Result<String, String> {
        let desc = format!("line {}: {}", self.line_no, self.query);
        match (&self.check, ev) {
            (
                Check::PingSucceeds,
                SystemEvent::QueryResult {
                    ping: Some(p),
                    output,
                    ..
                },
            ) => {
                if p.success {
                    Ok(format!("{desc}: {output}"))
                } else {
                    Err(format!("{desc}: expected success, {output}"))
                }
            }
            (
                Check::PingFails(reason),
                SystemEvent::QueryResult {
                    ping: Some(p),
                    output,
                    ..
                },
            ) => {
                let actual = p.failure_reason.map(|r| format!("{r:?}"));
                match (p.success, reason) {
                    (true, _) => Err(format!("{desc}: expected failure, {output}")),
                    (false, Some(r)) if actual.as_deref() != Some(r.as_str()) => {
                        Err(format!("{desc}: expected {r}, {output}"))
                    }
                    _ => Ok(format!("{desc}: {output}")),
                }
            }
            (Check::Contains(needle), SystemEvent::QueryResult { output, .. }) => {
                if output.contains(needle.as_str()) {
                    Ok(format!("{desc}: contains `{needle}`"))
                } else {
                    Err(format!("{desc}: `{needle}` not found"))
                }
            }
            (_, other) => Err(format!("{desc}: {}", crate::render_event(other))),
        }
    }
}
