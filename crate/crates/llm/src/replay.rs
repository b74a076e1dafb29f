//! Recorded-response backend.
//!
//! A fixture directory holds `<stem>.txt` files with the user text of a
//! conversation (the scenario, then each reply) and exactly one response file
//! next to each: `<stem>.scs`, `<stem>.clarify` or `<stem>.reject`. Lookups
//! hash the user text after lowercasing and collapsing whitespace, so line
//! wrapping in fixtures does not matter.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::{check_scs, AdapterError, AdapterExchange, Outcome, ScenarioAdapter};

/// Normalized hash of a conversation's user turns.
pub fn fixture_key<S: AsRef<str>>(user_texts: &[S]) -> String {
    let joined: Vec<&str> = user_texts.iter().map(AsRef::as_ref).collect();
    let normalized = joined
        .join(" ")
        .to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ");
    hex::encode(Sha256::digest(normalized.as_bytes()))
}

#[derive(Debug, Clone)]
pub struct ReplayAdapter {
    fixtures: HashMap<String, (PathBuf, Outcome)>,
}

impl ReplayAdapter {
    pub fn load(dir: &Path) -> Result<Self, AdapterError> {
        let mut fixtures = HashMap::new();
        let mut entries: Vec<PathBuf> = fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .collect();
        entries.sort();
        for path in entries
            .into_iter()
            .filter(|p| p.extension().is_some_and(|e| e == "txt"))
        {
            let text = fs::read_to_string(&path)?;
            let outcome = read_response(&path)?;
            fixtures.insert(fixture_key(&[text]), (path, outcome));
        }
        Ok(ReplayAdapter { fixtures })
    }

    pub fn len(&self) -> usize {
        self.fixtures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixtures.is_empty()
    }
}

fn read_response(txt: &Path) -> Result<Outcome, AdapterError> {
    let found: Vec<(String, PathBuf)> = ["scs", "clarify", "reject"]
        .iter()
        .map(|ext| (ext.to_string(), txt.with_extension(ext)))
        .filter(|(_, p)| p.exists())
        .collect();
    let [(ext, path)] = found.as_slice() else {
        return Err(AdapterError::Config(format!(
            "{} needs exactly one of .scs, .clarify or .reject next to it",
            txt.display()
        )));
    };
    let body = fs::read_to_string(path)?;
    match ext.as_str() {
        "scs" => {
            check_scs(&body)
                .map_err(|e| AdapterError::Config(format!("{}: {e}", path.display())))?;
            Ok(Outcome::scs(body))
        }
        "clarify" => Ok(Outcome::clarify(body.trim())),
        _ => Ok(Outcome::Reject {
            reason: body.trim().to_string(),
        }),
    }
}

impl ScenarioAdapter for ReplayAdapter {
    fn name(&self) -> &'static str {
        "replay"
    }

    fn generate(&self, exchange: &AdapterExchange) -> Result<Outcome, AdapterError> {
        let key = fixture_key(&exchange.user_texts());
        match self.fixtures.get(&key) {
            Some((path, outcome)) => {
                tracing::debug!(fixture = %path.display(), "replay hit");
                Ok(outcome.clone())
            }
            None => Err(AdapterError::FixtureMiss(key)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Turn;

    #[test]
    fn key_ignores_case_and_spacing() {
        assert_eq!(
            fixture_key(&["R1  is\na Router"]),
            fixture_key(&["r1 is a router"])
        );
        assert_ne!(
            fixture_key(&["r1 is a router"]),
            fixture_key(&["r2 is a router"])
        );
        assert_eq!(fixture_key(&["a", "b"]), fixture_key(&["a\n\nb"]));
    }

    #[test]
    fn loads_and_replays() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("one.txt"), "R1 is a router.").unwrap();
        fs::write(dir.path().join("one.scs"), "R1: type router\n").unwrap();
        fs::write(dir.path().join("two.txt"), "Routes please.\nOn R1 to R2.").unwrap();
        fs::write(dir.path().join("two.clarify"), "Which routes?\n").unwrap();
        let adapter = ReplayAdapter::load(dir.path()).unwrap();
        assert_eq!(adapter.len(), 2);
        assert_eq!(
            adapter
                .generate(&AdapterExchange::new("r1 IS a router."))
                .unwrap(),
            Outcome::scs("R1: type router\n")
        );

        let mut ex = AdapterExchange::new("Routes please.");
        ex.push(Turn::system("?"));
        ex.push(Turn::user("On R1 to R2."));
        assert_eq!(
            adapter.generate(&ex).unwrap(),
            Outcome::clarify("Which routes?")
        );

        assert!(matches!(
            adapter.generate(&AdapterExchange::new("unknown")),
            Err(AdapterError::FixtureMiss(_))
        ));
    }

    #[test]
    fn broken_fixture_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("bad.txt"), "x").unwrap();
        fs::write(dir.path().join("bad.scs"), "R1: frobnicate\n").unwrap();
        assert!(matches!(
            ReplayAdapter::load(dir.path()),
            Err(AdapterError::Config(_))
        ));
        fs::remove_file(dir.path().join("bad.scs")).unwrap();
        assert!(matches!(
            ReplayAdapter::load(dir.path()),
            Err(AdapterError::Config(_))
        ));
    }
}
