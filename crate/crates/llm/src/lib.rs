//! Scenario adapters: turn scenario prose and dialog history into SCS text,
//! a clarification question, or a rejection.
//!
//! Three backends share the [`ScenarioAdapter`] trait:
//! [`rules::RulesAdapter`] (deterministic constrained-English converter),
//! [`replay::ReplayAdapter`] (recorded fixtures) and [`http::HttpAdapter`]
//! (OpenAI-compatible chat completion endpoint).

use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use t2n_core::validate::MissingField;
use t2n_core::{parse_scs, ScsDocument, ScsLineKind};

pub mod http;
pub mod replay;
pub mod rules;

pub use http::HttpAdapter;
pub use replay::ReplayAdapter;
pub use rules::{rules_convert, RulesAdapter};

/// Acknowledgment returned alongside every SCS outcome.
pub const ACKNOWLEDGMENT: &str = "Understood";

/// Shipped instruction prompt for live backends.
pub const SYSTEM_PROMPT: &str = include_str!("../../../fixtures/prompts/system_prompt.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    User,
    System,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub role: Role,
    pub text: String,
}

impl Turn {
    pub fn user(text: impl Into<String>) -> Self {
        Turn {
            role: Role::User,
            text: text.into(),
        }
    }

    pub fn system(text: impl Into<String>) -> Self {
        Turn {
            role: Role::System,
            text: text.into(),
        }
    }
}

/// Input to one adapter call. `history` holds the turns after the initial
/// scenario: system answers and user replies, oldest first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdapterExchange {
    pub scenario_text: String,
    pub history: Vec<Turn>,
}

impl AdapterExchange {
    pub fn new(scenario_text: impl Into<String>) -> Self {
        AdapterExchange {
            scenario_text: scenario_text.into(),
            history: Vec::new(),
        }
    }

    pub fn push(&mut self, turn: Turn) {
        self.history.push(turn);
    }

    /// Scenario followed by every user reply.
    pub fn user_texts(&self) -> Vec<&str> {
        std::iter::once(self.scenario_text.as_str())
            .chain(
                self.history
                    .iter()
                    .filter(|t| t.role == Role::User)
                    .map(|t| t.text.as_str()),
            )
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Outcome {
    Scs {
        text: String,
        acknowledgment: String,
    },
    Clarify {
        question: String,
        missing_fields: Vec<MissingField>,
    },
    Reject {
        reason: String,
    },
}

impl Outcome {
    pub fn scs(text: impl Into<String>) -> Self {
        Outcome::Scs {
            text: text.into(),
            acknowledgment: ACKNOWLEDGMENT.to_string(),
        }
    }

    pub fn clarify(question: impl Into<String>) -> Self {
        Outcome::Clarify {
            question: question.into(),
            missing_fields: Vec::new(),
        }
    }
}

#[derive(Debug, Error)]
pub enum AdapterError {
    #[error("backend unreachable: {0}")]
    BackendUnreachable(String),
    #[error("backend timed out after {0:?}")]
    BackendTimeout(Duration),
    #[error("backend rejected credentials (status {0})")]
    AuthFailure(u16),
    #[error("backend returned status {status}: {body}")]
    BackendStatus { status: u16, body: String },
    #[error("model output is not valid SCS after {attempts} attempt(s): {reason}")]
    MalformedModelOutput { attempts: u32, reason: String },
    #[error("no fixture for this scenario (key {0})")]
    FixtureMiss(String),
    #[error("could not interpret sentence {index}: {sentence}")]
    UnparsableSentence { index: usize, sentence: String },
    #[error("adapter configuration: {0}")]
    Config(String),
    #[error("fixture io: {0}")]
    Io(#[from] std::io::Error),
}

pub trait ScenarioAdapter: Send + Sync {
    fn name(&self) -> &'static str;
    fn generate(&self, exchange: &AdapterExchange) -> Result<Outcome, AdapterError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Http,
    Rules,
    Replay,
}

impl std::str::FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "http" => Ok(BackendKind::Http),
            "rules" => Ok(BackendKind::Rules),
            "replay" => Ok(BackendKind::Replay),
            other => Err(format!(
                "unknown adapter backend `{other}` (expected http, rules or replay)"
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdapterConfig {
    pub backend: BackendKind,
    pub endpoint_url: Option<String>,
    pub model_name: Option<String>,
    pub system_prompt: String,
    pub timeout: Duration,
    pub max_retries: u32,
    pub fixture_path: Option<PathBuf>,
}

impl AdapterConfig {
    pub fn new(backend: BackendKind) -> Self {
        AdapterConfig {
            backend,
            endpoint_url: None,
            model_name: None,
            system_prompt: SYSTEM_PROMPT.to_string(),
            timeout: Duration::from_secs(60),
            max_retries: 3,
            fixture_path: None,
        }
    }

    pub fn build(&self) -> Result<Box<dyn ScenarioAdapter>, AdapterError> {
        match self.backend {
            BackendKind::Rules => Ok(Box::new(RulesAdapter)),
            BackendKind::Replay => {
                let dir = self.fixture_path.as_ref().ok_or_else(|| {
                    AdapterError::Config("replay backend requires a fixture path".into())
                })?;
                Ok(Box::new(ReplayAdapter::load(dir)?))
            }
            BackendKind::Http => {
                if self.endpoint_url.is_none() {
                    return Err(AdapterError::Config(
                        "http backend requires an endpoint url".into(),
                    ));
                }
                Ok(Box::new(HttpAdapter::new(self.clone())?))
            }
        }
    }
}

/// Parses adapter-produced SCS and rejects any line the grammar does not know.
pub fn check_scs(text: &str) -> Result<ScsDocument, String> {
    let doc = parse_scs(text).map_err(|e| e.to_string())?;
    for entry in &doc.entries {
        for line in &entry.lines {
            if t2n_core::classify_line(line).kind == ScsLineKind::Unknown {
                return Err(format!("unknown statement `{}: {}`", entry.key, line));
            }
        }
    }
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn user_texts_skip_system_turns() {
        let mut ex = AdapterExchange::new("scenario");
        ex.push(Turn::system("question?"));
        ex.push(Turn::user("reply"));
        assert_eq!(ex.user_texts(), vec!["scenario", "reply"]);
    }

    #[test]
    fn config_requirements() {
        assert!(matches!(
            AdapterConfig::new(BackendKind::Replay).build(),
            Err(AdapterError::Config(_))
        ));
        assert!(matches!(
            AdapterConfig::new(BackendKind::Http).build(),
            Err(AdapterError::Config(_))
        ));
        assert_eq!(
            AdapterConfig::new(BackendKind::Rules)
                .build()
                .unwrap()
                .name(),
            "rules"
        );
    }

    #[test]
    fn check_scs_rejects_unknown_lines() {
        assert!(check_scs("R1: type router\n").is_ok());
        assert!(check_scs("R1: frobnicate\n").is_err());
        assert!(check_scs("not scs at all").is_err());
    }

    #[test]
    fn outcome_json_shape() {
        let v = serde_json::to_value(Outcome::scs("R1: type router\n")).unwrap();
        assert_eq!(v["kind"], "scs");
        assert_eq!(v["acknowledgment"], "Understood");
    }
}
